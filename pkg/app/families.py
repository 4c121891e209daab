"""
Movable-singularity families of the built-in models.

Each first-time family fixes the leading balance of an expansion together
with the normalization of its resonant coefficients, so the free parameters
come out as (alpha, beta, gamma, delta). The quasi-Painlevé expansions in the
second time take their balance from the search and keep only the local
variable and resonance normalization here, giving (b, c1, c2, c3).
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Mapping, Optional, Tuple

from .algebra import gen
from .exceptions import UnknownModel
from .painleve import LaurentSolution, PoleAnsatz, ResonancePin, ScalarODE, quasi_test
from .parser import parse_expression


@dataclass(frozen=True)
class Family:
    model: str
    name: str
    time: str
    point: str
    exponents: Mapping[str, int]
    leading: Mapping[str, str]
    pins: Tuple[ResonancePin, ...] = ()
    leading_parameters: Tuple[str, ...] = ()
    # reduction expected to carry a nonzero second-time deformation coefficient
    has_deformation: bool = True

    @property
    def key(self) -> str:
        return f"{self.model}/{self.name}"

    @property
    def parameters(self) -> Tuple[str, ...]:
        return (self.point,) + self.leading_parameters + tuple(p.parameter for p in self.pins)

    def ansatz(self) -> PoleAnsatz:
        return PoleAnsatz(
            time=self.time,
            point=gen(self.point),
            exponents=dict(self.exponents),
            leading={v: parse_expression(c) for v, c in self.leading.items()},
            parameters=(self.point,) + self.leading_parameters,
        )


def _pins(variable_pins) -> Tuple[ResonancePin, ...]:
    return tuple(ResonancePin(order, variable, value, parameter) for order, variable, value, parameter in variable_pins)


FAMILIES: Dict[str, Family] = {
    family.key: family
    for family in (
        Family(
            model="pIV", name="main", time="t1", point="alpha",
            exponents={"q": -1, "p": -1},
            leading={"q": "hbar", "p": "-hbar/4"},
            pins=_pins([(3, "q", "beta/hbar^2", "beta")]),
        ),
        Family(
            model="gar92", name="main", time="t1", point="alpha",
            exponents={"q1": -5, "q2": -3, "p1": -2, "p2": -4},
            leading={"q1": "-hbar^5", "q2": "-hbar^3", "p1": "hbar^2", "p2": "0"},
            pins=_pins([
                (2, "q1", "beta*hbar^3", "beta"),
                (5, "q1", "gamma", "gamma"),
                (8, "q1", "delta/hbar^3", "delta"),
            ]),
        ),
        Family(
            model="gar92", name="alternative", time="t1", point="alpha",
            exponents={"q1": -5, "q2": -3, "p1": -2, "p2": -4},
            leading={"q1": "9*hbar^5", "q2": "-3*hbar^3", "p1": "3*hbar^2", "p2": "-9*hbar^4"},
            pins=_pins([
                (8, "q1", "beta/hbar^3", "beta"),
                (10, "q1", "gamma/hbar^5", "gamma"),
            ]),
            has_deformation=False,
        ),
        Family(
            model="gar5232", name="main", time="t1", point="alpha",
            exponents={"q1": -1, "q2": -2, "p1": -2, "p2": -1},
            leading={"q1": "hbar", "q2": "beta*hbar^2", "p1": "0", "p2": "0"},
            leading_parameters=("beta",),
            pins=_pins([
                (3, "q1", "gamma/hbar^2", "gamma"),
                (4, "q1", "delta/hbar^3", "delta"),
            ]),
        ),
        Family(
            model="gar5232", name="alternative", time="t1", point="alpha",
            exponents={"q1": -1, "q2": 2, "p1": -2, "p2": -3},
            leading={"q1": "-hbar", "q2": "beta/hbar^2", "p1": "hbar^2", "p2": "t2*hbar^3/beta^2"},
            leading_parameters=("beta",),
            pins=_pins([
                (1, "p2", "gamma*hbar^2", "gamma"),
                (4, "q1", "delta/hbar^3", "delta"),
            ]),
            has_deformation=False,
        ),
    )
}


# Published fourth-order ODEs in the second time, as vanishing relations
FOURTH_ORDER_ODES: Dict[str, str] = {
    "gar92": (
        "hbar^2*alpha_d4 + 40*alpha_d1^3*alpha_d2 + 36*t2*alpha_d1*alpha_d2"
        " + 4*alpha*alpha_d2 + 20*alpha_d1^2 + 6*t2"
    ),
    "gar5232": (
        "hbar^2*(alpha_d4 + 2*alpha_d3/t2 - 4*alpha_d2*alpha_d3/alpha_d1"
        " - 3*alpha_d2^2/(t2*alpha_d1) + 3*alpha_d2^3/alpha_d1^2)"
        " + 4*alpha_d2/(t2^2*alpha_d1) + 12*t2*alpha_d1^3*alpha_d2 + 4*alpha*alpha_d1^2*alpha_d2"
        " + 4*alpha*alpha_d1^3/t2 + 14*alpha_d1^4 + 2/t2^3"
    ),
}


@dataclass(frozen=True)
class QuasiNormalization:
    """Local variable and resonance normalization of a quasi-Painlevé expansion;
    the leading balance itself comes out of the balance search"""
    model: str
    scale: str
    pins: Tuple[ResonancePin, ...]
    point: str = "b"
    ramification: int = 3
    parameter_names: Tuple[str, ...] = ("c1", "c2", "c3")


QUASI_NORMALIZATIONS: Dict[str, QuasiNormalization] = {
    norm.model: norm
    for norm in (
        QuasiNormalization(
            model="gar92",
            scale="1/(3*hbar^2)",
            pins=_pins([
                (8, "alpha_d1", "c2/(3*hbar^6)", "c2"),
                (10, "alpha_d1", "11*c3/(81*hbar^8)", "c3"),
            ]),
        ),
        QuasiNormalization(
            model="gar5232",
            scale="b/(3*hbar^2)",
            pins=_pins([
                (4, "alpha_d1", "5*c2/(9*b*hbar^2)", "c2"),
                (6, "alpha_d1", "7*c3/(27*b*hbar^4)", "c3"),
            ]),
        ),
    )
}


def family(model: str, name: str = "main") -> Family:
    """Look up a family by model and name

    Raises:
        UnknownModel: no such family
    """
    try:
        return FAMILIES[f"{model}/{name}"]
    except KeyError:
        known = ", ".join(sorted(FAMILIES))
        raise UnknownModel(f"unknown family '{model}/{name}'; expected one of {known}") from None


def quasi_normalization(model: str) -> QuasiNormalization:
    try:
        return QUASI_NORMALIZATIONS[model]
    except KeyError:
        raise UnknownModel(f"model '{model}' has no quasi-Painlevé normalization") from None


@lru_cache(maxsize=None)
def published_ode(model: str) -> ScalarODE:
    """Published fourth-order ODE of ``model`` solved for its top jet"""
    try:
        relation = parse_expression(FOURTH_ORDER_ODES[model])
    except KeyError:
        raise UnknownModel(f"model '{model}' has no fourth-order ODE") from None
    return ScalarODE.from_relation(relation, "alpha", "t2", 4)


def expand_quasi(model: str, order: Optional[int] = None) -> LaurentSolution:
    """Quasi-Painlevé expansion of the published ODE of ``model`` in its
    normalized ramified variable

    Raises:
        UnknownModel: no ODE or normalization for ``model``
        NoBalance: the balance search came back empty
    """
    norm = quasi_normalization(model)
    return quasi_test(
        published_ode(model),
        norm.ramification,
        order,
        norm.point,
        parse_expression(norm.scale),
        norm.parameter_names,
        norm.pins,
    )
