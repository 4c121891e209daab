"""
Built-in isomonodromy models and the passage from rank-2 Lax form to
Schrödinger form, with matrix and scalar compatibility checkers.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple, TypeVar

from sympy.polys.matrices import DomainMatrix

from .algebra import DOMAIN, FIELD, RatFunc, differentiate, gen, rational, to_text
from .exceptions import L12IdenticallyZero, UnknownModel
from .parser import parse_expression

logger = logging.getLogger(__name__)

V = TypeVar("V")
Matrix2 = Tuple[Tuple[RatFunc, RatFunc], Tuple[RatFunc, RatFunc]]

MODEL_NAMES = ("pIV", "gar92", "gar5232")


@dataclass(frozen=True)
class ModelSpec:
    """One isomonodromy model: Hamiltonians and (when available) its Lax pair"""
    name: str
    times: Tuple[str, ...]
    coordinates: Tuple[str, ...]
    momenta: Tuple[str, ...]
    constants: Tuple[str, ...]
    hamiltonians: Tuple[RatFunc, ...]
    lax: Optional[DomainMatrix] = None
    deformations: Tuple[DomainMatrix, ...] = ()
    potential: Optional[RatFunc] = None
    deformation_coefficients: Tuple[RatFunc, ...] = ()
    assumptions: Tuple[str, ...] = ("hbar != 0",)

    @property
    def canonical(self) -> Tuple[str, ...]:
        return self.coordinates + self.momenta

    def time_index(self, time: str) -> int:
        try:
            return self.times.index(time)
        except ValueError:
            raise UnknownModel(f"model {self.name} has no time {time}") from None


@dataclass(frozen=True)
class SchrodingerData:
    """Scalar form hbar^2 psi'' = Q psi with deformation coefficients A_j"""
    potential: RatFunc
    deformation_coefficients: Dict[str, RatFunc]
    apparent_locus: Optional[RatFunc]
    first_order: Optional[RatFunc] = None
    zeroth_order: Optional[RatFunc] = None
    derived: bool = True
    printed_agreement: Dict[str, bool] = field(default_factory=dict)
    # Q against the closed form for traceless L; None when L has a trace
    closed_form_agreement: Optional[bool] = None


# ---------------------------------------------------------------------------
# Model tables
# ---------------------------------------------------------------------------

_PIV_HAMILTONIAN = (
    "2*q*(p^2 - hbar*p/q - ((theta0^2 - hbar^2)/(4*q^2) - thetainf/4 + ((q + 2*t1)/4)^2))"
)
# Without the H/(2x) term, added after parsing
_PIV_POTENTIAL = (
    "theta0^2/(4*x^2) - thetainf/4 + ((x + 2*t1)/4)^2 - hbar*p*q/(x*(x - q))"
    " + hbar^2*(-1/(4*x^2) + 3/(4*(x - q)^2))"
)
_PIV_DEFORMATION = "2*x/(x - q)"

_GAR92 = {
    "hamiltonians": (
        "p1^4 + 3*p1^2*p2 + p1*q2^2 - 2*q1*q2 + p2^2 - t1*p1 + t2*p2",
        "-p1^3*p2 + p1^2*q2^2 + t2*p1^3 - 2*p1*q1*q2 - 2*p1*p2^2 + p2*q2^2 + t2*p1*p2"
        " + q1^2 - t2*q2^2 + t1^2*p1 + t1*p2",
    ),
    "lax": (
        ("q2*x + q1 - p1*q2",
         "x^3 + p1*x^2 + (p1^2 + p2 + 2*t2)*x + p1^3 + 2*p1*p2 - q2^2 + t2*p1 - t1"),
        ("x^2 - p1*x - p2 + t2",
         "-q2*x - q1 + p1*q2"),
    ),
    "deformations": (
        (("0", "-x - 2*p1"),
         ("-1", "0")),
        (("q2", "x^2 + p1*x + p1^2 + 2*p2 + t2"),
         ("x - p1", "-q2")),
    ),
}

_GAR5232 = {
    "hamiltonians": (
        "p1^2 - (q1^2 + t1)*p1 - 2*p2*q1*q2 - q2 - t2/q2",
        "(p2^2*q2^2 - p1*q2)/t2 + (p1 - q1^2 - t1)/q2",
    ),
    "lax": (
        ("q1 + p2*q2/x",
         "x + p1 - q1^2 - t1 + q2/x"),
        ("1 - p1/x + t2/(q2*x^2)",
         "-q1 - p2*q2/x"),
    ),
    "deformations": (
        (("-q1", "-x"),
         ("-1", "q1")),
        (("0", "-q2/t2"),
         ("-1/(q2*x)", "0")),
    ),
}


def matrix(rows: Sequence[Sequence[RatFunc]]) -> DomainMatrix:
    return DomainMatrix([list(row) for row in rows], (2, 2), DOMAIN)


def _parse_matrix(rows) -> DomainMatrix:
    return matrix([[parse_expression(entry) for entry in row] for row in rows])


def entries(m: DomainMatrix) -> Matrix2:
    rows = m.to_list()
    return (tuple(rows[0]), tuple(rows[1]))


def map_entries(m: DomainMatrix, fn: Callable[[RatFunc], RatFunc]) -> DomainMatrix:
    return matrix([[fn(e) for e in row] for row in m.to_list()])


def _garnier(name: str, table: Mapping) -> ModelSpec:
    return ModelSpec(
        name=name,
        times=("t1", "t2"),
        coordinates=("q1", "q2"),
        momenta=("p1", "p2"),
        constants=(),
        hamiltonians=tuple(parse_expression(h) for h in table["hamiltonians"]),
        lax=_parse_matrix(table["lax"]),
        deformations=tuple(_parse_matrix(m) for m in table["deformations"]),
        assumptions=("hbar != 0", "t2 != 0", "q2 != 0") if name == "gar5232" else ("hbar != 0",),
    )


@lru_cache(maxsize=None)
def builtin_model(name: str) -> ModelSpec:
    """Exact transcription of one of the built-in models.

    Args:
        name: one of ``pIV``, ``gar92``, ``gar5232``

    Raises:
        UnknownModel: unrecognized name
    """
    if name == "pIV":
        hamiltonian = parse_expression(_PIV_HAMILTONIAN)
        potential = parse_expression(_PIV_POTENTIAL) + hamiltonian / (2 * gen("x"))
        model = ModelSpec(
            name="pIV",
            times=("t1",),
            coordinates=("q",),
            momenta=("p",),
            constants=("theta0", "thetainf"),
            hamiltonians=(hamiltonian,),
            potential=potential,
            deformation_coefficients=(parse_expression(_PIV_DEFORMATION),),
        )
    elif name == "gar92":
        model = _garnier("gar92", _GAR92)
    elif name == "gar5232":
        model = _garnier("gar5232", _GAR5232)
    else:
        raise UnknownModel(f"unknown model '{name}'; expected one of {', '.join(MODEL_NAMES)}")
    logger.info(f"Built model {name} with {len(model.times)} time(s)")
    return model


# ---------------------------------------------------------------------------
# Flows
# ---------------------------------------------------------------------------

def hamilton_vector_field(
    m: ModelSpec, j: int, hamiltonian: Optional[RatFunc] = None
) -> Dict[str, RatFunc]:
    """Right sides of hbar*dq_i/dt_j = dH_j/dp_i and hbar*dp_i/dt_j = -dH_j/dq_i"""
    h = m.hamiltonians[j] if hamiltonian is None else hamiltonian
    flow = {q: differentiate(h, p) for q, p in zip(m.coordinates, m.momenta)}
    flow.update({p: -differentiate(h, q) for q, p in zip(m.coordinates, m.momenta)})
    return flow


def flow_derivative(f: RatFunc, time: str, flow: Mapping[str, RatFunc]) -> RatFunc:
    """Total derivative d f / d time when hbar * d v / d time = flow[v]"""
    hbar = gen("hbar")
    result = differentiate(f, time)
    for name, rhs in flow.items():
        partial = differentiate(f, name)
        if partial:
            result += partial * rhs / hbar
    return result


def check_matrix_compatibility(
    m: ModelSpec, j: int, hamiltonian: Optional[RatFunc] = None
) -> Matrix2:
    """Residual hbar*(dL/dt_j - dM_j/dx) + [L, M_j] along the Hamilton flow"""
    if m.lax is None:
        raise L12IdenticallyZero(f"model {m.name} is given in scalar form only")
    hbar = gen("hbar")
    time = m.times[j]
    flow = hamilton_vector_field(m, j, hamiltonian)
    lax, deformation = m.lax, m.deformations[j]
    time_part = map_entries(lax, lambda e: hbar * flow_derivative(e, time, flow))
    space_part = map_entries(deformation, lambda e: hbar * differentiate(e, "x"))
    residual = time_part - space_part + lax * deformation - deformation * lax
    return entries(residual)


def check_scalar_compatibility(
    Q: RatFunc, A: RatFunc, flow: Mapping[str, RatFunc], t: str
) -> RatFunc:
    """2 dQ/dt + hbar^2 A_xxx - 4 Q A_x - 2 A Q_x with parameter derivatives from ``flow``"""
    hbar = gen("hbar")
    A_x = differentiate(A, "x")
    A_xxx = differentiate(differentiate(A_x, "x"), "x")
    Q_x = differentiate(Q, "x")
    return 2 * flow_derivative(Q, t, flow) + hbar ** 2 * A_xxx - 4 * Q * A_x - 2 * A * Q_x


# ---------------------------------------------------------------------------
# Scalar reduction (works for rational functions and for truncated series)
# ---------------------------------------------------------------------------

def eliminate_second_component(l11: V, l12: V, l21: V, l22: V, dx: Callable[[V], V]) -> Tuple[V, V]:
    """Coefficients (P1, P2) of hbar^2 psi'' + hbar P1 psi' + P2 psi = 0 for the first entry.

    The first row gives psi2 = u0 psi + u1 psi'; inserting it in the second
    row leaves c0 psi + c1 psi' + c2 psi'' = 0, normalized to leading hbar^2.
    """
    hbar = gen("hbar")
    u1 = hbar / l12
    u0 = -l11 / l12
    c0 = dx(u0) * hbar - l21 - l22 * u0
    c1 = (u0 + dx(u1)) * hbar - l22 * u1
    c2 = u1 * hbar
    return c1 * hbar / c2, c0 * hbar ** 2 / c2


def gauge_potential(first_order: V, zeroth_order: V, dx: Callable[[V], V]) -> V:
    """Q after the gauge removing the first-derivative term"""
    hbar = gen("hbar")
    return first_order * first_order * rational(1, 4) - zeroth_order + dx(first_order) * (hbar / 2)


def _dx(f: RatFunc) -> RatFunc:
    return differentiate(f, "x")


def schrodinger_from_lax(m: ModelSpec) -> SchrodingerData:
    """Derive Q and A_j by eliminating the second component of the rank-2 system.

    Models given in scalar form return their closed-form potential.

    Raises:
        L12IdenticallyZero: the (1,2) entry of L vanishes
    """
    if m.lax is None:
        return SchrodingerData(
            potential=m.potential,
            deformation_coefficients=dict(zip(m.times, m.deformation_coefficients)),
            apparent_locus=None,
            derived=False,
        )
    (l11, l12), (l21, l22) = entries(m.lax)
    if not l12:
        raise L12IdenticallyZero(f"L12 of model {m.name} is identically zero")
    first, zeroth = eliminate_second_component(l11, l12, l21, l22, _dx)
    potential = gauge_potential(first, zeroth, _dx)
    coefficients = {
        time: entries(deformation)[0][1] / l12
        for time, deformation in zip(m.times, m.deformations)
    }
    agreement = printed_coefficient_report(m, first, zeroth)
    closed_form = None
    if not (l11 + l22):
        closed_form = not (traceless_potential(l11, l12, l21, _dx) - potential)
        if not closed_form:
            logger.warning(f"{m.name}: eliminated Q differs from the traceless closed form")
    return SchrodingerData(
        potential=potential,
        deformation_coefficients=coefficients,
        apparent_locus=l12,
        first_order=first,
        zeroth_order=zeroth,
        printed_agreement=agreement,
        closed_form_agreement=closed_form,
    )


def printed_coefficient_report(m: ModelSpec, first: RatFunc, zeroth: RatFunc) -> Dict[str, bool]:
    """Compare the eliminated coefficients with their printed closed forms"""
    hbar = gen("hbar")
    (l11, l12), (l21, l22) = entries(m.lax)
    printed_first = -l11 - l12 - hbar * _dx(l12) / l12
    printed_zeroth = l11 * l22 - l12 * l21 + hbar * (-_dx(l11) + l11 * _dx(l12) / l12)
    report = {
        "first_order": not (printed_first - first),
        "zeroth_order": not (printed_zeroth - zeroth),
    }
    if not report["first_order"]:
        logger.warning(
            f"{m.name}: printed first-order coefficient differs from elimination "
            f"(elimination gives -(L11 + L22) - hbar*L12'/L12)"
        )
    return report


def traceless_potential(a: V, b: V, c: V, dx: Callable[[V], V]) -> V:
    """Closed form of Q for L = [[a, b], [c, -a]]"""
    hbar = gen("hbar")
    db = dx(b)
    return (
        a * a + b * c
        + (dx(a) - a * db / b) * hbar
        + (db * db * rational(3, 4) / (b * b) - dx(db) / (b * 2)) * hbar ** 2
    )


def model_to_dict(m: ModelSpec) -> Dict[str, object]:
    """Canonical-text dump of a model for inspection and diffing"""
    dump: Dict[str, object] = {
        "name": m.name,
        "times": list(m.times),
        "coordinates": list(m.coordinates),
        "momenta": list(m.momenta),
        "constants": list(m.constants),
        "hamiltonians": [to_text(h) for h in m.hamiltonians],
        "assumptions": list(m.assumptions),
    }
    if m.lax is not None:
        dump["lax"] = [[to_text(e) for e in row] for row in entries(m.lax)]
        dump["deformations"] = [
            [[to_text(e) for e in row] for row in entries(d)] for d in m.deformations
        ]
    else:
        dump["potential"] = to_text(m.potential)
        dump["deformation_coefficients"] = [to_text(a) for a in m.deformation_coefficients]
    return dump
