"""
Singularity reduction of the Schrödinger form along movable-pole series,
secondary isomonodromy flows in the second time, their elimination to a
single fourth-order ODE, and classical-limit curves.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

from .algebra import (
    FIELD,
    RING,
    MultiPoly,
    RatFunc,
    degree_in,
    differentiate,
    discriminant,
    exact_divide,
    free_symbols,
    gen,
    monomial_ratio,
    multipoly_gcd,
    poly_gen,
    split_by_degree,
    substitute,
    to_text,
)
from .config import settings
from .exceptions import (
    DenominatorVanishesIdentically,
    GradingError,
    Inconsistent,
    InsufficientOrder,
    NotTriangular,
    SampleOnDiscriminant,
    SquarefreeFailure,
)
from .families import Family, family as lookup_family
from .lax_models import (
    ModelSpec,
    builtin_model,
    check_scalar_compatibility,
    eliminate_second_component,
    entries,
    flow_derivative,
    gauge_potential,
    hamilton_vector_field,
)
from .painleve import LaurentSolution, ScalarODE, expand_solution, jet_name
from .parser import parse_expression
from .series import TruncatedSeries, series_limit, substitute_solution

logger = logging.getLogger(__name__)

REDUCTION_PARAMETERS = ("alpha", "beta", "gamma", "delta")


@dataclass(frozen=True)
class ReductionResult:
    """Limit R of the potential, split R = R0 + hbar*R1 + hbar^2*R2, and the limits B of A_j"""
    model: str
    family: str
    limit: RatFunc
    parts: Tuple[RatFunc, RatFunc, RatFunc]
    deformation: Dict[str, RatFunc]
    apparent_locus: Optional[MultiPoly]
    parameters: Tuple[str, ...]


@dataclass(frozen=True)
class FlowSystem:
    """Right sides of hbar * dP/dt for the reduction parameters"""
    time: str
    rhs: Dict[str, RatFunc]
    assumptions: Tuple[str, ...] = ()

    @classmethod
    def from_texts(cls, rhs: Mapping[str, str], time: str = "t2") -> "FlowSystem":
        return cls(time, {name: parse_expression(text) for name, text in rhs.items()})

    def to_texts(self) -> Dict[str, str]:
        return {name: to_text(value) for name, value in self.rhs.items()}


@dataclass(frozen=True)
class Elimination:
    """Scalar relation for one parameter obtained by solving the flow triangularly"""
    target: str
    relation: RatFunc
    substitutions: Dict[str, RatFunc]
    divisors: Tuple[str, ...]

    def ode(self, order: int = 4) -> ScalarODE:
        return ScalarODE.from_relation(self.relation, self.target, "t2", order)


@dataclass(frozen=True)
class CurveSpec:
    """y^2 = f(x) with f polynomial in x after multiplying R0 by x^cleared_power"""
    f: RatFunc
    cleared_power: int

    @property
    def degree(self) -> int:
        return degree_in(self.f, "x")


# ---------------------------------------------------------------------------
# Singular reduction
# ---------------------------------------------------------------------------

def _dx(s: TruncatedSeries) -> TruncatedSeries:
    return s.map_coefficients(lambda c: differentiate(c, "x"))


def _x_primitive(poly: MultiPoly) -> MultiPoly:
    """Divide out the content of ``poly`` as a polynomial in x"""
    x = poly_gen("x")
    content = RING.zero
    for k in range(poly.degree(x) + 1):
        content = multipoly_gcd(content, poly.coeff_wrt(x, k))
    return exact_divide(multipoly_gcd(poly, poly), content)


def hbar_split(limit: RatFunc) -> Tuple[RatFunc, RatFunc, RatFunc]:
    """(R0, R1, R2) with R = R0 + hbar*R1 + hbar^2*R2

    Raises:
        GradingError: hbar in the denominator or above degree 2
    """
    parts = split_by_degree(limit, "hbar", max_degree=2)
    return tuple(parts.get(k, FIELD.zero) for k in range(3))


def singular_reduction(model: ModelSpec, sol: LaurentSolution, family: str = "main") -> ReductionResult:
    """Limits of Q and of the other times' A_j as the first time approaches the pole.

    Args:
        model: built-in model whose first-time flow ``sol`` solves
        sol: movable-pole expansion (deep enough for the cancellations)
        family: label recorded in the result

    Raises:
        DivergentLimit: a negative power survives in Q or A_j
        GradingError: the limit is not of degree <= 2 in hbar
    """
    own_time = sol.ansatz.time
    others = [t for t in model.times if t != own_time]
    locus = None
    if model.lax is None:
        potential = substitute_solution(model.potential, sol.solution)
        coefficients = {
            t: substitute_solution(a, sol.solution)
            for t, a in zip(model.times, model.deformation_coefficients) if t != own_time
        }
    else:
        (l11, l12), (l21, l22) = (
            tuple(substitute_solution(e, sol.solution) for e in row) for row in entries(model.lax)
        )
        first, zeroth = eliminate_second_component(l11, l12, l21, l22, _dx)
        potential = gauge_potential(first, zeroth, _dx)
        coefficients = {
            t: substitute_solution(entries(m)[0][1], sol.solution) / l12
            for t, m in zip(model.times, model.deformations) if t in others
        }
        leading = l12.coefficients[l12.valuation]
        locus = _x_primitive(leading.numer)

    limit = series_limit(potential)
    deformation = {t: series_limit(a) for t, a in coefficients.items()}
    parts = hbar_split(limit)
    logger.info(
        f"Reduced {model.name}/{family}: R0 has x-degree {degree_in(parts[0], 'x')}, "
        f"B = {', '.join(to_text(b) for b in deformation.values()) or 'none'}"
    )
    return ReductionResult(
        model=model.name,
        family=family,
        limit=limit,
        parts=parts,
        deformation=deformation,
        apparent_locus=locus,
        parameters=sol.parameters,
    )


def expand_family(fam: Family, order: Optional[int] = None) -> LaurentSolution:
    """Expand a registered family along its model's first-time flow"""
    model = builtin_model(fam.model)
    flow = hamilton_vector_field(model, model.time_index(fam.time))
    return expand_solution(flow, fam.ansatz(), order, pins=fam.pins)


def reduce_family(model_name: str, family_name: str = "main", order: Optional[int] = None) -> ReductionResult:
    fam = lookup_family(model_name, family_name)
    sol = expand_family(fam, settings.reduction_order if order is None else order)
    return singular_reduction(builtin_model(model_name), sol, family_name)


def verify_secondary_flow(red: ReductionResult, flow: FlowSystem) -> RatFunc:
    """Residual of 2 R_t + hbar^2 B_xxx - 4 R B_x - 2 B R_x with parameter derivatives from ``flow``"""
    b = red.deformation.get(flow.time, FIELD.zero)
    residual = check_scalar_compatibility(red.limit, b, flow.rhs, flow.time)
    if residual:
        logger.info(f"{red.model}/{red.family}: secondary compatibility residual is nonzero")
    return residual


# ---------------------------------------------------------------------------
# Secondary flow
# ---------------------------------------------------------------------------

def derive_secondary_flow(model: ModelSpec, sol: LaurentSolution, time: str = "t2") -> FlowSystem:
    """Promote the expansion parameters to functions of ``time`` and impose that flow.

    The coefficients of hbar * d/dtime (series) - G(series) are affine in the
    parameter derivatives; they are solved in order of increasing exponent.

    Raises:
        Inconsistent: a coefficient free of parameter derivatives does not vanish
        InsufficientOrder: some parameter derivative is never determined
    """
    hbar = gen("hbar")
    parameters = [p for p in REDUCTION_PARAMETERS if p in sol.parameters]
    jets = {p: jet_name(p, 1) for p in parameters}
    point_jet = jets[sol.ansatz.parameters[0]]
    target = hamilton_vector_field(model, model.time_index(time))

    def total(c: RatFunc) -> RatFunc:
        value = differentiate(c, time)
        for p in parameters:
            partial = differentiate(c, p)
            if partial:
                value += partial * gen(jets[p])
        return value

    residuals = {}
    for v in sol.ansatz.variables:
        series = sol[v]
        moving = series.map_coefficients(total) - series.derivative() * gen(point_jet)
        residuals[v] = moving * hbar - substitute_solution(target[v], sol.solution)

    pending = sorted(
        ((residuals[v].exponent(n), index, v, n)
         for index, v in enumerate(sol.ansatz.variables) for n in residuals[v].coefficients),
    )
    solved: Dict[str, RatFunc] = {}
    for exponent, _, v, n in pending:
        c = substitute(residuals[v].coefficients[n], solved) if solved else residuals[v].coefficients[n]
        if not c:
            continue
        unknown = next((j for j in jets.values() if j not in solved and differentiate(c, j)), None)
        if unknown is None:
            raise Inconsistent(exponent, c)
        slope = differentiate(c, unknown)
        value = -substitute(c, {unknown: FIELD.zero}) / slope
        solved = {j: substitute(e, {unknown: value}) for j, e in solved.items()}
        solved[unknown] = value
        logger.debug(f"{unknown} fixed by the coefficient of {v} at exponent {exponent}")

    missing = [j for j in jets.values() if j not in solved]
    if missing:
        raise InsufficientOrder(f"{', '.join(missing)} not determined by the expansion")
    rhs = {p: hbar * solved[jets[p]] for p in parameters}
    logger.info(f"Derived the {time}-flow of {', '.join(parameters)} for {model.name}")
    return FlowSystem(time, rhs)


def target_derivatives(flow: FlowSystem, target: str, order: int) -> List[RatFunc]:
    """Derivatives 1..order of ``target`` along ``flow`` as functions of the parameters"""
    derivatives = [flow.rhs[target] / gen("hbar")]
    for _ in range(order - 1):
        derivatives.append(flow_derivative(derivatives[-1], flow.time, flow.rhs))
    return derivatives


def eliminate_flow_system(flow: FlowSystem, target: str = "alpha", order: int = 4) -> Elimination:
    """Solve the flow triangularly for the other parameters and return the scalar relation.

    Raises:
        NotTriangular: some derivative of the target is not linear in the next parameter
    """
    chain = [p for p in flow.rhs if p != target]
    derivatives = target_derivatives(flow, target, order)

    substitutions: Dict[str, RatFunc] = {}
    divisors: List[str] = []
    for k, expression in enumerate(derivatives[:-1], start=1):
        expression = substitute(expression, substitutions) if substitutions else expression
        unknown = next((p for p in chain if p not in substitutions and differentiate(expression, p)), None)
        if unknown is None:
            raise NotTriangular(f"derivative {k} of {target} involves no new parameter")
        try:
            parts = split_by_degree(expression, unknown, max_degree=1)
        except GradingError as exc:
            raise NotTriangular(f"derivative {k} of {target} is not linear in {unknown}: {exc}") from None
        slope = parts[1]
        value = (gen(jet_name(target, k)) - parts[0]) / slope
        substitutions = {p: substitute(e, {unknown: value}) for p, e in substitutions.items()}
        substitutions[unknown] = value
        divisors.append(to_text(substitute(slope, substitutions)))
    if len(substitutions) < len(chain):
        raise NotTriangular(f"{', '.join(p for p in chain if p not in substitutions)} never eliminated")

    last = substitute(derivatives[-1], substitutions)
    relation_poly = (gen(jet_name(target, order)) - last).numer
    _, relation_poly = relation_poly.clear_denoms()
    _, relation_poly = relation_poly.primitive()
    relation = FIELD.new(relation_poly)
    logger.info(f"Eliminated {', '.join(chain)}; divisions by {', '.join(divisors)}")
    return Elimination(target, relation, substitutions, tuple(divisors))


def relation_multiplier(relation: RatFunc, published: RatFunc) -> Optional[RatFunc]:
    """Monomial u with relation = u * published, or None"""
    return monomial_ratio(relation, published)


def second_reduction(red: ReductionResult, elimination: Elimination, puiseux: LaurentSolution) -> RatFunc:
    """Limit of R as the second time approaches the branch point of the scalar ODE.

    The other parameters follow the target through the elimination's
    substitutions, evaluated along the jets of ``puiseux``.
    """
    jets = puiseux.solution
    series = {elimination.target: jets[elimination.target]}
    for name, expression in elimination.substitutions.items():
        series[name] = substitute_solution(expression, jets)
    return series_limit(substitute_solution(red.limit, series))


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

def classical_limit_curve(red: ReductionResult) -> CurveSpec:
    """y^2 = R0 with denominators cleared by an even power of x

    Raises:
        GradingError: the denominator of R0 is not a power of x times an x-free factor
    """
    r0 = red.parts[0]
    x = poly_gen("x")
    k = r0.denom.degree(x)
    if k > 0 and r0.denom.coeff_wrt(x, k) * x ** k != r0.denom:
        raise GradingError(f"denominator {to_text(FIELD.new(r0.denom))} is not a monomial in x")
    power = k + (k % 2)
    return CurveSpec(f=r0 * gen("x") ** power, cleared_power=power)


def genus_check(curve: CurveSpec, sample: Mapping[str, object]) -> int:
    """Genus of y^2 = f(x) certified at an exact rational sample.

    Raises:
        SquarefreeFailure: f has a repeated factor in x identically
        SampleOnDiscriminant: the sample makes f singular or drops its degree
    """
    f = curve.f.numer
    derivative = f.diff(poly_gen("x"))
    common = multipoly_gcd(f, derivative)
    if degree_in(common, "x") > 0:
        raise SquarefreeFailure(f"{to_text(FIELD.new(common))} divides y^2 = f and its derivative")
    values = {name: parse_expression(str(value)) for name, value in sample.items()}
    missing = free_symbols(curve.f) - {"x"} - set(values)
    if missing:
        raise ValueError(f"sample leaves {', '.join(sorted(missing))} unassigned")
    try:
        at_sample = substitute(curve.f, values)
    except DenominatorVanishesIdentically as exc:
        raise SampleOnDiscriminant(str(exc)) from None
    if degree_in(at_sample, "x") != curve.degree:
        raise SampleOnDiscriminant("leading coefficient vanishes at the sample")
    if not discriminant(at_sample.numer, "x"):
        raise SampleOnDiscriminant("f has a repeated root at the sample")
    genus = (curve.degree - 1) // 2
    logger.info(f"Curve of degree {curve.degree} has genus {genus} at the sample")
    return genus


# ---------------------------------------------------------------------------
# Mirror system for the 5/2+3/2 family
# ---------------------------------------------------------------------------

MIRROR_COORDINATES: Dict[str, str] = {
    "xi1": "1/q1",
    "xi2": "q2/q1^2",
    "xi3": "4*q2*p2 + 4*q2/q1",
    "xi4": "p1*q1^2 + q2 + 2*p2*q1*q2",
}

MIRROR_SYSTEM: Dict[str, str] = {
    "xi1": "1 + t1*xi1^2 - 2*xi1^2*xi2 + xi1^3*xi3 - 2*xi1^4*xi4",
    "xi2": "2*t1*xi1*xi2 - 4*xi1*xi2^2 + 2*xi1^2*xi2*xi3 - 4*xi1^3*xi2*xi4",
    "xi3": "4*t1*xi2 - 8*xi2^2 + 4*xi1*xi2*xi3 - 8*xi1^2*xi2*xi4 - 4*t2*xi1^2/xi2",
    "xi4": (
        "t1*xi3/2 + xi1*xi3^2/2 - xi2*xi3 - 2*t1*xi1*xi4 + 4*xi1*xi2*xi4"
        " - 3*xi1^2*xi3*xi4 + 4*xi1^3*xi4^2 - 2*t2*xi1/xi2"
    ),
}


def mirror_transform_check(system: Optional[Mapping[str, str]] = None) -> List[RatFunc]:
    """Residuals of the transformed first-time flow against the mirror system, one per coordinate"""
    model = builtin_model("gar5232")
    flow = hamilton_vector_field(model, 0)
    coordinates = {name: parse_expression(text) for name, text in MIRROR_COORDINATES.items()}
    rhs = {name: parse_expression(text) for name, text in (system or MIRROR_SYSTEM).items()}
    residuals = []
    for name, xi in coordinates.items():
        pushed = sum((differentiate(xi, v) * f for v, f in flow.items()), FIELD.zero)
        residuals.append(pushed - substitute(rhs[name], coordinates))
    return residuals


def mirror_initial_value(sol: LaurentSolution) -> Tuple[RatFunc, ...]:
    """Values of the mirror coordinates at the pole of ``sol``"""
    return tuple(
        series_limit(substitute_solution(parse_expression(text), sol.solution))
        for text in MIRROR_COORDINATES.values()
    )


def mirror_flow() -> Dict[str, RatFunc]:
    return {name: parse_expression(text) for name, text in MIRROR_SYSTEM.items()}
