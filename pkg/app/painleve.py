"""
Painlevé and quasi-Painlevé tests: leading-balance search, order-by-order
expansion with resonance handling, and residual verification.

A flow maps each unknown ``v`` to the right side of ``hbar * dv/dt``. An
ansatz puts ``v = sum_k c_{v,k} s**(e_v + k)`` with
``t - point = scale * s**r``; at order ``k`` the unknown coefficients solve
the linear system ``K(k) c_k = -b_k`` whose matrix is fixed by the leading
terms (the Kovalevskaya matrix).
"""
import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import sympy
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from .algebra import (
    DOMAIN,
    FIELD,
    RatFunc,
    differentiate,
    gen,
    ratfunc,
    split_by_degree,
    symbol,
    symbol_index,
    to_text,
)
from .config import settings
from .exceptions import EmptyRange, InconsistentResonance, NoBalance, NotTriangular, UnknownSymbol
from .parser import parse_expression
from .series import SeriesSolution, TruncatedSeries, substitute_solution

logger = logging.getLogger(__name__)

Flow = Mapping[str, RatFunc]


@dataclass(frozen=True)
class PoleAnsatz:
    """Leading exponents and coefficients of a movable-singularity expansion"""
    time: str
    point: RatFunc
    exponents: Mapping[str, int]
    leading: Mapping[str, RatFunc]
    ramification: int = 1
    scale: RatFunc = FIELD.one
    parameters: Tuple[str, ...] = ()

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(self.exponents)

    @property
    def is_holomorphic(self) -> bool:
        return all(
            e >= 0 or not self.leading.get(v) for v, e in self.exponents.items()
        )

    def describe(self) -> Dict[str, str]:
        return {
            v: f"{to_text(self.leading.get(v, FIELD.zero))} * s^{self.exponents[v]}"
            for v in self.variables
        }


@dataclass(frozen=True)
class ResonancePin:
    """Normalization of the free coefficient at a resonant order"""
    order: int
    variable: str
    value: str
    parameter: str


@dataclass(frozen=True)
class ResonanceEntry:
    order: int
    kernel_dimension: int
    consistent: bool
    parameters: Tuple[str, ...]


@dataclass(frozen=True)
class LaurentSolution:
    """Result of a passed Painlevé test"""
    solution: SeriesSolution
    ledger: Tuple[ResonanceEntry, ...]
    parameters: Tuple[str, ...]
    ansatz: PoleAnsatz
    terms: int

    def __getitem__(self, name: str) -> TruncatedSeries:
        return self.solution[name]

    @property
    def parameter_count(self) -> int:
        return len(self.parameters)


@dataclass(frozen=True)
class ResidualValuation:
    valuation: Optional[sympy.Rational]
    required: Optional[sympy.Rational]

    @property
    def passed(self) -> bool:
        return self.valuation is None or self.required is None or self.valuation >= self.required


@dataclass(frozen=True)
class ScalarODE:
    """Scalar ODE solved for its top jet: d^n u/dt^n = highest(u, u', ..., t)"""
    unknown: str
    time: str
    order: int
    highest: RatFunc
    relation: RatFunc

    def jet(self, k: int) -> str:
        return jet_name(self.unknown, k)

    @classmethod
    def from_relation(cls, relation: RatFunc, unknown: str, time: str, order: int) -> "ScalarODE":
        """Solve ``relation = 0`` (linear in the top jet) for the top jet"""
        parts = split_by_degree(relation, jet_name(unknown, order), max_degree=1)
        if len(parts) < 2 or not parts[1]:
            raise NotTriangular(f"relation does not determine {jet_name(unknown, order)}")
        return cls(unknown, time, order, -parts[0] / parts[1], relation)


def jet_name(unknown: str, k: int) -> str:
    return unknown if k == 0 else f"{unknown}_d{k}"


def jet_flow(ode: ScalarODE) -> Dict[str, RatFunc]:
    """First-order system for the jets u, u', ..., u^(n-1)"""
    hbar = gen("hbar")
    flow = {ode.jet(k): hbar * gen(ode.jet(k + 1)) for k in range(ode.order - 1)}
    flow[ode.jet(ode.order - 1)] = hbar * ode.highest
    return flow


# ---------------------------------------------------------------------------
# Leading balances
# ---------------------------------------------------------------------------

def _weight(poly, weights: Mapping[int, int]) -> Optional[int]:
    if not poly:
        return None
    return min(sum(weights.get(i, 0) * k for i, k in enumerate(monom)) for monom in poly.itermonoms())


def _is_graded(flow: Flow, exponents: Mapping[str, int], r: int) -> bool:
    weights = {symbol_index(v): e for v, e in exponents.items()}
    for v, rhs in flow.items():
        top = _weight(rhs.numer, weights)
        if top is not None and top - _weight(rhs.denom, weights) < exponents[v] - r:
            return False
    return True


def _solve_balance(
    flow: Flow, time: str, point: RatFunc, exponents: Mapping[str, int], r: int, scale: RatFunc,
    parameter_names: Sequence[str],
) -> List[PoleAnsatz]:
    s = sympy.Dummy("s")
    unknowns = {v: sympy.Dummy(f"A_{v}") for v in flow}
    replacements = {symbol(v): unknowns[v] * s ** exponents[v] for v in flow}
    replacements[symbol(time)] = point.as_expr() + scale.as_expr() * s ** r
    hbar = symbol("hbar")

    equations, lowest_denominators = [], []
    for v, rhs in flow.items():
        target = exponents[v] - r
        lhs = hbar * sympy.Rational(exponents[v], r) / scale.as_expr() * unknowns[v] * s ** target
        numer, denom = sympy.fraction(sympy.together(lhs - rhs.as_expr().xreplace(replacements)))
        numer_poly = sympy.Poly(sympy.expand(numer), s)
        denom_poly = sympy.Poly(sympy.expand(denom), s)
        d0 = min(m[0] for m in denom_poly.monoms())
        lowest_denominators.append(denom_poly.coeff_monomial(s ** d0))
        equations.extend(
            c for (k,), c in zip(numer_poly.monoms(), numer_poly.coeffs()) if k - d0 <= target
        )
    if not equations:
        return []

    found = []
    for solution in sympy.solve(equations, list(unknowns.values()), dict=True):
        values = {v: sympy.simplify(unknowns[v].xreplace(solution)) for v in flow}
        free = [unknowns[v] for v in flow if any(values[w].has(unknowns[v]) for w in flow)]
        if len(free) > len(parameter_names):
            logger.debug(f"Balance {dict(exponents)} needs more parameter names than supplied")
            continue
        naming = {a: symbol(name) for a, name in zip(free, parameter_names)}
        if any(sympy.simplify(d.xreplace(solution).xreplace(naming)) == 0 for d in lowest_denominators):
            continue
        try:
            leading = {v: ratfunc(values[v].xreplace(naming)) for v in flow}
        except (UnknownSymbol, ValueError):
            # irrational or complex leading coefficient
            continue
        ansatz = PoleAnsatz(
            time=time, point=point, exponents=dict(exponents), leading=leading,
            ramification=r, scale=scale,
            parameters=(to_text(point),) + tuple(naming[a].name for a in free),
        )
        if not ansatz.is_holomorphic:
            found.append(ansatz)
    return found


def find_leading_balances(
    flow: Flow,
    time: str,
    exponent_range: Optional[Tuple[int, int]] = None,
    ramification: int = 1,
    point: str = "alpha",
    scale: RatFunc = FIELD.one,
    parameter_names: Sequence[str] = ("beta", "gamma", "delta"),
) -> List[PoleAnsatz]:
    """Enumerate graded exponent tuples and solve their dominant balances exactly.

    Balances describing the same leading terms are reported once, with the
    most negative exponents for the variables whose leading coefficient is 0.
    A balance whose nonzero leading terms are a proper subset of another's
    (a parameter of the other set to zero) is not reported.

    Raises:
        EmptyRange: the exponent window is empty
    """
    lo, hi = exponent_range or (settings.exponent_min * ramification, settings.exponent_max * ramification)
    if lo > hi:
        raise EmptyRange(f"exponent range [{lo}, {hi}] is empty")
    variables = tuple(flow)
    tuples = [
        dict(zip(variables, combo))
        for combo in itertools.product(range(lo, hi + 1), repeat=len(variables))
        if min(combo) < 0
    ]
    graded = [e for e in tuples if _is_graded(flow, e, ramification)]
    graded.sort(key=lambda e: (sum(e.values()), tuple(e.values())))
    logger.info(f"Balance search: {len(graded)} graded exponent tuples out of {len(tuples)}")

    point_value = gen(point)
    with ThreadPoolExecutor(max_workers=settings.max_threads) as executor:
        results = list(executor.map(
            lambda e: _solve_balance(flow, time, point_value, e, ramification, ratfunc(scale), parameter_names),
            graded,
        ))

    candidates, seen = [], set()
    for found in results:
        for ansatz in found:
            signature = _signature(ansatz)
            if signature not in seen:
                seen.add(signature)
                candidates.append((signature, ansatz))
    # a balance whose nonzero leading terms all occur in a larger balance is
    # that balance with some parameters set to zero
    balances = [
        ansatz for signature, ansatz in candidates
        if not any(signature < other for other, _ in candidates)
    ]
    logger.info(
        f"Balance search found {len(balances)} distinct balance(s), "
        f"{len(candidates) - len(balances)} specialization(s) dropped"
    )
    return balances


def _signature(ansatz: PoleAnsatz) -> frozenset:
    return frozenset(
        (v, ansatz.exponents[v], to_text(c)) for v, c in ansatz.leading.items() if c
    )


# ---------------------------------------------------------------------------
# Order-by-order expansion
# ---------------------------------------------------------------------------

def _solution(template: TruncatedSeries, coefficients, exponents: Mapping[str, int], known: int) -> SeriesSolution:
    return SeriesSolution({
        v: template.like(coefficients[v], exponents[v] + known + 1) for v in exponents
    })


def _residual(flow: Flow, v: str, sol: SeriesSolution) -> TruncatedSeries:
    return sol[v].derivative() * gen("hbar") - substitute_solution(flow[v], sol)


def _leading_jacobian(flow: Flow, ansatz: PoleAnsatz, sol: SeriesSolution) -> List[List[RatFunc]]:
    r, e = ansatz.ramification, ansatz.exponents
    rows = []
    for j in ansatz.variables:
        row = []
        for i in ansatz.variables:
            partial = differentiate(flow[j], i)
            row.append(substitute_solution(partial, sol).coefficient(e[j] - r - e[i]) if partial else FIELD.zero)
        rows.append(row)
    return rows


def _obstruction(kovalevskaya: DomainMatrix, inhomogeneity: List[RatFunc]) -> RatFunc:
    for y in kovalevskaya.transpose().nullspace().to_list():
        value = sum((a * b for a, b in zip(y, inhomogeneity)), FIELD.zero)
        if value:
            return value
    return FIELD.zero


def _solve_order(
    n: int,
    variables: Tuple[str, ...],
    kovalevskaya: List[List[RatFunc]],
    inhomogeneity: List[RatFunc],
    pins: Sequence[ResonancePin],
    names: Iterator[str],
) -> Tuple[Dict[str, RatFunc], Optional[ResonanceEntry]]:
    m = len(variables)
    K = DomainMatrix([list(row) for row in kovalevskaya], (m, m), DOMAIN)
    kernel = m - K.rank()
    rows = [list(kovalevskaya[j]) + [-inhomogeneity[j]] for j in range(m)]
    inserted: List[str] = []
    for pin in pins:
        rows.append([FIELD.one if v == pin.variable else FIELD.zero for v in variables] + [parse_expression(pin.value)])
        inserted.append(pin.parameter)

    while True:
        reduced, pivots = DomainMatrix(rows, (len(rows), m + 1), DOMAIN).rref()
        if m in pivots:
            raise InconsistentResonance(n, _obstruction(K, inhomogeneity))
        free = [c for c in range(m) if c not in pivots]
        if not free:
            break
        try:
            name = next(names)
        except StopIteration:
            raise ValueError(f"no parameter name left for the resonance at order {n}") from None
        rows.append([FIELD.one if c == free[0] else FIELD.zero for c in range(m)] + [gen(name)])
        inserted.append(name)

    solved = reduced.to_list()
    values = {variables[c]: solved[i][m] for i, c in enumerate(pivots)}
    entry = None
    if kernel:
        entry = ResonanceEntry(order=n, kernel_dimension=kernel, consistent=True, parameters=tuple(inserted))
        logger.info(f"Resonance at order {n}: kernel {kernel}, parameters {inserted}")
    return values, entry


def expand_solution(
    flow: Flow,
    ansatz: PoleAnsatz,
    order: Optional[int] = None,
    parameter_names: Sequence[str] = (),
    pins: Sequence[ResonancePin] = (),
) -> LaurentSolution:
    """Solve the series recursion up to ``order`` terms beyond the leading exponents.

    Args:
        flow: right sides of hbar * dv/dt
        ansatz: leading data (exponents, coefficients, point, ramification)
        order: number of recursion steps (defaults to ``settings.series_order``)
        parameter_names: names for resonant directions not covered by ``pins``
        pins: normalizations of the free coefficients at resonant orders

    Raises:
        InconsistentResonance: the recursion has no solution at some order
    """
    order = settings.series_order if order is None else order
    variables = ansatz.variables
    e, r = ansatz.exponents, ansatz.ramification
    hbar = gen("hbar")
    template = TruncatedSeries.about(ansatz.time, ansatz.point, r, ansatz.scale)

    coefficients: Dict[str, Dict[int, RatFunc]] = {v: {} for v in variables}
    for v in variables:
        if ansatz.leading.get(v):
            coefficients[v][e[v]] = ansatz.leading[v]

    jacobian = _leading_jacobian(flow, ansatz, _solution(template, coefficients, e, 0))
    pins_by_order: Dict[int, List[ResonancePin]] = {}
    for pin in pins:
        pins_by_order.setdefault(pin.order, []).append(pin)
    names = iter(parameter_names)
    ledger = [ResonanceEntry(order=-1, kernel_dimension=1, consistent=True, parameters=ansatz.parameters)]
    inserted: List[str] = list(ansatz.parameters)

    for n in range(1, order + 1):
        sol = _solution(template, coefficients, e, n)
        inhomogeneity = []
        for v in variables:
            residual = _residual(flow, v, sol)
            target = e[v] - r + n
            for k, c in residual.coefficients.items():
                if k >= target:
                    break
                raise InconsistentResonance(n, c)
            inhomogeneity.append(residual.coefficient(target))
        kovalevskaya = [
            [
                (hbar * FIELD(QQ(e[i] + n, r)) / ansatz.scale if i == j else FIELD.zero) - jacobian[jj][ii]
                for ii, i in enumerate(variables)
            ]
            for jj, j in enumerate(variables)
        ]
        values, entry = _solve_order(n, variables, kovalevskaya, inhomogeneity, pins_by_order.get(n, ()), names)
        for v, value in values.items():
            if value:
                coefficients[v][e[v] + n] = value
        if entry is not None:
            ledger.append(entry)
            inserted.extend(entry.parameters)
        logger.debug(f"Order {n} solved for {', '.join(variables)}")

    solution = _solution(template, coefficients, e, order)
    logger.info(f"Expanded {', '.join(variables)} to {order} terms with parameters {inserted}")
    return LaurentSolution(
        solution=solution,
        ledger=tuple(ledger),
        parameters=tuple(inserted),
        ansatz=ansatz,
        terms=order,
    )


def verify_solution(flow: Flow, sol: LaurentSolution) -> Dict[str, ResidualValuation]:
    """Residual valuation of each equation along ``sol`` (exponents in ``t - point``).

    A component whose series is exact below ``(t - point)**N`` passes when its
    residual vanishes below ``(t - point)**(N - 1)``, one power being lost to
    the time derivative.
    """
    report = {}
    for v in sol.ansatz.variables:
        series = sol[v]
        residual = _residual(flow, v, sol.solution)
        valuation = residual.valuation
        report[v] = ResidualValuation(
            valuation=None if valuation is None else residual.exponent(valuation),
            required=None if series.order is None else series.exponent(series.order) - 1,
        )
    return report


def quasi_test(
    ode: ScalarODE,
    ramification: int = 3,
    order: Optional[int] = None,
    point: str = "b",
    scale: RatFunc = FIELD.one,
    parameter_names: Sequence[str] = ("c1", "c2", "c3"),
    pins: Sequence[ResonancePin] = (),
    exponent_range: Optional[Tuple[int, int]] = None,
) -> LaurentSolution:
    """Quasi-Painlevé test: search the balances of the jet system of ``ode`` in
    the ramified variable ``s`` with ``t - point = scale * s**ramification`` and
    expand the most general one.

    Args:
        ode: scalar ODE solved for its top jet
        ramification: order of the branching
        order: recursion steps (defaults to ``settings.quasi_order``)
        point: name of the movable branch point
        scale: normalization of the local variable
        parameter_names: names for free leading coefficients, then for resonances
        pins: normalizations of resonant coefficients
        exponent_range: balance search window in units of 1/ramification

    Raises:
        NoBalance: the window holds no singular balance
        InconsistentResonance: the expansion of the selected balance is obstructed
    """
    order = settings.quasi_order if order is None else order
    flow = jet_flow(ode)
    pinned = {pin.parameter for pin in pins}
    names = [name for name in parameter_names if name not in pinned]
    balances = find_leading_balances(flow, ode.time, exponent_range, ramification, point, scale, names)
    if not balances:
        raise NoBalance(f"no balance of ramification {ramification} for {ode.unknown}")
    ansatz = max(balances, key=lambda a: len(a.parameters))
    logger.info(f"Quasi-Painlevé balance: {ansatz.describe()}")
    remaining = [name for name in names if name not in ansatz.parameters]
    return expand_solution(flow, ansatz, order, remaining, pins)
