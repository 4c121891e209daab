"""
Exact arithmetic substrate: the symbol registry, sparse multivariate
polynomials and reduced rational functions over QQ.

Polynomials are sympy ``PolyElement`` values of ``RING`` and rational
functions are ``FracElement`` values of ``FIELD``; both are immutable and
canonical (numerator and denominator coprime, denominator with positive
leading coefficient under graded-lex order).
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Mapping, Optional, Tuple, TypeVar, Union

import sympy
from sympy.polys.domains import QQ, ZZ
from sympy.polys.fields import FracElement, FracField
from sympy.polys.orderings import grlex
from sympy.polys.polyerrors import ExactQuotientFailed
from sympy.polys.rings import PolyElement

from .exceptions import (
    DegreeZero,
    DenominatorVanishesIdentically,
    DivisionByZero,
    GradingError,
    NonExactDivision,
    UnknownSymbol,
)

logger = logging.getLogger(__name__)

RatFunc = FracElement
MultiPoly = PolyElement
T = TypeVar("T")


@dataclass(frozen=True)
class RegisteredSymbol:
    """A registry entry: wire name and role"""
    name: str
    role: str


REGISTRY: Tuple[RegisteredSymbol, ...] = (
    RegisteredSymbol("x", "spectral"),
    RegisteredSymbol("t1", "time"),
    RegisteredSymbol("t2", "time"),
    RegisteredSymbol("hbar", "deformation"),
    RegisteredSymbol("theta0", "constant"),
    RegisteredSymbol("thetainf", "constant"),
    RegisteredSymbol("q", "canonical"),
    RegisteredSymbol("p", "canonical"),
    RegisteredSymbol("q1", "canonical"),
    RegisteredSymbol("q2", "canonical"),
    RegisteredSymbol("p1", "canonical"),
    RegisteredSymbol("p2", "canonical"),
    RegisteredSymbol("xi1", "canonical"),
    RegisteredSymbol("xi2", "canonical"),
    RegisteredSymbol("xi3", "canonical"),
    RegisteredSymbol("xi4", "canonical"),
    RegisteredSymbol("alpha", "reduction"),
    RegisteredSymbol("beta", "reduction"),
    RegisteredSymbol("gamma", "reduction"),
    RegisteredSymbol("delta", "reduction"),
    RegisteredSymbol("b", "second-stage"),
    RegisteredSymbol("c1", "second-stage"),
    RegisteredSymbol("c2", "second-stage"),
    RegisteredSymbol("c3", "second-stage"),
    RegisteredSymbol("alpha_d1", "jet"),
    RegisteredSymbol("alpha_d2", "jet"),
    RegisteredSymbol("alpha_d3", "jet"),
    RegisteredSymbol("alpha_d4", "jet"),
    RegisteredSymbol("beta_d1", "jet"),
    RegisteredSymbol("gamma_d1", "jet"),
    RegisteredSymbol("delta_d1", "jet"),
)

SYMBOL_NAMES: Tuple[str, ...] = tuple(entry.name for entry in REGISTRY)
SYMBOLS: Tuple[sympy.Symbol, ...] = tuple(sympy.Symbol(name) for name in SYMBOL_NAMES)
_INDEX: Dict[str, int] = {name: i for i, name in enumerate(SYMBOL_NAMES)}

FIELD = FracField(SYMBOLS, QQ, grlex)
RING = FIELD.ring
DOMAIN = FIELD.to_domain()
_ZZ_RING = RING.clone(domain=ZZ)


def symbol_index(name: str) -> int:
    """Position of ``name`` in the registry (the monomial order)"""
    try:
        return _INDEX[name]
    except KeyError:
        raise UnknownSymbol(name) from None


def gen(name: str) -> RatFunc:
    """Registered symbol as a rational function"""
    return FIELD.gens[symbol_index(name)]


def poly_gen(name: str) -> MultiPoly:
    """Registered symbol as a polynomial"""
    return RING.gens[symbol_index(name)]


def symbol(name: str) -> sympy.Symbol:
    return SYMBOLS[symbol_index(name)]


def ratfunc(value: Union[int, RatFunc, MultiPoly, sympy.Expr]) -> RatFunc:
    """Coerce an integer, sympy expression or polynomial into ``FIELD``"""
    if isinstance(value, FracElement):
        return value
    if isinstance(value, PolyElement):
        return FIELD.new(value.set_ring(RING))
    if isinstance(value, sympy.Expr):
        try:
            return FIELD.from_expr(value)
        except ValueError:
            raise UnknownSymbol(", ".join(sorted(str(s) for s in value.free_symbols))) from None
    return FIELD(value)


def rational(numerator: int, denominator: int = 1) -> RatFunc:
    return FIELD(QQ(numerator, denominator))


def is_zero(f: RatFunc) -> bool:
    return not f


# ---------------------------------------------------------------------------
# Ring and field operations
# ---------------------------------------------------------------------------

def divide(a: RatFunc, b: RatFunc) -> RatFunc:
    """Quotient in the fraction field"""
    if not b:
        raise DivisionByZero(f"division of {a.as_expr()} by zero")
    return a / b


def exact_divide(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Polynomial quotient; errors unless ``b`` divides ``a``"""
    if not b:
        raise DivisionByZero(f"division of {a.as_expr()} by zero")
    try:
        return a.exquo(b)
    except ExactQuotientFailed:
        raise NonExactDivision(f"{b.as_expr()} does not divide {a.as_expr()}") from None


def power(a: RatFunc, n: int) -> RatFunc:
    if n < 0 and not a:
        raise DivisionByZero("negative power of zero")
    return a ** n


def differentiate(f: RatFunc, name: str) -> RatFunc:
    """Exact partial derivative with respect to a registered symbol"""
    return f.diff(gen(name))


def degree_in(f: Union[RatFunc, MultiPoly], name: str) -> int:
    """Degree of a polynomial (or of a numerator) in one symbol; -1 for zero"""
    poly = f.numer if isinstance(f, FracElement) else f
    if not poly:
        return -1
    return poly.degree(RING.gens[symbol_index(name)])


def free_symbols(f: Union[RatFunc, MultiPoly]) -> frozenset:
    """Names of the registered symbols a value depends on"""
    polys = (f.numer, f.denom) if isinstance(f, FracElement) else (f,)
    names = set()
    for poly in polys:
        for monom in poly.itermonoms():
            names.update(SYMBOL_NAMES[i] for i, k in enumerate(monom) if k)
    return frozenset(names)


def evaluate_polynomial(
    poly: MultiPoly,
    bindings: Mapping[int, T],
    lift: Callable[[RatFunc], T],
) -> Optional[T]:
    """Evaluate ``poly`` with some generators bound to ring-like values.

    Terms are grouped by their bound part so each distinct product of bound
    powers is formed once; unbound generators stay in the coefficients.

    Args:
        poly: polynomial of ``RING``
        bindings: generator index -> value supporting ``+``, ``*`` and ``**``
        lift: embeds a rational-function coefficient into the value type

    Returns:
        The evaluated value, or None when ``poly`` is zero
    """
    bound = sorted(bindings)
    groups: Dict[Tuple[int, ...], Dict[Tuple[int, ...], object]] = {}
    for monom, coeff in poly.iterterms():
        key = tuple(monom[i] for i in bound)
        free = list(monom)
        for i in bound:
            free[i] = 0
        groups.setdefault(key, {})[tuple(free)] = coeff

    powers: Dict[Tuple[int, int], T] = {}

    def bound_power(i: int, k: int) -> T:
        if (i, k) not in powers:
            powers[(i, k)] = bindings[i] if k == 1 else bound_power(i, k - 1) * bindings[i]
        return powers[(i, k)]

    result = None
    for key in sorted(groups):
        term = lift(FIELD.new(RING.from_dict(groups[key])))
        for i, k in zip(bound, key):
            if k:
                term = term * bound_power(i, k)
        result = term if result is None else result + term
    return result


def substitute(f: RatFunc, bindings: Mapping[str, RatFunc]) -> RatFunc:
    """Simultaneous substitution of registered symbols by rational functions.

    Raises:
        UnknownSymbol: a binding key is not registered
        DenominatorVanishesIdentically: the substituted denominator is zero
    """
    indexed = {symbol_index(name): ratfunc(value) for name, value in bindings.items()}
    if not indexed:
        return f
    numer = evaluate_polynomial(f.numer, indexed, lambda c: c) or FIELD.zero
    denom = evaluate_polynomial(f.denom, indexed, lambda c: c) or FIELD.zero
    if not denom:
        raise DenominatorVanishesIdentically(
            f"denominator {f.denom.as_expr()} vanishes under the substitution"
        )
    return numer / denom


def multipoly_gcd(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Primitive gcd with positive leading coefficient; gcd(0, 0) = 0"""
    if not a and not b:
        return RING.zero
    _, a_int = a.clear_denoms()
    _, b_int = b.clear_denoms()
    g = a_int.set_ring(_ZZ_RING).gcd(b_int.set_ring(_ZZ_RING))
    _, g = g.primitive()
    if g.LC < 0:
        g = -g
    return g.set_ring(RING)


def discriminant(f: Union[MultiPoly, RatFunc], name: str) -> MultiPoly:
    """Discriminant in one symbol: (-1)^(n(n-1)/2) res(f, f') / lc(f)"""
    if isinstance(f, FracElement):
        if f.denom != RING.one:
            raise DegreeZero("discriminant needs a polynomial")
        f = f.numer
    if degree_in(f, name) <= 0:
        raise DegreeZero(f"{f.as_expr()} has no positive degree in {name}")
    value = sympy.discriminant(f.as_expr(), symbol(name))
    return RING.from_expr(sympy.expand(value)) if value != 0 else RING.zero


def split_by_degree(f: RatFunc, name: str, max_degree: Optional[int] = None) -> Dict[int, RatFunc]:
    """Split ``f`` as a polynomial in one symbol whose coefficients share ``f``'s denominator.

    Raises:
        GradingError: the symbol occurs in the denominator or above ``max_degree``
    """
    g = RING.gens[symbol_index(name)]
    if f.denom.degree(g) > 0:
        raise GradingError(f"{name} occurs in the denominator {f.denom.as_expr()}")
    top = f.numer.degree(g)
    if max_degree is not None and top > max_degree:
        raise GradingError(f"degree {top} in {name} exceeds {max_degree}")
    denom = FIELD.new(f.denom)
    return {
        k: FIELD.new(f.numer.coeff_wrt(g, k)) / denom
        for k in range(max(top, 0) + 1)
    }


def monomial_ratio(a: RatFunc, b: RatFunc) -> Optional[RatFunc]:
    """``a / b`` when it is a single monomial (a unit up to symbols), else None"""
    if not b:
        return None
    ratio = a / b
    if len(ratio.numer) == 1 and len(ratio.denom) == 1:
        return ratio
    return None


# ---------------------------------------------------------------------------
# Canonical text
# ---------------------------------------------------------------------------

def _monomial_text(monom: Iterable[int]) -> str:
    return "*".join(
        SYMBOL_NAMES[i] if k == 1 else f"{SYMBOL_NAMES[i]}^{k}"
        for i, k in enumerate(monom) if k
    )


def _coefficient_text(c) -> str:
    numerator, denominator = int(c.numerator), int(c.denominator)
    return str(numerator) if denominator == 1 else f"{numerator}/{denominator}"


def poly_to_text(poly: MultiPoly) -> str:
    """Canonical text of a polynomial: graded-lex sorted terms, ``^`` powers, explicit ``*``"""
    if not poly:
        return "0"
    pieces = []
    for monom, coeff in poly.terms():
        negative = coeff < 0
        magnitude = -coeff if negative else coeff
        mono = _monomial_text(monom)
        if not mono:
            body = _coefficient_text(magnitude)
        elif magnitude == 1:
            body = mono
        else:
            body = f"{_coefficient_text(magnitude)}*{mono}"
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f" - {body}" if negative else f" + {body}")
    return "".join(pieces)


def to_text(f: Union[RatFunc, MultiPoly]) -> str:
    """Canonical text of a rational function (re-parses to the identical value)"""
    if isinstance(f, PolyElement):
        return poly_to_text(f)
    if f.denom.is_ground:
        return poly_to_text(f.numer.quo_ground(f.denom.LC))
    return f"({poly_to_text(f.numer)})/({poly_to_text(f.denom)})"
