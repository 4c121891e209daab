"""
Truncated Laurent and Puiseux series about a movable point.

A series stores ``{n: c_n}`` for the sum of ``c_n * s**n`` where the local
variable satisfies ``variable - point = scale * s**ramification``. Plain
Laurent series have ``ramification == 1`` and ``scale == 1``. ``order`` is
the exponent (in ``s``) of the first unknown term; ``None`` marks an exact
finite sum.
"""
import logging
from dataclasses import dataclass, field
from math import lcm
from types import MappingProxyType
from typing import Callable, Dict, Mapping, Optional, Union

import sympy
from sympy.polys.domains import QQ

from .algebra import FIELD, RatFunc, evaluate_polynomial, ratfunc, symbol_index, to_text
from .config import settings
from .exceptions import (
    DivergentLimit,
    IncompatibleExpansionPoints,
    InsufficientOrder,
    ZeroLeadingCoefficient,
)

logger = logging.getLogger(__name__)


def _min_order(*orders: Optional[int]) -> Optional[int]:
    finite = [n for n in orders if n is not None]
    return min(finite) if finite else None


@dataclass(frozen=True)
class TruncatedSeries:
    """Laurent/Puiseux series with exact rational-function coefficients"""
    variable: str
    point: RatFunc
    coefficients: Mapping[int, RatFunc] = field(default_factory=dict)
    order: Optional[int] = None
    ramification: int = 1
    scale: RatFunc = FIELD.one

    def __post_init__(self):
        clean = {
            int(n): c for n, c in self.coefficients.items()
            if c and (self.order is None or n < self.order)
        }
        object.__setattr__(self, "coefficients", MappingProxyType(dict(sorted(clean.items()))))
        object.__setattr__(self, "point", ratfunc(self.point))
        object.__setattr__(self, "scale", ratfunc(self.scale))

    # -- construction -----------------------------------------------------

    def like(self, coefficients: Mapping[int, RatFunc], order: Optional[int]) -> "TruncatedSeries":
        """New series sharing this one's variable, point, ramification and scale"""
        return TruncatedSeries(self.variable, self.point, coefficients, order, self.ramification, self.scale)

    def constant(self, value) -> "TruncatedSeries":
        return self.like({0: ratfunc(value)}, None)

    def local_variable(self) -> "TruncatedSeries":
        """The local variable itself: ``point + scale * s**ramification``"""
        return self.like({0: self.point, self.ramification: self.scale}, None)

    @classmethod
    def about(cls, variable: str, point, ramification: int = 1, scale=1) -> "TruncatedSeries":
        """Exact zero series about ``variable = point``"""
        return cls(variable, ratfunc(point), {}, None, ramification, ratfunc(scale))

    # -- inspection -------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.order is None

    @property
    def valuation(self) -> Optional[int]:
        """Lowest stored exponent; the truncation order when nothing is known"""
        if self.coefficients:
            return next(iter(self.coefficients))
        return self.order

    def coefficient(self, n: int) -> RatFunc:
        """Coefficient of ``s**n``

        Raises:
            InsufficientOrder: ``n`` lies at or beyond the truncation order
        """
        if self.order is not None and n >= self.order:
            raise InsufficientOrder(f"coefficient {n} requested from a series known below {self.order}")
        return self.coefficients.get(n, FIELD.zero)

    def exponent(self, n: int) -> sympy.Rational:
        """Exponent of ``s**n`` measured in ``variable - point``"""
        return sympy.Rational(n, self.ramification)

    # -- structure --------------------------------------------------------

    def _check_compatible(self, other: "TruncatedSeries"):
        if (
            self.variable != other.variable
            or self.point != other.point
            or self.scale != other.scale
        ):
            raise IncompatibleExpansionPoints(
                f"series about {self.variable} = {self.point.as_expr()} and "
                f"{other.variable} = {other.point.as_expr()} cannot be combined"
            )

    def with_ramification(self, ramification: int) -> "TruncatedSeries":
        """Re-express in a finer ramified variable (``ramification`` a multiple of the current one)"""
        if ramification == self.ramification:
            return self
        if ramification % self.ramification:
            raise IncompatibleExpansionPoints(
                f"ramification {self.ramification} does not divide {ramification}"
            )
        m = ramification // self.ramification
        order = None if self.order is None else self.order * m
        return TruncatedSeries(
            self.variable, self.point,
            {n * m: c for n, c in self.coefficients.items()},
            order, ramification, self.scale,
        )

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            self._check_compatible(other)
            return other
        return self.constant(other)

    def _aligned(self, other) -> tuple:
        other = self._coerce(other)
        r = lcm(self.ramification, other.ramification)
        return self.with_ramification(r), other.with_ramification(r)

    def truncate(self, order: int) -> "TruncatedSeries":
        return self.like(self.coefficients, _min_order(self.order, order))

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by ``s**k``"""
        order = None if self.order is None else self.order + k
        return self.like({n + k: c for n, c in self.coefficients.items()}, order)

    def map_coefficients(self, fn: Callable[[RatFunc], RatFunc]) -> "TruncatedSeries":
        """Apply ``fn`` to every coefficient (e.g. a derivative in another symbol)"""
        return self.like({n: fn(c) for n, c in self.coefficients.items()}, self.order)

    # -- arithmetic -------------------------------------------------------

    def __neg__(self) -> "TruncatedSeries":
        return self.like({n: -c for n, c in self.coefficients.items()}, self.order)

    def __add__(self, other) -> "TruncatedSeries":
        a, b = self._aligned(other)
        order = _min_order(a.order, b.order)
        coefficients: Dict[int, RatFunc] = dict(a.coefficients)
        for n, c in b.coefficients.items():
            coefficients[n] = coefficients[n] + c if n in coefficients else c
        return a.like(coefficients, order)

    __radd__ = __add__

    def __sub__(self, other) -> "TruncatedSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "TruncatedSeries":
        return self._coerce(other) - self

    def __mul__(self, other) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            value = ratfunc(other)
            return self.like({n: c * value for n, c in self.coefficients.items()}, self.order if value else None)
        a, b = self._aligned(other)
        if (not a.coefficients and a.order is None) or (not b.coefficients and b.order is None):
            return a.like({}, None)
        order = _min_order(
            None if a.order is None else a.order + b.valuation,
            None if b.order is None else b.order + a.valuation,
        )
        product: Dict[int, RatFunc] = {}
        for n, c in a.coefficients.items():
            for m, d in b.coefficients.items():
                k = n + m
                if order is not None and k >= order:
                    break
                product[k] = product[k] + c * d if k in product else c * d
        return a.like(product, order)

    __rmul__ = __mul__

    def invert(self, terms: Optional[int] = None) -> "TruncatedSeries":
        """Multiplicative inverse; ``a * a.invert() = 1 + O(s**(order - 2*valuation))``

        Args:
            terms: relative precision used when ``self`` is exact and has several terms

        Raises:
            ZeroLeadingCoefficient: no nonzero coefficient is known
        """
        if not self.coefficients:
            raise ZeroLeadingCoefficient(
                f"series about {self.variable} = {self.point.as_expr()} has no known nonzero term"
            )
        v = self.valuation
        c0 = self.coefficients[v]
        if self.order is None and len(self.coefficients) == 1:
            return self.like({-v: 1 / c0}, None)
        if self.order is None:
            precision = settings.series_order if terms is None else terms
        else:
            precision = self.order - v
        inverse_lead = 1 / c0
        d: Dict[int, RatFunc] = {}
        for k in range(precision):
            if k == 0:
                d[0] = inverse_lead
                continue
            acc = FIELD.zero
            for j in range(1, k + 1):
                c = self.coefficients.get(v + j)
                if c is not None and (k - j) in d:
                    acc += c * d[k - j]
            if acc:
                d[k] = -inverse_lead * acc
        return self.like({k - v: c for k, c in d.items()}, -v + precision)

    def __truediv__(self, other) -> "TruncatedSeries":
        if not isinstance(other, TruncatedSeries):
            return self * (1 / ratfunc(other))
        return self * self._coerce(other).invert()

    def __rtruediv__(self, other) -> "TruncatedSeries":
        return self._coerce(other) * self.invert()

    def __pow__(self, n: int) -> "TruncatedSeries":
        if n < 0:
            return self.invert() ** (-n)
        result = self.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def derivative(self) -> "TruncatedSeries":
        """Derivative in the local variable (not in ``s``)"""
        r = self.ramification
        factor = 1 / self.scale
        coefficients = {
            n - r: c * FIELD(QQ(n, r)) * factor
            for n, c in self.coefficients.items() if n
        }
        order = None if self.order is None else self.order - r
        return self.like(coefficients, order)

    # -- text -------------------------------------------------------------

    def _base_text(self) -> str:
        base = f"{self.variable} - {_wrapped(self.point)}" if self.point else self.variable
        if self.scale != FIELD.one:
            return f"(({base})/({to_text(self.scale)}))"
        return f"({base})"

    def _power_text(self, n: int) -> str:
        e = sympy.Rational(n, self.ramification)
        return f"{self._base_text()}^{e}" if e.q == 1 and e >= 0 else f"{self._base_text()}^({e})"

    def to_text(self) -> str:
        """Terms ``c * (t1 - alpha)^(n/r)`` in increasing exponent plus the ``O(...)`` tail"""
        pieces = [
            f"({to_text(c)})" if n == 0 else f"({to_text(c)}) * {self._power_text(n)}"
            for n, c in self.coefficients.items()
        ]
        if self.order is not None:
            pieces.append(f"O({self._power_text(self.order)})")
        return " + ".join(pieces) if pieces else "0"

    def __str__(self) -> str:
        return self.to_text()


def _wrapped(value: RatFunc) -> str:
    text = to_text(value)
    return text if text.replace("_", "").isalnum() else f"({text})"


@dataclass(frozen=True)
class SeriesSolution:
    """Series for each canonical variable about one shared point"""
    series: Mapping[str, TruncatedSeries]

    def __post_init__(self):
        members = list(self.series.values())
        if not members:
            raise ValueError("a series solution needs at least one variable")
        first = members[0]
        for s in members[1:]:
            first._check_compatible(s)
            if s.ramification != first.ramification:
                raise IncompatibleExpansionPoints("solution members must share one ramification")
        object.__setattr__(self, "series", MappingProxyType(dict(self.series)))

    def __getitem__(self, name: str) -> TruncatedSeries:
        return self.series[name]

    def __iter__(self):
        return iter(self.series)

    @property
    def template(self) -> TruncatedSeries:
        return next(iter(self.series.values()))

    @property
    def variable(self) -> str:
        return self.template.variable

    @property
    def point(self) -> RatFunc:
        return self.template.point

    @property
    def order(self) -> Optional[int]:
        return _min_order(*(s.order for s in self.series.values()))


def substitute_solution(
    f: RatFunc,
    sol: Union[SeriesSolution, Mapping[str, TruncatedSeries]],
    extra: Optional[Mapping[str, TruncatedSeries]] = None,
    order: Optional[int] = None,
) -> TruncatedSeries:
    """Expand ``f`` along a series solution.

    The local variable is bound to ``point + scale * s**r``; symbols bound by
    neither ``sol`` nor ``extra`` pass through into the coefficients.

    Raises:
        ZeroLeadingCoefficient: the substituted denominator has no known nonzero term
        InsufficientOrder: ``order`` exceeds what the solution supports
    """
    bindings: Dict[str, TruncatedSeries] = dict(sol.series if isinstance(sol, SeriesSolution) else sol)
    bindings.update(extra or {})
    template = next(iter(bindings.values()))
    bindings.setdefault(template.variable, template.local_variable())
    indexed = {symbol_index(name): s for name, s in bindings.items()}

    numer = evaluate_polynomial(f.numer, indexed, template.constant)
    if numer is None:
        result = template.like({}, None)
    else:
        denom = evaluate_polynomial(f.denom, indexed, template.constant)
        result = numer if denom.is_exact and denom.coefficients == {0: FIELD.one} else numer / denom

    if order is not None:
        if result.order is not None and result.order < order:
            raise InsufficientOrder(f"expansion known below {result.order}, {order} requested")
        result = result.truncate(order)
    return result


def series_limit(a: TruncatedSeries) -> RatFunc:
    """Constant term, provided no negative exponent survives

    Raises:
        InsufficientOrder: the series is not known up to the constant term
        DivergentLimit: first negative exponent with a nonzero coefficient
    """
    if a.order is not None and a.order <= 0:
        raise InsufficientOrder(f"series known only below exponent {a.exponent(a.order)}")
    for n, c in a.coefficients.items():
        if n < 0:
            raise DivergentLimit(a.exponent(n), c)
        break
    return a.coefficients.get(0, FIELD.zero)
