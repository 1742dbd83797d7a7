"""
Truncated power series over complex coefficients.

A series represents w^lead * (c_0 + c_1 w + ... + c_N w^N); coefficients beyond
index N are unknown, never zero, so every operation is exact modulo O(w^(lead+N+1)).
Values are immutable and every operation is a pure function.
"""
import cmath
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from src.core.errors import SeriesError
from src.utils.config import DEFAULT_TRUNCATION_ORDER

Number = Union[int, float, complex]


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    coeffs: np.ndarray
    lead_exponent: float = 0.0

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex).ravel()
        if coeffs.size < 2:
            raise SeriesError("a truncated series needs a positive truncation order")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "lead_exponent", float(self.lead_exponent))

    @classmethod
    def from_coeffs(cls, coeffs: Iterable[Number], order: Optional[int] = None,
                    lead: float = 0.0) -> "TruncatedSeries":
        """Pad or truncate a coefficient list to the given order."""
        values = np.asarray(list(coeffs), dtype=complex)
        if order is None:
            order = max(values.size - 1, 1)
        padded = np.zeros(order + 1, dtype=complex)
        n = min(values.size, order + 1)
        padded[:n] = values[:n]
        return cls(padded, lead)

    @classmethod
    def constant(cls, value: Number, order: int = DEFAULT_TRUNCATION_ORDER) -> "TruncatedSeries":
        return cls.from_coeffs([value], order)

    @classmethod
    def variable(cls, order: int = DEFAULT_TRUNCATION_ORDER) -> "TruncatedSeries":
        """The series w."""
        return cls.from_coeffs([0.0, 1.0], order)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def __len__(self) -> int:
        return self.coeffs.size

    def __getitem__(self, n: int) -> complex:
        return complex(self.coeffs[n])

    def __add__(self, other):
        return series_add(self, _coerce(other, self))

    __radd__ = __add__

    def __sub__(self, other):
        return series_sub(self, _coerce(other, self))

    def __rsub__(self, other):
        return series_sub(_coerce(other, self), self)

    def __neg__(self):
        return series_scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return series_scale(self, other)

    __rmul__ = __mul__

    def allclose(self, other: "TruncatedSeries", tol: float = 1e-12) -> bool:
        """Coefficientwise comparison with an absolute tolerance."""
        return (self.order == other.order
                and abs(self.lead_exponent - other.lead_exponent) <= tol
                and bool(np.all(np.abs(self.coeffs - other.coeffs) <= tol)))

    def max_deviation(self, other: "TruncatedSeries") -> float:
        n = min(self.order, other.order) + 1
        return float(np.max(np.abs(self.coeffs[:n] - other.coeffs[:n])))

    def evaluate(self, w, derivative: int = 0, branch=0):
        """Evaluate w^lead * sum c_n w^n (or a derivative) on the given branch of w^lead."""
        w = np.asarray(w, dtype=complex)
        log_w = np.log(w) + 2j * np.pi * np.asarray(branch)
        return evaluate_with_log(self, w, log_w, derivative)

    def __repr__(self) -> str:
        return f"TruncatedSeries(lead={self.lead_exponent}, order={self.order})"


def evaluate_with_log(s: TruncatedSeries, w, log_w, derivative: int = 0):
    """Evaluate a series (or its derivative) given a chosen logarithm of w."""
    w = np.asarray(w, dtype=complex)
    lam = s.lead_exponent
    n = np.arange(s.coeffs.size, dtype=float)
    weights = np.ones_like(n)
    for j in range(derivative):
        weights = weights * (lam + n - j)
    poly = np.polynomial.polynomial.polyval(w, s.coeffs * weights)
    shift = lam - derivative
    if shift == 0:
        return poly
    if lam == 0.0:
        # integer power: avoid branch factors entirely
        return poly * w ** (-derivative)
    return poly * np.exp(shift * np.asarray(log_w))


def _coerce(value, like: TruncatedSeries) -> TruncatedSeries:
    if isinstance(value, TruncatedSeries):
        return value
    return TruncatedSeries.from_coeffs([value], like.order, like.lead_exponent)


def _check_orders(a: TruncatedSeries, b: TruncatedSeries):
    if a.order != b.order:
        raise SeriesError(f"mismatched truncation orders {a.order} and {b.order}")


def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    _check_orders(a, b)
    if a.lead_exponent != b.lead_exponent:
        raise SeriesError("cannot add series with different lead exponents")
    return TruncatedSeries(a.coeffs + b.coeffs, a.lead_exponent)


def series_sub(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return series_add(a, series_scale(b, -1.0))


def series_scale(a: TruncatedSeries, factor: Number) -> TruncatedSeries:
    return TruncatedSeries(a.coeffs * complex(factor), a.lead_exponent)


def series_shift(a: TruncatedSeries, m: int) -> TruncatedSeries:
    """Multiply by w^m (m may be negative when the low coefficients vanish)."""
    out = np.zeros_like(a.coeffs)
    if m >= 0:
        out[m:] = a.coeffs[:a.coeffs.size - m]
    else:
        if np.any(a.coeffs[:-m] != 0):
            raise SeriesError(f"cannot divide by w^{-m}: low coefficients are nonzero")
        out[:a.coeffs.size + m] = a.coeffs[-m:]
    return TruncatedSeries(out, a.lead_exponent)


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated at N; lead exponents add."""
    _check_orders(a, b)
    product = np.convolve(a.coeffs, b.coeffs)[:a.coeffs.size]
    return TruncatedSeries(product, a.lead_exponent + b.lead_exponent)


def series_reciprocal(a: TruncatedSeries) -> TruncatedSeries:
    c = a.coeffs
    if c[0] == 0:
        raise SeriesError("reciprocal needs a nonzero constant term")
    out = np.zeros_like(c)
    out[0] = 1.0 / c[0]
    for n in range(1, c.size):
        out[n] = -np.dot(c[1:n + 1], out[n - 1::-1]) / c[0]
    return TruncatedSeries(out, -a.lead_exponent)


def series_div(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    return series_mul(a, series_reciprocal(b))


def series_derivative(a: TruncatedSeries) -> TruncatedSeries:
    """d/dw of an ordinary series; the unknown top coefficient is padded with zero."""
    if a.lead_exponent != 0.0:
        raise SeriesError("derivative series is only defined for lead exponent 0")
    c = a.coeffs
    out = np.zeros_like(c)
    out[:-1] = c[1:] * np.arange(1, c.size)
    return TruncatedSeries(out)


def series_exp(a: TruncatedSeries) -> TruncatedSeries:
    """exp of a series with zero constant term, via (exp a)' = a' exp a."""
    if a.lead_exponent != 0.0:
        raise SeriesError("exp requires lead exponent 0")
    c = a.coeffs
    if c[0] != 0:
        raise SeriesError("exp requires a zero constant term")
    k = np.arange(c.size)
    kc = k * c
    out = np.zeros_like(c)
    out[0] = 1.0
    for n in range(1, c.size):
        out[n] = np.dot(kc[1:n + 1], out[n - 1::-1]) / n
    return TruncatedSeries(out)


def series_log(a: TruncatedSeries) -> TruncatedSeries:
    """Principal logarithm of a series with nonzero constant term."""
    if a.lead_exponent != 0.0:
        raise SeriesError("log requires lead exponent 0")
    c = a.coeffs
    if c[0] == 0:
        raise SeriesError("log requires a nonzero constant term")
    out = np.zeros_like(c)
    out[0] = cmath.log(c[0])
    k = np.arange(c.size)
    for n in range(1, c.size):
        acc = np.dot(k[1:n] * out[1:n], c[n - 1:0:-1]) if n > 1 else 0.0
        out[n] = (n * c[n] - acc) / (n * c[0])
    return TruncatedSeries(out)


def series_pow(a: TruncatedSeries, p: float) -> TruncatedSeries:
    """a^p with the principal branch of c_0^p; the lead exponent multiplies by p."""
    c = a.coeffs
    if c[0] == 0:
        raise SeriesError("pow requires a nonzero constant term")
    p = float(p)
    out = np.zeros_like(c)
    out[0] = cmath.exp(p * cmath.log(c[0]))
    k = np.arange(c.size, dtype=float)
    for n in range(1, c.size):
        weights = (p + 1.0) * k[1:n + 1] - n
        out[n] = np.dot(weights * c[1:n + 1], out[n - 1::-1]) / (n * c[0])
    return TruncatedSeries(out, a.lead_exponent * p)


def series_compose(outer: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    """outer(inner(w)) by Horner evaluation in the series algebra."""
    _check_orders(outer, inner)
    if inner.lead_exponent != 0.0 or outer.lead_exponent != 0.0:
        raise SeriesError("composition requires lead exponent 0 on both series")
    if inner.coeffs[0] != 0:
        raise SeriesError("inner series must have a zero constant term")
    acc = np.zeros_like(outer.coeffs)
    acc[0] = outer.coeffs[-1]
    for coeff in outer.coeffs[-2::-1]:
        acc = np.convolve(acc, inner.coeffs)[:acc.size]
        acc[0] += coeff
    return TruncatedSeries(acc)


def series_reversion(a: TruncatedSeries) -> TruncatedSeries:
    """Compositional inverse b with a(b(w)) = w, by Newton iteration on series."""
    c = a.coeffs
    if a.lead_exponent != 0.0 or c[0] != 0:
        raise SeriesError("reversion requires lead exponent 0 and zero constant term")
    if c[1] == 0:
        raise SeriesError("reversion requires a nonzero linear coefficient")
    w = TruncatedSeries.variable(a.order)
    da = series_derivative(a)
    b = series_scale(w, 1.0 / c[1])
    correct = 2
    while True:
        residual = series_sub(series_compose(a, b), w)
        slope = series_compose(da, b)
        b = series_sub(b, series_div(residual, slope))
        if correct > a.order + 1:
            break
        correct *= 2
    return b


def coefficient_list(s: TruncatedSeries) -> Sequence[complex]:
    return [complex(x) for x in s.coeffs]


@dataclass(frozen=True, eq=False)
class LaurentWindow:
    """Laurent coefficients indexed from `low` to `high` inclusive; other indices are errors."""
    coeffs: np.ndarray
    low: int = -2

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex).ravel()
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def high(self) -> int:
        return self.low + self.coeffs.size - 1

    def __getitem__(self, n: int) -> complex:
        if not self.low <= n <= self.high:
            raise SeriesError(f"index {n} outside Laurent window [{self.low}, {self.high}]")
        return complex(self.coeffs[n - self.low])

    def tail(self) -> np.ndarray:
        """Coefficients at indices >= 0."""
        return self.coeffs[-self.low:] if self.low < 0 else self.coeffs
