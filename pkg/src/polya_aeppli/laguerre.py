"""
Associated Laguerre polynomials :math:`L_n^{\\alpha}(x)` for integer
:math:`\\alpha \\ge 0`.

Every probability mass function in this package is a product or a sum of
products of terms :math:`\\rho^{n} L_n^{\\alpha}(x)` evaluated at
:math:`x = -\\lambda(1-\\rho)/\\rho < 0`. On the negative half-line all
coefficients of

.. math::
    L_n^{\\alpha}(x) = \\sum_{m=0}^{n} (-1)^m \\binom{n+\\alpha}{n-m} \\frac{x^m}{m!}

are positive, so the polynomials are positive and grow super-geometrically
in ``n``. Values are therefore carried as :class:`ScaledValue`
(mantissa/exponent pairs) or directly in log space, never as bare floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "ScaledValue",
    "laguerre_eval",
    "laguerre_row",
    "laguerre_direct",
    "log_laguerre_table",
    "log_laguerre_excess_table",
]

# rescale once the running values leave [2**-_RESCALE_BITS, 2**_RESCALE_BITS]
_RESCALE_BITS = 256


@dataclass(frozen=True)
class ScaledValue:
    """A real number stored as ``mantissa * 2**exponent``.

    ``abs(mantissa)`` lies in ``[1, 2)`` unless the value is zero, in which
    case both fields are zero. The exponent is an unbounded Python ``int``,
    so the representable range is far larger than that of a float.
    """

    mantissa: float
    exponent: int

    def __post_init__(self) -> None:
        m = self.mantissa
        if m == 0.0:
            if self.exponent != 0:
                raise ValueError("zero must be stored with exponent 0")
        elif not (1.0 <= abs(m) < 2.0):
            raise ValueError(f"mantissa {m!r} not normalised to [1, 2)")

    @classmethod
    def from_float(cls, value: float, exponent: int = 0) -> "ScaledValue":
        """Normalise ``value * 2**exponent``."""
        if not math.isfinite(value):
            raise ValueError(f"cannot scale non-finite value {value!r}")
        if value == 0.0:
            return cls(0.0, 0)
        m, e = math.frexp(value)  # m in [0.5, 1)
        return cls(m * 2.0, exponent + e - 1)

    @classmethod
    def from_log(cls, log_value: float) -> "ScaledValue":
        """Positive value from its natural logarithm."""
        if log_value == -math.inf:
            return cls(0.0, 0)
        log2 = log_value / math.log(2.0)
        e = math.floor(log2)
        return cls.from_float(2.0 ** (log2 - e), e)

    def __float__(self) -> float:
        return math.ldexp(self.mantissa, self.exponent)

    def __mul__(self, other: "ScaledValue | float") -> "ScaledValue":
        if not isinstance(other, ScaledValue):
            other = ScaledValue.from_float(float(other))
        return ScaledValue.from_float(
            self.mantissa * other.mantissa, self.exponent + other.exponent
        )

    __rmul__ = __mul__

    def __add__(self, other: "ScaledValue | float") -> "ScaledValue":
        if not isinstance(other, ScaledValue):
            other = ScaledValue.from_float(float(other))
        if self.mantissa == 0.0:
            return other
        if other.mantissa == 0.0:
            return self
        hi, lo = (self, other) if self.exponent >= other.exponent else (other, self)
        shift = lo.exponent - hi.exponent
        if shift < -1100:
            return hi
        return ScaledValue.from_float(
            hi.mantissa + math.ldexp(lo.mantissa, shift), hi.exponent
        )

    __radd__ = __add__

    def __neg__(self) -> "ScaledValue":
        return ScaledValue(-self.mantissa, self.exponent)

    @property
    def sign(self) -> int:
        return (self.mantissa > 0) - (self.mantissa < 0)

    def log(self) -> float:
        """Natural log of a positive value (``-inf`` for zero)."""
        if self.mantissa < 0:
            raise ValueError("log of a negative ScaledValue")
        if self.mantissa == 0.0:
            return -math.inf
        return math.log(self.mantissa) + self.exponent * math.log(2.0)


def laguerre_row(n_max: int, alpha: int, x: float) -> list[ScaledValue]:
    """Return ``[L_0^alpha(x), ..., L_{n_max}^alpha(x)]``.

    Uses the three-term recurrence

    .. math::
        n L_n^{\\alpha} = (2n - 1 + \\alpha - x) L_{n-1}^{\\alpha}
                          - (n - 1 + \\alpha) L_{n-2}^{\\alpha}

    with the two running values rescaled by a shared power of two whenever
    they drift out of range.
    """
    n_max = int(n_max)
    alpha = int(alpha)
    if n_max < 0 or alpha < 0:
        raise ValueError("n_max and alpha must be non-negative")
    x = float(x)

    out = [ScaledValue.from_float(1.0)]
    if n_max == 0:
        return out

    prev, cur, scale = 1.0, 1.0 + alpha - x, 0
    out.append(ScaledValue.from_float(cur))
    hi = 2.0**_RESCALE_BITS
    lo = 2.0**-_RESCALE_BITS
    for n in range(2, n_max + 1):
        nxt = ((2 * n - 1 + alpha - x) * cur - (n - 1 + alpha) * prev) / n
        prev, cur = cur, nxt
        mag = abs(cur)
        if mag > hi or (0.0 < mag < lo):
            _, e = math.frexp(cur)
            prev = math.ldexp(prev, -e)
            cur = math.ldexp(cur, -e)
            scale += e
        out.append(ScaledValue.from_float(cur, scale))
    return out


def laguerre_eval(n: int, alpha: int, x: float) -> ScaledValue:
    """Single value :math:`L_n^{\\alpha}(x)`; identical to ``laguerre_row(n, alpha, x)[n]``."""
    return laguerre_row(n, alpha, x)[-1]


def laguerre_direct(n: int, alpha: int, x: float) -> float:
    """Explicit finite sum for :math:`L_n^{\\alpha}(x)`.

    Only meant for small ``n``; the production path is :func:`laguerre_row`.
    """
    return math.fsum(
        (-1) ** m * math.comb(n + alpha, n - m) * x**m / math.factorial(m)
        for m in range(n + 1)
    )


def log_laguerre_table(n_max: int, alpha_max: int, x: float) -> NDArray[np.float64]:
    """Log of :math:`L_n^{\\alpha}(x)` for every ``alpha <= alpha_max``, ``n <= n_max``.

    Vectorised over ``alpha``; the recurrence is renormalised at each step so
    nothing overflows. Requires ``x <= 0`` (all values positive).

    Returns
    -------
    ndarray, shape ``(alpha_max + 1, n_max + 1)``
    """
    if x > 0:
        raise ValueError("log_laguerre_table needs x <= 0")
    alpha = np.arange(alpha_max + 1, dtype=np.float64)
    out = np.empty((alpha_max + 1, n_max + 1))
    out[:, 0] = 0.0
    if n_max == 0:
        return out
    cur = 1.0 + alpha - x
    out[:, 1] = np.log(cur)
    # after normalising, cur == 1 and prev holds L_{n-2} / L_{n-1}
    prev = 1.0 / cur
    cur = np.ones_like(alpha)
    for n in range(2, n_max + 1):
        nxt = ((2 * n - 1 + alpha - x) * cur - (n - 1 + alpha) * prev) / n
        out[:, n] = out[:, n - 1] + np.log(nxt)
        prev = cur / nxt
    return out


def log_laguerre_excess_table(
    n_max: int, alpha_max: int, x: float
) -> NDArray[np.float64]:
    """Log of :math:`L_n^{\\alpha}(x) - \\binom{n+\\alpha}{n}` for ``x < 0``.

    The subtracted binomial is the constant term of the series, so the
    excess ``E_n`` is a sum of positive terms. It obeys the Laguerre
    recurrence with an extra positive forcing term,

    .. math::
        n E_n = (2n - 1 + \\alpha - x) E_{n-1} - (n - 1 + \\alpha) E_{n-2}
                - x \\binom{n - 1 + \\alpha}{n - 1},

    started from ``E_0 = 0`` and ``E_1 = -x``. It is run on ratios of
    consecutive values, which stay of order one even as ``x -> 0``.
    Entries with ``n = 0`` are ``-inf``.

    Returns
    -------
    ndarray, shape ``(alpha_max + 1, n_max + 1)``
    """
    if not x < 0:
        raise ValueError("log_laguerre_excess_table needs x < 0")
    out = np.full((alpha_max + 1, n_max + 1), -np.inf)
    if n_max == 0:
        return out
    alpha = np.arange(alpha_max + 1, dtype=np.float64)
    log_neg_x = math.log(-x)
    out[:, 1] = log_neg_x
    # prev = E_{n-2} / E_{n-1}; log_c = log C(n - 1 + alpha, n - 1)
    prev = np.zeros_like(alpha)
    log_c = np.log1p(alpha)
    for n in range(2, n_max + 1):
        forcing = np.exp(log_neg_x + log_c - out[:, n - 1])
        ratio = ((2 * n - 1 + alpha - x) - (n - 1 + alpha) * prev + forcing) / n
        out[:, n] = out[:, n - 1] + np.log(ratio)
        prev = 1.0 / ratio
        log_c = log_c + np.log((n + alpha) / n)
    return out
