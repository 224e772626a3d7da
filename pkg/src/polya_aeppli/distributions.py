"""
Type I multivariate Pólya-Aeppli (MPA) and weighted multivariate Pólya-Aeppli
(WMPA) distributions.

Both are built by trivariate reduction. With independent Poisson counts
``Z_1..Z_k`` (rates ``lambdas``) and ``Z_{k+1}`` (rate ``lambda_common``) and
i.i.d. geometric variables on ``{1, 2, ...}`` with success probability
``1 - rho``::

    N_i = (sum of Z_i geometrics) + (sum of Z_{k+1} geometrics)

The WMPA replaces every Poisson count by its weighted version under
``w(z) = 1 / (z + 1)``, i.e. a zero-truncated Poisson draw minus one.

Two evaluation paths are provided:

* :func:`mpa_log_pmf` / :func:`wmpa_log_pmf` take one count vector and
  accumulate the Laguerre sums in :class:`~polya_aeppli.laguerre.ScaledValue`
  arithmetic.
* :func:`log_pmf_cells` evaluates many count vectors at once in log space
  with numpy; estimation and tabulation use this one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gammaln, logsumexp

from .laguerre import (
    ScaledValue,
    laguerre_eval,
    log_laguerre_excess_table,
    log_laguerre_table,
)

__all__ = [
    "Model",
    "MpaParams",
    "WmpaParams",
    "params_for",
    "MomentSummary",
    "as_counts",
    "pa_pmf",
    "wpa_pmf",
    "mpa_log_pmf",
    "wmpa_log_pmf",
    "log_pmf",
    "log_pmf_cells",
    "mpa_moments",
    "wmpa_moments",
    "moments",
    "gdi_mpa",
    "gdi_generic",
]


class Model(str, enum.Enum):
    MPA = "mpa"
    WMPA = "wmpa"

    @classmethod
    def parse(cls, value: "Model | str") -> "Model":
        if isinstance(value, Model):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown model {value!r}; expected 'mpa' or 'wmpa'") from None


@dataclass(frozen=True)
class _RateParams:
    lambdas: tuple[float, ...]
    lambda_common: float
    rho: float

    model = None  # overridden by subclasses

    def __post_init__(self) -> None:
        lambdas = tuple(float(v) for v in self.lambdas)
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "lambda_common", float(self.lambda_common))
        object.__setattr__(self, "rho", float(self.rho))
        if len(lambdas) < 2:
            raise ValueError("need at least two margins (k >= 2)")
        if not all(math.isfinite(v) and v > 0 for v in lambdas):
            raise ValueError("every margin rate must be positive")
        if not (math.isfinite(self.lambda_common) and self.lambda_common > 0):
            raise ValueError("lambda_common must be positive")
        if not (0.0 < self.rho < 1.0):
            raise ValueError("rho must lie in (0,1)")

    @property
    def k(self) -> int:
        return len(self.lambdas)

    @property
    def x(self) -> NDArray[np.float64]:
        """Laguerre arguments ``-lambda_i (1 - rho) / rho``."""
        return -np.asarray(self.lambdas) * (1.0 - self.rho) / self.rho

    def as_vector(self) -> NDArray[np.float64]:
        """``(lambda_1, ..., lambda_k, lambda_common, rho)``."""
        return np.array([*self.lambdas, self.lambda_common, self.rho])

    @classmethod
    def from_vector(cls, values: ArrayLike):
        v = [float(t) for t in np.asarray(values, dtype=float).ravel()]
        if len(v) < 4:
            raise ValueError("parameter vector needs lambda_1..lambda_k, lambda_common, rho")
        return cls(tuple(v[:-2]), v[-2], v[-1])

    def permuted(self, order: Sequence[int]):
        return type(self)(tuple(self.lambdas[i] for i in order), self.lambda_common, self.rho)


@dataclass(frozen=True)
class MpaParams(_RateParams):
    """Parameters of the Type I MPA distribution."""

    model = Model.MPA


@dataclass(frozen=True)
class WmpaParams(_RateParams):
    """Parameters of the Type I WMPA distribution (weight ``1/(z+1)`` is fixed)."""

    model = Model.WMPA


def params_for(model: Model | str, values: ArrayLike) -> MpaParams | WmpaParams:
    """Build the parameter object of ``model`` from a flat vector."""
    cls = MpaParams if Model.parse(model) is Model.MPA else WmpaParams
    return cls.from_vector(values)


@dataclass(frozen=True)
class MomentSummary:
    """Theoretical first and second moments.

    ``factorial_second`` holds ``E[N_i (N_i - 1)]`` on the diagonal and
    ``E[N_i N_j]`` off the diagonal (the second derivatives of the PGF at 1).
    """

    mean: NDArray[np.float64]
    covariance: NDArray[np.float64]
    correlation: NDArray[np.float64]
    gdi: float
    factorial_second: NDArray[np.float64] = field(repr=False)

    @property
    def variance(self) -> NDArray[np.float64]:
        return np.diag(self.covariance).copy()


def as_counts(counts: ArrayLike, k: int | None = None) -> tuple[int, ...]:
    """Validate a single count vector."""
    arr = np.asarray(counts)
    if arr.ndim != 1:
        raise ValueError("a count vector must be one-dimensional")
    if arr.size and not np.all(np.equal(np.mod(arr, 1), 0)):
        raise ValueError("counts must be integers")
    out = tuple(int(v) for v in arr)
    if any(v < 0 for v in out):
        raise ValueError("counts must be non-negative")
    if k is not None and len(out) != k:
        raise ValueError(f"count vector has length {len(out)}, model has k={k}")
    return out


# ---------------------------------------------------------------------------
# univariate margins


def _log_expm1(lam):
    """``log(e^lam - 1)`` without overflow for large ``lam``."""
    return lam + np.log(-np.expm1(-lam))


def _log_c(lam: float) -> float:
    """log of e^-lam / (1 - e^-lam)."""
    return -float(_log_expm1(lam))


def pa_pmf(n: int, lam: float, rho: float) -> float:
    """Pólya-Aeppli probability ``Pr(U = n)``."""
    if n < 0:
        return 0.0
    if n == 0:
        return math.exp(-lam)
    x = -lam * (1.0 - rho) / rho
    head = ScaledValue.from_log(
        -lam + math.log(lam * (1.0 - rho) / n) + (n - 1) * math.log(rho)
    )
    return float(head * laguerre_eval(n - 1, 1, x))


def wpa_pmf(n: int, lam: float, rho: float) -> float:
    """Weighted Pólya-Aeppli probability ``Pr(U^w = n)`` for ``w(z) = 1/(z+1)``."""
    if n < 0:
        return 0.0
    if n == 0:
        return math.exp(math.log(lam) + _log_c(lam))
    x = -lam * (1.0 - rho) / rho
    head = ScaledValue.from_log(
        _log_c(lam)
        + math.log(lam * lam * (1.0 - rho) / (n * (n + 1)))
        + (n - 1) * math.log(rho)
    )
    return float(head * laguerre_eval(n - 1, 2, x))


# ---------------------------------------------------------------------------
# joint pmf, one count vector at a time (scaled arithmetic)


def _check(counts: ArrayLike, params: _RateParams, model: Model) -> tuple[int, ...]:
    if params.model is not model:
        raise TypeError(f"expected {model.name} parameters, got {type(params).__name__}")
    return as_counts(counts, params.k)


def mpa_log_pmf(counts: ArrayLike, params: MpaParams) -> float:
    """Log-probability of one count vector under the Type I MPA."""
    n = _check(counts, params, Model.MPA)
    lam, l3, rho = params.lambdas, params.lambda_common, params.rho
    log_rho, log_q = math.log(rho), math.log1p(-rho)
    x = params.x
    log_f0 = -(math.fsum(lam) + l3)

    positive = [i for i, ni in enumerate(n) if ni > 0]
    if not positive:
        return log_f0

    uni = ScaledValue.from_float(1.0)
    for i in positive:
        head = math.log(lam[i] / n[i]) + log_q + (n[i] - 1) * log_rho
        uni = uni * ScaledValue.from_log(head) * laguerre_eval(n[i] - 1, 1, x[i])
    if len(positive) < len(n):
        return log_f0 + uni.log()

    total = uni
    log_l3 = math.log(l3)
    r_max = min(n)
    # L_{n_i - r}^{r - 1}(x_i) for r = 1..r_max, one table per coordinate
    diag = [log_laguerre_table(ni - 1, r_max - 1, xi) for ni, xi in zip(n, x)]
    for r in range(1, r_max + 1):
        log_term = r * log_l3 - math.lgamma(r + 1)
        for i in range(len(n)):
            log_term += r * log_q + (n[i] - r) * log_rho + diag[i][r - 1, n[i] - r]
        total = total + ScaledValue.from_log(log_term)
    return log_f0 + total.log()


def wmpa_log_pmf(counts: ArrayLike, params: WmpaParams) -> float:
    """Log-probability of one count vector under the Type I WMPA."""
    n = _check(counts, params, Model.WMPA)
    lam, l3, rho = params.lambdas, params.lambda_common, params.rho
    log_rho, log_q = math.log(rho), math.log1p(-rho)
    x = params.x
    log_f0 = math.fsum(math.log(v) + _log_c(v) for v in (*lam, l3))

    positive = [i for i, ni in enumerate(n) if ni > 0]
    if not positive:
        return log_f0

    first = ScaledValue.from_float(1.0)
    for i in positive:
        head = math.log(lam[i] / (n[i] * (n[i] + 1))) + log_q + (n[i] - 1) * log_rho
        first = first * ScaledValue.from_log(head) * laguerre_eval(n[i] - 1, 2, x[i])
    if len(positive) < len(n):
        return log_f0 + first.log()

    second = ScaledValue.from_float(l3 / 2.0)
    for i in range(len(n)):
        head = log_q + (n[i] - 1) * log_rho - math.log(n[i])
        second = second * ScaledValue.from_log(head) * laguerre_eval(n[i] - 1, 1, x[i])

    third = ScaledValue.from_float(0.0)
    log_l3 = math.log(l3)
    r_max = min(n)
    # L_{n_i - r}^{r - 1}(x_i) - C(n_i - 1, n_i - r), positive for x_i < 0
    excess = [log_laguerre_excess_table(ni - 1, r_max - 1, xi) for ni, xi in zip(n, x)]
    for r in range(1, r_max + 1):
        log_term = (r + 1) * log_l3 - math.lgamma(r + 3)
        for i in range(len(n)):
            log_term += r * log_q + (n[i] - r) * log_rho - math.log(lam[i]) + excess[i][r - 1, n[i] - r]
        third = third + ScaledValue.from_log(log_term)
    return log_f0 + (first + second + third).log()


def log_pmf(counts: ArrayLike, params: MpaParams | WmpaParams) -> float:
    """Dispatch to :func:`mpa_log_pmf` or :func:`wmpa_log_pmf` by parameter type."""
    if params.model is Model.MPA:
        return mpa_log_pmf(counts, params)
    return wmpa_log_pmf(counts, params)


# ---------------------------------------------------------------------------
# joint pmf, many count vectors (log space, vectorised)


def log_pmf_cells(cells: ArrayLike, params: MpaParams | WmpaParams) -> NDArray[np.float64]:
    """Log-probabilities for an ``(n_cells, k)`` array of count vectors.

    Laguerre tables are built once per coordinate up to the largest count in
    that coordinate, then gathered for every cell.
    """
    cells = np.asarray(cells)
    if cells.ndim != 2 or cells.shape[1] != params.k:
        raise ValueError(f"cells must have shape (n, {params.k})")
    if cells.size and (cells.min() < 0):
        raise ValueError("counts must be non-negative")
    cells = cells.astype(np.int64)
    n_cells, k = cells.shape
    if n_cells == 0:
        return np.empty(0)

    lam = np.asarray(params.lambdas)
    l3, rho = params.lambda_common, params.rho
    log_rho, log_q = math.log(rho), math.log1p(-rho)
    x = params.x
    weighted = params.model is Model.WMPA

    row_min = cells.min(axis=1)
    r_max = int(row_min.max())
    alpha_max = max(2, r_max - 1)
    tables = [
        log_laguerre_table(max(int(cells[:, i].max()) - 1, 0), alpha_max, x[i])
        for i in range(k)
    ]

    def gather(table: NDArray, alpha: int, deg: NDArray) -> NDArray:
        # deg may be -1 for zero counts; those entries are masked by callers
        return table[alpha, np.maximum(deg, 0)]

    nz = cells > 0
    safe_n = np.maximum(cells, 1)
    if weighted:
        log_f0 = float(np.sum(np.log(lam) - _log_expm1(lam))) + math.log(l3) - float(_log_expm1(l3))
        uni = np.zeros(n_cells)
        for i in range(k):
            term = (
                math.log(lam[i])
                + log_q
                + (safe_n[:, i] - 1) * log_rho
                - np.log(safe_n[:, i] * (safe_n[:, i] + 1.0))
                + gather(tables[i], 2, cells[:, i] - 1)
            )
            uni += np.where(nz[:, i], term, 0.0)
    else:
        log_f0 = -(float(lam.sum()) + l3)
        uni = np.zeros(n_cells)
        for i in range(k):
            term = (
                math.log(lam[i])
                + log_q
                + (safe_n[:, i] - 1) * log_rho
                - np.log(safe_n[:, i])
                + gather(tables[i], 1, cells[:, i] - 1)
            )
            uni += np.where(nz[:, i], term, 0.0)

    out = log_f0 + uni
    pos = row_min >= 1
    if r_max == 0 or not pos.any():
        return out

    pc = cells[pos]
    r = np.arange(1, r_max + 1)
    log_l3 = math.log(l3)
    if weighted:
        excess = [log_laguerre_excess_table(max(int(pc[:, i].max()) - 1, 0), alpha_max, x[i]) for i in range(k)]
        # r-sum: lambda_common^(r+1)/(r+2)! prod_i (1-rho)^r rho^(n_i-r)/lambda_i (L - C)
        s = np.broadcast_to((r + 1) * log_l3 - gammaln(r + 3), (len(pc), r_max)).copy()
        for i in range(k):
            deg = pc[:, i, None] - r[None, :]
            ok = deg >= 0
            vals = excess[i][r[None, :] - 1, np.maximum(deg, 0)]
            s += np.where(ok, r * log_q + deg * log_rho - math.log(lam[i]) + vals, -np.inf)
        second = math.log(l3 / 2.0) + np.sum(
            log_q + (pc - 1) * log_rho - np.log(pc) + np.stack([tables[i][1, pc[:, i] - 1] for i in range(k)], axis=1),
            axis=1,
        )
        total = logsumexp(np.column_stack([uni[pos], second, s]), axis=1)
    else:
        s = np.broadcast_to(r * log_l3 - gammaln(r + 1), (len(pc), r_max)).copy()
        for i in range(k):
            deg = pc[:, i, None] - r[None, :]
            ok = deg >= 0
            vals = tables[i][r[None, :] - 1, np.maximum(deg, 0)]
            s += np.where(ok, r * log_q + deg * log_rho + vals, -np.inf)
        total = logsumexp(np.column_stack([uni[pos], s]), axis=1)
    out[pos] = log_f0 + total
    return out


# ---------------------------------------------------------------------------
# moments and dispersion


def gdi_generic(mean: ArrayLike, cov: ArrayLike) -> float:
    """Generalised dispersion index ``sqrt(m)' C sqrt(m) / (m' m)``."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
        raise ValueError("cov must be a square matrix matching mean")
    if np.any(mean <= 0):
        raise ValueError("GDI needs strictly positive means")
    if not np.allclose(cov, cov.T, rtol=1e-12, atol=1e-15):
        raise ValueError("covariance matrix must be symmetric")
    root = np.sqrt(mean)
    return float(root @ cov @ root / (mean @ mean))


def gdi_mpa(params: MpaParams) -> float:
    """Closed-form GDI of the Type I MPA.

    The cross term sums ``sqrt(s_i s_j)`` over pairs ``i < j`` with
    ``s_i = lambda_i + lambda_common``; for ``k = 2`` this is the familiar
    ``sqrt(s_1 s_2)``.
    """
    s = np.asarray(params.lambdas) + params.lambda_common
    rho, l3 = params.rho, params.lambda_common
    root = np.sqrt(s)
    cross = (root.sum() ** 2 - s.sum()) / 2.0  # sum_{i<j} sqrt(s_i s_j)
    return 1.0 + 2.0 * rho / (1.0 - rho) + 2.0 * l3 * cross / ((1.0 - rho) * float(s @ s))


def _correlation(cov: NDArray) -> NDArray:
    sd = np.sqrt(np.diag(cov))
    corr = cov / np.outer(sd, sd)
    np.fill_diagonal(corr, 1.0)
    return corr


def mpa_moments(params: MpaParams) -> MomentSummary:
    """Mean, covariance, correlation and GDI of the Type I MPA."""
    s = np.asarray(params.lambdas) + params.lambda_common
    rho, l3 = params.rho, params.lambda_common
    q = 1.0 - rho
    mean = s / q
    cov = np.full((params.k, params.k), l3 / q**2)
    np.fill_diagonal(cov, (1.0 + rho) * s / q**2)
    fact = (np.outer(s, s) + l3) / q**2
    np.fill_diagonal(fact, 2.0 * rho * s / q**2 + mean**2)
    return MomentSummary(mean, cov, _correlation(cov), gdi_mpa(params), fact)


def wmpa_moments(params: WmpaParams) -> MomentSummary:
    """Mean, covariance, correlation and GDI of the Type I WMPA."""
    lam = np.asarray(params.lambdas)
    l3, rho = params.lambda_common, params.rho
    q = 1.0 - rho

    def a(v):  # v / (1 - e^-v)
        return v / -np.expm1(-v)

    def b(v):  # v^2 e^-v / (1 - e^-v)^2
        return v * v * np.exp(-v) / np.expm1(-v) ** 2

    a_i, a_3, b_i, b_3 = a(lam), float(a(l3)), b(lam), float(b(l3))
    mean = (a_i + a_3 - 2.0) / q
    common = a_3 * (1.0 - l3 * math.exp(-l3) / -math.expm1(-l3)) / q**2
    var = ((1.0 + rho) * (a_i + a_3) - b_i - b_3 - 2.0 * rho) / q**2
    cov = np.full((params.k, params.k), common)
    np.fill_diagonal(cov, var)
    fact = np.outer(mean, mean) + common
    np.fill_diagonal(
        fact,
        (2.0 * rho * (a_i + a_3) - b_i - b_3 + 2.0 * (1.0 - 2.0 * rho)) / q**2 + mean**2,
    )
    return MomentSummary(mean, cov, _correlation(cov), gdi_generic(mean, cov), fact)


def moments(params: MpaParams | WmpaParams) -> MomentSummary:
    if params.model is Model.MPA:
        return mpa_moments(params)
    return wmpa_moments(params)


def iter_grid(bounds: Iterable[int]) -> NDArray[np.int64]:
    """All count vectors in the box ``0..bounds[0] x 0..bounds[1] x ...``."""
    axes = [np.arange(int(b) + 1) for b in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)
