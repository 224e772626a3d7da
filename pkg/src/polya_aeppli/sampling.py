"""
Samplers that follow the compound construction directly.

All randomness flows through :class:`numpy.random.Generator` backed by
``PCG64`` (numpy's default bit generator since 1.17); a given seed
reproduces the same stream on every platform and numpy release that keeps
the ``PCG64`` and distribution algorithms fixed.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln

from .distributions import Model, MpaParams, WmpaParams
from .samples import CountSample

__all__ = [
    "make_rng",
    "sample_shifted_geometric",
    "sample_weighted_poisson",
    "sample_mpa",
    "sample_wmpa",
    "sample",
]

# above this rate the zero-truncated Poisson is drawn by rejection
_INVERSION_LIMIT = 30.0


def make_rng(seed: int | None) -> np.random.Generator:
    """``Generator(PCG64(seed))``; ``seed`` is an unsigned 64-bit integer."""
    if seed is not None and not (0 <= int(seed) < 2**64):
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.PCG64(seed))


def sample_shifted_geometric(rho: float, rng: np.random.Generator, size=None):
    """Geometric variables on ``{1, 2, ...}`` with ``Pr(U = u) = (1-rho) rho^(u-1)``."""
    if not (0.0 < rho < 1.0):
        raise ValueError("rho must lie in (0,1)")
    return rng.geometric(1.0 - rho, size=size)


def _ztp_inverse_table(lam: float) -> NDArray[np.float64]:
    """CDF of the zero-truncated Poisson on ``1..z_top``, with the last entry forced to 1."""
    # log pmf for z >= 1: z log lam - lgamma(z+1) - log(e^lam - 1)
    z_top = max(10, int(lam + 12.0 * math.sqrt(lam) + 40))
    z = np.arange(1, z_top + 1)
    logp = z * math.log(lam) - gammaln(z + 1) - lam - math.log(-math.expm1(-lam))
    cdf = np.cumsum(np.exp(logp))
    cdf[-1] = 1.0
    return cdf


def sample_weighted_poisson(lam: float, rng: np.random.Generator, size=None):
    """Draws with ``Pr(Z = z)`` proportional to ``e^-lam lam^z / ((z+1) z!)``.

    Implemented as a zero-truncated Poisson draw minus one: inversion of the
    truncated CDF for ``lam < 30`` and rejection of zeros from a plain
    Poisson otherwise.
    """
    if not (lam > 0 and math.isfinite(lam)):
        raise ValueError("lambda must be positive")
    shape = () if size is None else size
    if lam < _INVERSION_LIMIT:
        cdf = _ztp_inverse_table(lam)
        u = rng.random(shape)
        out = np.searchsorted(cdf, u, side="right")  # 0-based index == z - 1
        out = np.minimum(out, len(cdf) - 1)
    else:
        out = rng.poisson(lam, shape)
        bad = out == 0
        while np.any(bad):
            out[bad] = rng.poisson(lam, int(bad.sum()))
            bad = out == 0
        out = out - 1
    return int(out) if size is None else out.astype(np.int64)


def _compound(latent: NDArray[np.int64], common: NDArray[np.int64], rho: float, rng) -> NDArray[np.int64]:
    # sum of t geometrics on {1,2,...} = t + (failures before t successes)
    total = latent + common[:, None]
    fails = rng.negative_binomial(np.maximum(total, 1), 1.0 - rho)
    return np.where(total > 0, total + fails, 0).astype(np.int64)


def _sample(params, rng: np.random.Generator, size: int | None, weighted: bool):
    m = 1 if size is None else int(size)
    if m < 0:
        raise ValueError("size must be non-negative")
    k = params.k
    if weighted:
        latent = np.column_stack(
            [sample_weighted_poisson(lam, rng, m) for lam in params.lambdas]
        ) if m else np.empty((0, k), np.int64)
        common = sample_weighted_poisson(params.lambda_common, rng, m) if m else np.empty(0, np.int64)
    else:
        latent = rng.poisson(np.asarray(params.lambdas), (m, k))
        common = rng.poisson(params.lambda_common, m)
    out = _compound(np.asarray(latent, np.int64).reshape(m, k), np.asarray(common, np.int64), params.rho, rng)
    return out[0] if size is None else out


def sample_mpa(params: MpaParams, rng: np.random.Generator, size: int | None = None) -> NDArray[np.int64]:
    """One count vector (``size=None``) or a ``(size, k)`` array from the MPA."""
    if params.model is not Model.MPA:
        raise TypeError("sample_mpa needs MpaParams")
    return _sample(params, rng, size, weighted=False)


def sample_wmpa(params: WmpaParams, rng: np.random.Generator, size: int | None = None) -> NDArray[np.int64]:
    """One count vector (``size=None``) or a ``(size, k)`` array from the WMPA."""
    if params.model is not Model.WMPA:
        raise TypeError("sample_wmpa needs WmpaParams")
    return _sample(params, rng, size, weighted=True)


def sample(params: MpaParams | WmpaParams, m: int, seed: int | None = None,
           rng: np.random.Generator | None = None) -> CountSample:
    """Draw ``m`` observations as a :class:`CountSample`."""
    rng = rng if rng is not None else make_rng(seed)
    fn = sample_mpa if params.model is Model.MPA else sample_wmpa
    return CountSample(fn(params, rng, m))
