"""
Brute-force reference values computed straight from the compound
construction, with no Laguerre polynomials involved.

For a count vector ``n`` the joint mass is a finite sum over the latent
Poisson counts ``(z_1, ..., z_k, z_common)``: coordinate ``i`` is a sum of
``z_i + z_common`` i.i.d. geometric variables on ``{1, 2, ...}``, whose total
has the negative-binomial mass ``C(s-1, z-1) (1-rho)^z rho^(s-z)``. Terms with
``z_i + z_common > n_i`` vanish, so once ``z_max >= max(n)`` the sum is
exact; a smaller ``z_max`` leaves out at most ``tail_bound`` of mass.

Intended for tests and debugging only; the cost is exponential in ``k``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from .distributions import Model, MpaParams, WmpaParams, as_counts
from .errors import TruncationTooLoose

__all__ = [
    "TruncationSpec",
    "poisson_tail_bound",
    "brute_force_pmf",
    "brute_force_marginal",
    "pgf_numeric",
]


def _log_poisson(z: int, lam: float) -> float:
    return z * math.log(lam) - lam - math.lgamma(z + 1)


def _log_weighted_poisson(z: int, lam: float) -> float:
    # lambda^(z+1) / ((z+1)! (e^lambda - 1))
    return (z + 1) * math.log(lam) - math.lgamma(z + 2) - lam - math.log(-math.expm1(-lam))


def _log_geometric_sum(s: int, z: int, rho: float) -> float:
    """log Pr(sum of z geometrics on {1,2,...} equals s)."""
    if z == 0:
        return 0.0 if s == 0 else -math.inf
    if s < z:
        return -math.inf
    log_binom = math.lgamma(s) - math.lgamma(z) - math.lgamma(s - z + 1)
    return log_binom + z * math.log1p(-rho) + (s - z) * math.log(rho)


def poisson_tail_bound(lam: float, z_max: int, weighted: bool = False) -> float:
    """Chernoff bound on ``Pr(Z > z_max)``.

    For ``a > lam`` the Poisson tail obeys ``Pr(Z >= a) <= e^-lam (e lam / a)^a``.
    The weighted count is a zero-truncated Poisson minus one, so its tail is
    the Poisson tail at ``a + 1`` divided by ``1 - e^-lam``.
    """
    a = z_max + 1 + (1 if weighted else 0)
    if a <= lam:
        return 1.0
    log_b = -lam + a * (1.0 + math.log(lam) - math.log(a))
    if weighted:
        log_b -= math.log(-math.expm1(-lam))
    return min(1.0, math.exp(log_b))


@dataclass(frozen=True)
class TruncationSpec:
    """Latent-count cut-off together with a certified bound on the omitted mass."""

    z_max: int
    tail_bound: float

    def __post_init__(self) -> None:
        if self.z_max < 1:
            raise ValueError("z_max must be a positive integer")

    @classmethod
    def for_rates(
        cls, rates: Sequence[float], tolerance: float = 1e-13, weighted: bool = False
    ) -> "TruncationSpec":
        """Smallest ``z_max`` whose union tail bound over all rates is below ``tolerance``."""
        z = 1
        while True:
            bound = math.fsum(poisson_tail_bound(r, z, weighted) for r in rates)
            if bound <= tolerance:
                return cls(z, bound)
            z += 1

    @classmethod
    def for_params(cls, params: MpaParams | WmpaParams, tolerance: float = 1e-13) -> "TruncationSpec":
        return cls.for_rates(
            (*params.lambdas, params.lambda_common), tolerance, params.model is Model.WMPA
        )


def _resolve(params, model, trunc, tolerance) -> tuple[Model, TruncationSpec]:
    model = Model.parse(model if model is not None else params.model)
    if params.model is not model:
        raise TypeError(f"parameters of type {type(params).__name__} do not match model {model.value}")
    if trunc is None:
        trunc = TruncationSpec.for_params(params, tolerance)
    if trunc.tail_bound > tolerance:
        raise TruncationTooLoose(trunc.tail_bound, tolerance)
    return model, trunc


def brute_force_pmf(
    counts: ArrayLike,
    params: MpaParams | WmpaParams,
    model: Model | str | None = None,
    trunc: TruncationSpec | None = None,
    tolerance: float = 1e-13,
) -> float:
    """``Pr(N = counts)`` by direct summation over the latent Poisson counts.

    Raises
    ------
    TruncationTooLoose
        If ``trunc.tail_bound`` exceeds ``tolerance``.
    """
    model, trunc = _resolve(params, model, trunc, tolerance)
    n = as_counts(counts, params.k)
    log_p = _log_weighted_poisson if model is Model.WMPA else _log_poisson
    rho = params.rho

    z_common_max = min(trunc.z_max, min(n))
    logs = []
    for zc in range(z_common_max + 1):
        head = log_p(zc, params.lambda_common)
        # coordinates are conditionally independent given z_common
        per_coord = 0.0
        for ni, lam in zip(n, params.lambdas):
            hi = min(trunc.z_max, ni - zc)
            parts = [log_p(z, lam) + _log_geometric_sum(ni, z + zc, rho) for z in range(hi + 1)]
            parts = [p for p in parts if p > -math.inf]
            if not parts:
                per_coord = -math.inf
                break
            top = max(parts)
            per_coord += top + math.log(math.fsum(math.exp(p - top) for p in parts))
        if per_coord > -math.inf:
            logs.append(head + per_coord)
    if not logs:
        return 0.0
    top = max(logs)
    return math.exp(top) * math.fsum(math.exp(v - top) for v in logs)


def brute_force_marginal(
    n: int,
    params: MpaParams | WmpaParams,
    index: int = 0,
    model: Model | str | None = None,
    trunc: TruncationSpec | None = None,
    tolerance: float = 1e-13,
) -> float:
    """``Pr(N_index = n)``: a double sum over the own and the common latent count."""
    model, trunc = _resolve(params, model, trunc, tolerance)
    log_p = _log_weighted_poisson if model is Model.WMPA else _log_poisson
    lam, lc, rho = params.lambdas[index], params.lambda_common, params.rho
    hi = min(trunc.z_max, n)
    terms = [
        math.exp(log_p(z, lam) + log_p(zc, lc) + _log_geometric_sum(n, z + zc, rho))
        for z, zc in itertools.product(range(hi + 1), repeat=2)
        if z + zc <= n
    ]
    return math.fsum(terms)


def _psi1(s: float, rho: float) -> float:
    return (1.0 - rho) * s / (1.0 - rho * s)


def _weighted_factor(lam: float, t: float) -> float:
    """E[t^Z] for the weighted Poisson: ``(e^{lam t} - 1) / (t (e^lam - 1))``."""
    if t == 0.0:
        return lam / math.expm1(lam)
    return math.expm1(lam * t) / (t * math.expm1(lam))


def pgf_numeric(s: ArrayLike, params: MpaParams | WmpaParams, model: Model | str | None = None) -> float:
    """Closed-form joint PGF ``E[prod s_i^N_i]`` for ``s`` in ``[0, 1]^k``."""
    model = Model.parse(model if model is not None else params.model)
    s = np.asarray(s, dtype=float).ravel()
    if s.size != params.k:
        raise ValueError(f"s must have length {params.k}")
    if np.any((s < 0) | (s > 1)):
        raise ValueError("every s_i must lie in [0, 1]")
    psi = [_psi1(float(v), params.rho) for v in s]
    joint = math.prod(psi)
    if model is Model.MPA:
        expo = math.fsum(lam * (p - 1.0) for lam, p in zip(params.lambdas, psi))
        return math.exp(expo + params.lambda_common * (joint - 1.0))
    out = _weighted_factor(params.lambda_common, joint)
    for lam, p in zip(params.lambdas, psi):
        out *= _weighted_factor(lam, p)
    return out
