"""
Method-of-moments and maximum-likelihood estimation for the MPA and WMPA.

Every estimator accepts raw records (:class:`CountSample` or an ``(m, k)``
integer array) or a weighted :class:`ContingencyTable`; tables are never
expanded into records.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Literal

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize

from ._likelihood import log_likelihood
from .distributions import Model, MpaParams, WmpaParams, params_for
from .errors import (
    ConvergenceWarning,
    EstimationError,
    LineSearchFailure,
    NegativeCommonRate,
    NegativeMarginRate,
    NegativeSqrtArgument,
    NonConvergence,
    UnderdispersedSample,
)
from .samples import ContingencyTable, CountSample, as_table

__all__ = [
    "Method",
    "SampleMoments",
    "FitResult",
    "sample_moments",
    "information_criteria",
    "mom_mpa",
    "mom_wmpa",
    "mom",
    "mle",
    "fallback_init",
    "numerical_gradient",
]

MOM_TOL = 0.001
MLE_TOL = 0.01
MOM_MAX_ITER = 200
MLE_MAX_ITER = 500
_MAX_HALVINGS = 30
_GRAD_STEP = 1e-6
_HESS_STEP = 1e-4
_JAC_STEP = 1e-6
# the MLE also waits until a full Newton step would gain less than this
_GAIN_TOL = 1e-6


class Method(str, enum.Enum):
    MOM = "mom"
    MLE = "mle"

    @classmethod
    def parse(cls, value: "Method | str") -> "Method":
        if isinstance(value, Method):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown method {value!r}; expected 'mom' or 'mle'") from None


@dataclass(frozen=True)
class SampleMoments:
    """Sample means and covariance matrix (divisor ``m - 1``)."""

    means: NDArray[np.float64]
    covariances: NDArray[np.float64]
    m: float

    @property
    def variances(self) -> NDArray[np.float64]:
        return np.diag(self.covariances).copy()

    @property
    def k(self) -> int:
        return self.means.size

    def offdiag_sum(self) -> float:
        """``sum_{i != j} s_ij``."""
        return float(self.covariances.sum() - np.trace(self.covariances))


def sample_moments(data: CountSample | ContingencyTable | Any) -> SampleMoments:
    """Means and unbiased covariances of records or of a frequency table."""
    table = as_table(data).nonzero()
    m = table.total
    if m < 2:
        raise ValueError("sample moments need m >= 2 observations")
    x = table.cells.astype(float)
    w = table.freq
    mean = (w @ x) / m
    d = x - mean
    cov = (d * w[:, None]).T @ d / (m - 1.0)
    cov = (cov + cov.T) / 2.0
    return SampleMoments(mean, cov, m)


def information_criteria(loglik: float, p: int, m: float) -> tuple[float, float]:
    """``(AIC, BIC) = (-2 l + 2p, -2 l + p ln m)``."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return -2.0 * loglik + 2.0 * p, -2.0 * loglik + p * math.log(m)


@dataclass(frozen=True)
class FitResult:
    """Estimated parameters with their log-likelihood and diagnostics.

    ``converged`` is False when an iterative fit hit ``max_iter``; the
    parameters are still those of the best iterate.
    """

    params: MpaParams | WmpaParams
    method: Method
    log_likelihood: float
    m: float
    iterations: int = 0
    converged: bool = True
    notes: tuple[str, ...] = field(default=())

    @property
    def model(self) -> Model:
        return self.params.model

    @property
    def k(self) -> int:
        return self.params.k

    @property
    def p(self) -> int:
        return self.k + 2

    @property
    def aic(self) -> float:
        return information_criteria(self.log_likelihood, self.p, self.m)[0]

    @property
    def bic(self) -> float:
        return information_criteria(self.log_likelihood, self.p, self.m)[1]

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "method": self.method.value,
            "lambdas": list(self.params.lambdas),
            "lambda_common": self.params.lambda_common,
            "rho": self.params.rho,
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
            "bic": self.bic,
            "p": self.p,
            "m": self.m,
            "iterations": self.iterations,
            "converged": self.converged,
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        params = params_for(d["model"], [*d["lambdas"], d["lambda_common"], d["rho"]])
        return cls(
            params=params,
            method=Method.parse(d["method"]),
            log_likelihood=float(d["log_likelihood"]),
            m=float(d["m"]),
            iterations=int(d.get("iterations", 0)),
            converged=bool(d.get("converged", True)),
            notes=tuple(d.get("notes", ())),
        )


def _finish(params, method: Method, table: ContingencyTable, threads: int, iterations=0, converged=True, notes=()):
    ll = log_likelihood(table, params, threads)
    return FitResult(params, method, ll, table.total, iterations, converged, tuple(notes))


# ---------------------------------------------------------------------------
# method of moments


def _mpa_moment_equations(sm: SampleMoments) -> tuple[NDArray, float, float]:
    """Raw closed-form MPA moment solution, unchecked."""
    k = sm.k
    sum_var, sum_mean = float(sm.variances.sum()), float(sm.means.sum())
    rho = (sum_var - sum_mean) / (sum_var + sum_mean)
    l_common = (1.0 - rho) ** 2 * sm.offdiag_sum() / (k * (k - 1))
    lambdas = (1.0 - rho) * sm.means - l_common
    return lambdas, l_common, rho


def mom_mpa(data, threads: int = 1) -> FitResult:
    """Closed-form moment estimates of the MPA.

    Raises
    ------
    UnderdispersedSample, NegativeCommonRate, NegativeMarginRate
        When the corresponding estimate is not strictly inside its domain.
    """
    table = as_table(data)
    sm = sample_moments(table)
    lambdas, l_common, rho = _mpa_moment_equations(sm)
    if not rho > 0:
        raise UnderdispersedSample(rho)
    if not l_common > 0:
        raise NegativeCommonRate(l_common)
    for i, v in enumerate(lambdas):
        if not v > 0:
            raise NegativeMarginRate(i, float(v))
    params = MpaParams(tuple(lambdas), l_common, rho)
    return _finish(params, Method.MOM, table, threads)


def _a(v: float) -> float:  # v / (1 - e^-v)
    return v / -math.expm1(-v)


def _b(v: float) -> float:  # v^2 e^-v / (1 - e^-v)^2
    return v * v * math.exp(-v) / math.expm1(-v) ** 2


def _wmpa_rho(l_common: float, sm: SampleMoments) -> float:
    """rho implied by the common rate and the sample cross-covariances."""
    k = sm.k
    e = math.exp(-l_common)
    one_e = -math.expm1(-l_common)
    num = k * (k - 1) * (l_common * one_e - l_common**2 * e)
    den = one_e**2 * sm.offdiag_sum()
    radicand = num / den if den != 0 else -math.inf
    if not radicand >= 0:
        raise NegativeSqrtArgument(radicand)
    return 1.0 - math.sqrt(radicand)


def _anchor_index(sm: SampleMoments, anchor: int | Literal["max_mean"]) -> int:
    if anchor == "max_mean":
        return int(np.argmax(sm.means))  # argmax returns the first maximum
    idx = int(anchor)
    if not 0 <= idx < sm.k:
        raise ValueError(f"anchor must be in 0..{sm.k - 1} or 'max_mean'")
    return idx


def mom_wmpa(
    data,
    tol: float = MOM_TOL,
    max_iter: int = MOM_MAX_ITER,
    anchor: int | Literal["max_mean"] = 0,
    threads: int = 1,
) -> FitResult:
    """Moment estimates of the WMPA.

    Newton iteration on the mean and variance equations of coordinate
    ``anchor`` in ``(lambda_anchor, lambda_common)``, with ``rho`` tied to
    ``lambda_common`` through the cross-covariance equation at every step.
    The MPA moment estimates are the starting point. After convergence the
    remaining margin rates follow in closed form.

    Parameters
    ----------
    tol
        Stop once both coordinates move by less than ``tol``.
    anchor
        Coordinate driving the iteration; ``"max_mean"`` picks the one with
        the largest sample mean (first on ties).

    Raises
    ------
    NegativeSqrtArgument
        The rho equation has a negative radicand.
    NonConvergence
        ``max_iter`` reached.
    UnderdispersedSample, NegativeCommonRate, NegativeMarginRate
        An estimate falls outside its domain.
    """
    table = as_table(data)
    sm = sample_moments(table)
    a = _anchor_index(sm, anchor)
    if not sm.offdiag_sum() > 0:
        raise NegativeCommonRate(sm.offdiag_sum() / (sm.k * (sm.k - 1)))

    seed_l, seed_c, seed_rho = _mpa_moment_equations(sm)
    if not seed_rho > 0:
        raise UnderdispersedSample(seed_rho)
    if not seed_l[a] > 0:
        raise NegativeMarginRate(a, float(seed_l[a]))
    target = np.array([sm.means[a], sm.variances[a]])

    def g(v: NDArray) -> NDArray:
        la, lc = float(v[0]), float(v[1])
        rho = _wmpa_rho(lc, sm)
        q = 1.0 - rho
        s = _a(la) + _a(lc) - 2.0
        mean = s / q
        var = (1.0 + rho) * s / q**2 - (_b(la) + _b(lc) - 2.0) / q**2
        return np.array([mean, var]) - target

    def admissible(v: NDArray) -> bool:
        if not (v[0] > 0 and v[1] > 0):
            return False
        try:
            rho = _wmpa_rho(float(v[1]), sm)
        except NegativeSqrtArgument:
            return False
        return 0.0 < rho < 1.0

    v = np.array([float(seed_l[a]), float(seed_c)])
    if not admissible(v):
        # a negative radicand raises here; otherwise rho is not positive
        raise UnderdispersedSample(_wmpa_rho(float(v[1]), sm))
    gv = g(v)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        jac = np.empty((2, 2))
        for j in range(2):
            h = _JAC_STEP * max(abs(v[j]), 1.0)
            e = np.zeros(2)
            e[j] = h
            lo = v - e
            if not admissible(lo):  # one-sided near the boundary
                jac[:, j] = (g(v + e) - gv) / h
            else:
                jac[:, j] = (g(v + e) - g(lo)) / (2.0 * h)
        try:
            step = np.linalg.solve(jac, gv)
        except np.linalg.LinAlgError:
            raise NonConvergence(it, "singular Jacobian") from None
        t = 1.0
        merit = float(gv @ gv)
        for _ in range(_MAX_HALVINGS + 1):
            cand = v - t * step
            if admissible(cand):
                gc = g(cand)
                if float(gc @ gc) <= merit or np.max(np.abs(t * step)) < tol:
                    break
            t *= 0.5
        else:
            raise LineSearchFailure(it)
        delta = float(np.max(np.abs(cand - v)))
        v, gv = cand, gc
        if delta < tol:
            converged = True
            break
    if not converged:
        raise NonConvergence(max_iter, "moment equations")

    la, lc = float(v[0]), float(v[1])
    rho = _wmpa_rho(lc, sm)
    if not rho > 0:
        raise UnderdispersedSample(rho)
    q = 1.0 - rho
    k = sm.k
    lambdas = []
    for i in range(k):
        if i == a:
            lambdas.append(la)
            continue
        d = sm.means[i] - lc / (q * -math.expm1(-lc)) + 2.0 / q
        cross = (sm.covariances[i].sum() - sm.covariances[i, i]) / (k - 1)
        lam = q * d + (q * (sm.variances[i] - cross) - rho * sm.means[i]) / d - 1.0
        lambdas.append(float(lam))
    for i, lam in enumerate(lambdas):
        if not lam > 0:
            raise NegativeMarginRate(i, lam)
    params = WmpaParams(tuple(lambdas), lc, rho)
    return _finish(params, Method.MOM, table, threads, iterations=it, converged=True)


def mom(data, model: Model | str, threads: int = 1, **kwargs) -> FitResult:
    """Moment estimates for ``model``; keyword arguments go to :func:`mom_wmpa`."""
    if Model.parse(model) is Model.MPA:
        return mom_mpa(data, threads=threads)
    return mom_wmpa(data, threads=threads, **kwargs)


# ---------------------------------------------------------------------------
# maximum likelihood


def fallback_init(data, model: Model | str) -> MpaParams | WmpaParams:
    """Starting point used when moment estimates are unavailable."""
    sm = sample_moments(data)
    lambdas = [max(v / 2.0, 0.01) for v in sm.means]
    return params_for(model, [*lambdas, 0.01, 0.5])


def _to_u(theta: NDArray) -> NDArray:
    u = np.log(theta)
    u[-1] = math.log(theta[-1]) - math.log1p(-theta[-1])
    return u


def _from_u(u: NDArray) -> NDArray:
    theta = np.exp(u)
    theta[-1] = 1.0 / (1.0 + math.exp(-u[-1]))
    return theta


def numerical_gradient(fun: Callable[[NDArray], float], x: NDArray, rel_step: float = _GRAD_STEP) -> NDArray:
    """Central differences with step ``rel_step * max(|x_j|, 1)``."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for j in range(x.size):
        h = rel_step * max(abs(x[j]), 1.0)
        e = np.zeros_like(x)
        e[j] = h
        grad[j] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return grad


def _numerical_hessian(fun: Callable[[NDArray], float], x: NDArray, f0: float, rel_step: float = _HESS_STEP) -> NDArray:
    n = x.size
    h = rel_step * np.maximum(np.abs(x), 1.0)
    hess = np.empty((n, n))
    plus = np.empty(n)
    minus = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h[i]
        plus[i], minus[i] = fun(x + e), fun(x - e)
        hess[i, i] = (plus[i] - 2.0 * f0 + minus[i]) / h[i] ** 2
    for i in range(n):
        for j in range(i + 1, n):
            ei = np.zeros(n)
            ej = np.zeros(n)
            ei[i], ej[j] = h[i], h[j]
            val = (fun(x + ei + ej) - fun(x + ei - ej) - fun(x - ei + ej) + fun(x - ei - ej)) / (4.0 * h[i] * h[j])
            hess[i, j] = hess[j, i] = val
    return hess


def _negative_definite(hess: NDArray) -> bool:
    try:
        np.linalg.cholesky(-hess)
    except np.linalg.LinAlgError:
        return False
    return True


def mle(
    data,
    model: Model | str,
    init: MpaParams | WmpaParams | None = None,
    tol: float = MLE_TOL,
    max_iter: int = MLE_MAX_ITER,
    threads: int = 1,
) -> FitResult:
    """Maximum-likelihood estimates by safeguarded Newton ascent.

    The search runs in ``(log lambda_1, ..., log lambda_common, logit rho)``
    with finite-difference derivatives. Each Newton step is halved until the
    log-likelihood does not decrease. Where the Hessian is not negative
    definite a Nelder-Mead search takes over from the current point before
    Newton resumes. The iteration stops once the last step moved no
    parameter by ``tol`` or more (original coordinates) and the next Newton
    step predicts a log-likelihood gain below ``1e-6``. The second condition
    usually costs one extra iteration and leaves the gradient near zero.

    Parameters
    ----------
    init
        Starting point. Defaults to the moment estimates of ``model``, or to
        :func:`fallback_init` when those do not exist.

    Raises
    ------
    LineSearchFailure
        No non-decreasing step was found and the last step was not yet
        below ``tol``.
    """
    model = Model.parse(model)
    table = as_table(data).nonzero()
    notes: list[str] = []
    if init is None:
        try:
            init = mom(table, model, threads=threads).params
        except EstimationError as exc:
            notes.append(f"moment estimates unavailable ({type(exc).__name__}); fallback start")
            init = fallback_init(table, model)
    elif init.model is not model:
        init = params_for(model, init.as_vector())
    if init.k != table.k:
        raise ValueError("initial parameters have the wrong dimension")

    def loglik_u(u: NDArray) -> float:
        theta = _from_u(u)
        if not np.all(np.isfinite(theta)) or not (0.0 < theta[-1] < 1.0) or np.any(theta[:-1] <= 0):
            return -math.inf
        try:
            with np.errstate(over="raise", invalid="raise"):
                value = log_likelihood(table, params_for(model, theta), threads)
        except (OverflowError, FloatingPointError, ValueError):
            return -math.inf
        return value if math.isfinite(value) else -math.inf

    def neg(u: NDArray) -> float:
        v = loglik_u(u)
        return math.inf if not math.isfinite(v) else -v

    u = _to_u(init.as_vector())
    f = loglik_u(u)
    if not math.isfinite(f):
        raise LineSearchFailure(0)
    slack = 1e-10 * max(1.0, abs(f))
    converged = False
    last_delta = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        grad = numerical_gradient(loglik_u, u)
        hess = _numerical_hessian(loglik_u, u, f)
        theta_old = _from_u(u)
        if not _negative_definite(hess):
            res = minimize(neg, u, method="Nelder-Mead",
                           options={"xatol": 1e-6, "fatol": 1e-8, "maxiter": 2000})
            notes.append(f"simplex search at iteration {it}")
            if -res.fun >= f:
                u, f = np.asarray(res.x, dtype=float), -float(res.fun)
            last_delta = float(np.max(np.abs(_from_u(u) - theta_old)))
            if last_delta < tol and res.success:
                converged = True
                break
            continue
        step = -np.linalg.solve(hess, grad)
        # predicted log-likelihood gain of the full Newton step
        gain = 0.5 * float(grad @ step)
        if last_delta < tol and gain < _GAIN_TOL:
            converged = True
            break
        t = 1.0
        for _ in range(_MAX_HALVINGS + 1):
            cand = u + t * step
            fc = loglik_u(cand)
            if math.isfinite(fc) and fc >= f - slack:
                break
            t *= 0.5
        else:
            if float(np.max(np.abs(_from_u(u + step) - theta_old))) < tol:
                converged = True
                break
            raise LineSearchFailure(it)
        u, f = cand, fc
        last_delta = float(np.max(np.abs(_from_u(u) - theta_old)))
    if not converged:
        warnings.warn(f"MLE did not converge in {max_iter} iterations", ConvergenceWarning, stacklevel=2)
        notes.append("max_iter reached")
    params = params_for(model, _from_u(u))
    return _finish(params, Method.MLE, table, threads, iterations=it, converged=converged, notes=notes)
