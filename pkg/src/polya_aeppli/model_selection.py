"""
Log-likelihood, information criteria, expected-frequency tables, empirical
dispersion, and side-by-side comparison with reference fits of other models.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import _likelihood
from ._likelihood import cell_log_pmf
from .distributions import Model, MpaParams, WmpaParams, gdi_generic, iter_grid, pa_pmf, params_for, wpa_pmf
from .errors import ZeroMeanCoordinate
from .estimation import FitResult, information_criteria, sample_moments
from .samples import ContingencyTable, as_table

__all__ = [
    "log_likelihood",
    "information_criteria",
    "expected_frequencies",
    "marginal_pmf",
    "auto_bounds",
    "empirical_gdi",
    "reference_fits",
    "ModelScore",
    "Comparison",
    "compare",
    "render_frequency_table",
    "render_estimates",
]


def _resolve_params(model, params) -> MpaParams | WmpaParams:
    if isinstance(params, (MpaParams, WmpaParams)):
        if model is not None and params.model is not Model.parse(model):
            params = params_for(model, params.as_vector())
        return params
    if model is None:
        raise ValueError("a model is needed when params is a plain vector")
    return params_for(model, params)


def log_likelihood(data, model: Model | str | None = None, params=None, threads: int = 1) -> float:
    """Log-likelihood of records or of a frequency table.

    ``params`` is a parameter object or a flat vector
    ``(lambda_1..lambda_k, lambda_common, rho)``; in the latter case
    ``model`` selects the family. Records contribute one term each, tables
    ``freq * log f(cell)`` per cell.
    """
    if params is None and isinstance(model, (MpaParams, WmpaParams)):
        model, params = None, model
    return _likelihood.log_likelihood(data, _resolve_params(model, params), threads)


def expected_frequencies(
    params,
    model: Model | str | None = None,
    bounds: Sequence[int] = (9, 8),
    m: float = 1.0,
    threads: int = 1,
) -> ContingencyTable:
    """``m * f(n)`` on the box ``0..bounds[0] x 0..bounds[1] x ...``.

    The box is not renormalised, so the total falls short of ``m`` by the
    probability mass outside it.
    """
    params = _resolve_params(model, params)
    if len(bounds) != params.k:
        raise ValueError(f"bounds must have {params.k} entries")
    cells = iter_grid(bounds)
    logs = cell_log_pmf(cells, params, threads)
    return ContingencyTable(cells, m * np.exp(logs))


def marginal_pmf(params: MpaParams | WmpaParams, index: int, n_max: int) -> NDArray[np.float64]:
    """``Pr(N_index = n)`` for ``n = 0..n_max``.

    Under the MPA the margin is Pólya-Aeppli with rate
    ``lambda_index + lambda_common``; under the WMPA it is the convolution of
    two weighted Pólya-Aeppli laws.
    """
    lam, lc, rho = params.lambdas[index], params.lambda_common, params.rho
    if params.model is Model.MPA:
        return np.array([pa_pmf(n, lam + lc, rho) for n in range(n_max + 1)])
    own = np.array([wpa_pmf(n, lam, rho) for n in range(n_max + 1)])
    common = np.array([wpa_pmf(n, lc, rho) for n in range(n_max + 1)])
    return np.convolve(own, common)[: n_max + 1]


def auto_bounds(params: MpaParams | WmpaParams, tail: float = 1e-12, n_cap: int = 2000) -> tuple[int, ...]:
    """Per-coordinate bounds leaving at most ``tail`` of mass outside the box.

    Each margin is cut where its own tail drops below ``tail / k``, so the
    union bound certifies the joint tail.
    """
    out = []
    for i in range(params.k):
        n_max = 16
        while True:
            pmf = marginal_pmf(params, i, n_max)
            rest = 1.0 - math.fsum(pmf)
            cdf_tail = np.maximum(1.0 - np.cumsum(pmf), 0.0)
            hit = np.nonzero(cdf_tail <= tail / params.k)[0]
            if hit.size and rest <= tail / params.k:
                out.append(int(hit[0]))
                break
            if n_max >= n_cap:
                raise ValueError("margin tail does not fall below the requested level")
            n_max *= 2
    return tuple(out)


def empirical_gdi(data) -> float:
    """GDI of the sample mean vector and sample covariance (divisor ``m - 1``).

    Raises
    ------
    ZeroMeanCoordinate
        If a coordinate has sample mean zero.
    """
    sm = sample_moments(data)
    for i, v in enumerate(sm.means):
        if v == 0:
            raise ZeroMeanCoordinate(i)
    return gdi_generic(sm.means, sm.covariances)


# ---------------------------------------------------------------------------
# comparison with reference fits


@lru_cache(maxsize=None)
def _reference_data() -> dict:
    text = resources.files("polya_aeppli.data").joinpath("reference_fits.json").read_text("utf-8")
    return json.loads(text)


def reference_fits(dataset: str) -> dict[str, dict]:
    """Reported fits of competing models on an embedded dataset.

    Returns a mapping from model name to a dict with ``aic``, ``bic`` and,
    where reported, ``parameters`` and ``log_likelihood``.
    """
    data = _reference_data()
    if dataset not in data["competitors"]:
        raise KeyError(f"no reference fits for dataset {dataset!r}")
    return {k: dict(v) for k, v in data["competitors"][dataset].items()}


@dataclass(frozen=True)
class ModelScore:
    name: str
    aic: float
    bic: float
    parameters: int | None = None
    log_likelihood: float | None = None
    reference: bool = False

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "parameters": self.parameters,
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
            "bic": self.bic,
            "reference": self.reference,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelScore":
        return cls(d["name"], float(d["aic"]), float(d["bic"]), d.get("parameters"),
                   d.get("log_likelihood"), bool(d.get("reference", False)))


@dataclass(frozen=True)
class Comparison:
    """Fits ranked by AIC (ties broken by BIC)."""

    dataset: str | None
    scores: tuple[ModelScore, ...]

    @property
    def best_aic(self) -> ModelScore:
        return min(self.scores, key=lambda s: (s.aic, s.bic))

    @property
    def best_bic(self) -> ModelScore:
        return min(self.scores, key=lambda s: (s.bic, s.aic))

    def to_dict(self) -> dict:
        return {"dataset": self.dataset, "scores": [s.to_dict() for s in self.scores]}

    @classmethod
    def from_dict(cls, d: dict) -> "Comparison":
        return cls(d.get("dataset"), tuple(ModelScore.from_dict(s) for s in d["scores"]))

    def to_text(self, precision: int = 2) -> str:
        head = f"{'model':<16}{'p':>4}{'loglik':>16}{'AIC':>14}{'BIC':>14}"
        lines = [head, "-" * len(head)]
        for s in self.scores:
            ll = "" if s.log_likelihood is None else f"{s.log_likelihood:.{precision}f}"
            p = "" if s.parameters is None else str(s.parameters)
            tag = "*" if s.reference else ""
            lines.append(f"{s.name + tag:<16}{p:>4}{ll:>16}{s.aic:>14.{precision}f}{s.bic:>14.{precision}f}")
        if any(s.reference for s in self.scores):
            lines.append("* reported value, model not fitted here")
        return "\n".join(lines)


def _label(fit: FitResult) -> str:
    return f"{fit.model.value.upper()} ({fit.method.value.upper()})"


def compare(fits: Iterable[FitResult], dataset: str | None = None) -> Comparison:
    """Rank ``fits`` together with the reference fits for ``dataset`` (if any)."""
    scores = [
        ModelScore(_label(f), f.aic, f.bic, f.p, f.log_likelihood) for f in fits
    ]
    if dataset is not None:
        for name, v in reference_fits(dataset).items():
            scores.append(ModelScore(name, v["aic"], v["bic"], v.get("parameters"),
                                     v.get("log_likelihood"), reference=True))
    scores.sort(key=lambda s: (s.aic, s.bic))
    return Comparison(dataset, tuple(scores))


def render_frequency_table(
    observed: ContingencyTable | None,
    expected: dict[str, ContingencyTable],
    bounds: Sequence[int] | None = None,
    precision: int = 2,
) -> str:
    """Aligned text: for each ``n1`` the observed row, then one row per expected table.

    Bivariate tables only. The last column and the final block hold the
    row and column totals.
    """
    tables = ([("Observed", observed)] if observed is not None else []) + list(expected.items())
    if not tables:
        raise ValueError("nothing to render")
    if any(t.k != 2 for _, t in tables):
        raise ValueError("frequency tables can only be rendered for k = 2")
    if bounds is None:
        bounds = tuple(max(t.dims[j] for _, t in tables) for j in range(2))
    dense = [(name, t.to_dense(tuple(bounds))) for name, t in tables]
    width = max(10, precision + 8)
    name_w = max(10, max(len(n) for n, _ in dense) + 2)

    def fmt(v: float, integral: bool) -> str:
        return f"{int(round(v)):>{width}d}" if integral else f"{v:>{width}.{precision}f}"

    header = f"{'':<{name_w}}{'n1/n2':>6}" + "".join(f"{j:>{width}d}" for j in range(bounds[1] + 1)) + f"{'Total':>{width}}"
    lines = [header]
    for i in range(bounds[0] + 1):
        for name, arr in dense:
            integral = name == "Observed"
            label = str(i) if name == dense[0][0] else ""
            row = "".join(fmt(v, integral) for v in arr[i]) + fmt(arr[i].sum(), integral)
            lines.append(f"{name:<{name_w}}{label:>6}{row}")
    for name, arr in dense:
        integral = name == "Observed"
        label = "Total" if name == dense[0][0] else ""
        row = "".join(fmt(v, integral) for v in arr.sum(axis=0)) + fmt(arr.sum(), integral)
        lines.append(f"{name:<{name_w}}{label:>6}{row}")
    return "\n".join(lines)


def render_estimates(fits: Sequence[FitResult], precision: int = 4) -> str:
    """One line per fit: model, method, estimates, log-likelihood, AIC and BIC."""
    if not fits:
        raise ValueError("nothing to render")
    k = max(f.k for f in fits)
    names = [f"lambda{i + 1}" for i in range(k + 1)] + ["rho"]
    w = max(10, precision + 6)
    head = f"{'model':<8}{'method':<8}" + "".join(f"{n:>{w}}" for n in names)
    head += f"{'loglik':>14}{'AIC':>12}{'BIC':>12}{'iter':>6}  converged"
    lines = [head, "-" * len(head)]
    for f in fits:
        vals = "".join(f"{v:>{w}.{precision}f}" for v in f.params.as_vector())
        lines.append(
            f"{f.model.value.upper():<8}{f.method.value.upper():<8}{vals}"
            f"{f.log_likelihood:>14.{min(precision, 4)}f}{f.aic:>12.2f}{f.bic:>12.2f}"
            f"{f.iterations:>6}  {'yes' if f.converged else 'no'}"
        )
    return "\n".join(lines)
