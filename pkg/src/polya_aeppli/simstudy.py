"""
Monte-Carlo replication harness: repeated sampling from a known parameter
point, moment and likelihood fits of every sample, and mean / bias / MSE
summaries per sample size.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from .distributions import Model, params_for
from .errors import ConvergenceWarning, EstimationError
from .estimation import MLE_MAX_ITER, MLE_TOL, MOM_MAX_ITER, MOM_TOL, mle, mom_mpa, mom_wmpa
from .sampling import sample

__all__ = [
    "SimConfig",
    "Replication",
    "SummaryRow",
    "SimReport",
    "run_replication",
    "run_simulation",
    "reference_simulation",
    "ReferenceCheck",
    "check_against_reference",
]

PARAM_NAMES = ("lambda1", "lambda2", "lambda3", "rho")


@dataclass(frozen=True)
class SimConfig:
    """Design of a simulation run.

    Replication ``r`` (0-based) draws its sample with seed ``base_seed + r``
    at every sample size.
    """

    model: Model = Model.MPA
    true_params: tuple[float, ...] = (0.6, 0.6, 0.3, 0.1)
    sample_sizes: tuple[int, ...] = (50, 100, 200, 500)
    replications: int = 200
    base_seed: int = 0
    mom_tol: float = MOM_TOL
    mle_tol: float = MLE_TOL
    mom_max_iter: int = MOM_MAX_ITER
    mle_max_iter: int = MLE_MAX_ITER
    mom_anchor: int | str = 0
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", Model.parse(self.model))
        object.__setattr__(self, "true_params", tuple(float(v) for v in self.true_params))
        object.__setattr__(self, "sample_sizes", tuple(int(v) for v in self.sample_sizes))
        params_for(self.model, self.true_params)  # validates the parameter point
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if not self.sample_sizes or min(self.sample_sizes) < 2:
            raise ValueError("sample sizes must be at least 2")
        if not (self.mom_tol > 0 and self.mle_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.mom_max_iter < 1 or self.mle_max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    @property
    def k(self) -> int:
        return len(self.true_params) - 2

    def param_names(self) -> tuple[str, ...]:
        if self.k == 2:
            return PARAM_NAMES
        return tuple(f"lambda{i + 1}" for i in range(self.k + 1)) + ("rho",)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.value
        d["true_params"] = list(self.true_params)
        d["sample_sizes"] = list(self.sample_sizes)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        d = dict(d)
        for key in ("true_params", "sample_sizes"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass(frozen=True)
class Replication:
    """Outcome of one replication at one sample size."""

    m: int
    index: int
    mom: tuple[float, ...] | None
    mle: tuple[float, ...] | None
    mom_error: str | None = None
    mle_error: str | None = None

    @property
    def success(self) -> bool:
        return self.mom is not None and self.mle is not None


def run_replication(config: SimConfig, m: int, r: int) -> Replication:
    """Sample with seed ``base_seed + r`` and fit by moments, then likelihood."""
    truth = params_for(config.model, config.true_params)
    data = sample(truth, m, seed=config.base_seed + r).to_table()
    mom_est, mom_err, init = None, None, None
    try:
        if config.model is Model.MPA:
            fit = mom_mpa(data)
        else:
            fit = mom_wmpa(data, tol=config.mom_tol, max_iter=config.mom_max_iter, anchor=config.mom_anchor)
        mom_est, init = tuple(fit.params.as_vector()), fit.params
    except (EstimationError, ValueError) as exc:
        mom_err = type(exc).__name__
    mle_est, mle_err = None, None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            fit = mle(data, config.model, init=init, tol=config.mle_tol, max_iter=config.mle_max_iter)
        if fit.converged:
            mle_est = tuple(fit.params.as_vector())
        else:
            mle_err = "NonConvergence"
    except (EstimationError, ValueError) as exc:
        mle_err = type(exc).__name__
    return Replication(m, r, mom_est, mle_est, mom_err, mle_err)


@dataclass(frozen=True)
class SummaryRow:
    method: str
    m: int
    parameter: str
    true_value: float
    n: int
    mean: float
    bias: float
    mse: float
    sd: float
    se_mean: float
    se_mse: float

    def to_dict(self) -> dict:
        return asdict(self)


def _summarise(values: list[float], truth: float) -> tuple[float, ...]:
    n = len(values)
    if n == 0:
        nan = math.nan
        return nan, nan, nan, nan, nan, nan
    mean = math.fsum(values) / n
    sq = [(v - truth) ** 2 for v in values]
    mse = math.fsum(sq) / n
    if n > 1:
        sd = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / (n - 1))
        sd_sq = math.sqrt(math.fsum((s - mse) ** 2 for s in sq) / (n - 1))
    else:
        sd = sd_sq = 0.0
    return mean, mean - truth, mse, sd, sd / math.sqrt(n), sd_sq / math.sqrt(n)


@dataclass(frozen=True)
class SimReport:
    """Mean / bias / MSE per (method, sample size, parameter) and success rates.

    Summaries use only replications where both fits succeeded. ``se_mean``
    and ``se_mse`` are Monte-Carlo standard errors of the mean (and bias)
    and of the MSE.
    """

    config: SimConfig
    rows: tuple[SummaryRow, ...]
    success_rates: dict[str, float] = field(default_factory=dict)

    def row(self, method: str, m: int, parameter: str) -> SummaryRow:
        for r in self.rows:
            if r.method == method and r.m == m and r.parameter == parameter:
                return r
        raise KeyError((method, m, parameter))

    def success_rate(self, method: str, m: int) -> float:
        return self.success_rates[f"{method}:{m}"]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "rows": [r.to_dict() for r in self.rows],
            "success_rates": dict(self.success_rates),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimReport":
        return cls(
            SimConfig.from_dict(d["config"]),
            tuple(SummaryRow(**r) for r in d["rows"]),
            {k: float(v) for k, v in d["success_rates"].items()},
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self, precision: int = 4) -> str:
        """One line per (method, m), with mean, bias and MSE for each parameter."""
        names = self.config.param_names()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "m", "success_rate"] + [f"{p}_{s}" for p in names for s in ("mean", "bias", "mse")])
        for method in ("mom", "mle"):
            for m in self.config.sample_sizes:
                vals = []
                for p in names:
                    r = self.row(method, m, p)
                    vals += [f"{r.mean:.{precision}f}", f"{r.bias:.{precision}f}", f"{r.mse:.{precision}f}"]
                w.writerow([method, m, f"{self.success_rate(method, m):.{precision}f}"] + vals)
        return buf.getvalue()

    def to_text(self, precision: int = 4) -> str:
        names = self.config.param_names()
        col = 3 * (precision + 4) + 4
        lines = []
        for method in ("mom", "mle"):
            lines.append(f"{self.config.model.value.upper()} {method.upper()} (mean, bias, MSE)")
            lines.append(f"{'m':>6}" + "".join(f"{p:>{col}}" for p in names) + f"{'success':>10}")
            for m in self.config.sample_sizes:
                cells = []
                for p in names:
                    r = self.row(method, m, p)
                    cells.append(f"({r.mean:.{precision}f},{r.bias:.{precision}f},{r.mse:.{precision}f})")
                rate = self.success_rate(method, m)
                lines.append(f"{m:>6}" + "".join(f"{c:>{col}}" for c in cells) + f"{rate:>10.3f}")
            lines.append("")
        return "\n".join(lines)


def _run_size(args: tuple[SimConfig, int]) -> list[Replication]:
    config, m = args
    return [run_replication(config, m, r) for r in range(config.replications)]


def run_simulation(config: SimConfig) -> SimReport:
    """Run every replication of ``config`` and summarise.

    With ``config.workers > 1`` sample sizes are spread over worker
    processes; results are identical to the serial run because each
    replication owns its generator and aggregation follows index order.
    """
    jobs = [(config, m) for m in config.sample_sizes]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            per_size = list(pool.map(_run_size, jobs))
    else:
        per_size = [_run_size(j) for j in jobs]

    names = config.param_names()
    rows: list[SummaryRow] = []
    rates: dict[str, float] = {}
    for m, reps in zip(config.sample_sizes, per_size):
        ok = [r for r in reps if r.success]
        n_rep = len(reps)
        rates[f"mom:{m}"] = sum(r.mom is not None for r in reps) / n_rep
        rates[f"mle:{m}"] = sum(r.mle is not None for r in reps) / n_rep
        rates[f"both:{m}"] = len(ok) / n_rep
        for method in ("mom", "mle"):
            for j, name in enumerate(names):
                truth = config.true_params[j]
                values = [getattr(r, method)[j] for r in ok]
                stats = _summarise(values, truth)
                rows.append(SummaryRow(method, m, name, truth, len(values), *stats))
    return SimReport(config, tuple(rows), rates)


@lru_cache(maxsize=None)
def _reference() -> dict:
    text = resources.files("polya_aeppli.data").joinpath("reference_simulation.json").read_text("utf-8")
    return json.loads(text)


def reference_simulation(method: str, model: Model | str, m: int) -> dict[str, tuple[float, float, float]]:
    """Reported (mean, bias, MSE) per parameter for the default design."""
    ref = _reference()
    block = ref[method][Model.parse(model).value][str(m)]
    return {name: tuple(v) for name, v in zip(ref["parameters"], block)}


def _z(observed: float, reported: float, se: float) -> float:
    if se > 0:
        return (observed - reported) / se
    return 0.0 if observed == reported else math.copysign(math.inf, observed - reported)


@dataclass(frozen=True)
class ReferenceCheck:
    """One simulated (mean, bias, MSE) triple set against the reported one.

    Each ``z_*`` is the difference divided by the Monte-Carlo standard error
    of this run's estimate.
    """

    method: str
    m: int
    parameter: str
    reported: tuple[float, float, float]
    observed: tuple[float, float, float]
    z: tuple[float, float, float]

    def ok(self, n_se: float = 3.0) -> bool:
        return all(abs(v) <= n_se for v in self.z)


def check_against_reference(report: SimReport) -> list[ReferenceCheck]:
    """Compare every summary entry of ``report`` with the reported values.

    Only meaningful for the default design (bivariate, true point
    ``(0.6, 0.6, 0.3, 0.1)``). Sample sizes without reported values are
    skipped.
    """
    out = []
    for method in ("mom", "mle"):
        for m in report.config.sample_sizes:
            try:
                ref = reference_simulation(method, report.config.model, m)
            except KeyError:
                continue
            for name, (mean, bias, mse) in ref.items():
                r = report.row(method, m, name)
                z = (_z(r.mean, mean, r.se_mean), _z(r.bias, bias, r.se_mean), _z(r.mse, mse, r.se_mse))
                out.append(ReferenceCheck(method, m, name, (mean, bias, mse), (r.mean, r.bias, r.mse), z))
    return out
