"""
Command-line front end.

Subcommands: ``fit``, ``simulate``, ``gdi``, ``tabulate``, ``simstudy``.
Exit codes: 0 success, 2 usage or configuration error, 3 data error,
4 estimation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from ._likelihood import THREADS_ENV, default_threads
from .data_io import EMBEDDED, DataFormat, embedded_dataset, emit_records, emit_table, load_data
from .distributions import Model, gdi_mpa, log_pmf, params_for, wmpa_moments
from .errors import ConvergenceWarning, DataError, EstimationError
from .estimation import MLE_MAX_ITER, MLE_TOL, MOM_MAX_ITER, MOM_TOL, FitResult, Method, mle, mom
from .model_selection import (
    compare,
    empirical_gdi,
    expected_frequencies,
    render_estimates,
    render_frequency_table,
)
from .samples import ContingencyTable, as_table
from .sampling import sample
from .simstudy import SimConfig, check_against_reference, run_simulation

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ESTIMATION = 0, 2, 3, 4


class UsageError(Exception):
    """Bad flag values detected after argument parsing."""


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str, sep: str = ",") -> list[int]:
    try:
        return [int(t) for t in text.lower().split(sep) if t.strip()]
    except ValueError:
        raise UsageError(f"expected integers separated by {sep!r}, got {text!r}") from None


def _params(model: str, text: str):
    try:
        return params_for(model, _floats(text))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _read_data(args) -> tuple[ContingencyTable, str | None]:
    """Observed data from ``--data`` or ``--embedded`` as a table, plus a dataset name."""
    if getattr(args, "embedded", None):
        return embedded_dataset(args.embedded), args.embedded
    fmt = DataFormat(args.format) if args.format else None
    return as_table(load_data(args.data, fmt)), None


def _models(choice: str) -> list[Model]:
    return [Model.MPA, Model.WMPA] if choice == "both" else [Model.parse(choice)]


def _fit_one(table, model: Model, method: Method, args) -> FitResult:
    tol_mom = args.tol if args.tol is not None else MOM_TOL
    tol_mle = args.tol if args.tol is not None else MLE_TOL
    if method is Method.MOM:
        kwargs = {} if model is Model.MPA else {
            "tol": tol_mom, "max_iter": args.max_iter or MOM_MAX_ITER, "anchor": args.anchor,
        }
        return mom(table, model, threads=args.threads, **kwargs)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        return mle(table, model, tol=tol_mle, max_iter=args.max_iter or MLE_MAX_ITER, threads=args.threads)


def _write(text: str, path: str | None = None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(path).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands


def cmd_fit(args) -> int:
    table, dataset = _read_data(args)
    methods = [Method.MOM, Method.MLE] if args.method == "both" else [Method.parse(args.method)]
    fits = [_fit_one(table, model, method, args) for model in _models(args.model) for method in methods]
    comparison = None
    if args.compare:
        comparison = compare([f for f in fits if f.method is Method.MLE] or fits, dataset)
    if args.out == "json":
        payload = {"dataset": dataset or str(args.data), "m": table.total, "fits": [f.to_dict() for f in fits]}
        if comparison is not None:
            payload["comparison"] = comparison.to_dict()
        _write(json.dumps(payload, indent=2, sort_keys=True))
        return EXIT_OK
    p = args.precision
    lines = [f"data: {dataset or args.data}  (m = {table.total:g}, k = {table.k})", ""]
    if len(fits) > 1:
        lines.append(render_estimates(fits, p))
    else:
        f = fits[0]
        lines.append(f"model:          {f.model.value.upper()}")
        lines.append(f"method:         {f.method.value.upper()}")
        for i, lam in enumerate(f.params.lambdas):
            lines.append(f"lambda{i + 1}:{'':<8}{lam:.{p}f}")
        lines.append(f"lambda{f.k + 1}:{'':<8}{f.params.lambda_common:.{p}f}")
        lines.append(f"rho:            {f.params.rho:.{p}f}")
        lines.append(f"log-likelihood: {f.log_likelihood:.{p}f}")
        lines.append(f"AIC:            {f.aic:.{p}f}")
        lines.append(f"BIC:            {f.bic:.{p}f}")
        lines.append(f"iterations:     {f.iterations}")
        lines.append(f"converged:      {'yes' if f.converged else 'no'}")
        lines.extend(f"note:           {n}" for n in f.notes)
    if comparison is not None:
        lines += ["", comparison.to_text(2)]
    _write("\n".join(lines))
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = _params(args.model, args.params)
    if args.n < 0:
        raise UsageError("-n must be non-negative")
    draws = sample(params, args.n, seed=args.seed)
    text = emit_table(draws.to_table()) if args.format == "table" else emit_records(draws)
    _write(text, args.out)
    return EXIT_OK


def _gdi_surface(args) -> int:
    base = _params("mpa", args.params)
    if base.k != 2:
        raise UsageError("--surface is defined for bivariate parameters")
    lo, hi = _floats(args.range)
    if args.steps < 2:
        raise UsageError("--steps must be at least 2")
    index = {"lambda1": 0, "lambda2": 1, "lambda3": 2, "rho": 3}[args.surface]
    lines = [f"{args.surface},gdi_mpa,gdi_wmpa"]
    for v in np.linspace(lo, hi, args.steps):
        vec = list(base.as_vector())
        vec[index] = float(v)
        try:
            pm = params_for("mpa", vec)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        g_w = wmpa_moments(params_for("wmpa", vec)).gdi
        lines.append(f"{v:.{args.precision}f},{gdi_mpa(pm):.{args.precision}f},{g_w:.{args.precision}f}")
    _write("\n".join(lines))
    return EXIT_OK


def cmd_gdi(args) -> int:
    if args.surface:
        return _gdi_surface(args)
    if not (args.data or args.embedded):
        raise UsageError("one of --data, --embedded or --surface is required")
    table, dataset = _read_data(args)
    value = empirical_gdi(table)
    if args.out == "json":
        _write(json.dumps({"dataset": dataset or str(args.data), "m": table.total, "gdi": value}, sort_keys=True))
    else:
        _write(f"{value:.{args.precision}f}")
    return EXIT_OK


def _grid(text: str) -> tuple[int, ...]:
    dims = _ints(text, "x")
    if not dims or min(dims) < 1:
        raise UsageError("--grid needs positive sizes such as 10x9")
    return tuple(d - 1 for d in dims)


def cmd_tabulate(args) -> int:
    observed, dataset = None, None
    if args.data or args.embedded:
        observed, dataset = _read_data(args)
    expected: dict[str, ContingencyTable] = {}
    if args.params:
        if args.model == "both":
            raise UsageError("--params needs a single --model")
        fitted = [_params(args.model, args.params)]
    elif observed is not None:
        method = Method.parse(args.method)
        fitted = [_fit_one(observed, model, method, args).params for model in _models(args.model)]
    else:
        raise UsageError("give --params, or --data/--embedded to fit from")
    k = fitted[0].k
    bounds = _grid(args.grid) if args.grid else (observed.dims if observed is not None else (9, 8)[:k])
    if len(bounds) != k:
        raise UsageError(f"--grid needs {k} sizes")
    total = args.total if args.total is not None else (observed.total if observed is not None else 1.0)
    for params in fitted:
        expected[params.model.value.upper()] = expected_frequencies(params, bounds=bounds, m=total, threads=args.threads)

    p = args.precision
    if args.out == "json":
        payload = {
            "bounds": list(bounds),
            "total": total,
            "params": {name: list(pr.as_vector()) for name, pr in zip(expected, fitted)},
            "expected": {
                name: {"cells": t.cells.tolist(), "freq": t.freq.tolist(), "sum": t.total}
                for name, t in expected.items()
            },
        }
        if observed is not None:
            payload["observed"] = {"cells": observed.cells.tolist(), "freq": observed.freq.tolist()}
        _write(json.dumps(payload, indent=2, sort_keys=True))
    elif args.out == "csv":
        names = list(expected)
        header = [f"n{i + 1}" for i in range(k)] + (["observed"] if observed is not None else []) + names
        lines = [",".join(header)]
        for cell in expected[names[0]].cells:
            row = [str(int(c)) for c in cell]
            if observed is not None:
                row.append(f"{observed.get(cell):g}")
            row += [f"{expected[n].get(cell):.{p}f}" for n in names]
            lines.append(",".join(row))
        _write("\n".join(lines))
    else:
        if k != 2:
            raise UsageError("text layout is bivariate; use --out csv or json for k >= 3")
        _write(render_frequency_table(observed, expected, bounds, precision=p))
    return EXIT_OK


def _sim_config(args) -> SimConfig:
    base: dict = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc.strerror or exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {args.config!r} is not valid JSON: {exc}") from None
        if not isinstance(base, dict):
            raise UsageError("config must be a JSON object")
    overrides = {
        "model": args.model,
        "true_params": _floats(args.params) if args.params else None,
        "sample_sizes": _ints(args.sizes) if args.sizes else None,
        "replications": args.replications,
        "base_seed": args.seed,
        "workers": args.workers,
        "mom_tol": args.mom_tol,
        "mle_tol": args.mle_tol,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SimConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid simulation config: {exc}") from None


def cmd_simstudy(args) -> int:
    config = _sim_config(args)
    report = run_simulation(config)
    if args.out == "json":
        _write(report.to_json())
    elif args.out == "csv":
        _write(report.to_csv(args.precision))
    else:
        text = report.to_text(args.precision)
        if args.reference:
            checks = check_against_reference(report)
            if not checks:
                raise UsageError("reported values exist only for sample sizes 50, 100, 200, 500")
            lines = ["Reported vs simulated (z = difference / Monte-Carlo SE)",
                     f"{'method':<7}{'m':>5}  {'param':<8}{'mean':>9}{'z':>9}{'bias':>9}{'z':>9}{'MSE':>9}{'z':>9}"]
            for c in checks:
                flag = "" if c.ok() else "  *"
                lines.append(
                    f"{c.method:<7}{c.m:>5}  {c.parameter:<8}"
                    f"{c.reported[0]:>9.4f}{c.z[0]:>9.2f}{c.reported[1]:>9.4f}{c.z[1]:>9.2f}"
                    f"{c.reported[2]:>9.4f}{c.z[2]:>9.2f}{flag}"
                )
            text += "\n" + "\n".join(lines)
        _write(text)
    return EXIT_OK


def cmd_oracle(args) -> int:
    from .oracle import brute_force_pmf

    params = _params(args.model, args.params)
    counts = _ints(args.counts)
    closed = math.exp(log_pmf(counts, params))
    brute = brute_force_pmf(counts, params)
    rel = abs(closed - brute) / brute if brute > 0 else abs(closed)
    _write(f"closed_form {closed:.17g}\nbrute_force {brute:.17g}\nrelative_error {rel:.3g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _data_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--data", metavar="PATH", help="CSV file (records or bivariate table)")
    src.add_argument("--embedded", choices=sorted(EMBEDDED), help="embedded dataset")
    p.add_argument("--format", choices=[f.value for f in DataFormat], help="input format (default: sniffed)")


def build_parser() -> argparse.ArgumentParser:
    def shared(defaults: bool) -> argparse.ArgumentParser:
        # accepted before or after the subcommand; only the top level sets defaults
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--precision", type=int, default=4 if defaults else argparse.SUPPRESS,
                       help="decimals in numeric output (default 4)")
        p.add_argument("--threads", type=_positive_int, default=None if defaults else argparse.SUPPRESS,
                       help=f"likelihood worker threads (default: ${THREADS_ENV} or all cores)")
        return p

    common = shared(False)
    parser = argparse.ArgumentParser(
        prog="polya-aeppli",
        description="Type I multivariate and weighted multivariate Polya-Aeppli count models.",
        parents=[shared(True)],
    )
    sub = parser.add_subparsers(dest="command", metavar="{fit,simulate,gdi,tabulate,simstudy}", required=True)

    p = sub.add_parser("fit", parents=[common], help="estimate parameters from data")
    p.add_argument("--model", choices=["mpa", "wmpa", "both"], default="mpa")
    p.add_argument("--method", choices=["mom", "mle", "both"], default="mle")
    _data_flags(p)
    p.add_argument("--tol", type=float, help="stopping tolerance (default 0.001 for moments, 0.01 for likelihood)")
    p.add_argument("--max-iter", type=_positive_int, help="iteration cap")
    p.add_argument("--anchor", default=0, type=lambda s: s if s == "max_mean" else int(s),
                   help="WMPA moment solver: coordinate index or 'max_mean' (default 0)")
    p.add_argument("--compare", action="store_true", help="rank against reported fits of other models")
    p.add_argument("--out", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", parents=[common], help="draw a sample as CSV")
    p.add_argument("--model", choices=["mpa", "wmpa"], default="mpa")
    p.add_argument("--params", required=True, help="lambda_1,...,lambda_k,lambda_common,rho")
    p.add_argument("-n", type=int, required=True, help="number of observations")
    p.add_argument("--seed", type=int, help="seed for reproducible output")
    p.add_argument("--format", choices=["records", "table"], default="records")
    p.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gdi", parents=[common], help="empirical generalized dispersion index")
    _data_flags(p, required=False)
    p.add_argument("--surface", choices=["lambda1", "lambda2", "lambda3", "rho"],
                   help="instead export model GDI over one parameter as CSV")
    p.add_argument("--params", default="0.5,0.5,0.5,0.5", help="base point for --surface")
    p.add_argument("--range", default="0.05,0.95", help="lo,hi for --surface")
    p.add_argument("--steps", type=int, default=19, help="grid points for --surface")
    p.add_argument("--out", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_gdi)

    p = sub.add_parser("tabulate", parents=[common], help="expected-frequency table")
    p.add_argument("--model", choices=["mpa", "wmpa", "both"], default="mpa")
    p.add_argument("--params", help="parameters; otherwise fitted from --data/--embedded")
    _data_flags(p, required=False)
    p.add_argument("--method", choices=["mom", "mle"], default="mle", help="estimator when fitting")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=_positive_int)
    p.add_argument("--anchor", default=0, type=lambda s: s if s == "max_mean" else int(s))
    p.add_argument("--grid", help="rows x columns, e.g. 10x9 for n1 in 0..9, n2 in 0..8")
    p.add_argument("--total", type=float, help="multiplier m (default: observed total, else 1)")
    p.add_argument("--out", choices=["text", "csv", "json"], default="text")
    p.set_defaults(func=cmd_tabulate)

    p = sub.add_parser("simstudy", parents=[common], help="Monte-Carlo study of both estimators")
    p.add_argument("--config", metavar="PATH", help="JSON simulation config")
    p.add_argument("--model", choices=["mpa", "wmpa"])
    p.add_argument("--params", help="true parameter point")
    p.add_argument("--sizes", help="comma-separated sample sizes")
    p.add_argument("--replications", type=int)
    p.add_argument("--seed", type=int, help="base seed; replication r uses seed + r")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--mom-tol", type=float)
    p.add_argument("--mle-tol", type=float)
    p.add_argument("--reference", action="store_true", help="append reported values and z-scores")
    p.add_argument("--out", choices=["text", "json", "csv"], default="text")
    p.set_defaults(func=cmd_simstudy)

    # hidden: closed form against brute-force summation for one cell
    p = sub.add_parser("oracle", parents=[common])
    p.add_argument("--model", choices=["mpa", "wmpa"], default="mpa")
    p.add_argument("--params", required=True)
    p.add_argument("--counts", required=True)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads is None:
        args.threads = default_threads()
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"{parser.prog}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EstimationError as exc:
        print(f"{parser.prog}: estimation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except ValueError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
