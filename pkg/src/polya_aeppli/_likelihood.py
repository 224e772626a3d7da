"""Log-likelihood engine shared by estimation and reporting.

Per-cell log-probabilities may be computed on several threads; the final
reduction is :func:`math.fsum`, which is exactly rounded and therefore
independent of chunking and thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numpy.typing import NDArray

from .distributions import MpaParams, WmpaParams, log_pmf_cells
from .samples import ContingencyTable, CountSample, as_table

THREADS_ENV = "POLYA_AEPPLI_THREADS"


def default_threads() -> int:
    """Thread count from ``$POLYA_AEPPLI_THREADS``, else the number of CPUs."""
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
        if value < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return value
    return os.cpu_count() or 1


def cell_log_pmf(cells: NDArray, params: MpaParams | WmpaParams, threads: int = 1) -> NDArray[np.float64]:
    """``log f`` for each row of ``cells``, optionally split over threads."""
    cells = np.asarray(cells)
    n = cells.shape[0]
    if threads <= 1 or n < 2 * threads:
        return log_pmf_cells(cells, params)
    bounds = np.linspace(0, n, threads + 1).astype(int)
    chunks = [cells[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda c: log_pmf_cells(c, params), chunks))
    return np.concatenate(parts)


def table_log_likelihood(table: ContingencyTable, params, threads: int = 1) -> float:
    """``sum freq * log f(cell)`` over the cells with positive frequency."""
    table = table.nonzero()
    if table.cells.shape[0] == 0:
        return 0.0
    logs = cell_log_pmf(table.cells, params, threads)
    return math.fsum((table.freq * logs).tolist())


def records_log_likelihood(sample: CountSample, params, threads: int = 1) -> float:
    """``sum_l log f(n_l)`` with one term per observation."""
    if sample.m == 0:
        return 0.0
    cells, inverse = np.unique(sample.observations, axis=0, return_inverse=True)
    logs = cell_log_pmf(cells, params, threads)
    return math.fsum(logs[inverse.ravel()].tolist())


def log_likelihood(data, params, threads: int = 1) -> float:
    if isinstance(data, ContingencyTable):
        return table_log_likelihood(data, params, threads)
    if isinstance(data, CountSample):
        return records_log_likelihood(data, params, threads)
    return table_log_likelihood(as_table(data), params, threads)
