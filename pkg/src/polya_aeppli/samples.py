"""Containers for multivariate count data: raw records and frequency tables."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray


@dataclass(frozen=True, eq=False)
class CountSample:
    """``m`` observations of a ``k``-variate count vector, one per row."""

    observations: NDArray[np.int64]

    def __post_init__(self) -> None:
        obs = np.asarray(self.observations)
        if obs.ndim != 2:
            raise ValueError("observations must be a 2-d array (m, k)")
        if obs.size and (obs.min() < 0 or not np.all(np.mod(obs, 1) == 0)):
            raise ValueError("observations must be non-negative integers")
        obs = obs.astype(np.int64)
        obs.setflags(write=False)
        object.__setattr__(self, "observations", obs)

    @property
    def m(self) -> int:
        return self.observations.shape[0]

    @property
    def k(self) -> int:
        return self.observations.shape[1]

    def to_table(self) -> "ContingencyTable":
        if self.m == 0:
            return ContingencyTable(np.empty((0, self.k), np.int64), np.empty(0))
        cells, freq = np.unique(self.observations, axis=0, return_counts=True)
        return ContingencyTable(cells, freq.astype(float))

    def permuted(self, order) -> "CountSample":
        return CountSample(self.observations[:, list(order)])


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Frequencies attached to distinct count vectors.

    ``cells`` is an ``(n_cells, k)`` integer array and ``freq`` the matching
    (possibly fractional) frequencies. Observed tables hold integer
    frequencies; expected tables may not, and their total can fall short of
    the sample size when the grid is truncated.
    """

    cells: NDArray[np.int64]
    freq: NDArray[np.float64]

    def __post_init__(self) -> None:
        cells = np.asarray(self.cells, dtype=np.int64)
        freq = np.asarray(self.freq, dtype=float)
        if cells.ndim != 2 or freq.shape != (cells.shape[0],):
            raise ValueError("cells must be (n, k) and freq (n,)")
        if freq.size and freq.min() < 0:
            raise ValueError("frequencies must be non-negative")
        cells.setflags(write=False)
        freq.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "freq", freq)

    @classmethod
    def from_dense(cls, array: ArrayLike) -> "ContingencyTable":
        """From a dense array indexed by the counts themselves."""
        arr = np.asarray(array, dtype=float)
        idx = np.indices(arr.shape).reshape(arr.ndim, -1).T
        return cls(idx, arr.ravel())

    @property
    def k(self) -> int:
        return self.cells.shape[1]

    @property
    def total(self) -> float:
        return float(self.freq.sum())

    @property
    def dims(self) -> tuple[int, ...]:
        """Largest count in each coordinate (grid bounds)."""
        if self.cells.shape[0] == 0:
            return (0,) * self.k
        return tuple(int(v) for v in self.cells.max(axis=0))

    def to_dense(self, dims: tuple[int, ...] | None = None) -> NDArray[np.float64]:
        dims = dims or self.dims
        out = np.zeros(tuple(d + 1 for d in dims))
        keep = np.all(self.cells <= np.asarray(dims), axis=1)
        np.add.at(out, tuple(self.cells[keep].T), self.freq[keep])
        return out

    def nonzero(self) -> "ContingencyTable":
        keep = self.freq > 0
        return ContingencyTable(self.cells[keep], self.freq[keep])

    def get(self, counts) -> float:
        hit = np.all(self.cells == np.asarray(counts), axis=1)
        return float(self.freq[hit].sum())

    def permuted(self, order) -> "ContingencyTable":
        return ContingencyTable(self.cells[:, list(order)], self.freq)

    def to_records(self) -> CountSample:
        """Expand an integer table to one row per observation."""
        if not np.all(np.mod(self.freq, 1) == 0):
            raise ValueError("only integer-frequency tables expand to records")
        reps = self.freq.astype(np.int64)
        return CountSample(np.repeat(self.cells, reps, axis=0))


def as_table(data: CountSample | ContingencyTable | ArrayLike) -> ContingencyTable:
    """Coerce records or a table into a (weighted) contingency table."""
    if isinstance(data, ContingencyTable):
        return data
    if isinstance(data, CountSample):
        return data.to_table()
    return CountSample(np.asarray(data)).to_table()
