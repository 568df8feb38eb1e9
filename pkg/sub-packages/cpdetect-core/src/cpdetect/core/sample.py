# SPDX-FileCopyrightText: Copyright (c) 2024 NVIDIA CORPORATION & AFFILIATES. All rights reserved.
# SPDX-License-Identifier: LicenseRef-Apache2
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata


__all__: Sequence[str] = (
    "DivisorMode",
    "MultivariateSample",
    "SubsampleWindow",
    "PseudoObservations",
    "maximal_ranks",
    "pseudo_observations",
    "empirical_copula_eval",
    "negate_sample",
    "rank_block",
    "iter_splits",
)


class DivisorMode(str, Enum):
    """How maximal ranks of a window of size m are scaled into the unit interval."""

    THEORY = "theory"
    """Divide by m; the largest value of a column is exactly 1."""

    SIMULATION = "simulation"
    """Divide by m + 1; all values lie strictly inside (0, 1). This is the default everywhere."""

    def divisor(self, m: int) -> int:
        """The rank divisor for a window with m rows."""
        return m if self is DivisorMode.THEORY else m + 1


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class MultivariateSample:
    """An n x d matrix of observations, rows ordered in time."""

    data: np.ndarray
    """Observations, one row per time point and one column per component."""

    column_names: Optional[Tuple[str, ...]] = None
    """Optional component names, e.g. taken from a CSV header."""

    def __post_init__(self):
        """Validate the shape and the values, and freeze a private copy of the data."""
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ValueError(f"A sample must be a 2-D matrix, got an array with {data.ndim=}.")
        n, d = data.shape
        if n < 2:
            raise ValueError(f"A sample needs at least two observations to have a split point, got {n=}.")
        if d < 2:
            raise ValueError(f"A sample needs at least two components, got {d=}.")
        if not np.all(np.isfinite(data)):
            bad_row, bad_col = np.argwhere(~np.isfinite(data))[0]
            raise ValueError(f"Non-finite value at row {bad_row + 1}, column {bad_col + 1}.")
        if self.column_names is not None:
            if len(self.column_names) != d:
                raise ValueError(f"Got {len(self.column_names)} column names for {d} columns.")
            object.__setattr__(self, "column_names", tuple(str(name) for name in self.column_names))
        object.__setattr__(self, "data", _readonly(data))

    @property
    def n(self) -> int:
        """Number of observations."""
        return self.data.shape[0]

    @property
    def d(self) -> int:
        """Number of components."""
        return self.data.shape[1]


@dataclass(frozen=True)
class SubsampleWindow:
    """The 1-based, inclusive range of rows k..l of a sample."""

    k: int
    l: int

    def __post_init__(self):
        """Check that the window is nonempty and starts at 1 or later."""
        if self.k < 1 or self.l < self.k:
            raise ValueError(f"Invalid window: need 1 <= k <= l, got {self.k=} and {self.l=}.")

    @property
    def m(self) -> int:
        """Number of rows in the window."""
        return self.l - self.k + 1

    def rows(self, sample: MultivariateSample) -> np.ndarray:
        """The rows of ``sample`` covered by this window.

        Raises:
            IndexError: if the window extends past the end of the sample.
        """
        if self.l > sample.n:
            raise IndexError(f"Window {self.k}..{self.l} is out of bounds for a sample with {sample.n} rows.")
        return sample.data[self.k - 1 : self.l]


@dataclass(frozen=True)
class PseudoObservations:
    """Scaled maximal ranks of a window; the input of every rank-based functional."""

    values: np.ndarray
    """An m x d matrix of rank / divisor values."""

    divisor_mode: DivisorMode = DivisorMode.SIMULATION
    """The scaling convention the values were produced with."""

    def __post_init__(self):  # noqa: D105
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 1:
            raise ValueError(f"Pseudo-observations must be a nonempty 2-D matrix, got shape {values.shape}.")
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "divisor_mode", DivisorMode(self.divisor_mode))

    @property
    def m(self) -> int:
        """Number of rows."""
        return self.values.shape[0]

    @property
    def d(self) -> int:
        """Number of components."""
        return self.values.shape[1]


def rank_block(block: np.ndarray, mode: DivisorMode = DivisorMode.SIMULATION) -> np.ndarray:
    """Scaled maximal ranks of a raw m x d block, computed column by column.

    Ties share the largest applicable rank, so the result is #{t : X_tj <= X_ij} / divisor.
    """
    m = block.shape[0]
    return rankdata(block, method="max", axis=0) / DivisorMode(mode).divisor(m)


def maximal_ranks(sample: MultivariateSample, window: SubsampleWindow) -> np.ndarray:
    """Maximal ranks of every entry within the window, relative to the window only.

    Args:
        sample: the full sample.
        window: rows k..l to rank.

    Returns:
        An integer m x d matrix whose (i, j) entry counts the window rows t with X_tj <= X_ij.

    Raises:
        IndexError: if the window does not fit inside the sample.
    """
    return rankdata(window.rows(sample), method="max", axis=0).astype(np.int64)


def pseudo_observations(
    sample: MultivariateSample,
    window: Optional[SubsampleWindow] = None,
    mode: DivisorMode = DivisorMode.SIMULATION,
) -> PseudoObservations:
    """Pseudo-observations of a window (the full sample when no window is given)."""
    window = window if window is not None else SubsampleWindow(1, sample.n)
    ranks = maximal_ranks(sample, window)
    return PseudoObservations(ranks / DivisorMode(mode).divisor(window.m), mode)


def empirical_copula_eval(pobs: PseudoObservations, u: Sequence[float] | np.ndarray) -> float:
    """The empirical copula at u: the fraction of rows lying componentwise below u."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (pobs.d,):
        raise ValueError(f"Evaluation point has shape {u.shape}, expected ({pobs.d},).")
    if np.any(u < 0) or np.any(u > 1):
        raise ValueError(f"Evaluation point must lie in [0, 1]^d, got {u}.")
    return float(np.mean(np.all(pobs.values <= u, axis=1)))


def negate_sample(sample: MultivariateSample) -> MultivariateSample:
    """The sample -X_1, ..., -X_n; ranks of tie-free columns become m + 1 - rank."""
    return MultivariateSample(-sample.data, sample.column_names)


@dataclass(frozen=True)
class _Split:
    k: int
    prefix: np.ndarray = field(repr=False)
    suffix: np.ndarray = field(repr=False)


def iter_splits(sample: MultivariateSample, mode: DivisorMode = DivisorMode.SIMULATION) -> Iterator[_Split]:
    """Yield the prefix (rows 1..k) and suffix (rows k+1..n) pseudo-observations for k = 1..n-1.

    Both windows are re-ranked from scratch, which costs O(n log n) per column and split.
    """
    data = sample.data
    for k in range(1, sample.n):
        yield _Split(k=k, prefix=rank_block(data[:k], mode), suffix=rank_block(data[k:], mode))
