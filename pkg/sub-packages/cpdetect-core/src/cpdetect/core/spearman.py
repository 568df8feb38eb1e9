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

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Literal, Sequence, Union

import numpy as np

from cpdetect.core.sample import DivisorMode, MultivariateSample, PseudoObservations, iter_splits


__all__: Sequence[str] = (
    "LinearStatistic",
    "StatisticFunction",
    "StatisticTrajectory",
    "subset_index",
    "subset_label",
    "subset_sizes",
    "subset_products",
    "phi_A",
    "phi_vector",
    "rho1",
    "rho2",
    "rho3",
    "t_process",
    "statistic",
    "trajectory_from_process",
    "builtin_f",
)

BuiltinName = Literal["f1", "f2", "f3", "rho1", "rho2", "rho3"]

_BUILTIN_ALIASES = {"rho1": "f1", "rho2": "f2", "rho3": "f3", "f1": "f1", "f2": "f2", "f3": "f3"}


def subset_index(components: Iterable[int]) -> int:
    """Bitmask of a nonempty set of 1-based component indices, e.g. {1, 3} -> 0b101."""
    mask = 0
    for j in components:
        if j < 1:
            raise ValueError(f"Component indices are 1-based, got {j}.")
        mask |= 1 << (j - 1)
    if mask == 0:
        raise ValueError("A subset index must be nonempty.")
    return mask


def subset_label(mask: int) -> str:
    """Human readable form of a subset bitmask, e.g. 0b101 -> '{1,3}'."""
    members = [str(j + 1) for j in range(mask.bit_length()) if mask >> j & 1]
    return "{" + ",".join(members) + "}"


def subset_sizes(d: int) -> np.ndarray:
    """|A| for every nonempty subset, in canonical (increasing bitmask) order."""
    return np.array([bin(mask).count("1") for mask in range(1, 2**d)], dtype=np.int64)


def subset_products(values: np.ndarray) -> np.ndarray:
    """Products prod_{l in A} (1 - u_l) for every row and every subset A, including the empty one.

    Args:
        values: an m x d matrix of pseudo-observations.

    Returns:
        An m x 2^d matrix; column ``mask`` holds the product over the components set in ``mask``
        (column 0 is all ones).
    """
    m, d = values.shape
    complement = 1.0 - values
    products = np.empty((m, 2**d), dtype=np.float64)
    products[:, 0] = 1.0
    for mask in range(1, 2**d):
        low = mask & -mask
        products[:, mask] = products[:, mask ^ low] * complement[:, low.bit_length() - 1]
    return products


def phi_vector(values: np.ndarray) -> np.ndarray:
    """phi_A of the empirical copula for every nonempty A, as a SubsetVector."""
    return subset_products(values)[:, 1:].mean(axis=0)


def _check_mask(mask: int, d: int) -> None:
    if not 1 <= mask < 2**d:
        raise ValueError(f"Subset bitmask must be nonempty and within {d} components, got {mask=}.")


def phi_A(pobs: PseudoObservations, A: int) -> float:
    """Integral of the empirical copula over the coordinates in A, the others held at 1.

    Integrating termwise gives the closed form (1/m) sum_i prod_{j in A} (1 - U_ij).
    """
    _check_mask(A, pobs.d)
    columns = [j for j in range(pobs.d) if A >> j & 1]
    return float(np.mean(np.prod(1.0 - pobs.values[:, columns], axis=1)))


def _rho_scale(d: int) -> float:
    if d < 2:
        raise ValueError(f"Spearman's rho needs at least two components, got {d=}.")
    return (d + 1) / (2**d - d - 1)


def rho1(pobs: PseudoObservations) -> float:
    """Multivariate Spearman's rho based on the integral of the empirical copula."""
    d = pobs.d
    scale = _rho_scale(d)
    return scale * (2**d * phi_A(pobs, 2**d - 1) - 1.0)


def rho2(pobs: PseudoObservations) -> float:
    """Multivariate Spearman's rho of the empirical survival copula."""
    d = pobs.d
    scale = _rho_scale(d)
    return scale * (2**d * float(np.mean(np.prod(pobs.values, axis=1))) - 1.0)


def rho3(pobs: PseudoObservations) -> float:
    """Average of the bivariate rho1 over all pairs of components."""
    _rho_scale(pobs.d)
    pairs = itertools.combinations(range(pobs.d), 2)
    return float(np.mean([rho1(PseudoObservations(pobs.values[:, pair], pobs.divisor_mode)) for pair in pairs]))


@dataclass(frozen=True)
class LinearStatistic:
    """A linear map f(x) = a^T x on SubsetVectors."""

    coefficients: np.ndarray
    """One coefficient per nonempty subset, canonical order."""

    name: str = "linear"
    """Label used in reports."""

    def __post_init__(self):  # noqa: D105
        coefficients = np.array(self.coefficients, dtype=np.float64, copy=True)
        if coefficients.ndim != 1 or not math.log2(coefficients.size + 1).is_integer() or coefficients.size < 3:
            raise ValueError(f"Coefficients must have length 2^d - 1 with d >= 2, got {coefficients.size}.")
        if not np.all(np.isfinite(coefficients)):
            raise ValueError("Coefficients must be finite.")
        coefficients.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def d(self) -> int:
        """Dimension of the samples this statistic applies to."""
        return int(math.log2(self.coefficients.size + 1))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Apply the map to the last axis of ``x``."""
        return np.asarray(x) @ self.coefficients

    def scaled(self, c: float) -> "LinearStatistic":
        """The map c * f."""
        return LinearStatistic(c * self.coefficients, f"{c:g}*{self.name}")


StatisticFunction = Union[LinearStatistic, Callable[[np.ndarray], float]]
"""Either a linear map or any continuous function of a SubsetVector."""


def builtin_f(which: BuiltinName, d: int) -> LinearStatistic:
    """The linear maps behind the three Spearman's rho statistics.

    Args:
        which: ``f1``/``rho1`` (integral of the copula), ``f2``/``rho2`` (survival copula) or ``f3``/``rho3``
            (average of pairwise rho).
        d: dimension of the sample.

    Returns:
        The corresponding LinearStatistic, named ``rho1``, ``rho2`` or ``rho3``.
    """
    if which not in _BUILTIN_ALIASES:
        raise ValueError(f"Unknown statistic {which!r}; expected one of {sorted(_BUILTIN_ALIASES)}.")
    scale = _rho_scale(d)
    sizes = subset_sizes(d)
    kind = _BUILTIN_ALIASES[which]
    coefficients = np.zeros(2**d - 1)
    if kind == "f1":
        coefficients[-1] = scale * 2**d
    elif kind == "f2":
        coefficients[:] = scale * 2**d * (-1.0) ** sizes
    else:
        coefficients[sizes == 2] = 24.0 / (d * (d - 1))
    return LinearStatistic(coefficients, "rho" + kind[1])


@dataclass(frozen=True)
class StatisticTrajectory:
    """|f(T_n(k/n))| for k = 1..n-1 together with its maximum."""

    values: np.ndarray
    """Entry k-1 holds the value at split k."""

    argmax_k: int
    """Smallest split attaining the maximum."""

    max_value: float
    """The maximally selected statistic S_{n,f}."""


def t_process(sample: MultivariateSample, mode: DivisorMode = DivisorMode.SIMULATION) -> np.ndarray:
    """The subset-indexed process T_n at every split point.

    Row k-1 holds sqrt(n) (k/n) ((n-k)/n) (phi_A(C_{1:k}) - phi_A(C_{k+1:n})) for all nonempty A.

    Returns:
        An (n-1) x (2^d-1) matrix.
    """
    n = sample.n
    process = np.empty((n - 1, 2**sample.d - 1))
    for split in iter_splits(sample, mode):
        k = split.k
        weight = math.sqrt(n) * (k / n) * ((n - k) / n)
        process[k - 1] = weight * (phi_vector(split.prefix) - phi_vector(split.suffix))
    return process


def trajectory_from_process(process: np.ndarray, f: StatisticFunction) -> StatisticTrajectory:
    """Apply f row by row to a precomputed T_n and take the maximum of the absolute values."""
    if isinstance(f, LinearStatistic):
        if process.shape[1] != f.coefficients.size:
            raise ValueError(
                f"Statistic has {f.coefficients.size} coefficients but the process has {process.shape[1]} subsets."
            )
        values = np.abs(f(process))
    else:
        values = np.abs(np.array([float(f(row)) for row in process]))
    argmax = int(np.argmax(values))
    return StatisticTrajectory(values=values, argmax_k=argmax + 1, max_value=float(values[argmax]))


def statistic(
    sample: MultivariateSample, f: StatisticFunction, mode: DivisorMode = DivisorMode.SIMULATION
) -> StatisticTrajectory:
    """The maximally selected change-point statistic S_{n,f} = max_k |f(T_n(k/n))|."""
    if isinstance(f, LinearStatistic) and f.d != sample.d:
        raise ValueError(f"Statistic is defined for d={f.d} but the sample has d={sample.d}.")
    return trajectory_from_process(t_process(sample, mode), f)
