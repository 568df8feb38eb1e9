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

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from cpdetect.core.influence import window_influence
from cpdetect.core.multipliers import KernelShape, MultiplierKind, MultiplierSequence, multiplier_matrix
from cpdetect.core.report import TestReport
from cpdetect.core.sample import DivisorMode, MultivariateSample, iter_splits
from cpdetect.core.spearman import (
    LinearStatistic,
    StatisticFunction,
    StatisticTrajectory,
    phi_vector,
    trajectory_from_process,
)


__all__: Sequence[str] = (
    "SmoothingParams",
    "ReplicateSet",
    "ReplicateEngine",
    "replicate_statistic",
    "bootstrap_pvalue",
    "statistic_name",
)

logger = logging.getLogger(__name__)

_REPLICATE_CHUNK = 256


@dataclass(frozen=True)
class SmoothingParams:
    """Bandwidth of the ramp that replaces indicators in the influence functions."""

    exponent: float = 0.51
    """b_n = n^(-exponent) unless b_n is given explicitly."""

    b_n: Optional[float] = None
    """Explicit bandwidth, overriding the exponent."""

    per_window: bool = False
    """Use m^(-exponent) for a window of size m instead of the global b_n."""

    def __post_init__(self):  # noqa: D105
        if self.b_n is not None and not 0.0 < self.b_n < 1.0:
            raise ValueError(f"Smoothing bandwidth must lie in (0, 1), got {self.b_n=}.")
        if not self.exponent > 0.0:
            raise ValueError(f"Smoothing exponent must be positive, got {self.exponent=}.")

    def resolve(self, n: int) -> float:
        """The global bandwidth for a sample of size n."""
        return self.b_n if self.b_n is not None else float(n) ** -self.exponent

    def for_window(self, m: int, n: int) -> float:
        """The bandwidth used inside a window of m rows of a sample of size n."""
        if self.per_window and self.b_n is None:
            return float(m) ** -self.exponent
        return self.resolve(n)


@dataclass(frozen=True)
class ReplicateSet:
    """Multiplier replicates of a change-point statistic."""

    statistics: np.ndarray
    """The M replicate values, all non-negative."""

    multiplier_kind: MultiplierKind
    seed: int
    ell: Optional[int] = None

    @property
    def M(self) -> int:
        """Number of replicates."""
        return self.statistics.size


def statistic_name(f: StatisticFunction) -> str:
    """Report label of a statistic."""
    if isinstance(f, LinearStatistic):
        return f.name
    return getattr(f, "__name__", "custom")


@dataclass(frozen=True)
class ReplicateEngine:
    """Everything about a sample that multiplier replicates need, computed once.

    For a split k the replicate of f(T(k/n)) is linear in the multipliers: with y the f-projected influences of
    a window, centered within that window, it equals n^(-1/2) times
    ((n-k)/n) sum_{i<=k} xi_i y_i^{1:k} - (k/n) sum_{i>k} xi_i y_i^{k+1:n}.
    ``projection`` stores those coefficients so that a batch of replicates is a single matrix product.
    """

    f: StatisticFunction
    process: np.ndarray
    """T_n at splits 1..n-1, (n-1) x (2^d-1)."""

    projection: np.ndarray
    """(n-1) x n for linear f; (n-1) x n x (2^d-1) per subset otherwise."""

    b_n: float

    @property
    def n(self) -> int:  # noqa: D102
        return self.projection.shape[1]

    @classmethod
    def build(
        cls,
        sample: MultivariateSample,
        f: StatisticFunction,
        mode: DivisorMode = DivisorMode.SIMULATION,
        smoothing: Optional[SmoothingParams] = None,
        smooth: bool = True,
    ) -> "ReplicateEngine":
        """Rank every prefix and suffix window once and precompute the replicate coefficients."""
        return cls.build_many(sample, [f], mode, smoothing, smooth)[0]

    @classmethod
    def build_many(
        cls,
        sample: MultivariateSample,
        fs: Sequence[StatisticFunction],
        mode: DivisorMode = DivisorMode.SIMULATION,
        smoothing: Optional[SmoothingParams] = None,
        smooth: bool = True,
    ) -> List["ReplicateEngine"]:
        """One engine per statistic, sharing a single pass over the ranked prefix and suffix windows.

        The engines share the T_n process; a single linear statistic gets its influences projected while they are
        summed, several statistics get them projected from the full subset matrices.
        """
        if not fs:
            raise ValueError("Need at least one statistic.")
        smoothing = smoothing or SmoothingParams()
        n, d = sample.n, sample.d
        linear = [isinstance(f, LinearStatistic) for f in fs]
        for f, is_linear in zip(fs, linear):
            if is_linear and f.d != d:
                raise ValueError(f"Statistic is defined for d={f.d} but the sample has d={d}.")
        fused = fs[0].coefficients if len(fs) == 1 and linear[0] else None
        process = np.empty((n - 1, 2**d - 1))
        projections = [np.zeros((n - 1, n) if is_linear else (n - 1, n, 2**d - 1)) for is_linear in linear]
        for split in iter_splits(sample, mode):
            k = split.k
            weight = math.sqrt(n) * (k / n) * ((n - k) / n)
            process[k - 1] = weight * (phi_vector(split.prefix) - phi_vector(split.suffix))
            prefix = window_influence(split.prefix, smoothing.for_window(k, n), fused, smooth)
            suffix = window_influence(split.suffix, smoothing.for_window(n - k, n), fused, smooth)
            prefix = ((n - k) / n) * (prefix - prefix.mean(axis=0))
            suffix = -(k / n) * (suffix - suffix.mean(axis=0))
            for f, is_linear, projection in zip(fs, linear, projections):
                if is_linear and fused is None:
                    projection[k - 1, :k] = prefix @ f.coefficients
                    projection[k - 1, k:] = suffix @ f.coefficients
                else:
                    projection[k - 1, :k] = prefix
                    projection[k - 1, k:] = suffix
        process.setflags(write=False)
        logger.debug(f"Precomputed replicate coefficients for {n=}, {d=}, {len(fs)} statistic(s).")
        b_n = smoothing.resolve(n)
        return [cls(f=f, process=process, projection=projection, b_n=b_n) for f, projection in zip(fs, projections)]

    @property
    def trajectory(self) -> StatisticTrajectory:
        """The observed statistic."""
        return trajectory_from_process(self.process, self.f)

    def replicates(self, multipliers: np.ndarray) -> np.ndarray:
        """Replicate statistics for a count x n matrix of multipliers (or a single length-n vector)."""
        xi = np.atleast_2d(np.asarray(multipliers, dtype=np.float64))
        if xi.shape[1] != self.n:
            raise ValueError(f"Multipliers have length {xi.shape[1]} but the sample has n={self.n}.")
        scale = 1.0 / math.sqrt(self.n)
        out = np.empty(xi.shape[0])
        for start in range(0, xi.shape[0], _REPLICATE_CHUNK):
            chunk = xi[start : start + _REPLICATE_CHUNK]
            if isinstance(self.f, LinearStatistic):
                values = np.abs(chunk @ self.projection.T) * scale
            else:
                process = np.einsum("kia,mi->mka", self.projection, chunk) * scale
                values = np.abs(np.apply_along_axis(lambda row: float(self.f(row)), 2, process))
            out[start : start + chunk.shape[0]] = values.max(axis=1)
        return out


def replicate_statistic(
    sample: MultivariateSample,
    f: StatisticFunction,
    xi: MultiplierSequence | np.ndarray,
    mode: DivisorMode = DivisorMode.SIMULATION,
    b_n: Optional[float] = None,
    smooth: bool = True,
) -> float:
    """One multiplier replicate max_k |f(T~(k/n))| for the given multipliers."""
    values = xi.xi if isinstance(xi, MultiplierSequence) else np.asarray(xi, dtype=np.float64)
    if values.shape != (sample.n,):
        raise ValueError(f"Multipliers have shape {values.shape} but the sample has n={sample.n}.")
    engine = ReplicateEngine.build(sample, f, mode, SmoothingParams(b_n=b_n), smooth)
    return float(engine.replicates(values)[0])


def bootstrap_pvalue(
    sample: MultivariateSample,
    f: StatisticFunction,
    mode: DivisorMode = DivisorMode.SIMULATION,
    M: int = 1000,
    multiplier_kind: MultiplierKind = MultiplierKind.IID,
    ell: Optional[int] = None,
    b_n: Optional[float] = None,
    seed: int = 0,
    stream_prefix: Sequence[int] = (),
    smoothing: Optional[SmoothingParams] = None,
    kernel: Optional[KernelShape] = None,
    engine: Optional[ReplicateEngine] = None,
) -> Tuple[TestReport, ReplicateSet]:
    """Multiplier bootstrap p-value: the fraction of replicates at least as large as the statistic.

    Args:
        sample: observations.
        f: statistic.
        mode: rank divisor convention.
        M: number of replicates.
        multiplier_kind: IID or DEPENDENT multipliers.
        ell: bandwidth of dependent multipliers; required for DEPENDENT.
        b_n: smoothing bandwidth; n^-0.51 by default. Ignored if ``smoothing`` is given.
        seed: seed of the multiplier streams; replicate m uses stream (seed, *stream_prefix, m + 1).
        stream_prefix: extra stream keys, e.g. experiment cell and repetition ids.
        smoothing: full smoothing configuration.
        kernel: kernel shape of dependent multipliers.
        engine: precomputed engine of this sample and f, e.g. one of ``ReplicateEngine.build_many``; its smoothing
            replaces ``b_n`` and ``smoothing``.

    Returns:
        The report and the replicates.
    """
    if M < 1:
        raise ValueError(f"Need at least one replicate, got {M=}.")
    multiplier_kind = MultiplierKind(multiplier_kind)
    if multiplier_kind is MultiplierKind.DEPENDENT and (ell is None or ell < 1):
        raise ValueError(f"Dependent multipliers need a bandwidth ell >= 1, got {ell=}.")
    if engine is None:
        engine = ReplicateEngine.build(sample, f, mode, smoothing or SmoothingParams(b_n=b_n))
    elif engine.f is not f or engine.n != sample.n:
        raise ValueError(f"The replicate engine was built for another statistic or sample ({engine.n=}, {sample.n=}).")
    trajectory = engine.trajectory
    ell_used = int(ell) if multiplier_kind is MultiplierKind.DEPENDENT else None
    xi = multiplier_matrix(sample.n, M, multiplier_kind, seed, stream_prefix, ell_used, kernel)
    replicates = engine.replicates(xi)
    p_value = float(np.mean(replicates >= trajectory.max_value))
    logger.info(
        f"{statistic_name(f)}: S={trajectory.max_value:.6g}, bootstrap p={p_value:.4f} "
        f"({M=}, {multiplier_kind.value})."
    )
    report = TestReport(
        statistic_name=statistic_name(f),
        statistic_value=trajectory.max_value,
        p_value=p_value,
        method="boot-dep" if multiplier_kind is MultiplierKind.DEPENDENT else "boot-iid",
        changepoint_index=trajectory.argmax_k,
        b_n=engine.b_n,
        n=sample.n,
        d=sample.d,
        divisor=DivisorMode(mode).value,
        ell_used=ell_used,
        M=M,
        seed=seed,
        column_names=list(sample.column_names) if sample.column_names else None,
    )
    return report, ReplicateSet(statistics=replicates, multiplier_kind=multiplier_kind, seed=seed, ell=ell_used)
