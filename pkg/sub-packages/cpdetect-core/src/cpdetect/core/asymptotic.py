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
import warnings
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np
from scipy import stats

from cpdetect.core.bandwidth import influence_series
from cpdetect.core.errors import DegenerateVarianceError, UnsupportedMethodError, VarianceClampedWarning
from cpdetect.core.multipliers import KernelShape, default_kernel
from cpdetect.core.report import TestReport
from cpdetect.core.sample import DivisorMode, MultivariateSample
from cpdetect.core.spearman import LinearStatistic, StatisticFunction, statistic, trajectory_from_process


__all__: Sequence[str] = (
    "VarianceEstimate",
    "centered_influence_series",
    "hac_variance",
    "variance_iid",
    "variance_hac",
    "kolmogorov_sf",
    "asymptotic_pvalue",
)

logger = logging.getLogger(__name__)

DEGENERATE_VARIANCE = 1e-12
"""Studentizing variances at or below this value are treated as zero."""


@dataclass(frozen=True)
class VarianceEstimate:
    """Estimate of the asymptotic variance of f applied to the limiting process."""

    sigma2: float
    form: Literal["iid", "hac"]
    b_n: float
    ell: Optional[int] = None


def centered_influence_series(
    sample: MultivariateSample,
    f: StatisticFunction,
    mode: DivisorMode = DivisorMode.SIMULATION,
    b_n: Optional[float] = None,
    smooth: bool = True,
) -> np.ndarray:
    """y_i = f(I(U_i) - mean I) for the full-sample influences of each observation."""
    if not isinstance(f, LinearStatistic):
        raise UnsupportedMethodError("the asymptotic variance")
    y = influence_series(sample, f, mode, b_n, smooth)
    return y - y.mean()


def hac_variance(y: np.ndarray, ell: int, kernel: Optional[KernelShape] = None) -> float:
    """(1/n) sum_{i,j} phi((i-j)/ell) y_i y_j, summed lag by lag over |h| < ell."""
    if ell < 1:
        raise ValueError(f"HAC bandwidth must be a positive integer, got {ell=}.")
    kernel = kernel or default_kernel()
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    total = float(y @ y) / n
    for h in range(1, min(ell, n)):
        total += 2.0 * kernel.phi(h / ell) * float(y[: n - h] @ y[h:]) / n
    return total


def variance_iid(
    sample: MultivariateSample,
    f: StatisticFunction,
    mode: DivisorMode = DivisorMode.SIMULATION,
    b_n: Optional[float] = None,
    smooth: bool = True,
) -> VarianceEstimate:
    """Variance estimate for serially independent observations: the mean of y_i^2."""
    b_n = b_n if b_n is not None else sample.n**-0.51
    y = centered_influence_series(sample, f, mode, b_n, smooth)
    return VarianceEstimate(sigma2=float(np.mean(y**2)), form="iid", b_n=b_n)


def variance_hac(
    sample: MultivariateSample,
    f: StatisticFunction,
    ell: int,
    mode: DivisorMode = DivisorMode.SIMULATION,
    b_n: Optional[float] = None,
    kernel: Optional[KernelShape] = None,
    smooth: bool = True,
) -> VarianceEstimate:
    """HAC variance estimate with the multiplier autocovariance phi as lag weights.

    Negative estimates are clamped to 0 with a VarianceClampedWarning.
    """
    b_n = b_n if b_n is not None else sample.n**-0.51
    y = centered_influence_series(sample, f, mode, b_n, smooth)
    sigma2 = hac_variance(y, ell, kernel)
    if sigma2 < 0.0:
        warnings.warn(
            f"HAC variance {sigma2:.3g} is negative and was clamped to 0.", VarianceClampedWarning, stacklevel=2
        )
        sigma2 = 0.0
    return VarianceEstimate(sigma2=sigma2, form="hac", b_n=b_n, ell=int(ell))


def kolmogorov_sf(x: float, n: Optional[int] = None) -> float:
    """P(sup |U| > x) for a Brownian bridge U, or the exact law of sqrt(n) D_n when n is given.

    The limit uses 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2) for x >= 1, and the equivalent theta-function form
    1 - sqrt(2 pi) / x sum_{k>=1} exp(-(2k-1)^2 pi^2 / (8 x^2)) below 1, where the alternating series converges
    slowly. Terms are summed until they drop below 1e-16.
    """
    if x < 0 or math.isnan(x):
        raise ValueError(f"The Kolmogorov survival function is defined for x >= 0, got {x=}.")
    if n is not None:
        if n < 1:
            raise ValueError(f"Sample size must be positive, got {n=}.")
        return float(stats.kstwo.sf(x / math.sqrt(n), n))
    if x == 0.0:
        return 1.0
    total, k = 0.0, 1
    if x >= 1.0:
        while True:
            term = math.exp(-2.0 * k * k * x * x)
            total += term if k % 2 else -term
            if term < 1e-16:
                break
            k += 1
        return min(max(2.0 * total, 0.0), 1.0)
    while True:
        term = math.exp(-((2 * k - 1) ** 2) * math.pi**2 / (8.0 * x * x))
        total += term
        if term < 1e-16:
            break
        k += 1
    return min(max(1.0 - math.sqrt(2.0 * math.pi) / x * total, 0.0), 1.0)


def asymptotic_pvalue(
    sample: MultivariateSample,
    f: StatisticFunction,
    mode: DivisorMode = DivisorMode.SIMULATION,
    b_n: Optional[float] = None,
    serial: Literal["iid", "dependent"] = "iid",
    ell: Optional[int] = None,
    kernel: Optional[KernelShape] = None,
    kolmogorov: Literal["limit", "finite"] = "limit",
    process: Optional[np.ndarray] = None,
) -> TestReport:
    """p-value of the studentized statistic S / sigma from the Kolmogorov distribution.

    Args:
        sample: observations.
        f: a linear statistic.
        mode: rank divisor convention.
        b_n: smoothing bandwidth; n^-0.51 by default.
        serial: ``iid`` for the mean-of-squares variance, ``dependent`` for the HAC form.
        ell: HAC bandwidth, required when ``serial`` is ``dependent``.
        kernel: kernel shape supplying the HAC weights.
        kolmogorov: ``limit`` for the Brownian bridge law, ``finite`` for the exact n-sample KS law.
        process: precomputed ``t_process`` of the sample in the same divisor mode, shared between statistics.

    Returns:
        The test report.

    Raises:
        UnsupportedMethodError: if f is not linear.
        DegenerateVarianceError: if the variance estimate is at most 1e-12.
    """
    if not isinstance(f, LinearStatistic):
        raise UnsupportedMethodError("asymptotic_pvalue")
    b_n = b_n if b_n is not None else sample.n**-0.51
    if serial == "dependent":
        if ell is None or ell < 1:
            raise ValueError(f"The HAC variance needs a bandwidth ell >= 1, got {ell=}.")
        variance = variance_hac(sample, f, ell, mode, b_n, kernel)
    elif serial == "iid":
        variance = variance_iid(sample, f, mode, b_n)
    else:
        raise ValueError(f"Unknown serial form {serial!r}; expected 'iid' or 'dependent'.")
    if variance.sigma2 <= DEGENERATE_VARIANCE:
        raise DegenerateVarianceError(variance.sigma2, variance.form)
    if process is None:
        trajectory = statistic(sample, f, mode)
    elif process.shape != (sample.n - 1, 2**sample.d - 1):
        raise ValueError(f"Process has shape {process.shape}, expected ({sample.n - 1}, {2**sample.d - 1}).")
    else:
        trajectory = trajectory_from_process(process, f)
    studentized = trajectory.max_value / math.sqrt(variance.sigma2)
    p_value = kolmogorov_sf(studentized, sample.n if kolmogorov == "finite" else None)
    logger.info(f"{f.name}: S={trajectory.max_value:.6g}, sigma2={variance.sigma2:.6g}, asymptotic p={p_value:.4f}.")
    return TestReport(
        statistic_name=f.name,
        statistic_value=trajectory.max_value,
        p_value=p_value,
        method="asymptotic",
        changepoint_index=trajectory.argmax_k,
        b_n=b_n,
        n=sample.n,
        d=sample.d,
        divisor=DivisorMode(mode).value,
        ell_used=variance.ell,
        studentized=studentized,
        variance=variance.sigma2,
        variance_form=variance.form,
        kolmogorov=kolmogorov,
        column_names=list(sample.column_names) if sample.column_names else None,
    )
