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
from typing import Optional, Sequence, Tuple

import numpy as np

from cpdetect.core.errors import DegenerateSeriesError, UnsupportedMethodError
from cpdetect.core.influence import window_influence
from cpdetect.core.multipliers import KernelShape, default_kernel
from cpdetect.core.sample import DivisorMode, MultivariateSample, pseudo_observations
from cpdetect.core.spearman import LinearStatistic, StatisticFunction


__all__: Sequence[str] = (
    "BandwidthEstimate",
    "influence_series",
    "autocovariance",
    "autocovariances",
    "autocorrelation",
    "flat_top_lambda",
    "select_L",
    "lag_window_cap",
    "bandwidth_from_autocovariances",
    "round_bandwidth",
    "estimate_bandwidth",
    "estimate_bandwidth_from_series",
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BandwidthEstimate:
    """Result of the data-driven choice of the multiplier / HAC bandwidth."""

    ell_hat: int
    """Selected bandwidth, in [1, n - 1]."""

    L_used: int
    """Lag window of the pilot estimates."""

    gamma_hat: float
    """Signed pilot estimate of the bias constant."""

    delta_hat: float
    """Pilot estimate of the variance constant; never negative."""

    series_length: int
    """Length n of the influence series."""

    cutoff: int = 0
    """Lag after which the autocorrelations were judged negligible."""


def _require_linear(f: StatisticFunction, method: str) -> LinearStatistic:
    if not isinstance(f, LinearStatistic):
        raise UnsupportedMethodError(method)
    return f


def influence_series(
    sample: MultivariateSample,
    f: StatisticFunction,
    mode: DivisorMode = DivisorMode.SIMULATION,
    b_n: Optional[float] = None,
    smooth: bool = True,
) -> np.ndarray:
    """f applied to the smoothed influence of each observation on the full-sample empirical copula.

    The series is not centered.
    """
    f = _require_linear(f, "influence_series")
    if f.d != sample.d:
        raise ValueError(f"Statistic is defined for d={f.d} but the sample has d={sample.d}.")
    b_n = b_n if b_n is not None else sample.n**-0.51
    values = pseudo_observations(sample, mode=mode).values
    return window_influence(values, b_n, f.coefficients, smooth)


def autocovariances(y: np.ndarray, max_lag: int) -> np.ndarray:
    """Sample autocovariances (divisor n) at lags 0..max_lag."""
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    if not 0 <= max_lag < n:
        raise ValueError(f"Lag must be in [0, {n - 1}] for a series of length {n}, got {max_lag=}.")
    centered = y - y.mean()
    return np.array([centered[: n - k] @ centered[k:] / n for k in range(max_lag + 1)])


def autocovariance(y: np.ndarray, k: int) -> float:
    """Sample autocovariance at lag k with divisor n."""
    return float(autocovariances(y, k)[k])


def autocorrelation(y: np.ndarray, k: int) -> float:
    """Sample autocorrelation at lag k."""
    tau = autocovariances(y, k)
    if tau[0] <= 0.0:
        raise DegenerateSeriesError(len(y))
    return float(tau[k] / tau[0])


def flat_top_lambda(x: float | np.ndarray) -> float | np.ndarray:
    """Trapezoidal flat-top lag window: 1 on |x| <= 1/2, linear down to 0 at |x| = 1."""
    value = np.clip(2.0 * (1.0 - np.abs(np.asarray(x, dtype=np.float64))), 0.0, 1.0)
    return float(value) if value.ndim == 0 else value


def _significance_run(n: int) -> int:
    return max(5, math.ceil(math.sqrt(math.log10(n))))


def lag_window_cap(n: int) -> int:
    """Largest lag window the selection rule will return for a series of length n."""
    return math.ceil(math.sqrt(n)) + _significance_run(n)


def select_L(y: np.ndarray) -> int:
    """Smallest lag k after which K_n consecutive autocorrelations are all insignificant.

    Autocorrelations count as insignificant below 2 sqrt(log10(n) / n); K_n = max(5, ceil(sqrt(log10 n))).
    If no such run exists below the cap ceil(sqrt(n)) + K_n, the cap is returned. This is the empirical rule of
    Politis and White, "Automatic block-length selection for the dependent bootstrap", Econometric Reviews 23 (2004).
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    if n < 10:
        raise ValueError(f"Lag selection needs a series of length >= 10, got {n}.")
    run = _significance_run(n)
    cap = lag_window_cap(n)
    max_lag = min(cap + run, n - 1)
    tau = autocovariances(y, max_lag)
    if tau[0] <= 0.0:
        raise DegenerateSeriesError(n)
    insignificant = np.abs(tau / tau[0]) < 2.0 * math.sqrt(math.log10(n) / n)
    for k in range(cap + 1):
        window = insignificant[k + 1 : min(k + run, max_lag) + 1]
        if window.size and np.all(window):
            logger.debug(f"Autocorrelations negligible after lag {k} (n={n}, run={run}).")
            return k
    return cap


def bandwidth_from_autocovariances(
    tau: np.ndarray, L: int, n: int, kernel: Optional[KernelShape] = None
) -> Tuple[float, float, float]:
    """Pilot estimates and the unrounded MSE-optimal bandwidth from autocovariances at lags 0..L.

    Args:
        tau: autocovariances at lags 0..L (at least).
        L: lag window; 0 keeps only lag 0.
        n: series length.
        kernel: supplies phi''(0) and the integral of phi^2.

    Returns:
        (ell, gamma_hat, delta_hat) where ell = (4 gamma^2 / delta)^(1/5) n^(1/5), or 1 when delta is 0.
    """
    kernel = kernel or default_kernel()
    tau = np.asarray(tau, dtype=np.float64)
    if L > 0:
        lags = np.arange(1, L + 1)
        weights = flat_top_lambda(lags / L)
        gamma_sum = 2.0 * np.sum(weights * lags**2 * tau[1 : L + 1])
        long_run = tau[0] + 2.0 * np.sum(weights * tau[1 : L + 1])
    else:
        gamma_sum = 0.0
        long_run = tau[0]
    gamma_hat = kernel.phi_second_deriv_at_0 / 2.0 * float(gamma_sum)
    delta_hat = 2.0 * float(long_run) ** 2 * kernel.integral_phi_squared
    if delta_hat == 0.0:
        return 1.0, gamma_hat, delta_hat
    ell = (4.0 * gamma_hat**2 / delta_hat) ** 0.2 * n**0.2
    return ell, gamma_hat, delta_hat


def round_bandwidth(ell: float, n: int) -> int:
    """Round half up and clamp to [1, n - 1]."""
    return int(min(max(math.floor(ell + 0.5), 1), max(n - 1, 1)))


def estimate_bandwidth_from_series(y: np.ndarray, kernel: Optional[KernelShape] = None) -> BandwidthEstimate:
    """Data-driven bandwidth for an already computed influence series.

    The pilot lag window is L = min(2 m, ceil(sqrt(n)) + K_n) for the autocorrelation cutoff m of ``select_L``, the
    choice recommended by Politis and White (2004) for flat-top pilot estimates. A zero cutoff keeps lag 0 only.
    """
    y = np.asarray(y, dtype=np.float64)
    n = y.size
    try:
        cutoff = select_L(y)
    except DegenerateSeriesError:
        logger.warning(f"Influence series of length {n} is constant; using bandwidth 1.")
        return BandwidthEstimate(ell_hat=1, L_used=0, gamma_hat=0.0, delta_hat=0.0, series_length=n)
    L = min(2 * cutoff, lag_window_cap(n), n - 1)
    tau = autocovariances(y, L)
    ell, gamma_hat, delta_hat = bandwidth_from_autocovariances(tau, L, n, kernel)
    estimate = BandwidthEstimate(
        ell_hat=round_bandwidth(ell, n),
        L_used=L,
        gamma_hat=gamma_hat,
        delta_hat=delta_hat,
        series_length=n,
        cutoff=cutoff,
    )
    logger.debug(f"{estimate=}")
    return estimate


def estimate_bandwidth(
    sample: MultivariateSample,
    f: StatisticFunction,
    mode: DivisorMode = DivisorMode.SIMULATION,
    b_n: Optional[float] = None,
    kernel: Optional[KernelShape] = None,
) -> BandwidthEstimate:
    """MSE-optimal multiplier bandwidth estimated from the full-sample influence series of f."""
    f = _require_linear(f, "estimate_bandwidth")
    return estimate_bandwidth_from_series(influence_series(sample, f, mode, b_n), kernel)
