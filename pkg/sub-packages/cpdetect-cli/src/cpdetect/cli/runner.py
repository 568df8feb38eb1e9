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
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple, Union

import numpy as np

from cpdetect.cli.config_models import Ell, MethodName, StatName, TestConfig
from cpdetect.cli.io import log_returns, read_csv
from cpdetect.core.asymptotic import asymptotic_pvalue
from cpdetect.core.bandwidth import BandwidthEstimate, estimate_bandwidth
from cpdetect.core.bootstrap import ReplicateEngine, SmoothingParams, bootstrap_pvalue
from cpdetect.core.multipliers import MultiplierKind
from cpdetect.core.report import TestReport
from cpdetect.core.sample import DivisorMode, MultivariateSample
from cpdetect.core.spearman import LinearStatistic, builtin_f, t_process


__all__: Sequence[str] = (
    "ALL_STATISTICS",
    "SharedWindows",
    "needs_bandwidth",
    "run_statistic",
    "run_test",
)

logger = logging.getLogger(__name__)

ALL_STATISTICS: Sequence[StatName] = ("rho1", "rho2", "rho3")


@dataclass(frozen=True)
class SharedWindows:
    """Rank-window work done once for a sample and reused by every statistic tested on it."""

    process: Optional[np.ndarray] = None
    """T_n of the sample, for the asymptotic test."""

    engines: Tuple[ReplicateEngine, ...] = ()
    """One replicate engine per statistic, for the bootstrap tests."""

    def engine_for(self, f: LinearStatistic) -> Optional[ReplicateEngine]:
        """The engine built for exactly this statistic object, if any."""
        return next((engine for engine in self.engines if engine.f is f), None)

    @classmethod
    def build(
        cls,
        sample: MultivariateSample,
        statistics: Sequence[LinearStatistic],
        *,
        method: MethodName,
        bn_exponent: float = 0.51,
        divisor: Literal["simulation", "theory"] = "simulation",
    ) -> "SharedWindows":
        """Rank every prefix and suffix window of the sample once for all ``statistics``."""
        mode = DivisorMode(divisor)
        if method == "asymptotic":
            return cls(process=t_process(sample, mode))
        smoothing = SmoothingParams(exponent=bn_exponent)
        engines = ReplicateEngine.build_many(sample, statistics, mode, smoothing)
        logger.debug(f"Built replicate engines for {[f.name for f in statistics]} in one pass.")
        return cls(engines=tuple(engines))


def needs_bandwidth(method: MethodName, serial: Literal["iid", "dependent"] = "iid") -> bool:
    """Whether the method uses ell: dependent multipliers, or the asymptotic test with the HAC variance."""
    return method == "boot-dep" or (method == "asymptotic" and serial == "dependent")


def run_statistic(
    sample: MultivariateSample,
    f: LinearStatistic,
    *,
    method: MethodName = "boot-iid",
    replicates: int = 1000,
    ell: Ell = "auto",
    bn_exponent: float = 0.51,
    divisor: Literal["simulation", "theory"] = "simulation",
    seed: int = 0,
    stream_prefix: Sequence[int] = (),
    serial: Literal["iid", "dependent"] = "iid",
    kolmogorov: Literal["limit", "finite"] = "limit",
    shared: Optional[SharedWindows] = None,
) -> TestReport:
    """Test one sample with one statistic, selecting ell from the data first when it is "auto" and needed.

    The multiplier streams are (seed, *stream_prefix, m + 1) for replicate m, so repeated calls with the same
    arguments give the same report. ``shared`` carries window work already done for this sample.
    """
    mode = DivisorMode(divisor)
    smoothing = SmoothingParams(exponent=bn_exponent)
    b_n = smoothing.resolve(sample.n)

    bandwidth: Optional[BandwidthEstimate] = None
    ell_value: Optional[int] = None
    if needs_bandwidth(method, serial):
        if ell == "auto":
            bandwidth = estimate_bandwidth(sample, f, mode, b_n)
            ell_value = bandwidth.ell_hat
            logger.info(f"Selected ell={ell_value} from {bandwidth.series_length} influence values.")
        else:
            ell_value = int(ell)

    if method == "asymptotic":
        report = asymptotic_pvalue(
            sample,
            f,
            mode,
            b_n,
            serial=serial,
            ell=ell_value,
            kolmogorov=kolmogorov,
            process=shared.process if shared else None,
        )
    else:
        kind = MultiplierKind.DEPENDENT if method == "boot-dep" else MultiplierKind.IID
        report, _ = bootstrap_pvalue(
            sample,
            f,
            mode,
            M=replicates,
            multiplier_kind=kind,
            ell=ell_value,
            seed=seed,
            stream_prefix=stream_prefix,
            smoothing=smoothing,
            engine=shared.engine_for(f) if shared else None,
        )
    if bandwidth is not None:
        report = report.model_copy(update={"bandwidth": bandwidth})
    return report


def run_test(config: TestConfig) -> Union[TestReport, List[TestReport]]:
    """Read the configured CSV file and test it.

    Returns:
        One report, or one report per statistic when ``config.stat`` is "all". All statistics are computed from a
        single ranking of the prefix and suffix windows.
    """
    sample = read_csv(config.input_path, config.has_header)
    if config.log_returns:
        sample = log_returns(sample)
    names = ALL_STATISTICS if config.stat == "all" else (config.stat,)
    statistics = [builtin_f(name, sample.d) for name in names]
    shared = None
    if len(statistics) > 1:
        shared = SharedWindows.build(
            sample, statistics, method=config.method, bn_exponent=config.bn_exponent, divisor=config.divisor
        )
    reports = [
        run_statistic(
            sample,
            f,
            method=config.method,
            replicates=config.replicates,
            ell=config.ell,
            bn_exponent=config.bn_exponent,
            divisor=config.divisor,
            seed=config.seed,
            serial=config.serial,
            kolmogorov=config.kolmogorov,
            shared=shared,
        )
        for f in statistics
    ]
    return reports if config.stat == "all" else reports[0]
