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
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import signal, stats

from cpdetect.core.errors import NonStationaryGarchWarning
from cpdetect.core.sample import MultivariateSample
from cpdetect.sim.copulas import CopulaSpec, sample_copula


__all__: Sequence[str] = (
    "AR1Filter",
    "GarchFilter",
    "DgpSpec",
    "default_garch_params",
    "change_index",
    "innovations",
    "generate",
)

logger = logging.getLogger(__name__)

GarchParams = Tuple[float, float, float]
"""(omega, beta, alpha) of one component."""


def default_garch_params() -> Tuple[GarchParams, GarchParams]:
    """Per-component (omega, beta, alpha) for bivariate GARCH(1,1)-like series, fitted to S&P 500 and DAX returns."""
    return (0.012, 0.919, 0.072), (0.037, 0.868, 0.115)


@dataclass(frozen=True)
class AR1Filter:
    """X_i = gamma X_{i-1} + eps_i, componentwise."""

    gamma: float = 0.0

    def __post_init__(self):  # noqa: D105
        if not -1.0 < self.gamma < 1.0:
            raise ValueError(f"The AR(1) coefficient must lie in (-1, 1), got {self.gamma=}.")

    def apply(self, eps: np.ndarray) -> np.ndarray:
        """Run the recursion from X_0 = eps_0 down the rows of ``eps``."""
        if self.gamma == 0.0:
            return eps.copy()
        return signal.lfilter([1.0], [1.0, -self.gamma], eps, axis=0)


@dataclass(frozen=True)
class GarchFilter:
    """sigma_i^2 = omega + beta sigma_{i-1}^2 + alpha eps_{i-1}^2 and X_i = sigma_i eps_i, componentwise.

    ``params`` holds one (omega, beta, alpha) triple per component; the default is the bivariate
    default_garch_params().
    """

    params: Tuple[GarchParams, ...] = field(default_factory=default_garch_params)

    def __post_init__(self):  # noqa: D105
        params = tuple(tuple(float(x) for x in triple) for triple in self.params)
        for omega, beta, alpha in params:
            if omega <= 0 or beta < 0 or alpha < 0:
                raise ValueError(f"GARCH parameters need omega > 0 and beta, alpha >= 0, got {(omega, beta, alpha)}.")
            if beta + alpha >= 1:
                warnings.warn(
                    f"GARCH parameters {(omega, beta, alpha)} have beta + alpha >= 1 and are not stationary.",
                    NonStationaryGarchWarning,
                    stacklevel=3,
                )
        object.__setattr__(self, "params", params)

    @property
    def d(self) -> int:
        """Number of components the parameters cover."""
        return len(self.params)

    def apply(self, eps: np.ndarray) -> np.ndarray:
        """Run the recursion with sigma^2 of the first row at the stationary value omega / (1 - beta - alpha)."""
        if eps.shape[1] != self.d:
            raise ValueError(f"GARCH parameters cover {self.d} components but the innovations have {eps.shape[1]}.")
        omega, beta, alpha = (np.array(column) for column in zip(*self.params))
        persistence = beta + alpha
        # omega itself when there is no stationary variance
        sigma2 = omega / np.where(persistence < 1.0, 1.0 - persistence, 1.0)
        out = np.empty_like(eps)
        out[0] = np.sqrt(sigma2) * eps[0]
        for i in range(1, eps.shape[0]):
            sigma2 = omega + beta * sigma2 + alpha * eps[i - 1] ** 2
            out[i] = np.sqrt(sigma2) * eps[i]
        return out


Filter = Union[AR1Filter, GarchFilter]


@dataclass(frozen=True)
class DgpSpec:
    """A d-dimensional series whose innovation copula switches from c1 to c2 after row floor(n t)."""

    n: int
    c1: CopulaSpec
    c2: Optional[CopulaSpec] = None
    """Copula after the change; None means c1 throughout."""

    t: Optional[float] = None
    """Relative change location in (0, 1); None means no change."""

    filter: Filter = field(default_factory=AR1Filter)
    burn_in: int = 100
    """Rows -burn_in..0 are generated and discarded."""

    def __post_init__(self):  # noqa: D105
        if self.n < 2:
            raise ValueError(f"Need n >= 2 observations, got {self.n=}.")
        if self.burn_in < 0:
            raise ValueError(f"Burn-in must be non-negative, got {self.burn_in=}.")
        if self.c2 is not None and self.c2.d != self.c1.d:
            raise ValueError(f"Copulas before and after the change differ in dimension: {self.c1.d} vs {self.c2.d}.")
        if self.t is not None and not 0.0 < self.t < 1.0:
            raise ValueError(f"The change location must lie in (0, 1), got {self.t=}.")
        if isinstance(self.filter, GarchFilter) and self.filter.d != self.c1.d:
            raise ValueError(f"GARCH parameters cover {self.filter.d} components but the copula has d={self.c1.d}.")

    @property
    def d(self) -> int:
        """Number of components."""
        return self.c1.d


def change_index(spec: DgpSpec) -> int:
    """floor(n t): the last row drawn from c1, or n when there is no change."""
    if spec.t is None or spec.c2 is None:
        return spec.n
    return math.floor(spec.n * spec.t)


def innovations(spec: DgpSpec, rng: np.random.Generator) -> np.ndarray:
    """eps_i = Phi^-1(U_i) for i = -burn_in..n, with U_i from c1 up to row floor(n t) and from c2 after it.

    Returns:
        A (burn_in + 1 + n) x d matrix; row burn_in + i holds eps_i.
    """
    k = change_index(spec)
    u = sample_copula(spec.c1, spec.burn_in + 1 + k, rng)
    if k < spec.n:
        u = np.vstack([u, sample_copula(spec.c2, spec.n - k, rng)])
    return stats.norm.ppf(u)


def generate(spec: DgpSpec, rng: np.random.Generator) -> MultivariateSample:
    """Draw one sample X_1..X_n.

    Args:
        spec: the data-generating process.
        rng: random stream; the same stream always gives the same sample.

    Returns:
        The sample, burn-in rows removed.
    """
    eps = innovations(spec, rng)
    x = spec.filter.apply(eps)
    logger.debug(f"Generated {spec.n} x {spec.d} rows; c1 up to row {change_index(spec)}, burn-in {spec.burn_in}.")
    return MultivariateSample(x[spec.burn_in + 1 :])
