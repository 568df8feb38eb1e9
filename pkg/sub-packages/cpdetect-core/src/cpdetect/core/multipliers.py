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

import functools
import logging
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from cpdetect.core.errors import WindowExceedsSeriesWarning
from cpdetect.core.utils.random_utils import iter_rng_streams


__all__: Sequence[str] = (
    "MultiplierKind",
    "MultiplierSequence",
    "KernelShape",
    "parzen_kernel",
    "phi_function",
    "default_kernel",
    "moving_average_weights",
    "iid_multipliers",
    "dependent_multipliers",
    "multiplier_matrix",
)

logger = logging.getLogger(__name__)


class MultiplierKind(str, Enum):
    """Serial structure of a multiplier sequence."""

    IID = "iid"
    DEPENDENT = "dependent"


@dataclass(frozen=True)
class MultiplierSequence:
    """A realized sequence of mean-zero, unit-variance multipliers xi_1..xi_n."""

    xi: np.ndarray
    """The n multipliers."""

    kind: MultiplierKind = MultiplierKind.IID
    """IID, or DEPENDENT with bandwidth ``ell``."""

    ell: Optional[int] = None
    """Bandwidth of a dependent sequence; None for IID."""

    def __post_init__(self):  # noqa: D105
        xi = np.array(self.xi, dtype=np.float64, copy=True).reshape(-1)
        if not np.all(np.isfinite(xi)):
            raise ValueError("Multipliers must be finite.")
        if self.kind is MultiplierKind.DEPENDENT and (self.ell is None or self.ell < 1):
            raise ValueError(f"A dependent multiplier sequence needs ell >= 1, got {self.ell=}.")
        xi.setflags(write=False)
        object.__setattr__(self, "xi", xi)

    def __len__(self) -> int:  # noqa: D105
        return self.xi.size


def parzen_kernel(x: float | np.ndarray) -> float | np.ndarray:
    """The Parzen kernel, supported on [-1, 1] with value 1 at 0."""
    ax = np.abs(np.asarray(x, dtype=np.float64))
    inner = 1.0 - 6.0 * ax**2 + 6.0 * ax**3
    outer = 2.0 * (1.0 - ax) ** 3
    value = np.where(ax <= 0.5, inner, np.where(ax <= 1.0, outer, 0.0))
    return float(value) if value.ndim == 0 else value


class KernelShape:
    """The Parzen kernel and the multiplier autocovariance function it induces.

    phi(x) is the self-convolution of the kernel at 2x, normalized to phi(0) = 1. It is supported on [-1, 1].
    The constants phi''(0) and the integral of phi^2 are computed on first use and cached.
    """

    def __init__(self, richardson_step: float = 1e-2) -> None:
        """Create the kernel shape.

        Args:
            richardson_step: coarse step of the central-difference estimate of phi''(0).
        """
        self.richardson_step = richardson_step

    def kappa(self, x: float | np.ndarray) -> float | np.ndarray:
        """The Parzen kernel."""
        return parzen_kernel(x)

    def _self_convolution(self, y: float) -> float:
        if abs(y) >= 2.0:
            return 0.0
        lo, hi = max(-1.0, y - 1.0), min(1.0, y + 1.0)
        breaks = sorted({p for p in (-0.5, 0.0, 0.5, y - 0.5, y, y + 0.5) if lo < p < hi})
        value, _ = integrate.quad(
            lambda t: parzen_kernel(t) * parzen_kernel(y - t), lo, hi, points=breaks or None, epsabs=1e-14, limit=200
        )
        return value

    @functools.cached_property
    def _normalizer(self) -> float:
        return self._self_convolution(0.0)

    @functools.lru_cache(maxsize=4096)
    def _phi_scalar(self, x: float) -> float:
        if x == 0.0:
            return 1.0
        if abs(x) >= 1.0:
            return 0.0
        return self._self_convolution(2.0 * abs(x)) / self._normalizer

    def phi(self, x: float | np.ndarray) -> float | np.ndarray:
        """phi(x) = (kappa * kappa)(2x) / (kappa * kappa)(0)."""
        arr = np.asarray(x, dtype=np.float64)
        values = np.array([self._phi_scalar(float(v)) for v in arr.reshape(-1)]).reshape(arr.shape)
        return float(values) if values.ndim == 0 else values

    @functools.cached_property
    def phi_second_deriv_at_0(self) -> float:
        """phi''(0) by central differences with one Richardson extrapolation step."""
        h = self.richardson_step

        def central(step: float) -> float:
            return 2.0 * (self._phi_scalar(step) - 1.0) / step**2

        coarse, fine = central(h), central(h / 2.0)
        value = (4.0 * fine - coarse) / 3.0
        logger.debug(f"phi''(0) = {value:.10f}")
        return value

    @functools.cached_property
    def integral_phi_squared(self) -> float:
        """The integral of phi(x)^2 over [-1, 1]."""
        value, _ = integrate.quad(lambda x: self._phi_scalar(x) ** 2, 0.0, 1.0, points=[0.25, 0.5], limit=200)
        return 2.0 * value


@functools.cache
def default_kernel() -> KernelShape:
    """The shared Parzen kernel shape."""
    return KernelShape()


def phi_function(x: float | np.ndarray, kernel: Optional[KernelShape] = None) -> float | np.ndarray:
    """The multiplier autocovariance function phi evaluated at x."""
    return (kernel or default_kernel()).phi(x)


@functools.lru_cache(maxsize=256)
def _weights(ell: int, kernel: KernelShape) -> np.ndarray:
    b = ell // 2
    j = np.arange(-b, b + 1, dtype=np.float64)
    w = kernel.kappa(j / (b + 0.5))
    w = np.atleast_1d(w) / np.sqrt(np.sum(np.atleast_1d(w) ** 2))
    w.setflags(write=False)
    return w


def moving_average_weights(ell: int, kernel: Optional[KernelShape] = None) -> np.ndarray:
    """Weights w_{-b..b}, b = floor(ell / 2), of the moving-average construction, normalized to sum(w^2) = 1.

    The lag-h autocovariance of the resulting sequence is sum_j w_j w_{j+h}, which is zero beyond lag 2b.
    """
    if ell < 1:
        raise ValueError(f"Bandwidth must be a positive integer, got {ell=}.")
    return _weights(int(ell), kernel or default_kernel())


def iid_multipliers(n: int, rng: np.random.Generator) -> MultiplierSequence:
    """n i.i.d. standard normal multipliers."""
    if n < 1:
        raise ValueError(f"Need n >= 1 multipliers, got {n=}.")
    return MultiplierSequence(rng.standard_normal(n), MultiplierKind.IID)


def _moving_average(z: np.ndarray, weights: np.ndarray) -> np.ndarray:
    width = weights.size
    if width == 1:
        return z * weights[0]
    windows = np.lib.stride_tricks.sliding_window_view(z, width, axis=-1)
    return windows @ weights


def _warn_if_too_wide(n: int, ell: int) -> None:
    if ell >= n:
        warnings.warn(
            f"Multiplier bandwidth {ell=} is not smaller than the series length {n=}; "
            "every multiplier is correlated with every other.",
            WindowExceedsSeriesWarning,
            stacklevel=3,
        )


def dependent_multipliers(
    n: int, ell: int, rng: np.random.Generator, kernel: Optional[KernelShape] = None
) -> MultiplierSequence:
    """An ell-dependent multiplier sequence built by smoothing i.i.d. normals with Parzen weights.

    Args:
        n: length of the sequence.
        ell: bandwidth; the output is 2*floor(ell/2)-dependent.
        rng: random stream to draw the n + 2b underlying normals from.
        kernel: kernel shape supplying the weights; the shared Parzen shape by default.

    Returns:
        A DEPENDENT MultiplierSequence.
    """
    if n < 1:
        raise ValueError(f"Need n >= 1 multipliers, got {n=}.")
    weights = moving_average_weights(ell, kernel)
    _warn_if_too_wide(n, ell)
    z = rng.standard_normal(n + weights.size - 1)
    return MultiplierSequence(_moving_average(z, weights), MultiplierKind.DEPENDENT, int(ell))


def multiplier_matrix(
    n: int,
    count: int,
    kind: MultiplierKind,
    seed: int,
    stream_prefix: Sequence[int] = (),
    ell: Optional[int] = None,
    kernel: Optional[KernelShape] = None,
) -> np.ndarray:
    """Multipliers of ``count`` replicates stacked as a count x n matrix.

    Replicate m (0-based) is drawn from stream (seed, *stream_prefix, m + 1), so row m is identical to what
    iid_multipliers or dependent_multipliers would return for that stream.
    """
    kind = MultiplierKind(kind)
    if kind is MultiplierKind.DEPENDENT:
        if ell is None:
            raise ValueError("Dependent multipliers need a bandwidth ell.")
        weights = moving_average_weights(ell, kernel)
        _warn_if_too_wide(n, ell)
        streams = iter_rng_streams(seed, stream_prefix, count)
        z = np.stack([rng.standard_normal(n + weights.size - 1) for rng in streams])
        return _moving_average(z, weights)
    return np.stack([rng.standard_normal(n) for rng in iter_rng_streams(seed, stream_prefix, count)])
