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

"""Influence functions of the Spearman functionals, smoothed or not, evaluated against a window's empirical copula."""

from typing import Optional, Sequence

import numpy as np

from cpdetect.core.sample import PseudoObservations
from cpdetect.core.spearman import subset_products


__all__: Sequence[str] = (
    "smoothing_L",
    "smoothed_influence",
    "influence_vector",
    "window_influence",
)


def smoothing_L(u: float | np.ndarray, v: float | np.ndarray, b_n: float) -> float | np.ndarray:
    """Linear smoothing of the indicator 1(u <= v) over (u - b_n, u + b_n), clipped to [0, 1].

    Equals 0 for v <= u - b_n, 1 for v >= u + b_n, and 1/2 at v = u away from the boundary.
    """
    if not b_n > 0:
        raise ValueError(f"Smoothing bandwidth must be positive, got {b_n=}.")
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    upper = np.minimum(u + b_n, 1.0)
    lower = np.maximum(u - b_n, 0.0)
    value = (np.minimum(upper, v) - np.minimum(lower, v)) / (upper - lower)
    return float(value) if value.ndim == 0 else value


def _ramp(u: np.ndarray, v: np.ndarray, b_n: float, smooth: bool) -> np.ndarray:
    if smooth:
        return smoothing_L(u, v, b_n)
    return (u <= v).astype(np.float64)


def _members(mask: int, d: int) -> list[int]:
    return [j for j in range(d) if mask >> j & 1]


def smoothed_influence(
    pobs: PseudoObservations, A: int, u: Sequence[float] | np.ndarray, b_n: float, smooth: bool = True
) -> float:
    """Influence of a point u on phi_A, integrated against the empirical copula of the window.

    Computes prod_{l in A}(1 - u_l) - (1/m) sum_i sum_{j in A} prod_{l in A minus j}(1 - U_il) L(u_j, U_ij).
    With ``smooth=False`` the ramp L is replaced by the indicator 1(u_j <= U_ij).
    """
    d = pobs.d
    if not 1 <= A < 2**d:
        raise ValueError(f"Subset bitmask must be nonempty and within {d} components, got {A=}.")
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (d,) or np.any(u < 0) or np.any(u > 1):
        raise ValueError(f"Evaluation point must be a point of [0, 1]^{d}, got {u}.")
    values = pobs.values
    members = _members(A, d)
    value = float(np.prod(1.0 - u[members]))
    for j in members:
        others = [l for l in members if l != j]
        weights = np.prod(1.0 - values[:, others], axis=1)
        value -= float(np.mean(weights * _ramp(u[j], values[:, j], b_n, smooth)))
    return value


def influence_vector(
    pobs: PseudoObservations, u: Sequence[float] | np.ndarray, b_n: float, smooth: bool = True
) -> np.ndarray:
    """smoothed_influence for every nonempty subset, as a SubsetVector in canonical order."""
    u = np.asarray(u, dtype=np.float64)
    d = pobs.d
    if u.shape != (d,) or np.any(u < 0) or np.any(u > 1):
        raise ValueError(f"Evaluation point must be a point of [0, 1]^{d}, got {u}.")
    products = subset_products(pobs.values)
    ramps = _ramp(u[None, :], pobs.values, b_n, smooth)
    point = subset_products(u[None, :])[0]
    result = point[1:].copy()
    for mask in range(1, 2**d):
        for j in _members(mask, d):
            result[mask - 1] -= float(np.mean(products[:, mask ^ (1 << j)] * ramps[:, j]))
    return result


def _ramp_sums(
    v_sorted: np.ndarray, weights_sorted: np.ndarray, u: np.ndarray, b_n: float, smooth: bool
) -> np.ndarray:
    """sum_r w_r L(u_i, v_r) for every query u_i and every weight column, via prefix sums over sorted v."""
    m = v_sorted.size
    zero = np.zeros((1, weights_sorted.shape[1]))
    cum_w = np.concatenate([zero, np.cumsum(weights_sorted, axis=0)])
    total = cum_w[m]
    if not smooth:
        idx = np.searchsorted(v_sorted, u, side="left")
        return total - cum_w[idx]
    cum_wv = np.concatenate([zero, np.cumsum(weights_sorted * v_sorted[:, None], axis=0)])
    upper = np.minimum(u + b_n, 1.0)
    lower = np.maximum(u - b_n, 0.0)
    hi = np.searchsorted(v_sorted, upper, side="left")
    lo = np.searchsorted(v_sorted, lower, side="right")
    saturated = total - cum_w[hi]
    ramp = (cum_wv[hi] - cum_wv[lo]) - lower[:, None] * (cum_w[hi] - cum_w[lo])
    return saturated + ramp / (upper - lower)[:, None]


def window_influence(
    values: np.ndarray, b_n: float, coefficients: Optional[np.ndarray] = None, smooth: bool = True
) -> np.ndarray:
    """Influence of every row of a window on every phi_A, against that window's own empirical copula.

    Each column is sorted once and the piecewise-linear ramp is summed with prefix sums, so the cost is
    O(m log m) per component and weight column rather than the O(m^2) of a direct double loop.

    Args:
        values: m x d pseudo-observations of the window; they are also the evaluation points.
        b_n: smoothing bandwidth.
        coefficients: when given, the influences are projected on these SubsetVector coefficients and an
            m-vector of f-influences is returned.
        smooth: use the ramp (True) or the indicator (False).

    Returns:
        An m x (2^d - 1) matrix, or an m-vector when ``coefficients`` is given.
    """
    m, d = values.shape
    products = subset_products(values)
    if coefficients is not None:
        result = products[:, 1:] @ coefficients
    else:
        result = products[:, 1:].copy()
    for j in range(d):
        bit = 1 << j
        masks = np.array([mask for mask in range(1, 2**d) if mask & bit])
        weights = products[:, masks ^ bit]
        if coefficients is not None:
            weights = (weights @ coefficients[masks - 1])[:, None]
        order = np.argsort(values[:, j], kind="stable")
        sums = _ramp_sums(values[order, j], weights[order], values[:, j], b_n, smooth) / m
        if coefficients is not None:
            result -= sums[:, 0]
        else:
            result[:, masks - 1] -= sums
    return result
