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

import numpy as np
import pytest

from cpdetect.core.sample import MultivariateSample


def correlated_normals(n: int, d: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    cov = np.full((d, d), rho) + (1.0 - rho) * np.eye(d)
    return rng.standard_normal((n, d)) @ np.linalg.cholesky(cov).T


def ar1(innovations: np.ndarray, gamma: float) -> np.ndarray:
    x = np.empty_like(innovations)
    x[0] = innovations[0]
    for i in range(1, innovations.shape[0]):
        x[i] = gamma * x[i - 1] + innovations[i]
    return x


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240613)


@pytest.fixture
def small_sample(rng) -> MultivariateSample:
    """Tie-free bivariate sample with n = 10."""
    return MultivariateSample(correlated_normals(10, 2, 0.5, rng))


@pytest.fixture
def trivariate_sample(rng) -> MultivariateSample:
    """Tie-free trivariate sample with n = 9."""
    return MultivariateSample(correlated_normals(9, 3, 0.3, rng))


@pytest.fixture
def null_sample(rng) -> MultivariateSample:
    """Bivariate sample without a change point, n = 80."""
    return MultivariateSample(correlated_normals(80, 2, 0.4, rng), column_names=("x", "y"))


@pytest.fixture
def change_sample(rng) -> MultivariateSample:
    """Bivariate sample whose correlation jumps from 0 to 0.9 halfway, n = 120."""
    data = np.vstack([correlated_normals(60, 2, 0.0, rng), correlated_normals(60, 2, 0.9, rng)])
    return MultivariateSample(data)


@pytest.fixture
def make_normals():
    return correlated_normals


@pytest.fixture
def make_ar1():
    return ar1
