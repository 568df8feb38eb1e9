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

from pathlib import Path

import numpy as np
import pytest

from cpdetect.core.report import TestReport
from cpdetect.core.utils.random_utils import rng_stream
from cpdetect.sim.copulas import CopulaFamily, CopulaSpec
from cpdetect.sim.dgp import DgpSpec, generate


def write_matrix(path: Path, data: np.ndarray, header=None) -> Path:
    lines = [",".join(header)] if header else []
    lines += [",".join(f"{value:.10g}" for value in row) for row in data]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def write_csv(tmp_path):
    def _write(text: str, name: str = "data.csv") -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write


@pytest.fixture
def null_csv(tmp_path) -> Path:
    """Bivariate Clayton sample without a change, n = 60, with header x,y."""
    spec = DgpSpec(n=60, c1=CopulaSpec(CopulaFamily.CLAYTON, 2, 1.0))
    return write_matrix(tmp_path / "null.csv", generate(spec, rng_stream(101)).data, header=("x", "y"))


@pytest.fixture
def prices_csv(tmp_path) -> Path:
    """Trivariate price levels whose log-returns change from weak to strong dependence halfway, 991 rows."""
    spec = DgpSpec(
        n=990,
        c1=CopulaSpec(CopulaFamily.NORMAL, 3, 0.2),
        c2=CopulaSpec(CopulaFamily.NORMAL, 3, 0.8),
        t=0.5,
    )
    returns = 0.01 * generate(spec, rng_stream(202)).data
    prices = 100.0 * np.exp(np.vstack([np.zeros((1, 3)), np.cumsum(returns, axis=0)]))
    return write_matrix(tmp_path / "prices.csv", prices, header=("dax", "cac", "sp500"))


@pytest.fixture
def report() -> TestReport:
    return TestReport(
        statistic_name="rho1",
        statistic_value=1.25,
        p_value=0.03,
        method="boot-iid",
        changepoint_index=40,
        b_n=0.107,
        n=80,
        d=2,
        M=100,
        seed=1,
        column_names=["x", "y"],
    )
