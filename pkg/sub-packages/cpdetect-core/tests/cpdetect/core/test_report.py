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

import pydantic
import pytest

from cpdetect.core.bandwidth import BandwidthEstimate
from cpdetect.core.errors import CsvParseError, DegenerateVarianceError
from cpdetect.core.report import TestReport


def make_report(**overrides) -> TestReport:
    fields = {
        "statistic_name": "rho1",
        "statistic_value": 0.42,
        "p_value": 0.137,
        "method": "boot-dep",
        "changepoint_index": 57,
        "b_n": 0.066,
        "n": 120,
        "d": 2,
        "ell_used": 4,
        "M": 1000,
        "seed": 3,
    }
    fields.update(overrides)
    return TestReport(**fields)


def test_report_round_trips_through_json():
    report = make_report(
        bandwidth=BandwidthEstimate(ell_hat=4, L_used=6, gamma_hat=-3.1, delta_hat=0.8, series_length=120, cutoff=3),
        column_names=["dax", "cac"],
    )
    assert TestReport.model_validate_json(report.model_dump_json()) == report


def test_report_json_uses_stable_field_names():
    payload = make_report().model_dump()
    assert list(payload)[:5] == ["statistic_name", "statistic_value", "p_value", "method", "changepoint_index"]


@pytest.mark.parametrize(
    "overrides",
    [
        {"p_value": 1.2},
        {"p_value": -0.1},
        {"changepoint_index": 0},
        {"changepoint_index": 120},
        {"method": "boot"},
        {"b_n": 1.0},
        {"unexpected": True},
    ],
)
def test_report_rejects_invalid_fields(overrides):
    with pytest.raises(pydantic.ValidationError):
        make_report(**overrides)


def test_report_is_frozen():
    report = make_report()
    with pytest.raises(pydantic.ValidationError):
        report.p_value = 0.5


def test_csv_parse_error_names_the_location():
    error = CsvParseError(Path("/data/prices.csv"), "could not convert 'abc' to a number", row=5, col=2)
    assert str(error) == "prices.csv at row 5, column 2: could not convert 'abc' to a number"
    assert str(CsvParseError(Path("x.csv"), "empty file")) == "x.csv: empty file"
    assert isinstance(error, ValueError)


def test_degenerate_variance_error_is_a_value_error():
    with pytest.raises(ValueError, match="iid"):
        raise DegenerateVarianceError(0.0, "iid")
