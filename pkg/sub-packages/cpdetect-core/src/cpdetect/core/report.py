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

from typing import ClassVar, Literal, Optional, Sequence

import pydantic

from cpdetect.core.bandwidth import BandwidthEstimate


__all__: Sequence[str] = (
    "Method",
    "TestReport",
)

Method = Literal["boot-iid", "boot-dep", "asymptotic"]


class TestReport(pydantic.BaseModel):
    """Outcome of one change-point test, serializable to JSON with stable field names."""

    model_config = pydantic.ConfigDict(use_attribute_docstrings=True, frozen=True, extra="forbid")

    __test__: ClassVar[bool] = False  # keeps pytest from collecting this class

    statistic_name: str
    """Name of the linear map, e.g. rho1."""

    statistic_value: float = pydantic.Field(ge=0.0)
    """The maximally selected statistic S_{n,f}."""

    p_value: float = pydantic.Field(ge=0.0, le=1.0)
    """Approximate p-value."""

    method: Method
    """How the p-value was obtained."""

    changepoint_index: int = pydantic.Field(ge=1)
    """Smallest split k maximizing |f(T_n(k/n))|; descriptive only."""

    b_n: float = pydantic.Field(gt=0.0, lt=1.0)
    """Smoothing bandwidth of the influence functions."""

    n: int = pydantic.Field(ge=2)
    """Number of observations."""

    d: int = pydantic.Field(ge=2)
    """Number of components."""

    divisor: Literal["theory", "simulation"] = "simulation"
    """Rank scaling convention."""

    ell_used: Optional[int] = pydantic.Field(default=None, ge=1)
    """Bandwidth of dependent multipliers or of the HAC variance, when one was used."""

    M: Optional[int] = pydantic.Field(default=None, ge=1)
    """Number of multiplier replicates (bootstrap methods)."""

    seed: Optional[int] = None
    """Seed of the multiplier streams (bootstrap methods)."""

    studentized: Optional[float] = None
    """S / sigma for the asymptotic method."""

    variance: Optional[float] = None
    """Studentizing variance for the asymptotic method."""

    variance_form: Optional[Literal["iid", "hac"]] = None
    """Which variance estimator studentized the statistic."""

    kolmogorov: Optional[Literal["limit", "finite"]] = None
    """Form of the Kolmogorov distribution used by the asymptotic method."""

    bandwidth: Optional[BandwidthEstimate] = None
    """Details of the automatic bandwidth choice, when ell was selected from the data."""

    column_names: Optional[list[str]] = None
    """Component names, when the input had a header."""

    @pydantic.model_validator(mode="after")
    def _validate_changepoint(self):
        if self.changepoint_index > self.n - 1:
            raise ValueError(f"changepoint_index must be at most n - 1 = {self.n - 1}, got {self.changepoint_index}.")
        return self
