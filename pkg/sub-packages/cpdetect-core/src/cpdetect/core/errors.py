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

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence


__all__: Sequence[str] = (
    # errors
    "DegenerateVarianceError",
    "DegenerateSeriesError",
    "UnsupportedMethodError",
    "CsvParseError",
    # warnings
    "WindowExceedsSeriesWarning",
    "NonStationaryGarchWarning",
    "VarianceClampedWarning",
)


@dataclass(frozen=True)
class DegenerateVarianceError(ValueError):
    """The studentizing variance is numerically zero, so no asymptotic p-value can be formed."""

    sigma2: float
    form: str

    def __str__(self) -> str:  # noqa: D105
        return f"Degenerate {self.form} variance estimate ({self.sigma2=}); the statistic cannot be studentized."


@dataclass(frozen=True)
class DegenerateSeriesError(ValueError):
    """The series has zero sample variance, so its autocorrelations are undefined."""

    length: int

    def __str__(self) -> str:  # noqa: D105
        return f"Series of length {self.length} is constant: autocorrelation is undefined."


@dataclass(frozen=True)
class UnsupportedMethodError(TypeError):
    """A method that requires a linear statistic was called with a nonlinear one."""

    method: str

    def __str__(self) -> str:  # noqa: D105
        return f"{self.method} requires a linear statistic (a LinearStatistic instance)."


@dataclass(frozen=True)
class CsvParseError(ValueError):
    """A CSV input could not be turned into a numeric sample.

    Row and column are 1-based; the row counts data rows only, so a header line is not included.
    """

    path: Path
    reason: str
    row: Optional[int] = None
    col: Optional[int] = None

    def __str__(self) -> str:  # noqa: D105
        location = []
        if self.row is not None:
            location.append(f"row {self.row}")
        if self.col is not None:
            location.append(f"column {self.col}")
        where = f" at {', '.join(location)}" if location else ""
        return f"{self.path.name}{where}: {self.reason}"


class WindowExceedsSeriesWarning(UserWarning):
    """The multiplier bandwidth is at least as long as the series."""


class NonStationaryGarchWarning(UserWarning):
    """GARCH(1,1) parameters with beta + alpha >= 1."""


class VarianceClampedWarning(UserWarning):
    """A negative HAC variance estimate was clamped to zero."""
