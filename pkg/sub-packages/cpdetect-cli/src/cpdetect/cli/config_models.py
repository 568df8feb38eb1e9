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
from importlib.resources import files
from pathlib import Path
from typing import Annotated, ClassVar, List, Literal, Optional, Sequence, Union

import pydantic
import yaml

from cpdetect.sim.copulas import CopulaFamily, CopulaSpec
from cpdetect.sim.dgp import AR1Filter, DgpSpec, GarchFilter


__all__: Sequence[str] = (
    "StatName",
    "MethodName",
    "Ell",
    "TestConfig",
    "ExperimentCell",
    "ExperimentGrid",
    "preset_names",
    "load_grid",
)

logger = logging.getLogger(__name__)

StatName = Literal["rho1", "rho2", "rho3"]
MethodName = Literal["boot-iid", "boot-dep", "asymptotic"]
Ell = Union[Literal["auto"], pydantic.PositiveInt]
"""Bandwidth of dependent multipliers or of the HAC variance; "auto" selects it from the data."""

BnExponent = Annotated[float, pydantic.Field(gt=0.0)]


class TestConfig(pydantic.BaseModel):
    """One invocation of ``cpdetect test``."""

    model_config = pydantic.ConfigDict(use_attribute_docstrings=True, frozen=True, extra="forbid")

    __test__: ClassVar[bool] = False  # keeps pytest from collecting this class

    input_path: Path
    """CSV file with one observation per line."""

    has_header: bool = True
    """Whether the first CSV line holds column names."""

    stat: Union[StatName, Literal["all"]] = "rho1"
    """Statistic to test with; "all" runs rho1, rho2 and rho3 on the same sample."""

    method: MethodName = "boot-iid"
    """How the p-value is approximated."""

    serial: Literal["iid", "dependent"] = "iid"
    """Variance estimator of the asymptotic method: i.i.d. or HAC."""

    replicates: pydantic.PositiveInt = 1000
    """Multiplier replicates M of the bootstrap methods."""

    ell: Ell = "auto"
    """Bandwidth for dependent multipliers and the HAC variance."""

    bn_exponent: BnExponent = 0.51
    """b_n = n^(-bn_exponent)."""

    divisor: Literal["simulation", "theory"] = "simulation"
    """Rank scaling: m + 1 or m."""

    seed: pydantic.NonNegativeInt = 0
    """Seed of the multiplier streams."""

    kolmogorov: Literal["limit", "finite"] = "limit"
    """Kolmogorov distribution used by the asymptotic method."""

    log_returns: bool = False
    """Treat the input as price levels and test their log-returns."""


class ExperimentCell(pydantic.BaseModel):
    """One cell of a simulation grid: a data-generating process, a test, and how often to repeat it.

    The dependence before and after the change is given either as Kendall's tau (``tau1``/``tau2``) or as
    Spearman's rho (``rho_s1``/``rho_s2``). Without ``tau2``/``rho_s2`` and ``t`` there is no change.
    """

    model_config = pydantic.ConfigDict(use_attribute_docstrings=True, frozen=True, extra="forbid")

    family: CopulaFamily
    d: Annotated[int, pydantic.Field(ge=2)] = 2
    n: Annotated[int, pydantic.Field(ge=2)]

    tau1: Optional[float] = None
    tau2: Optional[float] = None
    rho_s1: Optional[float] = None
    rho_s2: Optional[float] = None

    t: Optional[Annotated[float, pydantic.Field(gt=0.0, lt=1.0)]] = None
    """Relative change location."""

    gamma: Annotated[float, pydantic.Field(gt=-1.0, lt=1.0)] = 0.0
    """AR(1) coefficient of the series."""

    garch: bool = False
    """Filter the innovations through the bivariate GARCH(1,1) model instead of AR(1)."""

    df: Optional[Annotated[float, pydantic.Field(ge=1.0)]] = None
    """Degrees of freedom of a Student copula."""

    stat: StatName = "rho1"
    method: MethodName = "boot-iid"
    serial: Literal["iid", "dependent"] = "iid"
    ell: Ell = "auto"
    bn_exponent: BnExponent = 0.51
    divisor: Literal["simulation", "theory"] = "simulation"

    alpha: Annotated[float, pydantic.Field(gt=0.0, lt=1.0)] = 0.05
    """Significance level; a repetition rejects when p <= alpha."""

    reps: pydantic.PositiveInt = 1000
    """Number of simulated samples R."""

    replicates: pydantic.PositiveInt = 250
    """Multiplier replicates M per sample."""

    burn_in: pydantic.NonNegativeInt = 100

    @pydantic.model_validator(mode="after")
    def _validate_dependence(self):
        by_tau = self.tau1 is not None
        if by_tau == (self.rho_s1 is not None):
            raise ValueError("Give exactly one of tau1 and rho_s1.")
        after = self.tau2 if by_tau else self.rho_s2
        if (self.rho_s2 if by_tau else self.tau2) is not None:
            raise ValueError("Give the dependence after the change in the same measure as before it.")
        if (after is None) != (self.t is None):
            raise ValueError("A change needs both the dependence after it and its location t.")
        if self.garch and self.gamma != 0.0:
            raise ValueError("Choose either garch or an AR(1) coefficient gamma, not both.")
        if self.garch and self.d != 2:
            raise ValueError(f"The GARCH filter is bivariate, got d={self.d}.")
        if (self.df is None) == (self.family is CopulaFamily.STUDENT):
            raise ValueError("Student copulas, and only they, need degrees of freedom df.")
        return self

    @property
    def measure(self) -> Literal["tau", "rho_s"]:
        """Which dependence measure the cell is parameterized by."""
        return "tau" if self.tau1 is not None else "rho_s"

    def _copula(self, value: float) -> CopulaSpec:
        if self.measure == "tau":
            return CopulaSpec.from_tau(self.family, self.d, value, self.df)
        return CopulaSpec.from_spearman(self.family, self.d, value, self.df)

    def dgp_spec(self) -> DgpSpec:
        """The data-generating process of the cell."""
        first = self.tau1 if self.measure == "tau" else self.rho_s1
        second = self.tau2 if self.measure == "tau" else self.rho_s2
        return DgpSpec(
            n=self.n,
            c1=self._copula(first),
            c2=None if second is None else self._copula(second),
            t=self.t,
            filter=GarchFilter() if self.garch else AR1Filter(self.gamma),
            burn_in=self.burn_in,
        )


class ExperimentGrid(pydantic.BaseModel):
    """An ordered list of experiment cells; a cell's position is its id in the random streams."""

    model_config = pydantic.ConfigDict(frozen=True, extra="forbid")

    cells: Annotated[List[ExperimentCell], pydantic.Field(min_length=1)]

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "ExperimentGrid":
        """Load a YAML file whose top level is a list of flat cell mappings."""
        with open(path, "r") as f:
            raw = yaml.safe_load(f)
        if not isinstance(raw, list):
            raise ValueError(f"An experiment grid must be a YAML list of cells, got {type(raw).__name__} in {path}.")
        cells = pydantic.TypeAdapter(List[ExperimentCell]).validate_python(raw)
        logger.info(f"Loaded {len(cells)} experiment cells from {path}.")
        return cls(cells=cells)

    def with_reps(self, reps: int) -> "ExperimentGrid":
        """The same grid with every cell repeated ``reps`` times."""
        if reps < 1:
            raise ValueError(f"Need at least one repetition, got {reps=}.")
        return ExperimentGrid(cells=[cell.model_copy(update={"reps": reps}) for cell in self.cells])


def _presets_dir() -> Path:
    return Path(str(files("cpdetect.cli").joinpath("configs")))


def preset_names() -> List[str]:
    """Names of the bundled experiment grids."""
    return sorted(path.stem for path in _presets_dir().glob("*.yaml"))


def load_grid(config: Union[str, Path]) -> ExperimentGrid:
    """Load a grid from a YAML file, or a bundled preset by name."""
    path = Path(config)
    if not path.is_file() and str(config) in preset_names():
        path = _presets_dir() / f"{config}.yaml"
    return ExperimentGrid.from_yaml(path)
