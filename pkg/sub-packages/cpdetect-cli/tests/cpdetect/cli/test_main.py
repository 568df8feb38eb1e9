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

import pandas as pd
import pytest
from click.testing import CliRunner

from cpdetect.cli.io import REJECTION_TABLE_COLUMNS, parse_report
from cpdetect.cli.main import cli


GRID = """\
- {family: clayton, n: 30, tau1: 0.3, reps: 3, replicates: 20}
- {family: normal, n: 30, tau1: 0.2, tau2: 0.7, t: 0.5, method: asymptotic, reps: 2}
"""


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def grid_yaml(tmp_path):
    path = tmp_path / "grid.yaml"
    path.write_text(GRID)
    return path


def test_test_command_writes_a_json_report(runner, null_csv, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(cli, ["test", "--input", str(null_csv), "-M", "150", "--seed", "3", "--output", str(out)])
    assert result.exit_code == 0, result.output
    report = parse_report(out.read_bytes())
    assert report.M == 150 and report.seed == 3
    assert report.statistic_name == "rho1"


def test_test_command_is_reproducible(runner, null_csv, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        args = ["test", "-i", str(null_csv), "--method", "boot-dep", "-M", "100", "--seed", "5", "-o", str(path)]
        assert runner.invoke(cli, args).exit_code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_test_command_text_format(runner, null_csv):
    args = ["test", "-i", str(null_csv), "--method", "asymptotic", "--stat", "rho2", "--format", "text"]
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    assert "statistic:     rho2" in result.output
    assert "p-value:" in result.output
    assert "change point:" in result.output
    assert "studentized:" in result.output


def test_test_command_with_all_statistics(runner, null_csv, tmp_path):
    out = tmp_path / "reports.json"
    result = runner.invoke(cli, ["test", "-i", str(null_csv), "--stat", "all", "-M", "50", "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert [report.statistic_name for report in parse_report(out.read_bytes())] == ["rho1", "rho2", "rho3"]


def test_test_command_with_fixed_ell(runner, null_csv, tmp_path):
    out = tmp_path / "report.json"
    args = ["test", "-i", str(null_csv), "--method", "boot-dep", "--ell", "4", "-M", "50", "-o", str(out)]
    assert runner.invoke(cli, args).exit_code == 0
    assert parse_report(out.read_bytes()).ell_used == 4


@pytest.mark.parametrize(
    "extra",
    [
        ["--format", "xml"],
        ["--method", "boot-block"],
        ["--ell", "0"],
        ["--ell", "wide"],
        ["-M", "0"],
        ["--bn-exponent", "0"],
    ],
)
def test_usage_errors_exit_with_2(runner, null_csv, extra):
    result = runner.invoke(cli, ["test", "-i", str(null_csv), *extra])
    assert result.exit_code == 2


def test_missing_input_is_a_usage_error(runner, tmp_path):
    assert runner.invoke(cli, ["test", "-i", str(tmp_path / "nope.csv")]).exit_code == 2


def test_bad_data_exits_with_1(runner, tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y\n1,2\n3,4\n5,6\n7,8\n9,abc\n")
    result = runner.invoke(cli, ["test", "-i", str(path)])
    assert result.exit_code == 1
    assert "row 5, column 2" in result.output


def test_simulate_writes_a_rejection_table(runner, grid_yaml, tmp_path):
    out = tmp_path / "table.csv"
    result = runner.invoke(cli, ["simulate", "-c", str(grid_yaml), "--seed", "1", "--no-progress", "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert out.read_text().splitlines()[0] == ",".join(REJECTION_TABLE_COLUMNS)
    table = pd.read_csv(out)
    assert table["family"].tolist() == ["clayton", "normal"]
    assert table["reject_pct"].between(0, 100).all()


def test_simulate_is_independent_of_threads(runner, grid_yaml, tmp_path):
    outputs = []
    for threads in ("1", "3"):
        out = tmp_path / f"table-{threads}.csv"
        args = ["simulate", "-c", str(grid_yaml), "--reps", "4", "-t", threads, "--no-progress", "-o", str(out)]
        assert runner.invoke(cli, args).exit_code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_simulate_to_stdout(runner, grid_yaml):
    result = runner.invoke(cli, ["simulate", "-c", str(grid_yaml), "-R", "1", "--no-progress"])
    assert result.exit_code == 0, result.output
    assert ",".join(REJECTION_TABLE_COLUMNS) in result.output


def test_simulate_lists_presets(runner):
    result = runner.invoke(cli, ["-v", "simulate", "--list-presets"])
    assert result.exit_code == 0
    assert "smoke" in result.output.split()


@pytest.mark.parametrize(
    "grid",
    ["family: clayton\n", "- {family: clayton, n: 1, tau1: 0.3}\n", "- {family: [unclosed\n"],
)
def test_simulate_rejects_invalid_grids(runner, tmp_path, grid):
    path = tmp_path / "grid.yaml"
    path.write_text(grid)
    result = runner.invoke(cli, ["simulate", "-c", str(path), "--no-progress"])
    assert result.exit_code == 2
    assert "Invalid experiment grid" in result.output


def test_simulate_needs_a_config(runner, tmp_path):
    assert runner.invoke(cli, ["simulate"]).exit_code == 2
    assert runner.invoke(cli, ["simulate", "-c", str(tmp_path / "missing.yaml")]).exit_code == 2
