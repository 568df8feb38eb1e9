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
from typing import Any, List, Optional, Sequence, Union

import click
import pydantic

from cpdetect.cli.config_models import TestConfig
from cpdetect.cli.io import ReportFormat, emit_report
from cpdetect.cli.runner import run_test
from cpdetect.core.report import TestReport


__all__: Sequence[str] = (
    "EllParamType",
    "entrypoint",
    "main",
)


class EllParamType(click.ParamType):
    """``auto`` or a positive integer."""

    name = "auto|INT"

    def convert(  # noqa: D102
        self, value: Any, param: Optional[click.Parameter], ctx: Optional[click.Context]
    ) -> Union[str, int]:
        if value == "auto":
            return value
        try:
            ell = int(value)
        except (TypeError, ValueError):
            self.fail(f"{value!r} is neither 'auto' nor an integer.", param, ctx)
        if ell < 1:
            self.fail(f"ell must be at least 1, got {ell}.", param, ctx)
        return ell


@click.command(help="Test a multivariate series for a change in its cross-sectional Spearman's rho.")
@click.option(
    "--input",
    "-i",
    "input_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    required=True,
    help="CSV file, one observation per line and one component per column.",
)
@click.option("--header/--no-header", "has_header", default=True, help="Whether the first line holds column names.")
@click.option(
    "--stat",
    type=click.Choice(["rho1", "rho2", "rho3", "all"]),
    default="rho1",
    show_default=True,
    help="Spearman's rho extension to test with; 'all' reports all three.",
)
@click.option(
    "--method",
    type=click.Choice(["boot-iid", "boot-dep", "asymptotic"]),
    default="boot-iid",
    show_default=True,
    help="i.i.d. multipliers, dependent multipliers, or the studentized statistic with the Kolmogorov law.",
)
@click.option(
    "--serial",
    type=click.Choice(["iid", "dependent"]),
    default="iid",
    show_default=True,
    help="Variance estimator of the asymptotic method; 'dependent' uses the HAC form with bandwidth --ell.",
)
@click.option("--replicates", "-M", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option(
    "--ell",
    type=EllParamType(),
    default="auto",
    show_default=True,
    help="Bandwidth of dependent multipliers and of the HAC variance; 'auto' estimates it from the data.",
)
@click.option("--bn-exponent", type=click.FloatRange(min=0.0, min_open=True), default=0.51, show_default=True)
@click.option("--divisor", type=click.Choice(["simulation", "theory"]), default="simulation", show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option(
    "--kolmogorov",
    type=click.Choice(["limit", "finite"]),
    default="limit",
    show_default=True,
    help="Limit law of the asymptotic method, or the exact law for n observations.",
)
@click.option("--log-returns", is_flag=True, help="Treat the input as price levels and test their log-returns.")
@click.option("--format", "report_format", type=click.Choice(["json", "text"]), default="json", show_default=True)
@click.option(
    "--output",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write the report here instead of to stdout.",
)
def entrypoint(  # noqa: D103
    input_path: Path,
    has_header: bool,
    stat: str,
    method: str,
    serial: str,
    replicates: int,
    ell: Union[str, int],
    bn_exponent: float,
    divisor: str,
    seed: int,
    kolmogorov: str,
    log_returns: bool,
    report_format: ReportFormat,
    output: Optional[Path],
) -> None:
    try:
        config = TestConfig(
            input_path=input_path,
            has_header=has_header,
            stat=stat,
            method=method,
            serial=serial,
            replicates=replicates,
            ell=ell,
            bn_exponent=bn_exponent,
            divisor=divisor,
            seed=seed,
            kolmogorov=kolmogorov,
            log_returns=log_returns,
        )
    except pydantic.ValidationError as error:
        raise click.UsageError(str(error))
    try:
        main(config=config, report_format=report_format, output=output)
    except ValueError as error:
        # bad data rather than bad usage
        raise click.ClickException(str(error))


def main(
    *, config: TestConfig, report_format: ReportFormat = "json", output: Optional[Path] = None
) -> Union[TestReport, List[TestReport]]:
    """Run the configured test and write the report to ``output``, or to stdout when it is None."""
    reports = run_test(config)
    payload = emit_report(reports, report_format)
    if output is None:
        click.echo(payload, nl=False)
    else:
        output.write_bytes(payload)
    return reports


if __name__ == "__main__":
    entrypoint()  # pragma: no cover
