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
from typing import Optional, Sequence

import click
import pandas as pd
import yaml

from cpdetect.cli.config_models import ExperimentGrid, load_grid, preset_names
from cpdetect.cli.experiment import run_experiment
from cpdetect.cli.io import write_rejection_table


__all__: Sequence[str] = (
    "entrypoint",
    "main",
)


@click.command(help="Simulate a grid of data-generating processes and report rejection percentages.")
@click.option(
    "--config",
    "-c",
    type=str,
    default=None,
    help="YAML grid file, or the name of a bundled preset (see --list-presets).",
)
@click.option("--reps", "-R", type=click.IntRange(min=1), default=None, help="Override the repetitions of every cell.")
@click.option("--threads", "-t", type=click.IntRange(min=1), default=1, show_default=True, help="Number of workers.")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option(
    "--out",
    "-o",
    type=click.Path(dir_okay=False, path_type=Path),
    default=None,
    help="Write the rejection table here instead of to stdout.",
)
@click.option("--processes", is_flag=True, help="Use worker processes instead of threads.")
@click.option("--progress/--no-progress", default=True, help="Show a progress bar on stderr.")
@click.option("--list-presets", is_flag=True, help="Print the names of the bundled grids and exit.")
def entrypoint(  # noqa: D103
    config: Optional[str],
    reps: Optional[int],
    threads: int,
    seed: int,
    out: Optional[Path],
    processes: bool,
    progress: bool,
    list_presets: bool,
) -> None:
    if list_presets:
        click.echo("\n".join(preset_names()))
        return
    if config is None:
        raise click.UsageError("Give a grid file or preset name with --config.")
    try:
        grid = load_grid(config)
        if reps is not None:
            grid = grid.with_reps(reps)
    except (OSError, ValueError, yaml.YAMLError) as error:
        # pydantic.ValidationError is a ValueError
        raise click.UsageError(f"Invalid experiment grid {config!r}: {error}")
    try:
        main(grid=grid, threads=threads, seed=seed, out=out, processes=processes, progress=progress)
    except ValueError as error:
        raise click.ClickException(str(error))


def main(
    *,
    grid: ExperimentGrid,
    threads: int = 1,
    seed: int = 0,
    out: Optional[Path] = None,
    processes: bool = False,
    progress: bool = True,
) -> pd.DataFrame:
    """Run the grid and write the rejection table to ``out``, or to stdout when it is None."""
    table = run_experiment(grid, parallelism=threads, seed=seed, progress=progress, use_processes=processes)
    text = write_rejection_table(table, out)
    if out is None:
        click.echo(text, nl=False)
    return table


if __name__ == "__main__":
    entrypoint()  # pragma: no cover
