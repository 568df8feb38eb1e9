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
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from cpdetect.cli.config_models import ExperimentCell, ExperimentGrid
from cpdetect.cli.runner import run_statistic
from cpdetect.cli.util.async_worker_queue import AsyncWorkQueue
from cpdetect.core.spearman import builtin_f
from cpdetect.core.utils.random_utils import rng_stream
from cpdetect.sim.dgp import DgpSpec, generate


__all__: Sequence[str] = (
    "run_repetition",
    "rejection_row",
    "run_experiment",
)

logger = logging.getLogger(__name__)


def run_repetition(cell: ExperimentCell, dgp: DgpSpec, cell_id: int, rep_id: int, seed: int) -> float:
    """p-value of one simulated sample.

    The sample is drawn from stream (seed, cell_id, rep_id, 0) and multiplier replicate m from stream
    (seed, cell_id, rep_id, m + 1), so the result depends on nothing but these four numbers and the cell.
    """
    sample = generate(dgp, rng_stream(seed, cell_id, rep_id, 0))
    report = run_statistic(
        sample,
        builtin_f(cell.stat, cell.d),
        method=cell.method,
        replicates=cell.replicates,
        ell=cell.ell,
        bn_exponent=cell.bn_exponent,
        divisor=cell.divisor,
        seed=seed,
        stream_prefix=(cell_id, rep_id),
        serial=cell.serial,
    )
    return report.p_value


def rejection_row(cell: ExperimentCell, p_values: Sequence[float]) -> Dict[str, object]:
    """One line of the rejection table: the percentage of p-values at or below the cell's alpha."""
    p = np.asarray(p_values, dtype=np.float64)
    rejections = int(np.count_nonzero(p <= cell.alpha))
    by_tau = cell.measure == "tau"
    return {
        "family": cell.family.value,
        "n": cell.n,
        "tau1": cell.tau1 if by_tau else cell.rho_s1,
        "tau2": cell.tau2 if by_tau else cell.rho_s2,
        "t": cell.t,
        "gamma": "garch" if cell.garch else cell.gamma,
        "stat": cell.stat,
        "method": cell.method,
        "reject_pct": 100.0 * rejections / p.size,
        "measure": cell.measure,
        "reps": int(p.size),
        "rejections": rejections,
    }


def run_experiment(
    grid: ExperimentGrid,
    parallelism: int = 1,
    seed: int = 0,
    progress: bool = True,
    use_processes: bool = False,
) -> pd.DataFrame:
    """Simulate every cell of the grid and count rejections.

    Args:
        grid: the cells; a cell's position in the grid is its stream id.
        parallelism: number of workers the repetitions are spread over. The table does not depend on it.
        seed: root seed of all streams.
        progress: show a progress bar on stderr.
        use_processes: run the repetitions in worker processes instead of threads.

    Returns:
        One row per cell, with the columns of the rejection table followed by ``measure``, ``reps`` and
        ``rejections``.
    """
    # parameter inversions run once per cell, before any worker starts
    dgps = [cell.dgp_spec() for cell in grid.cells]
    total = sum(cell.reps for cell in grid.cells)
    logger.info(f"Running {len(grid.cells)} cells, {total} repetitions, on {parallelism} worker(s) with {seed=}.")

    with AsyncWorkQueue(max_workers=parallelism, use_processes=use_processes) as queue:
        for cell_id, (cell, dgp) in enumerate(zip(grid.cells, dgps)):
            for rep_id in range(cell.reps):
                queue.submit_task(run_repetition, cell, dgp, cell_id, rep_id, seed)
        for _ in tqdm(queue.iter_completed(), total=total, desc="Repetitions", disable=not progress):
            pass
        p_values = queue.wait()

    rows: List[Dict[str, object]] = []
    start = 0
    for cell_id, cell in enumerate(grid.cells):
        row = rejection_row(cell, p_values[start : start + cell.reps])
        start += cell.reps
        logger.info(
            f"Cell {cell_id} ({cell.family.value}, n={cell.n}, {cell.method}): {row['reject_pct']:.1f}% rejected."
        )
        rows.append(row)
    return pd.DataFrame(rows)
