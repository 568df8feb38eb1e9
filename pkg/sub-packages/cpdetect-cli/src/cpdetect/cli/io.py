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

"""Reading samples from CSV files and writing reports and rejection tables."""

import csv
import logging
from pathlib import Path
from typing import List, Literal, Sequence, Union

import numpy as np
import pandas as pd
import pydantic

from cpdetect.core.errors import CsvParseError
from cpdetect.core.report import TestReport
from cpdetect.core.sample import MultivariateSample


__all__: Sequence[str] = (
    "ReportFormat",
    "REJECTION_TABLE_COLUMNS",
    "read_csv",
    "log_returns",
    "emit_report",
    "parse_report",
    "write_rejection_table",
)

logger = logging.getLogger(__name__)

ReportFormat = Literal["json", "text"]

REJECTION_TABLE_COLUMNS: Sequence[str] = ("family", "n", "tau1", "tau2", "t", "gamma", "stat", "method", "reject_pct")

Reports = Union[TestReport, List[TestReport]]


def _tokenize(path: Path) -> List[List[str]]:
    # blank lines are skipped and do not count as rows
    with path.open(newline="") as handle:
        return [row for row in csv.reader(handle, skipinitialspace=True) if len(row) > 1 or (row and row[0].strip())]


def read_csv(path: Union[str, Path], has_header: bool = True) -> MultivariateSample:
    """Read an n x d numeric sample, one observation per line.

    Every row must have as many fields as the header, or as the first row when there is no header.

    Args:
        path: comma-separated file with a decimal point and no thousands separators.
        has_header: whether the first line holds column names.

    Returns:
        The sample, with the header names as column names when present.

    Raises:
        CsvParseError: for ragged rows, non-numeric or non-finite cells, or fewer than two rows or columns. Rows in
            the error are 1-based and count data rows only.
    """
    path = Path(path)
    rows = _tokenize(path)
    if not rows:
        raise CsvParseError(path, "file is empty")
    header = [name.strip() for name in rows[0]] if has_header else None
    body = rows[1:] if has_header else rows
    width = len(rows[0])

    for row, fields in enumerate(body, start=1):
        if len(fields) > width:
            raise CsvParseError(path, f"row has more fields than the {width} of the first row", row=row)
        if len(fields) < width:
            raise CsvParseError(path, f"row has fewer than {width} fields", row=row)

    frame = pd.DataFrame(body, columns=header, dtype=str)
    values = frame.apply(lambda column: pd.to_numeric(column.str.strip(), errors="coerce"))
    values = values.to_numpy(dtype=np.float64).reshape(len(body), width)
    bad = ~np.isfinite(values)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        cell = frame.iat[row, col]
        raise CsvParseError(path, f"cell {cell!r} is not a finite number", row=int(row) + 1, col=int(col) + 1)

    n, d = values.shape
    if n < 2:
        raise CsvParseError(path, f"need at least two data rows, got {n}")
    if d < 2:
        raise CsvParseError(path, f"need at least two columns, got {d}")
    names = tuple(header) if header is not None else None
    logger.info(f"Read {n} x {d} sample from {path}.")
    return MultivariateSample(values, column_names=names)


def log_returns(sample: MultivariateSample) -> MultivariateSample:
    """Componentwise log(P_i / P_{i-1}) of a sample of price levels; the result has n - 1 rows."""
    if sample.n < 3:
        raise ValueError(f"Log-returns need at least three price rows, got {sample.n=}.")
    if np.any(sample.data <= 0):
        raise ValueError("Log-returns need strictly positive price levels.")
    return MultivariateSample(np.diff(np.log(sample.data), axis=0), column_names=sample.column_names)


_TEXT_FIELDS = (
    ("statistic", "statistic_name"),
    ("value", "statistic_value"),
    ("p-value", "p_value"),
    ("method", "method"),
    ("change point", "changepoint_index"),
    ("n", "n"),
    ("d", "d"),
    ("b_n", "b_n"),
    ("divisor", "divisor"),
    ("ell", "ell_used"),
    ("replicates", "M"),
    ("seed", "seed"),
    ("studentized", "studentized"),
    ("variance", "variance"),
    ("variance form", "variance_form"),
    ("kolmogorov", "kolmogorov"),
)


def _as_text(report: TestReport) -> str:
    lines = []
    for label, name in _TEXT_FIELDS:
        value = getattr(report, name)
        if value is None:
            continue
        if isinstance(value, float):
            value = f"{value:.6g}"
        lines.append(f"{label + ':':<15}{value}")
    if report.bandwidth is not None:
        lines.append(f"{'bandwidth:':<15}selected from {report.bandwidth.series_length} influence values")
    if report.column_names:
        lines.append(f"{'columns:':<15}{', '.join(report.column_names)}")
    return "\n".join(lines) + "\n"


def emit_report(reports: Reports, format: ReportFormat = "json") -> bytes:
    """Serialize one report, or a list of reports, as UTF-8 JSON or as labeled text lines.

    JSON output is deterministic: the same report always gives the same bytes, and parse_report inverts it.
    """
    if format == "json":
        if isinstance(reports, TestReport):
            return reports.model_dump_json(indent=2).encode() + b"\n"
        return pydantic.TypeAdapter(List[TestReport]).dump_json(reports, indent=2) + b"\n"
    if format == "text":
        items = [reports] if isinstance(reports, TestReport) else reports
        return "\n".join(_as_text(report) for report in items).encode()
    raise ValueError(f"Unknown report format {format=}; expected 'json' or 'text'.")


def parse_report(payload: Union[bytes, str]) -> Reports:
    """Read back the JSON written by emit_report."""
    return pydantic.TypeAdapter(Reports).validate_json(payload)


def write_rejection_table(table: pd.DataFrame, path: Union[str, Path, None] = None) -> str:
    """Write a rejection table as CSV with the columns REJECTION_TABLE_COLUMNS; returns the CSV text.

    Nothing is written to disk when ``path`` is None.
    """
    missing = [column for column in REJECTION_TABLE_COLUMNS if column not in table.columns]
    if missing:
        raise ValueError(f"Rejection table is missing columns {missing}.")
    text = table.loc[:, list(REJECTION_TABLE_COLUMNS)].to_csv(index=False, lineterminator="\n")
    if path is not None:
        Path(path).write_text(text)
        logger.info(f"Wrote {len(table)} rejection rates to {path}.")
    return text
