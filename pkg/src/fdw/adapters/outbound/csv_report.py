# Copyright 2021 - 2023 Universität Tübingen, DKFZ, EMBL, and Universität zu Köln
# for the German Human Genome-Phenome Archive (GHGA)
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

"""Adapter writing run results as CSV files."""

import csv
import io
import logging
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Optional, TextIO

import numpy as np
from pydantic import Field
from pydantic_settings import BaseSettings

from fdw.core import models
from fdw.core.errors import UsageError
from fdw.ports.outbound.report import ReportWriterPort

log = logging.getLogger(__name__)

TABLE_HEADER = (
    "method",
    "problem",
    "alpha",
    "N",
    "L",
    "tau",
    "T",
    "rms_error",
    "wall_time_s",
)
FIELD_HEADER = ("x", "y", "u_numeric", "u_exact", "abs_error")
HISTORY_HEADER = ("step", "t", "rms_error", "mean_relative_error")


class CsvReportConfig(BaseSettings):
    """Config for the CSV output files."""

    out: Optional[Path] = Field(
        None,
        description="Destination of the convergence table. Written to stdout if unset.",
        examples=["results/table1_bem.csv"],
    )
    field_out: Optional[Path] = Field(
        None,
        description="Destination of the final-time field of the last run. Not written"
        + " if unset.",
        examples=["results/field.csv"],
    )
    history_out: Optional[Path] = Field(
        None,
        description="Destination of the per-step errors of the last run. Not written"
        + " if unset.",
        examples=["results/history.csv"],
    )


def _number(value: float) -> str:
    # repr is the shortest string that round-trips
    return repr(float(value))


def _render(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def emit_table(records: Sequence[models.RunRecord]) -> str:
    """Render the convergence table, one row per record in the given order."""
    if not records:
        raise UsageError(
            operation="emit_table", reason="there are no records to write."
        )
    rows = (
        (
            record.method,
            str(record.problem),
            _number(record.alpha),
            str(record.N),
            str(record.L),
            _number(record.tau),
            _number(record.T),
            _number(record.rms_error),
            _number(record.wall_time_s),
        )
        for record in records
    )
    return _render(TABLE_HEADER, rows)


def emit_field(snapshot: models.FieldSnapshot) -> str:
    """Render the final-time values at the interior points."""
    points = np.asarray(snapshot.points, dtype=float)
    numeric = np.asarray(snapshot.numeric, dtype=float)
    exact = np.asarray(snapshot.exact, dtype=float)
    if len(points) == 0 or not len(points) == len(numeric) == len(exact):
        raise UsageError(
            operation="emit_field",
            reason="points, numerical and exact values must be non-empty and match.",
        )
    errors = np.abs(numeric - exact)
    rows = (
        tuple(_number(value) for value in (x, y, u, u_exact, error))
        for (x, y), u, u_exact, error in zip(points, numeric, exact, errors)
    )
    return _render(FIELD_HEADER, rows)


def emit_error_history(entries: Sequence[models.ErrorHistoryEntry]) -> str:
    """Render the per-step errors."""
    if not entries:
        raise UsageError(
            operation="emit_error_history", reason="there are no entries to write."
        )
    rows = (
        (
            str(entry.step),
            _number(entry.t),
            _number(entry.rms_error),
            _number(entry.mean_relative_error),
        )
        for entry in entries
    )
    return _render(HISTORY_HEADER, rows)


class CsvReportWriter(ReportWriterPort):
    """Writes reports to the configured files, the table to stdout if no file is set."""

    def __init__(self, *, config: CsvReportConfig, stdout: Optional[TextIO] = None):
        """Configure the destinations."""
        self._config = config
        self._stdout = stdout

    def _write(self, text: str, destination: Path) -> None:
        try:
            destination.parent.mkdir(parents=True, exist_ok=True)
            with destination.open("w", encoding="utf-8", newline="") as file:
                file.write(text)
        except OSError as error:
            raise self.ReportWriteError(
                destination=str(destination), from_error=error
            ) from error
        log.info(f"Wrote {len(text.splitlines()) - 1} row(s) to '{destination}'.")

    def write_table(self, *, records: Sequence[models.RunRecord]) -> None:
        """Write the convergence table, one row per run."""
        text = emit_table(records)
        if self._config.out is None:
            (self._stdout or sys.stdout).write(text)
            return
        self._write(text, self._config.out)

    def write_field(self, *, snapshot: models.FieldSnapshot) -> None:
        """Write numerical and exact values at the final time."""
        if self._config.field_out is not None:
            self._write(emit_field(snapshot), self._config.field_out)

    def write_error_history(
        self, *, entries: Sequence[models.ErrorHistoryEntry]
    ) -> None:
        """Write the per-step errors."""
        if self._config.history_out is not None:
            self._write(emit_error_history(entries), self._config.history_out)
