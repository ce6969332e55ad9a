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

"""General testing utilities"""

from collections.abc import Sequence
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from fdw.core import models
from fdw.ports.outbound.report import ReportWriterPort

BASE_DIR = Path(__file__).parent.resolve()

FD_STEP = 1e-4


def finite_difference_gradient(
    function: Callable[[np.ndarray], np.ndarray], points: np.ndarray
) -> np.ndarray:
    """Central difference gradient of a function of points (..., 2)."""
    points = np.asarray(points, dtype=float)
    columns = []
    for axis in range(2):
        shift = np.zeros(2)
        shift[axis] = FD_STEP
        difference = function(points + shift) - function(points - shift)
        columns.append(difference / (2 * FD_STEP))
    return np.stack(columns, axis=-1)


def finite_difference_laplacian(
    function: Callable[[np.ndarray], np.ndarray], points: np.ndarray
) -> np.ndarray:
    """Five point Laplacian of a function of points (..., 2)."""
    points = np.asarray(points, dtype=float)
    total = -4.0 * function(points)
    for shift in ((FD_STEP, 0.0), (-FD_STEP, 0.0), (0.0, FD_STEP), (0.0, -FD_STEP)):
        total = total + function(points + np.array(shift))
    return total / FD_STEP**2


class InMemoryReportWriter(ReportWriterPort):
    """Keeps all reports in memory for inspection."""

    def __init__(self):
        self.records: list[models.RunRecord] = []
        self.snapshot: Optional[models.FieldSnapshot] = None
        self.history: list[models.ErrorHistoryEntry] = []

    def write_table(self, *, records: Sequence[models.RunRecord]) -> None:
        """Keep the table rows."""
        self.records = list(records)

    def write_field(self, *, snapshot: models.FieldSnapshot) -> None:
        """Keep the field snapshot."""
        self.snapshot = snapshot

    def write_error_history(
        self, *, entries: Sequence[models.ErrorHistoryEntry]
    ) -> None:
        """Keep the error history."""
        self.history = list(entries)


class FailingReportWriter(InMemoryReportWriter):
    """Fails on every table write."""

    def write_table(self, *, records: Sequence[models.RunRecord]) -> None:
        """Always raise."""
        raise self.ReportWriteError(
            destination="memory", from_error=OSError("disk full")
        )
