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

"""Interface for writing run results."""

from abc import ABC, abstractmethod
from collections.abc import Sequence

from fdw.core import models


class ReportWriterPort(ABC):
    """A port through which tables and field data leave the core."""

    class ReportWriteError(RuntimeError):
        """Raised when a report could not be written to its destination."""

        def __init__(self, *, destination: str, from_error: Exception):
            self.destination = destination
            message = f"Could not write to {destination}: {str(from_error)}"
            super().__init__(message)

    @abstractmethod
    def write_table(self, *, records: Sequence[models.RunRecord]) -> None:
        """Write the convergence table, one row per run."""
        ...

    @abstractmethod
    def write_field(self, *, snapshot: models.FieldSnapshot) -> None:
        """Write numerical and exact values at the final time.
        Does nothing when no destination is configured.
        """
        ...

    @abstractmethod
    def write_error_history(
        self, *, entries: Sequence[models.ErrorHistoryEntry]
    ) -> None:
        """Write the per-step errors. Does nothing when no destination is configured."""
        ...
