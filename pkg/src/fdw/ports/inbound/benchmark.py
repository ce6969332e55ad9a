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

"""Interface for running benchmark configurations."""

from abc import ABC, abstractmethod

from fdw.core import models


class BenchmarkRunnerPort(ABC):
    """Runs a configured method on a test problem and reports the errors."""

    class InvalidRunConfigError(RuntimeError):
        """Raised when a run configuration is rejected by the numerical core."""

        def __init__(self, *, reason: str):
            message = f"Invalid run configuration: {reason}"
            super().__init__(message)

    class NumericalFailureError(RuntimeError):
        """Raised when a run breaks down numerically, e.g. on a singular matrix."""

        def __init__(self, *, run: models.RunSpec, reason: str):
            self.run = run
            message = (
                f"The {run.method} run of problem {run.problem} (alpha={run.alpha},"
                + f" N={run.n_elements}, tau={run.tau}) failed: {reason}"
            )
            super().__init__(message)

    class OutputWriteError(RuntimeError):
        """Raised when results could not be written."""

        def __init__(self, *, reason: str):
            message = f"Could not write the results: {reason}"
            super().__init__(message)

    @abstractmethod
    def run(self) -> list[models.RunRecord]:
        """Execute every configured run in sweep order, write the reports and
        return the table rows.
        """
        ...
