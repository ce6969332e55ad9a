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

"""Models and protocols exchanged between the numerical core, the runner and the
report adapters.
"""

from typing import Literal, Optional, Protocol

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

Method = Literal["bem", "drbem"]
ProblemId = Literal[1, 2, 3]


class ProblemData(Protocol):
    """Data of an initial-boundary value problem with Dirichlet conditions."""

    kappa: float

    def initial_value(self, points: np.ndarray) -> np.ndarray:
        """Initial condition phi at the points."""
        ...

    def initial_velocity(self, points: np.ndarray) -> np.ndarray:
        """Initial velocity psi at the points."""
        ...

    def forcing(self, points: np.ndarray, t: float) -> np.ndarray:
        """Source term g at time t."""
        ...

    def boundary_value(self, points: np.ndarray, t: float) -> np.ndarray:
        """Dirichlet data at boundary points and time t."""
        ...

    def normal_derivative(
        self, points: np.ndarray, normals: np.ndarray, t: float
    ) -> np.ndarray:
        """Normal derivative of the solution at boundary points and time t."""
        ...


class ExactSolution(ProblemData, Protocol):
    """A problem whose solution and its Laplacian are known in closed form."""

    def exact(self, points: np.ndarray, t: float) -> np.ndarray:
        """Exact solution at the points."""
        ...

    def laplacian(self, points: np.ndarray, t: float) -> np.ndarray:
        """Spatial Laplacian of the exact solution."""
        ...


class RunSpec(BaseModel):
    """A single, fully specified benchmark run."""

    model_config = ConfigDict(frozen=True)

    method: Method
    problem: ProblemId
    alpha: float = Field(..., gt=1, lt=2)
    tau: float = Field(..., gt=0)
    final_time: float = Field(..., gt=0)
    n_elements: int = Field(..., ge=4)
    interior_res: int = Field(..., ge=2)
    kappa: float = Field(default=1.0, gt=0)
    polygon: Optional[tuple[tuple[float, float], ...]] = None
    explicit_inverse: bool = False
    growth_limit: float = Field(default=10.0, gt=0)

    @property
    def n_steps(self) -> int:
        """Number of time steps to reach the final time."""
        return round(self.final_time / self.tau)


class RunRecord(BaseModel):
    """One row of a convergence table."""

    method: Method
    problem: ProblemId
    alpha: float
    N: int  # noqa: N815
    L: int  # noqa: N815
    tau: float
    T: float  # noqa: N815
    rms_error: float
    wall_time_s: float

    @field_validator("rms_error")
    @classmethod
    def check_rms_error(cls, value: float) -> float:
        """The error norm must be finite and non-negative."""
        if not (np.isfinite(value) and value >= 0):
            raise ValueError(
                f"The RMS error {value} is not a finite, non-negative number."
            )
        return value


class FieldSnapshot(BaseModel):
    """Numerical and exact values at the interior points at the final time."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    points: np.ndarray
    numeric: np.ndarray
    exact: np.ndarray


class ErrorHistoryEntry(BaseModel):
    """Errors at the interior points after one time step."""

    step: int
    t: float
    rms_error: float
    mean_relative_error: float


class RunOutcome(BaseModel):
    """Everything a single run produces."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    record: RunRecord
    snapshot: FieldSnapshot
    error_history: list[ErrorHistoryEntry]
