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

"""Benchmark runs: configuration, sweep expansion and the run pipeline"""

import logging
import time
from collections.abc import Sequence
from fractions import Fraction
from typing import Annotated, Any, Optional

import numpy as np
from pydantic import Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings

from fdw.core import models
from fdw.core.bem import bem_time_march
from fdw.core.drbem import assemble_drbem, drbem_time_march
from fdw.core.errors import (
    ConfigurationError,
    KnownError,
    DivergedSolutionError,
    NonFiniteSolutionError,
    UsageError,
)
from fdw.core.geometry import PolygonDomain, discretize_boundary, interior_cells
from fdw.core.problems import get_problem, mean_relative_error, rms_error
from fdw.core.timefrac import FractionalScheme
from fdw.ports.inbound.benchmark import BenchmarkRunnerPort
from fdw.ports.outbound.report import ReportWriterPort

log = logging.getLogger(__name__)

STEP_COUNT_TOLERANCE = 1e-9

PositiveFloat = Annotated[float, Field(gt=0)]
FractionalOrder = Annotated[float, Field(gt=1, lt=2)]
ElementCount = Annotated[int, Field(ge=4)]


def parse_fraction(value: Any) -> Any:
    """Turn strings like '1/16' into floats, leave everything else untouched."""
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as error:
            raise ValueError(f"'{value}' is not a number or fraction.") from error
    return value


def parse_list(value: Any) -> Any:
    """Split comma separated strings, converting fractions on the way."""
    if isinstance(value, str):
        value = [item for item in value.split(",") if item.strip()]
    if isinstance(value, (list, tuple)):
        return [parse_fraction(item) for item in value]
    return value


def step_count(final_time: float, tau: float) -> Optional[int]:
    """The number of steps of size tau that reach the final time, if integral."""
    ratio = final_time / tau
    count = round(ratio)
    if count < 1 or abs(ratio - count) > STEP_COUNT_TOLERANCE * max(1.0, ratio):
        return None
    return count


class RunConfig(BaseSettings):
    """Config parameters of a benchmark run or sweep."""

    method: models.Method = Field(
        "bem",
        description="The boundary element scheme: 'bem' solves a modified Helmholtz"
        + " problem per step, 'drbem' uses the dual reciprocity formulation.",
        examples=["bem", "drbem"],
    )
    problem: models.ProblemId = Field(
        1,
        description="The test problem: 1 on the square [0, pi]^2, 2 on the unit disk,"
        + " 3 on a polygon.",
        examples=[1, 2, 3],
    )
    alpha: float = Field(
        1.25,
        gt=1,
        lt=2,
        description="Order of the Caputo derivative, strictly between 1 and 2.",
        examples=[1.25, 1.5, 1.75],
    )
    tau: float = Field(
        0.125,
        gt=0,
        description="Time step. Fractions such as '1/16' are accepted.",
        examples=[0.125, "1/16"],
    )
    final_time: float = Field(
        1.0,
        gt=0,
        description="Final time T. T/tau must be a positive integer.",
        examples=[1.0],
    )
    n_elements: int = Field(
        80,
        ge=4,
        description="Number N of constant boundary elements. Must be a multiple of 4"
        + " on the square.",
        examples=[20, 80, 160],
    )
    interior_res: int = Field(
        24,
        ge=2,
        description="Interior resolution m: an m x m cell grid on the square, m rings"
        + " of 4m sectors on the disk, a clipped m x m grid on polygons."
        + " The dense BEM cell matrix has (N + L) x L entries, so memory grows like"
        + " m^4.",
        examples=[16, 24],
    )
    kappa: float = Field(
        1.0,
        gt=0,
        description="Diffusivity in front of the Laplacian.",
        examples=[1.0],
    )
    polygon: Optional[list[tuple[float, float]]] = Field(
        None,
        description="Counterclockwise vertices of a simple polygon replacing the"
        + " default region of problem 3.",
        examples=[[[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]]],
    )
    explicit_inverse: bool = Field(
        False,
        description="Build the DRBEM D matrix with an explicit inverse of the"
        + " interpolation matrix instead of LU solves.",
    )
    sweep_tau: Optional[list[PositiveFloat]] = Field(
        None,
        description="Time steps to sweep over instead of tau.",
        examples=[["1/2", "1/4", "1/8", "1/16"]],
    )
    sweep_n: Optional[list[ElementCount]] = Field(
        None,
        description="Element counts to sweep over instead of n_elements.",
        examples=[[20, 40, 80, 160]],
    )
    sweep_alpha: Optional[list[FractionalOrder]] = Field(
        None,
        description="Derivative orders to sweep over instead of alpha.",
        examples=[[1.25, 1.5, 1.75]],
    )
    timing: bool = Field(
        True,
        description="Measure wall times. With the default true the wall_time_s column"
        + " differs between repeated runs while all other columns are identical. When"
        + " false it is written as 0.0 and the output is byte-reproducible.",
    )
    growth_limit: PositiveFloat = Field(
        10.0,
        description="A run fails as diverged when the largest computed magnitude at"
        + " the interior points exceeds growth_limit times the largest magnitude of"
        + " the exact solution over the whole run.",
        examples=[10.0],
    )

    @field_validator("tau", mode="before")
    @classmethod
    def check_tau(cls, value: Any) -> Any:
        """Accepts fractions."""
        return parse_fraction(value)

    @field_validator("sweep_tau", "sweep_n", "sweep_alpha", mode="before")
    @classmethod
    def check_sweeps(cls, value: Any) -> Any:
        """Accepts comma separated lists."""
        return parse_list(value)

    @field_validator("sweep_tau", "sweep_n", "sweep_alpha")
    @classmethod
    def check_sweep_not_empty(cls, value: Optional[list]) -> Optional[list]:
        """An empty sweep would produce no runs."""
        if value is not None and not value:
            raise ValueError("Sweep lists must not be empty.")
        return value

    @field_validator("polygon")
    @classmethod
    def check_polygon(
        cls, value: Optional[list[tuple[float, float]]]
    ) -> Optional[list[tuple[float, float]]]:
        """The vertices must form a simple counterclockwise polygon."""
        if value is not None:
            try:
                PolygonDomain(vertices=tuple(value))
            except ValidationError as error:
                raise ValueError(
                    "; ".join(str(detail["msg"]) for detail in error.errors())
                ) from error
        return value

    @model_validator(mode="after")
    def check_step_counts(self) -> "RunConfig":
        """T/tau has to be a positive integer for every time step in use."""
        for tau in self.sweep_tau or [self.tau]:
            if step_count(self.final_time, tau) is None:
                raise ValueError(
                    f"final_time {self.final_time} is not a positive integer multiple"
                    + f" of tau {tau}."
                )
        if self.polygon is not None and self.problem != 3:
            raise ValueError("A custom polygon is only used by problem 3.")
        return self

    def expand(self) -> list[models.RunSpec]:
        """All runs of the configuration, ordered by alpha, then N, then tau."""
        polygon = None if self.polygon is None else tuple(self.polygon)
        return [
            models.RunSpec(
                method=self.method,
                problem=self.problem,
                alpha=alpha,
                tau=tau,
                final_time=self.final_time,
                n_elements=n_elements,
                interior_res=self.interior_res,
                kappa=self.kappa,
                polygon=polygon,
                explicit_inverse=self.explicit_inverse,
                growth_limit=self.growth_limit,
            )
            for alpha in self.sweep_alpha or [self.alpha]
            for n_elements in self.sweep_n or [self.n_elements]
            for tau in self.sweep_tau or [self.tau]
        ]


def error_history(
    interior: np.ndarray,
    problem: models.ExactSolution,
    scheme: FractionalScheme,
    points: np.ndarray,
) -> list[models.ErrorHistoryEntry]:
    """RMS and mean relative errors after every step.

    `interior` holds one row of values at the points per time level, starting
    with the initial data.
    """
    if len(interior) != scheme.n_steps + 1:
        raise UsageError(
            operation="error_history",
            reason=f"expected {scheme.n_steps + 1} levels, got {len(interior)}.",
        )
    entries = []
    for step in range(1, scheme.n_steps + 1):
        t = scheme.time(step)
        exact = problem.exact(points, t)
        entries.append(
            models.ErrorHistoryEntry(
                step=step,
                t=t,
                rms_error=rms_error(interior[step], exact),
                mean_relative_error=mean_relative_error(interior[step], exact),
            )
        )
    return entries


def check_growth(interior: np.ndarray, *, scale: float, limit: float) -> None:
    """Reject a march whose values outgrow `limit` times `scale`.

    `interior` holds one row per time level. DivergedSolutionError names the
    first offending level.
    """
    peaks = np.abs(interior).max(axis=1, initial=0.0)
    bound = limit * scale
    runaway = peaks > bound
    if np.any(runaway):
        step = int(np.argmax(runaway))
        raise DivergedSolutionError(
            step=step, magnitude=float(peaks[step]), bound=bound
        )


def execute_run(spec: models.RunSpec, *, timing: bool = True) -> models.RunOutcome:
    """Run the full pipeline for a single configuration.

    Errors are measured at the interior cell points. The wall time covers
    assembly and time stepping only.
    """
    stand_in = None if spec.polygon is None else PolygonDomain(vertices=spec.polygon)
    problem = get_problem(spec.problem, spec.alpha, polygon=stand_in, kappa=spec.kappa)
    mesh = discretize_boundary(problem.domain, spec.n_elements)
    cells = interior_cells(problem.domain, spec.interior_res)
    scheme = FractionalScheme.create(
        alpha=spec.alpha, tau=spec.tau, n_steps=spec.n_steps, kappa=spec.kappa
    )

    start = time.perf_counter()
    if spec.method == "bem":
        history = bem_time_march(scheme, problem, mesh, cells)
    else:
        system = assemble_drbem(
            mesh, cells.points, spec.kappa, explicit_inverse=spec.explicit_inverse
        )
        history = drbem_time_march(system, scheme, problem)
    elapsed = time.perf_counter() - start

    interior = history.levels()[:, len(mesh) :]
    finite = np.all(np.isfinite(interior), axis=1)
    if not np.all(finite):
        raise NonFiniteSolutionError(step=int(np.argmin(finite)))

    exact_scale = max(
        float(np.abs(problem.exact(cells.points, scheme.time(step))).max())
        for step in range(scheme.n_steps + 1)
    )
    check_growth(interior, scale=exact_scale, limit=spec.growth_limit)

    errors = error_history(interior, problem, scheme, cells.points)

    final_exact = problem.exact(cells.points, scheme.final_time)
    record = models.RunRecord(
        method=spec.method,
        problem=spec.problem,
        alpha=spec.alpha,
        N=len(mesh),
        L=len(cells),
        tau=spec.tau,
        T=spec.final_time,
        rms_error=errors[-1].rms_error,
        wall_time_s=elapsed if timing else 0.0,
    )
    snapshot = models.FieldSnapshot(
        points=cells.points, numeric=interior[-1].copy(), exact=final_exact
    )
    return models.RunOutcome(
        record=record, snapshot=snapshot, error_history=errors
    )


class BenchmarkRunner(BenchmarkRunnerPort):
    """Runs every configured combination one after the other."""

    def __init__(self, *, config: RunConfig, report_writer: ReportWriterPort):
        """Initialize with the run configuration and a report writer."""
        self._config = config
        self._report_writer = report_writer

    def _execute(self, spec: models.RunSpec) -> models.RunOutcome:
        try:
            return execute_run(spec, timing=self._config.timing)
        except ConfigurationError as error:
            invalid_config = self.InvalidRunConfigError(reason=str(error))
            log.error(invalid_config)
            raise invalid_config from error
        except KnownError as error:
            failure = self.NumericalFailureError(run=spec, reason=str(error))
            log.critical(failure)
            raise failure from error

    def _write(self, outcomes: Sequence[models.RunOutcome]) -> None:
        last = outcomes[-1]
        try:
            self._report_writer.write_field(snapshot=last.snapshot)
            self._report_writer.write_error_history(entries=last.error_history)
            self._report_writer.write_table(
                records=[outcome.record for outcome in outcomes]
            )
        except ReportWriterPort.ReportWriteError as error:
            write_error = self.OutputWriteError(reason=str(error))
            log.error(write_error)
            raise write_error from error

    def run(self) -> list[models.RunRecord]:
        """Execute every configured run in sweep order, write the reports and
        return the table rows.
        """
        specs = self._config.expand()
        log.info(f"Starting {len(specs)} {self._config.method} run(s).")
        outcomes = []
        for spec in specs:
            outcome = self._execute(spec)
            record = outcome.record
            log.info(
                f"{record.method} problem {record.problem}: alpha={record.alpha}"
                + f" N={record.N} L={record.L} tau={record.tau}"
                + f" rms={record.rms_error:.6e} ({record.wall_time_s:.3f}s)"
            )
            outcomes.append(outcome)
        self._write(outcomes)
        return [outcome.record for outcome in outcomes]
