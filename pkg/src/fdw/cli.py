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

"""Entrypoint of the package"""

import json
from pathlib import Path
from typing import Optional

import typer
import yaml

from fdw.core.benchmark import RunConfig
from fdw.main import load_config, run_benchmark
from fdw.ports.inbound.benchmark import BenchmarkRunnerPort

EXIT_INVALID_CONFIG = 2
EXIT_NUMERICAL_FAILURE = 3
EXIT_WRITE_FAILURE = 4

cli = typer.Typer()


def _fail(message: str, code: int) -> typer.Exit:
    typer.echo(message, err=True)
    return typer.Exit(code=code)


@cli.command(name="run")
def sync_run(  # noqa: PLR0913
    config: Optional[Path] = typer.Option(
        None,
        "--config",
        exists=True,
        dir_okay=False,
        help="Run configuration as JSON or YAML.",
    ),
    method: Optional[str] = typer.Option(None, help="bem or drbem."),
    problem: Optional[int] = typer.Option(None, help="Test problem 1, 2 or 3."),
    alpha: Optional[float] = typer.Option(None, help="Caputo order in (1, 2)."),
    tau: Optional[str] = typer.Option(None, help="Time step, e.g. 0.125 or 1/8."),
    n_elements: Optional[int] = typer.Option(None, help="Boundary elements N."),
    interior_res: Optional[int] = typer.Option(None, help="Interior resolution m."),
    final_time: Optional[float] = typer.Option(None, help="Final time T."),
    out: Optional[Path] = typer.Option(None, help="Table CSV, stdout if unset."),
    field_out: Optional[Path] = typer.Option(None, help="Final-time field CSV."),
    history_out: Optional[Path] = typer.Option(None, help="Per-step error CSV."),
    sweep_tau: Optional[str] = typer.Option(None, help="Time steps, e.g. 1/2,1/4."),
    sweep_n: Optional[str] = typer.Option(None, help="Element counts, e.g. 20,40."),
    sweep_alpha: Optional[str] = typer.Option(None, help="Orders, e.g. 1.25,1.75."),
    explicit_inverse: Optional[bool] = typer.Option(
        None, help="DRBEM D matrix via an explicit inverse."
    ),
    timing: Optional[bool] = typer.Option(None, help="Measure wall times."),
):
    """Run a benchmark configuration and write the convergence table."""
    overrides = {
        key: value
        for key, value in {
            "method": method,
            "problem": problem,
            "alpha": alpha,
            "tau": tau,
            "n_elements": n_elements,
            "interior_res": interior_res,
            "final_time": final_time,
            "out": out,
            "field_out": field_out,
            "history_out": history_out,
            "sweep_tau": sweep_tau,
            "sweep_n": sweep_n,
            "sweep_alpha": sweep_alpha,
            "explicit_inverse": explicit_inverse,
            "timing": timing,
        }.items()
        if value is not None
    }
    try:
        run_config = load_config(config_yaml=config, overrides=overrides)
    except (ValueError, TypeError, yaml.YAMLError) as error:
        raise _fail(f"Invalid configuration: {error}", EXIT_INVALID_CONFIG) from error

    try:
        run_benchmark(config=run_config)
    except BenchmarkRunnerPort.InvalidRunConfigError as error:
        raise _fail(str(error), EXIT_INVALID_CONFIG) from error
    except BenchmarkRunnerPort.NumericalFailureError as error:
        raise _fail(str(error), EXIT_NUMERICAL_FAILURE) from error
    except BenchmarkRunnerPort.OutputWriteError as error:
        raise _fail(str(error), EXIT_WRITE_FAILURE) from error


@cli.command(name="config-template")
def sync_config_template():
    """Print the default run configuration as JSON."""
    defaults = RunConfig.model_construct().model_dump(mode="json")
    typer.echo(json.dumps(defaults, indent=2))
