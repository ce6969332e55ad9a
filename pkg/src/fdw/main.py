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

"""In this module object construction and dependency injection is carried out."""

from pathlib import Path
from typing import Any, Optional

from hexkit.log import configure_logging

from fdw.config import Config
from fdw.core.models import RunRecord
from fdw.inject import prepare_core
from fdw.ports.outbound.report import ReportWriterPort


def load_config(
    *, config_yaml: Optional[Path] = None, overrides: Optional[dict[str, Any]] = None
) -> Config:
    """Read the config file (YAML or JSON), the environment and explicit overrides,
    in increasing order of precedence.
    """
    return Config(config_yaml=config_yaml, **(overrides or {}))  # type: ignore


def run_benchmark(
    *, config: Config, report_writer_override: Optional[ReportWriterPort] = None
) -> list[RunRecord]:
    """Run all configured benchmark runs and write the reports."""
    configure_logging(config=config)

    with prepare_core(
        config=config, report_writer_override=report_writer_override
    ) as runner:
        return runner.run()
