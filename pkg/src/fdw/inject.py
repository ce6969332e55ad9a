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

"""Module hosting the dependency injection container."""

from collections.abc import Generator
from contextlib import contextmanager
from typing import Optional

from fdw.adapters.outbound.csv_report import CsvReportWriter
from fdw.config import Config
from fdw.core.benchmark import BenchmarkRunner
from fdw.ports.inbound.benchmark import BenchmarkRunnerPort
from fdw.ports.outbound.report import ReportWriterPort


@contextmanager
def prepare_core(
    *,
    config: Config,
    report_writer_override: Optional[ReportWriterPort] = None,
) -> Generator[BenchmarkRunnerPort, None, None]:
    """Constructs the benchmark runner and its outbound dependencies.
    By default, reports go to the CSV destinations in the config but you can also
    provide a writer using the report_writer_override parameter.
    """
    report_writer = (
        report_writer_override
        if report_writer_override is not None
        else CsvReportWriter(config=config)
    )
    yield BenchmarkRunner(config=config, report_writer=report_writer)
