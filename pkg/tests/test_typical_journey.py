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

"""Tests typical user journeys"""

import csv
import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from fdw.adapters.outbound.csv_report import (
    FIELD_HEADER,
    HISTORY_HEADER,
    TABLE_HEADER,
    emit_table,
)
from fdw.cli import cli
from fdw.core.errors import UsageError
from fdw.main import load_config, run_benchmark
from tests.fixtures.config import TEST_CONFIG_YAML, get_config
from tests.fixtures.utils import InMemoryReportWriter

runner = CliRunner()


def _invoke(*args: str):
    return runner.invoke(cli, ["run", "--config", str(TEST_CONFIG_YAML), *args])


def _read_csv(path: Path) -> list[list[str]]:
    with path.open(encoding="utf-8", newline="") as file:
        return list(csv.reader(file))


def test_single_run_table(tmp_path: Path):
    """Runs the test configuration and checks the convergence table."""
    out = tmp_path / "table.csv"
    result = _invoke("--out", str(out))
    assert result.exit_code == 0, result.output

    rows = _read_csv(out)
    assert rows[0] == list(TABLE_HEADER)
    assert len(rows) == 2
    row = dict(zip(rows[0], rows[1]))
    assert row["method"] == "bem"
    assert row["problem"] == "2"
    assert float(row["alpha"]) == 1.25
    assert int(row["N"]) == 16
    assert int(row["L"]) == 36
    assert float(row["tau"]) == 0.25
    assert float(row["T"]) == 1.0
    assert 0.0 < float(row["rms_error"]) < 1.0
    assert float(row["wall_time_s"]) == 0.0


def test_table_on_stdout():
    """Without an output file the table goes to stdout."""
    result = _invoke("--method", "drbem")
    assert result.exit_code == 0, result.output

    lines = [line for line in result.stdout.splitlines() if line.startswith(("m", "d"))]
    assert lines[0] == ",".join(TABLE_HEADER)
    assert lines[1].startswith("drbem,2,1.25,16,36,0.25,1.0,")


def test_tau_sweep(tmp_path: Path):
    """A sweep over two time steps writes one row per step, in the given order."""
    out = tmp_path / "sweep.csv"
    result = _invoke("--sweep-tau", "1/2,1/4", "--out", str(out))
    assert result.exit_code == 0, result.output

    rows = _read_csv(out)
    assert len(rows) == 3
    assert [float(row[5]) for row in rows[1:]] == [0.5, 0.25]


def test_alpha_and_n_sweep_order(tmp_path: Path):
    """Sweeps are ordered by alpha first, then by the element count."""
    out = tmp_path / "sweep.csv"
    result = _invoke(
        "--sweep-alpha", "1.25,1.75", "--sweep-n", "12,16", "--out", str(out)
    )
    assert result.exit_code == 0, result.output

    rows = _read_csv(out)[1:]
    assert [(float(row[2]), int(row[3])) for row in rows] == [
        (1.25, 12),
        (1.25, 16),
        (1.75, 12),
        (1.75, 16),
    ]


def test_reproducible_output(tmp_path: Path):
    """Two runs with timing disabled produce identical bytes."""
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    assert _invoke("--out", str(first)).exit_code == 0
    assert _invoke("--out", str(second)).exit_code == 0
    assert first.read_bytes() == second.read_bytes()


def test_timed_runs_differ_only_in_wall_time(tmp_path: Path):
    """With timing enabled only the wall_time_s column changes between runs."""
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    assert _invoke("--timing", "--out", str(first)).exit_code == 0
    assert _invoke("--timing", "--out", str(second)).exit_code == 0

    first_rows, second_rows = _read_csv(first), _read_csv(second)
    column = first_rows[0].index("wall_time_s")
    assert first_rows[0] == second_rows[0]
    for first_row, second_row in zip(first_rows[1:], second_rows[1:]):
        assert float(first_row[column]) > 0.0
        assert float(second_row[column]) > 0.0
        del first_row[column], second_row[column]
        assert first_row == second_row


def test_field_and_history_outputs(tmp_path: Path):
    """The field and error history files describe the final run."""
    out = tmp_path / "table.csv"
    field_out = tmp_path / "nested" / "field.csv"
    history_out = tmp_path / "history.csv"
    result = _invoke(
        "--out",
        str(out),
        "--field-out",
        str(field_out),
        "--history-out",
        str(history_out),
    )
    assert result.exit_code == 0, result.output

    field = _read_csv(field_out)
    assert field[0] == list(FIELD_HEADER)
    assert len(field) == 1 + 36
    for x, y, numeric, exact, error in field[1:]:
        assert x.strip() and y.strip()
        assert float(error) == pytest.approx(abs(float(numeric) - float(exact)))

    history = _read_csv(history_out)
    assert history[0] == list(HISTORY_HEADER)
    assert [int(row[0]) for row in history[1:]] == [1, 2, 3, 4]
    assert [float(row[1]) for row in history[1:]] == [0.25, 0.5, 0.75, 1.0]

    table = _read_csv(out)
    assert history[-1][2] == table[1][7]


def test_config_template_round_trip(tmp_path: Path):
    """The printed template is a valid configuration file."""
    result = runner.invoke(cli, ["config-template"])
    assert result.exit_code == 0, result.output

    template = json.loads(result.stdout)
    assert template["method"] == "bem"
    assert template["tau"] == 0.125

    config_file = tmp_path / "template.json"
    config_file.write_text(result.stdout, encoding="utf-8")
    config = load_config(config_yaml=config_file)
    assert config.method == "bem"
    assert config.problem == 1
    assert config.n_elements == 80
    assert config.sweep_tau is None


def test_config_accepts_fractions():
    """Time steps can be given as fractions, sweeps as comma separated strings."""
    config = get_config(tau="1/8", sweep_n="20, 40")
    assert config.tau == 0.125
    assert config.sweep_n == [20, 40]
    assert len(config.expand()) == 2


def test_runner_with_in_memory_reports():
    """Runs the core through main with a report writer kept in memory."""
    config = get_config(sweep_tau=["1/2", "1/4"])
    report_writer = InMemoryReportWriter()

    records = run_benchmark(config=config, report_writer_override=report_writer)

    assert records == report_writer.records
    assert [record.tau for record in records] == [0.5, 0.25]
    assert all(record.wall_time_s == 0.0 for record in records)

    assert report_writer.snapshot is not None
    assert report_writer.snapshot.points.shape == (36, 2)
    assert len(report_writer.history) == 4
    assert report_writer.history[-1].rms_error == records[-1].rms_error


def test_emit_table():
    """A single record renders to a header and one row."""
    records = run_benchmark(
        config=get_config(), report_writer_override=InMemoryReportWriter()
    )
    text = emit_table(records)
    assert text.endswith("\n")
    assert len(text.splitlines()) == 2

    with pytest.raises(UsageError):
        emit_table([])
