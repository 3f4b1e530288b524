import sys

import pytest

import irswpcn.validation
from irswpcn.__main__ import _run_from_commandline, main
from irswpcn.experiments import CSV_COLUMNS

CONFIG = """\
name = "cli"
realizations = 1
algorithms = ["random-no-ta", "random-with-ta"]

[system]
N = 2
clusters = [1, 1]

[sweep]
name = "n"
values = [2, 3]
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "cli.toml"
    path.write_text(CONFIG)
    return str(path)


def test_validate(monkeypatch, capsys):
    checks = (irswpcn.validation.check_time_allocation,)
    monkeypatch.setattr(irswpcn.validation, "CHECKS", checks)
    assert _run_from_commandline(["irswpcn", "validate", "--seeds", "2"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("PASS time-allocation:")


def test_run_writes_rows_to_stdout(config_file, capsys):
    assert _run_from_commandline(["irswpcn", "-q", "run", "--config", config_file]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + 2 * 2
    assert {line.split(",")[1] for line in lines[1:]} == {"2", "3"}


def test_run_with_output_directory(config_file, tmp_path, capsys):
    out_dir = tmp_path / "results"
    args = ["irswpcn", "run", "--config", config_file, "--out", str(out_dir)]
    args += ["--realizations", "2", "--algorithms", "random-no-ta"]
    assert _run_from_commandline(args) == 0
    assert capsys.readouterr().out == ""
    lines = (out_dir / "cli.csv").read_text().splitlines()
    assert len(lines) == 3
    assert all(line.split(",")[5] == "2" for line in lines[1:])
    assert (out_dir / "cli.meta.json").exists()


def test_usage_error_exits_with_two():
    with pytest.raises(SystemExit) as info:
        _run_from_commandline(["irswpcn", "sweep", "fig9"])
    assert info.value.code == 2


def test_main_reports_one_error_line(tmp_path, monkeypatch, capsys):
    path = tmp_path / "bad.toml"
    path.write_text(CONFIG.replace('name = "n"', 'name = "speed"'))
    monkeypatch.setattr(sys, "argv", ["irswpcn", "-q", "run", "--config", str(path)])
    with pytest.raises(SystemExit) as info:
        main()
    assert info.value.code == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert err[-1].startswith("error: ValueError: unknown sweep 'speed'")
