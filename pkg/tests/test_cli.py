"""
Tests for the Command-Line Entry Point
========================================

`main(argv)` returns the exit code instead of exiting, so these tests call
it directly. Exit codes: 0 success, 1 failed run, 2 invalid configuration.
"""

import os

import pytest
import yaml

from gliorad import __version__
from gliorad.cli.__main__ import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, build_parser, main
from gliorad.io.results import MANIFEST_NAME, load_manifest


# ─── Fixtures ────────────────────────────────────────────────

@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Keep GLIORAD_* variables from the calling shell out of the runs."""
    for key in list(os.environ):
        if key.startswith("GLIORAD_"):
            monkeypatch.delenv(key)


@pytest.fixture
def run_file(tmp_path):
    def _write(data):
        path = tmp_path / "run.yaml"
        base = {"grid": {"cells_per_axis": [40], "num_time_steps": 10}}
        path.write_text(yaml.safe_dump({**base, **data}))
        return path

    return _write


# ─── Exit codes ──────────────────────────────────────────────

def test_successful_run_returns_zero(tmp_path, run_file):
    out = tmp_path / "out"

    code = main(["--config", str(run_file({})), "--output-dir", str(out), "--seed", "7"])

    assert code == EXIT_OK
    manifest = load_manifest(out / MANIFEST_NAME)
    assert manifest.ok
    assert manifest.config["seed"] == 7


def test_mode_flag_overrides_run_file(tmp_path, run_file):
    out = tmp_path / "out"

    code = main(["-c", str(run_file({"mode": "forward"})), "-o", str(out), "-m", "adjoint"])

    assert code == EXIT_OK
    assert load_manifest(out / MANIFEST_NAME).mode == "adjoint"


def test_infeasible_budget_exits_with_config_code(tmp_path, run_file):
    out = tmp_path / "out"

    code = main(["--config", str(run_file({"control": {"budget": 3.0}})), "-o", str(out)])

    assert code == EXIT_CONFIG
    assert not out.exists()


def test_missing_run_file_exits_with_config_code(tmp_path):
    assert main(["--config", str(tmp_path / "absent.yaml")]) == EXIT_CONFIG


def test_failed_verification_exits_with_failure_code(tmp_path, run_file):
    path = run_file({
        "mode": "verify",
        "verify": {"suites": ["logistic"], "logistic_threshold": 1e-12},
    })

    code = main(["--config", str(path), "-o", str(tmp_path / "out")])

    assert code == EXIT_FAILED


# ─── Parser ──────────────────────────────────────────────────

def test_unknown_mode_is_rejected_by_the_parser():
    with pytest.raises(SystemExit) as exc_info:
        build_parser().parse_args(["--mode", "sideways"])

    assert exc_info.value.code == 2


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc_info:
        main(["--version"])

    assert exc_info.value.code == 0
    assert capsys.readouterr().out.strip() == f"gliorad {__version__}"


def test_parser_defaults_are_none():
    args = build_parser().parse_args([])

    assert args.config is None
    assert args.mode is None
    assert args.output_dir is None
    assert args.seed is None
