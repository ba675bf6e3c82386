"""Tests for the shiftlab command-line entry point."""

import json
import tempfile
from pathlib import Path

import pytest
import yaml

from src.cli import build_parser, main, output_directory
from src.experiments.schema import parse_experiment

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def workdir():
    """Create a temporary directory for configs and outputs."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


def write_config(directory: Path, section: dict) -> Path:
    path = directory / "experiment.yaml"
    path.write_text(yaml.safe_dump(section), encoding="utf-8")
    return path


def uniform_rho(**overrides) -> dict:
    section = {
        "kind": "rho",
        "seed": 0,
        "source": {"family": "independence", "law": {"kind": "uniform-box"}},
        "target": {"family": "independence", "law": {"kind": "uniform-box"}},
        "grid": {"values": [1.0, 0.5]},
    }
    section.update(overrides)
    return section


def test_parser_requires_config():
    """Test that --config is mandatory."""
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_main_success_prints_summary(workdir, capsys):
    """Test a successful run: exit 0 and a JSON summary on stdout."""
    out = workdir / "out"

    code = main(["--config", str(write_config(workdir, uniform_rho())), "--out", str(out)])

    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["kind"] == "rho"
    assert summary["exit_code"] == 0
    assert "report.json" in summary["files"]
    assert (out / "manifest.json").exists()


def test_main_quiet_keeps_stdout_empty(workdir, capsys):
    """Test that --quiet suppresses the summary."""
    config = write_config(workdir, uniform_rho())

    code = main(["--config", str(config), "--out", str(workdir / "out"), "--quiet"])

    assert code == 0
    assert capsys.readouterr().out == ""


def test_main_invalid_config_names_the_field(workdir, capsys):
    """Test that a negative noise level exits 1 with a field-level message."""
    section = {
        "kind": "predict",
        "model": {
            "source": {"family": "independence", "law": {"kind": "uniform-box"}},
            "target": {"family": "independence", "law": {"kind": "uniform-box"}},
            "n_p": 10,
            "noise": {"sigma": -1.0},
        },
        "h": 0.1,
        "m_list": [1],
    }
    out = workdir / "out"

    code = main(["--config", str(write_config(workdir, section)), "--out", str(out), "--quiet"])

    assert code == 1
    assert "model.noise.sigma" in capsys.readouterr().err
    assert not out.exists()


def test_main_missing_config_exits_one(workdir, capsys):
    """Test that a missing file is a validation error."""
    code = main(["--config", str(workdir / "absent.yaml"), "--quiet"])

    assert code == 1
    assert "absent.yaml" in capsys.readouterr().err


def test_main_failed_check_exits_two(workdir, capsys):
    """Test that a failed alpha-family check exits 2 and still writes its report."""
    section = uniform_rho(kind="alpha-check", alpha=0.5, constant=1.0, grid={"values": [1.0, 0.01]})
    out = workdir / "out"

    code = main(["--config", str(write_config(workdir, section)), "--out", str(out), "--quiet"])

    assert code == 2
    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["verdict"] == "fail"
    assert capsys.readouterr().err


def test_main_explosion_exits_three(workdir):
    """Test the explosion exit code on the segment-to-square example."""
    code = main(
        ["--config", str(CONFIGS / "rho_explosion.yaml"), "--out", str(workdir), "--quiet"]
    )

    assert code == 3


def test_main_seed_override(workdir):
    """Test that --seed replaces the config seed in the manifest."""
    out = workdir / "out"

    code = main(
        [
            "--config",
            str(write_config(workdir, uniform_rho(seed=3))),
            "--seed",
            "17",
            "--out",
            str(out),
            "--quiet",
        ]
    )

    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["config"]["seed"] == 17


def test_output_directory_precedence():
    """Test --out over the config output over runs/<kind>."""
    with_output = parse_experiment(uniform_rho(output="results/rho"))
    without_output = parse_experiment(uniform_rho())

    assert output_directory(with_output, Path("cli")) == Path("cli")
    assert output_directory(with_output, None) == Path("results/rho")
    assert output_directory(without_output, None) == Path("runs/rho")
