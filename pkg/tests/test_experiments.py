"""Tests for experiment configs, runners, artifacts and the response envelope.

Runs use the example configs under ``configs/`` where they are cheap, and
small inline configs otherwise.
"""

import csv
import json
import math
import tempfile
from pathlib import Path
from unittest.mock import AsyncMock, MagicMock

import pytest
import yaml
from pydantic import ValidationError

from src.cache.sqlite_cache import ResultCache
from src.config import load_config_file
from src.experiments.common import (
    ExitCode,
    ExperimentResult,
    Table,
    build_error_response,
    build_success_response,
    cached_experiment_call,
    dumps,
    exit_code_for,
)
from src.experiments.outputs import MANIFEST_FILE, emit_plot_data, format_number
from src.experiments.runner import cache_key, run_experiment
from src.experiments.schema import dump_experiment, parse_experiment

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def load(name: str):
    return parse_experiment(load_config_file(CONFIGS / name))


@pytest.fixture
def out_dir():
    """Create a temporary output directory for testing."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir) / "run"


def read_csv(path: Path) -> list[list[str]]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.reader(f))


def read_report(out: Path) -> dict:
    return json.loads((out / "report.json").read_text(encoding="utf-8"))


def two_state_risk(**overrides) -> dict:
    section = {
        "kind": "risk",
        "seed": 1,
        "model": {
            "source": {
                "family": "finite",
                "states": [[0.0], [1.0]],
                "transition": [[0.99, 0.01], [0.01, 0.99]],
            },
            "target": {
                "family": "finite",
                "states": [[0.0], [1.0]],
                "transition": [[0.8, 0.2], [0.2, 0.8]],
            },
            "n_p": 5,
            "noise": {"sigma": 0.5},
        },
        "bandwidths": [0.5],
        "reps": 2,
    }
    section.update(overrides)
    return section


# envelope


def test_build_success_response():
    """Test building success response."""
    data = {"kind": "rho", "data": {"value": 1.0}}

    response = build_success_response(data, source="computed", cached=False)

    assert response["status"] == "success"
    assert response["data"] == data
    assert response["metadata"]["source"] == "computed"
    assert response["metadata"]["cached"] is False
    assert "generated_at" in response["metadata"]
    assert "artifact_version" in response["metadata"]


def test_build_error_response():
    """Test building error response."""
    response = build_error_response("rho_h is infinite", "EXPLOSION")

    assert response["status"] == "error"
    assert response["error"] == {"message": "rho_h is infinite", "type": "EXPLOSION"}
    assert "data" not in response
    assert "generated_at" in response["metadata"]


def test_exit_codes_are_disjoint():
    """Test the mapping from error types to exit codes."""
    assert exit_code_for("VALIDATION_ERROR") == ExitCode.VALIDATION_ERROR == 1
    assert exit_code_for("CHECK_FAILED") == ExitCode.CHECK_FAILED == 2
    assert exit_code_for("EXPLOSION") == ExitCode.EXPLOSION == 3
    assert exit_code_for("SOMETHING_ELSE") == 1
    assert len({int(code) for code in ExitCode}) == 4


@pytest.mark.asyncio
async def test_cached_experiment_call_cache_hit():
    """Test that a cache hit skips the computation."""
    cache = AsyncMock()
    cache.get.return_value = '{"kind": "rho", "data": {"value": "inf"}}'
    compute = MagicMock()

    response = await cached_experiment_call(cache, "key", compute)

    cache.get.assert_called_once_with("key")
    compute.assert_not_called()
    assert response["data"] == {"kind": "rho", "data": {"value": "inf"}}
    assert response["metadata"]["cached"] is True
    assert response["metadata"]["source"] == "cache"


@pytest.mark.asyncio
async def test_cached_experiment_call_cache_miss():
    """Test that a miss computes, stores the JSON text and returns the decoded document."""
    cache = AsyncMock()
    cache.get.return_value = None
    result = ExperimentResult(kind="rho", data={"value": math.inf, "h": 0.25})
    compute = MagicMock(return_value=result)

    response = await cached_experiment_call(cache, "key", compute, "arg")

    compute.assert_called_once_with("arg")
    cache.set.assert_called_once()
    stored = cache.set.call_args.args[1]
    assert stored == dumps(result)
    assert response["data"]["data"] == {"h": 0.25, "value": "inf"}
    assert response["metadata"]["cached"] is False


@pytest.mark.asyncio
async def test_cached_experiment_call_reraises():
    """Test that computation errors propagate."""
    compute = MagicMock(side_effect=ValueError("bad grid"))

    with pytest.raises(ValueError, match="bad grid"):
        await cached_experiment_call(None, "key", compute)


# outputs


def test_format_number_uses_seventeen_digits():
    """Test CSV number formatting and the inf token."""
    assert format_number(2.0 / 3.0) == "0.66666666666666663"
    assert float(format_number(2.0 / 3.0)) == 2.0 / 3.0
    assert format_number(math.inf) == "inf"
    assert format_number(3) == "3"
    assert format_number(True) == "1"
    assert format_number(None) == ""


def test_emit_plot_data_for_rate_report():
    """Test that four rate points give a four-row log-log series."""
    document = {"data": {"points": [[64, 0.1], [128, 0.05], [256, 0.025], [512, 0.0125]]}}

    series = emit_plot_data(document)

    table = series["rate_plot.csv"]
    assert table.header == ["log_n", "log_risk"]
    assert len(table.rows) == 4
    assert table.rows[0] == [pytest.approx(math.log(64)), pytest.approx(math.log(0.1))]


def test_emit_plot_data_excludes_infinite_rho_from_fit():
    """Test that an infinite rho is kept in the plot series and dropped from the fit series."""
    document = {"data": {"curves": {"PQ": {"h": [1.0, 0.5, 0.1], "value": [1.0, 2.0, "inf"]}}}}

    series = emit_plot_data(document)

    plot = series["rho_PQ_plot.csv"]
    fit = series["rho_PQ_fit.csv"]
    assert len(plot.rows) == 3
    assert format_number(plot.rows[2][1]) == "inf"
    assert len(fit.rows) == 2


# schema


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.yaml")), ids=lambda p: p.stem)
def test_example_configs_round_trip(path):
    """Test that parse -> dump -> parse reproduces every example config."""
    config = parse_experiment(load_config_file(path))

    dumped = dump_experiment(config)
    reparsed = parse_experiment(yaml.safe_load(yaml.safe_dump(dumped)))

    assert dump_experiment(reparsed) == dumped


def test_negative_sigma_is_a_field_error():
    """Test that a negative noise level is reported at its field."""
    section = two_state_risk()
    section["model"]["noise"]["sigma"] = -1.0

    with pytest.raises(ValidationError) as excinfo:
        parse_experiment(section)

    locations = [err["loc"] for err in excinfo.value.errors()]
    assert ("risk", "model", "noise", "sigma") in locations


def test_unknown_kind_and_keys_are_rejected():
    """Test that configs with an unknown kind or stray keys fail validation."""
    with pytest.raises(ValidationError):
        parse_experiment({"kind": "histogram"})
    with pytest.raises(ValidationError):
        parse_experiment({"kind": "spectral", "kernels": {}, "colour": "red"})


def test_rho_fit_alpha_needs_alpha_rule():
    """Test that a measured alpha is refused for a rule without alpha."""
    section = {
        "kind": "rate-sweep",
        "template": {
            "source": {"family": "independence", "law": {"kind": "uniform-box"}},
            "target": {"family": "independence", "law": {"kind": "uniform-box"}},
            "n_p": 1,
        },
        "n_list": [64, 128, 256, 512],
        "alpha_from": "rho-fit",
    }

    with pytest.raises(ValidationError, match="needs the alpha rule"):
        parse_experiment(section)


def test_rate_sweep_config_checks_two_sided_band():
    """Test that the shifted-rate config measures alpha and keeps the +- 0.15 band."""
    config = load("rate_beta_shift.yaml")

    assert config.alpha_from == "rho-fit"
    assert config.rule.alpha == 3.0
    assert config.tolerance == 0.15
    assert "one_sided" not in dump_experiment(config)


def test_cache_key_ignores_output_directory():
    """Test that the output directory does not change the cache key."""
    first = parse_experiment(two_state_risk(output="a"))
    second = parse_experiment(two_state_risk(output="b"))
    other_seed = parse_experiment(two_state_risk(seed=2))

    assert cache_key(first) == cache_key(second)
    assert cache_key(first) != cache_key(other_seed)


# runners


@pytest.mark.asyncio
async def test_spectral_two_state(out_dir):
    """Test gamma* = 0.4 and tau = 3 for a = 0.3, b = 0.1."""
    outcome = await run_experiment(load("spectral_two_state.yaml"), out_dir)

    assert outcome.exit_code == ExitCode.SUCCESS
    report = read_report(out_dir)["data"]["kernels"]["P"]
    assert report["absolute_gap"] == pytest.approx(0.4)
    assert report["mixing_time"] == 3
    assert report["stationary"] == pytest.approx([0.25, 0.75])
    rows = read_csv(out_dir / "spectral.csv")
    assert rows[0][0] == "kernel"
    assert [row[0] for row in rows[1:]] == ["P", "Q", "beta"]


@pytest.mark.asyncio
async def test_rho_uniform_closed_form(out_dir):
    """Test the CSV row at h = 0.25 for uniform/uniform."""
    outcome = await run_experiment(load("rho_uniform.yaml"), out_dir)

    assert outcome.exit_code == ExitCode.SUCCESS
    rows = read_csv(out_dir / "rho.csv")
    assert rows[0] == ["h", "value", "std_error", "explosion"]
    by_h = {float(row[0]): float(row[1]) for row in rows[1:]}
    assert by_h[0.25] == pytest.approx(2.3863, abs=1e-4)
    assert by_h[1.0] == 1.0
    assert read_report(out_dir)["data"]["method"] == "closed-form"


@pytest.mark.asyncio
async def test_rho_explosion_exits_three(out_dir):
    """Test that a segment source with a square target stops with the explosion code."""
    outcome = await run_experiment(load("rho_explosion.yaml"), out_dir)

    assert outcome.exit_code == ExitCode.EXPLOSION
    assert outcome.response["error"]["type"] == "EXPLOSION"
    report = read_report(out_dir)
    assert report["error"]["type"] == "EXPLOSION"
    assert "infinite" in report["error"]["message"]
    manifest = json.loads((out_dir / MANIFEST_FILE).read_text(encoding="utf-8"))
    assert manifest["exit_code"] == 3


@pytest.mark.asyncio
async def test_rho_reversed_explosion_stays_finite(out_dir):
    """Test that a square source with a segment target stays finite."""
    outcome = await run_experiment(load("rho_explosion_reversed.yaml"), out_dir)

    assert outcome.exit_code == ExitCode.SUCCESS
    rows = read_csv(out_dir / "rho.csv")
    assert all(math.isfinite(float(row[1])) for row in rows[1:])
    assert all(row[3] == "0" for row in rows[1:])


@pytest.mark.asyncio
async def test_segment_self_similarity_slope(out_dir):
    """Test that rho_h(Q, Q) on a segment grows like 1/h over the lower half of the grid."""
    outcome = await run_experiment(load("rho_segment_doubling.yaml"), out_dir)

    assert outcome.exit_code == ExitCode.SUCCESS
    fit = read_report(out_dir)["data"]["fit"]
    assert fit["slope"] == pytest.approx(1.0, abs=0.15)
    assert (out_dir / "rho_PQ_fit.csv").exists()


@pytest.mark.asyncio
async def test_alpha_check_pass_and_fail(out_dir):
    """Test a passing alpha-family check and a failing one with exit code 2."""
    config = load("alpha_check_uniform.yaml")
    passed = await run_experiment(config, out_dir / "pass")

    section = dump_experiment(config) | {"alpha": 0.5, "constant": 1.0}
    failed = await run_experiment(parse_experiment(section), out_dir / "fail")

    assert passed.exit_code == ExitCode.SUCCESS
    assert read_report(out_dir / "pass")["data"]["check"]["sup_value"] == pytest.approx(1.0)
    assert failed.exit_code == ExitCode.CHECK_FAILED
    report = read_report(out_dir / "fail")
    assert report["verdict"] == "fail"
    assert report["data"]["check"]["witness_h"] == pytest.approx(0.005)


@pytest.mark.asyncio
async def test_transfer_check_beta_chains(out_dir):
    """Test the analytic beta-chain exponent and the failure of gamma - 0.2 at the origin."""
    passed = await run_experiment(load("transfer_beta.yaml"), out_dir / "pass")
    failed = await run_experiment(load("transfer_beta_fail.yaml"), out_dir / "fail")

    assert passed.exit_code == ExitCode.SUCCESS
    membership = read_report(out_dir / "pass")["data"]["membership"]["implied"]
    assert membership["alpha"] == pytest.approx(3.0)
    assert failed.exit_code == ExitCode.CHECK_FAILED
    check = read_report(out_dir / "fail")["data"]["check"]
    assert check["witness"]["x"] == [0.0]
    assert check["witness"]["y"] == [0.0]
    assert check["witness"]["h"] < 0.5**5
    assert check["worst_margin"] < 0


@pytest.mark.asyncio
async def test_risk_two_state_within_bound(out_dir):
    """Test that the two-state risk run passes its bound check."""
    outcome = await run_experiment(load("risk_two_state.yaml"), out_dir)

    assert outcome.exit_code == ExitCode.SUCCESS
    rows = read_csv(out_dir / "risk.csv")
    assert rows[0][0] == "h"
    assert [row[-1] for row in rows[1:]] == ["1", "1"]
    assert all(float(row[3]) >= float(row[4]) for row in rows[1:])


@pytest.mark.asyncio
async def test_risk_precondition_failure_exits_one(out_dir):
    """Test that a source block shorter than 1/gamma_ps is a validation error."""
    outcome = await run_experiment(parse_experiment(two_state_risk()), out_dir)

    assert outcome.exit_code == ExitCode.VALIDATION_ERROR
    assert "P block" in read_report(out_dir)["error"]["message"]


@pytest.mark.asyncio
async def test_predict_two_state_decay(out_dir):
    """Test the two-state gap decay check and its table."""
    outcome = await run_experiment(load("predict_two_state.yaml"), out_dir)

    assert outcome.exit_code == ExitCode.SUCCESS
    rows = read_csv(out_dir / "decay.csv")
    assert [int(row[0]) for row in rows[1:]] == [1, 2, 4, 8]
    assert rows[0] == ["m", "prediction", "generalization", "gap", "se", "envelope"]
    assert read_report(out_dir)["data"]["decay"]["slope"] <= -0.2108256237659907


@pytest.mark.asyncio
async def test_rate_sweep_writes_plot_series(out_dir):
    """Test a four-point sweep and its log-log series."""
    section = {
        "kind": "rate-sweep",
        "seed": 9,
        "template": {
            "source": {"family": "independence", "law": {"kind": "uniform-box"}},
            "target": {"family": "independence", "law": {"kind": "uniform-box"}},
            "n_p": 1,
            "noise": {"sigma": 0.5},
        },
        "n_list": [64, 128, 256, 512],
        "reps": 4,
        "test_n": 500,
    }

    outcome = await run_experiment(parse_experiment(section), out_dir)

    assert outcome.exit_code == ExitCode.SUCCESS
    plot = read_csv(out_dir / "rate_plot.csv")
    assert plot[0] == ["log_n", "log_risk"]
    assert len(plot) == 5
    assert float(plot[1][0]) == pytest.approx(math.log(64))
    rates = read_csv(out_dir / "rates.csv")
    assert rates[0] == ["n", "n_P", "n_Q", "h", "risk", "se", "bound"]
    for row in rates[1:]:
        assert row[6] != ""
        assert float(row[6]) >= float(row[4]) - 3 * float(row[5])
    data = read_report(out_dir)["data"]
    assert data["alpha_rule"] is None
    assert data["alpha_used"] is None


@pytest.mark.asyncio
async def test_rate_sweep_with_three_points_exits_one(out_dir):
    """Test that too short a sweep is a validation error."""
    section = {
        "kind": "rate-sweep",
        "template": {
            "source": {"family": "independence", "law": {"kind": "uniform-box"}},
            "target": {"family": "independence", "law": {"kind": "uniform-box"}},
            "n_p": 1,
        },
        "n_list": [64, 128, 256],
        "reps": 2,
    }

    outcome = await run_experiment(parse_experiment(section), out_dir)

    assert outcome.exit_code == ExitCode.VALIDATION_ERROR


# artifacts and determinism


def _strip_timestamp(text: str) -> list[str]:
    return [line for line in text.splitlines() if '"generated_at"' not in line]


@pytest.mark.asyncio
async def test_manifest_lists_every_file(out_dir):
    """Test that the manifest echoes the config and references each artifact."""
    config = load("rho_uniform.yaml")
    outcome = await run_experiment(config, out_dir)

    text = (out_dir / MANIFEST_FILE).read_text(encoding="utf-8")
    manifest = json.loads(text)
    written = sorted(p.name for p in out_dir.iterdir() if p.name != MANIFEST_FILE)
    assert manifest["files"] == written == outcome.files
    assert manifest["config"] == json.loads(dumps(dump_experiment(config)))
    assert sum('"generated_at"' in line for line in text.splitlines()) == 1
    assert {"rho_PQ_plot.csv", "rho_PQ_fit.csv", "rho.csv", "report.json"} <= set(written)


@pytest.mark.asyncio
async def test_same_seed_gives_identical_artifacts(out_dir):
    """Test byte-identical outputs across two runs, the manifest timestamp aside."""
    config = load("rho_explosion_reversed.yaml")
    first = await run_experiment(config, out_dir / "a")
    second = await run_experiment(config, out_dir / "b")

    assert first.files == second.files
    for name in first.files:
        assert (out_dir / "a" / name).read_bytes() == (out_dir / "b" / name).read_bytes()
    assert _strip_timestamp((out_dir / "a" / MANIFEST_FILE).read_text()) == _strip_timestamp(
        (out_dir / "b" / MANIFEST_FILE).read_text()
    )


@pytest.mark.asyncio
async def test_cached_run_matches_fresh_run(out_dir):
    """Test that a cache hit writes the same bytes as the computation."""
    config = load("predict_two_state.yaml")
    cache = ResultCache(str(out_dir.parent / "cache.db"))
    await cache.initialize()
    try:
        fresh = await run_experiment(config, out_dir / "fresh", cache)
        cached = await run_experiment(config, out_dir / "cached", cache)
    finally:
        await cache.close()

    assert fresh.response["metadata"]["cached"] is False
    assert cached.response["metadata"]["cached"] is True
    for name in fresh.files:
        assert (out_dir / "fresh" / name).read_bytes() == (out_dir / "cached" / name).read_bytes()


def test_table_model_accepts_mixed_cells():
    """Test that tables hold numbers, strings and blanks."""
    table = Table(header=["a", "b", "c"], rows=[[1, "inf", None]])

    assert [format_number(cell) for cell in table.rows[0]] == ["1", "inf", ""]
