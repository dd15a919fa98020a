"""Experiment harness: config parsing, verdicts, runners, CLI round trips."""

import json

import numpy as np
import pytest
from scipy.special import j0

from homolab import cli
from homolab.harness import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentConfig,
    compare_to_theory,
    parse_eps_list,
    run,
)
from homolab.oscint import EXACT_SLOPE


def test_parse_eps_list_range():
    assert parse_eps_list("2^-3..2^-6") == [2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6]


def test_parse_eps_list_explicit():
    assert parse_eps_list([0.5, 0.25]) == [0.5, 0.25]


@pytest.mark.parametrize("bad", ["2^-6..2^-3", [0.25, 0.5], [0.5, -0.1], "junk"])
def test_parse_eps_list_rejects(bad):
    with pytest.raises(ConfigError):
        parse_eps_list(bad)


def test_compare_to_theory():
    assert compare_to_theory(0.52, 0.5, 0.05)
    assert compare_to_theory(0.46, 0.5, 0.05)
    assert not compare_to_theory(0.40, 0.5, 0.05)
    assert compare_to_theory(EXACT_SLOPE, 100.0, 0.0)


def test_config_requires_known_kind():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"kind": "bogus"})


def test_config_surface_required_for_weyl():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"kind": "weyl", "eps": [0.5, 0.25]})


def test_config_robin_rate_h_guard():
    raw = {
        "kind": "robin_rate",
        "surface": {"type": "circle"},
        "eps": [1 / 8, 1 / 16],
        "A": "laminate",
        "b": {"builtin": "constant", "value": 2.0},
        "h": 1 / 64,  # needs h <= eps_min / 8 = 1/128
    }
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(raw)


WEYL_RAW = {
    "kind": "weyl",
    "surface": {"type": "circle"},
    "eps": "2^-5..2^-9",
    "f": {"builtin": "cosine", "k": [1, 0]},
    "drop_first": 0,
}


def test_weyl_run_passes_and_matches_oracle():
    report = run(ExperimentConfig.from_dict(WEYL_RAW))
    assert report.passed
    assert abs(report.slopes["defect"]["slope"] - 0.5) <= 0.05
    # per-eps values against the Bessel oracle
    for row in report.rows:
        exact = 2 * np.pi * j0(2 * np.pi / row["eps"])
        assert abs(row["value_re"] - exact) <= 1e-6


def test_weyl_resonant_square():
    raw = {
        "kind": "weyl",
        "surface": {"type": "square"},
        "eps": [1 / 8, 1 / 16, 1 / 32],
        "f": {"builtin": "cosine", "k": [1, 0]},
        "expect_resonant": True,
    }
    report = run(ExperimentConfig.from_dict(raw))
    assert report.passed
    names = {c["name"] for c in report.checks}
    assert {"no_convergence_flag", "non_resonance_fails"} <= names
    for row in report.rows:
        assert abs(row["value_re"] - 2.0) <= 1e-8


def test_m_eps_run_matches_bessel():
    raw = {
        "kind": "m_eps",
        "surface": {"type": "circle"},
        "eps": [1 / 8, 1 / 16, 1 / 32, 1 / 64],
        "b": {"builtin": "cosine", "k": [1, 0]},
        "drop_first": 0,
        "slope_tol": 0.15,
    }
    report = run(ExperimentConfig.from_dict(raw))
    for row in report.rows:
        assert abs(row["value_re"] - (-j0(2 * np.pi / row["eps"]))) <= 1e-6


def test_cell_run_laminate_oracle():
    raw = {
        "kind": "cell",
        "A": "laminate",
        "N_list": [64, 128],
        "expect_a_hat": [[np.sqrt(3.0), 0.0], [0.0, 2.0]],
    }
    report = run(ExperimentConfig.from_dict(raw))
    assert report.passed
    names = {c["name"] for c in report.checks}
    assert {"corrector_mean_zero", "cell_residual", "a_hat_oracle"} <= names


def test_run_is_deterministic():
    r1 = run(ExperimentConfig.from_dict(WEYL_RAW)).to_dict()
    r2 = run(ExperimentConfig.from_dict(WEYL_RAW)).to_dict()
    r1["meta"].pop("runtime_seconds")
    r2["meta"].pop("runtime_seconds")
    assert json.dumps(r1, sort_keys=True, default=str) == json.dumps(
        r2, sort_keys=True, default=str
    )


def _write_toml(path, text):
    path.write_text(text)
    return str(path)


WEYL_TOML = """
kind = "weyl"
eps = "2^-5..2^-8"
drop_first = 0

[surface]
type = "circle"

[f]
builtin = "cosine"
k = [1, 0]
"""


def test_cli_end_to_end(tmp_path):
    cfg = _write_toml(tmp_path / "cfg.toml", WEYL_TOML)
    out = tmp_path / "report.json"
    csv_out = tmp_path / "report.csv"
    code = cli.main(["weyl", "--config", cfg, "--out", str(out), "--csv", str(csv_out)])
    assert code == 0
    data = json.loads(out.read_text())
    assert data["kind"] == "weyl"
    assert data["passed"] is True
    header = csv_out.read_text().splitlines()[0]
    assert header.split(",") == CSV_COLUMNS


def test_cli_bad_config_exit_2(tmp_path):
    cfg = _write_toml(tmp_path / "bad.toml", 'kind = "weyl"\n')
    code = cli.main(["weyl", "--config", cfg, "--out", str(tmp_path / "o.json")])
    assert code == 2


def test_cli_missing_file_exit_2(tmp_path):
    code = cli.main(
        ["weyl", "--config", str(tmp_path / "nope.toml"), "--out", str(tmp_path / "o.json")]
    )
    assert code == 2


def test_cli_kind_mismatch_exit_2(tmp_path):
    cfg = _write_toml(tmp_path / "cfg.toml", WEYL_TOML)
    code = cli.main(["cell", "--config", cfg, "--out", str(tmp_path / "o.json")])
    assert code == 2
