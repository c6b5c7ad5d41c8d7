"""Config parsing and end-to-end CLI workflows on a toy gate."""

import json

import numpy as np
import pytest
import yaml

from quditswap.cli import main
from quditswap.config import ConfigError, load_config, parse_config, save_config

TWO_PI = 2.0 * np.pi

TOY_CONFIG = {
    "oscillator": {"self_kerr_ghz": 0.22, "rotation_freq_ghz": 4.8, "guard_levels": 1},
    "gates": [{"swap_from": 0, "swap_to": 1, "duration_ns": 12.0}],
    "pulse": {"segments": 6, "max_amplitude_ghz": 0.03},
    "optimizer": {"max_iterations": 20, "guard_weight": 1.0, "convergence_tol": 1.0e-9},
    "propagation": {"steps_per_ns": 25.0, "unitarity_tol": 1.0e-10, "integrator": "cf4"},
    "sweeps": {
        "scaling": {
            "eps_over_xi": [3e-5, 8.912509381337459e-05, 1e-4, 0.0001122018454301963, 3e-4],
            "slope_window_exponents": [-4.05, -3.95],
        },
        "heatmap": {"occ_max": 1, "exponents": [-3.5]},
    },
    "synthesis_threshold": 5.0e-3,
    "output_dir": "runs",
    "seed": 3,
    "workers": 1,
}


@pytest.fixture
def toy_config_path(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(TOY_CONFIG))
    return path


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------


def test_config_roundtrip(toy_config_path, tmp_path):
    cfg = load_config(toy_config_path)
    out = tmp_path / "round.yaml"
    save_config(cfg, out)
    assert load_config(out) == cfg


def test_config_unit_conversion(toy_config_path):
    cfg = load_config(toy_config_path)
    spec = cfg.oscillator_spec(essential_levels=2)
    assert spec.self_kerr == pytest.approx(TWO_PI * 0.22, rel=1e-15)
    assert spec.rotation_freq == pytest.approx(TWO_PI * 4.8, rel=1e-15)
    task = cfg.gate_tasks()[0]
    assert task.oscillator.essential_levels == 2
    assert task.oscillator.total_levels == 3
    assert task.duration == 12.0


def test_config_malformed_field_names_field():
    data = {"oscillator": {"self_kerr_ghz": "fast"}}
    with pytest.raises(ConfigError, match="oscillator.self_kerr_ghz"):
        parse_config(data)


def test_config_missing_gate_field():
    data = {"gates": [{"swap_from": 0}]}
    with pytest.raises(ConfigError, match="swap_to"):
        parse_config(data)


def test_config_yaml_diagnostics(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("oscillator: {self_kerr_ghz: [unclosed\n")
    with pytest.raises(ConfigError, match="line"):
        load_config(path)


def test_config_defaults():
    cfg = parse_config({})
    assert cfg.self_kerr_ghz == 0.22
    assert cfg.max_iterations == 200
    assert cfg.gates == ()


# ---------------------------------------------------------------------------
# CLI workflows
# ---------------------------------------------------------------------------


def write_config(tmp_path, **overrides):
    doc = json.loads(json.dumps(TOY_CONFIG))
    doc["output_dir"] = str(tmp_path / "out")
    for path, value in overrides.items():
        node = doc
        keys = path.split(".")
        for key in keys[:-1]:
            node = node[key]
        node[keys[-1]] = value
    cfg_path = tmp_path / "run.yaml"
    cfg_path.write_text(yaml.safe_dump(doc))
    return cfg_path, tmp_path / "out"


def test_cli_synthesize_empty_gates(tmp_path, capsys):
    cfg_path, _ = write_config(tmp_path, gates=[])
    assert main(["synthesize", "--config", str(cfg_path)]) == 0
    assert "nothing to do" in capsys.readouterr().out


def test_cli_synthesize_evaluate_sweep_slope(tmp_path, capsys):
    cfg_path, out = write_config(tmp_path)
    assert main(["synthesize", "--config", str(cfg_path)]) == 0
    pulse_file = out / "pulse_swap01.json"
    trace_file = out / "trace_swap01.csv"
    assert pulse_file.exists() and trace_file.exists()
    doc = json.loads(pulse_file.read_text())
    assert doc["gate"] == {"swap_from": 0, "swap_to": 1}
    assert "config_hash" in doc and "oscillator_hash" in doc
    capsys.readouterr()

    # evaluate at zero shift: simulated infidelity identically ~0
    assert main(
        ["evaluate", "--config", str(cfg_path), "--pulse", str(pulse_file), "--eps-over-xi", "0"]
    ) == 0
    payload = json.loads(capsys.readouterr().out)
    assert abs(payload["simulated_infidelity"]) < 1e-12
    assert payload["susceptibility"] > 0.0

    # negative shifts are physical and land on the same quadratic branch
    # (use the = form: argparse reads a bare "-1e-4" as an option string)
    assert main(
        ["evaluate", "--config", str(cfg_path), "--pulse", str(pulse_file), "--eps-over-xi=-1e-4"]
    ) == 0
    neg = json.loads(capsys.readouterr().out)
    assert main(
        ["evaluate", "--config", str(cfg_path), "--pulse", str(pulse_file), "--eps-over-xi", "1e-4"]
    ) == 0
    pos = json.loads(capsys.readouterr().out)
    assert neg["simulated_infidelity"] == pytest.approx(pos["simulated_infidelity"], rel=0.1)

    # scaling sweep reuses the stored pulse and is byte-identical on rerun
    assert main(["sweep", "--config", str(cfg_path), "--kind", "scaling"]) == 0
    scaling_csv = out / "scaling.csv"
    first = scaling_csv.read_bytes()
    assert (out / "scaling.provenance.json").exists()
    capsys.readouterr()
    assert main(["sweep", "--config", str(cfg_path), "--kind", "scaling"]) == 0
    assert scaling_csv.read_bytes() == first
    capsys.readouterr()

    # slope refit from the CSV without re-simulation
    assert main(["slope", "--csv", str(scaling_csv)]) == 0
    assert "swap01" in capsys.readouterr().out

    # heatmap sweep: occ_max=1 with a single exponent pair gives 4 cells
    assert main(["sweep", "--config", str(cfg_path), "--kind", "heatmap"]) == 0
    rows = (out / "heatmap.csv").read_text().strip().splitlines()
    assert rows[0] == "gate,exp1,exp2,n1,n2,eps_over_xi,infidelity"
    assert len(rows) == 5


def test_cli_evaluate_rejects_mismatched_oscillator(tmp_path, capsys):
    cfg_path, out = write_config(tmp_path)
    assert main(["synthesize", "--config", str(cfg_path)]) == 0
    pulse_file = out / "pulse_swap01.json"
    other_cfg, _ = write_config(tmp_path, **{"oscillator.self_kerr_ghz": 0.33})
    code = main(
        ["evaluate", "--config", str(other_cfg), "--pulse", str(pulse_file), "--eps-over-xi", "0"]
    )
    assert code == 1
    assert "different" in capsys.readouterr().err


def test_cli_evaluate_rejects_bad_version(tmp_path, capsys):
    cfg_path, out = write_config(tmp_path)
    assert main(["synthesize", "--config", str(cfg_path)]) == 0
    pulse_file = out / "pulse_swap01.json"
    doc = json.loads(pulse_file.read_text())
    doc["format_version"] = 99
    pulse_file.write_text(json.dumps(doc))
    code = main(
        ["evaluate", "--config", str(cfg_path), "--pulse", str(pulse_file), "--eps-over-xi", "0"]
    )
    assert code == 1


def test_cli_malformed_config_diagnostic(tmp_path, capsys):
    cfg_path, _ = write_config(tmp_path, **{"oscillator.self_kerr_ghz": "not-a-number"})
    assert main(["synthesize", "--config", str(cfg_path)]) == 1
    assert "oscillator.self_kerr_ghz" in capsys.readouterr().err


def test_cli_missing_config(capsys):
    assert main(["synthesize", "--config", "/nonexistent.yaml"]) == 1


def test_cli_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--config", "x.yaml", "--kind", "bogus"])
    assert exc.value.code == 1


def test_cli_env_overrides(tmp_path, monkeypatch):
    cfg_path, _ = write_config(tmp_path)
    env_out = tmp_path / "env_out"
    monkeypatch.setenv("QUDITSWAP_OUT", str(env_out))
    assert main(["synthesize", "--config", str(cfg_path)]) == 0
    assert (env_out / "pulse_swap01.json").exists()
