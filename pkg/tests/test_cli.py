import json
import pathlib

import pytest

from slmorse.cli import load_configs, main

PROBLEMS = pathlib.Path(__file__).parents[1] / "problems"
FAST = {"propagation": {"sample_dt": 0.05}}


@pytest.fixture
def fast_config(tmp_path):
    f = tmp_path / "fast.json"
    f.write_text(json.dumps(FAST))
    return str(f)


def run(*args):
    return main([str(a) for a in args])


def test_validate_exit_codes(tmp_path, capsys):
    assert run("validate", PROBLEMS / "constant.json") == 0
    assert run("validate", PROBLEMS / "negative_r.json") == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "n": 1,\n  "P": }\n')
    assert run("validate", bad) == 1
    assert "line 3" in capsys.readouterr().err


def test_morse_outputs(tmp_path, fast_config, capsys):
    out = tmp_path / "out"
    assert run("morse", PROBLEMS / "sech2_well.json", "--outdir", out, "--config", fast_config) == 0
    assert "index 2" in capsys.readouterr().out
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "morse" and man["config"]["propagation"]["sample_dt"] == 0.05
    assert sorted(man["outputs"]) == ["diagnostics.csv", "frames.csv", "result.json"]
    assert (out / "diagnostics.csv").read_text().startswith("tau,sigma_min_W,det_W,crossing_flag")
    assert json.loads((out / "result.json").read_text())["index"] == 2


def test_morse_constant(capsys, fast_config):
    assert run("morse", PROBLEMS / "constant.json", "--config", fast_config) == 0
    assert "index 0" in capsys.readouterr().out


def test_morse_is_deterministic(tmp_path, fast_config):
    for d in ("a", "b"):
        assert run("morse", PROBLEMS / "sech2_well.json", "--outdir", tmp_path / d, "--config", fast_config) == 0
    for name in ("diagnostics.csv", "frames.csv", "result.json", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_morse_oracle_mismatch_exit(monkeypatch, fast_config):
    import slmorse.oracle as oracle

    monkeypatch.setattr(oracle, "negative_count", lambda *a, **k: 7)
    assert run("morse", PROBLEMS / "sech2_well.json", "--oracle", "--config", fast_config) == 3


def test_morse_plateau_failure_exit(monkeypatch, fast_config):
    import slmorse.morse as m

    real = m._run
    calls = []

    def fake(p, cfg, retries=2):
        path, recs, T = real(p, cfg, retries)
        calls.append(1)
        return path, (recs if len(calls) == 1 else []), T

    monkeypatch.setattr(m, "_run", fake)
    assert run("morse", PROBLEMS / "sech2_well.json", "--plateau", "--config", fast_config) == 3


def test_morse_hypothesis_exit(fast_config):
    assert run("morse", PROBLEMS / "negative_r.json", "--config", fast_config) == 2


def test_oracle_command(tmp_path, capsys):
    csv = tmp_path / "ev.csv"
    assert run("oracle", PROBLEMS / "sech2_well.json", "--N", 1000, "--eigs", 3, "--csv", csv) == 0
    assert "[2, 2, 2]" in capsys.readouterr().out
    assert csv.read_text().splitlines()[0] == "k,eigenvalue"


def test_indices_command(capsys):
    frames = PROBLEMS / "frames_n1.json"
    assert run("indices", frames, "triple") == 0
    assert "triple index 1" in capsys.readouterr().out
    assert run("indices", frames, "hormander") == 0
    assert run("indices", frames, "maslov") == 0
    assert "maslov index 1" in capsys.readouterr().out


def test_wave_commands(tmp_path, fast_config, capsys):
    assert run("wave", "front", PROBLEMS / "nagumo.json", "--outdir", tmp_path / "f") == 0
    assert (tmp_path / "f" / "profile.csv").read_text().startswith("xi,w0,dw0")
    assert run("wave", "analyze", PROBLEMS / "nagumo.json", "--config", fast_config) == 0
    out = capsys.readouterr().out
    assert "stable-candidate" in out and "morse lower bound 0" in out
    assert run("wave", "analyze", PROBLEMS / "pulse.json", "--config", fast_config) == 4
    assert "morse lower bound 1" in capsys.readouterr().out
    assert run("wave", "analyze", PROBLEMS / "unstable_ends.json") == 2


def test_config_overrides(tmp_path):
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"propagation": {"rel_tol": 1e-9}, "discretization": {"N": 500}}))
    prop, disc, bvp = load_configs(f)
    assert prop.rel_tol == 1e-9 and prop.abs_tol == 1e-12 and disc.N == 500 and bvp.L == 40.0
    f.write_text(json.dumps({"propagation": {"nope": 1}}))
    assert run("morse", PROBLEMS / "constant.json", "--config", f) == 1
