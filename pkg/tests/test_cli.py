"""The command-line front end, run in-process."""
import hashlib
import io
import json

import pandas as pd
import pytest

from conftest import write_system
from transit_ages.cli import build_parser, execute


def run(*argv):
    out = io.StringIO()
    code = execute(list(argv), out)
    return code, out.getvalue()


def values(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


# ── validate ─────────────────────────────────────────────────────────────────

def test_validate_compliant_system(recycling_file):
    code, text = run("validate", str(recycling_file), "--samples", "16")
    assert code == 0
    assert "compliance: compliant=true" in text
    assert "blocks: [2] (m=1)" in text
    assert "refused row-sum-dominance" in text


def test_validate_reports_mean_age_conditions(recycling_file):
    code, text = run("validate", str(recycling_file), "--samples", "4", "--delta", "0.01")
    assert code == 0
    assert "mean-age stability (delta=0.01): compliant=false" in text


def test_validate_non_compliant_system(tmp_path):
    path = write_system(tmp_path / "bad.json", [[0.5]], [1.0])
    code, text = run("validate", str(path), "--samples", "4")
    assert code == 3
    assert "diagonal-negative" in text


def test_validate_missing_file(tmp_path, capsys):
    code, _ = run("validate", str(tmp_path / "nope.json"))
    assert code == 1
    assert "does not exist" in capsys.readouterr().err


# ── autonomous / pullback ────────────────────────────────────────────────────

def test_autonomous_summary(recycling_file):
    code, text = run("autonomous", str(recycling_file), "--at", "0")
    assert code == 0
    out = values(text)
    assert float(out["R"]) == pytest.approx(2.5)
    assert float(out["M"]) == pytest.approx(2.6)
    assert float(out["U"]) == pytest.approx(2.5)


def test_autonomous_with_unreached_pool(tmp_path):
    path = write_system(tmp_path / "cascade.json", [[-1.0, 0.0], [0.5, -2.0]], [0.0, 1.0])
    code, text = run("autonomous", str(path), "--at", "0")
    assert code == 0
    out = values(text)
    assert float(out["R"]) == pytest.approx(0.5)
    assert float(out["M"]) == pytest.approx(0.5)
    assert out["abar_star"].startswith("(nan,")


def test_autonomous_singular_matrix_is_numerical_error(tmp_path):
    path = write_system(tmp_path / "closed.json", [[-1.0, 1.0], [1.0, -1.0]], [1.0, 0.0])
    code, _ = run("autonomous", str(path), "--at", "0")
    assert code == 2


def test_pullback(recycling_file):
    code, text = run("pullback", str(recycling_file), "--at", "0", "--horizon", "60", "--samples", "8")
    assert code == 0
    out = values(text)
    nu = [float(v) for v in out["nu"].strip("()").split(",")]
    assert nu == pytest.approx([2.0, 0.5], abs=1e-6)
    assert out["truncation_bound"] == "not quantified"
    assert float(out["horizon"]) == 60.0


def test_pullback_certifies_over_default_horizon(tmp_path):
    path = write_system(tmp_path / "diagonal.json", [[-0.2, 0.0], [0.0, -0.3]], [0.2, 0.3])
    code, text = run("pullback", str(path), "--at", "0", "--samples", "8")
    assert code == 0
    out = values(text)
    assert float(out["horizon"]) == 200.0
    assert out["truncation_bound"] != "not quantified"
    assert 0.0 < float(out["truncation_bound"]) < 1e-10


# ── simulate ─────────────────────────────────────────────────────────────────

def test_simulate_writes_csv_and_manifest(recycling_file, tmp_path):
    target = tmp_path / "run.csv"
    code, _ = run("simulate", str(recycling_file), "--t0", "0", "--t1", "5", "--dt-out", "0.5", "--ages",
                  "-o", str(target))
    assert code == 0
    frame = pd.read_csv(target)
    assert list(frame.columns) == ["t", "x_1", "x_2", "abar_1", "abar_2", "total_x",
                                   "R_t", "M_t", "R_frozen", "M_frozen"]
    assert len(frame) == 11
    assert frame["M_t"].iloc[-1] == pytest.approx(2.6, abs=1e-6)

    manifest = json.loads((tmp_path / "run.csv.manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["columns"] == list(frame.columns)
    assert manifest["output_hash"] == hashlib.sha256(target.read_bytes()).hexdigest()


def test_simulate_to_stdout_without_ages(recycling_file):
    code, text = run("simulate", str(recycling_file), "--t0", "0", "--t1", "1", "--dt-out", "0.5")
    assert code == 0
    assert text.splitlines()[0] == "t,x_1,x_2,total_x"
    assert len(text.splitlines()) == 4


def test_stdout_run_reports_manifest_on_stderr(recycling_file, capsys):
    code, text = run("simulate", str(recycling_file), "--t0", "0", "--t1", "1", "--dt-out", "0.5")
    assert code == 0
    lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith("{")]
    manifest = json.loads(lines[-1])
    assert manifest["command"] == "simulate"
    assert manifest["columns"] == ["t", "x_1", "x_2", "total_x"]
    assert manifest["output_hash"] == hashlib.sha256(text.encode()).hexdigest()


def test_simulate_rejects_wrong_initial_length(recycling_file, tmp_path):
    init = tmp_path / "init.json"
    init.write_text(json.dumps({"x0": [1.0, 1.0, 1.0]}))
    assert run("simulate", str(recycling_file), "--t0", "0", "--t1", "1", "--init", str(init))[0] == 1
    init.write_text(json.dumps({"x0": [1.0, 1.0], "abar0": [0.0]}))
    assert run("simulate", str(recycling_file), "--t0", "0", "--t1", "1", "--ages", "--init", str(init))[0] == 1


def test_simulate_from_initial_state_file(recycling_file, tmp_path):
    init = tmp_path / "init.json"
    init.write_text(json.dumps({"x0": [1.0, 1.0], "abar0": [0.0, 0.0]}))
    code, text = run("simulate", str(recycling_file), "--t0", "0", "--t1", "2", "--ages", "--init", str(init))
    assert code == 0
    first = text.splitlines()[1].split(",")
    assert [float(v) for v in first[1:5]] == [1.0, 1.0, 0.0, 0.0]


def test_simulate_rejects_empty_horizon(recycling_file):
    assert run("simulate", str(recycling_file), "--t0", "1", "--t1", "1")[0] == 1


def test_simulate_rejects_bad_init(recycling_file, tmp_path):
    assert run("simulate", str(recycling_file), "--t0", "0", "--t1", "1", "--init", "warm")[0] == 1
    init = tmp_path / "init.json"
    init.write_text(json.dumps({"abar0": [0.0, 0.0]}))
    assert run("simulate", str(recycling_file), "--t0", "0", "--t1", "1", "--init", str(init))[0] == 1


# ── casa ─────────────────────────────────────────────────────────────────────

def test_casa_is_deterministic_with_fixed_steps(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        code, _ = run("casa", "--t-end", "650", "--dt-out", "5", "--method", "rk4-fixed", "-o", str(p))
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    frame = pd.read_csv(paths[0])
    assert list(frame["t"][:4]) == [0.0, 5.0, 10.0, 15.0]
    assert len(frame) == 131
    assert frame["t"].iloc[-1] == 650.0
    assert "abar_9" in frame.columns
    manifest = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert manifest["config"]["params"]["xi_b"] == 2.0


def test_casa_forcing_output(tmp_path):
    forcing = tmp_path / "forcing.csv"
    code, _ = run("casa", "--t-end", "10", "--dt-out", "5", "--co2", "verbatim",
                  "-o", str(tmp_path / "run.csv"), "--forcing-out", str(forcing))
    assert code == 0
    frame = pd.read_csv(forcing)
    assert list(frame.columns) == ["t", "x_a", "T_s", "xi", "total_input"]
    assert frame["x_a"].iloc[0] == pytest.approx(1715.0)


def test_casa_unsafe_feedback_fails_validation():
    assert run("casa", "--t-end", "10", "--b89", "0.001")[0] == 3


def test_casa_invalid_parameter():
    assert run("casa", "--t-end", "10", "--xi-b", "-1")[0] == 1


# ── argument handling ────────────────────────────────────────────────────────

@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["autonomous", "x.json"],
    ["casa", "--t-end", "ten"],
    ["--log-level", "chatty", "casa", "--t-end", "1"],
])
def test_bad_arguments_exit_with_one(argv):
    assert run(*argv)[0] == 1


def test_parser_defaults():
    args = build_parser().parse_args(["casa", "--t-end", "650"])
    assert args.dt_out == 1.0
    assert args.co2 is None
    assert args.method == "rk45-adaptive"
