import json

import numpy as np
import pytest

from oqwalk.cli import main

OMEGA_23 = "0.6666666666666666"


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    lines = text.strip().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


def test_steady_matches_closed_form(capsys):
    code, out, _ = run(capsys, "steady", "--N", "20", "--omega", OMEGA_23,
                       "--steps", "1000")
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["m", "simulated", "closed_form", "abs_diff"]
    assert len(rows) == 20
    assert max(float(r[3]) for r in rows) <= 1e-6


def test_steady_uniform_at_half(capsys):
    code, out, _ = run(capsys, "steady", "--N", "5", "--omega", "0.5", "--steps", "200")
    assert code == 0
    _, rows = parse_csv(out)
    for r in rows:
        assert abs(float(r[2]) - 0.2) < 1e-12


def test_steady_deterministic_bytes(capsys, tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        code = main(["steady", "--N", "12", "--omega", "0.7", "--steps", "500",
                     "--out", str(path)])
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_steady_requires_scalars(capsys):
    code, _, err = run(capsys, "steady", "--omega", "0.6")
    assert code == 2
    assert "required" in err


def test_profile_drift_estimate(capsys):
    code, out, _ = run(capsys, "profile", "--N", "100", "--omega", OMEGA_23)
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["n", "m", "P_master", "P_gaussian"]
    by_n = {}
    for n, m, pm, pg in rows:
        by_n.setdefault(int(n), {})[int(m)] = (float(pm), float(pg))
    assert sorted(by_n) == list(range(100, 501, 50))
    assert 0.25 <= by_n[300][99][0] <= 0.35
    for n, cols in by_n.items():
        total = sum(pm for pm, _ in cols.values())
        assert abs(total - 1.0) <= 1e-10
        peak_m = max(cols, key=lambda m: cols[m][1])
        assert peak_m == min(round((2 * 2 / 3 - 1) * n), 99)  # clamped to the grid


def test_channel_dephasing(capsys):
    code, out, _ = run(capsys, "channel", "dephasing", "--param", "0.3")
    assert code == 0
    report = json.loads(out)
    assert report["channel"] == "dephasing"
    assert report["trace_distance_to_analytic"] <= 1e-12
    assert report["steps_to_converge"] == 1


def test_channel_depolarizing(capsys):
    code, out, _ = run(capsys, "channel", "depolarizing", "--param", "0.4", "--seed", "3")
    assert code == 0
    report = json.loads(out)
    assert report["trace_distance_to_analytic"] <= 1e-9


def test_channel_rejects_unknown_name(capsys):
    code, _, err = run(capsys, "channel", "amplitude-damping", "--param", "0.1")
    assert code == 2
    assert "unknown channel" in err


def test_verify_seeded_chain(capsys):
    code, out, _ = run(capsys, "verify", "--seed", "7", "--N", "4", "--steps", "5")
    assert code == 0
    report = json.loads(out)
    assert report["pass"] is True
    assert report["max_dilation_distance"] <= report["tolerance"]
    assert report["max_circuit_distance"] <= report["tolerance"]
    assert len(report["per_step"]) == 5


def test_verify_two_nodes_reports_stabilization(capsys):
    code, out, _ = run(capsys, "verify", "--seed", "1", "--N", "2", "--steps", "3")
    assert code == 0
    report = json.loads(out)
    assert report["stabilization_delta"] <= 1e-12


def test_verify_rejects_tampered_spec(capsys, tmp_path):
    bad = {"N": 2, "omega": 0.6,
           "unitaries": [{"re": [[1.0, 0.0], [0.0, 0.5]], "im": [[0.0] * 2] * 2}]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code, _, err = run(capsys, "verify", "--spec", str(path))
    assert code == 1
    assert "violations" in err


def test_verify_accepts_valid_spec_file(capsys, tmp_path):
    from oqwalk import core
    from oqwalk.matrixkit import haar_unitary
    rng = np.random.default_rng(5)
    chain = core.LinearChainSpec(4, 0.7, [haar_unitary(2, rng) for _ in range(3)])
    path = tmp_path / "chain.json"
    path.write_text(core.chain_to_json(chain))
    code, out, _ = run(capsys, "verify", "--spec", str(path), "--steps", "3")
    assert code == 0
    assert json.loads(out)["pass"] is True


def test_verify_honors_tolerance_env(capsys, monkeypatch):
    monkeypatch.setenv("OQW_TOL", "1e-30")
    code, _, err = run(capsys, "verify", "--seed", "7", "--N", "4", "--steps", "2")
    assert code == 1
    assert '"pass": false' in err


def test_resources_table_row(capsys):
    code, out, _ = run(capsys, "resources", "--N", "4", "--omega", "0.6")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "method,dH,G,n,dim_total,cnot_estimate,depth_estimate"
    assert "stinespring,2,4,21,1344,5376,5376" in lines
    assert "local,2,4,21,672,1344,1344" in lines
    slopes = {line.split(",")[0]: float(line.split(",")[5])
              for line in lines if line.startswith("slope_")}
    assert abs(slopes["slope_stinespring"] - 3.0) < 1e-9
    assert abs(slopes["slope_local"] - 2.0) < 1e-9


def test_resources_circuit_row_follows_cost_model(capsys):
    rows = {}
    for model in ("linear", "quadratic"):
        code, out, _ = run(capsys, "resources", "--N", "4", "--omega", "0.6",
                           "--cost-model", model)
        assert code == 0
        line = [l for l in out.splitlines() if l.startswith("circuit-")][0]
        rows[model] = line.split(",")
    assert rows["linear"][0] == "circuit-linear-ancilla"
    assert rows["quadratic"][0] == "circuit-quadratic-ancilla-free"
    # the quadratic decomposition can only be costlier, same dimensions
    assert int(rows["quadratic"][5]) > int(rows["linear"][5])
    assert rows["linear"][4] == rows["quadratic"][4] == "672"


def test_resources_eta_sets_omega(capsys):
    # eta = 0.5 gives omega = 2/3, so N=100 transits in about 300 steps
    code, out, _ = run(capsys, "resources", "--N", "100", "--eta", "0.5")
    assert code == 0
    row = [line for line in out.splitlines() if line.startswith("local,")][0]
    assert int(row.split(",")[3]) == 301  # conservative rounding of N/v + 1


def test_missing_spec_file_is_usage_error(capsys):
    code, _, err = run(capsys, "verify", "--spec", "/nonexistent/chain.json")
    assert code == 2
    assert "cannot read spec file" in err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["steady", "--bogus"])
    assert info.value.code == 2
