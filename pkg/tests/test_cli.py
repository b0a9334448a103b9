import csv
import io
import json
import subprocess
import sys

import pytest

from stabsim.cli import main
from stabsim.report import SCHEMA_ID, validate_report


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


SIM = ["simulate-stability", "--n-feature", "300", "--n-target", "10", "--n-useful", "30",
       "--p", "0.3,0.7", "--m-ensemble", "1,5", "--m-stability", "4"]


def test_simulate_stability_csv(capsys):
    code, out, _ = run(SIM + ["--seed", "3"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [list(r) for r in rows[:1]] == [["p", "m_ensemble", "m_stability", "J", "seed"]]
    assert [(r["p"], r["m_ensemble"]) for r in rows] == [("0.3", "1"), ("0.3", "5"), ("0.7", "1"), ("0.7", "5")]
    assert all(r["seed"] == "3" and 0 <= float(r["J"]) <= 1 for r in rows)


def test_simulate_stability_byte_identical(capsys, tmp_path):
    outs = []
    for w in ("1", "4"):
        path = tmp_path / f"w{w}.csv"
        assert main(SIM + ["--seed", "3", "--workers", w, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("STABSIM_SEED", "3")
    _, from_env, _ = run(SIM, capsys)
    monkeypatch.delenv("STABSIM_SEED")
    _, from_flag, _ = run(SIM + ["--seed", "3"], capsys)
    assert from_env == from_flag


def test_missing_seed_is_usage_error(capsys, monkeypatch):
    monkeypatch.delenv("STABSIM_SEED", raising=False)
    code, _, err = run(SIM, capsys)
    assert code == 2 and "seed" in err
    monkeypatch.setenv("STABSIM_SEED", "abc")
    assert run(SIM, capsys)[0] == 2


def test_invalid_params_exit_2(capsys):
    code, _, _ = run(["simulate-stability", "--n-feature", "10", "--n-target", "20", "--n-useful", "5", "--seed", "1"], capsys)
    assert code == 2


def test_argparse_error_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate-stability", "--n-feature", "ten"])
    assert exc.value.code == 2


def test_missing_csv_exit_1(capsys, tmp_path):
    code, _, err = run(["calibrate", "--n-target", "5", "--csv", str(tmp_path / "none.csv"), "--seed", "1"], capsys)
    assert code == 1 and "no such file" in err


def test_dataset_source_required(capsys):
    assert run(["calibrate", "--n-target", "5", "--seed", "1"], capsys)[0] == 2


def test_simulate_json_report(capsys, tmp_path):
    path = tmp_path / "r.json"
    assert main(SIM + ["--seed", "1", "--json", str(path), "--out", str(tmp_path / "x.csv")]) == 0
    doc = json.loads(path.read_text())
    validate_report(doc)
    assert doc["schema"] == SCHEMA_ID and doc["kind"] == "simulate_stability"
    assert len(doc["result"]["rows"]) == 4


CAL = ["calibrate", "--n-target", "10", "--truth-n-useful", "30", "--truth-p", "0.7", "--n-feature", "300",
       "--m-ensemble", "5,20", "--m-stability", "5"]


def test_calibrate_simulated_truth(capsys, tmp_path):
    csv_path = tmp_path / "cal.csv"
    code, out, err = run(CAL + ["--seed", "2", "--out-csv", str(csv_path)], capsys)
    assert code == 0
    doc = json.loads(out)
    validate_report(doc)
    res = doc["result"]
    assert res["execution_counts"]["real_runs"] == 25
    assert "real_runs=25" in err and "naive real sweep would need 125" in err
    assert [c["m_ensemble"] for c in res["curve"]] == [5, 20]
    rows = list(csv.DictReader(io.StringIO(csv_path.read_text())))
    assert {r["kind"] for r in rows} == {"grid", "curve"}
    # repeat is byte-identical
    _, again, _ = run(CAL + ["--seed", "2"], capsys)
    assert again == out


def test_calibrate_truth_needs_all_flags(capsys):
    assert run(["calibrate", "--n-target", "5", "--truth-n-useful", "10", "--seed", "1"], capsys)[0] == 2


def test_calibrate_forest_on_synth(capsys):
    code, out, _ = run(
        ["calibrate", "--n-target", "5", "--synth", "--synth-n-sample", "20", "--synth-n-feature", "40",
         "--n-tree", "5", "--m-ensemble", "4", "--m-stability", "3", "--seed", "0"],
        capsys,
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["result"]["execution_counts"]["real_runs"] == 7
    assert doc["config"]["forest"]["resolved_mtry"] == 6


def test_theorem_check(capsys):
    code, out, _ = run(["theorem-check", "--n-feature", "10", "--n-target", "2", "--n-useful", "4", "--p", "0.5",
                        "--trials", "20000", "--seed", "0"], capsys)
    assert code == 0
    doc = json.loads(out)
    validate_report(doc)
    assert doc["kind"] == "theorem_check" and doc["tool_version"]
    assert doc["config"] == {"n_feature": 10, "n_target": 2, "n_useful": 4, "p": 0.5, "trials": 20000}
    r = doc["result"]
    assert r["p0_closed"] == 5 / 32 and r["verdict"] == "above"


def test_simulate_stability_exact_pool_gives_one(capsys):
    code, out, _ = run(["simulate-stability", "--n-feature", "500", "--n-target", "10", "--n-useful", "10",
                        "--p", "1.0", "--m-ensemble", "1,5,20", "--m-stability", "6", "--seed", "8"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 3 and all(float(r["J"]) == 1.0 for r in rows)


def test_bench_columns(capsys):
    code, out, err = run(["bench", "--synth", "--synth-n-sample", "20", "--synth-n-feature", "30", "--n-tree", "3",
                          "--n-target", "5", "--n-useful", "10", "--m-ensemble", "1,2", "--seed", "0"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["mode", "m_ensemble", "m_stability", "seconds", "workers"]
    assert [r["mode"] for r in rows] == ["real", "real", "simulated", "simulated"]
    assert "R^2" in err


def test_bench_json_report(capsys, tmp_path):
    path = tmp_path / "b.json"
    code, out, _ = run(["bench", "--synth", "--synth-n-sample", "20", "--synth-n-feature", "30", "--n-tree", "3",
                        "--n-target", "5", "--n-useful", "10", "--m-ensemble", "1,2", "--seed", "0",
                        "--json", str(path)], capsys)
    assert code == 0
    doc = json.loads(path.read_text())
    validate_report(doc)
    assert doc["kind"] == "bench"
    assert doc["config"]["forest"]["n_tree"] == 3 and doc["config"]["synth"]["n_feature"] == 30
    assert [r["mode"] for r in doc["result"]["rows"]] == ["real", "real", "simulated", "simulated"]
    assert set(doc["result"]["linear_fit_r2"]) == {"real", "simulated"}


def test_bench_unknown_mode(capsys):
    code, _, _ = run(["bench", "--synth", "--synth-n-feature", "30", "--n-tree", "2", "--n-target", "5", "--n-useful",
                      "10", "--m-ensemble", "1", "--modes", "quantum", "--seed", "0"], capsys)
    assert code == 2


def test_ntarget_scan(capsys):
    code, out, _ = run(["ntarget-scan", "--synth", "--synth-n-sample", "12", "--synth-n-feature", "20",
                        "--n-target", "2,4", "--n-tree", "3,5", "--m-ensemble", "2", "--seed", "0"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["n_target"], r["n_tree"]) for r in rows] == [("2", "3"), ("4", "3"), ("2", "5"), ("4", "5")]
    assert all(0 <= float(r["accuracy"]) <= 1 for r in rows)


def test_ntarget_scan_json_records_split_strategy(capsys, tmp_path):
    path = tmp_path / "n.json"
    code, _, _ = run(["ntarget-scan", "--synth", "--synth-n-sample", "12", "--synth-n-feature", "20",
                      "--n-target", "2", "--n-tree", "3", "--m-ensemble", "2", "--seed", "0", "--json", str(path)],
                     capsys)
    assert code == 0
    doc = json.loads(path.read_text())
    validate_report(doc)
    assert doc["kind"] == "ntarget_scan"
    assert "unstratified" in doc["config"]["split_strategy"]
    assert doc["result"]["rows"][0]["n_target"] == 2


def test_ntarget_scan_true_size_beats_single_feature(capsys):
    # 5 informative of 40: keeping all 5 should never classify worse than keeping 1
    for seed in range(5):
        code, out, _ = run(["ntarget-scan", "--synth", "--synth-n-sample", "30", "--synth-n-feature", "40",
                            "--synth-n-informative", "5", "--n-target", "1,5", "--n-tree", "30",
                            "--m-ensemble", "3", "--seed", str(seed)], capsys)
        assert code == 0
        acc = {int(r["n_target"]): float(r["accuracy"]) for r in csv.DictReader(io.StringIO(out))}
        assert acc[5] >= acc[1], (seed, acc)


def test_synth_then_load(capsys, tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"n_sample": 15, "n_feature": 12, "n_informative": 3, "discretize_levels": 3}))
    out = tmp_path / "d.csv"
    assert main(["synth", "--synth-config", str(cfg), "--out", str(out), "--seed", "4"]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 16 and lines[0].split(",")[-1] == "label"
    code, _, _ = run(["calibrate", "--n-target", "3", "--csv", str(out), "--n-tree", "3", "--m-ensemble", "3",
                      "--m-stability", "2", "--seed", "0"], capsys)
    assert code == 0


def test_console_entry_point_module():
    r = subprocess.run([sys.executable, "-m", "stabsim.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("stabsim ")


@pytest.mark.slow
def test_calibrate_synth_recovers_informative_count(capsys):
    ok = 0
    for seed in range(100):
        code, out, _ = run(["calibrate", "--n-target", "20", "--synth", "--synth-n-sample", "40",
                            "--synth-n-feature", "200", "--synth-n-informative", "10", "--n-tree", "20",
                            "--m-ensemble", "20", "--m-stability", "2",
                            "--seed", str(seed)], capsys)
        assert code == 0
        ok += json.loads(out)["result"]["n_useful_hat"] >= 10
    assert ok >= 80, ok


def test_bad_synth_config_is_usage_error(capsys, tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"n_sample": 10, "bogus": 1}))
    code, _, err = run(["synth", "--synth-config", str(cfg), "--out", str(tmp_path / "d.csv"), "--seed", "0"], capsys)
    assert code == 2 and "bogus" in err
