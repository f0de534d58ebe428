import json
import math

import numpy as np
import pytest

from qmclik import bounds as B
from qmclik.cli import main
from qmclik.sequences import uniform_grid

SUBCOMMANDS = ["gen-seq", "discrepancy", "integrate", "bounds", "mmle", "reproduce-tables"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"model": "gaussian", "n": 8, "p": 1, "sigma": 1.0, "sigma_p": 1.0, "seed": 1}))
    return str(path)


def test_gen_seq_van_der_corput(capsys):
    code, out, err = run(capsys, "gen-seq", "--kind", "halton", "--m", "4", "--p", "1")
    assert code == 0 and err == ""
    assert out.splitlines() == ["x1", "0", "0.5", "0.25", "0.75"]


def test_gen_seq_full_precision(capsys):
    code, out, _ = run(capsys, "gen-seq", "--kind", "uniform", "--m", "5", "--p", "2", "--seed", "3")
    rows = [list(map(float, line.split(","))) for line in out.splitlines()[1:]]
    np.testing.assert_array_equal(np.array(rows), uniform_grid(5, 2, 3).points)


def test_gen_seq_uniform_needs_seed(capsys):
    code, _, err = run(capsys, "gen-seq", "--kind", "uniform", "--m", "5", "--p", "2")
    assert code == 1 and "--seed" in err


def test_crossover_example(capsys):
    code, out, _ = run(capsys, "bounds", "--kind", "crossover", "--regime", "classical",
                       "--n", "10", "--m", "55", "--p", "1")
    res = json.loads(out)
    assert code == 0 and res["qmc_wins"] is True
    assert res["ratio"] == pytest.approx(math.log(55) / math.sqrt(55), rel=1e-12)
    assert res["schema_version"] == 1


def test_missing_flag_is_usage_error(capsys):
    code, out, err = run(capsys, "bounds", "--kind", "crossover", "--n", "10", "--p", "1")
    assert code == 1 and out == ""
    assert err.startswith("usage:") and "--m" in err


def test_unknown_flag_is_usage_error(capsys):
    code, out, err = run(capsys, "gen-seq", "--kind", "halton", "--m", "4", "--p", "1", "--colour", "red")
    assert code == 1 and out == "" and "usage:" in err


@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_help_for_every_subcommand(cmd, capsys):
    with pytest.raises(SystemExit) as info:
        main([cmd, "--help"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    assert "--config" in out and "--out" in out and "--threads" in out


def test_help_shows_defaults(capsys):
    with pytest.raises(SystemExit):
        main(["integrate", "--help"])
    out = capsys.readouterr().out
    assert "default: highdim" in out and "default: 0" in out


@pytest.mark.parametrize("kind", B.KINDS)
def test_every_bound_kind_runs(kind, capsys):
    argv = ["bounds", "--kind", kind, "--n", "50", "--m", "1000", "--p", "2", "--zeta", "0.1"]
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    res = json.loads(out)
    assert res["schema_version"] == 1


def test_discrepancy_exact_and_bound(tmp_path, capsys):
    pts = tmp_path / "pts.csv"
    assert main(["gen-seq", "--kind", "halton", "--m", "4", "--p", "1", "--out", str(pts)]) == 0
    code, out, _ = run(capsys, "discrepancy", "--in", str(pts))
    assert code == 0 and json.loads(out)["value"] == pytest.approx(0.25)
    code, out, _ = run(capsys, "discrepancy", "--in", str(pts), "--bound", "explicit")
    assert json.loads(out)["method"] == "atanassov_bound"


def test_discrepancy_budget_refusal_exits_one(tmp_path, capsys):
    pts = tmp_path / "pts.csv"
    main(["gen-seq", "--kind", "halton", "--m", "50", "--p", "3", "--out", str(pts)])
    code, out, err = run(capsys, "discrepancy", "--in", str(pts), "--work-budget", "1000")
    assert code == 1 and out == "" and "budget" in err


def test_discrepancy_rejects_points_outside_cube(tmp_path, capsys):
    pts = tmp_path / "pts.csv"
    pts.write_text("x1\n0.5\n1.5\n")
    assert run(capsys, "discrepancy", "--in", str(pts))[0] == 1


def test_integrate_halton(model_file, capsys):
    code, out, _ = run(capsys, "integrate", "--model", model_file, "--grid", "halton", "--m", "512")
    res = json.loads(out)
    assert code == 0 and res["grid"]["m"] == 512
    assert math.isfinite(res["log_estimate"]) and "oracle_log_normalizer" in res


def test_integrate_replicates(model_file, capsys):
    code, out, _ = run(capsys, "integrate", "--model", model_file, "--grid", "uniform", "--m", "64",
                       "--replicates", "5", "--seed", "2")
    res = json.loads(out)
    assert code == 0 and res["n_replicates"] == 5 and len(res["per_replicate_seeds"]) == 5
    assert res["q025"] <= res["q975"]


def test_integrate_halton_replicates_rejected(model_file, capsys):
    code, _, _ = run(capsys, "integrate", "--model", model_file, "--grid", "halton", "--m", "8",
                     "--replicates", "3")
    assert code == 1


def test_mmle_trace(capsys):
    code, out, _ = run(capsys, "mmle", "--lmm", "k=5,ni=6,sigma=1,tau=0.5,theta0=0,seed=1",
                       "--method", "qmc", "--m", "256,1024")
    res = json.loads(out)
    assert code == 0 and [t["m"] for t in res["per_m_trace"]] == [256, 1024]
    assert res["gap"] <= 1e-2 and res["theta_tilde"] == res["per_m_trace"][-1]["theta_tilde"]


def test_mmle_bad_spec(capsys):
    code, _, err = run(capsys, "mmle", "--lmm", "k=5,ni=6", "--m", "64")
    assert code == 1 and "lacks" in err


def test_config_merge_order(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kind": "halton", "m": 8, "p": 1}))
    _, from_file, _ = run(capsys, "gen-seq", "--config", str(cfg))
    assert len(from_file.splitlines()) == 9
    _, overridden, _ = run(capsys, "gen-seq", "--config", str(cfg), "--m", "3")
    assert len(overridden.splitlines()) == 4
    # dashed and underscored keys are both accepted
    cfg.write_text(json.dumps({"kind": "halton", "m": 2, "p": 1, "start-index": 1}))
    assert run(capsys, "gen-seq", "--config", str(cfg))[1].splitlines()[1:] == ["0.5", "0.25"]


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kind": "halton", "mm": 8}))
    code, _, err = run(capsys, "gen-seq", "--config", str(cfg), "--m", "2", "--p", "1")
    assert code == 1 and "mm" in err


def test_reproduce_tables_csv_and_check(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p_list": [1], "n_list": [8, 16], "m_list": [400, 800], "replicates": 20}))
    out_csv = tmp_path / "t.csv"
    code, out, err = run(capsys, "reproduce-tables", "--config", str(cfg), "--out", str(out_csv), "--check")
    assert code == 0, err
    assert out == ""
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "p,n,m,mean_mc,q025_mc,q975_mc,mean_qmc" and len(lines) == 5
    assert json.loads(err)["all_passed"] is True


def test_reproduce_tables_failing_check_exits_two(tmp_path, capsys):
    # a single replicate gives zero-width intervals, so the narrowing check fails
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p_list": [1], "n_list": [8], "m_list": [400, 800]}))
    code, _, err = run(capsys, "reproduce-tables", "--config", str(cfg), "--replicates", "1", "--check")
    assert code == 2 and json.loads(err)["b"]["passed"] is False


def test_reproduce_tables_nan_row_exits_two(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p_list": [1], "n_list": [8], "m_list": [400], "replicates": 2, "sigma": 0.0}))
    code, out, err = run(capsys, "reproduce-tables", "--config", str(cfg))
    assert code == 2 and "nan" in out and "failed" in err


def test_reproduce_tables_bad_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"p_list": [1], "reps": 3}))
    assert run(capsys, "reproduce-tables", "--config", str(cfg))[0] == 1


def test_threads_must_be_positive(capsys):
    assert run(capsys, "gen-seq", "--kind", "halton", "--m", "4", "--p", "1", "--threads", "0")[0] == 1
