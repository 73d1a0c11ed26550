import json

import numpy as np
import pandas as pd
import pytest

from basisrisk import cli, flood_pipeline as fp, simlab
from basisrisk.evt import sample_gpd


def run(args, tmp_path, sub="out"):
    code, manifest = cli.run(list(args) + ["--out", str(tmp_path / sub)])
    return code, manifest


def test_simulate_writes_sample_and_manifest(tmp_path):
    code, m = run(["simulate", "--family", "gumbel", "--tau", "0.5", "--n", "100000", "--seed", "7"], tmp_path)
    assert code == cli.EXIT_OK
    df = pd.read_csv(tmp_path / "out" / "sample.csv")
    assert list(df.columns) == ["x", "y"] and len(df) == 100_000
    on_disk = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert on_disk["config"]["family"] == "gumbel" and on_disk["seed"] == 7
    assert on_disk["outputs"][0]["sha256"] == m["outputs"][0]["sha256"]


def test_simulate_repeat_identical(tmp_path):
    args = ["simulate", "--n", "5000", "--seed", "1"]
    _, a = run(args, tmp_path, "a")
    _, b = run(args, tmp_path, "b")
    assert a["outputs"] == b["outputs"]


def test_simulate_bad_tau(tmp_path, capsys):
    code, _ = run(["simulate", "--family", "frank", "--tau", "1.2"], tmp_path)
    assert code == cli.EXIT_VALIDATION
    assert "tau" in capsys.readouterr().err


def test_config_precedence_and_replay(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"family": "clayton_survival", "tau": 0.3, "n": 3000, "seed": 5}))
    code, m = run(["simulate", "--config", str(cfg), "--tau", "0.7"], tmp_path, "a")
    assert code == 0
    assert m["config"]["tau"] == 0.7 and m["config"]["family"] == "clayton_survival"
    code, m2 = run(["simulate", "--config", str(tmp_path / "a" / "manifest.json")], tmp_path, "b")
    assert code == 0 and m2["outputs"] == m["outputs"]


def test_unknown_config_field(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    code, _ = run(["simulate", "--config", str(cfg)], tmp_path)
    assert code == cli.EXIT_VALIDATION


def test_env_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    code, _ = cli.run(["simulate", "--n", "1000"])
    assert code == 0 and (tmp_path / "env" / "sample.csv").exists()


def test_figures_unknown_id(tmp_path, capsys):
    code, _ = run(["figures", "fig9"], tmp_path)
    assert code == cli.EXIT_VALIDATION
    assert "fig1, fig2, fig3, fig4" in capsys.readouterr().err


def test_figures_fig1_tables(tmp_path):
    code, m = run(["figures", "fig1", "--n", "10000", "--seed", "1"], tmp_path)
    assert code == 0
    assert [o["file"] for o in m["outputs"]] == ["fig1_mean.csv", "fig1_square.csv"]
    df = pd.read_csv(tmp_path / "out" / "fig1_mean.csv")
    assert df.groupby(["family", "tau_or_rho"]).ngroups == 9


def test_fit_gpd(tmp_path):
    src = tmp_path / "v.csv"
    pd.DataFrame({"v": np.random.default_rng(0).exponential(1.0, 20_000)}).to_csv(src, index=False)
    code, m = run(["fit-gpd", str(src), "--column", "v"], tmp_path)
    assert code == 0
    fit = json.loads((tmp_path / "out" / "gpd_fit.json").read_text())
    assert abs(fit["gamma"]) < 0.05
    qq = pd.read_csv(tmp_path / "out" / "qq.csv")
    assert list(qq.columns) == ["theoretical", "empirical"] and len(qq) == fit["n_excess"]


def test_fit_gpd_too_few(tmp_path, capsys):
    src = tmp_path / "v.csv"
    pd.DataFrame({"v": sample_gpd(100, 0.3, 1.0, 1)}).to_csv(src, index=False)
    code, _ = run(["fit-gpd", str(src), "--column", "v"], tmp_path)
    assert code == cli.EXIT_VALIDATION
    assert "at least 30" in capsys.readouterr().err


def test_fit_gpd_constant_is_numeric_failure(tmp_path):
    src = tmp_path / "v.csv"
    v = np.r_[np.zeros(200), np.full(50, 7.0)]
    pd.DataFrame({"v": v}).to_csv(src, index=False)
    code, _ = run(["fit-gpd", str(src), "--column", "v", "--level", "0.6"], tmp_path)
    # excesses over the 0.6 quantile (0) are all equal
    assert code == cli.EXIT_NUMERIC


def test_floods_end_to_end(tmp_path):
    src = tmp_path / "floods.csv"
    fp.write_events(fp.synthetic_corpus(n=400, seed=1), src)
    code, m = run(["floods", str(src)], tmp_path)
    assert code == 0
    assert "a" in m["deflation"] and "b" in m["deflation"]
    dec = pd.read_csv(tmp_path / "out" / "deciles.csv")
    assert len(dec) == 10
    rep = pd.read_csv(tmp_path / "out" / "cv_report.csv")
    assert list(rep.columns) == ["record_id", "fold", "actual", "predicted", "sq_error"]


def test_floods_small_k(tmp_path):
    src = tmp_path / "five.csv"
    fp.write_events(fp.synthetic_corpus(n=5, seed=1), src)
    code, _ = run(["floods", str(src), "--k", "3"], tmp_path)
    assert code == 0
    rep = pd.read_csv(tmp_path / "out" / "cv_report.csv")
    assert sorted(rep["fold"].value_counts().tolist()) == [1, 2, 2]


def test_floods_missing_column(tmp_path, capsys):
    src = tmp_path / "bad.csv"
    src.write_text("country,year,damage_usd\nFR,2000,3\n")
    code, _ = run(["floods", str(src)], tmp_path)
    assert code == cli.EXIT_VALIDATION
    assert "affected" in capsys.readouterr().err


def test_missing_input_file(tmp_path):
    code, _ = run(["floods", str(tmp_path / "nope.csv")], tmp_path)
    assert code == cli.EXIT_IO


def test_gaussian_check_default_passes(tmp_path):
    code, m = run(["gaussian-check", "--n", "200000"], tmp_path)
    assert code == 0 and m["max_abs_z"] <= 4


def test_gaussian_check_degenerate_exact_zero(tmp_path):
    code, _ = run(["gaussian-check", "--rho", "1", "--n", "10000"], tmp_path)
    assert code == 0
    tab = pd.read_csv(tmp_path / "out" / "gaussian_check.csv")
    assert (tab["exact"] == 0).all()


def test_gaussian_check_flags_disagreement(tmp_path, monkeypatch):
    monkeypatch.setattr(simlab, "cond_mean_diff_exact", lambda spec, s: 10.0)
    code, m = run(["gaussian-check", "--n", "10000"], tmp_path)
    assert code == cli.EXIT_NUMERIC and m["failed"]


def test_atomic_writes_leave_no_temp_files(tmp_path):
    run(["simulate", "--n", "2000"], tmp_path)
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["manifest.json", "sample.csv"]
