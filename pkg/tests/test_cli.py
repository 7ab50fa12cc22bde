import json

import numpy as np
import pytest

from lsnm.cli import main


def write_ls_pair(path, seed=0, T=200):
    rng = np.random.default_rng(seed)
    x = np.clip(rng.normal(size=T), -3, 3)
    y = np.tanh(2 * x) + (0.3 + 0.5 * np.abs(x)) * rng.normal(size=T)
    np.savetxt(path, np.column_stack([x, y]), delimiter=",")
    return path


SPLINE_FLAGS = ["--estimator", "spline_concave", "--knots", "8", "--order", "3"]


def test_infer_decides_generated_pair(tmp_path, capsys):
    f = write_ls_pair(tmp_path / "pair.csv")
    code = main(["infer", "--input", str(f), *SPLINE_FLAGS])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["direction"] == "x_to_y"
    assert out["certainty"] > 0


def test_infer_identical_columns_undecided(tmp_path, capsys):
    x = np.linspace(0, 1, 80)
    np.savetxt(tmp_path / "same.csv", np.column_stack([x, x]), delimiter=",")
    code = main(["infer", "--input", str(tmp_path / "same.csv"), *SPLINE_FLAGS])
    out = json.loads(capsys.readouterr().out)
    assert code == 2
    assert out["direction"] == "undecided"


def test_infer_one_column_file(tmp_path, capsys):
    (tmp_path / "one.csv").write_text("1.0\n2.0\n3.0\n")
    code = main(["infer", "--input", str(tmp_path / "one.csv"), *SPLINE_FLAGS])
    err = capsys.readouterr().err
    assert code == 1
    assert "2" in err and "column" in err
    assert ":1:" in err  # names the offending line


def test_infer_missing_file(tmp_path, capsys):
    code = main(["infer", "--input", str(tmp_path / "nope.csv")])
    assert code == 1


def test_unknown_estimator_lists_valid_tags(tmp_path, capsys):
    f = write_ls_pair(tmp_path / "pair.csv")
    code = main(["infer", "--input", str(f), "--estimator", "gp"])
    err = capsys.readouterr().err
    assert code == 1
    assert "spline_concave" in err and "mlp" in err


def test_hsic_flags_require_loci_h(tmp_path):
    f = write_ls_pair(tmp_path / "pair.csv")
    with pytest.raises(SystemExit):
        main(["infer", "--input", str(f), "--hsic-perms", "100"])
    code = main(["infer", "--input", str(f), "--method", "loci_h",
                 "--hsic-method", "permutation", "--hsic-perms", "50",
                 *SPLINE_FLAGS])
    assert code in (0, 2)


def test_infer_report_file(tmp_path, capsys):
    f = write_ls_pair(tmp_path / "pair.csv")
    report = tmp_path / "verdict.json"
    main(["infer", "--input", str(f), "--report", str(report), *SPLINE_FLAGS])
    capsys.readouterr()
    parsed = json.loads(report.read_text())
    assert parsed["method"] == "loci_m"
    assert parsed["estimator"] == "spline_concave"


def test_fit_prints_both_directions(tmp_path, capsys):
    f = write_ls_pair(tmp_path / "pair.csv")
    code = main(["fit", "--input", str(f), *SPLINE_FLAGS])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["loglik_per_point_xy"] > out["loglik_per_point_yx"]
    assert out["converged_xy"] and out["converged_yx"]


def test_simulate_then_benchmark(tmp_path, capsys):
    data = tmp_path / "corpus"
    code = main(["simulate", "--family", "an", "--n-pairs", "4",
                 "--n-points", "80", "--seed", "3", "--out", str(data)])
    assert code == 0
    assert (data / "ground_truth.csv").exists()
    assert len(list(data.glob("an-*.csv"))) == 4
    capsys.readouterr()

    report = tmp_path / "report.json"
    curve = tmp_path / "curve.csv"
    code = main(["benchmark", "--data", str(data), "--report", str(report),
                 "--curve-csv", str(curve), *SPLINE_FLAGS])
    assert code == 0
    parsed = json.loads(report.read_text())
    assert parsed["schema_version"] == 1
    assert parsed["metrics"]["n_pairs"] == 4
    assert curve.read_text().startswith("rank,pair_id,certainty")
    metrics = json.loads(capsys.readouterr().out)
    assert metrics["accuracy"] == parsed["metrics"]["accuracy"]


def strip_runtimes(report):
    for rec in report["pairs"]:
        rec.pop("runtime_s")
    return report


def test_benchmark_deterministic_reports(tmp_path, capsys):
    data = tmp_path / "corpus"
    main(["simulate", "--family", "an", "--n-pairs", "3", "--n-points", "60",
          "--seed", "1", "--out", str(data)])
    reports = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        code = main(["benchmark", "--data", str(data), "--seed", "7",
                     "--workers", "1", "--report", str(path), *SPLINE_FLAGS])
        assert code == 0
        reports.append(strip_runtimes(json.loads(path.read_text())))
    capsys.readouterr()
    assert reports[0] == reports[1]


def test_benchmark_requires_data(capsys, monkeypatch):
    monkeypatch.delenv("LSNM_DATA_DIR", raising=False)
    code = main(["benchmark"])
    assert code == 1
    assert "data" in capsys.readouterr().err.lower()


def test_benchmark_env_data_dir(tmp_path, capsys, monkeypatch):
    data = tmp_path / "corpus"
    main(["simulate", "--family", "an", "--n-pairs", "2", "--n-points", "60",
          "--seed", "2", "--out", str(data)])
    monkeypatch.setenv("LSNM_DATA_DIR", str(data))
    code = main(["benchmark", *SPLINE_FLAGS])
    assert code == 0
    capsys.readouterr()


def test_estimator_bench_single_cell(tmp_path, capsys):
    report = tmp_path / "bench.json"
    code = main(["estimator-bench", "--t-values", "100", "--knot-rules",
                 "sqrt", "--n-seeds", "1", "--n-grid", "500",
                 "--report", str(report)])
    assert code == 0
    cells = json.loads(report.read_text())["cells"]
    assert cells[0]["T"] == 100
    capsys.readouterr()


def test_simulate_rejects_unknown_family(tmp_path):
    with pytest.raises(SystemExit):
        main(["simulate", "--family", "weird", "--out", str(tmp_path / "x")])
