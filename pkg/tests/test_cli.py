"""End-to-end CLI checks: formats, exit codes, stores, determinism."""

import json
import os

import numpy as np
import pytest

from errorlab import cli, model, series, storage


def run(capsys, argv):
    code = cli.main(argv)
    cap = capsys.readouterr()
    return code, cap.out, cap.err


def run_json(capsys, argv):
    code, out, err = run(capsys, argv)
    assert code == 0, err
    return json.loads(out)


def test_error_term_json(capsys):
    env = run_json(capsys, ["error-term", "--x", "10"])
    assert env["tool"] == "errorlab" and env["kind"] == "error-term"
    r = env["results"]
    assert r["counting"] == 27.0
    assert r["remainder"] == pytest.approx(2.429835772028886, rel=1e-14)
    assert r["counting"] == pytest.approx(r["main_term"] + r["remainder"], rel=1e-14)


def test_error_term_csv(capsys):
    code, out, err = run(capsys, ["error-term", "--x", "10", "--format", "csv"])
    assert code == 0
    lines = out.split("\r\n")
    assert lines[0] == "family,x,counting,main_term,remainder"
    cells = lines[1].split(",")
    assert cells[0] == "divisor" and float(cells[2]) == 27.0


def test_usage_error_exit_2(capsys):
    code, out, err = run(capsys, ["error-term", "--x", "-5"])
    assert code == 2
    payload = json.loads(err)
    assert payload["error"]["type"] == "UsageError"
    assert payload["error"]["message"]


def test_budget_error_exit_3(capsys):
    code, out, err = run(capsys, [
        "model", "moment", "--kernel-limit", "1e6", "--k", "8",
        "--method", "exact"])
    assert code == 3
    payload = json.loads(err)
    assert payload["error"]["type"] == "ResourceBudgetError"


def test_bin_not_defined_exit_2(capsys):
    code, out, err = run(capsys, ["error-term", "--x", "10", "--format", "bin"])
    assert code == 2
    assert json.loads(err)["error"]["type"] == "UsageError"


def test_argparse_rejects_unknown_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["error-term", "--x", "10", "--frobnicate"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_intish_scientific_notation(capsys):
    env = run_json(capsys, [
        "model", "sample", "--kernel-limit", "6", "--count", "1e2", "--seed", "1"])
    assert env["results"]["count"] == 100
    with pytest.raises(SystemExit):
        cli.main(["model", "sample", "--kernel-limit", "6", "--count", "1.5"])
    capsys.readouterr()


def test_series_bin_payload(capsysbinary):
    code = cli.main(["series", "--kernel-limit", "10", "--t", "1e6", "2e6",
                     "--format", "bin"])
    assert code == 0
    out = capsysbinary.readouterr().out
    got = np.frombuffer(out, dtype="<f8")
    spec = series.SeriesSpec("divisor", 10)
    np.testing.assert_array_equal(
        got, series.evaluate_grid(spec, np.array([1e6, 2e6])))


def test_series_json_reports_truncation(capsys):
    env = run_json(capsys, ["series", "--kernel-limit", "10", "--t", "1e6"])
    r = env["results"]
    assert r["kernel_limit"] == 10 and r["inner_limit"] == 10
    assert len(r["points"]) == 1 and r["variance"] > 0


def test_model_sample_store_roundtrip(tmp_path, capsys):
    out_base = tmp_path / "batch"
    code, out, err = run(capsys, [
        "model", "sample", "--kernel-limit", "6", "--inner-limit", "2",
        "--count", "50", "--seed", "42", "--out", str(out_base)])
    assert code == 0
    meta = json.loads(out)
    assert meta["count"] == 50
    values, manifest = storage.sample_store_read(out_base)
    spec = model.ModelSpec("divisor", 6, 2)
    direct = model.sample(spec, 50, 42)
    np.testing.assert_array_equal(values, direct.values)
    assert manifest["seed"] == 42
    assert manifest["derived_streams"] == ["model"]
    assert manifest["config"]["kernel_limit"] == 6


def test_model_sample_seed_determinism(capsys):
    argv = ["model", "sample", "--kernel-limit", "6", "--count", "10",
            "--seed", "5", "--format", "csv"]
    _, out1, _ = run(capsys, argv)
    _, out2, _ = run(capsys, argv)
    assert out1 == out2
    _, out3, _ = run(capsys, argv[:-3] + ["6", "--format", "csv"])
    assert out1 != out3


def test_workers_flag_does_not_change_results(capsys):
    base = ["experiment", "cdf", "--T", "1e6", "--N", "10",
            "--count", "2000", "--seed", "9"]
    r1 = run_json(capsys, base + ["--workers", "1"])
    r4 = run_json(capsys, base + ["--workers", "4"])
    assert r1["results"] == r4["results"]
    assert r1["results"]["derived_streams"] == ["grid", "model"]
    assert 0 <= r1["results"]["ks_distance"] <= 1


def test_model_transform_endpoints(capsys):
    env = run_json(capsys, [
        "model", "transform", "--kernel-limit", "6", "--kind", "char",
        "--at", "0", "2.5"])
    pts = env["results"]["points"]
    assert pts[0] == {"at": 0.0, "re": 1.0, "im": 0.0}
    assert abs(complex(pts[1]["re"], pts[1]["im"])) <= 1.0
    env = run_json(capsys, [
        "model", "transform", "--kernel-limit", "6", "--kind", "laplace",
        "--at", "0"])
    assert env["results"]["points"][0]["value"] == 1.0


def test_experiment_laplace_structure(capsys):
    env = run_json(capsys, [
        "experiment", "laplace", "--T", "1e6", "--N", "10",
        "--count", "2000", "--lambdas", "0.5", "1.0", "--seed", "3"])
    r = env["results"]
    assert r["K_eff"] >= 2 and r["clip"] > 0
    assert [p["lam"] for p in r["per_lambda"]] == [0.5, 1.0]
    for p in r["per_lambda"]:
        assert p["rel_difference"] >= 0 and p["excluded_fraction"] == 0.0


def test_experiment_tails_csv(capsys):
    code, out, err = run(capsys, [
        "experiment", "tails", "--kernel-limit", "10", "--count", "2000",
        "--v-grid", "0.5", "1.5", "--seed", "4", "--format", "csv"])
    assert code == 0
    lines = [l for l in out.split("\r\n") if l]
    assert lines[0] == "V,chernov,pz,mc,mc_ci,reference"
    assert len(lines) == 3
    first = lines[1].split(",")
    assert float(first[0]) == 0.5 and 0.0 <= float(first[3]) <= 1.0


def test_independence_verify_certificate(capsys):
    env = run_json(capsys, ["independence", "verify", "--M", "10", "--m", "2"])
    cert = env["results"]
    assert cert["holds"] is True
    assert cert["witness"] == [[1, 9], [-1, 10]]
    assert cert["min_nonzero"]["lower"].startswith("0.16227766016837933")


def test_independence_search_json(capsys):
    env = run_json(capsys, [
        "independence", "search", "--M", "30", "--m", "4",
        "--budget", "2000", "--seed", "7"])
    r = env["results"]
    assert r["best_abs"] == pytest.approx(0.0017194929522892366, rel=1e-15)
    assert r["exhaustive"] is False


def test_scan_smoke(capsys):
    env = run_json(capsys, ["scan", "--X", "1000", "--grid-density", "100"])
    r = env["results"]
    assert r["max_value"] > 0 and r["ratio"] > 0
    # the scan window is [X, 2X]
    assert 1000 <= r["argmax"] <= 2000


def test_cache_lifecycle(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("ERRORLAB_CACHE_DIR", str(tmp_path))
    env = run_json(capsys, ["cache", "build", "200"])
    assert env["results"]["entries"]
    env = run_json(capsys, ["cache", "status"])
    entries = env["results"]["entries"]
    assert any(e["limit"] >= 200 for e in entries)
    assert all(os.path.exists(e["path"]) for e in entries)
    env = run_json(capsys, ["cache", "clear"])
    assert env["results"]["entries"][0]["removed"] >= 1
    env = run_json(capsys, ["cache", "status"])
    assert env["results"]["entries"] == []
    code, out, err = run(capsys, ["cache", "build"])
    assert code == 2  # limit is required for build


def test_report_out_file(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, _, _ = run(capsys, ["error-term", "--x", "100", "--out", str(out)])
    assert code == 0
    obj = json.loads(out.read_text())
    storage.validate_report(obj)
    assert obj["config"]["x"] == 100.0 and obj["config"]["out"] == str(out)
