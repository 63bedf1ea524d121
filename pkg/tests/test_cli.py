import json
import subprocess
import sys

import numpy as np
import pytest

from netwealth import MixtureParams, WeightedSample, estimate_proportions, load_records
from netwealth.cli import EXIT_CONVERGENCE, EXIT_INGEST, EXIT_NO_DATA, EXIT_OK, EXIT_VALIDATION, main
from reference_fits import find, params_of

K84 = params_of(find(1984, "kgen"))


@pytest.fixture
def k84_params(tmp_path):
    p = tmp_path / "k84.txt"
    p.write_text(K84.to_text())
    return p


@pytest.fixture
def sim_file(tmp_path, k84_params):
    out = tmp_path / "sim.csv"
    assert main(["simulate", "--params", str(k84_params), "--n", "4000", "--seed", "5", "--period", "1984", "--out", str(out)]) == 0
    return out


def test_help_documents_exit_codes():
    res = subprocess.run([sys.executable, "-m", "netwealth", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for code in ("0  success", "3  input", "4  no usable", "5  one or more", "6  invalid"):
        assert code in res.stdout


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["fit", "--family", "lognormal"])
    assert info.value.code == 2


# -- simulate -------------------------------------------------------------------------
def test_simulate_byte_identical(tmp_path, k84_params):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        main(["simulate", "--params", str(k84_params), "--n", "10", "--seed", "42", "--out", str(p)])
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 11


def test_simulate_point_mass(tmp_path):
    params = tmp_path / "atom.txt"
    params.write_text("model=sm\ntheta1=0\ntheta2=1\na=1\nb=1\nq=2\n")
    out = tmp_path / "z.csv"
    assert main(["simulate", "--params", str(params), "--n", "25", "--seed", "1", "--out", str(out)]) == 0
    recs, _ = load_records(out)
    assert all(r.wealth == 0.0 for r in recs)


def test_simulate_bad_params(tmp_path):
    params = tmp_path / "bad.txt"
    params.write_text("model=sm\ntheta1=0.2\n")
    assert main(["simulate", "--params", str(params), "--n", "5", "--out", str(tmp_path / "x.csv")]) == EXIT_VALIDATION


# -- summarize --------------------------------------------------------------------------
def test_summarize_round_trip_shares(tmp_path, sim_file):
    out = tmp_path / "rep"
    assert main(["summarize", "--input", str(sim_file), "--out", str(out)]) == EXIT_OK
    rep = json.loads((out / "summary.json").read_text())
    row = rep["periods"]["1984"]
    recs, _ = load_records(sim_file)
    t1, t2 = estimate_proportions(WeightedSample([r.wealth for r in recs]))
    assert row["share_negative"] == pytest.approx(t1)
    assert row["share_zero"] == pytest.approx(t2)
    assert abs(row["share_negative"] - K84.theta1) < 0.02
    assert (out / "summary.tsv").read_text().count("\n") == 2


def test_summarize_no_data(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("wealth,weight,size,period\n1,-1,1,A\n2,0,1,A\n")
    out = tmp_path / "rep"
    assert main(["summarize", "--input", str(p), "--out", str(out)]) == EXIT_NO_DATA


def test_summarize_missing_file(tmp_path):
    assert main(["summarize", "--input", str(tmp_path / "none.csv")]) == EXIT_INGEST


def test_summarize_writes_rejects(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("wealth,weight,size,period\n1,1,1,A\n2,1,1,A\n3,-1,1,A\n")
    out = tmp_path / "rep"
    assert main(["summarize", "--input", str(p), "--out", str(out)]) == EXIT_OK
    assert "nonpositive weight" in (out / "rejects.csv").read_text()


# -- fit / gof ------------------------------------------------------------------------------
def test_fit_replay_reproduces_published_columns(tmp_path, k84_params):
    out = tmp_path / "rep"
    assert main(["fit", "--params", str(k84_params), "--out", str(out)]) == EXIT_OK
    rep = json.loads((out / "fit_report.json").read_text())
    assert rep["mean"] == pytest.approx(114181, rel=0.005)
    assert rep["gini"] == pytest.approx(0.741, abs=5e-4)
    assert "gini[closed-form]" in (out / "fit_report.txt").read_text()


def test_fit_round_trip_and_all_families(tmp_path, sim_file):
    out = tmp_path / "rep"
    assert main(["fit", "--input", str(sim_file), "--family", "all", "--out", str(out)]) == EXIT_OK
    rep = json.loads((out / "fit_report.json").read_text())["periods"]["1984"]
    assert sorted(rep["fits"]) == ["dagum", "kgen", "sm"]
    assert len(rep["vuong"]) == 3
    k = rep["fits"]["kgen"]
    truth = K84.as_dict()
    for name, se in k["std_errors"].items():
        assert abs(k["params"][name] - truth[name]) < 3 * se, name
    text = (out / "fit_report.txt").read_text().splitlines()
    aics = [float(line.split()[3]) for line in text[1:]]
    assert aics == sorted(aics)


def test_fit_failure_exit_code(tmp_path):
    p = tmp_path / "few.csv"
    p.write_text("wealth,weight,size,period\n" + "".join(f"{v},1,1,A\n" for v in range(1, 6)))
    assert main(["fit", "--input", str(p), "--family", "kgen"]) == EXIT_CONVERGENCE


def test_fit_needs_input_or_params():
    assert main(["fit"]) == EXIT_VALIDATION


def test_gof_from_report_is_deterministic(tmp_path, sim_file):
    fit_dir = tmp_path / "fit"
    main(["fit", "--input", str(sim_file), "--family", "kgen", "--out", str(fit_dir)])
    outs = []
    for name in ("g1", "g2"):
        d = tmp_path / name
        args = ["gof", "--input", str(sim_file), "--report", str(fit_dir / "fit_report.json"), "--boot", "3", "--seed", "9", "--out", str(d)]
        assert main(args) == EXIT_OK
        outs.append((d / "gof_report.json").read_text())
    assert outs[0] == outs[1]
    rec = json.loads(outs[0])["periods"]["1984"]["gof"]["kgen"]
    assert rec["ad_pvalue"] in (0.0, 1 / 3, 2 / 3, 1.0)
    assert rec["bic"] >= rec["aic"]


def test_gof_single_replicate(tmp_path, sim_file):
    d = tmp_path / "g"
    assert main(["gof", "--input", str(sim_file), "--family", "kgen", "--boot", "1", "--out", str(d)]) == EXIT_OK
    rec = json.loads((d / "gof_report.json").read_text())["periods"]["1984"]["gof"]["kgen"]
    assert rec["ad_pvalue"] in (0.0, 1.0)


def test_gof_period_mismatch(tmp_path, sim_file):
    rep = tmp_path / "r.json"
    rep.write_text(json.dumps({"periods": {"2001": {"fits": {}}}}))
    assert main(["gof", "--input", str(sim_file), "--report", str(rep), "--boot", "1"]) == EXIT_VALIDATION


# -- series ------------------------------------------------------------------------------------
def test_series_lorenz_equality(tmp_path):
    p = tmp_path / "eq.csv"
    p.write_text("wealth,weight,size,period\n" + "5,1,1,A\n" * 4)
    out = tmp_path / "s"
    assert main(["series", "--input", str(p), "--series", "lorenz", "--out", str(out)]) == EXIT_OK
    from netwealth import SeriesTable

    t = SeriesTable.from_text((out / "lorenz_A.tsv").read_text())
    assert np.allclose(t.y, t.x, atol=1e-15)


def test_series_zipf_overlay_aligned(tmp_path, sim_file):
    fit_dir = tmp_path / "fit"
    main(["fit", "--input", str(sim_file), "--family", "kgen", "--out", str(fit_dir)])
    out = tmp_path / "s"
    args = ["series", "--input", str(sim_file), "--series", "zipf", "--report", str(fit_dir / "fit_report.json"), "--out", str(out)]
    assert main(args) == EXIT_OK
    from netwealth import SeriesTable

    emp = SeriesTable.from_text((out / "zipf_1984.tsv").read_text())
    mod = SeriesTable.from_text((out / "zipf_1984_kgen.tsv").read_text())
    assert np.array_equal(emp.x, mod.x)


def test_series_trend_index(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("wealth,weight,size,period\n1,1,1,1984\n3,1,1,1984\n4,1,1,1989\n6,1,1,1989\n")
    out = tmp_path / "s"
    assert main(["series", "--input", str(p), "--series", "trend", "--base", "1984", "--out", str(out)]) == EXIT_OK
    from netwealth import SeriesTable

    t = SeriesTable.from_text((out / "trend_mean.tsv").read_text())
    assert t.points == [(1984.0, 100.0), (1989.0, 250.0)]


def test_series_trend_missing_base(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("wealth,weight,size,period\n1,1,1,1984\n3,1,1,1984\n")
    assert main(["series", "--input", str(p), "--series", "trend", "--base", "1990", "--out", str(tmp_path)]) == EXIT_VALIDATION
