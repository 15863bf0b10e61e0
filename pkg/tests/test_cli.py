import csv
import json
import math

import numpy as np
import pytest

from bayesglasso.cli import (
    ScenarioConfig,
    cmd_audit,
    cmd_fit,
    cmd_simulate,
    ingest_csv,
    main,
)
from bayesglasso.matrixcore import load_matrix_csv, pd_check
from bayesglasso.metrics import scores_from_counts


# ---------------------------------------------------------------- ingestion

def test_ingest_basic(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("1,2\n3,4\n")
    ds = ingest_csv(path)
    assert np.array_equal(ds.values, [[1.0, 2.0], [3.0, 4.0]])
    assert ds.column_labels is None


def test_ingest_header_detected(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b\n1,2\n3,4\n")
    ds = ingest_csv(path)
    assert ds.column_labels == ["a", "b"]
    assert np.array_equal(ds.values, [[1.0, 2.0], [3.0, 4.0]])


def test_ingest_ragged_row_reports_location(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("1,2\n3,4,5\n")
    with pytest.raises(ValueError, match="row 2"):
        ingest_csv(path)


def test_ingest_non_numeric_reports_location(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("1,2\n3,oops\n")
    with pytest.raises(ValueError, match="row 2, column 2"):
        ingest_csv(path)


def test_ingest_non_finite_rejected(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("1,2\nnan,4\n")
    with pytest.raises(ValueError, match="non-finite"):
        ingest_csv(path)
    path.write_text("1,inf\n2,4\n")
    with pytest.raises(ValueError, match="non-finite"):
        ingest_csv(path)


def test_ingest_empty_file(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("")
    with pytest.raises(ValueError, match="empty"):
        ingest_csv(path)
    path.write_text("a,b\n")
    with pytest.raises(ValueError, match="no data"):
        ingest_csv(path)


def test_ingest_standardize_hand_oracle(tmp_path):
    # column (1, 3): mean 2, sample sd sqrt(2) -> (-0.7071..., +0.7071...)
    path = tmp_path / "d.csv"
    path.write_text("1,5\n3,9\n")
    ds = ingest_csv(path, standardize=True)
    expect = 0.7071067811865475
    assert abs(ds.values[0, 0] + expect) < 1e-12
    assert abs(ds.values[1, 0] - expect) < 1e-12
    assert np.allclose(ds.values.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(ds.values.std(axis=0, ddof=1), 1.0, atol=1e-12)


def test_ingest_standardize_zero_variance(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("1,2\n1,4\n")
    with pytest.raises(ValueError, match="zero variance"):
        ingest_csv(path, standardize=True)


# ---------------------------------------------------------------- simulate

def small_scenario(**kw):
    base = dict(design="ar1", p=4, n=12, sampler="hrs", burn_in=3, draws=6,
                replications=2, seed=123)
    base.update(kw)
    return ScenarioConfig(**base)


def test_simulate_writes_artifacts_and_is_deterministic(tmp_path):
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert cmd_simulate(small_scenario(), out1) == 0
    assert cmd_simulate(small_scenario(), out2) == 0
    for name in ("manifest.json", "replications.csv", "aggregate.json",
                 "audit.json", "timing.json"):
        assert (out1 / name).exists()
    for name in ("manifest.json", "replications.csv", "aggregate.json",
                 "audit.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


def test_simulate_aggregate_recomputable_from_csv(tmp_path):
    out = tmp_path / "run"
    cmd_simulate(small_scenario(replications=3), out)
    with open(out / "replications.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    agg = json.loads((out / "aggregate.json").read_text())

    for key in ("stein", "frobenius"):
        med = float(np.median([float(r[key]) for r in rows]))
        assert med == agg[key]["median"]

    pooled = scores_from_counts(
        sum(int(r["tp"]) for r in rows), sum(int(r["tn"]) for r in rows),
        sum(int(r["fp"]) for r in rows), sum(int(r["fn"]) for r in rows))
    assert agg["structure"]["tp"] == pooled.tp
    assert agg["structure"]["specificity"] == pooled.specificity
    assert agg["structure"]["sensitivity"] == pooled.sensitivity
    assert agg["structure"]["mcc"] == pooled.mcc


def test_simulate_audit_content(tmp_path):
    out = tmp_path / "run"
    cmd_simulate(small_scenario(sampler="hrs"), out)
    audit = json.loads((out / "audit.json").read_text())
    assert audit["violations"] == 0
    assert audit["updates_total"] == 2 * 4 * (3 + 6)  # reps * p * sweeps
    assert set(audit["by_stage"]) == {"after_beta", "after_gamma"}
    assert len(audit["per_replication"]) == 2


def test_simulate_csv_schema(tmp_path):
    out = tmp_path / "run"
    cmd_simulate(small_scenario(), out)
    with open(out / "replications.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == ["design", "p", "n", "sampler", "replication", "stein",
                      "frobenius", "tp", "tn", "fp", "fn", "specificity",
                      "sensitivity", "mcc"]


def test_simulate_parallel_jobs_match_serial(tmp_path):
    serial = tmp_path / "serial"
    parallel = tmp_path / "parallel"
    cmd_simulate(small_scenario(replications=3), serial)
    cmd_simulate(small_scenario(replications=3, jobs=2), parallel)
    assert (serial / "replications.csv").read_bytes() == \
        (parallel / "replications.csv").read_bytes()


def test_scenario_validation():
    with pytest.raises(ValueError):
        small_scenario(design="block", p=5).validate()  # odd block
    with pytest.raises(ValueError):
        small_scenario(sampler="mh").validate()
    with pytest.raises(ValueError):
        small_scenario(r=0.0).validate()
    with pytest.raises(ValueError):
        small_scenario(replications=0).validate()
    small_scenario().validate()


# ---------------------------------------------------------------- fit

def write_synthetic(path, n=50, p=3, seed=5):
    rng = np.random.default_rng(seed)
    np.savetxt(path, rng.standard_normal((n, p)), delimiter=",", fmt="%.17g")


def test_fit_smoke_posterior_mean_pd(tmp_path):
    data = tmp_path / "data.csv"
    write_synthetic(data, n=50, p=3)
    out = tmp_path / "fit"
    rc = cmd_fit(data, "hrs", out, burn_in=10, draws=30, seed=1)
    assert rc == 0
    mean = load_matrix_csv(out / "posterior_mean.csv")
    assert mean.shape == (3, 3)
    assert pd_check(mean) is not None
    scaled = load_matrix_csv(out / "posterior_mean_unit_diag.csv")
    assert np.allclose(np.diagonal(scaled), 1.0)
    audit = json.loads((out / "audit.json").read_text())
    assert audit["violations"] == 0


def test_fit_n_less_than_p_completes_clean(tmp_path):
    data = tmp_path / "data.csv"
    write_synthetic(data, n=5, p=10)
    out = tmp_path / "fit"
    rc = cmd_fit(data, "hrs", out, burn_in=5, draws=15, seed=2)
    assert rc == 0
    audit = json.loads((out / "audit.json").read_text())
    assert audit["violations"] == 0
    mean = load_matrix_csv(out / "posterior_mean.csv")
    assert pd_check(mean) is not None


def test_fit_deterministic(tmp_path):
    data = tmp_path / "data.csv"
    write_synthetic(data, n=20, p=4)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    cmd_fit(data, "bgs", out1, burn_in=4, draws=10, seed=9)
    cmd_fit(data, "bgs", out2, burn_in=4, draws=10, seed=9)
    assert (out1 / "posterior_mean.csv").read_bytes() == \
        (out2 / "posterior_mean.csv").read_bytes()


def test_fit_rejects_single_row(tmp_path):
    data = tmp_path / "data.csv"
    data.write_text("1,2,3\n")
    with pytest.raises(ValueError, match="at least 2 rows"):
        cmd_fit(data, "hrs", tmp_path / "out", burn_in=1, draws=2)


# ---------------------------------------------------------------- audit cmd

def test_audit_command(tmp_path):
    out = tmp_path / "audit"
    scenario = small_scenario(sampler="bgs", design="circle", p=8, n=12,
                              burn_in=0, draws=40, replications=1)
    rc = cmd_audit(scenario, out)
    assert rc == 0
    audit = json.loads((out / "audit.json").read_text())
    assert audit["updates_total"] == 8 * 40
    assert audit["violations"] >= 0


# ---------------------------------------------------------------- main/exits

def test_main_simulate_roundtrip(tmp_path):
    out = tmp_path / "run"
    rc = main(["simulate", "--design", "ar1", "--p", "4", "--n", "10",
               "--sampler", "hrs", "--burnin", "2", "--draws", "4",
               "--reps", "1", "--seed", "3", "--out", str(out)])
    assert rc == 0
    assert (out / "manifest.json").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "simulate"
    assert manifest["config"]["seed"] == 3


def test_main_config_error_exit_2(tmp_path):
    rc = main(["simulate", "--design", "block", "--p", "5", "--n", "10",
               "--sampler", "hrs", "--out", str(tmp_path / "x")])
    assert rc == 2


def test_main_data_error_exit_1(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3,oops\n")
    rc = main(["fit", str(bad), "--sampler", "hrs", "--burnin", "1",
               "--draws", "2", "--out", str(tmp_path / "out")])
    assert rc == 1


def test_main_missing_file_exit_1(tmp_path):
    rc = main(["fit", str(tmp_path / "nope.csv"), "--sampler", "hrs",
               "--out", str(tmp_path / "out")])
    assert rc == 1


def test_main_bad_flag_exit_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--design", "hexagon", "--p", "4", "--n", "10",
              "--sampler", "hrs", "--out", str(tmp_path / "x")])
    assert exc.value.code == 2


def test_main_audit_command(tmp_path):
    out = tmp_path / "aud"
    rc = main(["audit", "--design", "circle", "--p", "6", "--n", "12",
               "--sampler", "hrs", "--draws", "20", "--seed", "4",
               "--out", str(out)])
    assert rc == 0
    audit = json.loads((out / "audit.json").read_text())
    assert audit["violations"] == 0
