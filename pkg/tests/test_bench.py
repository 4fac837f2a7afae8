import numpy as np
import pytest

import dlasso_fdp.bench as bench
from dlasso_fdp.bench import (
    MethodOptions,
    default_t_grid,
    fdp_calibration,
    ranking_comparison,
    report_to_json,
    run_experiment,
    run_replication,
    write_report,
)
from dlasso_fdp.errors import ConfigError, ExperimentError, GenerationError
from dlasso_fdp.simulate import SimConfig

SMALL = SimConfig(p=40, n=30, s0=4, beta1=1.5, seed=5, reps=4, alpha=0.1)
SMALL_OPTS = MethodOptions(t_grid=(1.0, 2.0, 3.0), path_grid_size=25)


def test_default_t_grid_shape():
    grid = default_t_grid()
    assert grid[0] == 0.5 and grid[-1] == 5.0
    diffs = np.diff(grid)
    np.testing.assert_allclose(diffs, 0.1, atol=1e-9)


def test_run_replication_deterministic():
    a = run_replication(SMALL, 1, SMALL_OPTS)
    b = run_replication(SMALL, 1, SMALL_OPTS)
    np.testing.assert_array_equal(a.est_fdp_grid, b.est_fdp_grid)
    np.testing.assert_array_equal(a.true_fdp_grid, b.true_fdp_grid)
    np.testing.assert_array_equal(a.curve_z, b.curve_z)
    np.testing.assert_array_equal(a.curve_path, b.curve_path)
    assert a.metrics == b.metrics
    assert a.sigma_used == b.sigma_used


def test_run_replication_rejects_noiseless_config():
    cfg = SimConfig(p=10, n=8, s0=0, beta1=0.0, seed=1, sigma=0.0)
    with pytest.raises(ConfigError):
        run_replication(cfg, 0)


def test_run_replication_counts_are_consistent():
    rec = run_replication(SMALL, 0, SMALL_OPTS)
    for m, metrics in rec.metrics.items():
        assert 0 <= metrics.V <= metrics.R <= SMALL.p
    assert rec.seed_material == {"seed": 5, "rep": 0, "generator": "pcg64"}


def test_run_replication_strong_signal_tpp():
    # single replication at benchmark scale: nearly every effect recovered
    cfg = SimConfig(p=200, n=150, s0=10, beta1=1.0, seed=42, reps=1)
    rec = run_replication(cfg, 0)
    assert rec.metrics["dlasso_fdp"].TPP >= 0.9


def test_run_experiment_single_rep_means_equal_record():
    cfg = SimConfig(p=40, n=30, s0=4, beta1=1.5, seed=5, reps=1, alpha=0.1)
    report = run_experiment(cfg, SMALL_OPTS, keep_records=True)
    rec = report.records[0]
    for m in ("dlasso_fdp", "dlasso_bh", "dlasso_fwer"):
        assert report.method_means[m]["fdp"] == rec.metrics[m].FDP
        assert report.method_means[m]["tpp"] == rec.metrics[m].TPP
    np.testing.assert_array_equal(
        report.mean_estimated_fdp, np.minimum(rec.est_fdp_grid, 1.0)
    )


def test_run_experiment_aggregation_matches_records():
    report = run_experiment(SMALL, SMALL_OPTS, keep_records=True)
    assert report.n_reps == 4
    for m in ("dlasso_fdp", "dlasso_bh", "dlasso_fwer"):
        fdp = np.mean([r.metrics[m].FDP for r in report.records])
        assert report.method_means[m]["fdp"] == pytest.approx(fdp, abs=1e-15)
    mean_true = np.mean([r.true_fdp_grid for r in report.records], axis=0)
    np.testing.assert_allclose(report.mean_true_fdp, mean_true, atol=1e-15)
    assert set(report.histogram.keys()) == {2.0, 3.6}
    assert len(report.histogram[2.0]["true"]) == 4


def test_report_json_deterministic(tmp_path):
    r1 = run_experiment(SMALL, SMALL_OPTS)
    r2 = run_experiment(SMALL, SMALL_OPTS)
    assert report_to_json(r1) == report_to_json(r2)
    d1, d2 = tmp_path / "a", tmp_path / "b"
    for rep, d in ((r1, d1), (r2, d2)):
        write_report(rep, str(d))
    for name in ("report.json", "table_methods.csv", "fdp_calibration.csv",
                 "fdp_tpp_curves.csv", "fdp_histogram_t2.csv",
                 "fdp_histogram_t3.6.csv"):
        assert (d1 / name).read_bytes() == (d2 / name).read_bytes()


def test_report_csv_have_provenance_header(tmp_path):
    report = run_experiment(SMALL, SMALL_OPTS)
    paths = write_report(report, str(tmp_path))
    for path in paths:
        if path.endswith(".csv"):
            first = open(path).readline()
            assert first.startswith("# ")
            assert "generator=pcg64" in first
            assert "seed=5" in first


def test_calibration_beyond_max_statistic_true_fdp_zero():
    t, est, true = fdp_calibration(SMALL, (50.0, 60.0), SMALL_OPTS)
    np.testing.assert_array_equal(true, 0.0)
    assert np.all(est < 1e-200)


def test_calibration_requires_increasing_grid():
    with pytest.raises(ConfigError):
        fdp_calibration(SMALL, (2.0, 1.0), SMALL_OPTS)
    with pytest.raises(ConfigError):
        fdp_calibration(SMALL, (-1.0, 1.0), SMALL_OPTS)


def test_ranking_comparison_shapes():
    levels, cz, cp = ranking_comparison(SMALL, SMALL_OPTS)
    assert levels.shape == cz.shape == cp.shape == (SMALL.s0,)
    np.testing.assert_allclose(levels, np.arange(1, 5) / 4)
    assert np.all((cz >= 0) & (cz <= 1)) and np.all((cp >= 0) & (cp <= 1))


def test_ranking_comparison_dense_variant_runs():
    cfg = SimConfig(p=40, n=30, s0=12, beta1=0.5, seed=6, reps=2)
    levels, cz, cp = ranking_comparison(cfg, SMALL_OPTS)
    assert levels.size == 12


def test_experiment_failure_policy(monkeypatch):
    real = bench.run_replication

    def flaky(cfg, rep, options=None):
        if rep % 2 == 0:
            raise GenerationError(f"boom {rep}")
        return real(cfg, rep, options)

    monkeypatch.setattr(bench, "run_replication", flaky)
    # 50% failures: aborts
    with pytest.raises(ExperimentError):
        run_experiment(SMALL, SMALL_OPTS)

    def rarely_flaky(cfg, rep, options=None):
        if rep == 0:
            raise GenerationError("boom 0")
        return real(cfg, rep, options)

    monkeypatch.setattr(bench, "run_replication", rarely_flaky)
    cfg = SimConfig(p=40, n=30, s0=4, beta1=1.5, seed=5, reps=8, alpha=0.1)
    report = run_experiment(cfg, SMALL_OPTS)
    assert report.n_reps == 7
    assert report.failures == [(0, "GenerationError: boom 0")]


def test_provenance_contents():
    report = run_experiment(SMALL, SMALL_OPTS)
    prov = report.provenance
    assert prov["generator"] == "pcg64"
    assert prov["fwer_method"] == "holm"
    assert prov["fwer_caveat"] is True
    assert prov["sigma_mode"] == "estimate"
    assert prov["seed"] == SMALL.seed
