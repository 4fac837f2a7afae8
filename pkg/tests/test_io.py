import numpy as np
import pytest

from dlasso_fdp import io
from dlasso_fdp.errors import CsvParseError, InvalidDataError
from dlasso_fdp.precision import build_precision
from dlasso_fdp.simulate import SimConfig, gen_dataset, replication_rng
from conftest import random_dataset


def test_xy_csv_round_trip(tmp_path, rng):
    X = rng.standard_normal((7, 3))
    y = rng.standard_normal(7)
    xp, yp = str(tmp_path / "X.csv"), str(tmp_path / "y.csv")
    io.write_x_csv(X, xp)
    io.write_y_csv(y, yp)
    ds = io.read_dataset(xp, yp)
    np.testing.assert_array_equal(ds.X, X)  # repr round-trips float64 exactly
    np.testing.assert_array_equal(ds.y, y)


def test_read_x_csv_header_enforced(tmp_path):
    path = tmp_path / "X.csv"
    path.write_text("a,b\n1.0,2.0\n")
    with pytest.raises(CsvParseError) as exc:
        io.read_x_csv(str(path))
    assert exc.value.line == 1


def test_read_csv_reports_offending_line(tmp_path):
    path = tmp_path / "X.csv"
    path.write_text("x1,x2\n1.0,2.0\n3.0\n")
    with pytest.raises(CsvParseError) as exc:
        io.read_x_csv(str(path))
    assert exc.value.line == 3

    path.write_text("x1,x2\n1.0,2.0\n3.0,oops\n")
    with pytest.raises(CsvParseError) as exc:
        io.read_x_csv(str(path))
    assert exc.value.line == 3


def test_read_empty_y_is_parse_error(tmp_path):
    path = tmp_path / "y.csv"
    path.write_text("")
    with pytest.raises(CsvParseError):
        io.read_y_csv(str(path))


def test_read_dataset_length_mismatch(tmp_path, rng):
    xp, yp = str(tmp_path / "X.csv"), str(tmp_path / "y.csv")
    io.write_x_csv(rng.standard_normal((5, 2)), xp)
    io.write_y_csv(rng.standard_normal(4), yp)
    with pytest.raises(InvalidDataError):
        io.read_dataset(xp, yp)


def test_truth_json_round_trip(tmp_path):
    cfg = SimConfig(p=12, n=10, s0=3, beta1=1.0, seed=3)
    _, truth = gen_dataset(cfg, replication_rng(3, 0))
    path = str(tmp_path / "truth.json")
    io.write_truth_json(truth, cfg.seed, path)
    support = io.read_truth_support(path)
    np.testing.assert_array_equal(support, truth.support)
    import json

    payload = json.load(open(path))
    assert payload["generator"] == "pcg64"
    assert payload["seed"] == 3
    assert payload["support"] == [1, 2, 3]  # 1-based on disk


def test_precision_dump_round_trip(tmp_path, rng):
    ds = random_dataset(rng, n=30, p=6, s0=2)
    prec = build_precision(ds, kappa=0.7)
    path = str(tmp_path / "prec.npz")
    io.save_precision(prec, path)
    loaded = io.load_precision(path)
    np.testing.assert_array_equal(loaded.theta_hat, prec.theta_hat)
    np.testing.assert_array_equal(loaded.omega_hat, prec.omega_hat)
    assert loaded.kappa == prec.kappa
    for a, b in zip(loaded.column_fits, prec.column_fits):
        assert a.j == b.j and a.tau_sq == b.tau_sq and a.lambda_j == b.lambda_j
        np.testing.assert_array_equal(a.gamma_hat, b.gamma_hat)


def test_theta_csv_export(tmp_path, rng):
    ds = random_dataset(rng, n=20, p=4)
    prec = build_precision(ds, kappa=0.7)
    path = str(tmp_path / "theta.csv")
    io.write_theta_csv(prec, path)
    lines = open(path).read().splitlines()
    assert lines[0] == "t1,t2,t3,t4"
    assert len(lines) == 5
