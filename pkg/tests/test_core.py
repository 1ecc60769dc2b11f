import math

import numpy as np
import pytest

from drqr.core import (DataError, Dataset, DomainError, ProblemSpec,
                       WeightedPointCloud, alpha_quantile, check_loss,
                       dual_direction, dual_norm, load_dataset,
                       mean_check_loss, primal_norm)

V = np.array([3.0, -4.0])


def test_dual_norm_closed_forms():
    assert dual_norm(V, "l2") == pytest.approx(5.0)
    assert dual_norm(V, "l1") == pytest.approx(4.0)   # dual of l1 is max-abs
    assert dual_norm(V, "linf") == pytest.approx(7.0)  # dual of linf is sum-abs


def test_dual_direction_closed_forms():
    np.testing.assert_allclose(dual_direction(np.array([0.0, 1.0]), "l2"), [0.0, 1.0])
    np.testing.assert_allclose(dual_direction(V, "l1"), [0.0, -1.0])
    np.testing.assert_allclose(dual_direction(V, "linf"), [1.0, -1.0])


def test_dual_direction_tie_breaks():
    # smallest index attaining the max for l1; sign(0) maps to +1 for linf
    np.testing.assert_allclose(dual_direction(np.array([2.0, -2.0]), "l1"), [1.0, 0.0])
    np.testing.assert_allclose(dual_direction(np.array([0.0, -1.0]), "linf"), [1.0, -1.0])


def test_dual_direction_zero_vector_rejected():
    with pytest.raises(DomainError, match="undefined direction"):
        dual_direction(np.zeros(3), "l2")


def test_nonfinite_rejected():
    with pytest.raises(DomainError):
        dual_norm(np.array([1.0, np.nan]), "l2")


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
def test_holder_certificate(norm, rng):
    for _ in range(40):
        dim = int(rng.integers(1, 6))
        v = rng.normal(size=dim)
        w = rng.normal(size=dim)
        assert abs(v @ w) <= primal_norm(w, norm) * dual_norm(v, norm) + 1e-10
        if np.any(v != 0):
            u = dual_direction(v, norm)
            assert abs(v @ u - dual_norm(v, norm)) <= 1e-10
            assert abs(primal_norm(u, norm) - 1.0) <= 1e-12


@pytest.mark.parametrize("norm", ["l1", "l2", "linf"])
def test_dual_norm_homogeneous_and_triangle(norm, rng):
    for _ in range(40):
        dim = int(rng.integers(1, 6))
        v, w = rng.normal(size=dim), rng.normal(size=dim)
        c = float(rng.normal())
        assert abs(dual_norm(c * v, norm) - abs(c) * dual_norm(v, norm)) <= 1e-10
        assert dual_norm(v + w, norm) <= dual_norm(v, norm) + dual_norm(w, norm) + 1e-10


def test_augmented_dual_norm_at_least_unit():
    from drqr.core import dual_norm_aug
    rng = np.random.default_rng(0)
    for norm in ("l1", "l2", "linf"):
        for _ in range(20):
            beta = rng.normal(size=int(rng.integers(0, 5)))
            assert dual_norm_aug(beta, norm) >= 1.0 - 1e-15


def test_problem_spec_conjugate():
    assert ProblemSpec(0.3, 1.0).q == math.inf
    assert ProblemSpec(0.3, math.inf).q == 1.0
    spec = ProblemSpec(0.3, 1.5)
    assert abs(1.0 / spec.p + 1.0 / spec.q - 1.0) <= 1e-12


@pytest.mark.parametrize("bad", [dict(alpha=0.0), dict(alpha=1.0), dict(alpha=1.5),
                                 dict(p=0.5), dict(epsilon=-0.1), dict(norm="l3")])
def test_problem_spec_validation(bad):
    kwargs = dict(alpha=0.5, p=2.0, norm="l2", epsilon=0.1)
    kwargs.update(bad)
    with pytest.raises(DomainError):
        ProblemSpec(**kwargs)


def test_check_loss_values():
    u = np.array([-2.0, 0.0, 3.0])
    np.testing.assert_allclose(check_loss(u, 0.7), [0.6, 0.0, 2.1])
    assert mean_check_loss(u, 0.7) == pytest.approx(2.7 / 3)


def test_alpha_quantile_left_continuous():
    assert alpha_quantile(np.array([1.0, 2.0, 3.0]), 0.5) == 2.0
    assert alpha_quantile(np.array([0.0, 1.0]), 0.7) == 1.0
    assert alpha_quantile(np.arange(10.0), 0.7) == 6.0
    # weighted version agrees with replication
    assert alpha_quantile(np.array([0.0, 1.0]), 0.5, weights=[0.5, 0.5]) == 0.0


def test_dataset_validation():
    with pytest.raises(DataError):
        Dataset(np.ones((2, 1)), np.ones(3))
    with pytest.raises(DataError):
        Dataset(np.zeros((0, 1)), np.zeros(0))
    with pytest.raises(DataError):
        Dataset(np.array([[np.inf]]), np.array([1.0]))
    ds = Dataset(np.zeros((4, 0)), np.ones(4))
    assert ds.d == 0 and ds.n == 4


def test_point_cloud_invariants():
    cloud = WeightedPointCloud.from_values([0.0, 1.0])
    assert cloud.size == 2 and cloud.d == 0
    with pytest.raises(DataError):
        WeightedPointCloud.from_values([0.0, 1.0], [0.6, 0.6])
    with pytest.raises(DataError):
        WeightedPointCloud.from_values([0.0, np.nan], [0.5, 0.5])


def test_point_cloud_csv_roundtrip(tmp_path):
    cloud = WeightedPointCloud(np.array([[1.0, 2.0], [3.0, 4.0]]),
                               np.array([5.0, 6.0]), np.array([0.25, 0.75]))
    path = tmp_path / "cloud.csv"
    cloud.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "weight,x_1,x_2,y"
    assert len(lines) == 3


def _write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_load_dataset_shapes(tmp_path):
    path = _write(tmp_path, "y,x1\n1,2\n3,4\n5,6\n")
    ds = load_dataset(path, "y")
    assert ds.n == 3 and ds.d == 1
    np.testing.assert_allclose(ds.y, [1, 3, 5])
    # index selection works too
    ds2 = load_dataset(path, 1)
    np.testing.assert_allclose(ds2.y, [2, 4, 6])


def test_load_dataset_errors(tmp_path):
    with pytest.raises(DataError, match="available columns"):
        load_dataset(_write(tmp_path, "a,b\n1,2\n"), "y")
    with pytest.raises(DataError, match="non-numeric"):
        load_dataset(_write(tmp_path, "y,x\n1,foo\n"), "y")
    with pytest.raises(DataError, match="non-finite"):
        load_dataset(_write(tmp_path, "y,x\n1,nan\n"), "y")
    with pytest.raises(DataError, match="ragged"):
        load_dataset(_write(tmp_path, "y,x\n1,2\n3\n"), "y")
