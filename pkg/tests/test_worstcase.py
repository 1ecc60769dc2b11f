import math

import numpy as np
import pytest

from drqr.constants import c_alpha_p
from drqr.core import Dataset, DomainError, ProblemSpec, dual_norm_aug, mean_check_loss
from drqr.robust import worst_case_value
from drqr.solver import SolverConfig, fit_dro
from drqr.worstcase import (worst_case, worst_case_p1, worst_case_p_finite,
                            worst_case_pinf)

CFG = SolverConfig(max_iters=20000, restarts=2)


def test_p1_zero_radius_is_empirical():
    ds = Dataset(np.zeros((3, 1)), np.array([-1.0, 0.5, 2.0]))
    spec = ProblemSpec(0.7, 1.0, "l2", 0.0)
    rep = worst_case_p1(ds, np.zeros(1), 0.0, spec)
    assert rep.achieved_value == pytest.approx(mean_check_loss(ds.y, 0.7))
    assert rep.transport_cost == 0.0


def test_p1_two_atom_cross_module():
    ds = Dataset(np.zeros((2, 1)), np.array([-1.0, 1.0]))
    spec = ProblemSpec(0.7, 1.0, "l2", 0.5)
    rep = worst_case_p1(ds, np.zeros(1), 0.0, spec)
    assert rep.achieved_value == pytest.approx(0.85)
    assert rep.closed_form_value == pytest.approx(0.85)
    assert rep.attained
    assert rep.transport_cost <= 0.5 * (1 + 1e-9)


def test_p1_nonattainment():
    ds = Dataset(np.zeros((3, 1)), np.array([-3.0, -2.0, -1.0]))
    spec = ProblemSpec(0.9, 1.0, "l2", 0.5)
    rep = worst_case_p1(ds, np.zeros(1), 0.0, spec)
    assert not rep.attained
    assert rep.cloud is None
    assert rep.closed_form_value == pytest.approx(
        worst_case_value(ds, np.zeros(1), 0.0, spec).value)


def test_p1_alpha_half_two_sided():
    ds = Dataset(np.zeros((4, 1)), np.array([-2.0, -1.0, 1.0, 2.0]))
    spec = ProblemSpec(0.5, 1.0, "l2", 0.3)
    rep = worst_case_p1(ds, np.zeros(1), 0.0, spec)
    assert rep.attained
    # every atom moves by the radius, sign following the residual
    assert rep.transport_cost == pytest.approx(0.3)
    assert rep.achieved_value == pytest.approx(rep.closed_form_value, abs=1e-10)


def test_pinf_point_mass():
    ds = Dataset(np.zeros((1, 1)), np.array([0.0]))
    spec = ProblemSpec(0.7, math.inf, "l2", 1.0)
    rep = worst_case_pinf(ds, np.zeros(1), 0.0, spec)
    assert rep.achieved_value == pytest.approx(0.7)
    assert rep.attained
    assert rep.transport_cost == pytest.approx(1.0)


def test_pinf_alpha_half_sign_of_residual(rng):
    ds = Dataset(rng.normal(size=(5, 1)), rng.normal(size=5))
    spec = ProblemSpec(0.5, math.inf, "l2", 0.4)
    beta = np.array([0.3])
    rep = worst_case_pinf(ds, beta, 0.1, spec)
    z = ds.residuals(beta, 0.1)
    v_y = rep.cloud.ys - ds.y
    assert np.all(np.sign(v_y) == np.where(z >= 0, 1.0, -1.0))
    assert rep.attained


def test_pinf_achieved_matches_closed_form(rng):
    for _ in range(8):
        n, d = int(rng.integers(2, 7)), int(rng.integers(1, 3))
        ds = Dataset(rng.normal(size=(n, d)), rng.normal(size=n))
        alpha = float(rng.choice([0.3, 0.5, 0.8]))
        norm = str(rng.choice(["l1", "l2", "linf"]))
        spec = ProblemSpec(alpha, math.inf, norm, 0.35)
        beta = rng.normal(size=d)
        rep = worst_case_pinf(ds, beta, float(rng.normal()), spec)
        assert rep.achieved_value == pytest.approx(rep.closed_form_value, abs=1e-10)
        assert rep.transport_cost <= 0.35 * (1 + 1e-9)


@pytest.mark.parametrize("norm", ["l2", "l1", "linf"])
def test_p_finite_attains_at_fit(norm, rng):
    n, d = 7, 2
    ds = Dataset(rng.normal(size=(n, d)), rng.normal(size=n))
    spec = ProblemSpec(0.7, 2.0, norm, 0.3)
    fit = fit_dro(ds, spec, CFG)
    rep = worst_case_p_finite(ds, spec, fit)
    assert rep.attained
    assert abs(rep.achieved_value - rep.closed_form_value) <= 1e-6
    assert rep.transport_cost <= 0.3 * (1 + 1e-9)
    # the equality chain pins the value to quantile loss plus penalty
    emp = mean_check_loss(ds.residuals(fit.beta, fit.s_bar), 0.7)
    rhs = emp + c_alpha_p(0.7, 2.0) * 0.3 * dual_norm_aug(fit.beta, norm)
    assert rep.achieved_value == pytest.approx(rhs, abs=1e-8)


def test_p_finite_transport_cost_identity(rng):
    # cost^p = eps^p exactly for the split construction
    ds = Dataset(rng.normal(size=(6, 1)), rng.normal(size=6))
    spec = ProblemSpec(0.62, 1.8, "l2", 0.45)
    fit = fit_dro(ds, spec, CFG)
    rep = worst_case_p_finite(ds, spec, fit)
    assert rep.transport_cost == pytest.approx(0.45, abs=1e-10)


def test_p_finite_no_split_for_exact_tail():
    # alpha * N integer and distinct residuals: the tail needs no atom split
    y = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
    ds = Dataset(np.zeros((5, 0)), y)
    spec = ProblemSpec(0.6, 2.0, "l2", 0.2)
    fit = fit_dro(ds, spec, CFG)
    rep = worst_case_p_finite(ds, spec, fit)
    assert rep.cloud.size == 5
    assert rep.attained
    assert np.all(np.isclose(rep.cloud.weights, 0.2))
    assert np.sum(rep.cloud.weights) == pytest.approx(1.0, abs=1e-12)


def test_p_finite_split_mass_conservation(rng):
    ds = Dataset(rng.normal(size=(6, 1)), rng.normal(size=6))
    spec = ProblemSpec(0.7, 2.0, "l2", 0.3)
    fit = fit_dro(ds, spec, CFG)
    rep = worst_case_p_finite(ds, spec, fit)
    assert rep.cloud.size == 7  # one boundary atom split in two
    assert float(np.sum(rep.cloud.weights)) == pytest.approx(1.0, abs=1e-12)
    assert rep.attained


def test_p_finite_requires_finite_p():
    ds = Dataset(np.zeros((2, 1)), np.array([0.0, 1.0]))
    fit = fit_dro(ds, ProblemSpec(0.7, 2.0, "l2", 0.1), CFG)
    with pytest.raises(DomainError):
        worst_case_p_finite(ds, ProblemSpec(0.7, 1.0, "l2", 0.1), fit)
    with pytest.raises(DomainError):
        worst_case_p1(ds, fit.beta, fit.s_bar, ProblemSpec(0.7, 2.0, "l2", 0.1))
    with pytest.raises(DomainError):
        worst_case_pinf(ds, fit.beta, fit.s_bar, ProblemSpec(0.7, 2.0, "l2", 0.1))


def test_p_finite_warns_on_sloppy_fit(rng):
    ds = Dataset(rng.normal(size=(8, 2)), rng.normal(size=8))
    spec = ProblemSpec(0.7, 2.0, "l2", 0.3)
    sloppy = SolverConfig(max_iters=40, tol=1e-300, restarts=1)
    with pytest.warns(RuntimeWarning):
        fit = fit_dro(ds, spec, sloppy)
    rep = worst_case_p_finite(ds, spec, fit, residual_warn=1e-320)
    assert "fit-not-optimal" in rep.flags


def test_feasibility_sandwich(rng):
    # achieved values never exceed the supremum
    for _ in range(6):
        n, d = int(rng.integers(2, 6)), 1
        ds = Dataset(rng.normal(size=(n, d)), rng.normal(size=n))
        alpha = float(rng.choice([0.3, 0.5, 0.8]))
        for p in (1.0, math.inf):
            spec = ProblemSpec(alpha, p, "l2", 0.3)
            beta = rng.normal(size=d)
            s = float(rng.normal())
            rep = (worst_case_p1 if p == 1.0 else worst_case_pinf)(ds, beta, s, spec)
            if rep.cloud is None:
                continue
            sup = worst_case_value(ds, beta, s, spec).value
            assert rep.achieved_value <= sup + 1e-8
            if rep.attained:
                assert rep.achieved_value == pytest.approx(sup, abs=1e-6)


def test_dispatch(rng):
    ds = Dataset(rng.normal(size=(5, 1)), rng.normal(size=5))
    for p in (1.0, 2.0, math.inf):
        spec = ProblemSpec(0.7, p, "l2", 0.2)
        fit = fit_dro(ds, spec, CFG)
        rep = worst_case(ds, spec, fit)
        assert rep.closed_form_value == pytest.approx(fit.objective, abs=1e-6)
