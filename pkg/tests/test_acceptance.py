"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``.  The stochastic
reproductions are desk-scale (tens of replicates, thousands of test points)
with fixed seeds; the structural identities run at tight tolerances.
"""

import itertools
import math
import time
import warnings

import numpy as np
import pytest

from drqr.bounds import oos_gap
from drqr.constants import c_alpha_p, intercept_shift, k_constants
from drqr.core import (Dataset, ProblemSpec, WeightedPointCloud, alpha_quantile,
                       dual_norm_aug, mean_check_loss)
from drqr.experiments import (ExperimentConfig, RadiusRule, inverse_normal_cdf,
                              run_comparison, run_intercept_table, run_radius_study)
from drqr.fixed_design import fixed_design_dro, fixed_design_radii, ols_fit
from drqr.robust import identity_audit, oracle_sup, worst_case_value
from drqr.solver import SolverConfig, fit_dro
from drqr.worstcase import worst_case_p1, worst_case_p_finite, worst_case_pinf

warnings.filterwarnings("ignore", category=RuntimeWarning)

CFG = SolverConfig(max_iters=20000, restarts=2)


def _report(num, name, ok, detail, budget_s=None, elapsed=None):
    status = "PASS" if ok else "FAIL"
    timing = f", {elapsed:.0f}s" if elapsed is not None else ""
    print(f"ACCEPTANCE {num:02d} {name}: {status} ({detail}{timing})")
    assert ok, f"criterion {num} ({name}): {detail}"
    if budget_s is not None and elapsed is not None:
        assert elapsed < budget_s, f"criterion {num} exceeded runtime budget"


def _nested_oracle_min(ds, spec, fit, coarse_steps, fine_steps):
    """Brute-force min over a (slope, intercept) grid of the split oracle."""
    d = ds.d

    def scan(centers, halfwidth, steps, **oracle_kw):
        axes = [np.linspace(c - halfwidth, c + halfwidth, steps) for c in centers]
        best = math.inf
        for point in itertools.product(*axes):
            beta = np.asarray(point[:d])
            val = oracle_sup(ds, beta, point[d], spec, **oracle_kw)
            best = min(best, val)
        return best

    coarse = scan([0.0] * (d + 1), 4.0, coarse_steps, grid=12, refinements=1)
    centers = list(fit.beta) + [fit.s_robust]
    fine = scan(centers, 0.3, fine_steps, grid=24, refinements=2)
    at_fit = oracle_sup(ds, fit.beta, fit.s_robust, spec, grid=32, refinements=3)
    return min(coarse, fine, at_fit)


def test_criterion_01_reformulation_equivalence():
    t0 = time.time()
    rng = np.random.default_rng(101)
    ps = [1.0, 1.5, 2.0, math.inf]
    alphas = [0.3, 0.5, 0.8]
    norms = ["l1", "l2", "linf"]
    worst = 0.0
    for i in range(20):
        p = ps[i % 4]
        alpha = alphas[i % 3]
        norm = norms[i % 3]
        d = 2 if (math.isinf(p) or i in (0, 10)) else 1
        n = int(rng.integers(3, 6))
        ds = Dataset(rng.normal(size=(n, d)), 1.5 * rng.normal(size=n))
        eps = float(rng.choice([0.1, 0.3, 0.6]))
        spec = ProblemSpec(alpha, p, norm, eps)
        fit = fit_dro(ds, spec, CFG)
        steps = (9, 7) if d == 2 else (17, 9)
        oracle_min = _nested_oracle_min(ds, spec, fit, *steps)
        rel = abs(fit.objective - oracle_min) / max(1.0, abs(oracle_min))
        worst = max(worst, rel)
    elapsed = time.time() - t0
    _report(1, "reformulation-equivalence", worst <= 1e-2,
            f"20 instances, worst rel err {worst:.2e}", 300, elapsed)


def test_criterion_02_intercept_relation():
    rng = np.random.default_rng(202)
    # construction identity
    worst_build = 0.0
    for p in (1.0, 1.5, 2.0, math.inf):
        ds = Dataset(rng.normal(size=(7, 2)), rng.normal(size=7))
        spec = ProblemSpec(0.7, p, "l2", 0.35)
        fit = fit_dro(ds, spec, CFG)
        shift = intercept_shift(0.7, p, 0.35, dual_norm_aug(fit.beta, "l2"))
        worst_build = max(worst_build, abs(fit.s_robust - fit.s_bar - shift))
    # direct grid optimization of the robust intercept at the fitted slope
    res = 2e-3
    worst_grid = 0.0
    for p in (1.5, 2.0, math.inf):
        n = 5
        ds = Dataset(rng.normal(size=(n, 1)), rng.normal(size=n))
        spec = ProblemSpec(0.7, p, "l2", 0.3)      # alpha * n not an integer
        fit = fit_dro(ds, spec, CFG)
        svals = np.arange(fit.s_robust - 0.4, fit.s_robust + 0.4 + res / 2, res)
        vals = [worst_case_value(ds, fit.beta, float(s), spec).value for s in svals]
        s_star = float(svals[int(np.argmin(vals))])
        worst_grid = max(worst_grid, abs(s_star - fit.s_robust))
    ok = worst_build <= 1e-12 and worst_grid <= 2 * res
    _report(2, "intercept-relation", ok,
            f"construction gap {worst_build:.1e}, grid-argmin gap {worst_grid:.1e}")


def test_criterion_03_worst_case_attainment():
    rng = np.random.default_rng(303)
    ok = True
    details = []
    for p in (1.5, 2.0, math.inf):
        ds = Dataset(rng.normal(size=(6, 2)), rng.normal(size=6))
        spec = ProblemSpec(0.7, p, "l2", 0.3)
        fit = fit_dro(ds, spec, CFG)
        rep = (worst_case_pinf(ds, fit.beta, fit.s_robust, spec) if math.isinf(p)
               else worst_case_p_finite(ds, spec, fit))
        ok &= rep.transport_cost <= 0.3 * (1 + 1e-9)
        ok &= abs(rep.achieved_value - rep.closed_form_value) <= 1e-6
        details.append(f"p={p}: gap {abs(rep.achieved_value - rep.closed_form_value):.1e}")
    # order one: attained with positive favorable mass, flagged otherwise
    ds = Dataset(rng.normal(size=(5, 1)), np.array([-1.0, -0.5, 0.2, 0.9, 2.0]))
    spec1 = ProblemSpec(0.8, 1.0, "l2", 0.4)
    rep1 = worst_case_p1(ds, np.zeros(1), 0.0, spec1)
    ok &= rep1.attained and rep1.transport_cost <= 0.4 * (1 + 1e-9)
    ok &= abs(rep1.achieved_value - rep1.closed_form_value) <= 1e-6
    ds_neg = Dataset(np.zeros((3, 1)), np.array([-3.0, -2.0, -1.0]))
    rep_neg = worst_case_p1(ds_neg, np.zeros(1), 0.0, ProblemSpec(0.8, 1.0, "l2", 0.4))
    ok &= (not rep_neg.attained) and rep_neg.cloud is None
    _report(3, "worst-case-attainment", ok, "; ".join(details) + "; p=1 flags correct")


def test_criterion_04_constants():
    alphas = [round(0.1 * k, 1) for k in range(1, 10)]
    dev_one = max(abs(c_alpha_p(a, 1.01) - max(a, 1 - a)) for a in alphas)
    dev_inf = max(abs(c_alpha_p(a, 1000.0) - 2 * a * (1 - a)) for a in alphas)
    worst_k1 = 0.0
    worst_k2 = 0.0
    for a, p in [(0.31, 1.5), (0.5, 2.0), (0.62, 2.7), (0.85, 5.0), (0.93, 1.2),
                 (0.12, 3.3), (0.44, 7.0), (0.7, 2.0)]:
        q = p / (p - 1.0)
        k1, k2 = k_constants(a, p)
        worst_k1 = max(worst_k1, abs(k1 ** (1 / q) * q * (q - 1) ** (-1 / p)
                                     - c_alpha_p(a, p)))
        lhs = k2 * ((q - 1) * k1) ** ((1 - q) / q)
        rhs = (a ** q - (1 - a) ** q) * c_alpha_p(a, p) ** (1 - q) / q
        worst_k2 = max(worst_k2, abs(lhs - rhs))
    ok = dev_one <= 2e-2 and dev_inf <= 1e-2 and worst_k1 <= 1e-10 and worst_k2 <= 1e-10
    # Known red: the exact constant misses the stated 2e-2 limit tolerance by
    # 1.4 percent at the extreme quantile levels (measured 2.0286e-2 at
    # alpha in {0.1, 0.9}); the identities and the p -> inf limit all hold.
    _report(4, "constants", ok,
            f"limit p=1.01 dev {dev_one:.4e} (bound 2e-2), limit p=1000 dev "
            f"{dev_inf:.1e}, k1-identity {worst_k1:.1e}, shift-identity {worst_k2:.1e}")


def test_criterion_05_uniqueness_audit():
    clouds = [
        WeightedPointCloud.from_values([0.0, 1.0]),
        WeightedPointCloud.from_values([-1.0, 0.5, 2.0]),
        WeightedPointCloud.from_values([0.3, 0.7, 1.9], [0.2, 0.3, 0.5]),
        WeightedPointCloud.from_values([-2.0, -0.5, 0.5, 1.5]),
        WeightedPointCloud.from_values([0.0, 0.25, 0.5, 0.75]),
    ]
    worst_gap = 0.0
    for k, cloud in enumerate(clouds):
        alpha = (0.3, 0.5, 0.62, 0.7, 0.85)[k]
        p = (1.5, 2.0, 2.0, 3.0, 2.0)[k]
        rep = identity_audit("check", cloud, 0.5, p, alpha=alpha)
        worst_gap = max(worst_gap, rep.gap)
    a = identity_audit("squared", WeightedPointCloud.from_values([0.0, 1.0]), 0.5, 2.0)
    b = identity_audit("squared", WeightedPointCloud.from_values([0.0, 3.0]), 0.5, 2.0)
    spread = abs(a.implied_c - b.implied_c)
    ok = worst_gap <= 2e-2 and spread > 0.05
    _report(5, "uniqueness-audit", ok,
            f"check-loss worst gap {worst_gap:.2e}, squared implied-c spread {spread:.2f}")


def test_criterion_06_fixed_design():
    rng = np.random.default_rng(606)
    ds = Dataset(rng.normal(size=(25, 3)), rng.normal(size=25))
    _, z, hat = ols_fit(ds)
    trace_gap = abs(float(np.sum(hat)) - 3.0)
    quant = alpha_quantile(z, 0.7)
    exact = all(
        fixed_design_dro(ds, ProblemSpec(0.7, 1.0, "l2", eps), np.zeros(3)).s_robust == quant
        for eps in (0.0, 0.05, 0.3, 1.0, 5.0))
    rng2 = np.random.default_rng(314)
    X = rng2.normal(size=(40, 3))
    ds2 = Dataset(X, rng2.normal(size=40))
    r = fixed_design_radii(ds2, 0.3, 0.7, 3.0, 2.0, np.array([1.0, -1.0, 0.5]))
    frozen = (1078.942692299162, 3.4504358985150696, 0.9474128754637691)
    radii_ok = (abs(r.eps1 - frozen[0]) <= 1e-9 * frozen[0]
                and abs(r.eps2 - frozen[1]) <= 1e-12
                and abs(r.eps3 - frozen[2]) <= 1e-12)
    ok = trace_gap <= 1e-8 and exact and radii_ok
    _report(6, "fixed-design", ok,
            f"hat-trace gap {trace_gap:.1e}, p=1 quantile exact {exact}, radii frozen {radii_ok}")


def test_criterion_07_comparison_protocol():
    t0 = time.time()
    grid = tuple(float(x) for x in np.geomspace(1e-3, 2.0, 12))
    cfg = ExperimentConfig(generator="uniform15", d=30, sigma=5.0, alpha=0.9,
                           p=2.0, norm="l2", N_grid=(50,),
                           radius_rule=RadiusRule("grid", grid=grid),
                           test_size=4000, replications=20, seed=11,
                           solver_max_iters=3000, solver_restarts=1, solver_tol=1e-4)
    trials, _ = run_comparison(cfg)
    wins = 0
    for rep in range(cfg.replications):
        dr = min(t.test_loss for t in trials if t.model == "DRQR" and t.replicate == rep)
        rq = min(t.test_loss for t in trials if t.model == "RQR" and t.replicate == rep)
        wins += dr <= rq
    elapsed = time.time() - t0
    frac = wins / cfg.replications
    _report(7, "comparison-protocol", frac >= 0.70,
            f"robust fit wins {wins}/20 replicates at best-over-radius", 600, elapsed)


def test_criterion_08_intercept_protocol():
    t0 = time.time()
    theory_gap = abs(5.0 * inverse_normal_cdf(0.9) - 6.4078)
    cfg = ExperimentConfig(generator="uniform15", d=30, sigma=5.0, alpha=0.9,
                           p=2.0, norm="l2", N_grid=(30,), test_size=10,
                           replications=20, seed=8, alpha_grid=(0.9,), p_grid=(2.0,),
                           solver_max_iters=3000, solver_restarts=1, solver_tol=1e-4)
    rows = run_intercept_table(cfg)
    row = rows[0]
    under_margin = 6.4078 - row["rqr"]
    shift_margin = row["drqr"] - row["rqr"]
    ok = theory_gap <= 5e-4 and under_margin > 0 and shift_margin > 0
    elapsed = time.time() - t0
    _report(8, "intercept-protocol", ok,
            f"theory gap {theory_gap:.1e}, under-estimation margin {under_margin:.2f}, "
            f"robust-minus-regularized {shift_margin:.2f}", None, elapsed)


def test_criterion_09_radius_decay():
    t0 = time.time()
    cfg = ExperimentConfig(generator="unitnorm", d=10, sigma=1.0, alpha=0.9,
                           p=2.0, norm="l2", N_grid=(50, 100, 200, 400, 800, 1600),
                           test_size=2000, replications=10, seed=3, folds=5,
                           solver_max_iters=2000, solver_restarts=1, solver_tol=1e-4)
    rows = run_radius_study(cfg)
    ns = [r["N"] for r in rows]
    cv = [r["cv_radius"] for r in rows]
    slope = float(np.polyfit(np.log(ns), np.log(cv), 1)[0])
    elapsed = time.time() - t0
    # Known red: at the stated ten-feature scale the cross-validated radius
    # decays distinctly faster than the square-root rate the window assumes.
    # A 24-replicate analysis of this exact protocol gives slope -0.86 with
    # 10-replicate subsets at -0.87 +- 0.09 (none inside [-0.7, -0.3]); the
    # 0.7 quantile level is steeper still (-0.92).  With thirty features
    # (the full-scale protocol) shrinkage demand persists longer and the
    # decay is square-root-like, but ten features are pinned here.
    _report(9, "radius-decay", -0.7 <= slope <= -0.3,
            f"log-log slope of cv radius {slope:.3f}", 900, elapsed)


def test_criterion_10_out_of_sample_gap():
    rng = np.random.default_rng(1010)
    worst = 0.0
    for _ in range(10):
        r = 2.0 * rng.normal(size=400)
        alpha = float(rng.choice([0.6, 0.8, 0.9]))
        delta = float(abs(rng.normal())) * 0.6
        gap = oos_gap(r, delta, alpha)
        direct = mean_check_loss(r, alpha) - mean_check_loss(r - delta, alpha)
        worst = max(worst, abs(gap - direct))
    _report(10, "out-of-sample-gap", worst <= 1e-10,
            f"integral vs direct difference, worst gap {worst:.1e}")
