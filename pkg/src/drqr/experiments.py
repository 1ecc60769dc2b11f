"""Simulation harness: data generators, model comparisons over radius grids,
intercept tables and radius-decay studies, all emitting deterministic CSV.

Replicates derive their generators from (seed, replicate, N) so results do
not depend on scheduling order; DRQR_THREADS caps the optional thread pool.
"""

from __future__ import annotations

import configparser
import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .bounds import radius_schedule
from .core import Dataset, DomainError, ProblemSpec, mean_check_loss, primal_norm
from .solver import SolverConfig, fit_dro

GENERATORS = ("sparse02", "uniform15", "unitnorm")

# radius search space of the decay study: three decades plus a coarse tail
RADIUS_SEARCH_GRID = tuple(sorted(
    {round(a * 10.0 ** -b, 12) for a in range(1, 11) for b in (1, 2, 3)}
    | {round(1.0 + 0.1 * k, 12) for k in range(1, 11)}))


@dataclass(frozen=True)
class RadiusRule:
    kind: str = "proportional"   # proportional | grid | theorem
    kappa: float = 1.0
    grid: tuple = ()
    eta: float = 0.05
    m: float = 3.0

    def __post_init__(self):
        if self.kind not in ("proportional", "grid", "theorem"):
            raise DomainError(f"unknown radius rule {self.kind!r}")
        if self.kind == "grid" and not self.grid:
            raise DomainError("grid radius rule requires a nonempty grid")


@dataclass(frozen=True)
class ExperimentConfig:
    generator: str = "sparse02"
    d: int = 30
    sigma: float = 5.0
    alpha: float = 0.7
    p: float = 2.0
    norm: str = "l2"
    N_grid: tuple = (50,)
    radius_rule: RadiusRule = field(default_factory=RadiusRule)
    test_size: int = 4000
    replications: int = 20
    seed: int = 0
    folds: int = 5
    alpha_grid: tuple = ()
    p_grid: tuple = ()
    solver_max_iters: int = 6000
    solver_restarts: int = 1
    solver_tol: float = 1e-5

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise DomainError(f"unknown generator {self.generator!r}")
        if self.test_size < 1:
            raise DomainError("test_size must be >= 1")
        if self.replications < 1:
            raise DomainError("replications must be >= 1")
        if self.folds < 2:
            raise DomainError("folds must be >= 2")

    def solver_config(self) -> SolverConfig:
        return SolverConfig(max_iters=self.solver_max_iters, tol=self.solver_tol,
                            seed=self.seed, restarts=self.solver_restarts)


@dataclass(frozen=True)
class TrialResult:
    model: str                  # DRQR | RQR | SAA
    alpha: float
    p: float
    norm: str
    N: int
    epsilon: float
    replicate: int
    seed: int
    test_loss: float
    intercept: float
    beta_norm: float
    objective: float
    flags: str = ""


def _true_beta(rng: np.random.Generator, generator: str, d: int) -> np.ndarray:
    if generator == "uniform15":
        return rng.uniform(1.0, 5.0, d)
    if generator == "unitnorm":
        return np.full(d, 1.0 / math.sqrt(d))
    while True:
        active = rng.random(d) < 0.2
        signs = np.where(rng.random(d) < 0.5, -1.0, 1.0)
        if np.any(active):
            return np.where(active, signs, 0.0)


def generate(config: ExperimentConfig, replicate: int, n: int | None = None):
    """Train/test draw for one replicate; deterministic in (seed, replicate, n)."""
    n = int(n if n is not None else config.N_grid[0])
    rng = np.random.default_rng([config.seed, replicate, n])
    beta = _true_beta(rng, config.generator, config.d)
    X = rng.standard_normal((n, config.d))
    y = X @ beta + config.sigma * rng.standard_normal(n)
    Xt = rng.standard_normal((config.test_size, config.d))
    yt = Xt @ beta + config.sigma * rng.standard_normal(config.test_size)
    return Dataset(X, y), Dataset(Xt, yt), beta, config.sigma


def _radii(config: ExperimentConfig, n: int, train: Dataset) -> tuple:
    rule = config.radius_rule
    if rule.kind == "proportional":
        return (rule.kappa / math.sqrt(n),)
    if rule.kind == "grid":
        return tuple(rule.grid)
    rows = np.column_stack([train.y, train.X])
    gamma = float(np.mean([primal_norm(row, config.norm) ** rule.m for row in rows]))
    return (radius_schedule(n, rule.eta, config.alpha, rule.m, gamma, config.d).epsilon_N,)


def _test_loss(test: Dataset, beta, intercept: float, alpha: float) -> float:
    return mean_check_loss(test.residuals(beta, intercept), alpha)


def _workers() -> int:
    raw = os.environ.get("DRQR_THREADS", "").strip()
    if raw:
        return max(1, int(raw))
    return 1


def _map_replicates(fn, replicates):
    workers = _workers()
    if workers == 1:
        return [fn(r) for r in replicates]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, replicates))


def run_comparison(config: ExperimentConfig, out_dir=None):
    """Robust vs regularized vs plain fits over the radius grid.

    The robust and regularized models share one solve per radius (identical
    reformulation); they differ in which intercept scores the test set.  The
    plain fit appears only when N >= d.
    """
    cfg = config.solver_config()

    def one(args):
        n, rep = args
        train, test, _, _ = generate(config, rep, n)
        rows = []
        for eps in _radii(config, n, train):
            spec = ProblemSpec(config.alpha, config.p, config.norm, eps)
            fit = fit_dro(train, spec, cfg)
            flags = ";".join(fit.flags)
            bnorm = float(np.linalg.norm(fit.beta))
            rows.append(TrialResult("DRQR", config.alpha, config.p, config.norm,
                                    n, eps, rep, config.seed,
                                    _test_loss(test, fit.beta, fit.s_robust, config.alpha),
                                    fit.s_robust, bnorm, fit.objective, flags))
            rows.append(TrialResult("RQR", config.alpha, config.p, config.norm,
                                    n, eps, rep, config.seed,
                                    _test_loss(test, fit.beta, fit.s_bar, config.alpha),
                                    fit.s_bar, bnorm, fit.objective, flags))
        if n >= config.d:
            spec0 = ProblemSpec(config.alpha, config.p, config.norm, 0.0)
            fit0 = fit_dro(train, spec0, cfg)
            rows.append(TrialResult("SAA", config.alpha, config.p, config.norm,
                                    n, 0.0, rep, config.seed,
                                    _test_loss(test, fit0.beta, fit0.s_bar, config.alpha),
                                    fit0.s_bar, float(np.linalg.norm(fit0.beta)),
                                    fit0.objective, ";".join(fit0.flags)))
        return rows

    jobs = [(n, rep) for n in config.N_grid for rep in range(config.replications)]
    trials = [t for rows in _map_replicates(one, jobs) for t in rows]
    trials.sort(key=lambda t: (t.model, t.N, t.epsilon, t.replicate))
    summary = summarize(trials)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_trials_csv(os.path.join(out_dir, "comparison_trials.csv"), trials)
        write_summary_csv(os.path.join(out_dir, "comparison_summary.csv"), summary)
    return trials, summary


def summarize(trials):
    """Per-cell mean, standard error and 5th/95th percentiles of test loss."""
    cells = {}
    for t in trials:
        cells.setdefault((t.model, t.alpha, t.p, t.norm, t.N, t.epsilon), []).append(t.test_loss)
    out = []
    for key in sorted(cells, key=lambda k: (k[0], k[4], k[5])):
        vals = np.asarray(cells[key])
        sem = float(np.std(vals, ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
        out.append({
            "model": key[0], "alpha": key[1], "p": key[2], "norm": key[3],
            "N": key[4], "epsilon": key[5], "mean": float(np.mean(vals)),
            "sem": sem, "q05": float(np.quantile(vals, 0.05)),
            "q95": float(np.quantile(vals, 0.95)), "count": int(vals.size),
        })
    return out


def run_intercept_table(config: ExperimentConfig, out_dir=None):
    """Mean intercepts per (alpha, N, p, model) at radius N^(-1/2).

    The plain-fit column is blank below the identifiable regime (N < d); the
    theoretical column is sigma times the standard normal quantile.
    """
    alphas = config.alpha_grid or (config.alpha,)
    ps = config.p_grid or (config.p,)
    cfg = config.solver_config()

    def one(args):
        n, rep = args
        train, _, _, _ = generate(config, rep, n)
        eps = 1.0 / math.sqrt(n)
        cell = {}
        for alpha in alphas:
            if n >= config.d:
                fit0 = fit_dro(train, ProblemSpec(alpha, config.p, config.norm, 0.0), cfg)
                cell[(alpha, "SAA", None)] = fit0.s_bar
            for p in ps:
                fit = fit_dro(train, ProblemSpec(alpha, p, config.norm, eps), cfg)
                cell[(alpha, "DRQR", p)] = fit.s_robust
                cell[(alpha, "RQR", p)] = fit.s_bar
        return cell

    rows = []
    for n in config.N_grid:
        cells = _map_replicates(one, [(n, rep) for rep in range(config.replications)])
        for alpha in alphas:
            saa = (float(np.mean([c[(alpha, "SAA", None)] for c in cells]))
                   if n >= config.d else None)
            for p in ps:
                rows.append({
                    "alpha": alpha, "N": n, "p": p,
                    "theoretical": config.sigma * inverse_normal_cdf(alpha),
                    "drqr": float(np.mean([c[(alpha, "DRQR", p)] for c in cells])),
                    "rqr": float(np.mean([c[(alpha, "RQR", p)] for c in cells])),
                    "saa": saa,
                })
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "intercept_table.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(_stamp_line())
            writer = csv.writer(fh)
            writer.writerow(["alpha", "N", "p", "theoretical", "drqr", "rqr", "saa"])
            for r in rows:
                writer.writerow([_fmt(r["alpha"]), r["N"], _fmt(r["p"]),
                                 _fmt(r["theoretical"]), _fmt(r["drqr"]),
                                 _fmt(r["rqr"]), _fmt(r["saa"]) if r["saa"] is not None else ""])
    return rows


def run_radius_study(config: ExperimentConfig, out_dir=None):
    """Cross-validated, test-optimal and bound-valid radii per sample size."""
    grid = tuple(config.radius_rule.grid) if config.radius_rule.kind == "grid" \
        else RADIUS_SEARCH_GRID
    cfg = config.solver_config()

    def one(args):
        n, rep = args
        train, test, _, _ = generate(config, rep, n)
        perm = np.random.default_rng([config.seed, rep, n, 77]).permutation(train.n)
        folds = np.array_split(perm, config.folds)
        cv_losses, test_losses, valid = [], [], []
        for eps in grid:
            spec = ProblemSpec(config.alpha, config.p, config.norm, eps)
            fit = fit_dro(train, spec, cfg)
            tl = _test_loss(test, fit.beta, fit.s_robust, config.alpha)
            test_losses.append(tl)
            valid.append(tl <= fit.objective)
            fold_losses = []
            for k in range(config.folds):
                hold = folds[k]
                keep = np.concatenate([folds[j] for j in range(config.folds) if j != k])
                sub = Dataset(train.X[keep], train.y[keep])
                fsub = fit_dro(sub, spec, cfg)
                fold_losses.append(mean_check_loss(
                    train.y[hold] - train.X[hold] @ fsub.beta - fsub.s_robust,
                    config.alpha))
            cv_losses.append(float(np.mean(fold_losses)))
        return (grid[int(np.argmin(cv_losses))], grid[int(np.argmin(test_losses))],
                np.asarray(valid, dtype=bool))

    rows = []
    for n in config.N_grid:
        results = _map_replicates(one, [(n, rep) for rep in range(config.replications)])
        cv_r = float(np.mean([r[0] for r in results]))
        oracle_r = float(np.mean([r[1] for r in results]))
        freq = np.mean(np.vstack([r[2] for r in results]), axis=0)
        ok = np.nonzero(freq >= 0.95)[0]
        bound_r = float(grid[int(ok[0])]) if ok.size else math.nan
        rows.append({"N": n, "cv_radius": cv_r, "oracle_radius": oracle_r,
                     "bound_radius": bound_r})
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "radius_study.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(_stamp_line())
            writer = csv.writer(fh)
            writer.writerow(["N", "cv_radius", "oracle_radius", "bound_radius"])
            for r in rows:
                writer.writerow([r["N"], _fmt(r["cv_radius"]),
                                 _fmt(r["oracle_radius"]), _fmt(r["bound_radius"])])
    return rows


# ---------------------------------------------------------------------------
# output formatting
# ---------------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(x, ".10g")


def _stamp_line() -> str:
    return f"# generated {datetime.now(timezone.utc).isoformat()}\n"


def write_trials_csv(path, trials) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(_stamp_line())
        writer = csv.writer(fh)
        writer.writerow(["model", "alpha", "p", "norm", "N", "epsilon", "replicate",
                         "test_loss", "intercept", "beta_norm", "flags"])
        for t in trials:
            writer.writerow([t.model, _fmt(t.alpha), _fmt(t.p), t.norm, t.N,
                             _fmt(t.epsilon), t.replicate, _fmt(t.test_loss),
                             _fmt(t.intercept), _fmt(t.beta_norm), t.flags])


def write_summary_csv(path, summary) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(_stamp_line())
        writer = csv.writer(fh)
        writer.writerow(["model", "alpha", "p", "norm", "N", "epsilon",
                         "mean", "sem", "q05", "q95", "count"])
        for r in summary:
            writer.writerow([r["model"], _fmt(r["alpha"]), _fmt(r["p"]), r["norm"],
                             r["N"], _fmt(r["epsilon"]), _fmt(r["mean"]), _fmt(r["sem"]),
                             _fmt(r["q05"]), _fmt(r["q95"]), r["count"]])


# ---------------------------------------------------------------------------
# inverse normal quantile (rational approximation plus one Halley step)
# ---------------------------------------------------------------------------

_ICDF_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
           1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ICDF_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
           6.680131188771972e+01, -1.328068155288572e+01)
_ICDF_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
           -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ICDF_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
           3.754408661907416e+00)


def inverse_normal_cdf(prob: float) -> float:
    """Standard normal quantile, accurate to well below 1e-8."""
    if not (0.0 < prob < 1.0):
        raise DomainError(f"probability must lie in (0, 1), got {prob}")
    p_low, p_high = 0.02425, 1.0 - 0.02425
    a, b, c, d = _ICDF_A, _ICDF_B, _ICDF_C, _ICDF_D
    if prob < p_low:
        q = math.sqrt(-2.0 * math.log(prob))
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    elif prob <= p_high:
        q = prob - 0.5
        r = q * q
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q / \
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    else:
        q = math.sqrt(-2.0 * math.log(1.0 - prob))
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / \
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
    # one Halley refinement against the exact cdf
    err = 0.5 * math.erfc(-x / math.sqrt(2.0)) - prob
    pdf = math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    u = err / pdf
    return x - u / (1.0 + 0.5 * x * u)


# ---------------------------------------------------------------------------
# configuration file (ini sections: experiment, radius, solver, grids)
# ---------------------------------------------------------------------------

def _parse_float(text: str) -> float:
    text = text.strip().lower()
    if text in ("inf", "infinity"):
        return math.inf
    return float(text)


def _parse_tuple(text: str, cast):
    return tuple(cast(tok) for tok in text.split(",") if tok.strip())


def load_config(path) -> ExperimentConfig:
    """Read an ExperimentConfig from a sectioned key-value file."""
    parser = configparser.ConfigParser()
    found = parser.read(path)
    if not found:
        raise DomainError(f"config file {path!r} not found or unreadable")
    exp = parser["experiment"] if parser.has_section("experiment") else {}
    kwargs = {}
    if "generator" in exp:
        kwargs["generator"] = exp["generator"].strip()
    for key, cast in (("d", int), ("sigma", float), ("alpha", float),
                      ("test_size", int), ("replications", int), ("seed", int),
                      ("folds", int)):
        if key in exp:
            kwargs[key] = cast(exp[key])
    if "p" in exp:
        kwargs["p"] = _parse_float(exp["p"])
    if "norm" in exp:
        kwargs["norm"] = exp["norm"].strip().lower()
    if "n_grid" in exp:
        kwargs["N_grid"] = _parse_tuple(exp["n_grid"], int)
    if parser.has_section("radius"):
        rad = parser["radius"]
        kwargs["radius_rule"] = RadiusRule(
            kind=rad.get("rule", "proportional").strip(),
            kappa=float(rad.get("kappa", "1.0")),
            grid=_parse_tuple(rad.get("grid", ""), _parse_float),
            eta=float(rad.get("eta", "0.05")),
            m=float(rad.get("m", "3.0")))
    if parser.has_section("solver"):
        sol = parser["solver"]
        if "max_iters" in sol:
            kwargs["solver_max_iters"] = int(sol["max_iters"])
        if "restarts" in sol:
            kwargs["solver_restarts"] = int(sol["restarts"])
        if "tol" in sol:
            kwargs["solver_tol"] = float(sol["tol"])
    if parser.has_section("grids"):
        grids = parser["grids"]
        if "alpha_grid" in grids:
            kwargs["alpha_grid"] = _parse_tuple(grids["alpha_grid"], float)
        if "p_grid" in grids:
            kwargs["p_grid"] = _parse_tuple(grids["p_grid"], _parse_float)
    return ExperimentConfig(**kwargs)
