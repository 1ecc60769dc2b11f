"""Command-line front end.

Exit codes: 0 success, 1 usage or domain error, 2 data error, 3 solver
non-convergence (partial output is still printed).  All floating output uses
ten significant digits so regression diffs stay stable.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from .bounds import radius_schedule
from .core import DataError, DomainError, ProblemSpec, load_dataset
from .experiments import load_config, run_comparison, run_intercept_table, run_radius_study
from .fixed_design import fixed_design_dro, fixed_design_radii, gamma0_moment
from .robust import identity_audit, worst_case_value
from .core import WeightedPointCloud
from .solver import SolverConfig, fit_dro, fit_regularized
from .worstcase import worst_case


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return format(float(x), ".10g")


def _parse_p(text: str) -> float:
    text = text.strip().lower()
    if text in ("inf", "infinity"):
        return math.inf
    return float(text)


def _emit(pairs, out=None):
    for key, val in pairs:
        print(f"{key} = {val}")
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["key", "value"])
            writer.writerows(pairs)


def _add_problem_flags(sub, with_epsilon=True):
    sub.add_argument("--alpha", type=float, required=True)
    sub.add_argument("--p", type=_parse_p, required=True)
    sub.add_argument("--norm", choices=("l1", "l2", "linf"), default="l2")
    if with_epsilon:
        sub.add_argument("--epsilon", type=float, default=0.0)


def _add_solver_flags(sub):
    sub.add_argument("--max-iters", type=int, default=50000)
    sub.add_argument("--tol", type=float, default=1e-6)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--restarts", type=int, default=3)


def _add_data_flags(sub):
    sub.add_argument("--data", required=True)
    sub.add_argument("--y-col", required=True,
                     help="response column, by header name or 0-based index")


def _solver_cfg(args) -> SolverConfig:
    return SolverConfig(max_iters=args.max_iters, tol=args.tol,
                        seed=args.seed, restarts=args.restarts)


def build_parser() -> _Parser:
    parser = _Parser(prog="drqr",
                     description="Distributionally robust quantile regression")
    subs = parser.add_subparsers(dest="command", required=True)

    fit = subs.add_parser("fit", help="solve the robust or regularized program")
    _add_data_flags(fit)
    _add_problem_flags(fit)
    fit.add_argument("--lambda", dest="lam", type=float, default=None,
                     help="explicit penalty weight (skips the radius coupling)")
    _add_solver_flags(fit)
    fit.add_argument("--out", default=None)

    ev = subs.add_parser("eval-sup", help="worst-case expected loss at a fixed fit")
    _add_data_flags(ev)
    _add_problem_flags(ev)
    ev.add_argument("--beta", default=None, help="comma-separated slope vector")
    ev.add_argument("--s", type=float, default=None, help="intercept")
    ev.add_argument("--beta-file", default=None,
                    help="key,value CSV as written by fit --out")
    ev.add_argument("--out", default=None)

    wc = subs.add_parser("worst-case", help="explicit worst-case point cloud at the fit")
    _add_data_flags(wc)
    _add_problem_flags(wc)
    _add_solver_flags(wc)
    wc.add_argument("--out", default=None, help="cloud CSV (weight,x_1..x_d,y)")

    rad = subs.add_parser("radius", help="finite-sample radius schedule")
    rad.add_argument("--n", type=int, required=True)
    rad.add_argument("--eta", type=float, required=True)
    rad.add_argument("--alpha", type=float, required=True)
    rad.add_argument("--m", type=float, required=True)
    rad.add_argument("--gamma", type=float, required=True)
    rad.add_argument("--d", type=int, required=True)
    rad.add_argument("--out", default=None)

    fd = subs.add_parser("fixed-design", help="regress-then-robustify pipeline")
    _add_data_flags(fd)
    _add_problem_flags(fd)
    fd.add_argument("--target-c", default=None,
                    help="comma-separated feature vector of interest (default e_1)")
    fd.add_argument("--eta", type=float, default=None,
                    help="also print the three-part radius at this confidence")
    fd.add_argument("--m", type=float, default=3.0)
    fd.add_argument("--out", default=None)

    ex = subs.add_parser("experiment", help="simulation protocols from a config file")
    ex.add_argument("--config", required=True)
    ex.add_argument("--mode", choices=("comparison", "intercept-table", "radius-study"),
                    required=True)
    ex.add_argument("--out-dir", required=True)
    ex.add_argument("--seed", type=int, default=None, help="override the config seed")

    aud = subs.add_parser("identity-audit",
                          help="numeric audit of additive robustness for a loss")
    aud.add_argument("--loss", choices=("check", "squared", "huber"), required=True)
    aud.add_argument("--alpha", type=float, default=None)
    aud.add_argument("--delta", type=float, default=1.0)
    aud.add_argument("--epsilon", type=float, required=True)
    aud.add_argument("--p", type=_parse_p, required=True)
    aud.add_argument("--points", required=True,
                     help="atoms as value:weight pairs, e.g. 0:0.5,1:0.5")
    aud.add_argument("--out", default=None)
    return parser


def _cmd_fit(args) -> int:
    data = load_dataset(args.data, args.y_col)
    spec = ProblemSpec(args.alpha, args.p, args.norm, args.epsilon)
    cfg = _solver_cfg(args)
    if args.lam is None:
        fit = fit_dro(data, spec, cfg)
    else:
        fit = fit_regularized(data, spec, args.lam, cfg)
    pairs = [(f"beta_{j}", _fmt(b)) for j, b in enumerate(fit.beta)]
    pairs += [("s_bar", _fmt(fit.s_bar)), ("s_robust", _fmt(fit.s_robust)),
              ("objective", _fmt(fit.objective)),
              ("optimality_residual", _fmt(fit.optimality_residual)),
              ("iterations", str(fit.iterations)),
              ("alpha", _fmt(spec.alpha)), ("p", _fmt(spec.p)),
              ("norm", spec.norm), ("epsilon", _fmt(spec.epsilon)),
              ("lambda", _fmt(fit.lam))]
    _emit(pairs, args.out)
    return 3 if not fit.converged else 0


def _read_fit_file(path):
    betas = {}
    vals = {}
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0] == "key":
                continue
            key, value = row[0], row[1]
            if key.startswith("beta_"):
                betas[int(key[5:])] = float(value)
            else:
                vals[key] = value
    beta = np.array([betas[j] for j in sorted(betas)]) if betas else np.zeros(0)
    return beta, vals


def _cmd_eval_sup(args) -> int:
    data = load_dataset(args.data, args.y_col)
    spec = ProblemSpec(args.alpha, args.p, args.norm, args.epsilon)
    if args.beta_file is not None:
        beta, vals = _read_fit_file(args.beta_file)
        s = float(vals["s_robust"]) if args.s is None else args.s
    else:
        if args.s is None:
            raise UsageError("eval-sup requires --s (or --beta-file)")
        beta = (np.array([float(tok) for tok in args.beta.split(",") if tok.strip()])
                if args.beta else np.zeros(data.d))
        s = args.s
    result = worst_case_value(data, beta, s, spec)
    pairs = [("value", _fmt(result.value)),
             ("lambda_opt", _fmt(result.lambda_opt) if result.lambda_opt is not None else ""),
             ("attained", str(result.attained).lower())]
    _emit(pairs, args.out)
    return 0


def _cmd_worst_case(args) -> int:
    data = load_dataset(args.data, args.y_col)
    spec = ProblemSpec(args.alpha, args.p, args.norm, args.epsilon)
    fit = fit_dro(data, spec, _solver_cfg(args))
    report = worst_case(data, spec, fit)
    pairs = [("transport_cost", _fmt(report.transport_cost)),
             ("achieved_value", _fmt(report.achieved_value) if report.achieved_value is not None else ""),
             ("closed_form_value", _fmt(report.closed_form_value)),
             ("attained", str(report.attained).lower()),
             ("flags", ";".join(report.flags))]
    for key, val in pairs:
        print(f"{key} = {val}")
    if args.out and report.cloud is not None:
        report.cloud.to_csv(args.out)
    return 3 if not fit.converged else 0


def _cmd_radius(args) -> int:
    report = radius_schedule(args.n, args.eta, args.alpha, args.m, args.gamma, args.d)
    _emit([("epsilon_N", _fmt(report.epsilon_N)),
           ("c_alpha", _fmt(report.c_alpha_const))], args.out)
    return 0


def _cmd_fixed_design(args) -> int:
    data = load_dataset(args.data, args.y_col)
    spec = ProblemSpec(args.alpha, args.p, args.norm, args.epsilon)
    if args.target_c is not None:
        target = np.array([float(tok) for tok in args.target_c.split(",") if tok.strip()])
    else:
        target = np.zeros(data.d)
        if data.d:
            target[0] = 1.0
    fit = fixed_design_dro(data, spec, target)
    pairs = [(f"beta_ols_{j}", _fmt(b)) for j, b in enumerate(fit.beta_ols)]
    pairs += [("s_bar", _fmt(fit.s_bar)), ("s_robust", _fmt(fit.s_robust)),
              ("objective", _fmt(fit.objective)),
              ("hat_trace", _fmt(float(np.sum(fit.hat_diagonals))))]
    if args.eta is not None:
        gamma0 = gamma0_moment(fit.residuals_z, args.m)
        radii = fixed_design_radii(data, args.eta, args.alpha, args.m, gamma0, target)
        pairs += [("eps1", _fmt(radii.eps1)), ("eps2", _fmt(radii.eps2)),
                  ("eps3", _fmt(radii.eps3)), ("eps_total", _fmt(radii.total)),
                  ("gamma0", _fmt(gamma0))]
    _emit(pairs, args.out)
    return 0


def _cmd_experiment(args) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        from dataclasses import replace
        config = replace(config, seed=args.seed)
    import os
    os.makedirs(args.out_dir, exist_ok=True)
    if args.mode == "comparison":
        trials, _ = run_comparison(config, args.out_dir)
        print(f"wrote {len(trials)} trials to {args.out_dir}")
    elif args.mode == "intercept-table":
        rows = run_intercept_table(config, args.out_dir)
        print(f"wrote {len(rows)} table rows to {args.out_dir}")
    else:
        rows = run_radius_study(config, args.out_dir)
        print(f"wrote {len(rows)} study rows to {args.out_dir}")
    return 0


def _cmd_identity_audit(args) -> int:
    atoms, weights = [], []
    for tok in args.points.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if ":" in tok:
            val, w = tok.split(":")
            atoms.append(float(val))
            weights.append(float(w))
        else:
            atoms.append(float(tok))
            weights.append(math.nan)
    if all(math.isnan(w) for w in weights):
        weights = [1.0 / len(atoms)] * len(atoms)
    cloud = WeightedPointCloud.from_values(atoms, weights)
    report = identity_audit(args.loss, cloud, args.epsilon, args.p,
                            alpha=args.alpha, delta=args.delta)
    pairs = [("value_sup", _fmt(report.value_sup)),
             ("value_base", _fmt(report.value_base)),
             ("implied_c", _fmt(report.implied_c) if report.implied_c is not None else ""),
             ("expected_c", _fmt(report.expected_c) if report.expected_c is not None else ""),
             ("gap", _fmt(report.gap) if report.gap is not None else ""),
             ("holds", str(report.holds).lower() if report.holds is not None else "")]
    _emit(pairs, args.out)
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "eval-sup": _cmd_eval_sup,
    "worst-case": _cmd_worst_case,
    "radius": _cmd_radius,
    "fixed-design": _cmd_fixed_design,
    "experiment": _cmd_experiment,
    "identity-audit": _cmd_identity_audit,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
