"""Command-line entry point.

Subcommands: fit, lo, alo, cv, bounds, audit, simulate {table1,table2,figure1},
selftest.  All randomness is controlled by the config seed (overridable with
--seed); --out writes results.csv, report.json and manifest.json.

Config files are flat INI text with sections [design], [model], [solver]
and [experiment]; the presets shipped with the package are examples of the
full schema.
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import replace
from importlib import resources

import numpy as np

from . import __version__
from .bounds import (
    BoundReport,
    audit_assumptions,
    check_perturb_lemma,
    compute_Cb,
    compute_Cv_logistic,
    pick_audit_indices,
)
from .datagen import SimConfig, gen_replicate
from .losses import LossSpec, loss_derivative_bound, loss_eval
from .regularizers import RegSpec
from .reporting import write_results
from .risk import alo, kfold_cv, lo_exact
from .solver import Dataset, ModelSpec, SolverError, SolverOpts, fit, fit_leave_one_out

PRESETS = (
    "table1_desk",
    "table1_full",
    "table2_desk",
    "table2_full",
    "figure1_desk",
    "figure1_full",
)


class ConfigError(Exception):
    pass


def _parse_scalar(parser, section, key, cast, default=None, required=False):
    if not parser.has_option(section, key):
        if required:
            raise ConfigError(f"[{section}] is missing required key {key!r}")
        return default
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from exc


def _parse_list(raw, cast):
    return tuple(cast(tok.strip()) for tok in raw.split(",") if tok.strip())


def load_config_text(text, source="<config>"):
    """Parse a config into (SimConfig, ModelSpec, SolverOpts)."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    for section in ("design", "model"):
        if not parser.has_section(section):
            raise ConfigError(f"missing required section [{section}]")

    ns_raw = parser.get("design", "ns", fallback=None)
    if ns_raw is None:
        raise ConfigError("[design] is missing required key 'ns'")
    try:
        ns = _parse_list(ns_raw, int)
    except ValueError as exc:
        raise ConfigError(f"[design] ns = {ns_raw!r}: {exc}") from exc

    exp = "experiment"
    k_folds = None
    if parser.has_option(exp, "k_folds"):
        k_folds = _parse_list(parser.get(exp, "k_folds"), int)
    lambdas = None
    if parser.has_option(exp, "lambdas"):
        lambdas = _parse_list(parser.get(exp, "lambdas"), float)

    lam = _parse_scalar(parser, "model", "lambda", float, required=True)
    try:
        sim = SimConfig(
            ns=ns,
            p=_parse_scalar(parser, "design", "p", int),
            p_ratio=_parse_scalar(parser, "design", "p_ratio", float),
            k=_parse_scalar(parser, "design", "k", int),
            k_ratio=_parse_scalar(parser, "design", "k_ratio", float),
            sigma=parser.get("design", "sigma", fallback="identity/n"),
            noise_var=_parse_scalar(parser, "design", "noise_var", float, 1.0),
            beta_dist=parser.get("design", "beta_dist", fallback="laplace_unit"),
            family=parser.get("design", "family", fallback="linear"),
            lam=lam,
            reps=_parse_scalar(parser, exp, "reps", int, 1),
            seed=_parse_scalar(parser, exp, "seed", int, 0),
            k_folds=k_folds,
            lambdas=lambdas,
            shape=_parse_scalar(parser, "design", "shape", float),
        )
    except ValueError as exc:
        raise ConfigError(f"[design]/[experiment]: {exc}") from exc

    try:
        loss = LossSpec(
            family=parser.get("model", "loss", fallback="squared"),
            huber_scale=_parse_scalar(parser, "model", "huber_scale", float),
            smooth_scale=_parse_scalar(parser, "model", "smooth_scale", float),
            shape=_parse_scalar(parser, "model", "shape", float),
        )
        reg = RegSpec(
            family=parser.get("model", "reg", fallback="ridge"),
            mix=_parse_scalar(parser, "model", "mix", float),
            smooth_sharpness=_parse_scalar(parser, "model", "sharpness", float),
        )
        model = ModelSpec(loss=loss, reg=reg, lam=lam)
    except ValueError as exc:
        raise ConfigError(f"[model]: {exc}") from exc

    try:
        opts = SolverOpts(
            tol=_parse_scalar(parser, "solver", "tol", float, 1e-9),
            max_iter=_parse_scalar(parser, "solver", "max_iter", int, 20000),
        )
    except ValueError as exc:
        raise ConfigError(f"[solver]: {exc}") from exc
    return sim, model, opts


def load_config(path=None, preset=None):
    if (path is None) == (preset is None):
        raise ConfigError("exactly one of --config and --preset is required")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset!r}; available: {', '.join(PRESETS)}"
            )
        text = (
            resources.files("loorisk").joinpath("presets", f"{preset}.cfg").read_text()
        )
        return load_config_text(text, source=f"preset:{preset}")
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return load_config_text(text, source=str(path))


def _apply_overrides(args, sim, opts):
    if getattr(args, "seed", None) is not None:
        sim = replace(sim, seed=args.seed)
    if getattr(args, "tol", None) is not None:
        opts = replace(opts, tol=args.tol)
    return sim, opts


def _threads(args):
    if getattr(args, "threads", None) is not None:
        return args.threads
    env = os.environ.get("LOORISK_THREADS")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"LOORISK_THREADS={env!r} is not an integer") from exc
    return 1


def _single_cell(sim, model, opts):
    """Data for the first n of the sweep, for the one-shot subcommands."""
    n = sim.ns[0]
    X, beta_star, y, cov = gen_replicate(sim, n, 0)
    return Dataset(X, y), beta_star, cov


def _manifest_info(args, out_dir):
    return {
        "command": " ".join(sys.argv[1:]) if sys.argv[1:] else args.command,
        "config_path": getattr(args, "config", None) or getattr(args, "preset", None),
        "seed": getattr(args, "seed", None),
    }


def _emit(result, args, summary_lines):
    for line in summary_lines:
        print(line)
    if getattr(args, "out", None):
        paths = write_results(result, args.out, _manifest_info(args, args.out))
        print(f"wrote {', '.join(str(p) for p in paths)}")


def _cmd_fit(args):
    sim, model, opts = load_config(args.config, args.preset)
    sim, opts = _apply_overrides(args, sim, opts)
    data, _, _ = _single_cell(sim, model, opts)
    result = fit(data, model, opts)
    if not result.converged:
        raise SolverError("fit did not converge")
    _emit(
        result,
        args,
        [
            f"converged in {result.iterations} iterations, "
            f"objective {result.objective:.10g}, "
            f"residual {result.grad_inf_norm:.3e}"
        ],
    )
    return 0


def _cmd_risk(args):
    sim, model, opts = load_config(args.config, args.preset)
    sim, opts = _apply_overrides(args, sim, opts)
    data, _, _ = _single_cell(sim, model, opts)
    if args.command == "lo":
        report = lo_exact(data, model, opts)
    elif args.command == "alo":
        full = fit(data, model, opts)
        if not full.converged:
            raise SolverError("full fit did not converge")
        report = alo(data, model, full)
    else:
        report = kfold_cv(data, model, args.k, sim.seed, opts)
    _emit(report, args, [f"{report.method} estimate: {report.estimate:.10g}"])
    return 0


def _cmd_bounds(args):
    c0 = c1 = 2.0  # logistic derivative-bound constants
    nu = args.lam
    C_b = compute_Cb(c0, c1, args.rho, args.delta, nu)
    C_v = compute_Cv_logistic(args.rho, args.delta, args.lam)
    report = BoundReport(
        rho=args.rho,
        delta=args.delta,
        c0=c0,
        c1=c1,
        nu=nu,
        C_b=C_b,
        C_v=C_v,
        bound_over_n=C_v / args.n if args.n else float("nan"),
    )
    lines = [f"C_b = {C_b:.10g}", f"C_v = {C_v:.10g}"]
    if args.n:
        lines.append(f"C_v / n = {C_v / args.n:.10g} at n = {args.n}")
    _emit(report, args, lines)
    return 0


def _cmd_audit(args):
    sim, model, opts = load_config(args.config, args.preset)
    sim, opts = _apply_overrides(args, sim, opts)
    data, _, cov = _single_cell(sim, model, opts)
    full = fit(data, model, opts)
    if not full.converged:
        raise SolverError("full fit did not converge")
    indices = pick_audit_indices(data.n, args.sample_i)
    loo = {}
    for i in indices:
        res = fit_leave_one_out(data, model, i, warm=full.beta_hat, opts=opts)
        if not res.converged:
            raise SolverError(f"leave-one-out fit for row {i} did not converge")
        loo[i] = res
    audit = audit_assumptions(data, model, full, loo, t_grid_size=args.t_grid)
    perturb = check_perturb_lemma(data, model, full, loo, audit.nu_emp)
    n, p = data.n, data.p
    rho = cov.rho(p)
    bound_c0 = loss_derivative_bound(model.loss)
    c0 = bound_c0 if bound_c0 is not None else audit.c0_emp
    C_b = compute_Cb(c0, c0, rho, n / p, audit.nu_emp)
    report = BoundReport(
        rho=rho,
        delta=n / p,
        c0=c0,
        c1=c0,
        nu=audit.nu_emp,
        C_b=C_b,
        C_v=float("nan"),
        bound_over_n=float("nan"),
        audit=audit,
    )
    holds = sum(1 for row in perturb if row["holds"])
    _emit(
        report,
        args,
        [
            f"c0_emp = {audit.c0_emp:.6g}, nu_emp = {audit.nu_emp:.6g} "
            f"(t-grid {audit.t_grid_size}, {len(loo)} rows)",
            f"perturbation bound holds on {holds}/{len(perturb)} audited rows",
        ],
    )
    return 0 if holds == len(perturb) else 1


def _cmd_simulate(args):
    from .experiments import run_figure1, run_table1, run_table2

    sim, model, opts = load_config(args.config, args.preset)
    sim, opts = _apply_overrides(args, sim, opts)
    runner = {"table1": run_table1, "table2": run_table2, "figure1": run_figure1}[
        args.study
    ]
    result = runner(sim, model, opts, threads=_threads(args))
    lines = []
    for row in result.rows:
        extra = (
            f", bound/n {row['bound_over_n']:.6g}"
            if row.get("bound_over_n") is not None
            else ""
        )
        se = f" ({row['mse_se']:.3g})" if row["mse_se"] is not None else ""
        lines.append(
            f"n={row['n']} p={row['p']} lambda={row['lam']:g} "
            f"{row['estimator']}: {row['mse']:.6g}{se}{extra}"
        )
    if result.slope_fit:
        sf = result.slope_fit
        lines.append(
            f"log-log slope {sf['slope']:.3f} (SE {sf['slope_se']:.3f}), "
            f"adj R^2 {sf['adj_r2']:.3f}"
        )
    _emit(result, args, lines)
    return 0


def _selftest_derivatives():
    rng = np.random.default_rng(20260809)
    specs = [
        LossSpec("squared"),
        LossSpec("logistic"),
        LossSpec("pseudo_huber", huber_scale=1.7),
        LossSpec("smoothed_abs", smooth_scale=4.0),
        LossSpec("poisson_softrect"),
        LossSpec("negative_binomial", shape=0.7),
    ]
    worst = 0.0
    for spec in specs:
        z = rng.uniform(-4, 4, 200)
        if spec.family == "logistic":
            y = rng.integers(0, 2, 200).astype(float)
        elif spec.family in ("poisson_softrect", "negative_binomial"):
            y = rng.poisson(1.5, 200).astype(float)
        else:
            y = rng.uniform(-4, 4, 200)
        h = 1e-6
        _, d1, _ = loss_eval(spec, y, z)
        vp, _, _ = loss_eval(spec, y, z + h)
        vm, _, _ = loss_eval(spec, y, z - h)
        fd = (vp - vm) / (2 * h)
        err = float(np.max(np.abs(fd - d1) / np.maximum(1.0, np.abs(d1))))
        worst = max(worst, err)
        if err > 1e-5:
            return False, f"derivative mismatch for {spec.family}: {err:.2e}"
    return True, f"derivative checks passed (worst rel err {worst:.2e})"


def _selftest_alo_identity():
    worst = 0.0
    model = ModelSpec(LossSpec("squared"), RegSpec("ridge"), lam=0.7)
    for seed, (n, p) in [(s, sh) for s in range(5) for sh in ((30, 10), (10, 30))]:
        rng = np.random.default_rng(seed)
        data = Dataset(rng.standard_normal((n, p)), rng.standard_normal(n))
        full = fit(data, model)
        lo = lo_exact(data, model, full_fit=full)
        approx = alo(data, model, full)
        worst = max(worst, float(np.max(np.abs(lo.per_sample - approx.per_sample))))
    if worst > 1e-8:
        return False, f"ridge ALO/LO identity violated: max diff {worst:.2e}"
    return True, f"ridge ALO = LO identity holds (max diff {worst:.2e})"


def _cmd_selftest(args):
    ok = True
    for passed, message in (_selftest_derivatives(), _selftest_alo_identity()):
        print(("PASS " if passed else "FAIL ") + message)
        ok = ok and passed
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="loorisk",
        description="Leave-one-out risk estimation for penalized GLMs",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("--config", help="path to a config file")
            p.add_argument("--preset", help=f"one of: {', '.join(PRESETS)}")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, help="worker processes")
        p.add_argument("--tol", type=float, help="override solver tolerance")

    for name in ("fit", "lo", "alo"):
        add_common(sub.add_parser(name))
    cv = sub.add_parser("cv")
    add_common(cv)
    cv.add_argument("--k", type=int, default=5, help="number of folds")

    bounds_p = sub.add_parser("bounds")
    bounds_p.add_argument("--rho", type=float, required=True)
    bounds_p.add_argument("--delta", type=float, required=True)
    bounds_p.add_argument("--lambda", dest="lam", type=float, required=True)
    bounds_p.add_argument("--n", type=int, help="report C_v / n at this n")
    bounds_p.add_argument("--out", help="output directory")
    bounds_p.add_argument("--seed", type=int, help=argparse.SUPPRESS)

    audit_p = sub.add_parser("audit")
    add_common(audit_p)
    audit_p.add_argument("--t-grid", type=int, default=11)
    audit_p.add_argument("--sample-i", type=int, default=25)

    sim_p = sub.add_parser("simulate")
    sim_p.add_argument("study", choices=("table1", "table2", "figure1"))
    add_common(sim_p)

    add_common(sub.add_parser("selftest"), config=False)
    return parser


_HANDLERS = {
    "fit": _cmd_fit,
    "lo": _cmd_risk,
    "alo": _cmd_risk,
    "cv": _cmd_risk,
    "bounds": _cmd_bounds,
    "audit": _cmd_audit,
    "simulate": _cmd_simulate,
    "selftest": _cmd_selftest,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
