"""Batch command-line front door.

Subcommands:

    train      fit one model and print its diagnostics as JSON
    curve      run a learning-curve experiment from a TOML config;
               writes ratefit.json, trials.csv and manifest.json
    approx     width sweep of the smoothing-approximant sup error;
               writes approx_sweep.csv
    tsybakov   noise-condition ratio check for a built-in family
    compare    comparison-inequality report for a freshly trained model
    exponent   print a theoretical rate exponent

Exit codes: 0 success, 1 invalid configuration or usage, 2 numerical
failure (solver non-convergence, quadrature breakdown).  Results are
written atomically (temp file + rename) and every output carries the
digest of the canonicalized configuration that produced it.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .approx import (
    BudgetExceededError,
    ConvKernelSpec,
    binomial_order,
    kernel_mass,
    smooth_approximant,
    sup_error,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    ExperimentError,
    check_comparison,
    fit_exponent,
    learning_curve_detail,
    theoretical_exponent,
    trial_seed,
)
from .losses import make_loss
from .quadrature import QuadratureError
from .solver import SolverConfig, SolverError, schedule, train
from .synth import builtin, sample, tsybakov_ratio

_TSYBAKOV_PASS_SLACK = 1e-6


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _float_or_inf(text: str) -> float:
    if text.lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def config_digest(payload: dict) -> str:
    """Digest of the canonical JSON encoding of a configuration."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _config_payload(config: ExperimentConfig) -> dict:
    return {
        "family": config.family,
        "family_params": dict(config.family_params),
        "loss": config.loss,
        "regime": config.regime,
        "m_grid": [int(m) for m in config.m_grid],
        "seed": config.seed,
        "trials_per_m": config.trials_per_m,
        "schedule_r": config.schedule_r,
        "schedule_q": config.schedule_q,
        "solver_tol": config.solver_tol,
        "solver_max_iters": config.solver_max_iters,
        "quad_target": config.quad_target,
        "mc_budget": config.mc_budget,
    }


def load_config(path: str) -> ExperimentConfig:
    """Parse and validate a TOML experiment config, applying defaults."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML parse error: {exc}")

    problems = []
    dist = dict(raw.pop("distribution", {}))
    family = dist.pop("family", None)
    if family is None:
        problems.append("distribution.family is required")
    sched = dict(raw.pop("schedule", {}))
    solver = dict(raw.pop("solver", {}))
    quad = dict(raw.pop("quadrature", {}))

    kwargs = {}
    for key in ("loss", "regime", "seed", "trials_per_m"):
        if key in raw:
            kwargs[key] = raw.pop(key)
    if "m_grid" in raw:
        kwargs["m_grid"] = tuple(raw.pop("m_grid"))
    for table, mapping in (
        (sched, {"r": "schedule_r", "q": "schedule_q"}),
        (solver, {"tol": "solver_tol", "max_iters": "solver_max_iters"}),
        (quad, {"target": "quad_target", "mc_budget": "mc_budget"}),
    ):
        for key, dest in mapping.items():
            if key in table:
                kwargs[dest] = table.pop(key)
    for name, leftover in (("", raw), ("schedule", sched), ("solver", solver),
                           ("quadrature", quad)):
        for key in leftover:
            where = f"{name}.{key}" if name else key
            problems.append(f"unknown config key {where!r}")
    for required in ("loss", "regime", "m_grid"):
        if required not in kwargs:
            problems.append(f"{required} is required")
    if problems:
        raise ConfigError(f"{path}: " + "; ".join(problems))

    config = ExperimentConfig(family=family, family_params=dist, **kwargs)
    more = config.problems()
    if more:
        raise ConfigError(f"{path}: " + "; ".join(more))
    return config


# ---------------------------------------------------------------------------
# Output writers
# ---------------------------------------------------------------------------


def _write_trials_csv(path: str, digest: str, records):
    lines = [f"# config_digest={digest}",
             "m,trial,excess_misclass,excess_phi,objective,norm_sq,solver_iters,failed"]
    for rec in records:
        lines.append(
            f"{rec.m},{rec.trial},{rec.excess_misclass!r},{rec.excess_phi!r},"
            f"{rec.objective!r},{rec.norm_sq!r},{rec.solver_iters},{int(rec.failed)}"
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_ratefit_json(path: str, digest: str, fit):
    payload = {
        "config_digest": digest,
        "theorem": fit.theorem_tag,
        "exponent": fit.exponent,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "theoretical_exponent": fit.theoretical_exponent,
        "points": [
            {"m": m, "mean_excess": mean, "std_excess": std}
            for m, mean, std in fit.points
        ],
    }
    _atomic_write(path, json.dumps(payload, indent=2) + "\n")


def _write_manifest(path: str, digest: str, started: str, outputs):
    payload = {
        "config_digest": digest,
        "tool_version": __version__,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "outputs": sorted(outputs),
    }
    _atomic_write(path, json.dumps(payload, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _family_params(args) -> dict:
    params = {}
    for key in ("a", "p", "gap"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if getattr(args, "family_r", None) is not None:
        params["r"] = args.family_r
    if getattr(args, "family_dim", None) is not None:
        params["dim"] = args.family_dim
    return params


def _add_family_flags(sub):
    sub.add_argument("--family", required=True, help="built-in distribution family")
    sub.add_argument("--a", type=float, default=None, help="holder/product amplitude")
    sub.add_argument("--family-r", type=float, default=None,
                     help="holder/product smoothness parameter")
    sub.add_argument("--p", type=float, default=None, help="margin noise level")
    sub.add_argument("--gap", type=float, default=None, help="margin size")
    sub.add_argument("--family-dim", type=int, default=None, help="product dimension")


def _trained_model(args):
    dist = builtin(args.family, **_family_params(args))
    loss = make_loss(args.loss)
    if args.sigma is not None and args.lam is not None:
        lam, sigma = args.lam, args.sigma
    else:
        r = args.r if args.r is not None else dist.smoothness.r
        q = args.q if args.q is not None else dist.noise.q
        lam, sigma = schedule(args.m, r, dist.dim, q, loss, args.regime)
    data = sample(dist, args.m, trial_seed(args.seed, args.m, 0))
    config = SolverConfig(lam=lam, tol=args.tol, max_iters=args.max_iters)
    return dist, loss, train(data, loss, sigma, config), lam, sigma


def _add_train_flags(sub):
    _add_family_flags(sub)
    sub.add_argument("--loss", required=True)
    sub.add_argument("--m", type=int, required=True)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--regime", default="T1")
    sub.add_argument("--r", type=_float_or_inf, default=None,
                     help="schedule smoothness override")
    sub.add_argument("--q", type=_float_or_inf, default=None,
                     help="schedule noise-exponent override")
    sub.add_argument("--sigma", type=float, default=None, help="explicit kernel width")
    sub.add_argument("--lam", type=float, default=None, help="explicit regularization")
    sub.add_argument("--tol", type=float, default=None)
    sub.add_argument("--max-iters", type=int, default=4000)


def _cmd_train(args) -> int:
    dist, loss, model, lam, sigma = _trained_model(args)
    diag = model.diagnostics
    print(json.dumps({
        "family": dist.family_tag,
        "loss": loss.kind,
        "m": args.m,
        "lambda": lam,
        "sigma": sigma,
        "objective": diag.final_objective,
        "stationarity_residual": diag.stationarity_residual,
        "iterations": diag.iterations,
        "converged": diag.converged,
        "norm_sq": model.norm_sq,
        "lam_norm_sq": model.lam * model.norm_sq,
    }, indent=2))
    return 0 if diag.converged else 2


def _cmd_curve(args) -> int:
    config = load_config(args.config)
    digest = config_digest(_config_payload(config))
    started = datetime.now(timezone.utc).isoformat()
    fit, records = learning_curve_detail(config)
    out = args.out
    os.makedirs(out, exist_ok=True)
    trials_path = os.path.join(out, "trials.csv")
    ratefit_path = os.path.join(out, "ratefit.json")
    _write_trials_csv(trials_path, digest, records)
    _write_ratefit_json(ratefit_path, digest, fit)
    _write_manifest(os.path.join(out, "manifest.json"), digest, started,
                    [trials_path, ratefit_path])
    print(f"fitted exponent {fit.exponent!r} (theoretical {fit.theoretical_exponent!r}, "
          f"r^2 {fit.r_squared!r}) -> {out}")
    return 0


def _cmd_approx(args) -> int:
    sigmas = [float(s) for s in args.sigmas.split(",") if s]
    if not sigmas:
        raise ConfigError("at least one sigma is required")
    r = args.r
    if not 0.0 < r <= 1.0:
        raise ConfigError(f"target smoothness r must be in (0, 1], got {r}")
    order = args.order if args.order is not None else binomial_order(r)
    target = lambda x: np.abs(x[:, 0] - 0.5) ** r
    grid = np.linspace(0.0, 1.0, args.grid)[:, None]
    digest = config_digest({"command": "approx", "r": r, "order": order,
                            "sigmas": sigmas, "grid": args.grid})
    rows = []
    masses = []
    for sig in sigmas:
        spec = ConvKernelSpec(order=order, sigma=sig, dim=1)
        f0 = smooth_approximant(target, spec)
        rows.append((sig, sup_error(target, f0, grid)))
        masses.append(kernel_mass(spec))
    lines = [f"# config_digest={digest}", "sigma,sup_error"]
    lines += [f"{s!r},{e!r}" for s, e in rows]
    path = os.path.join(args.out, "approx_sweep.csv")
    _atomic_write(path, "\n".join(lines) + "\n")
    worst_mass = max(abs(m - 1.0) for m in masses)
    if len(rows) >= 3:
        slope, _, _ = fit_exponent([(1.0 / s, e) for s, e in rows])
        # sup error ~ sigma^r means slope of log(err) on log(1/sigma) is -r
        print(f"fitted decay exponent {-slope!r} (target r={r!r}), "
              f"worst |kernel_mass - 1| {worst_mass!r} -> {path}")
    else:
        print(f"wrote {path} (worst |kernel_mass - 1| {worst_mass!r})")
    return 0


def _cmd_tsybakov(args) -> int:
    dist = builtin(args.family, **_family_params(args))
    q = args.q if args.q is not None else dist.noise.q
    c_hat = args.c_hat if args.c_hat is not None else dist.noise.c_hat
    t_grid = np.linspace(args.t_min, args.t_max, args.t_num)
    ratio = tsybakov_ratio(dist, q, c_hat, t_grid, mc_budget=args.mc_budget)
    verdict = "PASS" if ratio <= 1.0 + _TSYBAKOV_PASS_SLACK else "FAIL"
    print(f"family={dist.family_tag} q={q!r} c_hat={c_hat!r} max_ratio={ratio!r} {verdict}")
    return 0


def _cmd_compare(args) -> int:
    dist, loss, model, lam, sigma = _trained_model(args)
    if not model.diagnostics.converged:
        print("solver did not converge", file=sys.stderr)
        return 2
    report = check_comparison(dist, loss, model, q=dist.noise.q,
                              c_hat=dist.noise.c_hat)
    payload = report.as_dict()
    payload.update({"m": args.m, "lambda": lam, "sigma": sigma,
                    "family": dist.family_tag})
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_exponent(args) -> int:
    value = theoretical_exponent(args.r, args.d, args.q, args.loss, args.theorem)
    print(repr(value))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="svmrates", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub = subs.add_parser("train", help="fit one model, print diagnostics")
    _add_train_flags(sub)
    sub.set_defaults(func=_cmd_train)

    sub = subs.add_parser("curve", help="learning-curve experiment from a config file")
    sub.add_argument("--config", required=True, help="TOML experiment config")
    sub.add_argument("--out", required=True, help="output directory")
    sub.set_defaults(func=_cmd_curve)

    sub = subs.add_parser("approx", help="width sweep of the smoothing error")
    sub.add_argument("--r", type=float, default=1.0, help="target Hoelder order")
    sub.add_argument("--order", type=int, default=None, help="binomial order override")
    sub.add_argument("--sigmas", default="0.4,0.2,0.1,0.05")
    sub.add_argument("--grid", type=int, default=401, help="evaluation grid size")
    sub.add_argument("--out", required=True, help="output directory")
    sub.set_defaults(func=_cmd_approx)

    sub = subs.add_parser("tsybakov", help="noise-condition ratio check")
    _add_family_flags(sub)
    sub.add_argument("--q", type=_float_or_inf, default=None)
    sub.add_argument("--c-hat", type=float, default=None)
    sub.add_argument("--t-min", type=float, default=0.05)
    sub.add_argument("--t-max", type=float, default=1.0)
    sub.add_argument("--t-num", type=int, default=20)
    sub.add_argument("--mc-budget", type=int, default=10**6)
    sub.set_defaults(func=_cmd_tsybakov)

    sub = subs.add_parser("compare", help="comparison-inequality report")
    _add_train_flags(sub)
    sub.set_defaults(func=_cmd_compare)

    sub = subs.add_parser("exponent", help="theoretical rate exponent")
    sub.add_argument("--r", type=_float_or_inf, required=True)
    sub.add_argument("--d", type=int, default=1)
    sub.add_argument("--q", type=_float_or_inf, default=None)
    sub.add_argument("--loss", default=None)
    sub.add_argument("--theorem", required=True, choices=["T1", "T2", "T3", "C5"])
    sub.set_defaults(func=_cmd_exponent)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ExperimentError, SolverError, QuadratureError, BudgetExceededError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
