"""Command-line entry point.

Exit codes: 0 success, 1 validation error (bad flags, bad input files,
refused work budget), 2 numerical failure.  Results go to stdout or
``--out``; diagnostics go to stderr.  JSON outputs carry ``schema_version``.

Every subcommand accepts ``--config file.json`` whose keys are flag names
(dashes or underscores); explicit flags override the file, which overrides
the built-in defaults.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import List, Optional

import numpy as np

from . import bounds as B
from .discrepancy import (DEFAULT_WORK_BUDGET, WorkBudgetExceeded, halton_bound_asymptotic,
                          halton_bound_explicit, star_discrepancy_1d, star_discrepancy_exact)
from .experiments import ExperimentConfig, reproduce_tables, rows_to_csv, trend_checks
from .integrate import make_region, estimate_normalizer, run_mc_replicates, truncation_radius
from .marginal import lmm_gls_estimate, lmm_marginal_oracle, mmle, simulate_lmm
from .model import CurvatureMeta, gaussian_conjugate
from .sequences import derive_seed, halton, uniform_grid

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 1, 2


class UsageError(Exception):
    """Bad invocation; maps to exit code 1."""

    usage_shown = False


class NumericalFailure(Exception):
    """A computation finished without a usable result; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        exc = UsageError(f"{self.prog}: error: {message}")
        exc.usage_shown = True
        raise exc


def _emit_json(obj, out: Optional[str]):
    text = json.dumps({"schema_version": SCHEMA_VERSION, **obj}, sort_keys=True) + "\n"
    _emit_text(text, out)


def _emit_text(text: str, out: Optional[str]):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _meta_from(args) -> CurvatureMeta:
    return CurvatureMeta(args.eta1, args.eta2, args.D, args.epsilon)


# -- gen-seq -----------------------------------------------------------------

def cmd_gen_seq(args):
    _require(args, "kind", "m", "p")
    if args.kind == "halton":
        if args.seed is not None:
            raise UsageError("--seed applies to --kind uniform only")
        ps = halton(args.m, args.p, args.start_index)
    else:
        if args.seed is None:
            raise UsageError("--kind uniform requires --seed")
        ps = uniform_grid(args.m, args.p, args.seed)
    lines = [",".join(f"x{j + 1}" for j in range(ps.p))]
    lines += [",".join(f"{v:.17g}" for v in row) for row in ps.points]
    _emit_text("\n".join(lines) + "\n", args.out)


# -- discrepancy -------------------------------------------------------------

def _read_points(path) -> np.ndarray:
    try:
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            x = np.loadtxt(fh, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read points from {path}: {exc}") from exc
    if x.size == 0:
        raise UsageError("point file has no rows")
    if x.shape[1] != len(header):
        raise UsageError("column count does not match the header")
    if not (np.all(x >= 0) and np.all(x < 1)):
        raise UsageError("coordinates must lie in [0, 1)")
    return x


def cmd_discrepancy(args):
    _require(args, "input")
    x = _read_points(args.input)
    m, p = x.shape
    if args.bound == "explicit":
        rep = halton_bound_explicit(m, p).to_dict()
    elif args.bound == "asymptotic":
        rep = {"value": halton_bound_asymptotic(m, p), "method": "asymptotic_envelope",
               "m": m, "p": p, "witness": None}
    else:
        res = star_discrepancy_1d(x) if p == 1 else star_discrepancy_exact(x, args.work_budget)
        rep = res.to_dict()
    _emit_json(rep, args.out)


# -- integrate ---------------------------------------------------------------

def _load_model(path):
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read model from {path}: {exc}") from exc
    if spec.get("model") != "gaussian":
        raise UsageError("only {\"model\": \"gaussian\"} descriptors are supported")
    try:
        n, p, seed = int(spec["n"]), int(spec["p"]), int(spec["seed"])
    except KeyError as exc:
        raise UsageError(f"model descriptor lacks {exc}") from exc
    data = np.random.default_rng(seed).standard_normal((n, p))
    return gaussian_conjugate(data, float(spec.get("sigma", 1.0)), float(spec.get("sigma_p", 1.0)))


def cmd_integrate(args):
    _require(args, "model", "grid", "m")
    model = _load_model(args.model)
    policy = {"fixed": "fixed_p", "highdim": "high_dim"}[args.policy]
    region = make_region(model, policy, t=args.t_override)
    if args.replicates is not None:
        if args.grid != "uniform":
            raise UsageError("--replicates needs --grid uniform (the Halton grid is deterministic)")
        if args.seed is None:
            raise UsageError("--replicates needs --seed")
        stats = run_mc_replicates(model, region, args.m, args.replicates, args.seed, args.threads)
        out = stats.to_dict()
        out["region"] = region.to_dict()
    else:
        if args.grid == "halton":
            ps = halton(args.m, model.p, args.start_index)
        else:
            if args.seed is None:
                raise UsageError("--grid uniform needs --seed")
            ps = uniform_grid(args.m, model.p, args.seed)
        rep = estimate_normalizer(model, region, ps)
        if not math.isfinite(rep.log_estimate):
            raise NumericalFailure(rep.diagnostic or "non-finite estimate")
        out = rep.to_dict()
    out["oracle_log_normalizer"] = model.oracle_log_normalizer
    _emit_json(out, args.out)


# -- bounds ------------------------------------------------------------------

def cmd_bounds(args):
    _require(args, "kind", "n", "p")
    kind, n, p = args.kind, args.n, args.p
    needs_m = kind.startswith(("mc_", "qmc_", "kh_")) or kind == "crossover"
    if needs_m:
        _require(args, "m")
    regime = args.regime
    if kind == "crossover":
        res = B.crossover(n, args.m, p, regime or "fixed_p", args.C)
        _emit_json(res, args.out)
        return
    meta = _meta_from(args)
    relative = kind.endswith("_rel")
    if kind.startswith("truncation"):
        rep = B.truncation_error_bound(n, p, meta, args.t, relative)
    elif kind.startswith("mc_tail"):
        _require(args, "zeta")
        rep = B.mc_tail_report(args.zeta, n, args.m, p, meta, args.t, relative, regime or "fixed_p")
    elif kind.startswith("mc_rate"):
        rep = B.mc_error_rate(n, args.m, p, meta, regime or "fixed_p", relative)
    elif kind.startswith("qmc_rate"):
        rep = B.qmc_error_rate(n, args.m, p, regime or "fixed_p", relative, args.C, args.sigma)
    else:
        policy = "high_dim" if regime == "high_dim" else "fixed_p"
        gamma = truncation_radius(n, p, meta, policy, args.t)
        rep = B.hk_variation_bound(n, p, meta, gamma)
        if kind == "kh_product":
            rep = B.kh_error_bound(rep, halton_bound_explicit(args.m, p))
    _emit_json(rep.to_dict(), args.out)


# -- mmle --------------------------------------------------------------------

_LMM_KEYS = {"k": int, "ni": int, "sigma": float, "tau": float, "theta0": float, "seed": int}


def _parse_lmm(text: str) -> dict:
    spec = {}
    for part in text.split(","):
        key, sep, val = part.partition("=")
        key = key.strip()
        if not sep or key not in _LMM_KEYS:
            raise UsageError(f"bad --lmm entry {part!r}; expected keys {sorted(_LMM_KEYS)}")
        try:
            spec[key] = _LMM_KEYS[key](val)
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {val!r}") from exc
    missing = set(_LMM_KEYS) - set(spec)
    if missing:
        raise UsageError(f"--lmm lacks {sorted(missing)}")
    return spec


def _parse_m_list(text) -> List[int]:
    try:
        ms = [int(v) for v in str(text).split(",")]
    except ValueError as exc:
        raise UsageError(f"--m must be an integer or comma-separated integers, got {text!r}") from exc
    if any(v < 1 for v in ms):
        raise UsageError("--m values must be >= 1")
    return ms


def cmd_mmle(args):
    _require(args, "lmm", "m")
    spec = _parse_lmm(args.lmm)
    gm = simulate_lmm(spec["k"], spec["ni"], spec["sigma"], spec["tau"], spec["theta0"], spec["seed"])
    oracle = lmm_gls_estimate(gm)
    mc_seed = derive_seed(spec["seed"], 1) if args.method == "mc" else None
    trace = []
    for m in _parse_m_list(args.m):
        res = mmle(gm, args.method, m, mc_seed, tol=args.tol, threads=args.threads)
        th = float(res.theta_tilde[0])
        if not math.isfinite(res.log_marginal_at_opt):
            raise NumericalFailure(f"marginal likelihood not finite at m={m}")
        trace.append({"m": m, "theta_tilde": th, "gap": abs(th - oracle),
                      "log_marginal": res.log_marginal_at_opt,
                      "oracle_log_marginal": lmm_marginal_oracle(gm, res.theta_tilde),
                      "iterations": res.iterations, "converged": res.converged})
    last = trace[-1]
    _emit_json({"theta_tilde": last["theta_tilde"], "oracle_mmle": oracle, "gap": last["gap"],
                "per_m_trace": trace, "method": args.method}, args.out)


# -- reproduce-tables --------------------------------------------------------

def cmd_reproduce_tables(args, file_cfg: dict):
    try:
        cfg = ExperimentConfig.from_dict(file_cfg)
        if args.replicates is not None:
            cfg.replicates = args.replicates
            cfg.__post_init__()
        if args.base_seed is not None:
            cfg.base_seed = args.base_seed
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad experiment config: {exc}") from exc
    rows = reproduce_tables(cfg, threads=args.threads)
    _emit_text(rows_to_csv(rows), args.out)
    status = EXIT_OK
    for r in rows:
        if r.diagnostic:
            print(f"cell p={r.p} n={r.n} m={r.m} failed: {r.diagnostic}", file=sys.stderr)
            status = EXIT_NUMERICAL
    if args.check:
        report = trend_checks(rows)
        print(json.dumps(report, sort_keys=True), file=sys.stderr)
        if not report["all_passed"]:
            status = EXIT_NUMERICAL
    return status


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="qmclik", description="Truncated MC/QMC normalizing constants and error bounds.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def add(name, help_):
        sp = sub.add_parser(name, help=help_, description=help_, formatter_class=fmt)
        sp.add_argument("--config", help="JSON file of flag defaults")
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads; never changes results")
        return sp

    sp = add("gen-seq", "Write a Halton or uniform point set as CSV (header x1,...,xp; 17 significant digits).")
    sp.add_argument("--kind", choices=("halton", "uniform"))
    sp.add_argument("--m", type=int)
    sp.add_argument("--p", type=int)
    sp.add_argument("--seed", type=int, help="required for --kind uniform")
    sp.add_argument("--start-index", type=int, default=0, help="first Halton index; 0 starts at the origin")

    sp = add("discrepancy", "Star discrepancy of a point CSV as JSON {value, method, m, p, witness}.")
    sp.add_argument("--in", dest="input", help="point CSV as written by gen-seq")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--exact", action="store_true", help="exact critical-grid search (the default)")
    g.add_argument("--bound", choices=("explicit", "asymptotic"), help="Halton bound instead of the exact value")
    sp.add_argument("--work-budget", type=float, default=DEFAULT_WORK_BUDGET,
                    help="refuse exact searches needing more than m^p * m * p operations")

    sp = add("integrate", "Truncated estimate of the mode-relative log normalizer of a Gaussian model.")
    sp.add_argument("--model", help='JSON {"model":"gaussian","n","p","sigma","sigma_p","seed"}')
    sp.add_argument("--grid", choices=("halton", "uniform"))
    sp.add_argument("--m", type=int)
    sp.add_argument("--replicates", type=int, help="number of MC replicates (uniform grid only)")
    sp.add_argument("--seed", type=int, help="uniform-grid seed")
    sp.add_argument("--policy", choices=("fixed", "highdim"), default="highdim",
                    help="radius sqrt(t/(eta2 n)), inflated by sqrt(p) for highdim")
    sp.add_argument("--t-override", type=float, help="t(n); default sqrt(eta2 log(n)/eta1)")
    sp.add_argument("--start-index", type=int, default=0, help="first Halton index")

    sp = add("bounds", "Evaluate an error bound as JSON {kind, value, log_value, components, regime, flags}.")
    sp.add_argument("--kind", choices=B.KINDS)
    sp.add_argument("--n", type=float)
    sp.add_argument("--m", type=float)
    sp.add_argument("--p", type=int)
    sp.add_argument("--eta1", type=float, default=1.0)
    sp.add_argument("--eta2", type=float, default=1.0)
    sp.add_argument("--D", type=float, default=1.0, help="derivative bound constant")
    sp.add_argument("--epsilon", type=float, default=1.0)
    sp.add_argument("--C", type=float, default=1.0, help="dimension constant of the high_dim QMC rate")
    sp.add_argument("--sigma", type=float, default=1.0, help="noise scale for gaussian_special")
    sp.add_argument("--regime", choices=B.REGIMES, help="default: fixed_p")
    sp.add_argument("--t", type=float, help="t(n); default sqrt(eta2 log(n)/eta1)")
    sp.add_argument("--zeta", type=float, help="deviation level for mc_tail_*")

    sp = add("mmle", "Maximum approximate marginal likelihood for a simulated random-intercept LMM.")
    sp.add_argument("--lmm", help="k=K,ni=N,sigma=S,tau=T,theta0=TH,seed=SEED")
    sp.add_argument("--method", choices=("mc", "qmc"), default="qmc")
    sp.add_argument("--m", help="grid size, or a comma-separated list for per_m_trace")
    sp.add_argument("--tol", type=float, default=1e-6, help="golden-section bracket tolerance")

    sp = add("reproduce-tables", "Run the Gaussian simulation study and write the table CSV.")
    sp.add_argument("--replicates", type=int, help="overrides the config (default 1000)")
    sp.add_argument("--base-seed", type=int, help="overrides the config")
    sp.add_argument("--check", action="store_true",
                    help="run the trend checks; exit 2 if any fails")
    return parser


def _load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config must be a JSON object")
    return cfg


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    file_cfg = _load_config(args.config) if args.config else {}
    if args.command == "reproduce-tables" or not file_cfg:
        return args, file_cfg
    # defaults < config file < flags: install the file as defaults, then reparse
    sp = parser._subparsers._group_actions[0].choices[args.command]
    dests = {a.dest for a in sp._actions}
    defaults = {}
    for key, val in file_cfg.items():
        dest = key.replace("-", "_")
        if dest not in dests or dest in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for {args.command}")
        defaults[dest] = val
    sp.set_defaults(**defaults)
    return parser.parse_args(argv), file_cfg


COMMANDS = {"gen-seq": cmd_gen_seq, "discrepancy": cmd_discrepancy, "integrate": cmd_integrate,
            "bounds": cmd_bounds, "mmle": cmd_mmle}


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    command = None
    try:
        args, file_cfg = _parse(argv)
        command = args.command
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        if args.command == "reproduce-tables":
            return cmd_reproduce_tables(args, file_cfg)
        COMMANDS[args.command](args)
        return EXIT_OK
    except UsageError as exc:
        if not exc.usage_shown and command is not None:
            sub = build_parser()._subparsers._group_actions[0].choices[command]
            sub.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    except WorkBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
