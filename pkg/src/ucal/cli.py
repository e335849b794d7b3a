"""Command-line entry point.

Subcommands:

    run       play forecaster-vs-adversary games, emit one CSV row per
              (trial, loss), and print a pucal/ucal summary
    sweep     like run, but iterating the horizon over a geometric grid
    minimax   exact value of the binary squared-loss game (DP and/or closed
              form), optional sandwich-bound checks and CSV dump
    validate  numerical validation suite for a shipped loss

Component specs are NAME or NAME:ARGS, e.g. ``ftl``, ``static:0.5,0.5``,
``tsallis:1.5``, ``fixed:outcomes.txt``, ``greedy:vshaped``.  A key=value
config file can provide defaults for any long flag; explicit flags win.
Exit codes: 0 success, 1 validation or assertion failure, 2 usage error.
The UCAL_THREADS environment variable caps the trial worker count; results
are byte-identical regardless of worker count because every trial owns its
own RNG stream and rows are sorted before writing.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import engine, minimax
from .adversaries import Adversary, Alternating, FixedSequence, GreedyAdaptive, IidUniform
from .core import RngStream, one_hot
from .forecasters import (FollowTheLeader, Forecaster, PerturbedLeaderGeometric,
                          PerturbedLeaderUniform, StaticForecaster)
from .losses import (ProperLoss, SphericalLoss, SquaredLoss, TsallisLoss, VShapedLoss,
                     check_concavity, check_hessian_growth, check_proper, check_range,
                     estimate_lipschitz, random_simplex_points, validation_points)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(ValueError):
    pass


def _split_spec(spec: str) -> tuple[str, str]:
    name, _, args = spec.partition(":")
    return name.strip().lower(), args


def _float_args(args: str) -> list[float]:
    if not args:
        return []
    try:
        return [float(tok) for tok in args.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad numeric arguments {args!r}") from exc


def make_loss(spec: str) -> ProperLoss:
    name, args = _split_spec(spec)
    try:
        if name == "squared":
            vals = _float_args(args)
            return SquaredLoss(*vals) if vals else SquaredLoss()
        if name == "brier":
            return SquaredLoss(0.5)
        if name == "spherical":
            return SphericalLoss()
        if name == "vshaped":
            return VShapedLoss()
        if name == "tsallis":
            vals = _float_args(args)
            if not vals:
                raise UsageError("tsallis needs an alpha, e.g. tsallis:1.5")
            return TsallisLoss(*vals)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown loss {spec!r} (try squared, brier, spherical, vshaped, tsallis:ALPHA)")


def make_forecaster(spec: str, k: int, horizon: int) -> Forecaster:
    name, args = _split_spec(spec)
    if name == "ftl":
        return FollowTheLeader(k, horizon)
    if name == "ftpl-geometric":
        return PerturbedLeaderGeometric(k, horizon)
    if name == "ftpl-uniform":
        return PerturbedLeaderUniform(k, horizon)
    if name == "static":
        point = _float_args(args)
        if len(point) != k:
            raise UsageError(f"static forecaster needs {k} probabilities, got {len(point)}")
        try:
            return StaticForecaster(point, horizon)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    raise UsageError(f"unknown forecaster {spec!r} (try ftl, ftpl-geometric, ftpl-uniform, static:P1,...,PK)")


def make_adversary(spec: str, k: int) -> Adversary:
    name, args = _split_spec(spec)
    if name == "alternating":
        return Alternating(k)
    if name == "iid-uniform":
        return IidUniform(k)
    if name == "fixed":
        if not args:
            raise UsageError("fixed adversary needs a path, e.g. fixed:outcomes.txt")
        try:
            return FixedSequence.from_file(k, args)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot load fixed sequence: {exc}") from exc
    if name == "greedy":
        if not args:
            raise UsageError("greedy adversary needs a loss, e.g. greedy:vshaped")
        return GreedyAdaptive(k, make_loss(args))
    raise UsageError(f"unknown adversary {spec!r} (try alternating, iid-uniform, fixed:PATH, greedy:LOSS)")


def _trial_job(payload):
    fspec, aspec, lspecs, k, horizon, base_seed, trial = payload
    losses = [make_loss(s) for s in lspecs]
    adversary = make_adversary(aspec, k)
    forecaster = make_forecaster(fspec, k, horizon)
    rng = RngStream(base_seed, trial).generator()
    transcript = engine.run_game(forecaster, adversary, horizon, rng)
    return trial, [engine.regret(transcript, loss).regret for loss in losses]


def _worker_cap(requested: int) -> int:
    cap = os.environ.get("UCAL_THREADS")
    if cap is not None:
        try:
            requested = min(requested, max(1, int(cap)))
        except ValueError:
            raise UsageError(f"UCAL_THREADS must be an integer, got {cap!r}")
    return max(1, requested)


def _run_regret_matrix(fspec, aspec, lspecs, k, horizon, trials, base_seed, workers):
    payloads = [(fspec, aspec, lspecs, k, horizon, base_seed, trial) for trial in range(trials)]
    out = np.empty((trials, len(lspecs)))
    workers = _worker_cap(workers)
    if workers == 1 or trials == 1:
        results = [_trial_job(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, trials)) as pool:
            results = list(pool.map(_trial_job, payloads))
    for trial, regrets in results:
        out[trial] = regrets
    return out


def _emit_rows(args, loss_names, regrets, horizons=None):
    rows = []
    trials = regrets.shape[0]
    for trial in range(trials):
        for j, loss_name in enumerate(loss_names):
            rows.append({
                "experiment": args.experiment,
                "forecaster": args.forecaster,
                "adversary": args.adversary,
                "loss": loss_name,
                "K": args.K,
                "T": args.T if horizons is None else horizons[trial],
                "trial": trial,
                "seed": args.seed,
                "regret": float(regrets[trial, j]),
            })
    return rows


def _write_output(text: str, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _check_fixed_length(adversary, horizon):
    if isinstance(adversary, FixedSequence) and len(adversary.sequence) < horizon:
        raise UsageError(f"fixed sequence has {len(adversary.sequence)} outcomes, "
                         f"horizon is {horizon}")


def cmd_run(args) -> int:
    lspecs = _loss_specs(args)
    losses = [make_loss(s) for s in lspecs]
    _check_fixed_length(make_adversary(args.adversary, args.K), args.T)
    make_forecaster(args.forecaster, args.K, args.T)  # fail fast on bad specs
    regrets = _run_regret_matrix(args.forecaster, args.adversary, lspecs,
                                 args.K, args.T, args.trials, args.seed, args.workers)
    rows = _emit_rows(args, [loss.name for loss in losses], regrets)
    text = engine.write_csv(rows)
    _write_output(text, args.output)
    per_loss = regrets.mean(axis=0)
    sup = regrets.max(axis=1)
    se = float(sup.std(ddof=1) / math.sqrt(args.trials)) if args.trials > 1 else 0.0
    summary = (f"pucal={engine.format_float(float(per_loss.max()))} "
               f"ucal={engine.format_float(float(sup.mean()))} "
               f"std_error={engine.format_float(se)} trials={args.trials}")
    print(summary, file=sys.stdout if args.output else sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    lspecs = _loss_specs(args)
    losses = [make_loss(s) for s in lspecs]
    make_adversary(args.adversary, args.K)
    horizons = []
    horizon = args.T_start
    while horizon <= args.T_stop:
        horizons.append(horizon)
        nxt = int(round(horizon * args.T_factor))
        horizon = nxt if nxt > horizon else horizon + 1
    if not horizons:
        raise UsageError("empty horizon grid; check --T-start/--T-stop/--T-factor")
    rows = []
    for horizon in horizons:
        make_forecaster(args.forecaster, args.K, horizon)
        _check_fixed_length(make_adversary(args.adversary, args.K), horizon)
        regrets = _run_regret_matrix(args.forecaster, args.adversary, lspecs,
                                     args.K, horizon, args.trials, args.seed, args.workers)
        for trial in range(args.trials):
            for j, loss in enumerate(losses):
                rows.append({
                    "experiment": args.experiment, "forecaster": args.forecaster,
                    "adversary": args.adversary, "loss": loss.name,
                    "K": args.K, "T": horizon, "trial": trial, "seed": args.seed,
                    "regret": float(regrets[trial, j]),
                })
    text = engine.write_csv(rows)
    _write_output(text, args.output)
    print(f"swept T={horizons} trials={args.trials}", file=sys.stdout if args.output else sys.stderr)
    return EXIT_OK


def cmd_minimax(args) -> int:
    t = args.T
    value_dp = value_closed = None
    seqs = None
    if args.mode in ("dp", "both"):
        table = minimax.dp_value(t)
        value_dp = table.value
        print(f"dp value V(T={t}) = {engine.format_float(value_dp)} "
              f"(max child gap {table.max_abs_gap:.6f}, clamped branches {table.outer_branch_states})")
        if table.outer_branch_states > 0 or table.max_abs_gap > 2.0 + 1e-9:
            print("FAIL: a backward step left the interior branch", file=sys.stderr)
            return EXIT_FAIL
    if args.mode in ("closed", "both") or args.check_bounds or args.output:
        seqs = minimax.closed_form(t)
        value_closed = seqs.value
        if args.mode in ("closed", "both"):
            print(f"closed-form value v[T={t}] = {engine.format_float(value_closed)}")
    if args.mode == "both":
        gap = abs(value_dp - value_closed)
        if gap > 1e-8:
            print(f"FAIL: dp and closed form disagree by {gap:.3e}", file=sys.stderr)
            return EXIT_FAIL
        print(f"agreement |dp - closed| = {gap:.3e} <= 1e-08")
    if args.check_bounds:
        upper_violation, lower_violation = minimax.check_a_bounds(t)
        floor = minimax.value_lower_bound(t)
        ok = upper_violation <= 1e-12 and lower_violation <= 1e-12 and seqs.value >= floor
        print(f"sandwich violations: above={upper_violation:.3e} below={lower_violation:.3e}; "
              f"value {engine.format_float(seqs.value)} >= floor {engine.format_float(floor)}: "
              f"{seqs.value >= floor}")
        if not ok:
            print("FAIL: sandwich bounds violated", file=sys.stderr)
            return EXIT_FAIL
    if args.output:
        log_t = math.log(t)
        with open(args.output, "w") as fh:
            fh.write("r,u_r,v_r,a_r,upper_bound,lower_bound\n")
            for i in range(t):
                fh.write(",".join([
                    str(i),
                    engine.format_float(float(seqs.u[i])),
                    engine.format_float(float(seqs.v[i])),
                    engine.format_float(float(seqs.a[i])),
                    engine.format_float(1.0 / (t - i)),
                    engine.format_float(1.0 / (t - i + log_t)),
                ]) + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    spec = args.loss
    if args.alpha is not None and ":" not in spec:
        spec = f"{spec}:{args.alpha:g}" + (f",{args.scale:g}" if args.scale is not None else "")
    loss = make_loss(spec)
    k = args.K
    rng = RngStream(args.seed, 0).generator()
    failures = []

    pairs = (random_simplex_points(k, args.samples, rng),
             random_simplex_points(k, args.samples, rng))
    report = check_proper(loss, pairs, tol=args.tol)
    print(f"properness: {report.properness_violations} violations "
          f"(max {report.max_violation:.3e}) over {args.samples} pairs")
    if report.properness_violations:
        failures.append("properness")

    concavity = check_concavity(loss, pairs, tol=args.tol)
    print(f"concavity (midpoint): {concavity} violations")
    if concavity:
        failures.append("concavity")

    grid = validation_points(k, rng)
    lo, hi, ok = check_range(loss, grid, tol=args.tol)
    blo, bhi = loss.range_bound
    print(f"range: observed [{lo:.6f}, {hi:.6f}] within declared [{blo:g}, {bhi:g}]: {ok}")
    if not ok:
        failures.append("range")
    if blo < -1.0 - 1e-9 or bhi > 1.0 + 1e-9:
        print(f"flag: declared range [{blo:g}, {bhi:g}] exceeds [-1, 1]")

    lips = estimate_lipschitz(loss, k, args.samples, rng)
    print(f"lipschitz estimate: {lips:.6g}")

    if isinstance(loss, TsallisLoss):
        c = loss.alpha * (loss.alpha - 1.0)
        hessian_grid = np.linspace(1e-3, 1.0 - 1e-3, 999)
        ok = check_hessian_growth(loss, hessian_grid, c)
        print(f"hessian growth with c = alpha*(alpha-1) = {c:g}: {ok}")
        if not ok:
            failures.append("hessian-growth")

    if isinstance(loss, VShapedLoss):
        lo_val = float(loss.bivariate(one_hot(0, k), 0))
        face = np.full(k, 1.0 / (k - 1))
        face[0] = 0.0
        hi_val = float(loss.bivariate(face, 0))
        extreme = (k - 1) / k
        ok = abs(lo_val + extreme) <= 1e-12 and abs(hi_val - extreme) <= 1e-12
        print(f"extremes: min {lo_val:.6f} max {hi_val:.6f} vs +/-{extreme:.6f}: {ok}")
        if not ok:
            failures.append("extremes")

    if failures:
        print(f"FAIL: {', '.join(failures)}", file=sys.stderr)
        return EXIT_FAIL
    print("ok")
    return EXIT_OK


def _loss_specs(args) -> list[str]:
    specs = []
    for chunk in args.loss:
        specs.extend(s for s in chunk.split(";") if s)
    if not specs:
        raise UsageError("need at least one --loss")
    return specs


def _load_config(path) -> dict:
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"bad config line {line!r} (expected key=value)")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


_CONFIG_TYPES = {
    "K": int, "T": int, "trials": int, "seed": int, "workers": int,
    "samples": int, "T_start": int, "T_stop": int,
    "T_factor": float, "tol": float, "alpha": float, "scale": float,
    "loss": lambda s: s.split(";"),
}


def _apply_config(parser: argparse.ArgumentParser, args_list):
    if "--config" not in args_list:
        return args_list
    idx = args_list.index("--config")
    try:
        path = args_list[idx + 1]
    except IndexError:
        parser.error("--config needs a path")
    raw = _load_config(path)
    rest = args_list[:idx] + args_list[idx + 2:]
    if "loss" in raw and "--loss" in rest:
        del raw["loss"]  # appended flags must replace, not extend, the config list
    defaults = {}
    for key, value in raw.items():
        conv = _CONFIG_TYPES.get(key, str)
        try:
            defaults[key] = conv(value)
        except ValueError:
            parser.error(f"bad config value for {key}: {value!r}")
    parser.set_defaults(**defaults)
    for action in parser._actions:
        if action.dest in defaults:
            action.required = False
    return rest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ucal",
                                     description="Online forecasting experiments under proper losses")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key=value defaults file; flags override")
        p.add_argument("--forecaster", required=True)
        p.add_argument("--adversary", required=True)
        p.add_argument("--loss", action="append", default=[],
                       help="loss spec; repeat or separate with ';' for a family")
        p.add_argument("--K", type=int, required=True)
        p.add_argument("--trials", type=int, default=1)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--output", help="CSV path (default: stdout)")
        p.add_argument("--workers", type=int, default=1,
                       help="trial workers; capped by UCAL_THREADS")

    p_run = sub.add_parser("run", help="play games and report regrets")
    add_common(p_run)
    p_run.add_argument("--T", type=int, required=True)
    p_run.add_argument("--experiment", default="run")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="regret-vs-horizon scaling data")
    add_common(p_sweep)
    p_sweep.add_argument("--T-start", dest="T_start", type=int, required=True)
    p_sweep.add_argument("--T-stop", dest="T_stop", type=int, required=True)
    p_sweep.add_argument("--T-factor", dest="T_factor", type=float, default=2.0)
    p_sweep.add_argument("--experiment", default="sweep")
    p_sweep.set_defaults(func=cmd_sweep)

    p_mm = sub.add_parser("minimax", help="exact binary squared-loss game value")
    p_mm.add_argument("--config", help="key=value defaults file; flags override")
    p_mm.add_argument("--T", type=int, required=True)
    p_mm.add_argument("--mode", choices=["dp", "closed", "both"], default="both")
    p_mm.add_argument("--check-bounds", dest="check_bounds", action="store_true")
    p_mm.add_argument("--output", help="CSV of r,u_r,v_r,a_r,upper_bound,lower_bound")
    p_mm.set_defaults(func=cmd_minimax)

    p_val = sub.add_parser("validate", help="numerical loss validation suite")
    p_val.add_argument("--config", help="key=value defaults file; flags override")
    p_val.add_argument("--loss", required=True)
    p_val.add_argument("--alpha", type=float)
    p_val.add_argument("--scale", type=float)
    p_val.add_argument("--K", type=int, default=3)
    p_val.add_argument("--samples", type=int, default=10_000)
    p_val.add_argument("--seed", type=int, default=0)
    p_val.add_argument("--tol", type=float, default=1e-9)
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # resolve the subparser that owns --config so defaults land in the right place
    if argv and argv[0] in ("run", "sweep", "minimax", "validate"):
        sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
        subparser = sub_actions[0].choices[argv[0]]
        try:
            argv = [argv[0]] + _apply_config(subparser, argv[1:])
        except (UsageError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
