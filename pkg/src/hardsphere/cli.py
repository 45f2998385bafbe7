"""Batch front end: bound curves, simulations, identity checks, entropy.

Every run is fully determined by its flags and seed: chains use
counter-based generators keyed by (seed, chain id), results merge in chain
id order, and output files carry no timestamps, so identical invocations
produce identical bytes.  Exit codes: 0 pass/success, 1 check failed,
2 usage error.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import bounds as bnd
from . import uncovered as unc
from .model import BallVolumeRegion, IntervalRegion
from .partition import canonical_zhat_mc, entropy_density_estimate, grand_z_series, tonks_zhat_exact
from .sampler import (
    FugacityParams,
    Schedule,
    acceptance_rates,
    chain_rng,
    count_variance_from_counts,
    default_schedule,
    run_chain,
)
from .stats import batch_means, merge_estimates


def _parse_range(text, kind="d"):
    """Parse 'a', 'a:b', or 'a:b:step' into an inclusive integer list."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            vals = [int(parts[0])]
        elif len(parts) == 2:
            vals = list(range(int(parts[0]), int(parts[1]) + 1))
        elif len(parts) == 3:
            vals = list(range(int(parts[0]), int(parts[1]) + 1, int(parts[2])))
        else:
            raise ValueError
    except ValueError:
        raise SystemExit(_usage_error(f"cannot parse {kind} range {text!r}"))
    if not vals:
        raise SystemExit(_usage_error(f"empty {kind} range {text!r}"))
    return vals


def _parse_c_range(text):
    """Parse 'a:b:n' into n evenly spaced c values, or a single value."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) == 3:
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1:
                raise ValueError
            if n == 1:
                return [a]
            return [a + (b - a) * i / (n - 1) for i in range(n)]
        raise ValueError
    except ValueError:
        raise SystemExit(_usage_error(f"cannot parse c range {text!r}"))


def _usage_error(msg):
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _write_text(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_json(obj, path):
    _write_text(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _region_from_args(args):
    if args.d == 1 and args.L is not None:
        return IntervalRegion(args.L)
    if args.n is not None:
        return BallVolumeRegion(args.n, args.d)
    if args.d == 1:
        raise SystemExit(_usage_error("give --L (interval) or --n (ball volume)"))
    raise SystemExit(_usage_error("give --n (ball volume) for d >= 2"))


def _schedule_from_args(args, region):
    base = default_schedule(region, n_samples=args.samples)
    burn = args.burn_in if args.burn_in is not None else base.burn_in
    thin = args.thinning if args.thinning is not None else base.thinning
    return Schedule(burn, args.samples, thin)


# ----------------------------------------------------------------- bounds


def cmd_bounds(args):
    ds = _parse_range(args.d, "d")
    if any(d < 1 for d in ds):
        return _usage_error("dimensions must be >= 1")
    if args.kind == "alpha":
        curve = bnd.BoundCurve(kind="alpha_lower")
        for d in ds:
            if args.lam is not None:
                lam = args.lam
            elif args.lambda_rule == "proof":
                lam = bnd.proof_fugacity(d)
            else:
                lam = 3.0 ** (-d / 2.0)
            curve.add(d, lam, bnd.theorem1_bound(d, lam))
    elif args.kind == "asymptotic":
        curve = bnd.BoundCurve(kind="asymptotic_alpha", main_term_only=True)
        for d in ds:
            curve.add(d, d, bnd.asymptotic_alpha(d))
    elif args.kind == "pressure":
        if args.c is None:
            return _usage_error("--kind pressure needs --c a:b:n")
        if len(ds) != 1:
            return _usage_error("--kind pressure takes a single --d")
        curve = bnd.BoundCurve(kind="pressure_lower")
        for c in _parse_c_range(args.c):
            try:
                pb = bnd.pressure_bound(ds[0], c)
            except ValueError as err:
                return _usage_error(str(err))
            curve.add(ds[0], c, pb.finite_d)
    elif args.kind == "entropy":
        curve = bnd.BoundCurve(kind="entropy_lower", main_term_only=True)
        for d in ds:
            eb = bnd.entropy_bound(d)
            curve.add(d, eb.alpha, eb.value)
    elif args.kind == "cell":
        curve = bnd.BoundCurve(kind="cell_model", main_term_only=True)
        for d in ds:
            eps = args.c2 / d
            if not 0 < eps < 1:
                return _usage_error(f"eps = c2/d = {eps} outside (0, 1) at d={d}")
            cb = bnd.cell_model_bound(d, args.c1, args.c2, eps)
            curve.add(d, eps, cb.value)
    else:  # unreachable through argparse choices
        return _usage_error(f"unknown kind {args.kind}")

    prefix = args.out or f"bounds_{args.kind}"
    _write_text(prefix + ".csv", "\n".join(curve.csv_rows()) + "\n")
    _write_text(prefix + ".dat", "\n".join(curve.dat_rows()) + "\n")
    if not args.no_plot:
        from .plotting import plot_curve

        plot_curve(curve, prefix + ".png")
    return 0


# --------------------------------------------------------------- simulate


def _run_chains(region, params, schedule, seed, n_chains, probes, translate_radius=None):
    """Run n_chains independent chains and pool their estimates in id order."""
    per_chain = max(20, int(math.ceil(schedule.n_samples / n_chains)))
    traces = []
    for cid in range(n_chains):
        rng = chain_rng(seed, cid)
        sched = Schedule(schedule.burn_in, per_chain, schedule.thinning)
        traces.append(run_chain(region, params, sched, rng, probes_per_sample=probes))
    alpha = merge_estimates([batch_means(t.counts / region.volume) for t in traces])
    fv = merge_estimates([batch_means(t.free_fractions) for t in traces])
    var = merge_estimates([count_variance_from_counts(t.counts) for t in traces])
    return traces, alpha, fv, var


def cmd_simulate(args):
    if args.lam is None:
        return _usage_error("give --lambda (flag or config file)")
    region = _region_from_args(args)
    params = FugacityParams(args.lam, args.d)
    schedule = _schedule_from_args(args, region)
    traces, alpha, fv, var = _run_chains(
        region, params, schedule, args.seed, args.chains, args.probes
    )
    rates = [acceptance_rates(t.state) for t in traces]
    n = sum(t.state.steps_taken for t in traces)
    rows = [
        ("alpha", alpha.mean, alpha.stderr, alpha.n_samples, alpha.n_batches),
        ("free_volume", fv.mean, fv.stderr, fv.n_samples, fv.n_batches),
        ("count_variance", var.mean, var.stderr, var.n_samples, var.n_batches),
    ]
    for name in ("insert", "delete", "translate"):
        p = sum(r[name] for r in rates) / len(rates)
        rows.append((f"accept_{name}", p, math.sqrt(p * (1 - p) / n), n, len(rates)))

    if args.dump_config is not None:
        cfg = traces[-1].state.config
        lines = [f"{region.d},{cfg.k}"]
        lines += [",".join(repr(float(x)) for x in p) for p in cfg.points_list()]
        _write_text(args.dump_config, "\n".join(lines) + "\n")

    if args.format == "json":
        obj = {q: {"mean": m, "stderr": s, "n_samples": ns, "n_batches": nb} for q, m, s, ns, nb in rows}
        _emit_json(obj, args.out)
    else:
        text = "quantity,mean,stderr,n_samples,n_batches\n"
        text += "".join(f"{q},{m!r},{s!r},{ns},{nb}\n" for q, m, s, ns, nb in rows)
        _write_text(args.out, text)
    return 0


# ----------------------------------------------------------------- verify


def _verify_tonks(args, rng):
    worst = 0.0
    cells = []
    for L in (5.0, 10.0, 20.0):
        region = IntervalRegion(L)
        for k in range(1, 7):
            mc = canonical_zhat_mc(region, k, 1, args.samples, rng)
            exact = tonks_zhat_exact(L, k).value
            sig = abs(mc.value - exact) / mc.stderr if mc.stderr > 0 else 0.0
            worst = max(worst, sig)
            cells.append({"L": L, "k": k, "mc": mc.value, "exact": exact, "sigmas": sig})
    return {
        "check": "tonks",
        "lhs": worst,
        "rhs": 3.0,
        "stderr_lhs": 0.0,
        "stderr_rhs": 0.0,
        "verdict": "pass" if worst <= 3.0 else "fail",
        "margin_sigmas": 3.0 - worst,
        "cells": cells,
    }


def _verify_stationarity(args, rng):
    from scipy.stats import chisquare

    region = IntervalRegion(3.0)
    params = FugacityParams(1.0, 1)
    schedule = Schedule(args.burn_in or 300000, args.samples, args.thinning or 30)
    trace = run_chain(region, params, schedule, rng)
    kmax = 3  # four unit rods cannot fit in [0, 3]
    zh = [tonks_zhat_exact(3.0, k).value for k in range(kmax + 1)]
    z = sum(zh)
    probs = np.array(zh) / z
    obs = np.bincount(trace.counts, minlength=kmax + 1).astype(float)
    if obs.size > kmax + 1:
        return {"check": "stationarity", "verdict": "fail", "reason": "impossible occupation observed"}
    stat, p = chisquare(obs, probs * obs.sum())
    return {
        "check": "stationarity",
        "lhs": float(p),
        "rhs": 0.001,
        "stderr_lhs": 0.0,
        "stderr_rhs": 0.0,
        "verdict": "pass" if p > 0.001 else "fail",
        "margin_sigmas": float("nan"),
        "chi_square": float(stat),
        "observed": obs.tolist(),
        "expected": (probs * obs.sum()).tolist(),
    }


def _verify_logz(args, rng):
    cases = []
    ok = True
    for _ in range(args.cases):
        d = int(rng.integers(1, 4))
        lam = 0.05 + 0.45 * rng.random()
        vol = 2.0 + 10.0 * rng.random()
        region = IntervalRegion(vol) if d == 1 else BallVolumeRegion(vol, d)
        k_max = max(12, int(3 * lam * vol) + 10)
        z = grand_z_series(region, lam, k_max, args.samples, rng)
        lhs = math.log(z.value + 3.0 * z.stderr)
        rhs = lam * vol + z.truncation_error
        passed = lhs <= rhs + 1e-12
        ok &= passed
        cases.append({"d": d, "lambda": lam, "vol": vol, "log_z": math.log(z.value), "bound": lam * vol, "pass": passed})
    return {
        "check": "logZ",
        "lhs": max(c["log_z"] - c["bound"] for c in cases),
        "rhs": 0.0,
        "stderr_lhs": 0.0,
        "stderr_rhs": 0.0,
        "verdict": "pass" if ok else "fail",
        "margin_sigmas": float("nan"),
        "cases": cases,
    }


def cmd_verify(args):
    rng = chain_rng(args.seed, 0)
    if args.which == "tonks":
        report = _verify_tonks(args, rng)
    elif args.which == "stationarity":
        report = _verify_stationarity(args, rng)
    elif args.which == "logZ":
        report = _verify_logz(args, rng)
    elif args.which == "geometric":
        report = unc.check_geometric_lemma(args.d, args.samples_u, rng, inner_samples=args.samples_inner)
        report["check"] = "geometric"
    elif args.which in ("identity31", "inequality32"):
        region = _region_from_args(args)
        params = FugacityParams(args.lam, args.d)
        schedule = _schedule_from_args(args, region)
        if args.which == "identity31":
            report = unc.verify_identity_31(
                region, params, schedule, args.reps, args.tol, rng, k_max=args.k_max, per_k_samples=args.samples
            )
            report.pop("per_draw", None)
            report.pop("vols", None)
        else:
            report = unc.verify_inequality_32(region, params, schedule, args.reps, rng)
        report["check"] = args.which
    else:  # unreachable through argparse choices
        return _usage_error(f"unknown check {args.which}")
    _emit_json(report, args.out)
    return 0 if report.get("verdict") == "pass" else 1


# ---------------------------------------------------------------- entropy


def cmd_entropy(args):
    if args.k is None and args.alpha is None:
        return _usage_error("give --k or --alpha")
    alpha = args.alpha if args.alpha is not None else args.k / args.n
    rng = chain_rng(args.seed, 0)
    res = entropy_density_estimate(args.n, alpha, args.d, args.samples, rng)
    eb = bnd.entropy_bound(args.d)
    cb = bnd.cell_model_bound(args.d, 1.0, 1.0, min(0.5, 1.0 / args.d))
    obj = {
        "d": args.d,
        "n": args.n,
        "k": res.k,
        "alpha": alpha,
        "value": res.value,
        "stderr": res.stderr,
        "exact": res.exact,
        "lower_bound_only": res.lower_bound_only,
        "reference": {
            "entropy_bound_alpha": eb.alpha,
            "entropy_bound_value": eb.value,
            "cell_model_value": cb.value,
            "main_term_only": True,
        },
    }
    _emit_json(obj, args.out)
    return 0


# ------------------------------------------------------------ arg parsing


def _add_common(p):
    p.add_argument("--seed", type=int, default=0, help="64-bit run seed")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=int, default=1, help="worker threads (never changes output bytes)")
    p.add_argument("--config", default=None, help="key=value file; flags override")


def build_parser():
    parser = argparse.ArgumentParser(prog="hardsphere", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="emit closed-form bound curves")
    p.add_argument("--kind", choices=("alpha", "pressure", "entropy", "cell", "asymptotic"), required=True)
    p.add_argument("--d", required=True, help="dimension or range a:b[:step]")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--lambda-rule", choices=("proof", "threshold"), default="proof")
    p.add_argument("--c", default=None, help="c value or range a:b:n")
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--no-plot", action="store_true", help="skip the rendered figure")
    _add_common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="GCMC run: density, free volume, count variance")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--L", type=float, default=None, help="interval length (d=1)")
    p.add_argument("--n", type=float, default=None, help="ball volume")
    # required in effect, but validated in the command so a --config file
    # can supply it
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--thinning", type=int, default=None)
    p.add_argument("--probes", type=int, default=64)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--dump-config", default=None, help="write a CSV snapshot of the final configuration")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run a named identity/inequality check")
    p.add_argument(
        "which", choices=("identity31", "inequality32", "geometric", "tonks", "stationarity", "logZ")
    )
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--n", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=0.2)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--samples", type=int, default=100000, help="MC samples per estimate")
    p.add_argument("--thinning", type=int, default=None)
    p.add_argument("--reps", type=int, default=300, help="repetitions of the two-part experiment")
    p.add_argument("--k-max", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-6, help="series truncation tolerance")
    p.add_argument("--cases", type=int, default=20, help="random cases for logZ")
    p.add_argument("--samples-u", type=int, default=200, help="u draws for geometric")
    p.add_argument("--samples-inner", type=int, default=2000, help="nested volume MC samples")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("entropy", help="finite-n entropy-density estimate")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--samples", type=int, default=100000)
    _add_common(p)
    p.set_defaults(func=cmd_entropy)

    return parser, sub


_CONFIG_DEST = {"lambda": "lam"}


def _load_config(path, subparser):
    """Parse a key=value config file into typed argparse defaults."""
    actions = {a.dest: a for a in subparser._actions}
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SystemExit(_usage_error(f"{path}:{lineno}: expected key=value"))
            key, val = (s.strip() for s in line.split("=", 1))
            dest = _CONFIG_DEST.get(key, key.replace("-", "_"))
            if dest not in actions:
                raise SystemExit(_usage_error(f"{path}:{lineno}: unknown key {key!r}"))
            action = actions[dest]
            if action.const is not None and not action.type:  # store_true flags
                out[dest] = val.lower() in ("1", "true", "yes")
            elif action.type is not None:
                out[dest] = action.type(val)
            else:
                out[dest] = val
    return out


def main(argv=None):
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        subparser = sub.choices[args.command]
        subparser.set_defaults(**_load_config(args.config, subparser))
        args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except ValueError as err:
        return _usage_error(str(err))


if __name__ == "__main__":
    sys.exit(main())
