"""Command-line interface: ``reweigh generate | estimate | certify | bench``.

Data files are headerless CSV (one point per row, ``.`` decimals) with an
optional JSON sidecar holding the true mean, inlier labels and generator
metadata. Exit codes: 0 ok, 2 input error, 3 promise violated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from .centers import best_weights_for_direction, certify, spectral_objective
from .core import PromiseViolation
from .datagen import Instance, corrupt, gen_gaussian, gen_planted_promise, gen_student_t
from .estimators import ALL_SOLVERS, BOUNDED_SOLVERS, HeavyTailConfig, heavy_tailed_mean, robust_mean
from .solution import SolverConfig

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PROMISE = 3


class InputError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get("REWEIGH_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"REWEIGH_SEED must be an integer, got {raw!r}") from None


# ---------------------------------------------------------------- file formats

def format_row(row) -> str:
    # repr gives the shortest string that round-trips exactly
    return ",".join(repr(float(v)) for v in row)


def write_points(path, points) -> None:
    text = "".join(format_row(r) + "\n" for r in np.asarray(points, dtype=float))
    Path(path).write_text(text)


def read_points(path) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise InputError(f"{path}: line {lineno}: malformed row") from None
        if not all(math.isfinite(v) for v in row):
            raise InputError(f"{path}: line {lineno}: non-finite value")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputError(f"{path}: line {lineno}: expected {width} values, got {len(row)}")
        rows.append(row)
    if not rows:
        raise InputError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def sidecar_path(data_path) -> Path:
    return Path(str(data_path) + ".json")


def instance_sidecar(inst: Instance) -> dict:
    side = {
        "true_mean": inst.true_mean.tolist(),
        "labels": [bool(b) for b in inst.inlier_labels],
        "generator": inst.meta,
        "seed": inst.meta.get("seed"),
    }
    if inst.witness is not None:
        side["witness"] = {
            "center": inst.witness.center.tolist(),
            "weights": inst.witness.weights.tolist(),
            "lam": inst.witness.lam,
        }
    return side


def read_sidecar(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg})") from None


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- instances

def make_instance(generator: str, n: int, d: int, seed: int, eps: float = 0.0,
                  adversary: str = "cluster", shift: float = 10.0, radius: float = 1.0,
                  dof: float = 3.0, lam: float = 2.0) -> Instance:
    """Build the instance that ``generate`` would write, for ``bench`` trials."""
    if generator == "gaussian":
        inst = gen_gaussian(n, d, None, seed)
    elif generator == "student-t":
        inst = gen_student_t(n, d, dof, seed)
    elif generator == "planted":
        return gen_planted_promise(n, d, lam, eps, seed)
    else:
        raise ValueError(f"unknown generator {generator!r}")
    if eps > 0:
        inst = corrupt(inst, eps, adversary, shift, radius, seed)
    return inst


def _solver_config(args) -> SolverConfig:
    return SolverConfig(step_size=args.step_size, max_iter=args.max_iter, c=args.approx)


def run_estimate(points, args, seed: int):
    if args.heavy_tailed:
        if args.algo not in BOUNDED_SOLVERS:
            raise ValueError(f"--heavy-tailed needs --algo in {BOUNDED_SOLVERS}")
        cfg = HeavyTailConfig(delta=args.delta, bucket_factor=args.bucket_factor,
                              solver=args.algo, lam=args.lam)
        return heavy_tailed_mean(points / args.sigma, cfg, seed), args.sigma
    lam = 2.0 if args.lam is None else args.lam
    return robust_mean(points, args.eps, args.sigma, args.algo, args.delta, seed, lam,
                       _solver_config(args)), 1.0


# ---------------------------------------------------------------- subcommands

def cmd_generate(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    inst = make_instance(args.generator, args.n, args.d, seed, args.eps, args.adversary,
                         args.shift, args.radius, args.dof, args.lam)
    out = Path(args.out)
    side = Path(args.sidecar) if args.sidecar else sidecar_path(out)
    try:
        write_points(out, inst.points)
        side.write_text(dump_json(instance_sidecar(inst)))
    except OSError as exc:
        raise InputError(f"cannot write output: {exc.strerror}") from None
    return EXIT_OK


def cmd_estimate(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    points = read_points(args.input)
    side = None
    side_file = Path(args.sidecar) if args.sidecar else sidecar_path(args.input)
    if args.sidecar or side_file.exists():
        side = read_sidecar(side_file)
    start = time.perf_counter()
    rep, scale = run_estimate(points, args, seed)
    seconds = time.perf_counter() - start
    estimate = rep.estimate * scale
    error = None
    if side is not None and "true_mean" in side:
        truth = np.asarray(side["true_mean"], dtype=float)
        if truth.shape != estimate.shape:
            raise InputError("sidecar true_mean has the wrong dimension")
        error = float(np.linalg.norm(estimate - truth))
    report = {
        "algo": args.algo,
        "estimate": estimate.tolist(),
        "iterations": rep.iterations,
        "seconds": None if args.no_timing else seconds,
        "spectral_norm": rep.spectral_norm * scale ** 2,
        "error_vs_truth": error,
    }
    sys.stdout.write(dump_json(report))
    return EXIT_OK


def _parse_vector(text: str, d: int) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise InputError(f"cannot parse center {text!r}") from None
    if v.shape != (d,):
        raise InputError(f"center has {v.size} entries, data have dimension {d}")
    return v


def cmd_certify(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    points = read_points(args.input)
    d = points.shape[1]
    if args.center is not None:
        center = _parse_vector(args.center, d)
    else:
        side_file = Path(args.sidecar) if args.sidecar else sidecar_path(args.input)
        if not side_file.exists():
            raise InputError("give --center or a sidecar with true_mean")
        center = np.asarray(read_sidecar(side_file)["true_mean"], dtype=float)
        if center.shape != (d,):
            raise InputError("sidecar true_mean has the wrong dimension")
    cert = certify(points, center, args.lam, args.eps, args.draws, rng=seed)
    w = best_weights_for_direction(points, center, args.eps, cert.direction)
    report = {
        "center": center.tolist(),
        "lam": args.lam,
        "eps": args.eps,
        "verdict": cert.verdict,
        "worst_fraction": cert.violation,
        "worst_direction": cert.direction.tolist(),
        "spectral_objective": spectral_objective(points, center, w),
    }
    sys.stdout.write(dump_json(report))
    return EXIT_OK


def _parse_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"cannot parse list {text!r}") from None


def bench_rows(args, base_seed: int):
    levels = _parse_list(args.levels)
    rows = []
    for level in levels:
        for trial in range(args.trials):
            seed = base_seed + trial
            eps = 0.0 if args.heavy_tailed else level
            inst = make_instance(args.generator, args.n, args.d, seed, eps, args.adversary,
                                 args.shift, args.radius, args.dof)
            run_args = argparse.Namespace(**vars(args))
            if args.heavy_tailed:
                run_args.delta = level
            else:
                run_args.eps = level
            start = time.perf_counter()
            try:
                rep, scale = run_estimate(inst.points, run_args, seed)
                err = float(np.linalg.norm(rep.estimate * scale - inst.true_mean))
                iters = rep.iterations
            except PromiseViolation:
                err, iters = float("nan"), -1
            secs = time.perf_counter() - start
            rows.append((trial, args.algo, level, err, iters, secs))
    return levels, rows


def cmd_bench(args) -> int:
    base = default_seed() if args.seed is None else args.seed
    if args.trials < 1:
        raise InputError("--trials must be at least 1")
    levels, rows = bench_rows(args, base)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "algo", "level", "error", "iterations", "seconds"])

    def fmt_secs(s):
        return "" if args.no_timing else repr(s)

    for trial, algo, level, err, iters, secs in rows:
        w.writerow([trial, algo, repr(level), repr(err), iters, fmt_secs(secs)])
    for level in levels:
        sel = [r for r in rows if r[2] == level]
        errs = np.array([r[3] for r in sel])
        its = np.array([r[4] for r in sel], dtype=float)
        secs = np.array([r[5] for r in sel])
        for name, q in (("median", 50), ("p95", 95)):
            w.writerow([name, args.algo, repr(level), repr(float(np.percentile(errs, q))),
                        repr(float(np.percentile(its, q))),
                        fmt_secs(float(np.percentile(secs, q)))])
    text = buf.getvalue()
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise InputError(f"cannot write output: {exc.strerror}") from None
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_instance_flags(p) -> None:
    p.add_argument("--generator", choices=["gaussian", "student-t", "planted"], default="gaussian")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--adversary", choices=["cluster", "scatter", "mirror"], default="cluster")
    p.add_argument("--shift", type=float, default=10.0, help="adversary distance along e1")
    p.add_argument("--radius", type=float, default=1.0, help="scatter ball radius")
    p.add_argument("--dof", type=float, default=3.0, help="Student-t degrees of freedom")


def _add_solver_flags(p) -> None:
    p.add_argument("--algo", choices=list(ALL_SOLVERS), default="mwu")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=None, help="promise level override")
    p.add_argument("--heavy-tailed", action="store_true", help="bucketed heavy-tailed pipeline")
    p.add_argument("--bucket-factor", type=float, default=8.0)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--step-size", type=float, default=None)
    p.add_argument("--approx", type=float, default=None, help="eigenvector approximation factor c")
    p.add_argument("--no-timing", action="store_true", help="omit wall-clock values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reweigh", description="Robust mean estimation by spectral sample reweighing.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic data CSV and JSON sidecar")
    _add_instance_flags(g)
    g.add_argument("--eps", type=float, default=0.0)
    g.add_argument("--lam", type=float, default=2.0, help="promise level for --generator planted")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", required=True)
    g.add_argument("--sidecar", default=None)
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("estimate", help="estimate the mean of a data CSV")
    e.add_argument("--input", required=True)
    e.add_argument("--sidecar", default=None)
    e.add_argument("--eps", type=float, default=0.1)
    e.add_argument("--seed", type=int, default=None)
    _add_solver_flags(e)
    e.set_defaults(func=cmd_estimate)

    c = sub.add_parser("certify", help="check a candidate center")
    c.add_argument("--input", required=True)
    c.add_argument("--sidecar", default=None)
    c.add_argument("--center", default=None, help="comma-separated coordinates")
    c.add_argument("--lam", type=float, required=True)
    c.add_argument("--eps", type=float, default=0.1)
    c.add_argument("--draws", type=int, default=5000)
    c.add_argument("--seed", type=int, default=None)
    c.set_defaults(func=cmd_certify)

    b = sub.add_parser("bench", help="repeat generate+estimate over seeds")
    _add_instance_flags(b)
    _add_solver_flags(b)
    b.add_argument("--levels", default="0.1", help="comma-separated eps (or delta with --heavy-tailed)")
    b.add_argument("--trials", type=int, default=10)
    b.add_argument("--seed", type=int, default=None)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench, eps=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PromiseViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROMISE
    except (ValueError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
