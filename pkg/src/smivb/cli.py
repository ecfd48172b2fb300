"""Command-line front end.

Exit codes: 0 success, 1 I/O failure, 2 invalid arguments or inputs.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import eds, io, pipeline
from .baselines import log_likelihood
from .model import (
    SAS_PRESETS,
    GridMismatchError,
    WaveGrid,
    build_sas_basis,
    check_same_grid,
    gamma_mixture_weights,
    radius_grid,
    sample_events,
    superpose,
    synth_eds_basis,
)

EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 1, 2


class UsageError(ValueError):
    pass


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg_float(text):
    v = float(text)
    if not math.isfinite(v) or v < 0:
        raise argparse.ArgumentTypeError(f"expected a finite value >= 0, got {text}")
    return v


def _gamma_part(text):
    try:
        mix, shape, scale = (float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("gamma part must be 'mix,shape,scale'") from None
    return (mix, shape, scale)


def _seed_range(text):
    """'3' -> [3]; '0-9' -> [0..9]; '1,4,7' -> [1, 4, 7]."""
    seeds = []
    for chunk in text.split(","):
        lo, sep, hi = chunk.partition("-")
        try:
            if sep:
                seeds.extend(range(int(lo), int(hi) + 1))
            else:
                seeds.append(int(lo))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad seed range {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed range")
    return seeds


def _sas_grid_args(p):
    p.add_argument("--q-min", type=float, default=0.1)
    p.add_argument("--q-max", type=float, default=5.0)
    p.add_argument("--q-count", type=_positive_int, default=200)
    p.add_argument("--r-step", type=float, default=0.2)
    p.add_argument("--r-count", type=_positive_int, default=300)


def _sas_basis(args):
    return build_sas_basis(
        WaveGrid.linear(args.q_min, args.q_max, args.q_count),
        radius_grid(args.r_step, args.r_count),
    )


def _eds_grid(channels, width=0.01):
    return WaveGrid(np.arange(1, channels + 1) * width)


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args):
    skip = {"func", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _finite_or_none(x):
    return x if math.isfinite(x) else None


# ---------------------------------------------------------------------------


def cmd_simulate_sas(args):
    if args.gamma:
        parts, preset = args.gamma, None
    else:
        preset = args.preset or "two-peak"
        parts = SAS_PRESETS[preset]
    basis = _sas_basis(args)
    truth = gamma_mixture_weights(basis.radii, parts)
    p = superpose(basis.normalized(), truth)
    counts = sample_events(p, args.events, args.seed)

    out = _out_dir(args.out)
    files = {
        "truth": out / "truth.csv",
        "basis": out / "basis.csv",
        "expected": out / "expected.csv",
        "spectrum": out / "spectrum.csv",
    }
    io.write_weights(files["truth"], truth)
    io.write_basis(files["basis"], basis)
    io.write_spectrum(files["expected"], basis.grid, args.events * p)
    io.write_spectrum(files["spectrum"], basis.grid, counts)

    summary = {
        "command": "simulate-sas",
        "preset": preset,
        "gamma_parts": [list(part) for part in parts],
        "events": args.events,
        "total_counts": int(counts.sum()),
        "seed": args.seed,
        "q": {"min": args.q_min, "max": args.q_max, "count": args.q_count},
        "radii": {"step": args.r_step, "count": args.r_count},
        "files": {k: v.name for k, v in files.items()},
    }
    sys.stdout.write(io.dumps(summary))
    return EXIT_OK


def cmd_infer(args):
    basis = io.read_basis(args.basis)
    smi = io.read_spectrum(args.spectrum)
    check_same_grid(smi.grid, basis.grid)
    if smi.total <= 0:
        raise UsageError("spectrum has no counts")

    if args.method == "svd" and (args.max_iter is not None or args.tol is not None):
        print("warning: --max-iter/--tol are ignored by --method svd", file=sys.stderr)
    max_iter = args.max_iter if args.max_iter is not None else 10_000
    tol = args.tol if args.tol is not None else 1e-9

    start = time.perf_counter()
    est = pipeline.estimate(args.method, smi, basis, args.alpha0, max_iter, tol)
    wall = time.perf_counter() - start

    ll = None
    if not est.weights.unconstrained:
        ll = _finite_or_none(log_likelihood(smi, basis.normalized(), est.weights))

    out = _out_dir(args.out)
    io.write_weights(out / "weights.csv", est.weights)
    report = {
        "command": "infer",
        "config": _config(args),
        "method": est.method,
        "iterations": est.iterations,
        "converged": est.converged,
        "final_delta": est.final_delta,
        "log_likelihood": ll,
        "unconstrained": est.weights.unconstrained,
        "total_counts": smi.total,
    }
    if args.method == "vb":
        report["alpha"] = est.extras["alpha"].tolist()
    elif args.method == "ml":
        trace = est.extras["trace"]
        report["log_likelihood_trace"] = trace.tolist()
        report["trace_monotone"] = bool(np.all(np.diff(trace) >= -1e-9))
    else:
        report["negative_count"] = est.extras["negative_count"]
    report["wall_time_s"] = wall
    io.write_json(out / "report.json", report)
    return EXIT_OK


def cmd_eval_sas(args):
    truth = io.read_weights(args.truth)
    inferred = io.read_weights(args.inferred)
    metrics = pipeline.sas_metrics(truth, inferred)
    text = io.dumps({"command": "eval-sas", "config": _config(args), **metrics})
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_eval_eds(args):
    basis = io.read_basis(args.basis)
    compounds = io.read_manifest(args.manifest)
    if not compounds:
        raise UsageError("manifest lists no compounds")
    trials = pipeline.evaluate_eds(
        basis,
        compounds,
        args.method,
        args.seeds,
        events=args.events,
        noise=args.noise,
        alpha0=args.alpha0,
        max_iter=args.max_iter,
        tol=args.tol,
        jobs=args.jobs,
    )
    score = eds.score_identifications(t.result for t in trials)

    header = ["compound", "seed", "truth", "predicted", "correct"]
    rows = [
        [
            t.compound,
            str(t.seed),
            " ".join(sorted(t.result.truth)),
            " ".join(sorted(t.result.predicted)),
            "1" if t.result.correct else "0",
        ]
        for t in trials
    ]
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(header)]
    lines = [
        f"method={args.method} events={args.events} noise={io.fmt(args.noise)} "
        f"seeds={args.seeds[0]}..{args.seeds[-1]}",
        "  ".join(h.ljust(w) for h, w in zip(header, widths)),
    ]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    lines.append(f"score {score}")
    table = "\n".join(lines) + "\n"

    if args.out:
        out = _out_dir(args.out)
        fh, w = io._writer(out / f"eds_{args.method}.csv")
        with fh:
            w.writerow(header)
            w.writerows(rows)
            w.writerow(["score", "", "", "", str(score)])
        (out / f"eds_{args.method}.txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return EXIT_OK


def cmd_build_basis(args):
    out = Path(args.out)
    if args.kind == "sas":
        if out.suffix != ".csv":
            out = _out_dir(out) / "basis.csv"
        else:
            out.parent.mkdir(parents=True, exist_ok=True)
        basis = _sas_basis(args)
        io.write_basis(out, basis)
        files = {"basis": out.name}
    else:
        out = _out_dir(out)
        basis = synth_eds_basis(args.elements, _eds_grid(args.channels), args.seed)
        io.write_basis(out / "basis.csv", basis)
        compounds = eds.synth_compounds(basis.labels, args.compounds, seed=args.seed)
        io.write_manifest(out / "manifest.csv", compounds)
        files = {"basis": "basis.csv", "manifest": "manifest.csv"}
    summary = {
        "command": "build-basis",
        "kind": args.kind,
        "components": basis.n_components,
        "grid_points": len(basis.grid),
        "files": files,
    }
    sys.stdout.write(io.dumps(summary))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="smivb", description="Variational Bayes decomposition of superimposed spectra."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-sas", help="simulate a sphere-ensemble SAS pattern")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(SAS_PRESETS))
    src.add_argument(
        "--gamma", type=_gamma_part, action="append", metavar="MIX,SHAPE,SCALE"
    )
    p.add_argument("--events", type=_positive_int, default=50_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    _sas_grid_args(p)
    p.set_defaults(func=cmd_simulate_sas)

    p = sub.add_parser("infer", help="decompose a spectrum against a basis")
    p.add_argument("--basis", required=True)
    p.add_argument("--spectrum", required=True)
    p.add_argument("--method", choices=pipeline.METHODS, default="vb")
    p.add_argument("--alpha0", type=_nonneg_float, default=1.0)
    p.add_argument("--max-iter", type=_positive_int, default=None)
    p.add_argument("--tol", type=_nonneg_float, default=None)
    p.add_argument("--seed", type=int, default=0, help="recorded only; inference is deterministic")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("eval-sas", help="compare inferred radius weights with the truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--inferred", required=True)
    p.add_argument("--out", default=None, help="optional JSON output file")
    p.set_defaults(func=cmd_eval_sas)

    p = sub.add_parser("eval-eds", help="score compound identification")
    p.add_argument("--basis", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--method", choices=pipeline.METHODS, default="vb")
    p.add_argument("--noise", type=_nonneg_float, default=0.0)
    p.add_argument("--events", type=_positive_int, default=10_000)
    p.add_argument("--seeds", type=_seed_range, default=[0])
    p.add_argument("--alpha0", type=_nonneg_float, default=1.0)
    p.add_argument("--max-iter", type=_positive_int, default=100)
    p.add_argument("--tol", type=_nonneg_float, default=0.0)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval_eds)

    p = sub.add_parser("build-basis", help="write a component basis")
    p.add_argument("kind", choices=("sas", "eds"))
    p.add_argument("--out", required=True)
    p.add_argument("--elements", type=_positive_int, default=20)
    p.add_argument("--channels", type=_positive_int, default=1024)
    p.add_argument("--compounds", type=_positive_int, default=10)
    p.add_argument("--seed", type=int, default=0)
    _sas_grid_args(p)
    p.set_defaults(func=cmd_build_basis)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, GridMismatchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
