"""Command-line surface: simulate, verify, couple, landscape, gue, analyze.

Exit codes: 0 success, 1 usage error, 2 verification/acceptance failure,
3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import gue as gue_mod
from .harness import (ExperimentConfig, default_workers, run_analyze,
                      run_couple, run_simulate, run_verify)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _int_list(text):
    return tuple(int(x) for x in text.split(","))


def _pair_list(text):
    """'x1,x2,y1,y2;x1,x2,y1,y2' -> tuple of 4-tuples."""
    pairs = []
    for chunk in text.split(";"):
        vals = tuple(float(v) for v in chunk.split(","))
        if len(vals) != 4:
            raise argparse.ArgumentTypeError("each pair needs 4 coordinates")
        pairs.append(vals)
    return tuple(pairs)


def _add_common(p):
    p.add_argument("--env", default="beta:1,1", help="environment spec, e.g. beta:1,1")
    p.add_argument("--n", type=_int_list, default=(1000,), help="comma list of lattice sizes")
    p.add_argument("--a", type=float, default=0.3, help="rescaling exponent")
    p.add_argument("--replicas", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=default_workers())
    p.add_argument("--out", default="records.jsonl")
    p.add_argument("--resume", action="store_true")


def build_parser() -> _Parser:
    p = _Parser(prog="kpzlab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="Monte Carlo replicas at axis or fixed-k targets")
    _add_common(sp)
    sp.add_argument("--k", type=int, default=None,
                    help="fixed transverse row (switches to fixed-k mode)")
    sp.add_argument("--functionals", default="S,G",
                    help="comma subset of S,G,L to record")

    vp = sub.add_parser("verify", help="exact inequality battery")
    vp.add_argument("--env", default=None, help="single family; default: full battery")
    vp.add_argument("--seed", type=int, default=0)
    vp.add_argument("--envs-per-family", type=int, default=100)
    vp.add_argument("--max-steps", type=int, default=12)
    vp.add_argument("--sandwich-instances", type=int, default=10_000)
    vp.add_argument("--records", default=None, help="also recheck a stored record file")
    vp.add_argument("--out", default=None, help="write the JSON report here")

    cp = sub.add_parser("couple", help="max |S-L| over the coupling region")
    _add_common(cp)
    cp.add_argument("--t", type=float, default=1.0, help="region dilation")
    cp.add_argument("--origins", type=int, default=32, help="sampled origin count")

    lp = sub.add_parser("landscape", help="rescaled values at plane-point pairs")
    _add_common(lp)
    lp.add_argument("--pairs", type=_pair_list, default=(((0, 0, 0, 1),)),
                    help="semicolon list of x1,x2,y1,y2 (requires x2 < y2)")

    gp = sub.add_parser("gue", help="build reference distributions")
    gp.add_argument("--kind", choices=("tw", "lambda", "normal"), required=True)
    gp.add_argument("--matrix-size", type=int, default=2000,
                    help="n for tw, k for lambda")
    gp.add_argument("--samples", type=int, default=100_000)
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--out", default="reference.jsonl")

    ap = sub.add_parser("analyze", help="KS/moment summary of recorded statistics")
    ap.add_argument("--records", required=True)
    ap.add_argument("--reference", default=None)
    ap.add_argument("--statistic", choices=("t1i", "t1ii", "t1iii", "landscape"),
                    required=True)
    ap.add_argument("--threshold", type=float, default=None)
    ap.add_argument("--csv", default=None, help="quantile CSV output path")
    ap.add_argument("--out", default=None, help="write the JSON summary here")
    return p


def _emit(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            config = ExperimentConfig(
                env=args.env, n_list=args.n, a=args.a, replicas=args.replicas,
                seed=args.seed, workers=args.workers, out=args.out,
                mode="fixed_k" if args.k is not None else "axis",
                k=args.k if args.k is not None else 1,
                functionals=tuple(args.functionals.split(",")))
            _emit(run_simulate(config, resume=args.resume))
            return 0
        if args.command == "landscape":
            config = ExperimentConfig(
                env=args.env, n_list=args.n, a=args.a, replicas=args.replicas,
                seed=args.seed, workers=args.workers, out=args.out,
                mode="landscape", pairs=args.pairs)
            _emit(run_simulate(config, resume=args.resume))
            return 0
        if args.command == "verify":
            report = run_verify(env=args.env, seed=args.seed,
                                envs_per_family=args.envs_per_family,
                                max_steps=args.max_steps,
                                sandwich_instances=args.sandwich_instances,
                                records_path=args.records)
            _emit(report, args.out)
            return 2 if report["failed"] else 0
        if args.command == "couple":
            config = ExperimentConfig(
                env=args.env, n_list=args.n, a=args.a, replicas=args.replicas,
                seed=args.seed, workers=args.workers, out=args.out,
                couple_t=args.t, couple_origins=args.origins)
            summary = run_couple(config)
            _emit(summary, args.out if args.out != "records.jsonl" else None)
            return 2 if summary["failed"] else 0
        if args.command == "gue":
            if args.kind == "tw":
                ref = gue_mod.tw_reference(args.matrix_size, args.samples, args.seed)
            elif args.kind == "lambda":
                ref = gue_mod.lambda_k_reference(args.matrix_size, args.samples,
                                                 args.seed)
            else:
                ref = gue_mod.normal_reference(args.samples, args.seed)
            ref.save(args.out)
            _emit({"kind": ref.kind, "params": ref.params, "out": args.out})
            return 0
        if args.command == "analyze":
            summary = run_analyze(args.records, args.reference, args.statistic,
                                  threshold=args.threshold, csv_out=args.csv)
            _emit(summary, args.out)
            if summary.get("passed") is False:
                return 2
            return 0
        raise ValueError(f"unknown command {args.command!r}")
    except SystemExit:
        raise
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
