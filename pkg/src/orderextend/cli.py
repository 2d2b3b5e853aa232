"""Command-line entry point: ``orderextend {generate,complete,experiment,eval}``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

import numpy as np

from . import io
from .completion import KAPPA, LOCAL, order_and_extend
from .experiment import ALGORITHMS, ExperimentConfig, format_rows, run_experiment
from .matrix import (ObservedMatrix, critical_mask_size, generate_low_rank,
                     rel_error, sample_random_mask)
from .oracle import GroundTruthOracle

log = logging.getLogger("orderextend")


def int_list(text: str) -> list[int]:
    """``"0,5,10"`` or ranges like ``"0-4"`` (inclusive), mixed freely."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        if sep and lo:
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def cmd_generate(args) -> int:
    T = generate_low_rank(args.rows, args.cols, args.rank, args.noise, args.seed)
    io.save_dense(args.out, T)
    if args.obs_out:
        m0 = int(round(args.mask_frac * critical_mask_size(args.rows, args.cols, args.rank)))
        mask = sample_random_mask(args.rows, args.cols, m0, args.seed)
        io.save_observed(args.obs_out, ObservedMatrix.from_truth(T, mask))
    return 0


def cmd_complete(args) -> int:
    obs = io.load_observed(args.obs)
    truth = io.load_dense(args.truth)
    if truth.shape != obs.shape:
        raise SystemExit(f"truth is {truth.shape} but observations are {obs.shape}")
    oracle = GroundTruthOracle(truth, args.budget)
    rep = order_and_extend(obs, args.rank, args.theta, oracle, args.budget,
                           seed=args.seed, criterion=args.criterion)
    io.save_dense(args.out, rep.estimate)
    if args.query_log:
        io.save_query_log(args.query_log, rep.queries)
    print(f"queries_used {rep.queries_used}")
    print(f"rel_error {rel_error(truth, rep.estimate):.17g}")
    print(f"recovered_fraction {rep.recovered_fraction:.17g}")
    return 0


def cmd_experiment(args) -> int:
    truth = io.load_dense(args.truth)
    config = ExperimentConfig(rank=args.rank, budgets=int_list(args.budgets),
                              seeds=int_list(args.seeds),
                              algorithms=[a.strip() for a in args.algos.split(",") if a.strip()],
                              theta=args.theta, initial_mask_fraction=args.mask_frac)
    rows = run_experiment(truth, config, timing=args.timing)
    text = format_rows(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_eval(args) -> int:
    truth = io.load_dense(args.truth)
    est = io.load_dense(args.est)
    # unrecovered entries are written as zeros
    print(f"rel_error {rel_error(truth, est):.17g}")
    print(f"recovered_fraction {np.count_nonzero(est) / est.size:.17g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orderextend",
                                description="Active low-rank matrix completion.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random low-rank truth matrix")
    g.add_argument("--rows", type=int, required=True)
    g.add_argument("--cols", type=int, required=True)
    g.add_argument("--rank", type=int, required=True)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--obs-out", help="also write a random observed sample here")
    g.add_argument("--mask-frac", type=float, default=0.4,
                   help="sample size as a fraction of r(n1+n2-r) (with --obs-out)")
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("complete", help="complete observations, querying the truth")
    c.add_argument("--obs", required=True)
    c.add_argument("--truth", required=True)
    c.add_argument("--rank", type=int, required=True)
    c.add_argument("--theta", type=float, default=1.0)
    c.add_argument("--budget", type=int, default=0)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--criterion", choices=[LOCAL, KAPPA], default=LOCAL)
    c.add_argument("--out", required=True)
    c.add_argument("--query-log")
    c.set_defaults(func=cmd_complete)

    e = sub.add_parser("experiment", help="budget sweep over seeds and algorithms")
    e.add_argument("--truth", required=True)
    e.add_argument("--rank", type=int, required=True)
    e.add_argument("--theta", type=float, default=1.0)
    e.add_argument("--mask-frac", type=float, default=0.4)
    e.add_argument("--budgets", required=True)
    e.add_argument("--seeds", default="0")
    e.add_argument("--algos", default=",".join(ALGORITHMS[:2]))
    e.add_argument("--timing", action="store_true",
                   help="report wall times (otherwise nan, keeping output reproducible)")
    e.add_argument("--out")
    e.set_defaults(func=cmd_experiment)

    v = sub.add_parser("eval", help="error of an estimate against the truth")
    v.add_argument("--truth", required=True)
    v.add_argument("--est", required=True)
    v.set_defaults(func=cmd_eval)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        log.debug("failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
