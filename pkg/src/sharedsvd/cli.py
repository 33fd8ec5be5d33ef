"""Command-line interface.

Subcommands: ``simulate`` (Monte Carlo presets), ``estimate`` (run one
estimator on CSV matrices), ``trace`` (shared-vector identification),
``phase`` (phase-diagram grid export), ``eval-embedding`` (clustering
quality metrics). Exit codes: 0 success, 1 contract/parse error,
2 numerical failure. All randomness is controlled by ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import io as sio
from .exceptions import ContractError, NumericalError, ParseError
from .estimators import average_svd, individual_svd, select_svd, stack_svd
from .harness import SimConfig, run_experiment
from .metrics import eval_embedding
from .theory import phase_grid, write_phase_svg
from .tracing import estimate_counts, pair_distances, shared_svd, trace_shared


def _split_csv_list(text: str) -> list[str]:
    return [part for part in (p.strip() for p in text.split(",")) if part]


def _cmd_simulate(args) -> int:
    estimators = tuple(_split_csv_list(args.estimators)) if args.estimators else ()
    cfg = SimConfig(preset=args.preset, row=args.row, trials=args.trials,
                    base_seed=args.seed, estimators=estimators,
                    loss_norm=args.loss_norm, workers=args.workers)
    report = run_experiment(cfg)
    sio.save_report(args.out, report)
    for name, stats in report.rows.items():
        print(f"{name}: mean={stats.mean:.6g} std={stats.std:.6g} "
              f"trials={report.trials} flagged={stats.flagged}")
    print(f"wrote {args.out} ({report.elapsed_s:.2f}s)")
    return 0


def _cmd_estimate(args) -> int:
    ys = [sio.load_matrix(p) for p in _split_csv_list(args.inputs)]
    method = args.method
    if method == "stack":
        est = stack_svd(ys, _need_rank(args))
    elif method == "individual":
        if len(ys) != 1:
            raise ContractError("method 'individual' takes exactly one input matrix")
        est = individual_svd(ys[0], _need_rank(args))
    elif method == "average":
        est = average_svd(ys, _need_rank(args))
    elif method == "select":
        if not args.indices:
            raise ContractError("method 'select' needs --indices")
        est = select_svd(ys, [int(i) for i in _split_csv_list(args.indices)])
    elif method == "shared":
        ranks = [args.rank] * len(ys) if args.rank else None
        est = shared_svd(ys, ranks=ranks)
    else:
        raise ContractError(f"unknown method {method!r}")
    sio.save_matrix(args.out, est.frame)
    idx = "" if est.indices is None else f" indices={','.join(map(str, est.indices))}"
    print(f"{est.method} estimate: {est.frame.shape[0]}x{est.frame.shape[1]}{idx} -> {args.out}")
    return 0


def _need_rank(args) -> int:
    if not args.rank:
        raise ContractError(f"method {args.method!r} needs --rank")
    return args.rank


def _cmd_trace(args) -> int:
    y1 = sio.load_matrix(_split_csv_list(args.inputs)[0])
    y2 = sio.load_matrix(_split_csv_list(args.inputs)[1])
    r1, r2 = args.rank_1, args.rank_2
    k1, k2 = args.k1, args.k2
    if (k1 is None) != (k2 is None):
        raise ContractError("give both --k1 and --k2 or neither")
    if k1 is None:
        d1, d2 = pair_distances(y1, y2, r1, r2)
        k1, k2 = estimate_counts(d1, d2)
    r = min(r1 - k1, r2 - k2)
    if r < 1:
        raise ContractError(f"inferred shared rank {r} < 1 (k1={k1}, k2={k2})")
    out = trace_shared(y1, y2, k1, k2, r)
    sio.save_json(args.out, out.to_json_dict())
    print(f"k1={k1} k2={k2} r={r} shared positions={list(out.shared_index_estimate)}"
          + (f" flags={list(out.flags)}" if out.flags else ""))
    return 0


def _cmd_phase(args) -> int:
    try:
        lo, hi, steps = args.grid.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise ContractError("--grid must look like MIN:MAX:STEPS") from None
    if steps < 2 or hi <= lo or lo < 0:
        raise ContractError("--grid needs MIN >= 0, MAX > MIN, STEPS >= 2")
    values = np.linspace(lo, hi, steps)
    rows = phase_grid(args.n, args.p1, args.p2, values)
    import csv

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["snr1", "snr2", "region"])
        w.writerows(rows)
    if args.svg:
        write_phase_svg(args.svg, rows)
    print(f"wrote {len(rows)} grid cells to {args.out}"
          + (f" and {args.svg}" if args.svg else ""))
    return 0


def _cmd_eval_embedding(args) -> int:
    emb = sio.load_matrix(args.embedding)
    labels = sio.load_labels(args.labels)
    report = eval_embedding(emb, labels, neighborhood=args.neighborhood)
    sio.save_json(args.out, report.to_json_dict())
    print(json.dumps(report.to_json_dict()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sharedsvd",
                                     description="Shared singular subspace estimation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a Monte Carlo preset")
    p.add_argument("--preset", required=True, choices=["table1", "table2", "table3"])
    p.add_argument("--row", type=int, default=None, help="preset row (1-based)")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimators", default="", help="comma list, e.g. stack,average")
    p.add_argument("--loss-norm", default="spectral", choices=["spectral", "frobenius_squared"])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="estimate a shared subspace from CSV matrices")
    p.add_argument("--inputs", required=True, help="comma list of CSV paths")
    p.add_argument("--method", required=True,
                   choices=["stack", "individual", "average", "shared", "select"])
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--indices", default="", help="1-based stacked positions for 'select'")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("trace", help="identify shared singular vectors of two matrices")
    p.add_argument("--inputs", required=True, help="two CSV paths, comma separated")
    p.add_argument("--rank-1", type=int, required=True, dest="rank_1")
    p.add_argument("--rank-2", type=int, required=True, dest="rank_2")
    p.add_argument("--k1", type=int, default=None)
    p.add_argument("--k2", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_trace)

    p = sub.add_parser("phase", help="export the SNR phase diagram of a dimension triple")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p1", type=int, required=True)
    p.add_argument("--p2", type=int, required=True)
    p.add_argument("--grid", required=True, help="MIN:MAX:STEPS for both SNR axes")
    p.add_argument("--out", required=True)
    p.add_argument("--svg", default=None)
    p.set_defaults(func=_cmd_phase)

    p = sub.add_parser("eval-embedding", help="clustering quality metrics of an embedding")
    p.add_argument("--embedding", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--neighborhood", type=int, default=30)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_eval_embedding)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (ContractError, ParseError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
