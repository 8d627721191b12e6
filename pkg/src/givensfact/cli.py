"""Command-line driver: ``givensfact {factorize,planted,gft,apply}``.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from . import io
from .factorize import Algorithm, FactorizeConfig, FactorizeTrace, factorize
from .graphs import ConvergenceError, barabasi_albert, gft_experiment, load_edge_list
from .matrix import OpCounter
from .planted import (
    DEFAULT_K_GRID,
    approximation_experiment,
    density_samples,
    growth_experiment,
    resolve_k,
)
from .records import ExperimentRecord, write_records

log = logging.getLogger("givensfact")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class InputError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def write_trace_csv(path: str | Path, trace: FactorizeTrace) -> None:
    errors = dict(trace.error_checkpoints)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n_factors", "objective", "error"])
        for n, obj in enumerate(trace.objective_history):
            err = errors.get(n)
            w.writerow([n, format(obj, ".17g"), "" if err is None else format(err, ".17g")])


# ---------------------------------------------------------------------------


def cmd_factorize(args) -> int:
    path = Path(args.input)
    if io.is_sequence_file(path):
        u = io.load_sequence(path).materialize()
    else:
        u = io.load_matrix(path)
    cfg = FactorizeConfig(
        Algorithm(args.algorithm),
        max_factors=args.max_factors,
        eps=args.eps,
        seed=args.seed,
        checkpoint_stride=args.checkpoint_stride,
    )
    trace = factorize(u, cfg)
    out = Path(args.out)
    io.save_sequence(out, trace.sequence)
    trace_path = Path(args.trace) if args.trace else out.with_name(out.name + ".trace.csv")
    write_trace_csv(trace_path, trace)
    print(json.dumps({
        "algorithm": cfg.algorithm.value,
        "n_factors": trace.n_factors,
        "final_error": trace.final_error,
        "stop": trace.meta.get("stop"),
    }))
    return EXIT_OK


def cmd_planted(args) -> int:
    records: list[ExperimentRecord] = []
    tokens = args.k_grid
    for d in args.dims:
        for t in tokens:
            resolve_k(t, d)  # validate before any long run
    if args.experiment == "density":
        for d in args.dims:
            ks = [resolve_k(t, d) for t in tokens]
            records += density_samples(d, ks, args.samples, args.zero_tol, args.seed)
        write_records(args.out, records)
    elif args.experiment == "approximation":
        for d in args.dims:
            budget = d * (d - 1) // 2 if args.max_factors is None else args.max_factors
            configs = {
                name: FactorizeConfig(name, max_factors=budget, eps=args.stop_eps, checkpoint_stride=args.checkpoint_stride)
                for name in args.algorithms
            }
            for t in tokens:
                records += approximation_experiment(
                    d, resolve_k(t, d), args.samples, configs, args.seed, args.eps, k_label=t, timing=args.timing
                )
        write_records(args.out, records)
    else:
        records, fits = growth_experiment(args.dims, tokens, args.samples, args.eps, args.seed, args.timing)
        write_records(args.out, records)
        fit_path = Path(args.out).with_suffix(".fit.json")
        fit_path.write_text(json.dumps({"dims": args.dims, "eta": fits}, indent=2, sort_keys=True) + "\n")
        print(json.dumps(fits, sort_keys=True))
    log.info("wrote %d rows to %s", len(records), args.out)
    return EXIT_OK


def cmd_gft(args) -> int:
    if args.ba:
        n, m, seed = args.ba
        graph = barabasi_albert(n, m, rng_seed=seed)
        label = f"ba:n={n},m={m},seed={seed}"
    else:
        graph = load_edge_list(args.edge_list)
        seed = args.seed
        label = Path(args.edge_list).stem
    records = gft_experiment(graph, args.budget, args.algorithms, label=label, seed=seed, timing=args.timing)
    write_records(args.out, records)
    for rec in records:
        print(f"{rec.algorithm:12s} n_factors={rec.n_factors:6d} error={rec.error:.6f}")
    return EXIT_OK


def cmd_apply(args) -> int:
    seq = io.load_sequence(args.sequence)
    x = io.load_matrix(args.input, square=False)
    if x.shape[0] != seq.dim:
        raise InputError(f"input has {x.shape[0]} rows, sequence dimension is {seq.dim}")
    counter = OpCounter()
    t0 = time.perf_counter()
    y = seq.apply_transpose(x, counter) if args.transpose else seq.apply(x, counter)
    elapsed = time.perf_counter() - t0
    io.save_matrix(args.out, y)
    report = {"dim": seq.dim, "factors": len(seq), "updates": counter.updates, "columns": int(x.shape[1])}
    if args.timing:
        report["wall_time_ms"] = int(round(1000 * elapsed))
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------


def _ba_spec(text: str) -> tuple[int, int, int]:
    vals = _int_list(text)
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("--ba expects n,m,seed")
    return vals[0], vals[1], vals[2]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="givensfact", description="Approximate orthogonal matrices with Givens factors.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("factorize", help="factorize a matrix (or materialized sequence) file")
    f.add_argument("--input", required=True)
    f.add_argument("--algorithm", choices=[a.value for a in Algorithm], default="l1")
    f.add_argument("--max-factors", type=int, default=None, help="default d(d-1)/2")
    f.add_argument("--eps", type=float, default=0.1, help="stop once symnorm/sqrt(d) < eps")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--checkpoint-stride", type=int, default=25)
    f.add_argument("--out", required=True, help="sequence file to write")
    f.add_argument("--trace", default=None, help="trace CSV (default <out>.trace.csv)")
    f.set_defaults(func=cmd_factorize)

    pl = sub.add_parser("planted", help="K-planted experiments")
    pl.add_argument("--experiment", choices=["density", "approximation", "growth"], default="approximation")
    pl.add_argument("--dims", type=_int_list, default=[32, 64])
    pl.add_argument("--k-grid", type=_str_list, default=list(DEFAULT_K_GRID),
                    help="comma-separated K values; integers or expressions in d such as d/4, 2d, dlogd/2")
    pl.add_argument("--samples", type=int, default=10)
    pl.add_argument("--eps", type=float, default=0.1, help="N_eps threshold")
    pl.add_argument("--stop-eps", type=float, default=1e-10, help="factorizer stopping threshold")
    pl.add_argument("--algorithms", type=_str_list, default=["l1", "greedy", "elimination"])
    pl.add_argument("--max-factors", type=int, default=None)
    pl.add_argument("--checkpoint-stride", type=int, default=25)
    pl.add_argument("--zero-tol", type=float, default=1e-9)
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--timing", action="store_true", help="record wall times (breaks byte-identical output)")
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_planted)

    g = sub.add_parser("gft", help="approximate graph Fourier transform")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--ba", type=_ba_spec, help="Barabasi-Albert graph n,m,seed (n0 = m)")
    src.add_argument("--edge-list")
    g.add_argument("--budget", type=int, default=None, help="default n*log2(n)")
    g.add_argument("--algorithms", type=_str_list, default=["l1", "greedy", "jacobi"])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--timing", action="store_true")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gft)

    a = sub.add_parser("apply", help="apply a sequence file to a vector or matrix file")
    a.add_argument("--sequence", required=True)
    a.add_argument("--input", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--transpose", action="store_true", help="apply U_hat^T instead of U_hat")
    a.add_argument("--timing", action="store_true")
    a.set_defaults(func=cmd_apply)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ValueError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
