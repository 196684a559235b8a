"""Command-line interface: ``fastmm <subcommand> ...``.

Exit status is 0 on success, 1 when a verification or check fails and 2 on
usage errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import analysis, bench, catalog, codegen, composer, graph_ir, verifier
from .core import naive_multiply
from .executor import recursive_multiply

ERROR_HEADER = "n,chain,trials,seed,dist,max_rel_error,median_rel_error"


class UsageError(Exception):
    pass


def _chain(text: str):
    try:
        return catalog.parse_chain(text)
    except (KeyError, OSError, catalog.TripleFormatError) as exc:
        raise UsageError(str(exc)) from None


def _triple_arg(args):
    if getattr(args, "algo", None):
        try:
            return catalog.read_triple(args.algo)
        except OSError as exc:
            raise UsageError(str(exc)) from None
    if getattr(args, "builtin", None):
        try:
            return catalog.builtin(args.builtin)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    return None


def cmd_list(args) -> int:
    for name in catalog.builtin_names():
        t = catalog.builtin(name)
        print(f"{name}\tp={t.p}\trank={t.rank}")
    return 0


def cmd_verify(args) -> int:
    t = _triple_arg(args)
    if t is None:
        raise UsageError("verify needs --algo FILE or --builtin NAME")
    report = verifier.brent_check(t, args.mode, seed=args.seed, trials=args.trials)
    status = "PASS" if report.passed else "FAIL"
    print(f"{status} {t.name}: p={t.p} rank={t.rank} mode={report.mode} "
          f"checked={report.checked} violations={report.total_violations}")
    for v in report.violations:
        where = f"x={v.x} y={v.y} z={v.z}" if v.x is not None else f"z={v.z}"
        print(f"  {where} expected={v.expected} got={v.got}")
    for note in catalog.validation_report(t):
        print(f"  note: {note}")
    return 0 if report.passed else 1


def cmd_compose(args) -> int:
    chain = _chain(args.chain)
    if not chain:
        raise UsageError("compose needs a non-empty --chain")
    t = composer.chain_flatten(chain)
    t = t.renamed(args.name or f"chain-{catalog.chain_label(chain)}")
    text = catalog.save_triple(t)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {t.name}: p={t.p} rank={t.rank} -> {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _graph(args):
    if args.classical is not None:
        g = graph_ir.build_classical_graph(args.classical)
    else:
        t = _triple_arg(args)
        if t is None and getattr(args, "chain", None):
            chain = _chain(args.chain)
            t = composer.chain_flatten(chain) if chain else None
            if t is None:
                g = graph_ir.build_classical_graph(1)
                return graph_ir.schedule(g, args.schedule) if args.schedule else g
        if t is None:
            raise UsageError("need --algo FILE, --builtin NAME or --classical P")
        g = graph_ir.build_bilinear_graph(t)
    return graph_ir.schedule(g, args.schedule) if args.schedule else g


def cmd_print(args) -> int:
    sys.stdout.write(graph_ir.pretty_print(_graph(args)))
    return 0


def cmd_run(args) -> int:
    chain = _chain(args.chain)
    rng = np.random.default_rng(args.seed)
    A, B = analysis.random_operands(rng, args.n, args.dist)
    C, stats = recursive_multiply(chain, A, B, cutoff=args.cutoff, strategy=args.schedule)
    print(f"chain={catalog.chain_label(chain)} n={args.n} cutoff={args.cutoff}")
    print(f"base_multiplies={stats.base_multiplies} block_multiplies={stats.block_multiplies} "
          f"block_adds={stats.block_adds} element_adds={stats.element_adds} "
          f"scalings={stats.scalings} peak_workspace_elements={stats.peak_workspace_elements}")
    if args.check:
        err = float(analysis.relative_error(C, naive_multiply(A, B)).max())
        ok = err == 0.0 if args.dist == "integer" else err <= args.tol
        print(f"check: max_rel_error={err:.3e} {'OK' if ok else 'FAILED'}")
        return 0 if ok else 1
    return 0


def cmd_model(args) -> int:
    chain = _chain(args.chain)
    report = analysis.count_model(chain, args.n, args.cutoff, args.schedule)
    if args.header:
        print(analysis.CostReport.CSV_HEADER)
    print(report.csv_row())
    return 0


def cmd_error(args) -> int:
    chain = _chain(args.chain)
    worst, median = analysis.error_profile(chain, args.n, args.trials, args.seed, args.dist, args.cutoff)
    if args.header:
        print(ERROR_HEADER)
    print(f"{args.n},{catalog.chain_label(chain)},{args.trials},{args.seed},{args.dist},{worst:.6e},{median:.6e}")
    return 0


def cmd_codegen(args) -> int:
    g = _graph(args)
    if g.schedule is None:
        g = graph_ir.schedule(g, "fused")
    text = codegen.emit_callseq(g, codegen.EmitConfig(dialect=args.dialect), n=args.n)
    if args.output:
        with open(args.output, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    chains = [c for c in args.chains.split(",") if c.strip()]
    for c in chains:
        _chain(c)
    # skipped pairs are reported on stderr by the bench logger
    text = bench.bench_run(sizes, chains, args.cutoff, args.reps, args.seed, args.check)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fastmm", description="Fast matrix multiplication workbench.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("list", help="list built-in algorithms")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("verify", help="prove a triple correct (Brent equations)")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--algo", metavar="FILE")
    src.add_argument("--builtin", metavar="NAME")
    p.add_argument("--mode", choices=["exhaustive", "sampled"], default=None)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compose", help="flatten a chain into one triple (Kronecker product)")
    p.add_argument("--chain", required=True, help="e.g. 2,3 or 2x3 or strassen-p2,laderman-p3")
    p.add_argument("-o", "--out", metavar="FILE")
    p.add_argument("--name")
    p.set_defaults(func=cmd_compose)

    def graph_source(p):
        src = p.add_mutually_exclusive_group()
        src.add_argument("--algo", metavar="FILE")
        src.add_argument("--builtin", metavar="NAME")
        src.add_argument("--classical", type=int, metavar="P")
        src.add_argument("--chain")
        p.add_argument("--schedule", choices=graph_ir.STRATEGIES)

    p = sub.add_parser("print", help="print the block program of an algorithm")
    graph_source(p)
    p.set_defaults(func=cmd_print)

    p = sub.add_parser("run", help="multiply random matrices with a chain and report counters")
    p.add_argument("--chain", default="")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cutoff", type=int, default=1)
    p.add_argument("--schedule", choices=graph_ir.STRATEGIES, default="fused")
    p.add_argument("--dist", choices=analysis.DISTRIBUTIONS, default="uniform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--check", action="store_true")
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("model", help="closed-form counts as one CSV row")
    p.add_argument("--chain", default="")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cutoff", type=int, default=1)
    p.add_argument("--schedule", choices=graph_ir.STRATEGIES, default="fused")
    p.add_argument("--header", action="store_true")
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("error", help="rounding error against the classical oracle as one CSV row")
    p.add_argument("--chain", default="")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dist", choices=analysis.DISTRIBUTIONS, default="uniform")
    p.add_argument("--cutoff", type=int, default=1)
    p.add_argument("--header", action="store_true")
    p.set_defaults(func=cmd_error)

    p = sub.add_parser("codegen", help="emit a BLAS-style C call sequence")
    graph_source(p)
    p.add_argument("--n", type=int)
    p.add_argument("--dialect", choices=codegen.DIALECTS, default="c-blas")
    p.add_argument("-o", "--output", metavar="FILE")
    p.set_defaults(func=cmd_codegen)

    p = sub.add_parser("bench", help="time chains against the classical baseline (CSV)")
    p.add_argument("--sizes", required=True, help="comma-separated sizes")
    p.add_argument("--chains", default="2", help="comma-separated chains, factors joined by x (e.g. 2,2x2,3x2)")
    p.add_argument("--cutoff", type=int, default=64)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", metavar="FILE")
    p.add_argument("--check", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fastmm: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, catalog.TripleFormatError, graph_ir.GraphError) as exc:
        print(f"fastmm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
