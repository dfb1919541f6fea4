"""Command-line front end: ``mfic compress|solve|bench|gen``."""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import io as mio
from .compression import (
    CompressionConfig,
    aggregate_stats,
    compress_table,
    compression_stats,
)
from .model import Instance
from .propagation import StrMfic
from .search import SolveConfig, make_propagators, solve

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_UNSAT = 10
EXIT_LIMIT = 20


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive_float(s: str) -> float:
    v = float(s)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {s}")
    return v


def _positive_int(s: str) -> int:
    v = int(s)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {s}")
    return v


def _add_compression_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k-ratio", type=float, default=None, help="default 0.4")
    p.add_argument("--smin-strategy", choices=("min", "avg"), default=None, help="default avg")
    p.add_argument("--smin", type=int, default=None, help="fixed S_min; skips the top-k search")
    p.add_argument("--metric", choices=("area", "savings"), default="area")
    p.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mfic", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("compress", help="compress every table of an instance")
    p.add_argument("input")
    p.add_argument("-o", "--output")
    p.add_argument("--stats", action="store_true", help="one stats line per constraint on stderr")
    _add_compression_flags(p)

    p = sub.add_parser("solve", help="solve an instance with MAC search")
    p.add_argument("input")
    p.add_argument("--prop", choices=("str2", "str-mfic"), required=True)
    p.add_argument("--all", action="store_true", help="count every solution")
    p.add_argument("--timeout", type=_positive_float)
    p.add_argument("--nodes", type=_positive_int)
    p.add_argument("--var-heuristic", choices=("min-dom", "lex"), default="min-dom")
    _add_compression_flags(p)

    p = sub.add_parser("bench", help="run instances under each propagator, write CSV")
    p.add_argument("inputs", nargs="+", help="instance files or directories of *.json")
    p.add_argument("--out", required=True, help="CSV path, '-' for stdout")
    p.add_argument("--props", default="str2,str-mfic")
    p.add_argument("--all", action="store_true")
    p.add_argument("--timeout", type=_positive_float)
    p.add_argument("--nodes", type=_positive_int)
    _add_compression_flags(p)

    p = sub.add_parser("gen", help="generate a random instance")
    p.add_argument("--vars", type=_positive_int, required=True)
    p.add_argument("--dom", type=_positive_int, required=True)
    p.add_argument("--arity", type=_positive_int, required=True)
    p.add_argument("--constraints", type=int, required=True)
    p.add_argument("--tuples", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    return parser


def _compression_config(args) -> CompressionConfig:
    if args.smin is not None and (args.k_ratio is not None or args.smin_strategy is not None):
        raise _Usage("--smin excludes --k-ratio and --smin-strategy")
    return CompressionConfig(
        k_ratio=0.4 if args.k_ratio is None else args.k_ratio,
        smin_strategy=args.smin_strategy or "avg",
        metric=args.metric,
        fixed_smin=args.smin,
    )


def _compress_all(inst: Instance, cfg: CompressionConfig, jobs: int):
    if jobs <= 1 or len(inst.constraints) <= 1:
        return [compress_table(c, cfg) for c in inst.constraints]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda c: compress_table(c, cfg), inst.constraints))


def _emit(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def _read_instance(path: str) -> Instance:
    return mio.parse_instance(Path(path).read_text(encoding="utf-8"))


def cmd_compress(args) -> int:
    inst = _read_instance(args.input)
    cfg = _compression_config(args)
    cts = _compress_all(inst, cfg, args.jobs)
    _emit(mio.write_compressed(cts, inst), args.output)
    if args.stats:
        for i, (c, ct) in enumerate(zip(inst.constraints, cts)):
            s = compression_stats(c, ct)
            print(
                f"c{i}: tuples={s.n_tuples} c-tup={s.c_tup_pct:.2f}% c-rate={s.c_rate_pct:.2f}% "
                f"|M|={s.n_itemsets} |u|={s.avg_len:.2f} freq(u)={s.avg_freq:.2f}",
                file=sys.stderr,
            )
    return EXIT_OK


def _solve_config(args, prop: str) -> SolveConfig:
    return SolveConfig(
        propagator=prop,
        var_heuristic=getattr(args, "var_heuristic", "min-dom"),
        mode="count-all" if args.all else "first",
        node_limit=args.nodes,
        time_limit=args.timeout,
        compression=_compression_config(args),
        keep_solutions=not args.all,
    )


def _props_for(inst: Instance, cfg: SolveConfig, jobs: int):
    if cfg.propagator == "str-mfic":
        cts = _compress_all(inst, cfg.compression, jobs)
        return [StrMfic(ct) for ct in cts], cts
    return make_propagators(inst, cfg), None


def cmd_solve(args) -> int:
    inst = _read_instance(args.input)
    cfg = _solve_config(args, args.prop)
    props, _ = _props_for(inst, cfg, args.jobs)
    res = solve(inst, cfg, props)
    st = res.stats
    print(f"status: {res.status}")
    if args.all:
        print(f"{st.n_solutions} solutions")
    elif res.solutions:
        names = inst.var_names()
        print("solution: " + " ".join(f"{n}={v}" for n, v in zip(names, res.solutions[0])))
    print(
        f"nodes={st.nodes} backtracks={st.backtracks} filter_calls={st.filter_calls} "
        f"removals={st.removals} time={st.wall_time:.3f}s"
    )
    if res.status == "unsat":
        return EXIT_UNSAT
    if res.status == "limit-reached":
        return EXIT_LIMIT
    return EXIT_OK


def _bench_files(inputs: Sequence[str]) -> list[Path]:
    files: list[Path] = []
    for s in inputs:
        p = Path(s)
        files.extend(sorted(p.glob("*.json")) if p.is_dir() else [p])
    return files


def cmd_bench(args) -> int:
    props = [s.strip() for s in args.props.split(",") if s.strip()]
    for prop in props:
        if prop not in ("str2", "str-mfic"):
            raise _Usage(f"unknown propagator {prop!r}")
    rows = []
    for path in _bench_files(args.inputs):
        inst = _read_instance(str(path))
        for prop in props:
            cfg = _solve_config(args, prop)
            t0 = time.perf_counter()
            built, cts = _props_for(inst, cfg, args.jobs)
            res = solve(inst, cfg, built)
            elapsed = time.perf_counter() - t0
            cstats = None
            if cts is not None:
                cstats = aggregate_stats(
                    compression_stats(c, ct) for c, ct in zip(inst.constraints, cts)
                )
            rows.append(
                mio.StatsRow(
                    path.stem, prop, cstats, res.status != "limit-reached", res.stats.nodes, elapsed
                )
            )
    _emit(mio.write_stats_csv(rows), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    params = mio.GenParams(
        args.vars, args.dom, args.arity, args.constraints, args.tuples, args.seed
    )
    _emit(mio.write_instance(mio.gen_random(params)), args.output)
    return EXIT_OK


COMMANDS = {"compress": cmd_compress, "solve": cmd_solve, "bench": cmd_bench, "gen": cmd_gen}


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.cmd](args)
    except (_Usage, mio.ParseError, mio.Infeasible, ValueError, OSError) as exc:
        print(f"mfic {args.cmd}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"mfic {args.cmd}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
