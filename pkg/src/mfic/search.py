"""MAC backtracking search over table constraints."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Literal as Kind, Optional

from .compression import CompressionConfig, compress_table
from .model import Instance, canonicalize
from .propagation import DomainState, Str2, StrMfic, build_watchers, propagate

TIME_CHECK_EVERY = 1024


@dataclass(frozen=True)
class SolveConfig:
    propagator: Kind["str2", "str-mfic"] = "str2"
    var_heuristic: Kind["min-dom", "lex"] = "min-dom"
    value_order: Kind["lex"] = "lex"
    mode: Kind["first", "count-all"] = "first"
    node_limit: Optional[int] = None
    time_limit: Optional[float] = None
    compression: CompressionConfig = field(default_factory=CompressionConfig)
    keep_solutions: bool = True

    def __post_init__(self) -> None:
        if self.propagator not in ("str2", "str-mfic"):
            raise ValueError(f"unknown propagator {self.propagator!r}")
        if self.var_heuristic not in ("min-dom", "lex"):
            raise ValueError(f"unknown variable heuristic {self.var_heuristic!r}")
        if self.value_order != "lex":
            raise ValueError(f"unknown value order {self.value_order!r}")
        if self.mode not in ("first", "count-all"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.node_limit is not None and self.node_limit <= 0:
            raise ValueError("node_limit must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass
class SolveStats:
    nodes: int = 0
    backtracks: int = 0
    filter_calls: int = 0
    removals: int = 0
    wall_time: float = 0.0
    n_solutions: int = 0


@dataclass
class SolveResult:
    status: Kind["sat", "unsat", "limit-reached"]
    solutions: list[tuple[int, ...]]
    stats: SolveStats


class _LimitReached(Exception):
    pass


def next_branch_var(doms: DomainState, cfg: SolveConfig = SolveConfig()) -> Optional[int]:
    best = None
    best_size = None
    for v in range(len(doms)):
        s = doms.size[v]
        if s <= 1:
            continue
        if cfg.var_heuristic == "lex":
            return v
        if best_size is None or s < best_size:
            best, best_size = v, s
    return best


def make_propagators(inst: Instance, cfg: SolveConfig):
    props = []
    for c in inst.constraints:
        table = canonicalize(c)
        if cfg.propagator == "str2":
            props.append(Str2(table))
        else:
            props.append(StrMfic(compress_table(table, cfg.compression)))
    return props


def solve(inst: Instance, cfg: SolveConfig = SolveConfig(), props=None) -> SolveResult:
    """Depth-first d-way labeling with GAC maintained at every node.

    ``props`` may carry prebuilt propagators (one per constraint, fresh
    state) so compression cost can be kept out of the solve.
    """
    start = time.perf_counter()
    stats = SolveStats()
    solutions: list[tuple[int, ...]] = []
    doms = DomainState.of(inst)
    if props is None:
        props = make_propagators(inst, cfg)
    watchers = build_watchers(p.scope for p in props)
    deadline = None if cfg.time_limit is None else start + cfg.time_limit

    def run(changed) -> bool:
        res = propagate(doms, props, watchers, changed)
        stats.filter_calls += res.filter_calls
        stats.removals += res.removals
        return not res.wipeout

    def save() -> None:
        doms.save_level()
        for p in props:
            p.save_level()

    def restore() -> None:
        for p in props:
            p.restore_level()
        doms.restore_level()

    def dfs() -> bool:
        var = next_branch_var(doms, cfg)
        if var is None:
            sol = tuple(doms.values(v)[0] for v in range(len(doms)))
            stats.n_solutions += 1
            if cfg.keep_solutions or cfg.mode == "first":
                solutions.append(sol)
            return cfg.mode == "first"
        for val in sorted(doms.values(var)):
            stats.nodes += 1
            if cfg.node_limit is not None and stats.nodes > cfg.node_limit:
                raise _LimitReached
            if deadline is not None and stats.nodes % TIME_CHECK_EVERY == 0:
                if time.perf_counter() > deadline:
                    raise _LimitReached
            save()
            doms.assign(var, val)
            if run([var]) and dfs():
                return True
            restore()
            stats.backtracks += 1
        return False

    status = "unsat"
    try:
        if run(None):
            dfs()
        if stats.n_solutions:
            status = "sat"
    except _LimitReached:
        status = "limit-reached"
    stats.wall_time = time.perf_counter() - start
    return SolveResult(status, solutions, stats)
