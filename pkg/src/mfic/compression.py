"""Table compression with maximal frequent itemsets.

A table is split into entries (an itemset shared by several tuples plus the
sub-table of what remains of those tuples) and a default table holding every
tuple no selected itemset covers. The pipeline is::

    S_min from the top-k closed itemsets -> maximal itemsets at S_min
    -> greedy non-overlapping selection by area -> entries + default table

Selection is quadratic in the number of maximal itemsets in the worst case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal as Kind, Optional, Sequence

from .mining import (
    Itemset,
    MinedPattern,
    TransactionDB,
    coverage,
    make_itemset,
    mine_maximal,
    to_transactions,
    topk_closed,
)
from .model import TableConstraint, Tuple_, canonicalize


class CompressionError(ValueError):
    pass


class EmptyDB(CompressionError):
    pass


class ScopeMismatch(CompressionError):
    pass


@dataclass(frozen=True)
class CompressionConfig:
    k_ratio: float = 0.4
    smin_strategy: Kind["min", "avg"] = "avg"
    metric: Kind["area", "savings"] = "area"
    min_freq_floor: int = 2
    # bypasses the top-k threshold search when set
    fixed_smin: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0 < self.k_ratio <= 1:
            raise ValueError(f"k_ratio must be in (0, 1], got {self.k_ratio}")
        if self.smin_strategy not in ("min", "avg"):
            raise ValueError(f"unknown smin_strategy {self.smin_strategy!r}")
        if self.metric not in ("area", "savings"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.min_freq_floor < 2:
            raise ValueError("min_freq_floor must be >= 2")
        if self.fixed_smin is not None and self.fixed_smin < self.min_freq_floor:
            raise ValueError("fixed_smin must be >= min_freq_floor")


@dataclass(frozen=True)
class Entry:
    itemset: Itemset
    item_vars: tuple[int, ...]
    sub_scope: tuple[int, ...]
    sub_tuples: tuple[Tuple_, ...]

    @property
    def freq(self) -> int:
        return len(self.sub_tuples)


@dataclass(frozen=True)
class CompressedTable:
    scope: tuple[int, ...]
    entries: tuple[Entry, ...]
    default_tuples: tuple[Tuple_, ...]

    @property
    def arity(self) -> int:
        return len(self.scope)

    @property
    def n_tuples(self) -> int:
        return sum(e.freq for e in self.entries) + len(self.default_tuples)

    def cells(self) -> int:
        a = self.arity
        return sum(len(e.itemset) + (a - len(e.itemset)) * e.freq for e in self.entries) + a * len(
            self.default_tuples
        )


@dataclass(frozen=True)
class CompressionStats:
    c_tup_pct: float
    c_rate_pct: float
    n_itemsets: int
    avg_len: float
    avg_freq: float
    cells_before: int
    cells_after: int
    n_tuples: int = 0
    compressed_tuples: int = 0
    len_sum: int = 0


def area(u: Sequence, f: int) -> int:
    return len(u) * f


def savings(u: Sequence, f: int) -> int:
    return len(u) * (f - 1)


def local_rate(u_len: int, f: int, arity: int) -> float:
    """1 - size_after / size_before for the tuples one itemset covers."""
    size_after = u_len + (arity - u_len) * f
    size_before = arity * f
    return 1 - size_after / size_before


def global_rate(selected: Iterable[tuple[int, int]], arity: int, n_tuples: int) -> float:
    """Cells saved by the selected (length, freq) pairs over the whole table size."""
    if n_tuples < 1:
        raise ValueError("n_tuples must be >= 1")
    saved = sum(arity * f - (u_len + (arity - u_len) * f) for u_len, f in selected)
    return saved / (arity * n_tuples)


_METRICS = {"area": area, "savings": savings}


def choose_smin(db: TransactionDB, cfg: CompressionConfig = CompressionConfig()) -> int:
    n = db.n_transactions
    if n == 0:
        raise EmptyDB("cannot pick a threshold for an empty table")
    k = max(1, math.ceil(cfg.k_ratio * n))
    freqs = [p.freq for p in topk_closed(db, k)]
    if not freqs:
        return cfg.min_freq_floor
    if cfg.smin_strategy == "min":
        s = min(freqs)
    else:
        s = sum(freqs) // len(freqs)
    return max(s, cfg.min_freq_floor)


def _ranked(mfis: Sequence[MinedPattern], metric: str) -> list[MinedPattern]:
    score = _METRICS[metric]
    return sorted(mfis, key=lambda p: (-score(p.itemset, p.freq), -p.freq, p.itemset))


def selection_trace(
    mfis: Sequence[MinedPattern], metric: Kind["area", "savings"] = "area"
) -> list[tuple[MinedPattern, list[MinedPattern]]]:
    """Greedy steps as (selected pattern, patterns discarded for overlapping it)."""
    remaining = _ranked(mfis, metric)
    steps = []
    while remaining:
        best = remaining.pop(0)
        taken = set(best.cover)
        kept, dropped = [], []
        for p in remaining:
            (kept if taken.isdisjoint(p.cover) else dropped).append(p)
        steps.append((best, dropped))
        remaining = kept
    return steps


def select_patterns(
    mfis: Sequence[MinedPattern], metric: Kind["area", "savings"] = "area"
) -> list[MinedPattern]:
    """Greedy non-overlapping selection, best score first.

    Ties on the score go to the higher frequency, then to the smaller itemset.
    """
    return [best for best, _ in selection_trace(mfis, metric)]


def build_compressed(table: TableConstraint, itemsets: Sequence[Itemset]) -> CompressedTable:
    """Entries for the given itemsets, in order; tuples left over go to the default table.

    Covers must be pairwise disjoint on ``table``.
    """
    db = to_transactions(table)
    scope = table.scope
    pos_of = {v: p for p, v in enumerate(scope)}
    used: set[int] = set()
    entries = []
    for u in itemsets:
        u = make_itemset(u)
        cover = coverage(db, u)
        if used.intersection(cover):
            raise CompressionError(f"itemset {u} overlaps a previous entry")
        used.update(cover)
        item_vars = tuple(v for v, _ in u)
        sub_scope = tuple(v for v in scope if v not in item_vars)
        sub_pos = [pos_of[v] for v in sub_scope]
        sub_tuples = tuple(tuple(table.tuples[t][p] for p in sub_pos) for t in cover)
        entries.append(Entry(u, item_vars, sub_scope, sub_tuples))
    default = tuple(t for i, t in enumerate(table.tuples) if i not in used)
    return CompressedTable(scope, tuple(entries), default)


def compress_table(
    table: TableConstraint, cfg: CompressionConfig = CompressionConfig()
) -> CompressedTable:
    table = canonicalize(table)
    if table.arity < 2 or len(table) < 2:
        return CompressedTable(table.scope, (), table.tuples)
    db = to_transactions(table)
    s_min = cfg.fixed_smin if cfg.fixed_smin is not None else choose_smin(db, cfg)
    mfis = [p for p in mine_maximal(db, s_min) if len(p.itemset) < table.arity]
    chosen = select_patterns(mfis, cfg.metric)
    ct = build_compressed(table, [p.itemset for p in chosen])
    for e in ct.entries:
        assert e.freq >= 2 and 1 <= len(e.itemset) < table.arity
    return ct


def decompress(ct: CompressedTable) -> TableConstraint:
    scope = ct.scope
    pos_of = {v: p for p, v in enumerate(scope)}
    tuples: list[Tuple_] = []
    for e in ct.entries:
        if sorted(e.item_vars + e.sub_scope) != sorted(scope) or len(
            set(e.item_vars + e.sub_scope)
        ) != len(scope):
            raise ScopeMismatch(f"entry {e.itemset} does not partition scope {scope}")
        row = [0] * len(scope)
        for v, val in e.itemset:
            row[pos_of[v]] = val
        sub_pos = [pos_of[v] for v in e.sub_scope]
        for st in e.sub_tuples:
            for p, val in zip(sub_pos, st):
                row[p] = val
            tuples.append(tuple(row))
    tuples.extend(ct.default_tuples)
    return canonicalize(TableConstraint(scope, tuples))


def _stats(n: int, before: int, after: int, k: int, compressed: int, len_sum: int):
    return CompressionStats(
        c_tup_pct=100 * compressed / n if n else 0.0,
        c_rate_pct=100 * (1 - after / before) if before else 0.0,
        n_itemsets=k,
        avg_len=len_sum / k if k else 0.0,
        avg_freq=compressed / k if k else 0.0,
        cells_before=before,
        cells_after=after,
        n_tuples=n,
        compressed_tuples=compressed,
        len_sum=len_sum,
    )


def compression_stats(table: TableConstraint, ct: CompressedTable) -> CompressionStats:
    n = len(canonicalize(table))
    return _stats(
        n,
        ct.arity * n,
        ct.cells(),
        len(ct.entries),
        sum(e.freq for e in ct.entries),
        sum(len(e.itemset) for e in ct.entries),
    )


def aggregate_stats(stats: Iterable[CompressionStats]) -> CompressionStats:
    """Pool per-constraint stats into instance-level figures."""
    stats = list(stats)
    return _stats(
        sum(s.n_tuples for s in stats),
        sum(s.cells_before for s in stats),
        sum(s.cells_after for s in stats),
        sum(s.n_itemsets for s in stats),
        sum(s.compressed_tuples for s in stats),
        sum(s.len_sum for s in stats),
    )
