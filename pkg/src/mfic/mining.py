"""Transaction view of a table constraint and frequent itemset mining.

Each tuple of a table is a transaction whose items are ``(var, value)``
literals. Closed itemsets are enumerated depth first with prefix-preserving
closure extension (the LCM scheme); item counts inside the current
conditional database are obtained by occurrence delivery, which also gives the
maximality test for free.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Literal as Kind, Optional, Sequence

from .model import TableConstraint

Literal = tuple[int, int]
Itemset = tuple[Literal, ...]
TidSet = tuple[int, ...]

BRUTE_FORCE_MAX_ITEMS = 24


class MiningError(ValueError):
    pass


class InvalidThreshold(MiningError):
    pass


class InvalidK(MiningError):
    pass


class TooLarge(MiningError):
    pass


@dataclass(frozen=True, order=True)
class MinedPattern:
    itemset: Itemset
    cover: TidSet
    freq: int

    def __len__(self) -> int:
        return len(self.itemset)


def make_itemset(literals: Iterable[Literal]) -> Itemset:
    """Sort literals by (var, val) and reject two literals on one variable."""
    items = tuple(sorted(set(literals)))
    if not items:
        raise ValueError("an itemset must be non-empty")
    for a, b in zip(items, items[1:]):
        if a[0] == b[0]:
            raise ValueError(f"two literals on variable {a[0]}: {a}, {b}")
    return items


class TransactionDB:
    """Vertical layout of a table: every literal maps to a tid-list.

    ``items`` lists the literals sorted by (var, val); internally an item is
    its position in that list. ``transactions[t]`` holds the item ids of
    transaction ``t`` sorted increasingly; ``bits[i]`` is the tid-list of
    item ``i`` as an int bitset.
    """

    def __init__(self, transactions: Sequence[Iterable[Literal]], arity: Optional[int] = None):
        rows = [sorted(set(tr)) for tr in transactions]
        literals = sorted({lit for tr in rows for lit in tr})
        self.items: tuple[Literal, ...] = tuple(literals)
        self.item_id = {lit: i for i, lit in enumerate(literals)}
        self.arity = arity if arity is not None else len({v for v, _ in literals})
        self.transactions: tuple[tuple[int, ...], ...] = tuple(
            tuple(self.item_id[lit] for lit in tr) for tr in rows
        )
        occ: list[list[int]] = [[] for _ in literals]
        for tid, tr in enumerate(self.transactions):
            for i in tr:
                occ[i].append(tid)
        self.tidlists: tuple[TidSet, ...] = tuple(tuple(o) for o in occ)
        self.bits: tuple[int, ...] = tuple(_to_bits(o) for o in occ)

    @property
    def n_transactions(self) -> int:
        return len(self.transactions)

    def tidlist(self, lit: Literal) -> TidSet:
        i = self.item_id.get(lit)
        return () if i is None else self.tidlists[i]

    def _pattern(self, item_ids: Iterable[int], tids: Sequence[int]) -> MinedPattern:
        itemset = tuple(sorted(self.items[i] for i in item_ids))
        return MinedPattern(itemset, tuple(tids), len(tids))


def to_transactions(table: TableConstraint) -> TransactionDB:
    """One transaction per tuple, one ``(var, value)`` item per scope position."""
    scope = table.scope
    return TransactionDB(
        [[(v, t[p]) for p, v in enumerate(scope)] for t in table.tuples], arity=len(scope)
    )


def _to_bits(tids: Iterable[int]) -> int:
    b = 0
    for t in tids:
        b |= 1 << t
    return b


def _from_bits(b: int) -> TidSet:
    out = []
    while b:
        low = b & -b
        out.append(low.bit_length() - 1)
        b ^= low
    return tuple(out)


def coverage(db: TransactionDB, u: Iterable[Literal]) -> TidSet:
    bits = (1 << db.n_transactions) - 1
    for lit in u:
        i = db.item_id.get(lit)
        if i is None:
            return ()
        bits &= db.bits[i]
    return _from_bits(bits)


def frequency(db: TransactionDB, u: Iterable[Literal]) -> int:
    return len(coverage(db, u))


def _check_smin(s_min: int) -> None:
    if s_min < 1:
        raise InvalidThreshold(f"s_min must be >= 1, got {s_min}")


def _deliver(db: TransactionDB, tids: Sequence[int]) -> dict[int, list[int]]:
    occ: dict[int, list[int]] = {}
    trs = db.transactions
    for t in tids:
        for i in trs[t]:
            lst = occ.get(i)
            if lst is None:
                occ[i] = [t]
            else:
                lst.append(t)
    return occ


def _closed_children(
    db: TransactionDB, itemset: frozenset[int], core: int, occ: dict[int, list[int]], s_min: int
):
    """Yield (closure, core item, tids) for every ppc-extension of a closed set."""
    for e in sorted(occ):
        if e <= core or e in itemset:
            continue
        tids = occ[e]
        if len(tids) < s_min:
            continue
        sub = _deliver(db, tids)
        n = len(tids)
        closure = [i for i, lst in sub.items() if len(lst) == n]
        # prefix preservation: nothing new below e may enter the closure
        if any(i < e and i not in itemset for i in closure):
            continue
        yield frozenset(closure), e, tids, sub


def _enumerate_closed(db: TransactionDB, s_min: int):
    """Depth-first ppc enumeration; yields (item ids, tids, delivered counts)."""
    n = db.n_transactions
    if n < s_min:
        return
    all_tids = list(range(n))
    occ = _deliver(db, all_tids)
    root = frozenset(i for i, lst in occ.items() if len(lst) == n)
    stack = [(root, -1, all_tids, occ)]
    while stack:
        itemset, core, tids, occ = stack.pop()
        if itemset:
            yield itemset, tids, occ
        children = list(_closed_children(db, itemset, core, occ, s_min))
        stack.extend(reversed(children))


def mine_closed(db: TransactionDB, s_min: int) -> list[MinedPattern]:
    _check_smin(s_min)
    out = [db._pattern(items, tids) for items, tids, _ in _enumerate_closed(db, s_min)]
    out.sort()
    return out


def mine_maximal(db: TransactionDB, s_min: int) -> list[MinedPattern]:
    """Frequent itemsets with no frequent proper superset.

    A maximal itemset is closed, and a closed itemset is maximal exactly when
    no single extra item keeps it frequent; item counts inside the cover are
    already at hand from occurrence delivery.
    """
    _check_smin(s_min)
    out = []
    for items, tids, occ in _enumerate_closed(db, s_min):
        if all(i in items or len(lst) < s_min for i, lst in occ.items()):
            out.append(db._pattern(items, tids))
    out.sort()
    return out


def topk_key(p: MinedPattern):
    return (-p.freq, len(p.itemset), p.itemset)


def topk_closed(db: TransactionDB, k: int, s_min: int = 1) -> list[MinedPattern]:
    """The ``k`` most frequent closed itemsets among those with freq >= ``s_min``.

    Best-first over the ppc tree: a child never has a higher frequency than
    its parent, so nodes pop in non-increasing frequency order. Once ``k``
    patterns are out, everything tied with the k-th frequency is still
    collected so the (freq, length, lexicographic) tie-break is exact.
    """
    if k < 1:
        raise InvalidK(f"k must be >= 1, got {k}")
    _check_smin(s_min)
    n = db.n_transactions
    if n < s_min:
        return []
    all_tids = list(range(n))
    occ = _deliver(db, all_tids)
    root = frozenset(i for i, lst in occ.items() if len(lst) == n)
    counter = 0
    heap = [(-n, counter, root, -1, all_tids, occ)]
    found: list[MinedPattern] = []
    kth_freq = None
    while heap:
        neg, _, itemset, core, tids, occ = heapq.heappop(heap)
        freq = -neg
        if kth_freq is not None and freq < kth_freq:
            break
        if itemset:
            found.append(db._pattern(itemset, tids))
            if len(found) == k:
                kth_freq = freq
        floor = kth_freq if kth_freq is not None else s_min
        for child, e, ctids, cocc in _closed_children(db, itemset, core, occ, floor):
            counter += 1
            heapq.heappush(heap, (-len(ctids), counter, child, e, ctids, cocc))
    found.sort(key=topk_key)
    return found[:k]


def brute_force_patterns(
    db: TransactionDB, s_min: int, kind: Kind["frequent", "closed", "maximal"]
) -> list[MinedPattern]:
    """Exhaustive reference miner over every consistent itemset."""
    _check_smin(s_min)
    if len(db.items) > BRUTE_FORCE_MAX_ITEMS:
        raise TooLarge(f"{len(db.items)} items exceed {BRUTE_FORCE_MAX_ITEMS}")
    if kind not in ("frequent", "closed", "maximal"):
        raise ValueError(f"unknown kind {kind!r}")
    frequent: dict[Itemset, TidSet] = {}
    for size in range(1, db.arity + 1):
        for combo in combinations(db.items, size):
            if len({v for v, _ in combo}) < size:
                continue
            tids = [
                t
                for t, tr in enumerate(db.transactions)
                if all(db.item_id[lit] in tr for lit in combo)
            ]
            if len(tids) >= s_min:
                frequent[combo] = tuple(tids)

    def keep(u: Itemset, tids: TidSet) -> bool:
        if kind == "frequent":
            return True
        su = set(u)
        for w, wt in frequent.items():
            if len(w) > len(u) and su.issubset(w):
                if kind == "maximal" or len(wt) == len(tids):
                    return False
        return True

    return sorted(MinedPattern(u, t, len(t)) for u, t in frequent.items() if keep(u, t))
