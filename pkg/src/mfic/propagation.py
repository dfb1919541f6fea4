"""Reversible domains and GAC propagators for plain and compressed tables.

Both propagators keep their valid rows at the front of a permutation and
cut the invalid ones off with a limit pointer (index of the last valid
element, -1 when none). Backtracking only moves limits back.

``Str2`` filters a plain table. ``StrMfic`` filters a compressed table:
an entry whose itemset lost a value is dropped without looking at its
sub-table, otherwise its sub-tuples are filtered like an STR2 table. The
default table is one more entry with an empty itemset.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence, Union

from .compression import CompressedTable
from .model import Instance, TableConstraint

_ABSENT = 1 << 60


class UnderflowError(RuntimeError):
    """restore_level called without a matching save_level."""


class TooLarge(RuntimeError):
    pass


class DomainState:
    """Sparse-set domains with a trail of (var, old size) pairs."""

    def __init__(self, domains: Sequence[Iterable[int]]):
        self.dense: list[list[int]] = []
        self.pos: list[list[int]] = []
        for dom in domains:
            vals = sorted(set(dom))
            pos = [_ABSENT] * ((vals[-1] + 1) if vals else 0)
            for i, v in enumerate(vals):
                pos[v] = i
            self.dense.append(vals)
            self.pos.append(pos)
        self.size = [len(d) for d in self.dense]
        self._trail: list[tuple[int, int]] = []
        self._marks: list[int] = []
        self._stamp = [0] * len(self.dense)
        self._level_id = 0
        self._next_id = 1

    @classmethod
    def of(cls, inst: Instance) -> "DomainState":
        return cls(inst.domains)

    def __len__(self) -> int:
        return len(self.dense)

    @property
    def depth(self) -> int:
        return len(self._marks)

    def contains(self, var: int, val: int) -> bool:
        pos = self.pos[var]
        return 0 <= val < len(pos) and pos[val] < self.size[var]

    def values(self, var: int) -> list[int]:
        return self.dense[var][: self.size[var]]

    def is_fixed(self, var: int) -> bool:
        return self.size[var] == 1

    def _touch(self, var: int) -> None:
        if self._marks and self._stamp[var] != self._level_id:
            self._trail.append((var, self.size[var]))
            self._stamp[var] = self._level_id

    def remove(self, var: int, val: int) -> bool:
        """Remove one value; False if it was already absent."""
        pos = self.pos[var]
        if not (0 <= val < len(pos)):
            return False
        i = pos[val]
        last = self.size[var] - 1
        if i > last:
            return False
        self._touch(var)
        dense = self.dense[var]
        other = dense[last]
        dense[i], dense[last] = other, val
        pos[other], pos[val] = i, last
        self.size[var] = last
        return True

    def assign(self, var: int, val: int) -> list[int]:
        """Reduce to a single value; returns the values removed."""
        removed = [v for v in self.values(var) if v != val]
        for v in removed:
            self.remove(var, v)
        return removed

    def save_level(self) -> None:
        self._marks.append(len(self._trail))
        self._level_id = self._next_id
        self._next_id += 1

    def restore_level(self) -> None:
        if not self._marks:
            raise UnderflowError("no saved level to restore")
        mark = self._marks.pop()
        trail = self._trail
        while len(trail) > mark:
            var, old = trail.pop()
            self.size[var] = old
        # a fresh id so stamps from the abandoned level never match
        self._level_id = self._next_id
        self._next_id += 1

    def snapshot(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(self.values(v)) for v in range(len(self.dense)))


@dataclass
class PropagationOutcome:
    status: str = "fixpoint"
    wiped_var: Optional[int] = None
    removed: list[tuple[int, int]] = field(default_factory=list)

    @property
    def wipeout(self) -> bool:
        return self.status == "wipeout"


def _prune(doms: DomainState, scope, gac, todo, last_size, out: PropagationOutcome):
    """Remove unsupported values of the scope positions in ``todo``."""
    for p in todo:
        var = scope[p]
        sup = gac[p]
        if len(sup) < doms.size[var]:
            for val in doms.values(var):
                if val not in sup:
                    doms.remove(var, val)
                    out.removed.append((var, val))
        if doms.size[var] == 0:
            out.status = "wipeout"
            out.wiped_var = var
            return out
        last_size[p] = doms.size[var]
    return out


class Str2:
    """STR2 on a plain positive table."""

    def __init__(self, table: TableConstraint):
        self.scope = table.scope
        self.tuples = table.tuples
        self.position = list(range(len(self.tuples)))
        self.limit = len(self.tuples) - 1
        self.last_size = [-1] * len(self.scope)
        self._stack: list[tuple[int, list[int]]] = []

    def save_level(self) -> None:
        self._stack.append((self.limit, self.last_size[:]))

    def restore_level(self) -> None:
        if not self._stack:
            raise UnderflowError("no saved level to restore")
        self.limit, self.last_size = self._stack.pop()

    def valid_tuples(self) -> frozenset[int]:
        return frozenset(self.position[: self.limit + 1])

    def snapshot(self):
        return (self.valid_tuples(), tuple(self.last_size))

    def filter(self, doms: DomainState) -> PropagationOutcome:
        out = PropagationOutcome()
        scope = self.scope
        size = doms.size
        last_size = self.last_size
        s_val = [p for p in range(len(scope)) if size[scope[p]] != last_size[p]]
        if not s_val:
            return out
        for p in s_val:
            last_size[p] = size[scope[p]]
        checks = [(p, doms.pos[scope[p]], size[scope[p]]) for p in s_val]
        s_sup = list(range(len(scope)))
        gac: list[set[int]] = [set() for _ in scope]
        position, tuples = self.position, self.tuples
        limit = self.limit
        i = 0
        while i <= limit:
            t = tuples[position[i]]
            for p, pos, sz in checks:
                v = t[p]
                if v >= len(pos) or pos[v] >= sz:
                    position[i], position[limit] = position[limit], position[i]
                    limit -= 1
                    break
            else:
                if s_sup:
                    for p in s_sup:
                        gac[p].add(t[p])
                    s_sup = [p for p in s_sup if len(gac[p]) < size[scope[p]]]
                i += 1
        self.limit = limit
        return _prune(doms, scope, gac, s_sup, last_size, out)


class _Slice:
    __slots__ = ("items", "sub_pos", "rows", "position", "limit")

    def __init__(self, items, sub_pos, rows):
        self.items = items  # ((scope position, value), ...)
        self.sub_pos = sub_pos
        self.rows = rows
        self.position = list(range(len(rows)))
        self.limit = len(rows) - 1


class StrMfic:
    """STR-Slice style filtering over a compressed table."""

    def __init__(self, ct: CompressedTable):
        self.scope = ct.scope
        pos_of = {v: p for p, v in enumerate(ct.scope)}
        self.slices: list[_Slice] = []
        for e in ct.entries:
            items = tuple((pos_of[v], val) for v, val in e.itemset)
            sub_pos = tuple(pos_of[v] for v in e.sub_scope)
            self.slices.append(_Slice(items, sub_pos, e.sub_tuples))
        self.default_index: Optional[int] = None
        if ct.default_tuples:
            self.default_index = len(self.slices)
            self.slices.append(_Slice((), tuple(range(len(ct.scope))), ct.default_tuples))
        self.entries_position = list(range(len(self.slices)))
        self.entries_limit = len(self.slices) - 1
        self.last_size = [-1] * len(self.scope)
        self._stack: list[tuple[int, list[int], int]] = []
        self._trail: list[tuple[int, int]] = []
        self._stamp = [0] * len(self.slices)
        self._level_id = 0
        self._next_id = 1

    def save_level(self) -> None:
        self._stack.append((self.entries_limit, self.last_size[:], len(self._trail)))
        self._level_id = self._next_id
        self._next_id += 1

    def restore_level(self) -> None:
        if not self._stack:
            raise UnderflowError("no saved level to restore")
        self.entries_limit, self.last_size, mark = self._stack.pop()
        trail = self._trail
        while len(trail) > mark:
            e, old = trail.pop()
            self.slices[e].limit = old
        self._level_id = self._next_id
        self._next_id += 1

    def _set_limit(self, e: int, limit: int) -> None:
        if self._stack and self._stamp[e] != self._level_id:
            self._trail.append((e, self.slices[e].limit))
            self._stamp[e] = self._level_id
        self.slices[e].limit = limit

    @property
    def n_valid_entries(self) -> int:
        """Valid entries, the default table included when non-empty."""
        return self.entries_limit + 1

    def valid_entries(self) -> frozenset[int]:
        return frozenset(self.entries_position[: self.entries_limit + 1])

    def valid_rows(self, e: int) -> frozenset[int]:
        s = self.slices[e]
        return frozenset(s.position[: s.limit + 1])

    def snapshot(self):
        valid = self.valid_entries()
        return (
            valid,
            tuple(self.valid_rows(e) if e in valid else None for e in range(len(self.slices))),
            tuple(self.last_size),
        )

    def filter(self, doms: DomainState) -> PropagationOutcome:
        out = PropagationOutcome()
        scope = self.scope
        size = doms.size
        last_size = self.last_size
        arity = len(scope)
        changed = [size[scope[p]] != last_size[p] for p in range(arity)]
        if not any(changed):
            return out
        for p in range(arity):
            last_size[p] = size[scope[p]]
        dpos = [doms.pos[v] for v in scope]
        dsize = [size[v] for v in scope]
        supported = [False] * arity
        gac: list[set[int]] = [set() for _ in scope]
        n_unsupported = arity

        eposition = self.entries_position
        elimit = self.entries_limit
        i = 0
        while i <= elimit:
            e = eposition[i]
            s = self.slices[e]
            ok = True
            for p, val in s.items:
                if changed[p]:
                    pos = dpos[p]
                    if val >= len(pos) or pos[val] >= dsize[p]:
                        ok = False
                        break
            if ok:
                checks = [(j, dpos[p], dsize[p]) for j, p in enumerate(s.sub_pos) if changed[p]]
                collect = [(j, p) for j, p in enumerate(s.sub_pos) if not supported[p]]
                rows, position = s.rows, s.position
                limit = s.limit
                k = 0
                while k <= limit:
                    row = rows[position[k]]
                    for j, pos, sz in checks:
                        v = row[j]
                        if v >= len(pos) or pos[v] >= sz:
                            position[k], position[limit] = position[limit], position[k]
                            limit -= 1
                            break
                    else:
                        if collect:
                            for j, p in collect:
                                gac[p].add(row[j])
                            if any(len(gac[p]) == dsize[p] for _, p in collect):
                                for _, p in collect:
                                    if len(gac[p]) == dsize[p]:
                                        supported[p] = True
                                        n_unsupported -= 1
                                collect = [(j, p) for j, p in collect if not supported[p]]
                        k += 1
                if limit != s.limit:
                    self._set_limit(e, limit)
                ok = limit >= 0
            if not ok:
                eposition[i], eposition[elimit] = eposition[elimit], eposition[i]
                elimit -= 1
                continue
            if n_unsupported:
                for p, val in s.items:
                    if not supported[p]:
                        gac[p].add(val)
                        if len(gac[p]) == dsize[p]:
                            supported[p] = True
                            n_unsupported -= 1
            i += 1
        self.entries_limit = elimit
        todo = [p for p in range(arity) if not supported[p]]
        return _prune(doms, scope, gac, todo, last_size, out)


Propagator = Union[Str2, StrMfic]


@dataclass
class FixpointResult:
    wipeout: bool = False
    wiped_var: Optional[int] = None
    filter_calls: int = 0
    removals: int = 0


def propagate(
    doms: DomainState,
    props: Sequence[Propagator],
    watchers: Mapping[int, Sequence[int]],
    changed: Optional[Iterable[int]] = None,
) -> FixpointResult:
    """Run propagators to a common fixpoint with a FIFO constraint queue.

    ``watchers[var]`` lists the propagators whose scope holds ``var``;
    ``changed=None`` schedules every propagator.
    """
    res = FixpointResult()
    if changed is None:
        queue = deque(range(len(props)))
    else:
        queue = deque(dict.fromkeys(c for v in changed for c in watchers.get(v, ())))
    queued = [False] * len(props)
    for c in queue:
        queued[c] = True
    while queue:
        c = queue.popleft()
        queued[c] = False
        out = props[c].filter(doms)
        res.filter_calls += 1
        res.removals += len(out.removed)
        if out.wipeout:
            res.wipeout = True
            res.wiped_var = out.wiped_var
            return res
        for var in dict.fromkeys(v for v, _ in out.removed):
            for other in watchers.get(var, ()):
                if other != c and not queued[other]:
                    queued[other] = True
                    queue.append(other)
    return res


def build_watchers(scopes: Iterable[Sequence[int]]) -> dict[int, list[int]]:
    watchers: dict[int, list[int]] = {}
    for c, scope in enumerate(scopes):
        for v in scope:
            watchers.setdefault(v, []).append(c)
    return watchers


GAC_ORACLE_BUDGET = 10**6


def gac_oracle(
    inst: Instance, doms: Union[DomainState, Sequence[Iterable[int]], None] = None
) -> dict[int, set[int]]:
    """Greatest common fixpoint of support filtering, by exhaustive table scans."""
    if doms is None:
        cur = {v: set(d) for v, d in enumerate(inst.domains)}
    elif isinstance(doms, DomainState):
        cur = {v: set(doms.values(v)) for v in range(len(doms))}
    else:
        cur = {v: set(d) for v, d in enumerate(doms)}
    checks = 0
    changed = True
    while changed:
        changed = False
        for c in inst.constraints:
            checks += len(c.tuples) * c.arity
            if checks > GAC_ORACLE_BUDGET:
                raise TooLarge(f"more than {GAC_ORACLE_BUDGET} tuple checks")
            valid = [t for t in c.tuples if all(t[p] in cur[v] for p, v in enumerate(c.scope))]
            for p, v in enumerate(c.scope):
                sup = {t[p] for t in valid}
                if not cur[v] <= sup:
                    cur[v] &= sup
                    changed = True
    return cur
