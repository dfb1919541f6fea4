"""Instance / compressed-table documents, random instances and stats CSV.

Documents are UTF-8 JSON with LF line endings, one tuple per line.
See ``docs/formats.md`` for the exact layout.
"""

from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass
from typing import Any, Optional, Sequence, Union

from .compression import CompressedTable, CompressionStats, Entry
from .model import Instance, ModelError, TableConstraint, canonicalize

INSTANCE_FORMAT = "mfic-instance/1"
COMPRESSED_FORMAT = "mfic-compressed/1"

MASK64 = (1 << 64) - 1


class ParseError(ValueError):
    def __init__(self, msg: str, line: Optional[int] = None, col: Optional[int] = None):
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(msg + where)
        self.line = line
        self.col = col


class ScopeError(ParseError):
    pass


class RaggedTuple(ParseError):
    pass


class Infeasible(ValueError):
    pass


# -- PRNG -------------------------------------------------------------------


class Xoshiro256:
    """xoshiro256** seeded through splitmix64, as in the reference C code."""

    def __init__(self, seed: int):
        x = seed & MASK64
        s = []
        for _ in range(4):
            x = (x + 0x9E3779B97F4A7C15) & MASK64
            z = x
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
            s.append(z ^ (z >> 31))
        self.s = s

    def next(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        reject_under = (1 << 64) % n
        while True:
            r = self.next()
            if r >= reject_under:
                return r % n


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


# -- random instances -------------------------------------------------------


@dataclass(frozen=True)
class GenParams:
    n_vars: int
    dom_size: int
    arity: int
    n_constraints: int
    tuples_per_constraint: int
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.n_vars, self.dom_size, self.arity) < 1 or self.n_constraints < 0:
            raise ValueError("sizes must be positive")
        if self.tuples_per_constraint < 0:
            raise ValueError("tuples_per_constraint must be >= 0")
        if self.arity > self.n_vars:
            raise ValueError(f"arity {self.arity} exceeds {self.n_vars} variables")


def gen_random(p: GenParams) -> Instance:
    """Random positive tables; tuples drawn without replacement (Floyd's method)."""
    space = p.dom_size**p.arity
    if p.tuples_per_constraint > space:
        raise Infeasible(f"{p.tuples_per_constraint} tuples requested, only {space} exist")
    rng = Xoshiro256(p.seed)
    constraints = []
    for _ in range(p.n_constraints):
        pool = list(range(p.n_vars))
        for i in range(p.arity):
            j = i + rng.below(p.n_vars - i)
            pool[i], pool[j] = pool[j], pool[i]
        scope = tuple(pool[: p.arity])
        chosen: set[int] = set()
        for j in range(space - p.tuples_per_constraint, space):
            t = rng.below(j + 1)
            chosen.add(j if t in chosen else t)
        tuples = [_decode(code, p.dom_size, p.arity) for code in sorted(chosen)]
        constraints.append(TableConstraint(scope, tuples))
    domains = [tuple(range(p.dom_size))] * p.n_vars
    return Instance(domains, constraints)


def _decode(code: int, base: int, width: int) -> tuple[int, ...]:
    digits = [0] * width
    for i in range(width - 1, -1, -1):
        code, digits[i] = divmod(code, base)
    return tuple(digits)


# -- documents --------------------------------------------------------------


def _row(t: Sequence[int]) -> str:
    return "[" + ", ".join(str(v) for v in t) + "]"


def _rows(ts: Sequence[Sequence[int]], indent: str) -> str:
    if not ts:
        return "[]"
    return "[\n" + ",\n".join(indent + "  " + _row(t) for t in ts) + "\n" + indent + "]"


def _variables_block(inst: Instance) -> str:
    lines = [
        f'    {{"name": {json.dumps(n)}, "domain": {_row(d)}}}'
        for n, d in zip(inst.var_names(), inst.domains)
    ]
    return '  "variables": [\n' + ",\n".join(lines) + "\n  ]"


def write_instance(inst: Instance) -> str:
    names = inst.var_names()
    blocks = []
    for c in inst.constraints:
        scope = json.dumps([names[v] for v in c.scope])
        blocks.append(
            f'    {{\n      "scope": {scope},\n      "tuples": {_rows(c.tuples, "      ")}\n    }}'
        )
    cons = "[\n" + ",\n".join(blocks) + "\n  ]" if blocks else "[]"
    return (
        "{\n"
        f'  "format": "{INSTANCE_FORMAT}",\n'
        + _variables_block(inst)
        + ",\n"
        + f'  "constraints": {cons}\n'
        + "}\n"
    )


def _load(doc: Union[str, bytes], fmt: str) -> dict:
    try:
        data = json.loads(doc)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError("top level must be an object")
    if data.get("format", fmt) != fmt:
        raise ParseError(f"expected format {fmt!r}, got {data.get('format')!r}")
    return data


def _field(obj: Any, key: str, kind: type, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing key {key!r}")
    val = obj[key]
    if not isinstance(val, kind):
        raise ParseError(f"{where}.{key}: expected {kind.__name__}")
    return val


def _int_row(row: Any, where: str) -> tuple[int, ...]:
    if not isinstance(row, list) or not all(
        isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in row
    ):
        raise ParseError(f"{where}: expected a list of non-negative integers")
    return tuple(row)


def _parse_variables(data: dict) -> tuple[list[str], list[tuple[int, ...]], dict[str, int]]:
    names: list[str] = []
    domains: list[tuple[int, ...]] = []
    for i, var in enumerate(_field(data, "variables", list, "document")):
        where = f"variables[{i}]"
        names.append(_field(var, "name", str, where))
        dom = _int_row(_field(var, "domain", list, where), where + ".domain")
        if not dom:
            raise ParseError(f"{where}: empty domain")
        domains.append(dom)
    index = {n: i for i, n in enumerate(names)}
    if len(index) != len(names):
        raise ParseError("variable names must be unique")
    return names, domains, index


def _parse_scope(c: dict, index: dict[str, int], where: str) -> tuple[int, ...]:
    scope = []
    for name in _field(c, "scope", list, where):
        if name not in index:
            raise ScopeError(f"{where}: unknown variable {name!r}")
        scope.append(index[name])
    if not scope or len(set(scope)) != len(scope):
        raise ScopeError(f"{where}: scope must be non-empty with distinct variables")
    return tuple(scope)


def _parse_rows(rows: list, width: int, where: str) -> list[tuple[int, ...]]:
    out = []
    for j, row in enumerate(rows):
        t = _int_row(row, f"{where}[{j}]")
        if len(t) != width:
            raise RaggedTuple(f"{where}[{j}]: length {len(t)}, expected {width}")
        out.append(t)
    return out


def parse_instance(doc: Union[str, bytes]) -> Instance:
    data = _load(doc, INSTANCE_FORMAT)
    names, domains, index = _parse_variables(data)
    constraints = []
    for i, c in enumerate(_field(data, "constraints", list, "document")):
        where = f"constraints[{i}]"
        scope = _parse_scope(c, index, where)
        tuples = _parse_rows(_field(c, "tuples", list, where), len(scope), where + ".tuples")
        constraints.append(canonicalize(TableConstraint(scope, tuples)))
    try:
        return Instance(domains, constraints, names)
    except ModelError as exc:
        raise ParseError(str(exc)) from None


@dataclass(frozen=True)
class CompressedDocument:
    domains: tuple[tuple[int, ...], ...]
    names: tuple[str, ...]
    tables: tuple[CompressedTable, ...]


def _implied_instance(tables: Sequence[CompressedTable]) -> Instance:
    vals: dict[int, set[int]] = {}
    for ct in tables:
        for v in ct.scope:
            vals.setdefault(v, set())
        for e in ct.entries:
            for v, val in e.itemset:
                vals[v].add(val)
            for st in e.sub_tuples:
                for v, val in zip(e.sub_scope, st):
                    vals[v].add(val)
        for t in ct.default_tuples:
            for v, val in zip(ct.scope, t):
                vals[v].add(val)
    n = max(vals, default=-1) + 1
    return Instance([sorted(vals.get(v) or {0}) for v in range(n)])


def write_compressed(
    tables: Union[CompressedTable, Sequence[CompressedTable]], inst: Optional[Instance] = None
) -> str:
    """Compressed-table document; variables come from ``inst`` or are implied by the values."""
    if isinstance(tables, CompressedTable):
        tables = [tables]
    if inst is None:
        inst = _implied_instance(tables)
    names = inst.var_names()
    blocks = []
    for ct in tables:
        ents = []
        for e in ct.entries:
            itemset = "[" + ", ".join(f"[{json.dumps(names[v])}, {val}]" for v, val in e.itemset) + "]"
            ents.append(
                "        {\n"
                f"          \"itemset\": {itemset},\n"
                f"          \"sub_scope\": {json.dumps([names[v] for v in e.sub_scope])},\n"
                f"          \"sub_tuples\": {_rows(e.sub_tuples, '          ')}\n"
                "        }"
            )
        entries = "[\n" + ",\n".join(ents) + "\n      ]" if ents else "[]"
        blocks.append(
            "    {\n"
            f"      \"scope\": {json.dumps([names[v] for v in ct.scope])},\n"
            f"      \"entries\": {entries},\n"
            f"      \"default\": {_rows(ct.default_tuples, '      ')}\n"
            "    }"
        )
    cons = "[\n" + ",\n".join(blocks) + "\n  ]" if blocks else "[]"
    return (
        "{\n"
        f'  "format": "{COMPRESSED_FORMAT}",\n'
        + _variables_block(inst)
        + ",\n"
        + f'  "constraints": {cons}\n'
        + "}\n"
    )


def parse_compressed(doc: Union[str, bytes]) -> CompressedDocument:
    data = _load(doc, COMPRESSED_FORMAT)
    names, domains, index = _parse_variables(data)
    tables = []
    for i, c in enumerate(_field(data, "constraints", list, "document")):
        where = f"constraints[{i}]"
        scope = _parse_scope(c, index, where)
        entries = []
        for j, e in enumerate(_field(c, "entries", list, where)):
            ew = f"{where}.entries[{j}]"
            itemset = []
            for lit in _field(e, "itemset", list, ew):
                if not (isinstance(lit, list) and len(lit) == 2 and isinstance(lit[0], str)):
                    raise ParseError(f"{ew}.itemset: literals are [name, value] pairs")
                if lit[0] not in index:
                    raise ScopeError(f"{ew}: unknown variable {lit[0]!r}")
                itemset.append((index[lit[0]], _int_row([lit[1]], ew)[0]))
            item_vars = tuple(v for v, _ in itemset)
            sub_scope = _parse_scope({"scope": _field(e, "sub_scope", list, ew)}, index, ew)
            if sorted(item_vars + sub_scope) != sorted(scope):
                raise ScopeError(f"{ew}: itemset and sub_scope must partition the scope")
            sub_tuples = _parse_rows(_field(e, "sub_tuples", list, ew), len(sub_scope), ew)
            entries.append(Entry(tuple(itemset), item_vars, sub_scope, tuple(sub_tuples)))
        default = _parse_rows(_field(c, "default", list, where), len(scope), where + ".default")
        tables.append(CompressedTable(scope, tuple(entries), tuple(default)))
    return CompressedDocument(tuple(domains), tuple(names), tuple(tables))


# -- stats CSV --------------------------------------------------------------

CSV_HEADER = (
    "instance",
    "method",
    "c_tup_pct",
    "c_rate_pct",
    "n_itemsets",
    "avg_len",
    "avg_freq",
    "solved",
    "nodes",
    "time_s",
)


@dataclass(frozen=True)
class StatsRow:
    instance: str
    method: str
    compression: Optional[CompressionStats]
    solved: bool
    nodes: int
    time_s: float


def write_stats_csv(rows: Sequence[StatsRow]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        cs = r.compression
        w.writerow(
            [
                r.instance,
                r.method,
                f"{cs.c_tup_pct if cs else 0.0:.2f}",
                f"{cs.c_rate_pct if cs else 0.0:.2f}",
                cs.n_itemsets if cs else 0,
                f"{cs.avg_len if cs else 0.0:.2f}",
                f"{cs.avg_freq if cs else 0.0:.2f}",
                int(r.solved),
                r.nodes,
                f"{r.time_s:.2f}",
            ]
        )
    return buf.getvalue()
