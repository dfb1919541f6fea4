"""Core CSP data model: variables with finite integer domains and positive
table constraints."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

Tuple_ = tuple[int, ...]
Assignment = Sequence[int]


class ModelError(ValueError):
    """Base class for malformed instances."""


class MalformedTuple(ModelError):
    pass


class ScopeError(ModelError):
    pass


@dataclass(frozen=True)
class TableConstraint:
    """A positive (allowed-tuples) constraint over an ordered scope."""

    scope: tuple[int, ...]
    tuples: tuple[Tuple_, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "scope", tuple(self.scope))
        object.__setattr__(self, "tuples", tuple(tuple(t) for t in self.tuples))
        if not self.scope:
            raise ScopeError("constraint scope must not be empty")
        if len(set(self.scope)) != len(self.scope):
            raise ScopeError(f"duplicate variable in scope {self.scope}")
        arity = len(self.scope)
        for i, t in enumerate(self.tuples):
            if len(t) != arity:
                raise MalformedTuple(
                    f"tuple #{i} {t} has length {len(t)}, scope arity is {arity}"
                )

    @property
    def arity(self) -> int:
        return len(self.scope)

    def __len__(self) -> int:
        return len(self.tuples)

    @cached_property
    def tuple_set(self) -> frozenset[Tuple_]:
        return frozenset(self.tuples)


def canonicalize(table: TableConstraint) -> TableConstraint:
    """Drop duplicate tuples and sort the rest lexicographically."""
    return TableConstraint(table.scope, tuple(sorted(set(table.tuples))))


def is_canonical(table: TableConstraint) -> bool:
    ts = table.tuples
    return all(ts[i] < ts[i + 1] for i in range(len(ts) - 1))


def satisfies(assignment: Assignment, c: TableConstraint) -> bool:
    return tuple(assignment[v] for v in c.scope) in c.tuple_set


@dataclass(frozen=True)
class Instance:
    """Variables ``0..n-1`` with their domains, plus table constraints."""

    domains: tuple[tuple[int, ...], ...]
    constraints: tuple[TableConstraint, ...] = ()
    names: Optional[tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        doms = tuple(tuple(sorted(set(d))) for d in self.domains)
        object.__setattr__(self, "domains", doms)
        object.__setattr__(self, "constraints", tuple(self.constraints))
        for i, d in enumerate(doms):
            if not d:
                raise ModelError(f"variable {i} has an empty domain")
            if d[0] < 0:
                raise ModelError(f"variable {i} has a negative value")
        n = len(doms)
        for c in self.constraints:
            for v in c.scope:
                if not 0 <= v < n:
                    raise ScopeError(f"scope variable {v} out of range (n={n})")
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != n or len(set(names)) != n:
                raise ModelError("variable names must be unique, one per variable")
            object.__setattr__(self, "names", names)

    @property
    def n_vars(self) -> int:
        return len(self.domains)

    def var_names(self) -> tuple[str, ...]:
        if self.names is not None:
            return self.names
        return tuple(f"x{i}" for i in range(self.n_vars))

    def canonical(self) -> "Instance":
        return Instance(
            self.domains, tuple(canonicalize(c) for c in self.constraints), self.names
        )


def is_solution(assignment: Assignment, inst: Instance) -> bool:
    if len(assignment) != inst.n_vars:
        return False
    for value, dom in zip(assignment, inst.domains):
        if value not in dom:
            return False
    return all(satisfies(assignment, c) for c in inst.constraints)
