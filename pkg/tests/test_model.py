import itertools

import pytest
from hypothesis import given, strategies as st

from mfic.model import (
    Instance,
    MalformedTuple,
    ScopeError,
    TableConstraint,
    canonicalize,
    is_canonical,
    is_solution,
    satisfies,
)

from conftest import RUNNING_TUPLES


def test_canonicalize_dedups_and_sorts():
    t = TableConstraint((0, 1), [[1, 0], [0, 1], [1, 0]])
    assert canonicalize(t).tuples == ((0, 1), (1, 0))


def test_canonicalize_running_table_keeps_every_tuple(running_table):
    assert running_table.tuple_set == set(RUNNING_TUPLES)
    assert len(running_table) == 11
    assert is_canonical(running_table)


def test_canonicalize_empty():
    assert canonicalize(TableConstraint((0, 1), [])).tuples == ()


def test_malformed_tuple():
    with pytest.raises(MalformedTuple):
        TableConstraint((0, 1, 2), [(0, 1)])


def test_duplicate_scope_rejected():
    with pytest.raises(ScopeError):
        TableConstraint((0, 0), [(0, 1)])


def test_instance_rejects_bad_scope():
    with pytest.raises(ScopeError):
        Instance([(0, 1)], [TableConstraint((0, 3), [])])


def test_satisfies(running_table):
    assert satisfies((0, 0, 0, 0, 2), running_table)
    assert not satisfies((1, 2, 2, 0, 1), running_table)
    assert not any(tuple(t) == (1, 2, 2, 0, 1) for t in RUNNING_TUPLES)
    assert not satisfies((0, 0), TableConstraint((0, 1), []))


def test_is_solution(running_instance):
    assert is_solution((0, 2, 0, 2, 0), running_instance)
    assert not is_solution((0, 0, 0, 0, 0), running_instance)
    assert is_solution((1, 2), Instance([(0, 1), (2, 3)]))
    # out-of-domain value, even if a tuple would allow it
    inst = Instance([(0,), (0,)], [TableConstraint((0, 1), [(1, 0)])])
    assert not is_solution((1, 0), inst)


tables = st.integers(1, 4).flatmap(
    lambda a: st.lists(st.tuples(*[st.integers(0, 3)] * a), max_size=20).map(
        lambda ts: TableConstraint(tuple(range(a)), ts)
    )
)


@given(tables)
def test_canonicalize_idempotent(t):
    once = canonicalize(t)
    assert canonicalize(once) == once
    assert once.tuple_set == set(t.tuples)


@given(tables)
def test_every_tuple_satisfies(t):
    for row in canonicalize(t).tuples:
        assert satisfies(row, t)


@given(tables, st.data())
def test_satisfies_matches_scan(t, data):
    a = data.draw(st.tuples(*[st.integers(0, 3)] * t.arity))
    expected = any(all(a[v] == row[p] for p, v in enumerate(t.scope)) for row in t.tuples)
    assert satisfies(a, t) == expected


def test_satisfies_with_permuted_scope():
    t = TableConstraint((2, 0), [(5, 1)])
    assert satisfies((1, 9, 5), t)
    assert not satisfies((5, 9, 1), t)
    assert [a for a in itertools.product(range(2), range(1), range(6)) if satisfies(a, t)] == [
        (1, 0, 5)
    ]
