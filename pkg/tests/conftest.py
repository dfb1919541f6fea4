import random

import pytest

from mfic.compression import CompressedTable, Entry
from mfic.mining import TransactionDB
from mfic.model import Instance, TableConstraint, canonicalize

# tuples t0..t10 as listed with the running example (t1 ends in 2)
RUNNING_TUPLES = [
    (0, 0, 0, 0, 2),
    (0, 0, 0, 1, 2),
    (0, 2, 0, 2, 0),
    (0, 0, 1, 1, 2),
    (0, 0, 1, 2, 0),
    (0, 0, 1, 3, 2),
    (1, 0, 2, 1, 1),
    (1, 0, 2, 3, 0),
    (1, 1, 2, 0, 1),
    (1, 1, 2, 2, 2),
    (1, 1, 2, 3, 0),
]
RUNNING_DOMAINS = [(0, 1), (0, 1, 2), (0, 1, 2), (0, 1, 2, 3), (0, 1, 2)]

TABLE1 = ["CDEAB", "EBCD", "ECD", "DACE", "ECAB"]


def letter(c: str):
    return (ord(c) - ord("A"), 1)


def letters(u: str):
    return tuple(sorted(letter(c) for c in u))


def name(itemset) -> str:
    return "".join(chr(ord("A") + v) for v, _ in itemset)


@pytest.fixture
def running_table() -> TableConstraint:
    return canonicalize(TableConstraint(range(5), RUNNING_TUPLES))


@pytest.fixture
def running_instance(running_table) -> Instance:
    return Instance(RUNNING_DOMAINS, [running_table])


@pytest.fixture
def table1_db() -> TransactionDB:
    return TransactionDB([[letter(c) for c in t] for t in TABLE1])


def table4() -> CompressedTable:
    """Hand-built compressed fixture, entries e1..e4 then the default table."""
    return CompressedTable(
        (0, 1, 2, 3, 4),
        (
            Entry(((0, 0), (1, 0), (2, 1), (4, 2)), (0, 1, 2, 4), (3,), ((1,), (3,))),
            Entry(((0, 1), (1, 1), (2, 2)), (0, 1, 2), (3, 4), ((0, 1), (2, 2), (3, 0))),
            Entry(((0, 0), (1, 0), (2, 0), (4, 2)), (0, 1, 2, 4), (3,), ((0,), (1,))),
            Entry(((0, 0), (3, 2), (4, 0)), (0, 3, 4), (1, 2), ((2, 0), (0, 1))),
        ),
        ((1, 0, 2, 1, 1), (1, 0, 2, 3, 0)),
    )


@pytest.fixture(name="table4")
def table4_fixture() -> CompressedTable:
    return table4()


def random_table(rng: random.Random, arity, n_tuples, dom, scope=None) -> TableConstraint:
    scope = tuple(range(arity)) if scope is None else tuple(scope)
    space = dom**arity
    n = min(n_tuples, space)
    codes = rng.sample(range(space), n)
    tuples = []
    for code in codes:
        t = []
        for _ in range(arity):
            code, d = divmod(code, dom)
            t.append(d)
        tuples.append(tuple(t))
    return canonicalize(TableConstraint(scope, tuples))


def random_instance(rng: random.Random, max_vars=6, max_dom=5, max_cons=3, max_tuples=60):
    n = rng.randint(2, max_vars)
    doms = [tuple(range(rng.randint(1, max_dom))) for _ in range(n)]
    cons = []
    for _ in range(rng.randint(1, max_cons)):
        arity = rng.randint(2, min(4, n))
        scope = rng.sample(range(n), arity)
        # allow values one past the domain so root filtering has work to do
        tuples = set()
        for _ in range(rng.randint(0, max_tuples)):
            tuples.add(tuple(rng.randint(0, len(doms[v])) for v in scope))
        cons.append(canonicalize(TableConstraint(scope, sorted(tuples))))
    return Instance(doms, cons)
