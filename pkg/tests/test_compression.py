import math
import random

import pytest

from mfic.compression import (
    CompressedTable,
    CompressionConfig,
    Entry,
    EmptyDB,
    ScopeMismatch,
    area,
    build_compressed,
    choose_smin,
    compress_table,
    compression_stats,
    decompress,
    global_rate,
    local_rate,
    savings,
    select_patterns,
    selection_trace,
)
from mfic.mining import MinedPattern, TransactionDB, coverage, mine_maximal, to_transactions
from mfic.model import TableConstraint

from conftest import letter, random_table

# the six maximal itemsets listed for the running example, covers as listed
LISTED_MFIS = {
    1: (((0, 1), (1, 1), (2, 2)), (8, 9, 10)),
    2: (((0, 0), (1, 0), (2, 0), (4, 2)), (0, 1)),
    3: (((0, 0), (1, 0), (2, 1), (4, 2)), (3, 5)),
    4: (((0, 0), (3, 2), (4, 0)), (2, 4)),
    5: (((0, 1), (1, 0), (3, 1), (4, 2)), (1, 3)),
    6: (((0, 0), (2, 1), (3, 3), (4, 0)), (7, 10)),
}
LISTED_PATTERNS = {i: MinedPattern(u, c, len(c)) for i, (u, c) in LISTED_MFIS.items()}
IDX = {p: i for i, p in LISTED_PATTERNS.items()}

DERIVED_SELECTION = [
    ((0, 1), (1, 1), (2, 2)),
    ((0, 0), (1, 0), (2, 0), (4, 2)),
    ((0, 0), (1, 0), (2, 1), (4, 2)),
    ((0, 0), (3, 2), (4, 0)),
    ((0, 1), (1, 0), (2, 2)),
]
SMIN2 = CompressionConfig(fixed_smin=2)


def test_area_and_savings():
    u3, u4 = "abc", "abcd"
    assert area(u3, 3) == 9 and area(u4, 2) == 8 and area(u3, 0) == 0
    assert savings(u3, 3) == 6 and savings(u4, 2) == 4 and savings(u3, 1) == 0


def test_listed_areas():
    assert [area(u, len(c)) for u, c in LISTED_MFIS.values()] == [9, 8, 8, 6, 8, 8]


def test_local_rate():
    assert local_rate(3, 3, 5) == pytest.approx(0.4, abs=1e-12)
    assert local_rate(4, 2, 5) == pytest.approx(0.4, abs=1e-12)
    assert local_rate(2, 1, 5) == 0


def test_global_rate():
    assert global_rate([(3, 3)], 5, 11) == pytest.approx(6 / 55)
    assert round(global_rate([(3, 3)], 5, 11), 3) == 0.109
    assert global_rate([(4, 2)], 5, 11) == pytest.approx(4 / 55)
    assert global_rate([], 5, 11) == 0


def test_choose_smin_table1(table1_db):
    cfg_min = CompressionConfig(k_ratio=0.8, smin_strategy="min")
    cfg_avg = CompressionConfig(k_ratio=0.8, smin_strategy="avg")
    assert choose_smin(table1_db, cfg_min) == 3
    assert choose_smin(table1_db, cfg_avg) == 3


def test_choose_smin_running_table_k10(running_table):
    db = to_transactions(running_table)
    cfg = CompressionConfig(k_ratio=0.9, smin_strategy="min")
    assert math.ceil(cfg.k_ratio * 11) == 10
    # top-10 closed frequencies are 7,6,5,5,5,4,4,3,3,3
    assert choose_smin(db, cfg) == 3


def test_choose_smin_clamps_to_floor():
    t = TableConstraint((0, 1), [(0, 0), (1, 1), (2, 2)])
    assert choose_smin(to_transactions(t), CompressionConfig(k_ratio=1.0)) == 2


def test_choose_smin_empty():
    with pytest.raises(EmptyDB):
        choose_smin(TransactionDB([]), CompressionConfig())


def test_selection_on_listed_mfis():
    steps = selection_trace(list(LISTED_PATTERNS.values()), "area")
    assert [IDX[p] for p, _ in steps] == [1, 2, 3, 4]
    assert [IDX[p] for p in steps[0][1]] == [6]
    assert [IDX[p] for p in steps[1][1]] == [5]
    assert steps[2][1] == [] and steps[3][1] == []


def test_selection_on_derived_mfis(running_table):
    db = to_transactions(running_table)
    chosen = select_patterns(mine_maximal(db, 2), "area")
    assert [p.itemset for p in chosen] == DERIVED_SELECTION
    assert sorted(t for p in chosen for t in p.cover) == list(range(11))


def test_selection_disjoint_input_only_sorts():
    ps = [MinedPattern(((0, i),), (i,), 1) for i in range(3)]
    ps.append(MinedPattern(((0, 9), (1, 9)), (7, 8), 2))
    assert select_patterns(ps) == [ps[3], ps[0], ps[1], ps[2]]


def test_forced_listed_selection(running_table):
    ct = build_compressed(running_table, [LISTED_MFIS[i][0] for i in (1, 2, 3, 4)])
    assert len(ct.entries) == 4
    assert set(ct.default_tuples) == {(1, 0, 2, 1, 1), (1, 0, 2, 3, 0)}
    assert compression_stats(running_table, ct).c_tup_pct == pytest.approx(100 * 9 / 11)
    assert decompress(ct) == running_table


def test_derived_compression(running_table):
    ct = compress_table(running_table, SMIN2)
    assert [e.itemset for e in ct.entries] == DERIVED_SELECTION
    assert ct.default_tuples == ()
    # itemset cells 3+4+4+3+3, sub-table cells 2*3 + 1*2 + 1*2 + 2*2 + 2*2
    assert ct.cells() == 17 + 18 == 35
    s = compression_stats(running_table, ct)
    assert s.cells_before == 55 and s.cells_after == 35
    assert s.c_tup_pct == 100
    assert s.c_rate_pct == pytest.approx(100 * (1 - 35 / 55))
    assert s.n_itemsets == 5
    assert s.avg_len == pytest.approx(3.4)
    assert s.avg_freq == pytest.approx(2.2)
    assert decompress(ct) == running_table


def test_entry_layout(running_table):
    ct = compress_table(running_table, SMIN2)
    e = ct.entries[3]
    assert e.item_vars == (0, 3, 4) and e.sub_scope == (1, 2)
    # sub-tuples follow source tuple order
    assert e.sub_tuples == ((0, 1), (2, 0))


def test_incompressible_table():
    t = TableConstraint((0, 1, 2), [(0, 0, 0), (1, 1, 1), (2, 2, 2)])
    ct = compress_table(t)
    assert ct.entries == () and len(ct.default_tuples) == 3
    s = compression_stats(t, ct)
    assert (s.c_tup_pct, s.c_rate_pct, s.n_itemsets) == (0, 0, 0)


def test_degenerate_tables_stay_uncompressed():
    unary = TableConstraint((0,), [(0,), (1,)])
    assert compress_table(unary).default_tuples == ((0,), (1,))
    single = TableConstraint((0, 1), [(0, 1)])
    assert compress_table(single).entries == ()


def test_decompress_table4_entry(table4):
    e1 = CompressedTable(table4.scope, table4.entries[:1], ())
    assert decompress(e1).tuples == ((0, 0, 1, 1, 2), (0, 0, 1, 3, 2))


def test_decompress_defaults_only():
    t = ((0, 1), (1, 0))
    assert decompress(CompressedTable((0, 1), (), t)).tuples == t


def test_decompress_scope_mismatch():
    bad = CompressedTable((0, 1, 2), (Entry(((0, 1),), (0,), (1,), ((2,), (3,))),), ())
    with pytest.raises(ScopeMismatch):
        decompress(bad)


CONFIGS = [
    CompressionConfig(smin_strategy=s, metric=m) for s in ("min", "avg") for m in ("area", "savings")
]


@pytest.mark.parametrize("seed", range(60))
def test_compression_invariants(seed):
    rng = random.Random(seed)
    t = random_table(rng, rng.randint(3, 6), rng.randint(10, 80), rng.randint(2, 5))
    db = to_transactions(t)
    for cfg in CONFIGS:
        ct = compress_table(t, cfg)
        assert decompress(ct) == t
        seen: set[int] = set()
        for e in ct.entries:
            assert e.freq >= 2 and 1 <= len(e.itemset) < t.arity
            cover = set(coverage(db, e.itemset))
            assert len(cover) == e.freq
            assert seen.isdisjoint(cover)
            seen |= cover
        assert seen.isdisjoint(t.tuples.index(d) for d in ct.default_tuples)
        s = compression_stats(t, ct)
        assert s.cells_after <= s.cells_before
        assert (s.cells_after == s.cells_before) == (not ct.entries)


@pytest.mark.parametrize("seed", range(30))
def test_greedy_scores_non_increasing(seed):
    rng = random.Random(seed)
    t = random_table(rng, 5, rng.randint(10, 60), 3)
    mfis = mine_maximal(to_transactions(t), 2)
    for metric, fn in (("area", area), ("savings", savings)):
        scores = [fn(p.itemset, p.freq) for p in select_patterns(mfis, metric)]
        assert scores == sorted(scores, reverse=True)


@pytest.mark.parametrize("seed", range(30))
def test_metrics_agree_on_fixed_length_lists(seed):
    rng = random.Random(seed)
    t = random_table(rng, 5, rng.randint(10, 60), 3)
    mfis = mine_maximal(to_transactions(t), 2)
    for length in {len(p) for p in mfis}:
        same = [p for p in mfis if len(p) == length]
        assert select_patterns(same, "area") == select_patterns(same, "savings")


def test_config_validation():
    with pytest.raises(ValueError):
        CompressionConfig(k_ratio=0)
    with pytest.raises(ValueError):
        CompressionConfig(min_freq_floor=1)
    with pytest.raises(ValueError):
        CompressionConfig(metric="tiles")
