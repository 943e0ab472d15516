"""Synthetic instance generation: determinism and injected conflict counts."""

import pytest

from spatialcqa.constraints import find_violations
from spatialcqa.synth import gen_synthetic


def _conflicting_tids(inst, sics):
    out = set()
    for v in find_violations(inst, sics):
        out.update(v.tids)
    return out


def test_deterministic_for_fixed_seed():
    a, _ = gen_synthetic(50, 10, "II", seed=7)
    b, _ = gen_synthetic(50, 10, "II", seed=7)
    assert [t.region.to_wkt() for t in a.tuples()] == \
           [t.region.to_wkt() for t in b.tuples()]


def test_seed_changes_layout():
    a, _ = gen_synthetic(50, 0, "II", seed=1)
    b, _ = gen_synthetic(50, 0, "II", seed=2)
    assert [t.region.to_wkt() for t in a.tuples()] != \
           [t.region.to_wkt() for t in b.tuples()]


def test_overlap_conflicts_come_in_pairs():
    inst, sics = gen_synthetic(100, 10, "iintersects", seed=0)
    viols = find_violations(inst, sics)
    assert len(viols) == 5
    assert len(_conflicting_tids(inst, sics)) == 10


@pytest.mark.parametrize("pred", ["equals", "iintersects", "intersects"])
def test_conflicting_tuple_count_matches_request(pred):
    for n, pct in ((100, 10), (60, 7), (40, 25)):
        inst, sics = gen_synthetic(n, pct, pred, seed=3)
        want = int(n * pct / 100)
        assert len(_conflicting_tids(inst, sics)) == want, (pred, n, pct)


@pytest.mark.parametrize("pred", ["equals", "iintersects", "intersects"])
def test_zero_pct_is_consistent_under_every_core_pred(pred):
    inst, sics = gen_synthetic(80, 0, pred, seed=5)
    assert find_violations(inst, sics) == []


def test_equals_conflicts_duplicate_geometries():
    inst, sics = gen_synthetic(40, 10, "equals", seed=0)
    tids = sorted(_conflicting_tids(inst, sics))
    assert len(tids) == 4
    by_tid = {t.tid: t.region for t in inst.tuples()}
    # pairs share a geometry verbatim
    assert by_tid[tids[0]] == by_tid[tids[1]]
    assert by_tid[tids[2]] == by_tid[tids[3]]


def test_odd_conflict_count_uses_one_triple():
    inst, sics = gen_synthetic(60, 5, "iintersects", seed=0)  # k = 3
    viols = find_violations(inst, sics)
    tids = _conflicting_tids(inst, sics)
    assert len(tids) == 3
    # the three overlaps form a complete triangle
    assert len(viols) == 3


def test_single_conflicting_tuple_is_rejected():
    with pytest.raises(ValueError):
        gen_synthetic(10, 10, "II", seed=0)   # floor = 1, no partner


def test_parameter_validation():
    with pytest.raises(ValueError):
        gen_synthetic(0, 0, "II")
    with pytest.raises(ValueError):
        gen_synthetic(10, -1, "II")
    with pytest.raises(ValueError):
        gen_synthetic(10, 101, "II")


def test_grid_too_small_for_adjacent_runs():
    # a 2x2 grid cannot host a run of three adjacent cells in one row
    with pytest.raises(ValueError):
        gen_synthetic(4, 75, "II", seed=0)


def test_thematic_values_index_the_tuples():
    inst, _ = gen_synthetic(25, 0, "II", seed=0)
    assert [t.thematic for t in inst.tuples()] == [(i,) for i in range(25)]
    assert inst.schema.relation("R").key == ("id",)
