"""Shared fixtures: hand-built instances with known repair and core
structure, plus helpers for comparing engine regions against the
rectangle-arithmetic oracle.

Every expected number attached here (areas, deltas, leaf counts) was
derived with tests/oracles.py and frozen; tests compare against these
constants rather than re-deriving them from the engine under test.
"""

from __future__ import annotations

import math
from types import SimpleNamespace

import pytest

from spatialcqa import GeometryConfig, Instance, Region, Schema, parse_sics
from spatialcqa.geometry import geom_union, sym_diff_area
from spatialcqa.model import SpatialTuple

from oracles import BoxRegion

AREA_TOL = 1e-6


def single_key_schema(*names: str) -> Schema:
    """Relations with a single int key attribute 'id'."""
    return Schema.from_json({"relations": {
        n: {"attributes": [["id", "int"]], "key": ["id"]} for n in names}})


def build_instance(schema: Schema, rows) -> Instance:
    """rows: iterable of (relation, thematic tuple, Region); tids 0,1,..."""
    return Instance(schema, [SpatialTuple(i, rel, th, g)
                             for i, (rel, th, g) in enumerate(rows)])


def to_region(br: BoxRegion) -> Region:
    if br.is_empty:
        return Region.empty()
    return geom_union([Region.box(*b) for b in br.boxes])


def assert_region_matches(region: Region, expected: BoxRegion,
                          tol: float = AREA_TOL) -> None:
    d = sym_diff_area(region, to_region(expected))
    assert d <= tol, f"regions differ by area {d}"


def area_by_tid(inst: Instance) -> dict:
    return {t.tid: t.region.area for t in inst.tuples()}


# -- land parcels with buildings (four minimal repairs) --------------------

@pytest.fixture
def fig8():
    """Four parcels and two buildings, one parcel fully containing another.

    Inconsistencies: parcel interiors meet (g2/g3 overlap, g4 lies inside
    g2) and buildings overlap parcels improperly (g5 sticks out of g1; g6
    straddles g2's border). Four minimal repairs, cartesian in two
    independent choices: the g2/g4 containment is settled by either carving
    g4 out of g2 or emptying g4, and the g6 overlap is settled by either
    trimming g6 back to g2's border (after which carving g3's span out of
    g2 costs the full 2.0) or notching g6's footprint out of g2 first (the
    0.24 notch is refunded when g3's span is carved, so g3 keeps the notch
    and the totals tie at 3.25). The core of g3's conflictors therefore
    shrinks to what survives both orders.
    """
    schema = Schema.from_json({"relations": {
        "LandP": {"attributes": [["idl", "int"], ["name", "str"],
                                 ["owner", "str"]],
                  "key": ["idl"]},
        "Building": {"attributes": [["idb", "int"]], "key": ["idb"]},
    }})
    B = Region.box
    rows = [
        ("LandP", (1, "n1", "o1"), B(0, 0, 2, 2)),        # tid 0
        ("LandP", (2, "n2", "o2"), B(3, 0, 6, 2)),        # tid 1
        ("LandP", (3, "n3", "o3"), B(5, 0, 7, 2)),        # tid 2
        ("LandP", (4, "n4", "o4"), B(3.5, 0.5, 4.5, 1.5)),  # tid 3
        ("Building", (1,), B(-0.25, 0.5, 0.75, 1.5)),     # tid 4
        ("Building", (2,), B(5.4, 0.8, 6.5, 1.2)),        # tid 5
    ]
    sics = parse_sics([
        {"id": "landp-ii",
         "atoms": [{"relation": "LandP", "var": "p1"},
                   {"relation": "LandP", "var": "p2"}],
         "topo": {"pred": "II", "args": ["p1", "p2"]},
         "where": [{"op": "!=", "left": ["p1", "idl"],
                    "right": ["p2", "idl"]}]},
        {"id": "building-overlap",
         "atoms": [{"relation": "Building", "var": "b"},
                   {"relation": "LandP", "var": "p"}],
         "topo": {"pred": "OV", "args": ["b", "p"]}},
    ], schema)
    inst = build_instance(schema, rows)
    return SimpleNamespace(
        inst=inst, sics=sics, schema=schema,
        config=GeometryConfig(d=0.1, eps_area=1e-9),
        areas={0: 4.0, 1: 6.0, 2: 4.0, 3: 1.0, 4: 1.0, 5: 0.44},
        min_delta=3.25,
        n_minimal=4,
        next_best_delta=3.45,
        core_areas={0: 4.0, 1: 3.0, 2: 2.24, 3: 0.0, 4: 0.75, 5: 0.44},
        core_regions={
            0: BoxRegion.box(0, 0, 2, 2),
            1: BoxRegion.box(3, 0, 5, 2).subtract(
                BoxRegion.box(3.5, 0.5, 4.5, 1.5)),
            2: BoxRegion.box(6, 0, 7, 2).union(
                BoxRegion.box(5.4, 0.8, 6, 1.2)),
            3: BoxRegion.empty(),
            4: BoxRegion.box(0, 0.5, 0.75, 1.5),
            5: BoxRegion.box(5.4, 0.8, 6.5, 1.2),
        },
        # direct core over the LandP II constraint alone (no buildings):
        # every conflictor is simply subtracted, so g2 also loses g3's span
        landp_only_core_areas={0: 4.0, 1: 3.0, 2: 2.0, 3: 0.0},
        # thin range window crossing parcels 1..3 at mid height; it reaches
        # past x=6 so parcel 3 still answers in the repairs where it loses
        # its [5,6] span, while parcel 4 is emptied in some repairs
        cqa_window=Region.box(1, 0.9, 6.1, 1.1),
        cqa_certain_tids={(0,), (1,), (2,)},
        cqa_middle_area=3.0,   # parcel 2 keeps [3,5] minus the contained lot
    )


# -- consistent parcels and buildings for plain query evaluation -----------

@pytest.fixture
def example4():
    """Consistent instance: three parcels tiling [0,2]^2, two buildings
    inside distinct parcels. Used for plain range/join evaluation."""
    schema = Schema.from_json({"relations": {
        "LandP": {"attributes": [["idl", "int"]], "key": ["idl"]},
        "Building": {"attributes": [["idb", "int"]], "key": ["idb"]},
    }})
    B = Region.box
    rows = [
        ("LandP", (1,), B(0, 0, 1, 1)),          # tid 0
        ("LandP", (2,), B(1, 0, 2, 1)),          # tid 1
        ("LandP", (3,), B(0, 1, 2, 2)),          # tid 2
        ("Building", (1,), B(0.2, 0.2, 0.4, 0.4)),  # tid 3
        ("Building", (2,), B(1.2, 0.2, 1.6, 0.6)),  # tid 4
    ]
    inst = build_instance(schema, rows)
    return SimpleNamespace(
        inst=inst, schema=schema,
        window=Region.box(1.4, 0.3, 1.8, 0.8),
        q1_tids={(4,)},                      # buildings intersecting window
        q2_pairs={(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)},
        b2_window_overlap=0.06,
    )


# -- two overlapping strips: certain answers beyond every repair -----------

@pytest.fixture
def example13():
    """Two horizontally overlapping strips under an interiors-meet denial.

    The window [1,2]x[0,1] equals the overlap. Both core geometries touch
    the window, but in each of the two minimal repairs one strip keeps the
    overlap and therefore meets the window's interior, so the repair route
    certifies nothing for a touches query while the core route answers 2.
    """
    schema = single_key_schema("Zone")
    B = Region.box
    rows = [("Zone", (1,), B(0, 0, 2, 1)), ("Zone", (2,), B(1, 0, 3, 1))]
    inst = build_instance(schema, rows)
    sics = parse_sics([{"id": "zone-ii", "relation": "Zone", "pred": "II"}],
                      schema)
    return SimpleNamespace(
        inst=inst, sics=sics, schema=schema,
        config=GeometryConfig(d=0.1, eps_area=1e-9),
        window=Region.box(1, 0, 2, 1),
        core_areas={0: 1.0, 1: 1.0},
        n_core_touch_answers=2,
        n_repair_touch_answers=0,
    )


# -- counties and lakes: two relations, II plus IT constraints -------------

@pytest.fixture
def county_lake():
    """Chained counties (interiors-meet denial) plus two lakes that touch
    (intersection denial with separation d=0.05). 16 minimal repairs; the
    core join with the counties has exactly one certain pair."""
    schema = Schema.from_json({"relations": {
        "County": {"attributes": [["idc", "int"]], "key": ["idc"]},
        "Lake": {"attributes": [["idk", "int"]], "key": ["idk"]},
    }})
    B = Region.box
    rows = [
        ("County", (1,), B(0, 0, 3, 2)),    # tid 0
        ("County", (2,), B(2, 0, 5, 2)),    # tid 1
        ("County", (3,), B(4, 0, 7, 2)),    # tid 2
        ("County", (4,), B(6, 0, 9, 2)),    # tid 3
        ("County", (5,), B(10, 0, 11, 1)),  # tid 4
        ("Lake", (1,), B(4.2, 2.5, 5.2, 4)),   # tid 5
        ("Lake", (2,), B(5.2, 1.5, 6.2, 3)),   # tid 6
    ]
    inst = build_instance(schema, rows)
    sics = parse_sics([
        {"id": "county-ii", "relation": "County", "pred": "II"},
        {"id": "lake-it", "relation": "Lake", "pred": "IT"},
    ], schema)
    d = 0.05
    return SimpleNamespace(
        inst=inst, sics=sics, schema=schema,
        config=GeometryConfig(d=d, eps_area=1e-9),
        county_core_areas=[4.0, 2.0, 2.0, 4.0, 1.0],
        # the buffered contact strip is d deep along the 0.5-long shared
        # edge and spills d past it on the one side where the lake extends
        lake_core_area=1.5 - d * (0.5 + d),
        n_minimal=16,
        min_delta=6.0 + d * (0.5 + d),
        join_pair={(2, 6)},   # third county with the second lake
        join_overlap=0.4,
    )


# -- chains of equally overlapping strips -----------------------------------

def make_chain(n: int):
    """n unit-height strips, each overlapping only its successor by 0.5."""
    schema = single_key_schema("Strip")
    rows = [("Strip", (i + 1,), Region.box(1.5 * i, 0, 1.5 * i + 2, 1))
            for i in range(n)]
    inst = build_instance(schema, rows)
    sics = parse_sics([{"id": "strip-ii", "relation": "Strip", "pred": "II"}],
                      schema)
    return SimpleNamespace(
        inst=inst, sics=sics, schema=schema,
        config=GeometryConfig(d=0.1, eps_area=1e-9),
        n_leaves=2 ** (n - 1),
        min_delta=0.5 * (n - 1),
    )


@pytest.fixture
def chain4():
    return make_chain(4)
