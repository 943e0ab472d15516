"""Range and join queries, evaluated directly or under consistent-answer
semantics.

A range query selects the tuples of one relation whose geometry stands in a
given topological relation to a query window; a join query selects ordered
tuple pairs whose geometries stand in the relation (pairs from one relation
joined with itself must differ in tuple id). Consistent answering keeps a
thematic row only if it is answered in every minimal repair, and attaches
the intersection of the row's geometries across those repairs; rows whose
intersection is empty are kept but flagged, so callers can decide whether
an answer with no remaining extent still counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from .constraints import SIC
from .errors import QueryError
from .geometry import (GeometryConfig, Region, intersection,
                       normalize_predicate, topo)
from .index import GridIndex
from .model import Instance, Schema

Query = "RangeQuery | JoinQuery"


@dataclass(frozen=True)
class RangeQuery:
    relation: str
    pred: str
    window: Region

    def __post_init__(self):
        object.__setattr__(self, "pred", normalize_predicate(self.pred))

    def validate(self, schema: Schema) -> None:
        schema.relation(self.relation)


@dataclass(frozen=True)
class JoinQuery:
    relation1: str
    relation2: str
    pred: str

    def __post_init__(self):
        object.__setattr__(self, "pred", normalize_predicate(self.pred))

    def validate(self, schema: Schema) -> None:
        schema.relation(self.relation1)
        schema.relation(self.relation2)


@dataclass(frozen=True)
class AnswerRow:
    tids: Tuple[int, ...]
    values: Tuple
    regions: Tuple[Region, ...]
    empty_geometry: bool = False


class AnswerSet:
    """Query answers in deterministic order (sorted by tuple ids)."""

    def __init__(self, query, rows: List[AnswerRow], path: str = "direct"):
        self.query = query
        self.rows = sorted(rows, key=lambda r: r.tids)
        self.path = path

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def tid_set(self) -> Set[Tuple[int, ...]]:
        return {r.tids for r in self.rows}

    def thematic_set(self) -> Set[Tuple]:
        return {r.values for r in self.rows}


def eval_range(inst: Instance, q: RangeQuery) -> AnswerSet:
    q.validate(inst.schema)
    rows = []
    for t in inst.tuples(q.relation):
        if topo(q.pred, t.region, q.window):
            rows.append(AnswerRow((t.tid,), t.thematic, (t.region,)))
    return AnswerSet(q, rows)


def eval_join(inst: Instance, q: JoinQuery) -> AnswerSet:
    q.validate(inst.schema)
    left = inst.tuples(q.relation1)
    right = inst.tuples(q.relation2)
    same = q.relation1 == q.relation2
    rows = []
    if q.pred == "DJ":
        # Disjointness holds outside the bounding-box overlap, so there is
        # no useful prefilter; enumerate.
        pairs = ((a, b) for a in left for b in right)
    else:
        grid = GridIndex((t.tid, t.region.bounds)
                         for t in right if not t.region.is_empty)
        by_tid = {t.tid: t for t in right}
        pairs = ((a, by_tid[j]) for a in left
                 if not a.region.is_empty
                 for j in grid.candidates(a.region.bounds))
    for a, b in pairs:
        if same and a.tid == b.tid:
            continue
        if topo(q.pred, a.region, b.region):
            rows.append(AnswerRow((a.tid, b.tid), a.thematic + b.thematic,
                                  (a.region, b.region)))
    return AnswerSet(q, rows)


def eval_query(inst: Instance, q) -> AnswerSet:
    if isinstance(q, RangeQuery):
        return eval_range(inst, q)
    if isinstance(q, JoinQuery):
        return eval_join(inst, q)
    raise QueryError(f"not a query: {q!r}")


def cqa_via_repairs(base: Instance, sics: Sequence[SIC], q,
                    config: Optional[GeometryConfig] = None,
                    repair_set=None,
                    drop_empty: bool = False) -> AnswerSet:
    """Consistent answers: rows answered in every minimal repair, with each
    geometry replaced by its intersection across those repairs.

    Accepts a precomputed RepairSet to share one repair enumeration across
    several queries.
    """
    config = config or base.config()
    if repair_set is None:
        from .repair import enumerate_repairs
        repair_set = enumerate_repairs(base, sics, config=config)
    repairs = repair_set.repair_instances()
    assert repairs, "a repair search always yields at least one repair"

    per_repair = [eval_query(r, q) for r in repairs]
    certain = set.intersection(*(a.tid_set() for a in per_repair))
    rows = []
    for tids in sorted(certain):
        first = next(r for r in per_repair[0].rows if r.tids == tids)
        regions = []
        for tid in tids:
            g = repairs[0].get(tid).region
            for rep in repairs[1:]:
                g = intersection(g, rep.get(tid).region, config.eps_area)
            regions.append(g)
        empty = any(g.is_empty for g in regions)
        if empty and drop_empty:
            continue
        rows.append(AnswerRow(tids, first.values, tuple(regions),
                              empty_geometry=empty))
    return AnswerSet(q, rows, path="repairs")


# -- parsing and tabulation ----------------------------------------------

def _parse_window(obj) -> Region:
    if isinstance(obj, str):
        return Region.from_wkt(obj)
    if isinstance(obj, (list, tuple)) and len(obj) == 4:
        x1, y1, x2, y2 = (float(v) for v in obj)
        return Region.box(x1, y1, x2, y2)
    if isinstance(obj, Mapping):
        return Region.from_geojson(obj)
    raise QueryError(f"cannot read window from {obj!r}")


def parse_query(obj: Mapping, schema: Optional[Schema] = None):
    """Read a query from JSON:

        {"type": "range", "relation": "LandP", "pred": "IT",
         "window": [x1, y1, x2, y2] or WKT or GeoJSON geometry}
        {"type": "join", "relations": ["County", "Lake"], "pred": "II"}
    """
    kind = obj.get("type")
    try:
        if kind == "range":
            q = RangeQuery(relation=str(obj["relation"]),
                           pred=str(obj["pred"]),
                           window=_parse_window(obj["window"]))
        elif kind == "join":
            rels = obj["relations"]
            if len(rels) != 2:
                raise QueryError("join queries take exactly two relations")
            q = JoinQuery(relation1=str(rels[0]), relation2=str(rels[1]),
                          pred=str(obj["pred"]))
        else:
            raise QueryError(f"unknown query type {kind!r}")
    except KeyError as exc:
        raise QueryError(f"query is missing field {exc.args[0]!r}") from None
    if schema is not None:
        q.validate(schema)
    return q


def answer_table(answers: AnswerSet, schema: Schema,
                 base: Optional[Instance] = None,
                 explain: bool = False) -> Tuple[List[str], List[list]]:
    """Flatten an AnswerSet to (header, rows) for delimited output.

    Join columns are prefixed with their relation occurrence. With explain
    and a base instance, each geometry gains removed-area columns showing
    how much of the original extent consistent answering discarded.
    """
    q = answers.query
    if isinstance(q, RangeQuery):
        rel_names = [q.relation]
    else:
        rel_names = [q.relation1, q.relation2]
    rels = [schema.relation(n) for n in rel_names]
    header: List[str] = []
    for i, rel in enumerate(rels):
        prefix = rel.name if len(rels) == 1 else f"{rel.name}{i + 1}"
        for a in rel.attr_names:
            header.append(f"{prefix}.{a}" if len(rels) > 1 else a)
    for i in range(len(rels)):
        header.append("geometry" if len(rels) == 1 else f"geometry{i + 1}")
    if explain:
        for i in range(len(rels)):
            suffix = "" if len(rels) == 1 else str(i + 1)
            header += [f"removed_area{suffix}", f"removed_frac{suffix}"]
        header.append("empty_geometry")
    rows = []
    for r in answers.rows:
        row = list(r.values) + [g.to_wkt() for g in r.regions]
        if explain:
            for tid, g in zip(r.tids, r.regions):
                if base is None:
                    row += ["", ""]
                    continue
                g0 = base.get(tid).region
                removed = max(g0.area - g.area, 0.0)
                frac = removed / g0.area if g0.area > 0 else 0.0
                row += [f"{removed:.12g}", f"{frac:.12g}"]
            row.append("true" if r.empty_geometry else "false")
        rows.append(row)
    return header, rows
