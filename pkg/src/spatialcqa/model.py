"""Spatio-relational schema, instances, and the symmetric-difference
distance between correlated instances.

Each relation has thematic attributes (string, integer, or real), a key made
of thematic attributes, and exactly one spatial attribute holding a Region.
Tuples get surrogate integer tids at load time; a repair step replaces a
tuple's region but keeps its tid, so the correlation between an instance and
anything derived from it is the identity on tids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import CorrelationError, KeyViolationError, SchemaError
from .geometry import GeometryConfig, Region, sym_diff_area

_TYPES = {"str": str, "int": int, "float": float}


@dataclass(frozen=True)
class RelationSchema:
    name: str
    attributes: Tuple[Tuple[str, str], ...]  # (attr name, type name)
    key: Tuple[str, ...]
    geometry: str = "geometry"

    def __post_init__(self):
        names = [a for a, _ in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError(f"{self.name}: duplicate attribute names")
        for a, t in self.attributes:
            if t not in _TYPES:
                raise SchemaError(f"{self.name}.{a}: unknown type {t!r}")
        if not self.key:
            raise SchemaError(f"{self.name}: key must be non-empty")
        for k in self.key:
            if k not in names:
                raise SchemaError(f"{self.name}: key attribute {k!r} unknown")
        if self.geometry in names:
            raise SchemaError(
                f"{self.name}: spatial attribute {self.geometry!r} collides "
                "with a thematic attribute")

    @property
    def attr_names(self) -> Tuple[str, ...]:
        return tuple(a for a, _ in self.attributes)

    @property
    def key_positions(self) -> Tuple[int, ...]:
        names = self.attr_names
        return tuple(names.index(k) for k in self.key)

    def coerce(self, name: str, value):
        tname = dict(self.attributes)[name]
        want = _TYPES[tname]
        if isinstance(value, want) and not (want is int and isinstance(value, bool)):
            return value
        try:
            return want(value)
        except (TypeError, ValueError) as exc:
            raise SchemaError(
                f"{self.name}.{name}: cannot read {value!r} as {tname}") from exc


@dataclass(frozen=True)
class Schema:
    relations: Tuple[RelationSchema, ...]

    def __post_init__(self):
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate relation names")

    def relation(self, name: str) -> RelationSchema:
        for r in self.relations:
            if r.name == name:
                return r
        raise SchemaError(f"unknown relation {name!r}")

    def __contains__(self, name: str) -> bool:
        return any(r.name == name for r in self.relations)

    @classmethod
    def from_json(cls, obj: dict) -> "Schema":
        rels = []
        for name, spec in obj.get("relations", {}).items():
            attrs = tuple((a[0], a[1]) if isinstance(a, (list, tuple))
                          else (a["name"], a["type"])
                          for a in spec["attributes"])
            rels.append(RelationSchema(
                name=name,
                attributes=attrs,
                key=tuple(spec["key"]),
                geometry=spec.get("geometry", "geometry")))
        return cls(relations=tuple(rels))

    def to_json(self) -> dict:
        return {"relations": {
            r.name: {
                "attributes": [[a, t] for a, t in r.attributes],
                "key": list(r.key),
                "geometry": r.geometry,
            } for r in self.relations}}


@dataclass(frozen=True)
class SpatialTuple:
    tid: int
    relation: str
    thematic: Tuple
    region: Region

    def key_values(self, rel: RelationSchema) -> Tuple:
        return tuple(self.thematic[i] for i in rel.key_positions)


class Instance:
    """Immutable collection of spatial tuples over a schema.

    Derived instances share unchanged SpatialTuple objects (with_regions), so
    repair trees stay cheap in memory.
    """

    def __init__(self, schema: Schema, tuples: Iterable[SpatialTuple]):
        self.schema = schema
        self._tuples: Dict[int, SpatialTuple] = {}
        by_rel: Dict[str, List[int]] = {r.name: [] for r in schema.relations}
        for t in tuples:
            if t.relation not in by_rel:
                raise SchemaError(f"tuple {t.tid}: unknown relation {t.relation!r}")
            if t.tid in self._tuples:
                raise SchemaError(f"duplicate tid {t.tid}")
            self._tuples[t.tid] = t
            by_rel[t.relation].append(t.tid)
        self._by_relation = {k: tuple(sorted(v)) for k, v in by_rel.items()}

    def __len__(self) -> int:
        return len(self._tuples)

    def __iter__(self):
        return iter(self.tuples())

    @property
    def tids(self) -> Tuple[int, ...]:
        return tuple(sorted(self._tuples))

    def get(self, tid: int) -> SpatialTuple:
        try:
            return self._tuples[tid]
        except KeyError:
            raise KeyError(f"unknown tid {tid}") from None

    def tuples(self, relation: Optional[str] = None) -> List[SpatialTuple]:
        if relation is None:
            return [self._tuples[t] for t in self.tids]
        if relation not in self._by_relation:
            raise SchemaError(f"unknown relation {relation!r}")
        return [self._tuples[t] for t in self._by_relation[relation]]

    def with_regions(self, replacements: Mapping[int, Region]) -> "Instance":
        """New instance with the given tids' regions replaced, tids kept."""
        out = dict(self._tuples)
        for tid, region in replacements.items():
            old = self.get(tid)
            out[tid] = SpatialTuple(old.tid, old.relation, old.thematic, region)
        inst = Instance.__new__(Instance)
        inst.schema = self.schema
        inst._tuples = out
        inst._by_relation = self._by_relation
        return inst

    @property
    def bounds(self) -> Optional[tuple]:
        """Combined bounding box over non-empty regions, or None."""
        boxes = [t.region.bounds for t in self._tuples.values()
                 if not t.region.is_empty]
        if not boxes:
            return None
        return (min(b[0] for b in boxes), min(b[1] for b in boxes),
                max(b[2] for b in boxes), max(b[3] for b in boxes))

    def total_area(self) -> float:
        return sum(t.region.area for t in self._tuples.values())

    def config(self, *, d: Optional[float] = None,
               eps_area: Optional[float] = None) -> GeometryConfig:
        return GeometryConfig.from_bounds(self.bounds, d=d, eps_area=eps_area)


def load_instance(schema: Schema, rows: Mapping[str, Iterable[Mapping]],
                  eps: float = 0.0) -> Instance:
    """Build an Instance from per-relation row mappings.

    Each row maps thematic attribute names to values and the relation's
    spatial attribute to a Region (or a WKT string). Rows identical in key,
    thematic values, and geometry collapse to one tuple; same key with any
    difference elsewhere is a key violation.
    """
    tuples: List[SpatialTuple] = []
    tid = 0
    for rel in schema.relations:
        seen: Dict[Tuple, SpatialTuple] = {}
        for row in rows.get(rel.name, ()):  # missing relation = empty
            thematic = tuple(rel.coerce(a, row[a]) for a in rel.attr_names)
            geom = row.get(rel.geometry, Region.empty())
            if isinstance(geom, str):
                geom = Region.from_wkt(geom, eps) if eps > 0 \
                    else Region.from_wkt(geom)
            if geom is None:
                geom = Region.empty()
            key = tuple(thematic[i] for i in rel.key_positions)
            prior = seen.get(key)
            if prior is not None:
                if prior.thematic == thematic and prior.region.to_wkt() == geom.to_wkt():
                    continue  # duplicate ground atom, set semantics
                raise KeyViolationError(
                    f"{rel.name}: key {key} bound to two different tuples")
            t = SpatialTuple(tid, rel.name, thematic, geom)
            seen[key] = t
            tuples.append(t)
            tid += 1
    return Instance(schema, tuples)


@dataclass(frozen=True)
class Correlation:
    """Bijection between the tids of two instances."""
    mapping: Tuple[Tuple[int, int], ...]

    @classmethod
    def identity(cls, instance: Instance) -> "Correlation":
        return cls(tuple((t, t) for t in instance.tids))

    @classmethod
    def from_dict(cls, d: Mapping[int, int]) -> "Correlation":
        return cls(tuple(sorted(d.items())))

    def as_dict(self) -> Dict[int, int]:
        return dict(self.mapping)

    def validate(self, d1: Instance, d2: Instance) -> None:
        m = self.as_dict()
        if sorted(m) != list(d1.tids):
            raise CorrelationError("correlation domain does not match instance")
        if sorted(m.values()) != list(d2.tids) or len(set(m.values())) != len(m):
            raise CorrelationError("correlation is not a bijection")
        for a, b in m.items():
            ta, tb = d1.get(a), d2.get(b)
            if ta.relation != tb.relation or ta.thematic != tb.thematic:
                raise CorrelationError(
                    f"correlation {a}->{b} does not preserve thematic values")


def delta_regions(g1: Region, g2: Region) -> float:
    """Area of the symmetric difference between two regions."""
    return sym_diff_area(g1, g2)


def delta_instances(d1: Instance, d2: Instance,
                    f: Optional[Correlation] = None) -> float:
    """Sum of per-tuple symmetric-difference areas under correlation f.

    f defaults to the identity on tids (the correlation every repair
    preserves).
    """
    if f is None:
        f = Correlation.identity(d1)
    f.validate(d1, d2)
    return sum(delta_regions(d1.get(a).region, d2.get(b).region)
               for a, b in f.mapping)
