"""Denial spatial integrity constraints and violation detection.

A denial constraint forbids any binding of tuple variables to stored tuples
that satisfies all of: the relation atoms, the thematic comparisons, and one
topological atom over two of the variables' geometries. The core form is
the special case used throughout repair semantics: the same relation twice,
tuples distinguished by key, and a predicate from {intersects, iintersects,
equals}.

JSON input is a list (or {"sics": [...]}) mixing two shapes:

    {"id": "s1", "relation": "LandP", "pred": "II"}

    {"id": "s2",
     "atoms": [{"relation": "Building", "var": "b"},
               {"relation": "LandP", "var": "p"}],
     "topo": {"pred": "OV", "args": ["b", "p"]},
     "where": [{"op": "=", "left": ["p", "owner"], "right": {"const": "city"}}]}

Comparison operands are two-element arrays [var, attr] for attribute
references; anything else ({"const": v}, bare numbers, bare strings) is a
constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import ConstraintError
from .geometry import normalize_predicate, topo
from .index import GridIndex
from .model import Instance, Schema

_CORE_PREDS = ("IT", "II", "EQ")
# Predicate containment for core constraints: EQ-pairs are II-pairs are
# IT-pairs, so a denial on an earlier predicate subsumes denials on later
# ones over the same relation.
_CORE_ORDER = {"IT": 0, "II": 1, "EQ": 2}

_OPS = {
    "=": lambda a, b: a == b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class RelAtom:
    relation: str
    var: str


@dataclass(frozen=True)
class Comparison:
    left: tuple  # ("attr", var, name) or ("const", value)
    op: str
    right: tuple


@dataclass(frozen=True)
class DenialSIC:
    id: str
    atoms: Tuple[RelAtom, ...]
    pred: str
    topo_args: Tuple[str, str]
    where: Tuple[Comparison, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pred", normalize_predicate(self.pred))
        vars_ = [a.var for a in self.atoms]
        if len(set(vars_)) != len(vars_):
            raise ConstraintError(f"{self.id}: duplicate variable names")
        for v in self.topo_args:
            if v not in vars_:
                raise ConstraintError(f"{self.id}: topo variable {v!r} unbound")
        if self.topo_args[0] == self.topo_args[1]:
            raise ConstraintError(f"{self.id}: topo atom needs two variables")

    def validate(self, schema: Schema) -> None:
        for a in self.atoms:
            rel = schema.relation(a.relation)
            names = set(rel.attr_names)
            for cmp_ in self.where:
                for side in (cmp_.left, cmp_.right):
                    if side[0] == "attr" and side[1] == a.var and side[2] not in names:
                        raise ConstraintError(
                            f"{self.id}: {a.var}.{side[2]} not in {a.relation}")


@dataclass(frozen=True)
class CoreSIC:
    id: str
    relation: str
    pred: str

    def __post_init__(self):
        object.__setattr__(self, "pred", normalize_predicate(self.pred))
        if self.pred not in _CORE_PREDS:
            raise ConstraintError(
                f"{self.id}: core constraints take one of {_CORE_PREDS}, "
                f"not {self.pred}")

    def validate(self, schema: Schema) -> None:
        schema.relation(self.relation)


SIC = Union[CoreSIC, DenialSIC]


@dataclass(frozen=True)
class Violation:
    """One witnessed violation: the bound tuples and the topological pair.

    tid1/tid2 are bound to the topo atom's first/second argument; tids is
    the full binding, sorted, and identifies the violation for dedup.
    """
    sic_id: str
    pred: str
    tid1: int
    tid2: int
    tids: Tuple[int, ...]

    @property
    def pair(self) -> Tuple[int, int]:
        return (self.tid1, self.tid2)


# -- parsing -------------------------------------------------------------

def _parse_operand(obj) -> tuple:
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return ("attr", str(obj[0]), str(obj[1]))
    if isinstance(obj, dict) and "const" in obj:
        return ("const", obj["const"])
    return ("const", obj)


def parse_sic(obj: Mapping, default_id: str) -> SIC:
    sid = str(obj.get("id", default_id))
    if "atoms" in obj:
        atoms = tuple(RelAtom(str(a["relation"]), str(a["var"]))
                      for a in obj["atoms"])
        t = obj.get("topo")
        if not t:
            raise ConstraintError(f"{sid}: missing topo atom")
        where = tuple(
            Comparison(_parse_operand(c["left"]), str(c["op"]),
                       _parse_operand(c["right"]))
            for c in obj.get("where", ()))
        for c in where:
            if c.op not in _OPS:
                raise ConstraintError(f"{sid}: unknown operator {c.op!r}")
        return DenialSIC(id=sid, atoms=atoms, pred=str(t["pred"]),
                         topo_args=(str(t["args"][0]), str(t["args"][1])),
                         where=where)
    if "relation" in obj:
        return CoreSIC(id=sid, relation=str(obj["relation"]),
                       pred=str(obj["pred"]))
    raise ConstraintError(f"{sid}: need either 'relation' or 'atoms'")


def parse_sics(obj, schema: Optional[Schema] = None) -> Tuple[SIC, ...]:
    items = obj.get("sics", []) if isinstance(obj, Mapping) else obj
    sics = tuple(parse_sic(item, f"sic{i + 1}")
                 for i, item in enumerate(items))
    ids = [s.id for s in sics]
    if len(set(ids)) != len(ids):
        raise ConstraintError("duplicate constraint ids")
    if schema is not None:
        for s in sics:
            s.validate(schema)
    return sics


def as_core_sic(sic: SIC, schema: Schema) -> Optional[CoreSIC]:
    """Recognize a constraint in core form, longhand or shorthand."""
    if isinstance(sic, CoreSIC):
        return sic
    if len(sic.atoms) != 2 or sic.pred not in _CORE_PREDS:
        return None
    a, b = sic.atoms
    if a.relation != b.relation:
        return None
    key = schema.relation(a.relation).key
    if len(key) != 1:
        return None
    k = key[0]
    want = {(("attr", a.var, k), ("attr", b.var, k)),
            (("attr", b.var, k), ("attr", a.var, k))}
    neq = [c for c in sic.where if c.op == "!="]
    if len(sic.where) == 1 and len(neq) == 1 and \
            (neq[0].left, neq[0].right) in want:
        return CoreSIC(id=sic.id, relation=a.relation, pred=sic.pred)
    return None


def normalize_core_sics(sics: Sequence[CoreSIC]) -> Tuple[CoreSIC, ...]:
    """Per relation, keep only the subsuming predicate (IT before II before
    EQ): every equal pair iintersects and every iintersecting pair
    intersects, and the stronger denial's conflict handling covers the
    weaker one's."""
    best: Dict[str, CoreSIC] = {}
    for s in sics:
        cur = best.get(s.relation)
        if cur is None or _CORE_ORDER[s.pred] < _CORE_ORDER[cur.pred]:
            best[s.relation] = s
    return tuple(best[r] for r in sorted(best))


# -- evaluation ----------------------------------------------------------

def _attr_value(inst: Instance, tid: int, var_attr: tuple,
                var_rel: Mapping[str, str]):
    _, var, name = var_attr
    t = inst.get(tid)
    rel = inst.schema.relation(var_rel[var])
    return t.thematic[rel.attr_names.index(name)]


def _eval_where(inst: Instance, where: Sequence[Comparison],
                binding: Mapping[str, int], var_rel: Mapping[str, str]) -> bool:
    for c in where:
        def val(op):
            if op[0] == "const":
                return op[1]
            if op[1] not in binding:
                return _UNBOUND
            return _attr_value(inst, binding[op[1]], op, var_rel)
        left, right = val(c.left), val(c.right)
        if left is _UNBOUND or right is _UNBOUND:
            continue  # defer until both sides bound
        try:
            if not _OPS[c.op](left, right):
                return False
        except TypeError as exc:
            raise ConstraintError(
                f"comparison over incompatible types in {c}") from exc
    return True


_UNBOUND = object()


def _core_violations(inst: Instance, sic: CoreSIC) -> List[Violation]:
    tuples = [t for t in inst.tuples(sic.relation) if not t.region.is_empty]
    grid = GridIndex((t.tid, t.region.bounds) for t in tuples)
    out = []
    for i, j in grid.pairs():
        if topo(sic.pred, inst.get(i).region, inst.get(j).region):
            out.append(Violation(sic.id, sic.pred, i, j, (i, j)))
    return out


def _denial_violations(inst: Instance, sic: DenialSIC) -> List[Violation]:
    var_rel = {a.var: a.relation for a in sic.atoms}
    v1, v2 = sic.topo_args
    out: List[Violation] = []

    # Bind the topo atom's first variable's atom first, its partner second
    # (grid-restricted), then the rest; thematic filters apply as soon as
    # both sides of a comparison are bound.
    order = [v1, v2] + [a.var for a in sic.atoms if a.var not in (v1, v2)]
    grids: Dict[str, GridIndex] = {}

    def grid_for(rel: str) -> GridIndex:
        if rel not in grids:
            grids[rel] = GridIndex(
                (t.tid, t.region.bounds)
                for t in inst.tuples(rel) if not t.region.is_empty)
        return grids[rel]

    def extend(pos: int, binding: Dict[str, int]):
        if pos == len(order):
            g1 = inst.get(binding[v1]).region
            g2 = inst.get(binding[v2]).region
            if topo(sic.pred, g1, g2):
                out.append(Violation(
                    sic.id, sic.pred, binding[v1], binding[v2],
                    tuple(sorted(binding.values()))))
            return
        var = order[pos]
        rel = var_rel[var]
        if var == v2 and v1 in binding:
            g1 = inst.get(binding[v1]).region
            if g1.is_empty:
                return
            tids = grid_for(rel).candidates(g1.bounds)
        else:
            tids = [t.tid for t in inst.tuples(rel) if not t.region.is_empty] \
                if var in (v1, v2) else [t.tid for t in inst.tuples(rel)]
        for tid in tids:
            binding[var] = tid
            if _eval_where(inst, sic.where, binding, var_rel):
                extend(pos + 1, binding)
            del binding[var]

    extend(0, {})
    return out


def find_violations(inst: Instance, sics: Sequence[SIC]) -> List[Violation]:
    """All violations, deduped by constraint and bound tuple set.

    Output order is deterministic: constraints in given order, then sorted
    tuple ids.
    """
    out: List[Violation] = []
    seen = set()
    for sic in sics:
        vs = (_core_violations(inst, sic) if isinstance(sic, CoreSIC)
              else _denial_violations(inst, sic))
        vs.sort(key=lambda v: v.tids)
        for v in vs:
            key = (v.sic_id, frozenset(v.tids))
            if key not in seen:
                seen.add(key)
                out.append(v)
    return out


def is_consistent(inst: Instance, sics: Sequence[SIC]) -> bool:
    return not find_violations(inst, sics)
