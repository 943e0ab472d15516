"""The core of an inconsistent instance: the single consistent instance on
which sound consistent answers can be computed without enumerating repairs.

Two constructions are provided. core_via_repairs intersects each tuple's
geometry across all minimal repairs (the definition). core_direct builds
the same region arithmetic straight from the conflict sets, one pass per
tuple, for constraint sets in core form:

    iintersects  g* = g minus the union of its conflictors
    intersects   g* = g minus the union of its conflictors' d-buffers
    equals       g* = empty as soon as one conflictor exists

Every thematic tuple survives, possibly with an empty geometry; relations
without a constraint pass through unchanged. Several core-form constraints
on one relation reduce to the subsuming one first (an intersects denial
covers an iintersects denial covers an equals denial).

Answering a query on the core is only guaranteed to match the certain
answers for intersects/iintersects queries; other predicates can gain
answers on the core that no repair supports, so cqa_via_core refuses them
unless strict is turned off.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .constraints import SIC, CoreSIC, as_core_sic, normalize_core_sics
from .errors import ConstraintError, QueryError
from .geometry import (GeometryConfig, Region, buffer, difference,
                       geom_union, intersection, topo)
from .index import GridIndex
from .model import Instance
from .parallel import parallel_map
from .query import AnswerSet, eval_query


@dataclass(frozen=True)
class ConflictSet:
    """Per-tuple conflicts under one core-form constraint: tuple id to the
    sorted ids of same-relation tuples standing in the forbidden relation.
    Symmetric and irreflexive by construction."""
    sic: CoreSIC
    conflicts: Tuple[Tuple[int, Tuple[int, ...]], ...]

    def as_dict(self) -> Dict[int, Tuple[int, ...]]:
        return dict(self.conflicts)


@dataclass(frozen=True)
class CoreInstance:
    """An instance whose geometries are the per-tuple intersections over
    all minimal repairs, together with which construction produced it."""
    instance: Instance
    provenance: str  # "direct" or "repairs"

    def __len__(self) -> int:
        return len(self.instance)

    def get(self, tid: int):
        return self.instance.get(tid)

    def tuples(self, relation: Optional[str] = None):
        return self.instance.tuples(relation)

    @property
    def tids(self):
        return self.instance.tids


def _coerce_core(sics: Sequence[SIC], schema) -> List[CoreSIC]:
    out = []
    for s in sics:
        c = as_core_sic(s, schema)
        if c is None:
            raise ConstraintError(
                f"{s.id}: core construction requires core-form constraints")
        out.append(c)
    return out


def conflict_sets(inst: Instance, sics: Sequence[SIC]) -> List[ConflictSet]:
    """Conflict sets under the normalized core-form constraints."""
    core_sics = normalize_core_sics(_coerce_core(sics, inst.schema))
    out = []
    for sic in core_sics:
        tuples = [t for t in inst.tuples(sic.relation) if not t.region.is_empty]
        grid = GridIndex((t.tid, t.region.bounds) for t in tuples)
        by_tid = {t.tid: t for t in tuples}
        conf: Dict[int, List[int]] = {}
        for i, j in grid.pairs():
            if topo(sic.pred, by_tid[i].region, by_tid[j].region):
                conf.setdefault(i, []).append(j)
                conf.setdefault(j, []).append(i)
        out.append(ConflictSet(
            sic, tuple((tid, tuple(sorted(conf[tid])))
                       for tid in sorted(conf))))
    return out


def core_direct(inst: Instance, sics: Sequence[SIC],
                config: Optional[GeometryConfig] = None,
                threads: int = 1) -> CoreInstance:
    """Build the core by per-tuple region arithmetic over conflict sets;
    no repair enumeration is performed."""
    config = config or inst.config()
    eps = config.eps_area

    def shrink(job) -> Tuple[int, Region]:
        pred, tid, others = job
        g = inst.get(tid).region
        if pred == "EQ":
            return tid, Region.empty()
        if pred == "II":
            block = geom_union([inst.get(o).region for o in others], eps)
        else:  # IT
            block = geom_union([buffer(inst.get(o).region, config.d, eps)
                                for o in others], eps)
        return tid, difference(g, block, eps)

    jobs = [(cs.sic.pred, tid, others)
            for cs in conflict_sets(inst, sics)
            for tid, others in cs.conflicts]
    replacements = dict(parallel_map(shrink, jobs, threads))
    return CoreInstance(inst.with_regions(replacements), provenance="direct")


def core_via_repairs(inst: Instance, sics: Sequence[SIC],
                     config: Optional[GeometryConfig] = None,
                     repair_set=None) -> CoreInstance:
    """Build the core as the tuple-wise intersection of all minimal repairs."""
    config = config or inst.config()
    if repair_set is None:
        from .repair import enumerate_repairs
        repair_set = enumerate_repairs(inst, sics, config=config)
    repairs = repair_set.repair_instances()
    replacements: Dict[int, Region] = {}
    for tid in inst.tids:
        g = repairs[0].get(tid).region
        for rep in repairs[1:]:
            g = intersection(g, rep.get(tid).region, config.eps_area)
        replacements[tid] = g
    return CoreInstance(inst.with_regions(replacements), provenance="repairs")


_SOUND_QUERY_PREDS = ("IT", "II")


def cqa_via_core(inst: Instance, sics: Sequence[SIC], q,
                 config: Optional[GeometryConfig] = None,
                 strict: bool = True,
                 core: Optional[CoreInstance] = None) -> AnswerSet:
    """Consistent answers computed on the core instead of over repairs.

    Exact for intersects/iintersects range queries and cross-relation
    joins under core-form constraints. A self join can certify a pair
    whose conflicting geometries stay touching in every repair; the core
    separates them, so this route misses such rows (it never invents
    any). Use the repairs route when those rows matter. With strict off,
    other predicates are evaluated anyway and the caller owns the
    interpretation. A precomputed core can be passed in to answer many
    queries from one materialization.
    """
    if strict and q.pred not in _SOUND_QUERY_PREDS:
        raise QueryError(
            f"answers on the core are only certain for "
            f"{_SOUND_QUERY_PREDS}; got {q.pred} (pass strict=False to "
            f"evaluate anyway)")
    if core is None:
        core = core_direct(inst, sics, config)
    answers = eval_query(core.instance, q)
    return AnswerSet(q, answers.rows, path="core")
