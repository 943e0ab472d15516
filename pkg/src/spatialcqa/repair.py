"""Shrink-only repairs of inconsistent spatial instances.

A repair step falsifies one violated topological atom by shrinking one of
its two argument geometries; the admissible shrink per predicate is:

    OV IC CV   remove the cheaper side: difference(g1, g2) when the common
               part is not larger than the remainder, otherwise
               difference(g1, difference(g1, g2))
    IS CB II   difference(g1, g2)
    WI CO      difference(g1, g2)
    TO IT      difference(g1, buffer(g2, d)), which both clears the contact
               and leaves a gap of width d
    EQ         the empty region
    DJ         not falsifiable by shrinking

Repeatedly applying steps in all admissible ways spans a tree whose
consistent leaves are collected in a RepairSet; leaves at minimum distance
(summed per-tuple symmetric-difference area against the original) are the
repairs proper. Total area strictly decreases along every edge, so the
tree is finite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .constraints import SIC, Violation, as_core_sic, find_violations
from .errors import (RepairInvariantError, SearchLimitExceeded,
                     UnsupportedPredicateError)
from .geometry import (CONVERSE, GeometryConfig, Region, buffer, difference,
                       normalize_predicate, region_key, topo)
from .model import Correlation, Instance, delta_instances, delta_regions
from .parallel import parallel_map

_REMOVE_CHEAPER = ("OV", "IC", "CV")
_REMOVE_COMMON = ("IS", "CB", "II", "WI", "CO")
_SEPARATE = ("TO", "IT")

FIRST_ATOM = "first-atom"
SECOND_ATOM = "second-atom"


def tr(pred: str, g1: Region, g2: Region,
       config: Optional[GeometryConfig] = None) -> Region:
    """Shrink g1 so that pred(g1', g2) is false; g1 unchanged if it already is."""
    pred = normalize_predicate(pred)
    config = config or GeometryConfig()
    if pred == "DJ":
        raise UnsupportedPredicateError(
            "disjointness cannot be falsified by shrinking")
    if not topo(pred, g1, g2):
        return g1
    eps = config.eps_area
    if pred in _REMOVE_CHEAPER:
        rest = difference(g1, g2, eps)
        if g1.area - rest.area <= rest.area:
            return rest
        return difference(g1, rest, eps)
    if pred in _REMOVE_COMMON:
        return difference(g1, g2, eps)
    if pred in _SEPARATE:
        return difference(g1, buffer(g2, config.d, eps), eps)
    assert pred == "EQ"
    return Region.empty()


def tr_converse(pred: str, g2: Region, g1: Region,
                config: Optional[GeometryConfig] = None) -> Region:
    """Shrink g2 (the second argument of the atom) so that pred(g1, g2')
    is false: the same table applied under the converse predicate."""
    return tr(CONVERSE[normalize_predicate(pred)], g2, g1, config)


def _normalize_choice(choice: Union[int, str]) -> int:
    if choice in (0, FIRST_ATOM):
        return 0
    if choice in (1, SECOND_ATOM):
        return 1
    raise ValueError(f"choice must be {FIRST_ATOM!r} or {SECOND_ATOM!r}")


@dataclass(frozen=True)
class RepairNode:
    """A node of the repair tree: an instance plus how it was reached."""
    instance: Instance
    applied: Tuple[Tuple[Violation, str], ...] = ()

    @property
    def total_area(self) -> float:
        return self.instance.total_area()

    @classmethod
    def root(cls, instance: Instance) -> "RepairNode":
        return cls(instance=instance)


def apply_step(node: RepairNode, violation: Violation,
               choice: Union[int, str],
               config: Optional[GeometryConfig] = None) -> RepairNode:
    """One repair step: shrink the geometry on the chosen side of the
    violated atom. The violation must still hold in the node's instance."""
    side = _normalize_choice(choice)
    inst = node.instance
    g1 = inst.get(violation.tid1).region
    g2 = inst.get(violation.tid2).region
    if not topo(violation.pred, g1, g2):
        raise RepairInvariantError(
            f"stale violation: {violation.pred}({violation.tid1},"
            f"{violation.tid2}) no longer holds")
    if side == 0:
        child = inst.with_regions(
            {violation.tid1: tr(violation.pred, g1, g2, config)})
    else:
        child = inst.with_regions(
            {violation.tid2: tr_converse(violation.pred, g2, g1, config)})
    if not child.total_area() < inst.total_area():
        raise RepairInvariantError("repair step did not shrink the instance")
    label = FIRST_ATOM if side == 0 else SECOND_ATOM
    return RepairNode(instance=child, applied=node.applied + ((violation, label),))


@dataclass(frozen=True)
class RepairLeaf:
    """A consistent leaf of the repair tree."""
    instance: Instance
    delta: float
    minimal: bool
    depth: int
    applied: Tuple[Tuple[Violation, str], ...]


class RepairSet:
    """All distinct consistent leaves for one instance, minimal ones
    flagged; .repairs narrows to the minimal subset."""

    def __init__(self, base: Instance, leaves: List[RepairLeaf],
                 nodes_expanded: int, config: GeometryConfig):
        self.base = base
        self.leaves = leaves
        self.nodes_expanded = nodes_expanded
        self.config = config

    @property
    def minimal_delta(self) -> float:
        return min(l.delta for l in self.leaves)

    @property
    def repairs(self) -> List[RepairLeaf]:
        return [l for l in self.leaves if l.minimal]

    def repair_instances(self) -> List[Instance]:
        return [l.instance for l in self.repairs]


@dataclass(frozen=True)
class VersionSet:
    """The versions of one tuple's geometry across all minimal repairs."""
    tid: int
    regions: Tuple[Region, ...]

    def minimum(self, eps: float = 0.0) -> Optional[Region]:
        """The version contained in every other one, if there is one."""
        for g in self.regions:
            if all(difference(g, other, max(eps, 1e-300)).area <= eps
                   for other in self.regions):
                return g
        return None


def versions(repair_set: RepairSet, tid: int) -> VersionSet:
    """Distinct geometry versions of one tuple across the minimal repairs."""
    repair_set.base.get(tid)  # raises KeyError for unknown tids
    seen = {}
    for inst in repair_set.repair_instances():
        g = inst.get(tid).region
        seen.setdefault(region_key(g), g)
    return VersionSet(tid, tuple(seen[k] for k in sorted(seen)))


@dataclass
class _SearchNode:
    modified: Dict[int, Region]
    applied: Tuple[Tuple[Violation, str], ...]
    key: Tuple


def _search_mode(sics: Sequence[SIC], schema, order_mode: str) -> str:
    if order_mode in ("fixed", "full"):
        return order_mode
    if order_mode != "auto":
        raise ValueError(f"unknown order_mode {order_mode!r}")
    # With core-form constraints only, steps never introduce new conflicts
    # and the leaf set does not depend on which violation is handled first,
    # so expanding a single violation per node spans the whole leaf set.
    # General constraints get full branching over violations.
    if all(as_core_sic(s, schema) is not None for s in sics):
        return "fixed"
    return "full"


def enumerate_repairs(base: Instance, sics: Sequence[SIC],
                      config: Optional[GeometryConfig] = None,
                      order_mode: str = "auto",
                      limit_nodes: int = 10 ** 6,
                      limit_depth: int = 10 ** 3,
                      threads: int = 1) -> RepairSet:
    """Level-synchronous exhaustive search over the repair tree with
    structural memoization; returns every distinct consistent leaf.

    Nodes of one level expand independently (optionally in parallel) and
    merge in frontier order, so the result is identical for any thread
    count. Raises SearchLimitExceeded when the node or depth budget runs
    out, reporting partial progress instead of returning a truncated set.
    """
    config = config or base.config()
    bounds = base.bounds
    quantum = 0.0
    if bounds is not None:
        quantum = 1e-12 * max(bounds[2] - bounds[0], bounds[3] - bounds[1])
    mode = _search_mode(sics, base.schema, order_mode)

    root_pairs = None
    if mode == "fixed":
        root_pairs = {(v.sic_id, frozenset(v.pair))
                      for v in find_violations(base, sics)}

    def node_key(modified: Dict[int, Region]) -> Tuple:
        return tuple(sorted((tid, region_key(g, quantum))
                            for tid, g in modified.items()))

    def expand(node: _SearchNode):
        """Violations of the node and, per (violation, side), the shrunk
        child candidate; pure function of the node."""
        inst = base.with_regions(node.modified)
        violations = find_violations(inst, sics)
        violations.sort(key=lambda v: (v.tids, v.sic_id))
        if not violations:
            delta = sum(delta_regions(base.get(t).region, g)
                        for t, g in node.modified.items())
            return ("leaf", delta)
        if root_pairs is not None:
            extra = {(v.sic_id, frozenset(v.pair))
                     for v in violations} - root_pairs
            if extra:
                raise RepairInvariantError(
                    f"core-form search produced new conflicts: {sorted(extra)}")
        children = []
        for v in (violations[:1] if mode == "fixed" else violations):
            for side in (0, 1):
                tid = v.pair[side]
                target = inst.get(tid).region
                other = inst.get(v.pair[1 - side]).region
                if side == 0:
                    shrunk = tr(v.pred, target, other, config)
                else:
                    shrunk = tr_converse(v.pred, target, other, config)
                if shrunk.area >= target.area:
                    raise RepairInvariantError(
                        f"step on tuple {tid} ({v.pred}) did not shrink it")
                child_mod = dict(node.modified)
                child_mod[tid] = shrunk
                label = FIRST_ATOM if side == 0 else SECOND_ATOM
                children.append(_SearchNode(
                    modified=child_mod,
                    applied=node.applied + ((v, label),),
                    key=node_key(child_mod)))
        return ("inner", children)

    root = _SearchNode(modified={}, applied=(), key=())
    frontier = [root]
    seen = {root.key}
    leaves: List[Tuple[_SearchNode, float, int]] = []
    nodes = 0
    depth = 0

    while frontier:
        if nodes + len(frontier) > limit_nodes:
            raise SearchLimitExceeded(
                f"repair search exceeded {limit_nodes} nodes",
                nodes=nodes + len(frontier), depth=depth, leaves=len(leaves))
        results = parallel_map(expand, frontier, threads)
        nodes += len(frontier)
        next_frontier: List[_SearchNode] = []
        for node, (kind, payload) in zip(frontier, results):
            if kind == "leaf":
                leaves.append((node, payload, depth))
                continue
            for child in payload:
                if child.key == node.key:
                    raise RepairInvariantError(
                        "repair step left the instance unchanged")
                if child.key in seen:
                    continue
                seen.add(child.key)
                next_frontier.append(child)
        if next_frontier and depth >= limit_depth:
            raise SearchLimitExceeded(
                f"repair search exceeded depth {limit_depth}",
                nodes=nodes, depth=depth, leaves=len(leaves))
        frontier = next_frontier
        depth += 1

    if not leaves:
        raise RepairInvariantError("repair search terminated without leaves")
    min_delta = min(d for _, d, _ in leaves)
    leaves.sort(key=lambda item: (item[1], item[0].key))
    out = [RepairLeaf(instance=base.with_regions(n.modified), delta=d,
                      minimal=d <= min_delta + config.eps_area,
                      depth=lvl, applied=n.applied)
           for n, d, lvl in leaves]
    return RepairSet(base, out, nodes, config)


def validate_shrink_repair(base: Instance, candidate: Instance,
                           sics: Sequence[SIC],
                           config: Optional[GeometryConfig] = None,
                           correlation: Optional[Correlation] = None) -> bool:
    """True iff candidate is consistent and every correlated region shrinks
    (within the area tolerance); the checkable part of repair-hood."""
    config = config or base.config()
    if correlation is None:
        correlation = Correlation.identity(base)
    correlation.validate(base, candidate)
    for a, b in correlation.mapping:
        grown = difference(candidate.get(b).region, base.get(a).region,
                           config.eps_area)
        if grown.area > config.eps_area:
            return False
    return not find_violations(candidate, sics)
