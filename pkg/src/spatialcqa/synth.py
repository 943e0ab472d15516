"""Synthetic instance generator for benchmarks and scale tests.

Tuples are axis-aligned rectangles, one per cell of a regular grid, sized
and placed randomly inside their cells with margins wide enough that the
base instance is consistent under any core-form constraint. A requested
fraction of tuples is then rewired into conflict groups: consecutive
same-row tuples get geometries derived from their left neighbor so that
exactly the chosen predicate holds within each group and nothing else
changes. Groups are pairs, plus one triple when the conflict count is odd
(a single conflicting tuple is impossible; conflicts need a partner).

Offsets are chosen so a rewired geometry never reaches the rectangles of
untouched cells: cells are 10 wide, rectangles at most 6, and the farthest
reach of any group member stays short of the next occupied cell's margin.
"""

from __future__ import annotations

import math
import random
from typing import List, Tuple

from .constraints import CoreSIC, SIC
from .geometry import Region
from .model import Instance, RelationSchema, Schema, SpatialTuple

CELL = 10.0
_MARGIN = 0.05 * CELL
_WMIN, _WMAX = 0.35 * CELL, 0.6 * CELL


def _box(x: float, y: float, w: float, h: float) -> Region:
    return Region.box(x, y, x + w, y + h)


def gen_synthetic(n: int, pct: float, pred: str,
                  seed: int = 0) -> Tuple[Instance, Tuple[SIC, ...]]:
    """n rectangle tuples with floor(n * pct / 100) of them in conflict
    under a core-form constraint with the given predicate."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= pct <= 100:
        raise ValueError("pct must be within [0, 100]")
    sic = CoreSIC(id="synthetic", relation="R", pred=pred)
    k = int(n * pct / 100)
    if k == 1:
        raise ValueError("a single tuple cannot form a conflict; "
                         "choose pct so that floor(n * pct / 100) != 1")

    side = math.ceil(math.sqrt(n))
    rng = random.Random(seed)
    rects: List[Tuple[float, float, float, float]] = []
    for i in range(n):
        row, col = divmod(i, side)
        w = rng.uniform(_WMIN, _WMAX)
        h = rng.uniform(_WMIN, _WMAX)
        x = col * CELL + rng.uniform(_MARGIN, CELL - _MARGIN - w)
        y = row * CELL + rng.uniform(_MARGIN, CELL - _MARGIN - h)
        rects.append((x, y, w, h))

    groups = _allocate_groups(n, side, k)
    for group in groups:
        ax, ay, aw, ah = rects[group[0]]
        prev = (ax, ay)
        for j, i in enumerate(group[1:]):
            if sic.pred == "EQ":
                nxt = (ax, ay)
            elif sic.pred == "II":
                # zig-zag vertically so chains of overlaps stay inside the
                # vertical margins
                dy = 0.15 * ah if j % 2 == 0 else -0.15 * ah
                nxt = (prev[0] + 0.4 * aw, prev[1] + dy)
            else:  # IT: full-edge contact, same contact cost on both sides
                nxt = (prev[0] + aw, prev[1])
            rects[i] = (nxt[0], nxt[1], aw, ah)
            prev = nxt

    schema = Schema(relations=(RelationSchema(
        name="R", attributes=(("id", "int"),), key=("id",)),))
    tuples = [SpatialTuple(i, "R", (i,), _box(*rects[i])) for i in range(n)]
    return Instance(schema, tuples), (sic,)


def _allocate_groups(n: int, side: int, k: int) -> List[List[int]]:
    if k == 0:
        return []
    sizes = [2] * (k // 2) if k % 2 == 0 else [2] * ((k - 3) // 2) + [3]
    groups: List[List[int]] = []
    i = 0
    for size in sizes:
        while True:
            if i + size > n:
                raise ValueError(
                    f"grid of {n} cells ({side} per row) cannot host "
                    f"{k} conflicting tuples in adjacent runs")
            col = i % side
            if col + size <= side:
                groups.append(list(range(i, i + size)))
                i += size
                break
            i += 1
    return groups
