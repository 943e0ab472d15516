"""Uniform-grid index over tuple bounding boxes.

Constraint checking and join evaluation only need candidate pairs whose
boxes touch, so a flat bucket grid beats a tree here: instances are
rebuilt after every repair step and build cost dominates.
"""

from __future__ import annotations

import math
from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple

Bounds = Tuple[float, float, float, float]


class GridIndex:
    def __init__(self, items: Iterable[Tuple[int, Optional[Bounds]]],
                 target_per_cell: float = 4.0):
        entries = [(i, b) for i, b in items if b is not None]
        self._bounds: Dict[int, Bounds] = dict(entries)
        self._cells: Dict[Tuple[int, int], List[int]] = {}
        if not entries:
            self._origin = (0.0, 0.0)
            self._cell = 1.0
            return
        minx = min(b[0] for _, b in entries)
        miny = min(b[1] for _, b in entries)
        maxx = max(b[2] for _, b in entries)
        maxy = max(b[3] for _, b in entries)
        span = max(maxx - minx, maxy - miny, 1e-300)
        n_cells = max(1.0, len(entries) / target_per_cell)
        self._cell = span / max(1.0, math.sqrt(n_cells))
        self._origin = (minx, miny)
        for i, b in entries:
            for c in self._cover(b):
                self._cells.setdefault(c, []).append(i)

    def _cover(self, b: Bounds) -> Iterator[Tuple[int, int]]:
        ox, oy = self._origin
        s = self._cell
        x0 = math.floor((b[0] - ox) / s)
        x1 = math.floor((b[2] - ox) / s)
        y0 = math.floor((b[1] - oy) / s)
        y1 = math.floor((b[3] - oy) / s)
        for cx in range(x0, x1 + 1):
            for cy in range(y0, y1 + 1):
                yield (cx, cy)

    @staticmethod
    def _touch(a: Bounds, b: Bounds) -> bool:
        return not (a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1])

    def candidates(self, bounds: Optional[Bounds]) -> List[int]:
        """Ids whose boxes intersect the query box, sorted."""
        if bounds is None:
            return []
        hits: Set[int] = set()
        for c in self._cover(bounds):
            for i in self._cells.get(c, ()):
                if i not in hits and self._touch(self._bounds[i], bounds):
                    hits.add(i)
        return sorted(hits)

    def pairs(self) -> Iterator[Tuple[int, int]]:
        """Unordered id pairs (i < j) with intersecting boxes, each once."""
        seen: Set[Tuple[int, int]] = set()
        for bucket in self._cells.values():
            for a in range(len(bucket)):
                for b in range(a + 1, len(bucket)):
                    i, j = bucket[a], bucket[b]
                    if i > j:
                        i, j = j, i
                    if (i, j) in seen:
                        continue
                    if self._touch(self._bounds[i], self._bounds[j]):
                        seen.add((i, j))
        return iter(sorted(seen))
