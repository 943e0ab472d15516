"""Rasterization test oracle for the topological predicates.

Evaluates the boundary/interior four-intersection of two regions by
classifying a dense grid of sample points as interior, boundary, or exterior
of each region, then testing the four intersections for non-emptiness on the
samples. The classification is computed here from the raw ring coordinates
with numpy (even-odd crossing test plus distance-to-segment), sharing no code
with the exact predicate path, so agreement between the two is meaningful.

Only reliable for non-degenerate inputs: every feature (polygon extent,
overlap lobe, gap between distinct boundaries) must be larger than a few grid
cells at the chosen resolution.
"""

from __future__ import annotations

import numpy as np

from .errors import OracleResolutionError
from .geometry import Region

# duplicated on purpose: the oracle must not import the checked tables
_ROWS = {
    (False, False, False, False): "DJ",
    (True, False, False, False): "TO",
    (True, True, False, False): "EQ",
    (False, True, True, False): "IS",
    (True, True, True, False): "CB",
    (False, True, False, True): "IC",
    (True, True, False, True): "CV",
    (True, True, True, True): "OV",
}
_DERIVED = {
    "IT": {"TO", "EQ", "IS", "CB", "IC", "CV", "OV"},
    "WI": {"IS", "CB", "EQ"},
    "CO": {"IC", "CV", "EQ"},
    "II": {"EQ", "IS", "CB", "IC", "CV", "OV"},
}
_NAMES = {
    "disjoint": "DJ", "touches": "TO", "equals": "EQ", "inside": "IS",
    "coveredby": "CB", "includes": "IC", "covers": "CV", "overlaps": "OV",
    "intersects": "IT", "within": "WI", "contains": "CO", "iintersects": "II",
}


def _segments(region: Region) -> np.ndarray:
    segs = []
    for shell, holes in region.polygons:
        for ring in (shell, *holes):
            pts = np.asarray(ring, dtype=float)
            segs.append(np.stack([pts[:-1], pts[1:]], axis=1))
    if not segs:
        return np.empty((0, 2, 2))
    return np.concatenate(segs, axis=0)


def _classify(segs: np.ndarray, X: np.ndarray, Y: np.ndarray, tol: float):
    """Interior/boundary masks for sample points against one region."""
    inside = np.zeros(X.shape, dtype=bool)
    d2min = np.full(X.shape, np.inf)
    tol2 = tol * tol
    for (x1, y1), (x2, y2) in segs:
        # even-odd crossing test, half-open in y so vertices count once
        straddles = (y1 > Y) != (y2 > Y)
        if straddles.any():
            cross = (x2 - x1) * (Y - y1) - (X - x1) * (y2 - y1)
            hit = straddles & ((cross > 0) == (y2 > y1))
            inside ^= hit
        # squared distance to the segment
        dx, dy = x2 - x1, y2 - y1
        L2 = dx * dx + dy * dy
        if L2 == 0.0:
            d2 = (X - x1) ** 2 + (Y - y1) ** 2
        else:
            t = ((X - x1) * dx + (Y - y1) * dy) / L2
            np.clip(t, 0.0, 1.0, out=t)
            d2 = (X - (x1 + t * dx)) ** 2 + (Y - (y1 + t * dy)) ** 2
        np.minimum(d2min, d2, out=d2min)
    boundary = d2min <= tol2
    interior = inside & ~boundary
    return interior, boundary


def oracle_quadruple(g1: Region, g2: Region, resolution: int = 512) -> tuple:
    """(bb, ii, bi, ib) non-emptiness sampled on a resolution^2 grid."""
    if g1.is_empty or g2.is_empty:
        raise OracleResolutionError("oracle requires non-empty regions")
    if resolution < 16:
        raise OracleResolutionError(f"resolution {resolution} too coarse")
    b1, b2 = g1.bounds, g2.bounds
    xmin, ymin = min(b1[0], b2[0]), min(b1[1], b2[1])
    xmax, ymax = max(b1[2], b2[2]), max(b1[3], b2[3])
    span = max(xmax - xmin, ymax - ymin)
    if span <= 0:
        raise OracleResolutionError("degenerate combined extent")
    pad = 0.05 * span
    xmin, ymin = xmin - pad, ymin - pad
    span += 2 * pad
    cell = span / resolution
    tol = 1.5 * cell
    coords = (np.arange(resolution) + 0.5) * cell
    X, Y = np.meshgrid(xmin + coords, ymin + coords)
    X, Y = X.ravel(), Y.ravel()

    i1, bd1 = _classify(_segments(g1), X, Y, tol)
    i2, bd2 = _classify(_segments(g2), X, Y, tol)
    for name, imask, bmask in (("first", i1, bd1), ("second", i2, bd2)):
        if not imask.any() or not bmask.any():
            raise OracleResolutionError(
                f"{name} region has features below grid resolution")
    return (
        bool((bd1 & bd2).any()),
        bool((i1 & i2).any()),
        bool((bd1 & i2).any()),
        bool((i1 & bd2).any()),
    )


def predicate_from_quadruple(T: str, quad: tuple) -> bool:
    """Evaluate predicate T for a sampled four-intersection quadruple."""
    code = T.strip().upper()
    if code not in _ROWS.values() and code not in _DERIVED:
        code = _NAMES.get(T.strip().lower())
    if code is None:
        raise OracleResolutionError(f"unknown predicate {T!r}")
    base = _ROWS.get(tuple(bool(x) for x in quad))
    if base is None:
        raise OracleResolutionError(
            f"sampled quadruple {quad} matches no relation; "
            "resolution too coarse for the input features")
    if code in _DERIVED:
        return base in _DERIVED[code]
    return base == code


def topo_oracle(T: str, g1: Region, g2: Region, resolution: int = 512) -> bool:
    """Rasterized evaluation of predicate T; independent of the exact path."""
    if g1.is_empty or g2.is_empty:
        return False
    quad = oracle_quadruple(g1, g2, resolution)
    return predicate_from_quadruple(T, quad)
