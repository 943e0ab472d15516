"""Polygonal region algebra: regularized boolean operations and the
topological predicates used by constraints and queries.

A Region is a closed, bounded, regularized polygonal set: either the empty
region or a finite collection of polygons with holes, each with area above the
tolerance ``eps``. Every operation regularizes its result (keeps the closure
of the interior, drops lower-dimensional artifacts and slivers at or below
``eps``), so results satisfy the Region invariants again.

Predicates classify a pair of non-empty regions by the non-emptiness of the
four boundary/interior intersections, written (bb, ii, bi, ib) for
boundary/boundary, interior/interior, boundary(g1)/interior(g2) and
interior(g1)/boundary(g2). Exactly one of the eight base relations holds:

    DJ disjoint  (F,F,F,F)     TO touches   (T,F,F,F)
    EQ equals    (T,T,F,F)     IS inside    (F,T,T,F)
    CB coveredby (T,T,T,F)     IC includes  (F,T,F,T)
    CV covers    (T,T,F,T)     OV overlaps  (T,T,T,T)

Derived predicates: IT intersects = not DJ; WI within = IS|CB|EQ;
CO contains = IC|CV|EQ; II iintersects = OV|WI|CO, equivalently IT and not
TO. Every predicate is false when either argument is empty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import shapely
from shapely.geometry import MultiPolygon, Polygon, mapping, shape
from shapely.geometry.polygon import orient

from .errors import (
    EmptyGeometryError,
    InvalidGeometryError,
    UnsupportedPredicateError,
)

# Fallback tolerances for standalone use; instance-scaled values come from
# GeometryConfig.from_bounds.
DEFAULT_EPS_AREA = 1e-9
DEFAULT_D = 1e-3

_POLYGONAL = ("Polygon", "MultiPolygon")


@dataclass(frozen=True)
class GeometryConfig:
    """Tolerances shared by geometry-consuming operations.

    d is the separation distance used when touching or intersecting
    geometries must be pushed apart; eps_area is the area tolerance below
    which a region counts as empty and two regions count as equal.
    """

    d: float = DEFAULT_D
    eps_area: float = DEFAULT_EPS_AREA

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError(f"d must be positive, got {self.d}")
        if self.eps_area <= 0:
            raise ValueError(f"eps_area must be positive, got {self.eps_area}")

    @classmethod
    def from_bounds(cls, bounds: Optional[tuple], *,
                    d: Optional[float] = None,
                    eps_area: Optional[float] = None) -> "GeometryConfig":
        """Derive tolerances from a bounding box (xmin, ymin, xmax, ymax).

        Defaults: d = 1e-3 x bbox diagonal, eps_area = 1e-9 x bbox area.
        Explicit d/eps_area values override the derived ones. A None or
        degenerate bounding box falls back to the module defaults.
        """
        if bounds is not None:
            width = bounds[2] - bounds[0]
            height = bounds[3] - bounds[1]
            diag = math.hypot(width, height)
            area = width * height
        else:
            diag = area = 0.0
        derived_d = 1e-3 * diag if diag > 0 else DEFAULT_D
        derived_eps = 1e-9 * area if area > 0 else DEFAULT_EPS_AREA
        return cls(d=d if d is not None else derived_d,
                   eps_area=eps_area if eps_area is not None else derived_eps)


# ---------------------------------------------------------------------------
# Region
# ---------------------------------------------------------------------------

def _polygon_parts(geom) -> list:
    if geom.is_empty:
        return []
    t = geom.geom_type
    if t == "Polygon":
        return [geom]
    if t == "MultiPolygon":
        return list(geom.geoms)
    if t == "GeometryCollection":
        parts = []
        for g in geom.geoms:
            parts.extend(_polygon_parts(g))
        return parts
    # points and lines carry no area
    return []


def _regularize(geom, eps: float):
    """Keep the closure of the interior: polygonal parts with area > eps."""
    kept = []
    for poly in _polygon_parts(geom):
        if poly.area <= eps:
            continue
        holes = [r for r in poly.interiors if Polygon(r).area > eps]
        if len(holes) != len(poly.interiors):
            poly = Polygon(poly.exterior, holes)
        kept.append(orient(poly))
    if not kept:
        return Polygon()
    if len(kept) == 1:
        return kept[0]
    return MultiPolygon(kept)


class Region:
    """Immutable regularized polygonal region.

    Construct through the classmethods (box, from_polygons, from_wkt,
    from_geojson, empty); the raw constructor is internal and assumes an
    already-regularized shapely geometry.
    """

    __slots__ = ("_geom",)

    def __init__(self, geom):
        self._geom = geom

    # -- constructors -------------------------------------------------------

    @classmethod
    def empty(cls) -> "Region":
        return _EMPTY

    @classmethod
    def box(cls, x1: float, y1: float, x2: float, y2: float,
            eps: float = DEFAULT_EPS_AREA) -> "Region":
        if not (x2 > x1 and y2 > y1):
            raise InvalidGeometryError(
                f"degenerate box ({x1},{y1})-({x2},{y2})")
        return cls._from_user(shapely.box(x1, y1, x2, y2), eps)

    @classmethod
    def from_polygons(cls, polygons: Iterable[tuple],
                      eps: float = DEFAULT_EPS_AREA) -> "Region":
        """Build from [(shell, holes), ...] coordinate rings."""
        polys = [Polygon(shell, holes or None) for shell, holes in polygons]
        if not polys:
            return _EMPTY
        geom = polys[0] if len(polys) == 1 else MultiPolygon(polys)
        return cls._from_user(geom, eps)

    @classmethod
    def from_wkt(cls, text: str, eps: float = DEFAULT_EPS_AREA) -> "Region":
        try:
            geom = shapely.from_wkt(text)
        except Exception as exc:
            raise InvalidGeometryError(f"bad WKT: {exc}") from exc
        return cls._from_user(geom, eps)

    @classmethod
    def from_geojson(cls, obj: dict, eps: float = DEFAULT_EPS_AREA) -> "Region":
        if obj is None:
            return _EMPTY
        try:
            geom = shape(obj)
        except Exception as exc:
            raise InvalidGeometryError(f"bad GeoJSON geometry: {exc}") from exc
        return cls._from_user(geom, eps)

    @classmethod
    def _from_user(cls, geom, eps: float) -> "Region":
        if geom is None:
            raise InvalidGeometryError("no geometry")
        if geom.is_empty:
            return _EMPTY
        if geom.geom_type not in _POLYGONAL + ("GeometryCollection",):
            raise InvalidGeometryError(
                f"regions are polygonal, got {geom.geom_type}")
        if not shapely.is_valid(geom):
            raise InvalidGeometryError(
                f"invalid geometry: {shapely.is_valid_reason(geom)}")
        out = _regularize(geom, eps)
        return _EMPTY if out.is_empty else cls(out)

    @classmethod
    def _wrap(cls, geom, eps: float) -> "Region":
        # internal: geom came out of a GEOS operation on valid inputs
        out = _regularize(geom, eps)
        return _EMPTY if out.is_empty else cls(out)

    # -- accessors ----------------------------------------------------------

    @property
    def area(self) -> float:
        return self._geom.area

    @property
    def is_empty(self) -> bool:
        return self._geom.is_empty

    @property
    def bounds(self) -> Optional[tuple]:
        """(xmin, ymin, xmax, ymax), or None when empty."""
        if self._geom.is_empty:
            return None
        return self._geom.bounds

    @property
    def polygons(self) -> list:
        """[(shell_coords, [hole_coords, ...]), ...]"""
        out = []
        for poly in _polygon_parts(self._geom):
            out.append((tuple(poly.exterior.coords),
                        [tuple(r.coords) for r in poly.interiors]))
        return out

    def to_wkt(self) -> str:
        return shapely.to_wkt(self._geom, rounding_precision=-1)

    def to_geojson(self) -> dict:
        return mapping(self._geom)

    def __repr__(self) -> str:
        if self.is_empty:
            return "Region(EMPTY)"
        return f"Region(area={self.area:.6g}, polygons={len(self.polygons)})"

    def __eq__(self, other) -> bool:
        # structural equality; use sym_diff_area for tolerant comparison
        if not isinstance(other, Region):
            return NotImplemented
        return shapely.equals_exact(self._geom, other._geom, 0.0)

    def __hash__(self) -> int:
        return hash(region_key(self))


_EMPTY = Region(Polygon())


def region_key(g: Region, quantum: float = 0.0) -> bytes:
    """Canonical byte key for deduplication.

    quantum > 0 snaps coordinates to that grid (pointwise) first, so regions
    differing only by floating-point noise share a key.
    """
    geom = shapely.normalize(g._geom)
    if quantum > 0:
        geom = shapely.set_precision(geom, quantum, mode="pointwise")
        geom = shapely.normalize(geom)
    return shapely.to_wkb(geom)


# ---------------------------------------------------------------------------
# Boolean operations
# ---------------------------------------------------------------------------

def area(g: Region) -> float:
    return g._geom.area


def is_empty(g: Region) -> bool:
    return g._geom.is_empty


def difference(g1: Region, g2: Region,
               eps: float = DEFAULT_EPS_AREA) -> Region:
    if g2.is_empty:
        return g1
    if g1.is_empty:
        return _EMPTY
    return Region._wrap(g1._geom.difference(g2._geom), eps)


def intersection(g1: Region, g2: Region,
                 eps: float = DEFAULT_EPS_AREA) -> Region:
    if g1.is_empty or g2.is_empty:
        return _EMPTY
    return Region._wrap(g1._geom.intersection(g2._geom), eps)


def union(g1: Region, g2: Region, eps: float = DEFAULT_EPS_AREA) -> Region:
    if g1.is_empty:
        return g2
    if g2.is_empty:
        return g1
    return Region._wrap(g1._geom.union(g2._geom), eps)


def geom_union(gs: Sequence[Region], eps: float = DEFAULT_EPS_AREA) -> Region:
    geoms = [g._geom for g in gs if not g.is_empty]
    if not geoms:
        return _EMPTY
    return Region._wrap(shapely.union_all(geoms), eps)


def buffer(g: Region, d: float, eps: float = DEFAULT_EPS_AREA) -> Region:
    """Square-cap mitred offset of g by d > 0. Contains g; Empty stays Empty."""
    if d <= 0:
        raise ValueError(f"buffer distance must be positive, got {d}")
    if g.is_empty:
        return _EMPTY
    out = g._geom.buffer(d, cap_style="square", join_style="mitre")
    return Region._wrap(out, eps)


def sym_diff_area(g1: Region, g2: Region) -> float:
    """Area of the symmetric difference; 0.0 iff equal up to measure zero."""
    if g1.is_empty:
        return g2.area
    if g2.is_empty:
        return g1.area
    return g1._geom.symmetric_difference(g2._geom).area


# ---------------------------------------------------------------------------
# Topological predicates
# ---------------------------------------------------------------------------

BASE_PREDICATES = ("DJ", "TO", "EQ", "IS", "CB", "IC", "CV", "OV")
DERIVED_PREDICATES = ("IT", "WI", "CO", "II")
ALL_PREDICATES = BASE_PREDICATES + DERIVED_PREDICATES

_NAME_TO_CODE = {
    "disjoint": "DJ", "touches": "TO", "equals": "EQ", "inside": "IS",
    "coveredby": "CB", "includes": "IC", "covers": "CV", "overlaps": "OV",
    "intersects": "IT", "within": "WI", "contains": "CO",
    "iintersects": "II",
}
CODE_TO_NAME = {v: k for k, v in _NAME_TO_CODE.items()}

# (bb, ii, bi, ib) non-emptiness -> base relation
_BASE_ROWS = {
    (False, False, False, False): "DJ",
    (True, False, False, False): "TO",
    (True, True, False, False): "EQ",
    (False, True, True, False): "IS",
    (True, True, True, False): "CB",
    (False, True, False, True): "IC",
    (True, True, False, True): "CV",
    (True, True, True, True): "OV",
}

_DERIVED_SETS = {
    "IT": frozenset(BASE_PREDICATES) - {"DJ"},
    "WI": frozenset({"IS", "CB", "EQ"}),
    "CO": frozenset({"IC", "CV", "EQ"}),
    "II": frozenset({"OV", "IS", "CB", "IC", "CV", "EQ"}),
}

CONVERSE = {
    "DJ": "DJ", "TO": "TO", "EQ": "EQ", "OV": "OV", "IT": "IT", "II": "II",
    "IS": "IC", "IC": "IS", "CB": "CV", "CV": "CB", "WI": "CO", "CO": "WI",
}


def normalize_predicate(name: str) -> str:
    """Accepts a two-letter code or a long name, returns the code."""
    if not isinstance(name, str):
        raise UnsupportedPredicateError(f"predicate must be a string: {name!r}")
    up = name.strip().upper()
    if up in ALL_PREDICATES:
        return up
    low = name.strip().lower().replace("_", "").replace("-", "")
    if low in _NAME_TO_CODE:
        return _NAME_TO_CODE[low]
    raise UnsupportedPredicateError(f"unknown topological predicate {name!r}")


def four_intersection(g1: Region, g2: Region) -> tuple:
    """(bb, ii, bi, ib) non-emptiness for two non-empty regions."""
    if g1.is_empty or g2.is_empty:
        raise EmptyGeometryError("four_intersection requires non-empty regions")
    m = g1._geom.relate(g2._geom)
    # DE-9IM positions: 0 = I/I, 1 = I/B, 3 = B/I, 4 = B/B
    return (m[4] != "F", m[0] != "F", m[3] != "F", m[1] != "F")


def base_relation(g1: Region, g2: Region) -> str:
    """The unique base relation holding between two non-empty regions."""
    quad = four_intersection(g1, g2)
    code = _BASE_ROWS.get(quad)
    if code is None:
        raise InvalidGeometryError(
            f"four-intersection {quad} matches no base relation; "
            "inputs are not regular regions")
    return code


def topo(T: str, g1: Region, g2: Region) -> bool:
    """Evaluate predicate T; false whenever either region is empty."""
    code = normalize_predicate(T)
    if g1.is_empty or g2.is_empty:
        return False
    base = base_relation(g1, g2)
    if code in _DERIVED_SETS:
        return base in _DERIVED_SETS[code]
    return base == code
