"""SQL view generation for the core, in PostGIS-style SQL.

The emitted views compute, inside the database, the same per-tuple region
arithmetic as core_direct: conflicting tuples contribute a shrunken
geometry built with difference/geomunion/Buffer, and a NOT EXISTS branch
passes conflict-free tuples through unchanged. The equals view keeps only
conflict-free tuples. This is a text generator; nothing here talks to a
database.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .constraints import CoreSIC, SIC, as_core_sic
from .errors import ConstraintError
from .geometry import GeometryConfig
from .model import Schema

_VIEW_NAMES = {"IT": "Core_Intersects", "II": "Core_IIntersects",
               "EQ": "Core_Equal"}


def _condition(pred: str, indent: str, geometry: str) -> str:
    base = f"{indent}AND Intersects(r1.{geometry}, r2.{geometry})"
    if pred == "II":
        return base + f"\n{indent}AND NOT Touches(r1.{geometry}, r2.{geometry})"
    if pred == "IT":
        return base
    return f"{indent}AND Equals(r1.{geometry}, r2.{geometry})"


def emit_core_sql(sic: SIC, schema: Optional[Schema] = None,
                  config: Optional[GeometryConfig] = None,
                  view_name: Optional[str] = None,
                  geometry: str = "geometry") -> str:
    """Render one core view for a core-form constraint.

    Without a schema the relation is assumed to carry a single key column
    named id; with one, every thematic attribute is selected and grouped
    on, so the view is usable as a drop-in for the relation. d defaults to
    the symbolic placeholder d so the text can be parameterized later.
    """
    if schema is not None:
        core = as_core_sic(sic, schema)
        if core is None:
            raise ConstraintError(
                f"{sic.id}: SQL views exist only for core-form constraints")
        sic = core
        rel = schema.relation(sic.relation)
        if len(rel.key) != 1:
            raise ConstraintError(
                f"{sic.relation}: SQL views need a single-column key")
        attrs = list(rel.attr_names)
        geometry = rel.geometry
    else:
        if not isinstance(sic, CoreSIC):
            raise ConstraintError(
                f"{sic.id}: SQL views exist only for core-form constraints")
        attrs = ["id"]
    d_text = f"{config.d:.12g}" if config is not None else "d"
    name = view_name or _VIEW_NAMES[sic.pred]
    r = sic.relation
    sel_attrs = ", ".join(f"r1.{a} AS {a}" for a in attrs)
    passthrough = (f"SELECT {sel_attrs}, r1.{geometry} AS {geometry}\n"
                   f"  FROM {r} AS r1\n"
                   f"  WHERE NOT EXISTS (\n"
                   f"    SELECT r2.{attrs[0]}, r2.{geometry}\n"
                   f"    FROM {r} AS r2\n"
                   f"    WHERE r1.{attrs[0]} <> r2.{attrs[0]}\n"
                   + _condition(sic.pred, "      ", geometry) + ")")

    if sic.pred == "EQ":
        return f"CREATE VIEW {name} AS (\n  {passthrough});\n"

    if sic.pred == "II":
        shrunk = f"difference(r1.{geometry}, geomunion(r2.{geometry}))"
    else:
        shrunk = (f"difference(r1.{geometry}, "
                  f"Buffer(geomunion(r2.{geometry}), {d_text}))")
    group = ", ".join([f"r1.{a}" for a in attrs] + [f"r1.{geometry}"])
    return (f"CREATE VIEW {name} AS (\n"
            f"  SELECT {sel_attrs},\n"
            f"         {shrunk} AS {geometry}\n"
            f"  FROM {r} AS r1, {r} AS r2\n"
            f"  WHERE r1.{attrs[0]} <> r2.{attrs[0]}\n"
            + _condition(sic.pred, "    ", geometry) + "\n"
            f"  GROUP BY {group}\n"
            f"  UNION\n"
            f"  {passthrough});\n")


def emit_all(sics: Sequence[SIC], schema: Optional[Schema] = None,
             config: Optional[GeometryConfig] = None) -> str:
    """All views for a constraint set, relation-qualified names when a
    schema is given (Core_Intersects_LandP style)."""
    parts = []
    for s in sics:
        name = None
        if schema is not None:
            core = as_core_sic(s, schema)
            if core is None:
                raise ConstraintError(
                    f"{s.id}: SQL views exist only for core-form constraints")
            name = f"{_VIEW_NAMES[core.pred]}_{core.relation}"
        parts.append(emit_core_sql(s, schema, config, view_name=name))
    return "\n".join(parts)
