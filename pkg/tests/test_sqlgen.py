"""SQL view generation for core construction inside a database."""

import pytest

from spatialcqa.constraints import CoreSIC, parse_sic
from spatialcqa.errors import ConstraintError
from spatialcqa.geometry import GeometryConfig
from spatialcqa.model import Schema
from spatialcqa.sqlgen import emit_all, emit_core_sql

GOLDEN_II = """\
CREATE VIEW Core_IIntersects AS (
  SELECT r1.id AS id,
         difference(r1.geometry, geomunion(r2.geometry)) AS geometry
  FROM R AS r1, R AS r2
  WHERE r1.id <> r2.id
    AND Intersects(r1.geometry, r2.geometry)
    AND NOT Touches(r1.geometry, r2.geometry)
  GROUP BY r1.id, r1.geometry
  UNION
  SELECT r1.id AS id, r1.geometry AS geometry
  FROM R AS r1
  WHERE NOT EXISTS (
    SELECT r2.id, r2.geometry
    FROM R AS r2
    WHERE r1.id <> r2.id
      AND Intersects(r1.geometry, r2.geometry)
      AND NOT Touches(r1.geometry, r2.geometry)));
"""

GOLDEN_EQ = """\
CREATE VIEW Core_Equal AS (
  SELECT r1.id AS id, r1.geometry AS geometry
  FROM R AS r1
  WHERE NOT EXISTS (
    SELECT r2.id, r2.geometry
    FROM R AS r2
    WHERE r1.id <> r2.id
      AND Equals(r1.geometry, r2.geometry)));
"""


def test_iintersects_view_golden():
    assert emit_core_sql(CoreSIC("c", "R", "II")) == GOLDEN_II


def test_equals_view_is_passthrough_only():
    text = emit_core_sql(CoreSIC("c", "R", "EQ"))
    assert text == GOLDEN_EQ
    assert "UNION" not in text
    assert "difference" not in text


def test_intersects_view_buffers_with_symbolic_d():
    text = emit_core_sql(CoreSIC("c", "R", "IT"))
    assert "Buffer(geomunion(r2.geometry), d)" in text
    assert "NOT Touches" not in text


def test_intersects_view_inlines_configured_d():
    text = emit_core_sql(CoreSIC("c", "R", "IT"),
                         config=GeometryConfig(d=0.05, eps_area=1e-9))
    assert "Buffer(geomunion(r2.geometry), 0.05)" in text


def _landp_schema(geometry="geometry"):
    return Schema.from_json({"relations": {
        "LandP": {"attributes": [["idl", "int"], ["name", "str"],
                                 ["owner", "str"]],
                  "key": ["idl"], "geometry": geometry}}})


def test_schema_view_selects_all_attributes():
    text = emit_core_sql(CoreSIC("c", "LandP", "II"), _landp_schema())
    assert "r1.idl AS idl, r1.name AS name, r1.owner AS owner" in text
    assert "WHERE r1.idl <> r2.idl" in text
    assert "GROUP BY r1.idl, r1.name, r1.owner, r1.geometry" in text


def test_schema_view_uses_geometry_column_everywhere():
    text = emit_core_sql(CoreSIC("c", "LandP", "II"),
                         _landp_schema(geometry="shape"))
    assert "geometry" not in text.replace("Core_IIntersects", "")
    assert "difference(r1.shape, geomunion(r2.shape))" in text
    assert "Intersects(r1.shape, r2.shape)" in text


def test_schema_recognizes_longhand_core_form():
    text = emit_core_sql(parse_sic({
        "atoms": [{"relation": "LandP", "var": "p1"},
                  {"relation": "LandP", "var": "p2"}],
        "topo": {"pred": "II", "args": ["p1", "p2"]},
        "where": [{"op": "!=", "left": ["p1", "idl"],
                   "right": ["p2", "idl"]}],
    }, "c"), _landp_schema())
    assert text.startswith("CREATE VIEW Core_IIntersects AS (")


def test_emit_all_qualifies_view_names():
    schema = Schema.from_json({"relations": {
        "County": {"attributes": [["idc", "int"]], "key": ["idc"]},
        "Lake": {"attributes": [["idk", "int"]], "key": ["idk"]},
    }})
    text = emit_all([CoreSIC("a", "County", "II"),
                     CoreSIC("b", "Lake", "IT")], schema)
    assert "CREATE VIEW Core_IIntersects_County AS (" in text
    assert "CREATE VIEW Core_Intersects_Lake AS (" in text


def test_emit_all_without_schema_keeps_plain_names():
    text = emit_all([CoreSIC("a", "R", "II")])
    assert "CREATE VIEW Core_IIntersects AS (" in text


def test_rejects_non_core_constraints(fig8):
    general = next(s for s in fig8.sics if s.id == "building-overlap")
    with pytest.raises(ConstraintError):
        emit_core_sql(general, fig8.schema)
    with pytest.raises(ConstraintError):
        emit_core_sql(general)   # not a CoreSIC, no schema to coerce with
    with pytest.raises(ConstraintError):
        emit_all(fig8.sics, fig8.schema)


def test_rejects_composite_keys():
    schema = Schema.from_json({"relations": {
        "R": {"attributes": [["a", "int"], ["b", "int"]],
              "key": ["a", "b"]}}})
    with pytest.raises(ConstraintError):
        emit_core_sql(CoreSIC("c", "R", "II"), schema)
