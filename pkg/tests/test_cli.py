"""End-to-end command tests through the click runner."""

import filecmp
import json
import os

import pytest
from click.testing import CliRunner

from spatialcqa import formats
from spatialcqa.cli import main
from spatialcqa.constraints import find_violations
from spatialcqa.model import Schema


@pytest.fixture
def runner():
    return CliRunner()


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh)
    return str(path)


def _deploy(tmp_path, fixture, sics_obj):
    """Write schema, per-relation data files, and constraints for a CLI run."""
    root = tmp_path / "in"
    root.mkdir(exist_ok=True)
    schema_path = str(root / "schema.json")
    formats.save_schema(fixture.schema, schema_path)
    data = formats.write_instance(fixture.inst, str(root), fmt="geojson")
    sics_path = _write_json(root / "sics.json", sics_obj)
    args = ["--schema", schema_path, "--sics", sics_path]
    for rel, path in data.items():
        args += ["--data", f"{rel}={path}"]
    return args

FIG8_SICS = [
    {"id": "landp-ii",
     "atoms": [{"relation": "LandP", "var": "p1"},
               {"relation": "LandP", "var": "p2"}],
     "topo": {"pred": "II", "args": ["p1", "p2"]},
     "where": [{"op": "!=", "left": ["p1", "idl"],
                "right": ["p2", "idl"]}]},
    {"id": "building-overlap",
     "atoms": [{"relation": "Building", "var": "b"},
               {"relation": "LandP", "var": "p"}],
     "topo": {"pred": "OV", "args": ["b", "p"]}},
]

CL_SICS = [{"id": "county-ii", "relation": "County", "pred": "II"},
           {"id": "lake-it", "relation": "Lake", "pred": "IT"}]


# -- check ---------------------------------------------------------------------

def test_check_reports_violations_and_exits_1(runner, tmp_path, fig8):
    args = _deploy(tmp_path, fig8, FIG8_SICS)
    out = str(tmp_path / "out")
    result = runner.invoke(main, ["check", *args, "--out", out])
    assert result.exit_code == 1
    assert "4 violation(s) found" in result.output
    with open(os.path.join(out, "violations.json")) as fh:
        report = json.load(fh)
    assert report["count"] == 4
    # tids are assigned on read, so check per-constraint counts instead
    by_sic = {}
    for v in report["violations"]:
        by_sic[v["sic"]] = by_sic.get(v["sic"], 0) + 1
        assert len(v["pair"]) == 2 and len(v["tids"]) == 2
    assert by_sic == {"landp-ii": 2, "building-overlap": 2}


def test_check_consistent_exits_0(runner, tmp_path, example4):
    ns = example4
    args = _deploy(tmp_path, ns,
                   [{"id": "p-ii", "relation": "LandP", "pred": "II"}])
    out = str(tmp_path / "out")
    result = runner.invoke(main, ["check", *args, "--out", out])
    assert result.exit_code == 0
    assert "consistent: no violations" in result.output
    with open(os.path.join(out, "violations.json")) as fh:
        assert json.load(fh)["count"] == 0


def test_check_requires_schema(runner):
    result = runner.invoke(main, ["check"])
    assert result.exit_code == 2
    assert "--schema is required" in result.output


def test_malformed_wkt_exits_2_with_row_number(runner, tmp_path):
    schema_path = _write_json(tmp_path / "schema.json", {"relations": {
        "R": {"attributes": [["id", "int"]], "key": ["id"]}}})
    data_path = tmp_path / "R.csv"
    data_path.write_text("id,geometry\n1,POLYGON NOT WKT\n")
    sics_path = _write_json(tmp_path / "sics.json",
                            [{"id": "c", "relation": "R", "pred": "II"}])
    result = runner.invoke(main, ["check", "--schema", schema_path,
                                  "--data", f"R={data_path}",
                                  "--sics", str(sics_path)])
    assert result.exit_code == 2
    assert "error:" in result.output
    assert ":2:" in result.output


# -- repair ----------------------------------------------------------------------

def test_repair_writes_manifest_and_leaves(runner, tmp_path, fig8):
    args = _deploy(tmp_path, fig8, FIG8_SICS)
    out = str(tmp_path / "rep")
    result = runner.invoke(main, ["repair", *args, "--out", out])
    assert result.exit_code == 0
    assert "28 consistent leaves, 4 minimal (delta 3.25)" in result.output
    with open(os.path.join(out, "manifest.json")) as fh:
        manifest = json.load(fh)
    assert manifest["count"] == 28
    assert manifest["minimal_count"] == 4
    assert len(manifest["repairs"]) == 28
    first = manifest["repairs"][0]
    assert set(first) == {"index", "delta", "minimal", "files", "steps"}
    for rel_file in first["files"].values():
        assert os.path.exists(os.path.join(out, rel_file))


def test_repair_thread_outputs_identical(runner, tmp_path, fig8):
    args = _deploy(tmp_path, fig8, FIG8_SICS)
    outs = {}
    for threads in (1, 4):
        out = str(tmp_path / f"t{threads}")
        result = runner.invoke(main, ["repair", *args, "--out", out,
                                      "--threads", str(threads)])
        assert result.exit_code == 0
        outs[threads] = out
    for dirpath, _, files in os.walk(outs[1]):
        rel = os.path.relpath(dirpath, outs[1])
        for name in files:
            a = os.path.join(dirpath, name)
            b = os.path.join(outs[4], rel, name)
            assert filecmp.cmp(a, b, shallow=False), (rel, name)


def test_repair_node_limit_exits_2(runner, tmp_path, fig8):
    args = _deploy(tmp_path, fig8, FIG8_SICS)
    result = runner.invoke(main, ["repair", *args, "--limit-nodes", "2",
                                  "--out", str(tmp_path / "x")])
    assert result.exit_code == 2
    assert "error:" in result.output


# -- core ------------------------------------------------------------------------

def _read_core(out, schema):
    with open(os.path.join(out, "core_manifest.json")) as fh:
        manifest = json.load(fh)
    data = {rel: os.path.join(out, p) for rel, p in manifest["files"].items()}
    return manifest, formats.read_instance(schema, data)


def test_core_direct_when_constraints_allow(runner, tmp_path, county_lake):
    args = _deploy(tmp_path, county_lake, CL_SICS)
    out = str(tmp_path / "core")
    result = runner.invoke(main, ["core", *args, "--out", out, "--d", "0.05"])
    assert result.exit_code == 0
    assert "core (direct)" in result.output
    manifest, inst = _read_core(out, county_lake.schema)
    assert manifest["provenance"] == "direct"
    areas = sorted(round(t.region.area, 6) for t in inst.tuples("County"))
    assert areas == sorted(county_lake.county_core_areas)
    for t in inst.tuples("Lake"):
        assert t.region.area == pytest.approx(county_lake.lake_core_area)


def test_core_via_repairs_flag(runner, tmp_path, county_lake):
    args = _deploy(tmp_path, county_lake, CL_SICS)
    out = str(tmp_path / "core")
    result = runner.invoke(main, ["core", *args, "--out", out,
                                  "--d", "0.05", "--via", "repairs"])
    assert result.exit_code == 0
    manifest, inst = _read_core(out, county_lake.schema)
    assert manifest["provenance"] == "repairs"
    areas = sorted(round(t.region.area, 6) for t in inst.tuples("County"))
    assert areas == sorted(county_lake.county_core_areas)


def test_core_auto_falls_back_to_repairs(runner, tmp_path, fig8):
    args = _deploy(tmp_path, fig8, FIG8_SICS)
    out = str(tmp_path / "core")
    result = runner.invoke(main, ["core", *args, "--out", out, "--d", "0.1"])
    assert result.exit_code == 0
    manifest, inst = _read_core(out, fig8.schema)
    assert manifest["provenance"] == "repairs"
    by_tid = {t.tid: t.region.area for t in inst.tuples()}
    for tid, want in fig8.core_areas.items():
        assert by_tid[tid] == pytest.approx(want, abs=1e-6)


# -- cqa --------------------------------------------------------------------------

def test_cqa_path_selection_in_manifest(runner, tmp_path, county_lake):
    """Core path exactly when the predicate is intersection-family and all
    constraints are core-form; a touches query drops to the repairs path."""
    args = _deploy(tmp_path, county_lake, CL_SICS)
    q_ii = _write_json(tmp_path / "q_ii.json",
                       {"type": "range", "relation": "County", "pred": "II",
                        "window": [0, 0, 11, 4]})
    q_to = _write_json(tmp_path / "q_to.json",
                       {"type": "range", "relation": "County", "pred": "TO",
                        "window": [0, 2, 11, 4]})
    out = str(tmp_path / "ans")
    result = runner.invoke(main, ["cqa", *args, "--query", q_ii,
                                  "--query", q_to, "--out", out,
                                  "--d", "0.05"])
    assert result.exit_code == 0
    with open(os.path.join(out, "cqa_manifest.json")) as fh:
        manifest = json.load(fh)
    by_file = {e["query_file"]: e for e in manifest["queries"]}
    assert by_file[q_ii]["path"] == "core"
    assert by_file[q_to]["path"] == "repairs"
    assert by_file[q_ii]["answers"] == 5
    for e in manifest["queries"]:
        assert os.path.exists(os.path.join(out, e["output"]))


def test_cqa_general_constraints_force_repairs_path(runner, tmp_path, fig8):
    args = _deploy(tmp_path, fig8, FIG8_SICS)
    q = _write_json(tmp_path / "q.json",
                    {"type": "range", "relation": "LandP", "pred": "II",
                     "window": [1, 0.9, 6.1, 1.1]})
    out = str(tmp_path / "ans")
    result = runner.invoke(main, ["cqa", *args, "--query", q, "--out", out,
                                  "--d", "0.1"])
    assert result.exit_code == 0
    with open(os.path.join(out, "cqa_manifest.json")) as fh:
        manifest = json.load(fh)
    entry = manifest["queries"][0]
    assert entry["path"] == "repairs"
    assert entry["answers"] == 3
    with open(os.path.join(out, entry["output"])) as fh:
        feats = json.load(fh)["features"]
    assert [f["properties"]["idl"] for f in feats] == [1, 2, 3]


def test_cqa_csv_with_explain(runner, tmp_path, fig8):
    args = _deploy(tmp_path, fig8, FIG8_SICS)
    q = _write_json(tmp_path / "q.json",
                    {"type": "range", "relation": "LandP", "pred": "II",
                     "window": [1, 0.9, 6.1, 1.1]})
    out = str(tmp_path / "ans")
    result = runner.invoke(main, ["cqa", *args, "--query", q, "--out", out,
                                  "--d", "0.1", "--format", "csv",
                                  "--explain"])
    assert result.exit_code == 0
    with open(os.path.join(out, "answers_00.csv")) as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",")
    assert header[:3] == ["idl", "name", "owner"]
    assert header[-3:] == ["removed_area", "removed_frac", "empty_geometry"]
    middle = next(l for l in lines[1:] if l.startswith("2,"))
    assert ",3," in middle        # removed area of the middle parcel
    assert middle.endswith("false")


def test_cqa_materialize_reuses_core(runner, tmp_path, county_lake):
    args = _deploy(tmp_path, county_lake, CL_SICS)
    q1 = _write_json(tmp_path / "q1.json",
                     {"type": "range", "relation": "County", "pred": "II",
                      "window": [0, 0, 11, 4]})
    q2 = _write_json(tmp_path / "q2.json",
                     {"type": "join", "relations": ["County", "Lake"],
                      "pred": "IT"})
    out = str(tmp_path / "ans")
    result = runner.invoke(main, ["cqa", *args, "--query", q1,
                                  "--query", q2, "--out", out,
                                  "--d", "0.05", "--materialize"])
    assert result.exit_code == 0
    with open(os.path.join(out, "cqa_manifest.json")) as fh:
        manifest = json.load(fh)
    assert manifest["materialized"] is True
    assert [e["path"] for e in manifest["queries"]] == ["core", "core"]


# -- sqlgen ------------------------------------------------------------------------

def test_sqlgen_writes_views(runner, tmp_path):
    sics_path = _write_json(tmp_path / "sics.json", CL_SICS)
    out = str(tmp_path / "sql")
    result = runner.invoke(main, ["sqlgen", "--sics", sics_path,
                                  "--out", out, "--d", "0.05"])
    assert result.exit_code == 0
    with open(os.path.join(out, "core_views.sql")) as fh:
        text = fh.read()
    assert "CREATE VIEW Core_IIntersects" in text
    assert "Buffer(geomunion(r2.geometry), 0.05)" in text


# -- gen ----------------------------------------------------------------------------

def _load_generated(out):
    schema = formats.load_schema(os.path.join(out, "schema.json"))
    inst = formats.read_instance(schema,
                                 {"R": os.path.join(out, "R.geojson")})
    with open(os.path.join(out, "sics.json")) as fh:
        sics_obj = json.load(fh)
    return inst, sics_obj


def test_gen_injects_requested_conflicts(runner, tmp_path):
    out = str(tmp_path / "gen")
    result = runner.invoke(main, ["gen", "--n", "100", "--pct", "10",
                                  "--mode", "iintersects", "--out", out])
    assert result.exit_code == 0
    inst, sics_obj = _load_generated(out)
    assert len(inst) == 100
    from spatialcqa.constraints import parse_sics
    sics = parse_sics(sics_obj, inst.schema)
    viols = find_violations(inst, sics)
    assert len(viols) == 5
    assert len({t for v in viols for t in v.tids}) == 10


def test_gen_deterministic_and_env_seed_override(runner, tmp_path):
    outs = []
    for name, args, env in (
            ("a", ["--seed", "7"], {}),
            ("b", ["--seed", "7"], {}),
            ("c", ["--seed", "1"], {"SPATIAL_CQA_SEED": "7"})):
        out = str(tmp_path / name)
        result = runner.invoke(main, ["gen", "--n", "40", "--pct", "10",
                                      "--mode", "equals", "--out", out,
                                      *args], env=env)
        assert result.exit_code == 0
        outs.append(os.path.join(out, "R.geojson"))
    assert filecmp.cmp(outs[0], outs[1], shallow=False)
    assert filecmp.cmp(outs[0], outs[2], shallow=False)


def test_gen_rejects_single_conflict(runner, tmp_path):
    result = runner.invoke(main, ["gen", "--n", "10", "--pct", "10",
                                  "--out", str(tmp_path / "g")])
    assert result.exit_code == 2
    assert "error:" in result.output


# -- bench --------------------------------------------------------------------------

def test_bench_quick_smoke(runner, tmp_path):
    out = str(tmp_path / "bench")
    result = runner.invoke(main, ["bench", "--quick", "--out", out])
    assert result.exit_code == 0
    assert os.path.exists(os.path.join(out, "bench.csv"))
    assert "core_materialize" in result.output
    assert "report:" in result.output
