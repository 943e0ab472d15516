"""File formats: schema JSON, relation data as CSV-with-WKT or GeoJSON
feature collections, and delimited/GeoJSON exports for answers and repairs.

All writers produce byte-stable output for a fixed input (sorted keys,
fixed separators, full-precision WKT), so reruns with the same seed can be
compared with cmp(1).
"""

from __future__ import annotations

import csv
import json
import os
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import SchemaError, SpatialCQAError
from .geometry import Region
from .model import Instance, RelationSchema, Schema, SpatialTuple, load_instance


# -- schema ------------------------------------------------------------

def load_schema(path: str) -> Schema:
    with open(path, "r", encoding="utf-8") as fh:
        return Schema.from_json(json.load(fh))


def save_schema(schema: Schema, path: str) -> None:
    _write_json(path, schema.to_json())


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- relation data -----------------------------------------------------

def read_relation(rel: RelationSchema, path: str) -> List[dict]:
    """Rows for one relation from a .csv (WKT geometry) or .geojson file."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".csv":
        return _read_relation_csv(rel, path)
    if ext in (".geojson", ".json"):
        return _read_relation_geojson(rel, path)
    raise SchemaError(f"unsupported data file extension: {path}")


def _read_relation_csv(rel: RelationSchema, path: str) -> List[dict]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return rows
        missing = [a for a in rel.attr_names if a not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        for lineno, rec in enumerate(reader, start=2):
            row = {a: rec[a] for a in rel.attr_names}
            wkt = (rec.get(rel.geometry) or "").strip()
            try:
                row[rel.geometry] = (Region.from_wkt(wkt) if wkt
                                     else Region.empty())
            except SpatialCQAError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from exc
            rows.append(row)
    return rows


def _read_relation_geojson(rel: RelationSchema, path: str) -> List[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if obj.get("type") != "FeatureCollection":
        raise SchemaError(f"{path}: expected a FeatureCollection")
    rows = []
    for i, feat in enumerate(obj.get("features", [])):
        props = feat.get("properties") or {}
        missing = [a for a in rel.attr_names if a not in props]
        if missing:
            raise SchemaError(
                f"{path}: feature {i} missing properties {missing}")
        row = {a: props[a] for a in rel.attr_names}
        geom = feat.get("geometry")
        try:
            row[rel.geometry] = (Region.from_geojson(geom) if geom
                                 else Region.empty())
        except SpatialCQAError as exc:
            raise SchemaError(f"{path}: feature {i}: {exc}") from exc
        rows.append(row)
    return rows


def read_instance(schema: Schema, paths: Mapping[str, str]) -> Instance:
    """Load an instance from per-relation data files."""
    rows = {}
    for name, path in paths.items():
        rel = schema.relation(name)
        rows[name] = read_relation(rel, path)
    return load_instance(schema, rows)


def write_relation(instance: Instance, relation: str, path: str,
                   fmt: str = "geojson") -> None:
    rel = instance.schema.relation(relation)
    tuples = instance.tuples(relation)
    if fmt == "csv":
        header = list(rel.attr_names) + [rel.geometry]
        rows = [list(t.thematic) + [t.region.to_wkt()] for t in tuples]
        write_csv(path, header, rows)
    elif fmt == "geojson":
        feats = [(dict(zip(rel.attr_names, t.thematic)), t.region)
                 for t in tuples]
        write_feature_collection(path, feats)
    else:
        raise SchemaError(f"unknown format {fmt!r}")


def write_instance(instance: Instance, out_dir: str,
                   fmt: str = "geojson") -> Dict[str, str]:
    """One file per relation under out_dir; returns relation -> path."""
    os.makedirs(out_dir, exist_ok=True)
    ext = "csv" if fmt == "csv" else "geojson"
    out = {}
    for rel in instance.schema.relations:
        path = os.path.join(out_dir, f"{rel.name}.{ext}")
        write_relation(instance, rel.name, path, fmt)
        out[rel.name] = path
    return out


# -- generic tables and collections ------------------------------------

def write_csv(path: str, header: Sequence[str],
              rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow(["" if v is None else v for v in row])


def write_feature_collection(
        path: str,
        features: Iterable[Tuple[Mapping, object]]) -> None:
    """Features as (properties, geometry) pairs; the geometry may be a
    Region, a prebuilt GeoJSON mapping (e.g. a GeometryCollection for join
    answers), or None."""
    feats = []
    for props, region in features:
        if region is None:
            geom = None
        elif isinstance(region, Region):
            geom = region.to_geojson()
        else:
            geom = region
        # GeoJSON geometries use lists, not tuples
        geom = json.loads(json.dumps(geom)) if geom is not None else None
        feats.append({"type": "Feature",
                      "properties": dict(props),
                      "geometry": geom})
    _write_json(path, {"type": "FeatureCollection", "features": feats})


# -- repairs ------------------------------------------------------------

def write_repairs(out_dir: str, base: Instance,
                  repairs: Sequence[Instance],
                  deltas: Sequence[float],
                  minimal: Sequence[bool],
                  fmt: str = "geojson",
                  steps: Optional[Sequence[Sequence]] = None) -> str:
    """Write numbered repair instances plus a manifest; returns manifest path.

    Repair i goes to out_dir/repair_{i:03d}/ with one file per relation;
    steps, when given, records each repair's applied-step provenance.
    """
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for i, inst in enumerate(repairs):
        sub = os.path.join(out_dir, f"repair_{i:03d}")
        paths = write_instance(inst, sub, fmt)
        entry = {
            "index": i,
            "delta": deltas[i],
            "minimal": bool(minimal[i]),
            "files": {k: os.path.relpath(v, out_dir)
                      for k, v in paths.items()},
        }
        if steps is not None:
            entry["steps"] = [list(s) for s in steps[i]]
        entries.append(entry)
    manifest = {
        "repairs": entries,
        "count": len(entries),
        "minimal_count": sum(1 for m in minimal if m),
        "base_total_area": base.total_area(),
    }
    mpath = os.path.join(out_dir, "manifest.json")
    _write_json(mpath, manifest)
    return mpath
