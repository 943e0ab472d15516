"""Command-line surface.

    spatialcqa check    --schema s.json --data R=r.geojson --sics c.json
    spatialcqa repair   ... --out outdir
    spatialcqa core     ... --out outdir
    spatialcqa cqa      ... --query q.json [--query q2.json] --out outdir
    spatialcqa sqlgen   --sics c.json [--schema s.json] --out outdir
    spatialcqa gen      --n 1000 --pct 10 --mode iintersects --out outdir
    spatialcqa bench    --out outdir [--quick]

Exit codes: 0 success (check: consistent), 1 violations found by check,
2 input or invariant errors. The SPATIAL_CQA_SEED environment variable
overrides --seed wherever randomness is involved.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import click

from . import bench as bench_mod
from . import formats
from .constraints import SIC, as_core_sic, find_violations, parse_sics
from .core import core_direct, core_via_repairs, cqa_via_core
from .errors import SpatialCQAError
from .geometry import GeometryConfig
from .model import Instance, Schema
from .query import answer_table, cqa_via_repairs, parse_query
from .repair import enumerate_repairs
from .sqlgen import emit_all
from .synth import gen_synthetic

_CORE_QUERY_PREDS = ("IT", "II")


@dataclass
class RunConfig:
    """Everything one command invocation needs, resolved from flags."""
    schema_path: Optional[str] = None
    data_paths: Dict[str, str] = field(default_factory=dict)
    sics_path: Optional[str] = None
    query_paths: Tuple[str, ...] = ()
    d: Optional[float] = None
    eps_area: Optional[float] = None
    seed: int = 0
    out_dir: str = "."
    fmt: str = "geojson"
    threads: int = 1
    limit_nodes: int = 10 ** 6
    limit_depth: int = 10 ** 3
    order_mode: str = "auto"

    def load_schema(self) -> Schema:
        if not self.schema_path:
            raise click.UsageError("--schema is required")
        return formats.load_schema(self.schema_path)

    def load_instance(self, schema: Schema) -> Instance:
        if not self.data_paths:
            raise click.UsageError("--data is required (rel=path)")
        return formats.read_instance(schema, self.data_paths)

    def load_sics(self, schema: Schema) -> Tuple[SIC, ...]:
        if not self.sics_path:
            raise click.UsageError("--sics is required")
        with open(self.sics_path, "r", encoding="utf-8") as fh:
            return parse_sics(json.load(fh), schema)

    def geometry_config(self, inst: Instance) -> GeometryConfig:
        return inst.config(d=self.d, eps_area=self.eps_area)


def _resolve_seed(seed: int) -> int:
    env = os.environ.get("SPATIAL_CQA_SEED")
    return int(env) if env else seed


def _parse_data(pairs: Sequence[str]) -> Dict[str, str]:
    out = {}
    for p in pairs:
        if "=" not in p:
            raise click.UsageError(f"--data takes rel=path, got {p!r}")
        rel, path = p.split("=", 1)
        out[rel] = path
    return out


def _common(fn):
    fn = click.option("--schema", "schema_path", type=click.Path(exists=True),
                      help="Schema JSON file.")(fn)
    fn = click.option("--data", "data_pairs", multiple=True,
                      help="Relation data as rel=path (repeatable).")(fn)
    fn = click.option("--sics", "sics_path", type=click.Path(exists=True),
                      help="Constraints JSON file.")(fn)
    fn = click.option("--d", type=float, default=None,
                      help="Separation distance (default: scale-derived).")(fn)
    fn = click.option("--epsilon", "eps_area", type=float, default=None,
                      help="Area tolerance (default: scale-derived).")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True,
                      help="RNG seed (SPATIAL_CQA_SEED overrides).")(fn)
    fn = click.option("--format", "fmt",
                      type=click.Choice(["geojson", "csv"]),
                      default="geojson", show_default=True)(fn)
    fn = click.option("--out", "out_dir", default=".", show_default=True,
                      help="Output directory.")(fn)
    fn = click.option("--threads", type=int, default=1, show_default=True)(fn)
    fn = click.option("--limit-nodes", type=int, default=10 ** 6,
                      show_default=True)(fn)
    fn = click.option("--limit-depth", type=int, default=10 ** 3,
                      show_default=True)(fn)
    return fn


def _config(**kw) -> RunConfig:
    return RunConfig(
        schema_path=kw.get("schema_path"),
        data_paths=_parse_data(kw.get("data_pairs", ())),
        sics_path=kw.get("sics_path"),
        query_paths=tuple(kw.get("query_paths", ())),
        d=kw.get("d"),
        eps_area=kw.get("eps_area"),
        seed=_resolve_seed(kw.get("seed", 0)),
        out_dir=kw.get("out_dir", "."),
        fmt=kw.get("fmt", "geojson"),
        threads=kw.get("threads", 1),
        limit_nodes=kw.get("limit_nodes", 10 ** 6),
        limit_depth=kw.get("limit_depth", 10 ** 3),
        order_mode=kw.get("order_mode", "auto"),
    )


@click.group()
def main():
    """Inconsistency-tolerant querying of spatial databases."""


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(2)


@main.command()
@_common
def check(**kw):
    """Report constraint violations; exit 1 if any exist."""
    cfg = _config(**kw)
    try:
        schema = cfg.load_schema()
        inst = cfg.load_instance(schema)
        sics = cfg.load_sics(schema)
        violations = find_violations(inst, sics)
    except SpatialCQAError as exc:
        _fail(exc)
    os.makedirs(cfg.out_dir, exist_ok=True)
    report = [{"sic": v.sic_id, "pred": v.pred,
               "tids": list(v.tids), "pair": list(v.pair)}
              for v in violations]
    with open(os.path.join(cfg.out_dir, "violations.json"), "w",
              encoding="utf-8") as fh:
        json.dump({"violations": report, "count": len(report)}, fh,
                  indent=2, sort_keys=True)
        fh.write("\n")
    if not violations:
        click.echo("consistent: no violations")
        return
    for v in violations:
        click.echo(f"violation: {v.sic_id} {v.pred} tuples {list(v.tids)}")
    click.echo(f"{len(violations)} violation(s) found")
    sys.exit(1)


@main.command()
@_common
@click.option("--order-mode", type=click.Choice(["auto", "fixed", "full"]),
              default="auto", show_default=True)
def repair(**kw):
    """Enumerate repairs and write them as numbered instances."""
    cfg = _config(**kw)
    try:
        schema = cfg.load_schema()
        inst = cfg.load_instance(schema)
        sics = cfg.load_sics(schema)
        gconf = cfg.geometry_config(inst)
        rs = enumerate_repairs(inst, sics, config=gconf,
                               order_mode=cfg.order_mode,
                               limit_nodes=cfg.limit_nodes,
                               limit_depth=cfg.limit_depth,
                               threads=cfg.threads)
    except SpatialCQAError as exc:
        _fail(exc)
    steps = [[[sic_id, list(pair), label]
              for (sic_id, pair, label) in
              ((v.sic_id, v.pair, lab) for v, lab in leaf.applied)]
             for leaf in rs.leaves]
    manifest = formats.write_repairs(
        cfg.out_dir, inst,
        [l.instance for l in rs.leaves],
        [l.delta for l in rs.leaves],
        [l.minimal for l in rs.leaves],
        fmt=cfg.fmt, steps=steps)
    click.echo(f"{len(rs.leaves)} consistent leaves, "
               f"{len(rs.repairs)} minimal (delta {rs.minimal_delta:.6g}); "
               f"manifest: {manifest}")


@main.command()
@_common
@click.option("--via", type=click.Choice(["auto", "direct", "repairs"]),
              default="auto", show_default=True,
              help="Core construction; auto prefers direct when legal.")
def core(**kw):
    """Compute the core and write it as one instance."""
    via = kw.pop("via")
    cfg = _config(**kw)
    try:
        schema = cfg.load_schema()
        inst = cfg.load_instance(schema)
        sics = cfg.load_sics(schema)
        gconf = cfg.geometry_config(inst)
        if via == "auto":
            via = ("direct" if all(as_core_sic(s, schema) is not None
                                   for s in sics) else "repairs")
        if via == "direct":
            result = core_direct(inst, sics, gconf, threads=cfg.threads)
        else:
            rs = enumerate_repairs(inst, sics, config=gconf,
                                   limit_nodes=cfg.limit_nodes,
                                   limit_depth=cfg.limit_depth,
                                   threads=cfg.threads)
            result = core_via_repairs(inst, sics, gconf, repair_set=rs)
    except SpatialCQAError as exc:
        _fail(exc)
    paths = formats.write_instance(result.instance, cfg.out_dir, cfg.fmt)
    with open(os.path.join(cfg.out_dir, "core_manifest.json"), "w",
              encoding="utf-8") as fh:
        json.dump({"provenance": result.provenance,
                   "files": {k: os.path.relpath(v, cfg.out_dir)
                             for k, v in paths.items()}},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(f"core ({result.provenance}) written to {cfg.out_dir}")


def _geojson_answer_features(answers, schema):
    header, rows = answer_table(answers, schema)
    n_geoms = len(answers.rows[0].regions) if answers.rows else 1
    feats = []
    for arow, row in zip(answers.rows, rows):
        props = dict(zip(header[:-n_geoms], row[:-n_geoms]))
        if n_geoms == 1:
            geom = arow.regions[0]
        else:
            geom = {"type": "GeometryCollection",
                    "geometries": [g.to_geojson() for g in arow.regions]}
        feats.append((props, geom))
    return feats


@main.command()
@_common
@click.option("--query", "query_paths", multiple=True, required=True,
              type=click.Path(exists=True), help="Query JSON (repeatable).")
@click.option("--materialize", is_flag=True,
              help="Compute the core once and reuse it across queries.")
@click.option("--explain", is_flag=True,
              help="Add removed-area columns to CSV answers.")
@click.option("--drop-empty", is_flag=True,
              help="Drop certain rows whose intersected geometry is empty.")
@click.option("--order-mode", type=click.Choice(["auto", "fixed", "full"]),
              default="auto", show_default=True)
def cqa(**kw):
    """Consistent query answering; picks the core path when sound."""
    materialize = kw.pop("materialize")
    explain = kw.pop("explain")
    drop_empty = kw.pop("drop_empty")
    cfg = _config(**kw)
    try:
        schema = cfg.load_schema()
        inst = cfg.load_instance(schema)
        sics = cfg.load_sics(schema)
        gconf = cfg.geometry_config(inst)
        all_core = all(as_core_sic(s, schema) is not None for s in sics)

        queries = []
        for qp in cfg.query_paths:
            with open(qp, "r", encoding="utf-8") as fh:
                queries.append((qp, parse_query(json.load(fh), schema)))

        os.makedirs(cfg.out_dir, exist_ok=True)
        cached_core = None
        repair_set = None
        entries = []
        for i, (qp, q) in enumerate(queries):
            use_core = all_core and q.pred in _CORE_QUERY_PREDS
            if use_core:
                if cached_core is None and materialize:
                    cached_core = core_direct(inst, sics, gconf,
                                              threads=cfg.threads)
                answers = cqa_via_core(
                    inst, sics, q, gconf,
                    core=cached_core if materialize else None)
            else:
                if repair_set is None:
                    repair_set = enumerate_repairs(
                        inst, sics, config=gconf, order_mode=cfg.order_mode,
                        limit_nodes=cfg.limit_nodes,
                        limit_depth=cfg.limit_depth, threads=cfg.threads)
                answers = cqa_via_repairs(inst, sics, q, gconf,
                                          repair_set=repair_set,
                                          drop_empty=drop_empty)
            stem = os.path.join(cfg.out_dir, f"answers_{i:02d}")
            if cfg.fmt == "csv":
                header, rows = answer_table(answers, schema, base=inst,
                                            explain=explain)
                out_path = stem + ".csv"
                formats.write_csv(out_path, header, rows)
            else:
                out_path = stem + ".geojson"
                formats.write_feature_collection(
                    out_path, _geojson_answer_features(answers, schema))
            entries.append({"query_file": qp, "pred": q.pred,
                            "path": answers.path, "answers": len(answers),
                            "output": os.path.relpath(out_path, cfg.out_dir)})
            click.echo(f"{qp}: {len(answers)} answers via {answers.path} "
                       f"-> {out_path}")
        with open(os.path.join(cfg.out_dir, "cqa_manifest.json"), "w",
                  encoding="utf-8") as fh:
            json.dump({"queries": entries, "materialized": materialize},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
    except SpatialCQAError as exc:
        _fail(exc)


@main.command()
@_common
def sqlgen(**kw):
    """Emit core views as SQL text."""
    cfg = _config(**kw)
    try:
        schema = (formats.load_schema(cfg.schema_path)
                  if cfg.schema_path else None)
        if not cfg.sics_path:
            raise click.UsageError("--sics is required")
        with open(cfg.sics_path, "r", encoding="utf-8") as fh:
            sics = parse_sics(json.load(fh), schema)
        gconf = (GeometryConfig(d=cfg.d, eps_area=cfg.eps_area or 1e-9)
                 if cfg.d is not None else None)
        text = emit_all(sics, schema, gconf)
    except SpatialCQAError as exc:
        _fail(exc)
    os.makedirs(cfg.out_dir, exist_ok=True)
    path = os.path.join(cfg.out_dir, "core_views.sql")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    click.echo(path)


@main.command()
@_common
@click.option("--n", type=int, required=True, help="Tuple count.")
@click.option("--pct", type=float, default=0.0, show_default=True,
              help="Percentage of tuples in conflict.")
@click.option("--mode",
              type=click.Choice(["equals", "iintersects", "intersects"]),
              default="iintersects", show_default=True)
def gen(**kw):
    """Generate a synthetic instance with injected conflicts."""
    n = kw.pop("n")
    pct = kw.pop("pct")
    mode = kw.pop("mode")
    cfg = _config(**kw)
    try:
        inst, sics = gen_synthetic(n, pct, mode, cfg.seed)
    except ValueError as exc:
        _fail(exc)
    os.makedirs(cfg.out_dir, exist_ok=True)
    formats.save_schema(inst.schema,
                        os.path.join(cfg.out_dir, "schema.json"))
    formats.write_instance(inst, cfg.out_dir, cfg.fmt)
    sics_obj = [{"id": s.id, "relation": s.relation, "pred": s.pred}
                for s in sics]
    with open(os.path.join(cfg.out_dir, "sics.json"), "w",
              encoding="utf-8") as fh:
        json.dump({"sics": sics_obj}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    click.echo(f"{n} tuples ({pct}% in {mode} conflicts) in {cfg.out_dir}")


@main.command(name="bench")
@_common
@click.option("--quick", is_flag=True, help="Small sizes for smoke tests.")
def bench_cmd(**kw):
    """Run the benchmark suite; writes bench.csv plus figures."""
    quick = kw.pop("quick")
    cfg = _config(**kw)
    try:
        report = bench_mod.run_benchmarks(cfg.out_dir, seed=cfg.seed,
                                          quick=quick)
    except SpatialCQAError as exc:
        _fail(exc)
    for row in report.rows:
        click.echo(f"{row.operation:24s} n={row.n:<6d} pct={row.pct:<5g} "
                   f"pred={row.pred:2s} {row.param:12s} "
                   f"{row.seconds * 1000:9.2f} ms  answers={row.answers}")
    click.echo(f"report: {os.path.join(cfg.out_dir, 'bench.csv')}")


if __name__ == "__main__":
    main()
