"""Benchmark harness: trend measurements on synthetic instances.

Absolute timings depend on hardware; the interesting outputs are trends:

  * core materialization time grows with instance size for overlap and
    touch constraints;
  * under an equals constraint it does not grow with the conflict rate,
    because conflicting geometries turn empty and serializing empties is
    cheaper than serializing coordinates;
  * consistent range answering costs more than plain range answering, and
    consistent join answering (core construction included) stays within a
    small factor of the plain join.

The measured core operation is materialization: compute the core and
render it to GeoJSON text, mirroring how a database would populate a
materialized view. Range CQA is measured with the core restricted to the
window candidates and their potential conflictors, which yields the same
answers as the full core for intersection-family predicates since answers
and their conflictors must both reach the window's neighborhood.

Timings are medians over repeated runs with a fixed-seed workload; the
report renders as one CSV plus PNG figures.
"""

from __future__ import annotations

import gc
import json
import math
import random
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .constraints import SIC
from .core import core_direct, cqa_via_core
from .geometry import GeometryConfig, Region, topo
from .index import GridIndex
from .model import Instance
from .query import JoinQuery, eval_join
from .synth import gen_synthetic

REPEATS = 5


@dataclass(frozen=True)
class BenchRow:
    dataset: str
    operation: str
    n: int
    pct: float
    pred: str
    param: str
    seconds: float
    answers: int


@dataclass
class BenchReport:
    rows: List[BenchRow] = field(default_factory=list)

    def extend(self, rows: Sequence[BenchRow]) -> None:
        self.rows.extend(rows)

    def select(self, operation: str, **fixed) -> List[BenchRow]:
        out = [r for r in self.rows if r.operation == operation]
        for k, v in fixed.items():
            out = [r for r in out if getattr(r, k) == v]
        return out

    def table(self) -> Tuple[List[str], List[list]]:
        header = ["dataset", "operation", "n", "pct", "pred", "param",
                  "seconds", "answers"]
        rows = [[r.dataset, r.operation, r.n, r.pct, r.pred, r.param,
                 f"{r.seconds:.6f}", r.answers] for r in self.rows]
        return header, rows


def _timed(fn: Callable[[], object], repeats: int = REPEATS):
    """Median wall time over repeats; returns (seconds, last result).

    One untimed warm-up call absorbs first-use costs (imports, allocator
    growth) that would otherwise inflate whichever point runs first.
    Collection is forced between repeats and disabled while the clock
    runs, so timings do not depend on whatever heap the caller built up.
    """
    times = []
    result = fn()
    was_enabled = gc.isenabled()
    try:
        for _ in range(repeats):
            gc.collect()
            gc.disable()
            t0 = time.perf_counter()
            result = fn()
            times.append(time.perf_counter() - t0)
            if was_enabled:
                gc.enable()
    finally:
        if was_enabled:
            gc.enable()
    return statistics.median(times), result


def _materialize(core) -> int:
    """Render the core to GeoJSON text the way a view would be written."""
    total = 0
    for rel in core.instance.schema.relations:
        feats = []
        for t in core.instance.tuples(rel.name):
            feats.append({"type": "Feature",
                          "properties": dict(zip(rel.attr_names, t.thematic)),
                          "geometry": t.region.to_geojson()})
        total += len(json.dumps({"type": "FeatureCollection",
                                 "features": feats}))
    return total


def bench_core_sweep(sizes: Sequence[int] = (1000, 2000, 4000, 8000),
                     pct: float = 10, preds: Sequence[str] = ("II", "IT"),
                     seed: int = 0, repeats: int = REPEATS) -> List[BenchRow]:
    rows = []
    for pred in preds:
        for n in sizes:
            inst, sics = gen_synthetic(n, pct, pred, seed)
            config = inst.config()
            secs, _ = _timed(lambda: _materialize(core_direct(inst, sics, config)),
                             repeats)
            rows.append(BenchRow(f"synthetic-{n}-{pct}-{pred}",
                                 "core_materialize", n, pct, pred, "", secs, n))
    return rows


def bench_equals_pct(n: int = 4000,
                     pcts: Sequence[float] = (5, 10, 20, 30, 40),
                     seed: int = 0, repeats: int = REPEATS) -> List[BenchRow]:
    rows = []
    for pct in pcts:
        inst, sics = gen_synthetic(n, pct, "EQ", seed)
        config = inst.config()
        secs, _ = _timed(lambda: _materialize(core_direct(inst, sics, config)),
                         repeats)
        rows.append(BenchRow(f"synthetic-{n}-{pct}-EQ", "core_materialize",
                             n, pct, "EQ", "", secs, n))
    return rows


def _random_windows(inst: Instance, frac: float, count: int,
                    rng: random.Random) -> List[Region]:
    xmin, ymin, xmax, ymax = inst.bounds
    w = (xmax - xmin) * frac
    h = (ymax - ymin) * frac
    out = []
    for _ in range(count):
        x = rng.uniform(xmin, xmax - w)
        y = rng.uniform(ymin, ymax - h)
        out.append(Region.box(x, y, x + w, y + h))
    return out


def _windowed_cqa_range(inst: Instance, sics: Sequence[SIC], pred: str,
                        window: Region, grid: GridIndex,
                        config: GeometryConfig) -> List[Tuple]:
    """Range CQA with core computation confined to the window candidates
    plus one ring of their potential conflictors. Tuples outside the
    window's bounding box cannot answer an intersection-family query, and
    a candidate's core geometry depends only on tuples meeting its own
    bounding box, so the restricted core agrees with the full one on every
    possible answer."""
    hits = grid.candidates(window.bounds)
    ring = set(hits)
    for tid in hits:
        ring.update(grid.candidates(inst.get(tid).region.bounds))
    sub = Instance(inst.schema, [inst.get(t) for t in sorted(ring)])
    core = core_direct(sub, sics, config)
    return [(tid, core.get(tid).region) for tid in hits
            if topo(pred, core.get(tid).region, window)]


def bench_relative_cost(n: int = 2000, pct: float = 10, seed: int = 0,
                        windows: int = 20, frac: float = 0.01,
                        repeats: int = REPEATS) -> List[BenchRow]:
    """Plain versus consistent answering for range and join queries under
    an overlap constraint; join CQA includes core construction, range CQA
    uses the window-restricted core."""
    inst, sics = gen_synthetic(n, pct, "II", seed)
    config = inst.config()
    rng = random.Random(seed + 1)
    wins = _random_windows(inst, frac, windows, rng)
    dataset = f"synthetic-{n}-{pct}-II"

    grid = GridIndex((t.tid, t.region.bounds)
                     for t in inst.tuples("R") if not t.region.is_empty)

    # Both range variants use the same index for window candidates, so the
    # measured gap is the consistency overhead, not an indexing artifact.
    def simple_range():
        total = 0
        for w in wins:
            for tid in grid.candidates(w.bounds):
                if topo("IT", inst.get(tid).region, w):
                    total += 1
        return total

    def cqa_range():
        total = 0
        for w in wins:
            total += len(_windowed_cqa_range(inst, sics, "IT", w, grid, config))
        return total

    secs_simple, ans_simple = _timed(simple_range, repeats)
    secs_cqa, ans_cqa = _timed(cqa_range, repeats)
    rows = [
        BenchRow(dataset, "range_simple", n, pct, "II", f"frac={frac}",
                 secs_simple, ans_simple),
        BenchRow(dataset, "range_cqa", n, pct, "II", f"frac={frac}",
                 secs_cqa, ans_cqa),
    ]

    join_q = JoinQuery("R", "R", "IT")
    secs_join, ans_join = _timed(lambda: len(eval_join(inst, join_q)), repeats)

    def cqa_join():
        core = core_direct(inst, sics, config)
        return len(cqa_via_core(inst, sics, join_q, config, core=core))

    secs_jcqa, ans_jcqa = _timed(cqa_join, repeats)
    rows += [
        BenchRow(dataset, "join_simple", n, pct, "II", "", secs_join, ans_join),
        BenchRow(dataset, "join_cqa", n, pct, "II", "", secs_jcqa, ans_jcqa),
    ]
    return rows


def bench_window_sweep(n: int = 4000, pct: float = 10, seed: int = 0,
                       fracs: Sequence[float] = (0.01, 0.02, 0.03, 0.04, 0.05),
                       windows: int = 20,
                       repeats: int = REPEATS) -> List[BenchRow]:
    inst, sics = gen_synthetic(n, pct, "II", seed)
    config = inst.config()
    grid = GridIndex((t.tid, t.region.bounds)
                     for t in inst.tuples("R") if not t.region.is_empty)
    rows = []
    for frac in fracs:
        rng = random.Random(seed + 2)
        wins = _random_windows(inst, frac, windows, rng)

        def run():
            total = 0
            for w in wins:
                total += len(_windowed_cqa_range(inst, sics, "IT", w, grid,
                                                 config))
            return total

        secs, ans = _timed(run, repeats)
        rows.append(BenchRow(f"synthetic-{n}-{pct}-II", "range_cqa_window",
                             n, pct, "II", f"frac={frac}", secs, ans))
    return rows


def _plot(report: BenchReport, out_dir: str) -> List[str]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import os

    written = []

    def save(fig, name):
        path = os.path.join(out_dir, name)
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        written.append(path)

    sweep = report.select("core_materialize")
    by_pred: Dict[str, List[BenchRow]] = {}
    for r in sweep:
        by_pred.setdefault(r.pred, []).append(r)
    fig, ax = plt.subplots(figsize=(6, 4))
    for pred in ("II", "IT"):
        rs = sorted((r for r in by_pred.get(pred, ())), key=lambda r: r.n)
        if rs:
            ax.plot([r.n for r in rs], [r.seconds for r in rs],
                    marker="o", label=pred)
    ax.set_xlabel("tuples")
    ax.set_ylabel("core materialization [s]")
    ax.set_title("Core cost vs instance size")
    ax.grid(True, alpha=0.3)
    ax.legend()
    save(fig, "core_time_vs_n.png")

    eq = sorted(by_pred.get("EQ", ()), key=lambda r: r.pct)
    if eq:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot([r.pct for r in eq], [r.seconds for r in eq], marker="o",
                color="tab:red")
        ax.set_xlabel("conflicting tuples [%]")
        ax.set_ylabel("core materialization [s]")
        ax.set_title("Equals-constraint core cost vs conflict rate")
        ax.grid(True, alpha=0.3)
        save(fig, "equals_core_vs_pct.png")

    pairs = [("range_simple", "range_cqa", "range"),
             ("join_simple", "join_cqa", "join")]
    labels, ratios = [], []
    for simple_op, cqa_op, label in pairs:
        s = report.select(simple_op)
        c = report.select(cqa_op)
        if s and c and s[0].seconds > 0:
            labels.append(label)
            ratios.append(c[0].seconds / s[0].seconds)
    if ratios:
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.bar(labels, ratios, color=["tab:blue", "tab:orange"])
        ax.axhline(1.0, color="black", linewidth=0.8)
        ax.set_ylabel("consistent / plain time ratio")
        ax.set_title("Relative cost of consistent answering")
        ax.grid(True, axis="y", alpha=0.3)
        save(fig, "cqa_relative_cost.png")

    sweep = sorted(report.select("range_cqa_window"),
                   key=lambda r: r.param)
    if sweep:
        fig, ax = plt.subplots(figsize=(6, 4))
        xs = [float(r.param.split("=")[1]) * 100 for r in sweep]
        ax.plot(xs, [r.seconds for r in sweep], marker="o",
                color="tab:green")
        ax.set_xlabel("window side [% of extent]")
        ax.set_ylabel("consistent range answering [s]")
        ax.set_title("Window size sweep")
        ax.grid(True, alpha=0.3)
        save(fig, "window_sweep.png")
    return written


def run_benchmarks(out_dir: str, seed: int = 0,
                   quick: bool = False) -> BenchReport:
    """Full benchmark suite; writes bench.csv and PNG figures to out_dir
    and returns the report."""
    import os
    from .formats import write_csv

    os.makedirs(out_dir, exist_ok=True)
    report = BenchReport()
    if quick:
        report.extend(bench_core_sweep(sizes=(200, 400), pct=10,
                                       seed=seed, repeats=3))
        report.extend(bench_equals_pct(n=400, pcts=(5, 20), seed=seed,
                                       repeats=3))
        report.extend(bench_relative_cost(n=400, seed=seed, windows=5,
                                          repeats=3))
        report.extend(bench_window_sweep(n=400, seed=seed,
                                         fracs=(0.01, 0.05), windows=5,
                                         repeats=3))
    else:
        report.extend(bench_core_sweep(seed=seed))
        report.extend(bench_equals_pct(seed=seed))
        report.extend(bench_relative_cost(seed=seed))
        report.extend(bench_window_sweep(seed=seed))
    header, rows = report.table()
    write_csv(os.path.join(out_dir, "bench.csv"), header, rows)
    _plot(report, out_dir)
    return report
