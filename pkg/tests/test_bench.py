"""Benchmark harness: report structure, files, and the windowed-core
shortcut's equivalence with the full core."""

import csv
import os
import random

from spatialcqa.bench import (BenchReport, BenchRow, _random_windows,
                              _windowed_cqa_range, run_benchmarks)
from spatialcqa.core import core_direct
from spatialcqa.geometry import topo
from spatialcqa.index import GridIndex
from spatialcqa.synth import gen_synthetic


def test_windowed_core_matches_full_core():
    """Restricting the core to window candidates plus their conflictor
    ring must not change any answer."""
    inst, sics = gen_synthetic(150, 20, "II", seed=11)
    config = inst.config()
    grid = GridIndex((t.tid, t.region.bounds)
                     for t in inst.tuples("R") if not t.region.is_empty)
    full = core_direct(inst, sics, config)
    rng = random.Random(99)
    for window in _random_windows(inst, 0.05, 10, rng):
        fast = {tid for tid, _ in
                _windowed_cqa_range(inst, sics, "IT", window, grid, config)}
        slow = {t.tid for t in full.tuples()
                if topo("IT", full.get(t.tid).region, window)}
        assert fast == slow


def test_report_select_and_table():
    report = BenchReport()
    report.extend([
        BenchRow("d1", "core_materialize", 100, 10, "II", "", 0.5, 100),
        BenchRow("d2", "core_materialize", 200, 10, "IT", "", 0.7, 200),
        BenchRow("d3", "range_cqa", 100, 10, "II", "frac=0.01", 0.1, 3),
    ])
    assert len(report.select("core_materialize")) == 2
    assert len(report.select("core_materialize", pred="IT")) == 1
    header, rows = report.table()
    assert header[:3] == ["dataset", "operation", "n"]
    assert rows[0][6] == "0.500000"


def test_quick_run_writes_report_files(tmp_path):
    out = str(tmp_path / "bench")
    report = run_benchmarks(out, seed=0, quick=True)
    assert report.rows

    csv_path = os.path.join(out, "bench.csv")
    assert os.path.exists(csv_path)
    with open(csv_path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["dataset", "operation", "n", "pct", "pred", "param",
                       "seconds", "answers"]
    assert len(rows) == len(report.rows) + 1

    for name in ("core_time_vs_n.png", "equals_core_vs_pct.png",
                 "cqa_relative_cost.png", "window_sweep.png"):
        path = os.path.join(out, name)
        assert os.path.exists(path), name
        with open(path, "rb") as fh:
            assert fh.read(8) == b"\x89PNG\r\n\x1a\n"

    ops = {r.operation for r in report.rows}
    assert ops == {"core_materialize", "range_simple", "range_cqa",
                   "join_simple", "join_cqa", "range_cqa_window"}


def test_quick_run_measures_all_sweep_points(tmp_path):
    report = run_benchmarks(str(tmp_path / "b"), seed=1, quick=True)
    sweep = report.select("core_materialize")
    assert {(r.n, r.pred) for r in sweep if r.pred != "EQ"} == \
           {(200, "II"), (400, "II"), (200, "IT"), (400, "IT")}
    eq = [r for r in sweep if r.pred == "EQ"]
    assert {r.pct for r in eq} == {5, 20}
    for r in report.rows:
        assert r.seconds >= 0
