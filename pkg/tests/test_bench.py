from __future__ import annotations

import statistics

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from ptgflow.bench import COLUMNS, bench_dispatch, bench_pipeline, format_table, read_csv, t_interval, write_csv
from ptgflow.dispatch import ALL_STRATEGIES


@given(st.lists(st.floats(0, 1e3), min_size=2, max_size=30))
def test_t_interval_matches_scipy(xs):
    half = t_interval(xs)
    if statistics.stdev(xs) == 0:
        assert half == 0
        return
    lo, hi = stats.t.interval(0.95, len(xs) - 1, loc=statistics.fmean(xs), scale=stats.sem(xs))
    assert half == pytest.approx((hi - lo) / 2, rel=1e-9, abs=1e-12)


def test_t_interval_needs_two_samples():
    assert t_interval([]) is None and t_interval([1.0]) is None


def test_bench_dispatch_grid():
    cells = bench_dispatch(pdus=60, reps=2, warmup=False)
    assert len(cells) == len(ALL_STRATEGIES) * 4
    assert {c.scenario.label for c in cells} == {
        "concise/realistic", "concise/randomized", "fragmented/realistic", "fragmented/randomized",
    }
    for c in cells:
        assert len(c.samples_ns) == 2 and c.lookups == 60
        lo, hi = c.ci_bounds_ms
        assert lo <= c.mean_ms <= hi
    # every strategy agrees on the hit count within a cell
    by_cell = {}
    for c in cells:
        by_cell.setdefault(c.scenario.label, set()).add(c.hits)
    assert all(len(h) == 1 for h in by_cell.values())
    with pytest.raises(ValueError):
        bench_dispatch(pdus=60, reps=0)


def test_table_and_csv(tmp_path):
    rows = [c.row() for c in bench_dispatch("concise", "realistic", 30, reps=1, strategies=["TreeMap"])]
    text = format_table(rows)
    header, rule, body = text.splitlines()
    assert header.split() == list(COLUMNS) and set(rule) <= {"-", " "}
    assert body.split()[0] == "TreeMap"
    write_csv(rows, tmp_path / "x.csv")
    assert read_csv(tmp_path / "x.csv") == rows


def test_pipeline_small():
    r = bench_pipeline(600, seed=3, reps=2)
    assert r.identical and r.layers == r.pdus >= 600
    assert [row["path"] for row in r.rows()] == ["Modular", "HardCoded", "Difference[%]"]
    assert r.modular_peak > 0 and r.hardcoded_peak > 0
    with pytest.raises(ValueError):
        bench_pipeline(0)
