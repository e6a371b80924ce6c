import csv
import math
import statistics
import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, strategies as st

from hivabm.engine import run
from hivabm.experiments import (
    aggregate, export_errorbar_svg, export_sweep_csv, run_replicates, sweep,
)
from hivabm.metrics import COUNTER_FIELDS, SNAPSHOT_COLUMNS

from conftest import make_config

# independent calculator (statistics.stdev, n-1 denominator) for [2,4,4,4,5,5,7,9]
FROZEN_S = 2.138089935299395
FROZEN_HALF = 1.4816207341961707


def test_aggregate_zero_variance():
    a = aggregate([4, 4, 4, 4])
    assert (a.min, a.max, a.mean, a.ci_low, a.ci_high) == (4, 4, 4, 4, 4)


def test_aggregate_single_value():
    a = aggregate([7])
    assert (a.n, a.min, a.max, a.mean, a.ci_low, a.ci_high) == (1, 7, 7, 7, 7, 7)


def test_aggregate_reference_example():
    x = [2, 4, 4, 4, 5, 5, 7, 9]
    assert statistics.stdev(x) == pytest.approx(FROZEN_S, rel=1e-12)
    a = aggregate(x)
    assert a.mean == 5
    assert a.mean - a.ci_low == pytest.approx(FROZEN_HALF, rel=1e-9)
    assert f"{a.ci_low:.6g}" == "3.51838" and f"{a.ci_high:.6g}" == "6.48162"


def test_aggregate_empty_refused():
    with pytest.raises(ValueError):
        aggregate([])


@given(st.integers(-10**6, 10**6))
def test_aggregate_constant(c):
    a = aggregate([c])
    assert (a.min, a.max, a.mean, a.ci_low, a.ci_high) == (c, c, c, c, c)


@given(st.lists(st.integers(0, 1000), min_size=1, max_size=60), st.randoms())
def test_aggregate_permutation_invariant_and_ordered(xs, rnd):
    a = aggregate(xs)
    ys = list(xs)
    rnd.shuffle(ys)
    assert aggregate(ys) == a
    assert a.min <= a.mean <= a.max
    assert a.ci_low <= a.mean <= a.ci_high


def test_run_replicates_examples():
    cfg = make_config(ticks=4)
    snaps = run_replicates(cfg, 50, 100)
    assert len(snaps) == 50
    assert run_replicates(cfg, 1, 9) == [run(cfg.replace(seed=9)).final_counters]
    assert run_replicates(cfg, 5, 3) == run_replicates(cfg, 5, 3)
    assert run_replicates(cfg, 5, 3, workers=3) == run_replicates(cfg, 5, 3)


def test_sweep_structure_and_seeds():
    cfg = make_config(ticks=3)
    res = sweep(cfg, "commitment", [0, 20, 40, 60, 80, 100], 4, 1000)
    assert [p.value for p in res.points] == [0, 20, 40, 60, 80, 100]
    assert all(len(p.snapshots) == 4 for p in res.points)
    assert res.points[2].seeds == (1008, 1009, 1010, 1011)
    assert res.points[2].snapshots[1] == run(cfg.replace(commitment=40, seed=1009)).final_counters


def test_sweep_full_condom_point_stays_at_seed():
    cfg = make_config(ticks=8, max_infected_fsw=2)
    res = sweep(cfg, "condom_usage", [100], 10, 0)
    assert all(s.total_infected == 2 for s in res.points[0].snapshots)


def test_sweep_zero_commitment_isolates_secondaries():
    cfg = make_config(ticks=8, condom_usage=0)
    res = sweep(cfg, "commitment", [0], 10, 0)
    assert all(s.infected_secondaries == 0 for s in res.points[0].snapshots)


def test_sweep_order_independent():
    cfg = make_config(ticks=3)
    a = sweep(cfg, "condom_usage", [0, 50, 100], 3, 5)
    b = sweep(cfg, "condom_usage", [0, 50, 100], 3, 5, order=[2, 1, 0])
    assert a == b


def test_sweep_rejects_unknown_param():
    with pytest.raises(ValueError):
        sweep(make_config(), "ticks", [1], 1, 0)
    with pytest.raises(ValueError):
        sweep(make_config(), "commitment", [120], 1, 0)


@pytest.fixture(scope="module")
def small_sweep():
    return sweep(make_config(ticks=3), "commitment", [0, 20, 40, 60, 80, 100], 5, 0)


def test_csv_export(small_sweep, tmp_path):
    rep, agg = export_sweep_csv(small_sweep, tmp_path / "s")
    with open(rep) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["param_name", "param_value", "replicate", "seed", *SNAPSHOT_COLUMNS]
    assert len(rows) - 1 == 30
    with open(agg) as fh:
        arows = list(csv.reader(fh))
    assert arows[0] == ["param_name", "param_value", "metric", "n", "min", "max", "mean",
                        "ci_low", "ci_high"]
    assert len(arows) - 1 == 6 * len(COUNTER_FIELDS)
    values = [int(r[1]) for r in arows[1:]]
    assert values == sorted(values)
    for r in arows[1:]:
        for cell in r[4:]:
            assert "e" not in cell.lower()
            float(cell)


def test_csv_export_is_byte_stable(small_sweep, tmp_path):
    a = export_sweep_csv(small_sweep, tmp_path / "a")
    b = export_sweep_csv(small_sweep, tmp_path / "b")
    for x, y in zip(a, b):
        assert x.read_bytes() == y.read_bytes()


def test_csv_ci_six_significant_digits(tmp_path):
    from hivabm.experiments import SweepPoint, SweepResult
    from hivabm.metrics import CounterSnapshot
    vals = [2, 4, 4, 4, 5, 5, 7, 9]
    snaps = tuple(CounterSnapshot(1, *([v] * len(COUNTER_FIELDS))) for v in vals)
    aggs = {m: aggregate(vals) for m in COUNTER_FIELDS}
    res = SweepResult("commitment", 8, (SweepPoint(0, tuple(range(8)), snaps, aggs),))
    _, agg = export_sweep_csv(res, tmp_path / "x")
    row = next(r for r in csv.DictReader(open(agg)) if r["metric"] == "total_infected")
    assert (row["mean"], row["ci_low"], row["ci_high"]) == ("5", "3.51838", "6.48162")


def test_csv_unwritable_path_reported(small_sweep, tmp_path):
    with pytest.raises(OSError) as exc:
        export_sweep_csv(small_sweep, tmp_path / "missing" / "dir" / "s")
    assert "missing" in str(exc.value)


def test_svg_well_formed_and_deterministic(small_sweep, tmp_path):
    a = export_errorbar_svg(small_sweep, "total_infected", tmp_path / "a.svg")
    b = export_errorbar_svg(small_sweep, "total_infected", tmp_path / "b.svg")
    assert a.read_bytes() == b.read_bytes()
    root = ET.parse(a).getroot()
    ns = "{http://www.w3.org/2000/svg}"
    groups = root.findall(f"{ns}g")
    assert len(groups) == 6
    text = a.read_text()
    assert "total_infected" in text and "commitment" in text


def test_svg_zero_variance_degenerates_to_marker(tmp_path):
    res = sweep(make_config(ticks=2, condom_usage=100), "condom_usage", [100], 3, 0)
    path = export_errorbar_svg(res, "total_infected", tmp_path / "z.svg")
    ns = "{http://www.w3.org/2000/svg}"
    g = ET.parse(path).getroot().find(f"{ns}g")
    whisker = g.find(f"{ns}line[@class='whisker']")
    rect = g.find(f"{ns}rect[@class='ci']")
    mean = g.find(f"{ns}circle")
    assert whisker.get("y1") == whisker.get("y2") == mean.get("cy") == rect.get("y")
    assert float(rect.get("height")) == 0


def test_svg_unknown_metric(small_sweep, tmp_path):
    with pytest.raises(ValueError):
        export_errorbar_svg(small_sweep, "tick", tmp_path / "x.svg")
