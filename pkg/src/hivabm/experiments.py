"""Replicated runs, one-parameter sweeps and their min/max/mean/95% CI summaries."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .domain import ConfigError, Percent, SimConfig, validate_config
from .engine import final_snapshot
from .metrics import COUNTER_FIELDS, SNAPSHOT_COLUMNS, CounterSnapshot

SWEEP_PARAMS = ("commitment", "condom_usage")
Z_95 = 1.96


@dataclass(frozen=True)
class Aggregate:
    n: int
    min: float
    max: float
    mean: float
    ci_low: float
    ci_high: float


def aggregate(values: Sequence[float]) -> Aggregate:
    """Exact min/max/mean and a normal-approximation 95% interval for the mean.

    The half-width is 1.96 * s / sqrt(n) with the n-1 sample deviation; a single
    value gets a zero-width interval.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("aggregate needs at least one value")
    # sorting first makes the float sums independent of input order
    x = np.sort(x)
    n = x.size
    mean = math.fsum(x) / n
    if n == 1:
        half = 0.0
    else:
        var = math.fsum((x - mean) ** 2) / (n - 1)
        half = Z_95 * math.sqrt(var) / math.sqrt(n)
    return Aggregate(n, float(x[0]), float(x[-1]), mean, mean - half, mean + half)


def run_replicates(cfg: SimConfig, n: int, base_seed: int, workers: int = 1
                   ) -> list[CounterSnapshot]:
    """Final-tick snapshots of ``n`` runs seeded ``base_seed + i``, in replicate order."""
    problems = validate_config(cfg)
    if problems:
        raise ConfigError(problems)
    if n < 1:
        raise ValueError(f"replicate count must be positive, got {n}")
    configs = [cfg.replace(seed=base_seed + i) for i in range(n)]
    if workers <= 1:
        return [final_snapshot(c) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(final_snapshot, configs))


@dataclass(frozen=True)
class SweepPoint:
    value: int
    seeds: tuple[int, ...]
    snapshots: tuple[CounterSnapshot, ...]
    aggregates: dict  # counter name -> Aggregate


@dataclass(frozen=True)
class SweepResult:
    param_name: str
    replicates: int
    points: tuple[SweepPoint, ...]

    def means(self, metric: str) -> list[float]:
        return [p.aggregates[metric].mean for p in self.points]


def sweep(base_cfg: SimConfig, param_name: str, values: Sequence[int], n: int,
          base_seed: int, workers: int = 1, order: Sequence[int] | None = None
          ) -> SweepResult:
    """Run ``n`` replicates at each parameter value.

    Point ``k`` uses seeds ``base_seed + k*n + i``. ``order`` optionally permutes
    the order points are executed in; the result does not depend on it.
    """
    if param_name not in SWEEP_PARAMS:
        raise ValueError(f"cannot sweep {param_name!r}; choose one of {SWEEP_PARAMS}")
    values = [int(Percent(v)) for v in values]
    if not values:
        raise ValueError("sweep needs at least one parameter value")
    order = range(len(values)) if order is None else order
    if sorted(order) != list(range(len(values))):
        raise ValueError("order must be a permutation of the point indices")
    points = {}
    for k in order:
        cfg = base_cfg.replace(**{param_name: values[k]})
        seed0 = base_seed + k * n
        snaps = run_replicates(cfg, n, seed0, workers=workers)
        aggs = {m: aggregate([getattr(s, m) for s in snaps]) for m in COUNTER_FIELDS}
        points[k] = SweepPoint(values[k], tuple(range(seed0, seed0 + n)), tuple(snaps), aggs)
    return SweepResult(param_name, n, tuple(points[k] for k in range(len(values))))


# --- export -------------------------------------------------------------------


def _dec(x: float, digits: int | None = None) -> str:
    x = float(x)
    if x.is_integer() and digits is None:
        return str(int(x))
    if digits is None:
        return np.format_float_positional(x, trim="-")
    return np.format_float_positional(x, precision=digits, unique=False,
                                      fractional=False, trim="-")


def _write_csv(path: Path, header, rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def export_sweep_csv(result: SweepResult, path) -> tuple[Path, Path]:
    """Write ``<path>.replicates.csv`` and ``<path>.aggregates.csv``."""
    base = str(path)
    rep_path = Path(base + ".replicates.csv")
    agg_path = Path(base + ".aggregates.csv")
    points = sorted(result.points, key=lambda p: p.value)

    rep_rows = []
    for p in points:
        for i, (seed, snap) in enumerate(zip(p.seeds, p.snapshots)):
            rep_rows.append([result.param_name, p.value, i, seed, *snap.as_row()])
    _write_csv(rep_path, ["param_name", "param_value", "replicate", "seed", *SNAPSHOT_COLUMNS],
               rep_rows)

    agg_rows = []
    for p in points:
        for m in sorted(COUNTER_FIELDS):
            a = p.aggregates[m]
            agg_rows.append([result.param_name, p.value, m, a.n, _dec(a.min), _dec(a.max),
                             _dec(a.mean), _dec(a.ci_low, 6), _dec(a.ci_high, 6)])
    _write_csv(agg_path, ["param_name", "param_value", "metric", "n", "min", "max", "mean",
                          "ci_low", "ci_high"], agg_rows)
    return rep_path, agg_path


def _nice_step(span: float) -> float:
    raw = span / 5
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if m * mag >= raw:
            return m * mag
    return 10 * mag


def export_errorbar_svg(result: SweepResult, metric_name: str, path) -> Path:
    """Error-bar chart of one counter: min-max whisker, CI box and mean marker per point."""
    if metric_name not in COUNTER_FIELDS:
        raise ValueError(f"unknown metric {metric_name!r}")
    W, H = 640, 420
    left, right, top, bottom = 70, 30, 40, 60
    pw, ph = W - left - right, H - top - bottom
    points = sorted(result.points, key=lambda p: p.value)
    aggs = [p.aggregates[metric_name] for p in points]

    lo = min([0.0] + [a.ci_low for a in aggs])
    hi = max([a.max for a in aggs] + [a.ci_high for a in aggs] + [0.0])
    if hi - lo <= 0:
        hi = lo + 1.0
    step = _nice_step(hi - lo)
    lo = math.floor(lo / step) * step
    hi = math.ceil(hi / step) * step

    xs = [p.value for p in points]
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + (hi - v) / (hi - lo) * ph

    f = "{:.2f}".format
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2:.2f}" y="22" text-anchor="middle" font-size="14">'
        f'{escape(metric_name)} vs {escape(result.param_name)} '
        f'(n={result.replicates} per point)</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    k = 0
    while lo + k * step <= hi + 1e-9 * step:
        v = lo + k * step
        y = sy(v)
        out.append(f'<line x1="{left - 5}" y1="{f(y)}" x2="{left}" y2="{f(y)}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{f(y + 4)}" text-anchor="end">{_dec(round(v, 9))}</text>')
        k += 1
    for v in xs:
        x = sx(v)
        out.append(f'<line x1="{f(x)}" y1="{top + ph}" x2="{f(x)}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{f(x)}" y="{top + ph + 20}" text-anchor="middle">{v}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{H - 15}" text-anchor="middle">'
               f'{escape(result.param_name)} (%)</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2:.2f})">{escape(metric_name)}</text>')

    for v, a in zip(xs, aggs):
        x = sx(v)
        out.append(f'<g class="point" data-value="{v}">')
        out.append(f'<line class="whisker" x1="{f(x)}" y1="{f(sy(a.min))}" x2="{f(x)}" '
                   f'y2="{f(sy(a.max))}" stroke="black"/>')
        for end in (a.min, a.max):
            out.append(f'<line class="cap" x1="{f(x - 6)}" y1="{f(sy(end))}" x2="{f(x + 6)}" '
                       f'y2="{f(sy(end))}" stroke="black"/>')
        out.append(f'<rect class="ci" x="{f(x - 8)}" y="{f(sy(a.ci_high))}" width="16" '
                   f'height="{f(sy(a.ci_low) - sy(a.ci_high))}" fill="steelblue" '
                   f'fill-opacity="0.35" stroke="steelblue"/>')
        out.append(f'<circle class="mean" cx="{f(x)}" cy="{f(sy(a.mean))}" r="3.5" fill="firebrick"/>')
        out.append('</g>')
    out.append('</svg>')

    path = Path(path)
    try:
        path.write_text("\n".join(out) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path
