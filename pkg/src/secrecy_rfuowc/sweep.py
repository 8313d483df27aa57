"""Parameter sweeps, analytic-vs-MC comparison reports and table writers."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

from . import analytic
from .config import SweepSpec
from .errors import MissingEngine
from .montecarlo import RngStream, estimate_metrics
from .params import Detection, SystemConfig, db_to_linear, imdd_normalisation

WORKERS_ENV = "SECRECY_RFUOWC_WORKERS"
COLUMNS = ("variable", "value", "metric", "engine", "result", "error", "status", "ms")


@dataclass(frozen=True)
class Row:
    variable: str
    value: float
    metric: str
    engine: str
    result: float
    error: float
    status: str
    ms: float


def apply_variable(base: SystemConfig, variable: str | None, value: float) -> SystemConfig:
    """The base scenario with one sweep variable set to ``value``."""
    if variable is None:
        return base
    v = float(value)
    if variable == "phi_r_db":
        return base.replace(sr=base.sr.with_snr(db_to_linear(v)))
    if variable == "phi_e_db":
        return base.replace(se=base.se.with_snr(db_to_linear(v)))
    if variable == "phi_d_db":
        return base.replace(rd=base.rd.with_snr(db_to_linear(v)))
    if variable == "psi_r_db":
        rd = base.rd
        scale = 1.0
        if rd.detection is Detection.IMDD:
            scale = imdd_normalisation(rd.omega, rd.lam, rd.a, rd.b, rd.c)
        return base.replace(rd=rd.with_snr(db_to_linear(v) * scale))
    if variable == "n_s":
        return base.replace(n_s=v)
    if variable == "n_r":
        return base.replace(sr=replace(base.sr, n_antennas=v))
    if variable == "n_e":
        return base.replace(se=replace(base.se, n_antennas=v))
    if variable == "eta_r":
        return base.replace(sr=replace(base.sr, eta=v))
    if variable == "eta_e":
        return base.replace(se=replace(base.se, eta=v))
    if variable == "mu_r":
        return base.replace(sr=replace(base.sr, mu=v))
    if variable == "mu_e":
        return base.replace(se=replace(base.se, mu=v))
    if variable == "target_rate":
        return base.replace(target_rate=v)
    raise ValueError(f"unknown sweep variable {variable!r}")


def _status(exc: Exception) -> str:
    return f"error:{type(exc).__name__}"


def _point(args) -> list[Row]:
    spec, seed, index, value, timing = args
    name = spec.variable or "none"
    rows: list[Row] = []
    try:
        cfg = apply_variable(spec.base, spec.variable, value)
    except Exception as exc:  # recorded in-row, never aborts the sweep
        return [Row(name, value, m, e, math.nan, math.nan, _status(exc), math.nan)
                for m in spec.metrics for e in spec.engines]
    for engine in spec.engines:
        if engine == "analytic":
            for m in spec.metrics:
                t0 = time.perf_counter()
                try:
                    r = analytic.evaluate(m, cfg)
                    row = (r.value, r.error_estimate, "ok")
                except Exception as exc:
                    row = (math.nan, math.nan, _status(exc))
                ms = (time.perf_counter() - t0) * 1e3 if timing else math.nan
                rows.append(Row(name, value, m, engine, *row, ms))
        else:
            t0 = time.perf_counter()
            try:
                est = estimate_metrics(spec.metrics, cfg, spec.mc_samples, snr_form="min",
                                       rng=RngStream(seed, index))
                got = {m: (est[m].mean, est[m].std_error, "ok") for m in spec.metrics}
            except Exception as exc:
                got = {m: (math.nan, math.nan, _status(exc)) for m in spec.metrics}
            ms = (time.perf_counter() - t0) * 1e3 if timing else math.nan
            for m in spec.metrics:
                rows.append(Row(name, value, m, engine, *got[m], ms))
    return rows


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec, seed: int = 0, workers: int | None = None,
              timing: bool = False) -> list[Row]:
    """Evaluate every (grid point, engine, metric); rows ordered by grid index.

    MC streams are keyed by (seed, grid index), so results do not depend on
    the worker count.  ``ms`` is NaN unless ``timing`` is set, which keeps the
    table byte-stable.
    """
    grid = spec.grid if spec.variable is not None else (math.nan,)
    jobs = [(spec, seed, i, v, timing) for i, v in enumerate(grid)]
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(min(workers, len(jobs))) as pool:
            chunks = list(pool.map(_point, jobs))
    else:
        chunks = [_point(j) for j in jobs]
    return [row for chunk in chunks for row in chunk]


def to_bits(rows: list[Row]) -> list[Row]:
    """ASC rows converted from nats to bits."""
    k = 1.0 / math.log(2.0)
    return [replace(r, result=r.result * k, error=r.error * k) if r.metric == "ASC" else r
            for r in rows]


# ---------------------------------------------------------------------------
# comparison


@dataclass(frozen=True)
class Discrepancy:
    variable: str
    value: float
    metric: str
    analytic: float
    mc: float
    mc_std_error: float
    delta: float
    threshold: float
    flagged: bool


@dataclass(frozen=True)
class CompareReport:
    points: tuple
    n_flagged: int

    @property
    def n_pass(self) -> int:
        return len(self.points) - self.n_flagged

    def to_dict(self) -> dict:
        return {"n_points": len(self.points), "n_pass": self.n_pass, "n_flagged": self.n_flagged,
                "points": [asdict(p) for p in self.points]}

    def render(self) -> str:
        lines = [f"{'variable':>12} {'value':>10} {'metric':>6} {'analytic':>13} {'mc':>13} "
                 f"{'delta':>10} {'limit':>10}  flag"]
        for p in self.points:
            lines.append(f"{p.variable:>12} {p.value:>10.4g} {p.metric:>6} {p.analytic:>13.6g} "
                         f"{p.mc:>13.6g} {p.delta:>10.3g} {p.threshold:>10.3g}  "
                         f"{'FLAG' if p.flagged else 'ok'}")
        lines.append(f"{self.n_pass} pass, {self.n_flagged} flagged")
        return "\n".join(lines)


def _key(r: Row):
    v = r.value
    return (r.variable, "nan" if isinstance(v, float) and math.isnan(v) else v, r.metric)


def compare_report(rows: list[Row]) -> CompareReport:
    """Flag points with |analytic - mc| > max(0.01 |analytic|, 4 mc std error)."""
    ana = {_key(r): r for r in rows if r.engine == "analytic" and r.status == "ok"}
    mc = {_key(r): r for r in rows if r.engine == "mc" and r.status == "ok"}
    both = [k for k in ana if k in mc]
    if not both:
        raise MissingEngine("comparison needs analytic and mc rows for the same point")
    points = []
    for k in both:
        a, m = ana[k], mc[k]
        delta = abs(a.result - m.result)
        limit = max(0.01 * abs(a.result), 4.0 * m.error)
        points.append(Discrepancy(a.variable, a.value, a.metric, a.result, m.result, m.error,
                                  delta, limit, delta > limit))
    return CompareReport(tuple(points), sum(p.flagged for p in points))


# ---------------------------------------------------------------------------
# writers


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return format(x, ".17g")
    return str(x)


def write_csv(rows: list[Row], fh=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text


def write_jsonl(rows: list[Row], fh=None) -> str:
    lines = []
    for r in rows:
        d = {}
        for c in COLUMNS:
            v = getattr(r, c)
            d[c] = None if isinstance(v, float) and math.isnan(v) else v
        lines.append(json.dumps(d, allow_nan=False))
    text = "\n".join(lines) + "\n"
    if fh is not None:
        fh.write(text)
    return text
