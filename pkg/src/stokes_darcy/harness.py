"""Convergence sweeps, long runs and their CSV/SVG outputs."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from xml.sax.saxutils import escape

import numpy as np

from .assembly import Discretization
from .mms import get_case
from .params import PhysicalParams
from .timestepper import MonitorRow, SchemeConfig, StabilityError, run_transient


def to_subdivisions(h) -> int:
    """Accept a subdivision count (int) or a mesh size h = 1/n."""
    if isinstance(h, (int, np.integer)) and h >= 1:
        return int(h)
    n = 1.0 / float(Fraction(str(h)) if isinstance(h, str) else h)
    if abs(n - round(n)) > 1e-9 or round(n) < 1:
        raise ValueError(f"h={h} is not 1/n for a positive integer n")
    return int(round(n))


def snap_dt(h: float, theta: float, T: float) -> float:
    """dt = h**theta adjusted so that T/dt is an integer."""
    return T / max(1, round(T / h**theta))


def observed_rates(errors) -> np.ndarray:
    """log2(e_{2h} / e_h) for consecutive rows of an (nlevels, nfields) array."""
    e = np.asarray(errors, dtype=float)
    return np.log2(e[:-1] / e[1:])


@dataclass
class LevelResult:
    n: int
    dt: float
    e_phi: float
    e_u: float
    e_p: float

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def errors(self):
        return (self.e_phi, self.e_u, self.e_p)


@dataclass
class ConvergenceReport:
    case: str
    scheme: str
    theta: float
    T: float
    levels: list = field(default_factory=list)

    @property
    def rates(self) -> np.ndarray:
        if len(self.levels) < 2:
            return np.empty((0, 3))
        return observed_rates([lv.errors for lv in self.levels])

    @property
    def r_avg(self):
        r = self.rates
        return tuple(r.mean(axis=0)) if len(r) else (math.nan,) * 3


def _check_halving(ns):
    for a, b in zip(ns, ns[1:]):
        if b != 2 * a:
            raise ValueError(f"mesh sizes must halve between levels, got n={a} then n={b}")


def run_convergence(case, scheme, hs, theta: float = 1.0, T: float = 1.0,
                    params: PhysicalParams | None = None, alpha: float = 0.8,
                    init: str = "exact") -> ConvergenceReport:
    case = get_case(case)
    params = params or case.default_params
    ns = [to_subdivisions(h) for h in hs]
    _check_halving(ns)
    report = ConvergenceReport(case.name, scheme, theta, T)
    for n in ns:
        dt = snap_dt(1.0 / n, theta, T)
        disc = Discretization.build(n, params)
        cfg = SchemeConfig(scheme=scheme, dt=dt, alpha=alpha, params=params)
        try:
            res = run_transient(case, disc, cfg, T, sample_every=10**9, init=init)
        except StabilityError as exc:
            raise StabilityError(exc.step, f"level n={n}: {exc}") from None
        last = res.series[-1]
        report.levels.append(LevelResult(n, dt, last.e_phi, last.e_u, last.e_p))
    return report


@dataclass
class LongtimeResult:
    series: list
    aborted_step: int | None = None
    dt: float = math.nan


def run_longtime(case, scheme, h, dt: float, T: float, sample_every: int = 1,
                 params: PhysicalParams | None = None, alpha: float = 0.8,
                 init: str = "exact") -> LongtimeResult:
    """Monitor series from t = dt to T.  A blow-up ends the run and is recorded."""
    case = get_case(case)
    params = params or case.default_params
    disc = Discretization.build(to_subdivisions(h), params)
    cfg = SchemeConfig(scheme=scheme, dt=dt, alpha=alpha, params=params)
    rows = []
    try:
        res = run_transient(case, disc, cfg, T, sample_every=sample_every, init=init)
        rows = res.series
    except StabilityError as exc:
        return LongtimeResult(rows, exc.step, dt)
    return LongtimeResult(rows, None, dt)


# --- output ------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".16e")


REPORT_HEADER = ("kind", "n", "h", "dt", "e_phi", "e_u", "e_p")


def report_rows(report: ConvergenceReport):
    rows = [("level", lv.n, lv.h, lv.dt, *lv.errors) for lv in report.levels]
    for fine, r in zip(report.levels[1:], report.rates):
        rows.append(("rate", fine.n, fine.h, fine.dt, *r))
    return rows


def emit_csv(data, path) -> None:
    """Write a ConvergenceReport or a sequence of MonitorRow as CSV."""
    if isinstance(data, ConvergenceReport):
        header, rows = REPORT_HEADER, report_rows(data)
    else:
        if isinstance(data, LongtimeResult):
            data = data.series
        header = MonitorRow.FIELDS
        rows = [r.as_tuple() for r in data]
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(header)
            for row in rows:
                w.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


_STYLES = [
    ("#1f77b4", ""),
    ("#d62728", "6,3"),
    ("#2ca02c", "2,2"),
    ("#9467bd", "8,3,2,3"),
    ("#ff7f0e", "1,3"),
]


def emit_plot(series, path, fields=("e_phi", "e_u", "e_p"), title="relative error",
              width=640, height=400) -> None:
    """Standalone SVG: log-scale y against t, one polyline per field."""
    if isinstance(series, LongtimeResult):
        series = series.series
    if not series:
        raise ValueError("cannot plot an empty series")
    t = np.array([r.t for r in series], dtype=float)
    ys = {f: np.array([getattr(r, f) for r in series], dtype=float) for f in fields}
    positive = np.concatenate([y[np.isfinite(y) & (y > 0)] for y in ys.values()])
    lo, hi = (1e-16, 1.0) if len(positive) == 0 else (positive.min(), positive.max())
    dlo, dhi = math.floor(math.log10(lo)), math.ceil(math.log10(hi))
    if dhi == dlo:
        dhi += 1
    t0, t1 = float(t.min()), float(t.max())
    if t1 == t0:
        t0, t1 = t0 - 0.5, t1 + 0.5
    ml, mr, mt, mb = 70, 130, 30, 50
    pw, ph = width - ml - mr, height - mt - mb

    def X(v):
        return ml + (v - t0) / (t1 - t0) * pw

    def Y(v):
        return mt + (dhi - math.log10(v)) / (dhi - dlo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{ml + pw / 2:.1f}" y="18" text-anchor="middle" font-size="14">'
        f'{escape(title)}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for d in range(dlo, dhi + 1):
        y = Y(10.0**d)
        out.append(f'<line x1="{ml}" y1="{y:.2f}" x2="{ml + pw}" y2="{y:.2f}" '
                   'stroke="#dddddd"/>')
        out.append(f'<text x="{ml - 6}" y="{y + 4:.2f}" text-anchor="end" '
                   f'font-size="11">1e{d}</text>')
    for k in range(6):
        v = t0 + k * (t1 - t0) / 5
        out.append(f'<text x="{X(v):.2f}" y="{mt + ph + 16}" text-anchor="middle" '
                   f'font-size="11">{v:.4g}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" '
               'font-size="12">t</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {mt + ph / 2:.1f})">{escape(title)}</text>')
    for i, f in enumerate(fields):
        color, dash = _STYLES[i % len(_STYLES)]
        ok = np.isfinite(ys[f]) & (ys[f] > 0)
        pts = [(X(a), Y(b)) for a, b in zip(t[ok], ys[f][ok])]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        if len(pts) == 1:
            out.append(f'<circle cx="{pts[0][0]:.2f}" cy="{pts[0][1]:.2f}" r="3" '
                       f'fill="{color}"/>')
        elif pts:
            coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"'
                       f'{dash_attr} points="{coords}"/>')
        ly = mt + 14 + 18 * i
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly}" x2="{ml + pw + 40}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="1.5"{dash_attr}/>')
        out.append(f'<text x="{ml + pw + 46}" y="{ly + 4}" font-size="12">{escape(f)}</text>')
    out.append("</svg>")
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(out) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
