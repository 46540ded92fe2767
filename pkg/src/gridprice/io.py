"""CSV and SVG output, baseline CSV input.

Floats are written with ``repr`` so files are byte-identical for identical
data and round-trip exactly.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import numpy as np

from .control import LowPassFilter
from .errors import ConfigError
from .sensitivity import SensitivityCurve
from .simulation import COLUMNS, SimTrace

TRACE_HEADER = ("k",) + COLUMNS
SWEEP_HEADER = ("omega_rad_per_h", "magnitude")
BASELINE_HEADER = ("step", "baseline_mw")
FLAG_COLUMNS = {"alarm", "clamped"}


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return repr(float(x))


def _write_rows(path: Path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def write_trace_csv(trace: SimTrace, path) -> Path:
    cols = [trace[c] for c in COLUMNS]
    rows = []
    for k in range(len(trace)):
        row = [k]
        for name, col in zip(COLUMNS, cols):
            row.append(int(col[k]) if name in FLAG_COLUMNS else float(col[k]))
        rows.append(row)
    return _write_rows(path, TRACE_HEADER, rows)


def read_trace_csv(path) -> dict:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [list(map(float, r)) for r in reader]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


def write_sweep_csv(curve: SensitivityCurve, path) -> Path:
    return _write_rows(path, SWEEP_HEADER, zip(curve.omegas, curve.magnitudes))


def write_table_csv(rows: Sequence[dict], path) -> Path:
    """Rows of dicts sharing the keys of the first row."""
    if not rows:
        raise ValueError("no rows to write")
    header = list(rows[0])
    return _write_rows(path, header, ([r[h] for h in header] for r in rows))


def write_filter_csv(filt: LowPassFilter, path) -> Path:
    """One row per tap index: feedforward b_i and feedback a_i."""
    return _write_rows(path, ("index", "b", "a"),
                       ((i, b, a) for i, (b, a) in enumerate(zip(filt.b, filt.a))))


def write_baseline_csv(baseline: Sequence[float], path) -> Path:
    return _write_rows(path, BASELINE_HEADER, enumerate(float(b) for b in baseline))


def read_baseline_csv(path) -> tuple:
    """Parse ``step,baseline_mw``; rows must be numbered 0, 1, 2, ..."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty baseline file", line=1) from None
        if tuple(h.strip() for h in header) != BASELINE_HEADER:
            raise ConfigError(f"{path}:1: expected header {','.join(BASELINE_HEADER)}", line=1)
        values = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                step, val = int(row[0]), float(row[1])
            except (ValueError, IndexError):
                raise ConfigError(f"{path}:{lineno}: malformed row {row!r}", line=lineno) from None
            if step != len(values):
                raise ConfigError(f"{path}:{lineno}: expected step {len(values)}, got {step}",
                                  line=lineno)
            values.append(val)
    if not values:
        raise ConfigError(f"{path}: no baseline rows")
    return tuple(values)


def _polyline(x, y, box, y_range, color):
    x0, y0, w, h = box
    lo, hi = y_range
    span = hi - lo if hi > lo else 1.0
    xs = x0 + w * (np.asarray(x) - x[0]) / max(x[-1] - x[0], 1)
    ys = y0 + h * (1.0 - (np.asarray(y) - lo) / span)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, ys))
    return f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>'


def _panel(x, y, box, label, color):
    x0, y0, w, h = box
    lo, hi = float(np.min(y)), float(np.max(y))
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    return "\n".join([
        f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#999"/>',
        _polyline(x, y, box, (lo, hi), color),
        f'<text x="{x0 + 4}" y="{y0 + 14}" font-size="12">{label}</text>',
        f'<text x="{x0 - 4}" y="{y0 + 10}" font-size="10" text-anchor="end">{hi:.4g}</text>',
        f'<text x="{x0 - 4}" y="{y0 + h}" font-size="10" text-anchor="end">{lo:.4g}</text>',
    ])


def trace_svg(trace: SimTrace, title: str = "") -> str:
    """Two stacked panels: mismatch e_k (MW) and issued price lambda_k."""
    k = np.arange(len(trace), dtype=float)
    width, height, left, panel_h = 720, 420, 70, 170
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif">',
        f'<text x="{left}" y="16" font-size="13">{title}</text>',
        _panel(k, trace.e, (left, 30, width - left - 20, panel_h), "e_k [MW]", "#c0392b"),
        _panel(k, trace.price, (left, 40 + panel_h + 20, width - left - 20, panel_h),
               "lambda_k [$/MWh]", "#2c3e50"),
        f'<text x="{width // 2}" y="{height - 6}" font-size="11">step k</text>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def write_svg(text: str, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def emit_trace(trace: SimTrace, out_dir, stem: str = "trace") -> list:
    out_dir = Path(out_dir)
    csv_path = write_trace_csv(trace, out_dir / f"{stem}.csv")
    svg_path = write_svg(trace_svg(trace, trace.scenario.name or stem), out_dir / f"{stem}.svg")
    return [csv_path, svg_path]
