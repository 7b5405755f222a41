"""Static SVG rendering of flight traces.

Produces a self-contained SVG 1.1 document: a top-down XY view with one
polyline per drone (equal scale on both axes) and an altitude strip
underneath plotting z against time. Start points are marked with a
circle, end points with a square. No plotting library involved, so the
output is byte-stable for a given trace.
"""

from __future__ import annotations

from typing import Dict, List, Sequence, Tuple

from .sim.trace import Trace

WIDTH = 800
HEIGHT = 600
MARGIN = 40
XY_HEIGHT = 400
ALT_HEIGHT = HEIGHT - XY_HEIGHT - 3 * MARGIN

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _series(trace: Trace) -> Dict[int, List[Tuple[float, float, float, float]]]:
    """Per-drone (t, x, y, z) samples in entry order."""
    out: Dict[int, List[Tuple[float, float, float, float]]] = {}
    for entry in trace.entries:
        for row in entry.drones:
            out.setdefault(row["id"], []).append(
                (entry.t, row["x"], row["y"], row["z"])
            )
    return out


def _bounds(values: Sequence[float], pad: float) -> Tuple[float, float]:
    lo, hi = min(values), max(values)
    if hi - lo < pad * 2:
        mid = (lo + hi) / 2.0
        return mid - pad, mid + pad
    return lo - pad, hi + pad


def render_trace_svg(trace: Trace) -> str:
    parts: List[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    series = _series(trace)
    if not series:
        parts.append(
            f'<text x="{WIDTH // 2}" y="{HEIGHT // 2}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="16" fill="#666">no data</text>'
        )
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    xs = [p[1] for pts in series.values() for p in pts]
    ys = [p[2] for pts in series.values() for p in pts]
    zs = [p[3] for pts in series.values() for p in pts]
    ts = [p[0] for pts in series.values() for p in pts]
    x_lo, x_hi = _bounds(xs, 0.5)
    y_lo, y_hi = _bounds(ys, 0.5)
    z_lo, z_hi = _bounds(zs, 0.25)
    t_lo, t_hi = min(ts), max(ts)
    if t_hi - t_lo < 1e-9:
        t_hi = t_lo + 1.0

    # Equal scale for x and y, centered in the plot rectangle.
    plot_w = WIDTH - 2 * MARGIN
    scale = min(plot_w / (x_hi - x_lo), XY_HEIGHT / (y_hi - y_lo))
    x_off = MARGIN + (plot_w - (x_hi - x_lo) * scale) / 2.0
    y_off = MARGIN + (XY_HEIGHT - (y_hi - y_lo) * scale) / 2.0

    def sx(x: float) -> float:
        return x_off + (x - x_lo) * scale

    def sy(y: float) -> float:
        # SVG y grows downward; world y grows upward.
        return y_off + (y_hi - y) * scale

    alt_top = 2 * MARGIN + XY_HEIGHT

    def ax(t: float) -> float:
        return MARGIN + (t - t_lo) / (t_hi - t_lo) * plot_w

    def az(z: float) -> float:
        return alt_top + (z_hi - z) / (z_hi - z_lo) * ALT_HEIGHT

    parts.append(
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w}" height="{XY_HEIGHT}" '
        f'fill="none" stroke="#ccc"/>'
    )
    parts.append(
        f'<rect x="{MARGIN}" y="{alt_top}" width="{plot_w}" height="{ALT_HEIGHT}" '
        f'fill="none" stroke="#ccc"/>'
    )
    label = 'font-family="sans-serif" font-size="11" fill="#666"'
    parts.append(
        f'<text x="{MARGIN}" y="{MARGIN - 8}" {label}>top-down view '
        f"(x {_fmt(x_lo)}..{_fmt(x_hi)} m, y {_fmt(y_lo)}..{_fmt(y_hi)} m)</text>"
    )
    parts.append(
        f'<text x="{MARGIN}" y="{alt_top - 8}" {label}>altitude '
        f"(t {_fmt(t_lo)}..{_fmt(t_hi)} s, z {_fmt(z_lo)}..{_fmt(z_hi)} m)</text>"
    )

    for idx, drone_id in enumerate(sorted(series)):
        pts = series[drone_id]
        color = PALETTE[idx % len(PALETTE)]
        xy = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for _, x, y, _z in pts)
        parts.append(
            f'<polyline points="{xy}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        alt = " ".join(f"{_fmt(ax(t))},{_fmt(az(z))}" for t, _x, _y, z in pts)
        parts.append(
            f'<polyline points="{alt}" fill="none" stroke="{color}" stroke-width="1"/>'
        )
        t0, x0, y0, _ = pts[0]
        _, x1, y1, _ = pts[-1]
        parts.append(
            f'<circle cx="{_fmt(sx(x0))}" cy="{_fmt(sy(y0))}" r="4" '
            f'fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<rect x="{_fmt(sx(x1) - 3.5)}" y="{_fmt(sy(y1) - 3.5)}" '
            f'width="7" height="7" fill="{color}"/>'
        )
        parts.append(
            f'<text x="{_fmt(sx(x1) + 6)}" y="{_fmt(sy(y1) + 4)}" {label}>'
            f"{drone_id}</text>"
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def plot_trace(trace: Trace, path) -> None:
    """Write the trace plot to an SVG file."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_trace_svg(trace))
