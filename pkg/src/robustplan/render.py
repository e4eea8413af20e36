"""Hand-written SVG drawings of highway episodes and interval hulls.

The output depends only on the inputs: coordinates are printed with a fixed
number of decimals and elements are emitted in a fixed order, so equal
inputs give byte-identical documents.
"""
from __future__ import annotations

import math
from typing import Optional, Sequence

from .highway.env import Road, World
from .predictor import HullTrace

PX_PER_M = 4.0
MARGIN_M = 15.0
EGO_COLOR = "#1f5fbf"
OTHER_COLOR = "#6b6b6b"
HULL_COLOR = "#d62728"


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


class _Frame:
    """Maps road coordinates (m) to SVG pixels; lane 0 at the top."""

    def __init__(self, road: Road, x_min: float, x_max: float):
        self.road = road
        self.x0 = x_min - MARGIN_M
        self.width = (x_max - x_min + 2 * MARGIN_M) * PX_PER_M
        self.height = road.n_lanes * road.lane_width * PX_PER_M

    def px(self, x: float) -> float:
        return (x - self.x0) * PX_PER_M

    def py(self, y: float) -> float:
        return (y + 0.5 * self.road.lane_width) * PX_PER_M


def _extent(road: Road, worlds: Sequence[World], hulls: Optional[HullTrace]) -> tuple[float, float]:
    xs: list[float] = []
    for w in worlds:
        xs += [float(w.state[:, 0].min()), float(w.state[:, 0].max())]
    if hulls is not None and hulls.lo.size:
        xs += [float(hulls.lo[..., 0].min()), float(hulls.hi[..., 0].max())]
    if not xs:
        return 0.0, 100.0
    return min(xs) - road.vehicle_length, max(xs) + road.vehicle_length


def _road(frame: _Frame) -> list[str]:
    road = frame.road
    out = [f'<rect class="road" x="0.00" y="0.00" width="{_f(frame.width)}" '
           f'height="{_f(frame.height)}" fill="#e9e9e9"/>']
    for k in range(road.n_lanes + 1):
        y = _f(k * road.lane_width * PX_PER_M)
        dash = "" if k in (0, road.n_lanes) else ' stroke-dasharray="12 8"'
        out.append(f'<line class="lane" x1="0.00" y1="{y}" x2="{_f(frame.width)}" y2="{y}" '
                   f'stroke="#ffffff" stroke-width="2"{dash}/>')
    if math.isfinite(road.branch_x):
        x = _f(frame.px(road.branch_x))
        out.append(f'<line class="branch" x1="{x}" y1="0.00" x2="{x}" y2="{_f(frame.height)}" '
                   f'stroke="#999999" stroke-width="1" stroke-dasharray="4 4"/>')
    return out


def _footprint(frame: _Frame, x: float, y: float, psi: float, color: str, opacity: float,
               vehicle: int, epoch: int) -> str:
    road = frame.road
    L, W = road.vehicle_length * PX_PER_M, road.vehicle_width * PX_PER_M
    cx, cy = frame.px(x), frame.py(y)
    return (f'<rect class="vehicle" data-vehicle="{vehicle}" data-epoch="{epoch}" '
            f'x="{_f(cx - L / 2)}" y="{_f(cy - W / 2)}" width="{_f(L)}" height="{_f(W)}" '
            f'transform="rotate({_f(math.degrees(psi))} {_f(cx)} {_f(cy)})" '
            f'fill="{color}" fill-opacity="{_f(opacity)}"/>')


def _vehicles(frame: _Frame, worlds: Sequence[World]) -> list[str]:
    out = []
    n = len(worlds)
    for t, w in enumerate(worlds):
        # later epochs are drawn darker
        opacity = 0.25 + 0.75 * (t + 1) / n
        for i in range(w.n_vehicles):
            x, y, _, psi = (float(c) for c in w.state[i])
            out.append(_footprint(frame, x, y, psi, EGO_COLOR if i == 0 else OTHER_COLOR, opacity, i, t))
    return out


def _ribbons(frame: _Frame, hulls: HullTrace) -> list[str]:
    lo, hi = hulls.lo, hulls.hi
    if hulls.inner_lo is not None:
        lo, hi = hulls.inner_lo, hulls.inner_hi
    out = []
    for i in range(lo.shape[1]):
        upper = [(frame.px(hi[t, i, 0]), frame.py(hi[t, i, 1])) for t in range(lo.shape[0])]
        lower = [(frame.px(lo[t, i, 0]), frame.py(lo[t, i, 1])) for t in reversed(range(lo.shape[0]))]
        pts = " ".join(f"{_f(px)},{_f(py)}" for px, py in upper + lower)
        out.append(f'<polygon class="hull" data-vehicle="{i}" points="{pts}" fill="{HULL_COLOR}" '
                   f'fill-opacity="0.25" stroke="{HULL_COLOR}" stroke-width="1"/>')
    for t in range(hulls.lo.shape[0]):
        for i in range(hulls.lo.shape[1]):
            x0, x1 = frame.px(hulls.lo[t, i, 0]), frame.px(hulls.hi[t, i, 0])
            y0, y1 = frame.py(hulls.lo[t, i, 1]), frame.py(hulls.hi[t, i, 1])
            out.append(f'<rect class="hull-box" data-vehicle="{i}" data-epoch="{t}" x="{_f(x0)}" '
                       f'y="{_f(y0)}" width="{_f(x1 - x0)}" height="{_f(y1 - y0)}" fill="none" '
                       f'stroke="{HULL_COLOR}" stroke-width="0.5"/>')
    return out


def render_trace(road: Road, worlds: Sequence[World] = (), hulls: Optional[HullTrace] = None) -> str:
    """SVG document showing the lanes, a footprint per vehicle and epoch, and hull ribbons.

    ``worlds`` is the sequence of observed worlds of an episode and ``hulls``
    an optional interval prediction; both may be empty.
    """
    frame = _Frame(road, *_extent(road, worlds, hulls))
    body = _road(frame)
    if hulls is not None:
        body += _ribbons(frame, hulls)
    body += _vehicles(frame, worlds)
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{_f(frame.width)}" '
            f'height="{_f(frame.height)}" viewBox="0 0 {_f(frame.width)} {_f(frame.height)}">')
    return "\n".join(['<?xml version="1.0" encoding="UTF-8"?>', head, *("  " + b for b in body), "</svg>"]) + "\n"

