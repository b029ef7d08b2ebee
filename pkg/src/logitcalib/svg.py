"""Minimal deterministic SVG renderers for the evaluation artifacts.

Pure string assembly with fixed 2-decimal coordinates, so rerunning on
the same inputs reproduces the same bytes.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .calibration import ReliabilityDiagram

_W, _H = 480, 380
_ML, _MR, _MT, _MB = 56, 16, 34, 46
_PW = _W - _ML - _MR
_PH = _H - _MT - _MB
_BAR = "#4878cf"
_LINE = "#d65f5f"
_GREY = "#555555"


def _f(v: float) -> str:
    return format(float(v), ".2f")


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.0f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]


def _x(v: float) -> float:
    return _ML + v * _PW


def _y(v: float) -> float:
    return _MT + (1.0 - v) * _PH


def _axes(xlabel: str, ylabel: str, yticks: Sequence[tuple[float, str]]) -> list[str]:
    parts = [
        f'<rect x="{_ML}" y="{_MT}" width="{_PW}" height="{_PH}" '
        f'fill="none" stroke="{_GREY}"/>'
    ]
    for v in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0):
        parts.append(
            f'<text x="{_f(_x(v))}" y="{_H - _MB + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{_f(v)}</text>'
        )
    for v, label in yticks:
        parts.append(
            f'<text x="{_ML - 6}" y="{_f(_y(v) + 3)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{label}</text>'
        )
    parts.append(
        f'<text x="{_f(_ML + _PW / 2)}" y="{_H - 8}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{xlabel}</text>'
    )
    parts.append(
        f'<text x="14" y="{_f(_MT + _PH / 2)}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 14 {_f(_MT + _PH / 2)})">{ylabel}</text>'
    )
    return parts


def reliability_svg(diagram: ReliabilityDiagram, title: str) -> str:
    """Accuracy-per-confidence-bin bars with the identity diagonal."""
    yticks = [(v, _f(v)) for v in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)]
    parts = _header(title)
    parts.extend(_axes("confidence", "accuracy", yticks))
    bins = len(diagram.counts)
    for b in range(bins):
        if diagram.counts[b] == 0:
            continue
        lo, hi = diagram.bin_edges[b], diagram.bin_edges[b + 1]
        acc = diagram.accuracy[b]
        parts.append(
            f'<rect x="{_f(_x(lo) + 1)}" y="{_f(_y(acc))}" '
            f'width="{_f(_x(hi) - _x(lo) - 2)}" height="{_f(_y(0.0) - _y(acc))}" '
            f'fill="{_BAR}" fill-opacity="0.75"/>'
        )
        parts.append(
            f'<circle cx="{_f(_x(diagram.mean_confidence[b]))}" cy="{_f(_y(acc))}" '
            f'r="2.5" fill="{_LINE}"/>'
        )
    parts.append(
        f'<line x1="{_f(_x(0.0))}" y1="{_f(_y(0.0))}" x2="{_f(_x(1.0))}" '
        f'y2="{_f(_y(1.0))}" stroke="{_LINE}" stroke-dasharray="5,4"/>'
    )
    parts.append(
        f'<text x="{_f(_x(0.03))}" y="{_f(_y(0.94))}" font-family="sans-serif" '
        f'font-size="11">ECE = {format(diagram.ece, ".4f")}</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def score_histogram_svg(
    counts: Sequence[int], edges: Sequence[float], title: str, xlabel: str = "score"
) -> str:
    """Confidence-score histogram; bar heights normalized to the peak."""
    counts = np.asarray(counts, dtype=np.int64)
    peak = int(counts.max()) if counts.size else 0
    top = max(peak, 1)
    yticks = [(0.0, "0"), (0.5, str(top // 2)), (1.0, str(top))]
    parts = _header(title)
    parts.extend(_axes(xlabel, "count", yticks))
    for b, count in enumerate(counts):
        if count == 0:
            continue
        lo, hi = edges[b], edges[b + 1]
        h = count / top
        parts.append(
            f'<rect x="{_f(_x(lo) + 1)}" y="{_f(_y(h))}" '
            f'width="{_f(_x(hi) - _x(lo) - 2)}" height="{_f(_y(0.0) - _y(h))}" '
            f'fill="{_BAR}" fill-opacity="0.75"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
