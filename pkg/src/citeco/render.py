"""Static SVG charts built from the metrics and field-average CSVs.

Each plotted data point is an SVG element carrying ``data-source`` and
``data-row`` attributes naming the CSV file and 1-based data row it came
from, so a chart can be checked back against its input.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence
from xml.sax.saxutils import quoteattr

from .metrics import FULL

WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=70, right=20, top=40, bottom=55)
R_MIN, R_MAX = 3.0, 40.0
PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666")


class BubbleRow(NamedTuple):
    parent: int
    pub_year: int
    R: float
    citations: int
    row: int


class ScatterRow(NamedTuple):
    parent: int
    citations: int
    S: float
    row: int


class TimelineRow(NamedTuple):
    year: int
    R: float
    H: float
    row: int


def _f(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _pad(lo: float, hi: float) -> tuple[float, float]:
    if hi <= lo:
        return lo - 1.0, hi + 1.0
    span = hi - lo
    return lo - 0.05 * span, hi + 0.05 * span


@dataclass
class _Panel:
    x0: float
    y0: float
    w: float
    h: float
    xlim: tuple[float, float]
    ylim: tuple[float, float]

    def sx(self, x: float) -> float:
        lo, hi = self.xlim
        return self.x0 + (x - lo) / (hi - lo) * self.w

    def sy(self, y: float) -> float:
        lo, hi = self.ylim
        return self.y0 + self.h - (y - lo) / (hi - lo) * self.h

    def axes(self, xlabel: str, ylabel: str, xticks=None, xfmt=None) -> list[str]:
        x1, y1 = self.x0 + self.w, self.y0 + self.h
        out = [
            f'<g class="axes" stroke="#000" stroke-width="1">'
            f'<line x1="{_f(self.x0)}" y1="{_f(y1)}" x2="{_f(x1)}" y2="{_f(y1)}"/>'
            f'<line x1="{_f(self.x0)}" y1="{_f(self.y0)}" x2="{_f(self.x0)}" y2="{_f(y1)}"/></g>'
        ]
        xfmt = xfmt or (lambda v: f"{v:.4g}")
        for v in xticks if xticks is not None else _ticks(*self.xlim):
            x = self.sx(v)
            out.append(
                f'<line x1="{_f(x)}" y1="{_f(y1)}" x2="{_f(x)}" y2="{_f(y1 + 5)}" stroke="#000"/>'
                f'<text x="{_f(x)}" y="{_f(y1 + 18)}" text-anchor="middle" font-size="11">{xfmt(v)}</text>'
            )
        for v in _ticks(*self.ylim):
            y = self.sy(v)
            out.append(
                f'<line x1="{_f(self.x0 - 5)}" y1="{_f(y)}" x2="{_f(self.x0)}" y2="{_f(y)}" stroke="#000"/>'
                f'<text x="{_f(self.x0 - 8)}" y="{_f(y + 4)}" text-anchor="end" font-size="11">{v:.4g}</text>'
            )
        out.append(
            f'<text x="{_f(self.x0 + self.w / 2)}" y="{_f(y1 + 40)}" text-anchor="middle" font-size="13">{xlabel}</text>'
            f'<text transform="translate({_f(self.x0 - 52)},{_f(self.y0 + self.h / 2)}) rotate(-90)" '
            f'text-anchor="middle" font-size="13">{ylabel}</text>'
        )
        return out


def _document(title: str, body: list[str], height: int = HEIGHT) -> str:
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">\n'
        f"<title>{title}</title>\n"
        f'<rect width="{WIDTH}" height="{height}" fill="#fff"/>\n'
    )
    return head + "\n".join(body) + "\n</svg>\n"


def _panel(xlim, ylim, top=MARGIN["top"], height=HEIGHT - MARGIN["top"] - MARGIN["bottom"]) -> _Panel:
    w = WIDTH - MARGIN["left"] - MARGIN["right"]
    return _Panel(MARGIN["left"], top, w, height, xlim, ylim)


def _attrs(source: str, row: int, **extra) -> str:
    parts = [f"data-source={quoteattr(source)}", f'data-row="{row}"']
    parts += [f"data-{k.replace('_', '-')}={quoteattr(str(v))}" for k, v in sorted(extra.items())]
    return " ".join(parts)


def bubble_radii(citations: Sequence[float], r_min: float = R_MIN, r_max: float = R_MAX) -> list[float]:
    """Radii proportional to sqrt(citations) (area-true).

    The least-cited bubble gets ``r_min``; if the most-cited one would then
    exceed ``r_max`` every radius is scaled down by the same factor.
    Counts below 1 are drawn as 1.
    """
    if not citations:
        return []
    roots = [math.sqrt(max(float(c), 1.0)) for c in citations]
    scale = r_min / min(roots)
    if max(roots) * scale > r_max:
        scale = r_max / max(roots)
    return [r * scale for r in roots]


def reach_bubbles_svg(rows: Sequence[BubbleRow], r_min: float = R_MIN, r_max: float = R_MAX) -> str:
    """Citation reach against parent publication year; bubble area tracks
    the parent's citation count."""
    title = "Citation reach vs. parent publication year"
    xs = [r.pub_year for r in rows] or [0, 1]
    ys = [r.R for r in rows] or [0, 1]
    panel = _panel(_pad(min(xs), max(xs)), _pad(min(0.0, min(ys)), max(ys)))
    body = panel.axes("parent publication year", "citation reach R", xfmt=lambda v: f"{v:.0f}")
    for r, radius in zip(rows, bubble_radii([r.citations for r in rows], r_min, r_max)):
        body.append(
            f'<circle cx="{_f(panel.sx(r.pub_year))}" cy="{_f(panel.sy(r.R))}" r="{_f(radius)}" '
            f'fill="#1b9e77" fill-opacity="0.45" stroke="#1b9e77" '
            f"{_attrs('metrics', r.row, parent=r.parent, citations=r.citations)}/>"
        )
    return _document(title, body)


def entropy_citations_svg(rows: Sequence[ScatterRow]) -> str:
    """Entropy against citation count on a log10 citation axis. Rows with
    fewer than one citation have no position on that axis and are left out."""
    title = "Network entropy vs. parent citations"
    rows = [r for r in rows if r.citations >= 1]
    lx = [math.log10(r.citations) for r in rows] or [0.0, 1.0]
    ys = [r.S for r in rows] or [0.0, 1.0]
    lo, hi = math.floor(min(lx)), math.ceil(max(lx))
    if hi == lo:
        hi = lo + 1
    panel = _panel((lo, hi), _pad(min(0.0, min(ys)), max(ys)))
    body = panel.axes(
        "parent citations (log scale)",
        "entropy S (nats)",
        xticks=list(range(lo, hi + 1)),
        xfmt=lambda v: f"1e{v:.0f}",
    )
    for r, x in zip(rows, lx):
        body.append(
            f'<circle cx="{_f(panel.sx(x))}" cy="{_f(panel.sy(r.S))}" r="3.5" fill="#7570b3" '
            f"{_attrs('metrics', r.row, parent=r.parent, citations=r.citations)}/>"
        )
    return _document(title, body)


def timelines_svg(series: dict[int, Sequence[TimelineRow]], average: Sequence[TimelineRow] = ()) -> str:
    """Two stacked panels, normalized entropy above and citation reach below,
    one line per parent plus a dashed field-average line."""
    title = "Normalized entropy and citation reach over time"
    height = 2 * HEIGHT - 60
    everything = [r for rows in series.values() for r in rows] + list(average)
    years = [r.year for r in everything] or [0, 1]
    xlim = _pad(min(years), max(years))
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"] - 30
    top = _panel(xlim, (0.0, 1.0), top=MARGIN["top"], height=ph)
    rs = [r.R for r in everything] or [0.0, 1.0]
    bottom = _panel(xlim, _pad(min(0.0, min(rs)), max(rs)), top=MARGIN["top"] + ph + 80, height=ph)
    body = top.axes("year", "normalized entropy H", xfmt=lambda v: f"{v:.0f}")
    body += bottom.axes("year", "citation reach R", xfmt=lambda v: f"{v:.0f}")

    def draw(panel, rows, value, source, color, dashed, parent=None):
        out = []
        pts = " ".join(f"{_f(panel.sx(r.year))},{_f(panel.sy(value(r)))}" for r in rows)
        dash = ' stroke-dasharray="6 4"' if dashed else ""
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        extra = {} if parent is None else {"parent": parent}
        for r in rows:
            out.append(
                f'<circle cx="{_f(panel.sx(r.year))}" cy="{_f(panel.sy(value(r)))}" r="2" fill="{color}" '
                f"{_attrs(source, r.row, year=r.year, **extra)}/>"
            )
        return out

    for i, parent in enumerate(sorted(series)):
        color = PALETTE[i % len(PALETTE)]
        rows = series[parent]
        body += draw(top, rows, lambda r: r.H, "metrics", color, False, parent)
        body += draw(bottom, rows, lambda r: r.R, "metrics", color, False, parent)
    if average:
        body += draw(top, average, lambda r: r.H, "field-average", "#000", True)
        body += draw(bottom, average, lambda r: r.R, "field-average", "#000", True)
    return _document(title, body, height)


# --- csv loading -------------------------------------------------------------


def chart_inputs(metrics_csv: str) -> tuple[list[BubbleRow], list[ScatterRow], dict[int, list[TimelineRow]]]:
    """Split a metrics CSV into the rows each chart plots.

    Bubble and scatter charts use each parent's ``full`` row (its last year
    row if there is none); the publication year is the parent's earliest
    year row.
    """
    reader = csv.DictReader(io.StringIO(metrics_csv))
    by_parent: dict[int, list[tuple[int, dict]]] = {}
    for i, row in enumerate(reader, start=1):
        by_parent.setdefault(int(row["parent"]), []).append((i, row))
    bubbles, scatter, timelines = [], [], {}
    for parent in sorted(by_parent):
        entries = by_parent[parent]
        yearly = [(i, r) for i, r in entries if r["year"] != FULL]
        full = [(i, r) for i, r in entries if r["year"] == FULL]
        timelines[parent] = [TimelineRow(int(r["year"]), float(r["R"]), float(r["H"]), i) for i, r in yearly]
        pick = full[-1] if full else (yearly[-1] if yearly else None)
        if pick is None:
            continue
        i, r = pick
        scatter.append(ScatterRow(parent, int(r["C"]), float(r["S_nats"]), i))
        if yearly:
            pub = min(int(r2["year"]) for _, r2 in yearly)
            bubbles.append(BubbleRow(parent, pub, float(r["R"]), int(r["C"]), i))
    return bubbles, scatter, {p: rows for p, rows in timelines.items() if rows}


def average_rows(average_csv: str) -> list[TimelineRow]:
    reader = csv.DictReader(io.StringIO(average_csv))
    return [
        TimelineRow(int(r["year"]), float(r["mean_R"]), float(r["mean_H"]), i) for i, r in enumerate(reader, start=1)
    ]
