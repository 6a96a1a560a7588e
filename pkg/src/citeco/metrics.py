"""Citation reach, degree entropy and their per-year timelines.

Citation reach is exogenous nodes per (parent + descendants +
grandparents)::

    R = (N - C - G - 1) / (C + G + 1)

Shannon entropy ``S`` is taken over the undirected degree distribution in
nats, and ``H = S / ln N`` normalizes it to [0, 1].
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, NamedTuple, Sequence

import numpy as np

from .graph import NodeRole, ParentNetwork, role_counts, snapshot

METRICS_HEADER = ("parent", "year", "N", "C", "G", "X", "R", "S_nats", "H")
FULL = "full"
P_MODES = ("degree", "in_degree")


class ConsistencyError(ValueError):
    """Role counts that cannot come from a valid role partition."""


class UndefinedFitError(ValueError):
    pass


def fmt_num(x) -> str:
    """Fixed 12-significant-digit text, identical across platforms."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    text = f"{float(x):.12g}"
    return "0" if text == "-0" else text


@dataclass(frozen=True)
class EcologyMetrics:
    """Metrics of one snapshot. ``year`` is None for the full network."""

    year: int | None
    N: int
    C: int
    G: int
    X: int
    R: float
    S: float
    H: float

    def as_tuple(self) -> tuple:
        return (self.N, self.C, self.G, self.X, self.R, self.S, self.H)


@dataclass(frozen=True)
class MetricsSeries:
    parent: int
    rows: tuple[EcologyMetrics, ...]

    def __post_init__(self):
        years = [r.year for r in self.rows]
        if any(y is None for y in years):
            raise ValueError("series rows need a year")
        if any(b <= a for a, b in zip(years, years[1:])):
            raise ValueError("series years must be strictly increasing")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def years(self) -> list[int]:
        return [r.year for r in self.rows]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


class EntropyFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float
    n: int


def citation_reach(counts: Sequence[int], exact: bool = False) -> float | Fraction:
    """Citation reach from ``(N, C, G)``; extra trailing items are ignored.

    With ``exact=True`` the result is a :class:`~fractions.Fraction`.
    """
    n, c, g = (int(v) for v in counts[:3])
    if min(n, c, g) < 0:
        raise ConsistencyError(f"negative count in {(n, c, g)}")
    core = c + g + 1
    if n < core:
        raise ConsistencyError(f"N={n} < C+G+1={core}: role partition violated")
    if exact:
        return Fraction(n - core, core)
    return (n - core) / core


def degree_distribution(net: ParentNetwork, mode: str = "degree") -> np.ndarray:
    """Per-node share of edge endpoints, ordered by sorted node id.

    ``mode="in_degree"`` uses each node's share of incoming citations in the
    directed network instead; it needs ``net.arcs``. Zero-edge networks give
    an empty vector.
    """
    if mode not in P_MODES:
        raise ValueError(f"mode must be one of {P_MODES}")
    order = sorted(net.nodes)
    pos = {n: i for i, n in enumerate(order)}
    if mode == "degree":
        if not net.edges:
            return np.empty(0)
        pairs = np.fromiter((pos[n] for e in net.edges for n in e), dtype=np.int64, count=2 * len(net.edges))
    else:
        if net.arcs is None:
            raise ValueError("in_degree mode needs directed arcs on the network")
        if not net.arcs:
            return np.empty(0)
        pairs = np.fromiter((pos[v] for _, v in net.arcs), dtype=np.int64, count=len(net.arcs))
    deg = np.bincount(pairs, minlength=len(order)).astype(float)
    return deg / deg.sum()


def shannon_entropy(p) -> float:
    """``-sum p ln p`` in nats with ``0 ln 0 = 0``; empty input gives 0."""
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0:
        return 0.0
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be finite and non-negative")
    total = math.fsum(p.tolist())
    if abs(total - 1.0) > 1e-12:
        raise ValueError(f"probabilities sum to {total!r}, not 1")
    q = p[p > 0]
    return float(-np.dot(q, np.log(q))) + 0.0


def normalized_entropy(S: float, N: int) -> float:
    """``S / ln N``, defined as 0 for ``N <= 1``."""
    if N <= 1:
        return 0.0
    return min(1.0, S / math.log(N))


def compute_metrics(net: ParentNetwork, year: int | None = None, mode: str = "degree") -> EcologyMetrics:
    n, c, g, x = role_counts(net)
    s = shannon_entropy(degree_distribution(net, mode))
    return EcologyMetrics(year, n, c, g, x, citation_reach((n, c, g)), s, normalized_entropy(s, n))


def metrics_timeline(
    net: ParentNetwork,
    from_year: int | None = None,
    to_year: int | None = None,
    mode: str = "degree",
) -> MetricsSeries:
    """One metrics row per calendar year, each on ``snapshot(net, year)``.

    ``from_year`` defaults to the parent's year and ``to_year`` to the
    latest known year in the network.
    """
    if from_year is None:
        from_year = net.parent_year
    if from_year is None:
        raise ValueError(f"parent {net.parent} has no year; pass explicit years")
    if to_year is None:
        to_year = max([from_year] + [y for y in net.years.values() if y is not None])
    if to_year < from_year:
        raise ValueError(f"to_year {to_year} < from_year {from_year}")
    if mode != "degree":
        rows = [compute_metrics(snapshot(net, y), y, mode) for y in range(from_year, to_year + 1)]
        return MetricsSeries(net.parent, tuple(rows))
    snapshot(net, from_year)  # validates the year range
    return MetricsSeries(net.parent, tuple(_sweep(net, from_year, to_year)))


def appearance_years(net: ParentNetwork) -> dict[int, int]:
    """First year each node belongs to a snapshot (unlisted nodes never do).

    A node enters once it is published and, unless it touches the parent,
    once some neighbour of the parent linking to it is published too.
    """
    p, py, adj, years = net.parent, net.parent_year, net.adjacency, net.years
    app = {p: py}
    for u in adj[p]:
        if years.get(u) is not None:
            app[u] = max(years[u], py)
    ring = adj[p]
    for u in ring:
        au = app.get(u)
        if au is None:
            continue
        for v in adj[u]:
            if v == p or v in ring or years.get(v) is None:
                continue
            cand = max(years[v], au)
            if cand < app.get(v, cand + 1):
                app[v] = cand
    return app


def _sweep(net: ParentNetwork, from_year: int, to_year: int) -> list[EcologyMetrics]:
    """Incremental equivalent of computing metrics on every snapshot."""
    app = appearance_years(net)
    node_at: dict[int, list[int]] = defaultdict(list)
    for n, y in app.items():
        node_at[max(y, from_year)].append(n)
    edge_at: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for u, v in net.edges:
        if u in app and v in app:
            edge_at[max(app[u], app[v], from_year)].append((u, v))

    counts = {role: 0 for role in NodeRole}
    deg: dict[int, int] = defaultdict(int)
    hist: dict[int, int] = defaultdict(int)
    n_edges = 0
    rows = []
    for year in range(from_year, to_year + 1):
        for n in node_at.get(year, ()):
            counts[net.roles[n]] += 1
        for e in edge_at.get(year, ()):
            for n in e:
                d = deg[n]
                if d:
                    hist[d] -= 1
                deg[n] = d + 1
                hist[d + 1] += 1
            n_edges += 1
        c, g, x = counts[NodeRole.DESCENDANT], counts[NodeRole.GRANDPARENT], counts[NodeRole.EXOGENOUS]
        n = c + g + x + counts[NodeRole.PARENT]
        if n_edges:
            total = 2 * n_edges
            dlogd = math.fsum(k * cnt * math.log(k) for k, cnt in hist.items() if k > 1 and cnt)
            s = max(0.0, math.log(total) - dlogd / total)
        else:
            s = 0.0
        rows.append(EcologyMetrics(year, n, c, g, x, citation_reach((n, c, g)), s, normalized_entropy(s, n)))
    return rows


def fit_log_linear(citations, entropies) -> EntropyFit:
    """OLS of ``entropies`` against ``ln(citations)``; counts below 1 are
    dropped. When every entropy is equal, ``r_squared`` is reported as 0."""
    c = np.asarray(citations, dtype=float).ravel()
    y = np.asarray(entropies, dtype=float).ravel()
    if c.shape != y.shape:
        raise ValueError("citations and entropies differ in length")
    keep = c >= 1
    if keep.sum() < 2:
        raise UndefinedFitError("need at least two rows with C >= 1")
    x, y = np.log(c[keep]), y[keep]
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise UndefinedFitError("all rows have the same citation count")
    dy = y - y.mean()
    slope = float(dx @ dy) / sxx
    intercept = float(y.mean() - slope * x.mean())
    ss_tot = float(dy @ dy)
    resid = y - (intercept + slope * x)
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 0.0
    return EntropyFit(slope, intercept, r2, int(keep.sum()))


def entropy_log_citation_fit(series: MetricsSeries | Iterable[EcologyMetrics]) -> EntropyFit:
    """Fit ``S = slope * ln C + intercept`` over the rows with C >= 1."""
    rows = series.rows if isinstance(series, MetricsSeries) else list(series)
    return fit_log_linear([r.C for r in rows], [r.S for r in rows])


# --- csv interface -----------------------------------------------------------


def metrics_row(parent: int, m: EcologyMetrics) -> list[str]:
    year = FULL if m.year is None else str(m.year)
    return [str(parent), year] + [fmt_num(v) for v in (m.N, m.C, m.G, m.X, m.R, m.S, m.H)]


def write_metrics_csv(out: IO[str], series: Iterable[MetricsSeries]) -> int:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(METRICS_HEADER)
    n = 0
    for s in sorted(series, key=lambda s: s.parent):
        for m in s.rows:
            w.writerow(metrics_row(s.parent, m))
            n += 1
    return n


def read_metrics_csv(stream: IO[str]) -> list[MetricsSeries]:
    """Parse a metrics CSV back into per-parent series (year rows only)."""
    reader = csv.DictReader(io.StringIO(stream.read()))
    if tuple(reader.fieldnames or ()) != METRICS_HEADER:
        raise ValueError(f"metrics CSV header must be {','.join(METRICS_HEADER)}")
    by_parent: dict[int, list[EcologyMetrics]] = {}
    for row in reader:
        if row["year"] == FULL:
            continue
        m = EcologyMetrics(
            int(row["year"]),
            int(row["N"]),
            int(row["C"]),
            int(row["G"]),
            int(row["X"]),
            float(row["R"]),
            float(row["S_nats"]),
            float(row["H"]),
        )
        by_parent.setdefault(int(row["parent"]), []).append(m)
    return [MetricsSeries(p, tuple(sorted(rows, key=lambda m: m.year))) for p, rows in sorted(by_parent.items())]
