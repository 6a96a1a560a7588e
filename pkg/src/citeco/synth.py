"""Synthetic parent networks.

``prototype_network`` returns the four small ideal-type networks A-D.
``grow_network`` grows a parent network one descendant per step with a
tunable share of references to brand-new (exogenous) papers, and
``oracle_metrics`` recomputes every metric by plain enumeration so the
metrics module can be checked against an independent path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple

import numpy as np

from .graph import NodeRole, ParentNetwork, undirected
from .metrics import EcologyMetrics

VARIANTS = ("A", "B", "C", "D")
ATTACHMENTS = ("uniform", "preferential")

PROTOTYPE_PARENT_YEAR = 1990


def _network(parent: int, roles: dict, years: dict, arcs: set) -> ParentNetwork:
    return ParentNetwork(parent, frozenset(roles), undirected(arcs), dict(roles), dict(years), frozenset(arcs))


def prototype_network(variant: str) -> ParentNetwork:
    """Ideal-type networks.

    A: parent 0, grandparents 1-3, descendants 4-6 citing only the parent.
    B: A plus descendant 7 citing the parent and new exogenous papers 8-18.
    C: B plus descendant 19 citing the parent and all of 8-18.
    D: B plus descendant 19 citing the parent and new exogenous papers 20-30.

    Descendants appear in 1991 (A), 1992 (B) and 1993 (C/D); exogenous
    papers carry earlier years than the descendant that cites them.
    """
    variant = variant.upper()
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    P, D, G, X = NodeRole.PARENT, NodeRole.DESCENDANT, NodeRole.GRANDPARENT, NodeRole.EXOGENOUS
    roles = {0: P}
    years = {0: PROTOTYPE_PARENT_YEAR}
    arcs = set()
    for g in (1, 2, 3):
        roles[g], years[g] = G, 1985
        arcs.add((0, g))
    for d in (4, 5, 6):
        roles[d], years[d] = D, 1991
        arcs.add((d, 0))
    if variant == "A":
        return _network(0, roles, years, arcs)

    roles[7], years[7] = D, 1992
    arcs.add((7, 0))
    for x in range(8, 19):
        roles[x], years[x] = X, 1988
        arcs.add((7, x))
    if variant == "B":
        return _network(0, roles, years, arcs)

    roles[19], years[19] = D, 1993
    arcs.add((19, 0))
    if variant == "C":
        arcs.update((19, x) for x in range(8, 19))
    else:
        for x in range(20, 31):
            roles[x], years[x] = X, 1989
            arcs.add((19, x))
    return _network(0, roles, years, arcs)


@dataclass(frozen=True)
class GrowthParams:
    """Parameters of :func:`grow_network`.

    Each step adds one descendant citing the parent plus
    ``refs_per_descendant`` references; each reference is a new exogenous
    paper with probability ``exo_ratio``, otherwise an existing non-parent
    node. ``burst_schedule`` pairs ``(step, count)`` force ``count`` extra
    exogenous papers through that step's descendant.
    """

    n_grandparents: int = 3
    steps: int = 0
    refs_per_descendant: int = 0
    exo_ratio: float = 0.0
    burst_schedule: tuple[tuple[int, int], ...] = ()
    years_per_step: Mapping[int, int] | None = None
    start_year: int = PROTOTYPE_PARENT_YEAR
    seed: int = 0
    attachment: str = "uniform"

    def __post_init__(self):
        if not 0.0 <= self.exo_ratio <= 1.0:
            raise ValueError(f"exo_ratio {self.exo_ratio} outside [0, 1]")
        for name in ("n_grandparents", "steps", "refs_per_descendant"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for step, count in self.burst_schedule:
            if not 1 <= step <= self.steps:
                raise ValueError(f"burst step {step} outside [1, {self.steps}]")
            if count < 0:
                raise ValueError("burst size must be >= 0")
        if self.attachment not in ATTACHMENTS:
            raise ValueError(f"attachment must be one of {ATTACHMENTS}")

    def year_of(self, step: int) -> int:
        if self.years_per_step and step in self.years_per_step:
            return int(self.years_per_step[step])
        return self.start_year + step


class GrowthStep(NamedTuple):
    step: int
    year: int
    new_nodes: int
    endo_refs: int
    exo_refs: int
    burst: bool


@dataclass(frozen=True)
class GrowthLog:
    steps: tuple[GrowthStep, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.steps)

    def burst_years(self) -> list[int]:
        return [s.year for s in self.steps if s.burst]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(s._asdict()) + "\n" for s in self.steps)


def grow_network(params: GrowthParams, start: ParentNetwork | None = None) -> tuple[ParentNetwork, GrowthLog]:
    """Grow a parent network; deterministic for a fixed ``params.seed``.

    Without ``start`` the network begins as parent 0 (year
    ``start_year``) plus ``n_grandparents`` references. A ``start`` network
    must carry directed arcs.
    """
    rng = np.random.default_rng(params.seed)
    if start is None:
        parent = 0
        roles = {0: NodeRole.PARENT}
        years = {0: params.start_year}
        arcs = set()
        for g in range(1, params.n_grandparents + 1):
            roles[g] = NodeRole.GRANDPARENT
            years[g] = params.start_year - 1
            arcs.add((0, g))
    else:
        if start.arcs is None:
            raise ValueError("start network needs directed arcs")
        parent = start.parent
        roles, years, arcs = dict(start.roles), dict(start.years), set(start.arcs)

    pool = sorted(n for n in roles if n != parent)
    # preferential mode draws from a multiset: each node once, plus once per incident arc
    attach = list(pool)
    if params.attachment == "preferential":
        attach += [n for a in sorted(arcs) for n in a if n != parent]
    next_id = max(roles) + 1
    bursts = dict(params.burst_schedule)
    log = []

    for step in range(1, params.steps + 1):
        year = params.year_of(step)
        d = next_id
        next_id += 1
        roles[d], years[d] = NodeRole.DESCENDANT, year
        arcs.add((d, parent))
        candidates = attach if params.attachment == "preferential" else pool
        n_existing = len(candidates)
        new_exo, targets = [], set()
        for _ in range(params.refs_per_descendant):
            if rng.random() < params.exo_ratio:
                new_exo.append(next_id)
                next_id += 1
            elif n_existing:
                targets.add(candidates[int(rng.integers(n_existing))])
        for _ in range(bursts.get(step, 0)):
            new_exo.append(next_id)
            next_id += 1
        for x in new_exo:
            roles[x], years[x] = NodeRole.EXOGENOUS, year
            arcs.add((d, x))
        arcs.update((d, t) for t in targets)

        pool.append(d)
        pool.extend(new_exo)
        if params.attachment == "preferential":
            attach.append(d)
            attach.extend(new_exo)
            for t in list(targets) + new_exo:
                attach.extend((d, t))
        log.append(GrowthStep(step, year, 1 + len(new_exo), len(targets), len(new_exo), step in bursts))

    return _network(parent, roles, years, arcs), GrowthLog(tuple(log))


def random_network(seed: int, max_nodes: int = 50) -> ParentNetwork:
    """A small grown network with seed-drawn parameters and at most
    ``max_nodes`` nodes."""
    rng = np.random.default_rng(seed)
    while True:
        params = GrowthParams(
            n_grandparents=int(rng.integers(0, 6)),
            steps=int(rng.integers(0, 12)),
            refs_per_descendant=int(rng.integers(0, 5)),
            exo_ratio=float(rng.random()),
            seed=int(rng.integers(2**31)),
            attachment=ATTACHMENTS[int(rng.integers(2))],
        )
        net, _ = grow_network(params)
        if len(net.nodes) <= max_nodes:
            return net


def oracle_metrics(net: ParentNetwork) -> EcologyMetrics:
    """Recompute (N, C, G, X, R, S, H) by enumeration over the raw edge list.

    Shares no code with the metrics module: degrees are tallied edge by
    edge, R is formed as an exact fraction and S by a plain loop.
    """
    nodes = list(net.nodes)
    n = len(nodes)
    c = g = x = 0
    for node in nodes:
        role = net.roles[node].value
        if role == "descendant":
            c += 1
        elif role == "grandparent":
            g += 1
        elif role == "exogenous":
            x += 1
    reach = Fraction(n - c - g - 1, c + g + 1)

    degree = {node: 0 for node in nodes}
    for u, v in net.edges:
        degree[u] += 1
        degree[v] += 1
    total = 0
    for node in nodes:
        total += degree[node]
    s = 0.0
    for node in nodes:
        if degree[node]:
            p = degree[node] / total
            s -= p * math.log(p)
    h = s / math.log(n) if n > 1 else 0.0
    return EcologyMetrics(None, n, c, g, x, float(reach), s, h)


def relabel(net: ParentNetwork, offset: int) -> ParentNetwork:
    """Shift every node id by ``offset``."""
    roles = {n + offset: r for n, r in net.roles.items()}
    years = {n + offset: y for n, y in net.years.items()}
    arcs = None if net.arcs is None else frozenset((u + offset, v + offset) for u, v in net.arcs)
    edges = frozenset((u + offset, v + offset) for u, v in net.edges)
    return ParentNetwork(net.parent + offset, frozenset(roles), edges, roles, years, arcs)
