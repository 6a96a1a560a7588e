"""Two-hop parent-centric citation networks.

A parent network is collected in three passes over the directed citation
store: the parent's references (grandparents), the papers citing the parent
(descendants), then every descendant's references. All directed edges among
the collected nodes are kept and analysed as undirected pairs.
"""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .ingest import CanonicalRecord

logger = logging.getLogger(__name__)


class UnknownParentError(KeyError):
    pass


class SnapshotError(ValueError):
    pass


class NodeRole(str, enum.Enum):
    PARENT = "parent"
    GRANDPARENT = "grandparent"
    DESCENDANT = "descendant"
    EXOGENOUS = "exogenous"


class RoleCounts(NamedTuple):
    N: int
    C: int
    G: int
    X: int


class CitationIndex:
    """Directed citation store with forward (references) and reverse
    (citations) adjacency.

    Both directions are kept as compressed sparse rows in numpy arrays, so
    a large index costs two int64 arrays per direction and can be shared
    with forked worker processes without being copied page by page.
    Self-citations and repeated pairs are dropped.
    """

    def __init__(self, edges: Iterable[tuple[int, int]] = ()):
        arr = np.array(edges if isinstance(edges, (list, tuple)) else list(edges), dtype=np.int64).reshape(-1, 2)
        arr = arr[arr[:, 0] != arr[:, 1]]
        if len(arr):
            arr = np.unique(arr, axis=0)
        self.ids = np.unique(arr)
        src = np.searchsorted(self.ids, arr[:, 0])
        dst = np.searchsorted(self.ids, arr[:, 1])
        self._refs = _csr(src, arr[:, 1], len(self.ids))
        order = np.lexsort((arr[:, 0], dst))
        self._citers = _csr(dst[order], arr[order, 0], len(self.ids))

    def _positions(self, nodes) -> np.ndarray:
        """Row numbers of the ``nodes`` present in the index."""
        nodes = np.asarray(nodes, dtype=np.int64).ravel()
        if not len(self.ids):
            return np.empty(0, np.int64)
        pos = np.searchsorted(self.ids, nodes).clip(max=len(self.ids) - 1)
        return pos[self.ids[pos] == nodes]

    def _row(self, csr, node: int) -> np.ndarray:
        pos = self._positions([node])
        if not len(pos):
            return pos
        indptr, indices = csr
        return indices[indptr[pos[0]] : indptr[pos[0] + 1]]

    def references(self, node: int) -> set[int]:
        return set(self._row(self._refs, node).tolist())

    def citations(self, node: int) -> set[int]:
        return set(self._row(self._citers, node).tolist())

    def citation_count(self, node: int) -> int:
        return len(self._row(self._citers, node))

    def gather_references(self, nodes) -> tuple[np.ndarray, np.ndarray]:
        """Every ``(citing, cited)`` arc leaving ``nodes``, as two arrays."""
        nodes = np.asarray(nodes, dtype=np.int64).ravel()
        pos = self._positions(nodes)
        indptr, indices = self._refs
        starts, stops = indptr[pos], indptr[pos + 1]
        counts = stops - starts
        if not counts.sum():
            return np.empty(0, np.int64), np.empty(0, np.int64)
        # flat index of each arc: its row start plus its offset within the row
        offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        return np.repeat(self.ids[pos], counts), indices[np.repeat(starts, counts) + offsets]

    def __len__(self) -> int:
        return len(self._refs[1])


def _csr(rows: np.ndarray, cols: np.ndarray, n_rows: int) -> tuple[np.ndarray, np.ndarray]:
    """``rows`` must already be sorted."""
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n_rows), out=indptr[1:])
    return indptr, np.ascontiguousarray(cols)


@dataclass(frozen=True)
class ParentNetwork:
    """Undirected two-hop network around ``parent``.

    ``edges`` holds sorted ``(u, v)`` pairs with ``u < v``. ``arcs`` keeps
    the directed ``(citing, cited)`` pairs when they are known.
    """

    parent: int
    nodes: frozenset
    edges: frozenset
    roles: Mapping[int, NodeRole]
    years: Mapping[int, int | None]
    arcs: frozenset | None = None

    def __post_init__(self):
        if self.parent not in self.nodes:
            raise ValueError("parent must be a node")
        if self.roles.get(self.parent) is not NodeRole.PARENT:
            raise ValueError("parent must carry the PARENT role")

    @cached_property
    def adjacency(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {n: set() for n in self.nodes}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    @property
    def parent_year(self) -> int | None:
        return self.years.get(self.parent)

    def __len__(self) -> int:
        return len(self.nodes)

    def to_dict(self) -> dict:
        out = {
            "parent": self.parent,
            "nodes": [
                {"id": n, "role": self.roles[n].value, "year": self.years.get(n)}
                for n in sorted(self.nodes)
            ],
            "edges": [list(e) for e in sorted(self.edges)],
        }
        if self.arcs is not None:
            out["arcs"] = [list(a) for a in sorted(self.arcs)]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping) -> "ParentNetwork":
        roles = {int(n["id"]): NodeRole(n["role"]) for n in data["nodes"]}
        years = {int(n["id"]): n.get("year") for n in data["nodes"]}
        edges = set()
        for u, v in data["edges"]:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if u not in roles or v not in roles:
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside the node list")
            edges.add((u, v) if u < v else (v, u))
        arcs = None
        if "arcs" in data:
            arcs = frozenset((int(u), int(v)) for u, v in data["arcs"])
            if undirected(arcs) != edges:
                raise ValueError("arcs do not match the undirected edge list")
        return cls(int(data["parent"]), frozenset(roles), frozenset(edges), roles, years, arcs)

    @classmethod
    def from_json(cls, text: str) -> "ParentNetwork":
        return cls.from_dict(json.loads(text))


def _as_year_map(records) -> Mapping[int, int | None]:
    if isinstance(records, Mapping):
        return records
    return {r.blind_id: r.year for r in records if isinstance(r, CanonicalRecord)}


def _as_index(edges) -> CitationIndex:
    return edges if isinstance(edges, CitationIndex) else CitationIndex(edges)


def undirected(arcs: Iterable[tuple[int, int]]) -> frozenset:
    return frozenset((u, v) if u < v else (v, u) for u, v in arcs)


def classify_roles(net: ParentNetwork, edges) -> dict[int, NodeRole]:
    """Assign roles using the directed store.

    Precedence is Descendant > Grandparent > Exogenous, so a paper that both
    cites and is cited by the parent counts once, as a descendant.
    """
    index = _as_index(edges)
    p = net.parent
    desc = index.citations(p)
    grand = index.references(p)
    roles = {}
    for n in net.nodes:
        if n == p:
            roles[n] = NodeRole.PARENT
        elif n in desc:
            roles[n] = NodeRole.DESCENDANT
        elif n in grand:
            roles[n] = NodeRole.GRANDPARENT
        else:
            roles[n] = NodeRole.EXOGENOUS
    return roles


def build_parent_network(parent: int, records, edges) -> ParentNetwork:
    """Collect the two-hop network of ``parent``.

    ``records`` maps blind_id to year (or is an iterable of
    :class:`CanonicalRecord`); ``edges`` is a :class:`CitationIndex` or an
    iterable of ``(citing, cited)`` pairs.
    """
    years_all = _as_year_map(records)
    if parent not in years_all:
        raise UnknownParentError(parent)
    index = _as_index(edges)

    grand = index.references(parent)
    desc = index.citations(parent)
    _, second = index.gather_references(sorted(desc))
    nodes = {parent} | grand | desc | set(second.tolist())

    node_arr = np.fromiter(nodes, dtype=np.int64, count=len(nodes))
    src, dst = index.gather_references(node_arr)
    inside = np.isin(dst, node_arr)
    arcs = set(zip(src[inside].tolist(), dst[inside].tolist()))

    if len(nodes) == 1:
        logger.warning("parent %s has no references and no citations", parent)

    roles = {n: NodeRole.EXOGENOUS for n in nodes}
    for n in grand:
        roles[n] = NodeRole.GRANDPARENT
    for n in desc:
        roles[n] = NodeRole.DESCENDANT
    roles[parent] = NodeRole.PARENT
    years = {n: years_all.get(n) for n in nodes}
    return ParentNetwork(parent, frozenset(nodes), undirected(arcs), roles, years, frozenset(arcs))


def induced(net: ParentNetwork, keep) -> ParentNetwork:
    keep = frozenset(keep)
    if keep == net.nodes:
        return net
    edges = frozenset(e for e in net.edges if e[0] in keep and e[1] in keep)
    arcs = None
    if net.arcs is not None:
        arcs = frozenset(a for a in net.arcs if a[0] in keep and a[1] in keep)
    return ParentNetwork(
        net.parent,
        keep,
        edges,
        {n: net.roles[n] for n in keep},
        {n: net.years.get(n) for n in keep},
        arcs,
    )


def within_two_hops(net: ParentNetwork, allowed=None) -> set[int]:
    """Nodes reachable from the parent in at most two undirected steps,
    optionally walking only through ``allowed`` nodes."""
    adj = net.adjacency
    p = net.parent
    ok = (lambda n: True) if allowed is None else allowed.__contains__
    first = {v for v in adj[p] if ok(v)}
    reach = {p} | first
    for u in first:
        reach.update(v for v in adj[u] if ok(v))
    return reach


def snapshot(net: ParentNetwork, year: int) -> ParentNetwork:
    """The network as it stood at the end of ``year``.

    Keeps nodes with a known year ``<= year`` (the parent always), then
    drops nodes no longer within two hops of the parent, e.g. an old paper
    whose only citing descendant has not appeared yet.
    """
    py = net.parent_year
    if py is None:
        raise SnapshotError(f"parent {net.parent} has no publication year")
    if year < py:
        raise SnapshotError(f"snapshot year {year} precedes parent year {py}")
    years = net.years
    keep = {n for n in net.nodes if (y := years.get(n)) is not None and y <= year}
    keep.add(net.parent)
    if len(keep) == len(net.nodes):
        return net
    return induced(net, within_two_hops(net, keep))


def role_counts(net: ParentNetwork) -> RoleCounts:
    c = g = x = 0
    for role in net.roles.values():
        if role is NodeRole.DESCENDANT:
            c += 1
        elif role is NodeRole.GRANDPARENT:
            g += 1
        elif role is NodeRole.EXOGENOUS:
            x += 1
    return RoleCounts(len(net.nodes), c, g, x)
