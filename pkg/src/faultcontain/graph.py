"""Undirected simple graphs, deterministic generators and independent degree.

A :class:`Graph` is immutable: node ids are ``0..n-1`` and each adjacency
list is sorted.  Generators are pure functions of their :class:`GraphSpec`
(seeded families carry the seed inside the GraphSpec).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .errors import CapacityError, ContractError, ParameterError

#: Default cap on |N(v)| for the exact independent-set search.
NEIGHBORHOOD_CAP = 30

FAMILIES = ("star", "path", "complete", "gnp", "unit_disc", "hub_over_h", "staircase")


@dataclass(frozen=True)
class Graph:
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.adjacency)
        for v, nbrs in enumerate(self.adjacency):
            if list(nbrs) != sorted(set(nbrs)):
                raise ContractError(f"adjacency of node {v} is not sorted/unique")
            for w in nbrs:
                if not 0 <= w < n:
                    raise ContractError(f"node {v} has out-of-range neighbor {w}")
                if w == v:
                    raise ContractError(f"self-loop at node {v}")
                if v not in self.adjacency[w]:
                    raise ContractError(f"edge {v}-{w} is not symmetric")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ContractError(f"self-loop at node {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ContractError(f"edge {u}-{v} outside 0..{n - 1}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(tuple(tuple(sorted(s)) for s in nbrs))

    @property
    def n(self) -> int:
        return len(self.adjacency)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    @cached_property
    def max_degree(self) -> int:
        return max(self.degrees, default=0)

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._neighbor_sets[u]

    @cached_property
    def _neighbor_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in self.adjacency[u] if u < v]

    def distances_from(self, source: int) -> list[int]:
        """BFS hop distances; unreachable nodes get -1."""
        dist = [-1] * self.n
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for w in self.adjacency[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist

    def induced(self, nodes: Sequence[int]) -> "Graph":
        """Subgraph induced by ``nodes``, relabelled in the given order."""
        index = {v: i for i, v in enumerate(nodes)}
        return Graph(tuple(
            tuple(sorted(index[w] for w in self.adjacency[v] if w in index))
            for v in nodes
        ))

    def ball(self, v: int, radius: int) -> list[int]:
        """Nodes within ``radius`` hops of ``v`` (the node set of G_v^r)."""
        return [u for u, d in enumerate(self.distances_from(v)) if 0 <= d <= radius]

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(self.degrees)
        indices = np.fromiter(
            (w for a in self.adjacency for w in a), dtype=np.int64, count=int(indptr[-1])
        )
        return indptr, indices


@dataclass(frozen=True)
class GraphSpec:
    family: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        params = dict(self.params)
        if isinstance(params.get("h"), GraphSpec):
            params["h"] = params["h"].to_dict()
        return {"family": self.family, **params}


def _int_param(params, name, minimum=0):
    if name not in params:
        raise ParameterError(name, "missing")
    value = params[name]
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ParameterError(name, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ParameterError(name, f"must be >= {minimum}, got {value}")
    return int(value)


def _float_param(params, name):
    if name not in params:
        raise ParameterError(name, "missing")
    try:
        value = float(params[name])
    except (TypeError, ValueError):
        raise ParameterError(name, f"expected a number, got {params[name]!r}") from None
    if not math.isfinite(value):
        raise ParameterError(name, "must be finite")
    return value


def star(d: int) -> Graph:
    return Graph.from_edges(d + 1, [(0, i) for i in range(1, d + 1)])


def path(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete(n: int) -> Graph:
    return Graph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def gnp(n: int, p: float, seed: int) -> Graph:
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist()))


def unit_disc(n: int, radius: float, seed: int) -> tuple[Graph, np.ndarray]:
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
    iu, ju = np.triu_indices(n, k=1)
    keep = d2[iu, ju] <= radius * radius
    return Graph.from_edges(n, zip(iu[keep].tolist(), ju[keep].tolist())), pts


def hub_over(h: Graph) -> Graph:
    """Node 0 joined to every node of ``h`` (shifted to ids 1..|h|)."""
    edges = [(0, v + 1) for v in range(h.n)]
    edges += [(u + 1, v + 1) for u, v in h.edges()]
    return Graph.from_edges(h.n + 1, edges)


def staircase(delta: int) -> Graph:
    """Backbone path p_0..p_delta where p_i (i >= 2) owns a private clique.

    The private clique of p_i has i-1 members and, together with p_i, forms
    K_i.  Max degree is ``delta``; p_delta sits ``delta`` hops from p_0.
    Node ids: backbone first (0..delta), then the cliques in order.
    """
    edges = [(i, i + 1) for i in range(delta)]
    nxt = delta + 1
    for i in range(2, delta + 1):
        members = list(range(nxt, nxt + i - 1))
        nxt += i - 1
        clique = [i] + members
        edges += [(a, b) for k, a in enumerate(clique) for b in clique[k + 1:]]
    return Graph.from_edges(nxt, edges)


def generate(spec: GraphSpec) -> Graph:
    """Build the graph described by ``spec``.

    Raises :class:`ParameterError` naming the offending field.
    """
    p = spec.params
    fam = spec.family
    if fam == "star":
        return star(_int_param(p, "d", 0))
    if fam == "path":
        return path(_int_param(p, "n", 1))
    if fam == "complete":
        return complete(_int_param(p, "n", 1))
    if fam == "gnp":
        n = _int_param(p, "n", 1)
        prob = _float_param(p, "p")
        if not 0.0 <= prob <= 1.0:
            raise ParameterError("p", f"must lie in [0, 1], got {prob}")
        return gnp(n, prob, _int_param(p, "seed", 0))
    if fam == "unit_disc":
        n = _int_param(p, "n", 1)
        r = _float_param(p, "radius")
        if r <= 0:
            raise ParameterError("radius", f"must be > 0, got {r}")
        return unit_disc(n, r, _int_param(p, "seed", 0))[0]
    if fam == "hub_over_h":
        if "h" not in p:
            raise ParameterError("h", "missing embedded graph")
        h = p["h"]
        if isinstance(h, Mapping):
            h = GraphSpec(h["family"], {k: v for k, v in h.items() if k != "family"})
        if isinstance(h, GraphSpec):
            h = generate(h)
        if not isinstance(h, Graph):
            raise ParameterError("h", f"expected a Graph or GraphSpec, got {type(h).__name__}")
        return hub_over(h)
    if fam == "staircase":
        return staircase(_int_param(p, "delta", 2))
    raise ParameterError("family", f"unknown graph family {fam!r}; expected one of {FAMILIES}")


def _max_independent_set_size(masks: Sequence[int], cand: int) -> int:
    best = 0

    def expand(cand: int, size: int) -> None:
        nonlocal best
        if size + cand.bit_count() <= best:
            return
        if not cand:
            best = size
            return
        # a vertex of degree <= 1 inside cand belongs to some maximum set
        low, low_deg, high, high_deg = -1, 1 << 30, -1, -1
        rest = cand
        while rest:
            b = rest & -rest
            u = b.bit_length() - 1
            rest ^= b
            deg = (masks[u] & cand).bit_count()
            if deg < low_deg:
                low, low_deg = u, deg
            if deg > high_deg:
                high, high_deg = u, deg
        if low_deg <= 1:
            expand(cand & ~(masks[low] | (1 << low)), size + 1)
            return
        expand(cand & ~(masks[high] | (1 << high)), size + 1)
        expand(cand & ~(1 << high), size)

    expand(cand, 0)
    return best


def independent_degree(g: Graph, v: int, cap: int = NEIGHBORHOOD_CAP) -> int:
    """Size of a maximum independent set of the subgraph induced by N(v).

    Exact branch and bound over bitmasks; raises :class:`CapacityError` when
    ``|N(v)| > cap``.
    """
    if not 0 <= v < g.n:
        raise ContractError(f"node {v} not in graph")
    nbrs = g.neighbors(v)
    if len(nbrs) > cap:
        raise CapacityError(f"|N({v})| = {len(nbrs)} exceeds cap {cap}")
    index = {w: i for i, w in enumerate(nbrs)}
    masks = []
    for w in nbrs:
        m = 0
        for x in g.neighbors(w):
            i = index.get(x)
            if i is not None:
                m |= 1 << i
        masks.append(m)
    return _max_independent_set_size(masks, (1 << len(nbrs)) - 1)


def max_independent_degree(g: Graph, cap: int = NEIGHBORHOOD_CAP) -> int:
    return max((independent_degree(g, v, cap) for v in range(g.n)), default=0)


def write_edge_list(g: Graph, path_: str | Path) -> None:
    lines = ["# format=1", f"n={g.n}"] + [f"{u} {v}" for u, v in g.edges()]
    Path(path_).write_text("\n".join(lines) + "\n", newline="\n")


def read_edge_list(path_: str | Path) -> Graph:
    n = None
    edges = []
    for raw in Path(path_).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("format=") and body != "format=1":
                raise ContractError(f"unsupported edge-list {body}")
            continue
        if line.startswith("n="):
            n = int(line[2:])
            continue
        u, v = line.split()
        edges.append((int(u), int(v)))
    if n is None:
        raise ContractError("edge list lacks an 'n=<count>' header")
    return Graph.from_edges(n, edges)
