"""Minimum spanning trees, threshold networks and their topology metrics."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .dependence import DistanceMatrix, similarity_from_distance, upper_triangle
from .errors import ValidationError


def _check_distance(d: DistanceMatrix):
    v = np.asarray(d.values, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise ValidationError(f"distance matrix must be square, got {v.shape}")
    if v.shape[0] != len(d.tickers):
        raise ValidationError("distance matrix and ticker list disagree in size")
    if not np.isfinite(v).all():
        raise ValidationError("distance matrix contains non-finite entries")
    if not np.array_equal(v, v.T):
        raise ValidationError("distance matrix must be symmetric")
    return v


def _adjacency(n, edges):
    adj = [[] for _ in range(n)]
    for u, v, *_ in edges:
        adj[u].append(v)
        adj[v].append(u)
    return [sorted(a) for a in adj]


def bfs_levels(adj, root):
    """Hop distance from ``root``; -1 for unreachable nodes."""
    level = [-1] * len(adj)
    level[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(v)
    return level


@dataclass(frozen=True)
class Tree:
    """Spanning tree; ``edges`` are ``(u, v, distance)`` with node indices u < v."""

    tickers: tuple
    edges: tuple
    metric: str = "mi-distance"

    @property
    def n(self):
        return len(self.tickers)

    def adjacency(self):
        return _adjacency(self.n, self.edges)

    def degrees(self):
        deg = np.zeros(self.n, dtype=int)
        for u, v, _ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def total_weight(self):
        return float(sum(w for *_, w in self.edges))

    def levels(self, center=None):
        if center is None:
            center = central_vertex(self)
        return np.array(bfs_levels(self.adjacency(), center))

    def edge_rows(self):
        for u, v, d in self.edges:
            w = float(similarity_from_distance(d, self.metric))
            yield self.tickers[u], self.tickers[v], d, w


@dataclass(frozen=True)
class Graph:
    """Threshold network; ``edges`` are ``(u, v, distance, weight)`` with u < v.

    ``weights`` holds the max-normalized similarity weights as a dense matrix
    (zero where there is no edge).
    """

    tickers: tuple
    edges: tuple
    weights: np.ndarray
    threshold: float
    metric: str = "mi-distance"

    @property
    def n(self):
        return len(self.tickers)

    def adjacency(self):
        return _adjacency(self.n, self.edges)

    def degrees(self):
        deg = np.zeros(self.n, dtype=int)
        for u, v, *_ in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def edge_rows(self):
        for u, v, d, _ in self.edges:
            yield self.tickers[u], self.tickers[v], d, float(self.weights[u, v])


def build_mst(d: DistanceMatrix) -> Tree:
    """Prim's algorithm, O(N^2).

    Growth starts at the lexicographically smallest ticker.  Among
    equal-weight crossing edges the one with the smallest sorted ticker pair
    wins, so the tree is fully determined by the matrix and the labels.
    """
    v = _check_distance(d)
    n = v.shape[0]
    if n < 2:
        raise ValidationError("MST needs at least 2 nodes")
    rank = np.empty(n, dtype=int)
    rank[np.argsort(np.array(d.tickers, dtype=object), kind="stable")] = np.arange(n)

    in_tree = np.zeros(n, dtype=bool)
    root = int(np.argmin(rank))
    in_tree[root] = True
    best = v[root].copy()
    src = np.full(n, root)
    edges = []
    for _ in range(n - 1):
        cand = np.flatnonzero(~in_tree)
        lo = np.minimum(rank[cand], rank[src[cand]])
        hi = np.maximum(rank[cand], rank[src[cand]])
        pick = np.lexsort((hi, lo, best[cand]))[0]
        u = int(cand[pick])
        s = int(src[u])
        edges.append((min(s, u), max(s, u), float(v[s, u])))
        in_tree[u] = True
        # relax: strictly better distance, or equal distance with a smaller ticker pair
        rest = np.flatnonzero(~in_tree)
        if rest.size:
            new = v[u, rest]
            new_key = (np.minimum(rank[rest], rank[u]), np.maximum(rank[rest], rank[u]))
            old_key = (np.minimum(rank[rest], rank[src[rest]]), np.maximum(rank[rest], rank[src[rest]]))
            tie_better = (new_key[0] < old_key[0]) | ((new_key[0] == old_key[0]) & (new_key[1] < old_key[1]))
            better = (new < best[rest]) | ((new == best[rest]) & tie_better)
            best[rest[better]] = new[better]
            src[rest[better]] = u
    return Tree(tuple(d.tickers), tuple(edges), d.metric)


def build_threshold_graph(d: DistanceMatrix, q=0.2) -> Graph:
    """Keep every pair whose distance is at or below the q-quantile of off-diagonal distances."""
    if not 0.0 < q < 1.0:
        raise ValidationError(f"threshold quantile must lie in (0, 1), got {q}")
    v = _check_distance(d)
    n = v.shape[0]
    thr = float(np.quantile(upper_triangle(v), q))
    iu, ju = np.triu_indices(n, k=1)
    keep = v[iu, ju] <= thr
    sim = similarity_from_distance(v, d.metric)
    if d.metric == "corr-distance":
        sim = np.maximum(sim, 0.0)
    raw = sim[iu[keep], ju[keep]]
    top = raw.max() if raw.size else 0.0
    norm = raw / top if top > 0 else np.zeros_like(raw)
    W = np.zeros((n, n))
    W[iu[keep], ju[keep]] = norm
    W[ju[keep], iu[keep]] = norm
    edges = tuple(
        (int(a), int(b), float(v[a, b]), float(w))
        for a, b, w in zip(iu[keep], ju[keep], raw)
    )
    W.setflags(write=False)
    return Graph(tuple(d.tickers), edges, W, thr, d.metric)


def normalized_tree_length(tree: Tree) -> float:
    return tree.total_weight() / (tree.n - 1)


def central_vertex(tree) -> int:
    """Highest degree; ties by smaller total hop distance, then by ticker."""
    deg = tree.degrees()
    cands = np.flatnonzero(deg == deg.max())
    if cands.size == 1:
        return int(cands[0])
    adj = tree.adjacency()
    return int(min(cands, key=lambda c: (sum(bfs_levels(adj, int(c))), tree.tickers[c])))


def mean_occupation_layer(tree: Tree, center=None) -> float:
    return float(tree.levels(center).mean())


def degree_centrality(g) -> np.ndarray:
    """Incident-edge count divided by N."""
    return g.degrees() / g.n


def clustering_coefficient(g: Graph) -> np.ndarray:
    """Weighted clustering: sum over ordered neighbor pairs of the geometric-mean
    triangle weight, divided by k(k-1) with k the raw degree."""
    c = np.cbrt(np.asarray(g.weights, dtype=float))
    tri = np.einsum("ij,jk,ki->i", c, c, c)
    k = g.degrees().astype(float)
    out = np.zeros(g.n)
    ok = k > 1
    out[ok] = tri[ok] / (k[ok] * (k[ok] - 1.0))
    return out


def tree_betweenness(tree: Tree, normalized=True) -> np.ndarray:
    """Node betweenness on a tree: pairs of other nodes whose unique path crosses v.

    Component sizes after removing v come from one BFS rooted at node 0.
    """
    n = tree.n
    adj = tree.adjacency()
    parent = [-1] * n
    order = []
    seen = [False] * n
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        order.append(u)
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                parent[w] = u
                queue.append(w)
    size = [1] * n
    for u in reversed(order):
        if parent[u] >= 0:
            size[parent[u]] += size[u]
    out = np.zeros(n)
    for u in range(n):
        comps = [size[w] for w in adj[u] if w != parent[u]]
        if parent[u] >= 0:
            comps.append(n - size[u])
        out[u] = ((n - 1) ** 2 - sum(s * s for s in comps)) / 2.0
    if normalized and n > 2:
        out /= (n - 1) * (n - 2) / 2.0
    return out


@dataclass(frozen=True)
class NetworkMetrics:
    """Per-window summary of the MST and threshold graph built on one distance matrix."""

    window_index: int | None
    tree_length: float
    occupation_layer: float
    center: str
    degree: np.ndarray  # MST degree centrality
    betweenness: np.ndarray  # MST node betweenness (normalized)
    clustering: np.ndarray  # threshold-graph clustering
    threshold_degree: np.ndarray  # threshold-graph degree centrality
    tree: Tree
    graph: Graph


def network_metrics(d: DistanceMatrix, q=0.2) -> NetworkMetrics:
    tree = build_mst(d)
    graph = build_threshold_graph(d, q)
    c = central_vertex(tree)
    return NetworkMetrics(
        window_index=d.window_index,
        tree_length=normalized_tree_length(tree),
        occupation_layer=mean_occupation_layer(tree, c),
        center=tree.tickers[c],
        degree=degree_centrality(tree),
        betweenness=tree_betweenness(tree),
        clustering=clustering_coefficient(graph),
        threshold_degree=degree_centrality(graph),
        tree=tree,
        graph=graph,
    )
