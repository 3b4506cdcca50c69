"""Graph and signal data model, k-NN graph construction, shift normalization.

A graph is a dense weighted adjacency matrix: entry ``A[n, m]`` is the weight
of the directed edge from node ``m`` to node ``n``, so shifting a signal is
the matrix-vector product ``A @ s``.  Undirected graphs are symmetric with
real entries.  All objects are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SYMMETRY_TOL = 1e-12

EARTH_RADIUS_KM = 6371.0088


def euclidean(p, q):
    """Euclidean distance between two coordinate vectors."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(np.linalg.norm(p - q))


def haversine_km(p, q):
    """Great-circle distance in km between (lat, lon) pairs given in degrees."""
    lat1, lon1 = (math.radians(v) for v in p)
    lat2, lon2 = (math.radians(v) for v in q)
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    a = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


def _freeze(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def _as_adjacency(values):
    """Coerce to a square float64/complex128 matrix, real when possible."""
    a = np.asarray(values)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"adjacency must be square, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("graph needs at least one node")
    a = a.astype(complex)
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError("adjacency entries must be finite")
    if np.all(a.imag == 0.0):
        return a.real.astype(float)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Weighted graph over nodes 0..N-1 with dense adjacency storage.

    ``directed`` defaults to a structural test: the graph is undirected only
    if the adjacency is real and symmetric (within 1e-12).  Pass the flag
    explicitly to force a directed interpretation of a symmetric matrix.
    """

    adjacency: np.ndarray
    directed: bool = None  # type: ignore[assignment]

    def __post_init__(self):
        a = _as_adjacency(self.adjacency)
        directed = self.directed
        symmetric = (
            not np.iscomplexobj(a)
            and bool(np.all(np.abs(a - a.T) <= SYMMETRY_TOL))
        )
        if directed is None:
            directed = not symmetric
        elif not directed and not symmetric:
            raise ValueError("undirected graph requires a real symmetric adjacency")
        object.__setattr__(self, "adjacency", _freeze(a))
        object.__setattr__(self, "directed", bool(directed))

    @property
    def n(self):
        return self.adjacency.shape[0]

    @property
    def spectral_radius(self):
        """Largest eigenvalue magnitude; cached after first use."""
        cached = self.__dict__.get("_rho")
        if cached is None:
            if not self.adjacency.any():
                cached = 0.0
            elif not self.directed:
                cached = float(np.max(np.abs(np.linalg.eigvalsh(self.adjacency))))
            else:
                cached = float(np.max(np.abs(np.linalg.eigvals(self.adjacency))))
            object.__setattr__(self, "_rho", cached)
        return cached

    def signal(self, values) -> "GraphSignal":
        """Bind a length-N value vector to this graph."""
        return GraphSignal(values, self)

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        return f"Graph(n={self.n}, {kind})"


@dataclass(frozen=True, eq=False)
class GraphSignal:
    """A complex-valued sample per node, bound to its indexing graph."""

    values: np.ndarray
    graph: Graph

    def __post_init__(self):
        v = np.asarray(self.values)
        v = v.astype(float) if not np.iscomplexobj(v) else v.astype(complex)
        if v.ndim != 1 or v.shape[0] != self.graph.n:
            raise ValueError(
                f"signal length {v.shape} does not match graph with {self.graph.n} nodes"
            )
        if not np.all(np.isfinite(v)) or (
            np.iscomplexobj(v) and not np.all(np.isfinite(v.imag))
        ):
            raise ValueError("signal entries must be finite")
        object.__setattr__(self, "values", _freeze(v))

    def __repr__(self):
        return f"GraphSignal(n={self.graph.n})"


@dataclass(frozen=True, eq=False)
class LabelSignal:
    """Two-class label vector: +1 / -1 for known classes, 0 for unknown."""

    labels: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.labels, dtype=float)
        if v.ndim != 1:
            raise ValueError("labels must be a vector")
        if not np.all(np.isin(v, (-1.0, 0.0, 1.0))):
            raise ValueError("labels must be exactly +1, -1, or 0")
        object.__setattr__(self, "labels", _freeze(v))

    @property
    def known_mask(self):
        return self.labels != 0.0

    @property
    def n(self):
        return self.labels.shape[0]


def _check_bound(g: Graph, s: GraphSignal):
    if s.graph is not g:
        if s.values.shape[0] != g.n:
            raise ValueError("signal dimension does not match graph")
        raise ValueError("signal is bound to a different graph")


def build_knn_graph(points, k, metric=euclidean, *, unweighted=False,
                    symmetrize=False) -> Graph:
    """Directed k-nearest-neighbor graph with Gaussian distance weights.

    Each node receives edges from its ``k`` nearest other nodes (distance
    ties broken by lowest node index).  The weight of the edge into ``n``
    from neighbor ``m`` is::

        exp(-d(n,m)^2) / sqrt(sum_{j in N(n)} exp(-d(n,j)^2)
                              * sum_{l in N(m)} exp(-d(m,l)^2))

    With ``unweighted=True`` every selected edge has weight exactly 1.
    With ``symmetrize=True`` the neighbor relation is made mutual before
    weighting, which yields an undirected graph.
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    n = len(pts)
    if n == 0:
        raise ValueError("points must be nonempty")
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < {n}, got {k}")

    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d = float(metric(pts[i], pts[j]))
            dist[i, j] = dist[j, i] = d
    if not np.all(np.isfinite(dist)):
        raise ValueError("all pairwise distances must be finite")

    neighbors = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        others.sort(key=lambda j: (dist[i, j], j))
        neighbors.append(set(others[:k]))
    if symmetrize:
        mutual = [set(nb) for nb in neighbors]
        for i in range(n):
            for j in neighbors[i]:
                mutual[j].add(i)
        neighbors = mutual

    adjacency = np.zeros((n, n))
    if unweighted:
        for i in range(n):
            for j in neighbors[i]:
                adjacency[i, j] = 1.0
    else:
        gauss = np.exp(-dist ** 2)
        sums = np.array([sum(gauss[i, j] for j in neighbors[i]) for i in range(n)])
        for i in range(n):
            for j in neighbors[i]:
                adjacency[i, j] = gauss[i, j] / math.sqrt(sums[i] * sums[j])
    return Graph(adjacency)


def normalize_shift(g: Graph) -> Graph:
    """Scale the adjacency by 1/|lambda_max| so the spectral radius is 1."""
    rho = g.spectral_radius
    if rho == 0.0:
        raise ValueError("cannot normalize a graph with zero adjacency")
    return Graph(g.adjacency / rho, directed=g.directed)


def graph_shift(g: Graph, s: GraphSignal) -> GraphSignal:
    """Elementary filter: replace each sample by the weighted sum A @ s."""
    _check_bound(g, s)
    return GraphSignal(g.adjacency @ s.values, g)


def laplacian(g: Graph) -> np.ndarray:
    """Laplacian D - A of an undirected graph with non-negative real weights."""
    if g.directed:
        raise ValueError("Laplacian is defined only for undirected graphs")
    a = g.adjacency
    if np.any(a < 0):
        raise ValueError("Laplacian requires non-negative edge weights")
    return np.diag(a.sum(axis=1)) - a
