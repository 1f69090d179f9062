"""Weighted undirected graphs and the matrix-free linear operators built on them.

Everything here is pure and deterministic: a :class:`Graph` is immutable after
construction (its arrays are marked read-only) and safe to share across
concurrent solver runs, and the operators reduce with numpy's sequential
``bincount``, so results are bit-stable regardless of thread count.
"""

from __future__ import annotations

import gzip
import io
import struct
import sys
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EdgeListParseError",
    "Graph",
    "VertexSet",
    "load_edge_list",
    "write_edge_list",
    "save_cache",
    "load_cache",
    "edge_differences",
    "edge_differences_adjoint",
    "adjacency_matvec",
    "incidence_norm_sq_upper",
    "subgraph_weight",
    "edge_density",
]

_CACHE_MAGIC = b"DKSG"
_CACHE_VERSION = 1


class EdgeListParseError(ValueError):
    """Malformed edge-list input; carries the offending 1-based line number."""

    def __init__(self, message: str, lineno: int):
        super().__init__(message)
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable weighted undirected simple graph.

    Edges are stored once as ``(i, j)`` pairs with ``i < j``, sorted
    lexicographically. That fixed, deterministic orientation stands in for the
    signed vertex-edge incidence matrix, which is never materialized: a column
    for edge ``(i, j)`` is understood as ``e_i - e_j``. Neighbor lists are kept
    in CSR form for O(degree) row scans.

    ``original_ids[i]`` is the label vertex ``i`` carried before relabeling to
    the dense ``0..n-1`` range (the identity for programmatically built
    graphs).
    """

    n: int
    m: int
    edges: np.ndarray        # (m, 2) int64, i < j, lexicographically sorted
    weights: np.ndarray      # (m,) float64, strictly positive
    degree: np.ndarray       # (n,) float64 weighted degree W @ 1
    adj_indptr: np.ndarray   # (n + 1,) CSR offsets into the two arrays below
    adj_indices: np.ndarray
    adj_weights: np.ndarray
    original_ids: np.ndarray  # (n,) int64

    @classmethod
    def from_edges(cls, n, edges, weights=None, original_ids=None) -> "Graph":
        """Build a graph from ``(u, v)`` pairs, canonicalizing orientation and order.

        Pairs may come in either orientation but must be free of self-loops and
        duplicates (merge duplicates before calling; :func:`load_edge_list`
        does). Weights default to 1 and must be strictly positive and finite.
        """
        if n < 1:
            raise ValueError("vertex count must be positive")
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        m = e.shape[0]
        if weights is None:
            w = np.ones(m)
        else:
            w = np.asarray(weights, dtype=np.float64).copy()
            if w.shape != (m,):
                raise ValueError("weights length must match edge count")
        if m:
            if e.min() < 0 or e.max() >= n:
                raise ValueError("vertex id out of range")
            if (e[:, 0] == e[:, 1]).any():
                raise ValueError("self-loops are not allowed")
            if not np.isfinite(w).all() or (w <= 0).any():
                raise ValueError("edge weights must be positive and finite")
            lo = e.min(axis=1)
            hi = e.max(axis=1)
            e = np.stack([lo, hi], axis=1)
            order = np.lexsort((e[:, 1], e[:, 0]))
            e = e[order]
            w = w[order]
            if m > 1 and ((e[1:] == e[:-1]).all(axis=1)).any():
                raise ValueError("duplicate edges are not allowed")

        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        wts = np.concatenate([w, w])
        degree = np.bincount(src, weights=wts, minlength=n)
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(np.bincount(src, minlength=n))
        if original_ids is None:
            ids = np.arange(n, dtype=np.int64)
        else:
            ids = np.asarray(original_ids, dtype=np.int64).copy()
            if ids.shape != (n,):
                raise ValueError("original_ids length must equal n")

        g = cls(
            n=int(n),
            m=int(m),
            edges=e,
            weights=w,
            degree=degree,
            adj_indptr=indptr,
            adj_indices=dst[order],
            adj_weights=wts[order],
            original_ids=ids,
        )
        for arr in (g.edges, g.weights, g.degree, g.adj_indptr,
                    g.adj_indices, g.adj_weights, g.original_ids):
            arr.setflags(write=False)
        return g

    def neighbors(self, i: int):
        """Neighbor ids and edge weights of vertex ``i`` (sorted by id)."""
        lo, hi = self.adj_indptr[i], self.adj_indptr[i + 1]
        return self.adj_indices[lo:hi], self.adj_weights[lo:hi]

    @property
    def is_unweighted(self) -> bool:
        return bool((self.weights == 1.0).all())


@dataclass(frozen=True)
class VertexSet:
    """A k-subset of vertices with its cached subgraph weight and edge density.

    ``subgraph_weight`` is ``1_S' W 1_S`` (twice the internal edge weight);
    ``density`` divides it by ``k*(k-1)`` so an unweighted k-clique scores 1.
    """

    members: tuple
    subgraph_weight: float
    density: float

    @property
    def k(self) -> int:
        return len(self.members)

    @classmethod
    def from_members(cls, g: Graph, members) -> "VertexSet":
        mem = tuple(sorted(int(v) for v in set(members)))
        k = len(mem)
        if k < 2:
            raise ValueError("a vertex set needs at least 2 members")
        w = subgraph_weight(g, mem)
        return cls(members=mem, subgraph_weight=w, density=w / (k * (k - 1)))


# ---------------------------------------------------------------------------
# ingestion


def _text_stream(source):
    """Open `source` (path, '-', or file-like) as text, gunzipping if needed."""
    if source == "-":
        data = sys.stdin.buffer.read()
    elif isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "rb") as raw:
            data = raw.read()
    elif hasattr(source, "read"):
        data = source.read()
        if isinstance(data, str):
            return io.StringIO(data)
    else:
        raise TypeError("source must be a path, '-', or a file-like object")
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return io.StringIO(data.decode("utf-8"))


def load_edge_list(source, weighted: bool = False) -> Graph:
    """Load a graph from line-oriented edge-list text.

    Lines are ``u v`` (or ``u v w`` when ``weighted``); ``#``/``%`` lines are
    comments. Preprocessing: arcs are symmetrized, self-loops dropped,
    duplicate pairs merged (presence semantics for unweighted input, weight
    sums for weighted), and the largest connected component is extracted with
    vertices relabeled to a dense ``0..n-1`` range in ascending original-id
    order. Gzip input is detected transparently; ``source`` may be a path,
    ``"-"`` for stdin, or a file-like object.

    Raises :class:`EdgeListParseError` on malformed lines and ``ValueError``
    if no edges survive preprocessing.
    """
    stream = _text_stream(source)
    want = 3 if weighted else 2
    merged: dict = {}
    for lineno, line in enumerate(stream, 1):
        text = line.strip()
        if not text or text[0] in "#%":
            continue
        parts = text.split()
        if len(parts) != want:
            raise EdgeListParseError(
                f"line {lineno}: expected {want} fields, got {len(parts)}", lineno)
        try:
            u = int(parts[0])
            v = int(parts[1])
        except ValueError:
            raise EdgeListParseError(
                f"line {lineno}: non-numeric vertex id", lineno) from None
        if weighted:
            try:
                w = float(parts[2])
            except ValueError:
                raise EdgeListParseError(
                    f"line {lineno}: non-numeric edge weight", lineno) from None
            if not np.isfinite(w) or w <= 0:
                raise EdgeListParseError(
                    f"line {lineno}: edge weight must be positive and finite", lineno)
        else:
            w = 1.0
        if u == v:
            continue
        key = (u, v) if u < v else (v, u)
        if weighted:
            merged[key] = merged.get(key, 0.0) + w
        else:
            merged[key] = 1.0
    if not merged:
        raise ValueError("no edges left after preprocessing")

    # largest connected component by union-find over original labels
    parent: dict = {}

    def find(a):
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    for u, v in merged:
        parent.setdefault(u, u)
        parent.setdefault(v, v)
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv

    components: dict = {}
    for v in parent:
        components.setdefault(find(v), []).append(v)
    keep = set(max(components.values(), key=lambda c: (len(c), -min(c))))

    ids = sorted(keep)
    index = {orig: i for i, orig in enumerate(ids)}
    pairs = [(u, v) for (u, v) in merged if u in keep]
    pairs.sort()
    edges = [(index[u], index[v]) for u, v in pairs]
    weights = [merged[p] for p in pairs]
    return Graph.from_edges(len(ids), edges, weights, original_ids=ids)


def write_edge_list(g: Graph, dest) -> None:
    """Serialize in the same text format `load_edge_list` reads, using original ids.

    Weighted form is emitted whenever any weight differs from 1; weights are
    written with ``repr`` so a reload reproduces the graph exactly.
    """
    own = isinstance(dest, (str, bytes)) or hasattr(dest, "__fspath__")
    f = open(dest, "w") if own else dest
    try:
        ids = g.original_ids
        if g.is_unweighted:
            for i, j in g.edges:
                f.write(f"{ids[i]} {ids[j]}\n")
        else:
            for (i, j), w in zip(g.edges, g.weights):
                f.write(f"{ids[i]} {ids[j]} {float(w)!r}\n")
    finally:
        if own:
            f.close()


def save_cache(g: Graph, path) -> None:
    """Write the compact binary cache: tagged header, n, m, edges, weights, ids."""
    with open(path, "wb") as f:
        f.write(struct.pack("<4sIQQ", _CACHE_MAGIC, _CACHE_VERSION, g.n, g.m))
        f.write(np.ascontiguousarray(g.edges, dtype="<i8").tobytes())
        f.write(np.ascontiguousarray(g.weights, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(g.original_ids, dtype="<i8").tobytes())


def load_cache(path) -> Graph:
    """Read a graph written by :func:`save_cache`."""
    with open(path, "rb") as f:
        head = f.read(struct.calcsize("<4sIQQ"))
        if len(head) < struct.calcsize("<4sIQQ"):
            raise ValueError("truncated graph cache")
        magic, version, n, m = struct.unpack("<4sIQQ", head)
        if magic != _CACHE_MAGIC:
            raise ValueError("not a graph cache file")
        if version != _CACHE_VERSION:
            raise ValueError(f"unsupported graph cache version {version}")
        edges = np.frombuffer(f.read(16 * m), dtype="<i8").reshape(m, 2)
        weights = np.frombuffer(f.read(8 * m), dtype="<f8")
        ids = np.frombuffer(f.read(8 * n), dtype="<i8")
        if edges.shape != (m, 2) or weights.shape != (m,) or ids.shape != (n,):
            raise ValueError("truncated graph cache")
    return Graph.from_edges(n, edges, weights, original_ids=ids)


# ---------------------------------------------------------------------------
# matrix-free operators


def _check_vertex_vector(g: Graph, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (g.n,):
        raise ValueError(f"expected a length-{g.n} vertex vector, got shape {x.shape}")
    return x


def edge_differences(g: Graph, x) -> np.ndarray:
    """Per-edge differences ``x_i - x_j`` in stored edge order (``B^T x``)."""
    x = _check_vertex_vector(g, x)
    return x[g.edges[:, 0]] - x[g.edges[:, 1]]


def edge_differences_adjoint(g: Graph, f) -> np.ndarray:
    """Exact adjoint of :func:`edge_differences`: accumulate ``+f_e`` at ``i``, ``-f_e`` at ``j``."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (g.m,):
        raise ValueError(f"expected a length-{g.m} edge vector, got shape {f.shape}")
    return (np.bincount(g.edges[:, 0], weights=f, minlength=g.n)
            - np.bincount(g.edges[:, 1], weights=f, minlength=g.n))


def adjacency_matvec(g: Graph, x) -> np.ndarray:
    """``W @ x`` via one edge scan."""
    x = _check_vertex_vector(g, x)
    e0, e1 = g.edges[:, 0], g.edges[:, 1]
    out = np.bincount(e0, weights=g.weights * x[e1], minlength=g.n)
    out += np.bincount(e1, weights=g.weights * x[e0], minlength=g.n)
    return out


def _unweighted_matvec(g: Graph, x: np.ndarray) -> np.ndarray:
    e0, e1 = g.edges[:, 0], g.edges[:, 1]
    return (np.bincount(e0, weights=x[e1], minlength=g.n)
            + np.bincount(e1, weights=x[e0], minlength=g.n))


def power_iteration_norm(matvec, n: int, tol: float = 1e-4, max_iter: int = 1000,
                         block: int = 4):
    """Spectral norm of a symmetric operator by block power iteration.

    A single power-iteration vector can plateau near a sub-dominant
    eigenvalue when the start vector barely overlaps the top eigenspace; a
    small orthonormal block makes that failure mode vanish in practice.
    Rayleigh-Ritz on the block gives signed Ritz pairs (so indefinite
    spectra, bipartite adjacencies and deflated operators included, need no
    sign games), and iteration stops only when the dominant pair's residual
    ``||A v - mu v||`` falls below ``0.5 * tol * |mu|``: value-increment
    tests can be fooled while the top eigendirection is still emerging, a
    residual cannot. A small residual places an eigenvalue within ``r`` of
    ``mu``, so callers inflating by ``(1 + tol)`` hold a safe upper estimate.

    The start block comes from a fixed seed and the returned vector's sign is
    normalized, so results are deterministic. Returns
    ``(sigma, unit_vector, converged)`` with the vector a dominant
    eigenvector; hitting the iteration cap returns the current estimate
    flagged ``converged = False``, never silently.
    """
    rng = np.random.default_rng(0x5EED)
    width = min(block, n)
    basis, _ = np.linalg.qr(rng.standard_normal((n, width)))
    sigma = 0.0
    vec = basis[:, 0]
    converged = False
    for _ in range(max_iter):
        image = np.column_stack([matvec(basis[:, j]) for j in range(width)])
        small = basis.T @ image
        eigvals, eigvecs = np.linalg.eigh(0.5 * (small + small.T))
        idx = int(np.argmax(np.abs(eigvals)))
        mu = float(eigvals[idx])
        sigma = abs(mu)
        vec = basis @ eigvecs[:, idx]
        if sigma == 0.0:
            if float(np.abs(image).max()) == 0.0:
                converged = True
                break
        else:
            residual = float(np.linalg.norm(image @ eigvecs[:, idx] - mu * vec))
            if residual <= 0.5 * tol * sigma:
                converged = True
                break
        basis, _ = np.linalg.qr(image)
    top = int(np.argmax(np.abs(vec)))
    if vec[top] < 0:
        vec = -vec
    return sigma, vec, converged


def incidence_norm_sq_upper(g: Graph, tol: float = 1e-2, max_iter: int = 2000) -> float:
    """Safe upper estimate of the squared incidence spectral norm ``||B||^2``.

    Power iteration on the unweighted combinatorial Laplacian ``B B^T``
    (matrix-free: ``L x = deg * x - A x``), inflated by ``(1 + tol)`` and
    capped at the certified Anderson-Morley bound ``max_edge(deg_i + deg_j)``.
    If the iteration cap is hit, the always-valid Gershgorin bound
    ``2 * max_degree`` is returned instead. Overestimating is safe for
    consumers that need a feasible step size; underestimating is not.
    """
    if g.m == 0:
        raise ValueError("graph has no edges")
    counts = np.bincount(g.edges.ravel(), minlength=g.n).astype(np.float64)
    gershgorin = 2.0 * float(counts.max())
    estimate, _, converged = power_iteration_norm(
        lambda x: counts * x - _unweighted_matvec(g, x), g.n,
        tol=0.5 * tol, max_iter=max_iter)
    if not converged:
        return gershgorin
    edge_bound = float((counts[g.edges[:, 0]] + counts[g.edges[:, 1]]).max())
    return min((1.0 + tol) * estimate, edge_bound)


def subgraph_weight(g: Graph, members) -> float:
    """``1_S' W 1_S``: twice the total weight of edges inside ``members``."""
    idx = np.fromiter((int(v) for v in members), dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= g.n):
        raise ValueError("vertex id out of range")
    mask = np.zeros(g.n, dtype=bool)
    mask[idx] = True
    inside = mask[g.edges[:, 0]] & mask[g.edges[:, 1]]
    return 2.0 * float(g.weights[inside].sum())


def edge_density(g: Graph, members) -> float:
    """Subgraph weight normalized by ``k*(k-1)``; 1.0 for an unweighted clique."""
    mem = set(int(v) for v in members)
    k = len(mem)
    if k < 2:
        raise ValueError("edge density needs at least 2 vertices")
    return subgraph_weight(g, mem) / (k * (k - 1))
