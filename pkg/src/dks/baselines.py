"""Comparison methods and the a-posteriori optimality bound.

Greedy degree/attachment selection, the truncated power method, densest-k on
the rank-1 adjacency surrogate, and the edge-density upper bound computed
from the top two singular values. All are pure functions over an immutable
Graph and can run concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, VertexSet, adjacency_matvec, subgraph_weight
from .rounding import power_iteration_norm

__all__ = [
    "SpectralPair",
    "greedy_feige",
    "truncated_power_method",
    "top_two_singular",
    "rank1_dks",
    "density_upper_bound",
]


def _check_k(g: Graph, k: int) -> None:
    if not 2 <= k <= g.n - 1:
        raise ValueError(f"k must lie in [2, {g.n - 1}], got {k}")


def greedy_feige(g: Graph, k: int) -> VertexSet:
    """Two-phase greedy: top ``ceil(k/2)`` by weighted degree, then best attached.

    Phase 2 adds the ``floor(k/2)`` remaining vertices with the largest total
    edge weight into the phase-1 set. All ties go to the smallest vertex id.
    (The original algorithm is stated for unweighted graphs; weighted degree
    and weighted attachment are the natural generalization used here.)
    """
    _check_k(g, k)
    head_count = (k + 1) // 2
    heads = np.argsort(-g.degree, kind="stable")[:head_count]
    indicator = np.zeros(g.n)
    indicator[heads] = 1.0
    attachment = adjacency_matvec(g, indicator)
    attachment[heads] = -np.inf
    tail = np.argsort(-attachment, kind="stable")[: k - head_count]
    return VertexSet.from_members(g, np.concatenate([heads, tail]))


def truncated_power_method(g: Graph, k: int, x0=None, max_iter: int = 100) -> VertexSet:
    """Power iterations snapped to k-sparse indicators; returns the best support seen.

    Each step replaces ``x`` by the indicator of the top-k entries of ``W x``
    (ties to the smallest id). Stops when the support repeats, when the
    subgraph weight stops increasing, or at ``max_iter``; the best-weight
    support visited is returned, so the result never degrades with extra
    iterations. ``x0`` defaults to the top-k degree indicator.
    """
    _check_k(g, k)
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if x0 is None:
        x = np.zeros(g.n)
        x[np.argsort(-g.degree, kind="stable")[:k]] = 1.0
    else:
        x = np.asarray(x0, dtype=np.float64).copy()
        if x.shape != (g.n,):
            raise ValueError(f"expected a length-{g.n} vector, got shape {x.shape}")
        if not np.isfinite(x).all():
            raise ValueError("x0 must be finite")
        if not np.any(x):
            raise ValueError("x0 must be nonzero")

    best_support = None
    best_weight = -np.inf
    prev_support = None
    prev_weight = None
    for _ in range(max_iter):
        wx = adjacency_matvec(g, x)
        support = tuple(np.sort(np.argsort(-wx, kind="stable")[:k]))
        weight = subgraph_weight(g, support)
        if weight > best_weight:
            best_weight, best_support = weight, support
        if support == prev_support:
            break
        if prev_weight is not None and weight <= prev_weight:
            break
        prev_support, prev_weight = support, weight
        x = np.zeros(g.n)
        x[list(support)] = 1.0
    return VertexSet.from_members(g, best_support)


@dataclass(frozen=True, eq=False)
class SpectralPair:
    """Top two singular values of the adjacency matrix and the leading unit vector."""

    sigma1: float
    u1: np.ndarray
    sigma2: float
    converged: bool = True


def top_two_singular(g: Graph, tol: float = 1e-6, max_iter: int = 20000) -> SpectralPair:
    """``sigma1, u1`` by power iteration on W; ``sigma2`` by deflating against u1.

    Power iteration approaches singular values from below, so both estimates
    are inflated by ``(1 + 10*tol)`` into safe upper estimates: the density
    bound built from them must err on the loose side, never the tight one.
    Estimates that hit the iteration cap are still returned but flagged via
    ``converged = False``, never silently.
    """
    if g.m == 0:
        raise ValueError("graph has no edges")
    sigma1, u1, ok1 = power_iteration_norm(
        lambda x: adjacency_matvec(g, x), g.n, tol, max_iter)
    lambda1 = float(u1 @ adjacency_matvec(g, u1))

    def deflated(x):
        return adjacency_matvec(g, x) - lambda1 * (u1 @ x) * u1

    sigma2, _, ok2 = power_iteration_norm(deflated, g.n, tol, max_iter)
    inflate = 1.0 + 10.0 * tol
    sigma1 *= inflate
    sigma2 *= inflate
    # deflation noise can nudge sigma2 past sigma1; the ordering is structural
    sigma2 = min(sigma2, sigma1)
    return SpectralPair(sigma1=sigma1, u1=u1, sigma2=sigma2, converged=ok1 and ok2)


def rank1_dks(g: Graph, k: int, sp: SpectralPair):
    """Densest-k on the rank-1 surrogate ``sigma1 (u1' 1_S)^2``.

    The surrogate is maximized over k-subsets by the top-k entries of ``u1``
    or of ``-u1`` (the sum is linear, so prefix sets are exhaustive).
    Returns ``(vertex_set, q)`` where the vertex set is the candidate with
    the larger true subgraph weight and ``q`` is the surrogate optimum,
    needed by :func:`density_upper_bound`.
    """
    _check_k(g, k)
    u = np.asarray(sp.u1, dtype=np.float64)
    plus = np.argsort(-u, kind="stable")[:k]
    minus = np.argsort(u, kind="stable")[:k]
    q = sp.sigma1 * max(float(u[plus].sum()) ** 2, float(u[minus].sum()) ** 2)
    cand_plus = VertexSet.from_members(g, plus)
    cand_minus = VertexSet.from_members(g, minus)
    chosen = cand_plus if cand_plus.subgraph_weight >= cand_minus.subgraph_weight else cand_minus
    return chosen, float(q)


def density_upper_bound(g: Graph, k: int, sp: SpectralPair, q: float) -> float:
    """A-posteriori cap on the best achievable edge density at size ``k``.

    ``min(cap, (q/k + sigma2)/(k-1), sigma1/(k-1))`` with ``q`` the rank-1
    surrogate optimum from :func:`rank1_dks` and ``cap`` the maximum edge
    weight, the largest density any k-subset can reach (exactly 1 for
    unweighted graphs). The bound holds for any heuristic's output, so it
    benchmarks sub-optimality a posteriori.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    cap = float(g.weights.max()) if g.m else 0.0
    return float(min(cap, (q / k + sp.sigma2) / (k - 1), sp.sigma1 / (k - 1)))
