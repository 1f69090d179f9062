"""Proximal operators used by the solver.

Two closed or near-closed forms cover everything the splitting needs:

* the prox of a linear tilt over the capped simplex
  ``{x in [0,1]^n : sum(x) = k}``, evaluated by bisection on the scalar dual
  variable of the sum constraint, and
* elementwise soft-thresholding (``shrinkage``), the prox of a weighted L1
  norm.

Both are pure functions and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["CappedSimplexParams", "cardinality_gap", "prox_capped_simplex", "shrinkage"]


@dataclass(frozen=True)
class CappedSimplexParams:
    """Parameters of ``argmin -degrees @ x + (tau/2) ||x - v||^2`` over the capped simplex.

    ``tau`` is the quadratic scaling of the prox (callers that evaluate the
    prox of ``g / mu`` pass ``tau = 1/mu``); ``eps`` is the bisection exit
    tolerance on the cardinality gap.
    """

    degrees: np.ndarray
    k: float
    tau: float
    eps: float

    def __post_init__(self):
        d = np.asarray(self.degrees, dtype=np.float64)
        object.__setattr__(self, "degrees", d)
        n = d.shape[0]
        if d.ndim != 1 or n < 3:
            raise ValueError("degrees must be a vector of length >= 3")
        if not np.isfinite(d).all():
            raise ValueError("degrees must be finite")
        if not (self.tau > 0 and np.isfinite(self.tau)):
            raise ValueError("tau must be positive")
        if not (self.eps > 0 and np.isfinite(self.eps)):
            raise ValueError("eps must be positive")
        if not 2 <= self.k <= n - 1:
            raise ValueError(f"k must lie in [2, {n - 1}], got {self.k}")


def cardinality_gap(nu: float, v: np.ndarray, p: CappedSimplexParams) -> float:
    """``sum_i clamp(v_i + (degrees_i - nu)/tau, 0, 1) - k``.

    Monotone non-increasing in ``nu``; its root is the optimal dual variable
    of the sum-to-k constraint.
    """
    x = np.clip(v + (p.degrees - nu) / p.tau, 0.0, 1.0)
    return float(x.sum() - p.k)


def prox_capped_simplex(v, p: CappedSimplexParams):
    """Prox of the linear-plus-box-plus-sum-to-k function, by dual bisection.

    Returns ``(x, nu)`` where ``x_i = clamp(v_i + (degrees_i - nu)/tau, 0, 1)``
    at the final dual iterate ``nu``, with ``|sum(x) - k| <= eps``. The box
    constraints hold exactly by construction.

    The initial bracket is ``[min_i(degrees_i + tau*v_i) - max(1, tau),
    max_i(degrees_i + tau*v_i)]``, pinning the initial gap values to exactly
    ``[n - k, -k]`` (the ``max(1, tau)`` offset keeps that guarantee when
    ``tau > 1``). Bisection halves the bracket each step, so the step count is
    logarithmic in the bracket width over the exit tolerance.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != p.degrees.shape:
        raise ValueError("v must match the degree vector length")
    if not np.isfinite(v).all():
        raise ValueError("v must be finite")

    shifted = p.degrees + p.tau * v
    lo = float(shifted.min()) - max(1.0, p.tau)
    hi = float(shifted.max())
    gap_lo = v.shape[0] - p.k   # by construction of the bracket
    gap_hi = -p.k
    while True:
        mid = 0.5 * (lo + hi)
        exhausted = mid == lo or mid == hi  # float resolution limit reached
        gap_mid = cardinality_gap(mid, v, p)
        # keep the invariant gap(lo) >= 0 >= gap(hi); testing the sign of
        # gap(mid) directly stays correct when gap(hi) lands exactly on 0
        if gap_mid > 0:
            lo, gap_lo = mid, gap_mid
        else:
            hi, gap_hi = mid, gap_mid
        if gap_lo - gap_hi <= p.eps:
            break
        # stagnation guard: a collapsed bracket cannot improve further
        if exhausted or hi - lo <= 1e-14 * (abs(lo) + abs(hi)):
            break
    x = np.clip(v + (p.degrees - mid) / p.tau, 0.0, 1.0)
    return x, mid


def shrinkage(v, w, rho: float) -> np.ndarray:
    """Soft-threshold ``v`` elementwise at per-entry levels ``w / rho``.

    This is the prox of ``z -> sum(w * |z|)`` under the scaling
    ``prox(v) = argmin f(z) + (rho/2) ||z - v||^2``:
    ``max(0, v - w/rho) - max(0, -v - w/rho)``.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    v = np.asarray(v, dtype=np.float64)
    t = np.asarray(w, dtype=np.float64) / rho
    if t.shape != v.shape:
        raise ValueError("v and w must have the same length")
    return np.maximum(0.0, v - t) - np.maximum(0.0, -v - t)
