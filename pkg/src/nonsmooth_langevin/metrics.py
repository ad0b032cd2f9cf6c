"""Target discretization and divergences between discrete distributions.

The target pi propto exp(-U) is discretized by a midpoint rule on a
refined grid; distances between discrete distributions come in three
flavors: exact squared-Euclidean Wasserstein (via the transport solver),
KL, and total variation, plus two inequality checks used as sanity
assertions throughout the experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .estimation import DiscreteDistribution, Grid2D
from .potentials import eval_U
from .transport import transport_cost

__all__ = [
    "TargetDensity",
    "CheckResult",
    "discretize_target",
    "w2_exact",
    "kl_discrete",
    "tv_discrete",
    "pinsker_check",
    "mean_error_bound_check",
    "distribution_mean",
]


@dataclass
class TargetDensity:
    """Discretized target: normalization constant and per-bin masses."""

    model: object
    Z: float
    grid: Grid2D
    dist: DiscreteDistribution


@dataclass
class CheckResult:
    """Outcome of an inequality check: lhs <= rhs (+slack)."""

    passed: bool
    lhs: float
    rhs: float


def discretize_target(model, grid, refine=8):
    """Piecewise-constant approximation of pi on ``grid``.

    Each bin mass is the midpoint-rule average of exp(-U) over refine^2
    sub-points times the bin area; masses are normalized and the resulting
    estimate of Z = integral of exp(-U) is reported.
    """
    if refine < 1:
        raise ValueError("refine must be at least 1")
    a, b = grid.x_range
    c, d = grid.y_range
    fx = grid.bins_x * refine
    fy = grid.bins_y * refine
    sx = a + (b - a) / fx * (np.arange(fx) + 0.5)
    sy = c + (d - c) / fy * (np.arange(fy) + 0.5)
    xx, yy = np.meshgrid(sx, sy, indexing="ij")
    pts = np.stack([xx, yy], axis=-1)  # (fx, fy, 2)
    U = eval_U(model, pts)
    shift = float(np.min(U))
    w = np.exp(-(U - shift))
    bin_mean = w.reshape(grid.bins_x, refine, grid.bins_y, refine).mean(axis=(1, 3))
    raw = bin_mean * grid.bin_area
    total = float(raw.sum())
    Z = total * float(np.exp(-shift))
    probs = (raw / total).ravel()
    dist = DiscreteDistribution(grid.support_points(), probs, grid=grid)
    return TargetDensity(model, Z, grid, dist)


def w2_exact(mu, nu, rel_tol=1e-11):
    """Exact 2-Wasserstein distance between discrete distributions."""
    if mu.support.shape[1] != nu.support.shape[1]:
        raise ValueError("distributions live in different ambient dimensions")
    keep_a = mu.probs > 0
    keep_b = nu.probs > 0
    xa = mu.support[keep_a]
    xb = nu.support[keep_b]
    a = mu.probs[keep_a]
    b = nu.probs[keep_b]
    if xa.shape[0] == 1 and xb.shape[0] == 1:
        return float(np.linalg.norm(xa[0] - xb[0]))
    C = cdist(xa, xb, "sqeuclidean")
    cost = transport_cost(C, a, b, rel_tol=rel_tol)
    return float(np.sqrt(max(cost, 0.0)))


def _check_support(mu, nu):
    if not mu.same_support(nu):
        raise ValueError("distributions live on different supports")


def kl_discrete(mu, nu):
    """KL(mu | nu) on a shared support; +inf if mu is not dominated."""
    _check_support(mu, nu)
    p = mu.probs
    q = nu.probs
    pos = p > 0
    if np.any(q[pos] == 0):
        return float("inf")
    return float(np.sum(p[pos] * np.log(p[pos] / q[pos])))


def tv_discrete(mu, nu):
    """Total variation distance, 0.5 * l1, on a shared support."""
    _check_support(mu, nu)
    return float(0.5 * np.sum(np.abs(mu.probs - nu.probs)))


def pinsker_check(mu, nu):
    """Verify tv <= sqrt(kl/2), returning both sides."""
    tv = tv_discrete(mu, nu)
    kl = kl_discrete(mu, nu)
    rhs = float(np.sqrt(kl / 2.0)) if np.isfinite(kl) else float("inf")
    return CheckResult(tv <= rhs + 1e-12, tv, rhs)


def distribution_mean(mu):
    return mu.support.T @ mu.probs


def mean_error_bound_check(mu, nu):
    """Verify ||mean(mu) - mean(nu)||^2 <= W2(mu, nu)^2."""
    lhs = float(np.sum((distribution_mean(mu) - distribution_mean(nu)) ** 2))
    rhs = w2_exact(mu, nu) ** 2
    return CheckResult(lhs <= rhs + 1e-9, lhs, rhs)
