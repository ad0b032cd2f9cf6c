"""Histograms, running-average mixtures, and streaming moment estimates.

Raw chain output is reduced to three things downstream code consumes:
discrete distributions on a fixed 2D grid, convex mixtures of those
distributions across iterations, and per-coordinate mean/variance images
accumulated in one pass.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid2D",
    "DiscreteDistribution",
    "MomentAccumulator",
    "histogram",
    "mixture_average",
    "validate_weight_schedule",
    "CLAMP_WARN_FRACTION",
]

CLAMP_WARN_FRACTION = 1e-3


@dataclass(frozen=True)
class Grid2D:
    """Uniform rectangular binning of a 2D window."""

    x_range: tuple[float, float] = (-4.0, 4.0)
    y_range: tuple[float, float] = (-4.0, 4.0)
    bins_x: int = 50
    bins_y: int = 50

    def __post_init__(self):
        if self.x_range[0] >= self.x_range[1] or self.y_range[0] >= self.y_range[1]:
            raise ValueError("grid ranges must be nonempty intervals")
        if self.bins_x < 1 or self.bins_y < 1:
            raise ValueError("bin counts must be positive")

    @property
    def n_bins(self):
        return self.bins_x * self.bins_y

    @property
    def bin_area(self):
        dx = (self.x_range[1] - self.x_range[0]) / self.bins_x
        dy = (self.y_range[1] - self.y_range[0]) / self.bins_y
        return dx * dy

    def centers_x(self):
        a, b = self.x_range
        dx = (b - a) / self.bins_x
        return a + dx * (np.arange(self.bins_x) + 0.5)

    def centers_y(self):
        c, d = self.y_range
        dy = (d - c) / self.bins_y
        return c + dy * (np.arange(self.bins_y) + 0.5)

    def support_points(self):
        """Bin centers as an (n_bins, 2) array, x-major ordering."""
        cx = self.centers_x()
        cy = self.centers_y()
        xx, yy = np.meshgrid(cx, cy, indexing="ij")
        return np.stack([xx.ravel(), yy.ravel()], axis=1)

    def flat_indices(self, samples):
        """Flat bin index per sample, clamping out-of-range points.

        Returns (indices, n_clamped).
        """
        samples = np.asarray(samples, dtype=float)
        a, b = self.x_range
        c, d = self.y_range
        ix = np.floor((samples[..., 0] - a) / (b - a) * self.bins_x).astype(np.int64)
        iy = np.floor((samples[..., 1] - c) / (d - c) * self.bins_y).astype(np.int64)
        cx = np.clip(ix, 0, self.bins_x - 1)
        cy = np.clip(iy, 0, self.bins_y - 1)
        n_clamped = int(np.count_nonzero((cx != ix) | (cy != iy)))
        return cx * self.bins_y + cy, n_clamped


@dataclass
class DiscreteDistribution:
    """Probability masses on an explicit finite support.

    ``support`` is (n, d); ``probs`` is (n,), nonnegative, summing to one
    within 1e-12.  ``grid`` is set when the support is grid bin centers,
    and ``n_clamped`` records how many samples were moved to boundary bins
    during histogramming.
    """

    support: np.ndarray
    probs: np.ndarray
    grid: Grid2D | None = None
    n_clamped: int = 0

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=float)
        self.probs = np.asarray(self.probs, dtype=float)
        if self.support.ndim != 2 or self.probs.ndim != 1:
            raise ValueError("support must be (n, d) and probs (n,)")
        if self.support.shape[0] != self.probs.shape[0]:
            raise ValueError("support and probs length mismatch")
        if np.any(self.probs < 0):
            raise ValueError("negative probability mass")
        total = float(self.probs.sum())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probability masses sum to {total!r}, not 1")

    def same_support(self, other):
        if self.grid is not None and other.grid is not None:
            return self.grid == other.grid
        return self.support.shape == other.support.shape and np.array_equal(
            self.support, other.support
        )


def histogram(samples, grid):
    """Normalized bin counts of 2D samples on ``grid``.

    Out-of-range samples are clamped to the nearest boundary bin so mass is
    conserved; a warning fires when more than 0.1% of samples needed
    clamping.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[None, :]
    samples = samples.reshape(-1, samples.shape[-1])
    if samples.shape[0] == 0:
        raise ValueError("histogram requires at least one sample")
    if samples.shape[1] != 2:
        raise ValueError("expected 2D samples")
    idx, n_clamped = grid.flat_indices(samples)
    counts = np.bincount(idx, minlength=grid.n_bins).astype(float)
    if n_clamped > CLAMP_WARN_FRACTION * samples.shape[0]:
        warnings.warn(
            f"{n_clamped} of {samples.shape[0]} samples fell outside the "
            "histogram window and were clamped to boundary bins",
            stacklevel=2,
        )
    probs = counts / counts.sum()
    return DiscreteDistribution(grid.support_points(), probs, grid=grid, n_clamped=n_clamped)


def mixture_average(distributions, weights, N=0, n=None):
    """Convex mixture of ``distributions[N:N+n]`` with matching weights.

    Realizes the running average with window offset N and length n; weights
    are normalized by their sum over the window.
    """
    if n is None:
        n = len(distributions) - N
    if n < 1 or N < 0 or N + n > len(distributions):
        raise ValueError("averaging window out of range")
    window = distributions[N : N + n]
    w = np.asarray(weights, dtype=float)[N : N + n]
    if w.shape[0] != n:
        raise ValueError("weights do not cover the averaging window")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    total = w.sum()
    if total <= 0:
        raise ValueError("weights must not all be zero")
    first = window[0]
    probs = np.zeros_like(first.probs)
    for dist, wk in zip(window, w):
        if not first.same_support(dist):
            raise ValueError("mixture components live on different grids")
        probs += (wk / total) * dist.probs
    probs /= probs.sum()
    return DiscreteDistribution(
        first.support,
        probs,
        grid=first.grid,
        n_clamped=sum(d.n_clamped for d in window),
    )


def validate_weight_schedule(lambdas, taus_next):
    """Check the ratio monotonicity required of averaging weights.

    ``lambdas[j]`` weights iterate j of the window and ``taus_next[j]`` is
    the step size taken from that iterate; admissibility requires
    lambdas[j+1]/taus_next[j+1] <= lambdas[j]/taus_next[j] for every j.
    """
    lam = np.asarray(lambdas, dtype=float)
    tau = np.asarray(taus_next, dtype=float)
    if lam.shape != tau.shape:
        raise ValueError("weights and step sizes must align")
    if np.any(lam < 0) or np.any(tau <= 0):
        raise ValueError("weights must be nonnegative and step sizes positive")
    ratio = lam / tau
    if np.any(ratio[1:] > ratio[:-1] * (1.0 + 1e-12)):
        raise ValueError("weight/step ratios must be nonincreasing along the window")


@dataclass
class MomentAccumulator:
    """Single-pass mean and variance with exact pairwise merging.

    Works per coordinate on samples of a fixed ``shape`` (scalars, vectors,
    or images).  ``merge`` implements the parallel variance identity, so
    splitting a stream across accumulators and merging gives the same
    result as one accumulator seeing everything.
    """

    shape: tuple
    count: int = 0
    mean: np.ndarray = field(default=None, repr=False)
    m2: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.shape = tuple(self.shape)
        if self.mean is None:
            self.mean = np.zeros(self.shape)
        if self.m2 is None:
            self.m2 = np.zeros(self.shape)

    def add(self, sample):
        sample = np.asarray(sample, dtype=float)
        if sample.shape != self.shape:
            raise ValueError(f"expected sample of shape {self.shape}, got {sample.shape}")
        self.count += 1
        delta = sample - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (sample - self.mean)
        return self

    def add_batch(self, samples):
        """Absorb samples stacked along the leading axis."""
        samples = np.asarray(samples, dtype=float)
        if samples.shape[1:] != self.shape:
            raise ValueError(
                f"expected batch of shape (n,)+{self.shape}, got {samples.shape}"
            )
        nb = samples.shape[0]
        if nb == 0:
            return self
        batch_mean = samples.mean(axis=0)
        batch_m2 = np.sum((samples - batch_mean) ** 2, axis=0)
        other = MomentAccumulator(self.shape, nb, batch_mean, batch_m2)
        merged = self.merge(other)
        self.count, self.mean, self.m2 = merged.count, merged.mean, merged.m2
        return self

    def merge(self, other):
        """Combined accumulator; neither input is mutated."""
        if self.shape != other.shape:
            raise ValueError("cannot merge accumulators with different shapes")
        if self.count == 0:
            return MomentAccumulator(other.shape, other.count, other.mean.copy(), other.m2.copy())
        if other.count == 0:
            return MomentAccumulator(self.shape, self.count, self.mean.copy(), self.m2.copy())
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + delta**2 * (self.count * other.count / n)
        return MomentAccumulator(self.shape, n, mean, m2)

    def finalize(self):
        """(mean, unbiased variance); requires at least two samples."""
        if self.count < 2:
            raise ValueError("variance undefined for fewer than two samples")
        return self.mean.copy(), self.m2 / (self.count - 1)
