"""Linear operators coupling the smooth and non-smooth potential terms.

State containers are plain numpy arrays: a 2D state is an array of shape
(2,), an image is (n, m), and a pair field (the codomain of the discrete
gradient) is (2, n, m).  Every operation accepts extra leading batch axes so
an ensemble of chains can be pushed through in one call.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "LinearOperator",
    "Difference2D",
    "Grad2D",
    "Conv2D",
    "Identity",
    "apply_difference",
    "adjoint_difference",
    "apply_grad2d",
    "adjoint_grad2d",
    "convolve2d_periodic",
    "dft2",
    "idft2",
    "kernel_dft",
    "power_iteration_norm_sq",
]


def apply_difference(x):
    """Pairwise difference x2 - x1 of a 2D state (batched over leading axes)."""
    x = np.asarray(x, dtype=float)
    return x[..., 1] - x[..., 0]


def adjoint_difference(s):
    """Adjoint of apply_difference: s -> (-s, s)."""
    s = np.asarray(s, dtype=float)
    return np.stack([-s, s], axis=-1)


def apply_grad2d(x):
    """Anisotropic forward-difference gradient of an image.

    Returns a pair field p with p[0] the vertical differences (zero in the
    last row) and p[1] the horizontal differences (zero in the last column).
    """
    x = np.asarray(x, dtype=float)
    p = np.zeros(x.shape[:-2] + (2,) + x.shape[-2:], dtype=float)
    p[..., 0, :-1, :] = x[..., 1:, :] - x[..., :-1, :]
    p[..., 1, :, :-1] = x[..., :, 1:] - x[..., :, :-1]
    return p


def adjoint_grad2d(p):
    """Adjoint of apply_grad2d (a negative discrete divergence)."""
    p = np.asarray(p, dtype=float)
    p1 = p[..., 0, :, :]
    p2 = p[..., 1, :, :]
    out = np.zeros(p.shape[:-3] + p.shape[-2:], dtype=float)
    out[..., :-1, :] -= p1[..., :-1, :]
    out[..., 1:, :] += p1[..., :-1, :]
    out[..., :, :-1] -= p2[..., :, :-1]
    out[..., :, 1:] += p2[..., :, :-1]
    return out


def dft2(x):
    """Unnormalized 2D DFT over the trailing two axes."""
    return np.fft.fft2(np.asarray(x), axes=(-2, -1))


def idft2(X):
    """Inverse of dft2 (includes the 1/(nm) factor); returns the real part."""
    return np.fft.ifft2(np.asarray(X), axes=(-2, -1)).real


def _embed_kernel(kernel, shape):
    kernel = np.asarray(kernel, dtype=float)
    s, s2 = kernel.shape
    if s != s2 or s % 2 == 0:
        raise ValueError("kernel must be square with odd side length")
    n, m = shape
    if s > min(n, m):
        raise ValueError("kernel larger than image")
    pad = np.zeros((n, m), dtype=float)
    c = s // 2
    for a in range(s):
        for b in range(s):
            pad[(a - c) % n, (b - c) % m] = kernel[a, b]
    return pad


def kernel_dft(kernel, shape):
    """DFT of the kernel zero-padded to ``shape`` with its center at the origin."""
    return dft2(_embed_kernel(kernel, shape))


def convolve2d_periodic(x, kernel):
    """Circular convolution of an image with an odd-sized centered kernel."""
    x = np.asarray(x, dtype=float)
    khat = kernel_dft(kernel, x.shape[-2:])
    return idft2(dft2(x) * khat)


class LinearOperator:
    """apply/adjoint pair with a certified upper bound on the squared norm."""

    kind = "abstract"
    norm_sq_bound = None

    def apply(self, x):
        raise NotImplementedError

    def adjoint(self, y):
        raise NotImplementedError


class Difference2D(LinearOperator):
    """K(x1, x2) = x2 - x1 on 2D states; ||K||^2 = 2."""

    kind = "difference2d"
    in_shape = (2,)

    def __init__(self):
        self.norm_sq_bound = 2.0

    def apply(self, x):
        return apply_difference(x)

    def adjoint(self, s):
        return adjoint_difference(s)

    def random_domain_point(self, rng):
        return rng.standard_normal(2)

    def random_codomain_point(self, rng):
        return rng.standard_normal(())


class Grad2D(LinearOperator):
    """Forward-difference gradient on n x m images; ||K||^2 <= 8 classically."""

    kind = "grad2d"

    def __init__(self, shape):
        n, m = shape
        if n < 1 or m < 1:
            raise ValueError("image shape must be positive")
        self.in_shape = (n, m)
        self.norm_sq_bound = 8.0

    def apply(self, x):
        return apply_grad2d(x)

    def adjoint(self, p):
        return adjoint_grad2d(p)

    def random_domain_point(self, rng):
        return rng.standard_normal(self.in_shape)

    def random_codomain_point(self, rng):
        return rng.standard_normal((2,) + self.in_shape)


class Conv2D(LinearOperator):
    """Circular convolution with a fixed centered kernel.

    The exact squared operator norm of a circulant operator is the largest
    squared modulus of the kernel DFT, so the certified bound is tight.
    """

    kind = "conv2d"

    def __init__(self, kernel, shape):
        self.kernel = np.asarray(kernel, dtype=float)
        self.in_shape = tuple(shape)
        self.khat = kernel_dft(self.kernel, self.in_shape)
        self.norm_sq_bound = float(np.max(np.abs(self.khat) ** 2))

    def apply(self, x):
        return idft2(dft2(x) * self.khat)

    def adjoint(self, y):
        return idft2(dft2(y) * np.conj(self.khat))

    def random_domain_point(self, rng):
        return rng.standard_normal(self.in_shape)

    def random_codomain_point(self, rng):
        return rng.standard_normal(self.in_shape)


class Identity(LinearOperator):
    """Identity on d-dimensional states; used by scalar calibration models."""

    kind = "identity"

    def __init__(self, d=1):
        self.in_shape = (d,)
        self.norm_sq_bound = 1.0

    def apply(self, x):
        return np.asarray(x, dtype=float)

    def adjoint(self, y):
        return np.asarray(y, dtype=float)

    def random_domain_point(self, rng):
        return rng.standard_normal(self.in_shape)

    def random_codomain_point(self, rng):
        return rng.standard_normal(self.in_shape)


def power_iteration_norm_sq(op, iters=500, tol=1e-10, seed=0):
    """Estimate the largest eigenvalue of K*K by power iteration.

    Raises RuntimeError when the relative change between successive estimates
    is still above ``tol`` after ``iters`` iterations.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    v = op.random_domain_point(rng)
    v = v / np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = op.adjoint(op.apply(v))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        new_est = float(np.vdot(v, w).real)
        v = w / nw
        if est > 0.0 and abs(new_est - est) <= tol * abs(new_est):
            return new_est
        est = new_est
    raise RuntimeError(
        f"power iteration did not converge to rel tol {tol:g} in {iters} iterations"
    )
