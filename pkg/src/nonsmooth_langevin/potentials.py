"""Potential terms U(x) = F(x) + G(Kx) and their proximal machinery.

F is either a quadratic data term (optionally composed with a convolution)
or a scaled l1 distance; G is a scaled l1 norm applied to the output of the
model's linear operator.  All evaluations broadcast over leading batch axes
so whole chain ensembles can be processed at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linops import LinearOperator, dft2, idft2, kernel_dft

__all__ = [
    "SmoothF",
    "NonsmoothF",
    "GSpec",
    "Model",
    "ProxSolverError",
    "eval_U",
    "grad_F",
    "subgrad_F",
    "prox_F",
    "subgrad_G_select",
    "prox_GK_pd",
    "prox_FGK_pd",
    "moreau_value",
    "moreau_grad",
]


def _sum_trailing(a, ndim):
    """Sum over the last ``ndim`` axes (no-op for ndim=0)."""
    if ndim == 0:
        return a
    return np.sum(a, axis=tuple(range(-ndim, 0)))


class ProxSolverError(RuntimeError):
    """Inner primal-dual solver failed to reach its tolerance.

    Carries the last iterate so callers can inspect how far the solve got.
    """

    def __init__(self, message, last_iterate):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass
class SmoothF:
    """Quadratic data term (1/(2 sigma^2)) ||A x - y||^2.

    kind "l2_shift" uses A = identity, kind "conv_l2" uses circular
    convolution with ``kernel``.  Exposes the gradient Lipschitz constant
    and the strong-convexity modulus (zero is possible for conv_l2 when the
    kernel DFT has zeros).
    """

    kind: str
    y: np.ndarray
    sigma: float
    kernel: np.ndarray | None = None
    _khat: np.ndarray | None = field(default=None, repr=False)
    _yhat: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("l2_shift", "conv_l2"):
            raise ValueError(f"unknown SmoothF kind {self.kind!r}")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        self.y = np.asarray(self.y, dtype=float)
        if self.kind == "conv_l2":
            if self.kernel is None:
                raise ValueError("conv_l2 requires a kernel")
            self.kernel = np.asarray(self.kernel, dtype=float)
            self._khat = kernel_dft(self.kernel, self.y.shape)
            self._yhat = dft2(self.y)

    @property
    def state_ndim(self):
        return self.y.ndim

    @property
    def L_grad(self):
        if self.kind == "l2_shift":
            return 1.0 / self.sigma**2
        return float(np.max(np.abs(self._khat) ** 2)) / self.sigma**2

    @property
    def m_strong(self):
        if self.kind == "l2_shift":
            return 1.0 / self.sigma**2
        return float(np.min(np.abs(self._khat) ** 2)) / self.sigma**2

    def value(self, x):
        if self.kind == "l2_shift":
            r = x - self.y
        else:
            r = idft2(dft2(x) * self._khat) - self.y
        return _sum_trailing(r * r, self.state_ndim) / (2.0 * self.sigma**2)

    def grad(self, x):
        if self.kind == "l2_shift":
            return (x - self.y) / self.sigma**2
        resid_hat = dft2(x) * self._khat - self._yhat
        return idft2(resid_hat * np.conj(self._khat)) / self.sigma**2

    def prox(self, tau, x):
        if self.kind == "l2_shift":
            a = tau / self.sigma**2
            return (x + a * self.y) / (1.0 + a)
        a = tau / self.sigma**2
        denom = 1.0 + a * np.abs(self._khat) ** 2
        if np.min(np.abs(denom)) < 1e-14:
            raise ValueError("singular denominator in conv_l2 prox; decrease tau")
        zhat = (dft2(x) + a * np.conj(self._khat) * self._yhat) / denom
        return idft2(zhat)


@dataclass
class NonsmoothF:
    """Scaled l1 data term (1/b) ||x - y||_1 with the soft-threshold prox."""

    y: np.ndarray
    b: float

    def __post_init__(self):
        if self.b <= 0:
            raise ValueError("b must be positive")
        self.y = np.asarray(self.y, dtype=float)

    @property
    def state_ndim(self):
        return self.y.ndim

    @property
    def L_lipschitz(self):
        # |F(x)-F(z)| <= (1/b)||x-z||_1 <= (sqrt(d)/b)||x-z||_2
        return float(np.sqrt(self.y.size)) / self.b

    def value(self, x):
        return _sum_trailing(np.abs(x - self.y), self.state_ndim) / self.b

    def subgrad(self, x):
        return np.sign(x - self.y) / self.b

    def prox(self, tau, x):
        r = x - self.y
        return self.y + np.sign(r) * np.maximum(np.abs(r) - tau / self.b, 0.0)


@dataclass
class GSpec:
    """Scaled l1 penalty G(p) = lam * ||p||_1 on the operator output.

    kind "scaled_abs" acts on a scalar (the 2D difference), "aniso_tv_l1"
    on a pair field of forward differences.
    """

    kind: str
    lam: float

    def __post_init__(self):
        if self.kind not in ("scaled_abs", "aniso_tv_l1"):
            raise ValueError(f"unknown GSpec kind {self.kind!r}")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")

    def value(self, p, reduce_ndim):
        """lam * l1 norm of p, summing over the last ``reduce_ndim`` axes.

        The caller supplies the number of codomain axes since ``p`` may
        carry arbitrary leading batch axes.
        """
        return self.lam * _sum_trailing(np.abs(p), reduce_ndim)

    def subgrad_select(self, p):
        return self.lam * np.sign(p)


@dataclass
class Model:
    """Bundle of F, G, and K defining the target pi propto exp(-F - G o K)."""

    F: SmoothF | NonsmoothF
    G: GSpec
    K: LinearOperator

    def __post_init__(self):
        if tuple(self.K.in_shape) != self.F.y.shape:
            raise ValueError("operator domain and data shape disagree")

    @property
    def state_shape(self):
        return tuple(self.K.in_shape)

    @property
    def d(self):
        return int(np.prod(self.state_shape))

    @property
    def smooth(self):
        return isinstance(self.F, SmoothF)

    @property
    def L_G(self):
        """Lipschitz constant of G on the operator codomain (2-norm).

        For lam * l1 on a codomain of dimension p this is lam * sqrt(p).
        """
        p = self.K.apply(np.zeros(self.state_shape))
        return self.G.lam * float(np.sqrt(np.size(p)))

    @property
    def norm_K_sq(self):
        return float(self.K.norm_sq_bound)

    def initial_state(self):
        """Default chain start: point mass at the data."""
        return np.array(self.F.y, dtype=float, copy=True)


def _codomain_ndim(K, x_ndim, p_ndim):
    """Number of codomain axes of K's output given a batched input."""
    return p_ndim - x_ndim + len(K.in_shape)


def eval_U(model, x):
    """Potential F(x) + G(Kx), batched over leading axes."""
    x = np.asarray(x, dtype=float)
    p = model.K.apply(x)
    return model.F.value(x) + model.G.value(p, _codomain_ndim(model.K, x.ndim, p.ndim))


def grad_F(model, x):
    if not model.smooth:
        raise TypeError("grad_F requires a smooth F term")
    return model.F.grad(np.asarray(x, dtype=float))


def subgrad_F(model, x):
    """A subgradient of F (the gradient when F is smooth)."""
    x = np.asarray(x, dtype=float)
    if model.smooth:
        return model.F.grad(x)
    return model.F.subgrad(x)


def prox_F(model, tau, x):
    if tau <= 0:
        raise ValueError("tau must be positive")
    return model.F.prox(tau, np.asarray(x, dtype=float))


def subgrad_G_select(g, p):
    """The fixed measurable selection lam*sign(p), zero at zero entries."""
    return g.subgrad_select(np.asarray(p, dtype=float))


def _pd_steps(K):
    normK = float(np.sqrt(K.norm_sq_bound))
    if normK == 0.0:
        return 1.0, 1.0
    s = 0.95 / normK
    return s, s


def prox_GK_pd(g, K, theta, x, tol=1e-4, max_iters=10000):
    """prox of theta*(G o K) by primal-dual iteration.

    Runs Chambolle-Pock on min_z ||z - x||^2 / (2 theta) + G(Kz) and stops
    when consecutive primal iterates differ by less than ``tol`` in max
    norm.  For batched input the stopping rule applies to the whole batch
    jointly.  Raises ProxSolverError (carrying the last iterate) when
    ``max_iters`` is exhausted.
    """
    if theta <= 0 or tol <= 0:
        raise ValueError("theta and tol must be positive")
    x = np.asarray(x, dtype=float)
    if g.lam == 0.0:
        return x.copy()
    sigma_pd, tau_pd = _pd_steps(K)
    z = x.copy()
    zbar = x.copy()
    q = np.zeros_like(K.apply(x))
    scale = tau_pd / theta
    for _ in range(max_iters):
        q = np.clip(q + sigma_pd * K.apply(zbar), -g.lam, g.lam)
        z_new = (z - tau_pd * K.adjoint(q) + scale * x) / (1.0 + scale)
        diff = float(np.max(np.abs(z_new - z)))
        zbar = 2.0 * z_new - z
        z = z_new
        if diff < tol:
            return z
    raise ProxSolverError(
        f"primal-dual prox of G o K did not reach tol {tol:g} in {max_iters} iterations",
        z,
    )


def prox_FGK_pd(model, tau, x, tol=1e-4, max_iters=10000):
    """prox of tau*(F + G o K) by primal-dual iteration.

    F is folded into the primal step: prox of s*(F + ||.-x||^2/(2 tau)) at v
    equals prox of s'F at the weighted average of v and x with
    s' = s tau / (s + tau).  Stopping rule and failure mode are the same as
    in prox_GK_pd.
    """
    if tau <= 0 or tol <= 0:
        raise ValueError("tau and tol must be positive")
    x = np.asarray(x, dtype=float)
    if model.G.lam == 0.0:
        return prox_F(model, tau, x)
    K = model.K
    sigma_pd, tau_pd = _pd_steps(K)
    s_fold = tau_pd * tau / (tau_pd + tau)
    z = x.copy()
    zbar = x.copy()
    q = np.zeros_like(K.apply(x))
    for _ in range(max_iters):
        q = np.clip(q + sigma_pd * K.apply(zbar), -model.G.lam, model.G.lam)
        v = z - tau_pd * K.adjoint(q)
        w = (tau * v + tau_pd * x) / (tau_pd + tau)
        z_new = model.F.prox(s_fold, w)
        diff = float(np.max(np.abs(z_new - z)))
        zbar = 2.0 * z_new - z
        z = z_new
        if diff < tol:
            return z
    raise ProxSolverError(
        f"primal-dual prox of F + G o K did not reach tol {tol:g} in {max_iters} iterations",
        z,
    )


def moreau_value(g, K, theta, x, tol=1e-4, max_iters=10000):
    """Moreau envelope value of G o K at smoothing theta."""
    x = np.asarray(x, dtype=float)
    z = prox_GK_pd(g, K, theta, x, tol=tol, max_iters=max_iters)
    quad = _sum_trailing((z - x) ** 2, len(K.in_shape)) / (2.0 * theta)
    p = K.apply(z)
    return quad + g.value(p, _codomain_ndim(K, z.ndim, p.ndim))


def moreau_grad(g, K, theta, x, tol=1e-4, max_iters=10000):
    """Moreau envelope gradient (x - prox)/theta."""
    x = np.asarray(x, dtype=float)
    z = prox_GK_pd(g, K, theta, x, tol=tol, max_iters=max_iters)
    return (x - z) / theta
