"""Closed-form convergence-bound curves and regularity-constant bookkeeping.

Each bound function evaluates the right-hand side of one convergence
estimate for the averaged or final law of the chain, parameterized by the
model's regularity constants.  These are the dashed reference curves the
experiment driver writes next to empirical distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RegularityConstants",
    "constants_from_model",
    "phi",
    "kl_bound_general",
    "w2_bound_strong",
    "kl_bound_strong",
    "w2_bound_varying",
    "w2_bound_varying_curve",
]

_TAGS = ("lipschitz_F", "smooth_F", "strongly_convex_F")


@dataclass(frozen=True)
class RegularityConstants:
    """Problem constants entering the bounds.

    ``tag`` records which assumption set holds for F: Lipschitz (constant
    L_F), gradient-Lipschitz (L_grad_F), or additionally strongly convex
    (modulus m).  L_G is the Lipschitz constant of G and normK_sq an upper
    bound on the squared operator norm of K.
    """

    d: int
    L_G: float
    normK_sq: float
    tag: str
    L_F: float | None = None
    L_grad_F: float | None = None
    m: float = 0.0

    def __post_init__(self):
        if self.tag not in _TAGS:
            raise ValueError(f"unknown regularity tag {self.tag!r}")
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if self.L_G < 0 or self.normK_sq < 0 or self.m < 0:
            raise ValueError("constants must be nonnegative")
        if self.tag == "lipschitz_F" and self.L_F is None:
            raise ValueError("lipschitz_F requires L_F")
        if self.tag in ("smooth_F", "strongly_convex_F") and self.L_grad_F is None:
            raise ValueError(f"{self.tag} requires L_grad_F")
        if self.tag == "strongly_convex_F" and self.m <= 0:
            raise ValueError("strongly_convex_F requires m > 0")
        if self.m > 0 and self.L_grad_F is not None and self.m > self.L_grad_F * (1 + 1e-12):
            raise ValueError("strong convexity modulus exceeds gradient Lipschitz constant")

    @property
    def gk_term(self):
        """The recurring product L_G^2 ||K||^2."""
        return self.L_G**2 * self.normK_sq


def constants_from_model(model):
    """Read the regularity constants off a Model instance."""
    if model.smooth:
        m = model.F.m_strong
        tag = "strongly_convex_F" if m > 0 else "smooth_F"
        return RegularityConstants(
            d=model.d,
            L_G=model.L_G,
            normK_sq=model.norm_K_sq,
            tag=tag,
            L_grad_F=model.F.L_grad,
            m=m,
        )
    return RegularityConstants(
        d=model.d,
        L_G=model.L_G,
        normK_sq=model.norm_K_sq,
        tag="lipschitz_F",
        L_F=model.F.L_lipschitz,
    )


def phi(constants, tau):
    """Per-step F-discretization penalty.

    L_F sqrt(2 d tau) under the Lipschitz assumption, tau L_grad_F d under
    the smooth one.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if constants.tag == "lipschitz_F":
        return constants.L_F * float(np.sqrt(2.0 * constants.d * tau))
    return tau * constants.L_grad_F * constants.d


def kl_bound_general(constants, tau, n, N=0, W0_sq=0.0):
    """KL bound for the running average, constant step size.

    W0_sq is the squared W2 distance between the law at the start of the
    averaging window (after N burn-in iterations) and the target; N itself
    does not enter the arithmetic.  Value: W0_sq/(2 n tau) + phi(tau)
    + tau L_G^2 ||K||^2 / 2.
    """
    if n < 1:
        raise ValueError("window length must be positive")
    if W0_sq < 0:
        raise ValueError("W0_sq must be nonnegative")
    return W0_sq / (2.0 * n * tau) + phi(constants, tau) + 0.5 * tau * constants.gk_term


def _strong_caps(constants, variant):
    if constants.m <= 0:
        raise ValueError("strong-convexity bound requires m > 0")
    if variant == "prox":
        return constants.m / (2.0 * constants.L_grad_F**2 - constants.m**2)
    if variant == "grad":
        return 1.0 / constants.L_grad_F
    raise ValueError(f"unknown variant {variant!r}")


def _check_cap(tau, cap):
    if tau <= 0:
        raise ValueError("tau must be positive")
    if tau > cap * (1.0 + 1e-12):
        raise ValueError(f"step size {tau!r} exceeds the cap {cap!r}")


def w2_bound_strong(constants, tau, k, W0_sq, variant="prox"):
    """Squared-W2 bound after k iterations at constant step size.

    Geometric contraction of the initial distance plus a constant bias
    floor: contraction factor (1 - m tau/2) and floor (2/m) tau C for the
    proximal variant, (1 - m tau) and (tau/m) C for the gradient variant,
    with C = 2 L_grad_F d + L_G^2 ||K||^2.
    """
    _check_cap(tau, _strong_caps(constants, variant))
    if k < 0 or W0_sq < 0:
        raise ValueError("k and W0_sq must be nonnegative")
    C = 2.0 * constants.L_grad_F * constants.d + constants.gk_term
    if variant == "prox":
        return (1.0 - constants.m * tau / 2.0) ** k * W0_sq + (2.0 / constants.m) * tau * C
    return (1.0 - constants.m * tau) ** k * W0_sq + (tau / constants.m) * C


def kl_bound_strong(constants, tau, n, N=0, W0_sq=0.0):
    """KL bound for the running average under strong convexity.

    (1 - m tau/2) W0_sq / (2 n tau) + tau (L_grad_F d + L_G^2 ||K||^2 / 2);
    W0_sq has the same meaning as in kl_bound_general.  Setting m = 0 in
    the formula recovers kl_bound_general for smooth F.
    """
    if n < 1:
        raise ValueError("window length must be positive")
    if W0_sq < 0:
        raise ValueError("W0_sq must be nonnegative")
    if constants.tag == "lipschitz_F":
        raise ValueError("strong-convexity bound requires smooth F")
    if constants.m > 0:
        _check_cap(tau, _strong_caps(constants, "prox"))
    elif tau <= 0:
        raise ValueError("tau must be positive")
    contraction = 1.0 - constants.m * tau / 2.0
    bias = tau * (constants.L_grad_F * constants.d + 0.5 * constants.gk_term)
    return contraction * W0_sq / (2.0 * n * tau) + bias


def w2_bound_varying(constants, taus, k, W0_sq, variant="prox"):
    """Squared-W2 bound after k iterations for a step-size sequence.

    ``taus`` lists tau_1 .. tau_{k+1}.  Value: prod_{j=2}^{k+1}(1 - c tau_j)
    W0_sq + C sum_{j=2}^{k+1} tau_j^2 prod_{i=j+1}^{k+1}(1 - c tau_i), with
    c = m/2 (prox) or m (grad) and C = 2 L_grad_F d + L_G^2 ||K||^2.  At
    k=0 the product and sum are empty and the bound is W0_sq.  Unlike the
    constant-step form, the geometric sum here is kept exact rather than
    relaxed to its limit.
    """
    cap = _strong_caps(constants, variant)
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1 or taus.shape[0] < k + 1:
        raise ValueError("need step sizes tau_1 .. tau_{k+1}")
    if k < 0 or W0_sq < 0:
        raise ValueError("k and W0_sq must be nonnegative")
    for t in taus[: k + 1]:
        _check_cap(t, cap)
    c = constants.m / 2.0 if variant == "prox" else constants.m
    C = 2.0 * constants.L_grad_F * constants.d + constants.gk_term
    # suffix products over j = k+1 down to 2 (1-indexed; taus[j-1] = tau_j)
    total = 0.0
    prod = 1.0
    for j in range(k + 1, 1, -1):
        total += taus[j - 1] ** 2 * prod
        prod *= 1.0 - c * taus[j - 1]
    return prod * W0_sq + C * total


def w2_bound_varying_curve(constants, taus, W0_sq, variant="prox"):
    """w2_bound_varying at every k = 0 .. len(taus)-1 in one forward pass.

    Uses the recursion B_{k+1} = (1 - c tau_{k+2}) B_k + C tau_{k+2}^2,
    which the product/sum form satisfies exactly.
    """
    cap = _strong_caps(constants, variant)
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1 or taus.shape[0] < 1:
        raise ValueError("need at least tau_1")
    if W0_sq < 0:
        raise ValueError("W0_sq must be nonnegative")
    if np.any(taus <= 0) or np.any(taus > cap * (1.0 + 1e-12)):
        raise ValueError("step sizes must be positive and within the cap")
    c = constants.m / 2.0 if variant == "prox" else constants.m
    C = 2.0 * constants.L_grad_F * constants.d + constants.gk_term
    out = np.empty(taus.shape[0])
    out[0] = W0_sq
    for k in range(1, taus.shape[0]):
        out[k] = (1.0 - c * taus[k]) * out[k - 1] + C * taus[k] ** 2
    return out
