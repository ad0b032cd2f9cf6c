"""Langevin-type samplers for targets exp(-F(x) - G(Kx)).

Two non-smooth-G algorithms alternate a subgradient step on G o K with
either a proximal or a gradient step on F; alongside them live three
comparison methods (plain subgradient, Moreau-envelope smoothing, and a
proximal MALA) and a Metropolis-corrected variant used as an exact
reference chain.  The ensemble runner drives any of them over a batch of
independent chains with one shared counter-based RNG stream.

All step functions broadcast over leading batch axes.  Passing ``rng=None``
to the unadjusted steps suppresses the noise term, which turns the sampler
into its deterministic optimization counterpart (handy for descent checks).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimation import MomentAccumulator, validate_weight_schedule
from .potentials import (
    eval_U,
    grad_F,
    prox_F,
    prox_FGK_pd,
    prox_GK_pd,
    subgrad_F,
    subgrad_G_select,
)

__all__ = [
    "ALGORITHMS",
    "StepSchedule",
    "SamplerConfig",
    "EnsembleResult",
    "prox_sub_step",
    "grad_sub_step",
    "sub_step",
    "myula_step",
    "pmala_step",
    "mh_grad_sub_step",
    "step_size_cap",
    "select_eps_params",
    "check_step_caps",
    "CAP_INEQUALITIES",
    "run_ensemble",
]

ALGORITHMS = ("prox_sub", "grad_sub", "sub", "myula", "pmala", "mh_grad_sub")


@dataclass
class StepSchedule:
    """Step sizes tau_k (1-indexed) and averaging weights lambda_k.

    Kinds: "constant" (tau_k = tau1), "decreasing" (tau_{j+1} =
    tau_j/(1 + m tau_j/2), which satisfies tau_j/(1+m tau_j/2) <=
    tau_{j+1} <= tau_j term by term), and "explicit" (a given list).  The
    subgradient step of the very first iteration, nominally tau_0, is taken
    equal to tau_1.  Weights default to all ones; when given, the ratio
    lambda_k / tau_{k+1} must be nonincreasing in k.
    """

    kind: str = "constant"
    tau1: float = 1e-3
    m: float = 0.0
    taus: tuple | None = None
    weights: tuple | None = None
    _cache: list = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("constant", "decreasing", "explicit"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "explicit":
            if not self.taus:
                raise ValueError("explicit schedule needs a step-size list")
            self.taus = tuple(float(t) for t in self.taus)
            if any(t <= 0 for t in self.taus):
                raise ValueError("step sizes must be positive")
            self.tau1 = self.taus[0]
        else:
            if self.tau1 <= 0:
                raise ValueError("tau1 must be positive")
            if self.m < 0:
                raise ValueError("m must be nonnegative")
        self._cache = [float(self.tau1)]
        if self.weights is not None:
            self.weights = tuple(float(w) for w in self.weights)
            taus_next = [self.tau(j + 2) for j in range(len(self.weights))]
            validate_weight_schedule(self.weights, taus_next)

    def tau(self, k):
        """tau_k for k >= 1; tau(0) is defined as tau_1."""
        if k <= 1:
            return self._cache[0]
        if self.kind == "constant":
            return self._cache[0]
        if self.kind == "explicit":
            if k > len(self.taus):
                raise IndexError(f"explicit schedule has only {len(self.taus)} steps")
            return self.taus[k - 1]
        while len(self._cache) < k:
            t = self._cache[-1]
            self._cache.append(t / (1.0 + self.m * t / 2.0))
        return self._cache[k - 1]

    def max_tau(self, total):
        """Largest step size used over iterations 1..total."""
        if self.kind == "explicit":
            return max(self.taus[:total]) if total > 0 else self.tau1
        return self.tau1

    def weight(self, k):
        """Averaging weight lambda_k for k >= 1."""
        if self.weights is None:
            return 1.0
        if k > len(self.weights):
            raise IndexError(f"only {len(self.weights)} weights provided")
        return self.weights[k - 1]


@dataclass
class SamplerConfig:
    """One sampling run: algorithm, schedule, sizes, and seed."""

    algorithm: str
    schedule: StepSchedule
    n_samples: int
    burn_in: int = 0
    chains: int = 1
    master_seed: int = 0
    theta: float | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.n_samples < 0 or self.burn_in < 0:
            raise ValueError("sample counts must be nonnegative")
        if self.chains < 1:
            raise ValueError("need at least one chain")
        if self.algorithm == "myula" and (self.theta is None or self.theta <= 0):
            raise ValueError("myula requires theta > 0")


@dataclass
class EnsembleResult:
    """Output of run_ensemble."""

    final_state: np.ndarray
    snapshots: dict
    n_iterations: int
    acceptance_rate: float | None = None
    moments: MomentAccumulator | None = None


def _noise(rng, shape, tau):
    if rng is None:
        return 0.0
    return np.sqrt(2.0 * tau) * rng.standard_normal(shape)


def _sumsq_state(a, state_ndim):
    return np.sum(a * a, axis=tuple(range(-state_ndim, 0)))


def _expand(mask, state_ndim):
    return np.reshape(mask, np.shape(mask) + (1,) * state_ndim)


def prox_sub_step(model, x, tau_k, tau_next, rng):
    """Subgradient step on G o K, then proximal step on F, then noise.

    The subgradient step uses tau_k, the prox and the noise use tau_next;
    threading the same value into consecutive calls reproduces the
    two-step-size scheme.
    """
    x = np.asarray(x, dtype=float)
    y = subgrad_G_select(model.G, model.K.apply(x))
    w = x - tau_k * model.K.adjoint(y)
    z = prox_F(model, tau_next, w)
    return z + _noise(rng, x.shape, tau_next)


def grad_sub_step(model, x, tau_k, tau_next, rng):
    """Subgradient step on G o K, then explicit gradient step on F."""
    x = np.asarray(x, dtype=float)
    y = subgrad_G_select(model.G, model.K.apply(x))
    xh = x - tau_k * model.K.adjoint(y)
    z = xh - tau_next * grad_F(model, xh)
    return z + _noise(rng, x.shape, tau_next)


def sub_step(model, x, tau, rng):
    """Single subgradient step on the whole potential."""
    x = np.asarray(x, dtype=float)
    g = subgrad_F(model, x) + model.K.adjoint(
        subgrad_G_select(model.G, model.K.apply(x))
    )
    return x - tau * g + _noise(rng, x.shape, tau)


def myula_step(model, x, tau, theta, rng, inner_tol=1e-4):
    """Langevin step on F plus the theta-Moreau envelope of G o K."""
    x = np.asarray(x, dtype=float)
    p = prox_GK_pd(model.G, model.K, theta, x, tol=inner_tol)
    z = (1.0 - tau / theta) * x - tau * grad_F(model, x) + (tau / theta) * p
    return z + _noise(rng, x.shape, tau)


def _mh_accept(model, x, prop, mean_fwd, mean_rev, tau, rng, state_ndim):
    logq_fwd = -_sumsq_state(prop - mean_fwd, state_ndim) / (4.0 * tau)
    logq_rev = -_sumsq_state(x - mean_rev, state_ndim) / (4.0 * tau)
    log_alpha = (eval_U(model, x) - eval_U(model, prop)) + (logq_rev - logq_fwd)
    u = rng.uniform(size=np.shape(log_alpha))
    accept = np.log(u) < log_alpha
    new = np.where(_expand(accept, state_ndim), prop, x)
    return new, accept


def pmala_step(model, x, tau, rng, inner_tol=1e-4):
    """Proposal prox of tau (F + G o K) plus noise, with exact accept/reject.

    Proposal density q(x'|x) = N(x'; prox(x), 2 tau I); the ratio is
    evaluated in the log domain.  Returns (state, accepted mask).
    """
    x = np.asarray(x, dtype=float)
    nd = len(model.state_shape)
    px = prox_FGK_pd(model, tau, x, tol=inner_tol)
    prop = px + np.sqrt(2.0 * tau) * rng.standard_normal(x.shape)
    pprop = prox_FGK_pd(model, tau, prop, tol=inner_tol)
    return _mh_accept(model, x, prop, px, pprop, tau, rng, nd)


def _grad_sub_drift(model, x, tau):
    y = subgrad_G_select(model.G, model.K.apply(x))
    xh = x - tau * model.K.adjoint(y)
    return xh - tau * grad_F(model, xh)


def mh_grad_sub_step(model, x, tau, rng):
    """Gradient-subgradient proposal with an exact accept/reject step.

    The deterministic two-step drift serves as proposal mean with
    covariance 2 tau I; the same tau is used for both sub-steps.  The
    correction makes the chain reversible for the target regardless of tau.
    """
    x = np.asarray(x, dtype=float)
    nd = len(model.state_shape)
    dx = _grad_sub_drift(model, x, tau)
    prop = dx + np.sqrt(2.0 * tau) * rng.standard_normal(x.shape)
    dprop = _grad_sub_drift(model, prop, tau)
    return _mh_accept(model, x, prop, dx, dprop, tau, rng, nd)


def step_size_cap(model, algorithm, theta=None):
    """Largest admissible constant step size for the algorithm on this model.

    Proximal variant: m/(2 L_grad_F^2 - m^2) (requires strong convexity);
    gradient variant: 1/L_grad_F; Moreau smoothing: theta/(theta L_grad_F
    + 1).  The plain subgradient and Metropolis-corrected chains carry no
    step-size restriction and report infinity.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if algorithm in ("sub", "pmala", "mh_grad_sub"):
        return float("inf")
    if not model.smooth:
        raise ValueError(f"{algorithm} requires a smooth F term")
    L = model.F.L_grad
    if algorithm == "grad_sub":
        return 1.0 / L
    if algorithm == "myula":
        if theta is None or theta <= 0:
            raise ValueError("myula cap requires theta > 0")
        return theta / (theta * L + 1.0)
    m = model.F.m_strong
    if m <= 0:
        raise ValueError("prox_sub cap requires strong convexity (m > 0)")
    return m / (2.0 * L**2 - m**2)


def select_eps_params(eps, model, variant="prox", W0_sq=0.0):
    """Step size and iteration count guaranteeing accuracy eps.

    Returns (tau_eps, n_eps) satisfying the accuracy recipe of the chosen
    variant, with tau_eps set to 0.9 times its admissible cap.  Variants
    "prox" and "grad" drive the squared W2 distance of the final iterate
    below eps; "kl_general" and "kl_strong" drive the KL divergence of the
    running average below eps.  W0_sq is the squared W2 distance of the
    initial law from the target.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if W0_sq < 0:
        raise ValueError("W0_sq must be nonnegative")
    consts_needed_smooth = variant in ("prox", "grad", "kl_strong")
    if consts_needed_smooth and not model.smooth:
        raise ValueError(f"variant {variant!r} requires a smooth F term")
    gk = model.L_G**2 * model.norm_K_sq
    d = model.d
    if variant in ("prox", "grad"):
        L = model.F.L_grad
        m = model.F.m_strong
        if m <= 0:
            raise ValueError("strong convexity (m > 0) required")
        C = 2.0 * L * d + gk
        if variant == "prox":
            cap = min(m * eps / (4.0 * C), m / (2.0 * L**2 - m**2))
            tau = 0.9 * cap
            contraction = 1.0 - m * tau / 2.0
        else:
            cap = min(m * eps / (2.0 * C), 1.0 / L)
            tau = 0.9 * cap
            contraction = 1.0 - m * tau
        if W0_sq == 0.0 or eps >= 2.0 * W0_sq:
            return tau, 1
        n = int(np.floor(np.log(eps / (2.0 * W0_sq)) / np.log(contraction))) + 1
        return tau, max(n, 1)
    if variant == "kl_general":
        if model.smooth:
            cap = eps / (2.0 * model.F.L_grad * d + gk)
        else:
            # solve L_F sqrt(2 d t) + (gk/2) t = eps/2 for t
            a = model.F.L_lipschitz * np.sqrt(2.0 * d)
            if gk == 0.0:
                cap = (eps / (2.0 * a)) ** 2
            else:
                root = (-a + np.sqrt(a**2 + gk * eps)) / gk
                cap = root**2
        tau = 0.9 * cap
        if W0_sq == 0.0:
            return tau, 1
        return tau, max(int(np.floor(W0_sq / (eps * tau))) + 1, 1)
    if variant == "kl_strong":
        L = model.F.L_grad
        m = model.F.m_strong
        if m <= 0:
            raise ValueError("strong convexity (m > 0) required")
        cap = min(0.5 * eps / (L * d + 0.5 * gk), m / (2.0 * L**2 - m**2))
        tau = 0.9 * cap
        if W0_sq == 0.0:
            return tau, 1
        n = int(np.floor((1.0 - m * tau / 2.0) * W0_sq / (eps * tau))) + 1
        return tau, max(n, 1)
    raise ValueError(f"unknown variant {variant!r}")


CAP_INEQUALITIES = {
    "prox_sub": "tau <= m/(2*L_grad_F^2 - m^2)",
    "grad_sub": "tau <= 1/L_grad_F",
    "myula": "tau <= theta/(theta*L_grad_F + 1)",
}


def check_step_caps(model, config):
    """Raise ValueError naming the violated inequality if the schedule
    exceeds the algorithm's step-size cap on this model."""
    total = config.burn_in + config.n_samples
    tmax = config.schedule.max_tau(total)
    alg = config.algorithm
    if alg == "grad_sub":
        cap = step_size_cap(model, "grad_sub")
    elif alg == "myula":
        cap = step_size_cap(model, "myula", config.theta)
    elif alg == "prox_sub" and model.smooth and model.F.m_strong > 0:
        cap = step_size_cap(model, "prox_sub")
    else:
        return
    if tmax > cap * (1.0 + 1e-12):
        raise ValueError(
            f"step size {tmax!r} for {alg} violates {CAP_INEQUALITIES[alg]} "
            f"(cap {cap!r} on this model)"
        )


def run_ensemble(
    model,
    config,
    snapshot_iters=(),
    observer=None,
    collect_moments=False,
    inner_tol=1e-4,
):
    """Run a batch of independent chains and collect the requested output.

    ``snapshot_iters`` asks for copies of the full chain ensemble after the
    listed iterations (0 gives the initial state); ``observer(k, states)``
    is called after every post-burn-in iteration with the current ensemble;
    ``collect_moments`` feeds every post-burn-in state into a
    MomentAccumulator.  Output is deterministic in ``config.master_seed``.
    """
    check_step_caps(model, config)
    sched = config.schedule
    total = config.burn_in + config.n_samples
    snapshot_set = set(int(k) for k in snapshot_iters)
    if any(k < 0 or k > total for k in snapshot_set):
        raise ValueError("snapshot iterations outside the run")
    rng = np.random.Generator(np.random.Philox(config.master_seed))
    x = np.broadcast_to(model.initial_state(), (config.chains,) + model.state_shape).copy()
    snapshots = {}
    if 0 in snapshot_set:
        snapshots[0] = x.copy()
    moments = MomentAccumulator(model.state_shape) if collect_moments else None
    n_accepted = 0
    n_proposed = 0
    mh = config.algorithm in ("pmala", "mh_grad_sub")
    for k in range(1, total + 1):
        tau_prev = sched.tau(k - 1)
        tau_cur = sched.tau(k)
        if config.algorithm == "prox_sub":
            x = prox_sub_step(model, x, tau_prev, tau_cur, rng)
        elif config.algorithm == "grad_sub":
            x = grad_sub_step(model, x, tau_prev, tau_cur, rng)
        elif config.algorithm == "sub":
            x = sub_step(model, x, tau_cur, rng)
        elif config.algorithm == "myula":
            x = myula_step(model, x, tau_cur, config.theta, rng, inner_tol)
        elif config.algorithm == "pmala":
            x, acc = pmala_step(model, x, tau_cur, rng, inner_tol)
            n_accepted += int(np.count_nonzero(acc))
            n_proposed += config.chains
        else:
            x, acc = mh_grad_sub_step(model, x, tau_cur, rng)
            n_accepted += int(np.count_nonzero(acc))
            n_proposed += config.chains
        if k > config.burn_in:
            if moments is not None:
                moments.add_batch(x)
            if observer is not None:
                observer(k, x)
        if k in snapshot_set:
            snapshots[k] = x.copy()
    rate = (n_accepted / n_proposed) if (mh and n_proposed) else None
    return EnsembleResult(
        final_state=x,
        snapshots=snapshots,
        n_iterations=total,
        acceptance_rate=rate,
        moments=moments,
    )
