"""Config-driven experiment runner.

A single JSON document describes an experiment: the target model, the
samplers to run on it, the iteration and snapshot schedule, and the
output directory.  ``run_experiment`` validates every step-size cap
before any sampling starts, runs each sampler, and writes

* ``curves.csv`` with columns ``iter, sampler, metric, value,
  curve_kind``: empirical distances between the sampler output and the
  discretized target, next to the matching theoretical bound curves;
* ``summary.json``: model constants, caps, seeds, acceptance rates,
  wall-clock seconds per 1000 iterations, and an echo of the parsed
  config;
* for the imaging experiments, posterior mean and variance images (PGM
  plus full-precision CSV sidecars).

Unknown config keys are rejected at every level.  With a fixed config,
curves.csv is byte-identical across reruns.
"""

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .bounds import (
    constants_from_model,
    kl_bound_general,
    kl_bound_strong,
    w2_bound_strong,
    w2_bound_varying_curve,
)
from .estimation import DiscreteDistribution, Grid2D, histogram
from .images import (
    gaussian_kernel,
    make_synthetic_data,
    phantom_image,
    read_image_pgm,
    write_image_pgm,
)
from .linops import Difference2D, Grad2D, Identity
from .metrics import discretize_target, kl_discrete, tv_discrete, w2_exact
from .potentials import GSpec, Model, NonsmoothF, SmoothF
from .samplers import (
    ALGORITHMS,
    CAP_INEQUALITIES,
    SamplerConfig,
    StepSchedule,
    check_step_caps,
    run_ensemble,
    step_size_cap,
)

__all__ = [
    "SamplerSpec",
    "ExperimentConfig",
    "config_from_dict",
    "load_config",
    "build_model",
    "run_experiment",
    "preset_names",
    "preset_text",
    "main",
]

EXPERIMENTS = ("sample2d_tvl2", "sample2d_tvl1", "denoise", "deconv", "ar1_oracle")
CURVE_COLUMNS = ("iter", "sampler", "metric", "value", "curve_kind")

_2D = ("sample2d_tvl2", "sample2d_tvl1")
_IMAGING = ("denoise", "deconv")

_MODEL_DEFAULTS = {
    "sample2d_tvl2": {"sigma": 1.0, "lam": 5.0, "y": [-1.0, 1.0]},
    "sample2d_tvl1": {"b": 1.0, "lam": 5.0, "y": [-1.0, 1.0]},
    "denoise": {"sigma": 0.05, "lam": 30.0, "size": 64, "image": None, "data_seed": 0},
    "deconv": {
        "sigma": 0.01,
        "lam": 20.0,
        "size": 64,
        "image": None,
        "data_seed": 0,
        "kernel_size": 5,
        "kernel_std": 1.0,
    },
    "ar1_oracle": {},
}

_ALLOWED_METRICS = {
    "sample2d_tvl2": ("w2", "kl", "tv"),
    "sample2d_tvl1": ("w2", "kl", "tv"),
    "denoise": (),
    "deconv": (),
    "ar1_oracle": ("variance",),
}

# Algorithms needing gradients of F cannot run on an l1 data term.
_NEEDS_SMOOTH_F = ("grad_sub", "myula", "mh_grad_sub")

# Spacing between derived per-sampler seeds; any odd constant works, a
# prime keeps unrelated configs from colliding by accident.
_SEED_STRIDE = 7919


@dataclass(frozen=True)
class SamplerSpec:
    """One sampler entry of a config: algorithm, step size, options."""

    algorithm: str
    tau: float
    label: str
    schedule: str = "constant"
    theta: float | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description.

    ``snapshots`` is None when the run should pick a default log-spaced
    schedule; ``grid`` is set only for the 2D experiments; ``model_params``
    holds the per-experiment model settings with defaults filled in.
    """

    experiment: str
    samplers: tuple
    n_iterations: int
    output_dir: str = "results"
    seed: int = 0
    burn_in: int = 0
    chains: int = 1
    snapshots: tuple | None = None
    grid: Grid2D | None = None
    metrics: tuple = ()
    model_params: dict = field(default_factory=dict)

    def to_dict(self):
        """JSON-ready echo of the parsed config, defaults included."""
        d = {
            "experiment": self.experiment,
            "output_dir": self.output_dir,
            "seed": self.seed,
            "n_iterations": self.n_iterations,
            "burn_in": self.burn_in,
            "chains": self.chains,
            "snapshots": list(self.snapshots) if self.snapshots is not None else None,
            "metrics": list(self.metrics),
            "model": dict(self.model_params),
            "samplers": [
                {
                    "algorithm": s.algorithm,
                    "tau": s.tau,
                    "label": s.label,
                    "schedule": s.schedule,
                    "theta": s.theta,
                }
                for s in self.samplers
            ],
        }
        if self.grid is not None:
            d["grid"] = {
                "x_range": list(self.grid.x_range),
                "y_range": list(self.grid.y_range),
                "bins": [self.grid.bins_x, self.grid.bins_y],
            }
        return d


def _check_keys(mapping, allowed, where):
    if not isinstance(mapping, dict):
        raise ValueError(f"{where} must be a JSON object")
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        names = ", ".join(repr(k) for k in unknown)
        raise ValueError(f"unknown key(s) {names} in {where}")


def _as_int(value, where, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{where} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ValueError(f"{where} must be >= {minimum}, got {value}")
    return value


def _as_float(value, where, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{where} must be a number, got {value!r}")
    value = float(value)
    if positive and value <= 0:
        raise ValueError(f"{where} must be positive, got {value}")
    return value


def _parse_grid(raw):
    _check_keys(raw, {"x_range", "y_range", "bins"}, "grid")
    def pair(key, default):
        v = raw.get(key, default)
        if not (isinstance(v, (list, tuple)) and len(v) == 2):
            raise ValueError(f"grid.{key} must be a pair")
        return (_as_float(v[0], f"grid.{key}[0]"), _as_float(v[1], f"grid.{key}[1]"))
    bins = raw.get("bins", [50, 50])
    if not (isinstance(bins, (list, tuple)) and len(bins) == 2):
        raise ValueError("grid.bins must be a pair of integers")
    return Grid2D(
        x_range=pair("x_range", [-4.0, 4.0]),
        y_range=pair("y_range", [-4.0, 4.0]),
        bins_x=_as_int(bins[0], "grid.bins[0]", 1),
        bins_y=_as_int(bins[1], "grid.bins[1]", 1),
    )


def _parse_sampler(raw, index):
    where = f"samplers[{index}]"
    _check_keys(raw, {"algorithm", "tau", "schedule", "theta", "label"}, where)
    for key in ("algorithm", "tau"):
        if key not in raw:
            raise ValueError(f"missing {key!r} in {where}")
    algorithm = raw["algorithm"]
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r} in {where}")
    tau = _as_float(raw["tau"], f"{where}.tau", positive=True)
    schedule = raw.get("schedule", "constant")
    if schedule not in ("constant", "decreasing"):
        raise ValueError(f"{where}.schedule must be 'constant' or 'decreasing'")
    theta = raw.get("theta")
    if algorithm == "myula":
        if theta is None:
            raise ValueError(f"myula needs 'theta' in {where}")
        theta = _as_float(theta, f"{where}.theta", positive=True)
    elif theta is not None:
        raise ValueError(f"'theta' only applies to myula ({where})")
    label = raw.get("label", algorithm)
    if not isinstance(label, str) or not label:
        raise ValueError(f"{where}.label must be a nonempty string")
    if not all(c.isalnum() or c in "_-" for c in label):
        raise ValueError(f"{where}.label may only use letters, digits, '_', '-'")
    return SamplerSpec(algorithm, tau, label, schedule, theta)


def _parse_model_params(raw, kind):
    defaults = _MODEL_DEFAULTS[kind]
    _check_keys(raw, set(defaults), f"model ({kind})")
    params = dict(defaults)
    params.update(raw)
    for key, value in params.items():
        if key == "y":
            if not (isinstance(value, (list, tuple)) and len(value) == 2):
                raise ValueError("model.y must be a pair")
            params[key] = [_as_float(v, "model.y entry") for v in value]
        elif key in ("sigma", "b", "kernel_std"):
            params[key] = _as_float(value, f"model.{key}", positive=True)
        elif key == "lam":
            v = _as_float(value, "model.lam")
            if v < 0:
                raise ValueError("model.lam must be nonnegative")
            params[key] = v
        elif key in ("size", "kernel_size"):
            params[key] = _as_int(value, f"model.{key}", 1)
        elif key == "data_seed":
            params[key] = _as_int(value, "model.data_seed", 0)
        elif key == "image" and value is not None and not isinstance(value, str):
            raise ValueError("model.image must be a path string or null")
    return params


def config_from_dict(raw):
    """Parse and validate a config dictionary; unknown keys are errors."""
    top_keys = {
        "experiment",
        "samplers",
        "n_iterations",
        "output_dir",
        "seed",
        "burn_in",
        "chains",
        "snapshots",
        "grid",
        "metrics",
        "model",
    }
    _check_keys(raw, top_keys, "config")
    for key in ("experiment", "samplers", "n_iterations"):
        if key not in raw:
            raise ValueError(f"missing required key {key!r} in config")
    kind = raw["experiment"]
    if kind not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {kind!r}; choose from {EXPERIMENTS}")

    n_iterations = _as_int(raw["n_iterations"], "n_iterations", 0)
    burn_in = _as_int(raw.get("burn_in", 0), "burn_in", 0)
    chains = _as_int(raw.get("chains", 1), "chains", 1)
    seed = _as_int(raw.get("seed", 0), "seed", 0)
    output_dir = raw.get("output_dir", "results")
    if not isinstance(output_dir, str) or not output_dir:
        raise ValueError("output_dir must be a nonempty string")
    total = burn_in + n_iterations

    snapshots = raw.get("snapshots")
    if snapshots is not None:
        if not isinstance(snapshots, (list, tuple)):
            raise ValueError("snapshots must be a list of iteration numbers")
        snapshots = tuple(sorted({_as_int(s, "snapshots entry", 0) for s in snapshots}))
        if snapshots and snapshots[-1] > total:
            raise ValueError(
                f"snapshot iteration {snapshots[-1]} beyond the run length {total}"
            )

    if kind in _2D:
        grid = _parse_grid(raw.get("grid", {}))
    elif raw.get("grid") is not None:
        raise ValueError("grid only applies to the 2D experiments")
    else:
        grid = None

    allowed_metrics = _ALLOWED_METRICS[kind]
    if "metrics" in raw:
        metrics = raw["metrics"]
        if not isinstance(metrics, (list, tuple)):
            raise ValueError("metrics must be a list")
        for m in metrics:
            if m not in allowed_metrics:
                raise ValueError(
                    f"metric {m!r} not available for {kind} (allowed: {list(allowed_metrics)})"
                )
        metrics = tuple(dict.fromkeys(metrics))
    else:
        metrics = allowed_metrics

    model_params = _parse_model_params(raw.get("model", {}), kind)

    samplers_raw = raw["samplers"]
    if not isinstance(samplers_raw, list) or not samplers_raw:
        raise ValueError("samplers must be a nonempty list")
    samplers = tuple(_parse_sampler(s, i) for i, s in enumerate(samplers_raw))
    labels = [s.label for s in samplers]
    if len(set(labels)) != len(labels):
        raise ValueError("sampler labels must be unique; set 'label' to disambiguate")

    if kind in _IMAGING:
        if chains != 1:
            raise ValueError("imaging experiments run a single chain")
        if n_iterations < 2:
            raise ValueError("imaging experiments need n_iterations >= 2 for the variance")
    if kind == "ar1_oracle" and chains < 2:
        raise ValueError("ar1_oracle needs at least two chains to estimate a variance")

    return ExperimentConfig(
        experiment=kind,
        samplers=samplers,
        n_iterations=n_iterations,
        output_dir=output_dir,
        seed=seed,
        burn_in=burn_in,
        chains=chains,
        snapshots=snapshots,
        grid=grid,
        metrics=metrics,
        model_params=model_params,
    )


def load_config(path):
    """Read and validate a JSON config file."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: not valid JSON ({exc})")
    return config_from_dict(raw)


def build_model(config):
    """(Model, extras) for a config; extras holds imaging inputs."""
    p = config.model_params
    kind = config.experiment
    if kind == "sample2d_tvl2":
        F = SmoothF("l2_shift", np.asarray(p["y"], dtype=float), p["sigma"])
        return Model(F, GSpec("scaled_abs", p["lam"]), Difference2D()), {}
    if kind == "sample2d_tvl1":
        F = NonsmoothF(np.asarray(p["y"], dtype=float), p["b"])
        return Model(F, GSpec("scaled_abs", p["lam"]), Difference2D()), {}
    if kind == "ar1_oracle":
        F = SmoothF("l2_shift", np.zeros(1), 1.0)
        return Model(F, GSpec("scaled_abs", 0.0), Identity(1)), {}
    truth = (
        phantom_image(p["size"]) if p["image"] is None else read_image_pgm(p["image"])
    )
    if kind == "denoise":
        data = make_synthetic_data("denoise", truth, p["sigma"], seed=p["data_seed"])
        F = SmoothF("l2_shift", data, p["sigma"])
        extras = {"truth": truth, "data": data}
    else:
        kernel = gaussian_kernel(p["kernel_size"], p["kernel_std"])
        data = make_synthetic_data(
            "deconv", truth, p["sigma"], kernel=kernel, seed=p["data_seed"]
        )
        F = SmoothF("conv_l2", data, p["sigma"], kernel=kernel)
        extras = {"truth": truth, "data": data, "kernel": kernel}
    model = Model(F, GSpec("aniso_tv_l1", p["lam"]), Grad2D(truth.shape))
    return model, extras


def sampler_run_config(spec, config, model, index):
    """SamplerConfig for one sampler entry, with its derived seed."""
    if spec.schedule == "decreasing":
        m = model.F.m_strong if model.smooth else 0.0
        if m <= 0:
            raise ValueError(
                f"{spec.label}: decreasing schedule needs a strongly convex smooth data term"
            )
        schedule = StepSchedule("decreasing", spec.tau, m=m)
    else:
        schedule = StepSchedule("constant", spec.tau)
    return SamplerConfig(
        algorithm=spec.algorithm,
        schedule=schedule,
        n_samples=config.n_iterations,
        burn_in=config.burn_in,
        chains=config.chains,
        master_seed=config.seed + _SEED_STRIDE * index,
        theta=spec.theta,
    )


def validate_on_model(model, config):
    """All per-sampler run configs, checked against every precondition.

    Raises ValueError naming the violated inequality (or the missing
    smoothness) before anything is sampled.
    """
    run_configs = []
    for index, spec in enumerate(config.samplers):
        if spec.algorithm in _NEEDS_SMOOTH_F and not model.smooth:
            raise ValueError(
                f"{spec.label}: {spec.algorithm} needs a smooth data term"
            )
        rc = sampler_run_config(spec, config, model, index)
        check_step_caps(model, rc)
        run_configs.append(rc)
    return run_configs


def cap_info(model, spec):
    """(cap, inequality string) for a sampler entry; (None, None) if uncapped."""
    alg = spec.algorithm
    if alg == "grad_sub" and model.smooth:
        return step_size_cap(model, "grad_sub"), CAP_INEQUALITIES[alg]
    if alg == "myula" and model.smooth:
        return step_size_cap(model, "myula", spec.theta), CAP_INEQUALITIES[alg]
    if alg == "prox_sub" and model.smooth and model.F.m_strong > 0:
        return step_size_cap(model, "prox_sub"), CAP_INEQUALITIES[alg]
    return None, None


def _default_snapshots(total):
    """Log-spaced snapshot iterations including 0 and the final one."""
    if total <= 0:
        return (0,)
    points = np.unique(np.rint(np.geomspace(1.0, total, 13)).astype(int))
    return (0,) + tuple(int(p) for p in points)


class _AverageRecorder:
    """Accumulates weighted bin counts of the post-burn-in iterate laws.

    A copy of the running totals is kept at every snapshot iteration so
    the running-average distribution at those points can be rebuilt after
    the run.
    """

    def __init__(self, grid, snapshots, schedule):
        self.grid = grid
        self.snapshots = set(snapshots)
        self.schedule = schedule
        self.counts = np.zeros(grid.n_bins)
        self.weight_total = 0.0
        self.n_clamped = 0
        self.at = {}

    def __call__(self, k, states):
        idx, clamped = self.grid.flat_indices(states.reshape(-1, 2))
        lam = self.schedule.weight(k)
        self.counts += lam * np.bincount(idx, minlength=self.grid.n_bins)
        self.weight_total += lam * idx.shape[0]
        self.n_clamped += clamped
        if k in self.snapshots:
            self.at[k] = (self.counts.copy(), self.weight_total)

    def distribution(self, k):
        counts, weight = self.at[k]
        return DiscreteDistribution(
            self.grid.support_points(), counts / weight, grid=self.grid,
            n_clamped=self.n_clamped,
        )


def _ar1_target_variance(algorithm, tau):
    """Stationary variance of each chain on the standard normal target."""
    if algorithm == "prox_sub":
        return 2.0 * (1.0 + tau) ** 2 / (2.0 + tau)
    if algorithm in ("grad_sub", "sub", "myula"):
        return 1.0 / (1.0 - tau / 2.0)
    return 1.0


def _metric_rows_2d(label, result, recorder, target, config, snaps):
    rows = []
    metrics = config.metrics
    for k in snaps:
        hist = histogram(result.snapshots[k].reshape(-1, 2), config.grid)
        if "w2" in metrics:
            w2 = w2_exact(hist, target.dist)
            rows.append((k, label, "w2", w2, "empirical"))
            rows.append((k, label, "w2_sq", w2 * w2, "empirical"))
        if k == 0:
            if "kl" in metrics:
                rows.append((0, label, "kl", kl_discrete(hist, target.dist), "empirical"))
            if "tv" in metrics:
                rows.append((0, label, "tv", tv_discrete(hist, target.dist), "empirical"))
        elif recorder is not None and k in recorder.at:
            nu = recorder.distribution(k)
            if "kl" in metrics:
                rows.append((k, label, "kl", kl_discrete(nu, target.dist), "empirical"))
            if "tv" in metrics:
                rows.append((k, label, "tv", tv_discrete(nu, target.dist), "empirical"))
    return rows


def _bound_rows_2d(label, spec, run_config, config, consts, w0_sq, snaps):
    """Bound curves matching the sampler, where the theory applies."""
    rows = []
    curves = []
    total = config.burn_in + config.n_iterations
    ks = [k for k in snaps if k >= 1]
    if not ks or w0_sq is None:
        return rows, curves
    strong = consts.tag == "strongly_convex_F"
    alg = spec.algorithm

    if alg in ("prox_sub", "grad_sub") and strong:
        variant = "prox" if alg == "prox_sub" else "grad"
        try:
            if spec.schedule == "constant":
                vals = [w2_bound_strong(consts, spec.tau, k, w0_sq, variant) for k in ks]
            else:
                taus = [run_config.schedule.tau(j) for j in range(1, total + 2)]
                curve = w2_bound_varying_curve(consts, np.asarray(taus), w0_sq, variant)
                vals = [float(curve[k]) for k in ks]
        except ValueError:
            vals = None
        if vals is not None:
            rows.extend((k, label, "w2_sq", v, "bound") for k, v in zip(ks, vals))
            curves.append("w2_sq")

    if spec.schedule != "constant":
        return rows, curves
    avg_ks = [k for k in ks if k > config.burn_in]
    kl_vals = None
    if alg in ("prox_sub", "grad_sub") and consts.tag != "lipschitz_F":
        try:
            kl_vals = [
                kl_bound_strong(consts, spec.tau, k - config.burn_in, W0_sq=w0_sq)
                for k in avg_ks
            ]
        except ValueError:
            kl_vals = None
    elif alg in ("prox_sub", "sub"):
        kl_vals = [
            kl_bound_general(consts, spec.tau, k - config.burn_in, W0_sq=w0_sq)
            for k in avg_ks
        ]
    if kl_vals is not None and avg_ks:
        if "kl" in config.metrics:
            rows.extend((k, label, "kl", v, "bound") for k, v in zip(avg_ks, kl_vals))
            curves.append("kl")
        if "tv" in config.metrics:
            # Pinsker: TV <= sqrt(KL/2), so a KL bound yields a TV bound.
            rows.extend(
                (k, label, "tv", float(np.sqrt(v / 2.0)), "bound")
                for k, v in zip(avg_ks, kl_vals)
            )
            curves.append("tv")
    return rows, curves


def _write_curves(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_COLUMNS)
        for it, sampler, metric, value, kind in rows:
            writer.writerow([it, sampler, metric, repr(float(value)), kind])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def run_experiment(config):
    """Run every sampler of a validated config and write the artifacts.

    Returns the summary dictionary (also written to summary.json).
    """
    model, extras = build_model(config)
    run_configs = validate_on_model(model, config)

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kind = config.experiment
    total = config.burn_in + config.n_iterations
    if kind in _IMAGING:
        snaps = ()
    elif config.snapshots is not None:
        snaps = config.snapshots
    else:
        snaps = _default_snapshots(total)

    consts = constants_from_model(model)
    target = None
    w0_sq = None
    if kind in _2D:
        target = discretize_target(model, config.grid)
        initial = histogram(model.initial_state()[None, :], config.grid)
        w0 = w2_exact(initial, target.dist)
        w0_sq = w0 * w0

    if kind in _IMAGING:
        write_image_pgm(out_dir / "truth.pgm", extras["truth"])
        write_image_pgm(out_dir / "data.pgm", extras["data"])

    rows = []
    sampler_summaries = {}
    for index, (spec, rc) in enumerate(zip(config.samplers, run_configs)):
        recorder = None
        if kind in _2D and ("kl" in config.metrics or "tv" in config.metrics):
            recorder = _AverageRecorder(config.grid, snaps, rc.schedule)
        start = time.perf_counter()
        result = run_ensemble(
            model,
            rc,
            snapshot_iters=snaps,
            observer=recorder,
            collect_moments=kind in _IMAGING,
        )
        elapsed = time.perf_counter() - start

        cap, inequality = cap_info(model, spec)
        entry = {
            "algorithm": spec.algorithm,
            "tau": spec.tau,
            "schedule": spec.schedule,
            "theta": spec.theta,
            "seed": rc.master_seed,
            "cap": cap,
            "cap_inequality": inequality,
            "acceptance_rate": result.acceptance_rate,
            "seconds_per_1000_iterations": (
                elapsed * 1000.0 / total if total > 0 else None
            ),
            "bound_curves": [],
        }

        if kind in _2D:
            rows.extend(_metric_rows_2d(spec.label, result, recorder, target, config, snaps))
            bound_rows, bound_curves = _bound_rows_2d(
                spec.label, spec, rc, config, consts, w0_sq, snaps
            )
            rows.extend(bound_rows)
            entry["bound_curves"] = bound_curves
            if recorder is not None and recorder.weight_total > 0:
                entry["clamped_fraction"] = recorder.n_clamped / recorder.weight_total
        elif kind == "ar1_oracle":
            for k in snaps:
                var = float(np.var(result.snapshots[k], ddof=1))
                rows.append((k, spec.label, "variance", var, "empirical"))
            entry["empirical_variance"] = float(np.var(result.final_state, ddof=1))
            entry["target_variance"] = _ar1_target_variance(spec.algorithm, spec.tau)
        else:
            mean, var = result.moments.finalize()
            write_image_pgm(out_dir / f"{spec.label}_mean.pgm", mean)
            np.savetxt(out_dir / f"{spec.label}_mean.csv", mean, delimiter=",", fmt="%.17g")
            np.savetxt(
                out_dir / f"{spec.label}_variance.csv", var, delimiter=",", fmt="%.17g"
            )
            vmax = float(var.max())
            write_image_pgm(
                out_dir / f"{spec.label}_variance.pgm", var / vmax if vmax > 0 else var
            )
            entry["posterior_mean_range"] = [float(mean.min()), float(mean.max())]
            entry["posterior_variance_max"] = vmax
            entry["variance_pgm_scale"] = vmax
        sampler_summaries[spec.label] = entry

    model_info = {
        "d": model.d,
        "smooth": model.smooth,
        "tag": consts.tag,
        "m": consts.m,
        "L_G": model.L_G,
        "norm_K_sq": model.norm_K_sq,
        "L_grad_F": consts.L_grad_F,
        "L_F": consts.L_F,
    }
    summary = {
        "experiment": kind,
        "model": model_info,
        "samplers": sampler_summaries,
        "snapshots": list(snaps),
        "config": config.to_dict(),
        "conventions": {
            "tv": "half the l1 distance between bin masses",
            "kl": "KL(sampler distribution | discretized target)",
            "w2": "exact Wasserstein-2 between grid histograms",
            "running_average": "kl/tv rows average the post-burn-in iterate laws",
            "w0_sq_estimate": "squared W2 between the initial law and the discretized target",
        },
    }
    if kind in _2D:
        summary["target"] = {
            "Z": target.Z,
            "n_bins": config.grid.n_bins,
            "n_clamped": target.dist.n_clamped,
        }
        summary["w0_sq_estimate"] = w0_sq
    if kind in _IMAGING and "kernel" in extras:
        summary["kernel"] = extras["kernel"]

    _write_curves(out_dir / "curves.csv", rows)
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def preset_names():
    """Names of the bundled experiment presets."""
    root = resources.files("nonsmooth_langevin").joinpath("presets")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def preset_text(name):
    """Raw JSON text of a bundled preset."""
    res = resources.files("nonsmooth_langevin").joinpath("presets", f"{name}.json")
    if not res.is_file():
        raise ValueError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return res.read_text()


def _cmd_run(args):
    config = load_config(args.config)
    if args.output_dir is not None:
        config = replace(config, output_dir=str(args.output_dir))
    run_experiment(config)
    out = Path(config.output_dir)
    print(f"wrote {out / 'curves.csv'} and {out / 'summary.json'}")
    return 0


def _cmd_validate(args):
    config = load_config(args.config)
    model, _ = build_model(config)
    validate_on_model(model, config)
    for spec in config.samplers:
        cap, inequality = cap_info(model, spec)
        status = f"tau={spec.tau:g}"
        if cap is not None:
            status += f", cap={cap:g} ({inequality})"
        print(f"ok: {spec.label} [{spec.algorithm}] {status}")
    print("config valid")
    return 0


def _cmd_caps(args):
    config = load_config(args.config)
    model, _ = build_model(config)
    print(f"{'label':<18}{'algorithm':<14}{'tau':<12}{'cap':<14}inequality")
    for spec in config.samplers:
        cap, inequality = cap_info(model, spec)
        cap_text = f"{cap:.6g}" if cap is not None else "none"
        print(
            f"{spec.label:<18}{spec.algorithm:<14}{spec.tau:<12g}{cap_text:<14}"
            f"{inequality or '-'}"
        )
    return 0


def _cmd_presets(args):
    if args.preset_command == "list":
        for name in preset_names():
            print(name)
    else:
        print(preset_text(args.name), end="")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="nonsmooth-langevin",
        description="Run Langevin sampling experiments described by a JSON config.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment and write its artifacts")
    p_run.add_argument("config", help="path to a JSON experiment config")
    p_run.add_argument(
        "--output-dir", default=None, help="override the config's output directory"
    )
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_caps = sub.add_parser("caps", help="print the step-size caps for a config")
    p_caps.add_argument("config")
    p_caps.set_defaults(func=_cmd_caps)

    p_pre = sub.add_parser("presets", help="inspect the bundled presets")
    pre_sub = p_pre.add_subparsers(dest="preset_command", required=True)
    pre_sub.add_parser("list", help="list preset names")
    p_show = pre_sub.add_parser("show", help="print a preset config as JSON")
    p_show.add_argument("name")
    p_pre.set_defaults(func=_cmd_presets)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
