#!/usr/bin/env python3
"""Plot the curves.csv produced by a sampling experiment.

One panel per metric, iteration on the x axis, one line per sampler.
Bound curves are drawn dashed so they are visually separate from the
empirical estimates they cap.

Usage:
    python scripts/plot_curves.py results/curves.csv
    python scripts/plot_curves.py results/curves.csv -o curves.png --log-x
"""

import argparse
import csv
import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

METRIC_ORDER = ("w2", "w2_sq", "kl", "tv", "variance")
METRIC_LABELS = {
    "w2": "Wasserstein-2 distance",
    "w2_sq": "squared Wasserstein-2 distance",
    "kl": "KL divergence",
    "tv": "total variation distance",
    "variance": "marginal variance",
}


def load_rows(path):
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows.append(
                (
                    int(row["iter"]),
                    row["sampler"],
                    row["metric"],
                    float(row["value"]),
                    row["curve_kind"],
                )
            )
    return rows


def group_curves(rows):
    """Map metric -> (sampler, curve_kind) -> sorted [(iter, value)]."""
    curves = defaultdict(lambda: defaultdict(list))
    for it, sampler, metric, value, kind in rows:
        curves[metric][(sampler, kind)].append((it, value))
    for metric in curves:
        for key in curves[metric]:
            curves[metric][key].sort()
    return curves


def plot(curves, out_path, log_x=False, log_y=False):
    metrics = [m for m in METRIC_ORDER if m in curves]
    metrics += sorted(set(curves) - set(metrics))
    if not metrics:
        raise SystemExit("no curve rows to plot")

    ncols = min(len(metrics), 2)
    nrows = math.ceil(len(metrics) / ncols)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(6.4 * ncols, 4.2 * nrows), squeeze=False
    )

    samplers = sorted({s for m in curves.values() for (s, _) in m})
    cmap = plt.get_cmap("tab10")
    colors = {s: cmap(i % 10) for i, s in enumerate(samplers)}

    for ax, metric in zip(axes.flat, metrics):
        for (sampler, kind), points in sorted(curves[metric].items()):
            iters = [p[0] for p in points]
            values = [p[1] for p in points]
            style = "--" if kind == "bound" else "-"
            label = f"{sampler} (bound)" if kind == "bound" else sampler
            ax.plot(iters, values, style, color=colors[sampler], label=label,
                    marker="" if kind == "bound" else ".", markersize=4)
        ax.set_title(METRIC_LABELS.get(metric, metric))
        ax.set_xlabel("iteration")
        if log_x:
            ax.set_xscale("symlog")  # snapshot 0 is always present
        if log_y:
            ax.set_yscale("log")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=8)

    for ax in axes.flat[len(metrics):]:
        ax.set_visible(False)

    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    print(f"wrote {out_path}")


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("curves", type=Path, help="path to curves.csv")
    parser.add_argument(
        "-o", "--output", type=Path, default=None,
        help="output image path (default: curves.png next to the csv)",
    )
    parser.add_argument("--log-x", action="store_true", help="log-scale iterations")
    parser.add_argument("--log-y", action="store_true", help="log-scale values")
    args = parser.parse_args(argv)

    rows = load_rows(args.curves)
    out = args.output or args.curves.with_name("curves.png")
    plot(group_curves(rows), out, log_x=args.log_x, log_y=args.log_y)


if __name__ == "__main__":
    main()
