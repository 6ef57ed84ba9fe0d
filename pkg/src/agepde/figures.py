"""Headless figure renderers for the report path.

Each function takes already-computed rows and writes one PNG next to the
delimited output.  Rendering never changes exit codes: callers treat a
missing or failed figure as cosmetic.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "plot_decay",
    "plot_convergence",
    "plot_amplification",
    "plot_epidemic",
    "plot_suite",
    "plot_terminal_slice",
]


def _empty(ax, label: str) -> None:
    ax.text(0.5, 0.5, f"no {label} data", ha="center", va="center", transform=ax.transAxes)
    ax.set_xticks([])
    ax.set_yticks([])


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_decay(rows, path) -> Path:
    """Certified bound against the corner norm on a log axis over m."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    if not rows:
        _empty(ax, "decay")
        return _save(fig, path)
    ms = [r.m for r in rows]
    bounds = [r.bound for r in rows]
    corner = rows[0].corner_norm
    ax.semilogy(ms, bounds, "o-", label="bound")
    floor = min(b for b in bounds if b > 0) if any(b > 0 for b in bounds) else 1.0
    ax.axhline(max(corner, floor * 1e-30), color="tab:red", ls="--", label="corner norm")
    ax.set_xlabel("m")
    ax.set_ylabel("squared norm")
    ax.legend()
    return _save(fig, path)


def plot_convergence(rows, path) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    if not rows:
        _empty(ax, "convergence")
        return _save(fig, path)
    hx = [r.h_x for r in rows]
    err = [r.error for r in rows]
    ax.loglog(hx, err, "o-", label="error")
    ref = [err[0] * (h / hx[0]) ** 2 for h in hx]
    ax.loglog(hx, ref, ":", color="gray", label="slope 2")
    ax.set_xlabel("mesh width")
    ax.set_ylabel("space-time error")
    ax.legend()
    return _save(fig, path)


def plot_amplification(rows, path) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    if not rows:
        _empty(ax, "amplification")
        return _save(fig, path)
    js = [r.j for r in rows]
    ax.semilogy(js, [r.predicted for r in rows], "s--", label="predicted")
    ax.semilogy(js, [r.measured for r in rows], "o-", label="measured")
    ax.set_xlabel("mode index")
    ax.set_ylabel("amplification factor")
    ax.set_xticks(js)
    ax.legend()
    return _save(fig, path)


def plot_epidemic(result, path) -> Path:
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(result.times, result.susceptible, label="susceptible")
    ax.plot(result.times, result.infected, label="infected")
    ax.set_xlabel("time")
    ax.set_ylabel("population")
    ax.legend()
    return _save(fig, path)


def plot_suite(reports, path) -> Path:
    """Worst relative margin per inequality id, green above the line."""
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    if not reports:
        _empty(ax, "suite")
        return _save(fig, path)
    worst: dict[str, float] = {}
    for r in reports:
        scale = abs(r.lhs) + abs(r.rhs) + 1e-300
        rel = r.margin / scale
        worst[r.id] = min(worst.get(r.id, math.inf), rel)
    ids = sorted(worst)
    vals = [worst[i] for i in ids]
    colors = ["tab:green" if v >= 0 else "tab:red" for v in vals]
    ax.bar(range(len(ids)), vals, color=colors)
    ax.axhline(0.0, color="black", lw=0.8)
    ax.set_xticks(range(len(ids)))
    ax.set_xticklabels(ids, rotation=60, ha="right", fontsize=7)
    ax.set_ylabel("worst relative margin")
    return _save(fig, path)


def plot_terminal_slice(field, path) -> Path:
    """Terminal-time snapshot of a solved density over age and space."""
    g = field.grid
    data = field.values[-1]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    if g.dim == 1:
        im = ax.imshow(
            data,
            origin="lower",
            aspect="auto",
            extent=[0.0, g.extents[0], 0.0, g.a_max],
        )
        ax.set_xlabel("x")
        ax.set_ylabel("age")
    else:
        im = ax.imshow(
            np.asarray(data[-1]).T,
            origin="lower",
            aspect="auto",
            extent=[0.0, g.extents[0], 0.0, g.extents[1]],
        )
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
    fig.colorbar(im, ax=ax, label="density")
    return _save(fig, path)
