"""Deterministic SVG figures for the CLI.

Every figure renders through the Agg backend with a fixed hash salt and
no date metadata, so the same inputs always produce the same bytes.
Figures 7 to 9 show one representative jump-time pair per table row,
the smallest admissible assignment of the free slots.
"""

from __future__ import annotations

import itertools
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "weierbaker"

import matplotlib.pyplot as plt
import numpy as np

from .certify import (
    TABLE_CASES,
    CaseSpec,
    TEST_POINT,
    _ge_slots,
    case_pair,
    envelope,
    eval_k_grid,
    eval_l_grid,
)
from .dyadic import Roughness, bits_from_jumps
from .errors import CaseConstraintError
from .measures import density_rho_hat, sample_rho
from .series import eval_W, s_batch

KAPPA_TRIPLE = (0.5, 0.55, 0.56)
R_MAIN = Roughness.from_kappa(0.55)

_SAVE_KW = {"metadata": {"Date": None}, "bbox_inches": "tight"}


def _canonical_pair(c: CaseSpec):
    """Smallest admissible assignment of the row's free slots."""
    free = _ge_slots(c)
    ranges = [range(s.value, s.value + 5) for s in free]
    for tails in itertools.product(*ranges):
        try:
            return case_pair(c, tails)
        except CaseConstraintError:
            continue
    raise CaseConstraintError(f"case {c.id}: no admissible small assignment")


def _case_curve(c: CaseSpec, xs: np.ndarray, order: int = 0) -> np.ndarray:
    xi, eta = _canonical_pair(c)
    depth = max(xi.depth, eta.depth)
    xb = np.asarray(bits_from_jumps(xi, depth).bits, dtype=np.uint8)[None, :]
    eb = np.asarray(bits_from_jumps(eta, depth).bits, dtype=np.uint8)[None, :]
    rep = np.repeat(xb, xs.size, axis=0), np.repeat(eb, xs.size, axis=0)
    return s_batch(rep[0], xs, R_MAIN, order=order) - s_batch(
        rep[1], xs, R_MAIN, order=order
    )


def fig01(out: Path) -> Path:
    r = Roughness.from_gamma(2.0**-0.5)
    xs = np.linspace(0.0, 1.0, 2001)
    ys = [eval_W(float(x), r).mid for x in xs]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(xs, ys, lw=0.6, color="tab:blue")
    ax.set_xlabel("x")
    ax.set_ylabel("W(x)")
    ax.set_title("Rough attractor graph at the half-exponent parameter")
    path = out / "fig01_attractor_graph.svg"
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def _envelope_figure(out: Path, target: str, fname: str, title: str) -> Path:
    xs = np.linspace(0.0, 1.0, 1001)
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6), sharey=True)
    for ax, kappa in zip(axes, KAPPA_TRIPLE):
        r = Roughness.from_kappa(kappa)
        env = envelope(target, r)
        lo, hi = env.normalized_target_bounds(xs)
        ax.plot(xs, 0.5 * (lo + hi), color="tab:blue", lw=1.2, label="target")
        ax.plot(xs, env.lower(xs), color="tab:green", lw=0.9, ls="--", label="lower")
        ax.plot(xs, env.upper(xs), color="tab:red", lw=0.9, ls="--", label="upper")
        ax.axhline(0.0, color="gray", lw=0.5)
        ax.set_title(f"kappa = {kappa}")
        ax.set_xlabel("x")
    axes[0].legend(loc="best", fontsize=8)
    fig.suptitle(title)
    path = out / fname
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def fig02(out: Path) -> Path:
    return _envelope_figure(
        out, "g", "fig02_kernel_envelope.svg", "Normalized kernel and its envelope"
    )


def fig03(out: Path) -> Path:
    return _envelope_figure(
        out,
        "g'",
        "fig03_kernel_slope_envelope.svg",
        "Normalized kernel derivative and its envelope",
    )


def fig04(out: Path) -> Path:
    return _envelope_figure(
        out,
        "g''",
        "fig04_kernel_curvature_envelope.svg",
        "Normalized kernel curvature and its envelope",
    )


def _family_figure(out: Path, grid_fn, label: str, fname: str, title: str) -> Path:
    xs = np.linspace(0.0, 1.0, 1001)
    fig, ax = plt.subplots(figsize=(7, 4))
    for i in (1, 2, 3, 4):
        lo, hi = grid_fn(i, xs, R_MAIN)
        ax.plot(xs, 0.5 * (lo + hi), lw=1.0, label=f"{label}{i}")
    ax.axhline(0.0, color="gray", lw=0.5)
    ax.set_xlabel("x")
    ax.legend(loc="best", fontsize=8)
    ax.set_title(title)
    path = out / fname
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def fig05(out: Path) -> Path:
    return _family_figure(
        out,
        eval_k_grid,
        "k",
        "fig05_curvature_differences.svg",
        "Curvature difference kernels (k2 is negative by construction)",
    )


def fig06(out: Path) -> Path:
    return _family_figure(
        out,
        eval_l_grid,
        "l",
        "fig06_slope_differences.svg",
        "Slope difference kernels",
    )


def _case_panels(out: Path, order: int, fname: str, title: str) -> Path:
    xs = np.linspace(0.0, 1.0, 1001)
    fig, axes = plt.subplots(2, 5, figsize=(14, 5.2), sharex=True)
    for ax, c in zip(axes.ravel(), TABLE_CASES):
        ys = _case_curve(c, xs, order=order)
        ax.plot(xs, ys, lw=0.9, color="tab:blue")
        ax.axhline(0.0, color="gray", lw=0.5)
        if order == 0:
            ax.axvline(TEST_POINT, color="tab:orange", lw=0.6, ls=":")
        if order == 2:
            ax.axvspan(0.1, 0.9, color="tab:green", alpha=0.08)
        ax.set_title(f"case {c.id}", fontsize=9)
    fig.suptitle(title)
    path = out / fname
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def fig07(out: Path) -> Path:
    return _case_panels(
        out,
        0,
        "fig07_case_differences.svg",
        "Slope difference per table row, test point marked",
    )


def fig08(out: Path) -> Path:
    return _case_panels(
        out,
        2,
        "fig08_case_curvature.svg",
        "Second derivative per table row, certified-positive span shaded",
    )


def fig09(out: Path) -> Path:
    return _case_panels(
        out,
        1,
        "fig09_case_slopes.svg",
        "First derivative per table row",
    )


def fig10(out: Path) -> Path:
    hist = sample_rho(R_MAIN, 20000, restricted=True, seed=42)
    den = density_rho_hat(R_MAIN, n_pairs=4000, seed=43)
    fig, ax = plt.subplots(figsize=(7, 4))
    widths = np.diff(hist.bin_edges)
    ax.stairs(hist.mass / widths, hist.bin_edges, label="restricted histogram")
    ax.plot(den.y_grid, den.phi, lw=1.0, color="tab:red", label="root-sum density")
    ax.set_xlabel("slope difference")
    ax.set_ylabel("density")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("Restricted pushforward: histogram vs density estimate")
    path = out / "fig10_pushforward_density.svg"
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


FIGURES = (fig01, fig02, fig03, fig04, fig05, fig06, fig07, fig08, fig09, fig10)


def render_all(out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [fn(out) for fn in FIGURES]
