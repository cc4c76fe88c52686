"""Figure rendering for the CLI report paths (written to files, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .relaxation import Curve  # noqa: E402

_METHOD_COLORS = {
    "series-small": "tab:blue",
    "series-large": "tab:orange",
    "closed-gamma1": "tab:green",
    "cole-cole": "tab:olive",
    "inversion": "tab:red",
    "debye": "tab:purple",
}


def save_curve_plot(curve: Curve, path: str, title: str | None = None) -> str:
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.semilogx(curve.grid, curve.values, color="0.6", lw=0.8, zorder=1)
    for method in sorted(set(curve.methods)):
        sel = [i for i, m_ in enumerate(curve.methods) if m_ == method]
        ax.plot(curve.grid[sel], curve.values[sel], ".", ms=5,
                color=_METHOD_COLORS.get(method, "k"), label=method, zorder=2)
    ax.set_xlabel("t")
    ax.set_ylabel("f(t)")
    ax.set_title(title or "relaxation solution")
    ax.grid(True, which="both", alpha=0.25)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_sweep_plot(var: str, rows: list[dict], path: str) -> str:
    xs = [r[var] for r in rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax1.plot(xs, [r["tau_star"] for r in rows], "o-", color="tab:green")
    ax1.set_ylabel("tau*")
    ax1.grid(True, alpha=0.25)
    ax2.plot(xs, [r["coverage_small"] for r in rows], "o-", label="short-time series")
    ax2.plot(xs, [r["coverage_large"] for r in rows], "s-", label="long-time series")
    ax2.set_xlabel(var)
    ax2.set_ylabel("coverage fraction")
    ax2.set_ylim(-0.05, 1.05)
    ax2.grid(True, alpha=0.25)
    ax2.legend(fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
