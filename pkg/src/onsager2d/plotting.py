"""Static bifurcation-diagram rendering (amplitude t against lambda)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no timestamp so repeated renders are byte-identical
plt.rcParams["svg.hashsalt"] = "onsager2d"
plt.rcParams["svg.fonttype"] = "none"

COLORS = ["0.2", "tab:blue", "tab:red", "tab:green", "tab:purple", "tab:orange"]


def _runs(stable: np.ndarray):
    """Index ranges of constant stability, overlapping by one point so curves join."""
    start = 0
    for i in range(1, stable.size + 1):
        if i == stable.size or stable[i] != stable[start]:
            yield start, min(i + 1, stable.size), bool(stable[start])
            start = i


def plot_diagram(branches, path, title: str | None = None, width: float = 6.0) -> None:
    fig, ax = plt.subplots(figsize=(width, width * 0.62))
    seen = set()
    for b in branches:
        if not b.points:
            continue
        lam = b.lambdas
        t = b.amplitudes
        stable = np.array([p.stable for p in b.points])
        color = COLORS[0] if b.mode is None else COLORS[1 + (b.mode - 1) % (len(COLORS) - 1)]
        name = "trivial" if b.mode is None else f"mode {b.mode}"
        for i, j, st in _runs(stable):
            label = name if name not in seen else None
            seen.add(name)
            ax.plot(lam[i:j], t[i:j], color=color, lw=1.4, ls="-" if st else "--", label=label)
    ax.plot([], [], color="k", ls="-", label="stable")
    ax.plot([], [], color="k", ls="--", label="unstable")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel(r"$t = \langle V, \phi_m \rangle_{H^1}$")
    if title:
        ax.set_title(title)
    ax.axhline(0.0, color="0.85", lw=0.5, zorder=0)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
