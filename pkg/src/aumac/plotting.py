"""Figure rendering for sweep output.

The report path can drop a matplotlib figure next to the CSV: energy-per-bit
in dB against the number of active users, one curve per (variant, alpha)
group.  Unattainable points are left out of their curve.
"""

from __future__ import annotations

from typing import Sequence

from .optimizer import STATUS_OK, EnergyPoint


def plot_energy_points(points: Sequence[EnergyPoint], path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    groups: dict[tuple[str, float], list[EnergyPoint]] = {}
    for pt in points:
        groups.setdefault((pt.variant, pt.alpha), []).append(pt)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for (variant, alpha), pts in sorted(groups.items()):
        usable = [p for p in pts if p.status == STATUS_OK]
        if not usable:
            continue
        usable.sort(key=lambda p: p.ka)
        ax.plot(
            [p.ka for p in usable],
            [p.ebn0_db for p in usable],
            marker="o",
            label=f"{variant}, alpha={alpha:g}",
        )
    ax.set_xlabel("active users $K_a$")
    ax.set_ylabel("$E_b/N_0$ [dB]")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
