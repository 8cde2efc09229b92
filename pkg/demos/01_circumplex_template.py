"""Sampling templates over the valence-arousal disc.

Shows how the (angle, radial ratio) lattice tiles the circumplex between the
Happy and Sad anchors, and how the granularity knobs trade off against the
per-subject augmentation factor.
"""

import math
from pathlib import Path

import matplotlib.pyplot as plt

from affectmorph import DEFAULT_ANGLES, augmentation_factor, build_template, va_from_polar

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

default = build_template(10, 205, 15, 0.1)
fine = build_template(10, 205, 7.5, 0.05)

for grid, name in ((default, "default"), (fine, "fine")):
    factor = augmentation_factor(grid, 7, mirrored=False)
    print(
        f"{name}: {len(grid.angles)} angles x {len(grid.ratios)} ratios "
        f"= {len(grid.nodes)} nodes (+1 neutral), "
        f"factor {factor:.1f}x from 7 given images"
    )

fig, axes = plt.subplots(1, 2, figsize=(13, 6), subplot_kw={"aspect": "equal"})
for ax, grid, title in ((axes[0], default, "15deg / 0.1"), (axes[1], fine, "7.5deg / 0.05")):
    vs, As = zip(*(va_from_polar(r, a) for a, r in grid.nodes))
    ax.scatter(vs, As, s=8, c=[r for _, r in grid.nodes], cmap="viridis")
    ax.scatter([0], [0], s=60, c="black", marker="s", label="neutral")
    for expr, angle in DEFAULT_ANGLES.items():
        v, a = va_from_polar(1.0, angle)
        ax.annotate(expr.value, (v, a), fontsize=9, ha="center",
                    xytext=(1.12 * v, 1.12 * a))
    circle = plt.Circle((0, 0), 1.0, fill=False, color="gray", lw=0.5)
    ax.add_patch(circle)
    ax.axhline(0, color="gray", lw=0.5)
    ax.axvline(0, color="gray", lw=0.5)
    ax.set_xlim(-1.3, 1.3)
    ax.set_ylim(-1.3, 1.3)
    ax.set_xlabel("valence")
    ax.set_ylabel("arousal")
    ax.set_title(f"{title}: {grid.total_points} points per subject")

fig.tight_layout()
fig.savefig(OUT / "template_grids.png", dpi=110)
print(f"wrote {OUT / 'template_grids.png'}")
