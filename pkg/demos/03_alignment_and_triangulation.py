"""Eye alignment onto the canonical frame, and the warp triangulation.

Input faces arrive at arbitrary position, scale and roll; a closed-form
similarity puts both eye centers exactly on the frame anchors. Boundary
points extend the landmark set so the Delaunay triangulation tiles the whole
canvas, which is what lets the piecewise-affine warp move background pixels
coherently with the face.
"""

from pathlib import Path

import matplotlib.pyplot as plt

from affectmorph import CanonicalFrame, add_boundary_points, align_to_canonical, triangulate
from affectmorph.sample_faces import synth_face

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

frame = CanonicalFrame(256, 256, (88.0, 115.0), (168.0, 115.0))

fig, axes = plt.subplots(2, 3, figsize=(12, 8))
for col, roll in enumerate((-12.0, 0.0, 14.0)):
    image, lm = synth_face(
        "align-demo", 0.7, 0.3, canvas=(256, 256),
        center=(118.0 + 8 * col, 138.0), scale=66.0 + 6 * col, roll_deg=roll,
    )
    aligned, aligned_lm = align_to_canonical(image, lm, frame)
    axes[0, col].imshow(image)
    axes[0, col].set_title(f"input (roll {roll:+.0f} deg)", fontsize=10)
    axes[1, col].imshow(aligned)
    axes[1, col].scatter(*zip(frame.left_eye_anchor, frame.right_eye_anchor),
                         c="red", marker="+", s=120)
    axes[1, col].set_title("aligned", fontsize=10)
for ax in axes.flat:
    ax.axis("off")
fig.tight_layout()
fig.savefig(OUT / "alignment.png", dpi=110)
print(f"wrote {OUT / 'alignment.png'}")

# triangulation over the boundary-augmented landmarks
image, lm = synth_face("align-demo", 0.7, 0.3, canvas=(256, 256))
aligned, aligned_lm = align_to_canonical(image, lm, frame)
aug = add_boundary_points(aligned_lm)
tri = triangulate(aug.points)
print(f"{len(aug)} points -> {len(tri.triangles)} triangles")

fig, ax = plt.subplots(figsize=(6, 6))
ax.imshow(aligned)
ax.triplot(aug.points[:, 0], aug.points[:, 1], tri.triangles, lw=0.6, color="cyan")
ax.axis("off")
fig.tight_layout()
fig.savefig(OUT / "triangulation.png", dpi=110)
print(f"wrote {OUT / 'triangulation.png'}")
