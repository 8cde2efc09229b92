"""A synthetic subject: the 7 categorical expressions with exact landmarks.

The drawn-face generator gives tests and demos license-free portraits whose
68-point annotations are correct by construction.
"""

from pathlib import Path

import matplotlib.pyplot as plt

from affectmorph import DEFAULT_ANGLES, Expression, va_from_polar
from affectmorph.sample_faces import synth_face

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

fig, axes = plt.subplots(1, 7, figsize=(18, 3))
for ax, expr in zip(axes, Expression):
    if expr is Expression.NEUTRAL:
        v = a = 0.0
    else:
        v, a = va_from_polar(1.0, DEFAULT_ANGLES[expr])
    image, lm = synth_face("demo-subject", v, a, canvas=(256, 256))
    ax.imshow(image)
    ax.scatter(lm.points[:, 0], lm.points[:, 1], s=2, c="lime")
    ax.set_title(expr.value, fontsize=10)
    ax.axis("off")

fig.tight_layout()
fig.savefig(OUT / "subject_expressions.png", dpi=110)
print(f"wrote {OUT / 'subject_expressions.png'}")
