"""The two morph recipes that populate the circumplex.

Top strip: neutral-to-apex morphing sweeps the intensity of one expression
(annotated intensity r * I_apex at a fixed angle). Bottom strip: apex-to-apex
morphing creates new expression variations at intermediate angles (intensity
and angle both interpolate linearly).
"""

from pathlib import Path

import matplotlib.pyplot as plt

from affectmorph import CanonicalFrame, Expression
from affectmorph.pipeline import apex_to_apex, neutral_to_apex
from affectmorph.affect import AffectPoint, DEFAULT_ANGLES
from affectmorph.landmarks import align_to_canonical
from affectmorph.pipeline import AnnotatedFace
from affectmorph.sample_faces import synth_face

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

frame = CanonicalFrame(256, 256, (88.0, 115.0), (168.0, 115.0))


def face(expr, intensity):
    if expr is Expression.NEUTRAL:
        affect = AffectPoint.neutral()
    else:
        affect = AffectPoint.from_polar(intensity, DEFAULT_ANGLES[expr])
    image, lm = synth_face("morph-demo", affect.valence, affect.arousal, canvas=(256, 256))
    img, aligned = align_to_canonical(image, lm, frame)
    return AnnotatedFace(img, aligned, affect, expr, "morph-demo")


neutral = face(Expression.NEUTRAL, 0.0)
happy = face(Expression.HAPPY, 1.0)
sad = face(Expression.SAD, 1.0)
disgusted = face(Expression.DISGUSTED, 1.0)

ratios = [0.0, 0.25, 0.5, 0.75, 1.0]
fig, axes = plt.subplots(2, 5, figsize=(15, 6.6))
for col, r in enumerate(ratios):
    out = neutral_to_apex(neutral, happy, r)
    axes[0, col].imshow(out.image)
    axes[0, col].set_title(
        f"r={r:.2f}  I={out.affect.intensity:.2f}  th={out.affect.angle_deg:.0f}", fontsize=9
    )
    out = apex_to_apex(disgusted, sad, r)
    axes[1, col].imshow(out.image)
    axes[1, col].set_title(
        f"r={r:.2f}  I={out.affect.intensity:.2f}  th={out.affect.angle_deg:.1f}", fontsize=9
    )
for ax in axes.flat:
    ax.axis("off")
axes[0, 0].set_ylabel("neutral -> happy")
axes[1, 0].set_ylabel("disgusted -> sad")
fig.tight_layout()
fig.savefig(OUT / "morph_recipes.png", dpi=110)
print(f"wrote {OUT / 'morph_recipes.png'}")
