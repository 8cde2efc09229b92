import numpy as np
import pytest

from affectmorph.affect import AffectPoint, Expression, DEFAULT_ANGLES
from affectmorph.dataset import PipelineConfig, generate_dataset
from affectmorph.landmarks import CanonicalFrame, align_to_canonical
from affectmorph.pipeline import AnnotatedFace, SubjectInput
from affectmorph.sample_faces import synth_face, write_sample_dataset

# Canvas used by most image tests; anchors are the canonical dyadic fractions
# of the canvas (x: 11/32 and 21/32, y: 230/512).
SMALL = 128
SMALL_FRAME = CanonicalFrame(SMALL, SMALL, (44.0, 57.5), (84.0, 57.5))

_acceptance_lines: list[str] = []


def record_criterion(name: str, detail: str = "") -> None:
    _acceptance_lines.append(f"PASS {name}" + (f": {detail}" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def aligned_face(subject_id, label, intensity, frame=SMALL_FRAME, jitter=0):
    """Synthesize, then eye-align, one annotated face on the test frame."""
    if label is Expression.NEUTRAL:
        affect = AffectPoint.neutral()
    else:
        affect = AffectPoint.from_polar(intensity, DEFAULT_ANGLES[label])
    rng = np.random.default_rng(jitter)
    roll = (rng.random() - 0.5) * 8.0 if jitter else 0.0
    scale = 0.3 * frame.canvas_width * (1 + (rng.random() - 0.5) * 0.1 if jitter else 1)
    img, lm = synth_face(
        subject_id,
        affect.valence,
        affect.arousal,
        canvas=(frame.canvas_width, frame.canvas_height),
        scale=scale,
        roll_deg=roll,
    )
    aligned_img, aligned_lm = align_to_canonical(img, lm, frame)
    return AnnotatedFace(
        image=aligned_img,
        landmarks=aligned_lm,
        affect=affect,
        label=label,
        subject_id=subject_id,
        provenance="original",
    )


def make_subject(subject_id="subj", intensities=None, missing=(), frame=SMALL_FRAME):
    """A full SubjectInput over the default angle table on the test frame."""
    intensities = intensities or {}
    apexes = []
    for i, label in enumerate(
        [
            Expression.HAPPY,
            Expression.SURPRISED,
            Expression.AFRAID,
            Expression.ANGRY,
            Expression.DISGUSTED,
            Expression.SAD,
        ]
    ):
        if label in missing:
            continue
        apexes.append(
            aligned_face(subject_id, label, intensities.get(label, 1.0), frame, jitter=i + 1)
        )
    neutral = aligned_face(subject_id, Expression.NEUTRAL, 0.0, frame)
    return SubjectInput(subject_id, neutral, tuple(apexes))


@pytest.fixture(scope="session")
def small_frame():
    return SMALL_FRAME


@pytest.fixture(scope="session")
def aligned_pair():
    """Two aligned faces of one subject with distinct expressions."""
    a = aligned_face("pair-subj", Expression.HAPPY, 1.0, jitter=3)
    b = aligned_face("pair-subj", Expression.SAD, 1.0, jitter=4)
    return a, b


@pytest.fixture(scope="session")
def full_subject():
    return make_subject("subj-full", intensities={Expression.HAPPY: 0.9})


def config_dict(tree, out_name="out", **overrides):
    base = {
        "input_root": str(tree / "in"),
        "output_root": str(tree / out_name),
        "frame": {"canvas_width": SMALL, "canvas_height": SMALL},
    }
    base.update(overrides)
    return base


@pytest.fixture(scope="session")
def dataset_tree(tmp_path_factory):
    """Input tree: s01/s02 complete (with intensity files), s03 missing Afraid."""
    root = tmp_path_factory.mktemp("data")
    write_sample_dataset(
        root / "in",
        ["s01", "s02"],
        canvas=(SMALL, SMALL),
        intensities={Expression.HAPPY: 0.9, Expression.SAD: 0.8},
    )
    write_sample_dataset(
        root / "in",
        ["s03"],
        canvas=(SMALL, SMALL),
        skip={"s03": {Expression.AFRAID}},
    )
    return root


@pytest.fixture(scope="session")
def full_run(dataset_tree):
    """Default-grid generation over the two complete subjects."""
    cfg = PipelineConfig.from_dict(config_dict(dataset_tree, "out-full"))
    summary = generate_dataset(cfg, jobs=1, subject_filter=lambda s: s in ("s01", "s02"))
    assert summary.ok, summary.failures
    return cfg, summary
