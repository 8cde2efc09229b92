"""Command-line entry point: plan, generate, stats, and validate workflows.

Exit codes are a stable scripting contract: 0 success, 1 validation or
configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import filecmp
import fnmatch
import math
import shutil
import sys
import tempfile
import time
from collections import Counter
from dataclasses import replace
from pathlib import Path

from .dataset import (
    PipelineConfig,
    discover_subjects,
    generate_dataset,
    read_manifest,
)
from .errors import AffectMorphError, ConfigurationError
from .pipeline import plan_expressions

__all__ = ["main"]

_VA_TOL = 1e-6


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affectmorph",
        description="Synthesize a balanced valence-arousal dataset from "
        "categorical expression images via face morphing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_options(p):
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument("--grid-angle-step", type=float, help="override grid angle step (deg)")
        p.add_argument("--grid-radial-step", type=float, help="override grid radial step")
        p.add_argument("--mirror", action="store_true", help="double the output by mirroring")
        p.add_argument("--subjects", help="glob filter on subject ids")

    p_plan = sub.add_parser("plan", help="report per-subject output counts, no pixel work")
    add_config_options(p_plan)
    p_plan.set_defaults(func=cmd_plan)

    p_gen = sub.add_parser("generate", help="synthesize all images and the manifest")
    add_config_options(p_gen)
    p_gen.add_argument("--jobs", type=int, default=1, help="parallel subject workers")
    p_gen.add_argument("--dry-run", action="store_true", help="plan only, write nothing")
    p_gen.add_argument(
        "--check-determinism",
        action="store_true",
        help="regenerate into a scratch directory and byte-compare the outputs",
    )
    p_gen.set_defaults(func=cmd_generate)

    p_stats = sub.add_parser("stats", help="histogram of records per grid cell")
    p_stats.add_argument("manifest", help="manifest CSV path")
    p_stats.set_defaults(func=cmd_stats)

    p_val = sub.add_parser("validate", help="check manifest invariants and files")
    p_val.add_argument("manifest", help="manifest CSV path")
    p_val.add_argument("--image-root", help="root for relative file paths (default: manifest dir)")
    p_val.add_argument("--config", help="config JSON for grid membership and canvas checks")
    p_val.set_defaults(func=cmd_validate)
    return parser


def load_config(args) -> PipelineConfig:
    config = PipelineConfig.from_json(args.config)
    updates = {}
    if getattr(args, "grid_angle_step", None) is not None:
        updates["angle_step_deg"] = args.grid_angle_step
    if getattr(args, "grid_radial_step", None) is not None:
        updates["radial_step"] = args.grid_radial_step
    if getattr(args, "mirror", False):
        updates["mirror"] = True
    if updates:
        config = replace(config, **updates).validate()
    return config


def subject_filter(args):
    pattern = getattr(args, "subjects", None)
    if pattern is None:
        return None
    return lambda sid: fnmatch.fnmatch(sid, pattern)


def cmd_plan(args) -> int:
    config = load_config(args)
    return run_plan(config, subject_filter(args))


def run_plan(config: PipelineConfig, keep=None) -> int:
    subjects, warnings = discover_subjects(config.input_root, config)
    if keep is not None:
        subjects = [s for s in subjects if keep(s.subject_id)]
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    grid = config.grid()
    table = config.table()
    total_outputs = 0
    total_given = 0
    for files in subjects:
        jobs = plan_expressions(
            files.subject_id,
            [(a.label, a.intensity is None) for a in files.apexes],
            grid,
            config.mirror,
            table,
        )
        synth = sum(1 for j in jobs if not j.pass_through)
        passthrough = len(jobs) - synth
        given = len(files.apexes) + 1
        total_outputs += len(jobs)
        total_given += given
        print(
            f"{files.subject_id}: {len(jobs)} outputs "
            f"({synth} synthesized + {passthrough} pass-through) from {given} given"
        )
    if total_given:
        factor = total_outputs / total_given
        print(f"{len(subjects)} subjects, {total_outputs} outputs, factor {factor:.1f}x")
    else:
        print("0 subjects")
    return 0


def cmd_generate(args) -> int:
    config = load_config(args)
    keep = subject_filter(args)
    if args.dry_run:
        return run_plan(config, keep)
    if getattr(args, "subjects", None) is not None:
        subjects, _ = discover_subjects(config.input_root, config)
        if not any(keep(s.subject_id) for s in subjects):
            print(f"warning: no subjects match {args.subjects!r}", file=sys.stderr)

    start = time.perf_counter()
    summary = generate_dataset(config, jobs=args.jobs, subject_filter=keep)
    elapsed = time.perf_counter() - start
    for w in summary.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(
        f"{summary.subjects} subjects, {summary.images} images in {elapsed:.1f}s, "
        f"{summary.degenerate_triangles} degenerate-triangle warnings"
    )
    for failure in summary.failures:
        print(f"failed: {failure}", file=sys.stderr)
    if not summary.ok:
        return 2

    if args.check_determinism:
        scratch = tempfile.mkdtemp(prefix="affectmorph-determinism-")
        try:
            rerun = generate_dataset(
                replace(config, output_root=scratch), jobs=args.jobs, subject_filter=keep
            )
            if not rerun.ok:
                print("determinism check: rerun failed", file=sys.stderr)
                return 2
            mismatches = _tree_diff(Path(config.output_root), Path(scratch))
            if mismatches:
                for m in mismatches[:20]:
                    print(f"determinism mismatch: {m}", file=sys.stderr)
                return 2
            print("determinism check passed")
        finally:
            shutil.rmtree(scratch, ignore_errors=True)
    return 0


def _tree_diff(a: Path, b: Path) -> list[str]:
    files_a = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    if files_a != files_b:
        return [f"file sets differ: {len(files_a)} vs {len(files_b)}"]
    out = []
    for rel in files_a:
        if not filecmp.cmp(a / rel, b / rel, shallow=False):
            out.append(str(rel))
    return out


def cmd_stats(args) -> int:
    records = read_manifest(args.manifest)
    if not records:
        print("0 records")
        return 0
    cells: Counter = Counter()
    per_subject: Counter = Counter()
    neutral = 0
    for r in records:
        per_subject[r.subject_id] += 1
        if r.intensity == 0.0:
            neutral += 1
        else:
            cells[(r.angle_deg, r.r_radial)] += 1
    print(f"{len(records)} records, {len(per_subject)} subjects, {neutral} neutral")
    print("per-subject totals:")
    for sid, n in sorted(per_subject.items()):
        print(f"  {sid}: {n}")
    if cells:
        counts = sorted(cells.values())
        modal = Counter(cells.values()).most_common(1)[0][0]
        print(f"grid cells: {len(cells)}, counts min={counts[0]} max={counts[-1]}")
        print("records per (angle, ratio) cell:")
        for (angle, ratio), n in sorted(cells.items()):
            flag = "" if n == modal else "  *"
            print(f"  {angle:7.1f} {ratio:5.2f}: {n}{flag}")
        balanced = counts[0] == counts[-1]
        print(f"balanced: {'yes' if balanced else 'no'}")
    return 0


def cmd_validate(args) -> int:
    records = read_manifest(args.manifest)
    image_root = Path(args.image_root) if args.image_root else Path(args.manifest).parent
    config = PipelineConfig.from_json(args.config) if args.config else None

    grid_cells = None
    canvas = None
    if config is not None:
        grid = config.grid()
        grid_cells = {(round(a, 6), round(r, 6)) for a, r in grid.nodes}
        canvas = (config.canvas_width, config.canvas_height)

    violations = []
    for i, r in enumerate(records, start=2):
        where = f"row {i} ({r.file})"
        v_expect = r.intensity * math.cos(math.radians(r.angle_deg))
        a_expect = r.intensity * math.sin(math.radians(r.angle_deg))
        if abs(r.valence - v_expect) > _VA_TOL:
            violations.append(f"{where}: valence {r.valence} != I*cos(theta) {v_expect:.8f}")
        if abs(r.arousal - a_expect) > _VA_TOL:
            violations.append(f"{where}: arousal {r.arousal} != I*sin(theta) {a_expect:.8f}")
        if abs(r.valence**2 + r.arousal**2 - r.intensity**2) > _VA_TOL:
            violations.append(f"{where}: V^2+A^2 deviates from I^2")
        path = image_root / r.file
        if not path.is_file():
            violations.append(f"{where}: file not found")
        elif canvas is not None:
            from PIL import Image

            with Image.open(path) as img:
                if img.size != canvas:
                    violations.append(f"{where}: image size {img.size} != canvas {canvas}")
        if grid_cells is not None and r.intensity > 0.0:
            cell = (round(r.angle_deg, 6), round(r.r_radial, 6))
            if cell not in grid_cells:
                violations.append(f"{where}: ({r.angle_deg}, {r.r_radial}) not on the grid")
    for v in violations:
        print(v)
    print(f"{len(records)} records, {len(violations)} violations")
    return 0 if not violations else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AffectMorphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
