"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with `pytest -v tests/test_acceptance.py`; a per-criterion PASS summary
is printed at the end of the session (see conftest.pytest_terminal_summary).
"""

import json
import math
import shutil
import subprocess
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from affectmorph.affect import Expression, build_template, augmentation_factor
from affectmorph.cli import main
from affectmorph.dataset import (
    PipelineConfig,
    discover_subjects,
    generate_dataset,
    read_manifest,
)
from affectmorph.geometry import incircle, triangulate
from affectmorph.landmarks import add_boundary_points, parse_landmarks
from affectmorph.morph import mean_shape, morph
from affectmorph.pipeline import plan_expressions
from affectmorph.sample_faces import synth_face, write_sample_dataset
from affectmorph.warp import piecewise_warp

from conftest import SMALL, aligned_face, config_dict, record_criterion
from oracles import all_triangulations, circumcircle_contains, min_angle, psnr

ALL_APEXES = [(e, False) for e in (
    Expression.HAPPY, Expression.SURPRISED, Expression.AFRAID,
    Expression.ANGRY, Expression.DISGUSTED, Expression.SAD,
)]


@pytest.fixture(scope="module")
def big_run(tmp_path_factory):
    """One full-canvas subject through the default grid, timed end to end."""
    root = tmp_path_factory.mktemp("accept-512")
    write_sample_dataset(
        root / "in", ["subjectA"], canvas=(512, 512),
        intensities={Expression.HAPPY: 0.9, Expression.SURPRISED: 0.85},
    )
    cfg = PipelineConfig.from_dict(
        {"input_root": str(root / "in"), "output_root": str(root / "out")}
    )
    start = time.perf_counter()
    summary = generate_dataset(cfg, jobs=1)
    elapsed = time.perf_counter() - start
    assert summary.ok, summary.failures
    return cfg, summary, elapsed


class TestCountReproduction:
    def test_default_grid_141_outputs(self, big_run):
        cfg, summary, elapsed = big_run
        records = read_manifest(Path(cfg.output_root) / "manifest.csv")
        assert summary.images == 141
        assert len(records) == 141
        files = list((Path(cfg.output_root) / "subjectA").glob("*.png"))
        assert len(files) == 141
        synthesized = [r for r in records if r.origin != "original"]
        passthrough = [r for r in records if r.origin == "original"]
        assert len(synthesized) == 134
        assert len(passthrough) == 7
        factor = augmentation_factor(cfg.grid(), 7, False)
        assert round(factor, 1) == 20.1
        assert elapsed < 60.0, f"512x512 full-subject run took {elapsed:.1f}s"
        record_criterion(
            "count-reproduction",
            f"141 = 134 + 7 at 512x512 in {elapsed:.1f}s, factor {factor:.1f}x",
        )

    def test_mirrored_282_outputs(self, dataset_tree):
        jobs = plan_expressions("s", ALL_APEXES, build_template(10, 205, 15, 0.1), mirrored=True)
        assert len(jobs) == 282
        cfg = PipelineConfig.from_dict(
            config_dict(dataset_tree, "out-mirror", mirror=True)
        )
        summary = generate_dataset(cfg, jobs=1, subject_filter=lambda s: s == "s01")
        assert summary.ok and summary.images == 282
        factor = augmentation_factor(cfg.grid(), 7, True)
        assert round(factor) == 40
        record_criterion("count-reproduction-mirrored", f"282 outputs, factor {factor:.1f}x")


class TestFineGrid:
    def test_541_outputs(self, tmp_path):
        write_sample_dataset(tmp_path / "in", ["fineA"], canvas=(96, 96))
        cfg = PipelineConfig.from_dict(
            {
                "input_root": str(tmp_path / "in"),
                "output_root": str(tmp_path / "out"),
                "grid": {"angle_step_deg": 7.5, "radial_step": 0.05},
                "frame": {"canvas_width": 96, "canvas_height": 96},
            }
        )
        summary = generate_dataset(cfg, jobs=1)
        assert summary.ok
        assert summary.images == 541
        files = list((tmp_path / "out" / "fineA").glob("*.png"))
        assert len(files) == 541
        factor = augmentation_factor(cfg.grid(), 7, False)
        assert factor == pytest.approx(541 / 7)
        record_criterion("fine-grid-count", f"541 outputs, exact factor {factor:.1f}x")


class TestEndpointFidelity:
    def test_twenty_random_pairs(self):
        rng = np.random.default_rng(2024)
        worst = 0
        for i in range(20):
            sid = f"ep-{i}"
            v1, a1 = rng.uniform(-1, 1), rng.uniform(-0.2, 1)
            v2, a2 = rng.uniform(-1, 1), rng.uniform(-0.2, 1)
            f1 = aligned_face(sid, Expression.HAPPY, 1.0, jitter=i + 1)
            f2 = aligned_face(sid, Expression.SAD, 1.0, jitter=i + 101)
            p1 = add_boundary_points(f1.landmarks).points
            p2 = add_boundary_points(f2.landmarks).points
            tri = triangulate(mean_shape(p1, p2))
            r0 = morph(f1.image, p1, f2.image, p2, 0.0, tri=tri)
            r1 = morph(f1.image, p1, f2.image, p2, 1.0, tri=tri)
            d0 = int(np.abs(r0.image.astype(int) - f1.image.astype(int)).max())
            d1 = int(np.abs(r1.image.astype(int) - f2.image.astype(int)).max())
            assert d0 <= 1 and d1 <= 1, f"pair {i}: endpoint deviation {d0}/{d1}"
            worst = max(worst, d0, d1)
        record_criterion("endpoint-fidelity", f"20 pairs, worst per-channel deviation {worst}")


class TestAnnotationConsistency:
    def _check(self, records):
        worst_v = worst_a = worst_c = 0.0
        for r in records:
            v = r.intensity * math.cos(math.radians(r.angle_deg))
            a = r.intensity * math.sin(math.radians(r.angle_deg))
            worst_v = max(worst_v, abs(r.valence - v))
            worst_a = max(worst_a, abs(r.arousal - a))
            worst_c = max(worst_c, abs(r.valence**2 + r.arousal**2 - r.intensity**2))
        assert worst_v < 1e-6 and worst_a < 1e-6 and worst_c < 1e-6
        return worst_v, worst_a, worst_c

    def test_full_manifests(self, big_run, full_run):
        cfg_big, _, _ = big_run
        cfg_small, _ = full_run
        records = read_manifest(Path(cfg_big.output_root) / "manifest.csv")
        records += read_manifest(Path(cfg_small.output_root) / "manifest.csv")
        worst_v, worst_a, worst_c = self._check(records)
        record_criterion(
            "annotation-consistency",
            f"{len(records)} rows, max |V-Icos|={worst_v:.2e}, "
            f"max |A-Isin|={worst_a:.2e}, max circle={worst_c:.2e}",
        )


class TestDelaunayCorrectness:
    def test_bruteforce_and_minangle_oracles(self):
        start = time.perf_counter()
        rng = np.random.default_rng(7)

        # 1000 random point sets, exact empty-circumcircle verification
        checked = 0
        for _ in range(1000):
            n = int(rng.integers(3, 51))
            pts = rng.random((n, 2)) * rng.choice([1.0, 100.0, 10000.0])
            tri = triangulate(pts)
            coords = [tuple(p) for p in pts]
            for i, j, k in tri.triangles:
                others = (m for m in range(n) if m not in (int(i), int(j), int(k)))
                for m in others:
                    assert not circumcircle_contains(
                        coords[i], coords[j], coords[k], coords[m]
                    ), f"vertex {m} inside circumcircle of {(i, j, k)}"
                checked += 1

        # exhaustive max-min-angle comparison for small sets
        enumerated = 0
        sizes = [4, 5, 6, 7, 8, 9, 10] * 8 + [11] * 4 + [12] * 4
        for n in sizes:
            pts = rng.random((n, 2)) * 10
            tri = triangulate(pts)
            mine = frozenset(tuple(sorted(map(int, t))) for t in tri.triangles)
            space = all_triangulations(pts, tri.triangles)
            assert mine in space
            best = min_angle(mine, pts)
            for other in space:
                assert best >= min_angle(other, pts) - 1e-9
            enumerated += len(space)

        elapsed = time.perf_counter() - start
        assert elapsed < 300.0, f"Delaunay acceptance took {elapsed:.0f}s"
        record_criterion(
            "delaunay-correctness",
            f"1000 sets brute-forced ({checked} triangles), "
            f"{len(sizes)} sets vs {enumerated} enumerated triangulations, {elapsed:.0f}s",
        )

    def test_cocircular_tie_degeneracy(self):
        tri = triangulate([(0, 0), (1, 0), (1, 1), (0, 1)])
        assert tri.triangles.tolist() == [[0, 1, 2], [0, 2, 3]]


class TestWarpOracle:
    def test_affine_ramp_one_lsb(self):
        # bilinear sampling is exact on linear fields, so the warped ramp
        # must match the analytic affine image up to the final rounding
        img = np.zeros((96, 96, 3), dtype=np.uint8)
        ys, xs = np.mgrid[0:96, 0:96]
        img[..., 0] = np.clip(np.rint(2.0 * xs + 0.25 * ys + 4.0), 0, 255)
        img[..., 1] = img[..., 0]
        img[..., 2] = img[..., 0]
        src = np.array([(14.0, 12.0), (82.0, 18.0), (38.0, 84.0)])
        mat = np.array([[1.1, -0.12], [0.08, 0.95]])
        shift = np.array([-3.0, 4.0])
        dst = src @ mat.T + shift
        from affectmorph.geometry import Triangulation

        tri = Triangulation(points=dst.copy(), triangles=np.array([[0, 1, 2]], dtype=np.int32))
        out = piecewise_warp(img, src, dst, tri, fill=(0, 0, 0)).image

        inv = np.linalg.inv(mat)
        h = w = 96
        gys, gxs = np.mgrid[0:h, 0:w]
        back = (np.stack([gxs, gys], -1).reshape(-1, 2) - shift) @ inv.T
        analytic = np.clip(np.rint(2.0 * back[:, 0] + 0.25 * back[:, 1] + 4.0), 0, 255).reshape(h, w)

        margin = _interior_mask(dst, (h, w), 1.5)
        diff = np.abs(out[..., 0].astype(float) - analytic)[margin]
        assert diff.max() <= 1
        record_criterion("warp-oracle-affine", f"max interior deviation {diff.max():.0f} LSB")

    def test_round_trip_psnr(self):
        rng = np.random.default_rng(4)
        ys, xs = np.mgrid[0:96, 0:96]
        waves = 127.5 + 127.5 * np.sin(2 * np.pi * xs / 16) * np.sin(2 * np.pi * ys / 16)
        img = np.repeat(np.rint(waves)[..., None], 3, axis=2).astype(np.uint8)
        base = np.asarray(
            [(x, y) for y in (24, 48, 72) for x in (24, 48, 72)]
            + [(0, 0), (95, 0), (95, 95), (0, 95), (48, 0), (95, 48), (48, 95), (0, 48)],
            dtype=float,
        )
        moved = base.copy()
        moved[:9] += rng.uniform(-2.5, 2.5, (9, 2))
        tri = triangulate((base + moved) / 2.0)
        fwd = piecewise_warp(img, base, moved, tri).image
        back = piecewise_warp(fwd, moved, base, tri).image
        inner = (slice(10, 86), slice(10, 86))
        value = psnr(back[inner], img[inner])
        assert value > 30.0
        record_criterion("warp-oracle-roundtrip", f"PSNR {value:.1f} dB")


class TestMorphSymmetry:
    def test_fifty_draws(self):
        # r on the dyadic lattice k/256 so that 1-(1-r) == r exactly in floats
        rng = np.random.default_rng(99)
        pairs = []
        for i in range(5):
            sid = f"sym-{i}"
            pairs.append(
                (
                    aligned_face(sid, Expression.SURPRISED, 1.0, jitter=i + 1),
                    aligned_face(sid, Expression.ANGRY, 1.0, jitter=i + 51),
                )
            )
        checked = 0
        for a, b in pairs:
            pa = add_boundary_points(a.landmarks).points
            pb = add_boundary_points(b.landmarks).points
            tri = triangulate(mean_shape(pa, pb))
            for _ in range(10):
                r = int(rng.integers(1, 256)) / 256.0
                fwd = morph(a.image, pa, b.image, pb, r, tri=tri)
                rev = morph(b.image, pb, a.image, pa, 1.0 - r, tri=tri)
                assert np.array_equal(fwd.landmarks, rev.landmarks)
                assert int(np.abs(fwd.image.astype(int) - rev.image.astype(int)).max()) <= 1
                checked += 1
        assert checked == 50
        record_criterion("morph-symmetry", "50 draws, landmarks exact, images within 1 LSB")


class TestDeterminism:
    def test_jobs_1_vs_8_byte_identical(self, dataset_tree, tmp_path):
        cfg_doc = config_dict(dataset_tree, "unused")
        runs = {}
        for jobs in (1, 8):
            out = tmp_path / f"out-j{jobs}"
            doc = dict(cfg_doc, output_root=str(out))
            cfg_path = tmp_path / f"cfg-j{jobs}.json"
            cfg_path.write_text(json.dumps(doc))
            code = main(
                ["generate", "--config", str(cfg_path), "--jobs", str(jobs), "--subjects", "s0[12]"]
            )
            assert code == 0
            runs[jobs] = out
        files1 = sorted(p.relative_to(runs[1]) for p in runs[1].rglob("*") if p.is_file())
        files8 = sorted(p.relative_to(runs[8]) for p in runs[8].rglob("*") if p.is_file())
        assert files1 == files8
        assert len(files1) == 282 + 1  # images plus manifest
        for rel in files1:
            assert (runs[1] / rel).read_bytes() == (runs[8] / rel).read_bytes(), rel
        record_criterion("determinism", f"{len(files1)} files byte-identical across --jobs 1/8")


class TestBalance:
    def test_every_cell_equals_complete_subject_count(self, full_run, capsys):
        cfg, _ = full_run
        manifest = Path(cfg.output_root) / "manifest.csv"
        records = read_manifest(manifest)
        cells = {}
        for r in records:
            if r.intensity == 0.0:
                continue
            cells.setdefault((r.angle_deg, r.r_radial), 0)
            cells[(r.angle_deg, r.r_radial)] += 1
        assert len(cells) == 140
        assert set(cells.values()) == {2}  # two complete subjects in the run
        assert main(["stats", str(manifest)]) == 0
        out = capsys.readouterr().out
        assert "balanced: yes" in out
        record_criterion("balance", "140 non-neutral cells, every count == 2 subjects")


class TestSecondaryContract:
    def test_extractor_sidecars_parse_in_primary(self, tmp_path):
        exe = shutil.which("extract-landmarks")
        if exe is None:
            pytest.skip("landmark extractor CLI not installed")
        portraits = tmp_path / "portraits"
        portraits.mkdir()
        from PIL import Image

        for i in range(6):
            img, _ = synth_face(f"portrait-{i}", 0.4 - 0.1 * i, 0.2 + 0.1 * i, canvas=(256, 256))
            Image.fromarray(img, mode="RGB").save(portraits / f"p{i}.png")

        proc = subprocess.run(
            [exe, str(portraits)], capture_output=True, text=True, timeout=300
        )
        assert proc.returncode == 0, proc.stderr
        sidecars = sorted(portraits.glob("*.landmarks.json"))
        assert len(sidecars) >= 5, proc.stdout
        for sc in sidecars:
            lm = parse_landmarks(sc.read_bytes(), expected_count=68)
            assert np.isfinite(lm.points).all()
            assert (lm.points[:, 0] >= 0).all() and (lm.points[:, 0] < lm.image_width).all()
            assert (lm.points[:, 1] >= 0).all() and (lm.points[:, 1] < lm.image_height).all()
        record_criterion(
            "secondary-contract", f"{len(sidecars)} sidecars parse cleanly with 68 in-bounds points"
        )


def _interior_mask(tri_pts, shape, margin):
    h, w = shape
    ys, xs = np.mgrid[0:h, 0:w]
    mask = np.ones((h, w), dtype=bool)
    for i in range(3):
        a = tri_pts[i]
        b = tri_pts[(i + 1) % 3]
        nx, ny = -(b[1] - a[1]), b[0] - a[0]
        norm = np.hypot(nx, ny)
        sd = ((xs - a[0]) * nx + (ys - a[1]) * ny) / norm
        third = tri_pts[(i + 2) % 3]
        if (third[0] - a[0]) * nx + (third[1] - a[1]) * ny < 0:
            sd = -sd
        mask &= sd > margin
    return mask
