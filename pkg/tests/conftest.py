"""Shared fixtures: synthetic panoramas, a 3-scene tour, compiled bundles."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """One visible PASS/FAIL line per acceptance criterion."""
    outcome = yield
    report = outcome.get_result()
    criterion = getattr(item.function, "criterion", None)
    if report.when == "call" and criterion:
        reporter = item.config.pluginmanager.get_plugin("terminalreporter")
        if reporter is not None:
            verdict = "PASS" if report.passed else "FAIL"
            reporter.write_line(f"ACCEPTANCE [{verdict}] {criterion}")


def criterion(label: str):
    """Tag an acceptance test with its criterion label."""
    def mark(fn):
        fn.criterion = label
        return fn
    return mark

from panotour.bundle import CompileOptions, compile_bundle
from panotour.geometry import Dimensions
from panotour.media import EQUIRECTANGULAR, encode_jpeg, encode_png, inject_xmp_projection
from panotour.projection import EquirectImage


def make_noise_panorama(width: int = 256, height: int = 128, channels: int = 3,
                        seed: int = 7) -> EquirectImage:
    rng = np.random.default_rng(seed)
    pixels = rng.integers(0, 256, (height, width, channels), dtype=np.uint8)
    return EquirectImage(Dimensions(width, height), pixels)


def make_gradient_panorama(width: int = 512, height: int = 256) -> EquirectImage:
    """Smooth content; good for resampling-error comparisons."""
    x = np.linspace(0.0, 4 * np.pi, width, endpoint=False)
    y = np.linspace(0.0, 2 * np.pi, height, endpoint=False)
    xx, yy = np.meshgrid(x, y)
    r = (np.sin(xx) * 0.5 + 0.5) * 255
    g = (np.cos(yy) * 0.5 + 0.5) * 255
    b = (np.sin(xx + yy) * 0.5 + 0.5) * 255
    pixels = np.stack([r, g, b], axis=-1).astype(np.uint8)
    return EquirectImage(Dimensions(width, height), pixels)


def tagged_png(img: EquirectImage) -> bytes:
    return inject_xmp_projection(encode_png(img), EQUIRECTANGULAR)


def tagged_jpeg(img: EquirectImage) -> bytes:
    return inject_xmp_projection(encode_jpeg(img), EQUIRECTANGULAR)


SAMPLE_MANIFEST = {
    "id": "workshop",
    "title": "Machinery workshop tour",
    "start_scene": "intro",
    "scenes": [
        {
            "id": "intro",
            "title": "Introduction area",
            "panorama": "pano/intro.png",
            "initial_view": {"yaw_deg": 0.0, "pitch_deg": 0.0, "fov_deg": 90.0},
            "hotspots": [
                {"id": "to-medium", "kind": "link", "yaw_deg": 40.0, "pitch_deg": -5.0,
                 "title": "Go to the medium area", "payload": "medium"},
                {"id": "lathe-text", "kind": "text", "yaw_deg": -60.0, "pitch_deg": 0.0,
                 "title": "About the lathe", "payload": "A lathe spins the workpiece."},
            ],
        },
        {
            "id": "medium",
            "title": "Medium area",
            "panorama": "pano/medium.png",
            "initial_view": {"yaw_deg": 15.0, "pitch_deg": 0.0, "fov_deg": 75.0},
            "hotspots": [
                {"id": "to-advance", "kind": "link", "yaw_deg": -30.0, "pitch_deg": 0.0,
                 "title": "Go to the advanced area", "payload": "advance"},
                {"id": "mill-photo", "kind": "picture", "yaw_deg": 95.0, "pitch_deg": 10.0,
                 "title": "Milling machine", "payload": "detail/mill.png"},
            ],
        },
        {
            "id": "advance",
            "title": "Advanced area",
            "panorama": "pano/advance.png",
            "initial_view": {"yaw_deg": -45.0, "pitch_deg": 5.0, "fov_deg": 90.0},
            "hotspots": [
                {"id": "back-to-intro", "kind": "link", "yaw_deg": 170.0, "pitch_deg": 0.0,
                 "title": "Back to the introduction", "payload": "intro"},
                {"id": "cnc-video", "kind": "video", "yaw_deg": 20.0, "pitch_deg": -10.0,
                 "title": "CNC demo", "payload": "https://www.youtube.com/watch?v=dQw4w9WgXcQ"},
            ],
        },
    ],
}


def write_sample_media(root: Path, pano_width: int = 256) -> Path:
    """Lay out the 3-scene fixture's media directory under root/media."""
    media = root / "media"
    (media / "pano").mkdir(parents=True, exist_ok=True)
    (media / "detail").mkdir(parents=True, exist_ok=True)
    for i, name in enumerate(("intro", "medium", "advance")):
        img = make_noise_panorama(pano_width, pano_width // 2, seed=100 + i)
        (media / "pano" / f"{name}.png").write_bytes(tagged_png(img))
    detail = make_noise_panorama(64, 32, seed=50)
    (media / "detail" / "mill.png").write_bytes(encode_png(detail))
    return media


def write_sample_manifest(root: Path) -> Path:
    path = root / "tour.json"
    path.write_text(json.dumps(SAMPLE_MANIFEST, indent=2), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def sample_tree(tmp_path_factory) -> Path:
    """Session-wide manifest + media fixture tree."""
    root = tmp_path_factory.mktemp("sample")
    write_sample_media(root)
    write_sample_manifest(root)
    return root


@pytest.fixture(scope="session")
def sample_bundle(sample_tree: Path):
    """The 3-scene fixture compiled once per session (with cubemaps)."""
    out = sample_tree / "bundle"
    return compile_bundle(sample_tree / "tour.json", sample_tree / "media", out,
                          CompileOptions(cubemaps=True, cube_size=64))
