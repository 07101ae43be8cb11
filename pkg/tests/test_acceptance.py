"""Acceptance suite. Each test enforces one release criterion at its
stated tolerance and reports a PASS/FAIL line on the terminal."""

import hashlib
import math
import random
import threading
import time

import numpy as np
import pytest
import requests

from panotour.bundle import CompileOptions, compile_bundle, inventory
from panotour.geometry import (Dimensions, PixelCoord, SphericalDirection, UnitVector,
                               pixel_to_sphere, sphere_to_pixel, sphere_to_vec,
                               vec_to_sphere)
from panotour.media import (EQUIRECTANGULAR, decode_image, encode_jpeg, encode_png,
                            inject_xmp_projection, validate_panorama)
from panotour.profiler import (ByteInventory, ClientModel, NetworkModel,
                               REFERENCE_CLIENT, REFERENCE_NETWORK, simulate_load)
from panotour.projection import EquirectImage, ViewParams, render_perspective
from panotour.server import ServerConfig, TourServer
from panotour.tour import parse_manifest, reachable_scenes, serialize_manifest, validate_tour

from conftest import criterion, make_noise_panorama, write_sample_manifest, write_sample_media
from test_profiler import SAMPLE_GOLDEN_CRITICAL_MS, SAMPLE_ROWS, oracle_schedule, random_inventory
from test_tour import make_random_tour, oracle_reachable


@criterion("projection round-trips: 10k directions within 1e-9 rad in under 1 s")
def test_projection_round_trips():
    rng = np.random.default_rng(101)
    dims = Dimensions(4096, 2048)
    limit = math.pi / 2 - 1e-6
    dirs = [
        SphericalDirection(float(y), float(p))
        for y, p in zip(rng.uniform(-math.pi, math.pi, 10_000),
                        rng.uniform(-limit, limit, 10_000))
    ]
    started = time.perf_counter()
    for s in dirs:
        via_pixel = pixel_to_sphere(sphere_to_pixel(s, dims), dims)
        assert abs(via_pixel.yaw - s.yaw) <= 1e-9
        assert abs(via_pixel.pitch - s.pitch) <= 1e-9
        via_vec = vec_to_sphere(sphere_to_vec(s))
        assert abs(via_vec.yaw - s.yaw) <= 1e-9
        assert abs(via_vec.pitch - s.pitch) <= 1e-9
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"round-trips took {elapsed:.3f}s"


@criterion("yaw-shift equivariance: 16 random column shifts render bit-exactly")
def test_yaw_shift_equivariance():
    rng = np.random.default_rng(103)
    pixels = rng.integers(0, 256, (512, 1024, 3), dtype=np.uint8)
    img = EquirectImage(Dimensions(1024, 512), pixels)
    w = img.dims.width
    for k in rng.integers(1, w, 16):
        k = int(k)
        delta = 2 * math.pi * k / w
        pitch = float(rng.uniform(-1.2, 1.2))
        fov = float(rng.uniform(0.4, 2.6))
        shifted = EquirectImage(img.dims, np.roll(pixels, -k, axis=1))
        a = render_perspective(img, ViewParams(delta, pitch, fov, Dimensions(64, 48)))
        b = render_perspective(shifted, ViewParams(0.0, pitch, fov, Dimensions(64, 48)))
        assert np.array_equal(a.pixels, b.pixels), f"shift k={k} not bit-exact"


@criterion("seam/pole safety: 1000 fuzzed views, in-bounds and deterministic")
def test_seam_and_pole_safety():
    img = make_noise_panorama(256, 128, seed=105)
    rng = np.random.default_rng(107)
    for i in range(1000):
        fov = float(rng.choice([1e-9, 1e-6, math.pi - 1e-9, math.pi - 1e-6,
                                rng.uniform(0.05, 3.1)]))
        pitch = float(rng.choice([math.pi / 2, -math.pi / 2,
                                  rng.uniform(-math.pi / 2, math.pi / 2)]))
        yaw = float(rng.uniform(-20.0, 20.0))
        view = ViewParams(yaw, pitch, fov, Dimensions(int(rng.integers(1, 24)),
                                                      int(rng.integers(1, 24))))
        first = render_perspective(img, view)
        second = render_perspective(img, view)
        assert np.array_equal(first.pixels, second.pixels), f"view {i} nondeterministic"


@criterion("media rules: aspect/XMP/filesize fixtures plus pixel-exact inject round-trip")
def test_media_rules():
    flat = EquirectImage(Dimensions(4096, 2048),
                         np.full((2048, 4096, 3), 90, dtype=np.uint8))
    tagged = inject_xmp_projection(encode_jpeg(flat), EQUIRECTANGULAR)
    _, meta = decode_image(tagged)
    assert validate_panorama(meta).ok

    camera_still = EquirectImage(Dimensions(2304, 1296),
                                 np.full((1296, 2304, 3), 120, dtype=np.uint8))
    _, meta = decode_image(inject_xmp_projection(encode_png(camera_still), EQUIRECTANGULAR))
    assert [f.code for f in validate_panorama(meta).errors()] == ["ASPECT"]

    _, meta = decode_image(encode_jpeg(flat))
    assert [f.code for f in validate_panorama(meta).errors()] == ["XMP"]

    from panotour.media import MediaLimits
    _, meta = decode_image(tagged)
    oversize = validate_panorama(meta, MediaLimits(max_bytes=meta.byte_size - 1))
    assert [f.code for f in oversize.errors()] == ["FILESIZE"]

    noisy = make_noise_panorama(512, 256, seed=109)
    for encode in (encode_png, encode_jpeg):
        stream = encode(noisy)
        injected = inject_xmp_projection(stream, EQUIRECTANGULAR)
        assert decode_image(injected)[1].projection_type == EQUIRECTANGULAR
        before, _ = decode_image(stream)
        after, _ = decode_image(injected)
        assert np.array_equal(before.pixels, after.pixels)


@criterion("tour graph: 200 reachability cases match the oracle; 100 round-trip fixpoints")
def test_tour_graph():
    rng = random.Random(111)
    for _ in range(200):
        tour = make_random_tour(rng, max_scenes=6, link_only=True)
        got = reachable_scenes(tour)
        want = oracle_reachable(tour)
        assert got == want
        unreachable = {f.location for f in validate_tour(tour, set()).findings
                       if f.code == "UNREACHABLE"}
        assert unreachable == {f"scenes[{sid}]" for sid in set(tour.scene_ids()) - want}

    for _ in range(100):
        tour = make_random_tour(rng)
        text = serialize_manifest(tour)
        parsed = parse_manifest(text)
        assert parsed == tour
        assert serialize_manifest(parsed) == text


@criterion("bundle determinism: identical recompile digest; exact inventory totals")
def test_bundle_determinism(tmp_path):
    media = write_sample_media(tmp_path)
    manifest = write_sample_manifest(tmp_path)
    first = compile_bundle(manifest, media, tmp_path / "a", CompileOptions(cubemaps=True))
    second = compile_bundle(manifest, media, tmp_path / "b", CompileOptions(cubemaps=True))
    assert first.content_digest == second.content_digest

    inv = inventory(first)
    independent = sum(
        p.stat().st_size for p in first.root.rglob("*")
        if p.is_file() and p.relative_to(first.root).as_posix() not in ("inventory", "digest")
    )
    assert inv.total_bytes() == independent
    assert sum(inv.category_totals().values()) == independent


@criterion("server equivalence: 20 view renders bit-identical; 50 concurrent = serial")
def test_server_equivalence(sample_bundle):
    import io
    from PIL import Image

    server = TourServer(ServerConfig(bundle_path=sample_bundle.root, port=0))
    server.start()
    try:
        rng = np.random.default_rng(113)
        scene_ids = [s.id for s in sample_bundle.tour.scenes]
        panos = {
            sid: decode_image((sample_bundle.root / f"scenes/{sid}/pano.png").read_bytes())[0]
            for sid in scene_ids
        }
        for _ in range(20):
            sid = scene_ids[int(rng.integers(0, len(scene_ids)))]
            yaw = round(float(rng.uniform(-180, 180)), 3)
            pitch = round(float(rng.uniform(-90, 90)), 3)
            fov = round(float(rng.uniform(20, 170)), 3)
            w = int(rng.integers(8, 128))
            h = int(rng.integers(8, 128))
            q = f"yaw_deg={yaw}&pitch_deg={pitch}&fov_deg={fov}&w={w}&h={h}"
            resp = requests.get(f"{server.url}/api/scene/{sid}/view?{q}", timeout=30)
            assert resp.status_code == 200
            got = np.asarray(Image.open(io.BytesIO(resp.content)))
            view = ViewParams(math.radians(yaw), math.radians(pitch),
                              math.radians(fov), Dimensions(w, h))
            want = render_perspective(panos[sid], view).pixels
            assert np.array_equal(got, want)

        paths = [
            "/api/tour",
            "/api/scene/intro/pano",
            "/api/scene/medium/preview",
            "/api/scene/advance/cubemap/py",
            "/api/media/detail/mill.png",
            "/api/scene/intro/view?yaw_deg=45&fov_deg=100&w=80&h=60",
            "/api/scene/medium/view?pitch_deg=-30&w=64&h=64",
            "/api/scene/advance/pano",
            "/api/scene/intro/preview",
            "/api/scene/medium/pano",
        ] * 5  # 50 requests
        serial = [hashlib.sha256(requests.get(server.url + p, timeout=30).content).hexdigest()
                  for p in paths]
        parallel = [None] * len(paths)

        def fetch(i):
            parallel[i] = hashlib.sha256(
                requests.get(server.url + paths[i], timeout=60).content).hexdigest()

        threads = [threading.Thread(target=fetch, args=(i,)) for i in range(len(paths))]
        for t in threads:
            t.start()
        for t in threads:
            t.join(timeout=120)
        assert parallel == serial
    finally:
        server.stop()


@criterion("profiler: oracle-exact on 100 inventories; exact halving; pinned golden")
def test_profiler_oracle():
    rng = random.Random(115)
    for _ in range(100):
        inv = random_inventory(rng)
        net = NetworkModel(float(rng.randint(500_000, 40_000_000)),
                           float(rng.randint(5, 200)), rng.randint(1, 8))
        client = ClientModel(float(rng.randint(200_000, 8_000_000)),
                             float(rng.randint(2_000_000, 40_000_000)))
        report = simulate_load(inv, net, client)
        want = oracle_schedule(inv.rows, net, client)
        assert [(t.path, t.start_ms, t.end_ms) for t in report.timeline] == want

        double = NetworkModel(net.bandwidth_bps * 2.0, net.rtt_ms, net.connections)
        halved = simulate_load(inv, double, client)
        for a, b in zip(report.timeline, halved.timeline):
            assert b.transfer_ms == a.transfer_ms / 2.0
        for cat, ct in report.categories.items():
            assert halved.categories[cat].transfer_ms == ct.transfer_ms / 2.0

    golden = simulate_load(ByteInventory(SAMPLE_ROWS), REFERENCE_NETWORK, REFERENCE_CLIENT)
    assert golden.critical_path_ms == SAMPLE_GOLDEN_CRITICAL_MS
