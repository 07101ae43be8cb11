"""Read-only HTTP service over a compiled tour bundle.

Endpoints (HTTP/1.1, GET):

    /api/tour                              resolved manifest (JSON)
    /api/scene/{id}/pano                   panorama bytes (Range supported)
    /api/scene/{id}/preview                little-planet preview PNG
    /api/scene/{id}/cubemap/{px|nx|py|ny|pz|nz}
    /api/scene/{id}/view?yaw_deg&pitch_deg&fov_deg&w&h   server-side render
    /api/media/{ref}                       picture hotspot payloads
    /api/metrics                           request metrics snapshot (JSON)
    /            /viewer/*                 static client assets

Errors are JSON bodies ``{"code": ..., "message": ...}``. The bundle is
verified against its digest at startup and never mutated; render
concurrency is bounded by a semaphore (excess requests queue).
"""

from __future__ import annotations

import json
import logging
import math
import re
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path, PurePosixPath
from urllib.parse import parse_qs, urlsplit

from .bundle import TourBundle, load_bundle, verify_bundle
from .geometry import Dimensions
from .media import decode_image, encode_png
from .projection import ViewParams, render_perspective

__all__ = [
    "ServerConfig",
    "EndpointStats",
    "MetricsRegistry",
    "TourServer",
    "serve",
]

logger = logging.getLogger(__name__)

MAX_VIEW_SIZE = 2048
MAX_VIEW_FOV_DEG = 170.0

_CUBE_FACE_NAMES = ("px", "nx", "py", "ny", "pz", "nz")

_CONTENT_TYPES = {
    ".png": "image/png",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".json": "application/json",
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".svg": "image/svg+xml",
}

_RANGE_RE = re.compile(r"^bytes=(\d*)-(\d*)$")


@dataclass(frozen=True)
class ServerConfig:
    bundle_path: Path
    host: str = "127.0.0.1"
    port: int = 8360
    cache_seconds: int = 60
    max_concurrent_renders: int = 2

    def __post_init__(self) -> None:
        if not (0 <= self.port <= 65535):
            raise ValueError(f"invalid port {self.port}")
        if self.max_concurrent_renders < 1:
            raise ValueError("max_concurrent_renders must be >= 1")


@dataclass(frozen=True)
class EndpointStats:
    count: int
    bytes_sent: int
    p50_ms: float
    p95_ms: float
    max_ms: float


@dataclass
class MetricsRegistry:
    """Per-endpoint counters; thread-safe, monotonically accumulating."""

    _lock: threading.Lock = field(default_factory=threading.Lock)
    _counts: dict = field(default_factory=dict)
    _bytes: dict = field(default_factory=dict)
    _latencies: dict = field(default_factory=dict)

    def record(self, endpoint: str, nbytes: int, latency_ms: float) -> None:
        with self._lock:
            self._counts[endpoint] = self._counts.get(endpoint, 0) + 1
            self._bytes[endpoint] = self._bytes.get(endpoint, 0) + nbytes
            self._latencies.setdefault(endpoint, []).append(latency_ms)

    def snapshot(self) -> dict[str, EndpointStats]:
        with self._lock:
            out = {}
            for key in sorted(self._counts):
                lat = sorted(self._latencies[key])
                n = len(lat)
                out[key] = EndpointStats(
                    count=self._counts[key],
                    bytes_sent=self._bytes[key],
                    p50_ms=lat[int(0.50 * (n - 1))] if n else 0.0,
                    p95_ms=lat[int(0.95 * (n - 1))] if n else 0.0,
                    max_ms=lat[-1] if n else 0.0,
                )
            return out


def _snapshot_doc(snapshot: dict[str, EndpointStats]) -> dict:
    return {
        key: {
            "count": s.count,
            "bytes_sent": s.bytes_sent,
            "latency_ms": {"p50": s.p50_ms, "p95": s.p95_ms, "max": s.max_ms},
        }
        for key, s in snapshot.items()
    }


class _HandlerError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


def _bad(message: str) -> _HandlerError:
    return _HandlerError(400, "BAD_PARAM", message)


def _not_found(message: str) -> _HandlerError:
    return _HandlerError(404, "NOT_FOUND", message)


def _float_param(params: dict, name: str, default: float,
                 lo: float | None = None, hi: float | None = None,
                 lo_exclusive: bool = False) -> float:
    raw = params.get(name, [None])[0]
    if raw is None:
        return default
    try:
        value = float(raw)
    except ValueError:
        raise _bad(f"parameter {name} must be a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise _bad(f"parameter {name} must be finite")
    if lo is not None and (value <= lo if lo_exclusive else value < lo):
        raise _bad(f"parameter {name}={value} below the minimum {lo}")
    if hi is not None and value > hi:
        raise _bad(f"parameter {name}={value} above the maximum {hi}")
    return value


def _int_param(params: dict, name: str, default: int, lo: int, hi: int) -> int:
    raw = params.get(name, [None])[0]
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise _bad(f"parameter {name} must be an integer, got {raw!r}") from None
    if not (lo <= value <= hi):
        raise _bad(f"parameter {name}={value} outside [{lo}, {hi}]")
    return value


class TourServer:
    """Serves one immutable bundle; construct, then start()/stop() or
    serve_forever()."""

    def __init__(self, config: ServerConfig):
        self.config = config
        verify_bundle(config.bundle_path)  # startup integrity gate
        self.bundle: TourBundle = load_bundle(config.bundle_path)
        self.metrics = MetricsRegistry()
        self._render_sem = threading.BoundedSemaphore(config.max_concurrent_renders)
        self._pano_cache: dict[str, object] = {}
        self._pano_lock = threading.Lock()
        self._thread: threading.Thread | None = None

        server = self

        class Handler(_TourRequestHandler):
            tour_server = server

        self._httpd = ThreadingHTTPServer((config.host, config.port), Handler)
        self._httpd.daemon_threads = True

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def url(self) -> str:
        return f"http://{self.config.host}:{self.port}"

    def start(self) -> None:
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def serve_forever(self) -> None:
        try:
            self._httpd.serve_forever()
        finally:
            self._httpd.server_close()

    def metrics_snapshot(self) -> dict[str, EndpointStats]:
        return self.metrics.snapshot()

    def scene_panorama(self, scene_id: str):
        """Decoded panorama for the render endpoint, cached per scene."""
        with self._pano_lock:
            if scene_id in self._pano_cache:
                return self._pano_cache[scene_id]
        rec = self.bundle.scene_asset(scene_id, "pano.")
        if rec is None:
            raise _not_found(f"scene {scene_id!r} has no panorama")
        img, _ = decode_image((self.bundle.root / rec.path).read_bytes())
        with self._pano_lock:
            self._pano_cache[scene_id] = img
        return img


class _TourRequestHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    tour_server: TourServer  # injected by TourServer

    # -- plumbing ---------------------------------------------------------

    def log_message(self, fmt, *args):  # quiet; the metrics carry the story
        logger.debug("%s %s", self.address_string(), fmt % args)

    def _send(self, status: int, content_type: str, body: bytes,
              extra_headers: dict | None = None) -> int:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for name, value in (extra_headers or {}).items():
            self.send_header(name, value)
        self.end_headers()
        if body:
            self.wfile.write(body)
        return len(body)

    def _send_json(self, status: int, doc: dict) -> int:
        return self._send(status, "application/json",
                          (json.dumps(doc, indent=2) + "\n").encode("utf-8"))

    def _send_error_json(self, err: _HandlerError) -> int:
        return self._send_json(err.status, {"code": err.code, "message": err.message})

    def _send_asset(self, rel_path: str, allow_range: bool = False,
                    content_type: str | None = None) -> int:
        root: Path = self.tour_server.bundle.root
        target = root / rel_path
        if not target.is_file():
            raise _not_found(f"no such asset: {rel_path}")
        data = target.read_bytes()
        ctype = content_type or _CONTENT_TYPES.get(target.suffix.lower(),
                                                   "application/octet-stream")
        cache = {"Cache-Control": f"max-age={self.tour_server.config.cache_seconds}"}
        if allow_range:
            cache["Accept-Ranges"] = "bytes"
            range_header = self.headers.get("Range")
            if range_header:
                return self._send_range(data, ctype, range_header, cache)
        return self._send(200, ctype, data, cache)

    def _send_range(self, data: bytes, ctype: str, range_header: str,
                    headers: dict) -> int:
        size = len(data)
        m = _RANGE_RE.match(range_header.strip())
        if not m or (not m.group(1) and not m.group(2)):
            return self._send(200, ctype, data, headers)  # unparseable: ignore
        if m.group(1):
            start = int(m.group(1))
            end = int(m.group(2)) if m.group(2) else size - 1
        else:
            start = max(0, size - int(m.group(2)))  # suffix form bytes=-n
            end = size - 1
        end = min(end, size - 1)
        if start > end or start >= size:
            body = json.dumps({"code": "BAD_RANGE", "message": "unsatisfiable range"}).encode()
            return self._send(416, "application/json", body,
                              {"Content-Range": f"bytes */{size}"})
        headers = dict(headers)
        headers["Content-Range"] = f"bytes {start}-{end}/{size}"
        return self._send(206, ctype, data[start:end + 1], headers)

    # -- routing ----------------------------------------------------------

    def do_GET(self):  # noqa: N802 (http.server API)
        started = time.perf_counter()
        endpoint = "(unmatched)"
        nbytes = 0
        try:
            url = urlsplit(self.path)
            params = parse_qs(url.query)
            endpoint, handler = self._route(url.path)
            try:
                nbytes = handler(params)
            except _HandlerError as err:
                nbytes = self._send_error_json(err)
        except _HandlerError as err:
            nbytes = self._send_error_json(err)
        except (BrokenPipeError, ConnectionResetError):
            return
        except Exception as exc:  # defensive: never kill the worker thread
            logger.exception("unhandled error serving %s", self.path)
            try:
                nbytes = self._send_json(500, {"code": "INTERNAL", "message": str(exc)})
            except OSError:
                return
        finally:
            elapsed_ms = (time.perf_counter() - started) * 1000.0
            self.tour_server.metrics.record(endpoint, nbytes, elapsed_ms)

    def _route(self, path: str):
        parts = [p for p in path.split("/") if p]
        if path == "/" or not parts:
            return "/", lambda params: self._send_asset("viewer/index.html")
        if parts[0] == "viewer":
            rel = self._safe_join("viewer", parts[1:])
            return "/viewer/*", lambda params: self._send_asset(rel)
        if parts[0] != "api":
            raise _not_found(f"unknown path {path!r}")
        if parts[1:] == ["tour"]:
            return ("/api/tour",
                    lambda params: self._send_asset("manifest.resolved",
                                                    content_type="application/json"))
        if parts[1:] == ["metrics"]:
            return "/api/metrics", self._handle_metrics
        if len(parts) >= 3 and parts[1] == "media":
            rel = self._safe_join("media", parts[2:])
            return "/api/media/{ref}", lambda params: self._send_asset(rel)
        if len(parts) >= 4 and parts[1] == "scene":
            scene_id = parts[2]
            rest = parts[3:]
            if rest == ["pano"]:
                return "/api/scene/{id}/pano", lambda params: self._handle_pano(scene_id)
            if rest == ["preview"]:
                return ("/api/scene/{id}/preview",
                        lambda params: self._send_asset(f"scenes/{scene_id}/preview.png"))
            if len(rest) == 2 and rest[0] == "cubemap":
                face = rest[1]
                return ("/api/scene/{id}/cubemap/{face}",
                        lambda params: self._handle_cubemap(scene_id, face))
            if rest == ["view"]:
                return ("/api/scene/{id}/view",
                        lambda params: self._handle_view(scene_id, params))
        raise _not_found(f"unknown path {path!r}")

    @staticmethod
    def _safe_join(prefix: str, parts: list[str]) -> str:
        rel = PurePosixPath(*parts) if parts else None
        if rel is None or ".." in rel.parts or rel.is_absolute():
            raise _not_found("invalid asset path")
        return f"{prefix}/{rel.as_posix()}"

    # -- endpoint handlers --------------------------------------------------

    def _handle_metrics(self, params) -> int:
        snap = self.tour_server.metrics_snapshot()
        return self._send_json(200, _snapshot_doc(snap))

    def _scene_or_404(self, scene_id: str):
        scene = self.tour_server.bundle.tour.get_scene(scene_id)
        if scene is None:
            raise _not_found(f"no such scene: {scene_id!r}")
        return scene

    def _handle_pano(self, scene_id: str) -> int:
        self._scene_or_404(scene_id)
        rec = self.tour_server.bundle.scene_asset(scene_id, "pano.")
        if rec is None:
            raise _not_found(f"scene {scene_id!r} has no panorama asset")
        return self._send_asset(rec.path, allow_range=True)

    def _handle_cubemap(self, scene_id: str, face: str) -> int:
        self._scene_or_404(scene_id)
        if face not in _CUBE_FACE_NAMES:
            raise _not_found(f"unknown cube face {face!r}")
        return self._send_asset(f"scenes/{scene_id}/cube_{face}.png")

    def _handle_view(self, scene_id: str, params) -> int:
        self._scene_or_404(scene_id)
        yaw_deg = _float_param(params, "yaw_deg", 0.0)
        pitch_deg = _float_param(params, "pitch_deg", 0.0)
        fov_deg = _float_param(params, "fov_deg", 90.0, lo=0.0, hi=MAX_VIEW_FOV_DEG,
                               lo_exclusive=True)
        w = _int_param(params, "w", 640, 1, MAX_VIEW_SIZE)
        h = _int_param(params, "h", 480, 1, MAX_VIEW_SIZE)
        img = self.tour_server.scene_panorama(scene_id)
        view = ViewParams(math.radians(yaw_deg), math.radians(pitch_deg),
                          math.radians(fov_deg), Dimensions(w, h))
        with self.tour_server._render_sem:  # bounded render concurrency
            raster = render_perspective(img, view)
        body = encode_png(raster)
        return self._send(200, "image/png", body,
                          {"Cache-Control": f"max-age={self.tour_server.config.cache_seconds}"})


def serve(config: ServerConfig) -> TourServer:
    """Construct and start a TourServer in a background thread."""
    server = TourServer(config)
    server.start()
    return server
