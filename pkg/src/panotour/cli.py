"""Command-line entry point: validate, compile, render, serve, profile.

All angle flags take degrees, matching the manifest convention. Exit
codes are stable: 0 success, 1 validation findings with errors, 2 usage
error, 3 I/O or internal error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from enum import IntEnum
from pathlib import Path

from .bundle import (BundleError, CompileError, CompileOptions, compile_bundle,
                     inventory, load_bundle)
from .geometry import Dimensions
from .media import Finding, MediaError, MediaLimits, decode_image, encode_png, validate_panorama
from .profiler import (ClientModel, NetworkModel, REFERENCE_CLIENT, REFERENCE_NETWORK,
                       render_report, simulate_load)
from .projection import ViewParams, render_little_planet, render_perspective
from .server import ServerConfig, TourServer
from .tour import TourError, parse_manifest, validate_tour

BIND_ENV_VAR = "PANOTOUR_BIND"
DEFAULT_BIND = "127.0.0.1:8360"


class ExitStatus(IntEnum):
    OK = 0
    FINDINGS = 1
    USAGE = 2
    IO = 3


def _size(value: str) -> Dimensions:
    try:
        w, h = value.lower().split("x")
        return Dimensions(int(w), int(h))
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"size must look like 640x480, got {value!r}") from exc


def _bind(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise argparse.ArgumentTypeError(f"bind must look like 127.0.0.1:8360, got {value!r}")
    return host, int(port)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise BundleError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise BundleError(f"config {path} must hold a JSON object")
    return doc


def _limits_from_config(config: dict, args=None) -> MediaLimits:
    """Config file values override the defaults; CLI flags override both."""
    raw = config.get("media_limits", {})

    def pick(flag, key, default):
        if args is not None and getattr(args, flag, None) is not None:
            return getattr(args, flag)
        return raw.get(key, default)

    return MediaLimits(
        max_width=pick("max_width", "max_width", MediaLimits.max_width),
        max_height=pick("max_height", "max_height", MediaLimits.max_height),
        max_bytes=pick("max_bytes", "max_bytes", MediaLimits.max_bytes),
    )


def _print_findings(findings: list[Finding], fmt: str, ok: bool) -> None:
    if fmt == "json":
        doc = {
            "ok": ok,
            "findings": [
                {"code": f.code, "severity": f.severity,
                 "location": f.location, "message": f.message}
                for f in findings
            ],
        }
        print(json.dumps(doc, indent=2))
        return
    for f in findings:
        where = f" {f.location}" if f.location else ""
        print(f"{f.severity.upper()} {f.code}{where}: {f.message}")


def _scan_media(media_dir: Path) -> set[str]:
    return {p.relative_to(media_dir).as_posix()
            for p in sorted(media_dir.rglob("*")) if p.is_file()}


def _cmd_validate(args) -> int:
    config = _load_config(args.config)
    limits = _limits_from_config(config, args)
    media_dir = Path(args.media)
    if not media_dir.is_dir():
        print(f"media directory not found: {media_dir}", file=sys.stderr)
        return ExitStatus.IO
    try:
        tour = parse_manifest(Path(args.manifest).read_text(encoding="utf-8"))
    except OSError as exc:
        print(f"cannot read manifest: {exc}", file=sys.stderr)
        return ExitStatus.IO
    except TourError as exc:
        print(f"manifest invalid: {exc}", file=sys.stderr)
        return ExitStatus.FINDINGS

    for warning in tour.parse_warnings:
        print(f"warning: {warning}", file=sys.stderr)

    available = _scan_media(media_dir)
    findings = list(validate_tour(tour, available).findings)
    for scene in tour.scenes:
        if scene.panorama not in available:
            continue
        try:
            _, meta = decode_image((media_dir / scene.panorama).read_bytes())
        except MediaError as exc:
            print(f"cannot decode {scene.panorama}: {exc}", file=sys.stderr)
            return ExitStatus.IO
        for f in validate_panorama(meta, limits).findings:
            findings.append(Finding(f.code, f.severity, f.message,
                                    f"scenes[{scene.id}].panorama"))

    ok = not any(f.severity == "error" for f in findings)
    _print_findings(findings, args.format, ok)
    return ExitStatus.OK if ok else ExitStatus.FINDINGS


def _cmd_compile(args) -> int:
    config = _load_config(args.config)
    options = CompileOptions(
        cubemaps=args.cubemaps,
        cube_size=args.cube_size,
        force=args.force,
        limits=_limits_from_config(config, args),
        viewer_dir=Path(args.viewer_dir) if args.viewer_dir else None,
    )
    try:
        bundle = compile_bundle(args.manifest, args.media, args.out, options)
    except CompileError as exc:
        _print_findings(exc.findings, args.format, ok=False)
        print("compile aborted on validation errors", file=sys.stderr)
        return ExitStatus.FINDINGS
    except (TourError, BundleError) as exc:
        print(f"compile failed: {exc}", file=sys.stderr)
        return ExitStatus.IO
    print(f"bundle written to {bundle.root}")
    print(f"content digest: {bundle.content_digest}")
    return ExitStatus.OK


def _cmd_render(args) -> int:
    try:
        img, _ = decode_image(Path(args.panorama).read_bytes())
    except OSError as exc:
        print(f"cannot read panorama: {exc}", file=sys.stderr)
        return ExitStatus.IO
    except MediaError as exc:
        print(f"cannot decode panorama: {exc}", file=sys.stderr)
        return ExitStatus.IO

    if args.little_planet:
        raster = render_little_planet(img, args.size, zoom=args.zoom)
    else:
        view = ViewParams(math.radians(args.yaw), math.radians(args.pitch),
                          math.radians(args.fov), args.size)
        raster = render_perspective(img, view)
    try:
        Path(args.out).write_bytes(encode_png(raster))
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return ExitStatus.IO
    print(f"wrote {args.out}")
    return ExitStatus.OK


def _cmd_serve(args) -> int:
    config = _load_config(args.config)
    server_cfg = config.get("server", {})
    bind = args.bind or os.environ.get(BIND_ENV_VAR) or server_cfg.get("bind") or DEFAULT_BIND
    host, port = _bind(bind) if isinstance(bind, str) else bind
    try:
        server = TourServer(ServerConfig(
            bundle_path=Path(args.bundle),
            host=host,
            port=port,
            cache_seconds=args.cache_seconds if args.cache_seconds is not None
            else server_cfg.get("cache_seconds", 60),
            max_concurrent_renders=args.max_renders if args.max_renders is not None
            else server_cfg.get("max_renders", 2),
        ))
    except BundleError as exc:
        print(f"cannot serve bundle: {exc}", file=sys.stderr)
        return ExitStatus.IO
    except OSError as exc:
        print(f"cannot bind {host}:{port}: {exc}", file=sys.stderr)
        return ExitStatus.IO
    print(f"serving {args.bundle} at {server.url} (interrupt to stop)", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        print("shutting down", file=sys.stderr)
    return ExitStatus.OK


def _cmd_profile(args) -> int:
    try:
        bundle = load_bundle(args.bundle)
        inv = inventory(bundle)
    except BundleError as exc:
        print(f"cannot profile bundle: {exc}", file=sys.stderr)
        return ExitStatus.IO
    net = NetworkModel(args.bandwidth * 1_000_000.0, args.rtt, args.connections)
    client = ClientModel(args.script_rate, args.image_rate)
    report = simulate_load(inv, net, client)
    sys.stdout.write(render_report(report, args.format))
    return ExitStatus.OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="panotour",
        description="360-degree virtual tour toolkit: validate, compile, render, serve, profile.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a manifest and its media")
    p.add_argument("manifest")
    p.add_argument("--media", required=True, help="media directory")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--config", help="JSON config file (media limits)")
    p.add_argument("--max-width", type=int, default=None, help="panorama width limit (px)")
    p.add_argument("--max-height", type=int, default=None, help="panorama height limit (px)")
    p.add_argument("--max-bytes", type=int, default=None, help="panorama file size limit (bytes)")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("compile", help="compile a manifest + media into a bundle")
    p.add_argument("manifest")
    p.add_argument("--media", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cubemaps", action="store_true", help="pre-generate cube faces")
    p.add_argument("--cube-size", type=int, default=512)
    p.add_argument("--force", action="store_true",
                   help="downgrade a missing XMP tag to a warning")
    p.add_argument("--viewer-dir", help="client assets to embed instead of the built-ins")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--config", help="JSON config file (media limits)")
    p.add_argument("--max-width", type=int, default=None, help="panorama width limit (px)")
    p.add_argument("--max-height", type=int, default=None, help="panorama height limit (px)")
    p.add_argument("--max-bytes", type=int, default=None, help="panorama file size limit (bytes)")
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("render", help="render a view from a panorama file")
    p.add_argument("panorama")
    p.add_argument("--yaw", type=float, default=0.0, help="degrees")
    p.add_argument("--pitch", type=float, default=0.0, help="degrees")
    p.add_argument("--fov", type=float, default=90.0, help="degrees")
    p.add_argument("--size", type=_size, default=Dimensions(1024, 768), help="WxH")
    p.add_argument("--little-planet", action="store_true",
                   help="stereographic preview instead of a perspective view")
    p.add_argument("--zoom", type=float, default=None, help="little-planet zoom (pixels)")
    p.add_argument("--out", required=True, help="output PNG path")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("serve", help="serve a compiled bundle over HTTP")
    p.add_argument("bundle")
    p.add_argument("--bind", help=f"addr:port (default {DEFAULT_BIND}; ${BIND_ENV_VAR} overrides)")
    p.add_argument("--cache-seconds", type=int, default=None)
    p.add_argument("--max-renders", type=int, default=None,
                   help="concurrent render bound for the view endpoint")
    p.add_argument("--config", help="JSON config file (server defaults)")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("profile", help="simulate load time over a bundle inventory")
    p.add_argument("bundle")
    p.add_argument("--bandwidth", type=float, default=REFERENCE_NETWORK.bandwidth_bps / 1e6,
                   help="Mbit/s")
    p.add_argument("--rtt", type=float, default=REFERENCE_NETWORK.rtt_ms, help="milliseconds")
    p.add_argument("--connections", type=int, default=REFERENCE_NETWORK.connections)
    p.add_argument("--script-rate", type=float, default=REFERENCE_CLIENT.script_rate_bps,
                   help="bytes/second of script processing")
    p.add_argument("--image-rate", type=float, default=REFERENCE_CLIENT.image_rate_bps,
                   help="bytes/second of image decode")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=_cmd_profile)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return int(args.func(args))
    except Exception as exc:  # last-resort: internal errors map to 3
        print(f"internal error: {exc}", file=sys.stderr)
        return ExitStatus.IO


if __name__ == "__main__":
    sys.exit(main())
