"""Compile a manifest plus media directory into an immutable, servable
bundle: validated panoramas, per-scene little-planet previews, optional
cubemap faces, picture payloads, viewer assets, a byte inventory and a
content digest.

Bundle layout::

    manifest.resolved            canonical manifest (JSON)
    inventory                    byte inventory (JSON)
    digest                       sha256 + creation timestamp (JSON)
    scenes/<id>/pano.<ext>       panorama, byte-identical to the source
    scenes/<id>/preview.png      512x512 little-planet preview
    scenes/<id>/cube_<face>.png  optional cubemap faces
    media/<ref>                  picture hotspot payloads
    viewer/...                   client assets

The digest is sha256 over every file except ``digest`` itself (paths
and contents, paths sorted), so recompiling identical inputs yields an
identical digest; the creation timestamp lives only in the digest file.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path, PurePosixPath

from .geometry import Dimensions
from .media import Finding, MediaError, MediaLimits, decode_image, encode_png, validate_panorama
from .projection import equirect_to_cubemap, render_little_planet
from .tour import Tour, parse_manifest, serialize_manifest, validate_tour

__all__ = [
    "AssetRecord",
    "ByteInventory",
    "TourBundle",
    "CompileOptions",
    "BundleError",
    "CompileError",
    "IntegrityError",
    "compile_bundle",
    "load_bundle",
    "verify_bundle",
    "inventory",
]

CATEGORIES = ("document", "viewer_script", "viewer_style",
              "panorama", "preview", "cubemap", "picture")

_EXT_BY_FORMAT = {"PNG": "png", "JPEG": "jpg"}


class BundleError(Exception):
    """I/O or layout failure while compiling or reading a bundle."""


class CompileError(BundleError):
    """Compilation aborted on validation findings; lists all of them."""

    def __init__(self, findings: list[Finding]):
        self.findings = findings
        lines = [f"{f.severity.upper()} {f.code} {f.location}: {f.message}" for f in findings]
        super().__init__("compile aborted:\n" + "\n".join(lines))


class IntegrityError(BundleError):
    """Bundle contents do not match the recorded digest or inventory."""


@dataclass(frozen=True)
class AssetRecord:
    path: str       # bundle-relative posix path
    category: str
    byte_size: int


@dataclass
class ByteInventory:
    rows: list[AssetRecord] = field(default_factory=list)

    def category_totals(self) -> dict[str, int]:
        totals: dict[str, int] = {}
        for r in self.rows:
            totals[r.category] = totals.get(r.category, 0) + r.byte_size
        return totals

    def total_bytes(self) -> int:
        return sum(r.byte_size for r in self.rows)

    def to_json(self) -> str:
        doc = {
            "rows": [
                {"path": r.path, "category": r.category, "byte_size": r.byte_size}
                for r in self.rows
            ],
            "category_totals": self.category_totals(),
            "total_bytes": self.total_bytes(),
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ByteInventory":
        doc = json.loads(text)
        return cls([AssetRecord(r["path"], r["category"], r["byte_size"])
                    for r in doc["rows"]])


@dataclass
class TourBundle:
    tour: Tour
    root: Path
    asset_table: dict[str, AssetRecord]  # bundle path -> record
    previews: dict[str, str]             # scene id -> bundle path
    created_at: str
    content_digest: str

    def resolve_media(self, ref: str) -> AssetRecord:
        """Map a manifest media reference to its bundle asset."""
        for scene in self.tour.scenes:
            if scene.panorama == ref:
                for path, rec in self.asset_table.items():
                    if rec.category == "panorama" and path.startswith(f"scenes/{scene.id}/"):
                        return rec
        path = f"media/{ref}"
        if path in self.asset_table:
            return self.asset_table[path]
        raise KeyError(f"media reference {ref!r} not present in the bundle")

    def scene_asset(self, scene_id: str, name_prefix: str) -> AssetRecord | None:
        for path, rec in self.asset_table.items():
            if path.startswith(f"scenes/{scene_id}/{name_prefix}"):
                return rec
        return None


@dataclass(frozen=True)
class CompileOptions:
    cubemaps: bool = False
    cube_size: int = 512
    preview_size: int = 512
    force: bool = False
    limits: MediaLimits = field(default_factory=MediaLimits)
    viewer_dir: Path | None = None


def _safe_ref(ref: str) -> PurePosixPath:
    p = PurePosixPath(ref)
    if p.is_absolute() or ".." in p.parts or not p.parts:
        raise BundleError(f"unsafe media reference {ref!r}")
    return p


def _scan_media_dir(media_dir: Path) -> set[str]:
    if not media_dir.is_dir():
        raise BundleError(f"media directory not readable: {media_dir}")
    return {
        p.relative_to(media_dir).as_posix()
        for p in sorted(media_dir.rglob("*")) if p.is_file()
    }


def _viewer_files(viewer_dir: Path | None):
    """Yield (relative posix path, bytes) for the client assets."""
    if viewer_dir is not None:
        if not viewer_dir.is_dir():
            raise BundleError(f"viewer asset directory not readable: {viewer_dir}")
        for p in sorted(viewer_dir.rglob("*")):
            if p.is_file():
                yield p.relative_to(viewer_dir).as_posix(), p.read_bytes()
        return
    assets = resources.files("panotour").joinpath("viewer_assets")
    for entry in sorted(assets.iterdir(), key=lambda e: e.name):
        if entry.is_file():
            yield entry.name, entry.read_bytes()


def _categorize_viewer(name: str) -> str:
    if name.endswith(".js"):
        return "viewer_script"
    if name.endswith(".css"):
        return "viewer_style"
    return "document"


def compute_digest(root: Path) -> str:
    """sha256 over every bundle file except ``digest``, paths sorted."""
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if not p.is_file():
            continue
        rel = p.relative_to(root).as_posix()
        if rel == "digest":
            continue
        h.update(rel.encode("utf-8"))
        h.update(b"\x00")
        h.update(p.read_bytes())
        h.update(b"\x00")
    return h.hexdigest()


def compile_bundle(manifest_path: Path | str, media_dir: Path | str,
                   out_dir: Path | str, options: CompileOptions | None = None) -> TourBundle:
    """Validate everything, render derived assets, write the bundle.

    Aborts with CompileError listing all error findings when any
    panorama or tour check fails; ``options.force`` downgrades missing
    XMP tags to warnings.
    """
    options = options or CompileOptions()
    manifest_path = Path(manifest_path)
    media_dir = Path(media_dir)
    out_dir = Path(out_dir)

    try:
        text = manifest_path.read_text(encoding="utf-8")
    except OSError as exc:
        raise BundleError(f"cannot read manifest {manifest_path}: {exc}") from exc
    tour = parse_manifest(text)
    available = _scan_media_dir(media_dir)

    findings = list(validate_tour(tour, available).findings)
    panoramas: dict[str, tuple] = {}  # scene id -> (img, meta, source bytes)
    for scene in tour.scenes:
        if scene.panorama not in available:
            continue  # already reported as MISSING_MEDIA
        _safe_ref(scene.panorama)
        source = (media_dir / scene.panorama).read_bytes()
        try:
            img, meta = decode_image(source)
        except MediaError as exc:
            raise BundleError(f"{media_dir / scene.panorama}: {exc}") from exc
        for f in validate_panorama(meta, options.limits).findings:
            severity = f.severity
            if options.force and f.code == "XMP":
                severity = "warning"
            findings.append(replace(f, severity=severity,
                                    location=f"scenes[{scene.id}].panorama"))
        panoramas[scene.id] = (img, meta, source)

    if any(f.severity == "error" for f in findings):
        raise CompileError(findings)

    if out_dir.exists() and any(out_dir.iterdir()):
        raise BundleError(f"output directory {out_dir} exists and is not empty")
    out_dir.mkdir(parents=True, exist_ok=True)

    rows: list[AssetRecord] = []

    def write(rel: str, data: bytes, category: str) -> AssetRecord:
        target = out_dir / rel
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
        rec = AssetRecord(rel, category, len(data))
        rows.append(rec)
        return rec

    write("manifest.resolved", serialize_manifest(tour).encode("utf-8"), "document")
    for name, data in _viewer_files(options.viewer_dir):
        write(f"viewer/{name}", data, _categorize_viewer(name))

    previews: dict[str, str] = {}
    preview_dims = Dimensions(options.preview_size, options.preview_size)
    for scene in tour.scenes:
        img, meta, source = panoramas[scene.id]
        ext = _EXT_BY_FORMAT[meta.format]
        write(f"scenes/{scene.id}/pano.{ext}", source, "panorama")
        preview = render_little_planet(img, preview_dims)
        rec = write(f"scenes/{scene.id}/preview.png", encode_png(preview), "preview")
        previews[scene.id] = rec.path
        if options.cubemaps:
            for face, raster in equirect_to_cubemap(img, options.cube_size).items():
                write(f"scenes/{scene.id}/cube_{face}.png", encode_png(raster), "cubemap")

    picture_refs = sorted({
        h.payload for scene in tour.scenes for h in scene.hotspots if h.kind == "picture"
    })
    for ref in picture_refs:
        _safe_ref(ref)
        write(f"media/{ref}", (media_dir / ref).read_bytes(), "picture")

    inv = ByteInventory(rows)
    (out_dir / "inventory").write_bytes(inv.to_json().encode("utf-8"))

    digest = compute_digest(out_dir)
    created_at = datetime.now(timezone.utc).isoformat()
    digest_doc = {"algorithm": "sha256", "content_digest": digest, "created_at": created_at}
    (out_dir / "digest").write_text(json.dumps(digest_doc, indent=2) + "\n", encoding="utf-8")

    return TourBundle(
        tour=tour,
        root=out_dir,
        asset_table={r.path: r for r in rows},
        previews=previews,
        created_at=created_at,
        content_digest=digest,
    )


def _read_digest_doc(root: Path) -> dict:
    try:
        return json.loads((root / "digest").read_text(encoding="utf-8"))
    except OSError as exc:
        raise BundleError(f"cannot read bundle digest in {root}: {exc}") from exc


def verify_bundle(root: Path | str) -> str:
    """Recompute the content digest and compare with the recorded one."""
    root = Path(root)
    doc = _read_digest_doc(root)
    actual = compute_digest(root)
    if actual != doc.get("content_digest"):
        raise IntegrityError(
            f"bundle digest mismatch in {root}: recorded {doc.get('content_digest')}, "
            f"recomputed {actual}"
        )
    return actual


def load_bundle(root: Path | str) -> TourBundle:
    """Read a compiled bundle's manifest, inventory and digest."""
    root = Path(root)
    if not root.is_dir():
        raise BundleError(f"bundle directory not found: {root}")
    try:
        tour = parse_manifest((root / "manifest.resolved").read_text(encoding="utf-8"))
        inv = ByteInventory.from_json((root / "inventory").read_text(encoding="utf-8"))
    except OSError as exc:
        raise BundleError(f"cannot read bundle in {root}: {exc}") from exc
    doc = _read_digest_doc(root)
    previews = {
        scene.id: f"scenes/{scene.id}/preview.png"
        for scene in tour.scenes
        if (root / "scenes" / scene.id / "preview.png").is_file()
    }
    return TourBundle(
        tour=tour,
        root=root,
        asset_table={r.path: r for r in inv.rows},
        previews=previews,
        created_at=doc.get("created_at", ""),
        content_digest=doc.get("content_digest", ""),
    )


def inventory(bundle: TourBundle) -> ByteInventory:
    """Exact byte accounting, re-checked against the files on disk."""
    rows = []
    for rec in bundle.asset_table.values():
        path = bundle.root / rec.path
        if not path.is_file():
            raise IntegrityError(f"inventory asset missing from disk: {rec.path}")
        size = path.stat().st_size
        if size != rec.byte_size:
            raise IntegrityError(
                f"inventory asset {rec.path} is {size} bytes on disk, recorded {rec.byte_size}"
            )
        rows.append(rec)
    return ByteInventory(rows)
