"""The scenario graph: scenes chained like a storyboard, hotspots
carrying picture/video/text payloads or links to other scenes.

Manifest files are JSON with angles in degrees (the human-authored
convention). Angles are validated at parse time and kept in degrees on
the dataclasses so that parse -> serialize is lossless; radian views are
exposed through accessors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .geometry import SphericalDirection
from .media import Finding

__all__ = [
    "HOTSPOT_KINDS",
    "Hotspot",
    "InitialView",
    "Scene",
    "Tour",
    "TourValidationReport",
    "TourError",
    "ManifestSyntaxError",
    "ManifestSemanticError",
    "parse_manifest",
    "serialize_manifest",
    "validate_tour",
]

HOTSPOT_KINDS = ("picture", "video", "text", "link")

DEFAULT_OVERLAP_DEG = 2.0


class TourError(ValueError):
    """Base error for manifest problems."""


class ManifestSyntaxError(TourError):
    """Malformed manifest text; carries line/column context."""


class ManifestSemanticError(TourError):
    """Structurally invalid manifest; carries the offending path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass
class Hotspot:
    id: str
    kind: str
    yaw_deg: float
    pitch_deg: float
    title: str
    payload: str

    @property
    def direction(self) -> SphericalDirection:
        return SphericalDirection(math.radians(self.yaw_deg), math.radians(self.pitch_deg))


@dataclass
class InitialView:
    yaw_deg: float
    pitch_deg: float
    fov_deg: float

    @property
    def yaw(self) -> float:
        return math.radians(self.yaw_deg)

    @property
    def pitch(self) -> float:
        return math.radians(self.pitch_deg)

    @property
    def fov(self) -> float:
        return math.radians(self.fov_deg)


@dataclass
class Scene:
    id: str
    title: str
    panorama: str
    initial_view: InitialView
    hotspots: list[Hotspot] = field(default_factory=list)


@dataclass
class Tour:
    id: str
    title: str
    start_scene: str
    scenes: list[Scene] = field(default_factory=list)
    parse_warnings: list[str] = field(default_factory=list, compare=False, repr=False)

    def scene_ids(self) -> list[str]:
        return [s.id for s in self.scenes]

    def get_scene(self, scene_id: str) -> Scene | None:
        for s in self.scenes:
            if s.id == scene_id:
                return s
        return None


@dataclass
class TourValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(f.severity == "error" for f in self.findings)

    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]


def _require(obj: dict, key: str, types, path: str, warnings: list[str]):
    if key not in obj:
        raise ManifestSemanticError(path, f"missing required field {key!r}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, types):
        want = types[0].__name__ if isinstance(types, tuple) else types.__name__
        raise ManifestSemanticError(f"{path}.{key}", f"expected {want}, got {type(value).__name__}")
    return value


def _warn_unknown(obj: dict, known: tuple[str, ...], path: str, warnings: list[str]) -> None:
    for key in obj:
        if key not in known:
            warnings.append(f"{path}: ignoring unknown field {key!r}")


def _angle(obj: dict, key: str, path: str, warnings: list[str],
           lo: float | None = None, hi: float | None = None,
           exclusive: bool = False) -> float:
    raw = _require(obj, key, (int, float), path, warnings)
    value = float(raw)
    if not math.isfinite(value):
        raise ManifestSemanticError(f"{path}.{key}", f"angle must be finite, got {raw!r}")
    if lo is not None:
        ok = (lo < value < hi) if exclusive else (lo <= value <= hi)
        if not ok:
            bounds = f"({lo}, {hi})" if exclusive else f"[{lo}, {hi}]"
            raise ManifestSemanticError(f"{path}.{key}", f"angle {value} outside {bounds} degrees")
    return value


def _parse_hotspot(obj, path: str, warnings: list[str]) -> Hotspot:
    if not isinstance(obj, dict):
        raise ManifestSemanticError(path, "hotspot must be an object")
    _warn_unknown(obj, ("id", "kind", "yaw_deg", "pitch_deg", "title", "payload"), path, warnings)
    hid = _require(obj, "id", str, path, warnings)
    if not hid:
        raise ManifestSemanticError(f"{path}.id", "identifier must be non-empty")
    kind = _require(obj, "kind", str, path, warnings)
    if kind not in HOTSPOT_KINDS:
        raise ManifestSemanticError(f"{path}.kind", f"unknown kind {kind!r}; expected one of {HOTSPOT_KINDS}")
    payload = _require(obj, "payload", str, path, warnings)
    if not payload:
        raise ManifestSemanticError(f"{path}.payload", f"{kind} hotspot needs a non-empty payload")
    return Hotspot(
        id=hid,
        kind=kind,
        yaw_deg=_angle(obj, "yaw_deg", path, warnings),
        pitch_deg=_angle(obj, "pitch_deg", path, warnings, -90.0, 90.0),
        title=_require(obj, "title", str, path, warnings),
        payload=payload,
    )


def _parse_scene(obj, path: str, warnings: list[str]) -> Scene:
    if not isinstance(obj, dict):
        raise ManifestSemanticError(path, "scene must be an object")
    _warn_unknown(obj, ("id", "title", "panorama", "initial_view", "hotspots"), path, warnings)
    sid = _require(obj, "id", str, path, warnings)
    if not sid:
        raise ManifestSemanticError(f"{path}.id", "identifier must be non-empty")
    view_obj = _require(obj, "initial_view", dict, path, warnings)
    vpath = f"{path}.initial_view"
    _warn_unknown(view_obj, ("yaw_deg", "pitch_deg", "fov_deg"), vpath, warnings)
    view = InitialView(
        yaw_deg=_angle(view_obj, "yaw_deg", vpath, warnings),
        pitch_deg=_angle(view_obj, "pitch_deg", vpath, warnings, -90.0, 90.0),
        fov_deg=_angle(view_obj, "fov_deg", vpath, warnings, 0.0, 180.0, exclusive=True),
    )
    hotspots_raw = obj.get("hotspots", [])
    if not isinstance(hotspots_raw, list):
        raise ManifestSemanticError(f"{path}.hotspots", "hotspots must be an array")
    hotspots = [
        _parse_hotspot(h, f"{path}.hotspots[{i}]", warnings) for i, h in enumerate(hotspots_raw)
    ]
    seen: set[str] = set()
    for i, h in enumerate(hotspots):
        if h.id in seen:
            raise ManifestSemanticError(f"{path}.hotspots[{i}].id", f"duplicate hotspot id {h.id!r}")
        seen.add(h.id)
    return Scene(
        id=sid,
        title=_require(obj, "title", str, path, warnings),
        panorama=_require(obj, "panorama", str, path, warnings),
        initial_view=view,
        hotspots=hotspots,
    )


def parse_manifest(text: str) -> Tour:
    """Parse manifest JSON into a Tour, enforcing structural invariants.

    Unknown fields are ignored with a warning (collected on
    Tour.parse_warnings). Syntax errors carry line/column positions;
    semantic errors carry the offending field path.
    """
    try:
        root = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestSyntaxError(
            f"manifest syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(root, dict):
        raise ManifestSemanticError("$", "manifest root must be an object")

    warnings: list[str] = []
    _warn_unknown(root, ("id", "title", "start_scene", "scenes"), "$", warnings)
    tour_id = _require(root, "id", str, "$", warnings)
    title = _require(root, "title", str, "$", warnings)
    start = _require(root, "start_scene", str, "$", warnings)
    scenes_raw = _require(root, "scenes", list, "$", warnings)
    scenes = [_parse_scene(s, f"scenes[{i}]", warnings) for i, s in enumerate(scenes_raw)]

    seen: set[str] = set()
    for i, s in enumerate(scenes):
        if s.id in seen:
            raise ManifestSemanticError(f"scenes[{i}].id", f"duplicate scene id {s.id!r}")
        seen.add(s.id)
    if start not in seen:
        raise ManifestSemanticError("$.start_scene", f"start scene {start!r} is not in scenes")

    return Tour(id=tour_id, title=title, start_scene=start, scenes=scenes,
                parse_warnings=warnings)


def serialize_manifest(t: Tour) -> str:
    """Canonical manifest text: fixed field order, scenes in given order.

    parse_manifest(serialize_manifest(t)) == t for any valid Tour.
    """
    doc = {
        "id": t.id,
        "title": t.title,
        "start_scene": t.start_scene,
        "scenes": [
            {
                "id": s.id,
                "title": s.title,
                "panorama": s.panorama,
                "initial_view": {
                    "yaw_deg": s.initial_view.yaw_deg,
                    "pitch_deg": s.initial_view.pitch_deg,
                    "fov_deg": s.initial_view.fov_deg,
                },
                "hotspots": [
                    {
                        "id": h.id,
                        "kind": h.kind,
                        "yaw_deg": h.yaw_deg,
                        "pitch_deg": h.pitch_deg,
                        "title": h.title,
                        "payload": h.payload,
                    }
                    for h in s.hotspots
                ],
            }
            for s in t.scenes
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _angular_separation(a: SphericalDirection, b: SphericalDirection) -> float:
    cosd = (
        math.sin(a.pitch) * math.sin(b.pitch)
        + math.cos(a.pitch) * math.cos(b.pitch) * math.cos(a.yaw - b.yaw)
    )
    return math.acos(min(1.0, max(-1.0, cosd)))


def reachable_scenes(t: Tour) -> set[str]:
    """Scene ids reachable from start_scene via link hotspots (BFS)."""
    ids = set(t.scene_ids())
    seen = {t.start_scene}
    queue = [t.start_scene]
    while queue:
        scene = t.get_scene(queue.pop(0))
        if scene is None:
            continue
        for h in scene.hotspots:
            if h.kind == "link" and h.payload in ids and h.payload not in seen:
                seen.add(h.payload)
                queue.append(h.payload)
    return seen


def validate_tour(t: Tour, available_media: set[str],
                  overlap_deg: float = DEFAULT_OVERLAP_DEG) -> TourValidationReport:
    """Cross-reference checks over a structurally valid Tour.

    Errors: DANGLING_LINK (link target not a scene), MISSING_MEDIA
    (panorama or picture payload not present). Warnings: UNREACHABLE
    (scene with no link path from the start), OVERLAP (two hotspots in
    one scene closer than ``overlap_deg`` degrees apart).
    """
    findings: list[Finding] = []
    ids = set(t.scene_ids())

    for scene in t.scenes:
        loc = f"scenes[{scene.id}]"
        if scene.panorama not in available_media:
            findings.append(Finding(
                "MISSING_MEDIA", "error",
                f"panorama {scene.panorama!r} not found in the media set",
                f"{loc}.panorama",
            ))
        for h in scene.hotspots:
            hloc = f"{loc}.hotspots[{h.id}]"
            if h.kind == "link" and h.payload not in ids:
                findings.append(Finding(
                    "DANGLING_LINK", "error",
                    f"link hotspot targets unknown scene {h.payload!r}",
                    hloc,
                ))
            elif h.kind == "picture" and h.payload not in available_media:
                findings.append(Finding(
                    "MISSING_MEDIA", "error",
                    f"picture payload {h.payload!r} not found in the media set",
                    hloc,
                ))
        for i, a in enumerate(scene.hotspots):
            for b in scene.hotspots[i + 1:]:
                sep = math.degrees(_angular_separation(a.direction, b.direction))
                if sep < overlap_deg:
                    findings.append(Finding(
                        "OVERLAP", "warning",
                        f"hotspots {a.id!r} and {b.id!r} are {sep:.2f} degrees apart "
                        f"(threshold {overlap_deg})",
                        f"{loc}.hotspots[{a.id}]",
                    ))

    for sid in sorted(ids - reachable_scenes(t)):
        findings.append(Finding(
            "UNREACHABLE", "warning",
            f"scene {sid!r} cannot be reached from {t.start_scene!r} via link hotspots",
            f"scenes[{sid}]",
        ))
    return TourValidationReport(findings)
