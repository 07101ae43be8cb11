"""Resampling from equirectangular sources.

All renders share one bilinear sampler core. Its two quirks are
deliberate and load-bearing:

* Horizontal sampling is expressed as a base coordinate plus a yaw
  offset whose integer and fractional parts are split (offsets within
  1e-6 px of an integer snap to it). A view yawed by an exact number of
  source columns then reproduces the unshifted sampling grid, column
  indices shifted, bit for bit.
* Vertical sampling decomposes the latitude offset by sign and
  magnitude, so a sign flip mirrors row indices exactly instead of
  re-rounding. Rendering a vertically mirrored panorama at negated
  pitch is then the exact mirror of the original render.

Both reductions are algebraically identical to the direct formulas;
they only fix the floating-point evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Dimensions, GeometryError, SphericalDirection

__all__ = [
    "EquirectImage",
    "Raster",
    "ViewParams",
    "ProjectionError",
    "CUBE_FACES",
    "sample_bilinear",
    "render_perspective",
    "render_little_planet",
    "equirect_to_cubemap",
]

_SNAP_EPS_PX = 1e-6
_POLE_EPS = 1e-6


class ProjectionError(ValueError):
    """Invalid render parameter (fov, zoom, output size)."""


def _check_raster(dims: Dimensions, pixels: np.ndarray) -> None:
    if pixels.dtype != np.uint8:
        raise ProjectionError(f"pixel buffer must be uint8, got {pixels.dtype}")
    if pixels.ndim != 3 or pixels.shape[2] not in (3, 4):
        raise ProjectionError(f"pixel buffer must be HxWx3 or HxWx4, got shape {pixels.shape}")
    if pixels.shape[0] != dims.height or pixels.shape[1] != dims.width:
        raise ProjectionError(
            f"buffer shape {pixels.shape[:2]} does not match dims {dims.height}x{dims.width}"
        )


@dataclass
class Raster:
    """Row-major RGB(A) raster."""

    dims: Dimensions
    pixels: np.ndarray

    def __post_init__(self) -> None:
        _check_raster(self.dims, self.pixels)

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


@dataclass
class EquirectImage:
    """Decoded 2:1-style panorama raster plus optional source metadata."""

    dims: Dimensions
    pixels: np.ndarray
    source_metadata: object | None = field(default=None)

    def __post_init__(self) -> None:
        _check_raster(self.dims, self.pixels)

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


@dataclass(frozen=True)
class ViewParams:
    """Camera state for a perspective render: yaw/pitch in radians,
    horizontal field of view in (0, pi), output dimensions."""

    yaw: float
    pitch: float
    fov: float
    out: Dimensions

    def __post_init__(self) -> None:
        if not (math.isfinite(self.yaw) and math.isfinite(self.pitch)):
            raise ProjectionError(f"view angles not finite: ({self.yaw!r}, {self.pitch!r})")
        if not (math.isfinite(self.fov) and 0.0 < self.fov < math.pi):
            raise ProjectionError(f"fov must be in (0, pi), got {self.fov!r}")


def _split_offset(off_px: float) -> tuple[int, float]:
    """Split a pixel offset into integer and fractional parts.

    Fractions within 1e-6 px of 0 or 1 collapse to the integer; this is
    what makes integral-column yaw shifts exact (the naive
    yaw*W/(2*pi) round trip misses the integer by an ulp for ~15% of
    column counts).
    """
    n = math.floor(off_px)
    g = off_px - n
    if g < _SNAP_EPS_PX:
        g = 0.0
    elif g > 1.0 - _SNAP_EPS_PX:
        n += 1
        g = 0.0
    return int(n), g


def _wrap_cols(base_u: np.ndarray, off_px: float, width: int):
    """Column pair + weight for bilinear sampling with seam wrap.

    base_u are continuous u coordinates in [0, W]; off_px is added as a
    split integer/fraction so integral offsets only relabel columns.
    """
    n, g = _split_offset(off_px)
    r = base_u - 0.5 + g
    j = np.floor(r)
    frac = r - j
    c0 = (j.astype(np.int64) + n) % width
    c1 = (c0 + 1) % width
    return c0, c1, frac


def _clamp_rows(t: np.ndarray, height: int):
    """Row pair + weight for bilinear sampling with pole clamp.

    t is the latitude offset in pixels above the horizontal center line
    (t = pitch * H/pi). Decomposing |t| and mirroring the indices for
    t < 0 keeps the result bit-exactly mirror-symmetric in t.
    """
    a = np.abs(t)
    q = (height - 1) / 2.0 - a
    j = np.floor(q)
    frac = q - j
    j = j.astype(np.int64)
    r_a = j
    r_b = j + 1
    neg = np.signbit(t)
    r_a = np.where(neg, height - 1 - r_a, r_a)
    r_b = np.where(neg, height - 2 - j, r_b)
    np.clip(r_a, 0, height - 1, out=r_a)
    np.clip(r_b, 0, height - 1, out=r_b)
    return r_a, r_b, frac


def _gather_bilinear(pixels: np.ndarray, r_a, r_b, fv, c0, c1, fu) -> np.ndarray:
    """Blend the four taps; returns float64, same channel count."""
    fu3 = fu[..., None]
    fv3 = fv[..., None]
    top = pixels[r_a, c0].astype(np.float64) * (1.0 - fu3) + pixels[r_a, c1] * fu3
    bot = pixels[r_b, c0].astype(np.float64) * (1.0 - fu3) + pixels[r_b, c1] * fu3
    return top * (1.0 - fv3) + bot * fv3


def _sample_angles(img: EquirectImage, lam: np.ndarray, t_px: np.ndarray,
                   yaw_off_px: float) -> np.ndarray:
    """Sample at longitudes lam (radians, yaw-less) shifted by yaw_off_px,
    latitude offsets t_px (pixels). Returns float64 colors."""
    w = img.dims.width
    base_u = (lam * (1.0 / math.tau) + 0.5) * w
    c0, c1, fu = _wrap_cols(base_u, yaw_off_px, w)
    r_a, r_b, fv = _clamp_rows(t_px, img.dims.height)
    return _gather_bilinear(img.pixels, r_a, r_b, fv, c0, c1, fu)


def sample_bilinear(img: EquirectImage, s: SphericalDirection) -> tuple[int, ...]:
    """Bilinearly interpolate the panorama at a spherical direction.

    The four neighboring pixel centers around sphere_to_pixel(s) are
    blended; horizontal neighbors wrap across the yaw seam, vertical
    neighbors clamp at the pole rows.
    """
    lam = np.zeros(1)
    t = np.array([s.pitch * (img.dims.height / math.pi)])
    out = _sample_angles(img, lam, t, s.yaw * (img.dims.width / math.tau))
    return tuple(int(v) for v in np.rint(out[0]))


def _screen_grid(out: Dimensions, half_w: float, half_h: float):
    """Pixel-center screen coordinates from integer-centered indices.

    2j+1-W and H-2i-1 are exact integers antisymmetric about the output
    center, so opposite pixels get exactly negated coordinates.
    """
    w, h = out.width, out.height
    nx = (2 * np.arange(w, dtype=np.int64) + 1 - w).astype(np.float64)
    mz = (h - 2 * np.arange(h, dtype=np.int64) - 1).astype(np.float64)
    xs = nx * (half_w / w)
    zs = mz * (half_h / h)
    return np.broadcast_to(xs, (h, w)), np.broadcast_to(zs[:, None], (h, w))


def render_perspective(img: EquirectImage, view: ViewParams) -> Raster:
    """Gnomonic (rectilinear) render of the panorama at a camera view.

    Each output pixel center casts a ray on the plane at unit forward
    distance, half-width tan(fov/2), vertical extent scaled by the
    output aspect ratio; rays are pitched about the lateral axis, yaw is
    applied as a longitude offset (identical to rotating about the world
    vertical). Screen right is increasing yaw, matching the source
    image's left-to-right sense.
    """
    half_w = math.tan(view.fov / 2.0)
    half_h = half_w * view.out.height / view.out.width
    xs, zs = _screen_grid(view.out, half_w, half_h)

    cp, sp = math.cos(view.pitch), math.sin(view.pitch)
    fwd = cp - zs * sp        # forward component of the pitched ray (x ray = 1)
    up = sp + zs * cp
    lam = np.arctan2(xs, fwd)
    phi = np.arctan2(up, np.hypot(fwd, xs))

    t = phi * (img.dims.height / math.pi)
    yaw_off = view.yaw * (img.dims.width / math.tau)
    colors = _sample_angles(img, lam, t, yaw_off)
    return Raster(view.out, np.rint(colors).astype(np.uint8))


def render_little_planet(img: EquirectImage, out: Dimensions,
                         zoom: float | None = None,
                         background: tuple[int, ...] | None = None) -> Raster:
    """Stereographic "little planet": the nadir at the output center,
    projected from the zenith onto the plane tangent at the nadir.

    Radial distance r from the center maps to pitch -pi/2 + 2*atan(r/zoom);
    the screen angle maps to yaw (up is yaw 0, right is +pi/2). The
    default zoom puts the horizon at half the output radius. Pixels
    mapping beyond pitch pi/2 - 1e-6 take the background color.
    """
    if zoom is None:
        zoom = min(out.width, out.height) / 4.0
    if not (math.isfinite(zoom) and zoom > 0.0):
        raise ProjectionError(f"zoom must be positive, got {zoom!r}")
    if background is None:
        background = (0,) * img.channels
    if len(background) != img.channels:
        raise ProjectionError(
            f"background has {len(background)} channels, image has {img.channels}"
        )

    w, h = out.width, out.height
    dx = (2 * np.arange(w, dtype=np.int64) + 1 - w).astype(np.float64) / 2.0
    dy = (2 * np.arange(h, dtype=np.int64) + 1 - h).astype(np.float64) / 2.0
    dxg = np.broadcast_to(dx, (h, w))
    dyg = np.broadcast_to(dy[:, None], (h, w))

    r = np.hypot(dxg, dyg)
    phi = 2.0 * np.arctan(r / zoom) - math.pi / 2.0
    lam = np.arctan2(dxg, np.subtract(0.0, dyg))   # 0-dy keeps the exact center at yaw 0

    t = phi * (img.dims.height / math.pi)
    colors = _sample_angles(img, lam, t, 0.0)
    sky = phi > (math.pi / 2.0 - _POLE_EPS)
    if sky.any():
        colors[sky] = np.asarray(background, dtype=np.float64)
    return Raster(out, np.rint(colors).astype(np.uint8))


# Canonical cube face views: (name, yaw, pitch), fov = pi/2, square faces.
CUBE_FACES: tuple[tuple[str, float, float], ...] = (
    ("px", 0.0, 0.0),
    ("nx", math.pi, 0.0),
    ("py", math.pi / 2.0, 0.0),
    ("ny", -math.pi / 2.0, 0.0),
    ("pz", 0.0, math.pi / 2.0),
    ("nz", 0.0, -math.pi / 2.0),
)


def equirect_to_cubemap(img: EquirectImage, face_size: int) -> dict[str, Raster]:
    """Render the six cube faces (+x forward, +y left/right axis, +z up)
    as fov pi/2 perspective views; keys are px, nx, py, ny, pz, nz."""
    if face_size < 1:
        raise ProjectionError(f"face_size must be >= 1, got {face_size}")
    dims = Dimensions(face_size, face_size)
    return {
        name: render_perspective(img, ViewParams(yaw, pitch, math.pi / 2.0, dims))
        for name, yaw, pitch in CUBE_FACES
    }
