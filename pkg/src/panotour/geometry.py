"""Coordinate systems for equirectangular panoramas.

Conventions (held everywhere in this package):

* Spherical directions are (yaw, pitch) in radians. Yaw is longitude,
  normalized to [-pi, pi); pitch is latitude in [-pi/2, pi/2], positive up.
* The right-handed world frame has +x at yaw 0 on the horizon, +y at
  yaw +pi/2 and +z at the zenith.
* An equirectangular image spans continuous pixel coordinates
  [0, W] x [0, H]; integer pixel i has its center at i + 0.5. u grows
  with yaw (left edge is yaw -pi), v grows downward (top edge is the
  north pole, pitch +pi/2).
* Camera state is yaw and pitch only; there is no roll axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "Dimensions",
    "PixelCoord",
    "SphericalDirection",
    "UnitVector",
    "GeometryError",
    "wrap_angle",
    "pixel_to_sphere",
    "sphere_to_pixel",
    "sphere_to_vec",
    "vec_to_sphere",
    "rotate_view",
]

_HALF_PI = math.pi / 2.0


class GeometryError(ValueError):
    """Domain error for out-of-range or degenerate geometric input."""


def wrap_angle(rad: float) -> float:
    """Normalize an angle into [-pi, pi); +pi maps to -pi."""
    if not math.isfinite(rad):
        raise GeometryError(f"angle is not finite: {rad!r}")
    r = math.remainder(rad, math.tau)
    return -math.pi if r >= math.pi else r


@dataclass(frozen=True)
class Dimensions:
    """Positive integer width and height of a raster."""

    width: int
    height: int

    def __post_init__(self) -> None:
        if not (isinstance(self.width, int) and isinstance(self.height, int)):
            raise GeometryError("dimensions must be integers")
        if self.width <= 0 or self.height <= 0:
            raise GeometryError(f"dimensions must be positive: {self.width}x{self.height}")


@dataclass(frozen=True)
class SphericalDirection:
    """Direction on the unit sphere: yaw (longitude) and pitch (latitude).

    Yaw is wrapped into [-pi, pi) and pitch clamped to [-pi/2, pi/2] at
    construction; non-finite values are rejected.
    """

    yaw: float
    pitch: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.yaw) and math.isfinite(self.pitch)):
            raise GeometryError(f"direction is not finite: ({self.yaw!r}, {self.pitch!r})")
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))
        object.__setattr__(self, "pitch", min(max(self.pitch, -_HALF_PI), _HALF_PI))


@dataclass(frozen=True)
class PixelCoord:
    """Continuous pixel position; meaningful only together with Dimensions."""

    u: float
    v: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise GeometryError(f"pixel coordinate is not finite: ({self.u!r}, {self.v!r})")


@dataclass(frozen=True)
class UnitVector:
    """3D direction, normalized to unit length at construction."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        n = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if not math.isfinite(n) or n == 0.0:
            raise GeometryError(f"cannot normalize vector ({self.x!r}, {self.y!r}, {self.z!r})")
        if abs(n - 1.0) > 1e-12:
            object.__setattr__(self, "x", self.x / n)
            object.__setattr__(self, "y", self.y / n)
            object.__setattr__(self, "z", self.z / n)


def pixel_to_sphere(p: PixelCoord, d: Dimensions) -> SphericalDirection:
    """Map a continuous pixel position to its spherical direction.

    yaw = (u/W)*2pi - pi and pitch = pi/2 - (v/H)*pi; u = W (the seam)
    wraps to yaw -pi.
    """
    if not (0.0 <= p.u <= d.width and 0.0 <= p.v <= d.height):
        raise GeometryError(
            f"pixel ({p.u}, {p.v}) outside [0, {d.width}] x [0, {d.height}]"
        )
    yaw = (p.u / d.width) * math.tau - math.pi
    pitch = _HALF_PI - (p.v / d.height) * math.pi
    return SphericalDirection(yaw, pitch)


def sphere_to_pixel(s: SphericalDirection, d: Dimensions) -> PixelCoord:
    """Exact inverse of pixel_to_sphere: u = ((yaw+pi)/2pi)*W, v = ((pi/2-pitch)/pi)*H."""
    u = ((s.yaw + math.pi) / math.tau) * d.width
    v = ((_HALF_PI - s.pitch) / math.pi) * d.height
    return PixelCoord(u, v)


def sphere_to_vec(s: SphericalDirection) -> UnitVector:
    """Direction to 3D unit vector: x = cos(pitch)cos(yaw), y = cos(pitch)sin(yaw), z = sin(pitch)."""
    cp = math.cos(s.pitch)
    return UnitVector(cp * math.cos(s.yaw), cp * math.sin(s.yaw), math.sin(s.pitch))


def vec_to_sphere(v: UnitVector) -> SphericalDirection:
    """3D vector back to (yaw, pitch); yaw of the poles is 0 by convention."""
    yaw = math.atan2(v.y, v.x)
    z = min(max(v.z, -1.0), 1.0)
    return SphericalDirection(yaw, math.asin(z))


def rotate_view(v: UnitVector, yaw: float, pitch: float) -> UnitVector:
    """Rotate a camera-space vector into the world: pitch first, then yaw.

    Pitch rotates about the camera's lateral axis (+y before yaw is
    applied), positive up; yaw then rotates about the world vertical +z.
    """
    if not (math.isfinite(yaw) and math.isfinite(pitch)):
        raise GeometryError(f"rotation angles not finite: ({yaw!r}, {pitch!r})")
    cp, sp = math.cos(pitch), math.sin(pitch)
    x1 = v.x * cp - v.z * sp
    z1 = v.x * sp + v.z * cp
    cy, sy = math.cos(yaw), math.sin(yaw)
    return UnitVector(x1 * cy - v.y * sy, x1 * sy + v.y * cy, z1)
