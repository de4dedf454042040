"""Pinhole camera geometry: projection, unprojection, and angular measures.

World frame is right-handed with z up.  A camera with yaw 0 and pitch 0
looks along +x; yaw is counter-clockwise about z in degrees, pitch tilts
the optical axis up (positive) or down (negative).  Pixel coordinates put
(0, 0) at the top-left corner, u growing right and v growing down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Frustum edge tolerance: a point computed to sit exactly on the image
# border must survive the floating-point round trip.
_EDGE_EPS = 1e-9


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        for c in (self.x, self.y, self.z):
            if not math.isfinite(c):
                raise ValueError(f"Vec3 components must be finite, got {c!r}")

    def __add__(self, other: Vec3) -> Vec3:
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: Vec3) -> Vec3:
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, k: float) -> Vec3:
        return Vec3(self.x * k, self.y * k, self.z * k)

    def dot(self, other: Vec3) -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def normalized(self) -> Vec3:
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero vector")
        return self.scaled(1.0 / n)

    def horizontal_distance(self, other: Vec3) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class CameraModel:
    id: str
    position: Vec3
    yaw_deg: float
    pitch_deg: float
    h_fov_deg: float
    v_fov_deg: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if not (0.0 < self.h_fov_deg < 180.0 and 0.0 < self.v_fov_deg < 180.0):
            raise ValueError(f"camera {self.id!r}: fov must be in (0, 180) degrees")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"camera {self.id!r}: resolution must be positive")

    def basis(self) -> tuple[Vec3, Vec3, Vec3]:
        """Forward, right, and up unit vectors of the camera frame."""
        yaw = math.radians(self.yaw_deg)
        pitch = math.radians(self.pitch_deg)
        forward = Vec3(
            math.cos(yaw) * math.cos(pitch),
            math.sin(yaw) * math.cos(pitch),
            math.sin(pitch),
        )
        # Right stays horizontal: forward (yaw only) crossed with world up.
        right = Vec3(math.sin(yaw), -math.cos(yaw), 0.0)
        up = Vec3(
            right.y * forward.z - right.z * forward.y,
            right.z * forward.x - right.x * forward.z,
            right.x * forward.y - right.y * forward.x,
        )
        return forward, right, up

    def tan_half_fov(self) -> tuple[float, float]:
        return (
            math.tan(math.radians(self.h_fov_deg) / 2.0),
            math.tan(math.radians(self.v_fov_deg) / 2.0),
        )


@dataclass(frozen=True)
class PixelPoint:
    u: float
    v: float


def camera_coords(camera: CameraModel, p: Vec3) -> tuple[float, float, float]:
    """(right, up, forward) components of p relative to the camera."""
    forward, right, up = camera.basis()
    d = p - camera.position
    return d.dot(right), d.dot(up), d.dot(forward)


def project(camera: CameraModel, p: Vec3) -> PixelPoint | None:
    """Pinhole projection; None when p is behind the camera or outside the frustum."""
    x_cam, y_cam, z_cam = camera_coords(camera, p)
    if z_cam <= 0.0:
        return None
    tan_h, tan_v = camera.tan_half_fov()
    nx = x_cam / (z_cam * tan_h)
    ny = y_cam / (z_cam * tan_v)
    if abs(nx) > 1.0 + _EDGE_EPS or abs(ny) > 1.0 + _EDGE_EPS:
        return None
    u = (min(max(nx, -1.0), 1.0) + 1.0) / 2.0 * camera.width
    v = (1.0 - min(max(ny, -1.0), 1.0)) / 2.0 * camera.height
    return PixelPoint(u, v)


def unproject(camera: CameraModel, pixel: PixelPoint, depth: float) -> Vec3:
    """World point at forward distance `depth` on the view ray through `pixel`."""
    if depth <= 0.0:
        raise ValueError("depth must be positive")
    direction = ray_through_pixel(camera, pixel)
    forward, _, _ = camera.basis()
    # Scale so the forward component equals depth.
    k = depth / direction.dot(forward)
    return camera.position + direction.scaled(k)


def ray_through_pixel(camera: CameraModel, pixel: PixelPoint) -> Vec3:
    """Unit view ray through a pixel coordinate."""
    nx = pixel.u / camera.width * 2.0 - 1.0
    ny = 1.0 - pixel.v / camera.height * 2.0
    return _ray_from_normalized(camera, nx, ny)


def ray_through_normalized(camera: CameraModel, gx: float, gy: float) -> Vec3:
    """Unit view ray through a normalized [0,1]^2 image point (gy grows down)."""
    return _ray_from_normalized(camera, gx * 2.0 - 1.0, 1.0 - gy * 2.0)


def _ray_from_normalized(camera: CameraModel, nx: float, ny: float) -> Vec3:
    forward, right, up = camera.basis()
    tan_h, tan_v = camera.tan_half_fov()
    d = forward + right.scaled(nx * tan_h) + up.scaled(ny * tan_v)
    return d.normalized()


def angle_between_deg(a: Vec3, b: Vec3) -> float:
    """Angle between two direction vectors in degrees."""
    cos_t = a.normalized().dot(b.normalized())
    return math.degrees(math.acos(min(1.0, max(-1.0, cos_t))))


def projected_radius_px(camera: CameraModel, p: Vec3, radius_m: float) -> float | None:
    """Apparent radius in pixels of a sphere at p, None when behind the camera."""
    _, _, z_cam = camera_coords(camera, p)
    if z_cam <= 0.0:
        return None
    tan_h, _ = camera.tan_half_fov()
    return radius_m / (z_cam * tan_h) * (camera.width / 2.0)


def bearing_deg(origin: Vec3, target: Vec3) -> float:
    """Horizontal bearing from origin to target, degrees CCW from +x."""
    return math.degrees(math.atan2(target.y - origin.y, target.x - origin.x))
