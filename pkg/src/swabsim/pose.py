"""Sampling pose from lip landmarks and a depth image.

The bounding rectangle of the lip landmarks is searched for its deepest
valid pixel, which becomes the sampling point. A total-least-squares plane
through the outer-lip points gives the sampling direction, oriented toward
the camera (negative z in the camera frame). The swab approach vector is
the opposite of that direction.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DetectionError, FitError, InputError
from .netpbm import read_pgm, write_pgm


@dataclass(frozen=True)
class LandmarkSet:
    """Pixel landmarks ``(u, v)`` with a role tag per point (``outer`` or ``inner``)."""

    points: np.ndarray
    tags: tuple

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if len(self.tags) != len(pts):
            raise InputError("one tag per landmark is required")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "tags", tuple(self.tags))

    @property
    def outer(self):
        return self.points[[t == "outer" for t in self.tags]]


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    depth_scale: float = 0.001  # metres per stored depth unit

    def backproject(self, u, v, z):
        u, v, z = np.asarray(u, float), np.asarray(v, float), np.asarray(z, float)
        return np.stack([(u - self.cx) * z / self.fx, (v - self.cy) * z / self.fy, z], axis=-1)

    def project(self, p):
        p = np.asarray(p, dtype=float)
        return np.stack([self.fx * p[..., 0] / p[..., 2] + self.cx, self.fy * p[..., 1] / p[..., 2] + self.cy], axis=-1)


@dataclass(frozen=True)
class DepthImage:
    """Depth in metres; non-positive or non-finite pixels are invalid."""

    depth: np.ndarray
    intrinsics: Intrinsics

    def __post_init__(self):
        d = np.asarray(self.depth, dtype=float)
        if d.ndim != 2:
            raise InputError("depth must be 2D")
        object.__setattr__(self, "depth", d)

    @property
    def valid(self):
        return np.isfinite(self.depth) & (self.depth > 0)

    @property
    def height(self):
        return self.depth.shape[0]

    @property
    def width(self):
        return self.depth.shape[1]


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle with inclusive pixel bounds."""

    u_min: float
    v_min: float
    u_max: float
    v_max: float

    def as_tuple(self):
        return (self.u_min, self.v_min, self.u_max, self.v_max)


@dataclass(frozen=True)
class SamplingPose:
    point: np.ndarray
    direction: np.ndarray
    pixel: tuple

    @property
    def approach(self):
        return -self.direction


def min_bounding_rect(landmarks):
    pts = landmarks.points if isinstance(landmarks, LandmarkSet) else np.asarray(landmarks, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise InputError("cannot bound an empty landmark set")
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    return Rect(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


def deepest_point(rect, depth):
    """Deepest valid pixel inside ``rect``; ties go to the first in row-major order.

    Returns ``(u, v, depth_m)``.
    """
    u0 = max(int(np.ceil(rect.u_min)), 0)
    v0 = max(int(np.ceil(rect.v_min)), 0)
    u1 = min(int(np.floor(rect.u_max)), depth.width - 1)
    v1 = min(int(np.floor(rect.v_max)), depth.height - 1)
    if u0 > u1 or v0 > v1:
        raise DetectionError("deepest_point", "rectangle does not intersect the image")
    window = depth.depth[v0 : v1 + 1, u0 : u1 + 1]
    valid = depth.valid[v0 : v1 + 1, u0 : u1 + 1]
    if not valid.any():
        raise DetectionError("deepest_point", "no valid depth inside the rectangle")
    idx = int(np.argmax(np.where(valid, window, -np.inf)))
    dv, du = divmod(idx, window.shape[1])
    return u0 + du, v0 + dv, float(window[dv, du])


def fit_lip_plane(points3d):
    """Total-least-squares plane through 3D points.

    Returns ``(normal, offset, rms_residual)`` with ``normal . p = offset`` on
    the plane and the normal in the camera-facing (negative z) hemisphere.
    """
    pts = np.asarray(points3d, dtype=float).reshape(-1, 3)
    if len(pts) < 3:
        raise FitError("need at least 3 points for a plane")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    if s[0] == 0 or s[1] <= 1e-9 * s[0]:
        raise FitError("points are collinear or coincident")
    normal = vt[-1]
    flip = normal[2] > 0 or (normal[2] == 0 and normal @ centroid > 0)
    if flip:
        normal = -normal
    residual = centered @ normal
    return normal, float(normal @ centroid), float(np.sqrt(np.mean(residual**2)))


def _patch_points(depth, uv, radius):
    """Back-projected valid pixels in a square window around each landmark."""
    out = []
    for u, v in np.rint(uv).astype(int):
        us = np.arange(max(u - radius, 0), min(u + radius, depth.width - 1) + 1)
        vs = np.arange(max(v - radius, 0), min(v + radius, depth.height - 1) + 1)
        if us.size == 0 or vs.size == 0:
            continue
        uu, vv = np.meshgrid(us, vs)
        z = depth.depth[vv, uu]
        ok = np.isfinite(z) & (z > 0)
        out.append(depth.intrinsics.backproject(uu[ok], vv[ok], z[ok]))
    return np.concatenate(out) if out else np.zeros((0, 3))


def sampling_pose(landmarks, depth, patch_radius=2):
    """Full pipeline: rectangle, deepest point, outer-lip plane normal.

    Each outer landmark contributes the valid pixels of a
    ``(2 * patch_radius + 1)``-square window to the plane fit, which damps
    depth noise; ``patch_radius=0`` uses the landmark pixels alone.
    """
    rect = min_bounding_rect(landmarks)
    u, v, z = deepest_point(rect, depth)
    point = depth.intrinsics.backproject(u, v, z)
    outer = landmarks.outer
    if len(outer) < 3:
        raise DetectionError("fit_lip_plane", "fewer than 3 outer-lip landmarks")
    pts = _patch_points(depth, outer, patch_radius)
    try:
        normal, _, _ = fit_lip_plane(pts)
    except FitError as exc:
        raise DetectionError("fit_lip_plane", str(exc)) from exc
    return SamplingPose(point=point, direction=normal, pixel=(u, v))


def load_landmarks(path):
    """Read ``u v tag`` lines; ``#`` starts a comment."""
    pts, tags = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise InputError(f"{path}:{lineno}: expected 'u v tag'")
            try:
                pts.append((float(parts[0]), float(parts[1])))
            except ValueError:
                raise InputError(f"{path}:{lineno}: coordinates must be numbers") from None
            tags.append(parts[2])
    return LandmarkSet(np.array(pts).reshape(-1, 2), tuple(tags))


def save_landmarks(landmarks, path):
    with open(path, "w", encoding="utf-8") as fh:
        for (u, v), tag in zip(landmarks.points, landmarks.tags):
            fh.write(f"{float(u)!r} {float(v)!r} {tag}\n")


def load_intrinsics(path):
    """Read ``fx fy cx cy depth_scale`` (whitespace separated, ``#`` comments)."""
    with open(path, encoding="utf-8") as fh:
        text = " ".join(line.split("#", 1)[0] for line in fh)
    vals = text.split()
    if len(vals) != 5:
        raise InputError(f"{path}: expected 'fx fy cx cy depth_scale'")
    return Intrinsics(*(float(x) for x in vals))


def save_intrinsics(intrinsics, path):
    i = intrinsics
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(" ".join(repr(float(x)) for x in (i.fx, i.fy, i.cx, i.cy, i.depth_scale)) + "\n")


def load_depth(depth_path, intrinsics_path):
    """16-bit PGM depth plus intrinsics sidecar; stored zeros are invalid."""
    intr = load_intrinsics(intrinsics_path)
    raw, _ = read_pgm(depth_path)
    depth = raw.astype(float) * intr.depth_scale
    depth[raw == 0] = np.nan
    return DepthImage(depth, intr)


def save_depth(depth, path):
    scale = depth.intrinsics.depth_scale
    raw = np.where(depth.valid, np.rint(np.nan_to_num(depth.depth) / scale), 0)
    write_pgm(path, np.clip(raw, 0, 65535), maxval=65535, binary=True)


def synthetic_scene(
    yaw_deg=0.0,
    lip_depth=0.4,
    cavity_depth=0.07,
    size=(160, 120),
    focal=500.0,
    mouth=(0.03, 0.015),
    n_outer=12,
    n_inner=8,
    noise_sigma=0.0,
    seed=None,
):
    """Frontal face with a planar lip region and a bowl-shaped mouth cavity.

    The lip plane passes through ``(0, 0, lip_depth)`` facing the camera and
    is rotated by ``yaw_deg`` about the vertical axis. Inside the inner-lip
    ellipse (scaled by 0.6) the surface recedes by up to ``cavity_depth``
    along the viewing ray. Returns ``(landmarks, depth_image, truth)`` where
    ``truth`` holds the camera-facing normal and the deepest cavity point.
    """
    width, height = size
    intr = Intrinsics(focal, focal, width / 2.0, height / 2.0)
    yaw = np.radians(yaw_deg)
    rot = np.array([[np.cos(yaw), 0, np.sin(yaw)], [0, 1, 0], [-np.sin(yaw), 0, np.cos(yaw)]])
    origin = np.array([0.0, 0.0, lip_depth])
    normal = rot @ np.array([0.0, 0.0, -1.0])
    ex, ey = rot @ np.array([1.0, 0.0, 0.0]), rot @ np.array([0.0, 1.0, 0.0])

    vv, uu = np.mgrid[0:height, 0:width].astype(float)
    rays = np.stack([(uu - intr.cx) / intr.fx, (vv - intr.cy) / intr.fy, np.ones_like(uu)], axis=-1)
    t = (origin @ normal) / (rays @ normal)
    hit = rays * t[..., None]
    rel = hit - origin
    a, b = rel @ ex, rel @ ey
    inner = (0.6 * mouth[0], 0.6 * mouth[1])
    r2 = (a / inner[0]) ** 2 + (b / inner[1]) ** 2
    depth = t + np.where(r2 < 1.0, cavity_depth * (1.0 - r2), 0.0)
    if noise_sigma > 0:
        depth = depth + np.random.default_rng(seed).normal(0.0, noise_sigma, depth.shape)

    def ring(n, ax, ay):
        ang = 2 * np.pi * np.arange(n) / n
        pts3 = origin + np.outer(ax * np.cos(ang), ex) + np.outer(ay * np.sin(ang), ey)
        return intr.project(pts3)

    pts = np.vstack([ring(n_outer, *mouth), ring(n_inner, *inner)])
    tags = ("outer",) * n_outer + ("inner",) * n_inner
    deepest = origin + np.array([0.0, 0.0, cavity_depth])
    truth = {"normal": normal, "cavity_point": deepest}
    return LandmarkSet(pts, tags), DepthImage(depth, intr), truth
