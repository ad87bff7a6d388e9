"""Simulated concave visuo-tactile sensor.

The swab base presses a bright contact blob into the sensor image. Lateral
tip deflection slides the blob across the image; axial deflection grows its
radius. ``extract_contact`` recovers (center, radius) with a classical
threshold / connected-components pipeline, and the calibration helpers turn
that back into a contact force.
"""
import functools
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import FitError, InputError, ParameterError
from .netpbm import read_pgm, write_pgm

WORKING_RANGE_MM = 45.0
MIN_RADIUS_PX = 2.0
PRESSURE_RANGE_KPA = (0.0, 30.0)
_AXES = {"x": 0, "y": 1, "z": 2}
_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class SensorGeometry:
    width: int = 64
    height: int = 64
    rest_radius: float = 8.0
    pixel_per_mm: float = 0.5
    radius_per_mm: float = 0.4
    edge_width: float = 2.0
    working_range_mm: float = WORKING_RANGE_MM

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise ParameterError("sensor frame must be at least 8x8 pixels")
        for name in ("rest_radius", "pixel_per_mm", "radius_per_mm", "edge_width", "working_range_mm"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0")

    @property
    def center(self):
        return self.width / 2.0, self.height / 2.0


@dataclass(frozen=True)
class TactileFrame:
    """Grayscale sensor image with intensities in [0, 1]; rows are ``v``, columns ``u``."""

    intensities: np.ndarray
    timestamp: int = 0
    saturated: bool = False

    def __post_init__(self):
        img = np.asarray(self.intensities, dtype=float)
        if img.ndim != 2:
            raise InputError("frame intensities must be 2D")
        if not np.isfinite(img).all() or img.min() < 0.0 or img.max() > 1.0:
            raise InputError("frame intensities must lie in [0, 1]")
        img.setflags(write=False)
        object.__setattr__(self, "intensities", img)

    @property
    def height(self):
        return self.intensities.shape[0]

    @property
    def width(self):
        return self.intensities.shape[1]


@dataclass(frozen=True)
class ContactFeature:
    """Contact blob center (pixels) and radius (pixels)."""

    center_u: float = 0.0
    center_v: float = 0.0
    radius: float = 0.0
    present: bool = True

    @classmethod
    def absent(cls):
        return cls(0.0, 0.0, 0.0, present=False)

    def as_array(self):
        return np.array([self.center_u, self.center_v, self.radius])


def disk_intensity(u, v, center, radius, edge_width=2.0):
    """Radially shaded disk with a linear anti-aliased rim.

    Intensity crosses 0.5 exactly at ``radius``; the interior dome never
    drops below 0.75 so the rim alone decides the threshold crossing.
    """
    rho = np.hypot(u - center[0], v - center[1])
    dome = 1.0 - 0.25 * np.minimum(rho / radius, 1.0) ** 2
    rim = 0.5 + (radius - rho) / edge_width
    return np.clip(np.minimum(dome, rim), 0.0, 1.0)


@functools.lru_cache(maxsize=8)
def _pixel_grid(height, width):
    v, u = np.mgrid[0:height, 0:width].astype(float)
    v.setflags(write=False)
    u.setflags(write=False)
    return v, u


def render_disk(width, height, center, radius, edge_width=2.0):
    """Noise-free intensity grid of one disk at an explicit pixel location."""
    v, u = _pixel_grid(height, width)
    img = np.zeros((height, width))
    # the rim reaches zero at radius + edge_width / 2, so only that window is shaded
    reach = radius + edge_width / 2.0 + 1.0
    u0, u1 = max(int(center[0] - reach), 0), min(int(np.ceil(center[0] + reach)) + 1, width)
    v0, v1 = max(int(center[1] - reach), 0), min(int(np.ceil(center[1] + reach)) + 1, height)
    if u0 < u1 and v0 < v1:
        win = (slice(v0, v1), slice(u0, u1))
        img[win] = disk_intensity(u[win], v[win], center, radius, edge_width)
    return img


def expected_feature(tip_deflection, geometry):
    """Ground-truth (u, v, r) the renderer draws for a deflection in mm."""
    d = np.asarray(tip_deflection, dtype=float)
    cu, cv = geometry.center
    return np.array([
        cu + geometry.pixel_per_mm * d[0],
        cv + geometry.pixel_per_mm * d[1],
        geometry.rest_radius + geometry.radius_per_mm * d[2],
    ])


def render_frame(tip_deflection, geometry=None, noise_seed=None, noise_sigma=0.01, timestamp=0):
    """Render the contact blob for a tip deflection given in mm.

    ``noise_seed`` may be an int, ``None`` or a ``numpy.random.Generator``;
    pass ``noise_sigma=0`` for a noise-free frame. Deflections beyond the
    working range, or blobs that leave the image, set ``saturated``.
    """
    geometry = geometry or SensorGeometry()
    d = np.asarray(tip_deflection, dtype=float).reshape(-1)
    if d.shape != (3,) or not np.isfinite(d).all():
        raise InputError(f"tip_deflection must be a finite 3-vector, got {tip_deflection!r}")
    u0, v0, r = expected_feature(d, geometry)
    half = geometry.edge_width / 2.0
    saturated = bool(
        np.linalg.norm(d) > geometry.working_range_mm
        or r < MIN_RADIUS_PX
        or u0 - r - half < 0
        or v0 - r - half < 0
        or u0 + r + half > geometry.width - 1
        or v0 + r + half > geometry.height - 1
    )
    img = render_disk(geometry.width, geometry.height, (u0, v0), max(r, 1e-6), geometry.edge_width)
    if noise_sigma > 0:
        rng = noise_seed if isinstance(noise_seed, np.random.Generator) else np.random.default_rng(noise_seed)
        img += rng.normal(0.0, noise_sigma, img.shape)
        np.clip(img, 0.0, 1.0, out=img)
    return TactileFrame(img, timestamp=timestamp, saturated=saturated)


def _dilate_cross(mask, iterations):
    """Binary dilation with the 4-neighbour cross, repeated ``iterations`` times."""
    out = mask.copy()
    for _ in range(iterations):
        grown = out.copy()
        grown[1:, :] |= out[:-1, :]
        grown[:-1, :] |= out[1:, :]
        grown[:, 1:] |= out[:, :-1]
        grown[:, :-1] |= out[:, 1:]
        out = grown
    return out


def extract_contact(frame, threshold=0.5, min_area=10, edge_width=2.0):
    """Locate the dominant contact blob in a frame.

    Threshold, label 8-connected components and keep the largest (ties go to
    the smaller (u, v) centroid). The center is the intensity-weighted
    centroid over the component grown by the rim width; the radius is the
    equivalent-area radius, with rim pixels counted by partial coverage.
    """
    img = frame.intensities
    mask = img > threshold
    labels, count = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    if count == 0:
        return ContactFeature.absent()
    areas = np.bincount(labels.ravel())[1:]
    v_idx, u_idx = _pixel_grid(*img.shape)
    grow = int(np.ceil(edge_width / 2.0)) + 1
    boxes = ndimage.find_objects(labels)
    best = None
    for lab in np.flatnonzero(areas >= min_area) + 1:
        # dilate inside the component's bounding box padded by the growth reach
        sv, su = boxes[lab - 1]
        box = (slice(max(sv.start - grow, 0), sv.stop + grow), slice(max(su.start - grow, 0), su.stop + grow))
        grown = _dilate_cross(labels[box] == lab, grow)
        w = img[box][grown]
        total = w.sum()
        cu = float((u_idx[box][grown] * w).sum() / total)
        cv = float((v_idx[box][grown] * w).sum() / total)
        key = (-int(areas[lab - 1]), cu, cv)
        if best is None or key < best[0]:
            best = (key, w, cu, cv)
    if best is None:
        return ContactFeature.absent()
    _, w, cu, cv = best
    coverage = np.clip(0.5 + (w - threshold) * edge_width, 0.0, 1.0).sum()
    # a unit-width linear rim inflates the area of a disk by pi/12
    radius = float(np.sqrt(max(coverage / np.pi - 1.0 / 12.0, 0.0)))
    return ContactFeature(cu, cv, radius, present=True)


def save_frame(frame, path, binary=True, maxval=255):
    write_pgm(path, np.rint(frame.intensities * maxval), maxval=maxval, binary=binary)


def load_frame(path, timestamp=0):
    data, maxval = read_pgm(path)
    return TactileFrame(data.astype(float) / maxval, timestamp=timestamp)


@dataclass(frozen=True)
class CalibrationModel:
    """Pressure->force (linear, per axis) and offset->force (quadratic) maps.

    ``offset_quadratic`` holds ``(c2, c1, c0)`` in N/mm^2, N/mm, N.
    ``pixel_per_mm`` and ``radius_per_mm`` convert feature displacement back
    into tip deflection.
    """

    pressure_slope: np.ndarray = field(default_factory=lambda: np.array([0.0118, 0.0118, 0.14]))
    pressure_intercept: np.ndarray = field(default_factory=lambda: np.zeros(3))
    offset_quadratic: tuple = (1.337e-4, 2.5e-3, 0.0)
    pixel_per_mm: float = 0.5
    radius_per_mm: float = 0.4

    def __post_init__(self):
        for name in ("pressure_slope", "pressure_intercept"):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(-1)
            if arr.shape != (3,) or not np.isfinite(arr).all():
                raise ParameterError(f"{name} must be a finite per-axis 3-vector")
            object.__setattr__(self, name, arr)
        c2, c1, c0 = (float(c) for c in self.offset_quadratic)
        object.__setattr__(self, "offset_quadratic", (c2, c1, c0))
        if c0 != 0.0:
            raise ParameterError(f"offset calibration must pass through the origin (c0 = {c0})")
        if c1 < 0 or 2 * c2 * WORKING_RANGE_MM + c1 < 0:
            raise ParameterError("offset calibration must be non-decreasing on [0, 45] mm")
        if not (self.pixel_per_mm > 0 and self.radius_per_mm > 0):
            raise ParameterError("pixel_per_mm and radius_per_mm must be > 0")


def offset_to_force(offset, model=None):
    """Contact force (N) for a swab-tip offset (mm) via the quadratic map."""
    model = model or CalibrationModel()
    x = np.asarray(offset, dtype=float)
    if np.any(x < 0) or not np.isfinite(x).all():
        raise InputError("offset must be finite and >= 0")
    if np.any(x > WORKING_RANGE_MM):
        warnings.warn(f"offset beyond the {WORKING_RANGE_MM:g} mm calibrated band; extrapolating", stacklevel=2)
    c2, c1, c0 = model.offset_quadratic
    out = c2 * x * x + c1 * x + c0
    return float(out) if out.ndim == 0 else out


def force_to_offset(force, model=None):
    """Inverse of :func:`offset_to_force` on the non-negative branch."""
    model = model or CalibrationModel()
    f = np.asarray(force, dtype=float)
    if np.any(f < 0):
        raise InputError("force must be >= 0")
    c2, c1, c0 = model.offset_quadratic
    if c2 == 0:
        out = (f - c0) / c1
    else:
        out = (-c1 + np.sqrt(c1 * c1 + 4 * c2 * (f - c0))) / (2 * c2)
    return float(out) if out.ndim == 0 else out


def pressure_to_force(pressure, axis, model=None):
    """Linear gripping force (N) at an air pressure (kPa) for axis x, y or z."""
    model = model or CalibrationModel()
    lo, hi = PRESSURE_RANGE_KPA
    if not np.isfinite(pressure) or pressure < lo or pressure > hi:
        raise InputError(f"pressure must lie in [{lo:g}, {hi:g}] kPa, got {pressure}")
    try:
        i = _AXES[axis.lower()] if isinstance(axis, str) else int(axis)
    except (KeyError, ValueError) as exc:
        raise InputError(f"unknown axis {axis!r}") from exc
    return max(0.0, float(model.pressure_slope[i] * pressure + model.pressure_intercept[i]))


def fit_offset_calibration(samples, through_origin=False):
    """Least-squares quadratic ``force = c2 x^2 + c1 x + c0`` over (offset, force) pairs.

    With ``through_origin`` the constant term is pinned to zero.
    """
    data = np.asarray(samples, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise FitError("samples must be a sequence of (offset, force) pairs")
    x, y = data[:, 0], data[:, 1]
    ncoef = 2 if through_origin else 3
    if len(x) < ncoef or len(np.unique(x)) < ncoef:
        raise FitError(f"need at least {ncoef} distinct offsets, got {len(np.unique(x))}")
    cols = [x * x, x] if through_origin else [x * x, x, np.ones_like(x)]
    A = np.column_stack(cols)
    coef, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    if rank < ncoef:
        raise FitError("design matrix is rank deficient")
    if through_origin:
        return float(coef[0]), float(coef[1]), 0.0
    return tuple(float(c) for c in coef)


def feature_to_deflection(feature, rest, model=None):
    """Tip deflection (mm) implied by a feature's displacement from the rest feature."""
    model = model or CalibrationModel()
    du = feature.center_u - rest.center_u
    dv = feature.center_v - rest.center_v
    dr = feature.radius - rest.radius
    return np.array([du / model.pixel_per_mm, dv / model.pixel_per_mm, dr / model.radius_per_mm])


def feature_to_force(feature, rest, model=None):
    """Reconstructed contact force magnitude (N) from a contact feature."""
    if not feature.present:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return offset_to_force(float(np.linalg.norm(feature_to_deflection(feature, rest, model))), model)


class TactileSensor:
    """Renders and reads the sensor each control cycle with a private RNG."""

    def __init__(self, geometry=None, noise_sigma=0.01, seed=None, threshold=0.5, min_area=10):
        self.geometry = geometry or SensorGeometry()
        self.noise_sigma = noise_sigma
        self.threshold = threshold
        self.min_area = min_area
        self.rng = np.random.default_rng(seed)
        u, v, r = expected_feature(np.zeros(3), self.geometry)
        self.rest_feature = ContactFeature(u, v, r)

    def read(self, tip_deflection, timestamp=0):
        frame = render_frame(tip_deflection, self.geometry, self.rng, self.noise_sigma, timestamp)
        feature = extract_contact(frame, self.threshold, self.min_area, self.geometry.edge_width)
        return frame, feature

    def desired_feature(self, tip_deflection):
        """Feature the sensor shows when the tip holds ``tip_deflection`` (mm)."""
        u, v, r = expected_feature(tip_deflection, self.geometry)
        return ContactFeature(u, v, r)
