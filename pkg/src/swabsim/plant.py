"""Simulated world around the swab: rigid tip follow, wall contact, hand touches.

Walls are planar patches with inward normals (pointing into free space).
A tip that would pass through a wall is projected back onto it and the
penetration is booked as elastic tip deflection, in millimetres.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InputError, ParameterError, ScenarioFault
from .tactile import WORKING_RANGE_MM, CalibrationModel, force_to_offset

PHASE_WALLS = ("Left", "Right", "Middle")


def _unit(v, name):
    arr = np.asarray(v, dtype=float).reshape(-1)
    n = np.linalg.norm(arr)
    if arr.shape != (3,) or not np.isfinite(n) or n == 0:
        raise ParameterError(f"{name} must be a non-zero finite 3-vector")
    return arr / n


@dataclass(frozen=True)
class Wall:
    """Half-space boundary restricted to a disc patch of radius ``extent`` (m)."""

    name: str
    point: np.ndarray
    normal: np.ndarray
    extent: float = np.inf

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float).reshape(3))
        object.__setattr__(self, "normal", _unit(self.normal, f"{self.name} normal"))
        if not self.extent > 0:
            raise ParameterError(f"{self.name} extent must be > 0")

    def signed_distance(self, p):
        return float((np.asarray(p, dtype=float) - self.point) @ self.normal)

    def covers(self, p):
        """True when ``p`` projects onto the wall inside its patch."""
        rel = np.asarray(p, dtype=float) - self.point
        tangential = rel - (rel @ self.normal) * self.normal
        return bool(np.linalg.norm(tangential) <= self.extent)

    def penetration(self, p):
        """Depth (m) by which ``p`` lies behind the patch, else 0."""
        s = self.signed_distance(p)
        return -s if s < 0 and self.covers(p) else 0.0


def _patch_samples(wall, n=12):
    """Points on a patch disc (center, rings) for the overlap check."""
    a = np.cross(wall.normal, [1.0, 0.0, 0.0])
    if np.linalg.norm(a) < 1e-6:
        a = np.cross(wall.normal, [0.0, 1.0, 0.0])
    a /= np.linalg.norm(a)
    b = np.cross(wall.normal, a)
    radius = wall.extent if np.isfinite(wall.extent) else 1.0
    pts = [wall.point]
    for frac in (0.5, 1.0):
        for k in range(n):
            t = 2 * np.pi * k / n
            pts.append(wall.point + frac * radius * (np.cos(t) * a + np.sin(t) * b))
    return pts


@dataclass(frozen=True)
class CavityModel:
    """Oral cavity as three labelled wall patches plus the swab approach geometry."""

    walls: tuple
    approach_axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -1.0]))
    swab_offset: float = 0.12

    def __post_init__(self):
        walls = tuple(self.walls)
        names = [w.name for w in walls]
        if len(set(names)) != len(names):
            raise ParameterError(f"wall names must be unique, got {names}")
        object.__setattr__(self, "walls", walls)
        object.__setattr__(self, "approach_axis", _unit(self.approach_axis, "approach_axis"))
        if not self.swab_offset >= 0:
            raise ParameterError("swab_offset must be >= 0")
        for i, w in enumerate(walls):
            for other in walls[i + 1 :]:
                for p in _patch_samples(w):
                    if other.covers(p) and abs(other.signed_distance(p)) < 1e-9:
                        raise ParameterError(f"wall patches {w.name} and {other.name} overlap")

    @classmethod
    def default(cls):
        """Cavity frame: +z points out of the mouth, the swab enters along -z."""
        return cls(
            walls=(
                Wall("Left", [0.0, 0.015, -0.12], [0.0, -1.0, 0.0], 0.018),
                Wall("Right", [0.0, -0.015, -0.12], [0.0, 1.0, 0.0], 0.018),
                Wall("Middle", [0.0, 0.0, -0.14], [0.0, 0.0, 1.0], 0.03),
            )
        )

    @classmethod
    def free_space(cls):
        return cls(walls=())

    def wall(self, name):
        for w in self.walls:
            if w.name == name:
                return w
        raise KeyError(name)

    def tip_of(self, effector_position):
        return np.asarray(effector_position, dtype=float) + self.swab_offset * self.approach_axis


@dataclass(frozen=True)
class SwabState:
    """Rigid tip position (m), projected contact point (m) and tip deflection (mm)."""

    tip_position: np.ndarray
    contact_point: np.ndarray = None
    tip_deflection: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        tip = np.asarray(self.tip_position, dtype=float).reshape(3)
        object.__setattr__(self, "tip_position", tip)
        cp = tip if self.contact_point is None else np.asarray(self.contact_point, dtype=float).reshape(3)
        object.__setattr__(self, "contact_point", cp)
        object.__setattr__(self, "tip_deflection", np.asarray(self.tip_deflection, dtype=float).reshape(3))

    @property
    def in_contact(self):
        return bool(np.any(self.tip_deflection != 0))


@dataclass(frozen=True)
class Disturbance:
    """A hand touch: ``force_equivalent`` (N) applied from ``start`` for ``duration`` s."""

    start: float
    duration: float
    force_equivalent: np.ndarray

    def __post_init__(self):
        if not self.duration > 0:
            raise ParameterError("disturbance duration must be > 0")
        object.__setattr__(self, "force_equivalent", np.asarray(self.force_equivalent, dtype=float).reshape(3))

    def active(self, t):
        return self.start <= t < self.start + self.duration

    @property
    def direction(self):
        n = np.linalg.norm(self.force_equivalent)
        return self.force_equivalent / n if n > 0 else np.zeros(3)

    def deflection_mm(self, calibration=None):
        """Tip deflection producing the same reading as this force."""
        magnitude = float(np.linalg.norm(self.force_equivalent))
        return self.direction * force_to_offset(magnitude, calibration or CalibrationModel())


def wall_contact(tip, cavity):
    """Project a rigid tip out of every patch it penetrates.

    Returns ``(contact_point, deflection_mm, max_penetration_mm)``.
    """
    tip = np.asarray(tip, dtype=float)
    point = tip.copy()
    deflection = np.zeros(3)
    deepest = 0.0
    for w in cavity.walls:
        depth = w.penetration(tip)
        if depth > 0:
            point = point + depth * w.normal
            deflection = deflection + 1000.0 * depth * w.normal
            deepest = max(deepest, 1000.0 * depth)
    return point, deflection, deepest


def step_plant(swab, commanded_velocity, cavity, disturbances=(), dt=0.008, time=0.0, calibration=None):
    """Advance the swab one cycle under the arm's commanded velocity.

    ``time`` is the simulated time at the end of the step; disturbances
    active then add their imposed deflection.
    """
    if not dt > 0:
        raise InputError(f"dt must be > 0, got {dt}")
    v = np.asarray(commanded_velocity, dtype=float).reshape(3)
    if not np.isfinite(v).all():
        raise InputError("commanded velocity must be finite")
    tip = swab.tip_position + v * dt
    point, deflection, deepest = wall_contact(tip, cavity)
    if deepest > WORKING_RANGE_MM:
        raise ScenarioFault(f"wall penetration {deepest:.1f} mm exceeds {WORKING_RANGE_MM:g} mm")
    for dist in disturbances:
        if dist.active(time):
            deflection = deflection + dist.deflection_mm(calibration)
    return replace(swab, tip_position=tip, contact_point=point, tip_deflection=deflection)


def axis_feature_mapping(deflection, calibration=None):
    """Expected (du, dv, dr) pixels for a tip deflection (mm).

    Lateral x/y slide the contact center; axial z changes the radius.
    """
    model = calibration or CalibrationModel()
    d = np.asarray(deflection, dtype=float).reshape(3)
    return np.array([model.pixel_per_mm * d[0], model.pixel_per_mm * d[1], model.radius_per_mm * d[2]])


class Plant:
    """Mutable holder the simulation loop steps; snapshots are ``SwabState`` values."""

    def __init__(self, cavity, effector_position, disturbances=(), calibration=None):
        self.cavity = cavity
        self.disturbances = tuple(disturbances)
        self.calibration = calibration or CalibrationModel()
        tip = cavity.tip_of(effector_position)
        point, deflection, _ = wall_contact(tip, cavity)
        self.swab = SwabState(tip, point, deflection)

    def step(self, commanded_velocity, dt, time):
        self.swab = step_plant(self.swab, commanded_velocity, self.cavity, self.disturbances, dt, time, self.calibration)
        return self.swab
