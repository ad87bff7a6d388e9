"""Admittance dynamics of the arm end effector and its fixed-step integrator.

The arm is modelled as a virtual mass-damper-spring driven by a force::

    M xdd + D xd + S (x - x_d) = f

Acceleration is solved from the force each control cycle, then velocity and
position are advanced with semi-implicit Euler (position uses the new
velocity).
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ParameterError

DEFAULT_DT = 0.008
DEFAULT_VELOCITY_CAP = 0.2


def _vec3(value, name):
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise InputError(f"{name} must be a 3-vector, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise InputError(f"{name} must be finite, got {arr}")
    return arr


def _mat3(value, name):
    arr = np.asarray(value, dtype=float)
    if arr.shape == (3,):
        arr = np.diag(arr)
    if arr.shape != (3, 3):
        raise ParameterError(f"{name} must be 3x3 (or a diagonal 3-vector), got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ParameterError(f"{name} must be finite")
    return arr


@dataclass(frozen=True)
class EndEffectorState:
    """Cartesian position (m), velocity (m/s) and acceleration (m/s^2) of the tool point."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    acceleration: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("position", "velocity", "acceleration"):
            object.__setattr__(self, name, _vec3(getattr(self, name), name))


@dataclass(frozen=True)
class AdmittanceParams:
    """Mass, damping and stiffness matrices plus the desired position.

    Mass must be symmetric positive-definite; damping and stiffness symmetric
    positive-semidefinite. 3-vectors are accepted as diagonals.
    """

    mass: np.ndarray = field(default_factory=lambda: np.diag([1.0, 1.0, 1.0]))
    damping: np.ndarray = field(default_factory=lambda: np.diag([16.0, 16.0, 16.0]))
    stiffness: np.ndarray = field(default_factory=lambda: np.diag([4.0, 4.0, 4.0]))
    desired_position: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name, definite in (("mass", True), ("damping", False), ("stiffness", False)):
            m = _mat3(getattr(self, name), name)
            if not np.allclose(m, m.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(m).max())):
                raise ParameterError(f"{name} must be symmetric")
            eig = np.linalg.eigvalsh(m)
            tol = 1e-12 * max(1.0, np.abs(eig).max())
            if definite and eig.min() <= tol:
                raise ParameterError(f"{name} must be positive-definite (min eigenvalue {eig.min():g})")
            if not definite and eig.min() < -tol:
                raise ParameterError(f"{name} must be positive-semidefinite (min eigenvalue {eig.min():g})")
            object.__setattr__(self, name, m)
        object.__setattr__(self, "desired_position", _vec3(self.desired_position, "desired_position"))


def admittance_accel(state, params, force):
    """Acceleration ``M^-1 (f - D xd - S (x - x_d))``; pure."""
    f = _vec3(force, "force")
    rhs = f - params.damping @ state.velocity - params.stiffness @ (state.position - params.desired_position)
    try:
        return np.linalg.solve(params.mass, rhs)
    except np.linalg.LinAlgError as exc:
        raise ParameterError(f"mass matrix is singular: {exc}") from exc


def integrate_step(state, accel, dt=DEFAULT_DT, velocity_cap=DEFAULT_VELOCITY_CAP):
    """Advance one control cycle.

    Velocity takes an explicit Euler step and is clamped to ``velocity_cap``
    (``None`` disables the cap); position then moves with the clamped new
    velocity. The returned state carries ``accel`` as its acceleration.
    """
    if not dt > 0:
        raise InputError(f"dt must be > 0, got {dt}")
    a = _vec3(accel, "accel")
    v = state.velocity + a * dt
    if velocity_cap is not None:
        speed = np.linalg.norm(v)
        if speed > velocity_cap:
            v = v * (velocity_cap / speed)
    return EndEffectorState(position=state.position + v * dt, velocity=v, acceleration=a)


def residual_norm(state, params, force):
    """Norm of ``M xdd + D xd + S (x - x_d) - f`` for the state as it stands."""
    f = _vec3(force, "force")
    r = (
        params.mass @ state.acceleration
        + params.damping @ state.velocity
        + params.stiffness @ (state.position - params.desired_position)
        - f
    )
    return float(np.linalg.norm(r))


def energy(state, params):
    """Kinetic plus spring energy ``1/2 xd'M xd + 1/2 (x-x_d)'S(x-x_d)``."""
    dx = state.position - params.desired_position
    return float(0.5 * state.velocity @ params.mass @ state.velocity + 0.5 * dx @ params.stiffness @ dx)
