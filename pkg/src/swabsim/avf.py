"""Adaptive virtual-force controller and the sampling loop it drives.

The sensor-image error between the current and desired contact feature is
turned into a virtual force by an incremental PID whose three weights adapt
online. The virtual force then drives the admittance model of the arm.

Per control cycle the weights are adapted first, using the force from the
previous cycle, and the force increment is then computed with the freshly
adapted weights.
"""
import copy
import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .dynamics import (
    DEFAULT_DT,
    DEFAULT_VELOCITY_CAP,
    EndEffectorState,
    admittance_accel,
    integrate_step,
    residual_norm,
)
from .errors import ControllerFault, InputError, ParameterError, ScenarioFault
from .tactile import CalibrationModel, force_to_offset
from .trace import CycleRecord, PhaseSummary, SamplingTrace


@dataclass(frozen=True)
class ContactError:
    """Feature error ``(du, dv, dr)`` in pixels; zero with ``lost_contact`` when no blob is seen."""

    e: np.ndarray
    lost_contact: bool = False


def contact_error(current, desired):
    if not current.present:
        return ContactError(np.zeros(3), lost_contact=True)
    return ContactError(current.as_array() - desired.as_array())


def z_terms(history):
    """Difference terms from the newest-first error history ``(e(n), e(n-1), e(n-2))``."""
    e0, e1, e2 = (np.asarray(h, dtype=float) for h in history)
    return e0 - e1, e0, e0 - 2.0 * e1 + e2


def _rows(value, name):
    arr = np.asarray(value, dtype=float)
    if arr.shape == (3,):
        arr = np.tile(arr, (3, 1))
    if arr.shape != (3, 3):
        raise ParameterError(f"{name} must be three 3-vectors")
    return arr


@dataclass(frozen=True)
class AvfState:
    """Controller state.

    ``weights`` and ``learning_rates`` hold one 3-vector per difference term
    (rows 1..3). ``error_history`` is newest first. ``gain`` maps pixels to
    newtons.
    """

    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    force_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    weights: np.ndarray = field(default_factory=lambda: np.array([[8.0] * 3, [0.1] * 3, [1.0] * 3]))
    learning_rates: np.ndarray = field(default_factory=lambda: np.full((3, 3), 1e-5))
    desired_output: np.ndarray = field(default_factory=lambda: np.zeros(3))
    gain: np.ndarray = field(default_factory=lambda: np.diag([0.01, 0.01, 0.01]))
    error_history: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    force_limit: float = 1.0
    weight_bound: float = 1e3

    def __post_init__(self):
        object.__setattr__(self, "weights", _rows(self.weights, "weights"))
        object.__setattr__(self, "learning_rates", _rows(self.learning_rates, "learning_rates"))
        object.__setattr__(self, "error_history", _rows(self.error_history, "error_history"))
        gain = np.asarray(self.gain, dtype=float)
        if gain.shape == (3,):
            gain = np.diag(gain)
        if gain.shape != (3, 3):
            raise ParameterError("gain must be 3x3")
        object.__setattr__(self, "gain", gain)
        for name in ("force", "force_offset", "desired_output"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).reshape(3))
        if not self.force_limit > 0 or not self.weight_bound > 0:
            raise ParameterError("force_limit and weight_bound must be > 0")

    def reset(self, force_offset=None):
        """Start a phase: force back to the offset, history cleared, weights kept."""
        fo = self.force_offset if force_offset is None else np.asarray(force_offset, dtype=float)
        return replace(self, force=fo.copy(), force_offset=fo, error_history=np.zeros((3, 3)))

    def push_error(self, e):
        hist = np.vstack([np.asarray(e, dtype=float).reshape(1, 3), self.error_history[:2]])
        return replace(self, error_history=hist)


def update_weights(state, z):
    """``w_i += v_i * (u - f) * f * z_i`` element-wise, with ``f`` the previous cycle's force."""
    f = state.force
    common = (state.desired_output - f) * f
    w = state.weights + state.learning_rates * common[None, :] * np.vstack(z)
    if not np.isfinite(w).all() or np.abs(w).max() > state.weight_bound:
        raise ControllerFault(f"adaptive weights diverged (max |w| = {np.nanmax(np.abs(w)):.3g})")
    return replace(state, weights=w)


def virtual_force_step(state, z):
    """Incremental PID: ``f += K @ sum_i w_i * z_i``, clamped to ``+-force_limit`` per axis."""
    increment = state.gain @ (state.weights * np.vstack(z)).sum(axis=0)
    f = state.force + increment
    if not np.isfinite(f).all():
        raise ControllerFault("virtual force is not finite")
    return replace(state, force=np.clip(f, -state.force_limit, state.force_limit))


def controller_cycle(state, error):
    """Push one error sample and run adaptation then force update."""
    state = state.push_error(error)
    z = z_terms(state.error_history)
    return virtual_force_step(update_weights(state, z), z)


def _fast_cycle(state, error):
    """:func:`controller_cycle` with a single state copy, for the simulation loop.

    Same arithmetic in the same order; it skips re-validating the
    intermediate states.
    """
    hist = np.vstack([np.asarray(error, dtype=float).reshape(1, 3), state.error_history[:2]])
    z = z_terms(hist)
    zs = np.vstack(z)
    f = state.force
    w = state.weights + state.learning_rates * ((state.desired_output - f) * f)[None, :] * zs
    if not np.isfinite(w).all() or np.abs(w).max() > state.weight_bound:
        raise ControllerFault(f"adaptive weights diverged (max |w| = {np.nanmax(np.abs(w)):.3g})")
    f = f + state.gain @ (w * zs).sum(axis=0)
    if not np.isfinite(f).all():
        raise ControllerFault("virtual force is not finite")
    new = copy.copy(state)
    object.__setattr__(new, "error_history", hist)
    object.__setattr__(new, "weights", w)
    object.__setattr__(new, "force", np.clip(f, -state.force_limit, state.force_limit))
    return new


class PhaseName(str, enum.Enum):
    INITIAL = "Initial"
    LEFT = "Left"
    RIGHT = "Right"
    MIDDLE = "Middle"


PHASE_ORDER = tuple(PhaseName)


@dataclass(frozen=True)
class SamplingPhase:
    """One scripted stage of the sampling sequence.

    ``target_force`` (N) sets the desired contact: the desired feature is the
    one seen when the tip is deflected opposite to ``force_offset`` by the
    offset that produces that force. ``dwell`` is how long the error must
    stay within tolerance before the phase may end.
    """

    name: PhaseName
    force_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    duration_cap: float = 8.0
    dwell: float = 0.0
    target_force: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "name", PhaseName(self.name))
        object.__setattr__(self, "force_offset", np.asarray(self.force_offset, dtype=float).reshape(3))
        if not self.duration_cap > 0 or self.dwell < 0 or self.target_force < 0:
            raise ParameterError(f"phase {self.name.value}: need duration_cap > 0, dwell >= 0, target_force >= 0")

    def target_deflection(self, calibration=None):
        norm = np.linalg.norm(self.force_offset)
        if self.target_force == 0 or norm == 0:
            return np.zeros(3)
        return -self.force_offset / norm * force_to_offset(self.target_force, calibration or CalibrationModel())


def check_phase_order(phases):
    ranks = [PHASE_ORDER.index(PhaseName(p.name)) for p in phases]
    if ranks != sorted(ranks) or len(set(ranks)) != len(ranks):
        raise ParameterError("phases must follow Initial -> Left -> Right -> Middle without repeats")


def run_sampling(
    phases,
    plant,
    sensor,
    params,
    epsilon=0.01,
    passes=1,
    *,
    controller=None,
    state=None,
    dt=DEFAULT_DT,
    velocity_cap=DEFAULT_VELOCITY_CAP,
    error_tolerance=1.0,
    lost_contact_hold=0.2,
    retreat_force=0.2,
    calibration=None,
    trace=None,
):
    """Run the adaptive compliant sampling loop.

    For each of ``passes`` sweeps, every phase resets the virtual force to
    its offset and then cycles sense -> error -> adapt -> force ->
    admittance -> integrate -> plant. A phase ends normally once the feature
    error has stayed within ``error_tolerance`` pixels for the phase dwell
    and the dynamics residual is below ``epsilon``; otherwise it times out
    at its duration cap.

    When the contact blob disappears the last force is held for
    ``lost_contact_hold`` seconds, after which a ``retreat_force`` pulls the
    swab back against the approach axis until contact returns.

    Controller and scenario faults stop the run; the partial trace is
    returned with ``trace.fault`` set.
    """
    if not epsilon > 0:
        raise InputError("epsilon must be > 0")
    if passes < 1:
        raise InputError("passes must be >= 1")
    check_phase_order(phases)
    calibration = calibration or CalibrationModel()
    ctrl = controller or AvfState()
    arm = state or EndEffectorState(position=params.desired_position)
    trace = trace if trace is not None else SamplingTrace(dt=dt)
    rest = sensor.rest_feature
    hold_cycles = int(round(lost_contact_hold / dt))
    retreat = -retreat_force * plant.cavity.approach_axis

    for pass_index in range(passes):
        for phase in phases:
            ctrl = ctrl.reset(phase.force_offset)
            desired = sensor.desired_feature(phase.target_deflection(calibration))
            summary = PhaseSummary(phase.name.value, pass_index, len(trace))
            trace.phases.append(summary)
            cap = int(round(phase.duration_cap / dt))
            dwell_needed = max(1, int(round(phase.dwell / dt)))
            settled = lost = 0
            lost_this_phase = False
            for _ in range(cap):
                t = trace.next_time()
                try:
                    _, feature = sensor.read(plant.swab.tip_deflection, timestamp=len(trace))
                    err = contact_error(feature, desired)
                    if err.lost_contact:
                        lost += 1
                        lost_this_phase = True
                        if lost > hold_cycles:
                            ctrl = replace(ctrl, force=retreat.copy())
                    else:
                        if lost:
                            ctrl = replace(ctrl, error_history=np.zeros((3, 3)))
                        lost = 0
                        ctrl = _fast_cycle(ctrl, err.e)
                    residual = residual_norm(arm, params, ctrl.force)
                    accel = admittance_accel(arm, params, ctrl.force)
                    arm = integrate_step(arm, accel, dt, velocity_cap)
                    plant.step(arm.velocity, dt, t)
                except (ControllerFault, ScenarioFault) as exc:
                    summary.end_cycle = len(trace)
                    summary.status = "fault"
                    trace.fault = f"{type(exc).__name__}: {exc}"
                    return trace
                delta = feature.as_array() - rest.as_array() if feature.present else np.zeros(3)
                trace.records.append(
                    CycleRecord(t, phase.name.value, arm.position, arm.velocity, ctrl.force.copy(),
                                err.e, delta, plant.swab.tip_deflection, residual, err.lost_contact)
                )
                settled = settled + 1 if not err.lost_contact and np.abs(err.e).max() <= error_tolerance else 0
                if settled >= dwell_needed and residual < epsilon:
                    summary.status = "converged"
                    break
            else:
                summary.status = "lost_contact" if lost_this_phase else "timeout"
            summary.end_cycle = len(trace)
    return trace
