"""Scenario orchestration, metrics and trace persistence."""
import csv
import math
import os
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .avf import run_sampling
from .dynamics import EndEffectorState, residual_norm
from .errors import InputError, ScenarioFault
from .plant import Plant
from .tactile import TactileSensor, offset_to_force
from .trace import TRACE_COLUMNS, CycleRecord, PhaseSummary, SamplingTrace

FORCE_BAND = (0.15, 0.30)
STEADY_WINDOW = 1.0  # seconds at the end of a phase averaged for its steady force


@dataclass
class PhaseMetrics:
    name: str
    status: str
    duration: float
    steady_force: float
    max_force: float
    in_contact_cycles: int
    band_fraction: float


@dataclass
class MetricsReport:
    total_duration: float
    cycles: int
    phases: list = field(default_factory=list)
    compliance_latency: float = math.nan
    fault: str = None
    wall_clock: float = math.nan

    @property
    def all_converged(self):
        sampling = [p for p in self.phases if p.name != "Approach"]
        return self.fault is None and bool(sampling) and all(p.status == "converged" for p in sampling)

    @property
    def exit_code(self):
        return 0 if self.all_converged else 1

    def phase(self, name):
        for p in self.phases:
            if p.name == name:
                return p
        raise KeyError(name)

    def items(self):
        """Flat ``(key, value)`` pairs in a fixed order, as written to metrics.txt."""
        out = [
            ("total_duration", self.total_duration),
            ("cycles", self.cycles),
            ("all_converged", self.all_converged),
            ("compliance_latency_cycles", self.compliance_latency),
            ("fault", self.fault or "none"),
        ]
        for p in self.phases:
            pre = f"phase.{p.name}."
            out += [
                (pre + "status", p.status),
                (pre + "duration", p.duration),
                (pre + "steady_force", p.steady_force),
                (pre + "max_force", p.max_force),
                (pre + "in_contact_cycles", p.in_contact_cycles),
                (pre + "band_fraction", p.band_fraction),
            ]
        return out


def reconstructed_forces(feature_delta, calibration):
    """Contact force per cycle from feature displacements ``(du, dv, dr)`` in pixels."""
    fd = np.atleast_2d(np.asarray(feature_delta, dtype=float))
    defl = fd / np.array([calibration.pixel_per_mm, calibration.pixel_per_mm, calibration.radius_per_mm])
    mm = np.linalg.norm(defl, axis=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return mm, np.asarray(offset_to_force(mm, calibration), dtype=float).reshape(-1)


def compliance_latency(times, velocities, disturbance):
    """Cycles from disturbance onset until the arm moves along it for good.

    Counts up to the first cycle from which the velocity keeps a positive
    component along the disturbance until the touch ends, so sensor-noise
    jitter before onset cannot register as a response.
    """
    times = np.asarray(times)
    active = np.flatnonzero((times >= disturbance.start - 1e-12) & (times < disturbance.start + disturbance.duration))
    if active.size == 0:
        return math.nan
    along = np.asarray(velocities)[active] @ disturbance.direction
    bad = np.flatnonzero(along <= 0)
    if bad.size == 0:
        return 1.0
    if bad[-1] == along.size - 1:
        return math.inf
    return float(bad[-1] + 2)


def compute_metrics(trace, calibration, contact_threshold_mm=1.0, disturbances=(), band=FORCE_BAND):
    """Metrics derived from the trace records and phase summaries only."""
    dt = trace.dt
    fd = np.array([r.feature_delta for r in trace.records]).reshape(-1, 3)
    mm, forces = reconstructed_forces(fd, calibration) if len(fd) else (np.zeros(0), np.zeros(0))
    phases = []
    for s in trace.phases:
        seg = slice(s.start_cycle, s.end_cycle)
        f, d = forces[seg], mm[seg]
        contact = d >= contact_threshold_mm
        n_contact = int(contact.sum())
        in_band = (f[contact] >= band[0]) & (f[contact] <= band[1])
        window = f[-max(1, int(round(STEADY_WINDOW / dt))):] if f.size else f
        phases.append(PhaseMetrics(
            name=s.name,
            status=s.status,
            duration=s.cycles * dt,
            steady_force=float(window.mean()) if window.size else 0.0,
            max_force=float(f.max()) if f.size else 0.0,
            in_contact_cycles=n_contact,
            band_fraction=float(in_band.mean()) if n_contact else 0.0,
        ))
    latency = math.nan
    if disturbances and trace.records:
        times = np.array([r.time for r in trace.records])
        vel = np.array([r.velocity for r in trace.records])
        latency = compliance_latency(times, vel, disturbances[0])
    return MetricsReport(
        total_duration=len(trace) * dt,
        cycles=len(trace),
        phases=phases,
        compliance_latency=latency,
        fault=trace.fault,
    )


def _approach(trace, plant, params, start, target, speed, dt):
    """Scripted straight-line position move; the last cycle lands exactly on target."""
    summary = PhaseSummary("Approach", 0, len(trace))
    trace.phases.append(summary)
    pos = np.asarray(start, dtype=float)
    target = np.asarray(target, dtype=float)
    vel = np.zeros(3)
    while True:
        remaining = target - pos
        dist = np.linalg.norm(remaining)
        if dist <= 1e-15:
            break
        step = speed * dt
        new_vel = remaining / dist * speed if dist > step else remaining / dt
        accel = (new_vel - vel) / dt
        state = EndEffectorState(pos, vel, accel)
        residual = residual_norm(state, params, np.zeros(3))
        vel = new_vel
        pos = target.copy() if dist <= step else pos + vel * dt
        t = trace.next_time()
        plant.step(vel, dt, t)
        trace.records.append(CycleRecord(t, "Approach", pos, vel, np.zeros(3), np.zeros(3), np.zeros(3),
                                         plant.swab.tip_deflection, residual))
    summary.end_cycle = len(trace)
    summary.status = "converged"
    return EndEffectorState(position=pos)


def run_scenario(config):
    """Run the pre-sampling approach and then the sampling phases.

    Returns ``(trace, metrics)``; faults are recorded in both rather than raised.
    """
    wall_start = time.perf_counter()
    sim = config["simulation"]
    dt = sim["dt"]
    params = config.admittance()
    cavity = config.cavity()
    calibration = config.calibration()
    disturbances = config.disturbances()
    tactile = config["tactile"]
    sensor = TactileSensor(config.geometry(), tactile["noise_sigma"], sim["seed"], tactile["threshold"], tactile["min_area"])
    target = params.desired_position
    start = target - sim["approach_distance"] * cavity.approach_axis
    trace = SamplingTrace(dt=dt)
    try:
        plant = Plant(cavity, start, disturbances, calibration)
        state = EndEffectorState(position=start)
        if sim["approach_distance"] > 0:
            state = _approach(trace, plant, params, start, target, sim["approach_speed"], dt)
    except ScenarioFault as exc:
        trace.fault = f"{type(exc).__name__}: {exc}"
    else:
        avf = config["avf"]
        run_sampling(
            config.phases(), plant, sensor, params, sim["epsilon"], sim["passes"],
            controller=config.controller(), state=state, dt=dt, velocity_cap=sim["velocity_cap"],
            error_tolerance=avf["error_tolerance"], lost_contact_hold=avf["lost_contact_hold"],
            retreat_force=avf["retreat_force"], calibration=calibration, trace=trace,
        )
    metrics = compute_metrics(trace, calibration, sim["contact_threshold_mm"], disturbances)
    metrics.wall_clock = time.perf_counter() - wall_start
    return trace, metrics


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_trace(trace, directory, metrics=None):
    """Write ``trace.csv``, ``metrics.txt`` and ``plots/*.csv`` under ``directory``.

    Wall-clock time is left out of metrics.txt so repeated runs are
    byte-identical. Returns the list of written paths.
    """
    try:
        os.makedirs(os.path.join(directory, "plots"), exist_ok=True)
        written = []
        path = os.path.join(directory, "trace.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for rec in trace.records:
                w.writerow(_fmt(x) for x in rec.row())
        written.append(path)
        if metrics is not None:
            path = os.path.join(directory, "metrics.txt")
            with open(path, "w", encoding="utf-8") as fh:
                for key, val in metrics.items():
                    fh.write(f"{key}={_fmt(val)}\n")
            written.append(path)
        series = {
            "force_vs_time.csv": (("t", "fx", "fy", "fz"), lambda r: [r.time, *r.force]),
            "error_vs_time.csv": (("t", "eu", "ev", "er"), lambda r: [r.time, *r.error]),
        }
        for name, (header, getter) in series.items():
            path = os.path.join(directory, "plots", name)
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                for rec in trace.records:
                    w.writerow(_fmt(x) for x in getter(rec))
            written.append(path)
    except OSError as exc:
        raise InputError(f"cannot write trace to {exc.filename or directory}: {exc.strerror}") from exc
    return written
