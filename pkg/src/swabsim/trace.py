"""Per-cycle records produced by the simulation loop."""
from dataclasses import dataclass, field

import numpy as np

TRACE_COLUMNS = (
    "t", "phase",
    "px", "py", "pz",
    "vx", "vy", "vz",
    "fx", "fy", "fz",
    "eu", "ev", "er",
    "du", "dv", "dr",
    "residual",
)


@dataclass(frozen=True)
class CycleRecord:
    """One control cycle.

    ``time`` is the simulated time at the end of the cycle; ``position`` and
    ``velocity`` are the arm state after integration; ``feature_delta`` is
    the contact feature minus the rest feature in pixels; ``deflection`` is
    the true tip deflection in mm (not exported to CSV).
    """

    time: float
    phase: str
    position: np.ndarray
    velocity: np.ndarray
    force: np.ndarray
    error: np.ndarray
    feature_delta: np.ndarray
    deflection: np.ndarray
    residual: float
    lost_contact: bool = False

    def row(self):
        return (
            [self.time, self.phase]
            + list(self.position) + list(self.velocity) + list(self.force)
            + list(self.error) + list(self.feature_delta) + [self.residual]
        )


@dataclass
class PhaseSummary:
    name: str
    pass_index: int
    start_cycle: int
    end_cycle: int = -1
    status: str = "running"

    @property
    def cycles(self):
        return self.end_cycle - self.start_cycle

    @property
    def converged(self):
        return self.status == "converged"


@dataclass
class SamplingTrace:
    dt: float
    records: list = field(default_factory=list)
    phases: list = field(default_factory=list)
    fault: str = None

    def __len__(self):
        return len(self.records)

    @property
    def total_time(self):
        return len(self.records) * self.dt

    def next_time(self):
        return (len(self.records) + 1) * self.dt

    def column(self, name):
        """Numeric column by CSV header name, as an array."""
        idx = TRACE_COLUMNS.index(name)
        if name == "phase":
            return [r.phase for r in self.records]
        return np.array([r.row()[idx] for r in self.records], dtype=float)
