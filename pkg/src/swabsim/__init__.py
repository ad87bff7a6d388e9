"""Simulation toolkit for tactile-guided compliant throat swab sampling."""
from .avf import AvfState, PhaseName, SamplingPhase, run_sampling
from .config import ScenarioConfig, dump_config, load_config, load_scenario, parse_config
from .dynamics import AdmittanceParams, EndEffectorState, admittance_accel, integrate_step, residual_norm
from .errors import (
    ConfigError,
    ControllerFault,
    DetectionError,
    FitError,
    InputError,
    ParameterError,
    ScenarioFault,
    SwabSimError,
)
from .plant import CavityModel, Disturbance, Plant, Wall
from .pose import sampling_pose
from .runner import MetricsReport, compute_metrics, run_scenario, write_trace
from .tactile import CalibrationModel, SensorGeometry, TactileSensor, extract_contact, render_frame

__version__ = "0.1.0"
