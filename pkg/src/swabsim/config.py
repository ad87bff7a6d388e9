"""Scenario configuration: ``[section]`` headers, ``key = value`` lines, ``#`` comments.

Vectors are whitespace- or comma-separated numbers. Matrices take either 3
numbers (a diagonal) or 9 numbers (row-major). Repeated sections use a
dotted suffix: ``[wall.Left]``, ``[phase.Middle]``, ``[disturbance.touch]``.
"""
import configparser
import io
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .avf import AvfState, PhaseName, SamplingPhase, check_phase_order
from .dynamics import AdmittanceParams
from .errors import ConfigError, SwabSimError
from .plant import CavityModel, Disturbance, Wall
from .tactile import CalibrationModel, SensorGeometry


def _floats(text, sizes):
    parts = text.replace(",", " ").split()
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise ValueError(f"expected numbers, got {text!r}") from None
    if len(vals) not in sizes:
        raise ValueError(f"expected {' or '.join(map(str, sizes))} numbers, got {len(vals)}")
    if not all(np.isfinite(vals)):
        raise ValueError("values must be finite")
    return vals


def _vec(text):
    return _floats(text, (3,))


def _mat(text):
    vals = _floats(text, (3, 9))
    return vals if len(vals) == 9 else tuple(np.diag(vals).ravel())


def _float(text):
    return _floats(text, (1,))[0]


def _extent(text):
    try:
        val = float(text.strip())
    except ValueError:
        raise ValueError(f"expected a number, got {text!r}") from None
    if val != val:
        raise ValueError("extent must not be NaN")
    return val


def _int(text):
    try:
        return int(text.strip())
    except ValueError:
        raise ValueError(f"expected an integer, got {text!r}") from None


def _bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


# key -> (parser, default, constraint description, predicate)
_POS = ("> 0", lambda x: x > 0)
_NONNEG = (">= 0", lambda x: x >= 0)
_ANY = (None, lambda x: True)

SCHEMA = {
    "simulation": {
        "dt": (_float, 0.008, *_POS),
        "seed": (_int, 0, *_NONNEG),
        "epsilon": (_float, 0.01, *_POS),
        "passes": (_int, 1, ">= 1", lambda x: x >= 1),
        "velocity_cap": (_float, 0.2, *_POS),
        "approach_distance": (_float, 0.1, *_NONNEG),
        "approach_speed": (_float, 0.1, *_POS),
        "contact_threshold_mm": (_float, 1.0, *_POS),
    },
    "dynamics": {
        "mass": (_mat, tuple(np.diag([1.0] * 3).ravel()), *_ANY),
        "damping": (_mat, tuple(np.diag([16.0] * 3).ravel()), *_ANY),
        "stiffness": (_mat, tuple(np.diag([4.0] * 3).ravel()), *_ANY),
        "desired_position": (_vec, (0.0, 0.0, 0.0), *_ANY),
    },
    "avf": {
        "gain": (_mat, tuple(np.diag([0.01] * 3).ravel()), *_ANY),
        "weights_p": (_vec, (8.0,) * 3, *_ANY),
        "weights_i": (_vec, (0.1,) * 3, *_ANY),
        "weights_d": (_vec, (1.0,) * 3, *_ANY),
        "learning_rates_p": (_vec, (1e-5,) * 3, *_ANY),
        "learning_rates_i": (_vec, (1e-5,) * 3, *_ANY),
        "learning_rates_d": (_vec, (1e-5,) * 3, *_ANY),
        "desired_output": (_vec, (0.0,) * 3, *_ANY),
        "force_limit": (_float, 1.0, *_POS),
        "weight_bound": (_float, 1e3, *_POS),
        "error_tolerance": (_float, 1.0, *_POS),
        "lost_contact_hold": (_float, 0.2, *_NONNEG),
        "retreat_force": (_float, 0.2, *_NONNEG),
    },
    "tactile": {
        "width": (_int, 64, ">= 8", lambda x: x >= 8),
        "height": (_int, 64, ">= 8", lambda x: x >= 8),
        "rest_radius": (_float, 8.0, *_POS),
        "pixel_per_mm": (_float, 0.5, *_POS),
        "radius_per_mm": (_float, 0.4, *_POS),
        "edge_width": (_float, 2.0, *_POS),
        "noise_sigma": (_float, 0.01, *_NONNEG),
        "threshold": (_float, 0.5, "in (0, 1)", lambda x: 0 < x < 1),
        "min_area": (_int, 10, ">= 1", lambda x: x >= 1),
    },
    "calibration": {
        "offset_quadratic": (_vec, (1.337e-4, 2.5e-3, 0.0), *_ANY),
        "pressure_slope": (_vec, (0.0118, 0.0118, 0.14), *_ANY),
        "pressure_intercept": (_vec, (0.0, 0.0, 0.0), *_ANY),
        "pixel_per_mm": (_float, 0.5, *_POS),
        "radius_per_mm": (_float, 0.4, *_POS),
    },
    "cavity": {
        "approach_axis": (_vec, (0.0, 0.0, -1.0), *_ANY),
        "swab_offset": (_float, 0.12, *_NONNEG),
        "free_space": (_bool, False, *_ANY),
    },
}

SECTION_SCHEMA = {
    "wall": {
        "point": (_vec, None, *_ANY),
        "normal": (_vec, None, *_ANY),
        "extent": (_extent, float("inf"), *_POS),
    },
    "phase": {
        "force_offset": (_vec, (0.0, 0.0, 0.0), *_ANY),
        "duration_cap": (_float, 8.0, *_POS),
        "dwell": (_float, 0.0, *_NONNEG),
        "target_force": (_float, 0.0, *_NONNEG),
    },
    "disturbance": {
        "start": (_float, None, *_NONNEG),
        "duration": (_float, None, *_POS),
        "force": (_vec, None, *_ANY),
    },
}

DEFAULT_WALLS = {
    "Left": {"point": (0.0, 0.015, -0.12), "normal": (0.0, -1.0, 0.0), "extent": 0.018},
    "Right": {"point": (0.0, -0.015, -0.12), "normal": (0.0, 1.0, 0.0), "extent": 0.018},
    "Middle": {"point": (0.0, 0.0, -0.14), "normal": (0.0, 0.0, 1.0), "extent": 0.03},
}

DEFAULT_PHASES = {
    "Initial": {"force_offset": (0.0, 0.0, 0.0), "duration_cap": 2.0, "dwell": 0.0, "target_force": 0.0},
    "Left": {"force_offset": (0.0, 0.2, 0.0), "duration_cap": 8.0, "dwell": 3.5, "target_force": 0.22},
    "Right": {"force_offset": (0.0, -0.2, 0.0), "duration_cap": 8.0, "dwell": 3.5, "target_force": 0.22},
    "Middle": {"force_offset": (0.0, 0.0, -0.2), "duration_cap": 8.0, "dwell": 3.5, "target_force": 0.22},
}


@dataclass
class ScenarioConfig:
    """Validated, defaults-filled scenario.

    ``sections`` maps section name to ``{key: value}``; vectors are tuples so
    two configs compare equal exactly when every value matches.
    """

    sections: dict = field(default_factory=dict)
    name: str = "scenario"

    def __getitem__(self, key):
        return self.sections[key]

    def __eq__(self, other):
        return isinstance(other, ScenarioConfig) and self.sections == other.sections

    # builders -------------------------------------------------------------
    def admittance(self):
        d = self["dynamics"]
        return AdmittanceParams(
            np.reshape(d["mass"], (3, 3)),
            np.reshape(d["damping"], (3, 3)),
            np.reshape(d["stiffness"], (3, 3)),
            np.array(d["desired_position"]),
        )

    def controller(self):
        a = self["avf"]
        return AvfState(
            weights=np.array([a["weights_p"], a["weights_i"], a["weights_d"]]),
            learning_rates=np.array([a["learning_rates_p"], a["learning_rates_i"], a["learning_rates_d"]]),
            desired_output=np.array(a["desired_output"]),
            gain=np.reshape(a["gain"], (3, 3)),
            force_limit=a["force_limit"],
            weight_bound=a["weight_bound"],
        )

    def geometry(self):
        t = self["tactile"]
        return SensorGeometry(t["width"], t["height"], t["rest_radius"], t["pixel_per_mm"], t["radius_per_mm"], t["edge_width"])

    def calibration(self):
        c = self["calibration"]
        return CalibrationModel(
            np.array(c["pressure_slope"]), np.array(c["pressure_intercept"]),
            c["offset_quadratic"], c["pixel_per_mm"], c["radius_per_mm"],
        )

    def walls(self):
        return {k.split(".", 1)[1]: v for k, v in self.sections.items() if k.startswith("wall.")}

    def cavity(self):
        c = self["cavity"]
        walls = () if c["free_space"] else tuple(
            Wall(name, v["point"], v["normal"], v["extent"]) for name, v in self.walls().items()
        )
        return CavityModel(walls, np.array(c["approach_axis"]), c["swab_offset"])

    def phases(self):
        return [
            SamplingPhase(PhaseName(k.split(".", 1)[1]), np.array(v["force_offset"]), v["duration_cap"], v["dwell"], v["target_force"])
            for k, v in self.sections.items() if k.startswith("phase.")
        ]

    def disturbances(self):
        return [
            Disturbance(v["start"], v["duration"], np.array(v["force"]))
            for k, v in self.sections.items() if k.startswith("disturbance.")
        ]


def _line_of(text, section, key=None):
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return lineno
        elif current == section and key is not None and "=" in line:
            if line.split("=", 1)[0].strip().lower() == key:
                return lineno
    return 0


def _parse_section(values, schema, section, text, allow_missing_required=False):
    out = {}
    for key in values:
        if key not in schema:
            raise ConfigError(f"line {_line_of(text, section, key)}: unknown key {section}.{key}")
    for key, (parser, default, desc, pred) in schema.items():
        if key in values:
            try:
                val = parser(values[key])
            except ValueError as exc:
                raise ConfigError(f"line {_line_of(text, section, key)}: {section}.{key}: {exc}") from None
            if not pred(val):
                raise ConfigError(f"line {_line_of(text, section, key)}: {section}.{key} = {values[key].strip()} violates {key} {desc}")
            out[key] = val
        elif default is None:
            raise ConfigError(f"line {_line_of(text, section)}: {section}.{key} is required")
        else:
            out[key] = default
    return out


def parse_config(text, name="scenario"):
    """Parse and validate configuration text; see :func:`load_config`."""
    parser = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#",), inline_comment_prefixes=("#",), strict=True,
        default_section="__none__",
    )
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"parse error: {exc}") from None
    sections = {}
    for sec in SCHEMA:
        sections[sec] = _parse_section(dict(parser[sec]) if parser.has_section(sec) else {}, SCHEMA[sec], sec, text)
    dotted = [s for s in parser.sections() if s not in SCHEMA]
    for sec in dotted:
        kind, _, label = sec.partition(".")
        if kind not in SECTION_SCHEMA or not label:
            raise ConfigError(f"line {_line_of(text, sec)}: unknown section [{sec}]")
        if kind == "phase" and label not in {p.value for p in PhaseName}:
            raise ConfigError(f"line {_line_of(text, sec)}: unknown phase {label!r}")
        sections[sec] = _parse_section(dict(parser[sec]), SECTION_SCHEMA[kind], sec, text)
    if not any(s.startswith("wall.") for s in sections):
        for label, vals in DEFAULT_WALLS.items():
            sections[f"wall.{label}"] = dict(vals)
    if not any(s.startswith("phase.") for s in sections):
        for label, vals in DEFAULT_PHASES.items():
            sections[f"phase.{label}"] = dict(vals)
    cfg = ScenarioConfig(sections, name)
    _validate(cfg)
    return cfg


def _validate(cfg):
    """Build every model object once so module-level invariants are re-checked."""
    try:
        cfg.admittance()
        cfg.controller()
        cfg.geometry()
        cfg.calibration()
        cfg.cavity()
        check_phase_order(cfg.phases())
        cfg.disturbances()
    except SwabSimError as exc:
        raise ConfigError(f"validation failed: {exc}") from None
    if np.linalg.norm(cfg["cavity"]["approach_axis"]) == 0:
        raise ConfigError("cavity.approach_axis must be non-zero")


def load_config(path):
    """Read a UTF-8 scenario file; parse errors carry line numbers."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, name=str(path))


def scenario_names():
    return sorted(p.name[:-4] for p in resources.files("swabsim.scenarios").iterdir() if p.name.endswith(".cfg"))


def load_scenario(name):
    """Load a shipped scenario by name (``default``, ``compliance``)."""
    res = resources.files("swabsim.scenarios") / f"{name}.cfg"
    if not res.is_file():
        raise ConfigError(f"unknown scenario {name!r}; shipped: {', '.join(scenario_names())}")
    return parse_config(res.read_text(encoding="utf-8"), name=name)


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return " ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(cfg):
    """Serialise a config back to text that :func:`parse_config` reads identically."""
    buf = io.StringIO()
    for sec, values in cfg.sections.items():
        buf.write(f"[{sec}]\n")
        for key, val in values.items():
            buf.write(f"{key} = {_fmt(val)}\n")
        buf.write("\n")
    return buf.getvalue()
