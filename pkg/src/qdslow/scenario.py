"""Scenario configuration: parsing, validation and the figure presets.

A scenario is a nested mapping (YAML on disk).  Frequencies carry explicit
units (``"3 Omega0"``, ``"1 meV"``, ``"0.5 ps^-1"``); ``g`` coefficients are
inverse frequencies (``"0.15 1/Omega0"``); temperatures are ``"15 K"``.
An optional ``branches`` list holds partial mappings merged onto the base,
one curve per branch.
"""

import copy
from dataclasses import dataclass, field
import hashlib
import json
import math

import numpy as np
import yaml

from .bath import BathSpec, CrossCorrelationSpec
from .dressed import DriveConfig, WeakNMCoefficients
from .errors import ConfigError, QDSlowError
from .response import DotOpticalParams
from .units import parse_inverse_rate, parse_rate, parse_temperature

MODES = ("microscopic", "phenomenological")
AXES = ("delta_s", "omega_p", "temperature")
OUTPUTS = ("chi", "n", "slowdown", "rates", "window")
MAX_POINTS = 10**6


@dataclass(frozen=True)
class Branch:
    label: str
    coeffs: WeakNMCoefficients = None
    bath2: BathSpec = None
    bath3: BathSpec = None
    kappa: float = 0.0

    @property
    def baths(self):
        return self.bath2, self.bath3

    @property
    def xcorr(self):
        return CrossCorrelationSpec(self.kappa)


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario.

    ``drive.delta_s_bare`` holds the operating-point signal detuning, read as
    the modified detuning delta_s; ``drive.delta_p_bare`` is the bare pump
    detuning Delta_p.
    """

    name: str
    mode: str
    branches: tuple
    drive: DriveConfig
    optical: DotOpticalParams
    axis: str
    grid: tuple
    outputs: frozenset
    window_threshold: float = 0.5
    window_grid: tuple = ()
    printed_chi: bool = False
    printed_nu3: bool = False
    workers: int = 1
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def config_hash(self):
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_yaml(self):
        return yaml.safe_dump(self.raw, sort_keys=False)

    @classmethod
    def from_dict(cls, data):
        return parse_config(data)

    @classmethod
    def from_file(cls, path, overrides=()):
        return load_config(path, overrides)


# --- parsing helpers ---------------------------------------------------------

def _get(section, key, where, default=None, required=False):
    if key in section:
        return section[key]
    if required:
        raise ConfigError(f"{where}.{key}: missing")
    return default


def _wrap(fn, where):
    try:
        return fn()
    except ConfigError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    except (QDSlowError, TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _rate(value, where):
    return _wrap(lambda: parse_rate(str(value)), where)


def _inverse_rate(value, where):
    return _wrap(lambda: parse_inverse_rate(str(value)), where)


def _number(value, where):
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(f"{where}: must be finite")
    return out


def _merge(base, extra):
    out = copy.deepcopy(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _section(data, key):
    sec = data.get(key, {}) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{key}: expected a mapping")
    return sec


def _parse_drive(data):
    sec = _section(data, "drive")
    omega_p = _rate(_get(sec, "omega_p", "drive", "0 Omega0"), "drive.omega_p")
    delta_p = _rate(_get(sec, "delta_p", "drive", "0 Omega0"), "drive.delta_p")
    delta_s = _rate(_get(sec, "delta_s", "drive", "0 Omega0"), "drive.delta_s")
    omega_s = _rate(_get(sec, "omega_s", "drive", "1e-4 Omega0"), "drive.omega_s")
    if omega_p < 0:
        raise ConfigError("drive.omega_p: must be non-negative")
    return DriveConfig(omega_p, delta_p, omega_s, delta_s)


def _parse_optical(data):
    sec = _section(data, "optical")
    kw = {}
    for key in ("eps_bac", "mu12_nm", "gamma_conf", "theta_nm3", "lambda_s_um", "inversion"):
        if key in sec:
            kw[key] = _number(sec[key], f"optical.{key}")
    return _wrap(lambda: DotOpticalParams(**kw), "optical")


def _parse_coeffs(sec, where):
    g0_2 = _rate(_get(sec, "gamma0_2", where, required=True), f"{where}.gamma0_2")
    g0_3 = _rate(_get(sec, "gamma0_3", where, required=True), f"{where}.gamma0_3")
    f2 = _number(_get(sec, "f2", where, 0.0), f"{where}.f2")
    f3 = _number(_get(sec, "f3", where, 0.0), f"{where}.f3")
    g2 = _inverse_rate(_get(sec, "g2", where, "0 ps"), f"{where}.g2")
    g3 = _inverse_rate(_get(sec, "g3", where, "0 ps"), f"{where}.g3")
    return _wrap(lambda: WeakNMCoefficients(g0_2, g0_3, f2, f3, g2, g3), where)


def _parse_bath(sec, where):
    shape = _get(sec, "shape", where, "super_ohmic")
    occ = _get(sec, "occupation", where, "bose_einstein")
    temp = _wrap(lambda: parse_temperature(_get(sec, "temperature", where, "0 K")), f"{where}.temperature")
    if shape == "super_ohmic":
        alpha = _number(_get(sec, "alpha_ps2", where, required=True), f"{where}.alpha_ps2")
        w_c = _rate(_get(sec, "w_c", where, required=True), f"{where}.w_c")
        return _wrap(lambda: BathSpec.super_ohmic(alpha, w_c, temp, occ), where)
    if shape == "flat":
        level = _rate(_get(sec, "level", where, required=True), f"{where}.level")
        return _wrap(lambda: BathSpec.flat(level), where)
    if shape == "tabulated":
        grid = [_rate(v, f"{where}.grid") for v in _get(sec, "grid", where, required=True)]
        values = [_rate(v, f"{where}.values") for v in _get(sec, "values", where, required=True)]
        return _wrap(lambda: BathSpec.tabulated(grid, values, temp, occ), where)
    raise ConfigError(f"{where}.shape: unknown shape {shape!r}")


def _parse_branch(data, label, mode):
    if mode == "phenomenological":
        return Branch(label, coeffs=_parse_coeffs(_section(data, "coefficients"), "coefficients"))
    b2 = _parse_bath(_section(data, "bath"), "bath")
    b3 = _parse_bath(_section(data, "bath3"), "bath3") if data.get("bath3") else b2
    kappa = _number(_section(data, "bath").get("kappa_23", 0.0), "bath.kappa_23")
    if not -1 <= kappa <= 1:
        raise ConfigError("bath.kappa_23: must lie in [-1, 1]")
    return Branch(label, bath2=b2, bath3=b3, kappa=kappa)


def _axis_values(sec, axis):
    where = "sweep"
    start, stop = _get(sec, "start", where, required=True), _get(sec, "stop", where, required=True)
    if axis == "temperature":
        lo = _wrap(lambda: parse_temperature(start), "sweep.start")
        hi = _wrap(lambda: parse_temperature(stop), "sweep.stop")
    else:
        lo, hi = _rate(start, "sweep.start"), _rate(stop, "sweep.stop")
    points = _get(sec, "points", where, required=True)
    if not isinstance(points, int) or isinstance(points, bool) or not 2 <= points <= MAX_POINTS:
        raise ConfigError(f"sweep.points: must be an integer in [2, {MAX_POINTS}]")
    if not (math.isfinite(lo) and math.isfinite(hi)) or not hi > lo:
        raise ConfigError("sweep: need finite start < stop")
    if axis == "omega_p" and lo < 0:
        raise ConfigError("sweep.start: omega_p must be non-negative")
    if axis == "temperature" and lo < 0:
        raise ConfigError("sweep.start: temperature must be non-negative")
    return tuple(float(x) for x in np.linspace(lo, hi, points))


def parse_config(data):
    """Validate a scenario mapping and return a ScenarioConfig."""
    if not isinstance(data, dict):
        raise ConfigError("config: expected a mapping at top level")
    data = copy.deepcopy(data)
    mode = data.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode: expected one of {MODES}, got {mode!r}")
    sweep = _section(data, "sweep")
    axis = sweep.get("axis")
    if axis not in AXES:
        raise ConfigError(f"sweep.axis: expected one of {AXES}, got {axis!r}")
    if axis == "temperature" and mode == "phenomenological":
        raise ConfigError("sweep.axis: temperature sweeps need microscopic mode")
    grid = _axis_values(sweep, axis)

    outputs = data.get("outputs", ["chi", "n", "slowdown"])
    if isinstance(outputs, str):
        outputs = [outputs]
    bad = [o for o in outputs if o not in OUTPUTS]
    if bad or not outputs:
        raise ConfigError(f"outputs: unknown or empty entries {bad}; valid {OUTPUTS}")

    window = _section(data, "window")
    threshold = _number(window.get("threshold", 0.5), "window.threshold")
    if not 0 < threshold <= 1:
        raise ConfigError("window.threshold: must lie in (0, 1]")
    wgrid = _axis_values({"start": window.get("start", "-6 Omega0"), "stop": window.get("stop", "6 Omega0"),
                          "points": window.get("points", 1201)}, "delta_s")

    fidelity = _section(data, "fidelity")
    workers = data.get("workers", 1)
    if not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers: must be a positive integer")

    base = {k: v for k, v in data.items() if k != "branches"}
    branch_specs = data.get("branches") or [{"label": data.get("name", "base")}]
    if not isinstance(branch_specs, list):
        raise ConfigError("branches: expected a list")
    branches = []
    for i, spec in enumerate(branch_specs):
        if not isinstance(spec, dict):
            raise ConfigError(f"branches[{i}]: expected a mapping")
        label = str(spec.get("label", i))
        merged = _merge(base, {k: v for k, v in spec.items() if k != "label"})
        try:
            branches.append(_parse_branch(merged, label, mode))
        except ConfigError as exc:
            raise ConfigError(f"branches[{i}] ({label}): {exc}") from None
    labels = [b.label for b in branches]
    if len(set(labels)) != len(labels):
        raise ConfigError("branches: labels must be unique")

    return ScenarioConfig(
        name=str(data.get("name", "scenario")), mode=mode, branches=tuple(branches),
        drive=_parse_drive(data), optical=_parse_optical(data), axis=axis, grid=grid,
        outputs=frozenset(outputs), window_threshold=threshold, window_grid=wgrid,
        printed_chi=bool(fidelity.get("printed_chi", False)),
        printed_nu3=bool(fidelity.get("printed_nu3", False)),
        workers=workers, raw=data)


def set_dotted(data, key, value):
    """Set ``a.b.c = value`` in a nested mapping; value text is parsed as YAML."""
    parts = key.split(".")
    if not all(parts):
        raise ConfigError(f"--set: malformed key {key!r}")
    node = data
    for part in parts[:-1]:
        nxt = node.get(part)
        if nxt is None:
            nxt = node[part] = {}
        if not isinstance(nxt, dict):
            raise ConfigError(f"--set: {key!r} descends into a non-mapping at {part!r}")
        node = nxt
    node[parts[-1]] = yaml.safe_load(value) if isinstance(value, str) else value


def apply_overrides(data, overrides):
    data = copy.deepcopy(data)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set: expected key=value, got {item!r}")
        key, value = item.split("=", 1)
        set_dotted(data, key.strip(), value.strip())
    return data


def load_config(path, overrides=()):
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from None
    return parse_config(apply_overrides(data or {}, overrides))


# --- presets -----------------------------------------------------------------

_OPTICAL = {"eps_bac": 13.0, "mu12_nm": 2.1, "gamma_conf": 0.006, "theta_nm3": 890.64,
            "lambda_s_um": 1.36, "inversion": 1.0}
_OMEGA_P_SWEEP = {"axis": "omega_p", "start": "0 Omega0", "stop": "5 Omega0", "points": 51}
_DELTA_S_SWEEP = {"axis": "delta_s", "start": "-6 Omega0", "stop": "6 Omega0", "points": 481}
_FIG3_DRIVE = {"omega_p": "3 Omega0", "delta_p": "0 Omega0", "delta_s": "0 Omega0", "omega_s": "1e-4 Omega0"}


def _coeffs(f2, f3, g2=0.0, g3=0.0):
    return {"coefficients": {"f2": f2, "f3": f3, "g2": f"{g2} 1/Omega0", "g3": f"{g3} 1/Omega0"}}


def _phenomenological(name, sweep, outputs, branches):
    return {
        "name": name, "mode": "phenomenological",
        "drive": dict(_FIG3_DRIVE), "optical": dict(_OPTICAL),
        "coefficients": {"gamma0_2": "1 Omega0", "gamma0_3": "2 Omega0", "f2": 0.0, "f3": 0.0,
                         "g2": "0 1/Omega0", "g3": "0 1/Omega0"},
        "sweep": dict(sweep), "outputs": outputs,
        "branches": [{"label": label, **_coeffs(*args)} for label, args in branches],
    }


_F2_BRANCHES = [("f2=0", (0.0, 0.0)), ("f2=0.1", (0.1, 0.2)), ("f2=0.2", (0.2, 0.4))]
_SIGN_BRANCHES = [("f=(0,0)", (0.0, 0.0)), ("f=(-0.2,-0.4)", (-0.2, -0.4)),
                  ("f=(-0.2,0.4)", (-0.2, 0.4)), ("f=(0.2,-0.4)", (0.2, -0.4))]
_G_BRANCHES = [("f2,g2=(0,0)", (0.0, 0.0, 0.0, 0.0)), ("f2,g2=(0.2,0.0001)", (0.2, 0.4, 0.0001, 0.0002)),
               ("f2,g2=(0.2,0.1)", (0.2, 0.4, 0.1, 0.2)), ("f2,g2=(0.2,0.15)", (0.2, 0.4, 0.15, 0.3))]

# alpha = 0.4 pi^2 read as ps^2 so that J(w) is a rate
_ALPHA_PS2 = 0.4 * math.pi**2


def _fig2():
    return {
        "name": "fig2", "mode": "microscopic",
        "drive": {"omega_p": "0 Omega0", "delta_p": "0 Omega0", "delta_s": "0 Omega0", "omega_s": "1e-4 Omega0"},
        "optical": dict(_OPTICAL),
        "bath": {"shape": "super_ohmic", "alpha_ps2": _ALPHA_PS2, "w_c": "1 meV",
                 "temperature": "15 K", "kappa_23": 0.0},
        "sweep": dict(_OMEGA_P_SWEEP), "outputs": ["rates"],
        "branches": [{"label": f"T={t}K", "bath": {"temperature": f"{t} K"}} for t in (5, 15, 45)],
    }


_PRESETS = {
    "fig2": _fig2,
    "fig3": lambda: _phenomenological("fig3", _DELTA_S_SWEEP, ["chi", "n", "window"], _F2_BRANCHES),
    "fig4": lambda: _phenomenological("fig4", _OMEGA_P_SWEEP, ["chi", "n", "slowdown"], _F2_BRANCHES),
    "fig5": lambda: _phenomenological("fig5", _DELTA_S_SWEEP, ["chi", "n", "window"], _SIGN_BRANCHES),
    "fig6": lambda: _phenomenological("fig6", _OMEGA_P_SWEEP, ["chi", "n", "slowdown"], _SIGN_BRANCHES),
    "fig7": lambda: _phenomenological("fig7", _OMEGA_P_SWEEP, ["chi", "n", "slowdown"], _G_BRANCHES),
}
PRESET_NAMES = tuple(_PRESETS)


def preset_dict(name):
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}; valid: {', '.join(PRESET_NAMES)}")
    return _PRESETS[name]()


def preset(name):
    """ScenarioConfig for one of the figure presets."""
    return parse_config(preset_dict(name))
