"""JSON experiment description: schema, validation and conversion to
internal (angular, SI) units.

Lab units are used in the file: frequencies in MHz, times in microseconds,
detunings and offsets in Hz. Ion indices in ``pair`` are 1-based.
"""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigError, ParticipationError
from .modes import (
    AMU,
    ModeSpectrum,
    TrapConfig,
    measured_spectrum,
    mhz_to_angular,
    radial_mode_spectrum,
)

TWO_PI = 2 * np.pi

_number = {"type": "number"}
_positive = {"type": "number", "exclusiveMinimum": 0}
_per_mode = {"oneOf": [{"type": "number", "minimum": 0},
                       {"type": "array", "items": {"type": "number", "minimum": 0},
                        "minItems": 1}]}
_interval = {"type": "array", "items": _positive, "minItems": 2, "maxItems": 2}

_GATE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["pair"],
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "pair": {"type": "array", "items": {"type": "integer", "minimum": 1},
                 "minItems": 2, "maxItems": 2},
        "l": {"oneOf": [{"type": "integer", "minimum": 1},
                        {"enum": ["auto-odd", "auto-even"]}]},
        "l_range": {"type": "array", "items": {"type": "integer", "minimum": 1},
                    "minItems": 2, "maxItems": 2},
        "forbid_resonant": {"type": "boolean"},
        "tau_us": _positive,
        "target_theta": {"type": "number", "minimum": 0},
        "added_detuning_hz": _number,
    },
}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "trap": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n_ions", "axial_mhz", "radial_com_mhz"],
            "properties": {
                "n_ions": {"type": "integer", "minimum": 2},
                "axial_mhz": _positive,
                "radial_com_mhz": _positive,
                "quartic_coeff": _number,
                "ion_mass_amu": _positive,
                "raman_wavelength_nm": _positive,
            },
        },
        "modes": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "frequencies_mhz": {"type": "array", "items": _positive, "minItems": 1},
                "participation": {"type": "array", "items": {"type": "array",
                                                             "items": _number}},
                "nbar": _per_mode,
                "phase_rad": {"oneOf": [_number, {"type": "array", "items": _number}]},
            },
        },
        "mec": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tau_us": _positive,
                "tau_range_us": _interval,
                "max_abs_delta_k": {"type": "number", "exclusiveMinimum": 0,
                                    "exclusiveMaximum": 0.5},
                "pair_weighting": {"type": "boolean"},
                "weight_threshold": {"type": "number", "minimum": 0, "maximum": 1},
            },
        },
        "gate": {"oneOf": [_GATE, {"type": "array", "items": _GATE, "minItems": 1}]},
        "scan": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "offsets_hz": {"type": "array", "items": _number},
                "log_offsets_hz": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["min", "max", "n"],
                    "properties": {"min": _positive, "max": _positive,
                                   "n": {"type": "integer", "minimum": 2},
                                   "both_signs": {"type": "boolean"}},
                },
                "recalibrate": {"type": "boolean"},
                "simulate": {"type": "boolean"},
                "slope_band_hz": _interval,
            },
        },
        "sim": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_max": {"type": "integer", "minimum": 5},
                "phi_points": {"type": "integer", "minimum": 4},
                "initial_state": {"enum": ["00", "01", "10", "11"]},
                "delta_omega_hz": _number,
            },
        },
        "fit": {
            "type": "object",
            "additionalProperties": False,
            "required": ["scans"],
            "properties": {
                "scans": {"type": "array", "items": {"type": "string"}},
                "initial_mhz": {"type": "array", "items": _positive, "minItems": 1},
                "span_hz": _positive,
                "residual": {"enum": ["relative", "absolute"]},
            },
        },
        "idealize_mec": {"type": "boolean"},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "directory": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["csv", "json"]},
                            "uniqueItems": True},
            },
        },
    },
}

DEFAULTS = {
    "mec": {"tau_range_us": [150.0, 200.0], "max_abs_delta_k": 0.05,
            "pair_weighting": True, "weight_threshold": 0.01},
    "scan": {"recalibrate": True, "simulate": True, "slope_band_hz": [100.0, 1000.0]},
    "sim": {"n_max": 10, "phi_points": 24, "initial_state": "00", "delta_omega_hz": 0.0},
    "output": {"directory": "modeforge_out", "formats": ["csv", "json"]},
}


def validate(raw, base_dir=None):
    """Check ``raw`` against the schema and module preconditions; return a
    copy with defaults filled in and relative paths resolved."""
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {exc.message}") from None
    cfg = {key: dict(value) if isinstance(value, dict) else value for key, value in raw.items()}
    for section, defaults in DEFAULTS.items():
        cfg[section] = {**defaults, **cfg.get(section, {})}
    if "trap" not in cfg and not cfg.get("modes", {}).get("frequencies_mhz"):
        raise ConfigError("config error: need a 'trap' section or 'modes.frequencies_mhz'")
    lo, hi = cfg["mec"]["tau_range_us"]
    if not lo < hi:
        raise ConfigError("config error at mec/tau_range_us: need min < max")
    band = cfg["scan"]["slope_band_hz"]
    if not band[0] < band[1]:
        raise ConfigError("config error at scan/slope_band_hz: need min < max")
    log = cfg["scan"].get("log_offsets_hz")
    if log and not log["min"] < log["max"]:
        raise ConfigError("config error at scan/log_offsets_hz: need min < max")
    trap = cfg.get("trap")
    if trap and trap["radial_com_mhz"] <= trap["axial_mhz"]:
        raise ConfigError("config error at trap: radial_com_mhz must exceed axial_mhz")
    gates = cfg.get("gate", [])
    cfg["gate"] = [dict(g) for g in (gates if isinstance(gates, list) else [gates])]
    n_ions = n_modes(cfg)
    for n, gate in enumerate(cfg["gate"]):
        i, j = gate["pair"]
        if i == j or max(i, j) > n_ions:
            raise ConfigError(f"config error at gate/{n}/pair: invalid pair {gate['pair']} "
                              f"for {n_ions} ions")
        if "l_range" in gate and gate["l_range"][0] > gate["l_range"][1]:
            raise ConfigError(f"config error at gate/{n}/l_range: empty range")
    if "fit" in cfg and base_dir is not None:
        cfg["fit"]["scans"] = [str((Path(base_dir) / p).resolve()) if not Path(p).is_absolute()
                               else p for p in cfg["fit"]["scans"]]
    return cfg


def load(path):
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"config error: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config error: {path} is not valid JSON ({exc})") from None
    return validate(raw, base_dir=path.parent)


def n_modes(cfg):
    modes = cfg.get("modes", {})
    if modes.get("frequencies_mhz"):
        return len(modes["frequencies_mhz"])
    return cfg["trap"]["n_ions"]


def trap_config(cfg) -> TrapConfig:
    trap = cfg["trap"]
    kwargs = {"quartic_coeff": trap.get("quartic_coeff", 0.0)}
    if "ion_mass_amu" in trap:
        kwargs["ion_mass"] = trap["ion_mass_amu"] * AMU
    if "raman_wavelength_nm" in trap:
        kwargs["raman_wavevector_diff"] = 2 * TWO_PI / (trap["raman_wavelength_nm"] * 1e-9)
    return TrapConfig.from_mhz(trap["n_ions"], trap["axial_mhz"], trap["radial_com_mhz"],
                               **kwargs)


def _per_mode_values(value, n, name):
    if value is None:
        return None
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size not in (1, n):
        raise ConfigError(f"config error at modes/{name}: expected 1 or {n} values")
    return np.broadcast_to(arr, (n,)).copy()


def spectrum(cfg) -> ModeSpectrum:
    """Mode spectrum described by the config (measured frequencies take
    precedence over the trap model)."""
    modes = cfg.get("modes", {})
    n = n_modes(cfg)
    nbar = _per_mode_values(modes.get("nbar"), n, "nbar")
    phase = _per_mode_values(modes.get("phase_rad"), n, "phase_rad")
    if modes.get("frequencies_mhz"):
        kwargs = {}
        if "trap" in cfg:
            tc = trap_config(cfg)
            kwargs = {"ion_mass": tc.ion_mass, "wavevector_diff": tc.raman_wavevector_diff}
        try:
            return measured_spectrum(mhz_to_angular(modes["frequencies_mhz"]),
                                     modes.get("participation"), nbar, phase, **kwargs)
        except ParticipationError as exc:
            raise ConfigError(f"config error at modes/participation: {exc}") from None
    if "participation" in modes:
        raise ConfigError("config error at modes: participation needs frequencies_mhz")
    try:
        return radial_mode_spectrum(trap_config(cfg), nbar, phase)
    except ValueError as exc:
        raise ConfigError(f"config error at trap: {exc}") from None


def scan_offsets(cfg):
    """Offsets (rad/s) listed or generated by the scan section."""
    scan = cfg["scan"]
    if "offsets_hz" in scan:
        hz = np.asarray(scan["offsets_hz"], dtype=float)
    elif "log_offsets_hz" in scan:
        log = scan["log_offsets_hz"]
        f = np.geomspace(log["min"], log["max"], log["n"])
        hz = np.concatenate([-f[::-1], f]) if log.get("both_signs", True) else f
    else:
        raise ConfigError("config error at scan: need offsets_hz or log_offsets_hz")
    if hz.size == 0:
        raise ConfigError("config error at scan/offsets_hz: empty offsets list")
    return TWO_PI * hz
