"""Deterministic CSV/JSON writers and the scan-file reader.

CSV files use ``,`` separators, ``.`` decimals, LF line endings and a
header whose column names carry their unit suffix. Floats are written in
shortest round-trip form so re-reading a file reproduces the numbers.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .pulses import GateSpec
from .scan import ScanResult

TWO_PI = 2 * np.pi
SCAN_MARKER = "# modeforge-scan "
SCAN_COLUMNS = ("delta_f_hz", "omega_calibrated_hz", "alpha", "odd_population",
                "scaled_odd_population_s2", "flagged")


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x)) if np.isfinite(x) else ("nan" if np.isnan(x) else
                                                      ("inf" if x > 0 else "-inf"))
    return str(x)


def write_csv(path, header, rows, comments=()):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for line in comments:
            fh.write(line.rstrip("\n") + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else None
    return obj


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def gate_metadata(gate: GateSpec):
    """Lab-unit description of a gate (1-based pair)."""
    return {
        "pair": [gate.pair[0] + 1, gate.pair[1] + 1],
        "tau_us": gate.tau * 1e6,
        "l": gate.l,
        "parity": gate.parity,
        "omega_hz": gate.omega / TWO_PI,
        "added_detuning_hz": gate.added_detuning / TWO_PI,
        "target_theta": 4 * gate.target_chi,
        "chi_sign": gate.chi_sign,
    }


def gate_from_metadata(meta) -> GateSpec:
    i, j = meta["pair"]
    return GateSpec((i - 1, j - 1), meta["tau_us"] * 1e-6, int(meta["l"]),
                    TWO_PI * meta["omega_hz"], TWO_PI * meta.get("added_detuning_hz", 0.0),
                    meta.get("target_theta", np.pi / 2) / 4, int(meta.get("chi_sign", 1)))


def write_scan_csv(path, scan: ScanResult):
    meta = json.dumps(_jsonable(gate_metadata(scan.gate)), sort_keys=True)
    rows = zip(scan.delta_omega / TWO_PI, scan.omega_calibrated / TWO_PI, scan.alpha,
               scan.odd_population, scan.scaled_odd_population, scan.flagged)
    return write_csv(path, SCAN_COLUMNS, rows, comments=[SCAN_MARKER + meta])


def read_scan_csv(path) -> ScanResult:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"config error: cannot read scan file {path}: {exc.strerror}") from None
    lines = text.splitlines()
    if not lines or not lines[0].startswith(SCAN_MARKER):
        raise ConfigError(f"config error: {path} is not a modeforge scan file")
    try:
        gate = gate_from_metadata(json.loads(lines[0][len(SCAN_MARKER):]))
        reader = csv.DictReader(lines[1:])
        cols = {c: [] for c in SCAN_COLUMNS}
        for row in reader:
            for c in SCAN_COLUMNS:
                cols[c].append(float(row[c]))
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"config error: malformed scan file {path}: {exc}") from None
    return ScanResult(gate, TWO_PI * np.array(cols["delta_f_hz"]),
                      TWO_PI * np.array(cols["omega_calibrated_hz"]), cols["alpha"],
                      cols["odd_population"], np.array(cols["flagged"]) != 0)
