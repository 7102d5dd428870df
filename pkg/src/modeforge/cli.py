"""``modeforge`` command-line entry point.

Every sub-command reads one JSON config, runs its stage of the pipeline
(modes, MEC and gate design, detuning scan, simulation, frequency fit) and
writes CSV/JSON files into the output directory.

Exit codes: 0 success, 2 config error, 3 design infeasible, 4 simulation
error, 5 fit error.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .errors import (
    ConfigError,
    DesignInfeasibleError,
    FitError,
    ModeforgeError,
    TruncationError,
    UncoupledPairError,
)
from .evaluate import alpha_for_gate
from .io import gate_metadata, read_scan_csv, write_csv, write_json, write_scan_csv
from .mec import MecAssignment, analyze, find_gate_time
from .modes import ModeSpectrum, angular_to_mhz, mhz_to_angular
from .pulses import GateSpec, LScan, design_gate, scan_l, select_l, waveform
from .scan import detuning_scan, fit_mode_frequencies, scaling_slope
from .simulate import simulate_gate

TWO_PI = 2 * np.pi
EXIT_OK, EXIT_CONFIG, EXIT_DESIGN, EXIT_SIMULATION, EXIT_FIT = 0, 2, 3, 4, 5


@dataclass
class DesignedGate:
    name: str
    gate: GateSpec
    mec: MecAssignment
    table: LScan
    best: dict
    spectrum: ModeSpectrum


class Outputs:
    """Writes into the output directory, honouring the configured formats."""

    def __init__(self, cfg, out=None):
        self.directory = Path(out if out is not None else cfg["output"]["directory"])
        self.formats = set(cfg["output"]["formats"])
        self.written = []

    def csv(self, name, header, rows, comments=()):
        if "csv" in self.formats:
            self.written.append(write_csv(self.directory / name, header, rows, comments))

    def scan(self, name, scan):
        if "csv" in self.formats:
            self.written.append(write_scan_csv(self.directory / name, scan))

    def json(self, name, obj):
        if "json" in self.formats:
            self.written.append(write_json(self.directory / name, obj))


def _resolve_tau(cfg, spectrum, gate_cfg):
    if "tau_us" in gate_cfg:
        return gate_cfg["tau_us"] * 1e-6
    mec = cfg["mec"]
    if "tau_us" in mec:
        return mec["tau_us"] * 1e-6
    pair = tuple(p - 1 for p in gate_cfg["pair"]) if mec["pair_weighting"] else None
    lo, hi = mec["tau_range_us"]
    found = find_gate_time(spectrum, lo * 1e-6, hi * 1e-6, mec["max_abs_delta_k"],
                           pair=pair, weight_threshold=mec["weight_threshold"])
    if not found:
        raise DesignInfeasibleError(
            f"no admissible gate time in [{lo}, {hi}] us with max |dk| <= "
            f"{mec['max_abs_delta_k']}")
    return found[0].tau


def _gate_name(gate_cfg, gate):
    return gate_cfg.get("name") or f"pair{gate.pair[0] + 1}-{gate.pair[1] + 1}_l{gate.l}"


def design_gates(cfg, spectrum):
    if not cfg["gate"]:
        raise ConfigError("config error: a 'gate' section is required for this command")
    designed = []
    for gate_cfg in cfg["gate"]:
        pair = tuple(p - 1 for p in gate_cfg["pair"])
        tau = _resolve_tau(cfg, spectrum, gate_cfg)
        try:
            mec = analyze(spectrum, tau)
        except ValueError as exc:
            raise DesignInfeasibleError(str(exc)) from None
        used = spectrum
        if cfg.get("idealize_mec"):
            used = spectrum.with_frequencies(4 * np.pi * np.asarray(mec.k) / tau)
            mec = analyze(used, tau)
        l_range = gate_cfg.get("l_range")
        forbid = gate_cfg.get("forbid_resonant", False)
        table = scan_l(used, pair, tau, l_range)
        best = {}
        for parity in ("odd", "even"):
            try:
                best[parity] = table.best(parity, forbid)
            except ValueError:
                best[parity] = None
        l = gate_cfg.get("l", "auto-odd")
        if isinstance(l, str):
            try:
                l, _ = select_l(used, pair, tau, l_range, l.split("-")[1], forbid)
            except ValueError as exc:
                raise DesignInfeasibleError(f"no tone index available: {exc}") from None
        try:
            gate = design_gate(used, pair, tau, l,
                               target_chi=gate_cfg.get("target_theta", np.pi / 2) / 4,
                               added_detuning=TWO_PI * gate_cfg.get("added_detuning_hz", 0.0))
        except UncoupledPairError as exc:
            raise DesignInfeasibleError(str(exc)) from None
        designed.append(DesignedGate(_gate_name(gate_cfg, gate), gate, mec, table, best, used))
    return designed


# ---------------------------------------------------------------------------- commands


def cmd_modes(cfg, out: Outputs):
    spec = cfgmod.spectrum(cfg)
    n = spec.n_modes
    ions = range(1, spec.participation.shape[1] + 1)
    header = (["mode", "frequency_hz", "nbar"] + [f"b_ion{i}" for i in ions]
              + [f"eta_ion{i}" for i in ions])
    rows = [[p + 1, spec.frequencies[p] / TWO_PI, spec.nbar[p], *spec.participation[p],
             *spec.lamb_dicke[p]] for p in range(n)]
    out.csv("modes.csv", header, rows)
    out.json("modes.json", {
        "frequencies_hz": spec.frequencies / TWO_PI,
        "frequencies_mhz": angular_to_mhz(spec.frequencies),
        "participation": spec.participation,
        "lamb_dicke": spec.lamb_dicke,
        "nbar": spec.nbar,
        "phase_rad": spec.phase,
    })
    return EXIT_OK


def cmd_design(cfg, out: Outputs):
    spec = cfgmod.spectrum(cfg)
    summary = {}
    for d in design_gates(cfg, spec):
        out.csv(f"lscan_{d.name}.csv", ["l", "parity", "S", "abs_S"], d.table.rows())
        wf = waveform(d.gate)
        out.csv(f"waveform_{d.name}.csv", ["t_us", "g_rad_per_s"],
                zip(wf.times * 1e6, wf.values))
        summary[d.name] = {
            "gate": gate_metadata(d.gate),
            "omega_rad_per_s": d.gate.omega,
            "mec": {"tau_us": d.mec.tau * 1e6, "k": list(d.mec.k),
                    "delta_k": d.mec.delta_k, "max_abs_delta_k": d.mec.max_abs_delta_k},
            "best_l": d.best,
            "mode_frequencies_mhz": angular_to_mhz(d.spectrum.frequencies),
            "alpha_analytic": alpha_for_gate(d.gate, d.spectrum).alpha,
        }
    out.json("design.json", summary)
    return EXIT_OK


def cmd_scan(cfg, out: Outputs):
    spec = cfgmod.spectrum(cfg)
    offsets = cfgmod.scan_offsets(cfg)
    sc = cfg["scan"]
    summary = {}
    for d in design_gates(cfg, spec):
        result = detuning_scan(d.gate, d.spectrum, offsets, recalibrate=sc["recalibrate"],
                               simulate=sc["simulate"], n_max=cfg["sim"]["n_max"])
        out.scan(f"scan_{d.name}.csv", result)
        entry = {"gate": gate_metadata(d.gate), "n_rows": len(result),
                 "n_flagged": int(result.flagged.sum()), "slope_band_hz": sc["slope_band_hz"]}
        for column in ("alpha", "odd_population"):
            try:
                entry[f"slope_{column}"] = scaling_slope(result, sc["slope_band_hz"], column)
            except ValueError:
                entry[f"slope_{column}"] = None
        summary[d.name] = entry
    out.json("scan_summary.json", summary)
    return EXIT_OK


def cmd_simulate(cfg, out: Outputs):
    spec = cfgmod.spectrum(cfg)
    sim = cfg["sim"]
    summary = {}
    for d in design_gates(cfg, spec):
        report = simulate_gate(d.gate, d.spectrum, n_max=sim["n_max"],
                               initial_state=sim["initial_state"],
                               phi_points=sim["phi_points"],
                               delta_omega=TWO_PI * sim["delta_omega_hz"])
        out.csv(f"parity_{d.name}.csv", ["phi_rad", "parity"],
                zip(report.parity_phases, report.parity))
        summary[d.name] = {
            "gate": gate_metadata(d.gate),
            "populations": report.populations,
            "even_population": report.even_population,
            "contrast": report.contrast,
            "fidelity": report.fidelity,
            "leakage": report.leakage,
            "chi_rad": report.chi,
            "alpha": alpha_for_gate(d.gate, d.spectrum,
                                    TWO_PI * sim["delta_omega_hz"]).alpha,
        }
    out.json("fidelity.json", summary)
    return EXIT_OK


def cmd_fit(cfg, out: Outputs):
    if "fit" not in cfg:
        raise ConfigError("config error: a 'fit' section is required for this command")
    fit = cfg["fit"]
    scans = [read_scan_csv(p) for p in fit["scans"]]
    spec = cfgmod.spectrum(cfg)
    if "initial_mhz" in fit:
        if len(fit["initial_mhz"]) != spec.n_modes:
            raise ConfigError("config error at fit/initial_mhz: wrong number of modes")
        spec = spec.with_frequencies(mhz_to_angular(fit["initial_mhz"]))
    for s in scans:
        if max(s.gate.pair) >= spec.participation.shape[1]:
            raise ConfigError("config error: scan pair outside the configured chain")
    kwargs = {"residual": fit.get("residual", "relative")}
    if "span_hz" in fit:
        kwargs["span"] = TWO_PI * fit["span_hz"]
    result = fit_mode_frequencies(scans, spec, **kwargs)
    out.json("fit.json", {
        "initial_mhz": angular_to_mhz(spec.frequencies),
        "fitted_mhz": angular_to_mhz(result.frequencies),
        "fitted_hz": result.frequencies / TWO_PI,
        "rms": result.rms,
        "residual": kwargs["residual"],
        "converged": result.converged,
        "degenerate": result.degenerate,
        "message": result.message,
        "n_scans": len(scans),
    })
    if result.degenerate:
        raise FitError(f"fit degenerate: {result.message}")
    return EXIT_OK


COMMANDS = {
    "modes": cmd_modes,
    "design": cmd_design,
    "scan": cmd_scan,
    "simulate": cmd_simulate,
    "fit": cmd_fit,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="modeforge",
        description="Design and verify single-tone two-qubit gates on trapped-ion "
                    "chains whose modes are engineered to close together.")
    parser.add_argument("command", choices=sorted(COMMANDS), help="pipeline stage to run")
    parser.add_argument("--config", required=True, help="path to the JSON experiment file")
    parser.add_argument("--out", default=None,
                        help="output directory (overrides output.directory)")
    return parser


def _exit_code(command, exc):
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, DesignInfeasibleError):
        return EXIT_DESIGN
    if isinstance(exc, FitError):
        return EXIT_FIT
    if isinstance(exc, TruncationError) or command == "simulate":
        return EXIT_SIMULATION
    if command == "fit":
        return EXIT_FIT
    if command == "scan":
        return EXIT_SIMULATION
    # chain instabilities and similar in modes/design come from the trap description
    return EXIT_CONFIG


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load(args.config)
        out = Outputs(cfg, args.out)
        code = COMMANDS[args.command](cfg, out)
    except ModeforgeError as exc:
        print(f"modeforge {args.command}: {exc}", file=sys.stderr)
        return _exit_code(args.command, exc)
    for path in out.written:
        print(path)
    return code


if __name__ == "__main__":
    sys.exit(main())
