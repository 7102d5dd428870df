"""Detuning-robustness scans and the collective mode-frequency fit."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brute, minimize

from .errors import TruncationError, UncoupledPairError
from .evaluate import alpha_analytic, chi_numeric, effective_spectrum
from .mec import analyze
from .modes import ModeSpectrum, measured_spectrum
from .pulses import GateSpec, calibrate_omega, waveform
from .simulate import simulate_gate

TWO_PI = 2 * np.pi
#: Leading-order odd population per unit alpha for a ``|00>`` input.
ODD_PER_ALPHA = 1.25
#: Offset (relative to the largest data point) that keeps log ratios finite.
RELATIVE_FLOOR = 1e-9


@dataclass(frozen=True)
class ScanResult:
    """One detuning scan. Arrays share the row index; ``gate`` carries the
    design the scan was run with (``gate.omega`` is the nominal drive)."""

    gate: GateSpec
    delta_omega: np.ndarray
    omega_calibrated: np.ndarray
    alpha: np.ndarray
    odd_population: np.ndarray
    flagged: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("delta_omega", "omega_calibrated", "alpha", "odd_population"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = len(self.delta_omega)
        flagged = np.zeros(n, dtype=bool) if self.flagged is None else self.flagged
        object.__setattr__(self, "flagged", np.asarray(flagged, dtype=bool))
        if any(len(getattr(self, a)) != n for a in ("omega_calibrated", "alpha",
                                                    "odd_population", "flagged")):
            raise ValueError("scan columns differ in length")

    @property
    def scaled_odd_population(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.omega_calibrated > 0,
                            self.odd_population / self.omega_calibrated**2, np.nan)

    def __len__(self):
        return len(self.delta_omega)


def detuning_scan(gate: GateSpec, spectrum: ModeSpectrum, offsets, recalibrate=True,
                  simulate=True, n_max=10) -> ScanResult:
    """Evaluate ``gate`` with every mode detuning shifted by each offset.

    With ``recalibrate`` the drive is rescaled at each offset so that the
    numerically integrated ``|chi|`` equals ``gate.target_chi``, which also
    balances the ``|00>`` and ``|11>`` populations. Rows whose
    recalibration or simulation fails are flagged and hold NaN.
    ``simulate=False`` skips the Fock simulation and reports the
    leading-order odd population ``1.25 * alpha`` instead.
    """
    offsets = np.asarray(offsets, dtype=float).ravel()
    if not np.all(np.isfinite(offsets)):
        raise ValueError("offsets must be finite")
    unit = waveform(replace(gate, omega=1.0))
    n = len(offsets)
    omega = np.full(n, gate.omega)
    alpha = np.full(n, np.nan)
    odd = np.full(n, np.nan)
    flagged = np.zeros(n, dtype=bool)
    for r, dw in enumerate(offsets):
        eff = effective_spectrum(spectrum, gate, dw)
        try:
            if recalibrate:
                chi_unit = chi_numeric(unit, eff, gate.pair)
                omega[r] = calibrate_omega(chi_unit, 1.0, gate.target_chi)
            row_gate = replace(gate, omega=float(omega[r]))
            alpha[r] = alpha_analytic(row_gate, analyze(eff, gate.tau), eff).alpha
            if simulate:
                odd[r] = simulate_gate(row_gate, spectrum, n_max=n_max, phi_points=0,
                                       delta_omega=dw).odd_population
            else:
                odd[r] = ODD_PER_ALPHA * alpha[r]
        except (UncoupledPairError, TruncationError, ValueError):
            flagged[r] = True
            omega[r] = alpha[r] = odd[r] = np.nan
    return ScanResult(gate, offsets, omega, alpha, odd, flagged)


def log_slope(x, y):
    """Least-squares slope of ``log|y|`` against ``log|x|``."""
    x, y = np.abs(np.asarray(x, dtype=float)), np.asarray(y, dtype=float)
    ok = (x > 0) & (y > 0) & np.isfinite(y)
    if ok.sum() < 2:
        raise ValueError("need at least two positive points for a log-log slope")
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def scaling_slope(scan: ScanResult, band_hz=(100.0, 1000.0), column="alpha"):
    """Log-log slope of ``column`` against ``|delta_omega|`` for offsets with
    ``|delta_omega|/2pi`` inside ``band_hz``; positive and negative offsets
    are pooled so the odd-in-offset correction terms cancel."""
    f = np.abs(scan.delta_omega) / TWO_PI
    sel = (f >= band_hz[0]) & (f <= band_hz[1]) & ~scan.flagged
    values = getattr(scan, column)
    return log_slope(scan.delta_omega[sel], values[sel])


def symmetric_offsets(lo_hz=100.0, hi_hz=1000.0, n=10):
    """Log-spaced offsets of both signs (rad/s)."""
    f = np.geomspace(lo_hz, hi_hz, n)
    return TWO_PI * np.concatenate([-f[::-1], f])


# --------------------------------------------------------------------------- fit


def _scan_model(frequencies, base: ModeSpectrum, scan: ScanResult):
    """Vectorized ``1.25 * alpha`` for every row of ``scan`` given trial
    (unshifted) mode frequencies."""
    gate = scan.gate
    scale = np.sqrt(base.frequencies / frequencies)
    eta = base.lamb_dicke * scale[:, None]
    i, j = gate.pair
    weight = base.coth_factor * (eta[:, i] ** 2 + eta[:, j] ** 2)
    eff = frequencies[None, :] - gate.added_detuning - scan.delta_omega[:, None]
    x = eff * gate.tau / (4 * np.pi)
    dk = x - np.rint(x)
    l = gate.l
    if l % 2:
        num = np.exp(4j * np.pi * dk) - 1
    else:
        num = (np.exp(2j * np.pi * dk) - 1) ** 2
    den = 4 * x**2 - l**2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio2 = np.abs(num / den) ** 2
    limit = (np.pi**2 / l**2) if l % 2 else 0.0
    ratio2 = np.where(np.abs(den) < 1e-12 * l**2, limit, ratio2)
    om = np.nan_to_num(scan.omega_calibrated)
    per_row = l**2 * om**2 * gate.tau**2 / (5 * np.pi**2) * (ratio2 @ weight)
    return ODD_PER_ALPHA * per_row


def predicted_odd_population(frequencies, base: ModeSpectrum, scan: ScanResult):
    """Odd population the fit model assigns to each row of ``scan``."""
    return _scan_model(np.asarray(frequencies, dtype=float), base, scan)


@dataclass(frozen=True)
class FitResult:
    frequencies: np.ndarray
    rms: float
    converged: bool
    degenerate: bool
    n_evaluations: int = 0
    message: str = ""


def fit_mode_frequencies(scans, initial, *, span=TWO_PI * 5e3, coarse_step=TWO_PI * 500.0,
                         xatol=TWO_PI * 0.01, max_iter=4000, n_starts=8,
                         residual="relative") -> FitResult:
    """Collective fit of all mode frequencies to measured odd populations.

    ``initial`` is a :class:`ModeSpectrum` (supplying participation, mass
    and thermal factors) or an array of angular frequencies, in which case
    ideal participation is assumed. A coarse grid over ``initial +- span``
    is followed by Nelder-Mead polishes of the root-mean-square residual.
    ``residual="relative"`` (default) uses log ratios of model to data,
    which matches multiplicative noise and lets the small populations near
    each closure point constrain the weakly coupled modes;
    ``"absolute"`` uses plain differences.
    Fewer than two usable scans, data without signal, or a mode that no
    scan couples to are reported as degenerate with ``initial`` returned.
    """
    base = initial if isinstance(initial, ModeSpectrum) else measured_spectrum(initial)
    f0 = np.array(base.frequencies, dtype=float)
    usable = []
    for scan in scans:
        keep = ~scan.flagged & np.isfinite(scan.odd_population)
        if keep.sum() and np.any(scan.omega_calibrated[keep] > 0):
            usable.append(ScanResult(scan.gate, scan.delta_omega[keep],
                                     scan.omega_calibrated[keep], scan.alpha[keep],
                                     scan.odd_population[keep]))
    data = np.concatenate([s.odd_population for s in usable]) if usable else np.zeros(0)

    def degenerate(msg):
        return FitResult(f0, float("nan"), False, True, 0, msg)

    if len(usable) < 2:
        return degenerate("need at least two scans with nonzero drive")
    if not np.ptp(data) > 0:
        return degenerate("scan data carry no signal")
    coupled = np.zeros(len(f0), dtype=bool)
    for s in usable:
        coupled |= np.abs(base.pair_squares(s.gate.pair)) > 0
    if not coupled.all():
        return degenerate("some mode is not coupled to any scanned pair")

    if residual not in ("relative", "absolute"):
        raise ValueError(f"residual must be 'relative' or 'absolute', got {residual!r}")
    floor = RELATIVE_FLOOR * float(np.max(np.abs(data)))
    data = np.maximum(data, 0.0)
    count = [0]

    def rms(z):
        count[0] += 1
        freqs = f0 + np.atleast_1d(z) * coarse_step
        model = np.concatenate([_scan_model(freqs, base, s) for s in usable])
        if residual == "relative":
            return float(np.sqrt(np.mean(np.log((model + floor) / (data + floor)) ** 2)))
        return float(np.sqrt(np.mean((model - data) ** 2)))

    half = span / coarse_step
    ranges = [slice(-half, half + 0.5, 1.0)] * len(f0)
    _, _, grid, values = brute(rms, ranges, finish=None, full_output=True)
    grid = np.asarray(grid).reshape(len(f0), -1).T
    values = np.asarray(values).ravel()
    # Closure is nearly periodic in each frequency, so the grid can hold
    # aliased basins; polish the best few grid points and keep the winner.
    res = None
    for start in grid[np.argsort(values, kind="stable")[:n_starts]]:
        trial = minimize(rms, start, method="Nelder-Mead",
                         options={"xatol": xatol / coarse_step, "fatol": 0.0,
                                  "maxiter": max_iter, "maxfev": max_iter,
                                  "initial_simplex": start + np.vstack(
                                      [np.zeros(len(f0)), 0.5 * np.eye(len(f0))])})
        if res is None or trial.fun < res.fun:
            res = trial
    freqs = f0 + res.x * coarse_step
    return FitResult(freqs, float(res.fun), bool(res.success), False, count[0],
                     str(res.message))
