"""Gate verification: quadrature oracles and closed forms for the two-qubit
phase ``chi`` and the residual spin-motion coupling ``alpha``."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import UndersampledError
from .mec import MecAssignment, analyze
from .modes import ModeSpectrum
from .pulses import GateSpec, waveform
from .quadrature import PanelGrid, ordered_double_integrals, panel_grid, phase_integrals

MIN_SAMPLES_PER_PERIOD = 20
EXPANSION_LIMIT = 0.05


@dataclass(frozen=True)
class AlphaReport:
    alpha: float
    per_mode: np.ndarray
    method: str
    resonant_modes: tuple = ()
    valid: bool = True


def _fastest(waveform, spectrum):
    return max(waveform.max_angular_frequency, float(np.max(np.abs(spectrum.frequencies))))


def _check_sampling(waveform, spectrum):
    fastest = _fastest(waveform, spectrum)
    needed = MIN_SAMPLES_PER_PERIOD * fastest * waveform.tau / (2 * np.pi)
    if len(waveform.times) - 1 < needed:
        raise UndersampledError(
            f"waveform has {len(waveform.times) - 1} samples, needs >= {int(np.ceil(needed))} "
            f"({MIN_SAMPLES_PER_PERIOD} per period of the fastest oscillation)")


def gate_grid(waveform, spectrum, panels_per_period=8, order=10) -> PanelGrid:
    return panel_grid(waveform.tau, _fastest(waveform, spectrum), panels_per_period, order)


def chi_per_mode(waveform, spectrum: ModeSpectrum, pair, grid=None):
    _check_sampling(waveform, spectrum)
    grid = gate_grid(waveform, spectrum) if grid is None else grid
    integrals = ordered_double_integrals(waveform.evaluate, grid, spectrum.frequencies)
    return spectrum.pair_products(pair) * integrals


def chi_numeric(waveform, spectrum: ModeSpectrum, pair, grid=None) -> float:
    """Two-qubit phase from the time-ordered double integral, by quadrature."""
    return float(np.sum(chi_per_mode(waveform, spectrum, pair, grid)))


def displacement_integrals(waveform, spectrum: ModeSpectrum, grid=None):
    """``int_0^tau g(t) exp(i (omega_p t + phi_p)) dt`` for every mode."""
    _check_sampling(waveform, spectrum)
    grid = gate_grid(waveform, spectrum) if grid is None else grid
    return phase_integrals(waveform.evaluate, grid, spectrum.frequencies, spectrum.phase)


def alpha_from_integrals(integrals, spectrum: ModeSpectrum, pair):
    return 0.8 * spectrum.coth_factor * spectrum.pair_squares(pair) * np.abs(integrals) ** 2


def alpha_numeric(waveform, spectrum: ModeSpectrum, pair, grid=None) -> AlphaReport:
    per_mode = alpha_from_integrals(displacement_integrals(waveform, spectrum, grid),
                                    spectrum, pair)
    return AlphaReport(float(np.sum(per_mode)), per_mode, "numeric")


def phase_closure_factorization_check(waveform, omega, phase=0.0, grid=None):
    """Return ``(full, factorized)`` for one mode.

    ``full`` integrates over the whole gate; ``factorized`` is
    ``(1 - exp(2 i pi dk)) * (integral over the first half)`` with ``dk`` the
    mode's closure miss. The two agree for any half-antisymmetric pulse.
    """
    if grid is None:
        grid = panel_grid(waveform.tau, max(waveform.max_angular_frequency, abs(omega)))
    omega = np.array([float(omega)])
    full = phase_integrals(waveform.evaluate, grid, omega, phase)[0]
    half = phase_integrals(waveform.evaluate, grid.first(grid.n_panels // 2), omega, phase)[0]
    x = omega[0] * waveform.tau / (4 * np.pi)
    dk = x - np.rint(x)
    return complex(full), complex((1 - np.exp(2j * np.pi * dk)) * half)


def _closure_numerator(gate: GateSpec, dk):
    if gate.l % 2:
        return np.exp(4j * np.pi * dk) - 1
    return (np.exp(2j * np.pi * dk) - 1) ** 2


def alpha_analytic(gate: GateSpec, mec: MecAssignment, spectrum: ModeSpectrum,
                   resonance_tol=1e-12) -> AlphaReport:
    """Closed form of ``alpha`` for the single-tone pulse (both parities).

    A mode sitting exactly on the tone (``2 (k + dk) = l``) is reported in
    ``resonant_modes`` and given its limit value.
    """
    l, om, tau = gate.l, gate.omega, gate.tau
    k = np.asarray(mec.k, dtype=float)
    dk = np.asarray(mec.delta_k, dtype=float)
    x = k + dk
    den = 4 * x**2 - l**2
    resonant = np.abs(den) < resonance_tol * l**2
    weight = spectrum.coth_factor * spectrum.pair_squares(gate.pair)
    num = _closure_numerator(gate, dk)
    safe = np.where(resonant, 1.0, den)
    per_mode = l**2 * om**2 * tau**2 / (5 * np.pi**2) * weight * np.abs(num / safe) ** 2
    if resonant.any():
        # |int g e^{i omega t}| -> Omega tau / 2 (odd l); even l closes exactly.
        limit = weight * om**2 * tau**2 / 5 if l % 2 else np.zeros_like(weight)
        per_mode = np.where(resonant, limit, per_mode)
    return AlphaReport(float(np.sum(per_mode)), per_mode, "analytic",
                       tuple(int(p) for p in np.flatnonzero(resonant)))


def alpha_expansion(gate: GateSpec, mec: MecAssignment, spectrum: ModeSpectrum,
                    bound=False) -> AlphaReport:
    """Leading small-``dk`` term of ``alpha``.

    Odd ``l`` gives a ``dk^2`` law, even ``l`` a ``dk^4`` law, except for a
    mode with ``2 k_p = l`` which adds a ``dk^2`` offset. With
    ``bound=True`` the thermal factor is replaced by its ``nbar <= 1/2``
    ceiling of 2, giving an upper bound instead of an estimate.
    """
    l, om, tau = gate.l, gate.omega, gate.tau
    k = np.asarray(mec.k, dtype=float)
    dk = np.asarray(mec.delta_k, dtype=float)
    thermal = np.full(len(k), 2.0) if bound else spectrum.coth_factor
    weight = thermal * spectrum.pair_squares(gate.pair)
    resonant = 2 * k == l
    with np.errstate(divide="ignore"):
        den2 = np.where(resonant, 1.0, (4 * k**2 - l**2)) ** 2
    scale = 16 * l**2 * om**2 * tau**2 / 5
    if l % 2:
        per_mode = scale * weight * dk**2 / den2
    else:
        per_mode = np.pi**2 * scale * weight * dk**4 / den2
        per_mode = np.where(resonant, om**2 * tau**2 * np.pi**2 / 5 * weight * dk**2, per_mode)
    valid = bool(np.max(np.abs(dk)) <= EXPANSION_LIMIT * (1 + 1e-9))
    if not valid:
        warnings.warn(f"alpha expansion used with |dk| = {np.max(np.abs(dk)):.3g} "
                      f"> {EXPANSION_LIMIT}", stacklevel=2)
    return AlphaReport(float(np.sum(per_mode)), per_mode, "expansion",
                       tuple(int(p) for p in np.flatnonzero(resonant)), valid)


def effective_spectrum(spectrum: ModeSpectrum, gate: GateSpec, delta_omega=0.0):
    """Spectrum as seen by the gate: every mode lowered by the added
    detuning plus ``delta_omega``."""
    return spectrum.shifted(gate.added_detuning + delta_omega)


def alpha_for_gate(gate: GateSpec, spectrum: ModeSpectrum, delta_omega=0.0,
                   method="analytic", sample_count=None) -> AlphaReport:
    eff = effective_spectrum(spectrum, gate, delta_omega)
    if method == "analytic":
        return alpha_analytic(gate, analyze(eff, gate.tau), eff)
    if method == "numeric":
        return alpha_numeric(waveform(gate, sample_count), eff, gate.pair)
    raise ValueError(f"unknown method {method!r}")
