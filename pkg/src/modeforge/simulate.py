"""Truncated Fock-space simulation of the two-qubit gate.

With the first-order Lamb-Dicke coupling ``sigma_x`` is conserved, so the
propagator splits exactly into a spin-dependent displacement of every mode
times a two-qubit phase ``exp(2 i chi sigma_x sigma_x)``. Each spin
configuration ``s`` in the ``sigma_x`` basis displaces mode ``p`` by
``beta_p(s) = -i (eta_p^i s_i + eta_p^j s_j) A_p`` with
``A_p = int g(t) exp(i (omega_p t + phi_p)) dt``; the reduced spin state
follows from overlaps of displaced Fock states.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import TruncationError
from .evaluate import chi_numeric, displacement_integrals, effective_spectrum, gate_grid
from .modes import ModeSpectrum
from .pulses import GateSpec, waveform

LEAKAGE_LIMIT = 1e-4
THERMAL_TAIL = 1e-6
SPIN_CONFIGS = np.array([(1, 1), (1, -1), (-1, 1), (-1, -1)])
_H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
Z_TO_X = np.kron(_H, _H)  # real symmetric, its own inverse
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]])
PARITY_SIGNS = np.array([1, -1, -1, 1])


def displacement_matrix(beta, dim):
    """``<m|D(beta)|n>`` for ``m, n < dim`` from the Laguerre closed form.

    Columns are the exact (untruncated) amplitudes, so their norm deficit
    measures truncation leakage.
    """
    x = abs(beta) ** 2
    m = np.arange(dim)[:, None]
    n = np.arange(dim)[None, :]
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    diff = hi - lo
    lag = eval_genlaguerre(lo, diff, x)
    with np.errstate(divide="ignore"):
        mag = np.exp(0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - x / 2)
    phase = np.where(m >= n, beta ** diff, (-np.conj(beta)) ** diff)
    return mag * phase * lag


def thermal_weights(nbar, n_max, tail=THERMAL_TAIL):
    """Boltzmann populations of Fock states ``0..n_max``, cut where the
    cumulative weight reaches ``1 - tail`` and renormalized."""
    if nbar == 0:
        w = np.zeros(n_max + 1)
        w[0] = 1.0
        return w
    n = np.arange(n_max + 1)
    w = nbar**n / (nbar + 1) ** (n + 1)
    cumulative = np.cumsum(w)
    if cumulative[-1] < 1 - tail:
        raise TruncationError(
            f"thermal tail {1 - cumulative[-1]:.2g} for nbar={nbar} exceeds {tail}; "
            f"increase n_max (now {n_max})")
    cut = int(np.searchsorted(cumulative, 1 - tail)) + 1
    w[cut:] = 0.0
    return w / w.sum()


def fidelity_estimate(even_population, contrast):
    """Bell-state fidelity from even-state population and parity contrast."""
    return 0.5 * (even_population + contrast)


def fit_parity_contrast(phis, parity):
    """Amplitude of the ``cos(2 phi + phi0)`` component (with free offset)."""
    phis = np.asarray(phis, dtype=float)
    design = np.column_stack([np.cos(2 * phis), np.sin(2 * phis), np.ones_like(phis)])
    coef, *_ = np.linalg.lstsq(design, np.asarray(parity, dtype=float), rcond=None)
    return float(np.hypot(coef[0], coef[1]))


@dataclass(frozen=True)
class FidelityReport:
    populations: dict
    even_population: float
    contrast: float
    fidelity: float
    parity_phases: np.ndarray = field(default_factory=lambda: np.zeros(0))
    parity: np.ndarray = field(default_factory=lambda: np.zeros(0))
    leakage: float = 0.0
    chi: float = float("nan")

    @property
    def odd_population(self):
        return self.populations["01"] + self.populations["10"]

    @property
    def parity_curve(self):
        return list(zip(self.parity_phases.tolist(), self.parity.tolist()))

    @classmethod
    def from_measurements(cls, contrast, even_population, populations=None):
        if populations is None:
            populations = {"00": even_population / 2, "11": even_population / 2,
                           "01": (1 - even_population) / 2, "10": (1 - even_population) / 2}
        return cls(populations, even_population, contrast,
                   fidelity_estimate(even_population, contrast))


def _initial_vector(initial_state):
    if isinstance(initial_state, str):
        if len(initial_state) != 2 or set(initial_state) - {"0", "1"}:
            raise ValueError(f"initial_state must be like '00', got {initial_state!r}")
        psi = np.zeros(4, dtype=complex)
        psi[int(initial_state, 2)] = 1.0
        return psi
    psi = np.asarray(initial_state, dtype=complex).ravel()
    if psi.shape != (4,):
        raise ValueError("initial_state vector must have 4 entries")
    return psi / np.linalg.norm(psi)


def analysis_rotation(phi):
    """``R(pi/2, phi)`` on one qubit."""
    return np.cos(np.pi / 4) * np.eye(2) - 1j * np.sin(np.pi / 4) * (
        np.cos(phi) * _X + np.sin(phi) * _Y)


def spin_density_matrix(chi, integrals, spectrum: ModeSpectrum, pair, n_max=10,
                        initial_state="00"):
    """Reduced two-qubit density matrix (computational basis) after the
    gate, and the Fock truncation leakage."""
    if n_max < 5:
        raise ValueError("n_max must be at least 5")
    i, j = pair
    psi_x = Z_TO_X @ _initial_vector(initial_state)
    s_i, s_j = SPIN_CONFIGS[:, 0], SPIN_CONFIGS[:, 1]
    rho = np.outer(psi_x, psi_x.conj())
    spin_phase = 2 * chi * s_i * s_j
    rho = rho * np.exp(1j * (spin_phase[:, None] - spin_phase[None, :]))

    kept = 1.0
    for p in range(spectrum.n_modes):
        weights = thermal_weights(spectrum.nbar[p], n_max)
        occupied = np.flatnonzero(weights)
        coupling = spectrum.lamb_dicke[p, i] * s_i + spectrum.lamb_dicke[p, j] * s_j
        # columns[s] holds D(beta_s)|n> for every occupied n: (dim, n_occ)
        columns = [displacement_matrix(-1j * c * integrals[p], n_max + 1)[:, occupied]
                   for c in coupling]
        overlap = np.empty((4, 4), dtype=complex)
        for a in range(4):
            for b in range(4):
                # <n| D(beta_b)^dag D(beta_a) |n>, thermally averaged
                overlap[a, b] = np.sum(weights[occupied]
                                       * np.sum(columns[b].conj() * columns[a], axis=0))
        worst = min(np.min(np.sum(np.abs(col) ** 2, axis=0)) for col in columns)
        kept *= worst
        rho = rho * overlap
    leakage = 1.0 - kept
    if leakage > LEAKAGE_LIMIT:
        raise TruncationError(
            f"Fock truncation leakage {leakage:.2g} exceeds {LEAKAGE_LIMIT}; increase n_max "
            f"(now {n_max})")
    return Z_TO_X @ rho @ Z_TO_X, leakage


def report_from_density(rho, phi_points=24, leakage=0.0, chi=float("nan")):
    pops = np.real(np.diagonal(rho))
    populations = {"00": pops[0], "01": pops[1], "10": pops[2], "11": pops[3]}
    populations = {k: float(v) for k, v in populations.items()}
    even = populations["00"] + populations["11"]
    if phi_points:
        phis = 2 * np.pi * np.arange(phi_points) / phi_points
        parity = np.empty(phi_points)
        for n, phi in enumerate(phis):
            r = analysis_rotation(phi)
            rr = np.kron(r, r)
            rotated = rr @ rho @ rr.conj().T
            parity[n] = float(np.real(np.diagonal(rotated)) @ PARITY_SIGNS)
        contrast = fit_parity_contrast(phis, parity)
    else:
        phis, parity, contrast = np.zeros(0), np.zeros(0), float("nan")
    return FidelityReport(populations, even, contrast, fidelity_estimate(even, contrast),
                          phis, parity, float(leakage), float(chi))


def simulate_gate(gate: GateSpec, spectrum: ModeSpectrum, n_max=10, initial_state="00",
                  phi_points=24, delta_omega=0.0, sample_count=None) -> FidelityReport:
    """Run the gate on ``initial_state`` with thermal modes and analyse the
    resulting two-qubit state.

    ``phi_points=0`` skips the parity scan (populations only).
    """
    eff = effective_spectrum(spectrum, gate, delta_omega)
    wf = waveform(gate, sample_count)
    grid = gate_grid(wf, eff)
    chi = chi_numeric(wf, eff, gate.pair, grid)
    integrals = displacement_integrals(wf, eff, grid)
    rho, leakage = spin_density_matrix(chi, integrals, eff, gate.pair, n_max, initial_state)
    return report_from_density(rho, phi_points, leakage, chi)
