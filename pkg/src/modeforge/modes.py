"""Equilibrium positions, radial normal modes and Lamb-Dicke parameters of a
linear ion chain.

Positions are dimensionless, in units of the length scale
``(e^2 / (4 pi eps0 M omega_z^2))^(1/3)``. The axial potential is harmonic
with an optional quartic correction ``quartic_coeff * u^4`` (same units).
All frequencies are angular (rad/s).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants

from .errors import (
    ChainNotLinearError,
    EquilibriumNotFoundError,
    ParticipationError,
    RadialInstabilityError,
)

HBAR = constants.hbar
K_B = constants.k
AMU = constants.atomic_mass

YB171_MASS = 170.936 * AMU
#: Counter-propagating Raman beams at 355 nm.
DEFAULT_WAVEVECTOR_DIFF = 2 * (2 * np.pi / 355e-9)

TWO_PI = 2 * np.pi


def mhz_to_angular(f_mhz):
    return TWO_PI * 1e6 * np.asarray(f_mhz, dtype=float)


def angular_to_mhz(omega):
    return np.asarray(omega, dtype=float) / (TWO_PI * 1e6)


@dataclass(frozen=True)
class TrapConfig:
    """Trap and beam parameters for an ``n_ions`` linear chain.

    Frequencies are angular (rad/s); use :meth:`from_mhz` for lab units.
    """

    n_ions: int
    axial_freq: float
    radial_com_freq: float
    quartic_coeff: float = 0.0
    ion_mass: float = YB171_MASS
    raman_wavevector_diff: float = DEFAULT_WAVEVECTOR_DIFF

    def __post_init__(self):
        if int(self.n_ions) != self.n_ions or self.n_ions < 2:
            raise ValueError(f"n_ions must be an integer >= 2, got {self.n_ions}")
        for name in ("axial_freq", "radial_com_freq", "ion_mass", "raman_wavevector_diff"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if not np.isfinite(self.quartic_coeff):
            raise ValueError("quartic_coeff must be finite")
        if self.radial_com_freq <= self.axial_freq:
            raise ValueError("radial_com_freq must exceed axial_freq for a linear chain")

    @classmethod
    def from_mhz(cls, n_ions, axial_mhz, radial_com_mhz, **kwargs):
        return cls(
            n_ions=n_ions,
            axial_freq=float(mhz_to_angular(axial_mhz)),
            radial_com_freq=float(mhz_to_angular(radial_com_mhz)),
            **kwargs,
        )


def _readonly(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ModeSpectrum:
    """Radial mode data for one chain.

    ``participation[p, i]`` is the normalized amplitude of ion ``i`` in mode
    ``p``; ``lamb_dicke`` has the same layout. Modes are sorted by ascending
    frequency. Thermal occupation enters the residual-coupling formulas as
    ``2 * nbar + 1`` (the coth factor).
    """

    frequencies: np.ndarray
    participation: np.ndarray
    lamb_dicke: np.ndarray
    nbar: np.ndarray = field(default=None)
    phase: np.ndarray = field(default=None)

    def __post_init__(self):
        n = len(self.frequencies)
        object.__setattr__(self, "frequencies", _readonly(self.frequencies))
        object.__setattr__(self, "participation", _readonly(self.participation))
        object.__setattr__(self, "lamb_dicke", _readonly(self.lamb_dicke))
        nbar = np.zeros(n) if self.nbar is None else self.nbar
        phase = np.zeros(n) if self.phase is None else self.phase
        object.__setattr__(self, "nbar", _readonly(np.broadcast_to(nbar, (n,))))
        object.__setattr__(self, "phase", _readonly(np.broadcast_to(phase, (n,))))
        if self.participation.shape[0] != n or self.lamb_dicke.shape != self.participation.shape:
            raise ValueError("participation/lamb_dicke shape does not match frequencies")
        if np.any(self.nbar < 0):
            raise ValueError("nbar must be non-negative")

    @property
    def n_modes(self):
        return len(self.frequencies)

    @property
    def coth_factor(self):
        return 2 * self.nbar + 1

    def shifted(self, delta_omega):
        """Copy with every mode frequency lowered by ``delta_omega``.

        Lamb-Dicke parameters are kept: the shift models a change of the
        gate detuning, not of the trap.
        """
        if delta_omega == 0:
            return self
        return replace(self, frequencies=self.frequencies - delta_omega)

    def with_frequencies(self, frequencies):
        """Copy with new frequencies and Lamb-Dicke parameters rescaled by
        ``sqrt(omega_old / omega_new)``."""
        frequencies = np.asarray(frequencies, dtype=float)
        scale = np.sqrt(self.frequencies / frequencies)
        return replace(
            self,
            frequencies=frequencies,
            lamb_dicke=self.lamb_dicke * scale[:, None],
        )

    def pair_products(self, pair):
        i, j = pair
        return self.lamb_dicke[:, i] * self.lamb_dicke[:, j]

    def pair_squares(self, pair):
        i, j = pair
        return self.lamb_dicke[:, i] ** 2 + self.lamb_dicke[:, j] ** 2


def lamb_dicke_matrix(frequencies, participation, ion_mass=YB171_MASS,
                      wavevector_diff=DEFAULT_WAVEVECTOR_DIFF):
    frequencies = np.asarray(frequencies, dtype=float)
    scale = wavevector_diff * np.sqrt(HBAR / (2 * ion_mass * frequencies))
    return np.asarray(participation, dtype=float) * scale[:, None]


def _coulomb_forces(u, quartic):
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, np.inf)
    return u + 4 * quartic * u**3 - np.sum(np.sign(d) / d**2, axis=1)


def _coulomb_couplings(u):
    """Matrix with ``sum_j 1/|u_i-u_j|^3`` on the diagonal and
    ``-1/|u_i-u_j|^3`` off it."""
    d = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(d, np.inf)
    inv3 = 1.0 / d**3
    return np.diag(inv3.sum(axis=1)) - inv3


def _radial_hessian(u, config):
    ratio2 = (config.radial_com_freq / config.axial_freq) ** 2
    return ratio2 * np.eye(len(u)) - _coulomb_couplings(u)


def equilibrium_positions(config: TrapConfig, *, tol=1e-13, max_iter=200,
                          check_radial=True) -> np.ndarray:
    """Solve the axial force balance with a damped Newton iteration.

    Starts from an equally spaced chain and halves the step until the ion
    ordering is preserved and the force residual decreases.
    """
    n = config.n_ions
    c = config.quartic_coeff
    spacing = 2.018 / n**0.559
    u = spacing * (np.arange(n) - (n - 1) / 2)

    f = _coulomb_forces(u, c)
    res = np.max(np.abs(f))
    for _ in range(max_iter):
        if res < tol:
            break
        jac = 2 * _coulomb_couplings(u)
        jac[np.diag_indices(n)] += 1 + 12 * c * u**2
        try:
            step = np.linalg.solve(jac, f)
        except np.linalg.LinAlgError as exc:
            raise EquilibriumNotFoundError("equilibrium not found: singular Jacobian") from exc
        damping = 1.0
        while damping > 1e-6:
            trial = u - damping * step
            if np.all(np.diff(trial) > 0):
                f_trial = _coulomb_forces(trial, c)
                res_trial = np.max(np.abs(f_trial))
                if res_trial < res or res_trial < tol:
                    break
            damping /= 2
        else:
            raise EquilibriumNotFoundError("equilibrium not found: line search stalled")
        u, f, res = trial, f_trial, res_trial
    if not res < tol:
        raise EquilibriumNotFoundError(
            f"equilibrium not found after {max_iter} iterations (residual {res:.3g})")

    # Symmetrize away round-off in the harmonic/quartic (even potential) case.
    u = 0.5 * (u - u[::-1])
    if n % 2:
        u[n // 2] = 0.0

    axial = 2 * _coulomb_couplings(u)
    axial[np.diag_indices(n)] += 1 + 12 * c * u**2
    if np.linalg.eigvalsh(axial)[0] <= 0:
        raise ChainNotLinearError("chain not linear: axial equilibrium is a saddle point")
    if check_radial and np.linalg.eigvalsh(_radial_hessian(u, config))[0] <= 0:
        raise ChainNotLinearError("chain not linear: zig-zag instability")
    return u


def _fix_signs(vectors):
    """Flip each row so that its first non-negligible entry is positive."""
    out = np.array(vectors, dtype=float)
    for row in out:
        nz = np.flatnonzero(np.abs(row) > 1e-9)
        if nz.size and row[nz[0]] < 0:
            row *= -1
    return out


def _reflection_parity(vectors, tol=1e-6):
    """Project each mode onto its exact mirror-symmetric or antisymmetric
    part; the even potential makes every nondegenerate mode one of the two,
    so e.g. the middle ion of an odd chain sits exactly still in the tilt
    mode instead of carrying round-off."""
    out = np.array(vectors, dtype=float)
    for row in out:
        overlap = row @ row[::-1]
        if abs(abs(overlap) - 1) < tol:
            row[:] = 0.5 * (row + np.sign(overlap) * row[::-1])
            row /= np.linalg.norm(row)
    return out


def radial_mode_spectrum(config: TrapConfig, nbar=None, phase=None) -> ModeSpectrum:
    """Radial modes of the chain, zig-zag first and centre-of-mass last."""
    u = equilibrium_positions(config, check_radial=False)
    eigvals, eigvecs = np.linalg.eigh(_radial_hessian(u, config))
    if eigvals[0] <= 0:
        raise RadialInstabilityError(
            f"radial instability: lowest eigenvalue {eigvals[0]:.3g}")
    frequencies = config.axial_freq * np.sqrt(eigvals)
    participation = _fix_signs(_reflection_parity(eigvecs.T))
    eta = lamb_dicke_matrix(frequencies, participation, config.ion_mass,
                            config.raman_wavevector_diff)
    return ModeSpectrum(frequencies, participation, eta, nbar, phase)


def ideal_participation(n_ions: int) -> np.ndarray:
    """Participation of a harmonically confined chain.

    The eigenvectors only depend on the equilibrium geometry, so any stable
    trap ratio gives the same matrix.
    """
    if n_ions == 1:
        return np.ones((1, 1))
    config = TrapConfig(n_ions, 1.0, 10.0 * n_ions)
    return radial_mode_spectrum(config).participation


def measured_spectrum(frequencies, participation=None, nbar=None, phase=None, *,
                      ion_mass=YB171_MASS,
                      wavevector_diff=DEFAULT_WAVEVECTOR_DIFF,
                      atol=1e-9) -> ModeSpectrum:
    """Build a spectrum from measured angular frequencies.

    ``participation`` defaults to :func:`ideal_participation`, matched to
    the modes by frequency rank. Modes are reordered by ascending frequency
    together with their rows.
    """
    frequencies = np.atleast_1d(np.asarray(frequencies, dtype=float))
    if np.any(~np.isfinite(frequencies)) or np.any(frequencies <= 0):
        raise ValueError("mode frequencies must be positive")
    n = len(frequencies)
    if participation is None:
        # ideal rows are already in ascending-frequency order
        participation = ideal_participation(n)[np.argsort(np.argsort(frequencies, kind="stable"))]
    b = np.atleast_2d(np.asarray(participation, dtype=float))
    if b.shape != (n, n):
        raise ParticipationError(f"participation must be {n}x{n}, got {b.shape}")
    if not np.allclose(b @ b.T, np.eye(n), atol=atol, rtol=0):
        raise ParticipationError("participation matrix is not orthonormal")
    order = np.argsort(frequencies, kind="stable")
    frequencies, b = frequencies[order], b[order]
    if nbar is not None:
        nbar = np.broadcast_to(np.asarray(nbar, dtype=float), (n,))[order]
    if phase is not None:
        phase = np.broadcast_to(np.asarray(phase, dtype=float), (n,))[order]
    eta = lamb_dicke_matrix(frequencies, b, ion_mass, wavevector_diff)
    return ModeSpectrum(frequencies, b, eta, nbar, phase)
