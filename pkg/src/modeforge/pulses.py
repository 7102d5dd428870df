"""Single-tone, constant-amplitude gate pulses.

The drive on ``[0, tau/2)`` is ``Omega * sin(2 pi l t / tau)`` and the
second half repeats it with the sign flipped. For odd ``l`` the flip is the
sine's own symmetry; for even ``l`` it puts a cusp at ``tau/2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UncoupledPairError, UndersampledError
from .mec import MecAssignment, analyze
from .modes import ModeSpectrum

TWO_PI = 2 * np.pi
FULL_ENTANGLING_CHI = np.pi / 8


@dataclass(frozen=True)
class GateSpec:
    """One XX gate on ``pair`` (0-based ion indices).

    ``added_detuning`` (rad/s) lowers every effective mode frequency by the
    same amount. ``chi_sign`` records the sign of the accumulated two-qubit
    phase; only its magnitude is calibrated.
    """

    pair: tuple
    tau: float
    l: int
    omega: float = 0.0
    added_detuning: float = 0.0
    target_chi: float = FULL_ENTANGLING_CHI
    chi_sign: int = 1

    def __post_init__(self):
        i, j = self.pair
        object.__setattr__(self, "pair", (int(i), int(j)))
        if i == j or i < 0 or j < 0:
            raise ValueError(f"invalid ion pair {self.pair}")
        if int(self.l) != self.l or self.l < 1:
            raise ValueError(f"l must be a positive integer, got {self.l}")
        object.__setattr__(self, "l", int(self.l))
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.omega < 0:
            raise ValueError("omega must be non-negative")

    @property
    def parity(self):
        return "odd" if self.l % 2 else "even"


def pulse_value(t, tau, l, omega):
    """Drive amplitude at times ``t`` (array), zero outside ``[0, tau]``."""
    t = np.asarray(t, dtype=float)
    first = omega * np.sin(TWO_PI * l * t / tau)
    second = -omega * np.sin(TWO_PI * l * (t - tau / 2) / tau)
    g = np.where(t < tau / 2, first, second)
    return np.where((t < 0) | (t > tau), 0.0, g)


@dataclass(frozen=True)
class PulseWaveform:
    times: np.ndarray
    values: np.ndarray
    tau: float
    l: int
    omega: float

    @property
    def sample_count(self):
        return len(self.times) - 1

    @property
    def max_angular_frequency(self):
        return TWO_PI * self.l / self.tau

    def evaluate(self, t):
        return pulse_value(t, self.tau, self.l, self.omega)

    def scaled(self, omega):
        """Same pulse at drive amplitude ``omega``."""
        if self.omega == 0:
            return waveform_from_params(self.tau, self.l, omega, self.sample_count)
        return PulseWaveform(self.times, self.values * (omega / self.omega),
                             self.tau, self.l, omega)


def waveform_from_params(tau, l, omega, sample_count=None) -> PulseWaveform:
    if sample_count is None:
        sample_count = 32 * l
    if sample_count % 2:
        raise ValueError("sample_count must be even")
    if sample_count < 2 * l:
        raise UndersampledError(
            f"{sample_count} samples cannot resolve tone index l={l} (need >= {2 * l})")
    half = sample_count // 2
    k = np.arange(half + 1)
    first = omega * np.sin(TWO_PI * l * k / sample_count)
    values = np.concatenate([first[:-1], -first])
    times = np.arange(sample_count + 1) * (tau / sample_count)
    times[half] = tau / 2
    return PulseWaveform(times, values, float(tau), int(l), float(omega))


def waveform(gate: GateSpec, sample_count=None) -> PulseWaveform:
    """Sample the gate pulse on ``sample_count + 1`` uniform points
    including both endpoints and ``tau/2``.

    The second half is stored as the exact negation of the first, so the
    half-period antisymmetry holds bit for bit.
    """
    return waveform_from_params(gate.tau, gate.l, gate.omega, sample_count)


def _mode_terms(k, l):
    k = np.asarray(k, dtype=float)
    resonant = 2 * k == l
    with np.errstate(divide="ignore", invalid="ignore"):
        regular = k / (4 * k**2 - l**2)
    return np.where(resonant, 3 / (8 * l), regular), resonant


def chi_coefficient(spectrum: ModeSpectrum, pair, tau, l, mec: MecAssignment | None = None):
    """``S`` such that the two-qubit phase is ``Omega^2 tau^2 S`` for an
    exactly closing spectrum."""
    if mec is None:
        mec = analyze(spectrum, tau)
    terms, _ = _mode_terms(mec.k, l)
    return float(np.sum(spectrum.pair_products(pair) * terms) / TWO_PI)


@dataclass(frozen=True)
class LScan:
    """``S(l)`` over a range of tone indices; rows are sorted by ``l``."""

    l: np.ndarray
    S: np.ndarray
    resonant: np.ndarray = field(repr=False)

    @property
    def abs_S(self):
        return np.abs(self.S)

    def best(self, parity=None, forbid_resonant=False):
        mask = np.ones(len(self.l), dtype=bool)
        if parity is not None:
            if parity not in ("odd", "even"):
                raise ValueError(f"parity must be 'odd' or 'even', got {parity!r}")
            mask &= (self.l % 2 == 1) if parity == "odd" else (self.l % 2 == 0)
        if forbid_resonant:
            mask &= ~self.resonant
        if not mask.any():
            raise ValueError("no candidate l left in range")
        candidates = np.flatnonzero(mask)
        # argmax returns the first maximum, i.e. the smaller l on ties
        return int(self.l[candidates[np.argmax(self.abs_S[candidates])]])

    def rows(self):
        for l, s in zip(self.l, self.S):
            yield int(l), ("odd" if l % 2 else "even"), float(s), abs(float(s))


def default_l_range(mec: MecAssignment, margin=40):
    return 2 * min(mec.k) - margin, 2 * max(mec.k) + margin


def scan_l(spectrum: ModeSpectrum, pair, tau, l_range=None) -> LScan:
    mec = analyze(spectrum, tau)
    lo, hi = default_l_range(mec) if l_range is None else l_range
    lo = max(int(lo), 1)
    ls = np.arange(lo, int(hi) + 1)
    if ls.size == 0:
        raise ValueError("empty l range")
    products = spectrum.pair_products(pair)
    S = np.empty(len(ls))
    resonant = np.zeros(len(ls), dtype=bool)
    for n, l in enumerate(ls):
        terms, res = _mode_terms(mec.k, l)
        S[n] = np.sum(products * terms) / TWO_PI
        resonant[n] = res.any()
    return LScan(ls, S, resonant)


def select_l(spectrum: ModeSpectrum, pair, tau, l_range=None, parity=None,
             forbid_resonant=False):
    """Tone index with the largest ``|S|`` (lowest drive power) within a
    parity class, plus the full table."""
    table = scan_l(spectrum, pair, tau, l_range)
    return table.best(parity, forbid_resonant), table


def calibrate_omega(S, tau, target_chi=FULL_ENTANGLING_CHI):
    if S == 0:
        raise UncoupledPairError("pair uncoupled at this l")
    if target_chi < 0:
        raise ValueError("target_chi must be non-negative")
    return float(np.sqrt(target_chi / (abs(S) * tau**2)))


def design_gate(spectrum: ModeSpectrum, pair, tau, l, *, target_chi=FULL_ENTANGLING_CHI,
                added_detuning=0.0) -> GateSpec:
    S = chi_coefficient(spectrum, pair, tau, l)
    omega = calibrate_omega(S, tau, target_chi)
    return GateSpec(tuple(pair), tau, l, omega, added_detuning, target_chi,
                    1 if S >= 0 else -1)
