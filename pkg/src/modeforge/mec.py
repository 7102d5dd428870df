"""Gate times that make every mode close its phase-space loop.

A mode closes at the gate end when ``omega_p * tau / (4 pi)`` is an integer
``k_p``; the fractional remainder ``delta_k_p`` measures the miss.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .errors import ChainNotLinearError, EquilibriumNotFoundError, KnobBoundsError, RadialInstabilityError
from .modes import ModeSpectrum, TrapConfig, radial_mode_spectrum

FOUR_PI = 4 * np.pi


@dataclass(frozen=True)
class MecAssignment:
    tau: float
    k: tuple
    delta_k: np.ndarray

    @property
    def max_abs_delta_k(self):
        return float(np.max(np.abs(self.delta_k)))


def analyze(spectrum: ModeSpectrum, tau: float) -> MecAssignment:
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    x = np.asarray(spectrum.frequencies) * tau / FOUR_PI
    k = np.rint(x)
    if np.any(k < 1):
        raise ValueError("gate time too short: some mode has k_p = 0")
    return MecAssignment(float(tau), tuple(int(v) for v in k), x - k)


def pair_mode_mask(spectrum: ModeSpectrum, pair, threshold=0.01):
    """Modes whose ``|eta_i eta_j|`` is at least ``threshold`` times the
    largest one; the others cannot couple the pair's spins."""
    w = np.abs(spectrum.pair_products(pair))
    return w >= threshold * w.max()


def _closure_objective(frequencies, taus):
    x = np.multiply.outer(taus, frequencies) / FOUR_PI
    return np.max(np.abs(x - np.rint(x)), axis=-1)


def _refine_vertex(freqs, lo, hi):
    """Exact minimizer of ``max_p |a_p tau - k_p|`` on ``[lo, hi]``.

    With the integers fixed the objective is a maximum of V-shaped linear
    pieces (slopes ``+-a_p``, ``a_p = omega_p / 4 pi``), so the minimum sits
    either on the zero of one piece or where a rising piece crosses a
    falling one. All such vertices inside the bracket are evaluated.
    """
    a = freqs / FOUR_PI
    mid = 0.5 * (lo + hi)
    k = np.rint(a * mid)
    zeros = k / a
    crossings = (k[:, None] + k[None, :]) / (a[:, None] + a[None, :])
    cand = np.concatenate([zeros, crossings.ravel(), [lo, hi]])
    cand = cand[(cand >= lo) & (cand <= hi)]
    values = _closure_objective(freqs, cand)
    best = int(np.argmin(values))
    return float(cand[best]), float(values[best])


def find_gate_time(spectrum: ModeSpectrum, tau_min, tau_max, max_abs_delta_k=0.05, *,
                   pair=None, weight_threshold=0.01, grid_step=None):
    """All local minimizers of ``max_p |delta_k_p|`` in ``[tau_min, tau_max]``
    that meet the tolerance, sorted by gate time.

    A uniform grid brackets the local minima; each is then located exactly
    by :func:`_refine_vertex`.

    With ``pair`` given, modes with negligible ``|eta_i eta_j|`` (see
    :func:`pair_mode_mask`) are left out of the objective; the returned
    assignments still report every mode.
    """
    if not 0 < tau_min < tau_max:
        raise ValueError("need 0 < tau_min < tau_max")
    if not 0 < max_abs_delta_k < 0.5:
        raise ValueError("max_abs_delta_k must lie in (0, 0.5)")
    freqs = np.asarray(spectrum.frequencies)
    if pair is not None:
        freqs = freqs[pair_mode_mask(spectrum, pair, weight_threshold)]
    step = tau_max * 1e-5 if grid_step is None else grid_step
    # The objective has kinks spaced by 4 pi / (2 omega_max); the grid must resolve them.
    step = min(step, FOUR_PI / (8 * freqs.max()))
    taus = np.linspace(tau_min, tau_max, int(np.ceil((tau_max - tau_min) / step)) + 1)
    obj = _closure_objective(freqs, taus)

    interior = np.arange(1, len(taus) - 1)
    is_min = (obj[interior] <= obj[interior - 1]) & (obj[interior] <= obj[interior + 1])
    results = []
    last_tau = -np.inf
    for i in interior[is_min]:
        if obj[i] > max_abs_delta_k + 2 * step * freqs.max() / FOUR_PI:
            continue
        tau, value = _refine_vertex(freqs, taus[i - 1], taus[i + 1])
        if value > obj[i]:
            tau, value = float(taus[i]), float(obj[i])
        if value > max_abs_delta_k or tau - last_tau < step / 2:
            continue
        results.append(analyze(spectrum, tau))
        last_tau = tau
    return results


@dataclass(frozen=True)
class InverseResult:
    config: TrapConfig
    residual: float
    flagged: bool
    n_evaluations: int


KNOBS = ("axial_freq", "radial_com_freq", "quartic_coeff")


def _default_bounds(config):
    return {
        "axial_freq": (0.25 * config.axial_freq, 4.0 * config.axial_freq),
        "radial_com_freq": (0.5 * config.radial_com_freq, 2.0 * config.radial_com_freq),
        "quartic_coeff": (-0.05, 0.05),
    }


def inverse_engineer(targets, config: TrapConfig, knobs=KNOBS, bounds=None, *,
                     residual_threshold=1e-6, max_iter=20000) -> InverseResult:
    """Tune trap knobs so the radial modes hit integer closure targets.

    ``targets`` is a sequence of ``(k_p, tau_p)`` pairs, one per mode in
    ascending frequency order (``None`` skips a mode). Minimizes
    ``sum_p delta_k_p^2`` with Nelder-Mead; unstable or out-of-bounds
    trial configurations are rejected by a penalty, so the returned config
    always satisfies the trap invariants. ``residual`` is
    ``sqrt(sum_p delta_k_p^2)``.
    """
    targets = list(targets)
    if not any(t is not None for t in targets):
        return InverseResult(config, 0.0, False, 0)
    if len(targets) > config.n_ions:
        raise ValueError("more targets than modes")
    knobs = tuple(knobs)
    unknown = set(knobs) - set(KNOBS)
    if unknown:
        raise ValueError(f"unknown knobs {sorted(unknown)}")
    all_bounds = _default_bounds(config)
    all_bounds.update(bounds or {})
    lo = np.array([all_bounds[k][0] for k in knobs])
    hi = np.array([all_bounds[k][1] for k in knobs])
    x0 = np.array([getattr(config, k) for k in knobs], dtype=float)
    if np.any(x0 < lo) or np.any(x0 > hi):
        raise KnobBoundsError("knob out of bounds: initial configuration violates bounds")

    idx = np.array([p for p, t in enumerate(targets) if t is not None])
    k_t = np.array([targets[p][0] for p in idx], dtype=float)
    tau_t = np.array([targets[p][1] for p in idx], dtype=float)
    # Frequencies are searched in relative units, the quartic term in absolute ones.
    scale = np.array([x if k != "quartic_coeff" else 0.01 for k, x in zip(knobs, x0)])

    def build(z):
        return z * scale

    def delta_k(values):
        cfg = _with_knobs(config, knobs, values)
        spec = radial_mode_spectrum(cfg)
        return spec.frequencies[idx] * tau_t / FOUR_PI - k_t

    penalty = 1e6

    def objective(z):
        values = build(z)
        if np.any(values < lo) or np.any(values > hi):
            return penalty * (1 + np.sum(np.maximum(lo - values, 0) + np.maximum(values - hi, 0)))
        try:
            return float(np.sum(delta_k(values) ** 2))
        except (ValueError, ChainNotLinearError, EquilibriumNotFoundError, RadialInstabilityError):
            return penalty

    z0 = x0 / scale
    res = minimize(objective, z0, method="Nelder-Mead",
                   options={"xatol": 1e-13, "fatol": 1e-20, "maxiter": max_iter,
                            "maxfev": max_iter, "adaptive": True})
    best = build(res.x)
    if objective(res.x) >= penalty:
        best, fun = x0, objective(z0)
    else:
        fun = objective(res.x)
    residual = float(np.sqrt(fun))
    out = _with_knobs(config, knobs, best)
    return InverseResult(out, residual, residual > residual_threshold, int(res.nfev))


def _with_knobs(config, knobs, values):
    return replace(config, **{k: float(v) for k, v in zip(knobs, values)})
