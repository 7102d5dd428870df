from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from conftest import MAIN_TAU
from modeforge.errors import TruncationError
from modeforge.modes import measured_spectrum
from modeforge.pulses import design_gate
from modeforge.simulate import (
    FidelityReport,
    displacement_matrix,
    fidelity_estimate,
    fit_parity_contrast,
    simulate_gate,
    spin_density_matrix,
    thermal_weights,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
I2 = np.eye(2)


def ladder(dim):
    return np.diag(np.sqrt(np.arange(1, dim)), 1)


@settings(max_examples=20, deadline=None)
@given(re=st.floats(-1.5, 1.5), im=st.floats(-1.5, 1.5))
def test_displacement_matrix_matches_expm(re, im):
    beta = complex(re, im)
    big = 80
    a = ladder(big)
    exact = expm(beta * a.conj().T - np.conj(beta) * a)[:12, :12]
    assert np.allclose(displacement_matrix(beta, 12), exact, atol=1e-12)


def test_displacement_columns_leak_for_large_beta():
    d = displacement_matrix(3.0, 6)
    assert 1 - np.sum(np.abs(d[:, 0]) ** 2) > 1e-2
    assert np.allclose(displacement_matrix(0.0, 5), np.eye(5))


def test_thermal_weights():
    assert np.array_equal(thermal_weights(0.0, 6), [1, 0, 0, 0, 0, 0, 0])
    w = thermal_weights(0.05, 10)
    assert w.sum() == pytest.approx(1.0)
    nbar = np.sum(np.arange(11) * w)
    assert nbar == pytest.approx(0.05, rel=1e-4)
    with pytest.raises(TruncationError):
        thermal_weights(2.0, 10)


def _one_mode_spectrum(eta_i, eta_j, nbar=0.0):
    spec = measured_spectrum([2 * np.pi * 3e6], np.eye(1), nbar=nbar)
    return replace(spec, participation=np.array([[0.6, 0.8]]),
                   lamb_dicke=np.array([[eta_i, eta_j]]))


@pytest.mark.parametrize("state", ["00", "01", "11"])
def test_spin_density_matches_full_space_propagator(state):
    eta_i, eta_j, A, chi = 0.07, -0.05, 3.0 - 4.0j, 0.3
    spec = _one_mode_spectrum(eta_i, eta_j)
    rho, leakage = spin_density_matrix(chi, np.array([A]), spec, (0, 1), n_max=20,
                                       initial_state=state)
    dim = 70
    a = ladder(dim)
    C = eta_i * np.kron(X, I2) + eta_j * np.kron(I2, X)
    gen = np.kron(C, -1j * A * a.conj().T - 1j * np.conj(A) * a)
    U = expm(gen) @ np.kron(expm(2j * chi * np.kron(X, X)), np.eye(dim))
    psi = np.zeros(4)
    psi[int(state, 2)] = 1
    vac = np.zeros(dim)
    vac[0] = 1
    out = (U @ np.kron(psi, vac)).reshape(4, dim)
    exact = out @ out.conj().T
    assert np.allclose(rho, exact, atol=1e-10)
    assert leakage < 1e-10


def test_thermal_state_matches_mixture():
    spec_hot = _one_mode_spectrum(0.07, 0.05, nbar=0.3)
    rho_hot, _ = spin_density_matrix(0.2, np.array([2.0]), spec_hot, (0, 1), n_max=25)
    w = thermal_weights(0.3, 25)
    # same mixture built from Fock-state inputs by brute force
    dim = 80
    a = ladder(dim)
    C = 0.07 * np.kron(X, I2) + 0.05 * np.kron(I2, X)
    U = expm(np.kron(C, -2j * a.conj().T - 2j * a)) @ np.kron(
        expm(0.4j * np.kron(X, X)), np.eye(dim))
    mix = np.zeros((4, 4), dtype=complex)
    for n, p in enumerate(w):
        if p == 0:
            continue
        fock = np.zeros(dim)
        fock[n] = 1
        out = (U @ np.kron([1, 0, 0, 0], fock)).reshape(4, dim)
        mix += p * out @ out.conj().T
    assert np.allclose(rho_hot, mix, atol=1e-6)


def test_ideal_gate_bell_state(exact_main):
    gate = design_gate(exact_main, (0, 1), MAIN_TAU, 569)
    r = simulate_gate(gate, exact_main, n_max=10)
    assert r.populations["00"] == pytest.approx(0.5, abs=1e-9)
    assert r.populations["11"] == pytest.approx(0.5, abs=1e-9)
    assert r.fidelity >= 0.999 and r.leakage < 1e-4
    assert sum(r.populations.values()) == pytest.approx(1.0, abs=1e-12)
    # parity oscillates twice over [0, 2 pi)
    spectrum = np.abs(np.fft.rfft(r.parity))
    assert np.argmax(spectrum[1:]) + 1 == 2
    assert len(r.parity_curve) == 24


def test_zero_drive_is_identity(exact_main):
    gate = replace(design_gate(exact_main, (0, 1), MAIN_TAU, 569), omega=0.0)
    r = simulate_gate(gate, exact_main)
    assert r.populations["00"] == pytest.approx(1.0)
    assert r.contrast == pytest.approx(0.0, abs=1e-12)
    assert r.fidelity == pytest.approx(0.5)


def test_truncation_error_for_hot_modes(exact_main):
    gate = design_gate(exact_main, (0, 1), MAIN_TAU, 569)
    hot = replace(exact_main, nbar=np.full(3, 3.0))
    with pytest.raises(TruncationError):
        simulate_gate(gate, hot, n_max=10)
    with pytest.raises(ValueError):
        simulate_gate(gate, exact_main, n_max=4)


def test_truncation_error_for_large_displacement():
    spec = _one_mode_spectrum(0.3, 0.3)
    with pytest.raises(TruncationError):
        spin_density_matrix(0.1, np.array([10.0]), spec, (0, 1), n_max=6)


def test_norm_preserved_off_closure(main_spec):
    gate = design_gate(main_spec, (0, 2), MAIN_TAU, 577)
    r = simulate_gate(gate, main_spec, n_max=10)
    assert sum(r.populations.values()) == pytest.approx(1.0, abs=max(r.leakage, 1e-12))
    assert 0 < r.odd_population < 0.1


def test_fidelity_arithmetic():
    assert fidelity_estimate(0.978, 0.958) == pytest.approx(0.968)
    report = FidelityReport.from_measurements(0.958, 0.978)
    assert report.fidelity == pytest.approx(0.968)
    assert report.odd_population == pytest.approx(0.022)


def test_contrast_fit_ignores_offset_and_phase():
    phis = 2 * np.pi * np.arange(24) / 24
    parity = 0.1 + 0.8 * np.cos(2 * phis + 0.7)
    assert fit_parity_contrast(phis, parity) == pytest.approx(0.8)


def test_initial_state_validation(exact_main):
    gate = design_gate(exact_main, (0, 1), MAIN_TAU, 569)
    with pytest.raises(ValueError):
        simulate_gate(gate, exact_main, initial_state="02")
