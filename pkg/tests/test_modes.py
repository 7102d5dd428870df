import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modeforge.errors import ChainNotLinearError, ParticipationError
from modeforge.modes import (
    TrapConfig,
    equilibrium_positions,
    ideal_participation,
    lamb_dicke_matrix,
    measured_spectrum,
    mhz_to_angular,
    radial_mode_spectrum,
    _coulomb_forces,
)

TWO_PI = 2 * np.pi


def test_three_ion_positions_closed_form():
    # harmonic three-ion chain: u = (-(5/4)^(1/3), 0, (5/4)^(1/3))
    u = equilibrium_positions(TrapConfig.from_mhz(3, 0.5, 3.0))
    assert np.allclose(u, [-(1.25) ** (1 / 3), 0.0, 1.25 ** (1 / 3)], atol=1e-13)


@pytest.mark.parametrize("n", [2, 3, 5, 8, 12])
def test_equilibrium_residual_and_ordering(n):
    cfg = TrapConfig.from_mhz(n, 0.3, 4.0)
    u = equilibrium_positions(cfg)
    assert np.all(np.diff(u) > 0)
    assert np.max(np.abs(_coulomb_forces(u, 0.0))) < 1e-12


def test_quartic_correction_spreads_outer_ions_less():
    base = equilibrium_positions(TrapConfig.from_mhz(5, 0.3, 4.0))
    stiff = equilibrium_positions(TrapConfig.from_mhz(5, 0.3, 4.0, quartic_coeff=0.05))
    assert stiff[-1] < base[-1]


def test_zigzag_rejected():
    with pytest.raises(ChainNotLinearError):
        equilibrium_positions(TrapConfig.from_mhz(10, 1.0, 1.5))


@pytest.mark.parametrize("n", [2, 3, 4, 7])
def test_com_mode_is_uniform_and_at_trap_frequency(n):
    cfg = TrapConfig.from_mhz(n, 0.4, 3.036)
    spec = radial_mode_spectrum(cfg)
    assert spec.frequencies[-1] == pytest.approx(cfg.radial_com_freq, rel=1e-9)
    assert np.allclose(spec.participation[-1], 1 / np.sqrt(n), atol=1e-12)
    assert np.all(np.diff(spec.frequencies) > 0)


def test_three_ion_ideal_participation():
    b = ideal_participation(3)
    assert np.allclose(b[0], np.array([1, -2, 1]) / np.sqrt(6), atol=1e-12)
    assert np.allclose(b[1], np.array([1, 0, -1]) / np.sqrt(2), atol=1e-12)
    assert b[1, 1] == 0.0  # the tilt mode leaves the middle ion exactly still


def test_first_component_sign_convention():
    b = radial_mode_spectrum(TrapConfig.from_mhz(6, 0.3, 4.0)).participation
    assert np.all(b[:, 0] >= 0)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 9), ratio=st.floats(4.0, 20.0), quartic=st.floats(0.0, 0.02))
def test_participation_orthonormal(n, ratio, quartic):
    cfg = TrapConfig.from_mhz(n, 0.25, 0.25 * ratio * n / 3, quartic_coeff=quartic)
    b = radial_mode_spectrum(cfg).participation
    assert np.allclose(b @ b.T, np.eye(n), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(f=st.floats(0.5, 10.0))
def test_lamb_dicke_scales_as_inverse_sqrt_frequency(f):
    b = np.eye(1)
    eta1 = lamb_dicke_matrix([TWO_PI * f * 1e6], b)
    eta2 = lamb_dicke_matrix([TWO_PI * 2 * f * 1e6], b)
    assert eta1[0, 0] / eta2[0, 0] == pytest.approx(np.sqrt(2), rel=1e-12)


def test_lamb_dicke_magnitude_for_yb():
    # 355 nm counter-propagating Raman beams, 171Yb+ at 3 MHz: eta ~ 0.11 per ion
    eta = lamb_dicke_matrix([TWO_PI * 3e6], np.eye(1))[0, 0]
    assert 0.10 < eta < 0.12


def test_measured_spectrum_passthrough_and_sorting():
    spec = measured_spectrum(mhz_to_angular([3.036, 2.963, 3.005]))
    assert np.allclose(spec.frequencies / TWO_PI / 1e6, [2.963, 3.005, 3.036])
    assert np.allclose(spec.participation, ideal_participation(3))
    assert spec.lamb_dicke.shape == (3, 3)


def test_measured_spectrum_rejects_non_orthonormal():
    with pytest.raises(ParticipationError):
        measured_spectrum(mhz_to_angular([1.0, 2.0]), [[1.0, 0.0], [1.0, 1.0]])


def test_measured_spectrum_rejects_bad_frequency():
    with pytest.raises(ValueError):
        measured_spectrum([-1.0, 2.0])


def test_single_mode_identity_participation():
    spec = measured_spectrum([TWO_PI * 1e6], np.eye(1))
    assert spec.n_modes == 1 and spec.participation[0, 0] == 1.0


def test_with_frequencies_rescales_eta():
    spec = measured_spectrum(mhz_to_angular([1.0, 2.0]))
    doubled = spec.with_frequencies(2 * spec.frequencies)
    assert np.allclose(spec.lamb_dicke / doubled.lamb_dicke, np.sqrt(2))
    shifted = spec.shifted(1000.0)
    assert np.array_equal(shifted.lamb_dicke, spec.lamb_dicke)
    assert np.allclose(spec.frequencies - shifted.frequencies, 1000.0)


@pytest.mark.parametrize("kwargs", [dict(n_ions=1), dict(axial_freq=-1.0),
                                    dict(radial_com_freq=0.5)])
def test_trap_config_validation(kwargs):
    args = dict(n_ions=3, axial_freq=1.0, radial_com_freq=10.0)
    args.update(kwargs)
    with pytest.raises(ValueError):
        TrapConfig(**args)


def test_spectrum_arrays_are_read_only():
    spec = measured_spectrum(mhz_to_angular([1.0, 2.0]))
    with pytest.raises(ValueError):
        spec.frequencies[0] = 0.0
