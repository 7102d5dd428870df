import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import APPENDIX_TAU, MAIN_TAU
from modeforge.errors import KnobBoundsError
from modeforge.mec import analyze, find_gate_time, inverse_engineer, pair_mode_mask
from modeforge.modes import TrapConfig, measured_spectrum, radial_mode_spectrum

FOUR_PI = 4 * np.pi


def test_main_text_delta_k(main_spec):
    mec = analyze(main_spec, MAIN_TAU)
    # dk = f * tau / 2 - k with f in Hz
    expected = np.array([2.963e6, 3.005e6, 3.036e6]) * MAIN_TAU / 2 - np.array(mec.k)
    assert np.allclose(mec.delta_k, expected, atol=1e-9)
    assert np.allclose(mec.delta_k, [0.0036, 0.0293, 0.0006], atol=1e-4)
    assert mec.max_abs_delta_k == pytest.approx(0.0293, abs=1e-4)


def test_analyze_rejects_bad_tau(main_spec):
    with pytest.raises(ValueError):
        analyze(main_spec, 0.0)
    with pytest.raises(ValueError):
        analyze(main_spec, 1e-9)  # k_p would be 0


@settings(max_examples=40, deadline=None)
@given(k=st.lists(st.integers(1, 2000), min_size=1, max_size=5, unique=True),
       tau=st.floats(1e-5, 1e-3))
def test_exact_closure_gives_zero_delta_k(k, tau):
    k = sorted(k)
    spec = measured_spectrum(FOUR_PI * np.array(k) / tau, np.eye(len(k)))
    mec = analyze(spec, tau)
    assert mec.k == tuple(k)
    assert np.max(np.abs(mec.delta_k)) < 1e-9


def test_find_gate_time_main_text(main_spec):
    found = find_gate_time(main_spec, 150e-6, 200e-6, 0.05, pair=(0, 1))
    taus = np.array([m.tau for m in found])
    assert np.all(np.diff(taus) > 0)
    best = found[int(np.argmin(np.abs(taus - MAIN_TAU)))]
    # same closure basin as the published choice
    assert abs(best.tau - MAIN_TAU) < 5e-9
    assert best.k == (284, 288, 291)
    for m in found:
        weighted = m.delta_k[pair_mode_mask(main_spec, (0, 1))]
        assert np.max(np.abs(weighted)) <= 0.05


def test_find_gate_time_appendix(appendix_spec):
    found = find_gate_time(appendix_spec, 150e-6, 200e-6, 0.05)
    taus = np.array([m.tau for m in found])
    best = found[int(np.argmin(np.abs(taus - APPENDIX_TAU)))]
    assert abs(best.tau - APPENDIX_TAU) < 25e-9
    assert best.k == (286, 290, 293)
    assert all(m.max_abs_delta_k <= 0.05 for m in found)


def test_find_gate_time_commensurate():
    tau_star = 170e-6
    k = np.array([250, 256, 262])
    spec = measured_spectrum(FOUR_PI * k / tau_star)
    found = find_gate_time(spec, 150e-6, 190e-6, 0.01)
    hit = [m for m in found if abs(m.tau - tau_star) < 1e-12]
    assert hit and hit[0].max_abs_delta_k < 1e-9


def test_find_gate_time_empty_and_errors(main_spec):
    assert find_gate_time(main_spec, 150e-6, 150.001e-6, 1e-6) == []
    with pytest.raises(ValueError):
        find_gate_time(main_spec, 2e-4, 1e-4)
    with pytest.raises(ValueError):
        find_gate_time(main_spec, 1e-4, 2e-4, 0.6)


def test_pair_mask_drops_tilt_for_outer_middle_pair(main_spec):
    assert list(pair_mode_mask(main_spec, (0, 1))) == [True, False, True]
    assert list(pair_mode_mask(main_spec, (0, 2))) == [True, True, True]


@pytest.fixture(scope="module")
def trap():
    return TrapConfig.from_mhz(3, 0.6, 3.036, quartic_coeff=0.002)


def test_inverse_engineer_round_trip(trap):
    spec = radial_mode_spectrum(trap)
    x = spec.frequencies * MAIN_TAU / FOUR_PI
    targets = [(int(round(v)), FOUR_PI * round(v) / w) for v, w in zip(x, spec.frequencies)]
    start = TrapConfig.from_mhz(3, 0.606, 3.033)
    result = inverse_engineer(targets, start)
    assert result.residual < 1e-6 and not result.flagged
    check = radial_mode_spectrum(result.config).frequencies
    taus = np.array([t for _, t in targets])
    ks = np.array([k for k, _ in targets])
    assert np.max(np.abs(check * taus / FOUR_PI - ks)) < 1e-6


def test_inverse_engineer_no_targets(trap):
    result = inverse_engineer([], trap)
    assert result.config == trap and result.residual == 0.0
    assert inverse_engineer([None, None], trap).config == trap


def test_inverse_engineer_infeasible_is_flagged(trap):
    # a middle mode above the centre-of-mass mode cannot exist
    result = inverse_engineer([(284, MAIN_TAU), (300, MAIN_TAU), (291, MAIN_TAU)], trap,
                              max_iter=600)
    assert result.flagged and result.residual > 1.0
    radial_mode_spectrum(result.config)  # returned config is still a valid chain


def test_inverse_engineer_bounds(trap):
    with pytest.raises(KnobBoundsError):
        inverse_engineer([(284, MAIN_TAU)], trap, bounds={"quartic_coeff": (0.01, 0.02)})
    result = inverse_engineer([(280, MAIN_TAU), None, None], trap,
                              knobs=("radial_com_freq",),
                              bounds={"radial_com_freq": (trap.radial_com_freq * 0.99,
                                                          trap.radial_com_freq * 1.01)})
    lo, hi = trap.radial_com_freq * 0.99, trap.radial_com_freq * 1.01
    assert lo <= result.config.radial_com_freq <= hi
    with pytest.raises(ValueError):
        inverse_engineer([(280, MAIN_TAU)], trap, knobs=("voltage",))
