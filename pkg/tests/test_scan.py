from dataclasses import replace

import numpy as np
import pytest

from conftest import MAIN_TAU
from modeforge.pulses import design_gate
from modeforge.scan import (
    ScanResult,
    detuning_scan,
    fit_mode_frequencies,
    log_slope,
    predicted_odd_population,
    scaling_slope,
    symmetric_offsets,
)

TWO_PI = 2 * np.pi


def test_zero_offset_exact_closure(exact_main):
    gate = design_gate(exact_main, (0, 1), MAIN_TAU, 569)
    scan = detuning_scan(gate, exact_main, [0.0])
    assert scan.odd_population[0] < 1e-6
    assert scan.omega_calibrated[0] == pytest.approx(gate.omega, rel=1e-6)
    assert not scan.flagged.any()


def test_recalibrated_scan_columns(exact_main):
    gate = design_gate(exact_main, (0, 1), MAIN_TAU, 570)
    offsets = TWO_PI * np.array([-500.0, 500.0])
    scan = detuning_scan(gate, exact_main, offsets)
    assert np.all(scan.omega_calibrated != gate.omega)
    assert np.allclose(scan.scaled_odd_population, scan.odd_population / scan.omega_calibrated**2)
    # odd population follows 1.25 alpha at leading order
    assert np.allclose(scan.odd_population, 1.25 * scan.alpha, rtol=0.05)


def test_scan_without_recalibration_keeps_drive(exact_main):
    gate = design_gate(exact_main, (0, 2), MAIN_TAU, 577)
    scan = detuning_scan(gate, exact_main, symmetric_offsets(200, 400, 3), recalibrate=False,
                         simulate=False)
    assert np.all(scan.omega_calibrated == gate.omega)
    assert np.allclose(scan.odd_population, 1.25 * scan.alpha)
    assert len(scan) == 6


def test_scan_rejects_non_finite_offsets(exact_main):
    gate = design_gate(exact_main, (0, 1), MAIN_TAU, 569)
    with pytest.raises(ValueError):
        detuning_scan(gate, exact_main, [np.nan])


def test_scan_flags_failed_rows(exact_main):
    gate = design_gate(exact_main, (0, 1), MAIN_TAU, 569)
    hot = replace(exact_main, nbar=np.full(3, 5.0))
    scan = detuning_scan(gate, hot, [0.0, TWO_PI * 100])
    assert scan.flagged.all() and np.isnan(scan.odd_population).all()


def test_log_slope():
    x = np.geomspace(1, 10, 7)
    assert log_slope(x, 3 * x**2.5) == pytest.approx(2.5)
    assert log_slope(-x, x**2) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        log_slope([1.0], [1.0])


def test_slope_with_recalibration_odd(exact_main):
    gate = design_gate(exact_main, (0, 1), MAIN_TAU, 569)
    scan = detuning_scan(gate, exact_main, symmetric_offsets(100, 1000, 6), simulate=False)
    assert 1.9 <= scaling_slope(scan) <= 2.1


def test_scan_result_length_check(exact_main):
    gate = design_gate(exact_main, (0, 1), MAIN_TAU, 569)
    with pytest.raises(ValueError):
        ScanResult(gate, [0.0, 1.0], [1.0], [0.0], [0.0])


def _scans(truth, noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for pair, l in [((0, 1), 569), ((0, 1), 570), ((0, 2), 577), ((0, 2), 578)]:
        gate = design_gate(truth, pair, MAIN_TAU, l)
        scan = detuning_scan(gate, truth, TWO_PI * np.linspace(-2000, 2000, 21),
                             recalibrate=False, simulate=False)
        clean = predicted_odd_population(truth.frequencies, truth, scan)
        out.append(replace(scan, odd_population=clean * (1 + noise * rng.standard_normal(21))))
    return out


def test_model_matches_analytic_alpha(main_spec):
    scan = _scans(main_spec)[0]
    assert np.allclose(predicted_odd_population(main_spec.frequencies, main_spec, scan),
                       1.25 * scan.alpha, rtol=1e-12)


def test_fit_zero_noise_recovers_truth(main_spec):
    start = main_spec.frequencies + TWO_PI * np.array([3.2e3, -4.1e3, 2.7e3])
    fit = fit_mode_frequencies(_scans(main_spec), main_spec.with_frequencies(start))
    assert not fit.degenerate
    assert np.max(np.abs(fit.frequencies - main_spec.frequencies)) < TWO_PI * 1.0


def test_fit_absolute_residual_option(main_spec):
    start = main_spec.frequencies + TWO_PI * np.array([1e3, -1e3, 1e3])
    fit = fit_mode_frequencies(_scans(main_spec), start, residual="absolute")
    assert np.max(np.abs(fit.frequencies - main_spec.frequencies)) < TWO_PI * 1.0
    with pytest.raises(ValueError):
        fit_mode_frequencies(_scans(main_spec), start, residual="cubic")


def test_fit_degenerate_cases(main_spec):
    scans = _scans(main_spec)
    single = fit_mode_frequencies(scans[:1], main_spec)
    assert single.degenerate
    flat = replace(scans[0], omega_calibrated=np.zeros(21), odd_population=np.zeros(21))
    assert fit_mode_frequencies([flat], main_spec).degenerate
    assert fit_mode_frequencies([flat, flat], main_spec).degenerate
