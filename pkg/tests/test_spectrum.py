import math

import numpy as np
import pytest

from polariton import (MediumParams, SingularityError, SteadyStateInputs,
                       ValidationError, absorption_profile,
                       b_field_to_detuning, calibrate_control, measure_fwhm,
                       steady_response, transmission, transmission_spectrum,
                       transparency_window)

TWO_PI = 2.0 * math.pi


def medium(**kw):
    base = dict(n=1e11, wavelength=7.95e-5, gamma_r=TWO_PI * 5.75,
                gamma_opt=TWO_PI * 50.0, gamma_0=1.0 / 150.0, L_cell=4.0)
    base.update(kw)
    return MediumParams(**base)


def scan_fwhm(inputs, span, n=20001):
    """Independent width oracle: dense scan + interpolated half crossings."""
    deltas = np.linspace(-span, span, n)
    t = np.array([transmission(SteadyStateInputs(
        medium=inputs.medium, omega_c=inputs.omega_c, delta=d)) for d in deltas])
    baseline = math.exp(-absorption_profile(inputs.medium).optical_depth)
    level = baseline + 0.5 * (t.max() - baseline)
    above = t >= level
    idx = np.where(above)[0]
    lo_i, hi_i = idx[0], idx[-1]
    x1 = np.interp(level, [t[lo_i - 1], t[lo_i]],
                   [deltas[lo_i - 1], deltas[lo_i]])
    x2 = np.interp(level, [t[hi_i + 1], t[hi_i]],
                   [deltas[hi_i + 1], deltas[hi_i]])
    return x2 - x1


class TestSteadyResponse:
    def test_ideal_dark_state_is_transparent(self):
        m = medium(gamma_0=0.0)
        k = steady_response(SteadyStateInputs(medium=m, omega_c=20.0))
        assert k == 0.0

    def test_no_control_reduces_to_two_level_absorption(self):
        # With the control off, intensity transmission is exp(-2*a*L) with
        # a = kappa/(gamma_opt*c) the amplitude coefficient, i.e.
        # exp(-optical_depth) in terms of the derived intensity constants.
        m = medium(n=1e9)
        derived = absorption_profile(m)
        for delta in (0.0, 5.0, 40.0):
            t = transmission(SteadyStateInputs(medium=m, omega_c=0.0,
                                               delta=delta))
            assert t == pytest.approx(math.exp(-derived.optical_depth),
                                      rel=1e-9)

    def test_passive_on_resonance(self):
        m = medium()
        for delta in np.linspace(-300.0, 300.0, 41):
            k = steady_response(SteadyStateInputs(medium=m, omega_c=15.0,
                                                  delta=delta))
            assert k.real <= 0.0

    def test_singularity_error(self):
        # only reachable with gamma_opt = gamma_0 = omega_c = 0
        m = MediumParams(n=1e11, wavelength=7.95e-5, gamma_r=TWO_PI * 5.75,
                         gamma_opt=0.0, gamma_0=0.0, L_cell=4.0)
        with pytest.raises(SingularityError):
            steady_response(SteadyStateInputs(medium=m, omega_c=0.0))


class TestTransmissionSpectrum:
    def test_rejects_empty_scan(self):
        with pytest.raises(ValidationError):
            transmission_spectrum([], SteadyStateInputs(medium=medium(),
                                                        omega_c=10.0))

    def test_single_point_near_unity_for_small_gamma0(self):
        m = medium(gamma_0=1e-8)
        curve = transmission_spectrum([0.0],
                                      SteadyStateInputs(medium=m,
                                                        omega_c=20.0))
        assert curve.transmission[0] == pytest.approx(1.0, abs=1e-4)

    def test_symmetric_scan_gives_symmetric_curve(self):
        inp = SteadyStateInputs(medium=medium(), omega_c=12.0)
        b = np.linspace(-60.0, 60.0, 121)
        curve = transmission_spectrum(b, inp)
        assert curve.transmission == pytest.approx(
            curve.transmission[::-1], rel=1e-12)

    def test_preserves_scan_order(self):
        inp = SteadyStateInputs(medium=medium(), omega_c=12.0)
        scan = [30.0, -10.0, 0.0]
        curve = transmission_spectrum(scan, inp)
        assert list(curve.b_field_mg) == scan

    def test_bounded_zero_one(self):
        inp = SteadyStateInputs(medium=medium(), omega_c=8.0)
        curve = transmission_spectrum(np.linspace(-200.0, 200.0, 101), inp)
        assert np.all(curve.transmission >= 0.0)
        assert np.all(curve.transmission <= 1.0)

    def test_flat_two_level_plateau_without_control(self):
        # gamma_opt much larger than the scanned detunings: flat to <1%.
        m = medium(n=1e9)
        curve = transmission_spectrum(
            np.linspace(-5.0, 5.0, 41),
            SteadyStateInputs(medium=m, omega_c=0.0))
        spread = curve.transmission.max() - curve.transmission.min()
        assert spread < 0.01 * curve.transmission.mean()


class TestResonanceShape:
    def test_maximal_at_zero_detuning(self):
        inp = SteadyStateInputs(medium=medium(), omega_c=12.0)
        curve = transmission_spectrum(np.linspace(-100.0, 100.0, 201), inp)
        assert np.argmax(curve.transmission) == 100

    def test_t0_improves_as_gamma0_shrinks(self):
        ts = [transmission(SteadyStateInputs(medium=medium(gamma_0=g),
                                             omega_c=10.0))
              for g in (1e-1, 1e-2, 1e-3, 1e-4)]
        assert ts == sorted(ts)
        assert ts[-1] > 0.98

    def test_stronger_control_never_hurts_peak_transmission(self):
        ts = [transmission(SteadyStateInputs(medium=medium(), omega_c=w))
              for w in (2.0, 5.0, 10.0, 30.0)]
        assert ts == sorted(ts)


class TestWidthAndCalibration:
    def test_measured_fwhm_matches_scan_oracle(self):
        inp = SteadyStateInputs(medium=medium(), omega_c=15.0)
        fast = measure_fwhm(inp)
        slow = scan_fwhm(inp, span=8.0 * fast)
        assert fast == pytest.approx(slow, rel=1e-3)

    def test_calibration_hits_15_khz(self, paper_medium):
        target = TWO_PI * 0.015
        omega_c = calibrate_control(paper_medium, target)
        got = measure_fwhm(SteadyStateInputs(medium=paper_medium,
                                             omega_c=omega_c))
        assert got == pytest.approx(target, rel=1e-8)
        # independent scan-based verification
        assert scan_fwhm(SteadyStateInputs(medium=paper_medium,
                                           omega_c=omega_c),
                         span=8.0 * target) == pytest.approx(target, rel=1e-3)

    def test_window_estimate_scalings(self):
        w = transparency_window(10.0, 60.0, 100.0)
        assert transparency_window(20.0, 60.0, 100.0) == pytest.approx(
            4.0 * w, rel=1e-12)
        assert transparency_window(10.0, 60.0, 400.0) == pytest.approx(
            w / 2.0, rel=1e-12)
        with pytest.raises(ValidationError):
            transparency_window(10.0, 60.0, 0.0)

    def test_window_estimate_within_factor_3_of_fwhm(self):
        # 100x sweep of omega_c^2/gamma_opt^2 around the operating point.
        m = medium(gamma_0=0.0)
        depth = absorption_profile(m).optical_depth
        for w in (3.0, 6.0, 10.0, 17.0, 30.0):
            est = transparency_window(w, m.gamma_opt, depth)
            got = measure_fwhm(SteadyStateInputs(medium=m, omega_c=w))
            assert est / 3.0 < got < est * 3.0


class TestBFieldAxis:
    def test_delta_axis_matches_bfield_axis(self):
        inp = SteadyStateInputs(medium=medium(), omega_c=12.0)
        b = np.array([-20.0, 0.0, 20.0])
        by_b = transmission_spectrum(b, inp, axis="b_field")
        by_d = transmission_spectrum([b_field_to_detuning(x) for x in b],
                                     inp, axis="delta")
        assert by_b.transmission == pytest.approx(by_d.transmission,
                                                  rel=1e-12)
