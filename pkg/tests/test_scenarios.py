import math

import numpy as np
import pytest

from polariton import (SCENARIOS, SweepSpec, ValidationError, get_scenario,
                       run_scenario, run_sweep)

TWO_PI = 2.0 * math.pi

#: cheap overrides: shallow medium and a narrow optical line so the
#: stability-limited time step is ten times larger than the defaults
MILD = {
    "medium.n": 1e10,
    "medium.gamma_opt": TWO_PI * 10.0,
    "pulse.peak_time": 46.0,
    "pulse.fwhm": 10.0,
    "grid.nz": 128.0,
}

MILD_STORAGE = dict(MILD, **{"schedule.t0": 75.0})


class TestRegistry:
    def test_builtin_names(self):
        expected = {"spectrum-fig1b", "storage-50us", "storage-100us",
                    "storage-200us", "slow-light", "cw-eit-weak",
                    "ideal-storage"}
        assert expected <= set(SCENARIOS)
        assert all(SCENARIOS[n].description for n in expected)

    def test_unknown_scenario_rejected(self):
        with pytest.raises(ValidationError, match="unknown scenario"):
            get_scenario("no-such-thing")

    def test_unknown_override_rejected(self):
        with pytest.raises(ValidationError, match="not resolvable"):
            run_scenario("storage-50us", overrides={"medium.bogus": 1.0})


class TestScenarioRuns:
    def test_storage_run_is_deterministic(self):
        o = dict(MILD_STORAGE, **{"schedule.tau": 30.0})
        r1 = run_scenario("storage-50us", overrides=o)
        r2 = run_scenario("storage-50us", overrides=o)
        assert r1.observables == r2.observables
        assert np.array_equal(r1.run.intensity, r2.run.intensity)

    def test_spectrum_scenario(self):
        res = run_scenario("spectrum-fig1b")
        curve = res.curve
        mid = len(curve.b_field_mg) // 2
        assert curve.b_field_mg[mid] == 0.0
        assert np.argmax(curve.transmission) == mid
        assert res.observables["fwhm_khz"] == pytest.approx(15.0, rel=1e-6)

    def test_polariton_oracle_attached(self):
        o = dict(MILD_STORAGE, **{"medium.n": 1e11,
                          "medium.gamma_opt": TWO_PI * 6.0,
                          "schedule.t0": 104.0,
                          "pulse.peak_time": 68.0,
                          "pulse.fwhm": 15.0})
        res = run_scenario("ideal-storage", overrides=o)
        assert {"l2_error", "analytic_energy", "numeric_energy",
                "stored_fraction"} <= set(res.oracle)
        assert res.oracle["l2_error"] < 0.5
        assert res.oracle["stored_fraction"] > 0.99


class TestSweeps:
    def test_spec_validation(self):
        with pytest.raises(ValidationError):
            SweepSpec(scenario="storage-50us", axis="schedule.tau",
                      values=())
        with pytest.raises(ValidationError):
            SweepSpec(scenario="storage-50us", axis="nope.nope",
                      values=(1.0,))
        with pytest.raises(ValidationError):
            SweepSpec(scenario="storage-50us", axis="schedule.tau",
                      values=(1.0,), metric="banana")
        with pytest.raises(ValidationError):
            SweepSpec(scenario="storage-50us", axis="schedule.tau",
                      values=(1.0,), overrides={"bad.path": 0.0})

    def test_failed_point_identifies_value(self):
        spec = SweepSpec(scenario="storage-50us", axis="schedule.tau",
                         values=(30.0, -5.0), metric="efficiency",
                         overrides=MILD_STORAGE)
        with pytest.raises(ValidationError, match="tau=-5.0"):
            run_sweep(spec)

    def test_tau_sweep_fit_recovers_lifetime(self):
        spec = SweepSpec(scenario="storage-50us", axis="schedule.tau",
                         values=(30.0, 80.0, 130.0), metric="efficiency",
                         overrides=MILD_STORAGE)
        out = run_sweep(spec)
        assert np.all(np.diff(out.metrics) < 0.0)
        assert out.fit["decay_constant_us"] == pytest.approx(150.0,
                                                             rel=1e-6)
        assert out.fit["r2"] > 0.999999

    def test_gamma0_zero_efficiency_tau_independent(self):
        spec = SweepSpec(scenario="storage-50us", axis="schedule.tau",
                         values=(20.0, 70.0), metric="efficiency",
                         overrides=dict(MILD_STORAGE, **{"medium.gamma_0": 0.0}))
        out = run_sweep(spec)
        assert out.metrics[1] == pytest.approx(out.metrics[0], rel=0.01)

    def test_parallel_matches_serial(self):
        spec = SweepSpec(scenario="storage-50us", axis="schedule.tau",
                         values=(30.0, 60.0), metric="efficiency",
                         overrides=MILD_STORAGE)
        serial = run_sweep(spec, parallel=1)
        threaded = run_sweep(spec, parallel=2)
        assert np.array_equal(serial.metrics, threaded.metrics)
        assert list(serial.values) == [30.0, 60.0]

    def test_empty_medium_limit(self):
        # density -> 0: no delay, full transmission
        o = dict(MILD, **{"grid.t_max": 160.0, "schedule.omega_c": 10.0,
                          "medium.n": 1.0})
        res = run_scenario("slow-light", overrides=o)
        assert res.observables["delay_us"] == pytest.approx(0.0, abs=0.05)
        assert res.observables["transmission"] == pytest.approx(1.0,
                                                                abs=1e-6)

    def test_delay_scales_inverse_with_control_intensity(self):
        # group delay tracks 1/omega_c^2 while omega_c^2 << kappa
        base = dict(MILD, **{"medium.n": 1e11, "grid.t_max": 180.0})
        omegas = (15.0, 20.0, 30.0)
        delays = []
        for w in omegas:
            o = dict(base, **{"schedule.omega_c": w})
            res = run_scenario("slow-light", overrides=o)
            delays.append(res.observables["delay_us"])
        x = np.array([1.0 / w**2 for w in omegas])
        y = np.array(delays)
        slope, intercept = np.polyfit(x, y, 1)
        pred = slope * x + intercept
        r2 = 1.0 - np.sum((y - pred)**2) / np.sum((y - y.mean())**2)
        assert r2 > 0.99
