import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import kstest

from cavem.fitting import get_model, nls_fit
from cavem.tls import (
    DEBYE,
    StrainMode,
    TelegraphFluctuator,
    TLSLinewidthModel,
    TLSParams,
    dipole_coupling,
    saturable_linewidth,
    stark_shift,
    strain_coupling,
    strain_coupling_report,
    strain_zpf,
    telegraph_trace,
    tls_energy,
)
from cavem.units import angular

EV = 1.602176634e-19


class TestEnergyAndStark:
    def test_symmetric_tls(self):
        params = TLSParams(delta_tunneling=2e-24, epsilon_asym=0.0, ratio_eps_over_E=0.0)
        assert tls_energy(params) == 2e-24
        assert stark_shift(params, 5e6) == 0.0

    def test_energy_dominated_by_larger_scale(self):
        params = TLSParams(delta_tunneling=3e-24, epsilon_asym=4e-24)
        assert tls_energy(params) == pytest.approx(5e-24, rel=1e-12)
        assert tls_energy(params) >= abs(params.delta_tunneling)
        assert tls_energy(params) >= abs(params.epsilon_asym)

    def test_steep_tuning_rate(self):
        # 2 * 0.5 * (1 Debye) * 5e6 V/m / h, about 25 GHz of shift
        params = TLSParams(delta_tunneling=1e-24, epsilon_asym=1e-24)
        shift = stark_shift(params, 5e6)
        assert shift == pytest.approx(25.17e9, rel=1e-3)
        assert abs(shift - 25e9) / 25e9 < 0.02

    @given(st.floats(min_value=-1e7, max_value=1e7))
    def test_linear_in_field(self, field):
        params = TLSParams(delta_tunneling=1e-24, epsilon_asym=1e-24)
        assert stark_shift(params, field) == pytest.approx(
            field * stark_shift(params, 1.0), rel=1e-12, abs=1e-12
        )

    def test_ratio_bounds(self):
        with pytest.raises(ValueError):
            TLSParams(delta_tunneling=1e-24, epsilon_asym=0.0, ratio_eps_over_E=1.5)


class TestStrain:
    def test_zero_point_strain_value(self):
        mode = StrainMode(omega_m=angular(5.087e9))
        s = strain_zpf(mode)
        assert s == pytest.approx(4.06e-8, rel=1e-2)
        assert abs(s - 4e-8) / 4e-8 < 0.05

    def test_quadrupled_volume_halves_strain(self):
        mode = StrainMode(omega_m=angular(5.087e9))
        big = StrainMode(omega_m=angular(5.087e9), strain_mode_volume=4 * mode.strain_mode_volume)
        assert strain_zpf(big) == pytest.approx(strain_zpf(mode) / 2, rel=1e-12)

    def test_coupling_band_brackets_both_conventions(self):
        params = TLSParams(delta_tunneling=1e-24, epsilon_asym=1e-24)
        mode = StrainMode(omega_m=angular(5.087e9))
        report = strain_coupling_report(params, mode)
        assert report["lambda_hz"] == pytest.approx(7.4e6, rel=0.01)
        assert report["lambda_hz_no_ratio"] == pytest.approx(2 * report["lambda_hz"], rel=1e-12)
        assert report["band_low_hz"] <= 13e6 <= report["band_high_hz"]
        assert 7e6 <= report["band_low_hz"] and report["band_high_hz"] <= 15e6

    def test_zero_strain_zero_coupling(self):
        params = TLSParams(delta_tunneling=1e-24, epsilon_asym=1e-24)
        assert strain_coupling(params, 0.0) == 0.0

    def test_dipole_coupling_value(self):
        params = TLSParams(delta_tunneling=1e-24, epsilon_asym=1e-24)
        g = dipole_coupling(params, 50.0)
        assert g == pytest.approx(DEBYE * 50.0 / 6.62607015e-34, rel=1e-9)
        assert abs(g - 250e3) / 250e3 < 0.05

    @given(st.floats(min_value=0, max_value=1e4))
    def test_dipole_coupling_linear(self, field):
        params = TLSParams(delta_tunneling=1e-24, epsilon_asym=1e-24)
        assert dipole_coupling(params, field) == pytest.approx(
            field * dipole_coupling(params, 1.0), rel=1e-12, abs=1e-15
        )


class TestSaturableLinewidth:
    def _model(self, T=0.02):
        return TLSLinewidthModel(
            F=1.0, gamma_tls=100e3, n_c=30.0, beta=1.0, gamma_0=30e3,
            T=T, omega=angular(5.296e9),
        )

    def test_saturates_to_residual(self):
        model = self._model()
        assert saturable_linewidth(model, 1e12) == pytest.approx(30e3, rel=1e-3)

    def test_unsaturated_cold_limit(self):
        model = self._model(T=1e-6)
        assert saturable_linewidth(model, 0.0) == pytest.approx(
            model.F * model.gamma_tls + model.gamma_0, rel=1e-9
        )

    def test_as_printed_variant_grows_with_power(self):
        model = self._model()
        lo = saturable_linewidth(model, 0.0, variant="as-printed")
        hi = saturable_linewidth(model, 1e4, variant="as-printed")
        assert hi > lo

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError, match="variant"):
            saturable_linewidth(self._model(), 1.0, variant="banana")

    def test_negative_phonons_rejected(self):
        with pytest.raises(ValueError):
            saturable_linewidth(self._model(), -1.0)

    def test_monotone_and_bounded(self):
        model = self._model()
        n = np.logspace(-2, 8, 200)
        gam = saturable_linewidth(model, n)
        assert np.all(np.diff(gam) <= 1e-12)
        assert np.all(gam >= model.gamma_0 - 1e-12)

    def test_synthetic_power_sweep_recovers_residual_linewidth(self):
        """Fit a synthetic saturation dataset and recover gamma_0 near 30 kHz."""
        model = self._model()
        n = np.logspace(0, 4.5, 40)
        truth = saturable_linewidth(model, n)
        rng = np.random.default_rng(17)
        data = truth * (1 + 0.03 * rng.standard_normal(n.size))
        fit_model = get_model("tls_saturation")
        fit = nls_fit(fit_model, n, data, fit_model.guess(n, data))
        assert fit.converged
        assert fit["gamma_0"] == pytest.approx(30e3, rel=0.15)


class TestTelegraph:
    def test_frozen_ground_state(self):
        tf = TelegraphFluctuator(rate_up=0.0, rate_down=1e3, dispersive_shift=2e3)
        _, freqs = telegraph_trace(tf, 5.087e9, duration=0.1, dt=1e-4, seed=1)
        assert np.all(freqs == 5.087e9)

    def test_deterministic_under_seed(self):
        tf = TelegraphFluctuator(rate_up=1e3, rate_down=1e3, dispersive_shift=2e3)
        t1, f1 = telegraph_trace(tf, 5.087e9, duration=0.05, dt=1e-5, seed=7)
        t2, f2 = telegraph_trace(tf, 5.087e9, duration=0.05, dt=1e-5, seed=7)
        np.testing.assert_array_equal(f1, f2)
        np.testing.assert_array_equal(t1, t2)

    def test_equal_rates_occupancy_one_half(self):
        tf = TelegraphFluctuator(rate_up=1e3, rate_down=1e3, dispersive_shift=1.0)
        _, freqs = telegraph_trace(tf, 0.0, duration=50.0, dt=5e-5, seed=3)
        occupancy = freqs.mean()
        assert abs(occupancy - 0.5) < 0.01

    def test_stationary_occupancy_within_3_sigma(self):
        # time-average variance of a telegraph signal: 2 p q tau_c / T per
        # unit variance, with tau_c = 1/(r_up + r_down)
        tf = TelegraphFluctuator(rate_up=2e3, rate_down=1e3, dispersive_shift=1.0)
        duration = 30.0
        _, freqs = telegraph_trace(tf, 0.0, duration=duration, dt=2e-5, seed=11)
        p = tf.excited_probability
        tau_c = 1.0 / (tf.rate_up + tf.rate_down)
        sigma = math.sqrt(2.0 * p * (1 - p) * tau_c / duration)
        assert abs(freqs.mean() - p) < 3 * sigma

    def test_dwell_times_exponential(self):
        dt = 1e-6
        tf = TelegraphFluctuator(rate_up=1e3, rate_down=1e3, dispersive_shift=1.0)
        _, freqs = telegraph_trace(tf, 0.0, duration=10.0, dt=dt, seed=5)
        # dwell durations in the ground state, excluding the truncated last run;
        # uniform jitter removes the sampling-grid quantization the KS test
        # would otherwise flag
        edges = np.flatnonzero(np.diff(freqs) != 0) + 1
        lengths = np.diff(np.concatenate(([0], edges)))
        ground = freqs[np.concatenate(([0], edges[:-1]))] == 0.0
        rng = np.random.default_rng(0)
        dwells = lengths[ground] * dt + rng.uniform(-dt / 2, dt / 2, ground.sum())
        assert dwells.size > 1000
        stat = kstest(dwells, "expon", args=(0, 1.0 / tf.rate_up))
        assert stat.pvalue > 0.01

    def test_warns_when_dt_too_coarse(self):
        tf = TelegraphFluctuator(rate_up=1e3, rate_down=1e3, dispersive_shift=1.0)
        with pytest.warns(UserWarning, match="dt"):
            telegraph_trace(tf, 0.0, duration=1.0, dt=1e-3, seed=0)

    def test_rates_validated(self):
        with pytest.raises(ValueError):
            TelegraphFluctuator(rate_up=-1.0, rate_down=1.0, dispersive_shift=1.0)
        with pytest.raises(ValueError):
            TelegraphFluctuator(rate_up=0.0, rate_down=0.0, dispersive_shift=1.0)
