import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.constants import epsilon_0

from cavem.electrostatics import (
    ParallelPlateActuator,
    coupling_scaling,
    equilibrium_gap,
    leakage_fit,
    pull_in_voltage,
    stiffness_from_pull_in,
)

# representative transducer scale: ~1 um x 220 nm electrode facing a 70 nm gap
ACT = ParallelPlateActuator(k_spring=80.0, area=2.2e-13, gap0=70e-9)


class TestEquilibriumGap:
    def test_zero_bias(self):
        assert equilibrium_gap(ACT, 0.0) == ACT.gap0

    def test_bifurcation_at_two_thirds(self):
        v_pi = pull_in_voltage(ACT)
        gap = equilibrium_gap(ACT, v_pi)
        assert gap == pytest.approx(2.0 * ACT.gap0 / 3.0, rel=1e-6)

    def test_unstable_beyond_pull_in(self):
        v_pi = pull_in_voltage(ACT)
        for v in np.linspace(1.0001 * v_pi, 2 * v_pi, 20):
            assert equilibrium_gap(ACT, v) is None

    def test_root_satisfies_force_balance(self):
        v = 0.7 * pull_in_voltage(ACT)
        x = equilibrium_gap(ACT, v)
        spring = ACT.k_spring * (ACT.gap0 - x)
        electro = epsilon_0 * ACT.area * v * v / (2 * x * x)
        assert spring == pytest.approx(electro, rel=1e-9)

    def test_monotone_decreasing_up_to_pull_in(self):
        v_pi = pull_in_voltage(ACT)
        voltages = np.linspace(0.0, v_pi * (1 - 1e-12), 60)
        gaps = [equilibrium_gap(ACT, v) for v in voltages]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] == pytest.approx(2.0 * ACT.gap0 / 3.0, rel=1e-5)

    @given(st.floats(min_value=0.05, max_value=0.999))
    def test_stable_root_by_second_derivative(self, frac):
        """Total energy U(x) = k(gap0-x)^2/2 - eps0 A V^2/(2x) has U'' > 0 at
        the returned root (numerical stability check)."""
        v = frac * pull_in_voltage(ACT)
        x = equilibrium_gap(ACT, v)

        def energy(y):
            return 0.5 * ACT.k_spring * (ACT.gap0 - y) ** 2 - (
                epsilon_0 * ACT.area * v * v / (2 * y)
            )

        h = 1e-6 * ACT.gap0
        curvature = (energy(x + h) - 2 * energy(x) + energy(x - h)) / h**2
        assert curvature > 0

    def test_negative_voltage_rejected(self):
        with pytest.raises(ValueError):
            equilibrium_gap(ACT, -1.0)


class TestPullInVoltage:
    def test_closed_form(self):
        expected = math.sqrt(8 * ACT.k_spring * ACT.gap0**3 / (27 * epsilon_0 * ACT.area))
        assert pull_in_voltage(ACT) == pytest.approx(expected, rel=1e-12)

    def test_bifurcation_consistency_via_bisection(self):
        """Oracle: locate the stability boundary by bisection on voltage using
        only equilibrium_gap, and compare with the closed form."""
        v_pi = pull_in_voltage(ACT)
        lo, hi = 0.0, 2 * v_pi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if equilibrium_gap(ACT, mid) is None:
                hi = mid
            else:
                lo = mid
        assert 0.5 * (lo + hi) == pytest.approx(v_pi, rel=1e-9)

    def test_quadrupled_stiffness_doubles_vpi(self):
        stiff = ParallelPlateActuator(k_spring=4 * ACT.k_spring, area=ACT.area, gap0=ACT.gap0)
        assert pull_in_voltage(stiff) == pytest.approx(2 * pull_in_voltage(ACT), rel=1e-12)

    @given(st.floats(min_value=0.1, max_value=10.0))
    def test_scale_invariance(self, c):
        scaled = ParallelPlateActuator(k_spring=c * ACT.k_spring, area=c * ACT.area, gap0=ACT.gap0)
        assert pull_in_voltage(scaled) == pytest.approx(pull_in_voltage(ACT), rel=1e-12)

    def test_stiffness_inversion_round_trip(self):
        k = stiffness_from_pull_in(30.0, ACT.area, 70e-9)
        act = ParallelPlateActuator(k_spring=k, area=ACT.area, gap0=70e-9)
        assert pull_in_voltage(act) == pytest.approx(30.0, rel=1e-9)
        # the measured instability window brackets the modeled one
        assert 29.0 <= pull_in_voltage(act) <= 31.0


class TestLeakageFit:
    def test_exact_ohmic_line(self):
        v = np.linspace(0.0, 30.0, 16)
        i = v / 500e9
        fit = leakage_fit(np.column_stack([v, i]))
        assert fit.R == pytest.approx(500e9, rel=1e-9)
        assert fit.I_offset == pytest.approx(0.0, abs=1e-18)
        # Ohm's law oracle at the top of the sweep
        assert 30.0 / fit.R == pytest.approx(60e-12, rel=1e-9)

    def test_degenerate_points_rejected(self):
        with pytest.raises(ValueError, match="degenerate"):
            leakage_fit([(1.0, 2e-12), (1.0, 3e-12)])

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            leakage_fit([(1.0, 2e-12)])


class TestCouplingScaling:
    def test_reference_identity(self):
        assert coupling_scaling(46e3, n_cells=9) == 46e3
        assert coupling_scaling(46e3, gap=70e-9) == 46e3

    def test_gap_power_law(self):
        # oracle: direct power-law evaluation
        expected = 46e3 * (70.0 / 65.0) ** 1.66
        got = coupling_scaling(46e3, gap=65e-9)
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(52.0e3, rel=1e-3)

    def test_sqrt_cell_law(self):
        assert coupling_scaling(46e3, n_cells=4) == pytest.approx(46e3 * 2.0 / 3.0, rel=1e-12)

    def test_disorder_regime_warns_but_returns(self):
        with pytest.warns(UserWarning, match="disorder"):
            value = coupling_scaling(46e3, n_cells=16)
        assert value == pytest.approx(46e3 * 4.0 / 3.0, rel=1e-12)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            coupling_scaling(46e3)
        with pytest.raises(ValueError):
            coupling_scaling(46e3, n_cells=4, gap=70e-9)
        with pytest.raises(ValueError):
            coupling_scaling(46e3, n_cells=0.5)

    def test_no_warning_inside_validity(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            coupling_scaling(46e3, n_cells=9)
