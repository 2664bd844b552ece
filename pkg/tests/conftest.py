import dataclasses

import numpy as np
import pytest

import cavem
from cavem.units import angular


def draw_model_params(name, rng):
    """Random but physical parameter vectors per model, for Jacobian checks."""
    if name == "lorentzian":
        return np.array([rng.uniform(-5, 5), rng.uniform(0.5, 3), rng.uniform(-4, 4),
                         rng.uniform(-1, 1)])
    if name in ("complex_eit", "complex_eit_fano"):
        p = [10 ** rng.uniform(4.5, 6), 10 ** rng.uniform(4.5, 6), 10 ** rng.uniform(3, 4.5),
             10 ** rng.uniform(3.5, 5), rng.uniform(-1e6, 1e6), rng.uniform(-1e5, 1e5)]
        if name == "complex_eit_fano":
            p.append(rng.uniform(-1.5, 1.5))
        return np.array(p)
    if name == "exp_decay":
        return np.array([rng.uniform(0.5, 100), 10 ** rng.uniform(2, 4), rng.uniform(-1, 1)])
    if name == "tuning_parabola":
        return np.array([rng.uniform(4e9, 6e9), 10 ** rng.uniform(11, 13)])
    if name == "tls_saturation":
        return np.array([10 ** rng.uniform(4, 6), 10 ** rng.uniform(0.5, 3),
                         rng.uniform(0.3, 1.9), 10 ** rng.uniform(3, 5)])
    if name == "avoided_crossing":
        return np.array([rng.uniform(-2e6, 2e6), 10 ** rng.uniform(4, 6.3)])
    if name == "linear_iv":
        return np.array([10 ** rng.uniform(-13, -10), rng.uniform(-1e-12, 1e-12)])
    raise AssertionError(name)


def model_domain(name, rng):
    if name in ("complex_eit", "complex_eit_fano"):
        return np.linspace(-4e6, 4e6, 57)
    if name == "exp_decay":
        return np.linspace(0, 3e-3, 41)
    if name == "tuning_parabola":
        return np.linspace(-6e-3, 6e-3, 31)
    if name == "tls_saturation":
        return np.logspace(-1, 5, 37)
    if name == "avoided_crossing":
        return np.linspace(-4e6, 4e6, 33)
    if name == "linear_iv":
        return np.linspace(0, 30, 21)
    return np.linspace(-8, 8, 45)


def assert_jacobian_matches_fd(model, draws=100):
    """Analytic Jacobian vs central differences (1e-6 relative step, 1e-5
    relative tolerance); tiny-derivative columns are compared against the
    finite-difference round-off floor eps*|y|/(2h)."""
    rng = np.random.default_rng(hash(model.name) % 2**32)
    eps = np.finfo(float).eps
    for _ in range(draws):
        p = draw_model_params(model.name, rng)
        x = model_domain(model.name, rng)
        analytic = model.jacobian(p, x)
        y_scale = float(np.max(np.abs(model.evaluate(p, x))))
        fd = np.empty_like(analytic)
        floors = np.empty(p.size)
        for k in range(p.size):
            h = 1e-6 * max(abs(p[k]), 1e-9)
            pp, pm = p.copy(), p.copy()
            pp[k] += h
            pm[k] -= h
            fd[:, k] = (model.evaluate(pp, x) - model.evaluate(pm, x)) / (2 * h)
            floors[k] = 8.0 * eps * y_scale / (2 * h)
        col_scale = np.max(np.abs(analytic), axis=0) + 1e-30
        err = np.max(np.abs(analytic - fd), axis=0)
        assert (err <= 1e-5 * col_scale + floors).all(), (
            f"{model.name}: Jacobian mismatch {err / col_scale}"
        )


@pytest.fixture(scope="session")
def device_a():
    return cavem.get_device("A")


@pytest.fixture(scope="session")
def device_b():
    return cavem.get_device("B")


@pytest.fixture()
def system_a_resonant(device_a):
    """Device A with the cavity tuned onto the mechanics, bias 1.2 V."""
    mw = dataclasses.replace(device_a.microwave, omega_r=device_a.mechanical.omega_m)
    return cavem.TwoModeSystem(
        mw=mw,
        mech=device_a.mechanical,
        g=cavem.coupling_at_voltage(device_a.coupling, 1.2),
    )


@pytest.fixture()
def strong_coupling_system(device_b):
    """Device B at 25 V on resonance; total mechanical linewidth implied by
    the measured hybridized linewidths ((kappa+gamma)/2 = 692 kHz)."""
    gamma_total = angular(2 * 692e3) - device_b.microwave.kappa_total
    mech = dataclasses.replace(
        device_b.mechanical,
        gamma_total_linewidth=gamma_total,
    )
    mw = dataclasses.replace(device_b.microwave, omega_r=mech.omega_m)
    return cavem.TwoModeSystem(mw=mw, mech=mech, g=42.7e3 * 25.0)
