"""Model library used across the analysis pipelines.

Each model is a pure evaluation map (params, x) -> y with an analytic
Jacobian (checked against finite differences by the test suite) and, where
useful, an initialization helper so pipelines run unattended.  Complex
models return complex arrays; the engine stacks real and imaginary
residuals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import _kernels

INF = float("inf")


@dataclass(frozen=True)
class Model:
    """Named parametric model with optional Jacobian, bounds and guess."""

    name: str
    param_names: tuple[str, ...]
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    lower: tuple[float, ...] = ()
    upper: tuple[float, ...] = ()
    complex_valued: bool = False
    guess: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        n = len(self.param_names)
        if not self.lower:
            object.__setattr__(self, "lower", (-INF,) * n)
        if not self.upper:
            object.__setattr__(self, "upper", (INF,) * n)

    @property
    def n_params(self) -> int:
        return len(self.param_names)


# --- lorentzian(center, fwhm, height, offset) ------------------------------

def _lorentzian_eval(p, x):
    return _kernels.lorentzian_grid(np.asarray(x, dtype=float), p[0], p[1], p[2], p[3])


def _lorentzian_jac(p, x):
    x = np.asarray(x, dtype=float)
    c, w, h, _ = p
    a = 0.25 * w * w
    d = x - c
    denom = (d * d + a) ** 2
    j = np.empty((x.size, 4))
    j[:, 0] = h * a * 2.0 * d / denom
    j[:, 1] = h * (0.5 * w) * d * d / denom
    j[:, 2] = a / (d * d + a)
    j[:, 3] = 1.0
    return j


def _lorentzian_guess(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    offset = float(np.median(y))
    resid = y - offset
    idx = int(np.argmax(np.abs(resid)))
    height = float(resid[idx])
    center = float(x[idx])
    half = np.abs(resid) >= 0.5 * abs(height)
    width = float(np.ptp(x[half])) if half.sum() > 1 else float(np.ptp(x)) / 10.0
    return np.array([center, max(width, np.ptp(x) / len(x)), height, offset])


# --- complex EIT reflection -------------------------------------------------
# r(f) = 1 - kappa_e e^{i phi} / (i(f_r - f) + kappa/2 + g^2/(i(f_m - f) + gamma/2));
# homogeneous in rates, so parameters are cyclic Hz like the frequency axis.

def _eit_eval_base(p, x, phi):
    kappa_i, kappa_e, gamma, g, f_r, f_m = p[:6]
    return _kernels.eit_reflection_grid(
        np.asarray(x, dtype=float), f_r, kappa_i, kappa_e, f_m, gamma, g, phi
    )


def _eit_jac_base(p, x, phi, with_phase):
    x = np.asarray(x, dtype=float)
    kappa_i, kappa_e, gamma, g, f_r, f_m = p[:6]
    m = 1j * (f_m - x) + 0.5 * gamma
    d = 1j * (f_r - x) + 0.5 * (kappa_i + kappa_e) + (g * g) / m
    e_phi = np.exp(1j * phi)
    common = kappa_e * e_phi / (d * d)
    cols = 7 if with_phase else 6
    j = np.empty((x.size, cols), dtype=complex)
    j[:, 0] = common * 0.5
    j[:, 1] = -e_phi / d + common * 0.5
    j[:, 2] = common * (-0.5 * g * g / (m * m))
    j[:, 3] = common * (2.0 * g / m)
    j[:, 4] = common * 1j
    j[:, 5] = common * (-1j * g * g / (m * m))
    if with_phase:
        j[:, 6] = -kappa_e * 1j * e_phi / d
    return j


def _eit_eval(p, x):
    return _eit_eval_base(p, x, 0.0)


def _eit_jac(p, x):
    return _eit_jac_base(p, x, 0.0, with_phase=False)


def _eit_fano_eval(p, x):
    return _eit_eval_base(p, x, p[6])


def _eit_fano_jac(p, x):
    return _eit_jac_base(p, x, p[6], with_phase=True)


def _eit_guess(x, y):
    x = np.asarray(x, dtype=float)
    mag = np.abs(np.asarray(y))
    f_r = float(x[np.argmin(mag)])
    depth = 1.0 - float(np.min(mag))
    below = mag <= 1.0 - 0.5 * depth
    kappa = float(np.ptp(x[below])) if below.sum() > 1 else np.ptp(x) / 10.0
    kappa_e = 0.5 * kappa * min(max(depth, 0.1), 1.9)
    kappa_i = max(kappa - kappa_e, 0.1 * kappa)
    gamma = kappa / 50.0
    return np.array([kappa_i, kappa_e, gamma, kappa / 20.0, f_r, f_r])


# --- exp_decay(amplitude, rate, offset) -------------------------------------

def _exp_decay_eval(p, x):
    return _kernels.exp_decay_grid(np.asarray(x, dtype=float), p[0], p[1], p[2])


def _exp_decay_jac(p, x):
    x = np.asarray(x, dtype=float)
    amp, rate, _ = p
    e = np.exp(-rate * x)
    j = np.empty((x.size, 3))
    j[:, 0] = e
    j[:, 1] = -amp * x * e
    j[:, 2] = 1.0
    return j


def _exp_decay_guess(x, y):
    """Log-linear regression after subtracting a tail-estimated offset."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n_tail = max(len(y) // 10, 2)
    offset = float(np.mean(y[np.argsort(x)[-n_tail:]]))
    resid = y - offset
    amp0 = float(resid[np.argmin(x)])
    usable = resid > 0.05 * max(abs(amp0), 1e-300)
    if usable.sum() >= 2 and amp0 > 0:
        slope, intercept = np.polyfit(x[usable], np.log(resid[usable]), 1)
        return np.array([float(np.exp(intercept)), max(-float(slope), 1e-12), offset])
    return np.array([amp0, 1.0 / max(np.ptp(x), 1e-12), offset])


# --- tuning_parabola(f_max, k): f(B) = f_max - k B^2 -------------------------

def _parabola_eval(p, x):
    x = np.asarray(x, dtype=float)
    return p[0] - p[1] * x * x


def _parabola_jac(p, x):
    x = np.asarray(x, dtype=float)
    j = np.empty((x.size, 2))
    j[:, 0] = 1.0
    j[:, 1] = -x * x
    return j


def _parabola_guess(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x * x, y, 1)
    return np.array([float(intercept), -float(slope)])


# --- tls_saturation(amplitude, n_c, beta, gamma_0) ---------------------------
# Saturating variant: gamma(n) = amplitude / sqrt(1 + (n/n_c)^beta) + gamma_0,
# with amplitude = F gamma_TLS tanh(hbar omega / 2 k_B T) at fixed temperature.

def _tls_sat_eval(p, x):
    amp, n_c, beta, gamma0 = p
    u = (np.asarray(x, dtype=float) / n_c) ** beta
    return amp / np.sqrt(1.0 + u) + gamma0


def _tls_sat_jac(p, x):
    x = np.asarray(x, dtype=float)
    amp, n_c, beta, _ = p
    u = (x / n_c) ** beta
    root = np.sqrt(1.0 + u)
    j = np.empty((x.size, 4))
    j[:, 0] = 1.0 / root
    j[:, 1] = amp * beta * u / (2.0 * n_c * root**3)
    with np.errstate(divide="ignore", invalid="ignore"):
        dlog = np.where(x > 0, np.log(x / n_c), 0.0)
    j[:, 2] = -amp * u * dlog / (2.0 * root**3)
    j[:, 3] = 1.0
    return j


def _tls_sat_guess(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.argsort(x)
    gamma0 = float(np.mean(y[order[-max(len(y) // 5, 1):]]))
    amp = max(float(y[order[0]]) - gamma0, 1e-12)
    n_c = float(np.sqrt(np.max(x) * max(np.min(x[x > 0], initial=1.0), 1e-12)))
    return np.array([amp, n_c, 1.0, max(gamma0, 0.0)])


# --- avoided_crossing(f_m, g) ------------------------------------------------
# x is the bare cavity frequency; returns both hybridized branches stacked
# [upper(x); lower(x)], each (x + f_m)/2 +- sqrt((x - f_m)^2 + 4 g^2)/2.

def _crossing_eval(p, x):
    x = np.asarray(x, dtype=float)
    f_m, g = p
    mean = 0.5 * (x + f_m)
    split = 0.5 * np.sqrt((x - f_m) ** 2 + 4.0 * g * g)
    return np.concatenate([mean + split, mean - split])


def _crossing_jac(p, x):
    x = np.asarray(x, dtype=float)
    f_m, g = p
    s = np.sqrt((x - f_m) ** 2 + 4.0 * g * g)
    s = np.where(s == 0.0, 1e-300, s)
    j = np.empty((2 * x.size, 2))
    j[: x.size, 0] = 0.5 - 0.5 * (x - f_m) / s
    j[x.size :, 0] = 0.5 + 0.5 * (x - f_m) / s
    j[: x.size, 1] = 2.0 * g / s
    j[x.size :, 1] = -2.0 * g / s
    return j


def _crossing_guess(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    upper, lower = y[:n], y[n:]
    g = 0.5 * float(np.min(upper - lower))
    f_m = float(np.mean(upper + lower) - np.mean(x))
    return np.array([f_m, max(g, 1e-12)])


# --- linear_iv(slope, intercept) ---------------------------------------------

def _linear_eval(p, x):
    return p[0] * np.asarray(x, dtype=float) + p[1]


def _linear_jac(p, x):
    x = np.asarray(x, dtype=float)
    j = np.empty((x.size, 2))
    j[:, 0] = x
    j[:, 1] = 1.0
    return j


def _linear_guess(x, y):
    slope, intercept = np.polyfit(np.asarray(x, dtype=float), np.asarray(y, dtype=float), 1)
    return np.array([float(slope), float(intercept)])


_LIBRARY = {
    "lorentzian": Model(
        name="lorentzian",
        param_names=("center", "fwhm", "height", "offset"),
        evaluate=_lorentzian_eval,
        jacobian=_lorentzian_jac,
        lower=(-INF, 0.0, -INF, -INF),
        guess=_lorentzian_guess,
    ),
    "complex_eit": Model(
        name="complex_eit",
        param_names=("kappa_i", "kappa_e", "gamma", "g", "f_r", "f_m"),
        evaluate=_eit_eval,
        jacobian=_eit_jac,
        lower=(0.0, 0.0, 0.0, 0.0, -INF, -INF),
        complex_valued=True,
        guess=_eit_guess,
    ),
    "complex_eit_fano": Model(
        name="complex_eit_fano",
        param_names=("kappa_i", "kappa_e", "gamma", "g", "f_r", "f_m", "fano_phase"),
        evaluate=_eit_fano_eval,
        jacobian=_eit_fano_jac,
        lower=(0.0, 0.0, 0.0, 0.0, -INF, -INF, -np.pi),
        upper=(INF, INF, INF, INF, INF, INF, np.pi),
        complex_valued=True,
    ),
    "exp_decay": Model(
        name="exp_decay",
        param_names=("amplitude", "rate", "offset"),
        evaluate=_exp_decay_eval,
        jacobian=_exp_decay_jac,
        lower=(-INF, 0.0, -INF),
        guess=_exp_decay_guess,
    ),
    "tuning_parabola": Model(
        name="tuning_parabola",
        param_names=("f_max", "k"),
        evaluate=_parabola_eval,
        jacobian=_parabola_jac,
        guess=_parabola_guess,
    ),
    "tls_saturation": Model(
        name="tls_saturation",
        param_names=("amplitude", "n_c", "beta", "gamma_0"),
        evaluate=_tls_sat_eval,
        jacobian=_tls_sat_jac,
        lower=(0.0, 1e-30, 1e-6, 0.0),
        upper=(INF, INF, 2.0, INF),
        guess=_tls_sat_guess,
    ),
    "avoided_crossing": Model(
        name="avoided_crossing",
        param_names=("f_m", "g"),
        evaluate=_crossing_eval,
        jacobian=_crossing_jac,
        lower=(-INF, 0.0),
        guess=_crossing_guess,
    ),
    "linear_iv": Model(
        name="linear_iv",
        param_names=("slope", "intercept"),
        evaluate=_linear_eval,
        jacobian=_linear_jac,
        guess=_linear_guess,
    ),
}


def model_library() -> dict[str, Model]:
    """All named models; keys are the names accepted by get_model and the CLI."""
    return dict(_LIBRARY)


def get_model(name: str) -> Model:
    try:
        return _LIBRARY[name]
    except KeyError:
        raise KeyError(
            f"unknown model {name!r}; available: {', '.join(sorted(_LIBRARY))}"
        ) from None
