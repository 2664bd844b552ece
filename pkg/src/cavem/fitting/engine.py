"""Damped (Levenberg-Marquardt) nonlinear least squares.

Damping is multiplicative: x10 on a rejected step, /3 on an accepted one,
starting from 1e-3 times the largest diagonal of J^T J; bounds are honored
by projecting trial steps.  Parameters are normalized internally to their
initial magnitudes so that wildly different scales (Hz-level linewidths
next to GHz-level centers) stay well conditioned; the damping schedule
applies in that normalized space.

Complex-valued models are fit by stacking real and imaginary residuals
with equal weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .models import Model

DAMPING_INIT_FACTOR = 1e-3
DAMPING_UP = 10.0
DAMPING_DOWN = 3.0
STEP_TOL = 1e-10
RESIDUAL_TOL = 1e-12
MAX_ITER = 500


class FitError(RuntimeError):
    """Raised when a fit cannot be started or evaluated."""


@dataclass
class FitResult:
    """Converged parameters with covariance-based uncertainties."""

    model: str
    names: tuple[str, ...]
    params: np.ndarray
    sigma: np.ndarray
    covariance: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    grad_inf_norm: float
    message: str = ""

    def __getitem__(self, name: str) -> float:
        return float(self.params[self.names.index(name)])

    def uncertainty(self, name: str) -> float:
        return float(self.sigma[self.names.index(name)])

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "params": {n: float(v) for n, v in zip(self.names, self.params)},
            "uncertainties": {n: float(v) for n, v in zip(self.names, self.sigma)},
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "converged": self.converged,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.as_dict(), **kwargs)


def _stack_complex(arr: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(arr):
        return np.concatenate([arr.real, arr.imag], axis=0)
    return arr


def _residual_builder(model: Model, x, y, sigma):
    y = np.asarray(y)
    if sigma is None:
        w = None
    else:
        w = 1.0 / np.asarray(sigma, dtype=float)

    def residual(p):
        f = model.evaluate(p, x)
        r = f - y
        if w is not None:
            r = r * w
        return _stack_complex(r)

    def jac(p):
        if model.jacobian is not None:
            j = model.jacobian(p, x)
        else:
            j = _fd_jacobian(model, p, x)
        if w is not None:
            j = j * w[:, None]
        return _stack_complex(j)

    return residual, jac


def _fd_jacobian(model: Model, p: np.ndarray, x) -> np.ndarray:
    f0 = model.evaluate(p, x)
    j = np.empty((f0.size, p.size), dtype=complex if np.iscomplexobj(f0) else float)
    for k in range(p.size):
        h = 1e-6 * max(abs(p[k]), 1e-12)
        pp = p.copy()
        pp[k] += h
        pm = p.copy()
        pm[k] -= h
        j[:, k] = (model.evaluate(pp, x) - model.evaluate(pm, x)) / (2.0 * h)
    return j


def nls_fit(model: Model, x, y, init, *, sigma=None, lower=None, upper=None,
            max_iter: int = MAX_ITER) -> FitResult:
    """Fit `model` to data (x, y) from the initial parameter vector `init`.

    Termination: relative step below 1e-10, relative residual decrease
    below 1e-12, scaled gradient below 1e-8 of its initial value, or
    max_iter.  Raises FitError for a singular Jacobian at the start, too
    few data points, an out-of-bounds start, or non-finite model output at
    an accepted point.
    """
    p = np.asarray(init, dtype=float).copy()
    if p.size != model.n_params:
        raise FitError(f"{model.name} expects {model.n_params} parameters, got {p.size}")
    lo = np.asarray(model.lower if lower is None else lower, dtype=float)
    hi = np.asarray(model.upper if upper is None else upper, dtype=float)
    if np.any(p < lo) or np.any(p > hi):
        raise FitError(f"initial parameters outside bounds: {p}")

    residual, jacfun = _residual_builder(model, x, y, sigma)
    r = residual(p)
    if r.size < p.size:
        raise FitError(f"need at least {p.size} residuals, got {r.size}")
    if not np.all(np.isfinite(r)):
        raise FitError(f"non-finite model output at parameters {p.tolist()}")

    # normalize parameters to their initial magnitudes
    scale = np.where(np.abs(p) > 0, np.abs(p), 1.0)

    def scaled_jacobian(pp):
        return jacfun(pp) * scale[None, :]

    j = scaled_jacobian(p)
    if not np.all(np.isfinite(j)):
        raise FitError(f"non-finite Jacobian at parameters {p.tolist()}")
    jtj = j.T @ j
    diag = np.diag(jtj)
    if np.any(diag == 0.0):
        dead = [model.param_names[k] for k in np.flatnonzero(diag == 0.0)]
        raise FitError(
            f"singular Jacobian at the initial point (no sensitivity to {dead}); re-initialize"
        )
    cost = float(r @ r)
    grad = j.T @ r
    lam = DAMPING_INIT_FACTOR * float(np.max(diag))

    converged = False
    message = "max_iter reached"
    iterations = 0
    eye = np.eye(p.size)
    for iterations in range(1, max_iter + 1):
        try:
            du = np.linalg.solve(jtj + lam * eye, -grad)
        except np.linalg.LinAlgError:
            lam *= DAMPING_UP
            continue
        step = du * scale
        trial = np.clip(p + step, lo, hi)
        actual = (trial - p) / scale
        step_size = float(np.linalg.norm(actual))
        u_size = float(np.linalg.norm(p / scale))
        r_trial = residual(trial)
        finite = np.all(np.isfinite(r_trial))
        cost_trial = float(r_trial @ r_trial) if finite else np.inf
        if cost_trial < cost:
            decrease = (cost - cost_trial) / max(cost, 1e-300)
            p = trial
            r = r_trial
            cost = cost_trial
            j = scaled_jacobian(p)
            jtj = j.T @ j
            grad = j.T @ r
            lam /= DAMPING_DOWN
            if not np.all(np.isfinite(j)):
                raise FitError(f"non-finite Jacobian at parameters {p.tolist()}")
            if decrease < RESIDUAL_TOL:
                converged = True
                message = "relative residual decrease below tolerance"
                break
            if step_size <= STEP_TOL * (u_size + STEP_TOL):
                converged = True
                message = "relative step below tolerance"
                break
        else:
            lam *= DAMPING_UP
            if step_size <= STEP_TOL * (u_size + STEP_TOL):
                converged = True
                message = "relative step below tolerance"
                break

    grad_inf = float(np.max(np.abs(grad)))
    m = r.size
    dof = max(m - p.size, 1)
    s2 = cost / dof
    try:
        cov_scaled = s2 * np.linalg.pinv(jtj, hermitian=True)
    except np.linalg.LinAlgError:
        cov_scaled = np.full((p.size, p.size), np.nan)
    cov = cov_scaled * np.outer(scale, scale)
    cov = 0.5 * (cov + cov.T)
    sigma_p = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return FitResult(
        model=model.name,
        names=model.param_names,
        params=p,
        sigma=sigma_p,
        covariance=cov,
        residual_norm=float(np.sqrt(cost)),
        iterations=iterations,
        converged=converged,
        grad_inf_norm=grad_inf,
        message=message,
    )
