"""Synthetic-experiment generation and end-to-end analyses.

Every generator takes an explicit seed and is bit-reproducible.  The
averaging-depth knobs (n_avg) set the detection-noise level; defaults are
calibrated so the recovered uncertainties match the headline error bars of
the measured datasets these pipelines emulate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .device import DeviceRecord, coupling_at_voltage
from .dynamics import (
    BathSpec,
    TwoModeSystem,
    cooperativity,
    eit_reflection,
    em_readout_rate,
    quality_factor,
    spring_shifted_frequency,
)
from .fitting import Model, get_model, nls_fit
from .io import write_csv, write_json, write_spectrum_csv
from .thermometry import (
    AmplifierChain,
    MechanicalLine,
    PSDTrace,
    extract_occupancy,
    johnson_power,
    output_psd,
)
from .units import TWO_PI, angular, cyclic

DEFAULT_CHAIN = AmplifierChain(gain_db=65.6, n_add=10.0, nu_if=1e3)


@dataclass(frozen=True, eq=False)
class SpectrumTrace:
    """Sampled complex reflection with i.i.d. complex Gaussian noise."""

    frequencies: np.ndarray
    reflection: np.ndarray
    noise_sigma: float
    seed: int


@dataclass(frozen=True, eq=False)
class RingdownTrace:
    """Detected power per window (phonon-referred) during free decay."""

    times: np.ndarray
    power: np.ndarray
    window_s: float
    seed: int


def resonant_system(device: DeviceRecord, V_dc: float, *, detuning: float = 0.0,
                    fano_phase: float = 0.0) -> TwoModeSystem:
    """System at bias V_dc with the cavity tuned to omega_m + detuning (angular)."""
    mw = replace(device.microwave, omega_r=device.mechanical.omega_m + detuning)
    return TwoModeSystem(
        mw=mw,
        mech=device.mechanical,
        g=coupling_at_voltage(device.coupling, V_dc),
        fano_phase=fano_phase,
    )


def synth_eit(system: TwoModeSystem, frequencies_hz, noise_sigma: float, seed: int) -> SpectrumTrace:
    """Forward EIT reflection plus complex Gaussian noise; exact curve at sigma=0."""
    f = np.asarray(frequencies_hz, dtype=float)
    r = eit_reflection(system, TWO_PI * f)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        r = r + noise_sigma * (rng.standard_normal(f.size) + 1j * rng.standard_normal(f.size))
    return SpectrumTrace(frequencies=f, reflection=r, noise_sigma=noise_sigma, seed=seed)


def eit_grid(system: TwoModeSystem, *, cavity_span: float = 3.0, cavity_points: int = 401,
             mech_span: float = 25.0, mech_points: int = 401) -> np.ndarray:
    """Frequency grid (Hz) resolving both the cavity dip and the mechanical feature."""
    f_r = cyclic(system.mw.omega_r)
    f_m = cyclic(system.mech.omega_m)
    kappa = cyclic(system.mw.kappa_total)
    gamma = max(cyclic(system.mech.gamma_total_linewidth), 1.0)
    wide = np.linspace(f_r - cavity_span * kappa, f_r + cavity_span * kappa, cavity_points)
    narrow = np.linspace(f_m - mech_span * gamma, f_m + mech_span * gamma, mech_points)
    return np.unique(np.concatenate([wide, narrow]))


def fit_eit_trace(trace: SpectrumTrace, init, *, model_name: str = "complex_eit"):
    """Fit the complex reflection; init is (kappa_i, kappa_e, gamma, g, f_r, f_m) in Hz."""
    model = get_model(model_name)
    sigma = None
    if trace.noise_sigma > 0:
        sigma = np.full(trace.frequencies.size, trace.noise_sigma)
    return nls_fit(model, trace.frequencies, trace.reflection, init, sigma=sigma)


def synth_ringdown(Gamma_total: float, n0: float, times, window_s: float,
                   chain: AmplifierChain = DEFAULT_CHAIN, *, n_avg: float = 50.0,
                   seed: int = 0) -> RingdownTrace:
    """Free-decay power per detection window: n0 exp(-Gamma t) plus the chain noise floor.

    The window length must stay well below the decay time (enforced); the
    additive noise level is the phonon-referred amplifier noise after
    n_avg averages.
    """
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    if window_s * Gamma_total > 0.1:
        raise ValueError("detection window too long: window_s must be << 1/Gamma")
    t = np.asarray(times, dtype=float)
    rng = np.random.default_rng(seed)
    noise = chain.n_add / np.sqrt(n_avg) * rng.standard_normal(t.size)
    return RingdownTrace(
        times=t,
        power=n0 * np.exp(-Gamma_total * t) + noise,
        window_s=window_s,
        seed=seed,
    )


def fit_ringdown(trace: RingdownTrace):
    """Exponential fit of a ringdown; returns the FitResult (rate in 1/s)."""
    model = get_model("exp_decay")
    init = model.guess(trace.times, trace.power)
    return nls_fit(model, trace.times, trace.power, init)


def _decay_vs_detuning_model(kappa: float) -> Model:
    """Gamma(Delta) = Gamma_i + g^2 kappa / (Delta^2 + (kappa/2)^2), angular units."""

    def evaluate(p, x):
        gamma_i, g = p
        return gamma_i + g * g * kappa / (np.asarray(x) ** 2 + 0.25 * kappa * kappa)

    def jacobian(p, x):
        x = np.asarray(x, dtype=float)
        _, g = p
        j = np.empty((x.size, 2))
        j[:, 0] = 1.0
        j[:, 1] = 2.0 * g * kappa / (x * x + 0.25 * kappa * kappa)
        return j

    return Model(
        name="decay_vs_detuning",
        param_names=("Gamma_i", "g"),
        evaluate=evaluate,
        jacobian=jacobian,
        lower=(0.0, 0.0),
    )


class LifetimeVsDetuning(NamedTuple):
    detunings_hz: np.ndarray
    tau_us: np.ndarray
    tau_sigma_us: np.ndarray
    tau_i_fit_us: float
    tau_i_fit_sigma_us: float
    tau_i_subtraction_us: float
    tau_i_subtraction_sigma_us: float
    g_fit_hz: float


def pipeline_lifetime_vs_detuning(device: DeviceRecord, V_dc: float, detunings_hz,
                                  *, tau_i_truth: float | None = None, n0: float = 100.0,
                                  n_windows: int = 60, n_avg: float = 50.0,
                                  chain: AmplifierChain = DEFAULT_CHAIN, seed: int = 0,
                                  outdir=None) -> LifetimeVsDetuning:
    """Synthesize ringdowns over a detuning sweep and recover the intrinsic lifetime.

    Two estimators are produced: a global fit of Gamma(Delta) = Gamma_i +
    Gamma_em(Delta), and the per-detuning subtraction of the known readout
    contribution.
    """
    tau_i = device.tau_d_max if tau_i_truth is None else tau_i_truth
    gamma_i = 1.0 / tau_i
    g_ang = angular(coupling_at_voltage(device.coupling, V_dc))
    kappa = device.microwave.kappa_total
    detunings_hz = np.asarray(detunings_hz, dtype=float)

    rates, rate_sigmas = [], []
    for k, df in enumerate(detunings_hz):
        gamma_em = em_readout_rate(g_ang, kappa, angular(df))
        total = gamma_i + gamma_em
        t_max = 2.5 / total
        times = np.linspace(0.0, t_max, n_windows)
        trace = synth_ringdown(
            total, n0, times, window_s=min(0.05 / total, 1e-6), chain=chain,
            n_avg=n_avg, seed=seed * 1000 + k,
        )
        fit = fit_ringdown(trace)
        rates.append(fit["rate"])
        rate_sigmas.append(fit.uncertainty("rate"))
    rates = np.array(rates)
    rate_sigmas = np.array(rate_sigmas)

    model = _decay_vs_detuning_model(kappa)
    init = np.array([rates.min() * 0.8 + 1e-3, g_ang * 1.2])
    fit = nls_fit(model, angular(detunings_hz), rates, init, sigma=rate_sigmas)
    gamma_i_hat = fit["Gamma_i"]
    gamma_i_hat_sigma = fit.uncertainty("Gamma_i")

    # per-detuning subtraction of the known readout rate
    gamma_em_true = em_readout_rate(g_ang, kappa, angular(detunings_hz))
    gamma_i_points = rates - gamma_em_true
    w = 1.0 / rate_sigmas**2
    gamma_i_sub = float(np.sum(w * gamma_i_points) / np.sum(w))
    gamma_i_sub_sigma = float(1.0 / np.sqrt(np.sum(w)))

    result = LifetimeVsDetuning(
        detunings_hz=detunings_hz,
        tau_us=1e6 / rates,
        tau_sigma_us=1e6 * rate_sigmas / rates**2,
        tau_i_fit_us=1e6 / gamma_i_hat,
        tau_i_fit_sigma_us=1e6 * gamma_i_hat_sigma / gamma_i_hat**2,
        tau_i_subtraction_us=1e6 / gamma_i_sub,
        tau_i_subtraction_sigma_us=1e6 * gamma_i_sub_sigma / gamma_i_sub**2,
        g_fit_hz=cyclic(fit["g"]),
    )
    if outdir is not None:
        _write_lifetime_outputs(outdir, device, V_dc, tau_i, n_avg, seed, result)
    return result


class GVsV(NamedTuple):
    voltages: np.ndarray
    g_hz: np.ndarray
    g_sigma_hz: np.ndarray
    g0_hz_per_v: float
    g0_sigma_hz_per_v: float
    v_offset: float


def pipeline_g_vs_V(device: DeviceRecord, voltages, *, noise_sigma: float = 0.002,
                    seed: int = 0, outdir=None) -> GVsV:
    """EIT traces at each bias, coupling from each fit, then the linear law.

    Initial fit parameters are the device values perturbed by 10%, standing
    in for the previous operating point of a real sweep.
    """
    voltages = np.asarray(voltages, dtype=float)
    g_hat, g_sig = [], []
    for k, v in enumerate(voltages):
        system = resonant_system(device, v)
        grid = eit_grid(system)
        trace = synth_eit(system, grid, noise_sigma, seed=seed * 1000 + k)
        true = np.array(
            [
                cyclic(system.mw.kappa_i),
                cyclic(system.mw.kappa_e),
                cyclic(system.mech.gamma_total_linewidth),
                abs(system.g),
                cyclic(system.mw.omega_r),
                cyclic(system.mech.omega_m),
            ]
        )
        init = true * np.array([1.1, 0.9, 1.1, 1.1, 1.0, 1.0])
        init[4:] += 0.05 * cyclic(system.mw.kappa_total)
        if init[3] == 0.0:
            init[3] = 0.02 * cyclic(system.mw.kappa_total)
        fit = fit_eit_trace(trace, init)
        g_hat.append(abs(fit["g"]))
        g_sig.append(fit.uncertainty("g"))
    g_hat = np.array(g_hat)
    g_sig = np.array(g_sig)

    line = get_model("linear_iv")
    lfit = nls_fit(line, voltages, g_hat, line.guess(voltages, g_hat),
                   sigma=g_sig if np.all(g_sig > 0) else None)
    slope = lfit["slope"]
    intercept = lfit["intercept"]
    result = GVsV(
        voltages=voltages,
        g_hz=g_hat,
        g_sigma_hz=g_sig,
        g0_hz_per_v=slope,
        g0_sigma_hz_per_v=lfit.uncertainty("slope"),
        v_offset=-intercept / slope,
    )
    if outdir is not None:
        _write_g_vs_v_outputs(outdir, device, noise_sigma, seed, result)
    return result


class CooperativityVsV(NamedTuple):
    voltages: np.ndarray
    g_hz: np.ndarray
    C: np.ndarray
    Q: float
    tau_c_s: float


def pipeline_cooperativity_vs_V(device: DeviceRecord, voltages, *,
                                Gamma_i: float | None = None, outdir=None) -> CooperativityVsV:
    """Cooperativity C(V) = 4 g(V)^2 / (kappa_i Gamma_i) plus Q and coherence time.

    Gamma_i is the angular intrinsic decay rate at the operating point
    (default: the device's referenced lifetime).
    """
    voltages = np.asarray(voltages, dtype=float)
    gamma_i = (1.0 / device.tau_d_max) if Gamma_i is None else Gamma_i
    g = np.array([coupling_at_voltage(device.coupling, v) for v in voltages])
    c = np.array(
        [
            cooperativity(gk, cyclic(device.microwave.kappa_i), cyclic(gamma_i))
            for gk in g
        ]
    )
    result = CooperativityVsV(
        voltages=voltages,
        g_hz=g,
        C=c,
        Q=quality_factor(device.mechanical.omega_m, 1.0 / gamma_i),
        tau_c_s=1.0 / device.mechanical.gamma_total_linewidth,
    )
    if outdir is not None:
        outdir = Path(outdir)
        write_json(outdir / "inputs.json", {
            "pipeline": "cooperativity_vs_V",
            "device": device.id,
            "voltages": voltages,
            "Gamma_i_hz": cyclic(gamma_i),
        })
        write_csv(outdir / "cooperativity.csv", ["voltage_V", "g_Hz", "C"],
                  zip(voltages, g, c))
        write_json(outdir / "report.json", {
            "Q": result.Q, "tau_c_s": result.tau_c_s, "C_max": float(c.max()),
        })
        _plot(outdir / "cooperativity.svg", voltages, [c], ["C"], "voltage (V)", "cooperativity")
    return result


def synth_psd(system: TwoModeSystem, baths: BathSpec, chain: AmplifierChain,
              frequencies_hz, *, n_avg: float = 1e6, seed: int = 0) -> PSDTrace:
    """Forward PSD with radiometer noise: sigma per bin = S_true / sqrt(n_avg)."""
    f = np.asarray(frequencies_hz, dtype=float)
    s_true = output_psd(system, baths, chain, TWO_PI * f)
    sigma = s_true / np.sqrt(n_avg)
    rng = np.random.default_rng(seed)
    produced = s_true + sigma * rng.standard_normal(f.size)
    return PSDTrace(
        frequencies=f,
        psd=np.clip(produced, 0.0, None),
        rbw=float(np.median(np.diff(np.sort(f)))),
        n_avg=n_avg,
        sigma=sigma,
    )


def thermometry_grid(system: TwoModeSystem, line: MechanicalLine, *,
                     mech_span: float = 8.0, mech_points: int = 321,
                     cavity_points: int = 481) -> np.ndarray:
    """Grid (Hz) dense across the mechanical line with wide cavity coverage."""
    f_line = cyclic(line.omega_center)
    gamma_hz = cyclic(line.gamma_total)
    narrow = np.linspace(f_line - mech_span * gamma_hz, f_line + mech_span * gamma_hz, mech_points)
    f_r = cyclic(system.mw.omega_r)
    kappa_hz = cyclic(system.mw.kappa_total)
    wide = np.linspace(f_r - 3.0 * kappa_hz, f_r + 3.0 * kappa_hz, cavity_points)
    # keep wide points clear of the line neighbourhood handled by `narrow`
    wide = wide[np.abs(wide - f_line) > 20.0 * gamma_hz]
    return np.unique(np.concatenate([narrow, wide]))


def mechanical_line_of(system: TwoModeSystem, Delta: float,
                       Gamma_i: float | None = None) -> MechanicalLine:
    """Line parameters implied by the system at cavity-mechanics detuning Delta.

    In a real measurement these come from the driven-response step; for
    synthetic data they follow from the generating model.
    """
    gamma_i = system.mech.gamma_i_intrinsic_decay if Gamma_i is None else Gamma_i
    gamma_em = em_readout_rate(system.g_angular, system.mw.kappa_total, Delta)
    return MechanicalLine(
        omega_center=spring_shifted_frequency(system, Delta),
        gamma_total=gamma_i + gamma_em,
        Gamma_em=gamma_em,
        Gamma_i=gamma_i,
    )


def low_cooperativity_detuning(device: DeviceRecord, V_dc: float,
                               target_ratio: float = 1.0) -> float:
    """Detuning (angular) putting Gamma_em at target_ratio * Gamma_i.

    The far-detuned, low-cooperativity point keeps back-action cooling
    mild so the bath occupancy stays cleanly extractable.
    """
    g_ang = angular(coupling_at_voltage(device.coupling, V_dc))
    kappa = device.microwave.kappa_total
    gamma_i = 1.0 / device.tau_d_max
    arg = g_ang**2 * kappa / (target_ratio * gamma_i) - 0.25 * kappa**2
    if arg <= 0:
        return 3.0 * kappa
    return float(np.sqrt(arg))


class ThermometryVsV(NamedTuple):
    voltages: np.ndarray
    n_b_m: np.ndarray
    n_b_m_sigma: np.ndarray
    n_b_r: np.ndarray
    n_b_r_sigma: np.ndarray
    truth_n_b_m: np.ndarray


def pipeline_thermometry_vs_V(device: DeviceRecord, voltages, truth_baths,
                              *, chain: AmplifierChain = DEFAULT_CHAIN,
                              n_avg: float = 1e6, seed: int = 0,
                              outdir=None) -> ThermometryVsV:
    """Synthetic sideband thermometry across a bias sweep.

    truth_baths is one BathSpec or a sequence (one per voltage).  Each
    point synthesizes the PSD at the low-cooperativity detuning and runs
    the occupancy extraction with squash correction.
    """
    voltages = np.asarray(voltages, dtype=float)
    if isinstance(truth_baths, BathSpec):
        truth_baths = [truth_baths] * voltages.size
    rows = []
    for k, (v, baths) in enumerate(zip(voltages, truth_baths)):
        delta = low_cooperativity_detuning(device, v)
        system = resonant_system(device, v, detuning=delta)
        line = mechanical_line_of(system, delta)
        grid = thermometry_grid(system, line)
        trace = synth_psd(system, baths, chain, grid, n_avg=n_avg, seed=seed * 1000 + k)
        res = extract_occupancy(trace, system, chain, line)
        rows.append((res.n_b_m, res.n_b_m_sigma, res.n_b_r, res.n_b_r_sigma, baths.n_b_m))
    arr = np.array(rows)
    result = ThermometryVsV(
        voltages=voltages,
        n_b_m=arr[:, 0],
        n_b_m_sigma=arr[:, 1],
        n_b_r=arr[:, 2],
        n_b_r_sigma=arr[:, 3],
        truth_n_b_m=arr[:, 4],
    )
    if outdir is not None:
        outdir = Path(outdir)
        write_json(outdir / "inputs.json", {
            "pipeline": "thermometry_vs_V", "device": device.id,
            "voltages": voltages, "n_avg": n_avg, "seed": seed,
            "chain": {"gain_db": chain.gain_db, "n_add": chain.n_add, "nu_if": chain.nu_if},
        })
        write_csv(
            outdir / "occupancy.csv",
            ["voltage_V", "n_b_m", "n_b_m_sigma", "n_b_r", "n_b_r_sigma", "truth_n_b_m"],
            zip(voltages, *arr.T),
        )
        write_json(outdir / "report.json", {
            "max_n_b_m": float(arr[:, 0].max()),
            "tau_c_s": 1.0 / device.mechanical.gamma_total_linewidth,
        })
        _plot(outdir / "occupancy.svg", voltages, [arr[:, 0], arr[:, 2]],
              ["n_b_m", "n_b_r"], "voltage (V)", "occupancy (quanta)")
    return result


def synth_johnson_powers(temps, chain: AmplifierChain, nu: float, *,
                         rel_sigma: float = 0.002, seed: int = 0):
    """Noisy detected powers of a hot matched load at each stage temperature."""
    temps = np.asarray(temps, dtype=float)
    p_true = np.array([johnson_power(t, nu, chain) for t in temps])
    rng = np.random.default_rng(seed)
    sigma = rel_sigma * p_true
    return p_true + sigma * rng.standard_normal(temps.size), sigma


# ---------------------------------------------------------------------------
# artifact writing

def _plot(path, x, ys, labels, xlabel, ylabel) -> None:
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "cavem"
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.2))
    for y, label in zip(ys, labels):
        ax.plot(x, y, marker="o", ms=3, lw=1, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(ys) > 1:
        ax.legend(frameon=False)
    fig.tight_layout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _write_lifetime_outputs(outdir, device, V_dc, tau_i, n_avg, seed,
                            result: LifetimeVsDetuning) -> None:
    outdir = Path(outdir)
    write_json(outdir / "inputs.json", {
        "pipeline": "lifetime_vs_detuning", "device": device.id, "V_dc": V_dc,
        "tau_i_truth_s": tau_i, "n_avg": n_avg, "seed": seed,
        "detunings_hz": result.detunings_hz,
    })
    write_csv(outdir / "lifetime.csv", ["detuning_Hz", "tau_us", "tau_sigma_us"],
              zip(result.detunings_hz, result.tau_us, result.tau_sigma_us))
    write_json(outdir / "report.json", {
        "tau_i_fit_us": result.tau_i_fit_us,
        "tau_i_fit_sigma_us": result.tau_i_fit_sigma_us,
        "tau_i_subtraction_us": result.tau_i_subtraction_us,
        "tau_i_subtraction_sigma_us": result.tau_i_subtraction_sigma_us,
        "g_fit_hz": result.g_fit_hz,
    })
    _plot(outdir / "lifetime.svg", result.detunings_hz / 1e6, [result.tau_us],
          ["tau_d"], "detuning (MHz)", "lifetime (us)")


def _write_g_vs_v_outputs(outdir, device, noise_sigma, seed, result: GVsV) -> None:
    outdir = Path(outdir)
    write_json(outdir / "inputs.json", {
        "pipeline": "g_vs_V", "device": device.id, "noise_sigma": noise_sigma,
        "seed": seed, "voltages": result.voltages,
    })
    write_csv(outdir / "coupling.csv", ["voltage_V", "g_Hz", "g_sigma_Hz"],
              zip(result.voltages, result.g_hz, result.g_sigma_hz))
    write_json(outdir / "report.json", {
        "g0_hz_per_v": result.g0_hz_per_v,
        "g0_sigma_hz_per_v": result.g0_sigma_hz_per_v,
        "v_offset": result.v_offset,
    })
    _plot(outdir / "coupling.svg", result.voltages, [result.g_hz / 1e3],
          ["g"], "voltage (V)", "g (kHz)")
