"""Command-line surface.

Every numeric option accepts SI unit suffixes ('520 kHz', '70nm', '12.1fF');
frequencies are cyclic (omega/2pi).  Subcommands honor --seed and write
byte-identical outputs across repeated runs.  Exit codes: 0 success,
2 usage error, 3 data or fit error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import (
    EquivalentCircuit,
    coupling_from_circuit,
    direct_waveguide_decay,
    from_physical,
    resonator_derived,
)
from .device import (
    DeviceTableError,
    coupling_at_voltage,
    get_device,
    load_bundled_devices,
    load_devices,
    tuned_frequency,
)
from .dynamics import TwoModeSystem, BathSpec, hybridized_modes
from .electrostatics import ParallelPlateActuator, equilibrium_gap, pull_in_voltage
from .fitting import FitError, get_model, model_library, nls_fit
from .io import (
    default_output_dir,
    read_csv,
    write_csv,
    write_json,
    write_spectrum_csv,
)
from .pipelines import (
    DEFAULT_CHAIN,
    eit_grid,
    fit_eit_trace,
    fit_ringdown,
    mechanical_line_of,
    pipeline_cooperativity_vs_V,
    pipeline_lifetime_vs_detuning,
    pipeline_thermometry_vs_V,
    resonant_system,
    synth_eit,
    synth_johnson_powers,
    synth_psd,
    synth_ringdown,
    thermometry_grid,
)
from .thermometry import (
    AmplifierChain,
    MechanicalLine,
    PSDTrace,
    calibrate_gain,
    extract_occupancy,
)
from .tls import (
    StrainMode,
    TLSLinewidthModel,
    TLSParams,
    dipole_coupling,
    saturable_linewidth,
    stark_shift,
    strain_coupling_report,
)
from .units import TWO_PI, UnitError, angular, cyclic, format_si, parse_quantity


class CliError(Exception):
    """User-facing data/fit error, reported with exit code 3."""


def _qty(expect: str | None = None):
    """Argument type: unit-suffixed quantity; a bare number means SI units."""

    def parse(text: str) -> float:
        try:
            return parse_quantity(text, expect=expect)
        except UnitError:
            try:
                return parse_quantity(text, expect="")
            except UnitError as err:
                raise argparse.ArgumentTypeError(str(err)) from err

    return parse


def _outdir(args) -> Path:
    out = Path(args.out) if args.out else default_output_dir() / args.command
    out.mkdir(parents=True, exist_ok=True)
    return out


def _device(args):
    try:
        if args.devices_file:
            for rec in load_devices(args.devices_file):
                if rec.id == args.device:
                    return rec
            raise CliError(f"device {args.device!r} not in {args.devices_file}")
        return get_device(args.device)
    except (DeviceTableError, KeyError) as err:
        raise CliError(str(err)) from err


def _add_common(p: argparse.ArgumentParser, device: bool = True) -> None:
    p.add_argument("--out", help="output directory (default: $CAVEM_OUTPUT_DIR/<cmd>)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    if device:
        p.add_argument("--device", default="A", help="device id from the table (default A)")
        p.add_argument("--devices-file", help="alternative device table file")


def cmd_devices(args) -> int:
    records = load_devices(args.devices_file) if args.devices_file else load_bundled_devices()
    for rec in records:
        print(f"device {rec.id}:")
        print(f"  omega_m/2pi   {format_si(cyclic(rec.mechanical.omega_m), 'Hz')}")
        print(f"  omega_r/2pi   {format_si(cyclic(rec.microwave.omega_r), 'Hz')}")
        print(f"  kappa_i/2pi   {format_si(cyclic(rec.microwave.kappa_i), 'Hz')}")
        print(f"  kappa_e/2pi   {format_si(cyclic(rec.microwave.kappa_e), 'Hz')}")
        print(f"  g0/2pi        {format_si(rec.coupling.g0, 'Hz')}/V"
              f"  (V_offset {rec.coupling.V_offset:g} V)")
        print(f"  tau_d_max     {format_si(rec.tau_d_max, 's')}")
        print(f"  tau_c_max     {format_si(rec.tau_c_max, 's')}")
        print(f"  T_mxc         {format_si(rec.T_mxc, 'K')}")
    return 0


def cmd_eit(args) -> int:
    device = _device(args)
    system = resonant_system(device, args.vdc, detuning=angular(args.detuning))
    if args.g is not None:
        system = TwoModeSystem(mw=system.mw, mech=system.mech, g=args.g,
                               fano_phase=system.fano_phase)
    grid = eit_grid(system)
    trace = synth_eit(system, grid, args.noise, args.seed)
    out = _outdir(args)
    write_spectrum_csv(out / "eit.csv", trace.frequencies, trace.reflection)
    report = {
        "device": device.id, "V_dc": args.vdc, "g_hz": system.g,
        "min_abs_r": float(np.min(np.abs(trace.reflection))),
    }
    if args.fit:
        init = np.array([
            cyclic(system.mw.kappa_i) * 1.1, cyclic(system.mw.kappa_e) * 0.9,
            cyclic(system.mech.gamma_total_linewidth) * 1.1,
            abs(system.g) * 1.1 or cyclic(system.mw.kappa_total) / 50.0,
            cyclic(system.mw.omega_r), cyclic(system.mech.omega_m),
        ])
        fit = fit_eit_trace(trace, init)
        write_json(out / "fit.json", fit.as_dict())
        report["fit_converged"] = fit.converged
        report["g_fit_hz"] = abs(fit["g"])
    write_json(out / "report.json", report)
    print(f"eit: wrote {out}/eit.csv  min|r| = {report['min_abs_r']:.4f}")
    return 0


def cmd_crossing(args) -> int:
    device = _device(args)
    if device.inductor is None:
        raise CliError(f"device {device.id} carries no inductor block (no k_tune)")
    fields = np.linspace(0.0, args.bmax, args.points)
    rows = []
    for b in fields:
        omega_r = tuned_frequency(device.microwave.omega_r, device.inductor.k_tune, b)
        mw = device.microwave.__class__(
            omega_r=omega_r, kappa_i=device.microwave.kappa_i, kappa_e=device.microwave.kappa_e
        )
        system = TwoModeSystem(mw=mw, mech=device.mechanical,
                               g=coupling_at_voltage(device.coupling, args.vdc))
        lo, hi = hybridized_modes(system)
        rows.append((b, cyclic(omega_r), lo.real, hi.real))
    out = _outdir(args)
    write_csv(out / "crossing.csv",
              ["B_T", "f_cavity_Hz", "f_lower_Hz", "f_upper_Hz"], rows)
    write_json(out / "report.json", {
        "device": device.id, "V_dc": args.vdc,
        "min_splitting_hz": float(min(r[3] - r[2] for r in rows)),
    })
    print(f"crossing: wrote {out}/crossing.csv")
    return 0


def cmd_ringdown(args) -> int:
    device = _device(args)
    gamma_total = 1.0 / args.tau
    times = np.linspace(0.0, 2.5 * args.tau, args.windows)
    trace = synth_ringdown(gamma_total, args.n0, times,
                           window_s=min(0.05 * args.tau, 1e-6),
                           chain=DEFAULT_CHAIN, n_avg=args.n_avg, seed=args.seed)
    fit = fit_ringdown(trace)
    out = _outdir(args)
    write_csv(out / "ringdown.csv", ["time_s", "power"], zip(trace.times, trace.power))
    write_json(out / "report.json", {
        "device": device.id, "tau_truth_s": args.tau,
        "tau_fit_s": 1.0 / fit["rate"],
        "tau_fit_sigma_s": fit.uncertainty("rate") / fit["rate"] ** 2,
        "converged": fit.converged,
    })
    print(f"ringdown: tau_fit = {1e6 / fit['rate']:.1f} us (truth {args.tau * 1e6:.1f} us)")
    return 0


def cmd_lifetime(args) -> int:
    device = _device(args)
    detunings = np.linspace(args.dmin, args.dmax, args.points)
    result = pipeline_lifetime_vs_detuning(
        device, args.vdc, detunings, tau_i_truth=args.tau_i,
        seed=args.seed, outdir=_outdir(args),
    )
    print(
        f"lifetime: tau_i = {result.tau_i_fit_us:.0f} +- {result.tau_i_fit_sigma_us:.0f} us "
        f"(subtraction: {result.tau_i_subtraction_us:.0f} us)"
    )
    return 0


def cmd_psd(args) -> int:
    device = _device(args)
    delta = angular(args.detuning)
    system = resonant_system(device, args.vdc, detuning=delta)
    baths = BathSpec(n_wg=args.n_wg, n_b_r=args.n_b_r, n_b_m=args.n_b_m)
    chain = AmplifierChain(gain_db=args.gain, n_add=args.n_add, nu_if=1e3)
    line = mechanical_line_of(system, delta)
    grid = thermometry_grid(system, line)
    trace = synth_psd(system, baths, chain, grid, n_avg=args.n_avg, seed=args.seed)
    out = _outdir(args)
    write_csv(out / "psd.csv", ["frequency_Hz", "psd_W_per_Hz"],
              zip(trace.frequencies, trace.psd))
    write_json(out / "report.json", {
        "device": device.id, "V_dc": args.vdc, "detuning_hz": args.detuning,
        "line_center_hz": cyclic(line.omega_center),
        "gamma_total_hz": cyclic(line.gamma_total),
    })
    print(f"psd: wrote {out}/psd.csv ({trace.frequencies.size} points)")
    return 0


def cmd_thermometry(args) -> int:
    device = _device(args)
    if args.trace:
        header, data = read_csv(args.trace)
        chain = AmplifierChain(gain_db=args.gain, n_add=args.n_add, nu_if=1e3)
        delta = angular(args.detuning)
        system = resonant_system(device, args.vdc, detuning=delta)
        line = mechanical_line_of(system, delta)
        trace = PSDTrace(frequencies=data[:, 0], psd=data[:, 1],
                         rbw=float(np.median(np.diff(data[:, 0]))), n_avg=args.n_avg)
        res = extract_occupancy(trace, system, chain, line)
        out = _outdir(args)
        write_json(out / "occupancy.json", res._asdict())
        print(f"thermometry: n_b_m = {res.n_b_m:.3f} +- {res.n_b_m_sigma:.3f}, "
              f"n_b_r = {res.n_b_r:.3f}")
        return 0
    voltages = np.linspace(args.vmin, args.vmax, args.points)
    result = pipeline_thermometry_vs_V(
        device, voltages, BathSpec(n_b_r=args.n_b_r, n_b_m=args.n_b_m),
        n_avg=args.n_avg, seed=args.seed, outdir=_outdir(args),
    )
    worst = float(np.max(np.abs(result.n_b_m - result.truth_n_b_m)))
    print(f"thermometry: {len(voltages)} points, max |error| = {worst:.3f} quanta")
    return 0


def cmd_calibrate_gain(args) -> int:
    chain = AmplifierChain(gain_db=args.gain, n_add=args.n_add, nu_if=args.nu_if)
    if args.data:
        header, data = read_csv(args.data)
        temps, powers = data[:, 0], data[:, 1]
        sigma = None
    else:
        temps = np.linspace(0.73, 1.05, args.points)
        powers, sigma = synth_johnson_powers(temps, chain, args.nu, seed=args.seed)
    cal = calibrate_gain(temps, powers, args.nu, args.nu_if, sigma=sigma)
    out = _outdir(args)
    write_json(out / "calibration.json", {
        "G_A_db": cal.gain_db, "G_A_db_sigma": cal.gain_db_sigma,
        "T_hemt_K": cal.T_hemt, "T_hemt_sigma_K": cal.T_hemt_sigma,
        "covariance": cal.covariance,
    })
    print(f"calibrate-gain: G_A = {cal.gain_db:.2f} +- {cal.gain_db_sigma:.2f} dB, "
          f"T_HEMT = {cal.T_hemt:.2f} K")
    return 0


def cmd_circuit(args) -> int:
    if args.from_physical:
        circ = from_physical(args.g0, angular(args.f_r), angular(args.f_m),
                             args.c_m, C_r=args.c_r)
    else:
        if None in (args.c_m, args.c_r, args.l_r, args.c_k, args.l_k):
            raise CliError("element mode needs --c-m --c-r --l-r --c-k --l-k")
        circ = EquivalentCircuit(C_m=args.c_m, C_r=args.c_r, L_r=args.l_r,
                                 C_k=args.c_k, L_k_mech=args.l_k)
    derived = resonator_derived(circ)
    at_v = circ.at_voltage(args.vdc) if args.vdc else circ
    g0 = coupling_from_circuit(circ, angular(derived["f_r"]), circ.omega_m)
    report = {
        "C_m_F": circ.C_m, "C_r_F": circ.C_r, "L_r_H": circ.L_r,
        "C_k_F_at_Vref": circ.C_k, "L_k_mech_H_at_Vref": circ.L_k_mech,
        "V_ref": circ.V_ref,
        "f_r_Hz": derived["f_r"], "impedance_Ohm": derived["Z"], "eta": derived["eta"],
        "f_m_Hz": cyclic(circ.omega_m),
        "g0_hz_per_v": g0,
        "kappa_direct_hz": direct_waveguide_decay(at_v, circ.omega_m),
        "kappa_direct_at_V": args.vdc or circ.V_ref,
    }
    write_json(_outdir(args) / "circuit.json", report)
    print(f"circuit: f_r = {format_si(derived['f_r'], 'Hz')}, "
          f"Z = {format_si(derived['Z'], 'Ohm')}, eta = {derived['eta']:.3%}, "
          f"g0 = {format_si(g0, 'Hz')}/V")
    return 0


def cmd_tls(args) -> int:
    params = TLSParams(delta_tunneling=0.0, epsilon_asym=1e-25,
                       ratio_eps_over_E=args.ratio)
    report = {}
    if args.e_field is not None:
        report["stark_hz_per_field"] = stark_shift(params, args.e_field)
    if args.e_zpf is not None:
        report["dipole_coupling_hz"] = dipole_coupling(params, args.e_zpf)
    mode = StrainMode(omega_m=angular(args.f_m), strain_mode_volume=args.mode_volume)
    report.update(strain_coupling_report(params, mode))
    if args.phonons is not None:
        model = TLSLinewidthModel(F=args.tls_f, gamma_tls=args.gamma_tls, n_c=args.n_c,
                                  beta=args.beta, gamma_0=args.gamma_0,
                                  T=args.temperature, omega=angular(args.f_m))
        report["linewidth_hz"] = float(saturable_linewidth(model, args.phonons,
                                                           variant=args.variant))
    write_json(_outdir(args) / "tls.json", report)
    for key, value in report.items():
        print(f"{key}: {value:.6g}")
    return 0


def cmd_pullin(args) -> int:
    act = ParallelPlateActuator(k_spring=args.k, area=args.area, gap0=args.gap)
    v_pi = pull_in_voltage(act)
    report = {"V_PI": v_pi, "gap0_m": args.gap, "k_N_per_m": args.k, "area_m2": args.area}
    if args.vdc is not None:
        gap = equilibrium_gap(act, args.vdc)
        report["V_dc"] = args.vdc
        report["stable"] = gap is not None
        report["gap_m"] = gap
    write_json(_outdir(args) / "pullin.json", report)
    print(f"pullin: V_PI = {v_pi:.2f} V"
          + (f", gap({args.vdc} V) = {report['gap_m']}" if args.vdc is not None else ""))
    return 0


def cmd_fit(args) -> int:
    try:
        model = get_model(args.model)
    except KeyError as err:
        raise CliError(str(err)) from err
    header, data = read_csv(args.data)
    x, y = data[:, 0], data[:, 1]
    if model.complex_valued:
        if data.shape[1] < 3:
            raise CliError("complex model needs columns x, re, im")
        y = data[:, 1] + 1j * data[:, 2]
    if args.init:
        init = np.array([float(v) for v in args.init.split(",")])
    elif model.guess is not None:
        init = model.guess(x, y)
    else:
        raise CliError(f"model {model.name} has no guess; pass --init")
    fit = nls_fit(model, x, y, init)
    out = _outdir(args)
    write_json(out / "fit.json", fit.as_dict())
    print(f"fit[{model.name}]: converged={fit.converged} "
          + " ".join(f"{n}={v:.6g}" for n, v in zip(fit.names, fit.params)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavem",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"cavem {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("devices", help="list the bundled device table")
    p.add_argument("--devices-file", help="alternative device table file")
    p.set_defaults(func=cmd_devices)

    p = sub.add_parser("eit", help="simulate (and optionally fit) an EIT reflection trace")
    _add_common(p)
    p.add_argument("--vdc", type=_qty("V"), default=0.0, help="bias voltage, e.g. '10 V'")
    p.add_argument("--g", type=_qty("Hz"), help="override coupling (cyclic), e.g. '228 kHz'")
    p.add_argument("--detuning", type=_qty("Hz"), default=0.0,
                   help="cavity-mechanics detuning (cyclic Hz)")
    p.add_argument("--noise", type=float, default=0.0, help="complex noise sigma per point")
    p.add_argument("--fit", action="store_true", help="fit the synthesized trace")
    p.set_defaults(func=cmd_eit)

    p = sub.add_parser("crossing", help="avoided-crossing map versus magnetic field")
    _add_common(p)
    p.add_argument("--vdc", type=_qty("V"), default=25.0)
    p.add_argument("--bmax", type=_qty("T"), default=6.3e-3,
                   help="max field, e.g. '6.3 mT' (default stays inside the 6%% tuning envelope)")
    p.add_argument("--points", type=int, default=161)
    p.set_defaults(func=cmd_crossing)

    p = sub.add_parser("ringdown", help="synthesize and fit one ringdown")
    _add_common(p)
    p.add_argument("--tau", type=_qty("s"), default=220e-6, help="decay time, e.g. '220 us'")
    p.add_argument("--n0", type=float, default=100.0, help="initial phonon number")
    p.add_argument("--windows", type=int, default=60)
    p.add_argument("--n-avg", type=float, default=50.0, help="averaging depth")
    p.set_defaults(func=cmd_ringdown)

    p = sub.add_parser("lifetime", help="lifetime versus detuning pipeline")
    _add_common(p)
    p.add_argument("--vdc", type=_qty("V"), default=1.2)
    p.add_argument("--tau-i", type=_qty("s"), default=None, help="truth tau_i (default device)")
    p.add_argument("--dmin", type=_qty("Hz"), default=0.0, help="min detuning (cyclic)")
    p.add_argument("--dmax", type=_qty("Hz"), default=3.2e6, help="max detuning (cyclic)")
    p.add_argument("--points", type=int, default=9)
    p.set_defaults(func=cmd_lifetime)

    p = sub.add_parser("psd", help="thermometry forward model (noise PSD)")
    _add_common(p)
    p.add_argument("--vdc", type=_qty("V"), default=25.0)
    p.add_argument("--detuning", type=_qty("Hz"), default=20e6)
    p.add_argument("--n-wg", type=float, default=0.0)
    p.add_argument("--n-b-r", type=float, default=0.05)
    p.add_argument("--n-b-m", type=float, default=0.86)
    p.add_argument("--n-add", type=float, default=10.0)
    p.add_argument("--gain", type=float, default=65.6, help="chain gain in dB")
    p.add_argument("--n-avg", type=float, default=1e6)
    p.set_defaults(func=cmd_psd)

    p = sub.add_parser("thermometry", help="occupancy extraction (from a trace or synthetic sweep)")
    _add_common(p)
    p.add_argument("--trace", help="CSV (frequency_Hz, psd_W_per_Hz) to analyze")
    p.add_argument("--vdc", type=_qty("V"), default=25.0)
    p.add_argument("--detuning", type=_qty("Hz"), default=20e6)
    p.add_argument("--vmin", type=_qty("V"), default=5.0)
    p.add_argument("--vmax", type=_qty("V"), default=25.0)
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--n-b-r", type=float, default=0.05)
    p.add_argument("--n-b-m", type=float, default=0.05)
    p.add_argument("--n-add", type=float, default=10.0)
    p.add_argument("--gain", type=float, default=65.6)
    p.add_argument("--n-avg", type=float, default=1e6)
    p.set_defaults(func=cmd_thermometry)

    p = sub.add_parser("calibrate-gain", help="fit amplifier gain from hot-load powers")
    _add_common(p, device=False)
    p.add_argument("--data", help="CSV (T_K, P_W); default synthesizes a dataset")
    p.add_argument("--nu", type=_qty("Hz"), default=5e9, help="detection frequency")
    p.add_argument("--nu-if", type=_qty("Hz"), default=1e3, help="IF bandwidth")
    p.add_argument("--gain", type=float, default=65.6, help="truth gain for synthesis (dB)")
    p.add_argument("--n-add", type=float, default=10.0)
    p.add_argument("--points", type=int, default=9)
    p.set_defaults(func=cmd_calibrate_gain)

    p = sub.add_parser("circuit", help="physical <-> equivalent-circuit conversion")
    _add_common(p, device=False)
    p.add_argument("--from-physical", action="store_true",
                   help="build from g0/C_r/frequencies instead of element values")
    p.add_argument("--g0", type=_qty("Hz/V"), default=45.4e3)
    p.add_argument("--f-r", type=_qty("Hz"), default=5.26e9)
    p.add_argument("--f-m", type=_qty("Hz"), default=5.26e9)
    p.add_argument("--c-m", type=_qty("F"), default=0.2e-15, help="e.g. '0.2 fF'")
    p.add_argument("--c-r", type=_qty("F"), default=12.1e-15)
    p.add_argument("--l-r", type=_qty("H"), default=75.8e-9)
    p.add_argument("--c-k", type=_qty("F"), default=None)
    p.add_argument("--l-k", type=_qty("H"), default=None)
    p.add_argument("--vdc", type=_qty("V"), default=None,
                   help="report direct waveguide decay at this bias")
    p.set_defaults(func=cmd_circuit)

    p = sub.add_parser("tls", help="TLS calculators: Stark, strain, dipole, saturation")
    _add_common(p, device=False)
    p.add_argument("--ratio", type=float, default=0.5, help="epsilon/E projection")
    p.add_argument("--e-field", type=_qty("V/m"), default=5e6)
    p.add_argument("--e-zpf", type=_qty("V/m"), default=50.0)
    p.add_argument("--f-m", type=_qty("Hz"), default=5.087e9)
    p.add_argument("--mode-volume", type=_qty("m^3"), default=6e-21)
    p.add_argument("--phonons", type=float, default=None, help="evaluate the linewidth law")
    p.add_argument("--variant", choices=("saturating", "as-printed"), default="saturating")
    p.add_argument("--tls-f", type=float, default=1.0)
    p.add_argument("--gamma-tls", type=_qty("Hz"), default=100e3)
    p.add_argument("--n-c", type=float, default=30.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gamma-0", type=_qty("Hz"), default=30e3)
    p.add_argument("--temperature", type=_qty("K"), default=0.02)
    p.set_defaults(func=cmd_tls)

    p = sub.add_parser("pullin", help="parallel-plate pull-in voltage and stability")
    _add_common(p, device=False)
    p.add_argument("--k", type=float, required=True, help="spring constant in N/m")
    p.add_argument("--gap", type=_qty("m"), required=True, help="rest gap, e.g. '70 nm'")
    p.add_argument("--area", type=_qty("m^2"), required=True, help="plate area in m^2")
    p.add_argument("--vdc", type=_qty("V"), default=None, help="check stability at this bias")
    p.set_defaults(func=cmd_pullin)

    p = sub.add_parser("fit", help="generic model fit on a CSV file")
    _add_common(p, device=False)
    p.add_argument("--model", required=True,
                   help="one of: " + ", ".join(sorted(model_library())))
    p.add_argument("--data", required=True, help="CSV: x,y or x,re,im for complex models")
    p.add_argument("--init", help="comma-separated initial parameters")
    p.set_defaults(func=cmd_fit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except (FitError, DeviceTableError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
