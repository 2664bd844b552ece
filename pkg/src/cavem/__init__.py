"""cavem: cavity-electromechanics forward models and parameter estimation.

Forward physics (EIT reflection, hybridized modes, noise PSDs, TLS and
electrostatic models), an equivalent-circuit view, synthetic-experiment
pipelines and a nonlinear least-squares engine.  Internal frequencies are
angular (rad/s); files, CLI and reports use cyclic Hz.  The coupling g is
cyclic Hz everywhere, as measured.
"""

from ._kernels import backend as kernel_backend
from .circuit import (
    EquivalentCircuit,
    coupling_from_circuit,
    direct_waveguide_decay,
    from_physical,
    mech_equiv_capacitance,
    mech_equiv_inductance,
    resonator_derived,
)
from .device import (
    CouplingLaw,
    DeviceRecord,
    MechanicalMode,
    MicrowaveMode,
    NanowireInductor,
    coupling_at_voltage,
    get_device,
    inductance_vs_current,
    kinetic_inductance,
    load_bundled_devices,
    load_devices,
    save_devices,
    tuned_frequency,
)
from .dynamics import (
    BathSpec,
    TwoModeSystem,
    backaction_occupancies,
    chi_m,
    chi_r,
    cooperativity,
    coherent_phonon_number,
    eit_reflection,
    em_readout_rate,
    hybridized_modes,
    quality_factor,
    spring_shifted_frequency,
)
from .electrostatics import (
    ParallelPlateActuator,
    coupling_scaling,
    equilibrium_gap,
    leakage_fit,
    pull_in_voltage,
    stiffness_from_pull_in,
)
from .fitting import FitError, FitResult, Model, get_model, model_library, nls_fit
from .thermometry import (
    AmplifierChain,
    DrivenResponseAreas,
    MechanicalLine,
    OccupancyResult,
    PSDTrace,
    bath_from_apparent,
    bose_einstein_correction,
    calibrate_gain,
    decay_from_driven_response,
    extract_occupancy,
    johnson_power,
    mech_emission,
    mech_emission_area,
    output_psd,
)
from .tls import (
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
from .units import angular, cyclic, format_si, parse_quantity

__version__ = "0.1.0"
