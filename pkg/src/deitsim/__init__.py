"""deitsim: double-EIT cross-phase modulation models for the Rb-87 D1 line."""

from .analytic import (
    MediumParams,
    PhaseResult,
    RefractiveResult,
    ac_stark_shift,
    eat_amplitudes,
    eat_cross_dipole,
    eit_eta_with_decay,
    eta,
    kerr_chi,
    sat_indices,
    xpm_phase,
)
from .constants import RB87, SpectroscopicConstants, load_constants
from .master import (
    DensityMatrix,
    PrepConfig,
    Trajectory,
    add_motion_channels,
    cross_dipole_num,
    evolve,
    lindblad_rhs,
    prepare_mixture,
)
from .pulses import (
    PulseSpec,
    doppler_window,
    e_max,
    gaussian_field,
    group_velocity,
    max_phase_shift,
    min_pulse_duration,
    transparency_window,
)
from .scheme import (
    DEFAULT_LEVEL_MAP,
    DEFAULT_POLARIZATIONS,
    FieldSet,
    SchemeHamiltonian,
    build_five_level,
    build_full_d1,
    build_seven_level,
    fields_from_structure,
    rabi_from_amplitude,
    scheme_dipoles,
)
from .structure import (
    DipoleElement,
    ZeemanLevel,
    branching_ratios,
    dipole_element,
    get_level,
    magnetic_mismatch,
    zeeman_spectrum,
)

__version__ = "0.1.0"
