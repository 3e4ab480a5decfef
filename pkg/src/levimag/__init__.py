"""Spin-mechanics toolkit for levitated ferromagnets.

Magnetostatic confinement design, stochastic libration dynamics with
realistic detector models, measurement-pipeline analysis (ring-down, PSD,
Lorentzian, lag), NV spin-libration coupling rates, and open-quantum-system
simulation of the exchange protocols (single-phonon preparation, pulsed
sideband cooling).
"""

__version__ = "0.1.0"

from .constants import CONSTANTS, from_hz, to_hz
from .core import (
    IRON,
    NEODYMIUM,
    MagnetBody,
    Material,
    ProlateEllipsoid,
    Sphere,
    get_material,
    libration_inertia,
    load_materials,
    volume,
    volume_inertia_ratio,
)
from .magnetostatics import (
    ConfinementReport,
    DemagFactors,
    confinement_report,
    demag_factors,
    libration_frequency,
    libration_frequency_hard,
    libration_frequency_soft,
    max_field_soft,
    optimal_aspect_ratio,
    stiffness,
    torque_hard,
    torque_soft,
)
from .coupling import (
    CouplingGeometry,
    CouplingReport,
    composite_inertia,
    coupling_map,
    dipole_field,
    dipole_field_derivative,
    optimal_nv_angle,
    scheme1_coupling,
    scheme2_coupling,
    zero_point_angle,
)
from .environment import (
    GasConditions,
    gas_damping,
    knudsen_check,
    mean_molecular_speed,
    thermal_occupation,
)
from .classical import (
    ExcitationSequence,
    LibrationTrajectory,
    ReadoutModel,
    detect,
    simulate,
    spin_response_time,
)
from .analysis import (
    AnalysisError,
    FitReport,
    LagEstimate,
    LinearFit,
    LorentzianFit,
    Spectrum,
    fit_lorentzian,
    fit_ringdown,
    lag_estimate,
    linear_fit,
    psd,
)
from .quantum import (
    DecoherenceParams,
    HybridQuantumState,
    InvariantError,
    build_hamiltonian,
    evolve,
    fock_prep,
    nv_transitions,
    product_state,
    rotate_spin,
    sideband_cool,
    spin_init,
)
