"""Numerical laboratory for nearly parallel quantized vortex filaments.

The package integrates the Klein-Majda-Damodaran filament system and the
3D Gross-Pitaevskii equation side by side, and provides the vorticity,
matching-distance, and renormalized-energy diagnostics used to compare the
two descriptions at finite core scale.
"""

__version__ = "0.1.0"

from .energies import (
    gradient_W,
    hamiltonian_G0,
    interaction_W,
    kappa,
    renormalized_W_omega,
    w_eps,
)
from .errors import (
    CollisionImminent,
    FilamentLabError,
    FilamentTooCloseToBoundary,
    FormatError,
    InvalidParameters,
    NonConvergence,
    NonSimpleConfiguration,
    PointOutsideDomain,
    RadiusTooLarge,
    SingularPoint,
    SolverFailure,
    TimeGridMismatch,
    VersionMismatch,
)
from .gamma import estimate_gamma
from .geometry import (
    CutoffSpec,
    DomainGeometry,
    FilamentConfiguration,
    ScaleParameters,
    chi,
    chi_r,
    cutoff_chi_f,
    cutoff_chi_f_scaled,
    h_epsilon,
    min_separation,
)
from .gp import (
    ComplexField,
    GpConfig,
    InitialDataSpec,
    build_initial_data,
    checkpoint_load,
    checkpoint_save,
    energy_G_eps,
    energy_e2d,
    filament_trajectory_load,
    filament_trajectory_save,
    gp_step,
    resonance_dt_bound,
    run_to_rescaled_time,
    surplus_sigma2d,
)
from .greens import harmonic_correction_H, jstar_domain, jstar_plane
from .kmd import (
    IntegratorConfig,
    KmdParameters,
    KmdState,
    ReferenceSolution,
    conserved_quantities,
    kmd_rhs,
    reference_evaluate,
    run,
    step,
)
from .discrepancy import (
    DiscrepancyReport,
    GronwallRecord,
    concentration_T,
    gronwall_functionals,
    slice_discrepancy,
)
from .matching import w11_match_deltas, w11_norm_grid
from .vortices import SliceVortexSet, detect_vortices, jacobian_J, momentum_j
