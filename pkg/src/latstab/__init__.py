"""Desk-scale verification of lattice U(N) gauge stability bounds.

Submodules
----------
group       U(N) sampling, spectra, exp/log maps, Lie coordinates
lattice     hypercubic geometry, counting formulas, maximal-tree gauge fixing
action      plaquette holonomy, Wilson action, quadratic upper bounds
weyl        class-function quadrature, ensemble densities and constants
bounds      one-plaquette partition functions and closed-form sandwiches
montecarlo  direct-sampling partition function and generating functional
scalar      free scalar field propagators and scaling relations
cli         command-line verification suites
"""

from .action import (
    GaugeConfig,
    GluonField,
    holonomy,
    lemma1_bound,
    lemma1_violations,
    plaquette_action,
    small_a_consistency,
    total_action,
)
from .bounds import (
    BoundReport,
    ModelParams,
    c_lower,
    c_upper,
    jensen_xi,
    normalized_free_energy,
    theorem2_bounds,
    z_l,
    z_u,
)
from .group import (
    LieBasis,
    RngState,
    ValidationError,
    angular_eigenvalues,
    exp_map,
    haar_sample,
    lie_coords,
    principal_log,
)
from .lattice import (
    Bond,
    GaugeFixing,
    Lattice,
    LatticeCounts,
    Plaquette,
    build_lattice,
    counts,
    enhanced_temporal_gauge,
)
from .montecarlo import (
    MCEstimate,
    Sampler,
    SourceSpec,
    correlation_cauchy,
    estimate_genfun,
    estimate_partition,
    genfun_on_circles,
    partition_estimate,
    plaquette_field_trace,
    z_u_j,
)
from .scalar import (
    ScalarFieldParams,
    coincident_bound_constant,
    gaussian_genfun,
    particle_mass,
    propagator_scaled,
    propagator_unscaled,
    scaled_hopping,
    scaling_factor,
)
from .weyl import (
    ClassFunction,
    QuadratureScheme,
    cue_density,
    ensemble_constants,
    i_beta,
    weyl_integrate,
)

__version__ = "0.1.0"
