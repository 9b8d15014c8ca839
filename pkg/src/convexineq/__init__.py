"""Numerical instantiation and verification of transportation-cost,
concentration, and log-Sobolev-type inequalities on convex bodies.

The package is organized as: geometry (bodies, affine maps, quadrature),
sampling (exact and hit-and-run uniform samplers), isotropy (position
fitting, volume ratios, relative entropy), transport (discrete optimal
transport and empirical Wasserstein distances), functional (test functions,
entropy/variance functionals, trace log-Sobolev and 1-D chain verification),
concentration (tail profiles and the mean-norm audit), plus a manifest CLI
and the 12-criterion acceptance suite.
"""

from .concentration import (
    ConcentrationFit,
    Lemma1Audit,
    LipschitzFunctional,
    TauProxyResult,
    concentration_profile,
    coordinate_functional,
    direction_functional,
    lemma1_audit,
    norm_functional,
    tau1_proxy,
)
from .errors import (
    ChainStuckError,
    ContainmentError,
    ConvexIneqError,
    DegenerateBodyError,
    DimensionMismatchError,
    FunctionalDomainError,
    ManifestError,
    NotNormalizedError,
    QuadratureUnsupportedError,
    SamplingError,
    SolverError,
    UnboundedBodyError,
)
from .estimate import Estimate, combined_stderr
from .functional import (
    BrenierChain1D,
    DirichletConstants,
    StepRecord,
    TLSIReport,
    TestFunction,
    brenier_chain_check_1d,
    brenier_target_length,
    dirichlet_lsi_constants,
    entropy_functional,
    from_grid,
    kls_quantity,
    linear,
    lsi_quotient,
    polynomial,
    radial,
    random_trig,
    rayleigh_quotient,
    shift_positive,
    tlsi_coefficients,
    tlsi_verify,
    trigonometric,
    variance_functional,
)
from .geometry import (
    AffineImage,
    AffineMap,
    Ball,
    BoundaryMesh,
    ConvexBody,
    Cube,
    HPolytope,
    L1Ball,
    RectUnion,
    apply_affine,
    ball_volume_one,
    body_from_json,
    body_to_json,
    boundary_quadrature,
    bounding_box,
    contains,
    cube_volume_one,
    fingerprint,
    interior_quadrature,
    interval,
    interval_bounds,
    l1_ball_volume_one,
    normalize_to_volume_one,
    support,
    surface_area,
    unit_ball_volume,
    unit_sphere_area,
    volume,
    volume_with_error,
)
from .isotropy import (
    IsotropyReport,
    covariance,
    inscribe_scale,
    isotropic_constant,
    isotropic_position,
    relative_entropy_uniform,
    volume_ratio,
)
from .sampling import PointCloud, estimate_mean_norm_p, hit_and_run, sample_uniform
from .transport import (
    CouplingPlan,
    DiscreteMeasure,
    cost_matrix,
    exact_ot,
    permutation_oracle,
    sinkhorn,
    tci_tau_records,
    tci_tau_upper_bound,
    w1_to_point_mass,
    wasserstein_1d,
    wasserstein_empirical,
)

__version__ = "0.1.0"

__all__ = [
    "AffineImage",
    "AffineMap",
    "Ball",
    "BoundaryMesh",
    "BrenierChain1D",
    "ChainStuckError",
    "ConcentrationFit",
    "ContainmentError",
    "ConvexBody",
    "ConvexIneqError",
    "CouplingPlan",
    "Cube",
    "DegenerateBodyError",
    "DimensionMismatchError",
    "DirichletConstants",
    "DiscreteMeasure",
    "Estimate",
    "FunctionalDomainError",
    "HPolytope",
    "IsotropyReport",
    "L1Ball",
    "Lemma1Audit",
    "LipschitzFunctional",
    "ManifestError",
    "NotNormalizedError",
    "PointCloud",
    "QuadratureUnsupportedError",
    "RectUnion",
    "SamplingError",
    "SolverError",
    "StepRecord",
    "TLSIReport",
    "TauProxyResult",
    "TestFunction",
    "UnboundedBodyError",
    "apply_affine",
    "ball_volume_one",
    "body_from_json",
    "body_to_json",
    "boundary_quadrature",
    "bounding_box",
    "brenier_chain_check_1d",
    "brenier_target_length",
    "combined_stderr",
    "concentration_profile",
    "contains",
    "coordinate_functional",
    "cost_matrix",
    "covariance",
    "cube_volume_one",
    "direction_functional",
    "dirichlet_lsi_constants",
    "entropy_functional",
    "estimate_mean_norm_p",
    "exact_ot",
    "fingerprint",
    "from_grid",
    "hit_and_run",
    "inscribe_scale",
    "interior_quadrature",
    "interval",
    "interval_bounds",
    "isotropic_constant",
    "isotropic_position",
    "kls_quantity",
    "l1_ball_volume_one",
    "lemma1_audit",
    "linear",
    "lsi_quotient",
    "norm_functional",
    "normalize_to_volume_one",
    "permutation_oracle",
    "polynomial",
    "radial",
    "random_trig",
    "rayleigh_quotient",
    "relative_entropy_uniform",
    "sample_uniform",
    "shift_positive",
    "sinkhorn",
    "support",
    "surface_area",
    "tau1_proxy",
    "tci_tau_records",
    "tci_tau_upper_bound",
    "tlsi_coefficients",
    "tlsi_verify",
    "trigonometric",
    "unit_ball_volume",
    "unit_sphere_area",
    "variance_functional",
    "volume",
    "volume_ratio",
    "volume_with_error",
    "w1_to_point_mass",
    "wasserstein_1d",
    "wasserstein_empirical",
]
