"""Numerical laboratory for harmonic measure and Poisson-kernel bounds on
negatively curved model spaces."""

from .spaces import (
    BallModel,
    CurvatureBounds,
    GeodesicRay,
    WarpedSurface,
    WarpingTable,
    constant_profile,
    default_profile,
    distance,
    exp_map,
    ray_to_boundary,
    riemannian_angle,
    solve_warping,
)
from .invariants import (
    CapSpec,
    ConeSpec,
    TruncatedValue,
    busemann,
    busemann_gromov_identity_slack,
    cap_contains,
    comparison_angle,
    comparison_side,
    cone_contains,
    gromov_product,
    gromov_product_ideal,
    lemma41_slack,
    lemma42_slack,
    lemma43_slack,
    subtended_ball_angle,
)
from .kernel import (
    KernelValue,
    estimate_kernel_cap_ratio,
    exact_kernel_ball,
    kernel_identity_slack,
    theorem11_envelopes,
)
from .brownian import (
    EmpiricalMeasure,
    WalkConfig,
    cap_mass,
    first_exit,
    harmonic_measure,
    measure_from_csv,
    measure_to_csv,
    pushforward_sphere_measure,
    walk_step,
)
from .harness import (
    BoundSample,
    FitReport,
    HolderFunction,
    concentration_experiment,
    fit_theorem11_constants,
    harnack_yau_check,
    lemma32_decay_fit,
    sphere_convergence_experiment,
    stolz_growth_check,
    theorem72_rate,
)

__version__ = "0.1.0"

__all__ = [
    "BallModel",
    "BoundSample",
    "CapSpec",
    "ConeSpec",
    "CurvatureBounds",
    "EmpiricalMeasure",
    "FitReport",
    "GeodesicRay",
    "HolderFunction",
    "KernelValue",
    "TruncatedValue",
    "WalkConfig",
    "WarpedSurface",
    "WarpingTable",
    "busemann",
    "busemann_gromov_identity_slack",
    "cap_contains",
    "cap_mass",
    "comparison_angle",
    "comparison_side",
    "concentration_experiment",
    "cone_contains",
    "constant_profile",
    "default_profile",
    "distance",
    "estimate_kernel_cap_ratio",
    "exact_kernel_ball",
    "exp_map",
    "first_exit",
    "fit_theorem11_constants",
    "gromov_product",
    "gromov_product_ideal",
    "harmonic_measure",
    "harnack_yau_check",
    "kernel_identity_slack",
    "lemma32_decay_fit",
    "lemma41_slack",
    "lemma42_slack",
    "lemma43_slack",
    "measure_from_csv",
    "measure_to_csv",
    "pushforward_sphere_measure",
    "ray_to_boundary",
    "riemannian_angle",
    "solve_warping",
    "sphere_convergence_experiment",
    "stolz_growth_check",
    "subtended_ball_angle",
    "theorem11_envelopes",
    "theorem72_rate",
    "walk_step",
]
