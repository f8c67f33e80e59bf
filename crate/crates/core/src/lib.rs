#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gamma;
pub mod kernel;
pub mod moving_planes;
pub mod rules;

pub use error::{Error, Result};
pub use kernel::{
    gamma_abs_neg, heat_kernel, integrated_time_kernel, normalization_constant, FracParams,
    KernelConstants, SpaceTimePoint,
};
pub mod field;
pub mod operator;
pub mod profiles;
pub mod solver;
pub mod spaces;
pub mod spectral;
pub mod spline;

pub use field::{Exterior, HolderTag, SpaceField, SpaceTimeField, TimeField};
pub use moving_planes::{
    antisymmetric_fold_residual, build_antisym_bump, build_cutoff_eta, folded_operator,
    half_grid_sweep, narrow_region_check, probe_sample_points, random_antisymmetric_field, reflect,
    snap_lambda, symmetry_and_monotonicity_report, tol_geom_from_residual, unbounded_mp_probe,
    verify_lemma_scaling, w_lambda_field, CutoffKind, FoldComparison, LambdaRecord,
    MovingPlaneReport, PlaneConfig, ProbeReport, ProbeSample, ReflectionData, ScalingFit,
    ScalingPoint,
};
pub use operator::{
    fractional_laplacian_pointwise, marchaud_left, marchaud_right, master_operator_pointwise,
    truncation_tail_bound, OperatorValue, QuadratureScheme,
};
pub use solver::{
    assemble_dirichlet_matrix, residual_field, solve_steady, spline_field, Assembly, BallProblem,
    Nonlinearity, PicardConfig, Solution,
};
pub use spaces::{
    parabolic_holder_seminorm, slowly_increasing_membership, MembershipReport, SpaceTimeBox,
    Verdict,
};
pub use spectral::{
    apply_marchaud_left_spectral, apply_operator_spectral, liouville_nullspace_dimension,
    marchaud_symbol, min_nonzero_symbol, principal_pow, project_onto_kernel, spacetime_symbol,
    Complex64, GridField, SpectralResult, TorusGrid,
};
