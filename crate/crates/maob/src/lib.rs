//! Numerical laboratory for the degenerate Monge-Ampère obstacle problem
//!
//!   det D²v = g · v^q · χ_{v>0},   v ≥ 0 convex,
//!
//! on uniform Cartesian grids. The crate provides:
//!
//! * [`geometry`] — grids, convex domains, cell sets, sublevel volumes and
//!   discrete convex-geometry primitives (exposed faces, Hausdorff metric);
//! * [`analytic`] — the closed-form sub/solution families (symmetric
//!   determinant formula, linear- and power-growth families, the cylinder
//!   example, radial power solutions, polytope subsolutions);
//! * [`solver`] — a monotone wide-stencil discretization of det D² with an
//!   outer Picard iteration on the degenerate right-hand side;
//! * [`analysis`] — coincidence-set extraction, free-boundary classification
//!   and scaling-exponent fits.

pub mod analysis;
pub mod analytic;
pub mod error;
pub mod geometry;
pub mod solver;

pub use analysis::{
    classify_gamma, coincidence_set, collar_integral, default_eps_k, flat_dimension, geomspace,
    growth_exponent, section_scaling, FitReport, GammaReport,
};
pub use analytic::{
    build_cylinder, build_family_a, build_family_b, calibrate_c, eval_example, example_det,
    family_exponents, pinned_face_dim, polytope_subsolution, rescale_example, rescale_field,
    subsolution_residual, symmetric_det, AnalyticExample, Derivatives, ExponentInfo,
    SymmetricProfile,
};
pub use analytic::{gamma_discrepancy, radial_power_coefficient, sample_validity_points};
pub use error::MaobError;
pub use geometry::{
    dist_to_subspace, exposed_faces, hausdorff_distance, make_grid, sublevel_volume,
    AffineSubspace, CellSet, ConvexDomain, Face, FaceClass, FaceDecomposition, Grid, Halfspace,
    ScalarField,
};
pub use solver::{
    check_comparison, ma_operator, residual_norm, solve_dirichlet, solve_dirichlet_from,
    ComparisonReport, ProblemSpec,
    SolveOptions, SolveReport, StencilSet,
};

/// Smallest integer strictly larger than `x`, as used in the dimension bound
/// k = ⌈(n+q)/2⌉ − 1: for integer `x` this is `x + 1`, not `x`.
pub fn strict_ceil(x: f64) -> i64 {
    let f = x.floor();
    if (x - f).abs() < 1e-12 {
        f as i64 + 1
    } else {
        x.ceil() as i64
    }
}

#[cfg(test)]
mod tests {
    use super::strict_ceil;

    #[test]
    fn strict_ceil_integer_arguments() {
        assert_eq!(strict_ceil(2.0), 3);
        assert_eq!(strict_ceil(1.5), 2);
        assert_eq!(strict_ceil(1.75), 2);
        // k = strict_ceil((n+q)/2) - 1 for the shipped experiments
        assert_eq!(strict_ceil((2.0 + 1.5) / 2.0) - 1, 1);
        assert_eq!(strict_ceil((3.0 + 1.0) / 2.0) - 1, 2);
    }
}
