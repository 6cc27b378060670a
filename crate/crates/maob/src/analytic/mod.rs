//! Closed-form sub- and supersolution families and their calibration.

mod calibrate;
mod families;
mod polytope;
mod profile;

pub use calibrate::{
    build_cylinder, build_family_a, build_family_b, calibrate_c, choose_tau, convexity_holds,
    rescale_example, rescale_field, sample_validity_points, subsolution_residual, Rescaled,
    ResidualReport, CALIBRATION_SEED,
};
pub use families::{
    eval_example, example_det, family_exponents, gamma_discrepancy, radial_power_coefficient,
    AnalyticExample, Derivatives, ExponentInfo, FaceFrame, FamilyVariant, GammaDiscrepancy,
    PolytopeSubData,
};
pub use polytope::{pinned_face_dim, polytope_subsolution};
pub use profile::{symmetric_det, BivariateFn, SymmetricProfile, UPartials};
