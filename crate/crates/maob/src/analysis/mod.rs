//! Coincidence-set extraction, free-boundary classification and scaling fits.

mod collar;
mod fits;
mod kset;

pub use collar::collar_integral;
pub use fits::{geomspace, growth_exponent, section_scaling, FitReport};
pub use kset::{classify_gamma, coincidence_set, default_eps_k, flat_dimension, GammaReport};
