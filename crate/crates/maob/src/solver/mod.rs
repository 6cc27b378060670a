//! Monotone wide-stencil discretization of det D² and the obstacle solver.

mod compare;
mod dirichlet;
mod operator;
mod stencil;

pub use compare::{check_comparison, ComparisonReport};
pub use dirichlet::{
    residual_norm, solve_dirichlet, solve_dirichlet_from, ProblemSpec, SolveOptions, SolveReport,
};
pub use operator::{frame_solve, ma_operator};
pub use stencil::StencilSet;
