//! Grids, convex domains, cell sets and discrete convex-geometry primitives.

mod cellset;
pub(crate) mod domain;
mod field;
mod faces;
mod grid;
mod subspace;

pub use cellset::{hausdorff_distance, CellSet};
pub use domain::{boundary_layer, make_grid, ConvexDomain, Halfspace};
pub use faces::{affine_rank, direction_sample, exposed_faces, Face, FaceClass, FaceDecomposition};
pub use field::{sublevel_volume, ScalarField};
pub use grid::Grid;
pub use subspace::{dist_to_subspace, AffineSubspace};

pub(crate) use domain::{dot, norm};
