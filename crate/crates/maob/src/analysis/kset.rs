use crate::error::{MaobError, Result};
use crate::geometry::{
    exposed_faces, CellSet, ConvexDomain, Face, FaceClass, FaceDecomposition, ScalarField,
};

/// Scale-aware zero threshold for coincidence-set extraction: the solver's
/// residual propagated through the v ~ det^{ (n-q)/2 }-type scaling, floored
/// at the quadratic grid resolution h².
pub fn default_eps_k(n: usize, q: f64, final_residual: f64, h: f64) -> f64 {
    let prop = if final_residual > 0.0 {
        10.0 * final_residual.powf(2.0 / (n as f64 - q))
    } else {
        0.0
    };
    prop.max(h * h)
}

/// Cells on which the field vanishes: all corners masked and below eps_k.
pub fn coincidence_set(v: &ScalarField, eps_k: f64) -> CellSet {
    let grid = &v.grid;
    let mut cells = Vec::new();
    for c in 0..grid.cell_count() {
        let corners = grid.cell_corners(&grid.cell_multi(c));
        if corners.iter().all(|&i| v.mask[i] && v.values[i] < eps_k) {
            cells.push(c);
        }
    }
    CellSet::new(grid.clone(), cells)
}

/// Coincidence set, free-boundary face classification and the measure
/// dichotomy for a solved field.
#[derive(Debug, Clone)]
pub struct GammaReport {
    pub decomposition: FaceDecomposition,
    /// |K| > 0 branch of the dichotomy: more than 2^n cells
    pub positive_measure: bool,
    pub cell_count: usize,
}

impl GammaReport {
    /// Faces classified as part of the non-strictly-convex free boundary.
    pub fn nsc_faces(&self) -> impl Iterator<Item = &Face> {
        self.decomposition
            .faces
            .iter()
            .filter(|f| f.class == FaceClass::NonStrictlyConvexFace)
    }
}

/// Classify the free boundary of a coincidence set: a face belongs to the
/// non-strictly-convex part iff it is at least 1-dimensional and either its
/// extreme points reach ∂Ω or the coincidence set has positive measure
/// (flat pieces bounding a solid K are never strictly convex points);
/// 0-dimensional faces are strictly convex points. Also reports the
/// |K| > 0 vs |K| = 0 dichotomy (threshold: 2^n cells).
pub fn classify_gamma(
    k: &CellSet,
    omega: &ConvexDomain,
    v: &ScalarField,
) -> Result<GammaReport> {
    if k.is_empty() {
        return Err(MaobError::EmptyCellSet);
    }
    let tol_face = 1.5 * v.grid.max_h();
    let mut decomposition = exposed_faces(k, omega, tol_face)?;
    let cell_count = k.cells.len();
    let positive_measure = cell_count > 1usize << v.grid.dim;
    for face in decomposition.faces.iter_mut() {
        if face.on_domain_boundary {
            face.class = FaceClass::Unclassified;
        } else if face.affine_dim >= 1
            && (face.exposed_extremes_on_boundary || positive_measure)
        {
            face.class = FaceClass::NonStrictlyConvexFace;
        } else {
            face.class = FaceClass::StrictlyConvexPoint;
        }
    }
    Ok(GammaReport { decomposition, positive_measure, cell_count })
}

/// Affine dimension of a face of the coincidence set (rank of the centered
/// face-cell coordinates, tolerance 1.5·max h, computed by exposed_faces).
pub fn flat_dimension(face: &Face) -> usize {
    face.affine_dim
}
