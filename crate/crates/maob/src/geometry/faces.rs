use nalgebra::DMatrix;

use crate::error::{MaobError, Result};
use crate::geometry::cellset::CellSet;
use crate::geometry::domain::{dot, norm, ConvexDomain};

/// Classification attached to a face by the free-boundary analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceClass {
    Unclassified,
    StrictlyConvexPoint,
    NonStrictlyConvexFace,
}

/// One face of the discrete convex hull of a cell set: the cells supported
/// by a common hyperplane within the grouping tolerance.
#[derive(Debug, Clone)]
pub struct Face {
    pub cells: Vec<usize>,
    pub normal: Vec<f64>,
    pub affine_dim: usize,
    /// Extreme points of the face lie within tolerance of ∂Ω
    /// (discrete proxy for the Σ_v criterion).
    pub exposed_extremes_on_boundary: bool,
    /// All face cells hug ∂Ω; such faces belong to the fixed boundary,
    /// not to the free boundary.
    pub on_domain_boundary: bool,
    pub class: FaceClass,
}

#[derive(Debug, Clone)]
pub struct FaceDecomposition {
    pub faces: Vec<Face>,
    pub tol_face: f64,
}

impl FaceDecomposition {
    /// Faces eligible for free-boundary classification.
    pub fn interior_faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| !f.on_domain_boundary)
    }
}

/// Quasi-uniform unit direction sample augmented with exact lattice
/// directions (so that grid-aligned faces are found by their true normals).
pub fn direction_sample(dim: usize) -> Vec<Vec<f64>> {
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    match dim {
        1 => {
            dirs.push(vec![1.0]);
            dirs.push(vec![-1.0]);
        }
        2 => {
            let m = 720;
            for i in 0..m {
                let t = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                dirs.push(vec![t.cos(), t.sin()]);
            }
        }
        3 => {
            // Fibonacci sphere
            let m = 1200;
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            for i in 0..m {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / m as f64;
                let r = (1.0 - z * z).sqrt();
                let t = 2.0 * std::f64::consts::PI * i as f64 / golden;
                dirs.push(vec![r * t.cos(), r * t.sin(), z]);
            }
        }
        _ => {
            // lattice directions with entries in {-1,0,1} only
            let count = 3usize.pow(dim as u32);
            for code in 0..count {
                let mut v = vec![0.0; dim];
                let mut c = code;
                for a in 0..dim {
                    v[a] = (c % 3) as f64 - 1.0;
                    c /= 3;
                }
                let n = norm(&v);
                if n > 0.0 {
                    dirs.push(v.iter().map(|x| x / n).collect());
                }
            }
        }
    }
    if dim == 2 || dim == 3 {
        let wmax = 3i64;
        let count = (2 * wmax + 1).pow(dim as u32);
        for code in 0..count {
            let mut v = vec![0.0; dim];
            let mut c = code;
            for a in 0..dim {
                v[a] = ((c % (2 * wmax + 1)) - wmax) as f64;
                c /= 2 * wmax + 1;
            }
            let n = norm(&v);
            if n > 0.0 {
                dirs.push(v.iter().map(|x| x / n).collect());
            }
        }
    }
    dirs
}

/// Numerical affine rank of a point cloud: singular values of the centered
/// coordinates above `tol`.
pub fn affine_rank(points: &[Vec<f64>], tol: f64) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let dim = points[0].len();
    let m = points.len();
    let mut centroid = vec![0.0; dim];
    for p in points {
        for a in 0..dim {
            centroid[a] += p[a];
        }
    }
    for c in centroid.iter_mut() {
        *c /= m as f64;
    }
    let mat = DMatrix::from_fn(m, dim, |i, j| points[i][j] - centroid[j]);
    let svd = mat.svd(false, false);
    svd.singular_values
        .iter()
        .filter(|&&s| s > tol * (m as f64).sqrt())
        .count()
}

/// Decompose the discrete convex hull of `k` into exposed faces.
///
/// For every sampled direction the supporting set within `tol_face` is a
/// candidate face; candidates that are subsets of another are absorbed.
/// Faces are annotated with their affine dimension and with whether their
/// extreme points reach ∂Ω.
pub fn exposed_faces(
    k: &CellSet,
    omega: &ConvexDomain,
    tol_face: f64,
) -> Result<FaceDecomposition> {
    if k.is_empty() {
        return Err(MaobError::EmptyCellSet);
    }
    let centers = k.centers();
    let dim = k.grid.dim;
    let dirs = direction_sample(dim);
    let tol_bd = 1.5 * k.grid.max_h();

    // Candidate faces: supporting sets per direction, plus the argmax points
    // as the extreme-point sample.
    let mut candidates: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    let mut extreme_flags = vec![false; centers.len()];
    for d in &dirs {
        let mut s = f64::NEG_INFINITY;
        let mut argmax = 0usize;
        for (i, p) in centers.iter().enumerate() {
            let v = dot(d, p);
            if v > s {
                s = v;
                argmax = i;
            }
        }
        extreme_flags[argmax] = true;
        let members: Vec<usize> = (0..centers.len())
            .filter(|&i| dot(d, &centers[i]) >= s - tol_face)
            .collect();
        candidates.push((members, d.clone()));
    }

    // Absorb subset candidates into larger faces.
    candidates.sort_by(|a, b| b.0.len().cmp(&a.0.len()));
    let mut kept: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
    let mut kept_sets: Vec<std::collections::HashSet<usize>> = Vec::new();
    for (members, d) in candidates {
        let is_sub = kept_sets
            .iter()
            .any(|s| members.iter().all(|i| s.contains(i)));
        if !is_sub {
            kept_sets.push(members.iter().cloned().collect());
            kept.push((members, d));
        }
    }

    let mut faces = Vec::new();
    for (members, normal) in kept {
        let pts: Vec<Vec<f64>> = members.iter().map(|&i| centers[i].clone()).collect();
        let affine_dim = affine_rank(&pts, tol_face).min(dim - 1);
        let on_domain_boundary = pts.iter().all(|p| omega.boundary_dist(p) <= tol_bd);
        // extreme points of the face: its members that are extreme for the
        // whole cloud, or the face's own support argmaxes
        let mut ext_pts: Vec<&Vec<f64>> = members
            .iter()
            .filter(|&&i| extreme_flags[i])
            .map(|&i| &centers[i])
            .collect();
        if ext_pts.is_empty() {
            ext_pts = pts.iter().collect();
        }
        let exposed_extremes_on_boundary =
            ext_pts.iter().all(|p| omega.boundary_dist(p) <= tol_bd);
        faces.push(Face {
            cells: members.iter().map(|&i| k.cells[i]).collect(),
            normal,
            affine_dim,
            exposed_extremes_on_boundary,
            on_domain_boundary,
            class: FaceClass::Unclassified,
        });
    }
    Ok(FaceDecomposition { faces, tol_face })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::make_grid;
    use crate::geometry::grid::Grid;

    #[test]
    fn slab_in_disk_has_flat_face_pair_reaching_boundary() {
        let omega = ConvexDomain::unit_ball(2);
        let (grid, _mask) = make_grid(&omega, &[64, 64]).unwrap();
        let h = grid.max_h();
        let cells: Vec<usize> = (0..grid.cell_count())
            .filter(|&c| {
                let p = grid.cell_center_flat(c);
                p[1].abs() <= h && p[0] * p[0] + p[1] * p[1] <= 1.0
            })
            .collect();
        let k = CellSet::new(grid, cells);
        let dec = exposed_faces(&k, &omega, 1.5 * h).unwrap();
        // both slab sides support the same cells (the slab is thinner than
        // the grouping tolerance), so they merge into one flat face
        let flat: Vec<&Face> = dec
            .faces
            .iter()
            .filter(|f| f.affine_dim == 1 && f.exposed_extremes_on_boundary)
            .collect();
        assert!(!flat.is_empty(), "no flat face reaching the boundary");
        let big = flat.iter().max_by_key(|f| f.cells.len()).unwrap();
        let xs: Vec<f64> = big
            .cells
            .iter()
            .map(|&c| k.grid.cell_center(&k.grid.cell_multi(c))[0])
            .collect();
        let span = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - xs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(span > 1.5, "face spans only {span}");
    }

    #[test]
    fn single_cell_is_a_point_face() {
        let omega = ConvexDomain::unit_ball(2);
        let (grid, _mask) = make_grid(&omega, &[32, 32]).unwrap();
        let center_cell = grid.cell_index(&[16, 16]);
        let k = CellSet::new(grid.clone(), vec![center_cell]);
        let dec = exposed_faces(&k, &omega, 1.5 * grid.max_h()).unwrap();
        assert_eq!(dec.faces.len(), 1);
        assert_eq!(dec.faces[0].affine_dim, 0);
        assert!(!dec.faces[0].exposed_extremes_on_boundary);
    }

    #[test]
    fn square_in_large_domain_has_four_edges_inside() {
        let omega = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 4.0 };
        let grid = Grid::new(vec![-4.0, -4.0], vec![4.0, 4.0], vec![64, 64]).unwrap();
        let cells: Vec<usize> = (0..grid.cell_count())
            .filter(|&c| {
                let p = grid.cell_center_flat(c);
                p[0].abs() <= 1.0 && p[1].abs() <= 1.0
            })
            .collect();
        let k = CellSet::new(grid.clone(), cells);
        let dec = exposed_faces(&k, &omega, 1.5 * grid.max_h()).unwrap();
        let edges: Vec<&Face> = dec.faces.iter().filter(|f| f.affine_dim == 1).collect();
        assert_eq!(edges.len(), 4, "square should expose exactly 4 edges");
        for e in edges {
            assert!(!e.exposed_extremes_on_boundary);
            assert!(!e.on_domain_boundary);
        }
    }

    #[test]
    fn empty_set_errors() {
        let omega = ConvexDomain::unit_ball(2);
        let grid = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![8, 8]).unwrap();
        let k = CellSet::new(grid, vec![]);
        assert!(exposed_faces(&k, &omega, 0.1).is_err());
    }

    #[test]
    fn affine_rank_of_flat_cloud() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![0.5, 0.001],
            vec![1.0, -0.001],
            vec![1.5, 0.0],
        ];
        assert_eq!(affine_rank(&pts, 0.05), 1);
        assert_eq!(affine_rank(&pts, 1e-6), 2);
    }
}
