use nalgebra::{DMatrix, DVector};

use crate::error::{MaobError, Result};
use crate::geometry::grid::Grid;

/// Closed halfspace `a·x <= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub a: Vec<f64>,
    pub b: f64,
}

impl Halfspace {
    pub fn new(a: Vec<f64>, b: f64) -> Halfspace {
        Halfspace { a, b }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        dot(&self.a, x) - self.b
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.eval(x) <= 0.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Bounded convex domain Ω ⊂ R^n.
#[derive(Debug, Clone)]
pub enum ConvexDomain {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Polytope { halfspaces: Vec<Halfspace> },
    Hull { points: Vec<Vec<f64>> },
}

impl ConvexDomain {
    pub fn unit_ball(dim: usize) -> ConvexDomain {
        ConvexDomain::Ball { center: vec![0.0; dim], radius: 1.0 }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexDomain::Ball { center, .. } => center.len(),
            ConvexDomain::Box { lo, .. } => lo.len(),
            ConvexDomain::Polytope { halfspaces } => {
                halfspaces.first().map(|h| h.a.len()).unwrap_or(0)
            }
            ConvexDomain::Hull { points } => points.first().map(|p| p.len()).unwrap_or(0),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            ConvexDomain::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(u, c)| (u - c) * (u - c)).sum();
                d2.sqrt() <= *radius
            }
            ConvexDomain::Box { lo, hi } => x
                .iter()
                .enumerate()
                .all(|(a, &v)| v >= lo[a] && v <= hi[a]),
            ConvexDomain::Polytope { halfspaces } => halfspaces.iter().all(|h| h.contains(x)),
            ConvexDomain::Hull { points } => {
                // Outer approximation through sampled support directions.
                hull_dirs(x.len()).iter().all(|d| {
                    let s = points
                        .iter()
                        .map(|p| dot(d, p))
                        .fold(f64::NEG_INFINITY, f64::max);
                    dot(d, x) <= s + 1e-12
                })
            }
        }
    }

    /// Distance from an interior point to ∂Ω (clamped at 0 outside).
    pub fn boundary_dist(&self, x: &[f64]) -> f64 {
        match self {
            ConvexDomain::Ball { center, radius } => {
                let d: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(u, c)| (u - c) * (u - c))
                    .sum::<f64>()
                    .sqrt();
                (radius - d).abs()
            }
            ConvexDomain::Box { lo, hi } => x
                .iter()
                .enumerate()
                .map(|(a, &v)| (v - lo[a]).abs().min((hi[a] - v).abs()))
                .fold(f64::INFINITY, f64::min),
            ConvexDomain::Polytope { halfspaces } => halfspaces
                .iter()
                .map(|h| h.eval(x).abs() / norm(&h.a).max(1e-300))
                .fold(f64::INFINITY, f64::min),
            ConvexDomain::Hull { points } => hull_dirs(x.len())
                .iter()
                .map(|d| {
                    let s = points
                        .iter()
                        .map(|p| dot(d, p))
                        .fold(f64::NEG_INFINITY, f64::max);
                    (s - dot(d, x)).abs()
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Tight axis-aligned bounding box; errors on empty or unbounded sets.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            ConvexDomain::Ball { center, radius } => {
                if *radius <= 0.0 {
                    return Err(MaobError::DegenerateDomain("ball radius <= 0".into()));
                }
                Ok((
                    center.iter().map(|c| c - radius).collect(),
                    center.iter().map(|c| c + radius).collect(),
                ))
            }
            ConvexDomain::Box { lo, hi } => {
                if lo.iter().zip(hi).any(|(l, h)| l >= h) {
                    return Err(MaobError::DegenerateDomain("box with lo >= hi".into()));
                }
                Ok((lo.clone(), hi.clone()))
            }
            ConvexDomain::Polytope { halfspaces } => {
                let verts = polytope_vertices(halfspaces)?;
                bbox_of_points(&verts)
            }
            ConvexDomain::Hull { points } => {
                if points.is_empty() {
                    return Err(MaobError::DegenerateDomain("empty hull".into()));
                }
                bbox_of_points(points)
            }
        }
    }
}

fn bbox_of_points(points: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = points[0].len();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in points {
        for a in 0..dim {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
        return Err(MaobError::DegenerateDomain("empty interior".into()));
    }
    Ok((lo, hi))
}

/// Vertex enumeration by intersecting n-subsets of bounding hyperplanes.
/// Adequate for the small halfspace counts used here.
pub(crate) fn polytope_vertices(halfspaces: &[Halfspace]) -> Result<Vec<Vec<f64>>> {
    let m = halfspaces.len();
    let n = halfspaces.first().map(|h| h.a.len()).unwrap_or(0);
    if m < n + 1 {
        return Err(MaobError::DegenerateDomain(
            "too few halfspaces for a bounded polytope".into(),
        ));
    }
    let mut verts: Vec<Vec<f64>> = Vec::new();
    let mut subset = vec![0usize; n];
    enumerate_subsets(m, n, &mut subset, 0, 0, &mut |idx: &[usize]| {
        let mat = DMatrix::from_fn(n, n, |i, j| halfspaces[idx[i]].a[j]);
        let rhs = DVector::from_fn(n, |i, _| halfspaces[idx[i]].b);
        if let Some(sol) = mat.lu().solve(&rhs) {
            let x: Vec<f64> = sol.iter().cloned().collect();
            if x.iter().all(|v| v.is_finite())
                && halfspaces.iter().all(|h| h.eval(&x) <= 1e-9)
            {
                verts.push(x);
            }
        }
    });
    if verts.is_empty() {
        return Err(MaobError::DegenerateDomain(
            "inconsistent halfspaces (empty polytope)".into(),
        ));
    }
    Ok(verts)
}

pub(crate) fn enumerate_subsets(
    m: usize,
    n: usize,
    subset: &mut Vec<usize>,
    pos: usize,
    start: usize,
    f: &mut impl FnMut(&[usize]),
) {
    if pos == n {
        f(subset);
        return;
    }
    for i in start..m {
        subset[pos] = i;
        enumerate_subsets(m, n, subset, pos + 1, i + 1, f);
    }
}

/// Direction sample for Hull support tests.
fn hull_dirs(dim: usize) -> Vec<Vec<f64>> {
    super::faces::direction_sample(dim)
}

/// Build the tight bounding-box grid for Ω with the inside mask.
pub fn make_grid(domain: &ConvexDomain, res: &[usize]) -> Result<(Grid, Vec<bool>)> {
    let (lo, hi) = domain.bounding_box()?;
    if res.len() != lo.len() {
        return Err(MaobError::InvalidGrid("res length != domain dim".into()));
    }
    let grid = Grid::new(lo, hi, res.to_vec())?;
    let mask: Vec<bool> = (0..grid.node_count())
        .map(|i| domain.contains(&grid.node_coord_flat(i)))
        .collect();
    if !mask.iter().any(|&b| b) {
        return Err(MaobError::DegenerateDomain("no grid node inside domain".into()));
    }
    Ok((grid, mask))
}

/// Mask nodes that have an axis neighbor outside the mask (or off-grid).
pub fn boundary_layer(grid: &Grid, mask: &[bool]) -> Vec<bool> {
    let n = grid.dim;
    (0..grid.node_count())
        .map(|flat| {
            if !mask[flat] {
                return false;
            }
            let multi = grid.node_multi(flat);
            for a in 0..n {
                for s in [-1i64, 1] {
                    let mut off = vec![0i64; n];
                    off[a] = s;
                    match grid.offset_node(&multi, &off) {
                        Some(nb) => {
                            if !mask[nb] {
                                return true;
                            }
                        }
                        None => return true,
                    }
                }
            }
            false
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_grid_masks_center() {
        let d = ConvexDomain::unit_ball(2);
        let (grid, mask) = make_grid(&d, &[4, 4]).unwrap();
        assert_eq!(grid.node_count(), 25);
        let center = grid.node_index(&[2, 2]);
        assert!(mask[center]);
        // box corner is outside the ball
        assert!(!mask[grid.node_index(&[0, 0])]);
    }

    #[test]
    fn box_grid_spacing() {
        let d = ConvexDomain::Box { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] };
        let (grid, mask) = make_grid(&d, &[10, 10]).unwrap();
        assert!((grid.h[0] - 0.1).abs() < 1e-15);
        assert!(mask.iter().all(|&b| b));
    }

    #[test]
    fn empty_polytope_is_an_error() {
        let d = ConvexDomain::Polytope {
            halfspaces: vec![
                Halfspace::new(vec![1.0, 0.0], -1.0),  // x <= -1
                Halfspace::new(vec![-1.0, 0.0], -1.0), // x >= 1
                Halfspace::new(vec![0.0, 1.0], 1.0),
                Halfspace::new(vec![0.0, -1.0], 1.0),
            ],
        };
        assert!(matches!(make_grid(&d, &[4, 4]), Err(MaobError::DegenerateDomain(_))));
    }

    #[test]
    fn polytope_square_bbox() {
        let d = ConvexDomain::Polytope {
            halfspaces: vec![
                Halfspace::new(vec![1.0, 0.0], 0.5),
                Halfspace::new(vec![-1.0, 0.0], 0.5),
                Halfspace::new(vec![0.0, 1.0], 0.25),
                Halfspace::new(vec![0.0, -1.0], 0.25),
            ],
        };
        let (lo, hi) = d.bounding_box().unwrap();
        assert!((lo[0] + 0.5).abs() < 1e-9 && (hi[1] - 0.25).abs() < 1e-9);
        assert!(d.contains(&[0.3, -0.2]));
        assert!(!d.contains(&[0.6, 0.0]));
    }

    #[test]
    fn boundary_layer_ring() {
        let d = ConvexDomain::unit_ball(2);
        let (grid, mask) = make_grid(&d, &[16, 16]).unwrap();
        let layer = boundary_layer(&grid, &mask);
        let center = grid.node_index(&[8, 8]);
        assert!(!layer[center]);
        assert!(layer.iter().any(|&b| b));
    }

    #[test]
    fn boundary_dist_ball() {
        let d = ConvexDomain::unit_ball(2);
        assert!((d.boundary_dist(&[0.5, 0.0]) - 0.5).abs() < 1e-12);
    }
}
