use crate::error::{MaobError, Result};
use crate::geometry::domain::dot;

/// Affine subspace `point + span(basis)` with an orthonormal basis
/// (`k = 0` is the single point).
#[derive(Debug, Clone)]
pub struct AffineSubspace {
    pub point: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

impl AffineSubspace {
    pub fn new(point: Vec<f64>, basis: Vec<Vec<f64>>) -> Result<AffineSubspace> {
        let n = point.len();
        for (i, u) in basis.iter().enumerate() {
            if u.len() != n {
                return Err(MaobError::InvalidParameter("basis dim mismatch".into()));
            }
            if (dot(u, u) - 1.0).abs() > 1e-12 {
                return Err(MaobError::InvalidParameter(format!(
                    "basis vector {i} not unit length"
                )));
            }
            for v in &basis[..i] {
                if dot(u, v).abs() > 1e-12 {
                    return Err(MaobError::InvalidParameter(format!(
                        "basis vector {i} not orthogonal"
                    )));
                }
            }
        }
        Ok(AffineSubspace { point, basis })
    }

    /// Coordinate axes subspace span{e_0..e_{k-1}} through the origin of R^n.
    pub fn coordinate(n: usize, k: usize) -> AffineSubspace {
        let basis = (0..k)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        AffineSubspace { point: vec![0.0; n], basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Euclidean distance from `x` to the affine subspace.
pub fn dist_to_subspace(x: &[f64], s: &AffineSubspace) -> f64 {
    let mut d: Vec<f64> = x.iter().zip(&s.point).map(|(a, b)| a - b).collect();
    for u in &s.basis {
        let c = dot(&d, u);
        for (di, ui) in d.iter_mut().zip(u) {
            *di -= c * ui;
        }
    }
    dot(&d, &d).sqrt()
}
