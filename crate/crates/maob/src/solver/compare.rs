use rayon::prelude::*;

use crate::error::{MaobError, Result};
use crate::geometry::ScalarField;
use crate::solver::dirichlet::ProblemSpec;
use crate::solver::operator::ma_operator;
use crate::solver::stencil::StencilSet;

/// Margins of a discrete comparison test between a subsolution and a
/// supersolution of the same problem.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    /// min over unknown nodes of MA_h[sub] − g·sub^q (subsolution slack)
    pub sub_margin: f64,
    /// min over unknown nodes of g·sup^q − MA_h[sup] (supersolution slack)
    pub sup_margin: f64,
    /// min over data nodes of sup − sub
    pub boundary_gap: f64,
    /// max over all nodes of sub − sup; comparison predicts <= 0
    pub max_violation: f64,
}

fn rhs_at(spec: &ProblemSpec, node: usize, v: f64) -> f64 {
    if spec.q == 0.0 {
        if v > spec.eps_pos() {
            spec.g[node]
        } else {
            0.0
        }
    } else {
        spec.g[node] * v.max(0.0).powf(spec.q)
    }
}

/// Verify the hypotheses of the discrete comparison principle and report
/// the resulting ordering margin. Errors if either field fails its
/// sub/supersolution inequality beyond `tol`, or the boundary ordering
/// fails; in that case no ordering conclusion is available.
pub fn check_comparison(
    spec: &ProblemSpec,
    sub: &ScalarField,
    sup: &ScalarField,
    tol: f64,
) -> Result<ComparisonReport> {
    let grid = &spec.grid;
    if sub.grid.node_count() != grid.node_count() || sup.grid.node_count() != grid.node_count() {
        return Err(MaobError::InvalidGrid("fields must live on the problem grid".into()));
    }
    let stencils = StencilSet::build(grid.dim, &grid.h, spec.width)?;
    let unknown = spec.unknown_nodes();
    let margins: Vec<(f64, f64)> = unknown
        .par_iter()
        .map(|&node| {
            let ma_sub = ma_operator(grid, &sub.values, &stencils, node);
            let ma_sup = ma_operator(grid, &sup.values, &stencils, node);
            (
                ma_sub - rhs_at(spec, node, sub.values[node]),
                rhs_at(spec, node, sup.values[node]) - ma_sup,
            )
        })
        .collect();
    let sub_margin = margins.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
    let sup_margin = margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let is_unknown: Vec<bool> = {
        let mut b = vec![false; grid.node_count()];
        for &i in &unknown {
            b[i] = true;
        }
        b
    };
    let boundary_gap = (0..grid.node_count())
        .filter(|&i| !is_unknown[i] && spec.mask[i])
        .map(|i| sup.values[i] - sub.values[i])
        .fold(f64::INFINITY, f64::min);
    if sub_margin < -tol {
        return Err(MaobError::ComparisonHypotheses(format!(
            "candidate subsolution violates MA_h >= g·v^q by {:.3e}",
            -sub_margin
        )));
    }
    if sup_margin < -tol {
        return Err(MaobError::ComparisonHypotheses(format!(
            "candidate supersolution violates MA_h <= g·v^q by {:.3e}",
            -sup_margin
        )));
    }
    if boundary_gap < -tol {
        return Err(MaobError::ComparisonHypotheses(format!(
            "boundary ordering fails by {:.3e}",
            -boundary_gap
        )));
    }
    let max_violation = (0..grid.node_count())
        .filter(|&i| spec.mask[i])
        .map(|i| sub.values[i] - sup.values[i])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ComparisonReport { sub_margin, sup_margin, boundary_gap, max_violation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Grid;

    fn unit_square_spec(q: f64) -> ProblemSpec {
        let grid = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![16, 16]).unwrap();
        let mask = vec![true; grid.node_count()];
        ProblemSpec::on_grid(grid, mask, q, |_| 1.0, |x| x[0] * x[0] + x[1] * x[1], 2).unwrap()
    }

    #[test]
    fn ordered_quadratics_pass() {
        let spec = unit_square_spec(0.0);
        // with g = 1: det D²(|x|²) = 4 >= 1 (subsolution) and
        // det D²(|x|²/4 + 5) = 1/4 <= 1 (supersolution), ordered on the boundary
        let sub = ScalarField::from_fn(spec.grid.clone(), |x| x[0] * x[0] + x[1] * x[1]);
        let sup = ScalarField::from_fn(spec.grid.clone(), |x| {
            0.25 * (x[0] * x[0] + x[1] * x[1]) + 5.0
        });
        let rep = check_comparison(&spec, &sub, &sup, 1e-9).unwrap();
        assert!(rep.max_violation <= 0.0, "violation {}", rep.max_violation);
        assert!(rep.sub_margin >= -1e-9 && rep.sup_margin >= -1e-9);
    }

    #[test]
    fn failed_hypotheses_are_reported() {
        let spec = unit_square_spec(0.0);
        let sub = ScalarField::from_fn(spec.grid.clone(), |x| x[0] * x[0] + x[1] * x[1]);
        // not a supersolution: MA = 4 > 1
        let sup = sub.clone();
        let err = check_comparison(&spec, &sub, &sup, 1e-9).unwrap_err();
        assert!(matches!(err, MaobError::ComparisonHypotheses(_)));
    }
}
