//! Shared solve plumbing for the experiment drivers: stencil-width
//! defaults, coarse-to-fine continuation, and small geometry helpers.

use anyhow::{anyhow, Result};
use maob::{
    solve_dirichlet_from, AffineSubspace, ConvexDomain, ProblemSpec, ScalarField, SolveOptions,
    SolveReport,
};

/// Stencil width at desk scale: the wider 2-D stencil is cheap, in 3-D the
/// direction count grows too fast for width 2.
pub fn width_for(dim: usize) -> usize {
    if dim >= 3 {
        1
    } else {
        2
    }
}

/// Node counts of the coarse-to-fine ladder ending at `nodes`; each level
/// halves the cell count per axis while that keeps every axis at 17+ nodes.
pub fn cascade_resolutions(nodes: &[usize]) -> Vec<Vec<usize>> {
    let mut levels = vec![nodes.to_vec()];
    loop {
        let cur = levels.last().unwrap();
        if cur.iter().any(|&r| r % 2 == 0 || (r - 1) / 2 + 1 < 17) {
            break;
        }
        levels.push(cur.iter().map(|&r| (r - 1) / 2 + 1).collect());
    }
    levels.reverse();
    levels
}

/// Solve on a ladder of grids, carrying each solution up as the initial
/// iterate of the next level. The final answer is identical in spirit to a
/// cold solve (same fixed point) but reaches it far faster.
pub fn cascade_solve(
    domain: &ConvexDomain,
    nodes: &[usize],
    q: f64,
    g: impl Fn(&[f64]) -> f64,
    data: impl Fn(&[f64]) -> f64,
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let mut prev: Option<ScalarField> = None;
    let mut last: Option<SolveReport> = None;
    for level in cascade_resolutions(nodes) {
        // grids count cells per axis, the drivers count nodes
        let cells: Vec<usize> = level.iter().map(|&r| r - 1).collect();
        let spec = ProblemSpec::on_domain(domain, &cells, q, &g, &data, width_for(level.len()))
            .map_err(|e| anyhow!("building problem at res {level:?}: {e}"))?;
        let init: Option<Vec<f64>> = prev.as_ref().map(|coarse| {
            (0..spec.grid.node_count())
                .map(|i| coarse.interpolate(&spec.grid.node_coord_flat(i)))
                .collect()
        });
        let rep = solve_dirichlet_from(&spec, opts, init.as_deref())
            .map_err(|e| anyhow!("solve at res {level:?}: {e}"))?;
        prev = Some(rep.field.clone());
        last = Some(rep);
    }
    last.ok_or_else(|| anyhow!("empty resolution list"))
}

/// Solver options from the `[solver]` section, defaulting field by field.
pub fn solver_options(cfg: &crate::config::Config) -> anyhow::Result<SolveOptions> {
    let d = SolveOptions::default();
    Ok(SolveOptions {
        max_outer: cfg.usize_or("solver", "max_outer", d.max_outer)?,
        max_inner: cfg.usize_or("solver", "max_inner", d.max_inner)?,
        omega: cfg.f64_or("solver", "omega", d.omega)?,
        tol_inner: cfg.f64_or("solver", "tol_inner", d.tol_inner)?,
        tol_outer: cfg.f64_or("solver", "tol_outer", d.tol_outer)?,
    })
}

/// The coordinate k-plane spanned by the last k axes — the zero set of the
/// symmetric families, which split x = (y, z) with z the trailing block.
pub fn trailing_axes(n: usize, k: usize) -> AffineSubspace {
    let basis: Vec<Vec<f64>> = (n - k..n)
        .map(|i| {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            e
        })
        .collect();
    AffineSubspace::new(vec![0.0; n], basis).expect("orthonormal axes")
}

/// Sup difference over nodes masked in both fields (grids must match).
pub fn sup_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .zip(a.mask.iter().zip(&b.mask))
        .filter(|(_, (ma, mb))| **ma && **mb)
        .map(|((x, y), _)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Sup of f over masked nodes.
pub fn sup_masked(v: &ScalarField, f: impl Fn(&[f64], f64) -> f64) -> f64 {
    (0..v.grid.node_count())
        .filter(|&i| v.mask[i])
        .map(|i| f(&v.grid.node_coord_flat(i), v.values[i]))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_halves_down_to_coarse() {
        assert_eq!(cascade_resolutions(&[65, 65]), vec![vec![17, 17], vec![33, 33], vec![65, 65]]);
        assert_eq!(cascade_resolutions(&[20, 20]), vec![vec![20, 20]]);
        assert_eq!(
            cascade_resolutions(&[129, 65]),
            vec![vec![33, 17], vec![65, 33], vec![129, 65]]
        );
    }

    #[test]
    fn trailing_axes_span_the_last_block() {
        let s = trailing_axes(3, 1);
        assert_eq!(s.dim(), 1);
        assert_eq!(maob::dist_to_subspace(&[0.3, 0.4, 9.0], &s), 0.5);
    }
}
