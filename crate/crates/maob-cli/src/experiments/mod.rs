//! Experiment drivers. Each driver solves one scenario, runs the agreed
//! checks, and assembles an [`ExperimentReport`] plus plot/field artifacts.

use std::path::Path;

use anyhow::{bail, Result};
use maob::{
    classify_gamma, coincidence_set, default_eps_k, CellSet, ConvexDomain, FitReport, GammaReport,
    ScalarField,
};

use crate::config::Config;
use crate::report::ExperimentReport;

pub mod cylinder;
pub mod dim_optimality;
pub mod polytope;
pub mod smp_failure;
pub mod solver_validation;
pub mod stability;

pub const EXPERIMENT_NAMES: [&str; 6] = [
    "dim-optimality",
    "cylinder",
    "polytope",
    "stability",
    "smp-failure",
    "solver-validation",
];

pub fn dispatch(name: &str, cfg: &Config, out: &Path) -> Result<ExperimentReport> {
    match name {
        "dim-optimality" => dim_optimality::run(cfg, out),
        "cylinder" => cylinder::run(cfg, out),
        "polytope" => polytope::run(cfg, out),
        "stability" => stability::run(cfg, out),
        "smp-failure" => smp_failure::run(cfg, out),
        "solver-validation" => solver_validation::run(cfg, out),
        other => bail!("unknown experiment {other:?}; expected one of {}", EXPERIMENT_NAMES.join(", ")),
    }
}

/// Spatial tolerance for "within 2 cells" checks: two node spacings plus
/// half a cell diagonal, since coincidence sets live on cell centers.
pub fn cell_tol(grid: &maob::Grid) -> f64 {
    let half_diag = 0.5 * grid.h.iter().map(|h| h * h).sum::<f64>().sqrt();
    2.0 * grid.max_h() + half_diag
}

/// Shell radii for growth fits, filling the resolvable window
/// [3h, diam/4] while excluding its endpoints.
pub fn growth_shells(grid: &maob::Grid) -> Vec<f64> {
    maob::geomspace(3.05 * grid.max_h(), grid.diameter() / 4.05, 13)
}

/// Section heights spanning the resolvable range of sublevel volumes.
pub fn section_heights(v: &ScalarField, eps_k: f64) -> Vec<f64> {
    let vmax = v.max_masked();
    maob::geomspace((4.0 * eps_k).max(2e-3 * vmax), 0.25 * vmax, 10)
}

/// Coincidence set and free-boundary classification of a solved field.
pub struct KAnalysis {
    pub eps_k: f64,
    pub k: CellSet,
    pub gamma: Option<GammaReport>,
}

pub fn analyze_solution(
    field: &ScalarField,
    domain: &ConvexDomain,
    q: f64,
    residual: f64,
) -> KAnalysis {
    let eps_k = default_eps_k(field.grid.dim, q, residual, field.grid.max_h());
    analyze_with_eps(field, domain, eps_k)
}

/// Like [`analyze_solution`] but with a caller-chosen zero threshold.
pub fn analyze_with_eps(field: &ScalarField, domain: &ConvexDomain, eps_k: f64) -> KAnalysis {
    let k = coincidence_set(field, eps_k);
    let gamma = if k.is_empty() {
        None
    } else {
        classify_gamma(&k, domain, field).ok()
    };
    KAnalysis { eps_k, k, gamma }
}

/// Zero threshold for contact sets the solution touches along a
/// measure-zero set. The obstacle clamp makes v exactly zero on contact
/// nodes, but a lower-dimensional contact set fills no whole cell, so the
/// threshold must clear the first off-set node layer (value ≈ slope · h).
/// The smallest cell-wise max corner value is exactly that layer's scale;
/// 1.9× it keeps the detected set one cell layer thick without swallowing
/// the second. Only meaningful when the solution is known to touch zero —
/// with a strictly positive field this inflates the threshold to the
/// global minimum, so emptiness checks must use the residual-coupled
/// default instead.
pub fn contact_eps_k(field: &ScalarField) -> f64 {
    let grid = &field.grid;
    let mut m = f64::INFINITY;
    for c in 0..grid.cell_count() {
        let corners = grid.cell_corners(&grid.cell_multi(c));
        if corners.iter().all(|&i| field.mask[i]) {
            let top = corners.iter().map(|&i| field.values[i]).fold(0.0f64, f64::max);
            m = m.min(top);
        }
    }
    let h = grid.max_h();
    (1.9 * m).max(h * h)
}

/// Distance from a point to the nearest cell center of a set.
pub fn dist_to_cells(x: &[f64], centers: &[Vec<f64>]) -> f64 {
    centers
        .iter()
        .map(|c| {
            x.iter()
                .zip(c)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

/// Rank of the centered point cloud, via singular values.
pub fn rank_of(points: &[Vec<f64>], tol: f64) -> usize {
    if points.len() < 2 {
        return 0;
    }
    let n = points[0].len();
    let mean: Vec<f64> = (0..n)
        .map(|a| points.iter().map(|p| p[a]).sum::<f64>() / points.len() as f64)
        .collect();
    let m = nalgebra::DMatrix::from_fn(points.len(), n, |i, j| points[i][j] - mean[j]);
    let svd = m.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values.iter().filter(|&&s| s > tol * smax).count()
}

pub fn fit_detail(fit: &FitReport) -> String {
    format!(
        "estimate {:.4} vs theory {:.4} (tol {:.3}, r2 {:.4}, window [{:.3e}, {:.3e}])",
        fit.estimate, fit.theory, fit.tolerance, fit.r_squared, fit.window.0, fit.window.1
    )
}

/// log-log scatter of v against distance to K, for growth-fit plots.
pub fn growth_plot_points(v: &ScalarField, k: &CellSet, limit: usize) -> Vec<(f64, f64)> {
    let centers = k.centers();
    let grid = &v.grid;
    let lo = 3.0 * grid.max_h();
    let hi = grid.diameter() / 4.0;
    let mut points: Vec<(f64, f64)> = (0..grid.node_count())
        .filter(|&i| v.mask[i] && v.values[i] > 0.0)
        .filter_map(|i| {
            let d = dist_to_cells(&grid.node_coord_flat(i), &centers);
            (d >= lo && d <= hi).then(|| (d, v.values[i]))
        })
        .collect();
    let stride = (points.len() / limit).max(1);
    points = points.into_iter().step_by(stride).collect();
    points
}

/// Record a two-sided fit as a named check.
pub fn check_fit(report: &mut ExperimentReport, name: &str, fit: &Result<FitReport, maob::MaobError>) {
    match fit {
        Ok(f) => report.check(name, f.pass, fit_detail(f)),
        Err(e) => report.check(name, false, format!("fit failed: {e}")),
    }
}
