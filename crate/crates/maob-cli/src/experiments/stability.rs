//! Stability dichotomy: lifting the boundary data by t leaves a
//! positive-measure coincidence set nearly unchanged, while a singleton
//! coincidence set disappears for every t > 0.

use std::path::Path;

use anyhow::{anyhow, bail, Result};
use maob::{
    coincidence_set, default_eps_k, eval_example, hausdorff_distance, solve_dirichlet_from,
    AnalyticExample, ConvexDomain, ProblemSpec, SolveOptions,
};

use super::cell_tol;
use crate::config::Config;
use crate::report::ExperimentReport;
use crate::run::{cascade_solve, width_for};

#[derive(Debug, Clone)]
pub enum Base {
    /// pinned square subsolution: |K| > 0
    Polytope,
    /// exact radial power solution: K = {0}
    RadialPower,
}

#[derive(Debug, Clone)]
pub struct Params {
    pub base: Base,
    /// nodes per axis
    pub res: usize,
    /// perturbation sizes relative to the boundary-data scale, decreasing
    pub t_list: Vec<f64>,
}

pub fn run(cfg: &Config, out: &Path) -> Result<ExperimentReport> {
    let base = match cfg.require("run", "base")? {
        "polytope" => Base::Polytope,
        "radial-power" => Base::RadialPower,
        other => bail!("unknown stability base {other:?} (polytope | radial-power)"),
    };
    let params = Params {
        base,
        res: cfg.usize_or("run", "res", 97)?,
        t_list: cfg
            .get_f64_list("run", "t_list")?
            .unwrap_or_else(|| vec![0.1, 0.05, 0.01]),
    };
    let opts = crate::run::solver_options(cfg)?;
    cfg.reject_unknown()?;
    drive(&params, &opts, out)
}

fn perturbed_k(
    spec0: &ProblemSpec,
    base_field: &[f64],
    lift: f64,
    opts: &SolveOptions,
) -> Result<(maob::CellSet, f64)> {
    let grid = spec0.grid.clone();
    let spec = ProblemSpec::on_grid(
        grid,
        spec0.mask.clone(),
        spec0.q,
        {
            let g = spec0.g.clone();
            let gr = spec0.grid.clone();
            move |x: &[f64]| {
                // g is nodal already; recover by nearest node
                let multi: Vec<usize> = (0..gr.dim)
                    .map(|a| ((x[a] - gr.lo[a]) / gr.h[a]).round() as usize)
                    .collect();
                g[gr.node_index(&multi)]
            }
        },
        {
            let d = spec0.data.clone();
            let gr = spec0.grid.clone();
            move |x: &[f64]| {
                let multi: Vec<usize> = (0..gr.dim)
                    .map(|a| ((x[a] - gr.lo[a]) / gr.h[a]).round() as usize)
                    .collect();
                d[gr.node_index(&multi)] + lift
            }
        },
        spec0.width,
    )
    .map_err(|e| anyhow!("perturbed problem: {e}"))?;
    let rep = solve_dirichlet_from(&spec, opts, Some(base_field))
        .map_err(|e| anyhow!("perturbed solve: {e}"))?;
    let eps = default_eps_k(spec.grid.dim, spec.q, rep.residual, spec.grid.max_h());
    Ok((coincidence_set(&rep.field, eps), rep.field.values.iter().cloned().fold(f64::INFINITY, f64::min)))
}

pub fn drive(p: &Params, opts: &SolveOptions, out: &Path) -> Result<ExperimentReport> {
    let mut t_list = p.t_list.clone();
    t_list.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if t_list.iter().any(|&t| t <= 0.0) {
        bail!("perturbation sizes must be positive");
    }
    let base_name = match p.base {
        Base::Polytope => "polytope",
        Base::RadialPower => "radial-power",
    };
    let mut report = ExperimentReport::new(
        "stability",
        vec![
            ("base".into(), base_name.into()),
            ("res".into(), p.res.to_string()),
            (
                "t_list".into(),
                t_list.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","),
            ),
        ],
    );

    // base problem: boundary data, coefficient and domain per branch
    let (spec, base_rep) = match p.base {
        Base::Polytope => {
            let pp = super::polytope::Params { res: p.res, ..super::polytope::Params::square(1.5) };
            let (ex, omega, _) = super::polytope::build_subsolution(&pp)?;
            let c_sub = ex.c_sub();
            let mut data_ex = ex.clone();
            if let Some(tau) = data_ex.tau() {
                data_ex.set_tau(2.0 * tau);
            }
            let data = move |x: &[f64]| eval_example(&data_ex, x).expect("data eval").value;
            let rep = cascade_solve(&omega, &vec![p.res; 2], 1.5, |_| c_sub, &data, opts)?;
            let cells: Vec<usize> = rep.field.grid.res.clone();
            let spec = ProblemSpec::on_domain(&omega, &cells, 1.5, |_| c_sub, &data, width_for(2))
                .map_err(|e| anyhow!("{e}"))?;
            (spec, rep)
        }
        Base::RadialPower => {
            // amplified so the data scale is O(1): V = A v solves
            // det D²V = A^{n-q} V^q for the exact radial power v
            let ex = AnalyticExample::radial_power(2, 1.0).map_err(|e| anyhow!("{e}"))?;
            let a = 1.0 / eval_example(&ex, &[1.0, 0.0]).map_err(|e| anyhow!("{e}"))?.value;
            let g = a.powf(2.0 - 1.0);
            let omega = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 1.0 };
            let data = move |x: &[f64]| a * eval_example(&ex, x).expect("data eval").value;
            let rep = cascade_solve(&omega, &vec![p.res; 2], 1.0, move |_| g, &data, opts)?;
            let cells: Vec<usize> = rep.field.grid.res.clone();
            let spec = ProblemSpec::on_domain(&omega, &cells, 1.0, move |_| g, &data, width_for(2))
                .map_err(|e| anyhow!("{e}"))?;
            (spec, rep)
        }
    };
    report.check(
        "base-converged",
        base_rep.converged,
        format!("residual {:.3e}", base_rep.residual),
    );
    let grid = &base_rep.field.grid;
    let eps0 = default_eps_k(grid.dim, spec.q, base_rep.residual, grid.max_h());
    let k0 = coincidence_set(&base_rep.field, eps0);
    if k0.is_empty() {
        bail!("base coincidence set empty: nothing to perturb");
    }
    let scale = spec.data.iter().cloned().fold(0.0f64, f64::max);
    let tol = cell_tol(grid);

    match p.base {
        Base::Polytope => {
            // |K| > 0: the perturbed sets converge back to K
            let mut dists = Vec::new();
            let mut all_nonempty = true;
            for &t in &t_list {
                let (kt, _) = perturbed_k(&spec, &base_rep.field.values, t * scale, opts)?;
                if kt.is_empty() {
                    all_nonempty = false;
                    dists.push(f64::INFINITY);
                } else {
                    dists.push(hausdorff_distance(&kt, &k0));
                }
            }
            let monotone = dists.windows(2).all(|w| w[1] <= w[0] + 1e-12);
            let last = *dists.last().unwrap();
            report.check(
                "k-stable",
                all_nonempty && monotone && last <= tol,
                format!("Hausdorff distances {dists:?} for t {t_list:?} (scale {scale:.3e}, tol {tol:.3e})"),
            );
            // identity control: an unperturbed re-solve reproduces K exactly
            let (k_id, _) = perturbed_k(&spec, &base_rep.field.values, 0.0, opts)?;
            report.check(
                "identity-control",
                k_id.cells == k0.cells,
                format!("{} vs {} coincidence cells", k_id.len(), k0.len()),
            );
        }
        Base::RadialPower => {
            // K = {0}: every positive perturbation clears the obstacle
            let mut empties = Vec::new();
            let mut mins = Vec::new();
            for &t in &t_list {
                let (kt, min_v) = perturbed_k(&spec, &base_rep.field.values, t * scale, opts)?;
                empties.push(kt.is_empty());
                mins.push(min_v);
            }
            report.check(
                "k-vanishes",
                empties.iter().all(|&e| e),
                format!("perturbed K empty: {empties:?}, min values {mins:?} for t {t_list:?}"),
            );
        }
    }

    std::fs::create_dir_all(out)?;
    report.write(out)?;
    Ok(report)
}
