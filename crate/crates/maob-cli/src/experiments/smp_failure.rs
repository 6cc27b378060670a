//! Failure of the strong maximum principle: lifting the boundary data by
//! t·dist(x, E), with E the flat coincidence slab, moves the solution
//! uniformly by O(t) yet leaves it pinned at zero on E. A constant lift of
//! the same size frees the solution everywhere — the negative control.

use std::path::Path;

use anyhow::{anyhow, bail, Result};
use maob::{
    build_family_a, coincidence_set, dist_to_subspace, eval_example, solve_dirichlet_from,
    ConvexDomain, ProblemSpec, SolveOptions,
};

use super::{cell_tol, contact_eps_k, dist_to_cells};
use crate::config::Config;
use crate::report::ExperimentReport;
use crate::run::{cascade_solve, trailing_axes, width_for};

#[derive(Debug, Clone)]
pub struct Params {
    pub n: usize,
    pub k: usize,
    pub q: f64,
    /// nodes per axis
    pub res: usize,
    /// lift sizes relative to the data scale, halving
    pub t_list: Vec<f64>,
}

pub fn run(cfg: &Config, out: &Path) -> Result<ExperimentReport> {
    let n = cfg.usize_or("run", "n", 3)?;
    let params = Params {
        n,
        k: cfg.usize_or("run", "k", 1)?,
        q: cfg.f64_or("run", "q", 0.0)?,
        res: cfg.usize_or("run", "res", if n >= 3 { 65 } else { 129 })?,
        t_list: cfg.get_f64_list("run", "t_list")?.unwrap_or_else(|| vec![0.05, 0.025]),
    };
    let opts = crate::run::solver_options(cfg)?;
    cfg.reject_unknown()?;
    drive(&params, &opts, out)
}

pub fn drive(p: &Params, opts: &SolveOptions, out: &Path) -> Result<ExperimentReport> {
    let mut t_list = p.t_list.clone();
    t_list.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if t_list.len() < 2 {
        bail!("need at least two lift sizes to test t-linearity");
    }
    let mut report = ExperimentReport::new(
        "smp-failure",
        vec![
            ("n".into(), p.n.to_string()),
            ("k".into(), p.k.to_string()),
            ("q".into(), p.q.to_string()),
            ("res".into(), p.res.to_string()),
            (
                "t_list".into(),
                t_list.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(","),
            ),
        ],
    );

    // base: linear-growth slab vanishing on E = the trailing k-plane
    let ex = build_family_a(p.n, p.k, p.q).map_err(|e| anyhow!("inadmissible parameters: {e}"))?;
    let tau = ex.tau().ok_or_else(|| anyhow!("family without validity radius"))?;
    let lambda = ex.c_sub().powf(1.0 / (p.q - p.n as f64));
    let mut data_ex = ex.clone();
    data_ex.set_tau(1.5 * tau);
    let domain = ConvexDomain::Ball { center: vec![0.0; p.n], radius: tau };
    let data = |x: &[f64]| lambda * eval_example(&data_ex, x).expect("data eval").value;
    let base = cascade_solve(&domain, &vec![p.res; p.n], p.q, |_| 1.0, &data, opts)?;
    report.check(
        "base-converged",
        base.converged,
        format!("residual {:.3e}", base.residual),
    );
    let grid = &base.field.grid;
    let tol = cell_tol(grid);
    // the base contact set is a lower-dimensional slab (see contact_eps_k)
    let eps0 = contact_eps_k(&base.field);
    let k0 = coincidence_set(&base.field, eps0);
    if k0.is_empty() {
        bail!("base coincidence set empty: no face E to perturb along");
    }
    let axes = trailing_axes(p.n, p.k);
    // E must reach the boundary for the pinning mechanism to apply
    let reach = k0
        .centers()
        .iter()
        .map(|c| c.iter().map(|a| a * a).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    report.check(
        "e-reaches-boundary",
        reach >= tau - 2.0 * tol,
        format!("slab extends to radius {reach:.3} of {tau:.3}"),
    );

    let scale = (0..grid.node_count())
        .map(|i| data(&grid.node_coord_flat(i)).abs())
        .fold(0.0f64, f64::max);
    let slack = eps0.max(1e-3 * scale);
    let e_nodes: Vec<usize> = (0..grid.node_count())
        .filter(|&i| base.field.mask[i] && dist_to_subspace(&grid.node_coord_flat(i), &axes) <= 2.0 * grid.max_h())
        .collect();
    if e_nodes.is_empty() {
        bail!("no grid nodes on the slab");
    }

    let cells: Vec<usize> = grid.res.clone();
    let solve_lift = |lift: &(dyn Fn(&[f64]) -> f64 + Sync)| -> Result<maob::SolveReport> {
        let spec = ProblemSpec::on_domain(
            &domain,
            &cells,
            p.q,
            |_| 1.0,
            |x| data(x) + lift(x),
            width_for(p.n),
        )
        .map_err(|e| anyhow!("{e}"))?;
        solve_dirichlet_from(&spec, opts, Some(&base.field.values)).map_err(|e| anyhow!("{e}"))
    };

    let mut cs = Vec::new();
    let mut pin_ok = true;
    let mut mono_ok = true;
    let mut contain_ok = true;
    let mut details = Vec::new();
    for &t in &t_list {
        let t_abs = t * scale;
        let rep = solve_lift(&|x: &[f64]| t_abs * dist_to_subspace(x, &axes))?;
        let sup: f64 = rep
            .field
            .values
            .iter()
            .zip(&base.field.values)
            .zip(&base.field.mask)
            .filter(|(_, m)| **m)
            .map(|((a, b), _)| (a - b).abs())
            .fold(0.0, f64::max);
        let min: f64 = rep
            .field
            .values
            .iter()
            .zip(&base.field.values)
            .zip(&base.field.mask)
            .filter(|(_, m)| **m)
            .map(|((a, b), _)| a - b)
            .fold(f64::INFINITY, f64::min);
        mono_ok &= min >= -slack;
        let pin = e_nodes
            .iter()
            .map(|&i| (rep.field.values[i] - base.field.values[i]).abs())
            .fold(0.0f64, f64::max);
        pin_ok &= pin <= 3.0 * slack;
        cs.push(sup / t_abs);
        // the slab stays on the boundary of the perturbed coincidence set;
        // pinning keeps v_t = 0 there, so the contact threshold applies
        let eps_t = contact_eps_k(&rep.field);
        let kt = coincidence_set(&rep.field, eps_t);
        if kt.is_empty() {
            contain_ok = false;
        } else {
            let centers = kt.centers();
            let gap = (0..17)
                .map(|j| {
                    let mut z = vec![0.0; p.n];
                    z[p.n - 1] = -0.7 * tau + (1.4 * tau) * j as f64 / 16.0;
                    dist_to_cells(&z, &centers)
                })
                .fold(0.0f64, f64::max);
            contain_ok &= gap <= tol;
        }
        details.push(format!("t {t}: sup diff {sup:.3e} (C {:.3}), pin {pin:.3e}, min diff {min:.3e}", sup / t_abs));
    }
    let c_max = cs.iter().cloned().fold(0.0f64, f64::max);
    let c_min = cs.iter().cloned().fold(f64::INFINITY, f64::min);
    report.check(
        "uniform-linear-in-t",
        c_min > 0.0 && c_max <= 1.5 * c_min,
        format!("empirical constants {cs:?}; {}", details.join("; ")),
    );
    report.check(
        "ordering",
        mono_ok,
        format!("min(v_t - v) >= -{slack:.3e} for every t"),
    );
    report.check(
        "pinned-on-e",
        pin_ok,
        format!("|v_t - v| <= {:.3e} on the slab ({} nodes)", 3.0 * slack, e_nodes.len()),
    );
    report.check(
        "e-in-boundary-of-kt",
        contain_ok,
        format!("slab within {tol:.3e} of every perturbed coincidence set"),
    );

    // negative control: a constant lift of the same size must free the
    // solution on E
    let t_abs = t_list[0] * scale;
    let ctrl = solve_lift(&move |_: &[f64]| t_abs)?;
    let lift_on_e = e_nodes
        .iter()
        .map(|&i| ctrl.field.values[i] - base.field.values[i])
        .fold(f64::INFINITY, f64::min);
    report.check(
        "constant-lift-control",
        lift_on_e > 3.0 * slack,
        format!("min(v_t - v) on the slab = {lift_on_e:.3e} > {:.3e}", 3.0 * slack),
    );

    std::fs::create_dir_all(out)?;
    report.write(out)?;
    Ok(report)
}
