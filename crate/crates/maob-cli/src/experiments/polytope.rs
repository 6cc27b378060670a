//! Polytope/skeleton run: a pinned subsolution forces the coincidence set
//! to contain the polytope, with the k-skeleton of its boundary classified
//! as the non-strictly-convex free boundary.

use std::path::Path;

use anyhow::{anyhow, bail, Result};
use maob::{
    eval_example, flat_dimension, growth_exponent, pinned_face_dim, polytope_subsolution,
    sample_validity_points, subsolution_residual, AnalyticExample, ConvexDomain, Face, Halfspace,
    SolveOptions,
};

use super::{analyze_solution, cell_tol, check_fit, growth_plot_points, growth_shells};
use crate::config::Config;
use crate::fieldio::write_field;
use crate::report::{write_plot, ExperimentReport};
use crate::run::{cascade_solve, sup_masked};

#[derive(Debug, Clone)]
pub struct Params {
    pub n: usize,
    pub q: f64,
    /// half-width of the hypercube polytope P
    pub half: f64,
    /// radius of the ball domain around it
    pub radius: f64,
    /// nodes per axis
    pub res: usize,
    pub m1_init: f64,
    pub m1_cap: f64,
}

impl Params {
    pub fn square(q: f64) -> Params {
        Params { n: 2, q, half: 0.3, radius: 0.65, res: 129, m1_init: 1.0, m1_cap: 4096.0 }
    }
}

pub fn run(cfg: &Config, out: &Path) -> Result<ExperimentReport> {
    let n = cfg.usize_or("run", "n", 2)?;
    let params = Params {
        n,
        q: cfg.f64_or("run", "q", 1.5)?,
        half: cfg.f64_or("run", "half", 0.3)?,
        radius: cfg.f64_or("run", "radius", 0.65)?,
        res: cfg.usize_or("run", "res", if n >= 3 { 65 } else { 129 })?,
        m1_init: cfg.f64_or("run", "m1", 1.0)?,
        m1_cap: cfg.f64_or("run", "m1_cap", 4096.0)?,
    };
    let opts = crate::run::solver_options(cfg)?;
    cfg.reject_unknown()?;
    drive(&params, &opts, out)
}

pub fn cube_halfspaces(n: usize, half: f64) -> Vec<Halfspace> {
    let mut hs = Vec::new();
    for a in 0..n {
        for sign in [1.0, -1.0] {
            let mut dir = vec![0.0; n];
            dir[a] = sign;
            hs.push(Halfspace::new(dir, half));
        }
    }
    hs
}

/// Construct the pinned subsolution, doubling the offset constant until the
/// domination and subsolution inequalities hold on the sample.
pub fn build_subsolution(p: &Params) -> Result<(AnalyticExample, ConvexDomain, Vec<Halfspace>)> {
    let hs = cube_halfspaces(p.n, p.half);
    let omega = ConvexDomain::Ball { center: vec![0.0; p.n], radius: p.radius };
    let mut m1 = p.m1_init;
    while m1 <= p.m1_cap {
        match polytope_subsolution(&hs, &omega, p.q, m1, 1.0) {
            Ok(e) => {
                let sample = sample_validity_points(&e, 600, 7);
                let rr = subsolution_residual(&e, &sample)
                    .map_err(|err| anyhow!("residual sampling: {err}"))?;
                if rr.min_residual >= -1e-10 {
                    return Ok((e, omega, hs));
                }
                m1 *= 2.0;
            }
            Err(maob::MaobError::InvalidParameter(msg)) if msg.contains("increase M1") => {
                m1 *= 2.0;
            }
            Err(e) => return Err(anyhow!("pinned subsolution: {e}")),
        }
    }
    bail!("offset constant search exceeded the cap {}", p.m1_cap)
}

pub fn drive(p: &Params, opts: &SolveOptions, out: &Path) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new(
        "polytope",
        vec![
            ("n".into(), p.n.to_string()),
            ("q".into(), p.q.to_string()),
            ("half".into(), p.half.to_string()),
            ("radius".into(), p.radius.to_string()),
            ("res".into(), p.res.to_string()),
        ],
    );
    let (ex, omega, hs) = build_subsolution(p)?;
    let k_pinned = pinned_face_dim(p.n, p.q);
    let c_sub = ex.c_sub();
    let mut data_ex = ex.clone();
    if let Some(tau) = data_ex.tau() {
        data_ex.set_tau(2.0 * tau);
    }
    // with g held at the calibration constant, w itself is an exact
    // subsolution and the solved v dominates it
    let data = |x: &[f64]| eval_example(&data_ex, x).expect("data eval").value;
    let rep = cascade_solve(&omega, &vec![p.res; p.n], p.q, |_| c_sub, &data, opts)?;
    report.check(
        "converged",
        rep.converged,
        format!("residual {:.3e}, {} outer / {} inner iterations", rep.residual, rep.outer_iters, rep.inner_iters),
    );

    let v = &rep.field;
    let grid = &v.grid;
    let tol = cell_tol(grid);
    let ana = analyze_solution(v, &omega, p.q, rep.residual);
    if ana.k.is_empty() {
        bail!("coincidence set empty");
    }

    let scale = sup_masked(v, |x, _| data(x).abs());
    let slack = (10.0 * ana.eps_k).max(0.01 * scale);
    let viol = sup_masked(v, |x, val| data(x) - val);
    report.check(
        "subsolution-lower-bound",
        viol <= slack,
        format!("max(w - v) = {viol:.3e}, slack {slack:.3e}"),
    );

    // P is contained in the coincidence set, cell by cell
    let mut missing = 0usize;
    let mut inner = 0usize;
    for c in 0..grid.cell_count() {
        let ctr = grid.cell_center(&grid.cell_multi(c));
        if hs.iter().all(|h| h.eval(&ctr) <= -tol) {
            inner += 1;
            if !ana.k.contains(c) {
                missing += 1;
            }
        }
    }
    report.check(
        "p-in-k",
        inner > 0 && missing == 0,
        format!("{missing}/{inner} interior polytope cells outside K"),
    );

    let gamma = ana.gamma.as_ref().ok_or_else(|| anyhow!("face classification failed"))?;
    report.check(
        "positive-measure",
        gamma.positive_measure,
        format!("{} coincidence cells", gamma.cell_count),
    );

    // the non-strictly-convex faces are exactly the skeleton of ∂P: every
    // face hugs ∂P, every polytope facet plane is represented
    let nsc: Vec<&Face> = gamma.nsc_faces().collect();
    if nsc.is_empty() {
        report.check("skeleton-nsc", false, "no non-strictly-convex faces".into());
    } else {
        let on_boundary = |x: &[f64]| {
            hs.iter().any(|h| h.eval(x).abs() <= tol) && hs.iter().all(|h| h.eval(x) <= tol)
        };
        let mut off_skeleton = 0usize;
        for f in &nsc {
            for &c in &f.cells {
                if !on_boundary(&grid.cell_center(&grid.cell_multi(c))) {
                    off_skeleton += 1;
                }
            }
        }
        let mut facets_missing = 0usize;
        for h in &hs {
            let covered = nsc.iter().any(|f| {
                f.cells.iter().any(|&c| {
                    let ctr = grid.cell_center(&grid.cell_multi(c));
                    h.eval(&ctr).abs() <= tol
                })
            });
            if !covered {
                facets_missing += 1;
            }
        }
        let dims: Vec<usize> = nsc.iter().map(|f| flat_dimension(f)).collect();
        let max_dim = *dims.iter().max().unwrap();
        report.check(
            "skeleton-nsc",
            off_skeleton == 0 && facets_missing == 0,
            format!(
                "{} faces (dims {dims:?}), {off_skeleton} cells off the skeleton, {facets_missing} facet planes uncovered",
                nsc.len()
            ),
        );
        report.check(
            "skeleton-dimension",
            max_dim as i64 == k_pinned,
            format!("max face dimension {max_dim}, pinned skeleton dimension {k_pinned}"),
        );
        let bound = ((p.n as f64 + p.q) / 2.0).ceil() as usize - 1;
        report.check(
            "dimension-bound",
            max_dim <= bound,
            format!("max face dimension {max_dim} <= {bound}"),
        );
    }

    // merely Lipschitz off the skeleton
    let growth = growth_exponent(v, &ana.k, &growth_shells(grid), 1.0, 0.15);
    check_fit(&mut report, "growth-exponent", &growth);

    std::fs::create_dir_all(out)?;
    let field_path = out.join("polytope.field");
    write_field(&field_path, v, p.q)?;
    report.artifacts.push(field_path.display().to_string());
    if let Ok(f) = &growth {
        let plot = out.join("polytope-growth.plot");
        write_plot(
            &plot,
            &[
                "growth fit: log v against log dist(x, K)".to_string(),
                format!("estimate = {:.6}, theory = {:.6}, r2 = {:.6}", f.estimate, f.theory, f.r_squared),
            ],
            &growth_plot_points(v, &ana.k, 400),
        )?;
        report.artifacts.push(plot.display().to_string());
    }
    report.write(out)?;
    Ok(report)
}
