//! Cylinder run: the solution vanishing on a solid cylinder is merely
//! Lipschitz across the lateral surface, and the Hessian carries surface
//! measure there — the collar integral of |Δ_h v| does not decay.

use std::path::Path;

use anyhow::{anyhow, bail, Result};
use maob::{
    build_cylinder, collar_integral, eval_example, flat_dimension, growth_exponent, ConvexDomain,
    Face, FaceClass, Grid, ScalarField, SolveOptions,
};

use super::{analyze_solution, cell_tol, check_fit, growth_plot_points, growth_shells, rank_of};
use crate::config::Config;
use crate::fieldio::write_field;
use crate::report::{write_plot, ExperimentReport};
use crate::run::{cascade_solve, sup_masked};

#[derive(Debug, Clone)]
pub struct Params {
    pub n: usize,
    pub q: f64,
    /// nodes per axis, in-plane
    pub res: usize,
}

pub fn run(cfg: &Config, out: &Path) -> Result<ExperimentReport> {
    let n = cfg.require("run", "n")?.parse::<usize>()?;
    let params = Params {
        n,
        q: cfg.f64_or("run", "q", 1.0)?,
        res: cfg.usize_or("run", "res", if n >= 3 { 65 } else { 129 })?,
    };
    let opts = crate::run::solver_options(cfg)?;
    cfg.reject_unknown()?;
    drive(&params, &opts, out)
}

/// Union of faces, for collar integrals over the whole lateral surface.
fn union_face(faces: &[&Face]) -> Face {
    let mut cells: Vec<usize> = faces.iter().flat_map(|f| f.cells.iter().copied()).collect();
    cells.sort_unstable();
    cells.dedup();
    Face {
        cells,
        normal: faces[0].normal.clone(),
        affine_dim: faces.iter().map(|f| f.affine_dim).max().unwrap_or(0),
        exposed_extremes_on_boundary: true,
        on_domain_boundary: false,
        class: FaceClass::NonStrictlyConvexFace,
    }
}

/// Collar widths halving from `max` down to the resolution floor.
fn collar_widths(grid: &Grid, max: f64) -> Vec<f64> {
    let floor = 3.2 * grid.max_h();
    let mut out = Vec::new();
    let mut d = max;
    while d >= floor {
        out.push(d);
        d /= 2.0;
    }
    out
}

pub fn drive(p: &Params, opts: &SolveOptions, out: &Path) -> Result<ExperimentReport> {
    if p.q <= 0.0 {
        bail!("cylinder run requires q > 0");
    }
    let mut report = ExperimentReport::new(
        "cylinder",
        vec![
            ("n".into(), p.n.to_string()),
            ("q".into(), p.q.to_string()),
            ("res".into(), p.res.to_string()),
        ],
    );
    let ex = build_cylinder(p.n, p.q).map_err(|e| anyhow!("building cylinder: {e}"))?;
    let tau = ex.tau().ok_or_else(|| anyhow!("cylinder without validity radius"))?;
    let lambda = ex.c_sub().powf(1.0 / (p.q - p.n as f64));
    let mut data_ex = ex.clone();
    data_ex.set_tau(2.0 * tau);

    // the zero set is {|x'| <= 1/2} with x' the leading block; the domain is
    // a box wide enough in x' to contain the lateral surface, of height tau
    // so the profile stays inside its validity slab
    let half_wide = if p.n == 2 { 1.0 } else { 0.8 };
    let mut lo = vec![-half_wide; p.n];
    let mut hi = vec![half_wide; p.n];
    lo[p.n - 1] = -tau;
    hi[p.n - 1] = tau;
    let domain = ConvexDomain::Box { lo: lo.clone(), hi: hi.clone() };
    // matched spacings on the shorter vertical axis
    let vertical = (((p.res - 1) as f64 * tau / half_wide / 2.0).round() as usize * 2).max(16) + 1;
    let mut nodes = vec![p.res; p.n];
    nodes[p.n - 1] = vertical;

    let data = |x: &[f64]| lambda * eval_example(&data_ex, x).expect("data eval").value;
    let rep = cascade_solve(&domain, &nodes, p.q, |_| 1.0, &data, opts)?;
    report.check(
        "converged",
        rep.converged,
        format!("residual {:.3e}, {} outer / {} inner iterations", rep.residual, rep.outer_iters, rep.inner_iters),
    );

    let v = &rep.field;
    let grid = &v.grid;
    let tol = cell_tol(grid);
    let ana = analyze_solution(v, &domain, p.q, rep.residual);
    if ana.k.is_empty() {
        bail!("coincidence set empty");
    }
    let rho = |x: &[f64]| x[..p.n - 1].iter().map(|a| a * a).sum::<f64>().sqrt();

    let scale = sup_masked(v, |x, _| data(x).abs());
    let slack = (10.0 * ana.eps_k).max(0.01 * scale);
    let viol = sup_masked(v, |x, val| data(x) - val);
    report.check(
        "subsolution-lower-bound",
        viol <= slack,
        format!("max(lambda w - v) = {viol:.3e}, slack {slack:.3e}"),
    );

    // K = {|x'| <= 1/2} within 2 cells, both inclusions
    let overshoot = ana
        .k
        .centers()
        .iter()
        .map(|c| rho(c) - 0.5)
        .fold(f64::NEG_INFINITY, f64::max)
        .max(0.0);
    let mut missing = 0usize;
    let mut inner_cells = 0usize;
    for c in 0..grid.cell_count() {
        let ctr = grid.cell_center(&grid.cell_multi(c));
        if rho(&ctr) <= 0.5 - tol {
            inner_cells += 1;
            if !ana.k.contains(c) {
                missing += 1;
            }
        }
    }
    report.check(
        "k-cylinder",
        overshoot <= tol && missing == 0 && inner_cells > 0,
        format!("radial overshoot {overshoot:.3e} (tol {tol:.3e}), {missing}/{inner_cells} interior cells missing"),
    );

    let gamma = ana.gamma.as_ref().ok_or_else(|| anyhow!("face classification failed"))?;
    let nsc: Vec<&Face> = gamma.nsc_faces().collect();
    if nsc.is_empty() {
        bail!("no non-strictly-convex faces found");
    }
    let off_surface = nsc
        .iter()
        .flat_map(|f| f.cells.iter())
        .map(|&c| (rho(&grid.cell_center(&grid.cell_multi(c))) - 0.5).abs())
        .fold(0.0f64, f64::max);
    // the lateral surface is ruled by flat faces: its dimension is the face
    // dimension plus the parameters of the sweep (rank of the normal fan - 1)
    let max_dim = nsc.iter().map(|f| flat_dimension(f)).max().unwrap();
    let normals: Vec<Vec<f64>> = nsc.iter().map(|f| f.normal.clone()).collect();
    let ruled_dim = max_dim + rank_of(&normals, 1e-3).saturating_sub(1);
    report.check(
        "nsc-surface-dimension",
        ruled_dim == p.n - 1 && off_surface <= tol,
        format!(
            "{} faces, max face dim {max_dim}, normal rank {}, ruled dimension {ruled_dim} (expected {}), max dist to surface {off_surface:.3e}",
            nsc.len(),
            rank_of(&normals, 1e-3),
            p.n - 1
        ),
    );
    let bound = ((p.n as f64 + p.q) / 2.0).ceil() as usize - 1;
    report.check(
        "dimension-bound",
        max_dim <= bound,
        format!("max face dimension {max_dim} <= {bound}"),
    );

    // merely Lipschitz: unit growth exponent off the cylinder
    let growth = growth_exponent(v, &ana.k, &growth_shells(grid), 1.0, 0.1);
    check_fit(&mut report, "growth-exponent", &growth);

    // collar integral over the whole lateral surface: positive plateau
    let surface = union_face(&nsc);
    let deltas = collar_widths(grid, 0.3);
    if deltas.len() < 3 {
        report.skip("collar-plateau", "fewer than 3 resolvable collar widths".into());
    } else {
        match collar_integral(v, &surface, &deltas) {
            Ok(vals) => {
                let first = vals[0];
                let last = *vals.last().unwrap();
                report.check(
                    "collar-plateau",
                    first > 0.0 && last >= 0.5 * first,
                    format!("collar integrals {vals:?} at widths {deltas:?}"),
                );
                let plot = out.join(format!("cylinder-{}d-collar.plot", p.n));
                write_plot(
                    &plot,
                    &["collar integral of |lap v| against collar width".to_string()],
                    &deltas.iter().copied().zip(vals.iter().copied()).collect::<Vec<_>>(),
                )?;
                report.artifacts.push(plot.display().to_string());
            }
            Err(e) => report.check("collar-plateau", false, format!("collar failed: {e}")),
        }
    }

    // negative control: the same collar construction on a smooth field
    // decays with the width; run it on a fine plane grid so the width range
    // spans well over a decade
    {
        let ctrl_grid = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![512, 512])
            .map_err(|e| anyhow!("{e}"))?;
        let ctrl = ScalarField::from_fn(ctrl_grid.clone(), |x| 0.5 * (x[0] * x[0] + x[1] * x[1]));
        let line_cells: Vec<usize> = (0..ctrl_grid.cell_count())
            .filter(|&c| ctrl_grid.cell_center(&ctrl_grid.cell_multi(c))[0].abs() <= 0.6 * ctrl_grid.h[0])
            .collect();
        let ctrl_face = Face {
            cells: line_cells,
            normal: vec![1.0, 0.0],
            affine_dim: 1,
            exposed_extremes_on_boundary: true,
            on_domain_boundary: false,
            class: FaceClass::NonStrictlyConvexFace,
        };
        let ctrl_deltas = collar_widths(&ctrl_grid, 0.4);
        let vals = collar_integral(&ctrl, &ctrl_face, &ctrl_deltas)
            .map_err(|e| anyhow!("control collar: {e}"))?;
        let first = vals[0];
        let last = *vals.last().unwrap();
        report.check(
            "collar-smooth-control",
            last < 0.1 * first,
            format!("smooth control collar {vals:?} at widths {ctrl_deltas:?}"),
        );
    }

    std::fs::create_dir_all(out)?;
    let field_path = out.join(format!("cylinder-{}d.field", p.n));
    write_field(&field_path, v, p.q)?;
    report.artifacts.push(field_path.display().to_string());
    if let Ok(f) = &growth {
        let plot = out.join(format!("cylinder-{}d-growth.plot", p.n));
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
