//! Independent check of the closed-form Hessian determinants: compare
//! against finite differences of the scalar evaluation at random off-axis
//! points, for every analytic family.

use maob::analytic::{
    build_cylinder, build_family_a, build_family_b, eval_example, example_det,
    polytope_subsolution, sample_validity_points, AnalyticExample,
};
use maob::geometry::{ConvexDomain, Halfspace};

/// Hessian determinant by central second differences of the value.
fn fd_det(e: &AnalyticExample, x: &[f64], h: f64) -> f64 {
    let n = x.len();
    let f = |p: &[f64]| eval_example(e, p).unwrap().value;
    let mut hess = nalgebra::DMatrix::<f64>::zeros(n, n);
    let base = f(x);
    for i in 0..n {
        for j in 0..=i {
            let v = if i == j {
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[i] += h;
                xm[i] -= h;
                (f(&xp) + f(&xm) - 2.0 * base) / (h * h)
            } else {
                let mut xpp = x.to_vec();
                let mut xpm = x.to_vec();
                let mut xmp = x.to_vec();
                let mut xmm = x.to_vec();
                xpp[i] += h;
                xpp[j] += h;
                xpm[i] += h;
                xpm[j] -= h;
                xmp[i] -= h;
                xmp[j] += h;
                xmm[i] -= h;
                xmm[j] -= h;
                (f(&xpp) - f(&xpm) - f(&xmp) + f(&xmm)) / (4.0 * h * h)
            };
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess.determinant()
}

fn check_family(e: &AnalyticExample, count: usize, seed: u64, tol: f64) {
    let sample = sample_validity_points(e, count, seed);
    assert!(sample.len() >= count / 2, "only {} sample points", sample.len());
    let mut checked = 0;
    for x in &sample {
        let exact = match example_det(e, x) {
            Ok(v) => v,
            Err(_) => continue,
        };
        // step tuned against roundoff: relative to the point's scale
        let scale = x.iter().map(|v| v.abs()).fold(0.1f64, f64::max);
        let approx = fd_det(e, x, 1e-4 * scale);
        let denom = exact.abs().max(1e-10);
        assert!(
            (approx - exact).abs() / denom <= tol,
            "det mismatch at {x:?}: exact {exact:.6e}, fd {approx:.6e}"
        );
        checked += 1;
    }
    assert!(checked >= count / 2, "only {checked} points checked");
}

#[test]
fn linear_growth_family_det_matches_finite_differences() {
    let e = build_family_a(3, 1, 0.0).unwrap();
    check_family(&e, 200, 1, 1e-4);
    let e = build_family_a(3, 1, 1.0).unwrap();
    check_family(&e, 200, 2, 1e-4);
    let e = build_family_a(2, 1, 1.0).unwrap();
    check_family(&e, 200, 3, 1e-4);
}

#[test]
fn power_growth_family_det_matches_finite_differences() {
    let e = build_family_b(3, 1, 0.0, 1.25).unwrap();
    check_family(&e, 200, 4, 1e-4);
    let e = build_family_b(3, 1, 1.0, 1.5).unwrap();
    check_family(&e, 200, 5, 1e-4);
}

#[test]
fn cylinder_det_matches_finite_differences() {
    let e = build_cylinder(2, 1.0).unwrap();
    check_family(&e, 200, 6, 1e-4);
    let e = build_cylinder(3, 1.0).unwrap();
    check_family(&e, 200, 7, 1e-4);
}

#[test]
fn radial_power_det_matches_finite_differences() {
    for &(n, q) in &[(2usize, 0.0), (2, 1.0), (2, 0.5), (3, 1.0)] {
        let e = AnalyticExample::radial_power(n, q).unwrap();
        check_family(&e, 200, 8 + n as u64, 1e-4);
    }
}

#[test]
fn radial_power_det_equals_value_pde() {
    // det D²v = v^q exactly, so the closed form must satisfy the PDE
    for &(n, q) in &[(2usize, 1.0), (3, 1.0), (2, 0.5)] {
        let e = AnalyticExample::radial_power(n, q).unwrap();
        let sample = sample_validity_points(&e, 100, 17);
        for x in &sample {
            let det = example_det(&e, x).unwrap();
            let v = eval_example(&e, x).unwrap().value;
            assert!(
                (det - v.powf(q)).abs() <= 1e-9 * v.powf(q).max(1e-12),
                "PDE residual at {x:?}"
            );
        }
    }
}

#[test]
fn polytope_subsolution_det_matches_finite_differences() {
    let square = vec![
        Halfspace::new(vec![1.0, 0.0], 0.1),
        Halfspace::new(vec![-1.0, 0.0], 0.1),
        Halfspace::new(vec![0.0, 1.0], 0.1),
        Halfspace::new(vec![0.0, -1.0], 0.1),
    ];
    let omega = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 0.25 };
    let e = polytope_subsolution(&square, &omega, 1.5, 3.0, 1.0).unwrap();
    let sample = sample_validity_points(&e, 150, 11);
    let mut total = 0;
    let mut matched = 0;
    for x in &sample {
        let exact = match example_det(&e, x) {
            Ok(v) => v,
            Err(_) => continue,
        };
        // keep clear of the kink lines, where FD straddles branches
        if eval_example(&e, x).unwrap().value < 1e-4 {
            continue;
        }
        total += 1;
        let approx = fd_det(&e, x, 1e-5);
        if (approx - exact).abs() / exact.abs().max(1e-8) <= 1e-3 {
            matched += 1;
        }
    }
    assert!(total >= 50, "only {total} smooth points sampled");
    // a small fraction of points still sit within an FD step of a branch tie
    assert!(
        matched as f64 >= 0.9 * total as f64,
        "{matched}/{total} points matched finite differences"
    );
}
