use maob::*;

// inner problem only: rhs frozen at the exact continuum rhs
#[test]
#[ignore]
fn probe_inner() {
    let ex = AnalyticExample::radial_power(2, 1.0).unwrap();
    let dom = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 1.0 };
    // q=0 with g = exact v and threshold never active: emulate prescribed rhs
    let spec = ProblemSpec::on_domain(&dom, &[129, 129], 1.0, |_| 1.0,
        |x| eval_example(&ex, x).unwrap().value + 1.0, 2).unwrap();
    // shift by 1: det unchanged, rhs (v-1) not expressible... instead use q=1 with g=1 but
    // check pure relaxation behavior on the shifted problem det D^2 v = (v-?) no.
    let _ = spec;
}

#[test]
#[ignore]
fn probe_2d_long() {
    let ex = AnalyticExample::radial_power(2, 1.0).unwrap();
    let dom = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 1.0 };
    let spec = ProblemSpec::on_domain(&dom, &[129, 129], 1.0, |_| 1.0,
        |x| eval_example(&ex, x).unwrap().value, 2).unwrap();
    let mut opts = SolveOptions::default();
    opts.max_inner = 400_000;
    let rep = solve_dirichlet(&spec, &opts).unwrap();
    let mut err = 0.0f64;
    for i in 0..rep.field.grid.node_count() {
        if rep.field.mask[i] {
            let x = rep.field.grid.node_coord_flat(i);
            err = err.max((rep.field.values[i] - eval_example(&ex, &x).unwrap().value).abs());
        }
    }
    let hist: Vec<String> = rep.residual_history.iter().map(|r| format!("{:.1e}", r)).collect();
    panic!("long: wall {:.1}s inner {} outer {} residual {:.2e} conv {} err {:.3e} hist {:?}",
        rep.wall_time, rep.inner_iters, rep.outer_iters, rep.residual, rep.converged, err,
        &hist[hist.len().saturating_sub(12)..]);
}
