use maob::*;

#[test]
#[ignore]
fn probe_localize() {
    let ex = AnalyticExample::radial_power(2, 1.0).unwrap();
    let dom = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 1.0 };
    let spec = ProblemSpec::on_domain(&dom, &[129, 129], 1.0, |_| 1.0,
        |x| eval_example(&ex, x).unwrap().value, 2).unwrap();
    let mut opts = SolveOptions::default();
    opts.max_inner = 120_000;
    let rep = solve_dirichlet(&spec, &opts).unwrap();
    let grid = &rep.field.grid;
    let stencils = StencilSet::build(2, &grid.h, 2).unwrap();
    let mut worst = (0.0f64, vec![0.0; 2], 0.0, 0.0);
    let mut worst_err = (0.0f64, vec![0.0; 2]);
    let unknown: std::collections::HashSet<usize> = spec.unknown_nodes().into_iter().collect();
    for i in 0..grid.node_count() {
        if !unknown.contains(&i) { continue; }
        let x = grid.node_coord_flat(i);
        let exact = eval_example(&ex, &x).unwrap().value;
        let e = (rep.field.values[i] - exact).abs();
        if e > worst_err.0 { worst_err = (e, x.clone()); }
        let ma = ma_operator(grid, &rep.field.values, &stencils, i);
        let r = (ma - rep.field.values[i].max(0.0)).abs();
        if r > worst.0 { worst = (r, x.clone(), ma, rep.field.values[i]); }
    }
    // radial profile of error along +x axis
    let mut prof = String::new();
    for j in 0..13 {
        let t = j as f64 / 13.0;
        let x = vec![t, 0.0];
        let mut node = vec![0usize; 2];
        for a in 0..2 { node[a] = ((x[a] - grid.lo[a]) / grid.h[a]).round() as usize; }
        let node = grid.node_index(&node);
        let exact = eval_example(&ex, &grid.node_coord_flat(node)).unwrap().value;
        prof += &format!(" {:.2}:{:+.1e}", t, rep.field.values[node] - exact);
    }
    panic!("worst residual {:.3e} at {:?} (ma {:.3e} v {:.3e}); worst err {:.3e} at {:?}; profile{}",
        worst.0, worst.1, worst.2, worst.3, worst_err.0, worst_err.1, prof);
}
