use maob::*;

fn square(a: f64) -> Vec<Halfspace> {
    vec![
        Halfspace::new(vec![1.0, 0.0], a),
        Halfspace::new(vec![-1.0, 0.0], a),
        Halfspace::new(vec![0.0, 1.0], a),
        Halfspace::new(vec![0.0, -1.0], a),
    ]
}

#[test]
#[ignore]
fn probe_polytope() {
    for (a, rad) in [(0.3, 0.65), (0.25, 0.6), (0.3, 0.7), (0.2, 0.5), (0.35, 0.7)] {
        let omega = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: rad };
        for m1 in [1.0, 4.0, 16.0] {
            match polytope_subsolution(&square(a), &omega, 1.5, m1, 1.0) {
                Ok(e) => {
                    let sample = maob::analytic::sample_validity_points(&e, 600, 7);
                    let rr = subsolution_residual(&e, &sample).unwrap();
                    println!("a={a} rad={rad} m1={m1}: tau={:?} c_sub={:.4} min_res={:.3e}",
                        e.tau(), e.c_sub(), rr.min_residual);
                }
                Err(err) => println!("a={a} rad={rad} m1={m1}: ERROR {err}"),
            }
        }
    }
    panic!("done");
}
