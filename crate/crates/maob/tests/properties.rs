//! Property tests for the geometric and discrete primitives.

use maob::analysis::coincidence_set;
use maob::geometry::{hausdorff_distance, sublevel_volume, CellSet, Grid, ScalarField};
use maob::solver::{ma_operator, StencilSet};
use proptest::prelude::*;

fn small_grid() -> Grid {
    Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![8, 8]).unwrap()
}

fn cell_subset() -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0usize..64, 1..20)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hausdorff_is_symmetric_and_zero_on_self(a in cell_subset(), b in cell_subset()) {
        let grid = small_grid();
        let ka = CellSet::new(grid.clone(), a);
        let kb = CellSet::new(grid.clone(), b);
        let dab = hausdorff_distance(&ka, &kb);
        let dba = hausdorff_distance(&kb, &ka);
        prop_assert!((dab - dba).abs() < 1e-12);
        prop_assert_eq!(hausdorff_distance(&ka, &ka), 0.0);
    }

    #[test]
    fn hausdorff_triangle_inequality(
        a in cell_subset(),
        b in cell_subset(),
        c in cell_subset(),
    ) {
        let grid = small_grid();
        let ka = CellSet::new(grid.clone(), a);
        let kb = CellSet::new(grid.clone(), b);
        let kc = CellSet::new(grid.clone(), c);
        let dac = hausdorff_distance(&ka, &kc);
        let dab = hausdorff_distance(&ka, &kb);
        let dbc = hausdorff_distance(&kb, &kc);
        prop_assert!(dac <= dab + dbc + 1e-12);
    }

    #[test]
    fn ma_operator_monotone_in_off_center_values(
        bump in 0.0..0.5f64,
        ix in 1usize..7,
        iy in 1usize..7,
    ) {
        // raising any neighbor value cannot decrease the operator
        let grid = small_grid();
        let stencils = StencilSet::build(2, &grid.h, 1).unwrap();
        let values: Vec<f64> = (0..grid.node_count())
            .map(|i| {
                let x = grid.node_coord_flat(i);
                x[0] * x[0] + 0.5 * x[1] * x[1]
            })
            .collect();
        let node = grid.node_index(&[4, 4]);
        let base = ma_operator(&grid, &values, &stencils, node);
        let mut bumped = values.clone();
        let j = grid.node_index(&[ix, iy]);
        if j != node {
            bumped[j] += bump;
            let after = ma_operator(&grid, &bumped, &stencils, node);
            prop_assert!(after >= base - 1e-12);
        }
    }

    #[test]
    fn sublevel_volume_monotone_in_height(h1 in 0.01..1.0f64, h2 in 0.01..1.0f64) {
        let grid = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![24, 24]).unwrap();
        let v = ScalarField::from_fn(grid, |x| x[0] * x[0] + x[1] * x[1]);
        let (lo, hi) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
        let a = sublevel_volume(&v, lo, None).unwrap();
        let b = sublevel_volume(&v, hi, None).unwrap();
        prop_assert!(a <= b + 1e-12);
    }

    #[test]
    fn coincidence_set_antitone_in_threshold(e1 in 0.001..0.5f64, e2 in 0.001..0.5f64) {
        let grid = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![16, 16]).unwrap();
        let v = ScalarField::from_fn(grid, |x| (x[0] * x[0] + x[1] * x[1]).sqrt());
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let ka = coincidence_set(&v, lo);
        let kb = coincidence_set(&v, hi);
        prop_assert!(ka.cells.iter().all(|c| kb.contains(*c)));
    }

    #[test]
    fn strict_ceil_is_strictly_above(x in -50.0..50.0f64) {
        let c = maob::strict_ceil(x);
        prop_assert!(c as f64 > x);
        prop_assert!(c as f64 - x <= 1.0 + 1e-9);
    }
}
