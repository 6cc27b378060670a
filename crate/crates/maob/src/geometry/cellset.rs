use std::collections::HashSet;

use crate::geometry::grid::Grid;

/// A set of grid cells, identified by flat cell indices (kept sorted).
#[derive(Debug, Clone)]
pub struct CellSet {
    pub grid: Grid,
    pub cells: Vec<usize>,
}

impl CellSet {
    pub fn new(grid: Grid, mut cells: Vec<usize>) -> CellSet {
        cells.sort_unstable();
        cells.dedup();
        CellSet { grid, cells }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    pub fn volume(&self) -> f64 {
        self.cells.len() as f64 * self.grid.cell_volume()
    }

    pub fn centers(&self) -> Vec<Vec<f64>> {
        self.cells
            .iter()
            .map(|&c| self.grid.cell_center_flat(c))
            .collect()
    }

    /// Cells of the set with at least one axis neighbor outside the set.
    pub fn boundary_cells(&self) -> Vec<usize> {
        let grid = &self.grid;
        let n = grid.dim;
        self.cells
            .iter()
            .cloned()
            .filter(|&c| {
                let multi = grid.cell_multi(c);
                for a in 0..n {
                    for s in [-1i64, 1] {
                        let v = multi[a] as i64 + s;
                        if v < 0 || v >= grid.res[a] as i64 {
                            return true;
                        }
                        let mut nb = multi.clone();
                        nb[a] = v as usize;
                        if !self.contains(grid.cell_index(&nb)) {
                            return true;
                        }
                    }
                }
                false
            })
            .collect()
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

fn directed_hausdorff(from: &[Vec<f64>], to: &[Vec<f64>]) -> f64 {
    from.iter()
        .map(|p| {
            to.iter()
                .map(|q| dist2(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
        .sqrt()
}

/// Symmetric Hausdorff distance between cell-center sets.
///
/// Convention: both empty -> 0; exactly one empty -> +inf (so "the
/// coincidence set vanished" is a detectable outcome in stability sweeps).
pub fn hausdorff_distance(a: &CellSet, b: &CellSet) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return f64::INFINITY,
        _ => {}
    }
    if a.grid == b.grid {
        // Same grid: only cells of the symmetric difference contribute, and
        // their nearest counterpart lies on the other set's boundary shell.
        let bset: HashSet<usize> = b.cells.iter().cloned().collect();
        let aset: HashSet<usize> = a.cells.iter().cloned().collect();
        let a_only: Vec<Vec<f64>> = a
            .cells
            .iter()
            .filter(|c| !bset.contains(c))
            .map(|&c| a.grid.cell_center_flat(c))
            .collect();
        let b_only: Vec<Vec<f64>> = b
            .cells
            .iter()
            .filter(|c| !aset.contains(c))
            .map(|&c| b.grid.cell_center_flat(c))
            .collect();
        if a_only.is_empty() && b_only.is_empty() {
            return 0.0;
        }
        let b_bnd: Vec<Vec<f64>> = b
            .boundary_cells()
            .iter()
            .map(|&c| b.grid.cell_center_flat(c))
            .collect();
        let a_bnd: Vec<Vec<f64>> = a
            .boundary_cells()
            .iter()
            .map(|&c| a.grid.cell_center_flat(c))
            .collect();
        let d_ab = if a_only.is_empty() { 0.0 } else { directed_hausdorff(&a_only, &b_bnd) };
        let d_ba = if b_only.is_empty() { 0.0 } else { directed_hausdorff(&b_only, &a_bnd) };
        return d_ab.max(d_ba);
    }
    let ca = a.centers();
    let cb = b.centers();
    directed_hausdorff(&ca, &cb).max(directed_hausdorff(&cb, &ca))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(res: usize) -> Grid {
        Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![res, res]).unwrap()
    }

    #[test]
    fn identity_distance_zero() {
        let g = grid2(8);
        let s = CellSet::new(g, vec![3, 9, 20]);
        assert_eq!(hausdorff_distance(&s, &s), 0.0);
    }

    #[test]
    fn singleton_pair() {
        let g = grid2(8);
        let a = CellSet::new(g.clone(), vec![g.cell_index(&[0, 0])]);
        let b = CellSet::new(g.clone(), vec![g.cell_index(&[0, 4])]);
        // centers differ by 4 cells along one axis = 0.5
        assert!((hausdorff_distance(&a, &b) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_conventions() {
        let g = grid2(8);
        let a = CellSet::new(g.clone(), vec![1]);
        let e = CellSet::new(g.clone(), vec![]);
        assert_eq!(hausdorff_distance(&a, &e), f64::INFINITY);
        assert_eq!(hausdorff_distance(&e, &a), f64::INFINITY);
        assert_eq!(hausdorff_distance(&e, &e), 0.0);
    }

    #[test]
    fn same_grid_fast_path_matches_bruteforce() {
        let g = grid2(6);
        let a = CellSet::new(g.clone(), vec![0, 1, 2, 7, 8, 14]);
        let b = CellSet::new(g.clone(), vec![1, 2, 8, 9, 15, 21]);
        let fast = hausdorff_distance(&a, &b);
        let ca = a.centers();
        let cb = b.centers();
        let brute = directed_hausdorff(&ca, &cb).max(directed_hausdorff(&cb, &ca));
        assert!((fast - brute).abs() < 1e-12);
    }
}
