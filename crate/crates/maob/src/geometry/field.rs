use crate::error::{MaobError, Result};
use crate::geometry::domain::Halfspace;
use crate::geometry::grid::Grid;

/// Nodal samples of a scalar function over a masked grid.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>, mask: Vec<bool>) -> Result<ScalarField> {
        if values.len() != grid.node_count() || mask.len() != grid.node_count() {
            return Err(MaobError::InvalidGrid("value/mask length mismatch".into()));
        }
        for (i, (&v, &m)) in values.iter().zip(&mask).enumerate() {
            if m && !v.is_finite() {
                return Err(MaobError::InvalidGrid(format!(
                    "non-finite value at masked node {i}"
                )));
            }
        }
        Ok(ScalarField { grid, values, mask })
    }

    /// Sample a function at every node (mask everywhere true).
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> ScalarField {
        let values = (0..grid.node_count())
            .map(|i| f(&grid.node_coord_flat(i)))
            .collect();
        let mask = vec![true; grid.node_count()];
        ScalarField { grid, values, mask }
    }

    pub fn from_fn_masked(grid: Grid, mask: Vec<bool>, f: impl Fn(&[f64]) -> f64) -> ScalarField {
        let values = (0..grid.node_count())
            .map(|i| f(&grid.node_coord_flat(i)))
            .collect();
        ScalarField { grid, values, mask }
    }

    pub fn max_masked(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| m)
            .map(|(&v, _)| v)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn interpolate(&self, x: &[f64]) -> f64 {
        self.grid.interpolate(&self.values, x)
    }
}

/// Cell-counting measure of the sublevel set `{v < h}` (optionally
/// intersected with a halfspace `a·x <= b` through the cell center).
/// A cell counts when all of its corners are masked and the mean corner
/// value is below `h`; each cell contributes the full cell volume.
pub fn sublevel_volume(v: &ScalarField, h: f64, restrict: Option<&Halfspace>) -> Result<f64> {
    if h <= 0.0 {
        return Err(MaobError::InvalidParameter("sublevel height h <= 0".into()));
    }
    let grid = &v.grid;
    let cell_vol = grid.cell_volume();
    let mut count = 0usize;
    let corners_per_cell = 1usize << grid.dim;
    for cell in 0..grid.cell_count() {
        let multi = grid.cell_multi(cell);
        let corners = grid.cell_corners(&multi);
        if !corners.iter().all(|&c| v.mask[c]) {
            continue;
        }
        if let Some(hs) = restrict {
            if !hs.contains(&grid.cell_center(&multi)) {
                continue;
            }
        }
        let mean: f64 =
            corners.iter().map(|&c| v.values[c]).sum::<f64>() / corners_per_cell as f64;
        if mean < h {
            count += 1;
        }
    }
    Ok(count as f64 * cell_vol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::{make_grid, ConvexDomain};

    fn disk_field(res: usize) -> ScalarField {
        let d = ConvexDomain::unit_ball(2);
        let (grid, mask) = make_grid(&d, &[res, res]).unwrap();
        ScalarField::from_fn_masked(grid, mask, |x| 0.5 * (x[0] * x[0] + x[1] * x[1]))
    }

    #[test]
    fn disk_area_from_quadratic() {
        // {|x|^2/2 < h} is the disk of radius sqrt(2h); area 2*pi*h.
        let v = disk_field(128);
        let vol = sublevel_volume(&v, 0.125, None).unwrap();
        let exact = std::f64::consts::PI * 0.25;
        // one-cell-layer accuracy: perimeter * h
        let slack = 2.0 * std::f64::consts::PI * 0.5 * v.grid.max_h() * 1.5;
        assert!((vol - exact).abs() < slack, "vol={vol}, exact={exact}");
    }

    #[test]
    fn large_h_gives_masked_volume() {
        let v = disk_field(64);
        let vol = sublevel_volume(&v, 10.0, None).unwrap();
        let exact = std::f64::consts::PI; // |B_1|
        assert!((vol - exact).abs() < 0.15, "vol={vol}");
    }

    #[test]
    fn constant_above_h_is_empty() {
        let d = ConvexDomain::Box { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0] };
        let (grid, mask) = make_grid(&d, &[8, 8]).unwrap();
        let v = ScalarField::from_fn_masked(grid, mask, |_| 1.0);
        assert_eq!(sublevel_volume(&v, 0.5, None).unwrap(), 0.0);
    }

    #[test]
    fn rejects_nonpositive_h() {
        let v = disk_field(16);
        assert!(sublevel_volume(&v, 0.0, None).is_err());
    }

    #[test]
    fn monotone_in_h() {
        let v = disk_field(48);
        let mut prev = 0.0;
        for k in 1..=10 {
            let vol = sublevel_volume(&v, 0.05 * k as f64, None).unwrap();
            assert!(vol >= prev);
            prev = vol;
        }
    }

    #[test]
    fn halfspace_restriction_halves_disk() {
        let v = disk_field(128);
        // {x0 <= 0}
        let hs = Halfspace::new(vec![1.0, 0.0], 0.0);
        let half = sublevel_volume(&v, 0.125, Some(&hs)).unwrap();
        let full = sublevel_volume(&v, 0.125, None).unwrap();
        assert!((half - full / 2.0).abs() < 0.05 * full);
    }
}
