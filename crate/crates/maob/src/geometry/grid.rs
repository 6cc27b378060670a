use crate::error::{MaobError, Result};

/// Uniform Cartesian grid over a bounding box in R^n.
///
/// Nodes are the `res+1` lattice points per axis, cells the `res` intervals.
/// Flat node/cell indices are row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub dim: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub res: Vec<usize>,
    pub h: Vec<f64>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, res: Vec<usize>) -> Result<Grid> {
        let dim = lo.len();
        if dim == 0 || hi.len() != dim || res.len() != dim {
            return Err(MaobError::InvalidGrid("inconsistent axis counts".into()));
        }
        for a in 0..dim {
            if !(lo[a] < hi[a]) {
                return Err(MaobError::InvalidGrid(format!(
                    "lo >= hi on axis {a}: {} >= {}",
                    lo[a], hi[a]
                )));
            }
            if res[a] < 3 {
                return Err(MaobError::InvalidGrid(format!("res < 3 on axis {a}")));
            }
        }
        let h = (0..dim).map(|a| (hi[a] - lo[a]) / res[a] as f64).collect();
        Ok(Grid { dim, lo, hi, res, h })
    }

    pub fn node_count(&self) -> usize {
        self.res.iter().map(|r| r + 1).product()
    }

    pub fn cell_count(&self) -> usize {
        self.res.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    pub fn max_h(&self) -> f64 {
        self.h.iter().cloned().fold(0.0, f64::max)
    }

    /// Diameter of the bounding box.
    pub fn diameter(&self) -> f64 {
        (0..self.dim)
            .map(|a| (self.hi[a] - self.lo[a]).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn node_index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for a in 0..self.dim {
            idx = idx * (self.res[a] + 1) + multi[a];
        }
        idx
    }

    pub fn node_multi(&self, mut flat: usize) -> Vec<usize> {
        let mut multi = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            let m = self.res[a] + 1;
            multi[a] = flat % m;
            flat /= m;
        }
        multi
    }

    pub fn node_coord(&self, multi: &[usize]) -> Vec<f64> {
        (0..self.dim)
            .map(|a| self.lo[a] + multi[a] as f64 * self.h[a])
            .collect()
    }

    pub fn node_coord_flat(&self, flat: usize) -> Vec<f64> {
        self.node_coord(&self.node_multi(flat))
    }

    pub fn cell_index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        for a in 0..self.dim {
            idx = idx * self.res[a] + multi[a];
        }
        idx
    }

    pub fn cell_multi(&self, mut flat: usize) -> Vec<usize> {
        let mut multi = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            multi[a] = flat % self.res[a];
            flat /= self.res[a];
        }
        multi
    }

    pub fn cell_center(&self, cell_multi: &[usize]) -> Vec<f64> {
        (0..self.dim)
            .map(|a| self.lo[a] + (cell_multi[a] as f64 + 0.5) * self.h[a])
            .collect()
    }

    pub fn cell_center_flat(&self, flat: usize) -> Vec<f64> {
        self.cell_center(&self.cell_multi(flat))
    }

    /// Flat node indices of the 2^n corners of a cell.
    pub fn cell_corners(&self, cell_multi: &[usize]) -> Vec<usize> {
        let n = self.dim;
        let mut corners = Vec::with_capacity(1 << n);
        for bits in 0..(1usize << n) {
            let multi: Vec<usize> = (0..n)
                .map(|a| cell_multi[a] + ((bits >> a) & 1))
                .collect();
            corners.push(self.node_index(&multi));
        }
        corners
    }

    /// Neighbor node at `multi + offset`, if it stays on the grid.
    pub fn offset_node(&self, multi: &[usize], offset: &[i64]) -> Option<usize> {
        let mut out = vec![0usize; self.dim];
        for a in 0..self.dim {
            let v = multi[a] as i64 + offset[a];
            if v < 0 || v > self.res[a] as i64 {
                return None;
            }
            out[a] = v as usize;
        }
        Some(self.node_index(&out))
    }

    /// Multilinear interpolation of nodal `values` at point `x` (clamped to the box).
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let n = self.dim;
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for a in 0..n {
            let t = ((x[a] - self.lo[a]) / self.h[a]).clamp(0.0, self.res[a] as f64);
            let i = (t.floor() as usize).min(self.res[a] - 1);
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let mut acc = 0.0;
        for bits in 0..(1usize << n) {
            let mut wgt = 1.0;
            let mut multi = vec![0usize; n];
            for a in 0..n {
                let b = (bits >> a) & 1;
                multi[a] = base[a] + b;
                wgt *= if b == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            acc += wgt * values[self.node_index(&multi)];
        }
        acc
    }
}
