use rayon::prelude::*;

use crate::error::{MaobError, Result};
use crate::geometry::{Face, ScalarField};

/// Integral of |Δ_h v| over shrinking collars around a face of the
/// coincidence set. For a W^{2,1} function the sequence tends to zero with
/// the collar width; a positive plateau is the numerical signature of a
/// surface-measure part of the Hessian (W^{2,1} failure).
pub fn collar_integral(v: &ScalarField, face: &Face, delta_list: &[f64]) -> Result<Vec<f64>> {
    let grid = &v.grid;
    let min_delta = 3.0 * grid.max_h();
    if delta_list.is_empty() {
        return Err(MaobError::InvalidParameter("empty collar width list".into()));
    }
    for &d in delta_list {
        if d < min_delta {
            return Err(MaobError::BelowResolution(format!(
                "collar width {d:.3e} below 3h = {min_delta:.3e}"
            )));
        }
    }
    let face_centers: Vec<Vec<f64>> = face
        .cells
        .iter()
        .map(|&c| grid.cell_center(&grid.cell_multi(c)))
        .collect();
    if face_centers.is_empty() {
        return Err(MaobError::EmptyCellSet);
    }
    let node_vol: f64 = grid.h.iter().product();
    // |Δ_h v| at interior masked nodes, with the distance to the face
    let contributions: Vec<(f64, f64)> = (0..grid.node_count())
        .into_par_iter()
        .filter_map(|i| {
            if !v.mask[i] {
                return None;
            }
            let multi = grid.node_multi(i);
            let mut lap = 0.0;
            let mut off = vec![0i64; grid.dim];
            for a in 0..grid.dim {
                off[a] = 1;
                let p = grid.offset_node(&multi, &off)?;
                off[a] = -1;
                let m = grid.offset_node(&multi, &off)?;
                off[a] = 0;
                if !v.mask[p] || !v.mask[m] {
                    return None;
                }
                lap += (v.values[p] + v.values[m] - 2.0 * v.values[i]) / (grid.h[a] * grid.h[a]);
            }
            let x = grid.node_coord_flat(i);
            let dist = face_centers
                .iter()
                .map(|c| {
                    x.iter()
                        .zip(c)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            Some((dist, lap.abs() * node_vol))
        })
        .collect();
    Ok(delta_list
        .iter()
        .map(|&d| {
            contributions
                .iter()
                .filter(|(dist, _)| *dist < d)
                .map(|(_, w)| w)
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::kset::{classify_gamma, coincidence_set};
    use crate::geometry::{ConvexDomain, Grid};

    #[test]
    fn smooth_field_collar_decays_linearly() {
        let grid = Grid::new(vec![-1.0; 2], vec![1.0; 2], vec![128, 128]).unwrap();
        let v = ScalarField::from_fn(grid.clone(), |x| x[1] * x[1]);
        let k = coincidence_set(&v, 2.5 * grid.max_h().powi(2));
        let omega = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 1.4 };
        let rep = classify_gamma(&k, &omega, &v).unwrap();
        let face = rep.decomposition.interior_faces().next().unwrap();
        let deltas = [0.4, 0.2, 0.1, 0.05];
        let vals = collar_integral(&v, face, &deltas).unwrap();
        // Δv = 2 everywhere; the integral is proportional to collar volume
        assert!(vals[3] < 0.35 * vals[0], "{vals:?}");
    }

    #[test]
    fn kink_field_collar_plateaus() {
        // v = max(|x_2| - 1/4, 0): the Hessian carries surface measure on
        // the two fold lines, so the collar integral does not decay
        let grid = Grid::new(vec![-1.0; 2], vec![1.0; 2], vec![128, 128]).unwrap();
        let v = ScalarField::from_fn(grid.clone(), |x| (x[1].abs() - 0.25).max(0.0));
        let k = coincidence_set(&v, 0.5 * grid.max_h());
        let omega = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 1.4 };
        let rep = classify_gamma(&k, &omega, &v).unwrap();
        let face = rep
            .decomposition
            .interior_faces()
            .max_by(|a, b| a.cells.len().cmp(&b.cells.len()))
            .unwrap();
        let deltas = [0.4, 0.2, 0.1, 0.05];
        let vals = collar_integral(&v, face, &deltas).unwrap();
        assert!(vals[3] >= 0.5 * vals[0], "{vals:?}");
        assert!(vals[3] > 0.1, "{vals:?}");
    }

    #[test]
    fn subresolution_collar_is_rejected() {
        let grid = Grid::new(vec![-1.0; 2], vec![1.0; 2], vec![16, 16]).unwrap();
        let v = ScalarField::from_fn(grid.clone(), |x| x[1] * x[1]);
        let k = coincidence_set(&v, 2.5 * grid.max_h().powi(2));
        let omega = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 1.4 };
        let rep = classify_gamma(&k, &omega, &v).unwrap();
        let face = rep.decomposition.interior_faces().next().unwrap();
        let err = collar_integral(&v, face, &[0.1]).unwrap_err();
        assert!(matches!(err, MaobError::BelowResolution(_)));
    }
}
