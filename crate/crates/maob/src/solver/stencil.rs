use crate::error::{MaobError, Result};

/// Orthogonal lattice frames for the wide-stencil discretization of det D².
///
/// Each frame is a set of `dim` pairwise orthogonal primitive lattice
/// directions of sup-norm at most `width`; orthogonality is checked on the
/// physically scaled vectors h ⊙ e, so anisotropic grids keep only the
/// frames that are genuinely orthogonal in physical coordinates.
#[derive(Debug, Clone)]
pub struct StencilSet {
    pub dim: usize,
    pub width: usize,
    /// frames[f][i] is the i-th lattice direction of frame f
    pub frames: Vec<Vec<Vec<i64>>>,
    /// delta2[f][i] = |h ⊙ frames[f][i]|², the denominator of the
    /// second difference along that direction
    pub delta2: Vec<Vec<f64>>,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Primitive directions with sup-norm <= width, one per antipodal pair
/// (the first nonzero component is positive).
fn primitive_directions(dim: usize, width: i64) -> Vec<Vec<i64>> {
    let span = 2 * width + 1;
    let total = (0..dim).fold(1i64, |acc, _| acc * span);
    let mut dirs = Vec::new();
    for flat in 0..total {
        let mut rem = flat;
        let mut v = vec![0i64; dim];
        for a in 0..dim {
            v[a] = rem % span - width;
            rem /= span;
        }
        if v.iter().all(|&c| c == 0) {
            continue;
        }
        let first = v.iter().find(|&&c| c != 0).copied().unwrap();
        if first < 0 {
            continue;
        }
        let g = v.iter().fold(0i64, |acc, &c| gcd(acc, c));
        if g != 1 {
            continue;
        }
        dirs.push(v);
    }
    dirs.sort();
    dirs
}

impl StencilSet {
    pub fn build(dim: usize, h: &[f64], width: usize) -> Result<StencilSet> {
        if dim < 2 || h.len() != dim || h.iter().any(|&v| !(v > 0.0)) {
            return Err(MaobError::InvalidGrid(
                "stencil construction needs dim >= 2 and positive spacings".into(),
            ));
        }
        if width == 0 {
            return Err(MaobError::InvalidParameter("stencil width must be >= 1".into()));
        }
        let dirs = primitive_directions(dim, width as i64);
        let scaled: Vec<Vec<f64>> = dirs
            .iter()
            .map(|d| d.iter().zip(h).map(|(&c, &s)| c as f64 * s).collect())
            .collect();
        let lens: Vec<f64> = scaled
            .iter()
            .map(|v| v.iter().map(|c| c * c).sum::<f64>().sqrt())
            .collect();
        let ortho = |i: usize, j: usize| {
            let d: f64 = scaled[i].iter().zip(&scaled[j]).map(|(a, b)| a * b).sum();
            d.abs() <= 1e-12 * lens[i] * lens[j]
        };
        let mut frames: Vec<Vec<usize>> = Vec::new();
        let mut partial: Vec<usize> = Vec::new();
        build_frames(dirs.len(), dim, 0, &mut partial, &ortho, &mut frames);
        if frames.is_empty() {
            return Err(MaobError::InvalidGrid(
                "no orthogonal frame fits the grid spacings".into(),
            ));
        }
        let delta2 = frames
            .iter()
            .map(|f| f.iter().map(|&i| lens[i] * lens[i]).collect())
            .collect();
        let frames = frames
            .into_iter()
            .map(|f| f.into_iter().map(|i| dirs[i].clone()).collect())
            .collect();
        Ok(StencilSet { dim, width, frames, delta2 })
    }

    /// The axis-aligned frame always exists; its index in `frames`.
    pub fn axis_frame(&self) -> usize {
        self.frames
            .iter()
            .position(|f| {
                f.iter()
                    .all(|d| d.iter().map(|&c| c.abs()).sum::<i64>() == 1)
            })
            .expect("axis frame present by construction")
    }
}

fn build_frames(
    m: usize,
    dim: usize,
    start: usize,
    partial: &mut Vec<usize>,
    ortho: &impl Fn(usize, usize) -> bool,
    out: &mut Vec<Vec<usize>>,
) {
    if partial.len() == dim {
        out.push(partial.clone());
        return;
    }
    for i in start..m {
        if partial.iter().all(|&j| ortho(i, j)) {
            partial.push(i);
            build_frames(m, dim, i + 1, partial, ortho, out);
            partial.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_2d_width2_has_four_frames() {
        let s = StencilSet::build(2, &[0.1, 0.1], 2).unwrap();
        assert_eq!(s.frames.len(), 4, "{:?}", s.frames);
        let _ = s.axis_frame();
    }

    #[test]
    fn isotropic_3d_width1_has_four_frames() {
        let s = StencilSet::build(3, &[0.1, 0.1, 0.1], 1).unwrap();
        assert_eq!(s.frames.len(), 4, "{:?}", s.frames);
    }

    #[test]
    fn anisotropic_grid_keeps_only_physically_orthogonal_frames() {
        let s = StencilSet::build(2, &[0.1, 0.07], 2).unwrap();
        // only the axis frame survives a generic anisotropy
        assert_eq!(s.frames.len(), 1);
        assert_eq!(s.frames[0], vec![vec![0, 1], vec![1, 0]]);
        // a 2:1 anisotropy makes (1,2)-type pairs orthogonal again
        let s = StencilSet::build(2, &[0.2, 0.1], 2).unwrap();
        assert!(s.frames.len() > 1);
        for (f, d2) in s.frames.iter().zip(&s.delta2) {
            let p: Vec<f64> = f[0].iter().zip(&[0.2, 0.1]).map(|(&c, &h)| c as f64 * h).collect();
            let q: Vec<f64> = f[1].iter().zip(&[0.2, 0.1]).map(|(&c, &h)| c as f64 * h).collect();
            assert!((p[0] * q[0] + p[1] * q[1]).abs() < 1e-12);
            assert!((d2[0] - (p[0] * p[0] + p[1] * p[1])).abs() < 1e-15);
        }
    }

    #[test]
    fn delta2_matches_scaled_lengths() {
        let h = [0.25, 0.5];
        let s = StencilSet::build(2, &h, 2).unwrap();
        for (f, d2) in s.frames.iter().zip(&s.delta2) {
            for (dir, &dd) in f.iter().zip(d2) {
                let l2: f64 = dir.iter().zip(&h).map(|(&c, &s)| (c as f64 * s).powi(2)).sum();
                assert!((dd - l2).abs() < 1e-15);
            }
        }
    }
}
