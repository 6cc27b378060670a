use crate::analytic::calibrate::{calibrate_c, sample_validity_points, CALIBRATION_SEED};
use crate::analytic::families::{
    eval_face_profile, family_exponents, AnalyticExample, FaceFrame, FamilyVariant,
    PolytopeSubData,
};
use crate::error::{MaobError, Result};
use crate::geometry::domain::{enumerate_subsets, polytope_vertices};
use crate::geometry::{dot, norm, ConvexDomain, Halfspace};
use crate::strict_ceil;

/// Dimension of the faces the construction pins to: one below the smallest
/// integer strictly larger than (n+q)/2.
pub fn pinned_face_dim(n: usize, q: f64) -> i64 {
    strict_ceil((n as f64 + q) / 2.0) - 1
}

/// A k-face of the polytope: its vertices and the bounding halfspaces
/// active on all of them.
struct KFace {
    vertex_ids: Vec<usize>,
    active: Vec<usize>,
}

fn gram_schmidt(vectors: &[Vec<f64>], keep: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let c = dot(&w, b);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
        let len = norm(&w);
        if len > 1e-9 {
            for wi in w.iter_mut() {
                *wi /= len;
            }
            basis.push(w);
            if basis.len() == keep {
                break;
            }
        }
    }
    basis
}

fn enumerate_k_faces(
    halfspaces: &[Halfspace],
    vertices: &[Vec<f64>],
    k: usize,
) -> Vec<KFace> {
    let n = halfspaces[0].a.len();
    let m = halfspaces.len();
    let mut faces: Vec<KFace> = Vec::new();
    let mut subset = vec![0usize; n - k];
    enumerate_subsets(m, n - k, &mut subset, 0, 0, &mut |idx: &[usize]| {
        let mut ids: Vec<usize> = Vec::new();
        for (vi, v) in vertices.iter().enumerate() {
            if idx.iter().all(|&j| halfspaces[j].eval(v).abs() <= 1e-9) {
                ids.push(vi);
            }
        }
        if ids.len() < k + 1 {
            return;
        }
        let pts: Vec<Vec<f64>> = ids.iter().map(|&i| vertices[i].clone()).collect();
        if crate::geometry::affine_rank(&pts, 1e-9) != k {
            return;
        }
        ids.sort_unstable();
        if faces.iter().any(|f| f.vertex_ids == ids) {
            return;
        }
        faces.push(KFace { vertex_ids: ids, active: idx.to_vec() });
    });
    faces
}

fn face_frame(halfspaces: &[Halfspace], vertices: &[Vec<f64>], face: &KFace) -> Result<FaceFrame> {
    let n = halfspaces[0].a.len();
    let pts: Vec<&Vec<f64>> = face.vertex_ids.iter().map(|&i| &vertices[i]).collect();
    let mut center = vec![0.0; n];
    for p in &pts {
        for a in 0..n {
            center[a] += p[a] / pts.len() as f64;
        }
    }
    let diffs: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| p.iter().zip(&center).map(|(a, b)| a - b).collect())
        .collect();
    let k = n - face.active.len();
    let plane_basis = gram_schmidt(&diffs, k);
    if plane_basis.len() != k {
        return Err(MaobError::DegenerateDomain("face plane basis is rank deficient".into()));
    }
    // supporting functional: average of the active unit normals
    let mut ell_a = vec![0.0; n];
    for &j in &face.active {
        let len = norm(&halfspaces[j].a);
        for a in 0..n {
            ell_a[a] += halfspaces[j].a[a] / len;
        }
    }
    let len = norm(&ell_a);
    if len <= 1e-12 {
        return Err(MaobError::DegenerateDomain("active normals cancel".into()));
    }
    for a in ell_a.iter_mut() {
        *a /= len;
    }
    let ell_b = dot(&ell_a, &center);
    // ell must support the polytope at this face
    for v in vertices {
        if dot(&ell_a, v) - ell_b > 1e-8 {
            return Err(MaobError::DegenerateDomain(
                "constructed functional does not support the polytope".into(),
            ));
        }
    }
    Ok(FaceFrame { center, plane_basis, ell_a, ell_b })
}

fn in_plane_radius(frame: &FaceFrame, x: &[f64]) -> f64 {
    let dx: Vec<f64> = x.iter().zip(&frame.center).map(|(a, b)| a - b).collect();
    let r2: f64 = frame.plane_basis.iter().map(|b| dot(&dx, b).powi(2)).sum();
    r2.sqrt()
}

fn polytope_samples(halfspaces: &[Halfspace], vertices: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = halfspaces[0].a.len();
    let (lo, hi) = {
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for v in vertices {
            for a in 0..n {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        (lo, hi)
    };
    let per_axis = if n <= 2 { 17 } else { 9 };
    let mut out: Vec<Vec<f64>> = vertices.to_vec();
    let total = per_axis_pow(per_axis, n);
    for flat in 0..total {
        let mut rem = flat;
        let mut x = vec![0.0; n];
        for a in 0..n {
            let i = rem % per_axis;
            rem /= per_axis;
            x[a] = lo[a] + (hi[a] - lo[a]) * i as f64 / (per_axis - 1) as f64;
        }
        if halfspaces.iter().all(|h| h.eval(&x) <= 1e-9) {
            out.push(x);
        }
    }
    out
}

fn per_axis_pow(base: usize, exp: usize) -> usize {
    (0..exp).fold(1usize, |acc, _| acc * base)
}

/// Build the pinned subsolution max_i{profile_i + M1 * ell_i} over a
/// polytope P inside the domain omega. The profiles vanish exactly on the
/// planes of the k-faces of P, with k = pinned_face_dim(n, q).
pub fn polytope_subsolution(
    p_halfspaces: &[Halfspace],
    omega: &ConvexDomain,
    q: f64,
    m1: f64,
    m2: f64,
) -> Result<AnalyticExample> {
    if p_halfspaces.is_empty() {
        return Err(MaobError::DegenerateDomain("no halfspaces".into()));
    }
    let n = p_halfspaces[0].a.len();
    if m1 <= 0.0 || m2 <= 0.0 {
        return Err(MaobError::InvalidParameter("M1 and M2 must be positive".into()));
    }
    let kk = pinned_face_dim(n, q);
    if kk < 1 || kk as usize > n - 1 {
        return Err(MaobError::InvalidParameter(format!(
            "no admissible pinned face dimension for n={n}, q={q}"
        )));
    }
    let k = kk as usize;
    let info = family_exponents(FamilyVariant::FamilyA, n, k, q, 1.0);
    if !info.admissible {
        return Err(MaobError::InvalidParameter(info.reason.unwrap_or_default()));
    }
    let beta = info.exponent;

    let vertices = polytope_vertices(p_halfspaces)?;
    for v in &vertices {
        if !omega.contains(v) {
            return Err(MaobError::InvalidParameter(
                "polytope is not contained in the domain".into(),
            ));
        }
    }
    let faces = enumerate_k_faces(p_halfspaces, &vertices, k);
    if faces.is_empty() {
        return Err(MaobError::DegenerateDomain(format!("polytope has no {k}-faces")));
    }
    let frames: Vec<FaceFrame> = faces
        .iter()
        .map(|f| face_frame(p_halfspaces, &vertices, f))
        .collect::<Result<_>>()?;

    // validity radius: cover the whole domain in every face plane
    let (olo, ohi) = omega.bounding_box()?;
    let mut corners: Vec<Vec<f64>> = Vec::new();
    for flat in 0..per_axis_pow(2, n) {
        corners.push((0..n).map(|a| if (flat >> a) & 1 == 0 { olo[a] } else { ohi[a] }).collect());
    }
    let mut tau = 0.0f64;
    for frame in &frames {
        for c in &corners {
            tau = tau.max(in_plane_radius(frame, c));
        }
    }
    tau *= 1.05;
    // in-plane range on which the profile stays convex
    let r_max = (2.0 * (beta - 1.0) / (beta + 1.0)).sqrt();
    if tau > r_max {
        return Err(MaobError::InvalidParameter(format!(
            "domain needs in-plane radius {tau:.3} but the profile is only convex up to \
             {r_max:.3}; shrink the domain or the polytope"
        )));
    }

    let mut data = PolytopeSubData { n, k, q, m1, m2, faces: frames, tau, c_sub: 1.0 };

    // the offset functionals must dominate the profiles on all of P
    let samples = polytope_samples(p_halfspaces, &vertices);
    for x in &samples {
        for frame in &data.faces {
            let phi = eval_face_profile(&data, frame, x)?;
            let ell = dot(&frame.ell_a, x) - frame.ell_b;
            if phi.value + m1 * ell > 1e-9 {
                let needed = if ell < -1e-12 { -phi.value / ell } else { f64::INFINITY };
                return Err(MaobError::IncreaseM1(format!(
                    "offset functional fails to dominate on the polytope; need M1 >= {needed:.3}"
                )));
            }
        }
    }

    let mut example = AnalyticExample::PolytopeSub(data.clone());
    let sample = sample_validity_points(&example, 1200, CALIBRATION_SEED);
    if sample.len() < 100 {
        return Err(MaobError::EmptySample);
    }
    let c = calibrate_c(&mut example, &sample)?;
    if c <= 0.0 {
        return Err(MaobError::InvalidParameter(format!(
            "calibration produced a nonpositive constant {c:.3e}"
        )));
    }
    data.c_sub = c;
    Ok(AnalyticExample::PolytopeSub(data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::families::{eval_example, Derivatives};

    fn square(half: f64) -> Vec<Halfspace> {
        vec![
            Halfspace::new(vec![1.0, 0.0], half),
            Halfspace::new(vec![-1.0, 0.0], half),
            Halfspace::new(vec![0.0, 1.0], half),
            Halfspace::new(vec![0.0, -1.0], half),
        ]
    }

    #[test]
    fn pinned_face_dims() {
        assert_eq!(pinned_face_dim(2, 1.5), 1);
        assert_eq!(pinned_face_dim(3, 0.5), 1);
        assert_eq!(pinned_face_dim(3, 1.0), 2);
        assert_eq!(pinned_face_dim(4, 0.5), 2);
    }

    #[test]
    fn square_subsolution_vanishes_on_polytope() {
        let omega = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 0.25 };
        let e = polytope_subsolution(&square(0.1), &omega, 1.5, 3.0, 1.0).unwrap();
        // zero on P (vertices, center, edge midpoints)
        for x in [[0.0, 0.0], [0.1, 0.1], [-0.1, 0.05], [0.0, -0.1]] {
            let d = eval_example(&e, &x).unwrap();
            assert!(d.value.abs() < 1e-12, "w({x:?}) = {}", d.value);
        }
        // positive away from P
        for x in [[0.2, 0.0], [0.0, -0.22], [0.17, 0.17]] {
            let d = eval_example(&e, &x).unwrap();
            assert!(d.value > 1e-6, "w({x:?}) = {}", d.value);
        }
    }

    #[test]
    fn square_subsolution_is_convex_where_smooth() {
        let omega = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 0.25 };
        let e = polytope_subsolution(&square(0.1), &omega, 1.5, 3.0, 1.0).unwrap();
        let sample = sample_validity_points(&e, 400, 5);
        assert!(sample.len() >= 100);
        assert!(crate::analytic::calibrate::convexity_holds(&e, &sample));
    }

    #[test]
    fn square_subsolution_calibrates() {
        let omega = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 0.25 };
        let e = polytope_subsolution(&square(0.1), &omega, 1.5, 3.0, 1.0).unwrap();
        assert!(e.c_sub() > 0.0, "c_sub = {}", e.c_sub());
        let sample = sample_validity_points(&e, 600, 9);
        let rep = crate::analytic::calibrate::subsolution_residual(&e, &sample).unwrap();
        assert!(rep.min_residual >= -1e-10, "min residual {}", rep.min_residual);
    }

    #[test]
    fn tiny_m1_is_rejected_with_guidance() {
        let omega = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 0.25 };
        let err = polytope_subsolution(&square(0.1), &omega, 1.5, 1e-6, 1.0).unwrap_err();
        assert!(matches!(err, MaobError::IncreaseM1(_)), "got {err:?}");
    }

    #[test]
    fn oversized_domain_is_rejected() {
        let omega = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 3.0 };
        let err = polytope_subsolution(&square(0.1), &omega, 1.5, 3.0, 1.0).unwrap_err();
        assert!(matches!(err, MaobError::InvalidParameter(_)), "got {err:?}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let omega = ConvexDomain::Ball { center: vec![0.0, 0.0], radius: 0.25 };
        let e = polytope_subsolution(&square(0.1), &omega, 1.5, 3.0, 1.0).unwrap();
        let x = [0.18, 0.03];
        let Derivatives { gradient, .. } = eval_example(&e, &x).unwrap();
        let h = 1e-6;
        for a in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let fd = (eval_example(&e, &xp).unwrap().value
                - eval_example(&e, &xm).unwrap().value)
                / (2.0 * h);
            assert!((fd - gradient[a]).abs() < 1e-5, "axis {a}: fd {fd} vs {}", gradient[a]);
        }
    }
}
