use nalgebra::DMatrix;

use crate::analytic::profile::{BivariateFn, SymmetricProfile, UPartials};
use crate::error::{MaobError, Result};
use crate::geometry::dot;

/// Value, gradient and (where defined) Hessian of an analytic example.
///
/// At non-smooth points the gradient is the minimal-norm subgradient and the
/// Hessian is `None`.
#[derive(Debug, Clone)]
pub struct Derivatives {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Option<DMatrix<f64>>,
}

/// Closed-form example families with tagged parameters.
///
/// * `FamilyA` — linear growth (s = 1) off a k-plane: u = ρ + ρ^β f(r).
/// * `FamilyB` — power growth s > 1: u = ρ^s + ρ^γ f(r).
/// * `Cylinder` — u = d + d^s f(r) with d = max(ρ − 1/2, 0), s = (q+2)/2.
/// * `RadialPower` — exact solution v = c|x|^α, α = 2n/(n−q).
/// * `PolytopeSub` — max of shifted, rotated FamilyA profiles vanishing on a
///   polytope.
#[derive(Debug, Clone)]
pub enum AnalyticExample {
    FamilyA { n: usize, k: usize, q: f64, tau: f64, c_sub: f64 },
    FamilyB { n: usize, k: usize, q: f64, s: f64, tau: f64, c_sub: f64 },
    Cylinder { n: usize, q: f64, tau: f64, c_sub: f64 },
    RadialPower { n: usize, q: f64 },
    PolytopeSub(PolytopeSubData),
}

/// Frame data for one k-face of the polytope subsolution.
#[derive(Debug, Clone)]
pub struct FaceFrame {
    /// Point on the affine hull of the face.
    pub center: Vec<f64>,
    /// Orthonormal in-plane directions (k vectors).
    pub plane_basis: Vec<Vec<f64>>,
    /// Supporting functional: ell(x) = a·x − b, zero on the face plane,
    /// negative on the polytope.
    pub ell_a: Vec<f64>,
    pub ell_b: f64,
}

#[derive(Debug, Clone)]
pub struct PolytopeSubData {
    pub n: usize,
    pub k: usize,
    pub q: f64,
    pub m1: f64,
    pub m2: f64,
    pub faces: Vec<FaceFrame>,
    /// In-plane validity radius of the rotated linear-growth profiles.
    pub tau: f64,
    pub c_sub: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyVariant {
    FamilyA,
    FamilyB,
    Cylinder,
    RadialPower,
}

/// Growth exponent and admissibility of a family parameter choice.
#[derive(Debug, Clone)]
pub struct ExponentInfo {
    /// β (FamilyA), γ (FamilyB), s (Cylinder) or α (RadialPower).
    pub exponent: f64,
    /// Growth rate of the example off its zero set.
    pub s_effective: f64,
    pub admissible: bool,
    pub reason: Option<String>,
}

/// Second exponent of the power-growth family: the unique γ for which the
/// ρ-powers in det D²w collect to ρ^{qs}, i.e. (s−2)(n−k) + γk = qs.
pub fn gamma_exponent(n: usize, k: usize, q: f64, s: f64) -> f64 {
    (2.0 * (n - k) as f64 + (k as f64 - n as f64 + q) * s) / k as f64
}

/// Alternative γ form in circulation, (n−k+q+(k−n+q)s)/k. It satisfies the
/// power-balance identity only when q = n−k; kept for the discrepancy report.
pub fn gamma_exponent_alt(n: usize, k: usize, q: f64, s: f64) -> f64 {
    ((n - k) as f64 + q + (k as f64 - n as f64 + q) * s) / k as f64
}

/// Residual of the power-balance identity (s−2)(n−k) + γk − qs for a
/// candidate γ; zero means det D²w collects to ρ^{qs}·(bounded bracket).
pub fn gamma_balance_residual(n: usize, k: usize, q: f64, s: f64, gamma: f64) -> f64 {
    (s - 2.0) * (n - k) as f64 + gamma * k as f64 - q * s
}

/// Side-by-side report of the two γ candidates.
#[derive(Debug, Clone)]
pub struct GammaDiscrepancy {
    pub gamma_used: f64,
    pub gamma_alt: f64,
    pub balance_used: f64,
    pub balance_alt: f64,
}

pub fn gamma_discrepancy(n: usize, k: usize, q: f64, s: f64) -> GammaDiscrepancy {
    let used = gamma_exponent(n, k, q, s);
    let alt = gamma_exponent_alt(n, k, q, s);
    GammaDiscrepancy {
        gamma_used: used,
        gamma_alt: alt,
        balance_used: gamma_balance_residual(n, k, q, s, used),
        balance_alt: gamma_balance_residual(n, k, q, s, alt),
    }
}

/// Growth exponent and admissibility flags for each family.
pub fn family_exponents(
    variant: FamilyVariant,
    n: usize,
    k: usize,
    q: f64,
    s: f64,
) -> ExponentInfo {
    let fail = |exponent: f64, s_eff: f64, reason: &str| ExponentInfo {
        exponent,
        s_effective: s_eff,
        admissible: false,
        reason: Some(reason.to_string()),
    };
    if q < 0.0 || q >= n as f64 {
        return fail(f64::NAN, f64::NAN, "requires 0 <= q < n");
    }
    match variant {
        FamilyVariant::FamilyA => {
            let beta = ((n - k) as f64 + 1.0 + q) / (k as f64 + 1.0);
            if k == 0 || k > n - 1 {
                return fail(beta, 1.0, "requires 1 <= k <= n-1");
            }
            if n as f64 + q <= 2.0 {
                return fail(beta, 1.0, "requires n + q > 2");
            }
            if !((k as f64) < (n as f64 + q) / 2.0) {
                return fail(beta, 1.0, "requires k < (n+q)/2 (so that beta > 1)");
            }
            ExponentInfo { exponent: beta, s_effective: 1.0, admissible: true, reason: None }
        }
        FamilyVariant::FamilyB => {
            let gamma = gamma_exponent(n, k, q, s);
            if k == 0 || k > n - 1 {
                return fail(gamma, s, "requires 1 <= k <= n-1");
            }
            if n as f64 + q <= 2.0 {
                return fail(gamma, s, "requires n + q > 2");
            }
            if !(s > 1.0) {
                return fail(gamma, s, "requires s > 1 (use the linear-growth family at s = 1)");
            }
            let s_max = (2 * (n - k)) as f64 / (n as f64 - q);
            if s > s_max + 1e-12 {
                return fail(gamma, s, "requires s <= 2(n-k)/(n-q) (so that gamma >= s)");
            }
            ExponentInfo { exponent: gamma, s_effective: s, admissible: true, reason: None }
        }
        FamilyVariant::Cylinder => {
            let s_cyl = (q + 2.0) / 2.0;
            if q <= 0.0 {
                return fail(s_cyl, s_cyl, "requires q > 0");
            }
            ExponentInfo { exponent: s_cyl, s_effective: 1.0, admissible: true, reason: None }
        }
        FamilyVariant::RadialPower => {
            let alpha = 2.0 * n as f64 / (n as f64 - q);
            ExponentInfo { exponent: alpha, s_effective: alpha, admissible: true, reason: None }
        }
    }
}

/// Coefficient c_α of the radial solution c|x|^α with det D²v = v^q.
pub fn radial_power_coefficient(n: usize, q: f64) -> f64 {
    let alpha = 2.0 * n as f64 / (n as f64 - q);
    (alpha.powi(n as i32) * (alpha - 1.0)).powf(-1.0 / (n as f64 - q))
}

impl AnalyticExample {
    pub fn dim(&self) -> usize {
        match self {
            AnalyticExample::FamilyA { n, .. }
            | AnalyticExample::FamilyB { n, .. }
            | AnalyticExample::Cylinder { n, .. }
            | AnalyticExample::RadialPower { n, .. } => *n,
            AnalyticExample::PolytopeSub(d) => d.n,
        }
    }

    pub fn q(&self) -> f64 {
        match self {
            AnalyticExample::FamilyA { q, .. }
            | AnalyticExample::FamilyB { q, .. }
            | AnalyticExample::Cylinder { q, .. }
            | AnalyticExample::RadialPower { q, .. } => *q,
            AnalyticExample::PolytopeSub(d) => d.q,
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match self {
            AnalyticExample::FamilyA { tau, .. }
            | AnalyticExample::FamilyB { tau, .. }
            | AnalyticExample::Cylinder { tau, .. } => Some(*tau),
            AnalyticExample::RadialPower { .. } => None,
            AnalyticExample::PolytopeSub(d) => Some(d.tau),
        }
    }

    pub fn set_tau(&mut self, new_tau: f64) {
        match self {
            AnalyticExample::FamilyA { tau, .. }
            | AnalyticExample::FamilyB { tau, .. }
            | AnalyticExample::Cylinder { tau, .. } => *tau = new_tau,
            AnalyticExample::RadialPower { .. } => {}
            AnalyticExample::PolytopeSub(d) => d.tau = new_tau,
        }
    }

    pub fn c_sub(&self) -> f64 {
        match self {
            AnalyticExample::FamilyA { c_sub, .. }
            | AnalyticExample::FamilyB { c_sub, .. }
            | AnalyticExample::Cylinder { c_sub, .. } => *c_sub,
            AnalyticExample::RadialPower { .. } => 1.0,
            AnalyticExample::PolytopeSub(d) => d.c_sub,
        }
    }

    pub fn set_c_sub(&mut self, c: f64) {
        match self {
            AnalyticExample::FamilyA { c_sub, .. }
            | AnalyticExample::FamilyB { c_sub, .. }
            | AnalyticExample::Cylinder { c_sub, .. } => *c_sub = c,
            AnalyticExample::RadialPower { .. } => {}
            AnalyticExample::PolytopeSub(d) => d.c_sub = c,
        }
    }

    /// Symmetric (ρ, r) profile of the example, if it has one.
    pub fn profile(&self) -> Option<SymmetricProfile> {
        match self {
            AnalyticExample::FamilyA { n, k, q, .. } => {
                let beta = family_exponents(FamilyVariant::FamilyA, *n, *k, *q, 1.0).exponent;
                SymmetricProfile::new(*n, *k, BivariateFn::LinearGrowth { beta }).ok()
            }
            AnalyticExample::FamilyB { n, k, q, s, .. } => {
                let gamma = gamma_exponent(*n, *k, *q, *s);
                SymmetricProfile::new(*n, *k, BivariateFn::PowerGrowth { s: *s, gamma }).ok()
            }
            AnalyticExample::Cylinder { n, q, .. } => {
                let s = (q + 2.0) / 2.0;
                SymmetricProfile::new(*n, 1, BivariateFn::Cylinder { s }).ok()
            }
            AnalyticExample::RadialPower { n, q } => {
                let alpha = 2.0 * *n as f64 / (*n as f64 - q);
                let c = radial_power_coefficient(*n, *q);
                SymmetricProfile::new(*n, (*n / 2).max(1), BivariateFn::RadialPower { c, alpha })
                    .ok()
            }
            AnalyticExample::PolytopeSub(_) => None,
        }
    }

    /// Raw family constructors (validity radius and subsolution constant are
    /// filled in by `choose_tau` / `calibrate_c`).
    pub fn family_a_raw(n: usize, k: usize, q: f64, tau: f64) -> Result<AnalyticExample> {
        let info = family_exponents(FamilyVariant::FamilyA, n, k, q, 1.0);
        if !info.admissible {
            return Err(MaobError::InvalidParameter(info.reason.unwrap_or_default()));
        }
        Ok(AnalyticExample::FamilyA { n, k, q, tau, c_sub: 1.0 })
    }

    pub fn family_b_raw(n: usize, k: usize, q: f64, s: f64, tau: f64) -> Result<AnalyticExample> {
        let info = family_exponents(FamilyVariant::FamilyB, n, k, q, s);
        if !info.admissible {
            return Err(MaobError::InvalidParameter(info.reason.unwrap_or_default()));
        }
        Ok(AnalyticExample::FamilyB { n, k, q, s, tau, c_sub: 1.0 })
    }

    pub fn cylinder_raw(n: usize, q: f64, tau: f64) -> Result<AnalyticExample> {
        let info = family_exponents(FamilyVariant::Cylinder, n, 1, q, 1.0);
        if !info.admissible {
            return Err(MaobError::InvalidParameter(info.reason.unwrap_or_default()));
        }
        Ok(AnalyticExample::Cylinder { n, q, tau, c_sub: 1.0 })
    }

    pub fn radial_power(n: usize, q: f64) -> Result<AnalyticExample> {
        if q < 0.0 || q >= n as f64 {
            return Err(MaobError::InvalidParameter("requires 0 <= q < n".into()));
        }
        Ok(AnalyticExample::RadialPower { n, q })
    }
}

/// Assemble value/gradient/Hessian of w(x) = u(ρ, r) in ambient coordinates,
/// given the ambient y-component, the in-plane orthonormal basis, and the
/// in-plane coordinates z.
fn assemble_symmetric(
    n: usize,
    y_amb: &[f64],
    z_basis: &[Vec<f64>],
    z: &[f64],
    p: &UPartials,
    smooth: bool,
) -> Derivatives {
    let rho = dot(y_amb, y_amb).sqrt();
    let r = dot(z, z).sqrt();
    let tiny = 1e-12;

    let y_hat: Vec<f64> = if rho > tiny {
        y_amb.iter().map(|v| v / rho).collect()
    } else {
        vec![0.0; n]
    };
    let mut z_amb = vec![0.0; n];
    for (j, b) in z_basis.iter().enumerate() {
        for a in 0..n {
            z_amb[a] += z[j] * b[a];
        }
    }
    let z_hat: Vec<f64> = if r > tiny {
        z_amb.iter().map(|v| v / r).collect()
    } else {
        vec![0.0; n]
    };

    let mut gradient = vec![0.0; n];
    for a in 0..n {
        gradient[a] = p.u_rho * y_hat[a] + p.u_r * z_hat[a];
    }

    let hessian = if smooth && rho > tiny && r > tiny {
        // projector onto the z-plane
        let mut pz = DMatrix::<f64>::zeros(n, n);
        for b in z_basis {
            for i in 0..n {
                for j in 0..n {
                    pz[(i, j)] += b[i] * b[j];
                }
            }
        }
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let py = (if i == j { 1.0 } else { 0.0 }) - pz[(i, j)];
                h[(i, j)] = p.u_rhorho * y_hat[i] * y_hat[j]
                    + p.u_rhor * (y_hat[i] * z_hat[j] + z_hat[i] * y_hat[j])
                    + p.u_rr * z_hat[i] * z_hat[j]
                    + (p.u_rho / rho) * (py - y_hat[i] * y_hat[j])
                    + (p.u_r / r) * (pz[(i, j)] - z_hat[i] * z_hat[j]);
            }
        }
        Some(h)
    } else {
        None
    };

    Derivatives { value: p.u, gradient, hessian }
}

fn axis_z_basis(n: usize, k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[n - k + j] = 1.0;
            e
        })
        .collect()
}

/// Evaluate an analytic example at a point: value, gradient and Hessian.
pub fn eval_example(e: &AnalyticExample, x: &[f64]) -> Result<Derivatives> {
    let n = e.dim();
    if x.len() != n {
        return Err(MaobError::InvalidParameter("point dimension mismatch".into()));
    }
    match e {
        AnalyticExample::FamilyA { n, k, tau, .. }
        | AnalyticExample::FamilyB { n, k, tau, .. } => {
            let profile = e.profile().expect("symmetric family");
            let (rho, r) = profile.split(x);
            if r > *tau + 1e-12 {
                return Err(MaobError::OutsideValidity { r, tau: *tau });
            }
            let p = profile.u.partials(rho, r);
            let smooth = rho > 1e-12;
            let mut y_amb = vec![0.0; *n];
            y_amb[..(n - k)].copy_from_slice(&x[..(n - k)]);
            let z = &x[(n - k)..];
            let mut d = assemble_symmetric(*n, &y_amb, &axis_z_basis(*n, *k), z, &p, smooth);
            if rho <= 1e-12 {
                // minimal-norm subgradient on the zero plane
                d.gradient = vec![0.0; *n];
                d.value = 0.0;
            }
            Ok(d)
        }
        AnalyticExample::Cylinder { n, tau, .. } => {
            let profile = e.profile().expect("cylinder profile");
            let (rho, r) = profile.split(x);
            if r > *tau + 1e-12 {
                return Err(MaobError::OutsideValidity { r, tau: *tau });
            }
            let p = profile.u.partials(rho, r);
            let d_val = (rho - 0.5).max(0.0);
            let kink = (rho - 0.5).abs() <= 1e-12;
            if d_val <= 0.0 {
                let hessian = if kink { None } else { Some(DMatrix::zeros(*n, *n)) };
                return Ok(Derivatives { value: 0.0, gradient: vec![0.0; *n], hessian });
            }
            let smooth = !kink;
            let mut y_amb = vec![0.0; *n];
            y_amb[..(n - 1)].copy_from_slice(&x[..(n - 1)]);
            let z = &x[(n - 1)..];
            Ok(assemble_symmetric(*n, &y_amb, &axis_z_basis(*n, 1), z, &p, smooth))
        }
        AnalyticExample::RadialPower { n, q } => {
            let alpha = 2.0 * *n as f64 / (*n as f64 - q);
            let c = radial_power_coefficient(*n, *q);
            let rr = dot(x, x).sqrt();
            if rr <= 1e-14 {
                return Ok(Derivatives {
                    value: 0.0,
                    gradient: vec![0.0; *n],
                    hessian: None,
                });
            }
            let value = c * rr.powf(alpha);
            let grad_scale = c * alpha * rr.powf(alpha - 2.0);
            let gradient: Vec<f64> = x.iter().map(|v| grad_scale * v).collect();
            let hess_rad = c * alpha * (alpha - 2.0) * rr.powf(alpha - 4.0);
            let mut h = DMatrix::zeros(*n, *n);
            for i in 0..*n {
                for j in 0..*n {
                    h[(i, j)] = hess_rad * x[i] * x[j] + if i == j { grad_scale } else { 0.0 };
                }
            }
            Ok(Derivatives { value, gradient, hessian: Some(h) })
        }
        AnalyticExample::PolytopeSub(data) => eval_polytope_sub(data, x),
    }
}

/// Evaluate one rotated/translated linear-growth profile.
pub(crate) fn eval_face_profile(
    data: &PolytopeSubData,
    frame: &FaceFrame,
    x: &[f64],
) -> Result<Derivatives> {
    let n = data.n;
    let beta =
        family_exponents(FamilyVariant::FamilyA, n, data.k, data.q, 1.0).exponent;
    let dx: Vec<f64> = x.iter().zip(&frame.center).map(|(a, b)| a - b).collect();
    let z: Vec<f64> = frame.plane_basis.iter().map(|b| dot(&dx, b)).collect();
    let mut y_amb = dx.clone();
    for (j, b) in frame.plane_basis.iter().enumerate() {
        for a in 0..n {
            y_amb[a] -= z[j] * b[a];
        }
    }
    let rho = dot(&y_amb, &y_amb).sqrt();
    let r = dot(&z, &z).sqrt();
    if r > data.tau + 1e-12 {
        return Err(MaobError::OutsideValidity { r, tau: data.tau });
    }
    let u = BivariateFn::LinearGrowth { beta };
    let p = u.partials(rho, r);
    let smooth = rho > 1e-12;
    let mut d = assemble_symmetric(n, &y_amb, &frame.plane_basis, &z, &p, smooth);
    if rho <= 1e-12 {
        d.value = 0.0;
        d.gradient = vec![0.0; n];
    }
    Ok(d)
}

fn eval_polytope_sub(data: &PolytopeSubData, x: &[f64]) -> Result<Derivatives> {
    let n = data.n;
    let mut branches: Vec<(f64, usize, Derivatives)> = Vec::with_capacity(data.faces.len());
    for (i, frame) in data.faces.iter().enumerate() {
        let phi = eval_face_profile(data, frame, x)?;
        let ell = dot(&frame.ell_a, x) - frame.ell_b;
        branches.push((phi.value + data.m1 * ell, i, phi));
    }
    let (best_val, best_i, best_phi) = branches
        .iter()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .map(|(v, i, d)| (*v, *i, d.clone()))
        .unwrap();

    let tol = 1e-10;
    if best_val <= 0.0 {
        let at_kink = best_val.abs() <= tol;
        return Ok(Derivatives {
            value: 0.0,
            gradient: vec![0.0; n],
            hessian: if at_kink { None } else { Some(DMatrix::zeros(n, n)) },
        });
    }
    let tied = branches
        .iter()
        .filter(|(v, i, _)| *i != best_i && (best_val - v).abs() <= tol)
        .count()
        > 0;
    let frame = &data.faces[best_i];
    let mut gradient = vec![0.0; n];
    for a in 0..n {
        gradient[a] = data.m2 * (best_phi.gradient[a] + data.m1 * frame.ell_a[a]);
    }
    let hessian = if tied || best_val.abs() <= tol {
        None
    } else {
        best_phi.hessian.map(|h| h * data.m2)
    };
    Ok(Derivatives { value: data.m2 * best_val, gradient, hessian })
}

/// Hessian determinant of an example at a point, via the symmetric-profile
/// formula when available, otherwise from the assembled Hessian.
pub fn example_det(e: &AnalyticExample, x: &[f64]) -> Result<f64> {
    match e {
        AnalyticExample::PolytopeSub(_) => {
            let d = eval_example(e, x)?;
            let h = d.hessian.ok_or(MaobError::OnSymmetryAxis)?;
            Ok(h.determinant())
        }
        _ => {
            let profile = e.profile().expect("symmetric family");
            let (rho, r) = profile.split(x);
            if let Some(tau) = e.tau() {
                if r > tau + 1e-12 {
                    return Err(MaobError::OutsideValidity { r, tau });
                }
            }
            crate::analytic::profile::symmetric_det(&profile, rho, r)
        }
    }
}
