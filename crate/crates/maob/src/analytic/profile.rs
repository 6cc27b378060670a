use crate::error::{MaobError, Result};

/// Partial derivatives of a bivariate profile u(ρ, r) at one point.
#[derive(Debug, Clone, Copy)]
pub struct UPartials {
    pub u: f64,
    pub u_rho: f64,
    pub u_r: f64,
    pub u_rhorho: f64,
    pub u_rr: f64,
    pub u_rhor: f64,
}

/// The bivariate profiles u(ρ, r) used by the shipped families, with
/// f(r) = 1 + r²/2 throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BivariateFn {
    /// (ρ² + r²)/2, so that w = |x|²/2.
    Quadratic,
    /// ρ + ρ^β f(r): linear growth off the zero plane.
    LinearGrowth { beta: f64 },
    /// ρ^s + ρ^γ f(r): power growth with exponent s.
    PowerGrowth { s: f64, gamma: f64 },
    /// d + d^s f(r), d = max(ρ − 1/2, 0): the cylinder profile.
    Cylinder { s: f64 },
    /// c (ρ² + r²)^{α/2}: radial power solutions.
    RadialPower { c: f64, alpha: f64 },
    /// ρ·r, a non-convex probe profile.
    Product,
}

fn f_of_r(r: f64) -> (f64, f64, f64) {
    (1.0 + 0.5 * r * r, r, 1.0)
}

impl BivariateFn {
    pub fn partials(&self, rho: f64, r: f64) -> UPartials {
        let (f, fp, fpp) = f_of_r(r);
        match *self {
            BivariateFn::Quadratic => UPartials {
                u: 0.5 * (rho * rho + r * r),
                u_rho: rho,
                u_r: r,
                u_rhorho: 1.0,
                u_rr: 1.0,
                u_rhor: 0.0,
            },
            BivariateFn::LinearGrowth { beta } => UPartials {
                u: rho + rho.powf(beta) * f,
                u_rho: 1.0 + beta * rho.powf(beta - 1.0) * f,
                u_r: rho.powf(beta) * fp,
                u_rhorho: beta * (beta - 1.0) * rho.powf(beta - 2.0) * f,
                u_rr: rho.powf(beta) * fpp,
                u_rhor: beta * rho.powf(beta - 1.0) * fp,
            },
            BivariateFn::PowerGrowth { s, gamma } => UPartials {
                u: rho.powf(s) + rho.powf(gamma) * f,
                u_rho: s * rho.powf(s - 1.0) + gamma * rho.powf(gamma - 1.0) * f,
                u_r: rho.powf(gamma) * fp,
                u_rhorho: s * (s - 1.0) * rho.powf(s - 2.0)
                    + gamma * (gamma - 1.0) * rho.powf(gamma - 2.0) * f,
                u_rr: rho.powf(gamma) * fpp,
                u_rhor: gamma * rho.powf(gamma - 1.0) * fp,
            },
            BivariateFn::Cylinder { s } => {
                let d = (rho - 0.5).max(0.0);
                if d == 0.0 {
                    UPartials { u: 0.0, u_rho: 0.0, u_r: 0.0, u_rhorho: 0.0, u_rr: 0.0, u_rhor: 0.0 }
                } else {
                    UPartials {
                        u: d + d.powf(s) * f,
                        u_rho: 1.0 + s * d.powf(s - 1.0) * f,
                        u_r: d.powf(s) * fp,
                        u_rhorho: s * (s - 1.0) * d.powf(s - 2.0) * f,
                        u_rr: d.powf(s) * fpp,
                        u_rhor: s * d.powf(s - 1.0) * fp,
                    }
                }
            }
            BivariateFn::RadialPower { c, alpha } => {
                let m = alpha / 2.0;
                let t = rho * rho + r * r;
                UPartials {
                    u: c * t.powf(m),
                    u_rho: 2.0 * c * m * rho * t.powf(m - 1.0),
                    u_r: 2.0 * c * m * r * t.powf(m - 1.0),
                    u_rhorho: 2.0 * c * m * t.powf(m - 1.0)
                        + 4.0 * c * m * (m - 1.0) * rho * rho * t.powf(m - 2.0),
                    u_rr: 2.0 * c * m * t.powf(m - 1.0)
                        + 4.0 * c * m * (m - 1.0) * r * r * t.powf(m - 2.0),
                    u_rhor: 4.0 * c * m * (m - 1.0) * rho * r * t.powf(m - 2.0),
                }
            }
            BivariateFn::Product => UPartials {
                u: rho * r,
                u_rho: r,
                u_r: rho,
                u_rhorho: 0.0,
                u_rr: 0.0,
                u_rhor: 1.0,
            },
        }
    }
}

/// A rotationally symmetric profile w(x) = u(|y|, |z|) with y ∈ R^{n−k},
/// z ∈ R^k.
#[derive(Debug, Clone, Copy)]
pub struct SymmetricProfile {
    pub n: usize,
    pub k: usize,
    pub u: BivariateFn,
}

impl SymmetricProfile {
    pub fn new(n: usize, k: usize, u: BivariateFn) -> Result<SymmetricProfile> {
        if n < 2 || k == 0 || k > n - 1 {
            return Err(MaobError::InvalidParameter(format!(
                "symmetric profile needs 1 <= k <= n-1, got n={n}, k={k}"
            )));
        }
        Ok(SymmetricProfile { n, k, u })
    }

    /// w(x) for x = (y, z) split at n−k.
    pub fn eval_w(&self, x: &[f64]) -> f64 {
        let (rho, r) = self.split(x);
        self.u.partials(rho, r).u
    }

    pub fn split(&self, x: &[f64]) -> (f64, f64) {
        let nk = self.n - self.k;
        let rho = x[..nk].iter().map(|v| v * v).sum::<f64>().sqrt();
        let r = x[nk..].iter().map(|v| v * v).sum::<f64>().sqrt();
        (rho, r)
    }
}

/// Hessian-determinant formula for symmetric functions of (|y|, |z|):
///
///   det D²w = (u_ρ/ρ)^{n−k−1} (u_r/r)^{k−1} (u_ρρ u_rr − u_ρr²).
///
/// Valid off the symmetry axes; the formula is algebraic and applies to
/// non-convex profiles as well.
pub fn symmetric_det(profile: &SymmetricProfile, rho: f64, r: f64) -> Result<f64> {
    if rho <= 0.0 || r <= 0.0 {
        return Err(MaobError::OnSymmetryAxis);
    }
    let p = profile.u.partials(rho, r);
    let n = profile.n;
    let k = profile.k;
    let tangential = (p.u_rho / rho).powi((n - k - 1) as i32) * (p.u_r / r).powi((k - 1) as i32);
    Ok(tangential * (p.u_rhorho * p.u_rr - p.u_rhor * p.u_rhor))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_profile_has_unit_determinant() {
        for (n, k) in [(2, 1), (3, 1), (3, 2), (4, 2)] {
            let p = SymmetricProfile::new(n, k, BivariateFn::Quadratic).unwrap();
            let d = symmetric_det(&p, 0.37, 0.81).unwrap();
            assert!((d - 1.0).abs() < 1e-14, "n={n} k={k}: {d}");
        }
    }

    #[test]
    fn axis_points_error() {
        let p = SymmetricProfile::new(3, 1, BivariateFn::Quadratic).unwrap();
        assert!(symmetric_det(&p, 0.0, 0.5).is_err());
        assert!(symmetric_det(&p, 0.5, 0.0).is_err());
    }

    #[test]
    fn product_profile_evaluates() {
        // non-convex probe: det D2(rho*r) in n=2,k=1 is -(u_rhor)^2 = -1
        let p = SymmetricProfile::new(2, 1, BivariateFn::Product).unwrap();
        let d = symmetric_det(&p, 0.4, 0.3).unwrap();
        assert!((d + 1.0).abs() < 1e-14);
    }
}
