use crate::geometry::Grid;
use crate::solver::stencil::StencilSet;

/// min over frames of the product of positive parts of second differences.
/// Frames that reach outside the grid at this node are skipped; the caller
/// guarantees the axis frame fits (every unknown node is interior).
pub fn ma_operator(grid: &Grid, values: &[f64], stencils: &StencilSet, node: usize) -> f64 {
    let multi = grid.node_multi(node);
    let mut best = f64::INFINITY;
    for (f, frame) in stencils.frames.iter().enumerate() {
        let mut prod = 1.0;
        let mut fits = true;
        for (i, dir) in frame.iter().enumerate() {
            let neg: Vec<i64> = dir.iter().map(|&c| -c).collect();
            let (Some(p), Some(m)) = (grid.offset_node(&multi, dir), grid.offset_node(&multi, &neg))
            else {
                fits = false;
                break;
            };
            let d2 = (values[p] + values[m] - 2.0 * values[node]) / stencils.delta2[f][i];
            prod *= d2.max(0.0);
        }
        if fits {
            best = best.min(prod);
        }
    }
    best
}

/// Value u at a node making the frame's product of positive-part second
/// differences equal coeff · u⁺^q. The product is decreasing and the
/// right-hand side increasing in u, so the root in [0, min S_e/2] is unique.
/// Solving the zero-order term implicitly keeps the scheme strictly proper;
/// with the coefficient frozen instead, the degenerate right-hand side admits
/// spurious discrete states that vanish along lattice lines.
pub fn frame_solve_coupled(
    terms: &[(f64, f64)],
    coeff: f64,
    q: f64,
    utol: f64,
    guess: f64,
) -> f64 {
    let cap = terms.iter().map(|t| t.0).fold(f64::INFINITY, f64::min) / 2.0;
    if coeff <= 0.0 {
        return cap;
    }
    if cap <= 0.0 {
        return 0.0;
    }
    // clear the delta2 denominators once: solve Π (S_i - 2u)⁺ = C·u^q
    let dprod_all: f64 = terms.iter().map(|t| t.1).product();
    let c = coeff * dprod_all;
    if q == 1.0 && terms.len() == 2 {
        // (S1 - 2u)(S2 - 2u) = c·u, smaller root (the larger exceeds cap)
        let s1 = terms[0].0;
        let s2 = terms[1].0;
        let b = 2.0 * (s1 + s2) + c;
        let disc = (b * b - 16.0 * s1 * s2).max(0.0);
        return ((b - disc.sqrt()) / 8.0).clamp(0.0, cap);
    }
    let psi = |u: f64| -> (f64, f64) {
        let mut a = [0.0f64; 8];
        let m = terms.len();
        for (slot, &(s, _)) in a.iter_mut().zip(terms) {
            *slot = (s - 2.0 * u).max(0.0);
        }
        let mut prod = 1.0f64;
        let mut dprod = 0.0f64;
        for i in 0..m {
            dprod = dprod * a[i] + prod;
            prod *= a[i];
        }
        let (pow, dpow) = if q == 1.0 {
            (u, 1.0)
        } else {
            let p = u.powf(q);
            (p, if u > 0.0 { q * p / u } else { 0.0 })
        };
        (prod - c * pow, -2.0 * dprod - c * dpow)
    };
    let f0 = psi(0.0).0;
    if f0 <= 0.0 {
        return 0.0;
    }
    // Newton with a bisection bracket safeguard
    let (mut lo, mut hi) = (0.0f64, cap);
    let mut u = if guess > 0.0 && guess < cap { guess } else { 0.5 * cap };
    for _ in 0..60 {
        let (f, df) = psi(u);
        if f > 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        if f.abs() <= 1e-13 * f0 || hi - lo <= utol.max(1e-15 * (1.0 + hi)) {
            break;
        }
        let mut next = if df < -1e-300 { u - f / df } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        u = next;
    }
    u.clamp(lo, hi)
}

/// Value u at a node making the frame's product of positive-part second
/// differences equal rhs, given (S_e, delta2_e) with S_e the sum of the two
/// neighbors along e. Monotone in rhs; equals min S_e / 2 when rhs <= 0.
pub fn frame_solve(terms: &[(f64, f64)], rhs: f64) -> f64 {
    let cap = terms.iter().map(|t| t.0).fold(f64::INFINITY, f64::min) / 2.0;
    if rhs <= 0.0 {
        return cap;
    }
    if terms.len() == 2 {
        // (S1 - 2u)(S2 - 2u) = rhs d1 d2, smaller root
        let (s1, d1) = terms[0];
        let (s2, d2) = terms[1];
        let disc = (s1 - s2) * (s1 - s2) + 4.0 * rhs * d1 * d2;
        return ((s1 + s2) - disc.sqrt()) / 4.0;
    }
    // clear the denominators: Π (S_i - 2u) = rhs · Π d_i, a strictly
    // decreasing product below the cap; bracket then safeguarded Newton
    let target: f64 = rhs * terms.iter().map(|t| t.1).product::<f64>();
    let eval = |u: f64| -> (f64, f64) {
        let mut prod = 1.0f64;
        let mut dprod = 0.0f64;
        for &(s, _) in terms {
            let a = s - 2.0 * u;
            dprod = dprod * a + prod;
            prod *= a;
        }
        (prod - target, -2.0 * dprod)
    };
    let mut hi = cap;
    let mut step = cap.abs().max(1.0) * 1e-3;
    let mut lo = hi - step;
    let mut guard = 0;
    while eval(lo).0 < 0.0 && guard < 200 {
        step *= 2.0;
        lo = hi - step;
        guard += 1;
    }
    let mut u = 0.5 * (lo + hi);
    for _ in 0..60 {
        let (f, df) = eval(u);
        if f >= 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        if f.abs() <= 1e-13 * target || hi - lo <= 1e-14 * (1.0 + u.abs()) {
            break;
        }
        let mut next = if df < -1e-300 { u - f / df } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        u = next;
    }
    u
}


#[cfg(test)]
mod perf_probe {
    use super::*;
    use std::time::Instant;

    #[test]
    #[ignore]
    fn time_frame_solve() {
        let h2 = (2.0f64 / 64.0).powi(2);
        let terms = [(1.0f64, h2), (0.9, h2), (1.1, h2)];
        let t0 = Instant::now();
        let mut acc = 0.0;
        for i in 0..1_000_000 {
            acc += frame_solve_coupled(&terms, 1.0 + (i % 7) as f64 * 0.01, 1.0, 1e-10, 0.22);
        }
        eprintln!("coupled: {:?}/call (acc {acc})", t0.elapsed() / 1_000_000);
        let t0 = Instant::now();
        for i in 0..1_000_000 {
            acc += frame_solve(&terms, 0.5 + (i % 7) as f64 * 0.01);
        }
        eprintln!("frozen: {:?}/call (acc {acc})", t0.elapsed() / 1_000_000);
        panic!("done");
    }
}
