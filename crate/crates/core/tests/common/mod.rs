#![allow(dead_code)]

use edgespike::radial::{solve_ground_state, RadialConfig, RadialProfile};
use std::sync::OnceLock;

/// U(0) for p = 3 produced by [`rk4_shooting_u0`] (step 1e-5, bisection to the
/// dichotomy limit); regenerate with `cargo test -- --ignored regenerate`.
pub const FROZEN_U0_P3: f64 = 4.337387679980555;
pub const FROZEN_U0_P2: f64 = 4.191682954436651;

pub fn profile(p: f64) -> &'static RadialProfile {
    static P2: OnceLock<RadialProfile> = OnceLock::new();
    static P3: OnceLock<RadialProfile> = OnceLock::new();
    let cell = if p == 2.0 {
        &P2
    } else if p == 3.0 {
        &P3
    } else {
        panic!("no cached profile for p = {p}")
    };
    cell.get_or_init(|| solve_ground_state(&RadialConfig::new(p)).expect("ground state"))
}

/// +1 if the trajectory from `u0` crosses zero, -1 if it turns upward, 0 if undecided by `r_end`.
fn classify(u0: f64, p: f64, h: f64, r_end: f64) -> i32 {
    let f = |r: f64, u: f64, v: f64| -> (f64, f64) { (v, u - u.abs().powf(p) - 2.0 * v / r) };
    let mut r = h;
    let k = (u0 - u0.powf(p)) / 6.0;
    let mut u = u0 + k * h * h;
    let mut v = 2.0 * k * h;
    while r < r_end {
        let (a1, b1) = f(r, u, v);
        let (a2, b2) = f(r + 0.5 * h, u + 0.5 * h * a1, v + 0.5 * h * b1);
        let (a3, b3) = f(r + 0.5 * h, u + 0.5 * h * a2, v + 0.5 * h * b2);
        let (a4, b4) = f(r + h, u + h * a3, v + h * b3);
        u += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        v += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        r += h;
        if u < 0.0 {
            return 1;
        }
        if v > 0.0 {
            return -1;
        }
    }
    0
}

/// Brute-force bisection shooting with classical RK4 at a fixed step.
pub fn rk4_shooting_u0(p: f64, h: f64) -> f64 {
    let (mut lo, mut hi) = (1.05, 60.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match classify(mid, p, h, 40.0) {
            1 => hi = mid,
            -1 => lo = mid,
            _ => break,
        }
    }
    0.5 * (lo + hi)
}

/// (1/2 - 1/(p+1)) ∫ U^{p+1} over the unit-angle cone {0 < φ < 1} by tensor
/// Gauss–Legendre quadrature in Cartesian-like cylinder coordinates
/// (x₁ along the edge, polar (ρ, φ) across it).
pub fn cone_quadrature_c0(prof: &RadialProfile, r_cut: f64, n_panels: usize) -> f64 {
    let (gx, gw) = gauss_legendre(8);
    let p = prof.p;
    let panel = r_cut / n_panels as f64;
    let mut total = 0.0;
    // x₁ ∈ [-r_cut, r_cut] via symmetry: 2 ∫_0^{r_cut}
    for ia in 0..n_panels {
        for (xa, wa) in gx.iter().zip(&gw) {
            let x1 = panel * (ia as f64 + 0.5 * (xa + 1.0));
            let w1 = 0.5 * panel * wa;
            for ib in 0..n_panels {
                for (xb, wb) in gx.iter().zip(&gw) {
                    let rho = panel * (ib as f64 + 0.5 * (xb + 1.0));
                    let wr = 0.5 * panel * wb;
                    let r = (x1 * x1 + rho * rho).sqrt();
                    if r > r_cut {
                        continue;
                    }
                    // φ-integral over [0, 1] of a φ-independent integrand is 1
                    total += 2.0 * w1 * wr * rho * prof.value(r).powf(p + 1.0);
                }
            }
        }
    }
    (0.5 - 1.0 / (p + 1.0)) * total
}

/// Nodes and weights on [-1, 1] by Newton iteration on Legendre polynomials.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

/// Angular eigenvalue by shooting on `W'' + (2ν+1) cot θ W' + (λ - ν(ν+1)) W = 0`
/// from the regular pole to the equator. The phase `atan2(W, W')` at the
/// equator grows with λ and equals `π/2 + jπ/2` at the j-th eigenvalue (modes
/// alternate between even and odd about the equator).
pub fn shooting_angular(nu: f64, j: usize) -> f64 {
    let phase = |lam: f64| -> f64 {
        let c = lam - nu * (nu + 1.0);
        let f = |th: f64, w: f64, dw: f64| -> (f64, f64) { (dw, -(2.0 * nu + 1.0) / th.tan() * dw - c * w) };
        let h: f64 = 1e-5;
        let mut th = 1e-4;
        let mut w = 1.0 - c / (2.0 * (2.0 * nu + 2.0)) * th * th;
        let mut dw = -c / (2.0 * nu + 2.0) * th;
        let mut ph = w.atan2(dw);
        let end = std::f64::consts::FRAC_PI_2;
        while th < end - 1e-12 {
            let step = h.min(end - th);
            let (a1, b1) = f(th, w, dw);
            let (a2, b2) = f(th + 0.5 * step, w + 0.5 * step * a1, dw + 0.5 * step * b1);
            let (a3, b3) = f(th + 0.5 * step, w + 0.5 * step * a2, dw + 0.5 * step * b2);
            let (a4, b4) = f(th + step, w + step * a3, dw + step * b3);
            w += step / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            dw += step / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            let raw = w.atan2(dw);
            let mut d = raw - ph.rem_euclid(2.0 * std::f64::consts::PI);
            while d > std::f64::consts::PI {
                d -= 2.0 * std::f64::consts::PI;
            }
            while d < -std::f64::consts::PI {
                d += 2.0 * std::f64::consts::PI;
            }
            ph += d;
            th += step;
        }
        ph
    };
    let target = std::f64::consts::FRAC_PI_2 * (1.0 + j as f64);
    let mut lo = nu * (nu + 1.0) - 1e-3;
    let mut hi = (nu + j as f64 + 2.0) * (nu + j as f64 + 3.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if phase(mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lowest σ of the radial linearized problem by shooting: σ is too large when
/// the solution of `y'' = (1 + λ/r² - pU^{p-1}/(1-σ)) y` with `y ~ r^{l+1}`
/// acquires a node before it escapes.
pub fn shooting_lowest_sigma(prof: &RadialProfile, lambda_ang: f64) -> f64 {
    let l = 0.5 * (-1.0 + (1.0 + 4.0 * lambda_ang).sqrt());
    let p = prof.p;
    let crosses = |sigma: f64| -> bool {
        let k = 1.0 / (1.0 - sigma);
        let pot = |r: f64| 1.0 + lambda_ang / (r * r) - k * p * prof.value(r).powf(p - 1.0);
        let h = 1e-3;
        let mut r: f64 = 1e-3;
        let mut y = r.powf(l + 1.0);
        let mut dy = (l + 1.0) * r.powf(l);
        while r < 25.0 {
            let f = |r: f64, y: f64, dy: f64| (dy, pot(r) * y);
            let (a1, b1) = f(r, y, dy);
            let (a2, b2) = f(r + 0.5 * h, y + 0.5 * h * a1, dy + 0.5 * h * b1);
            let (a3, b3) = f(r + 0.5 * h, y + 0.5 * h * a2, dy + 0.5 * h * b2);
            let (a4, b4) = f(r + h, y + h * a3, dy + h * b3);
            y += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            dy += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            r += h;
            if y < 0.0 {
                return true;
            }
            if dy > 0.0 && r > 5.0 {
                return false;
            }
        }
        false
    };
    let (mut lo, mut hi) = (-20.0, 0.999);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if crosses(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
