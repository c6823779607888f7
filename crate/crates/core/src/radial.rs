//! Radial ground state of `-ΔU + U = U^p` in ℝ³ and the edge energy coefficient.
//!
//! The profile solves `u'' + (2/r) u' - u + u^p = 0`, `u'(0) = 0`, `u -> 0`.
//! Trajectories are integrated with a high-order Taylor series method: the
//! coefficients follow from the recurrence of the equation multiplied by `r`,
//! which is regular at the origin, so no special start-up step is needed.

use crate::error::{Error, Result};
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct RadialConfig {
    pub p: f64,
    pub r_max: f64,
    /// Initial node spacing; halved until the node residual check passes.
    pub h: f64,
    pub res_tol: f64,
    pub bracket: (f64, f64),
    pub taylor_order: usize,
}

impl RadialConfig {
    pub fn new(p: f64) -> Self {
        RadialConfig {
            p,
            r_max: 30.0,
            h: 0.0025,
            res_tol: 1e-10,
            bracket: (1.05, 60.0),
            taylor_order: 16,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub p: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub shoot_u0: f64,
    pub c_decay: f64,
    pub r_max: f64,
    pub res_tol: f64,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Fate {
    Crossed,
    Upturn,
    Survived,
}

/// Power-series coefficient `f_k` of `u^p` given `a_0..=a_k` and `f_0..f_k`.
fn power_coeff(p: f64, k: usize, a: &[f64], f: &[f64]) -> f64 {
    if k == 0 {
        return a[0].abs().powf(p) * a[0].signum();
    }
    let mut s = 0.0;
    for j in 1..=k {
        s += ((p + 1.0) * j as f64 - k as f64) * a[j] * f[k - j];
    }
    s / (k as f64 * a[0])
}

/// Taylor coefficients of the solution through `(r0, u0, v0)`, from the
/// recurrence of `r u'' + 2u' = r (u - u^p)` expanded about `r0`.
fn taylor_coeffs(p: f64, r0: f64, u0: f64, v0: f64, order: usize, a: &mut [f64], f: &mut [f64]) {
    a[0] = u0;
    if r0 == 0.0 {
        a[1] = 0.0;
        for m in 2..=order {
            f[m - 2] = power_coeff(p, m - 2, a, f);
            a[m] = (a[m - 2] - f[m - 2]) / (m * (m + 1)) as f64;
        }
    } else {
        a[1] = v0;
        for k in 0..=order - 2 {
            f[k] = power_coeff(p, k, a, f);
            let prev = if k > 0 { a[k - 1] - f[k - 1] } else { 0.0 };
            let kk = ((k + 1) * (k + 2)) as f64;
            a[k + 2] = (r0 * (a[k] - f[k]) + prev - kk * a[k + 1]) / (r0 * kk);
        }
    }
}

fn taylor_step(p: f64, r0: f64, u0: f64, v0: f64, h: f64, order: usize, a: &mut [f64], f: &mut [f64]) -> (f64, f64) {
    taylor_coeffs(p, r0, u0, v0, order, a, f);
    let mut u = a[order];
    let mut v = order as f64 * a[order];
    for k in (0..order).rev() {
        u = u * h + a[k];
        if k >= 1 {
            v = v * h + k as f64 * a[k];
        }
    }
    (u, v)
}

struct Integrator {
    p: f64,
    h: f64,
    order: usize,
    a: Vec<f64>,
    f: Vec<f64>,
}

impl Integrator {
    fn new(p: f64, h: f64, order: usize) -> Self {
        Integrator { p, h, order, a: vec![0.0; order + 1], f: vec![0.0; order + 1] }
    }

    fn step(&mut self, r0: f64, u: f64, v: f64, h: f64) -> (f64, f64) {
        taylor_step(self.p, r0, u, v, h, self.order, &mut self.a, &mut self.f)
    }

    /// Integrates outward from the origin and classifies the trajectory.
    fn classify(&mut self, u0: f64, n_max: usize) -> Fate {
        let (mut u, mut v) = (u0, 0.0);
        for i in 0..n_max {
            let r0 = i as f64 * self.h;
            let (un, vn) = self.step(r0, u, v, self.h);
            if un < 0.0 {
                return Fate::Crossed;
            }
            if vn > 0.0 {
                return Fate::Upturn;
            }
            u = un;
            v = vn;
        }
        Fate::Survived
    }

    /// Outward trajectory on nodes `0..=n`.
    fn outward(&mut self, u0: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut us = Vec::with_capacity(n + 1);
        let mut vs = Vec::with_capacity(n + 1);
        let (mut u, mut v) = (u0, 0.0);
        us.push(u);
        vs.push(v);
        for i in 0..n {
            let (un, vn) = self.step(i as f64 * self.h, u, v, self.h);
            u = un;
            v = vn;
            us.push(u);
            vs.push(v);
        }
        (us, vs)
    }

    /// Inward trajectory from node `n_end` down to node `n_stop`, started on
    /// the decaying tail `c e^{-r}/r`. Returned in increasing-r order.
    fn inward(&mut self, c: f64, n_end: usize, n_stop: usize) -> (Vec<f64>, Vec<f64>) {
        let r_end = n_end as f64 * self.h;
        let mut u = c * (-r_end).exp() / r_end;
        let mut v = -u * (1.0 + 1.0 / r_end);
        let len = n_end - n_stop + 1;
        let mut us = vec![0.0; len];
        let mut vs = vec![0.0; len];
        us[len - 1] = u;
        vs[len - 1] = v;
        for k in (0..len - 1).rev() {
            let r0 = (n_stop + k + 1) as f64 * self.h;
            let (un, vn) = self.step(r0, u, v, -self.h);
            u = un;
            v = vn;
            us[k] = u;
            vs[k] = v;
        }
        (us, vs)
    }
}

/// Computes the positive radial ground state by bisection shooting followed by
/// a two-sided matching polish against the exponential tail.
pub fn solve_ground_state(cfg: &RadialConfig) -> Result<RadialProfile> {
    let p = cfg.p;
    if !(p > 1.0 && p < 5.0) {
        return Err(Error::InvalidInput(format!("exponent p = {p} must lie in (1, 5)")));
    }
    if cfg.r_max < 20.0 {
        return Err(Error::InvalidInput(format!("r_max = {} must be at least 20", cfg.r_max)));
    }
    if cfg.taylor_order < 4 || cfg.h <= 0.0 {
        return Err(Error::InvalidInput("taylor order must be >= 4 and h > 0".into()));
    }
    let mut h = cfg.h;
    let mut last = None;
    for _ in 0..5 {
        match solve_on_grid(cfg, h) {
            Err(Error::NonConvergence { what, detail }) if detail.starts_with("node residual") => {
                last = Some(Error::NonConvergence { what, detail });
                h *= 0.5;
            }
            other => return other,
        }
    }
    Err(last.unwrap())
}

fn solve_on_grid(cfg: &RadialConfig, h: f64) -> Result<RadialProfile> {
    let p = cfg.p;
    let n = (cfg.r_max / h).round() as usize;
    let h = cfg.r_max / n as f64;
    let mut integ = Integrator::new(p, h, cfg.taylor_order);

    let (mut lo, mut hi) = cfg.bracket;
    if integ.classify(lo, n) != Fate::Upturn || integ.classify(hi, n) != Fate::Crossed {
        return Err(Error::NoBracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match integ.classify(mid, n) {
            Fate::Crossed => hi = mid,
            Fate::Upturn => lo = mid,
            Fate::Survived => {
                lo = mid;
                hi = mid;
                break;
            }
        }
    }
    let mut u0 = 0.5 * (lo + hi);

    // Two-sided polish: match the outward trajectory with the inward tail.
    let n_m = ((6.0f64.min(cfg.r_max / 3.0)) / h).round() as usize;
    let r_m = n_m as f64 * h;
    let (uo, _) = integ.outward(u0, n_m);
    let mut lc = (uo[n_m] * r_m * r_m.exp()).ln();
    let mismatch = |integ: &mut Integrator, u0: f64, lc: f64| -> [f64; 2] {
        let (uo, vo) = integ.outward(u0, n_m);
        let (ui, vi) = integ.inward(lc.exp(), n, n_m);
        let s = ui[0].abs();
        [(uo[n_m] - ui[0]) / s, (vo[n_m] - vi[0]) / s]
    };
    let mut converged = false;
    for _ in 0..30 {
        let f = mismatch(&mut integ, u0, lc);
        if f[0].abs().max(f[1].abs()) < 1e-10 {
            converged = true;
            break;
        }
        let du = 1e-7 * u0;
        let dl = 1e-6;
        let fu = mismatch(&mut integ, u0 + du, lc);
        let fl = mismatch(&mut integ, u0, lc + dl);
        let j = [
            [(fu[0] - f[0]) / du, (fl[0] - f[0]) / dl],
            [(fu[1] - f[1]) / du, (fl[1] - f[1]) / dl],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let x0 = (j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let x1 = (-j[1][0] * f[0] + j[0][0] * f[1]) / det;
        u0 -= x0;
        lc -= x1;
        if x0.abs() < 1e-16 * u0 && x1.abs() < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::nonconv("ground state", "tail matching did not converge"));
    }

    let (mut u, mut du) = integ.outward(u0, n_m);
    let (ui, vi) = integ.inward(lc.exp(), n, n_m);
    u.pop();
    du.pop();
    u.extend_from_slice(&ui);
    du.extend_from_slice(&vi);
    let r: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();

    if u.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::nonconv("ground state", "profile is not positive"));
    }

    let max_residual = node_residuals(p, h, &r, &u, &du).into_iter().fold(0.0, f64::max);
    if max_residual > cfg.res_tol {
        return Err(Error::nonconv(
            "ground state",
            format!("node residual {max_residual:e} exceeds {:e}", cfg.res_tol),
        ));
    }

    let mut prof = RadialProfile {
        p,
        r,
        u,
        du,
        shoot_u0: u0,
        c_decay: 0.0,
        r_max: cfg.r_max,
        res_tol: cfg.res_tol,
        max_residual,
    };
    prof.c_decay = prof.fit_decay_constant(0.6, 0.8);
    Ok(prof)
}

/// Residual of `-u'' - (2/r)u' + u - u^p` at interior nodes, with `u''`
/// obtained by a sixth-order central difference of the stored `u'` (using
/// the odd reflection `u'(-r) = -u'(r)` near the origin).
pub fn node_residuals(p: f64, h: f64, r: &[f64], u: &[f64], du: &[f64]) -> Vec<f64> {
    let n = u.len() - 1;
    let g = |i: isize| -> f64 {
        if i < 0 {
            -du[(-i) as usize]
        } else {
            du[i as usize]
        }
    };
    (1..n)
        .map(|i| {
            let ii = i as isize;
            let upp = if i + 3 <= n {
                (-g(ii - 3) + 9.0 * g(ii - 2) - 45.0 * g(ii - 1) + 45.0 * g(ii + 1) - 9.0 * g(ii + 2)
                    + g(ii + 3))
                    / (60.0 * h)
            } else {
                (3.0 * du[i] - 4.0 * du[i - 1] + du[i - 2]) / (2.0 * h)
            };
            (-upp - 2.0 / r[i] * du[i] + u[i] - u[i].powf(p)).abs()
        })
        .collect()
}

impl RadialProfile {
    pub fn h(&self) -> f64 {
        self.r[1] - self.r[0]
    }

    pub fn u0(&self) -> f64 {
        self.u[0]
    }

    /// Least-squares fit of `c` in `u ≈ c e^{-r}/r` over `[a R, b R]`.
    pub fn fit_decay_constant(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = (a * self.r_max, b * self.r_max);
        let mut s = 0.0;
        let mut cnt = 0usize;
        for (r, u) in self.r.iter().zip(&self.u) {
            if *r >= lo && *r <= hi {
                s += (r * u).ln() + r;
                cnt += 1;
            }
        }
        (s / cnt as f64).exp()
    }

    /// Value and derivative at radius `r` (cubic Hermite between nodes,
    /// analytic tail beyond `r_max`, even extension for `r < 0`).
    pub fn evaluate(&self, r: f64) -> (f64, f64) {
        let sign = if r < 0.0 { -1.0 } else { 1.0 };
        let r = r.abs();
        if r >= self.r_max {
            let u = self.c_decay * (-r).exp() / r;
            return (u, sign * (-u * (1.0 + 1.0 / r)));
        }
        let h = self.h();
        let i = ((r / h) as usize).min(self.r.len() - 2);
        let t = (r - self.r[i]) / h;
        let (y0, y1) = (self.u[i], self.u[i + 1]);
        let (m0, m1) = (self.du[i] * h, self.du[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let u = (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let du = ((6.0 * t2 - 6.0 * t) * y0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (u, sign * du)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.evaluate(r).0
    }

    /// Second derivative from the equation itself.
    pub fn second_derivative(&self, r: f64) -> f64 {
        let r = r.abs();
        let (u, du) = self.evaluate(r);
        if r < 1e-8 {
            return (u - u.powf(self.p)) / 3.0;
        }
        u - u.powf(self.p) - 2.0 / r * du
    }
}

/// `C0` and related integrals of the ground state.
#[derive(Debug, Clone)]
pub struct EnergyCoefficients {
    pub p: f64,
    /// Energy per unit opening angle of a spike on an edge:
    /// `(1/2 - 1/(p+1)) * 2 ∫ U^{p+1} r² dr`.
    pub c0: f64,
    /// Same prefactor with the integrand `U^{p+1} r sin²θ` over `(0,∞)×(0,π)`.
    pub c0_r_sin2: f64,
    /// `4π ∫ U^{p+1} r² dr`
    pub nehari_mass: f64,
    /// Whole-space energy `4π ∫ (½(U'² + U²) - U^{p+1}/(p+1)) r² dr`.
    pub energy_full: f64,
    pub quadrature_error: f64,
}

fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    debug_assert!(n % 2 == 0);
    let mut s = f[0] + f[n];
    for (i, v) in f.iter().enumerate().take(n).skip(1) {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * v;
    }
    s * h / 3.0
}

/// Simpson value on the node grid plus a Richardson error estimate from the
/// grid with every other node removed. Returns `(value, error_estimate)`.
fn simpson_richardson(f: &[f64], h: f64) -> (f64, f64) {
    let n = f.len() - 1;
    let m = n - n % 4;
    let fine = simpson(&f[..=m], h);
    let coarse_pts: Vec<f64> = f[..=m].iter().step_by(2).copied().collect();
    let coarse = simpson(&coarse_pts, 2.0 * h);
    let mut rest = 0.0;
    if m < n {
        // leftover nodes (at most three) with the trapezoid rule; they sit in the
        // far tail where the integrand is negligible
        for i in m..n {
            rest += 0.5 * h * (f[i] + f[i + 1]);
        }
    }
    (fine + rest, (fine - coarse).abs() / 15.0)
}

fn tail_integral<F: Fn(f64) -> f64>(g: F, a: f64) -> f64 {
    let n = 4000;
    let h = 40.0 / n as f64;
    let pts: Vec<f64> = (0..=n).map(|i| g(a + i as f64 * h)).collect();
    simpson(&pts, h)
}

/// Computes `C0`, the Nehari mass and the whole-space energy by Simpson
/// quadrature with analytic-tail completion. `rel_tol` bounds the relative
/// Richardson error estimate.
pub fn energy_coefficients(prof: &RadialProfile, rel_tol: f64) -> Result<EnergyCoefficients> {
    let p = prof.p;
    let h = prof.h();
    let q = p + 1.0;
    let f_mass: Vec<f64> = prof.r.iter().zip(&prof.u).map(|(r, u)| u.powf(q) * r * r).collect();
    let f_rlin: Vec<f64> = prof.r.iter().zip(&prof.u).map(|(r, u)| u.powf(q) * r).collect();
    let f_kin: Vec<f64> = prof
        .r
        .iter()
        .zip(prof.u.iter().zip(&prof.du))
        .map(|(r, (u, du))| 0.5 * (du * du + u * u) * r * r)
        .collect();

    let c = prof.c_decay;
    let tail_u = move |r: f64| c * (-r).exp() / r;
    let (i_mass, e_mass) = simpson_richardson(&f_mass, h);
    let (i_rlin, e_rlin) = simpson_richardson(&f_rlin, h);
    let (i_kin, e_kin) = simpson_richardson(&f_kin, h);
    let rm = prof.r_max;
    let i_mass = i_mass + tail_integral(|r| tail_u(r).powf(q) * r * r, rm);
    let i_rlin = i_rlin + tail_integral(|r| tail_u(r).powf(q) * r, rm);
    let i_kin = i_kin
        + tail_integral(
            |r| {
                let u = tail_u(r);
                let du = -u * (1.0 + 1.0 / r);
                0.5 * (du * du + u * u) * r * r
            },
            rm,
        );

    let rel_err = (e_mass / i_mass).max(e_rlin / i_rlin).max(e_kin / i_kin);
    if !(rel_err <= rel_tol) {
        return Err(Error::QuadratureUnconverged { estimate: rel_err, tol: rel_tol });
    }
    let pref = 0.5 - 1.0 / q;
    Ok(EnergyCoefficients {
        p,
        c0: pref * 2.0 * i_mass,
        c0_r_sin2: pref * (PI / 2.0) * i_rlin,
        nehari_mass: 4.0 * PI * i_mass,
        energy_full: 4.0 * PI * (i_kin - i_mass / q),
        quadrature_error: rel_err,
    })
}
