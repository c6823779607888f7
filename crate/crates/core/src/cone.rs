//! Spectrum of the linearized operator `-Δ + 1 - p U^{p-1}` on an infinite
//! cone `K_α = ℝ × {(ρ, φ): 0 < φ < α}` with Neumann conditions on the faces.
//!
//! Separation in spherical coordinates about the edge point gives angular
//! modes `cos(νφ) Θ(θ)` with `ν = πm/α`, where `Θ` solves the associated
//! Legendre problem with eigenvalue `λ_ang = (ν+j)(ν+j+1)`. The radial part is
//! the generalized problem `p U^{p-1} y = κ (-y'' + (1 + λ_ang/r²) y)` for
//! `y = r v`, and `σ = 1 - κ` is the eigenvalue of the linearized operator
//! measured against the `W^{1,2}` inner product.

use crate::error::{Error, Result};
use crate::linalg::tridiag::{negative_pivots, solve_tridiag, SymTridiag};
use crate::radial::RadialProfile;
use std::f64::consts::PI;

/// `ν = πm/α`
pub fn nu(alpha: f64, m: usize) -> f64 {
    PI * m as f64 / alpha
}

/// `(ν+j)(ν+j+1)`
pub fn closed_form_angular(alpha: f64, m: usize, j: usize) -> f64 {
    let x = nu(alpha, m) + j as f64;
    x * (x + 1.0)
}

#[derive(Debug, Clone)]
pub struct AngularSpectrum {
    pub alpha: f64,
    pub m: usize,
    pub nu: f64,
    /// Extrapolated eigenvalues `λ_0 < λ_1 < ...`.
    pub eigenvalues: Vec<f64>,
    /// Polar angle samples (cell centres of the finer grid).
    pub theta: Vec<f64>,
    /// `Θ_j(θ)` normalised by `∫ Θ² sin θ dθ = 1`.
    pub modes: Vec<Vec<f64>>,
}

/// Finite-volume discretisation of `-(w W')' = μ w W` on `(0, π)` with
/// `w = sin^{2ν+1} θ`; then `λ = μ + ν(ν+1)` and `Θ = sin^ν θ · W`.
fn angular_level(nu: f64, count: usize, n: usize) -> (Vec<f64>, SymTridiag, Vec<f64>) {
    let h = PI / n as f64;
    let pw = 2.0 * nu + 1.0;
    let w = |th: f64| th.sin().max(0.0).powf(pw);
    let theta: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let face: Vec<f64> = (0..=n).map(|i| w(i as f64 * h)).collect();
    // cell-averaged weight by three-point Gauss on each cell
    let gx = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let gw = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    let mass: Vec<f64> = theta
        .iter()
        .map(|&c| (0..3).map(|q| gw[q] * w(c + 0.5 * h * gx[q])).sum::<f64>())
        .collect();
    let inv_sqrt: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let d: Vec<f64> = (0..n)
        .map(|i| (face[i] + face[i + 1]) / (h * h) * inv_sqrt[i] * inv_sqrt[i])
        .collect();
    let e: Vec<f64> = (0..n - 1)
        .map(|i| -face[i + 1] / (h * h) * inv_sqrt[i] * inv_sqrt[i + 1])
        .collect();
    let t = SymTridiag::new(d, e);
    let shift = nu * (nu + 1.0);
    let eig: Vec<f64> = t.eigenvalues(count).into_iter().map(|mu| mu + shift).collect();
    (eig, t, inv_sqrt)
}

/// Angular eigenvalues for azimuthal index `m`, indices `j = 0..=j_max`, on
/// grids of `n_theta` and `2 n_theta` cells with Richardson extrapolation.
pub fn angular_eigenvalues(alpha: f64, m: usize, j_max: usize, n_theta: usize) -> Result<AngularSpectrum> {
    if !(alpha > 0.0 && alpha < 2.0 * PI) {
        return Err(Error::InvalidInput(format!("opening angle {alpha} outside (0, 2π)")));
    }
    if n_theta < 64 {
        return Err(Error::InvalidInput("n_theta must be at least 64".into()));
    }
    let v = nu(alpha, m);
    let count = j_max + 1;
    let (coarse, _, _) = angular_level(v, count, n_theta);
    let (fine, t, inv_sqrt) = angular_level(v, count, 2 * n_theta);
    let mut eigenvalues = Vec::with_capacity(count);
    for j in 0..count {
        let change = (fine[j] - coarse[j]).abs();
        if change > 1e-3 * (1.0 + fine[j].abs()) {
            return Err(Error::GridTooCoarse { index: j, change });
        }
        eigenvalues.push((4.0 * fine[j] - coarse[j]) / 3.0);
    }
    let n = 2 * n_theta;
    let h = PI / n as f64;
    let theta: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let shift = v * (v + 1.0);
    let modes = (0..count)
        .map(|j| {
            let c = t.eigenvector(fine[j] - shift);
            let mut th: Vec<f64> =
                (0..n).map(|i| c[i] * inv_sqrt[i] * theta[i].sin().powf(v)).collect();
            let nrm: f64 = th.iter().zip(&theta).map(|(x, a)| x * x * a.sin() * h).sum::<f64>().sqrt();
            let sgn = if th[0] < 0.0 { -1.0 } else { 1.0 };
            th.iter_mut().for_each(|x| *x *= sgn / nrm);
            th
        })
        .collect();
    Ok(AngularSpectrum { alpha, m, nu: v, eigenvalues, theta, modes })
}

#[derive(Debug, Clone)]
pub struct RadialSpectrumConfig {
    /// Coarse grid spacing; a second grid at half the spacing is used for extrapolation.
    pub h: f64,
    /// Outer Dirichlet radius; defaults to the profile's `r_max`.
    pub r_max: Option<f64>,
    /// Fraction of the eigenfunction's squared mass allowed in the outer 10% of the interval.
    pub spurious_mass: f64,
}

impl Default for RadialSpectrumConfig {
    fn default() -> Self {
        RadialSpectrumConfig { h: 0.01, r_max: None, spurious_mass: 1e-2 }
    }
}

#[derive(Debug, Clone)]
pub struct RadialSpectrum {
    pub lambda_ang: f64,
    /// Extrapolated eigenvalues, ascending.
    pub sigma: Vec<f64>,
    /// Grid of the finer level (interior nodes).
    pub r: Vec<f64>,
    /// `v_k(r)` on the finer grid, normalised to unit `W^{1,2}` norm of the
    /// full mode (angular gradient included through `λ_ang/r²`).
    pub modes: Vec<Vec<f64>>,
}

struct RadialPencil {
    a_diag: Vec<f64>,
    a_off: f64,
    mass: Vec<f64>,
    r: Vec<f64>,
    h: f64,
}

impl RadialPencil {
    fn new(profile: &RadialProfile, lambda: f64, h: f64, r_max: f64) -> Self {
        let n = (r_max / h).round() as usize;
        let h = r_max / n as f64;
        let r: Vec<f64> = (1..n).map(|i| i as f64 * h).collect();
        let p = profile.p;
        let a_diag = r.iter().map(|&x| 2.0 / (h * h) + 1.0 + lambda / (x * x)).collect();
        let mass = r.iter().map(|&x| p * profile.value(x).powf(p - 1.0)).collect();
        RadialPencil { a_diag, a_off: -1.0 / (h * h), mass, r, h }
    }

    /// Number of generalized eigenvalues `κ` with `M y = κ A y` strictly above `kappa`.
    fn count_above(&self, kappa: f64) -> usize {
        let d: Vec<f64> = self.a_diag.iter().zip(&self.mass).map(|(a, m)| kappa * a - m).collect();
        let e = vec![kappa * self.a_off; d.len() - 1];
        negative_pivots(&d, &e, 0.0)
    }

    /// `k`-th largest `κ`.
    fn kappa(&self, k: usize) -> f64 {
        let mut lo = 0.0;
        let mut hi = self.mass.iter().cloned().fold(0.0, f64::max) * 1.01 + 1e-12;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_above(mid) > k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn apply_a(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut v = self.a_diag[i] * x[i];
                if i > 0 {
                    v += self.a_off * x[i - 1];
                }
                if i + 1 < n {
                    v += self.a_off * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// `y` with `h yᵀ A y = 1` by inverse iteration.
    fn eigenvector(&self, kappa: f64) -> Vec<f64> {
        let n = self.r.len();
        let shift = kappa * (1.0 + 1e-12);
        let d: Vec<f64> = self.mass.iter().zip(&self.a_diag).map(|(m, a)| m - shift * a).collect();
        let off = vec![-shift * self.a_off; n - 1];
        let mut y: Vec<f64> = self.r.iter().map(|&x| x * (-x).exp()).collect();
        for _ in 0..5 {
            let ay = self.apply_a(&y);
            y = solve_tridiag(&off, &d, &off, &ay);
            let nrm = (self.h * crate::linalg::dot(&y, &self.apply_a(&y))).sqrt();
            y.iter_mut().for_each(|v| *v /= nrm);
        }
        let imax = y
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        if y[imax] < 0.0 {
            y.iter_mut().for_each(|v| *v = -*v);
        }
        y
    }
}

/// Lowest `n_eig` eigenvalues `σ` of `-v'' - (2/r)v' + (1 + λ/r²)v - pU^{p-1}v`
/// in the sense of the `W^{1,2}`-normalised quotient, with `y = r v` vanishing
/// at both ends of `(0, R)`.
pub fn radial_linearized_spectrum(
    profile: &RadialProfile,
    lambda_ang: f64,
    n_eig: usize,
    cfg: &RadialSpectrumConfig,
) -> Result<RadialSpectrum> {
    if lambda_ang < -1e-6 {
        return Err(Error::InvalidInput(format!("angular eigenvalue {lambda_ang} is negative")));
    }
    let lambda_ang = lambda_ang.max(0.0);
    let r_max = cfg.r_max.unwrap_or(profile.r_max);
    let coarse = RadialPencil::new(profile, lambda_ang, cfg.h, r_max);
    let fine = RadialPencil::new(profile, lambda_ang, 0.5 * cfg.h, r_max);
    let mut sigma = Vec::with_capacity(n_eig);
    let mut modes = Vec::with_capacity(n_eig);
    let n = fine.r.len();
    let tail_start = n - n / 10;
    for k in 0..n_eig {
        let kc = coarse.kappa(k);
        let kf = fine.kappa(k);
        let y = fine.eigenvector(kf);
        let total: f64 = y.iter().map(|v| v * v).sum();
        let tail: f64 = y[tail_start..].iter().map(|v| v * v).sum();
        let fraction = tail / total;
        if fraction > cfg.spurious_mass {
            return Err(Error::SpuriousMode { index: k, fraction });
        }
        sigma.push(1.0 - (4.0 * kf - kc) / 3.0);
        modes.push(y.iter().zip(&fine.r).map(|(y, r)| y / r).collect());
    }
    Ok(RadialSpectrum { lambda_ang, sigma, r: fine.r.clone(), modes })
}

#[derive(Debug, Clone)]
pub struct ConeSpectrumConfig {
    pub m_max: usize,
    pub j_max: usize,
    /// Radial eigenvalues per angular eigenvalue.
    pub n_eig: usize,
    pub n_theta: usize,
    pub kernel_tol: f64,
    pub radial: RadialSpectrumConfig,
}

impl Default for ConeSpectrumConfig {
    fn default() -> Self {
        ConeSpectrumConfig {
            m_max: 3,
            j_max: 3,
            n_eig: 2,
            n_theta: 2000,
            kernel_tol: 1e-4,
            radial: RadialSpectrumConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeMode {
    pub m: usize,
    pub j: usize,
    /// Radial overtone index.
    pub n: usize,
    pub lambda_ang: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct ConeSpectrumReport {
    pub alpha: f64,
    pub p: f64,
    pub kernel_tol: f64,
    pub modes: Vec<ConeMode>,
    pub morse_index: usize,
    pub kernel_dim: usize,
    /// Smallest eigenvalue above `kernel_tol`.
    pub spectral_gap: f64,
}

pub fn assemble_cone_spectrum(profile: &RadialProfile, alpha: f64, cfg: &ConeSpectrumConfig) -> Result<ConeSpectrumReport> {
    let mut modes = Vec::new();
    for m in 0..=cfg.m_max {
        let ang = angular_eigenvalues(alpha, m, cfg.j_max, cfg.n_theta)?;
        for (j, &lam) in ang.eigenvalues.iter().enumerate() {
            let rad = radial_linearized_spectrum(profile, lam, cfg.n_eig, &cfg.radial)?;
            for (n, &sigma) in rad.sigma.iter().enumerate() {
                modes.push(ConeMode { m, j, n, lambda_ang: lam, sigma });
            }
        }
    }
    let tol = cfg.kernel_tol;
    let morse_index = modes.iter().filter(|x| x.sigma < -tol).count();
    let kernel_dim = modes.iter().filter(|x| x.sigma.abs() <= tol).count();
    let spectral_gap = modes.iter().map(|x| x.sigma).filter(|&s| s > tol).fold(f64::INFINITY, f64::min);
    Ok(ConeSpectrumReport { alpha, p: profile.p, kernel_tol: tol, modes, morse_index, kernel_dim, spectral_gap })
}

/// Coercivity constant on the complement of the negative and null directions.
pub fn coercivity_constant(report: &ConeSpectrumReport) -> Result<f64> {
    if (report.alpha - PI).abs() < report.kernel_tol {
        return Err(Error::DegenerateCase { alpha: report.alpha, tol: report.kernel_tol });
    }
    Ok(report.spectral_gap)
}
