//! Wedge domains `Ω = {(s, ρ cos φ, ρ sin φ): 0 < s < L, 0 < ρ < R, 0 < φ < α(s)}`
//! and their structured computational grids.
//!
//! Computational coordinates are `(ρ_c, t, s) ∈ [0,1] × [0,1] × [s_min, s_max]`
//! mapped by `x = (s, ρ_c R cos(t α(s)), ρ_c R sin(t α(s)))`. Nodes on the edge
//! `ρ_c = 0` are collapsed to a single unknown per `s`.

use crate::error::{Error, Result};
use crate::radial::RadialProfile;
use std::f64::consts::PI;

/// Opening angle along the edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaFn {
    Constant(f64),
    /// `base + amp cos(π s / length)`
    Cos { base: f64, amp: f64, length: f64 },
    /// `base + slope s`
    Linear { base: f64, slope: f64 },
}

impl AlphaFn {
    pub fn value(&self, s: f64) -> f64 {
        match *self {
            AlphaFn::Constant(a) => a,
            AlphaFn::Cos { base, amp, length } => base + amp * (PI * s / length).cos(),
            AlphaFn::Linear { base, slope } => base + slope * s,
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match *self {
            AlphaFn::Constant(_) => 0.0,
            AlphaFn::Cos { amp, length, .. } => -amp * PI / length * (PI * s / length).sin(),
            AlphaFn::Linear { slope, .. } => slope,
        }
    }

    pub fn second_derivative(&self, s: f64) -> f64 {
        match *self {
            AlphaFn::Cos { amp, length, .. } => -amp * (PI / length).powi(2) * (PI * s / length).cos(),
            _ => 0.0,
        }
    }

    /// Whether `α` is even about `s = c`, so that a window crossing a cap at
    /// `c` is the mirror image of the domain with Neumann data on the cap.
    fn even_about(&self, c: f64, length: f64) -> bool {
        match *self {
            AlphaFn::Constant(_) => true,
            AlphaFn::Cos { length: l, .. } => {
                let k = c / l;
                (k - k.round()).abs() < 1e-12 && (l - length).abs() < 1e-12
            }
            AlphaFn::Linear { slope, .. } => slope == 0.0,
        }
    }
}

/// Minimum distance of `α(s)` from `0`, `π` and `2π`.
pub const ANGLE_MARGIN: f64 = 0.05;

/// Structured grid of (a window of) a wedge domain.
#[derive(Debug, Clone)]
pub struct WedgeDomain {
    pub alpha: AlphaFn,
    /// Edge length `L` of the physical domain.
    pub length: f64,
    /// Radial extent covered by this grid.
    pub r_sector: f64,
    /// Normalised radial nodes `ρ_c ∈ [0, 1]`.
    pub rho: Vec<f64>,
    pub t: Vec<f64>,
    /// Physical edge-parameter nodes.
    pub s: Vec<f64>,
}

/// Window grid around a spike, in scaled units (lengths divided by `ε`).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    /// Half-length of the window along the edge.
    pub half_width: f64,
    /// Radial extent.
    pub radial_extent: f64,
    pub n_rho: usize,
    pub n_t: usize,
    /// Number of edge nodes; odd counts put a node at the window centre.
    pub n_s: usize,
    /// `sinh` clustering strength towards the centre along the edge (0 = uniform).
    pub s_stretch: f64,
    /// Exponential clustering strength towards the edge in `ρ`.
    pub rho_stretch: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec {
            half_width: 10.0,
            radial_extent: 10.0,
            n_rho: 64,
            n_t: 24,
            n_s: 65,
            s_stretch: 2.5,
            rho_stretch: 3.0,
        }
    }
}

pub fn clustered_rho(n: usize, stretch: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let xi = i as f64 / (n - 1) as f64;
            if stretch == 0.0 {
                xi
            } else {
                ((stretch * xi).exp() - 1.0) / (stretch.exp() - 1.0)
            }
        })
        .collect()
}

/// Nodes on `[c - w, c + w]`, symmetric about `c`, clustered towards `c`.
pub fn clustered_symmetric(c: f64, w: f64, n: usize, stretch: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let x = 2.0 * i as f64 / (n - 1) as f64 - 1.0;
            let y = if stretch == 0.0 { x } else { (stretch * x).sinh() / stretch.sinh() };
            if i == (n - 1) / 2 && n % 2 == 1 {
                c
            } else {
                c + w * y
            }
        })
        .collect()
}

/// Builds the full prism grid on `[0, L]` with edge-clustered radial nodes.
pub fn build_domain(alpha: AlphaFn, length: f64, r_sector: f64, n_rho: usize, n_t: usize, n_s: usize) -> Result<WedgeDomain> {
    if n_rho < 2 || n_t < 2 || n_s < 2 {
        return Err(Error::InvalidInput("grid needs at least two nodes per direction".into()));
    }
    if !(length > 0.0 && r_sector > 0.0) {
        return Err(Error::InvalidInput("length and radius must be positive".into()));
    }
    let s: Vec<f64> = (0..n_s).map(|i| length * i as f64 / (n_s - 1) as f64).collect();
    let dom = WedgeDomain {
        alpha,
        length,
        r_sector,
        rho: clustered_rho(n_rho, 3.0),
        t: (0..n_t).map(|i| i as f64 / (n_t - 1) as f64).collect(),
        s,
    };
    dom.validate()?;
    Ok(dom)
}

/// Metric of the computational coordinates `(ρ_c, t, s)`.
#[derive(Debug, Clone, Copy)]
pub struct Metric {
    pub g: [[f64; 3]; 3],
    pub sqrt_g: f64,
}

impl WedgeDomain {
    fn validate(&self) -> Result<()> {
        for &s in &self.s {
            let a = self.alpha.value(s);
            if !(a > 0.0 && a < 2.0 * PI) {
                return Err(Error::InvalidInput(format!("opening angle {a} at s = {s} outside (0, 2π)")));
            }
            if a < ANGLE_MARGIN || (a - PI).abs() < ANGLE_MARGIN || a > 2.0 * PI - ANGLE_MARGIN {
                return Err(Error::DegenerateAngle { alpha: a, s });
            }
        }
        Ok(())
    }

    /// Grid of a window of half-width `spec.half_width · ε` around `center`.
    /// Windows may extend past the caps `s = 0, L` when `α` is even about them.
    pub fn window(&self, center: f64, eps: f64, spec: &WindowSpec) -> Result<WedgeDomain> {
        if spec.n_rho < 2 || spec.n_t < 2 || spec.n_s < 3 {
            return Err(Error::InvalidInput("window grid too small".into()));
        }
        let w = spec.half_width * eps;
        let (lo, hi) = (center - w, center + w);
        if lo < 0.0 && !self.alpha.even_about(0.0, self.length) {
            return Err(Error::InvalidInput("window crosses the cap s = 0".into()));
        }
        if hi > self.length && !self.alpha.even_about(self.length, self.length) {
            return Err(Error::InvalidInput("window crosses the cap s = L".into()));
        }
        let dom = WedgeDomain {
            alpha: self.alpha,
            length: self.length,
            r_sector: (spec.radial_extent * eps).min(self.r_sector),
            rho: clustered_rho(spec.n_rho, spec.rho_stretch),
            t: (0..spec.n_t).map(|i| i as f64 / (spec.n_t - 1) as f64).collect(),
            s: clustered_symmetric(center, w, spec.n_s, spec.s_stretch),
        };
        dom.validate()?;
        Ok(dom)
    }

    /// Grid on the edge interval `[s_lo, s_hi] ⊂ [0, L]` with uniform edge
    /// spacing and radial extent `spec.radial_extent · ε`.
    pub fn window_range(&self, s_lo: f64, s_hi: f64, eps: f64, spec: &WindowSpec) -> Result<WedgeDomain> {
        if !(s_lo >= 0.0 && s_hi <= self.length && s_hi > s_lo) {
            return Err(Error::InvalidInput(format!("edge interval [{s_lo}, {s_hi}] outside [0, {}]", self.length)));
        }
        if spec.n_rho < 2 || spec.n_t < 2 || spec.n_s < 2 {
            return Err(Error::InvalidInput("window grid too small".into()));
        }
        let dom = WedgeDomain {
            alpha: self.alpha,
            length: self.length,
            r_sector: (spec.radial_extent * eps).min(self.r_sector),
            rho: clustered_rho(spec.n_rho, spec.rho_stretch),
            t: (0..spec.n_t).map(|i| i as f64 / (spec.n_t - 1) as f64).collect(),
            s: (0..spec.n_s).map(|i| s_lo + (s_hi - s_lo) * i as f64 / (spec.n_s - 1) as f64).collect(),
        };
        dom.validate()?;
        Ok(dom)
    }

    pub fn n_rho(&self) -> usize {
        self.rho.len()
    }
    pub fn n_t(&self) -> usize {
        self.t.len()
    }
    pub fn n_s(&self) -> usize {
        self.s.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_s() + (self.n_rho() - 1) * self.n_t() * self.n_s()
    }

    pub fn dof(&self, ir: usize, it: usize, ks: usize) -> usize {
        if ir == 0 {
            ks
        } else {
            self.n_s() + ((ir - 1) * self.n_t() + it) * self.n_s() + ks
        }
    }

    /// `(ρ_c, t, s)` of a degree of freedom (edge unknowns report `t = 0`).
    pub fn dof_coords(&self, dof: usize) -> (f64, f64, f64) {
        let ns = self.n_s();
        if dof < ns {
            return (0.0, 0.0, self.s[dof]);
        }
        let k = dof - ns;
        let ks = k % ns;
        let rest = k / ns;
        let it = rest % self.n_t();
        let ir = rest / self.n_t() + 1;
        (self.rho[ir], self.t[it], self.s[ks])
    }

    /// `α(q)` for an edge point `q ∈ [0, L]`.
    pub fn angle_at(&self, q: f64) -> Result<f64> {
        if !(0.0..=self.length).contains(&q) {
            return Err(Error::InvalidInput(format!("edge parameter {q} outside [0, {}]", self.length)));
        }
        Ok(self.alpha.value(q))
    }

    /// Physical point of computational coordinates.
    pub fn map(&self, rho_c: f64, t: f64, s: f64) -> [f64; 3] {
        let rr = rho_c * self.r_sector;
        let phi = t * self.alpha.value(s);
        [s, rr * phi.cos(), rr * phi.sin()]
    }

    /// Exact pulled-back metric.
    pub fn metric(&self, rho_c: f64, t: f64, s: f64) -> Metric {
        let r = self.r_sector;
        let a = self.alpha.value(s);
        let da = self.alpha.derivative(s);
        let rr2 = rho_c * rho_c * r * r;
        let mut g = [[0.0; 3]; 3];
        g[0][0] = r * r;
        g[1][1] = rr2 * a * a;
        g[1][2] = rr2 * a * t * da;
        g[2][1] = g[1][2];
        g[2][2] = 1.0 + rr2 * t * t * da * da;
        Metric { g, sqrt_g: r * r * rho_c * a }
    }

    /// `√g g^{ij}` in the order `(ρ_c, t, s)`; singular only on the edge itself.
    pub fn weighted_inverse_metric(&self, rho_c: f64, t: f64, s: f64) -> [[f64; 3]; 3] {
        let r = self.r_sector;
        let a = self.alpha.value(s);
        let da = self.alpha.derivative(s);
        let sg = r * r * rho_c * a;
        let rr2 = rho_c * rho_c * r * r;
        let mut w = [[0.0; 3]; 3];
        w[0][0] = sg / (r * r);
        w[1][1] = sg * (1.0 + rr2 * t * t * da * da) / (rr2 * a * a);
        w[1][2] = -sg * t * da / a;
        w[2][1] = w[1][2];
        w[2][2] = sg;
        w
    }

    /// Checks positive definiteness of the metric at every cell centre.
    pub fn check_metric(&self) -> Result<()> {
        for ir in 0..self.n_rho() - 1 {
            for it in 0..self.n_t() - 1 {
                for ks in 0..self.n_s() - 1 {
                    let rho = 0.5 * (self.rho[ir] + self.rho[ir + 1]);
                    let t = 0.5 * (self.t[it] + self.t[it + 1]);
                    let s = 0.5 * (self.s[ks] + self.s[ks + 1]);
                    let g = self.metric(rho, t, s).g;
                    let m1 = g[0][0];
                    let m2 = g[1][1] * g[2][2] - g[1][2] * g[2][1];
                    if !(m1 > 0.0 && g[1][1] > 0.0 && m2 > 0.0) {
                        return Err(Error::DegenerateMetric { rho, t, s });
                    }
                }
            }
        }
        Ok(())
    }

    /// Domain volume by two-point Gauss quadrature of `√g` on every cell.
    pub fn volume(&self) -> f64 {
        let mut v = 0.0;
        for ir in 0..self.n_rho() - 1 {
            for it in 0..self.n_t() - 1 {
                for ks in 0..self.n_s() - 1 {
                    v += gauss_cell(self, ir, it, ks, |rho, t, s| self.metric(rho, t, s).sqrt_g);
                }
            }
        }
        v
    }

    /// Areas of the faces `t = 0`, `t = 1` and `ρ_c = 1`, by midpoint
    /// quadrature on the face cells.
    pub fn face_areas(&self) -> [f64; 3] {
        let r = self.r_sector;
        let mut a = [0.0; 3];
        for ir in 0..self.n_rho() - 1 {
            for ks in 0..self.n_s() - 1 {
                let dr = (self.rho[ir + 1] - self.rho[ir]) * r;
                let ds = self.s[ks + 1] - self.s[ks];
                let rr = 0.5 * (self.rho[ir] + self.rho[ir + 1]) * r;
                let s = 0.5 * (self.s[ks] + self.s[ks + 1]);
                let da = self.alpha.derivative(s);
                a[0] += dr * ds;
                a[1] += (1.0 + rr * rr * da * da).sqrt() * dr * ds;
            }
        }
        for it in 0..self.n_t() - 1 {
            for ks in 0..self.n_s() - 1 {
                let dt = self.t[it + 1] - self.t[it];
                let ds = self.s[ks + 1] - self.s[ks];
                let s = 0.5 * (self.s[ks] + self.s[ks + 1]);
                a[2] += r * self.alpha.value(s) * dt * ds;
            }
        }
        a
    }

    /// Outward unit normal on the face `t = 0` or `t = 1` at `(ρ_c, s)`.
    pub fn face_normal(&self, upper: bool, rho_c: f64, s: f64) -> [f64; 3] {
        let rr = rho_c * self.r_sector;
        if !upper {
            return [0.0, 0.0, -1.0];
        }
        let a = self.alpha.value(s);
        let da = self.alpha.derivative(s);
        let n = [-rr * da, -a.sin(), a.cos()];
        let m = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        [n[0] / m, n[1] / m, n[2] / m]
    }
}

pub const GAUSS2: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

/// Two-point tensor Gauss rule on a computational cell.
pub fn gauss_cell<F: Fn(f64, f64, f64) -> f64>(d: &WedgeDomain, ir: usize, it: usize, ks: usize, f: F) -> f64 {
    let (r0, r1) = (d.rho[ir], d.rho[ir + 1]);
    let (t0, t1) = (d.t[it], d.t[it + 1]);
    let (s0, s1) = (d.s[ks], d.s[ks + 1]);
    let w = (r1 - r0) * (t1 - t0) * (s1 - s0) / 8.0;
    let mut acc = 0.0;
    for a in GAUSS2 {
        for b in GAUSS2 {
            for c in GAUSS2 {
                acc += f(r0 + a * (r1 - r0), t0 + b * (t1 - t0), s0 + c * (s1 - s0));
            }
        }
    }
    acc * w
}

/// Smooth cutoff `φ_μ(d)`: 1 for `d ≤ μ/4`, 0 for `d ≥ μ/2`, quintic `C²` blend between.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    pub mu: f64,
}

impl Cutoff {
    pub fn value(&self, d: f64) -> f64 {
        let a = self.mu / 4.0;
        if d <= a {
            1.0
        } else if d >= 2.0 * a {
            0.0
        } else {
            let x = (d - a) / a;
            1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
        }
    }

    pub fn derivative(&self, d: f64) -> f64 {
        let a = self.mu / 4.0;
        if d <= a || d >= 2.0 * a {
            0.0
        } else {
            let x = (d - a) / a;
            -30.0 * x * x * (1.0 - x) * (1.0 - x) / a
        }
    }

    pub fn second_derivative(&self, d: f64) -> f64 {
        let a = self.mu / 4.0;
        if d <= a || d >= 2.0 * a {
            0.0
        } else {
            let x = (d - a) / a;
            -60.0 * x * (1.0 - x) * (1.0 - 2.0 * x) / (a * a)
        }
    }
}

/// Distance from a grid point to the edge point at `s = q` (independent of `t`).
pub fn edge_distance(dom: &WedgeDomain, rho_c: f64, s: f64, q: f64) -> f64 {
    let rr = rho_c * dom.r_sector;
    ((s - q).powi(2) + rr * rr).sqrt()
}

/// Minimum number of cells per unit scaled length required near the spike centre.
pub const MIN_CELLS_PER_UNIT: f64 = 6.0;

/// Checks that the grid resolves the spike near `q`: the mean spacing of the
/// nodes within one scaled unit of `q`, along the edge and radially, must not
/// exceed `1/6` of a scaled unit.
pub fn check_spike_resolution(dom: &WedgeDomain, q: f64, eps: f64) -> Result<()> {
    let near_s: Vec<f64> = dom.s.iter().copied().filter(|s| (s - q).abs() <= eps).collect();
    let near_r: Vec<f64> = dom.rho.iter().map(|r| r * dom.r_sector).filter(|r| *r <= eps).collect();
    let spacing = |v: &[f64]| -> f64 {
        if v.len() < 2 {
            f64::INFINITY
        } else {
            (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64 / eps
        }
    };
    let hs = spacing(&near_s);
    let hr = spacing(&near_r);
    let limit = (1.0 + 1e-9) / MIN_CELLS_PER_UNIT;
    if hs > limit || hr > limit {
        return Err(Error::SpikeTooCoarse(format!(
            "scaled spacing near the centre is {hs:.3} along the edge and {hr:.3} radially; at most {:.3} allowed",
            1.0 / MIN_CELLS_PER_UNIT
        )));
    }
    Ok(())
}

/// Samples `U(|x - Q|/ε) φ_μ(|x - Q|)` at every degree of freedom.
pub fn build_spike_ansatz(dom: &WedgeDomain, profile: &RadialProfile, q: f64, eps: f64, mu: f64) -> Result<Vec<f64>> {
    let (s_lo, s_hi) = (dom.s[0], dom.s[dom.n_s() - 1]);
    if !(q >= s_lo && q <= s_hi) {
        return Err(Error::InvalidInput(format!("spike centre {q} outside [{s_lo}, {s_hi}]")));
    }
    if !(eps > 0.0 && mu > 0.0) {
        return Err(Error::InvalidInput("eps and mu must be positive".into()));
    }
    if mu / (4.0 * eps) < 5.0 {
        return Err(Error::InvalidInput(format!("eps = {eps} too large for cutoff radius mu = {mu}")));
    }
    check_spike_resolution(dom, q, eps)?;
    let cut = Cutoff { mu };
    Ok((0..dom.n_dofs())
        .map(|k| {
            let (rho, _, s) = dom.dof_coords(k);
            let d = edge_distance(dom, rho, s, q);
            profile.value(d / eps) * cut.value(d)
        })
        .collect())
}

/// Derivative of the ansatz with respect to the scaled centre `Q/ε`.
pub fn spike_tangent(dom: &WedgeDomain, profile: &RadialProfile, q: f64, eps: f64, mu: f64) -> Vec<f64> {
    let cut = Cutoff { mu };
    (0..dom.n_dofs())
        .map(|k| {
            let (rho, _, s) = dom.dof_coords(k);
            let d = edge_distance(dom, rho, s, q);
            if d == 0.0 {
                return 0.0;
            }
            let z = d / eps;
            let (u, du) = profile.evaluate(z);
            // d|x-Q|/dQ = -(s-Q)/d, and dQ = ε d(Q/ε)
            let dd = -(s - q) / d * eps;
            du / eps * dd * cut.value(d) + u * cut.derivative(d) * dd
        })
        .collect()
}

/// Edge curve `γ(x1) = ½ γ'' x1² + ⅙ γ''' x1³` in the normal plane, used for
/// the straightened-coordinate metric expansion.
#[derive(Debug, Clone, Copy, Default)]
pub struct EdgeCurve {
    pub g2: [f64; 2],
    pub g3: [f64; 2],
}

impl EdgeCurve {
    pub fn straight() -> Self {
        EdgeCurve::default()
    }

    /// `(a, b, a', b')`: slope and its derivative of the scaled curve
    /// `γ_ε(y1) = γ(ε y1)/ε`.
    pub fn scaled_slopes(&self, y1: f64, eps: f64) -> (f64, f64, f64, f64) {
        let x = eps * y1;
        let a = self.g2[0] * x + 0.5 * self.g3[0] * x * x;
        let b = self.g2[1] * x + 0.5 * self.g3[1] * x * x;
        let da = eps * (self.g2[0] + self.g3[0] * x);
        let db = eps * (self.g2[1] + self.g3[1] * x);
        (a, b, da, db)
    }

    pub fn scaled_offset(&self, y1: f64, eps: f64) -> (f64, f64) {
        let x = eps * y1;
        let f = |k: usize| (0.5 * self.g2[k] * x * x + self.g3[k] * x * x * x / 6.0) / eps;
        (f(0), f(1))
    }
}

/// Smooth test function with analytic derivatives in `y` coordinates.
pub trait TestFunction {
    fn value(&self, y: [f64; 3]) -> f64;
    fn gradient(&self, y: [f64; 3]) -> [f64; 3];
    fn hessian(&self, y: [f64; 3]) -> [[f64; 3]; 3];
}

/// `exp(-|y - c|² / w²)`
#[derive(Debug, Clone, Copy)]
pub struct GaussianBump {
    pub center: [f64; 3],
    pub width: f64,
}

impl TestFunction for GaussianBump {
    fn value(&self, y: [f64; 3]) -> f64 {
        let r2: f64 = (0..3).map(|i| (y[i] - self.center[i]).powi(2)).sum();
        (-r2 / (self.width * self.width)).exp()
    }
    fn gradient(&self, y: [f64; 3]) -> [f64; 3] {
        let v = self.value(y);
        let w2 = self.width * self.width;
        [0, 1, 2].map(|i| -2.0 * (y[i] - self.center[i]) / w2 * v)
    }
    fn hessian(&self, y: [f64; 3]) -> [[f64; 3]; 3] {
        let v = self.value(y);
        let w2 = self.width * self.width;
        let d = [0, 1, 2].map(|i| y[i] - self.center[i]);
        let mut h = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                h[i][j] = 4.0 * d[i] * d[j] / (w2 * w2) * v - if i == j { 2.0 / w2 * v } else { 0.0 };
            }
        }
        h
    }
}

/// Laplace–Beltrami operator of the straightened metric (`det g = 1`).
pub fn laplace_beltrami(curve: &EdgeCurve, eps: f64, f: &dyn TestFunction, y: [f64; 3]) -> f64 {
    let (a, b, da, db) = curve.scaled_slopes(y[0], eps);
    let g = f.gradient(y);
    let h = f.hessian(y);
    h[0][0] - 2.0 * a * h[0][1] - 2.0 * b * h[0][2] + (1.0 + a * a) * h[1][1] + 2.0 * a * b * h[1][2]
        + (1.0 + b * b) * h[2][2]
        - da * g[1]
        - db * g[2]
}

/// Flat Laplacian plus the first-order curvature correction.
pub fn laplace_first_order(curve: &EdgeCurve, eps: f64, f: &dyn TestFunction, y: [f64; 3]) -> f64 {
    let g = f.gradient(y);
    let h = f.hessian(y);
    let (k2, k3) = (curve.g2[0], curve.g2[1]);
    h[0][0] + h[1][1] + h[2][2] - 2.0 * eps * y[0] * (k2 * h[0][1] + k3 * h[0][2]) - eps * (k2 * g[1] + k3 * g[2])
}

/// Determinant of the straightened metric at `y`.
pub fn straightened_det(curve: &EdgeCurve, eps: f64, y: [f64; 3]) -> f64 {
    let (a, b, _, _) = curve.scaled_slopes(y[0], eps);
    let g = [[1.0 + a * a + b * b, a, b], [a, 1.0, 0.0], [b, 0.0, 1.0]];
    g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
}

#[derive(Debug, Clone, Copy)]
pub struct ExpansionReport {
    /// `max |Δ_g u - (Δu + first-order term)|`
    pub max_discrepancy: f64,
    /// `max |first-order term|`
    pub max_first_order: f64,
    pub max_det_deviation: f64,
}

pub fn metric_expansion_check(curve: &EdgeCurve, eps: f64, f: &dyn TestFunction, points: &[[f64; 3]]) -> ExpansionReport {
    let mut rep = ExpansionReport { max_discrepancy: 0.0, max_first_order: 0.0, max_det_deviation: 0.0 };
    for &y in points {
        let exact = laplace_beltrami(curve, eps, f, y);
        let first = laplace_first_order(curve, eps, f, y);
        let h = f.hessian(y);
        let flat = h[0][0] + h[1][1] + h[2][2];
        rep.max_discrepancy = rep.max_discrepancy.max((exact - first).abs());
        rep.max_first_order = rep.max_first_order.max((first - flat).abs());
        rep.max_det_deviation = rep.max_det_deviation.max((straightened_det(curve, eps, y) - 1.0).abs());
    }
    rep
}
