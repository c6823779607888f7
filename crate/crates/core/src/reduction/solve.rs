use super::discrete::DiscreteProblem;
use super::profile2d::discrete_cone_profile;
use crate::error::{Error, Result};
use crate::linalg::{dot, lanczos, minres};
use crate::radial::{EnergyCoefficients, RadialProfile};
use crate::wedge::{build_spike_ansatz, check_spike_resolution, edge_distance, spike_tangent, Cutoff, WedgeDomain, WindowSpec};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// How the spike ansatz is represented on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnsatzKind {
    /// The continuum profile sampled at the nodes.
    Sampled,
    /// The discrete critical point of the constant-angle problem on the same
    /// grid, so that the pseudo-criticality residual only measures the effect
    /// of the varying opening angle.
    GridConsistent,
}

/// Default cut between negative and near-zero Ritz values.
pub const NEGATIVE_THRESHOLD: f64 = 1e-2;

#[derive(Debug, Clone)]
pub struct ReductionConfig {
    pub window: WindowSpec,
    /// Cutoff radius of the ansatz (physical length).
    pub mu: f64,
    pub ansatz: AnsatzKind,
    /// Newton stops when the projected gradient's dual norm falls below this.
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Floor of the relative tolerance of the inner linear solves.
    pub linear_tol: f64,
    pub max_linear: usize,
    /// Expected number of negative directions of the projected Hessian; checked
    /// with a Lanczos estimate when set.
    pub expected_negative: Option<usize>,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig {
            window: WindowSpec::default(),
            mu: 4.0,
            ansatz: AnsatzKind::GridConsistent,
            newton_tol: 1e-9,
            max_newton: 30,
            linear_tol: 1e-7,
            max_linear: 3000,
            expected_negative: None,
        }
    }
}

/// Everything the reduction needs that does not depend on `(Q, ε)`.
pub struct ReductionContext<'a> {
    pub domain: &'a WedgeDomain,
    pub profile: &'a RadialProfile,
    pub cfg: ReductionConfig,
    cone_profiles: Mutex<HashMap<u64, Arc<Vec<f64>>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionSample {
    pub q: f64,
    pub eps: f64,
    pub alpha_q: f64,
    pub energy_ansatz: f64,
    /// `Ψ_ε(Q) = I_ε(U_{Q,ε} + w)`
    pub energy_reduced: f64,
    /// Dual norm of the energy gradient at the ansatz.
    pub residual_norm: f64,
    pub w_norm: f64,
    /// Relative `G`-inner product of `w` with the tangent direction.
    pub orthogonality: f64,
    pub newton_iterations: usize,
}

impl<'a> ReductionContext<'a> {
    pub fn new(domain: &'a WedgeDomain, profile: &'a RadialProfile, cfg: ReductionConfig) -> Self {
        ReductionContext { domain, profile, cfg, cone_profiles: Mutex::new(HashMap::new()) }
    }

    pub fn problem(&self, q: f64, eps: f64) -> Result<DiscreteProblem> {
        let win = self.domain.window(q, eps, &self.cfg.window)?;
        DiscreteProblem::assemble(win, eps, self.profile.p)
    }

    fn cone_profile(&self, radial_extent: f64) -> Result<Arc<Vec<f64>>> {
        let key = radial_extent.to_bits();
        if let Some(v) = self.cone_profiles.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = Arc::new(discrete_cone_profile(&self.cfg.window, radial_extent, self.profile, 1e-13)?);
        self.cone_profiles.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }

    /// The spike ansatz centred at `q` on the window grid of `prob`.
    pub fn ansatz(&self, prob: &DiscreteProblem, q: f64) -> Result<Vec<f64>> {
        let eps = prob.eps;
        match self.cfg.ansatz {
            AnsatzKind::Sampled => build_spike_ansatz(&prob.dom, self.profile, q, eps, self.cfg.mu),
            AnsatzKind::GridConsistent => {
                check_spike_resolution(&prob.dom, q, eps)?;
                let u2 = self.cone_profile(prob.dom.r_sector / eps)?;
                let ns = prob.dom.n_s();
                let cut = Cutoff { mu: self.cfg.mu };
                Ok((0..prob.n())
                    .map(|k| {
                        let (ir, ks) = if k < ns { (0, k) } else { ((k - ns) / (ns * prob.dom.n_t()) + 1, (k - ns) % ns) };
                        let (rho, _, s) = prob.dom.dof_coords(k);
                        u2[ir * ns + ks] * cut.value(edge_distance(&prob.dom, rho, s, q))
                    })
                    .collect())
            }
        }
    }
}

struct Projector {
    t: Vec<f64>,
    gt: Vec<f64>,
    tgt: f64,
}

impl Projector {
    fn new(prob: &DiscreteProblem, t: Vec<f64>) -> Self {
        let mut gt = vec![0.0; t.len()];
        prob.gram_apply(&t, &mut gt);
        let tgt = dot(&t, &gt);
        Projector { t, gt, tgt }
    }

    /// `P y = y - t (tᵀ G y) / (tᵀ G t)`: `G`-orthogonal projection onto `t^⊥`.
    fn apply(&self, y: &mut [f64]) {
        let c = dot(&self.gt, y) / self.tgt;
        for (yi, ti) in y.iter_mut().zip(&self.t) {
            *yi -= c * ti;
        }
    }

    /// `Pᵀ f = f - G t (tᵀ f) / (tᵀ G t)`
    fn apply_transpose(&self, f: &mut [f64]) {
        let c = dot(&self.t, f) / self.tgt;
        for (fi, gi) in f.iter_mut().zip(&self.gt) {
            *fi -= c * gi;
        }
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Result of the projected Newton iteration on a fixed grid.
#[derive(Debug, Clone)]
pub struct AuxiliarySolution {
    pub w: Vec<f64>,
    pub iterations: usize,
    /// `c` in `∇I(z + w) = c G t`: the tangential part of the remaining gradient.
    pub multiplier: f64,
    /// `|tᵀ G w| / (‖t‖_G ‖w‖_G)`
    pub orthogonality: f64,
}

/// Projected Newton iteration for `Pᵀ ∇I(z + w) = 0` with `w` in the
/// `G`-orthogonal complement of `t`.
pub fn solve_projected(prob: &DiscreteProblem, z: &[f64], t: Vec<f64>, cfg: &ReductionConfig) -> Result<AuxiliarySolution> {
    let proj = Projector::new(prob, t);
    let n = prob.n();
    let mut w = vec![0.0; n];
    let projected_residual = |w: &[f64]| -> f64 {
        let mut g = prob.gradient(&add(z, w));
        proj.apply_transpose(&mut g);
        prob.dual_norm_tol(&g, 1e-5)
    };
    let mut res = projected_residual(&w);
    let mut iters = 0;
    while res > cfg.newton_tol {
        if iters >= cfg.max_newton {
            return Err(Error::nonconv("auxiliary equation", format!("projected residual {res:e} after {iters} steps")));
        }
        iters += 1;
        let u = add(z, &w);
        let hd = prob.hessian_diagonal(&u);
        let mut rhs = prob.gradient(&u);
        proj.apply_transpose(&mut rhs);
        rhs.iter_mut().for_each(|x| *x = -*x);
        let op = |y: &[f64], out: &mut [f64]| {
            let mut py = y.to_vec();
            proj.apply(&mut py);
            prob.hessian_apply(&hd, &py, out);
            proj.apply_transpose(out);
        };
        let eta = (0.1 * res).clamp(cfg.linear_tol, 1e-4);
        let (mut d, _) = minres(op, |r, zz| prob.precondition(r, zz), &rhs, eta, cfg.max_linear);
        proj.apply(&mut d);
        let mut lam = 1.0;
        loop {
            let trial: Vec<f64> = w.iter().zip(&d).map(|(a, b)| a + lam * b).collect();
            let r = projected_residual(&trial);
            if r < res || lam < 1e-6 {
                w = trial;
                res = r;
                break;
            }
            lam *= 0.5;
        }
    }
    proj.apply(&mut w);
    let u = add(z, &w);
    if let Some(expected) = cfg.expected_negative {
        let found = projected_negative_count(prob, &u, Some(&proj.t), 80, NEGATIVE_THRESHOLD)?;
        if found != expected {
            return Err(Error::IndefiniteProjectedHessian { found, expected });
        }
    }
    let g = prob.gradient(&u);
    let multiplier = dot(&proj.t, &g) / proj.tgt;
    let mut gw = vec![0.0; n];
    prob.gram_apply(&w, &mut gw);
    let wn = dot(&w, &gw).max(0.0).sqrt();
    let orthogonality = if wn == 0.0 { 0.0 } else { dot(&proj.t, &gw).abs() / (proj.tgt.sqrt() * wn) };
    Ok(AuxiliarySolution { w, iterations: iters, multiplier, orthogonality })
}

/// Solves the auxiliary equation `P ∇I_ε(U_{Q,ε} + w) = 0`, `w ⊥ ∂_Q U_{Q,ε}`,
/// on the window around `q` and returns the reduced energy.
pub fn solve_auxiliary(ctx: &ReductionContext, q: f64, eps: f64) -> Result<ReductionSample> {
    let prob = ctx.problem(q, eps)?;
    let z = ctx.ansatz(&prob, q)?;
    let t = spike_tangent(&prob.dom, ctx.profile, q, eps, ctx.cfg.mu);
    let residual_norm = prob.dual_norm(&prob.gradient(&z));
    let energy_ansatz = prob.energy(&z);
    let aux = solve_projected(&prob, &z, t, &ctx.cfg)?;
    let u = add(&z, &aux.w);
    Ok(ReductionSample {
        q,
        eps,
        alpha_q: ctx.domain.alpha.value(q),
        energy_ansatz,
        energy_reduced: prob.energy(&u),
        residual_norm,
        w_norm: prob.gram_norm(&aux.w),
        orthogonality: aux.orthogonality,
        newton_iterations: aux.iterations,
    })
}

/// Number of eigenvalues below `-threshold` of the Hessian at `u` relative to
/// the Gram matrix, optionally restricted to the `G`-orthogonal complement of
/// `t`, estimated from converged Lanczos Ritz values. The threshold separates
/// genuine negative directions from the lattice-perturbed translation mode.
pub fn projected_negative_count(
    prob: &DiscreteProblem,
    u: &[f64],
    t: Option<&[f64]>,
    steps: usize,
    threshold: f64,
) -> Result<usize> {
    let hd = prob.hessian_diagonal(u);
    let proj = t.map(|t| Projector::new(prob, t.to_vec()));
    let n = prob.n();
    let start: Vec<f64> = (0..n).map(|i| u[i].abs() + 1e-3 * ((i * 2654435761) % 1000) as f64 / 1000.0).collect();
    let ritz = lanczos::ritz_values(
        |v| {
            let mut out = vec![0.0; n];
            prob.hessian_apply(&hd, v, &mut out);
            out
        },
        |f| prob.gram_solve(f),
        |v| {
            let mut out = vec![0.0; n];
            prob.gram_apply(v, &mut out);
            out
        },
        |v| {
            if let Some(p) = &proj {
                p.apply(v);
            }
        },
        &start,
        steps,
    );
    Ok(ritz.iter().filter(|(lam, res)| *lam < -threshold && *res < 1e-3).count())
}

/// Log-log least-squares slope of `y` against `x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    linear_fit(&lx, &ly).0
}

/// `(slope, intercept, r_squared)` of the least-squares line `y = a x + b`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (a, b, r2)
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub samples: Vec<ReductionSample>,
    pub residual_slope: f64,
    /// Present when the auxiliary equation was solved for every sample.
    pub w_slope: Option<f64>,
    /// Slope of `|Ψ_ε(Q) - I_ε(U_{Q,ε})|`.
    pub energy_gap_slope: Option<f64>,
}

/// Residual of the ansatz at fixed `Q` for several `ε`.
pub fn pseudo_criticality_sweep(ctx: &ReductionContext, q: f64, eps_list: &[f64]) -> Result<SweepResult> {
    let mut samples = Vec::new();
    for &eps in eps_list {
        let prob = ctx.problem(q, eps)?;
        let z = ctx.ansatz(&prob, q)?;
        let energy = prob.energy(&z);
        samples.push(ReductionSample {
            q,
            eps,
            alpha_q: ctx.domain.alpha.value(q),
            energy_ansatz: energy,
            energy_reduced: energy,
            residual_norm: prob.dual_norm(&prob.gradient(&z)),
            w_norm: 0.0,
            orthogonality: 0.0,
            newton_iterations: 0,
        });
    }
    let e: Vec<f64> = samples.iter().map(|s| s.eps).collect();
    let r: Vec<f64> = samples.iter().map(|s| s.residual_norm).collect();
    Ok(SweepResult { residual_slope: loglog_slope(&e, &r), samples, w_slope: None, energy_gap_slope: None })
}

/// Full auxiliary solves at fixed `Q` for several `ε`, with convergence slopes.
pub fn reduction_sweep(ctx: &ReductionContext, q: f64, eps_list: &[f64]) -> Result<SweepResult> {
    let samples: Vec<ReductionSample> = eps_list.iter().map(|&e| solve_auxiliary(ctx, q, e)).collect::<Result<_>>()?;
    let e: Vec<f64> = samples.iter().map(|s| s.eps).collect();
    let r: Vec<f64> = samples.iter().map(|s| s.residual_norm).collect();
    let w: Vec<f64> = samples.iter().map(|s| s.w_norm).collect();
    let g: Vec<f64> = samples.iter().map(|s| s.energy_reduced - s.energy_ansatz).collect();
    Ok(SweepResult {
        residual_slope: loglog_slope(&e, &r),
        w_slope: Some(loglog_slope(&e, &w)),
        energy_gap_slope: Some(loglog_slope(&e, &g)),
        samples,
    })
}

/// `Ψ_ε(Q)` at each `Q`, sorted by `Q`.
pub fn reduced_energy_profile(ctx: &ReductionContext, eps: f64, qs: &[f64]) -> Result<Vec<ReductionSample>> {
    let mut qs = qs.to_vec();
    qs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    qs.iter().map(|&q| solve_auxiliary(ctx, q, eps)).collect()
}

#[derive(Debug, Clone)]
pub struct EnergyRegression {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `max |Ψ_ε(Q) - C0 α(Q)|`
    pub max_deviation: f64,
}

/// Regression of `Ψ_ε(Q)` against `C0 α(Q)`.
pub fn energy_regression(samples: &[ReductionSample], coeffs: &EnergyCoefficients) -> EnergyRegression {
    let x: Vec<f64> = samples.iter().map(|s| coeffs.c0 * s.alpha_q).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.energy_reduced).collect();
    let (slope, intercept, r_squared) = linear_fit(&x, &y);
    let max_deviation = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    EnergyRegression { slope, intercept, r_squared, max_deviation }
}

#[derive(Debug, Clone)]
pub struct FullSolveConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub linear_tol: f64,
    pub max_linear: usize,
}

impl Default for FullSolveConfig {
    fn default() -> Self {
        FullSolveConfig { tol: 1e-8, max_iter: 60, linear_tol: 1e-8, max_linear: 20_000 }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual_norm: f64,
    pub energy: f64,
    /// `u^{p+1}`-weighted centroid along the edge.
    pub spike_center: f64,
    pub spike_height: f64,
    pub solution: Vec<f64>,
}

/// `u^{p+1}`-mass centroid of a field along the edge parameter.
pub fn spike_centroid(prob: &DiscreteProblem, u: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, (&m, &x)) in prob.mass.iter().zip(u).enumerate() {
        let w = m * x.abs().powf(prob.p + 1.0);
        num += w * prob.dom.dof_coords(k).2;
        den += w;
    }
    num / den
}

/// Damped Newton iteration for `∇I_ε(u) = 0` from `u0`, with backtracking on
/// the dual norm of the gradient.
pub fn solve_full(prob: &DiscreteProblem, u0: Vec<f64>, collapse_level: f64, cfg: &FullSolveConfig) -> Result<SolveReport> {
    let mut u = u0;
    let mut res = prob.dual_norm(&prob.gradient(&u));
    let mut iters = 0;
    while res > cfg.tol && iters < cfg.max_iter {
        iters += 1;
        let hd = prob.hessian_diagonal(&u);
        let rhs: Vec<f64> = prob.gradient(&u).iter().map(|x| -x).collect();
        let (d, _) = minres(
            |y: &[f64], out: &mut [f64]| prob.hessian_apply(&hd, y, out),
            |r, z| prob.precondition(r, z),
            &rhs,
            cfg.linear_tol,
            cfg.max_linear,
        );
        let mut lam = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + lam * b).collect();
            let r = prob.dual_norm(&prob.gradient(&trial));
            if r < res || lam < 1e-9 {
                u = trial;
                res = r;
                break;
            }
            lam *= 0.5;
        }
        let max = DiscreteProblem::max_value(&u);
        if max < collapse_level {
            return Err(Error::CollapseToZero { max });
        }
    }
    Ok(SolveReport {
        converged: res <= cfg.tol,
        iterations: iters,
        residual_norm: res,
        energy: prob.energy(&u),
        spike_center: spike_centroid(prob, &u),
        spike_height: DiscreteProblem::max_value(&u),
        solution: u,
    })
}

#[derive(Debug, Clone)]
pub struct SpikeSolveConfig {
    pub reduction: ReductionConfig,
    pub newton: FullSolveConfig,
    /// Stop the search along the edge once the centre moves less than this (scaled units).
    pub q_tol: f64,
    pub max_q_steps: usize,
}

impl Default for SpikeSolveConfig {
    fn default() -> Self {
        let mut reduction = ReductionConfig::default();
        reduction.ansatz = AnsatzKind::Sampled;
        reduction.newton_tol = 1e-7;
        SpikeSolveConfig { reduction, newton: FullSolveConfig::default(), q_tol: 0.02, max_q_steps: 20 }
    }
}

#[derive(Debug, Clone)]
pub struct SpikeSolveReport {
    pub q_start: f64,
    /// Spike positions visited by the search along the edge.
    pub q_path: Vec<f64>,
    pub full: SolveReport,
}

/// Finds a spike solution on a fixed grid starting from the ansatz at `q0`.
///
/// The position is located first by a secant iteration on the tangential
/// multiplier of the auxiliary solution (the reduced equation `Ψ'_ε(Q) = 0`),
/// clamped to the grid's edge interval; the resulting field is then polished
/// by damped Newton iteration on the full equation.
pub fn solve_spike(prob: &DiscreteProblem, profile: &RadialProfile, q0: f64, cfg: &SpikeSolveConfig) -> Result<SpikeSolveReport> {
    let eps = prob.eps;
    let mu = cfg.reduction.mu;
    let (s_lo, s_hi) = (prob.dom.s[0], prob.dom.s[prob.dom.n_s() - 1]);
    let eval = |q: f64| -> Result<(f64, Vec<f64>)> {
        let z = build_spike_ansatz(&prob.dom, profile, q, eps, mu)?;
        let t = spike_tangent(&prob.dom, profile, q, eps, mu);
        let aux = solve_projected(prob, &z, t, &cfg.reduction)?;
        Ok((aux.multiplier, add(&z, &aux.w)))
    };
    let mut q_path = vec![q0];
    let (mut c_prev, mut u) = eval(q0)?;
    let mut q_prev = q0;
    let step0 = 0.25 * eps;
    // probe in the direction that lowers |c| under a unit-slope guess
    let mut q = (q0 - step0 * c_prev.signum()).clamp(s_lo, s_hi);
    for _ in 0..cfg.max_q_steps {
        if (q - q_prev).abs() < cfg.q_tol * eps {
            break;
        }
        // retreat towards the last good position while the auxiliary solve fails
        let mut attempt = eval(q);
        for _ in 0..3 {
            match attempt {
                Err(Error::NonConvergence { .. }) => {
                    q = 0.5 * (q + q_prev);
                    attempt = eval(q);
                }
                _ => break,
            }
        }
        let (c, uq) = attempt?;
        q_path.push(q);
        u = uq;
        let slope = (c - c_prev) / (q - q_prev);
        let next = if slope != 0.0 && slope.is_finite() { q - c / slope } else { q };
        // limit each move to a few scaled units
        let next = next.clamp(q - 4.0 * eps, q + 4.0 * eps).clamp(s_lo, s_hi);
        q_prev = q;
        c_prev = c;
        q = next;
    }
    let full = solve_full(prob, u, 0.1 * profile.u0(), &cfg.newton)?;
    Ok(SpikeSolveReport { q_start: q0, q_path, full })
}
