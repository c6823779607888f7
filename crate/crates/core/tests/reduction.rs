mod common;

use common::*;
use edgespike::reduction::{
    loglog_slope, projected_negative_count, pseudo_criticality_sweep, solve_auxiliary, solve_full, AnsatzKind,
    DiscreteProblem, FullSolveConfig, NEGATIVE_THRESHOLD, ReductionConfig, ReductionContext,
};
use edgespike::wedge::{build_domain, build_spike_ansatz, AlphaFn, WedgeDomain, WindowSpec};
use edgespike::Error;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

fn small_spec() -> WindowSpec {
    WindowSpec { n_rho: 32, n_t: 8, n_s: 65, ..WindowSpec::default() }
}

fn standard_domain() -> WedgeDomain {
    build_domain(AlphaFn::Cos { base: FRAC_PI_2, amp: 0.2, length: 4.0 }, 4.0, 2.0, 9, 9, 9).unwrap()
}

fn small_ctx(dom: &WedgeDomain, p: f64) -> ReductionContext<'_> {
    ReductionContext::new(dom, profile(p), ReductionConfig { window: small_spec(), ..ReductionConfig::default() })
}

/// Deterministic pseudo-random field in [-1, 1].
fn field(n: usize, seed: u64) -> Vec<f64> {
    let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..n)
        .map(|_| {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn zero_field_has_zero_energy() {
    let dom = standard_domain();
    let ctx = small_ctx(&dom, 3.0);
    let prob = ctx.problem(2.0, 0.1).unwrap();
    assert_eq!(prob.energy(&vec![0.0; prob.n()]), 0.0);
}

#[test]
fn energy_along_rays_is_two_term_polynomial() {
    let dom = standard_domain();
    let ctx = small_ctx(&dom, 3.0);
    let prob = ctx.problem(2.0, 0.1).unwrap();
    let z = ctx.ansatz(&prob, 2.0).unwrap();
    // separate quadratures: stiffness + mass for A, mass-weighted power for B
    let kz = prob.stiffness.matvec(&z);
    let a = dot(&z, &kz) + prob.mass.iter().zip(&z).map(|(m, x)| m * x * x).sum::<f64>();
    let b: f64 = prob.mass.iter().zip(&z).map(|(m, x)| m * x.abs().powi(4)).sum();
    for t in [0.1, 0.35, 0.5, 0.8, 0.99] {
        let zt: Vec<f64> = z.iter().map(|x| t * x).collect();
        let want = t * t * a / 2.0 - t.powi(4) * b / 4.0;
        assert!((prob.energy(&zt) - want).abs() < 1e-11 * a, "t = {t}");
    }
}

#[test]
fn gradient_matches_energy_differences() {
    let dom = standard_domain();
    let ctx = small_ctx(&dom, 3.0);
    let prob = ctx.problem(2.0, 0.1).unwrap();
    let z = ctx.ansatz(&prob, 2.0).unwrap();
    let base: Vec<f64> = z.iter().zip(field(prob.n(), 99)).map(|(a, b)| a + 0.05 * b).collect();
    let g = prob.gradient(&base);
    let h = 1e-5;
    for seed in 0..5 {
        let v = field(prob.n(), seed);
        let plus: Vec<f64> = base.iter().zip(&v).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = base.iter().zip(&v).map(|(a, b)| a - h * b).collect();
        let fd = (prob.energy(&plus) - prob.energy(&minus)) / (2.0 * h);
        let an = dot(&g, &v);
        assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "seed {seed}: {fd} vs {an}");
    }
}

#[test]
fn hessian_matches_gradient_differences_and_is_symmetric() {
    let dom = standard_domain();
    let ctx = small_ctx(&dom, 3.0);
    let prob = ctx.problem(2.0, 0.1).unwrap();
    let u = ctx.ansatz(&prob, 2.0).unwrap();
    let hd = prob.hessian_diagonal(&u);
    let n = prob.n();
    let (v, w) = (field(n, 1), field(n, 2));
    let (mut hv, mut hw) = (vec![0.0; n], vec![0.0; n]);
    prob.hessian_apply(&hd, &v, &mut hv);
    prob.hessian_apply(&hd, &w, &mut hw);
    let (a, b) = (dot(&hv, &w), dot(&hw, &v));
    assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    let h = 1e-5;
    let gp = prob.gradient(&u.iter().zip(&v).map(|(a, b)| a + h * b).collect::<Vec<_>>());
    let gm = prob.gradient(&u.iter().zip(&v).map(|(a, b)| a - h * b).collect::<Vec<_>>());
    let fd: Vec<f64> = gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let err: f64 = fd.iter().zip(&hv).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = hv.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(err < 1e-6 * scale);
}

#[test]
fn stiffness_symmetric_and_annihilates_constants() {
    let dom = standard_domain();
    let prob = small_ctx(&dom, 3.0).problem(2.0, 0.1).unwrap();
    assert!(prob.stiffness.is_symmetric(1e-12));
    let k1 = prob.stiffness.matvec(&vec![1.0; prob.n()]);
    let scale = prob.stiffness.diagonal().iter().cloned().fold(0.0, f64::max);
    assert!(k1.iter().all(|x| x.abs() < 1e-10 * scale));
    // lumped mass reproduces the scaled window volume
    let vol: f64 = prob.mass.iter().sum();
    let exact = prob.dom.volume() / prob.eps.powi(3);
    assert!((vol - exact).abs() < 1e-9 * exact);
}

#[test]
fn constant_state_solves_constant_angle_problem() {
    let dom = build_domain(AlphaFn::Constant(1.2), 4.0, 2.0, 9, 9, 9).unwrap();
    let prob = DiscreteProblem::assemble(dom, 0.5, 3.0).unwrap();
    let one = vec![1.0; prob.n()];
    let rep = solve_full(&prob, one, 0.1, &FullSolveConfig::default()).unwrap();
    assert!(rep.converged);
    assert!(rep.solution.iter().all(|x| (x - 1.0).abs() < 1e-12));
}

#[test]
fn weak_start_collapses() {
    let dom = standard_domain();
    let ctx = small_ctx(&dom, 3.0);
    let prob = ctx.problem(2.0, 0.1).unwrap();
    let z: Vec<f64> = ctx.ansatz(&prob, 2.0).unwrap().iter().map(|x| 0.2 * x).collect();
    let res = solve_full(&prob, z, 0.1 * profile(3.0).shoot_u0, &FullSolveConfig::default());
    assert!(matches!(res, Err(Error::CollapseToZero { .. })));
}

#[test]
fn auxiliary_solution_properties() {
    let dom = standard_domain();
    let ctx = small_ctx(&dom, 3.0);
    let s = solve_auxiliary(&ctx, 1.0, 0.1).unwrap();
    assert!(s.orthogonality < 1e-10, "{}", s.orthogonality);
    assert!(s.energy_reduced <= s.energy_ansatz + 1e-12);
    assert!(s.w_norm > 0.0 && s.w_norm < s.residual_norm * 10.0);
    assert_eq!(s.alpha_q, FRAC_PI_2 + 0.2 * (PI / 4.0).cos());
}

#[test]
fn constant_angle_reduced_energy_is_flat() {
    let dom = build_domain(AlphaFn::Constant(1.3), 4.0, 2.0, 9, 9, 9).unwrap();
    let ctx = small_ctx(&dom, 3.0);
    let a = solve_auxiliary(&ctx, 1.5, 0.1).unwrap();
    let b = solve_auxiliary(&ctx, 2.5, 0.1).unwrap();
    assert!((a.energy_reduced - b.energy_reduced).abs() < 1e-9 * a.energy_reduced.abs());
}

#[test]
fn constant_angle_residual_is_cutoff_tail() {
    let dom = build_domain(AlphaFn::Constant(1.3), 4.0, 2.0, 9, 9, 9).unwrap();
    let ctx = small_ctx(&dom, 3.0);
    let sweep = pseudo_criticality_sweep(&ctx, 2.0, &[0.2, 0.1]).unwrap();
    let r: Vec<f64> = sweep.samples.iter().map(|s| s.residual_norm).collect();
    assert!(sweep.residual_slope >= 1.0, "{r:?}");
    // the cutoff tail scales like U(μ/4ε)
    assert!(r[0] < 10.0 * profile(3.0).value(5.0), "{r:?}");
}

#[test]
fn sampled_and_grid_ansatz_agree_in_energy() {
    let dom = standard_domain();
    let grid = small_ctx(&dom, 3.0);
    let sampled = ReductionContext::new(
        &dom,
        profile(3.0),
        ReductionConfig { window: small_spec(), ansatz: AnsatzKind::Sampled, ..ReductionConfig::default() },
    );
    let prob = grid.problem(2.0, 0.05).unwrap();
    let eg = prob.energy(&grid.ansatz(&prob, 2.0).unwrap());
    let es = prob.energy(&sampled.ansatz(&prob, 2.0).unwrap());
    assert!((eg - es).abs() < 0.02 * eg, "{eg} vs {es}");
}

#[test]
fn morse_count_matches_cone_spectrum() {
    let ctx_of = |alpha: f64| {
        let dom = build_domain(AlphaFn::Constant(alpha), 4.0, 2.0, 9, 9, 9).unwrap();
        let ctx = small_ctx(&dom, 3.0);
        let prob = ctx.problem(2.0, 0.1).unwrap();
        let z = ctx.ansatz(&prob, 2.0).unwrap();
        let full = projected_negative_count(&prob, &z, None, 60, NEGATIVE_THRESHOLD).unwrap();
        let t = edgespike::wedge::spike_tangent(&prob.dom, profile(3.0), 2.0, 0.1, 4.0);
        let projected = projected_negative_count(&prob, &z, Some(&t), 60, NEGATIVE_THRESHOLD).unwrap();
        (full, projected)
    };
    assert_eq!(ctx_of(FRAC_PI_2), (1, 1));
    assert_eq!(ctx_of(1.5 * PI), (2, 2));
}

#[test]
fn converged_residual_far_below_ansatz_residual() {
    let dom = standard_domain();
    let ctx = small_ctx(&dom, 3.0);
    let prob = ctx.problem(0.0, 0.1).unwrap();
    let z = build_spike_ansatz(&prob.dom, profile(3.0), 0.0, 0.1, 4.0).unwrap();
    let r0 = prob.dual_norm(&prob.gradient(&z));
    let rep = solve_full(&prob, z, 0.1 * profile(3.0).shoot_u0, &FullSolveConfig::default()).unwrap();
    assert!(rep.converged);
    assert!(rep.residual_norm < 1e-6 * r0);
    assert!((rep.spike_height / profile(3.0).shoot_u0 - 1.0).abs() < 0.2);
    assert!(rep.spike_center.abs() < 2.0 * 0.1);
}

#[test]
fn fit_helpers() {
    let x = [0.2, 0.1, 0.05];
    let y: Vec<f64> = x.iter().map(|e: &f64| 3.0 * e.powf(1.5)).collect();
    assert!((loglog_slope(&x, &y) - 1.5).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn gradient_exact_for_arbitrary_fields(seed in 0u64..1000, amp in 0.1f64..3.0) {
        let dom = build_domain(AlphaFn::Linear { base: 1.0, slope: 0.2 }, 4.0, 2.0, 6, 5, 7).unwrap();
        let prob = DiscreteProblem::assemble(dom, 0.7, 2.5).unwrap();
        let u: Vec<f64> = field(prob.n(), seed).iter().map(|x| amp * x).collect();
        let v = field(prob.n(), seed + 7);
        let h = 1e-5;
        let plus: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - h * b).collect();
        let fd = (prob.energy(&plus) - prob.energy(&minus)) / (2.0 * h);
        let an = dot(&prob.gradient(&u), &v);
        prop_assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0));
    }
}
