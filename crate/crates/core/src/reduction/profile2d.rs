use super::discrete::DiscreteProblem;
use crate::error::{Error, Result};
use crate::linalg::{minres, norm2};
use crate::radial::RadialProfile;
use crate::wedge::{clustered_rho, clustered_symmetric, AlphaFn, WedgeDomain, WindowSpec};

/// Critical point of the discrete energy on a constant-angle window among
/// fields that do not depend on the angular coordinate `t`.
///
/// For constant `α` the energy of a `t`-independent field is `α` times an
/// axisymmetric energy in `(ρ, s)`, so the result does not depend on `α`, on
/// the number of angular nodes, or (in scaled units) on `ε` and the centre.
/// Values are indexed `ir * n_s + ks` and centred in the window.
pub fn discrete_cone_profile(spec: &WindowSpec, radial_extent: f64, profile: &RadialProfile, tol: f64) -> Result<Vec<f64>> {
    let dom = WedgeDomain {
        alpha: AlphaFn::Constant(std::f64::consts::FRAC_PI_2),
        length: f64::INFINITY,
        r_sector: radial_extent,
        rho: clustered_rho(spec.n_rho, spec.rho_stretch),
        t: vec![0.0, 1.0],
        s: clustered_symmetric(0.0, spec.half_width, spec.n_s, spec.s_stretch),
    };
    let prob = DiscreteProblem::assemble(dom, 1.0, profile.p)?;
    let (nr, ns) = (prob.dom.n_rho(), prob.dom.n_s());
    let n2 = nr * ns;
    let n3 = prob.n();
    let dof = |i: usize, it: usize| prob.dom.dof(i / ns, it, i % ns);
    let lift = |v2: &[f64]| -> Vec<f64> {
        let mut v3 = vec![0.0; n3];
        for i in 0..n2 {
            v3[dof(i, 0)] = v2[i];
            v3[dof(i, 1)] = v2[i];
        }
        v3
    };
    let restrict = |v3: &[f64], out: &mut [f64]| {
        for i in 0..n2 {
            out[i] = if i < ns { v3[dof(i, 0)] } else { v3[dof(i, 0)] + v3[dof(i, 1)] };
        }
    };
    let inv_diag: Vec<f64> = (0..n2)
        .map(|i| {
            let ids: Vec<usize> = if i < ns { vec![dof(i, 0)] } else { vec![dof(i, 0), dof(i, 1)] };
            let mut d = 0.0;
            for &a in &ids {
                for &b in &ids {
                    d += prob.stiffness.get(a, b);
                }
                d += prob.mass[a];
            }
            1.0 / d
        })
        .collect();
    let mirror = |v: &mut [f64]| {
        for ir in 0..nr {
            for ks in 0..ns / 2 {
                let a = ir * ns + ks;
                let b = ir * ns + ns - 1 - ks;
                let m = 0.5 * (v[a] + v[b]);
                v[a] = m;
                v[b] = m;
            }
        }
    };

    let mut u2: Vec<f64> = (0..n2)
        .map(|i| {
            let r = prob.dom.rho[i / ns] * radial_extent;
            let s = prob.dom.s[i % ns];
            profile.value((r * r + s * s).sqrt())
        })
        .collect();
    let mut g2 = vec![0.0; n2];
    for _ in 0..40 {
        let u3 = lift(&u2);
        restrict(&prob.gradient(&u3), &mut g2);
        let hd = prob.hessian_diagonal(&u3);
        let op = |v: &[f64], out: &mut [f64]| {
            let v3 = lift(v);
            let mut y3 = vec![0.0; n3];
            prob.hessian_apply(&hd, &v3, &mut y3);
            restrict(&y3, out);
        };
        let rhs: Vec<f64> = g2.iter().map(|x| -x).collect();
        let (mut d, _) = minres(op, crate::linalg::jacobi(&inv_diag), &rhs, 1e-12, 20_000);
        mirror(&mut d);
        let step = d.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for i in 0..n2 {
            u2[i] += d[i];
        }
        if step < tol * norm2(&u2).max(1.0) / (n2 as f64).sqrt() {
            return Ok(u2);
        }
    }
    Err(Error::nonconv("discrete cone profile", "Newton iteration did not converge"))
}
