use super::{axpy, dot};

#[derive(Debug, Clone, Copy, Default)]
pub struct KrylovStats {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Preconditioned conjugate gradients for an SPD operator; `precond` applies an
/// SPD approximation of the inverse.
///
/// Stops when the residual 2-norm falls below `tol * |b|`.
pub fn pcg<F, P>(apply: F, precond: P, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, KrylovStats)
where
    F: Fn(&[f64], &mut [f64]),
    P: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return (x, KrylovStats { iterations: 0, residual: 0.0, converged: true });
    }
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut stats = KrylovStats::default();
    for it in 0..max_iter {
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rn = dot(&r, &r).sqrt();
        stats.iterations = it + 1;
        stats.residual = rn / bnorm;
        if rn <= tol * bnorm {
            stats.converged = true;
            break;
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    (x, stats)
}

/// Preconditioned MINRES for a symmetric (possibly indefinite or singular but
/// consistent) operator; `precond` applies an SPD approximation of the inverse.
///
/// Stops when the preconditioned residual estimate drops below `tol` times its
/// initial value.
pub fn minres<F, P>(apply: F, precond: P, b: &[f64], tol: f64, max_iter: usize) -> (Vec<f64>, KrylovStats)
where
    F: Fn(&[f64], &mut [f64]),
    P: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y = vec![0.0; n];
    precond(&r1, &mut y);
    let beta1 = dot(&r1, &y).max(0.0).sqrt();
    let mut stats = KrylovStats::default();
    if beta1 == 0.0 {
        stats.converged = true;
        return (x, stats);
    }
    let mut r2 = r1.clone();
    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut av = vec![0.0; n];
    for it in 0..max_iter {
        let s = 1.0 / beta;
        for i in 0..n {
            v[i] = s * y[i];
        }
        apply(&v, &mut av);
        if it >= 1 {
            axpy(-beta / oldb, &r1, &mut av);
        }
        let alfa = dot(&v, &av);
        axpy(-alfa / beta, &r2, &mut av);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&av);
        precond(&r2, &mut y);
        oldb = beta;
        beta = dot(&r2, &y).max(0.0).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        }
        axpy(phi, &w, &mut x);

        stats.iterations = it + 1;
        stats.residual = phibar / beta1;
        if phibar <= tol * beta1 || beta == 0.0 {
            stats.converged = true;
            break;
        }
    }
    (x, stats)
}

/// Diagonal (Jacobi) preconditioner from the inverse diagonal.
pub fn jacobi(inv_diag: &[f64]) -> impl Fn(&[f64], &mut [f64]) + '_ {
    move |r: &[f64], z: &mut [f64]| {
        for ((zi, ri), d) in z.iter_mut().zip(r).zip(inv_diag) {
            *zi = ri * d;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lap1d(n: usize, shift: f64) -> impl Fn(&[f64], &mut [f64]) {
        move |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut v = (2.0 + shift) * x[i];
                if i > 0 {
                    v -= x[i - 1];
                }
                if i + 1 < n {
                    v -= x[i + 1];
                }
                y[i] = v;
            }
        }
    }

    #[test]
    fn pcg_solves_spd_system() {
        let n = 200;
        let a = lap1d(n, 0.01);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let inv = vec![1.0 / 2.01; n];
        let (x, st) = pcg(&a, jacobi(&inv), &b, 1e-12, 2000);
        assert!(st.converged);
        let mut ax = vec![0.0; n];
        a(&x, &mut ax);
        let err: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-9);
    }

    #[test]
    fn minres_solves_indefinite_system() {
        let n = 200;
        let a = lap1d(n, -0.5);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
        let inv = vec![1.0; n];
        let (x, st) = minres(&a, jacobi(&inv), &b, 1e-12, 5000);
        assert!(st.converged);
        let mut ax = vec![0.0; n];
        a(&x, &mut ax);
        let err: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }
}
