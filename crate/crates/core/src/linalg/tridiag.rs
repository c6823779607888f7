/// Symmetric tridiagonal matrix: diagonal `d` (len n), off-diagonal `e` (len n-1).
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl SymTridiag {
    pub fn new(d: Vec<f64>, e: Vec<f64>) -> Self {
        assert_eq!(e.len() + 1, d.len().max(1));
        SymTridiag { d, e }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        negative_pivots(&self.d, &self.e, x)
    }

    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.d.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut rad = 0.0;
            if i > 0 {
                rad += self.e[i - 1].abs();
            }
            if i + 1 < n {
                rad += self.e[i].abs();
            }
            lo = lo.min(self.d[i] - rad);
            hi = hi.max(self.d[i] + rad);
        }
        (lo, hi)
    }

    /// `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let span = (hi - lo).abs().max(1.0);
        lo -= 1e-12 * span;
        hi += 1e-12 * span;
        bisect_count(|x| self.count_below(x), k, lo, hi)
    }

    pub fn eigenvalues(&self, count: usize) -> Vec<f64> {
        (0..count.min(self.len())).map(|k| self.eigenvalue(k)).collect()
    }

    /// Eigenvector for a converged eigenvalue by inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let shift = lambda + 1e-13 * (1.0 + lambda.abs());
        let dl: Vec<f64> = self.e.clone();
        let dd: Vec<f64> = self.d.iter().map(|x| x - shift).collect();
        let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
        for _ in 0..4 {
            x = solve_tridiag(&dl, &dd, &dl, &x);
            let nrm = super::norm2(&x);
            for v in &mut x {
                *v /= nrm;
            }
        }
        x
    }
}

/// Count of negative pivots in the LDL^T factorisation of `T - x I`.
pub fn negative_pivots(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i > 0 { e[i - 1] * e[i - 1] } else { 0.0 };
        q = d[i] - x - if i > 0 { off / q } else { 0.0 };
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Finds the point where a monotone non-decreasing counting function steps
/// from `k` to `k+1`.
pub fn bisect_count<F: Fn(f64) -> usize>(count: F, k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves a general tridiagonal system with partial pivoting.
/// `dl` sub-diagonal, `d` diagonal, `du` super-diagonal.
pub fn solve_tridiag(dl: &[f64], d: &[f64], du: &[f64], b: &[f64]) -> Vec<f64> {
    let n = d.len();
    if n == 1 {
        return vec![b[0] / d[0]];
    }
    let mut dl = dl.to_vec();
    let mut d = d.to_vec();
    let mut du = du.to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut x = b.to_vec();
    for i in 0..n - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = f64::EPSILON;
            }
            let f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            x[i + 1] -= f * x[i];
            dl[i] = f;
        } else {
            let f = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -f;
            }
            du[i] = tmp;
            let xt = x[i];
            x[i] = x[i + 1];
            x[i + 1] = xt - f * x[i + 1];
            dl[i] = f;
        }
    }
    if d[n - 1] == 0.0 {
        d[n - 1] = f64::EPSILON;
    }
    x[n - 1] /= d[n - 1];
    x[n - 2] = (x[n - 2] - du[n - 2] * x[n - 1]) / d[n - 2];
    for i in (0..n.saturating_sub(2)).rev() {
        x[i] = (x[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / d[i];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_eigenvalues_match_closed_form() {
        let n = 50;
        let t = SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]);
        for k in 0..5 {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((t.eigenvalue(k) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn pivoted_solve_handles_zero_diagonal() {
        let dl = vec![1.0, 2.0];
        let d = vec![0.0, 1.0, 3.0];
        let du = vec![2.0, -1.0];
        let xs = vec![1.0, -2.0, 0.5];
        let b = vec![
            d[0] * xs[0] + du[0] * xs[1],
            dl[0] * xs[0] + d[1] * xs[1] + du[1] * xs[2],
            dl[1] * xs[1] + d[2] * xs[2],
        ];
        let x = solve_tridiag(&dl, &d, &du, &b);
        for i in 0..3 {
            assert!((x[i] - xs[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_iteration_returns_eigenvector() {
        let n = 30;
        let t = SymTridiag::new((0..n).map(|i| i as f64 * 0.1).collect(), vec![0.3; n - 1]);
        let lam = t.eigenvalue(2);
        let v = t.eigenvector(lam);
        for i in 0..n {
            let mut av = t.d[i] * v[i];
            if i > 0 {
                av += t.e[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                av += t.e[i] * v[i + 1];
            }
            assert!((av - lam * v[i]).abs() < 1e-9);
        }
    }
}
