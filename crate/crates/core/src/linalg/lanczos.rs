use super::dot;
use super::tridiag::SymTridiag;

/// Ritz values of a pencil `(H, G)` with `G` SPD, from `steps` Lanczos steps in
/// the `G` inner product with full reorthogonalisation.
///
/// `apply_h` applies `H`, `solve_g` applies `G^{-1}`, `apply_g` applies `G`.
/// `project` is applied to every Krylov vector (identity if unconstrained).
/// Returns the Ritz values sorted ascending together with their residual bounds.
pub fn ritz_values<H, S, A, P>(
    apply_h: H,
    solve_g: S,
    apply_g: A,
    project: P,
    start: &[f64],
    steps: usize,
) -> Vec<(f64, f64)>
where
    H: Fn(&[f64]) -> Vec<f64>,
    S: Fn(&[f64]) -> Vec<f64>,
    A: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&mut Vec<f64>),
{
    let mut q = start.to_vec();
    project(&mut q);
    let gq = apply_g(&q);
    let nrm = dot(&q, &gq).sqrt();
    q.iter_mut().for_each(|v| *v /= nrm);
    let mut basis: Vec<Vec<f64>> = vec![q.clone()];
    let mut gbasis: Vec<Vec<f64>> = vec![gq.iter().map(|v| v / nrm).collect()];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for j in 0..steps {
        let hq = apply_h(&basis[j]);
        let mut w = solve_g(&hq);
        project(&mut w);
        let a = dot(&w, &gbasis[j]);
        alpha.push(a);
        for _ in 0..2 {
            for (b, gb) in basis.iter().zip(&gbasis) {
                let c = dot(&w, gb);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let gw = apply_g(&w);
        let bnext = dot(&w, &gw).max(0.0).sqrt();
        if j + 1 == steps || bnext < 1e-12 * a.abs().max(1.0) {
            beta.push(bnext);
            break;
        }
        beta.push(bnext);
        basis.push(w.iter().map(|v| v / bnext).collect());
        gbasis.push(gw.iter().map(|v| v / bnext).collect());
    }
    let m = alpha.len();
    let t = SymTridiag::new(alpha.clone(), beta[..m - 1].to_vec());
    let last_beta = beta[m - 1];
    (0..m)
        .map(|k| {
            let lam = t.eigenvalue(k);
            let v = t.eigenvector(lam);
            (lam, (last_beta * v[m - 1]).abs())
        })
        .collect()
}
