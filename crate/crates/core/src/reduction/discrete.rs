use crate::error::Result;
use crate::linalg::{dot, pcg, CsrMatrix};
use crate::wedge::{WedgeDomain, GAUSS2};

/// Trilinear finite-element discretisation of the scaled energy
///
/// `E(u) = ½ uᵀ K u + ½ Σ m_i u_i² - Σ m_i |u_i|^{p+1} / (p+1)`,
///
/// where `K` is the stiffness matrix of the pulled-back metric (two-point Gauss
/// per direction) and `m` the row-summed mass, both expressed in the variable
/// `x/ε` so that a spike has energy of order one.
#[derive(Debug, Clone)]
pub struct DiscreteProblem {
    pub dom: WedgeDomain,
    pub eps: f64,
    pub p: f64,
    pub stiffness: CsrMatrix,
    pub mass: Vec<f64>,
    /// `t`-line factorisations of the Gram matrix used as preconditioner.
    lines: LinePrecond,
}

/// Block preconditioner: exact tridiagonal solves along every `t`-line of a
/// symmetric positive definite matrix, plain diagonal scaling on the edge.
#[derive(Debug, Clone)]
struct LinePrecond {
    n_s: usize,
    n_t: usize,
    n_lines: usize,
    edge_inv: Vec<f64>,
    // LDLᵀ of each line: pivots and multipliers, indexed [line][it]
    piv: Vec<f64>,
    mult: Vec<f64>,
}

impl LinePrecond {
    fn new(dom: &WedgeDomain, a: &CsrMatrix, diag_shift: &[f64]) -> Self {
        let (n_s, n_t) = (dom.n_s(), dom.n_t());
        let n_lines = (dom.n_rho() - 1) * n_s;
        let edge_inv = (0..n_s).map(|k| 1.0 / (a.get(k, k) + diag_shift[k])).collect();
        let mut piv = vec![0.0; n_lines * n_t];
        let mut mult = vec![0.0; n_lines * n_t];
        for ir in 1..dom.n_rho() {
            for ks in 0..n_s {
                let line = (ir - 1) * n_s + ks;
                for it in 0..n_t {
                    let i = dom.dof(ir, it, ks);
                    let d = a.get(i, i) + diag_shift[i];
                    let q = if it == 0 {
                        d
                    } else {
                        let e = a.get(i, dom.dof(ir, it - 1, ks));
                        let l = e / piv[line * n_t + it - 1];
                        mult[line * n_t + it] = l;
                        d - l * e
                    };
                    piv[line * n_t + it] = q;
                }
            }
        }
        LinePrecond { n_s, n_t, n_lines, edge_inv, piv, mult }
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let (n_s, n_t) = (self.n_s, self.n_t);
        for k in 0..n_s {
            z[k] = r[k] * self.edge_inv[k];
        }
        for line in 0..self.n_lines {
            let ir1 = line / n_s;
            let ks = line % n_s;
            let base = n_s + ir1 * n_t * n_s + ks;
            let at = |it: usize| base + it * n_s;
            // forward: L y = r
            let mut prev = 0.0;
            for it in 0..n_t {
                let y = r[at(it)] - if it > 0 { self.mult[line * n_t + it] * prev } else { 0.0 };
                z[at(it)] = y;
                prev = y;
            }
            // D then Lᵀ
            let mut next = 0.0;
            for it in (0..n_t).rev() {
                let v = z[at(it)] / self.piv[line * n_t + it]
                    - if it + 1 < n_t { self.mult[line * n_t + it + 1] * next } else { 0.0 };
                z[at(it)] = v;
                next = v;
            }
        }
    }
}

fn lagrange(x: f64) -> ([f64; 2], [f64; 2]) {
    ([1.0 - x, x], [-1.0, 1.0])
}

impl DiscreteProblem {
    pub fn assemble(dom: WedgeDomain, eps: f64, p: f64) -> Result<Self> {
        dom.check_metric()?;
        let n = dom.n_dofs();
        let (nr, nt, ns) = (dom.n_rho(), dom.n_t(), dom.n_s());
        let cell_dofs = |ir: usize, it: usize, ks: usize| -> [usize; 8] {
            let mut d = [0usize; 8];
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        d[a * 4 + b * 2 + c] = dom.dof(ir + a, it + b, ks + c);
                    }
                }
            }
            d
        };
        let mut pairs = Vec::with_capacity((nr - 1) * (nt - 1) * (ns - 1) * 64);
        for ir in 0..nr - 1 {
            for it in 0..nt - 1 {
                for ks in 0..ns - 1 {
                    let d = cell_dofs(ir, it, ks);
                    for &i in &d {
                        for &j in &d {
                            pairs.push((i as u32, j as u32));
                        }
                    }
                }
            }
        }
        let mut k = CsrMatrix::from_pattern(n, pairs);
        let mut mass = vec![0.0; n];
        let kscale = 1.0 / eps;
        let mscale = 1.0 / (eps * eps * eps);
        for ir in 0..nr - 1 {
            let (r0, r1) = (dom.rho[ir], dom.rho[ir + 1]);
            for it in 0..nt - 1 {
                let (t0, t1) = (dom.t[it], dom.t[it + 1]);
                for ks in 0..ns - 1 {
                    let (s0, s1) = (dom.s[ks], dom.s[ks + 1]);
                    let h = [r1 - r0, t1 - t0, s1 - s0];
                    let vol = h[0] * h[1] * h[2] / 8.0;
                    let d = cell_dofs(ir, it, ks);
                    let mut kl = [[0.0; 8]; 8];
                    let mut ml = [0.0; 8];
                    for xa in GAUSS2 {
                        for xb in GAUSS2 {
                            for xc in GAUSS2 {
                                let (rho, t, s) = (r0 + xa * h[0], t0 + xb * h[1], s0 + xc * h[2]);
                                let w = dom.weighted_inverse_metric(rho, t, s);
                                let sg = dom.metric(rho, t, s).sqrt_g;
                                let (la, da) = lagrange(xa);
                                let (lb, db) = lagrange(xb);
                                let (lc, dc) = lagrange(xc);
                                let mut grads = [[0.0; 3]; 8];
                                let mut vals = [0.0; 8];
                                for a in 0..2 {
                                    for b in 0..2 {
                                        for c in 0..2 {
                                            let i = a * 4 + b * 2 + c;
                                            vals[i] = la[a] * lb[b] * lc[c];
                                            grads[i] = [
                                                da[a] * lb[b] * lc[c] / h[0],
                                                la[a] * db[b] * lc[c] / h[1],
                                                la[a] * lb[b] * dc[c] / h[2],
                                            ];
                                        }
                                    }
                                }
                                for i in 0..8 {
                                    let gi = grads[i];
                                    let wg = [
                                        w[0][0] * gi[0] + w[0][1] * gi[1] + w[0][2] * gi[2],
                                        w[1][0] * gi[0] + w[1][1] * gi[1] + w[1][2] * gi[2],
                                        w[2][0] * gi[0] + w[2][1] * gi[1] + w[2][2] * gi[2],
                                    ];
                                    for j in 0..8 {
                                        let gj = grads[j];
                                        kl[i][j] += vol * (wg[0] * gj[0] + wg[1] * gj[1] + wg[2] * gj[2]);
                                    }
                                    ml[i] += vol * sg * vals[i];
                                }
                            }
                        }
                    }
                    for i in 0..8 {
                        mass[d[i]] += ml[i] * mscale;
                        for j in 0..8 {
                            k.add(d[i], d[j], kl[i][j] * kscale);
                        }
                    }
                }
            }
        }
        let lines = LinePrecond::new(&dom, &k, &mass);
        Ok(DiscreteProblem { dom, eps, p, stiffness: k, mass, lines })
    }

    pub fn n(&self) -> usize {
        self.mass.len()
    }

    /// `(uᵀ K u + Σ m u², Σ m |u|^{p+1})`
    pub fn energy_parts(&self, u: &[f64]) -> (f64, f64) {
        let ku = self.stiffness.matvec(u);
        let quad = dot(u, &ku) + self.mass.iter().zip(u).map(|(m, x)| m * x * x).sum::<f64>();
        let nl = self.mass.iter().zip(u).map(|(m, x)| m * x.abs().powf(self.p + 1.0)).sum();
        (quad, nl)
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        let (a, b) = self.energy_parts(u);
        0.5 * a - b / (self.p + 1.0)
    }

    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let mut g = self.stiffness.matvec(u);
        for i in 0..g.len() {
            let x = u[i];
            g[i] += self.mass[i] * (x - x.abs().powf(self.p - 1.0) * x);
        }
        g
    }

    /// Diagonal part of the Hessian at `u`: `m_i (1 - p |u_i|^{p-1})`.
    pub fn hessian_diagonal(&self, u: &[f64]) -> Vec<f64> {
        self.mass.iter().zip(u).map(|(m, x)| m * (1.0 - self.p * x.abs().powf(self.p - 1.0))).collect()
    }

    pub fn hessian_apply(&self, hdiag: &[f64], v: &[f64], out: &mut [f64]) {
        self.stiffness.matvec_into(v, out);
        for i in 0..out.len() {
            out[i] += hdiag[i] * v[i];
        }
    }

    pub fn gram_apply(&self, v: &[f64], out: &mut [f64]) {
        self.stiffness.matvec_into(v, out);
        for i in 0..out.len() {
            out[i] += self.mass[i] * v[i];
        }
    }

    pub fn precondition(&self, r: &[f64], z: &mut [f64]) {
        self.lines.apply(r, z);
    }

    pub fn gram_solve(&self, f: &[f64]) -> Vec<f64> {
        self.gram_solve_tol(f, 1e-10)
    }

    pub fn gram_solve_tol(&self, f: &[f64], tol: f64) -> Vec<f64> {
        let (x, _) = pcg(|v, o| self.gram_apply(v, o), |r, z| self.precondition(r, z), f, tol, 20_000);
        x
    }

    /// `sqrt(fᵀ G⁻¹ f)`, the norm of `f` as a functional on the scaled `W^{1,2}`.
    pub fn dual_norm(&self, f: &[f64]) -> f64 {
        self.dual_norm_tol(f, 1e-10)
    }

    /// Dual norm with a looser inner solve; the error in the norm is of the
    /// order of `tol²` relative.
    pub fn dual_norm_tol(&self, f: &[f64], tol: f64) -> f64 {
        let x = self.gram_solve_tol(f, tol);
        dot(f, &x).max(0.0).sqrt()
    }

    pub fn gram_norm(&self, w: &[f64]) -> f64 {
        let mut gw = vec![0.0; w.len()];
        self.gram_apply(w, &mut gw);
        dot(w, &gw).max(0.0).sqrt()
    }

    pub fn max_value(u: &[f64]) -> f64 {
        u.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

