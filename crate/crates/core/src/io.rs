//! Output files: profile CSV, sorted-key JSON, field dumps.

use crate::error::{Error, Result};
use crate::cone::ConeSpectrumReport;
use crate::radial::RadialProfile;
use crate::reduction::ReductionSample;
use crate::wedge::WedgeDomain;
use serde_json::Value;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Pretty JSON with keys in sorted order (serde_json maps are ordered by key).
pub fn json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialise");
    s.push('\n');
    s
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    write_text(path, &json_string(v))
}

/// `r,u,du` with one row per node.
pub fn profile_csv(p: &RadialProfile) -> String {
    let mut s = String::with_capacity(p.r.len() * 64);
    s.push_str("r,u,du\n");
    for i in 0..p.r.len() {
        let _ = writeln!(s, "{:e},{:e},{:e}", p.r[i], p.u[i], p.du[i]);
    }
    s
}

/// Reads a profile written by [`profile_csv`] back into `(r, u, du)` columns.
pub fn read_profile_csv(text: &str) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut cols = (Vec::new(), Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate().skip(1) {
        let f: Vec<f64> = line
            .split(',')
            .map(|x| x.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidInput(format!("profile line {}: bad number", i + 1)))?;
        if f.len() != 3 {
            return Err(Error::InvalidInput(format!("profile line {}: expected 3 columns", i + 1)));
        }
        cols.0.push(f[0]);
        cols.1.push(f[1]);
        cols.2.push(f[2]);
    }
    Ok(cols)
}

/// Nodal values on the full `(ρ, t, s)` lattice, edge unknowns repeated over `t`.
fn lattice_values(dom: &WedgeDomain, field: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(dom.n_rho() * dom.n_t() * dom.n_s());
    for ir in 0..dom.n_rho() {
        for it in 0..dom.n_t() {
            for ks in 0..dom.n_s() {
                out.push(field[dom.dof(ir, it, ks)]);
            }
        }
    }
    out
}

/// Little-endian binary dump: a header of eight `f64`
/// `[n_rho, n_t, n_s, r_sector, t_max, s_min, s_max, eps]` followed by the
/// nodal values in row-major `(ρ, t, s)` order, `s` fastest.
pub fn write_field_binary(path: &Path, dom: &WedgeDomain, field: &[f64], eps: f64) -> Result<()> {
    let header = [
        dom.n_rho() as f64,
        dom.n_t() as f64,
        dom.n_s() as f64,
        dom.r_sector,
        1.0,
        dom.s[0],
        dom.s[dom.n_s() - 1],
        eps,
    ];
    let mut buf = Vec::with_capacity(8 * (8 + field.len()));
    for v in header.iter().chain(lattice_values(dom, field).iter()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// `rho,t,s,value` with physical `ρ`.
pub fn field_csv(dom: &WedgeDomain, field: &[f64]) -> String {
    let vals = lattice_values(dom, field);
    let mut s = String::from("rho,t,s,value\n");
    let mut k = 0;
    for ir in 0..dom.n_rho() {
        for it in 0..dom.n_t() {
            for ks in 0..dom.n_s() {
                let _ = writeln!(s, "{:e},{:e},{:e},{:e}", dom.rho[ir] * dom.r_sector, dom.t[it], dom.s[ks], vals[k]);
                k += 1;
            }
        }
    }
    s
}

/// `Q,eps,alpha_Q,energy_ansatz,energy_reduced,residual_norm,w_norm`, one row per sample.
pub fn samples_csv(samples: &[ReductionSample]) -> String {
    let mut s = String::from("Q,eps,alpha_Q,energy_ansatz,energy_reduced,residual_norm,w_norm\n");
    for r in samples {
        let _ = writeln!(
            s,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.q, r.eps, r.alpha_q, r.energy_ansatz, r.energy_reduced, r.residual_norm, r.w_norm
        );
    }
    s
}

/// `alpha,m,j,lambda_ang,sigma,n` with `n` the radial overtone, rows in report order.
pub fn cone_csv(reports: &[ConeSpectrumReport]) -> String {
    let mut s = String::from("alpha,m,j,lambda_ang,sigma,n\n");
    for rep in reports {
        for m in &rep.modes {
            let _ = writeln!(s, "{:e},{},{},{:e},{:e},{}", rep.alpha, m.m, m.j, m.lambda_ang, m.sigma, m.n);
        }
    }
    s
}
