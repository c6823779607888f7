//! Command-line front end.
//!
//! Every subcommand reads an optional `key = value` file (`--config`), applies
//! the flag overrides, rejects unknown keys, and writes its results to `--out`
//! with the fully resolved configuration embedded. Outputs contain no
//! timestamps, so repeated runs produce identical bytes.

use crate::cone::{assemble_cone_spectrum, coercivity_constant, ConeSpectrumConfig, ConeSpectrumReport};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::io;
use crate::radial::{energy_coefficients, solve_ground_state, EnergyCoefficients, RadialConfig, RadialProfile};
use crate::reduction::{
    energy_regression, pseudo_criticality_sweep, reduced_energy_profile, reduction_sweep, solve_spike, AnsatzKind,
    solve_full, DiscreteProblem, ReductionConfig, ReductionContext, ReductionSample, SpikeSolveConfig, SpikeSolveReport,
};
use crate::wedge::{build_domain, build_spike_ansatz, AlphaFn, WedgeDomain, WindowSpec};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "edgespike", version, about = "Spike layers at the edge of a wedge domain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Radial ground state profile (CSV) and its metadata (JSON).
    GroundState(Common),
    /// Energy coefficient C0 and related integrals.
    C0(Common),
    /// Linearized spectrum on the infinite cone of opening `alpha`.
    ConeSpectrum(Common),
    /// Reduced energy Ψ_ε(Q) over a list of edge positions, with regression against C0 α(Q).
    Reduce(Common),
    /// ε-sweep of the ansatz residual (and optionally the correction) at a fixed Q.
    Sweep(Common),
    /// Full solve for a spike started at Q.
    Solve(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    p: Option<f64>,
    /// Cone opening angle (cone-spectrum) or `alpha_base` (domain commands).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
}

const RADIAL_KEYS: &[&str] = &["p", "r_max", "res_tol"];
const CONE_KEYS: &[&str] = &["alpha", "alpha_list", "m_max", "j_max", "n_eig", "n_theta", "kernel_tol", "radial_h"];
const DOMAIN_KEYS: &[&str] = &[
    "alpha_mode", "alpha_base", "alpha_amp", "L", "R_sector", "n_rho", "n_t", "n_s", "half_width",
    "radial_extent", "s_stretch", "rho_stretch", "mu", "ansatz", "newton_tol",
];

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_)
        | Error::Io { .. }
        | Error::SpikeTooCoarse(_)
        | Error::DegenerateMetric { .. }
        | Error::DegenerateAngle { .. } => 1,
        Error::CollapseToZero { .. } | Error::DegenerateCase { .. } => 3,
        _ => 2,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidInput(_) => "InvalidInput",
        Error::NoBracket { .. } => "NoBracket",
        Error::NonConvergence { .. } => "NonConvergence",
        Error::QuadratureUnconverged { .. } => "QuadratureUnconverged",
        Error::GridTooCoarse { .. } => "GridTooCoarse",
        Error::SpuriousMode { .. } => "SpuriousMode",
        Error::DegenerateCase { .. } => "DegenerateCase",
        Error::SpikeTooCoarse(_) => "SpikeTooCoarse",
        Error::DegenerateAngle { .. } => "DegenerateAngle",
        Error::DegenerateMetric { .. } => "DegenerateMetric",
        Error::IndefiniteProjectedHessian { .. } => "IndefiniteProjectedHessian",
        Error::CollapseToZero { .. } => "CollapseToZero",
        Error::Io { .. } => "Io",
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            let report = json!({"error": error_kind(&e), "message": e.to_string(), "exit_code": code});
            eprint!("{}", io::json_string(&report));
            code
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GroundState(c) => cmd_ground_state(&c),
        Command::C0(c) => cmd_c0(&c),
        Command::ConeSpectrum(c) => cmd_cone(&c),
        Command::Reduce(c) => cmd_reduce(&c),
        Command::Sweep(c) => cmd_sweep(&c),
        Command::Solve(c) => cmd_solve(&c),
    }
}

/// Loads the file, applies flag overrides, checks keys.
fn load(c: &Common, alpha_key: &str, allowed: &[&[&str]]) -> Result<Config> {
    let mut cfg = match &c.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(p) = c.p {
        cfg.set("p", p);
    }
    if let Some(a) = c.alpha {
        cfg.set(alpha_key, a);
    }
    if let Some(e) = c.eps {
        cfg.set("eps", e);
    }
    let keys: Vec<&str> = allowed.iter().flat_map(|k| k.iter().copied()).collect();
    cfg.check_keys(&keys)?;
    Ok(cfg)
}

/// Records every resolved setting so the output documents the run completely.
struct Resolved(Map<String, Value>);

impl Resolved {
    fn new() -> Self {
        Resolved(Map::new())
    }
    fn num(&mut self, cfg: &Config, key: &str, default: f64) -> Result<f64> {
        let v = cfg.f64_or(key, default)?;
        self.0.insert(key.to_string(), json!(v));
        Ok(v)
    }
    fn int(&mut self, cfg: &Config, key: &str, default: usize) -> Result<usize> {
        let v = cfg.usize_or(key, default)?;
        self.0.insert(key.to_string(), json!(v));
        Ok(v)
    }
    fn list(&mut self, cfg: &Config, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        let v = cfg.list_or(key, default)?;
        self.0.insert(key.to_string(), json!(v));
        Ok(v)
    }
    fn text(&mut self, cfg: &Config, key: &str, default: &str) -> String {
        let v = cfg.get_str(key).unwrap_or(default).to_string();
        self.0.insert(key.to_string(), json!(v));
        v
    }
    fn flag(&mut self, cfg: &Config, key: &str, default: bool) -> Result<bool> {
        let v = match cfg.get_str(key) {
            None => default,
            Some("true") => true,
            Some("false") => false,
            Some(other) => return Err(Error::InvalidInput(format!("{key} must be true or false, not '{other}'"))),
        };
        self.0.insert(key.to_string(), json!(v));
        Ok(v)
    }
    fn value(self) -> Value {
        Value::Object(self.0)
    }
}

fn radial_setup(cfg: &Config, r: &mut Resolved) -> Result<RadialProfile> {
    let mut rc = RadialConfig::new(r.num(cfg, "p", 3.0)?);
    rc.r_max = r.num(cfg, "r_max", rc.r_max)?;
    rc.res_tol = r.num(cfg, "res_tol", rc.res_tol)?;
    solve_ground_state(&rc)
}

fn domain_setup(cfg: &Config, r: &mut Resolved) -> Result<(WedgeDomain, ReductionConfig)> {
    let mode = r.text(cfg, "alpha_mode", "cos");
    let base = r.num(cfg, "alpha_base", std::f64::consts::FRAC_PI_2)?;
    let amp = r.num(cfg, "alpha_amp", 0.2)?;
    let length = r.num(cfg, "L", 4.0)?;
    let r_sector = r.num(cfg, "R_sector", 2.0)?;
    let alpha = match mode.as_str() {
        "cos" => AlphaFn::Cos { base, amp, length },
        // base at the middle of the edge, ±amp at the caps
        "linear" => AlphaFn::Linear { base: base - amp, slope: 2.0 * amp / length },
        "constant" => AlphaFn::Constant(base),
        other => return Err(Error::InvalidInput(format!("alpha_mode must be cos, linear or constant, not '{other}'"))),
    };
    let d = WindowSpec::default();
    let window = WindowSpec {
        half_width: r.num(cfg, "half_width", d.half_width)?,
        radial_extent: r.num(cfg, "radial_extent", d.radial_extent)?,
        n_rho: r.int(cfg, "n_rho", d.n_rho)?,
        n_t: r.int(cfg, "n_t", d.n_t)?,
        n_s: r.int(cfg, "n_s", d.n_s)?,
        s_stretch: r.num(cfg, "s_stretch", d.s_stretch)?,
        rho_stretch: r.num(cfg, "rho_stretch", d.rho_stretch)?,
    };
    let domain = build_domain(alpha, length, r_sector, window.n_rho, window.n_t, window.n_s)?;
    let mut rcfg = ReductionConfig { window, ..ReductionConfig::default() };
    rcfg.mu = r.num(cfg, "mu", rcfg.mu)?;
    rcfg.newton_tol = r.num(cfg, "newton_tol", rcfg.newton_tol)?;
    rcfg.ansatz = match r.text(cfg, "ansatz", "grid").as_str() {
        "grid" => AnsatzKind::GridConsistent,
        "sampled" => AnsatzKind::Sampled,
        other => return Err(Error::InvalidInput(format!("ansatz must be grid or sampled, not '{other}'"))),
    };
    Ok((domain, rcfg))
}

fn out_path(c: &Common, name: &str) -> PathBuf {
    c.out.join(name)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn coeffs_json(e: &EnergyCoefficients) -> Value {
    json!({
        "c0": e.c0,
        "c0_r_sin2": e.c0_r_sin2,
        "nehari_mass": e.nehari_mass,
        "energy_full": e.energy_full,
        "quadrature_error": e.quadrature_error,
    })
}

fn cmd_ground_state(c: &Common) -> Result<()> {
    let cfg = load(c, "alpha", &[RADIAL_KEYS])?;
    let mut r = Resolved::new();
    let prof = radial_setup(&cfg, &mut r)?;
    let coeffs = energy_coefficients(&prof, 1e-8)?;
    ensure_dir(&c.out)?;
    io::write_text(&out_path(c, "ground_state.csv"), &io::profile_csv(&prof))?;
    let meta = json!({
        "p": prof.p,
        "shoot_u0": prof.shoot_u0,
        "c_decay": prof.c_decay,
        "c_decay_window_0.7_0.9": prof.fit_decay_constant(0.7, 0.9),
        "R_max": prof.r_max,
        "res_tol": prof.res_tol,
        "max_residual": prof.max_residual,
        "h": prof.h(),
        "nodes": prof.r.len(),
        "c0": coeffs.c0,
        "c0_r_sin2": coeffs.c0_r_sin2,
        "config": r.value(),
    });
    io::write_json(&out_path(c, "ground_state.json"), &meta)
}

fn cmd_c0(c: &Common) -> Result<()> {
    let cfg = load(c, "alpha", &[RADIAL_KEYS])?;
    let mut r = Resolved::new();
    let prof = radial_setup(&cfg, &mut r)?;
    let coeffs = energy_coefficients(&prof, 1e-8)?;
    let mut v = coeffs_json(&coeffs);
    v["p"] = json!(prof.p);
    v["config"] = r.value();
    ensure_dir(&c.out)?;
    io::write_json(&out_path(c, "c0.json"), &v)
}

fn report_json(rep: &ConeSpectrumReport) -> Result<Value> {
    let coercivity = match coercivity_constant(rep) {
        Ok(v) => json!(v),
        Err(Error::DegenerateCase { .. }) => Value::Null,
        Err(e) => return Err(e),
    };
    let modes: Vec<Value> = rep
        .modes
        .iter()
        .map(|m| json!({"m": m.m, "j": m.j, "n": m.n, "lambda_ang": m.lambda_ang, "sigma": m.sigma}))
        .collect();
    Ok(json!({
        "alpha": rep.alpha,
        "p": rep.p,
        "morse_index": rep.morse_index,
        "kernel_dim": rep.kernel_dim,
        "spectral_gap": rep.spectral_gap,
        "coercivity": coercivity,
        "modes": modes,
    }))
}

fn cmd_cone(c: &Common) -> Result<()> {
    let cfg = load(c, "alpha", &[RADIAL_KEYS, CONE_KEYS])?;
    let mut r = Resolved::new();
    let prof = radial_setup(&cfg, &mut r)?;
    let mut alphas = if cfg.contains("alpha_list") && !cfg.contains("alpha") {
        r.list(&cfg, "alpha_list", &[])?
    } else {
        vec![r.num(&cfg, "alpha", std::f64::consts::FRAC_PI_2)?]
    };
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();
    let d = ConeSpectrumConfig::default();
    let mut cc = ConeSpectrumConfig {
        m_max: r.int(&cfg, "m_max", d.m_max)?,
        j_max: r.int(&cfg, "j_max", d.j_max)?,
        n_eig: r.int(&cfg, "n_eig", d.n_eig)?,
        n_theta: r.int(&cfg, "n_theta", d.n_theta)?,
        kernel_tol: r.num(&cfg, "kernel_tol", d.kernel_tol)?,
        radial: d.radial.clone(),
    };
    cc.radial.h = r.num(&cfg, "radial_h", cc.radial.h)?;
    let reports = alphas
        .iter()
        .map(|&a| assemble_cone_spectrum(&prof, a, &cc))
        .collect::<Result<Vec<_>>>()?;
    let v = json!({
        "reports": reports.iter().map(report_json).collect::<Result<Vec<_>>>()?,
        "config": r.value(),
    });
    ensure_dir(&c.out)?;
    io::write_text(&out_path(c, "cone_spectrum.csv"), &io::cone_csv(&reports))?;
    io::write_json(&out_path(c, "cone_spectrum.json"), &v)
}

fn sample_json(s: &ReductionSample) -> Value {
    json!({
        "q": s.q,
        "eps": s.eps,
        "alpha_q": s.alpha_q,
        "energy_ansatz": s.energy_ansatz,
        "energy_reduced": s.energy_reduced,
        "residual_norm": s.residual_norm,
        "w_norm": s.w_norm,
        "orthogonality": s.orthogonality,
        "newton_iterations": s.newton_iterations,
    })
}

fn cmd_reduce(c: &Common) -> Result<()> {
    let cfg = load(c, "alpha_base", &[RADIAL_KEYS, DOMAIN_KEYS, &["eps", "q_list"]])?;
    let mut r = Resolved::new();
    let prof = radial_setup(&cfg, &mut r)?;
    let coeffs = energy_coefficients(&prof, 1e-8)?;
    let (domain, rcfg) = domain_setup(&cfg, &mut r)?;
    let eps = r.num(&cfg, "eps", 0.05)?;
    let l = domain.length;
    let default_q: Vec<f64> = (0..7).map(|i| l * (0.125 + 0.125 * i as f64)).collect();
    let qs = r.list(&cfg, "q_list", &default_q)?;
    let ctx = ReductionContext::new(&domain, &prof, rcfg);
    let samples = reduced_energy_profile(&ctx, eps, &qs)?;
    let reg = energy_regression(&samples, &coeffs);
    let v = json!({
        "c0": coeffs.c0,
        "samples": samples.iter().map(sample_json).collect::<Vec<_>>(),
        "regression": {
            "slope_vs_c0_alpha": reg.slope,
            "slope_vs_alpha": reg.slope * coeffs.c0,
            "intercept": reg.intercept,
            "r_squared": reg.r_squared,
            "max_deviation": reg.max_deviation,
        },
        "config": r.value(),
    });
    ensure_dir(&c.out)?;
    io::write_text(&out_path(c, "reduce.csv"), &io::samples_csv(&samples))?;
    io::write_json(&out_path(c, "reduce.json"), &v)
}

fn cmd_sweep(c: &Common) -> Result<()> {
    let cfg = load(c, "alpha_base", &[RADIAL_KEYS, DOMAIN_KEYS, &["q", "eps_list", "mode"]])?;
    let mut r = Resolved::new();
    let prof = radial_setup(&cfg, &mut r)?;
    let (domain, rcfg) = domain_setup(&cfg, &mut r)?;
    let q = r.num(&cfg, "q", domain.length / 2.0)?;
    let eps_list = r.list(&cfg, "eps_list", &[0.2, 0.1, 0.05])?;
    let mode = r.text(&cfg, "mode", "residual");
    let ctx = ReductionContext::new(&domain, &prof, rcfg);
    let res = match mode.as_str() {
        "residual" => pseudo_criticality_sweep(&ctx, q, &eps_list)?,
        "full" => reduction_sweep(&ctx, q, &eps_list)?,
        other => return Err(Error::InvalidInput(format!("mode must be residual or full, not '{other}'"))),
    };
    let v = json!({
        "samples": res.samples.iter().map(sample_json).collect::<Vec<_>>(),
        "residual_slope": res.residual_slope,
        "w_slope": res.w_slope,
        "energy_gap_slope": res.energy_gap_slope,
        "config": r.value(),
    });
    ensure_dir(&c.out)?;
    io::write_text(&out_path(c, "sweep.csv"), &io::samples_csv(&res.samples))?;
    io::write_json(&out_path(c, "sweep.json"), &v)
}

fn cmd_solve(c: &Common) -> Result<()> {
    let cfg = load(
        c,
        "alpha_base",
        &[RADIAL_KEYS, DOMAIN_KEYS, &["eps", "q", "window_lo", "window_hi", "cells_per_unit", "write_csv", "search", "amplitude"]],
    )?;
    let mut r = Resolved::new();
    let prof = radial_setup(&cfg, &mut r)?;
    let (domain, rcfg) = domain_setup(&cfg, &mut r)?;
    let eps = r.num(&cfg, "eps", 0.05)?;
    let q = r.num(&cfg, "q", 0.0)?;
    let lo = r.num(&cfg, "window_lo", (q - 12.0 * eps).max(0.0))?;
    let hi = r.num(&cfg, "window_hi", (lo + 24.0 * eps).min(domain.length))?;
    let cells = r.num(&cfg, "cells_per_unit", 6.0)?;
    let write_csv = r.flag(&cfg, "write_csv", false)?;
    let search = r.flag(&cfg, "search", true)?;
    let amplitude = r.num(&cfg, "amplitude", 1.0)?;
    let mut spec = rcfg.window.clone();
    if !cfg.contains("n_s") {
        // uniform edge spacing of `cells_per_unit` cells per scaled unit
        spec.n_s = ((hi - lo) / eps * cells).ceil() as usize + 1;
        r.0.insert("n_s".into(), json!(spec.n_s));
    }
    let win = domain.window_range(lo, hi, eps, &spec)?;
    let prob = DiscreteProblem::assemble(win, eps, prof.p)?;
    let mut scfg = SpikeSolveConfig::default();
    scfg.reduction.mu = rcfg.mu;
    scfg.reduction.window = spec;
    let rep = if search {
        if amplitude != 1.0 {
            return Err(Error::InvalidInput("amplitude applies only with search = false".into()));
        }
        solve_spike(&prob, &prof, q, &scfg)?
    } else {
        let z: Vec<f64> = build_spike_ansatz(&prob.dom, &prof, q, eps, rcfg.mu)?.iter().map(|x| amplitude * x).collect();
        let full = solve_full(&prob, z, 0.1 * prof.u0(), &scfg.newton)?;
        SpikeSolveReport { q_start: q, q_path: vec![q], full }
    };
    let f = &rep.full;
    let v = json!({
        "q_start": rep.q_start,
        "q_path": rep.q_path,
        "converged": f.converged,
        "iterations": f.iterations,
        "residual_norm": f.residual_norm,
        "energy": f.energy,
        "spike_center": f.spike_center,
        "spike_height": f.spike_height,
        "alpha_at_center": domain.alpha.value(f.spike_center),
        "config": r.value(),
    });
    ensure_dir(&c.out)?;
    io::write_field_binary(&out_path(c, "solution.bin"), &prob.dom, &f.solution, eps)?;
    if write_csv {
        io::write_text(&out_path(c, "solution.csv"), &io::field_csv(&prob.dom, &f.solution))?;
    }
    io::write_json(&out_path(c, "solve.json"), &v)?;
    if !f.converged {
        return Err(Error::nonconv("full solve", format!("residual {:e} after {} steps", f.residual_norm, f.iterations)));
    }
    Ok(())
}
