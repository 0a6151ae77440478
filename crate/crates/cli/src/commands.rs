use std::fs;
use std::io::Write;
use std::path::Path;

use subspace_holonomy::dynamics::propagate_frame;
use subspace_holonomy::frames::build_section;
use subspace_holonomy::holonomy::{analyze, decompose as run_decompose, gauge_comparison, run_pipeline};
use subspace_holonomy::lambda::{
    case_i_analytic, case_ii_analytic, case_iii_analytic, case_setup, LambdaCase,
};
use subspace_holonomy::matkit::identity;
use subspace_holonomy::{random, Error, FramePath, LambdaParams, SectionPath, TimeGrid};

use crate::config::{self, Overrides, Prepared};
use crate::table::Table;
use crate::Failure;

/// Covariance band for `gauge-check`.
const GAUGE_TOL: f64 = 1e-6;
/// Spectral scale of the random gauge generator.
const GAUGE_STRENGTH: f64 = 0.5;
const DEFAULT_STEPS: usize = 4096;

fn core_failure(e: Error) -> Failure {
    match e {
        Error::InPhaseViolation { .. } => Failure::InPhase(e.to_string()),
        other => Failure::Config(other.to_string()),
    }
}

fn prepare(config_path: &Path, overrides: Overrides) -> Result<Prepared, Failure> {
    let cfg = config::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    cfg.prepare(base, overrides)
}

fn frames(p: &Prepared) -> Result<(FramePath, SectionPath), Failure> {
    let s = propagate_frame(&p.spec, &p.psi0, &p.grid, &p.tol).map_err(core_failure)?;
    let section = build_section(p.rule.clone(), &s, &p.tol).map_err(core_failure)?;
    Ok((s, section))
}

pub fn decompose(config_path: &Path, out: Option<&Path>, o: Overrides) -> Result<u8, Failure> {
    let p = prepare(config_path, o)?;
    let (s, section) = frames(&p)?;
    let d = run_decompose(&section, &s, &p.spec, &p.tol).map_err(core_failure)?;
    let mut json = serde_json::to_string_pretty(&d.report)
        .map_err(|e| Failure::Io(format!("cannot serialize report: {e}")))?;
    json.push('\n');
    match out {
        Some(path) => fs::write(path, json)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout()
            .write_all(json.as_bytes())
            .map_err(|e| Failure::Io(e.to_string()))?,
    }
    Ok(0)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DemoOverrides {
    pub delta: Option<f64>,
    pub omega0: Option<f64>,
    pub eta: Option<f64>,
    pub steps: Option<usize>,
    pub tau: Option<f64>,
}

pub fn demo(which: LambdaCase, o: DemoOverrides) -> Result<u8, Failure> {
    let defaults = LambdaParams::default();
    let p = LambdaParams {
        delta: o.delta.unwrap_or(defaults.delta),
        omega0: o.omega0.unwrap_or(defaults.omega0),
        eta: o.eta.unwrap_or(defaults.eta),
        tau: o.tau.unwrap_or(defaults.tau),
        ..defaults
    };
    let steps = o.steps.unwrap_or(DEFAULT_STEPS);
    let setup = case_setup(which, &p, 1e-10).map_err(core_failure)?;
    let grid = TimeGrid::uniform(p.tau, steps).map_err(core_failure)?;
    let tol = Default::default();
    let (_, _, d) =
        run_pipeline(&setup.spec, &setup.psi0, setup.rule, &grid, &tol).map_err(core_failure)?;
    let r = &d.report;

    println!(
        "case ({which}): delta = {}, omega0 = {}, eta = {:.6}, tau = {:.6}, steps = {steps}",
        p.delta, p.omega0, p.eta, p.tau
    );
    println!("gamma = {:.6}, phi_tau = {:.6}", p.gamma(), p.phi(p.tau));
    let mut t = Table::new();
    let zero = 0.0;
    match which {
        LambdaCase::I => {
            t.matrix_row("U(tau,0)", &case_i_analytic(&p), &r.time_evolution);
            t.matrix_row("holonomic factor", &identity(2), &r.holonomic_factor);
        }
        LambdaCase::Ii => {
            let a = case_ii_analytic(&p).map_err(core_failure)?;
            t.matrix_row("O(0,tau)", &a.overlap, &r.overlap);
            t.matrix_row("W(tau) [Anandan]", &a.w, &r.w_final);
            t.matrix_row("W(tau) [frames]", &a.w, &r.w_direct);
            let k = d.generators.k_mats.iter().map(|k| k.norm()).fold(0.0, f64::max);
            t.scalar_row("max ||K(t)||", zero, k);
        }
        LambdaCase::Iii => {
            let a = case_iii_analytic(&p, &grid).map_err(core_failure)?;
            t.matrix_row("O(0,tau)", &a.overlap, &r.overlap);
            t.matrix_row("holonomic factor", &a.holonomic, &r.holonomic_factor);
            t.matrix_row("dynamical factor", &a.dynamical, &r.dynamical_factor);
            t.matrix_row("W(tau) [Anandan]", &a.w, &r.w_final);
            t.scalar_row("max ||[A(t),K(t')]||", zero, r.max_commutator);
        }
    }
    t.print();
    println!("classification: {}", r.classification.as_str());
    println!("separation_residual: {:.3e}", r.separation_residual);
    println!("product_residual: {:.3e}", r.product_residual);
    println!("max deviation: {:.3e}", t.max_deviation());
    Ok(0)
}

pub fn separability(config_path: &Path, o: Overrides) -> Result<u8, Failure> {
    let p = prepare(config_path, o)?;
    let (s, section) = frames(&p)?;
    let r = analyze(&section, &s, &p.spec, &p.tol).map_err(core_failure)?.report;
    println!("classification: {}", r.classification.as_str());
    println!("max_commutator: {:.6e}", r.max_commutator);
    println!("separation_residual: {:.6e}", r.separation_residual);
    println!("product_residual: {:.6e}", r.product_residual);
    println!("in_phase_margin: {:.6e}", r.in_phase_margin);
    Ok(if r.classification.is_separable() { 0 } else { 1 })
}

fn header(prefix: &str, m: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(2 * m * m);
    for j in 1..=m {
        for k in 1..=m {
            out.push(format!("{prefix}_{j}{k}_re"));
            out.push(format!("{prefix}_{j}{k}_im"));
        }
    }
    out
}

fn flatten(row: &mut Vec<String>, mat: &subspace_holonomy::ComplexMatrix) {
    for j in 0..mat.nrows() {
        for k in 0..mat.ncols() {
            row.push(mat[(j, k)].re.to_string());
            row.push(mat[(j, k)].im.to_string());
        }
    }
}

pub fn export(config_path: &Path, out: &Path, o: Overrides) -> Result<u8, Failure> {
    let p = prepare(config_path, o)?;
    let (s, section) = frames(&p)?;
    let d = analyze(&section, &s, &p.spec, &p.tol).map_err(core_failure)?;
    let m = p.psi0.ncols();
    let io = |e: csv::Error| Failure::Io(format!("cannot write {}: {e}", out.display()));
    let mut w = csv::Writer::from_path(out).map_err(io)?;
    let mut head = vec!["t".to_string()];
    for prefix in ["A", "K", "W", "O"] {
        head.extend(header(prefix, m));
    }
    w.write_record(&head).map_err(io)?;
    let g = &d.generators;
    for (k, t) in p.grid.times().iter().enumerate() {
        let mut row = vec![t.to_string()];
        for mat in [&g.a_mats[k], &g.k_mats[k], &d.w_direct[k], &d.overlaps[k]] {
            flatten(&mut row, mat);
        }
        w.write_record(&row).map_err(io)?;
    }
    w.flush()
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", out.display())))?;
    Ok(0)
}

pub fn gauge_check(config_path: &Path, gauge_seed: u64, o: Overrides) -> Result<u8, Failure> {
    let p = prepare(config_path, o)?;
    let (s, section) = frames(&p)?;
    let m = p.psi0.ncols();
    let vpath = random::closed_gauge(gauge_seed, &p.grid, m, GAUGE_STRENGTH, &p.tol)
        .map_err(core_failure)?;
    let cmp = gauge_comparison(&section, &s, &p.spec, &vpath, &p.tol).map_err(core_failure)?;
    println!("gauge seed: {gauge_seed}");
    println!("original classification: {}", cmp.original.as_str());
    println!("transformed classification: {}", cmp.transformed.as_str());
    println!("W(tau) deviation [Anandan]: {:.3e}", cmp.w_deviation);
    println!("W(tau) deviation [frames]: {:.3e}", cmp.w_direct_deviation);
    println!("holonomic factor deviation: {:.3e}", cmp.holonomic_deviation);
    let ok = cmp.verdict_unchanged() && cmp.max_deviation() <= GAUGE_TOL;
    println!("covariance: {}", if ok { "holds" } else { "VIOLATED" });
    if !ok {
        eprintln!(
            "error: covariance violated (max deviation {:.3e}, tolerance {GAUGE_TOL:e})",
            cmp.max_deviation()
        );
    }
    Ok(if ok { 0 } else { 1 })
}
