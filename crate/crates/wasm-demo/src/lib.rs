//! WebAssembly bindings for the browser demo in `www/`. Each export takes
//! plain numbers and returns a JSON string; the page does the drawing.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use subspace_holonomy::codec;
use subspace_holonomy::dynamics::propagate_frame;
use subspace_holonomy::frames::build_section;
use subspace_holonomy::holonomy::{gauge_comparison, run_pipeline, separability_report};
use subspace_holonomy::lambda::{case_ii_analytic, case_iii_analytic, case_setup, LambdaCase};
use subspace_holonomy::{
    random, ComplexMatrix, LambdaParams, SectionRule, TimeGrid, Tolerances,
};

/// Points kept per curve.
const CURVE_POINTS: usize = 256;
const MAX_STEPS: usize = 20_000;

#[derive(Debug, Serialize)]
pub struct Curves {
    pub t: Vec<f64>,
    /// `O₂₂(0,t)`, real by construction of the phase-anchored section.
    pub overlap_22: Vec<f64>,
    /// `Im A₂₂(t)`
    pub connection_22: Vec<f64>,
    /// `Im K₂₂(t)`
    pub dynamical_22: Vec<f64>,
    pub w22_re: Vec<f64>,
    pub w22_im: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct LambdaRun {
    pub case: String,
    pub gamma: f64,
    pub phi_tau: f64,
    pub classification: String,
    #[serde(with = "codec::matrix")]
    pub w_final: ComplexMatrix,
    #[serde(with = "codec::matrix")]
    pub holonomic: ComplexMatrix,
    #[serde(with = "codec::matrix")]
    pub dynamical: ComplexMatrix,
    /// Closed-form W(τ) where one exists (cases ii and iii).
    pub w_closed_form: Option<codec::RawMatrix>,
    pub closed_form_deviation: Option<f64>,
    pub max_commutator: f64,
    pub separation_residual: f64,
    pub product_residual: f64,
    pub curves: Curves,
}

#[derive(Debug, Serialize)]
pub struct WitnessRun {
    pub seed: u64,
    pub classification: String,
    pub max_commutator: f64,
    pub separation_residual: f64,
    pub product_residual: f64,
    pub in_phase_margin: f64,
}

#[derive(Debug, Serialize)]
pub struct GaugeRun {
    pub seed: u64,
    pub original: String,
    pub transformed: String,
    pub w_deviation: f64,
    pub holonomic_deviation: f64,
}

fn parse_case(case: &str) -> Result<LambdaCase, String> {
    case.parse().map_err(|e: subspace_holonomy::Error| e.to_string())
}

fn check_steps(steps: usize) -> Result<(), String> {
    if !(3..=MAX_STEPS).contains(&steps) {
        return Err(format!("steps must lie in 3..={MAX_STEPS}"));
    }
    Ok(())
}

fn stride(n: usize) -> usize {
    n.div_ceil(CURVE_POINTS).max(1)
}

pub fn lambda_run(
    case: &str,
    delta: f64,
    omega0: f64,
    eta: f64,
    tau: f64,
    steps: usize,
) -> Result<LambdaRun, String> {
    let which = parse_case(case)?;
    check_steps(steps)?;
    let p = LambdaParams {
        delta,
        omega0,
        eta,
        tau,
        ..LambdaParams::default()
    };
    let tol = Tolerances::default();
    let setup = case_setup(which, &p, tol.structure_tol).map_err(|e| e.to_string())?;
    let grid = TimeGrid::uniform(tau, steps).map_err(|e| e.to_string())?;
    let (_, _, d) = run_pipeline(&setup.spec, &setup.psi0, setup.rule, &grid, &tol)
        .map_err(|e| e.to_string())?;
    let r = &d.report;

    let w_closed_form = match which {
        LambdaCase::I => None,
        LambdaCase::Ii => Some(case_ii_analytic(&p).map_err(|e| e.to_string())?.w),
        LambdaCase::Iii => Some(case_iii_analytic(&p, &grid).map_err(|e| e.to_string())?.w),
    };
    let closed_form_deviation = w_closed_form
        .as_ref()
        .map(|w| subspace_holonomy::matkit::max_abs_deviation(w, &r.w_final));

    let step = stride(grid.len());
    let idx: Vec<usize> = (0..grid.len())
        .step_by(step)
        .chain(std::iter::once(grid.len() - 1))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let g = &d.generators;
    let curves = Curves {
        t: idx.iter().map(|&k| grid.times()[k]).collect(),
        overlap_22: idx.iter().map(|&k| d.overlaps[k][(1, 1)].re).collect(),
        connection_22: idx.iter().map(|&k| g.a_mats[k][(1, 1)].im).collect(),
        dynamical_22: idx.iter().map(|&k| g.k_mats[k][(1, 1)].im).collect(),
        w22_re: idx.iter().map(|&k| d.w_anandan[k][(1, 1)].re).collect(),
        w22_im: idx.iter().map(|&k| d.w_anandan[k][(1, 1)].im).collect(),
    };

    Ok(LambdaRun {
        case: which.to_string(),
        gamma: p.gamma(),
        phi_tau: p.phi(tau),
        classification: r.classification.as_str().into(),
        w_final: r.w_final.clone(),
        holonomic: r.holonomic_factor.clone(),
        dynamical: r.dynamical_factor.clone(),
        w_closed_form: w_closed_form.as_ref().map(codec::matrix_to_raw),
        closed_form_deviation,
        max_commutator: r.max_commutator,
        separation_residual: r.separation_residual,
        product_residual: r.product_residual,
        curves,
    })
}

/// Generic four-level `H₀ + cos(t)H₁` with a random 2-frame.
pub fn witness_run(seed: u64, tau: f64, steps: usize) -> Result<WitnessRun, String> {
    check_steps(steps)?;
    let tol = Tolerances::default();
    let (spec, psi0) = random::driven_instance(seed, 4, 2, tol.structure_tol)
        .map_err(|e| e.to_string())?;
    let grid = TimeGrid::uniform(tau, steps).map_err(|e| e.to_string())?;
    let s = propagate_frame(&spec, &psi0, &grid, &tol).map_err(|e| e.to_string())?;
    let section =
        build_section(SectionRule::PhaseAnchored, &s, &tol).map_err(|e| e.to_string())?;
    let r = separability_report(&section, &s, &spec, &tol).map_err(|e| e.to_string())?;
    Ok(WitnessRun {
        seed,
        classification: r.classification.as_str().into(),
        max_commutator: r.max_commutator,
        separation_residual: r.separation_residual,
        product_residual: r.product_residual,
        in_phase_margin: r.in_phase_margin,
    })
}

/// Default Λ parameters, random closed gauge drawn from `seed`.
pub fn gauge_run(case: &str, seed: u64, steps: usize) -> Result<GaugeRun, String> {
    let which = parse_case(case)?;
    check_steps(steps)?;
    let p = LambdaParams::default();
    let tol = Tolerances::default();
    let setup = case_setup(which, &p, tol.structure_tol).map_err(|e| e.to_string())?;
    let grid = TimeGrid::uniform(p.tau, steps).map_err(|e| e.to_string())?;
    let s = propagate_frame(&setup.spec, &setup.psi0, &grid, &tol).map_err(|e| e.to_string())?;
    let section = build_section(setup.rule, &s, &tol).map_err(|e| e.to_string())?;
    let vpath = random::closed_gauge(seed, &grid, 2, 0.5, &tol).map_err(|e| e.to_string())?;
    let cmp = gauge_comparison(&section, &s, &setup.spec, &vpath, &tol)
        .map_err(|e| e.to_string())?;
    Ok(GaugeRun {
        seed,
        original: cmp.original.as_str().into(),
        transformed: cmp.transformed.as_str().into(),
        w_deviation: cmp.w_deviation,
        holonomic_deviation: cmp.holonomic_deviation,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = lambdaRun)]
pub fn lambda_run_js(
    case: &str,
    delta: f64,
    omega0: f64,
    eta: f64,
    tau: f64,
    steps: usize,
) -> Result<String, JsError> {
    to_js(lambda_run(case, delta, omega0, eta, tau, steps))
}

#[wasm_bindgen(js_name = witnessRun)]
pub fn witness_run_js(seed: u32, tau: f64, steps: usize) -> Result<String, JsError> {
    to_js(witness_run(u64::from(seed), tau, steps))
}

#[wasm_bindgen(js_name = gaugeRun)]
pub fn gauge_run_js(case: &str, seed: u32, steps: usize) -> Result<String, JsError> {
    to_js(gauge_run(case, u64::from(seed), steps))
}
