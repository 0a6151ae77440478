//! Closed-form results for the three-level Λ system driven by a square
//! pulse pair, used as oracles for the numerical pipeline.
//!
//! Basis ordering is `{|1⟩, |2⟩, |3⟩}`. With laser parameters `ω₁, ω₂`
//! (`|ω₁|² + |ω₂|² = 1`) the bright and dark states are
//! `|b⟩ = ω₁*|1⟩ + ω₂*|2⟩` and `|d⟩ = −ω₂|1⟩ + ω₁|2⟩`. Inside the
//! `{|3⟩, |b⟩}` plane the Hamiltonian reads `δ·1 + φ̇(cos γ Z + sin γ X)`,
//! with `tan γ = Ω₀/δ` and `φ̇ = √(δ² + Ω₀²)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::codec;
use crate::dynamics::{HamiltonianSpec, TimeGrid};
use crate::error::{Error, Result};
use crate::frames::SectionRule;
use crate::matkit::{c, from_diagonal, identity, pauli_x, pauli_z, ComplexMatrix, C64, I};

/// Missing fields take their [`Default`] values when deserializing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaParams {
    /// Rabi amplitude Ω₀ (rad/s).
    pub omega0: f64,
    /// Common detuning δ (rad/s).
    pub delta: f64,
    #[serde(with = "codec::complex")]
    pub omega1: C64,
    #[serde(with = "codec::complex")]
    pub omega2: C64,
    /// Pulse duration τ (s).
    pub tau: f64,
    /// Mixing angle η of the case-(iii) initial frame.
    pub eta: f64,
}

impl Default for LambdaParams {
    /// δ = 1, Ω₀ = √3 (γ = π/3), η = π/3, τ = π/2 so that φ_τ = π.
    fn default() -> Self {
        Self {
            omega0: 3f64.sqrt(),
            delta: 1.0,
            omega1: c(1.0, 0.0),
            omega2: c(0.0, 0.0),
            tau: std::f64::consts::FRAC_PI_2,
            eta: std::f64::consts::FRAC_PI_3,
        }
    }
}

impl LambdaParams {
    pub fn validate(&self, tol: f64) -> Result<()> {
        let norm = self.omega1.norm_sqr() + self.omega2.norm_sqr();
        if !((norm - 1.0).abs() <= tol) {
            return Err(Error::InvalidParameters(format!(
                "|omega1|^2 + |omega2|^2 = {norm}, expected 1"
            )));
        }
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "omega0 must be positive, got {}",
                self.omega0
            )));
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParameters("delta must be finite".into()));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.eta) {
            return Err(Error::InvalidParameters(format!(
                "eta must lie in [0, pi], got {}",
                self.eta
            )));
        }
        Ok(())
    }

    /// `γ = atan2(Ω₀, δ)`, continuous through δ = 0.
    pub fn gamma(&self) -> f64 {
        self.omega0.atan2(self.delta)
    }

    /// `φ̇ = √(δ² + Ω₀²)`.
    pub fn phidot(&self) -> f64 {
        self.delta.hypot(self.omega0)
    }

    /// Precession angle at time `t`.
    pub fn phi(&self, t: f64) -> f64 {
        self.phidot() * t
    }

    pub fn spec(&self, tol: f64) -> Result<HamiltonianSpec> {
        self.validate(tol)?;
        HamiltonianSpec::lambda(self.omega0, self.delta, self.omega1, self.omega2, tol)
    }
}

pub fn bright_state(omega1: C64, omega2: C64) -> DVector<C64> {
    DVector::from_column_slice(&[omega1.conj(), omega2.conj(), c(0.0, 0.0)])
}

pub fn dark_state(omega1: C64, omega2: C64) -> DVector<C64> {
    DVector::from_column_slice(&[-omega2, omega1, c(0.0, 0.0)])
}

pub fn excited_state() -> DVector<C64> {
    DVector::from_column_slice(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
}

/// `Ω₀(|3⟩⟨b| + |b⟩⟨3|) + 2δ|3⟩⟨3|` without parameter validation.
pub fn coupling_matrix(omega0: f64, delta: f64, omega1: C64, omega2: C64) -> ComplexMatrix {
    let b = bright_state(omega1, omega2);
    let e = excited_state();
    let coupling = &e * b.adjoint() + &b * e.adjoint();
    coupling.scale(omega0) + (&e * e.adjoint()).scale(2.0 * delta)
}

pub fn lambda_hamiltonian(p: &LambdaParams, tol: f64) -> Result<ComplexMatrix> {
    p.validate(tol)?;
    Ok(coupling_matrix(p.omega0, p.delta, p.omega1, p.omega2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigensystem {
    pub gamma: f64,
    pub phidot: f64,
    /// `[0, δ + φ̇, δ − φ̇]`
    pub energies: [f64; 3],
    /// `[|d⟩, |v₁⟩, |v₂⟩]`
    pub vectors: [DVector<C64>; 3],
}

pub fn eigensystem(p: &LambdaParams) -> Result<Eigensystem> {
    if p.omega0 == 0.0 && p.delta == 0.0 {
        return Err(Error::InvalidParameters(
            "gamma undefined for omega0 = delta = 0".into(),
        ));
    }
    let gamma = p.gamma();
    let phidot = p.phidot();
    let b = bright_state(p.omega1, p.omega2);
    let e = excited_state();
    let (sh, ch) = (0.5 * gamma).sin_cos();
    let v1 = e.scale(ch) + b.scale(sh);
    let v2 = e.scale(-sh) + b.scale(ch);
    Ok(Eigensystem {
        gamma,
        phidot,
        energies: [0.0, p.delta + phidot, p.delta - phidot],
        vectors: [dark_state(p.omega1, p.omega2), v1, v2],
    })
}

/// Case (i): `𝕌(τ,0) = e^{−iδτ} exp(−iφ_τ(sin γ X + cos γ Z))` in the
/// ordered frame `{|3⟩, |b⟩}`.
pub fn case_i_analytic(p: &LambdaParams) -> ComplexMatrix {
    let (sg, cg) = p.gamma().sin_cos();
    let (sp, cp) = p.phi(p.tau).sin_cos();
    let axis = pauli_x().scale(sg) + pauli_z().scale(cg);
    let rotation = identity(2).scale(cp) - axis * (I * sp);
    rotation * (-I * (p.delta * p.tau)).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseIiAnalytic {
    /// `diag(1, √(1 − sin²γ sin²φ_τ))`
    pub overlap: ComplexMatrix,
    pub w: ComplexMatrix,
}

/// Case (ii): endpoint overlap and frame-change matrix for the dark/bright
/// frame with the phase-anchored section.
///
/// `W₂₂ = e^{i(α − φ_τ cos γ)}` where `e^{iα}` is the phase of
/// `cos φ_τ + i cos γ sin φ_τ`; this is the value obtained by integrating
/// the connection of the phase-anchored section and equals
/// `e^{−iπ(1 + cos γ)}` at the cyclic point φ_τ = π.
pub fn case_ii_analytic(p: &LambdaParams) -> Result<CaseIiAnalytic> {
    let (sg, cg) = p.gamma().sin_cos();
    let phi = p.phi(p.tau);
    let (sp, cp) = phi.sin_cos();
    let bracket = c(cp, cg * sp);
    let modulus = bracket.norm();
    if !(modulus > 1e-12) {
        return Err(Error::SectionPrecondition(format!(
            "anchor overlap collapses at phi_tau = {phi} (sin gamma = {sg})"
        )));
    }
    let w22 = bracket / modulus * (-I * (phi * cg)).exp();
    debug_assert!((modulus - (1.0 - sg * sg * sp * sp).max(0.0).sqrt()).abs() < 1e-12);
    Ok(CaseIiAnalytic {
        overlap: from_diagonal(&[c(1.0, 0.0), c(modulus, 0.0)]),
        w: from_diagonal(&[c(1.0, 0.0), w22]),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseIiiAnalytic {
    /// `A₂₂(t)` on the supplied grid (purely imaginary).
    pub a22: Vec<C64>,
    /// `K₂₂ = −i(δ + φ̇ cos η)`, constant.
    pub k22: C64,
    /// `g(t) = K₂₂/A₂₂`; `None` where `A₂₂` vanishes.
    pub g: Vec<Option<f64>>,
    pub overlap: ComplexMatrix,
    pub holonomic: ComplexMatrix,
    pub dynamical: ComplexMatrix,
    pub w: ComplexMatrix,
}

/// Case (iii): frame `{|d⟩, cos(η/2)|v₁⟩ + sin(η/2)|v₂⟩}` with the
/// phase-anchored section. `A₂₂` is evaluated directly from
/// `⟨φ̇₂|φ₂⟩`, giving `A₂₂ = i(β̇ + φ̇ cos η)` with `e^{iβ}` the phase of
/// `cos φ − i cos η sin φ`.
pub fn case_iii_analytic(p: &LambdaParams, grid: &TimeGrid) -> Result<CaseIiiAnalytic> {
    let (se, ce) = p.eta.sin_cos();
    let phidot = p.phidot();
    let bracket = |t: f64| {
        let (sp, cp) = p.phi(t).sin_cos();
        c(cp, -ce * sp)
    };
    let a22: Vec<C64> = grid
        .times()
        .iter()
        .map(|&t| {
            let r2 = bracket(t).norm_sqr();
            if !(r2 > 1e-24) {
                return Err(Error::SectionPrecondition(format!(
                    "anchor overlap collapses at t = {t} (sin eta = {se})"
                )));
            }
            let beta_dot = -phidot * ce / r2;
            Ok(I * (beta_dot + phidot * ce))
        })
        .collect::<Result<_>>()?;
    let k22 = -I * (p.delta + phidot * ce);
    let scale = phidot.max(p.delta.abs()).max(1.0);
    let g = a22
        .iter()
        .map(|a| (a.im.abs() > 1e-12 * scale).then(|| k22.im / a.im))
        .collect();

    let end = bracket(p.tau);
    let modulus = end.norm();
    if !(modulus > 1e-12) {
        return Err(Error::SectionPrecondition("anchor overlap collapses at tau".into()));
    }
    let phi_tau = p.phi(p.tau);
    let hol22 = end / modulus * (I * (phi_tau * ce)).exp();
    let dyn22 = (-I * (p.delta * p.tau + phi_tau * ce)).exp();
    let one = c(1.0, 0.0);
    Ok(CaseIiiAnalytic {
        a22,
        k22,
        g,
        overlap: from_diagonal(&[one, c(modulus, 0.0)]),
        holonomic: from_diagonal(&[one, hol22]),
        dynamical: from_diagonal(&[one, dyn22]),
        w: from_diagonal(&[one, hol22 * dyn22]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LambdaCase {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    Ii,
    #[serde(rename = "iii")]
    Iii,
}

impl FromStr for LambdaCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" => Ok(Self::I),
            "ii" => Ok(Self::Ii),
            "iii" => Ok(Self::Iii),
            other => Err(Error::InvalidParameters(format!(
                "unknown case '{other}', expected i, ii or iii"
            ))),
        }
    }
}

impl fmt::Display for LambdaCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::I => "i",
            Self::Ii => "ii",
            Self::Iii => "iii",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSetup {
    pub spec: HamiltonianSpec,
    pub psi0: ComplexMatrix,
    pub rule: SectionRule,
}

/// Initial frame for the chosen case.
pub fn initial_frame(which: LambdaCase, p: &LambdaParams) -> Result<ComplexMatrix> {
    let b = bright_state(p.omega1, p.omega2);
    let d = dark_state(p.omega1, p.omega2);
    let columns = match which {
        LambdaCase::I => [excited_state(), b],
        LambdaCase::Ii => [d, b],
        LambdaCase::Iii => {
            let eig = eigensystem(p)?;
            let (s, co) = (0.5 * p.eta).sin_cos();
            let second = eig.vectors[1].scale(co) + eig.vectors[2].scale(s);
            [d, second]
        }
    };
    Ok(ComplexMatrix::from_columns(&columns))
}

/// Hamiltonian, initial 2-frame and section rule for case (i), (ii) or (iii).
pub fn case_setup(which: LambdaCase, p: &LambdaParams, tol: f64) -> Result<CaseSetup> {
    let spec = p.spec(tol)?;
    let psi0 = initial_frame(which, p)?;
    let rule = match which {
        LambdaCase::I => SectionRule::Fixed(psi0.clone()),
        LambdaCase::Ii | LambdaCase::Iii => SectionRule::PhaseAnchored,
    };
    Ok(CaseSetup { spec, psi0, rule })
}
