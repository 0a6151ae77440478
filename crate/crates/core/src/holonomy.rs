//! Connection A(t), dynamical matrix K(t), the Anandan equation
//! `Ẇ = (A + K) W`, ordered exponentials and separability analysis.
//!
//! Ordering convention: a forward-ordered product places later slices on
//! the left (it solves `Ẋ = M X`); a reverse-ordered product places them on
//! the right (it solves `Ẋ = X M`).

use serde::{Deserialize, Serialize};

use crate::codec;
use crate::dynamics::{
    projector_path, propagate_frame, restricted_generator_path, FramePath, Hamiltonian, TimeGrid,
};
use crate::error::{Error, Result};
use crate::frames::{self, build_section, SectionPath, SectionRule};
use crate::matkit::{
    anti_hermitian_part, anti_hermitian_residual, distance, expm_skew, identity,
    ComplexMatrix, Tolerances, I,
};

/// Most grid points used on each axis of the commutator scan.
pub const COMMUTATOR_SAMPLES: usize = 64;

/// A(t), K(t) and 𝔽(t) sampled on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorPath {
    pub grid: TimeGrid,
    pub a_mats: Vec<ComplexMatrix>,
    pub k_mats: Vec<ComplexMatrix>,
    pub f_mats: Vec<ComplexMatrix>,
}

impl GeneratorPath {
    pub fn new(
        grid: TimeGrid,
        a_mats: Vec<ComplexMatrix>,
        k_mats: Vec<ComplexMatrix>,
        f_mats: Vec<ComplexMatrix>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = grid.len();
        if a_mats.len() != n || k_mats.len() != n || f_mats.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "generator lengths {}/{}/{} for {n} grid points",
                a_mats.len(),
                k_mats.len(),
                f_mats.len()
            )));
        }
        let band = tol.structural_band();
        for m in a_mats.iter().chain(&k_mats).chain(&f_mats) {
            let residual = anti_hermitian_residual(m);
            if residual > band {
                return Err(Error::NotAntiHermitian { residual, tol: band });
            }
        }
        Ok(Self {
            grid,
            a_mats,
            k_mats,
            f_mats,
        })
    }

    pub fn rank(&self) -> usize {
        self.a_mats[0].nrows()
    }

    /// `A(t) + K(t)` per grid point.
    pub fn total(&self) -> Vec<ComplexMatrix> {
        self.a_mats
            .iter()
            .zip(&self.k_mats)
            .map(|(a, k)| a + k)
            .collect()
    }
}

/// Second-order derivative weights `(w_prev, w_here, w_next)` at interior
/// point `k` of a possibly non-uniform grid, and one-sided three-point
/// weights at the ends.
fn derivative_weights(t: &[f64], k: usize) -> [(usize, f64); 3] {
    let n = t.len();
    if k == 0 {
        let (h1, h2) = (t[1] - t[0], t[2] - t[1]);
        [
            (0, -(2.0 * h1 + h2) / (h1 * (h1 + h2))),
            (1, (h1 + h2) / (h1 * h2)),
            (2, -h1 / (h2 * (h1 + h2))),
        ]
    } else if k == n - 1 {
        let (h1, h2) = (t[n - 2] - t[n - 3], t[n - 1] - t[n - 2]);
        [
            (n - 3, h2 / (h1 * (h1 + h2))),
            (n - 2, -(h1 + h2) / (h1 * h2)),
            (n - 1, (2.0 * h2 + h1) / (h2 * (h1 + h2))),
        ]
    } else {
        let (h1, h2) = (t[k] - t[k - 1], t[k + 1] - t[k]);
        [
            (k - 1, -h2 / (h1 * (h1 + h2))),
            (k, (h2 - h1) / (h1 * h2)),
            (k + 1, h1 / (h2 * (h1 + h2))),
        ]
    }
}

/// `A_jk(t) = ⟨φ̇_j(t)|φ_k(t)⟩` from second-order finite differences of the
/// section columns, projected onto anti-Hermitian matrices.
pub fn connection_path(section: &SectionPath) -> Result<Vec<ComplexMatrix>> {
    let path = section.path();
    let t = path.grid().times();
    if t.len() < 3 {
        return Err(Error::InvalidGrid(format!(
            "connection needs at least 3 grid points, got {}",
            t.len()
        )));
    }
    let frames = path.frames();
    Ok((0..t.len())
        .map(|k| {
            let mut deriv = ComplexMatrix::zeros(path.dimension(), path.rank());
            for (idx, w) in derivative_weights(t, k) {
                deriv += frames[idx].scale(w);
            }
            anti_hermitian_part(&(deriv.adjoint() * &frames[k]))
        })
        .collect())
}

/// `K_jk(t) = −i⟨φ_j(t)|H(t)|φ_k(t)⟩` per grid point.
pub fn k_path<H: Hamiltonian + ?Sized>(
    section: &SectionPath,
    h: &H,
) -> Result<Vec<ComplexMatrix>> {
    let path = section.path();
    if path.dimension() != h.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "section dimension {} vs Hamiltonian dimension {}",
            path.dimension(),
            h.dimension()
        )));
    }
    path.frames()
        .iter()
        .zip(path.grid().times())
        .map(|(l, &t)| Ok(anti_hermitian_part(&(l.adjoint() * h.at(t)? * l * (-I)))))
        .collect()
}

/// Assembles A, K (from the section) and 𝔽 (from the Schrödinger frame).
pub fn generator_path<H: Hamiltonian + ?Sized>(
    section: &SectionPath,
    schrodinger: &FramePath,
    h: &H,
    tol: &Tolerances,
) -> Result<GeneratorPath> {
    if !section.path().grid().same_as(schrodinger.grid()) {
        return Err(Error::InvalidGrid("section and Schrödinger grids differ".into()));
    }
    let a = connection_path(section)?;
    let k = k_path(section, h)?;
    let f = restricted_generator_path(h, schrodinger)?;
    GeneratorPath::new(schrodinger.grid().clone(), a, k, f, tol)
}

/// `max_t ||K(t)W(t) − W(t)𝔽(t)||_F`.
pub fn kw_wf_residual(generators: &GeneratorPath, w: &[ComplexMatrix]) -> Result<f64> {
    if w.len() != generators.grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} W matrices for {} grid points",
            w.len(),
            generators.grid.len()
        )));
    }
    Ok(generators
        .k_mats
        .iter()
        .zip(&generators.f_mats)
        .zip(w)
        .map(|((k, f), w)| (k * w - w * f).norm())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeOrdering {
    /// Later slices on the left.
    Forward,
    /// Later slices on the right.
    Reverse,
}

fn midpoint_slice(
    mats: &[ComplexMatrix],
    times: &[f64],
    k: usize,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    let dt = times[k + 1] - times[k];
    let mid = (&mats[k] + &mats[k + 1]).scale(0.5 * dt);
    expm_skew(&mid, tol.structural_band())
}

/// Time-ordered exponential of a sampled anti-Hermitian path, built from
/// midpoint-exponential slices.
pub fn ordered_factor(
    mats: &[ComplexMatrix],
    grid: &TimeGrid,
    direction: TimeOrdering,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    if mats.len() != grid.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} matrices for {} grid points",
            mats.len(),
            grid.len()
        )));
    }
    let times = grid.times();
    let mut acc = identity(mats[0].nrows());
    for k in 0..times.len() - 1 {
        let slice = midpoint_slice(mats, times, k, tol)?;
        acc = match direction {
            TimeOrdering::Forward => slice * acc,
            TimeOrdering::Reverse => acc * slice,
        };
    }
    Ok(acc)
}

/// Integrates the Anandan equation from `W(0) = I`, returning W at every
/// grid point.
pub fn solve_anandan(generators: &GeneratorPath, tol: &Tolerances) -> Result<Vec<ComplexMatrix>> {
    let total = generators.total();
    let times = generators.grid.times();
    let mut out = Vec::with_capacity(times.len());
    out.push(identity(generators.rank()));
    for k in 0..times.len() - 1 {
        let slice = midpoint_slice(&total, times, k, tol)?;
        let next = slice * out.last().unwrap();
        out.push(next);
    }
    Ok(out)
}

/// `G = T→ exp ∫A` and `D = T← exp ∫𝔽`, whose product reproduces W(τ).
pub fn yu_tong_factors(
    generators: &GeneratorPath,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let g = ordered_factor(&generators.a_mats, &generators.grid, TimeOrdering::Forward, tol)?;
    let d = ordered_factor(&generators.f_mats, &generators.grid, TimeOrdering::Reverse, tol)?;
    Ok((g, d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// Stationary subspace; evolution is purely dynamical.
    CaseI,
    /// K(t) = 0; evolution is purely holonomic.
    CaseIi,
    /// A and K share a time-independent eigenprojector family.
    CaseIii,
    NonSeparable,
}

impl Classification {
    pub fn is_separable(self) -> bool {
        self != Self::NonSeparable
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::CaseI => "case_i",
            Self::CaseIi => "case_ii",
            Self::CaseIii => "case_iii",
            Self::NonSeparable => "non_separable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSummary {
    pub tau: f64,
    pub steps: usize,
}

/// Endpoint decomposition of the subspace evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionReport {
    /// O(0,τ)
    #[serde(with = "codec::matrix")]
    pub overlap: ComplexMatrix,
    /// W(τ) from integrating the Anandan equation.
    #[serde(with = "codec::matrix")]
    pub w_final: ComplexMatrix,
    /// W(τ) read off the frames, `L(τ)† S(τ)`.
    #[serde(with = "codec::matrix")]
    pub w_direct: ComplexMatrix,
    /// T→ exp ∫A
    #[serde(with = "codec::matrix")]
    pub holonomic_factor: ComplexMatrix,
    /// T→ exp ∫K
    #[serde(with = "codec::matrix")]
    pub dynamical_factor: ComplexMatrix,
    #[serde(with = "codec::matrix")]
    pub g_factor: ComplexMatrix,
    #[serde(with = "codec::matrix")]
    pub d_factor: ComplexMatrix,
    /// max over sampled (t, t′) of `||[A(t), K(t′)]||_F`
    pub max_commutator: f64,
    /// `||W(τ) − Hol·Dyn||_F`
    pub separation_residual: f64,
    /// `||W(τ) − G·D||_F`
    pub product_residual: f64,
    pub classification: Classification,
    /// 𝕌(τ,0) = O(0,τ) W(τ)
    #[serde(with = "codec::matrix")]
    pub time_evolution: ComplexMatrix,
    pub in_phase_margin: f64,
    pub grid: GridSummary,
}

/// Everything computed on the way to a [`DecompositionReport`], kept for
/// trajectory export and diagnostics.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub report: DecompositionReport,
    pub generators: GeneratorPath,
    pub overlaps: Vec<ComplexMatrix>,
    pub w_direct: Vec<ComplexMatrix>,
    pub w_anandan: Vec<ComplexMatrix>,
}

impl Decomposition {
    /// `max_t ||K W − W 𝔽||` on the frame-derived W path.
    pub fn kw_wf_residual(&self) -> f64 {
        kw_wf_residual(&self.generators, &self.w_direct).unwrap_or(f64::INFINITY)
    }

    /// `max_t ||S(0)†S(t) − O(0,t) W(t)||`.
    pub fn reconstruction_residual(&self, schrodinger: &FramePath) -> f64 {
        let s0 = schrodinger.first().adjoint();
        schrodinger
            .frames()
            .iter()
            .zip(&self.overlaps)
            .zip(&self.w_direct)
            .map(|((s, o), w)| (&s0 * s - o * w).norm())
            .fold(0.0, f64::max)
    }

    /// `max_t ||W†W − I||` over the frame-derived W path.
    pub fn w_unitarity_residual(&self) -> f64 {
        self.w_direct
            .iter()
            .map(crate::matkit::orthonormality_residual)
            .fold(0.0, f64::max)
    }
}

/// Up to `COMMUTATOR_SAMPLES` evenly spread indices, always including both
/// endpoints.
pub fn sample_indices(n: usize) -> Vec<usize> {
    if n <= COMMUTATOR_SAMPLES {
        return (0..n).collect();
    }
    let last = n - 1;
    let mut idx: Vec<usize> = (0..COMMUTATOR_SAMPLES)
        .map(|i| (i * last + (COMMUTATOR_SAMPLES - 1) / 2) / (COMMUTATOR_SAMPLES - 1))
        .collect();
    idx[0] = 0;
    idx[COMMUTATOR_SAMPLES - 1] = last;
    idx.dedup();
    idx
}

/// `max ||[X(t_i), Y(t_j)]||_F` over the sampled index pairs.
pub fn max_cross_commutator(xs: &[ComplexMatrix], ys: &[ComplexMatrix]) -> f64 {
    let idx = sample_indices(xs.len().min(ys.len()));
    let mut worst = 0.0f64;
    for &i in &idx {
        for &j in &idx {
            let (x, y) = (&xs[i], &ys[j]);
            worst = worst.max((x * y - y * x).norm());
        }
    }
    worst
}

fn classify<H: Hamiltonian + ?Sized>(
    schrodinger: &FramePath,
    h: &H,
    generators: &GeneratorPath,
    max_commutator: f64,
    tol: &Tolerances,
) -> Result<Classification> {
    let sep = tol.separation_tol;

    let projectors = projector_path(schrodinger);
    let drift = projectors
        .iter()
        .map(|p| distance(p, &projectors[0]))
        .fold(0.0, f64::max);
    let mut rate = 0.0f64;
    for (p, &t) in projectors.iter().zip(schrodinger.grid().times()) {
        let ht = h.at(t)?;
        rate = rate.max((p * &ht - &ht * p).norm());
    }
    if drift <= sep && rate <= sep {
        return Ok(Classification::CaseI);
    }

    let k_max = generators
        .k_mats
        .iter()
        .map(|k| k.norm())
        .fold(0.0, f64::max);
    if k_max <= sep {
        return Ok(Classification::CaseIi);
    }

    // The restricted generators transform by a constant conjugation under
    // closed gauge changes, so a commuting 𝔽 family is a gauge-independent
    // witness of a shared eigenprojector family.
    let f_commutator = max_cross_commutator(&generators.f_mats, &generators.f_mats);
    if max_commutator <= sep || f_commutator <= sep {
        return Ok(Classification::CaseIii);
    }
    Ok(Classification::NonSeparable)
}

/// Full pipeline from a section and its Schrödinger frame to the endpoint
/// decomposition. Refuses sections whose endpoint overlap is not in phase,
/// since O(0,τ) and W(τ) are then not the polar factors of 𝕌(τ,0).
pub fn decompose<H: Hamiltonian + ?Sized>(
    section: &SectionPath,
    schrodinger: &FramePath,
    h: &H,
    tol: &Tolerances,
) -> Result<Decomposition> {
    tol.validate()?;
    if !section.is_in_phase(tol) {
        return Err(Error::InPhaseViolation {
            margin: section.in_phase_margin(),
        });
    }
    analyze(section, schrodinger, h, tol)
}

/// Same computation as [`decompose`] without the in-phase requirement.
/// A, K, W and the ordered factors are defined for any section, so the
/// separability question can be asked of any of them.
pub fn analyze<H: Hamiltonian + ?Sized>(
    section: &SectionPath,
    schrodinger: &FramePath,
    h: &H,
    tol: &Tolerances,
) -> Result<Decomposition> {
    tol.validate()?;
    let generators = generator_path(section, schrodinger, h, tol)?;
    let grid = &generators.grid;
    let w_direct = frames::w_path(section, schrodinger, tol)?;
    let overlaps = frames::overlap_path(section);
    let w_anandan = solve_anandan(&generators, tol)?;

    let holonomic = ordered_factor(&generators.a_mats, grid, TimeOrdering::Forward, tol)?;
    let dynamical = ordered_factor(&generators.k_mats, grid, TimeOrdering::Forward, tol)?;
    let (g, d) = yu_tong_factors(&generators, tol)?;

    let w_final = w_anandan.last().unwrap().clone();
    let max_commutator = max_cross_commutator(&generators.a_mats, &generators.k_mats);
    let separation_residual = distance(&w_final, &(&holonomic * &dynamical));
    let product_residual = distance(&w_final, &(&g * &d));
    let classification = classify(schrodinger, h, &generators, max_commutator, tol)?;
    let overlap = overlaps.last().unwrap().clone();
    let w_end = w_direct.last().unwrap().clone();
    let time_evolution = &overlap * &w_end;

    let report = DecompositionReport {
        overlap,
        w_final,
        w_direct: w_end,
        holonomic_factor: holonomic,
        dynamical_factor: dynamical,
        g_factor: g,
        d_factor: d,
        max_commutator,
        separation_residual,
        product_residual,
        classification,
        time_evolution,
        in_phase_margin: section.in_phase_margin(),
        grid: GridSummary {
            tau: grid.tau(),
            steps: grid.steps(),
        },
    };
    Ok(Decomposition {
        report,
        generators,
        overlaps,
        w_direct,
        w_anandan,
    })
}

/// Separability analysis of W(τ) for the given section. The in-phase
/// margin is reported, not enforced.
pub fn separability_report<H: Hamiltonian + ?Sized>(
    section: &SectionPath,
    schrodinger: &FramePath,
    h: &H,
    tol: &Tolerances,
) -> Result<DecompositionReport> {
    analyze(section, schrodinger, h, tol).map(|d| d.report)
}

/// Convenience: propagate, build the section and decompose in one call.
pub fn run_pipeline<H: Hamiltonian + ?Sized>(
    h: &H,
    psi0: &ComplexMatrix,
    rule: SectionRule,
    grid: &TimeGrid,
    tol: &Tolerances,
) -> Result<(FramePath, SectionPath, Decomposition)> {
    let schrodinger = propagate_frame(h, psi0, grid, tol)?;
    let section = build_section(rule, &schrodinger, tol)?;
    let decomposition = decompose(&section, &schrodinger, h, tol)?;
    Ok((schrodinger, section, decomposition))
}

/// `H(t) − ḟ(t)·1`.
pub struct Shifted<'a, H: ?Sized, F> {
    pub inner: &'a H,
    pub f_dot: F,
}

impl<H: Hamiltonian + ?Sized, F: Fn(f64) -> f64> Hamiltonian for Shifted<'_, H, F> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn at(&self, t: f64) -> Result<ComplexMatrix> {
        let n = self.inner.dimension();
        Ok(self.inner.at(t)? - identity(n).scale((self.f_dot)(t)))
    }
}

/// Builds `φ_j(t) = e^{if(t)} ψ_j(t)` and compares it with the Schrödinger
/// frame of `H(t) − ḟ(t)·1`, returning `max_t ||W(t) − I||_F`. The phase
/// `f` is accumulated from `ḟ` at step midpoints, `f(0) = 0`.
pub fn trivial_shift_check<H, F>(
    h: &H,
    psi0: &ComplexMatrix,
    f_dot: F,
    grid: &TimeGrid,
    tol: &Tolerances,
) -> Result<f64>
where
    H: Hamiltonian + ?Sized,
    F: Fn(f64) -> f64,
{
    let schrodinger = propagate_frame(h, psi0, grid, tol)?;
    let times = grid.times();
    let mut f = Vec::with_capacity(times.len());
    f.push(0.0);
    for w in times.windows(2) {
        let prev = *f.last().unwrap();
        f.push(prev + f_dot(0.5 * (w[0] + w[1])) * (w[1] - w[0]));
    }
    let section: Vec<ComplexMatrix> = schrodinger
        .frames()
        .iter()
        .zip(&f)
        .map(|(s, &fk)| s * (I * fk).exp())
        .collect();
    let shifted = Shifted { inner: h, f_dot };
    let reference = propagate_frame(&shifted, psi0, grid, tol)?;
    let m = psi0.ncols();
    Ok(section
        .iter()
        .zip(reference.frames())
        .map(|(l, s)| (l.adjoint() * s - identity(m)).norm())
        .fold(0.0, f64::max))
}

/// Outcome of re-running a decomposition in a transformed gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeComparison {
    pub original: Classification,
    pub transformed: Classification,
    /// `||W̄(τ) − V(0)† W(τ) V(0)||_F` for the Anandan solution.
    pub w_deviation: f64,
    /// Same comparison for the frame-derived W(τ).
    pub w_direct_deviation: f64,
    /// `||Hol̄ − V(0)† Hol V(0)||_F`.
    pub holonomic_deviation: f64,
}

impl GaugeComparison {
    pub fn max_deviation(&self) -> f64 {
        self.w_deviation
            .max(self.w_direct_deviation)
            .max(self.holonomic_deviation)
    }

    pub fn verdict_unchanged(&self) -> bool {
        self.original == self.transformed
    }
}

/// Applies the closed gauge `vpath` to `section`, relabels the Schrödinger
/// frame by the constant `V(0)` so both frames still coincide at t = 0, and
/// compares the two decompositions.
pub fn gauge_comparison<H: Hamiltonian + ?Sized>(
    section: &SectionPath,
    schrodinger: &FramePath,
    h: &H,
    vpath: &[ComplexMatrix],
    tol: &Tolerances,
) -> Result<GaugeComparison> {
    let base = separability_report(section, schrodinger, h, tol)?;
    let transformed_section = frames::gauge_transform(section, vpath, tol)?;
    let v0 = &vpath[0];
    let relabeled = schrodinger.right_multiply(v0);
    let moved = separability_report(&transformed_section, &relabeled, h, tol)?;
    let conj = |m: &ComplexMatrix| v0.adjoint() * m * v0;
    Ok(GaugeComparison {
        original: base.classification,
        transformed: moved.classification,
        w_deviation: distance(&moved.w_final, &conj(&base.w_final)),
        w_direct_deviation: distance(&moved.w_direct, &conj(&base.w_direct)),
        holonomic_deviation: distance(&moved.holonomic_factor, &conj(&base.holonomic_factor)),
    })
}
