//! Gauge sections L(t), overlap matrices O(0,t), the frame-change matrix
//! W(t) and gauge transformations.

use crate::dynamics::FramePath;
use crate::error::{Error, Result};
use crate::matkit::{
    self, c, hermitian_residual, min_eigenvalue_hermitian, orthonormality_residual,
    ComplexMatrix, Tolerances,
};

/// How the reference frame L(t) is built from the Schrödinger frame S(t).
#[derive(Debug, Clone, PartialEq)]
pub enum SectionRule {
    /// Time-independent frame; only valid for a stationary subspace.
    Fixed(ComplexMatrix),
    /// Column j is `e^{-iθ_j(t)} ψ_j(t)` with `θ_j(t) = arg⟨ψ_j(0)|ψ_j(t)⟩`.
    PhaseAnchored,
    /// User-supplied frames spanning the Schrödinger subspace.
    Custom(FramePath),
}

impl SectionRule {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Fixed(_) => "fixed",
            Self::PhaseAnchored => "phase_anchored",
            Self::Custom(_) => "custom",
        }
    }
}

/// A constructed section with its endpoint in-phase margin.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionPath {
    path: FramePath,
    rule: SectionRule,
    in_phase_margin: f64,
}

impl SectionPath {
    pub fn path(&self) -> &FramePath {
        &self.path
    }

    pub fn rule(&self) -> &SectionRule {
        &self.rule
    }

    /// Smallest eigenvalue of O(0,τ). Negative when O(0,τ) is not even
    /// Hermitian, in which case it is minus the Hermiticity residual.
    pub fn in_phase_margin(&self) -> f64 {
        self.in_phase_margin
    }

    pub fn is_in_phase(&self, tol: &Tolerances) -> bool {
        self.in_phase_margin > tol.positivity_tol
    }
}

/// `||A A† − B B†||_F` for two N x M frames.
pub fn span_mismatch(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a * a.adjoint() - b * b.adjoint()).norm()
}

fn in_phase_margin(o: &ComplexMatrix, tol: &Tolerances) -> f64 {
    let band = tol.structural_band();
    match min_eigenvalue_hermitian(o, band) {
        Ok(v) => v,
        Err(_) => -hermitian_residual(o),
    }
}

fn check_spans(section: &FramePath, schrodinger: &FramePath, tol: &Tolerances) -> Result<()> {
    if !section.grid().same_as(schrodinger.grid()) {
        return Err(Error::InvalidGrid("section and Schrödinger grids differ".into()));
    }
    if section.frame(0).shape() != schrodinger.frame(0).shape() {
        return Err(Error::DimensionMismatch(format!(
            "section frames {:?} vs Schrödinger frames {:?}",
            section.frame(0).shape(),
            schrodinger.frame(0).shape()
        )));
    }
    let band = tol.structural_band();
    for (k, (l, s)) in section.frames().iter().zip(schrodinger.frames()).enumerate() {
        let mismatch = span_mismatch(l, s);
        if mismatch > band {
            return Err(Error::SectionPrecondition(format!(
                "section leaves the Schrödinger subspace at t = {} (projector mismatch {mismatch:.3e})",
                schrodinger.grid().times()[k]
            )));
        }
    }
    Ok(())
}

/// Builds L(t) from S(t) under `rule`. `L(0) = S(0)` holds exactly for the
/// fixed and phase-anchored rules and within tolerance for custom paths.
pub fn build_section(
    rule: SectionRule,
    schrodinger: &FramePath,
    tol: &Tolerances,
) -> Result<SectionPath> {
    let band = tol.structural_band();
    let s0 = schrodinger.first();
    let path = match &rule {
        SectionRule::Fixed(frame) => {
            if frame.shape() != s0.shape() {
                return Err(Error::DimensionMismatch(format!(
                    "fixed frame {:?} vs Schrödinger frame {:?}",
                    frame.shape(),
                    s0.shape()
                )));
            }
            let residual = orthonormality_residual(frame);
            if residual > band {
                return Err(Error::NotOrthonormal { residual });
            }
            let offset = matkit::distance(frame, s0);
            if offset > band {
                return Err(Error::SectionPrecondition(format!(
                    "fixed frame differs from S(0) by {offset:.3e}"
                )));
            }
            let p0 = frame * frame.adjoint();
            for (k, s) in schrodinger.frames().iter().enumerate() {
                let drift = (s * s.adjoint() - &p0).norm();
                if drift > band {
                    return Err(Error::SectionPrecondition(format!(
                        "fixed section needs a stationary subspace, projector moved by {drift:.3e} at t = {}",
                        schrodinger.grid().times()[k]
                    )));
                }
            }
            FramePath::from_parts_unchecked(
                schrodinger.grid().clone(),
                vec![s0.clone(); schrodinger.grid().len()],
            )
        }
        SectionRule::PhaseAnchored => {
            let mut frames = Vec::with_capacity(schrodinger.grid().len());
            frames.push(s0.clone());
            for (k, s) in schrodinger.frames().iter().enumerate().skip(1) {
                let mut l = s.clone();
                for j in 0..s.ncols() {
                    let z = s0.column(j).dotc(&s.column(j));
                    let modulus = z.norm();
                    if !(modulus > tol.positivity_tol) {
                        return Err(Error::SectionPrecondition(format!(
                            "anchor overlap of column {j} collapses to {modulus:.3e} at t = {}",
                            schrodinger.grid().times()[k]
                        )));
                    }
                    let phase = z.conj() / modulus;
                    for v in l.column_mut(j).iter_mut() {
                        *v *= phase;
                    }
                }
                frames.push(l);
            }
            FramePath::from_parts_unchecked(schrodinger.grid().clone(), frames)
        }
        SectionRule::Custom(custom) => {
            check_spans(custom, schrodinger, tol)?;
            let offset = matkit::distance(custom.first(), s0);
            if offset > band {
                return Err(Error::SectionPrecondition(format!(
                    "custom section starts {offset:.3e} away from S(0)"
                )));
            }
            custom.clone()
        }
    };
    let o_end = path.first().adjoint() * path.last();
    let in_phase_margin = in_phase_margin(&o_end, tol);
    Ok(SectionPath {
        path,
        rule,
        in_phase_margin,
    })
}

/// Anchor phases `θ_j(t) = arg⟨ψ_j(0)|ψ_j(t)⟩`, branch-continued along the
/// grid by keeping each value within π of its predecessor. Indexed
/// `[grid point][column]`.
pub fn anchor_phases(schrodinger: &FramePath) -> Vec<Vec<f64>> {
    let s0 = schrodinger.first();
    let m = s0.ncols();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(schrodinger.grid().len());
    for s in schrodinger.frames() {
        let raw: Vec<f64> = (0..m).map(|j| s0.column(j).dotc(&s.column(j)).arg()).collect();
        let row = match out.last() {
            None => raw,
            Some(prev) => raw
                .iter()
                .zip(prev)
                .map(|(&a, &p)| unwrap_near(a, p))
                .collect(),
        };
        out.push(row);
    }
    out
}

fn unwrap_near(angle: f64, reference: f64) -> f64 {
    use std::f64::consts::TAU;
    angle + TAU * ((reference - angle) / TAU).round()
}

/// `O(0, t_k) = L(0)† L(t_k)`.
pub fn overlap_path(section: &SectionPath) -> Vec<ComplexMatrix> {
    let l0 = section.path.first().adjoint();
    section.path.frames().iter().map(|l| &l0 * l).collect()
}

/// `W_jk(t) = ⟨φ_j(t)|ψ_k(t)⟩` at every grid point.
pub fn w_path(
    section: &SectionPath,
    schrodinger: &FramePath,
    tol: &Tolerances,
) -> Result<Vec<ComplexMatrix>> {
    check_spans(&section.path, schrodinger, tol)?;
    Ok(section
        .path
        .frames()
        .iter()
        .zip(schrodinger.frames())
        .map(|(l, s)| l.adjoint() * s)
        .collect())
}

/// Applies `φ̄_k(t) = Σ_j φ_j(t) V_jk(t)`. `V` must be unitary at every
/// point and closed, `V(τ) = V(0)`. Sections that were not in phase to
/// begin with are transformed anyway, with the margin recomputed.
pub fn gauge_transform(
    section: &SectionPath,
    vpath: &[ComplexMatrix],
    tol: &Tolerances,
) -> Result<SectionPath> {
    let n_points = section.path.grid().len();
    if vpath.len() != n_points {
        return Err(Error::DimensionMismatch(format!(
            "{} gauge matrices for {n_points} grid points",
            vpath.len()
        )));
    }
    let m = section.path.rank();
    let band = tol.structural_band();
    for v in vpath {
        if v.shape() != (m, m) {
            return Err(Error::DimensionMismatch(format!(
                "gauge matrix {:?}, expected {m}x{m}",
                v.shape()
            )));
        }
        let residual = orthonormality_residual(v);
        if residual > band {
            return Err(Error::NotUnitary { residual, tol: band });
        }
    }
    let closure = matkit::distance(&vpath[n_points - 1], &vpath[0]);
    if closure > band {
        return Err(Error::GaugeNotClosed { residual: closure });
    }
    let frames: Vec<ComplexMatrix> = section
        .path
        .frames()
        .iter()
        .zip(vpath)
        .map(|(l, v)| l * v)
        .collect();
    let path = FramePath::from_parts_unchecked(section.path.grid().clone(), frames);
    let o_end = path.first().adjoint() * path.last();
    let margin = in_phase_margin(&o_end, tol);
    // A closed gauge maps O(0,τ) to V(0)†O(0,τ)V(0), so in-phase sections
    // stay in phase; failing here means the closure slack destroyed it.
    if section.is_in_phase(tol) && !(margin > tol.positivity_tol) {
        return Err(Error::InPhaseViolation { margin });
    }
    Ok(SectionPath {
        rule: SectionRule::Custom(path.clone()),
        path,
        in_phase_margin: margin,
    })
}

/// Gauge path `V(t) = V₀ exp(sin(2π t/τ) X)`: smooth, unitary and closed.
pub fn closed_gauge(
    grid: &crate::dynamics::TimeGrid,
    v0: &ComplexMatrix,
    generator: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<Vec<ComplexMatrix>> {
    let tau = grid.tau();
    grid.times()
        .iter()
        .map(|&t| {
            // exact closure at the endpoint instead of sin(2π) roundoff
            let s = if t == tau { 0.0 } else { (std::f64::consts::TAU * t / tau).sin() };
            Ok(v0 * matkit::expm_skew(&(generator * c(s, 0.0)), tol.structural_band())?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{propagate_frame, HamiltonianSpec, TimeGrid};
    use crate::matkit::{identity, max_abs_deviation, pauli_x};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn frame_3x2(cols: [usize; 2]) -> ComplexMatrix {
        ComplexMatrix::from_fn(3, 2, |i, j| if i == cols[j] { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    fn moving_path() -> FramePath {
        let spec = HamiltonianSpec::lambda(1.0, 0.5, c(1.0, 0.0), c(0.0, 0.0), 1e-10).unwrap();
        let grid = TimeGrid::uniform(1.0, 64).unwrap();
        // {|2⟩ = dark, |1⟩ = bright}: the bright column moves
        propagate_frame(&spec, &frame_3x2([1, 0]), &grid, &tol()).unwrap()
    }

    #[test]
    fn phase_anchored_on_static_evolution_is_constant() {
        let spec = HamiltonianSpec::constant(ComplexMatrix::zeros(3, 3), 1e-10).unwrap();
        let grid = TimeGrid::uniform(1.0, 10).unwrap();
        let psi0 = frame_3x2([0, 2]);
        let s = propagate_frame(&spec, &psi0, &grid, &tol()).unwrap();
        let section = build_section(SectionRule::PhaseAnchored, &s, &tol()).unwrap();
        assert!(section.path().frames().iter().all(|l| max_abs_deviation(l, &psi0) < 1e-14));
        assert!((section.in_phase_margin() - 1.0).abs() < 1e-14);
        for o in overlap_path(&section) {
            assert!(max_abs_deviation(&o, &identity(2)) < 1e-14);
        }
    }

    #[test]
    fn fixed_rule_rejects_moving_subspace() {
        let s = moving_path();
        let err = build_section(SectionRule::Fixed(s.first().clone()), &s, &tol()).unwrap_err();
        assert!(matches!(err, Error::SectionPrecondition(_)));
    }

    #[test]
    fn custom_rule_rejects_wrong_span() {
        let s = moving_path();
        let wrong = FramePath::new(
            s.grid().clone(),
            vec![s.first().clone(); s.grid().len()],
            &tol(),
        )
        .unwrap();
        assert!(matches!(
            build_section(SectionRule::Custom(wrong), &s, &tol()),
            Err(Error::SectionPrecondition(_))
        ));
        let ok = build_section(SectionRule::Custom(s.clone()), &s, &tol()).unwrap();
        let w = w_path(&ok, &s, &tol()).unwrap();
        assert!(w.iter().all(|wk| max_abs_deviation(wk, &identity(2)) < 1e-12));
    }

    #[test]
    fn w_starts_at_identity_and_stays_unitary() {
        let s = moving_path();
        let section = build_section(SectionRule::PhaseAnchored, &s, &tol()).unwrap();
        let w = w_path(&section, &s, &tol()).unwrap();
        assert_eq!(w[0], identity(2));
        for wk in &w {
            assert!(orthonormality_residual(wk) < 1e-9);
        }
        // diagonal of O(0,t) is real and positive under phase anchoring
        for o in overlap_path(&section) {
            for j in 0..2 {
                assert!(o[(j, j)].re > 0.0);
                assert!(o[(j, j)].im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn anchor_overlap_collapse_is_reported() {
        // resonant drive, bright column fully transferred to |3⟩ at t = π/2
        let spec = HamiltonianSpec::lambda(1.0, 0.0, c(1.0, 0.0), c(0.0, 0.0), 1e-10).unwrap();
        let grid = TimeGrid::uniform(std::f64::consts::PI / 2.0, 64).unwrap();
        let s = propagate_frame(&spec, &frame_3x2([1, 0]), &grid, &tol()).unwrap();
        assert!(matches!(
            build_section(SectionRule::PhaseAnchored, &s, &tol()),
            Err(Error::SectionPrecondition(_))
        ));
    }

    #[test]
    fn phases_unwrap_continuously() {
        let spec = HamiltonianSpec::constant(identity(2).scale(3.0), 1e-10).unwrap();
        let grid = TimeGrid::uniform(4.0, 400).unwrap();
        let psi0 = ComplexMatrix::from_fn(2, 1, |i, _| c(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let s = propagate_frame(&spec, &psi0, &grid, &tol()).unwrap();
        let phases = anchor_phases(&s);
        assert!((phases.last().unwrap()[0] + 12.0).abs() < 1e-9);
    }

    #[test]
    fn gauge_identity_is_noop_and_checks_inputs() {
        let s = moving_path();
        let section = build_section(SectionRule::PhaseAnchored, &s, &tol()).unwrap();
        let ones = vec![identity(2); s.grid().len()];
        let same = gauge_transform(&section, &ones, &tol()).unwrap();
        assert_eq!(same.path(), section.path());

        let mut open = vec![identity(2); s.grid().len()];
        *open.last_mut().unwrap() = pauli_x();
        assert!(matches!(
            gauge_transform(&section, &open, &tol()),
            Err(Error::GaugeNotClosed { .. })
        ));
        let bad = vec![identity(2).scale(2.0); s.grid().len()];
        assert!(matches!(
            gauge_transform(&section, &bad, &tol()),
            Err(Error::NotUnitary { .. })
        ));
    }
}
