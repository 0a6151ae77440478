//! Time-dependent Hamiltonians and Schrödinger propagation of M-frames.
//!
//! Units follow ħ = 1: frequencies in rad/s, times in s.

use crate::error::{Error, Result};
use crate::lambda;
use crate::matkit::{
    self, c, ensure_square, lowdin_orthonormalize, orthonormality_residual,
    phase_exponential, symmetrized_hermitian, ComplexMatrix, Tolerances, C64, I,
};

/// Anything that yields a Hermitian `H(t)` of fixed dimension.
pub trait Hamiltonian {
    fn dimension(&self) -> usize;
    fn at(&self, t: f64) -> Result<ComplexMatrix>;
}

/// Strictly increasing sample times starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                times.len()
            )));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidGrid(format!("first time must be 0, got {}", times[0])));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite time".into()));
        }
        if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "times not strictly increasing at index {}",
                k + 1
            )));
        }
        Ok(Self { times })
    }

    /// `steps` equal intervals on `[0, tau]`.
    pub fn uniform(tau: f64, steps: usize) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidGrid(format!("tau must be positive, got {tau}")));
        }
        if steps < 1 {
            return Err(Error::InvalidGrid("steps must be positive".into()));
        }
        let dt = tau / steps as f64;
        let mut times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
        times[steps] = tau;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn tau(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Largest interval length.
    pub fn max_step(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn same_as(&self, other: &TimeGrid) -> bool {
        self.times.len() == other.times.len()
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
    }
}

/// Piecewise-linear Hamiltonian samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledHamiltonian {
    grid: TimeGrid,
    samples: Vec<ComplexMatrix>,
}

impl SampledHamiltonian {
    pub fn new(grid: TimeGrid, samples: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for {} grid points",
                samples.len(),
                grid.len()
            )));
        }
        let n = ensure_square(&samples[0])?;
        let samples = samples
            .iter()
            .map(|h| {
                if h.nrows() != n || h.ncols() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "sample of shape {:?}, expected {n}x{n}",
                        h.shape()
                    )));
                }
                if !matkit::is_finite(h) {
                    return Err(Error::NonFinite);
                }
                symmetrized_hermitian(h, tol)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { grid, samples })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[ComplexMatrix] {
        &self.samples
    }
}

/// Time-dependent Hamiltonian description.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianSpec {
    Constant(ComplexMatrix),
    /// Rotating-frame Λ coupling `Ω₀(|3⟩⟨b| + |b⟩⟨3|) + 2δ|3⟩⟨3|`.
    LambdaSystem {
        omega0: f64,
        delta: f64,
        omega1: C64,
        omega2: C64,
    },
    Sampled(SampledHamiltonian),
    /// `H₀ + cos(ω t) H₁`.
    Driven {
        static_part: ComplexMatrix,
        drive: ComplexMatrix,
        frequency: f64,
    },
}

impl HamiltonianSpec {
    pub fn constant(h: ComplexMatrix, tol: f64) -> Result<Self> {
        if !matkit::is_finite(&h) {
            return Err(Error::NonFinite);
        }
        Ok(Self::Constant(symmetrized_hermitian(&h, tol)?))
    }

    pub fn lambda(omega0: f64, delta: f64, omega1: C64, omega2: C64, tol: f64) -> Result<Self> {
        let norm = omega1.norm_sqr() + omega2.norm_sqr();
        if !((norm - 1.0).abs() <= tol) {
            return Err(Error::InvalidParameters(format!(
                "|omega1|^2 + |omega2|^2 = {norm}, expected 1"
            )));
        }
        if !omega0.is_finite() || !delta.is_finite() {
            return Err(Error::InvalidParameters("non-finite Λ coupling".into()));
        }
        Ok(Self::LambdaSystem {
            omega0,
            delta,
            omega1,
            omega2,
        })
    }

    pub fn driven(
        static_part: ComplexMatrix,
        drive: ComplexMatrix,
        frequency: f64,
        tol: f64,
    ) -> Result<Self> {
        let h0 = symmetrized_hermitian(&static_part, tol)?;
        let h1 = symmetrized_hermitian(&drive, tol)?;
        if h0.shape() != h1.shape() {
            return Err(Error::DimensionMismatch("static and drive parts differ in shape".into()));
        }
        Ok(Self::Driven {
            static_part: h0,
            drive: h1,
            frequency,
        })
    }
}

impl Hamiltonian for HamiltonianSpec {
    fn dimension(&self) -> usize {
        match self {
            Self::Constant(h) => h.nrows(),
            Self::LambdaSystem { .. } => 3,
            Self::Sampled(s) => s.samples[0].nrows(),
            Self::Driven { static_part, .. } => static_part.nrows(),
        }
    }

    fn at(&self, t: f64) -> Result<ComplexMatrix> {
        match self {
            Self::Constant(h) => Ok(h.clone()),
            Self::LambdaSystem {
                omega0,
                delta,
                omega1,
                omega2,
            } => Ok(lambda::coupling_matrix(*omega0, *delta, *omega1, *omega2)),
            Self::Sampled(s) => {
                let times = s.grid.times();
                let (start, end) = (times[0], s.grid.tau());
                if !(t >= start && t <= end) {
                    return Err(Error::TimeOutOfRange { t, start, end });
                }
                let hi = times.partition_point(|&x| x < t).clamp(1, times.len() - 1);
                let lo = hi - 1;
                let w = (t - times[lo]) / (times[hi] - times[lo]);
                Ok(s.samples[lo].scale(1.0 - w) + s.samples[hi].scale(w))
            }
            Self::Driven {
                static_part,
                drive,
                frequency,
            } => Ok(static_part + drive.scale((frequency * t).cos())),
        }
    }
}

/// `sample_hamiltonian`: evaluates `H(t)` for any description.
pub fn sample_hamiltonian<H: Hamiltonian + ?Sized>(h: &H, t: f64) -> Result<ComplexMatrix> {
    h.at(t)
}

/// A grid plus an N x M orthonormal frame per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePath {
    grid: TimeGrid,
    frames: Vec<ComplexMatrix>,
}

impl FramePath {
    /// Validates shape consistency and orthonormality within `10 * structure_tol`.
    pub fn new(grid: TimeGrid, frames: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        if frames.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} frames for {} grid points",
                frames.len(),
                grid.len()
            )));
        }
        let shape = frames[0].shape();
        if shape.1 == 0 || shape.1 > shape.0 {
            return Err(Error::DimensionMismatch(format!(
                "frame shape {shape:?} needs 1 <= M <= N"
            )));
        }
        for f in &frames {
            if f.shape() != shape {
                return Err(Error::DimensionMismatch(format!(
                    "frame shape {:?} differs from {shape:?}",
                    f.shape()
                )));
            }
            if !matkit::is_finite(f) {
                return Err(Error::NonFinite);
            }
            let residual = orthonormality_residual(f);
            if residual > tol.structural_band() {
                return Err(Error::NotOrthonormal { residual });
            }
        }
        Ok(Self { grid, frames })
    }

    pub(crate) fn from_parts_unchecked(grid: TimeGrid, frames: Vec<ComplexMatrix>) -> Self {
        Self { grid, frames }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn frames(&self) -> &[ComplexMatrix] {
        &self.frames
    }

    pub fn frame(&self, k: usize) -> &ComplexMatrix {
        &self.frames[k]
    }

    pub fn first(&self) -> &ComplexMatrix {
        &self.frames[0]
    }

    pub fn last(&self) -> &ComplexMatrix {
        &self.frames[self.frames.len() - 1]
    }

    /// Hilbert-space dimension N.
    pub fn dimension(&self) -> usize {
        self.frames[0].nrows()
    }

    /// Subspace dimension M.
    pub fn rank(&self) -> usize {
        self.frames[0].ncols()
    }

    /// Every frame multiplied on the right by the same M x M matrix.
    pub fn right_multiply(&self, v: &ComplexMatrix) -> FramePath {
        Self::from_parts_unchecked(
            self.grid.clone(),
            self.frames.iter().map(|f| f * v).collect(),
        )
    }
}

/// Propagates `psi0` through the Schrödinger equation with midpoint
/// exponential steps `S_{k+1} = exp(-i H(t_mid) Δt) S_k`, followed by
/// Löwdin re-orthonormalization. `S(0) = psi0` exactly.
pub fn propagate_frame<H: Hamiltonian + ?Sized>(
    h: &H,
    psi0: &ComplexMatrix,
    grid: &TimeGrid,
    tol: &Tolerances,
) -> Result<FramePath> {
    if psi0.nrows() != h.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "initial frame has {} rows, Hamiltonian dimension is {}",
            psi0.nrows(),
            h.dimension()
        )));
    }
    if psi0.ncols() == 0 || psi0.ncols() > psi0.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "initial frame shape {:?} needs 1 <= M <= N",
            psi0.shape()
        )));
    }
    let residual = orthonormality_residual(psi0);
    if !(residual <= tol.structural_band()) {
        return Err(Error::NotOrthonormal { residual });
    }

    let times = grid.times();
    let mut frames = Vec::with_capacity(times.len());
    frames.push(psi0.clone());
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        let hm = symmetrized_hermitian(&h.at(0.5 * (w[0] + w[1]))?, tol.structure_tol)?;
        let step = phase_exponential(&hm, dt);
        let next = lowdin_orthonormalize(&(step * frames.last().unwrap()))?;
        frames.push(next);
    }
    Ok(FramePath::from_parts_unchecked(grid.clone(), frames))
}

/// `P_M(t_k) = S(t_k) S(t_k)†` for every grid point.
pub fn projector_path(path: &FramePath) -> Vec<ComplexMatrix> {
    path.frames.iter().map(|s| s * s.adjoint()).collect()
}

/// Restricted generator `𝔽_jk(t) = -i⟨ψ_j(t)|H(t)|ψ_k(t)⟩` at grid index `k`.
pub fn restricted_generator<H: Hamiltonian + ?Sized>(
    h: &H,
    path: &FramePath,
    k: usize,
) -> Result<ComplexMatrix> {
    if k >= path.frames.len() {
        return Err(Error::InvalidGrid(format!(
            "index {k} outside grid of {} points",
            path.frames.len()
        )));
    }
    if path.dimension() != h.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "frame dimension {} vs Hamiltonian dimension {}",
            path.dimension(),
            h.dimension()
        )));
    }
    let s = &path.frames[k];
    let ht = h.at(path.grid.times()[k])?;
    Ok(matkit::anti_hermitian_part(&(s.adjoint() * ht * s * (-I))))
}

/// `𝔽(t_k)` at every grid point.
pub fn restricted_generator_path<H: Hamiltonian + ?Sized>(
    h: &H,
    path: &FramePath,
) -> Result<Vec<ComplexMatrix>> {
    (0..path.frames.len())
        .map(|k| restricted_generator(h, path, k))
        .collect()
}

/// Max over interior points of `||Ṗ - i[P, H]||_F`, with `Ṗ` from central
/// differences of the projector path.
pub fn projector_equation_residual<H: Hamiltonian + ?Sized>(
    h: &H,
    path: &FramePath,
) -> Result<f64> {
    let p = projector_path(path);
    let t = path.grid.times();
    let mut worst = 0.0f64;
    for k in 1..p.len() - 1 {
        let pdot = (&p[k + 1] - &p[k - 1]) / c(t[k + 1] - t[k - 1], 0.0);
        let ht = h.at(t[k])?;
        let rhs = (&p[k] * &ht - &ht * &p[k]) * I;
        worst = worst.max((pdot - rhs).norm());
    }
    Ok(worst)
}

/// `U(t,0)` matrix in the `S(0)` basis: `S(0)† S(t)` for every grid point.
pub fn evolution_matrices(path: &FramePath) -> Vec<ComplexMatrix> {
    let s0 = path.first().adjoint();
    path.frames.iter().map(|s| &s0 * s).collect()
}

/// `||S(t)†S(t) − I||` worst case along the path.
pub fn max_orthonormality_residual(path: &FramePath) -> f64 {
    path.frames
        .iter()
        .map(orthonormality_residual)
        .fold(0.0, f64::max)
}
