//! Seeded random instances for property tests, demos and the refutation
//! witness.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dynamics::{HamiltonianSpec, TimeGrid};
use crate::frames;
use crate::error::Result;
use crate::matkit::{
    c, expm_skew, hermitian_part, lowdin_orthonormalize, ComplexMatrix, Tolerances, I,
};

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Gaussian matrix with unit-variance entries.
pub fn ginibre(rng: &mut Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(s * re, s * im)
    })
}

/// Hermitian matrix with spectral scale of order `scale`.
pub fn hermitian(rng: &mut Rng, n: usize, scale: f64) -> ComplexMatrix {
    hermitian_part(&ginibre(rng, n, n)).scale(scale / (n as f64).sqrt())
}

pub fn anti_hermitian(rng: &mut Rng, n: usize, scale: f64) -> ComplexMatrix {
    hermitian(rng, n, scale) * I
}

pub fn unitary(rng: &mut Rng, n: usize) -> ComplexMatrix {
    let x = anti_hermitian(rng, n, std::f64::consts::PI);
    expm_skew(&x, 1e-9).expect("generator is anti-Hermitian by construction")
}

/// N x M matrix with orthonormal columns.
pub fn frame(rng: &mut Rng, n: usize, m: usize) -> ComplexMatrix {
    lowdin_orthonormalize(&ginibre(rng, n, m)).expect("Gaussian matrix has full rank")
}

/// Generic driven instance `H₀ + cos(t) H₁` with a random M-frame.
pub fn driven_instance(
    seed: u64,
    n: usize,
    m: usize,
    tol: f64,
) -> Result<(HamiltonianSpec, ComplexMatrix)> {
    let mut r = rng(seed);
    let h0 = hermitian(&mut r, n, 1.0);
    let h1 = hermitian(&mut r, n, 1.0);
    let psi0 = frame(&mut r, n, m);
    Ok((HamiltonianSpec::driven(h0, h1, 1.0, tol)?, psi0))
}

/// Random smooth closed gauge path on `grid`: a Haar-like `V(0)` times
/// `exp(sin(2πt/τ) X)` with `X` of spectral scale `strength`.
pub fn closed_gauge(
    seed: u64,
    grid: &TimeGrid,
    m: usize,
    strength: f64,
    tol: &Tolerances,
) -> Result<Vec<ComplexMatrix>> {
    let mut r = rng(seed);
    let v0 = unitary(&mut r, m);
    let x = anti_hermitian(&mut r, m, strength);
    frames::closed_gauge(grid, &v0, &x, tol)
}
