//! Dense complex linear algebra used throughout the crate.
//!
//! Every exponential needed here is of an anti-Hermitian generator, so
//! [`expm_skew`] diagonalizes the Hermitian matrix `iX` instead of running a
//! Padé scheme. The result is unitary to roundoff, which the frame and
//! holonomy code rely on.

use nalgebra::linalg::{SymmetricEigen, SVD};
use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Dense complex matrix. Shape metadata and row/column storage come from
/// nalgebra; construct through [`from_rows`] or nalgebra directly.
pub type ComplexMatrix = DMatrix<C64>;

pub const I: C64 = Complex { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Numerical thresholds shared by every pipeline stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Hermiticity / unitarity / orthonormality residuals.
    pub structure_tol: f64,
    /// Minimum eigenvalue of O(0,tau) required for the in-phase condition.
    pub positivity_tol: f64,
    /// Threshold used by the separability classifier.
    pub separation_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            structure_tol: 1e-10,
            positivity_tol: 1e-9,
            separation_tol: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.structure_tol, self.positivity_tol, self.separation_tol];
        if all.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidParameters(format!(
                "tolerances must be finite and non-negative: {self:?}"
            )));
        }
        Ok(())
    }

    /// Band used for structural invariants (10 x structure_tol).
    pub fn structural_band(&self) -> f64 {
        10.0 * self.structure_tol
    }
}

/// Build a matrix from row slices. Panics on ragged input; intended for
/// literals and tests.
pub fn from_rows(rows: &[&[C64]]) -> ComplexMatrix {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    assert!(rows.iter().all(|r| r.len() == ncols), "ragged rows");
    DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j])
}

pub fn from_real_diagonal(diag: &[f64]) -> ComplexMatrix {
    DMatrix::from_diagonal(&DVector::from_iterator(
        diag.len(),
        diag.iter().map(|&d| c(d, 0.0)),
    ))
}

pub fn from_diagonal(diag: &[C64]) -> ComplexMatrix {
    DMatrix::from_diagonal(&DVector::from_column_slice(diag))
}

pub fn identity(n: usize) -> ComplexMatrix {
    DMatrix::identity(n, n)
}

pub fn pauli_x() -> ComplexMatrix {
    from_rows(&[&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]])
}

pub fn pauli_y() -> ComplexMatrix {
    from_rows(&[&[c(0.0, 0.0), c(0.0, -1.0)], &[c(0.0, 1.0), c(0.0, 0.0)]])
}

pub fn pauli_z() -> ComplexMatrix {
    from_real_diagonal(&[1.0, -1.0])
}

/// Frobenius norm.
#[inline]
pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.norm()
}

/// Frobenius distance between two equally shaped matrices.
pub fn distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    (a - b).norm()
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_deviation(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn hermitian_residual(m: &ComplexMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn anti_hermitian_residual(m: &ComplexMatrix) -> f64 {
    (m + m.adjoint()).norm()
}

/// `(M + M†)/2`
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `(M - M†)/2`
pub fn anti_hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m - m.adjoint()).scale(0.5)
}

/// `||Q†Q - I||_F`; for an N x M frame this measures column orthonormality.
pub fn orthonormality_residual(q: &ComplexMatrix) -> f64 {
    let g = q.adjoint() * q;
    (g - identity(q.ncols())).norm()
}

/// Validates Hermiticity within `tol` and returns the symmetrized matrix.
pub fn symmetrized_hermitian(m: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    ensure_square(m)?;
    let residual = hermitian_residual(m);
    if !(residual <= tol) {
        return Err(Error::NotHermitian { residual, tol });
    }
    Ok(hermitian_part(m))
}

/// Eigen-decomposition of a Hermitian matrix (assumed already symmetrized).
/// Eigenvalues are returned in ascending order with matching columns.
pub fn eigh(h: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = SymmetricEigen::new(h.clone());
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// `exp(X)` for anti-Hermitian `X`, via `iX = V diag(λ) V†` and
/// `exp(X) = V diag(e^{-iλ}) V†`.
pub fn expm_skew(x: &ComplexMatrix, tol: f64) -> Result<ComplexMatrix> {
    ensure_square(x)?;
    if !is_finite(x) {
        return Err(Error::NonFinite);
    }
    let residual = anti_hermitian_residual(x);
    if !(residual <= tol) {
        return Err(Error::NotAntiHermitian { residual, tol });
    }
    let h = hermitian_part(&(x * I));
    Ok(phase_exponential(&h, 1.0))
}

/// `exp(-i H t)` for a Hermitian `H`. No validation; callers own that.
pub fn phase_exponential(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let n = h.nrows();
    if n == 0 {
        return h.clone();
    }
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let phases = DVector::from_iterator(n, eig.eigenvalues.iter().map(|&l| (-I * (l * t)).exp()));
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * v.adjoint()
}

/// Left polar decomposition `U = P Q` with `P` positive semidefinite and
/// `Q` unitary, from `U = X Σ Y†`: `P = X Σ X†`, `Q = X Y†`.
pub fn polar_decompose(u: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    ensure_square(u)?;
    if !is_finite(u) {
        return Err(Error::NonFinite);
    }
    let svd = SVD::try_new(u.clone(), true, true, f64::EPSILON, 0).ok_or(Error::SvdFailure)?;
    let x = svd.u.ok_or(Error::SvdFailure)?;
    let y_adj = svd.v_t.ok_or(Error::SvdFailure)?;
    let mut x_sigma = x.clone();
    for (j, mut col) in x_sigma.column_iter_mut().enumerate() {
        col *= c(svd.singular_values[j], 0.0);
    }
    let p = hermitian_part(&(x_sigma * x.adjoint()));
    let q = &x * y_adj;
    Ok((p, q))
}

/// Smallest eigenvalue of `(O + O†)/2`; errors when `O` is not Hermitian
/// within `tol`.
pub fn min_eigenvalue_hermitian(o: &ComplexMatrix, tol: f64) -> Result<f64> {
    let h = symmetrized_hermitian(o, tol)?;
    let (values, _) = eigh(&h);
    Ok(values.first().copied().unwrap_or(f64::INFINITY))
}

/// Frobenius norm of `AB - BA`.
pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let n = ensure_square(a)?;
    let m = ensure_square(b)?;
    if n != m {
        return Err(Error::DimensionMismatch(format!(
            "commutator of {n}x{n} and {m}x{m} matrices"
        )));
    }
    Ok((a * b - b * a).norm())
}

/// Symmetric (Löwdin) orthonormalization `F (F†F)^{-1/2}`, computed as the
/// unitary factor `X Y†` of the thin SVD `F = X Σ Y†`.
pub fn lowdin_orthonormalize(f: &ComplexMatrix) -> Result<ComplexMatrix> {
    if f.ncols() == 0 {
        return Ok(f.clone());
    }
    let svd = SVD::try_new(f.clone(), true, true, f64::EPSILON, 0).ok_or(Error::SvdFailure)?;
    let x = svd.u.ok_or(Error::SvdFailure)?;
    let y_adj = svd.v_t.ok_or(Error::SvdFailure)?;
    Ok(x * y_adj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Truncated power series with scaling and squaring; an independent
    /// route to `exp(X)` for small dense matrices.
    fn expm_series(x: &ComplexMatrix) -> ComplexMatrix {
        let n = x.nrows();
        let s = 10;
        let scaled = x.scale(1.0 / f64::from(1u32 << s));
        let mut term = identity(n);
        let mut sum = identity(n);
        for k in 1..30 {
            term = &term * &scaled / c(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let e = expm_skew(&ComplexMatrix::zeros(2, 2), 1e-10).unwrap();
        assert!(max_abs_deviation(&e, &identity(2)) < 1e-15);
    }

    #[test]
    fn expm_pi_pauli_x_is_minus_identity() {
        let x = pauli_x() * c(0.0, -PI);
        let e = expm_skew(&x, 1e-10).unwrap();
        let series = expm_series(&x);
        assert!(max_abs_deviation(&series, &(-identity(2))) < 1e-12);
        assert!(max_abs_deviation(&e, &(-identity(2))) < 1e-12);
    }

    #[test]
    fn expm_half_pi_pauli_z() {
        let x = pauli_z() * c(0.0, -PI / 2.0);
        let e = expm_skew(&x, 1e-10).unwrap();
        let expected = from_diagonal(&[c(0.0, -1.0), c(0.0, 1.0)]);
        assert!(max_abs_deviation(&e, &expected) < 1e-14);
    }

    #[test]
    fn expm_rejects_hermitian_input() {
        let err = expm_skew(&pauli_x(), 1e-10).unwrap_err();
        assert!(matches!(err, Error::NotAntiHermitian { .. }));
        let err = expm_skew(&ComplexMatrix::zeros(2, 3), 1e-10).unwrap_err();
        assert!(matches!(err, Error::NotSquare { .. }));
    }

    #[test]
    fn expm_matches_series_on_generic_generator() {
        let x = from_rows(&[
            &[c(0.0, 0.3), c(0.2, -0.7), c(-0.1, 0.4)],
            &[c(-0.2, -0.7), c(0.0, -1.1), c(0.5, 0.0)],
            &[c(0.1, 0.4), c(-0.5, 0.0), c(0.0, 0.25)],
        ]);
        let e = expm_skew(&x, 1e-12).unwrap();
        assert!(max_abs_deviation(&e, &expm_series(&x)) < 1e-12);
    }

    #[test]
    fn polar_of_unitary_has_identity_positive_part() {
        let u = expm_skew(&(pauli_y() * c(0.0, 0.7)), 1e-10).unwrap();
        let (p, q) = polar_decompose(&u).unwrap();
        assert!(max_abs_deviation(&p, &identity(2)) < 1e-13);
        assert!(max_abs_deviation(&q, &u) < 1e-13);
    }

    #[test]
    fn polar_of_positive_diagonal() {
        let u = from_real_diagonal(&[0.5, 1.0]);
        let (p, q) = polar_decompose(&u).unwrap();
        assert!(max_abs_deviation(&p, &u) < 1e-14);
        assert!(max_abs_deviation(&q, &identity(2)) < 1e-14);
    }

    #[test]
    fn polar_rejects_rectangular() {
        assert!(matches!(
            polar_decompose(&ComplexMatrix::zeros(3, 2)),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn min_eigenvalue_examples() {
        assert_eq!(min_eigenvalue_hermitian(&identity(2), 1e-10).unwrap(), 1.0);
        let d = from_real_diagonal(&[1.0, 0.3]);
        assert!((min_eigenvalue_hermitian(&d, 1e-10).unwrap() - 0.3).abs() < 1e-15);
        let o = from_real_diagonal(&[1.0, (1.0f64 - 0.75).sqrt()]);
        assert!((min_eigenvalue_hermitian(&o, 1e-10).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            min_eigenvalue_hermitian(&(pauli_y() * I), 1e-10),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn commutator_examples() {
        assert_eq!(commutator_norm(&pauli_x(), &pauli_x()).unwrap(), 0.0);
        let xz = commutator_norm(&pauli_x(), &pauli_z()).unwrap();
        assert!((xz - 2.0 * 2f64.sqrt()).abs() < 1e-15);
        let d1 = from_real_diagonal(&[1.0, 2.0, 3.0]);
        let d2 = from_diagonal(&[c(0.0, 1.0), c(4.0, 0.0), c(-1.0, 2.0)]);
        assert_eq!(commutator_norm(&d1, &d2).unwrap(), 0.0);
        assert!(matches!(
            commutator_norm(&identity(2), &identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn lowdin_restores_orthonormality() {
        let f = from_rows(&[
            &[c(1.0, 0.0), c(0.1, 0.0)],
            &[c(0.0, 0.05), c(1.0, 0.0)],
            &[c(0.02, 0.0), c(0.0, 0.0)],
        ]);
        let q = lowdin_orthonormalize(&f).unwrap();
        assert!(orthonormality_residual(&q) < 1e-14);
        // symmetric: closest orthonormal frame, no column preferred
        assert!(distance(&q, &f) < 0.1);
    }
}
