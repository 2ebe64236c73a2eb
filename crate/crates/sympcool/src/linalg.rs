//! Dense complex/real matrix helpers shared by the master-equation code:
//! Hermitian eigendecompositions (LAPACK via ndarray-linalg), trace
//! distance, and a few convenience maps that ndarray does not provide
//! directly.

use ndarray::{Array1, Array2};
use ndarray_linalg::{EigValsh, Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// i as a complex constant.
pub const I: C64 = C64::new(0.0, 1.0);

/// Conjugate transpose.
pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Matrix trace.
pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

/// Hermitian part (M + M†)/2 — used to scrub accumulated round-off.
pub fn hermitian_part(m: &Array2<C64>) -> Array2<C64> {
    let mut h = dagger(m);
    h += m;
    h.mapv_into(|z| 0.5 * z)
}

/// Max-abs deviation from Hermiticity, ‖M − M†‖∞ elementwise.
pub fn hermiticity_defect(m: &Array2<C64>) -> f64 {
    let d = m - &dagger(m);
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigendecomposition of a real symmetric matrix.
///
/// Returns (eigenvalues ascending, eigenvectors as columns).
pub fn eigh_real(m: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    m.eigh(UPLO::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed: {e}")))
}

/// Eigenvalues of a Hermitian complex matrix, ascending.
pub fn eigvalsh(m: &Array2<C64>) -> Result<Array1<f64>> {
    m.eigvalsh(UPLO::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigensolver failed: {e}")))
}

/// Smallest eigenvalue of a Hermitian matrix (positivity monitoring).
pub fn min_eigval(m: &Array2<C64>) -> Result<f64> {
    Ok(eigvalsh(m)?[0])
}

/// Trace distance ½‖A − B‖₁ between two Hermitian matrices.
pub fn trace_distance(a: &Array2<C64>, b: &Array2<C64>) -> Result<f64> {
    let evals = eigvalsh(&(a - b))?;
    Ok(0.5 * evals.iter().map(|x| x.abs()).sum::<f64>())
}
