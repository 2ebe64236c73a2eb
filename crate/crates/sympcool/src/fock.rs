//! Truncated-Fock-space machinery: ladder operators, the quadrature
//! eigenbasis of X = a + a†, and phase-wrapped kick (momentum displacement)
//! matrices.
//!
//! Every time-dependent operator this crate needs is of the form
//! exp[i·s·(a e^{−iωt} + a† e^{iωt})]. Writing Φ(t) = diag(e^{iωtn}) we have
//! a e^{−iωt} + a† e^{iωt} = Φ X Φ†, so the kick factorizes as
//! Φ · V e^{isΛ} Vᵀ · Φ† with X = V Λ Vᵀ the (real, orthogonal)
//! eigendecomposition. The t = 0 matrix V e^{isΛ} Vᵀ is cached; applying the
//! trap-frame phases is an O(n²) elementwise wrap. This keeps the
//! master-equation right-hand sides free of matrix exponentials.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::linalg;

/// Annihilation operator a on the truncated basis {|0⟩ … |dim−1⟩}.
pub fn lowering(dim: usize) -> Array2<C64> {
    let mut a = Array2::zeros((dim, dim));
    for n in 1..dim {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Diagonal of the number operator.
pub fn number_diag(dim: usize) -> Array1<f64> {
    Array1::from_iter((0..dim).map(|n| n as f64))
}

/// Eigendecomposition of the quadrature X = a + a† on the truncated basis.
///
/// X is real symmetric tridiagonal with off-diagonals √n; its eigenvectors V
/// are real orthogonal. All kick operators are diagonal in this basis.
#[derive(Debug, Clone)]
pub struct XBasis {
    /// Space dimension n_max + 1.
    pub dim: usize,
    /// Eigenvalues of X, ascending.
    pub lam: Array1<f64>,
    /// Eigenvectors as columns (real orthogonal).
    pub v: Array2<f64>,
    /// V as a complex matrix, for products with complex operators.
    pub vc: Array2<C64>,
}

impl XBasis {
    pub fn new(dim: usize) -> Result<Self> {
        let mut x = Array2::<f64>::zeros((dim, dim));
        for n in 1..dim {
            let s = (n as f64).sqrt();
            x[[n - 1, n]] = s;
            x[[n, n - 1]] = s;
        }
        let (lam, v) = linalg::eigh_real(&x)?;
        let vc = v.mapv(|r| C64::new(r, 0.0));
        Ok(XBasis { dim, lam, v, vc })
    }

    /// Kick matrix at t = 0: exp[i·scale·X] = V e^{i·scale·Λ} Vᵀ.
    ///
    /// Exactly unitary on the kept subspace by construction (V orthogonal).
    pub fn kick_at_t0(&self, scale: f64) -> Array2<C64> {
        let phases = self.lam.mapv(|l| (linalg::I * scale * l).exp());
        // V · diag(phases) · Vᵀ
        let mut vd = self.vc.clone();
        for (j, mut col) in vd.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|z| z * phases[j]);
        }
        vd.dot(&self.vc.t())
    }

    /// Transform an operator into the V frame: Vᵀ M V.
    pub fn to_eigenframe(&self, m: &Array2<C64>) -> Array2<C64> {
        self.vc.t().dot(m).dot(&self.vc)
    }

    /// Transform back from the V frame: V M Vᵀ.
    pub fn from_eigenframe(&self, m: &Array2<C64>) -> Array2<C64> {
        self.vc.dot(m).dot(&self.vc.t())
    }
}

/// Wrap an operator with trap-frame phases: out[m,n] = e^{iφ(m−n)}·M[m,n].
///
/// With φ = ωt this turns the cached t = 0 form of any kick/coupling operator
/// into its value at time t.
pub fn frame_wrap(m: &Array2<C64>, phi: f64) -> Array2<C64> {
    let dim = m.nrows();
    let ph: Vec<C64> = (0..dim).map(|n| (linalg::I * phi * n as f64).exp()).collect();
    let mut out = m.clone();
    for ((r, c), z) in out.indexed_iter_mut() {
        *z *= ph[r] * ph[c].conj();
    }
    out
}

/// In-place variant of [`frame_wrap`] writing into a caller-provided buffer.
pub fn frame_wrap_into(m: &Array2<C64>, phi: f64, out: &mut Array2<C64>) {
    let dim = m.nrows();
    let ph: Vec<C64> = (0..dim).map(|n| (linalg::I * phi * n as f64).exp()).collect();
    out.assign(m);
    for ((r, c), z) in out.indexed_iter_mut() {
        *z *= ph[r] * ph[c].conj();
    }
}

/// Diagonal density matrix from a population vector.
pub fn diagonal_state(populations: &[f64]) -> Array2<C64> {
    let dim = populations.len();
    let mut rho = Array2::zeros((dim, dim));
    for (n, &p) in populations.iter().enumerate() {
        rho[[n, n]] = C64::new(p, 0.0);
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lowering_acts_as_annihilator() {
        let a = lowering(5);
        // a|3⟩ = √3 |2⟩
        assert_relative_eq!(a[[2, 3]].re, 3f64.sqrt(), max_relative = 1e-15);
        assert_eq!(a[[3, 2]], C64::new(0.0, 0.0));
    }

    #[test]
    fn xbasis_reconstructs_x() {
        let dim = 12;
        let xb = XBasis::new(dim).unwrap();
        // V Λ Vᵀ must reproduce the tridiagonal X
        let mut vl = xb.v.clone();
        for (j, mut col) in vl.columns_mut().into_iter().enumerate() {
            col.mapv_inplace(|r| r * xb.lam[j]);
        }
        let x = vl.dot(&xb.v.t());
        for n in 1..dim {
            assert_relative_eq!(x[[n - 1, n]], (n as f64).sqrt(), max_relative = 1e-10);
        }
        assert!(x[[0, 2]].abs() < 1e-10);
    }

    #[test]
    fn kick_is_unitary() {
        let xb = XBasis::new(31).unwrap();
        let d = xb.kick_at_t0(0.5);
        let prod = d.dot(&linalg::dagger(&d));
        for i in 0..31 {
            for j in 0..31 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[[i, j]] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kick_vacuum_element_matches_series_and_closed_form() {
        // ⟨0|exp(isX)|0⟩ = e^{−s²/2}: check against both the closed form and
        // an independent brute-force series evaluation of the exponential.
        let dim = 40; // generous truncation so the series is converged
        let xb = XBasis::new(dim).unwrap();
        for &s in &[0.1, 0.3, 0.5] {
            let d = xb.kick_at_t0(s);
            let closed = (-0.5 * s * s).exp();
            assert_relative_eq!(d[[0, 0]].re, closed, max_relative = 1e-10);
            assert!(d[[0, 0]].im.abs() < 1e-12);

            // series: exp(isX)|0⟩ = Σ_k (is)^k X^k |0⟩ / k!
            let mut x = Array2::<C64>::zeros((dim, dim));
            for n in 1..dim {
                let r = (n as f64).sqrt();
                x[[n - 1, n]] = C64::new(r, 0.0);
                x[[n, n - 1]] = C64::new(r, 0.0);
            }
            let mut vec = Array1::<C64>::zeros(dim);
            vec[0] = C64::new(1.0, 0.0);
            let mut acc = vec.clone();
            let is = linalg::I * s;
            for k in 1..60 {
                vec = x.dot(&vec).mapv(|z| z * is / (k as f64));
                acc = &acc + &vec;
            }
            assert_relative_eq!(d[[0, 0]].re, acc[0].re, max_relative = 1e-9);
        }
    }

    #[test]
    fn frame_wrap_matches_direct_construction() {
        // D(s, t) = Φ D(s, 0) Φ† must equal exp[is(a e^{−iωt}+a† e^{iωt})]
        // evaluated via the eigenbasis of the rotated quadrature.
        let dim = 10;
        let xb = XBasis::new(dim).unwrap();
        let (s, omega, t) = (0.3, 2.0, 0.7);
        let wrapped = frame_wrap(&xb.kick_at_t0(s), omega * t);

        // direct: build a e^{−iωt} + a† e^{iωt}, exponentiate by series
        let a = lowering(dim);
        let ph = (linalg::I * (-omega * t)).exp();
        let xt = a.mapv(|z| z * ph) + linalg::dagger(&a).mapv(|z| z * ph.conj());
        let mut term = Array2::<C64>::eye(dim);
        let mut acc = Array2::<C64>::eye(dim);
        for k in 1..60 {
            term = term.dot(&xt).mapv(|z| z * linalg::I * s / (k as f64));
            acc = &acc + &term;
        }
        // compare on the upper-left block (truncation pollutes the far corner)
        for i in 0..5 {
            for j in 0..5 {
                assert!((wrapped[[i, j]] - acc[[i, j]]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn diagonal_state_has_unit_trace_for_normalized_input() {
        let rho = diagonal_state(&[0.5, 0.3, 0.2]);
        assert_relative_eq!(linalg::trace(&rho).re, 1.0, max_relative = 1e-15);
    }
}
