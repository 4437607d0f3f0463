//! Small dense complex helpers built on nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Condition-number ceiling applied to every Hermitian inversion.
pub const MAX_CONDITION: f64 = 1e12;

/// `A^H A`.
pub fn gram(a: &CMatrix) -> CMatrix {
    a.ad_mul(a)
}

/// Averages `A` with its conjugate transpose.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// 2-norm condition number of a Hermitian matrix (`inf` if not positive definite).
pub fn hermitian_condition(a: &CMatrix) -> f64 {
    let eig = hermitian_part(a).symmetric_eigenvalues();
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
///
/// Fails with the measured condition number when it exceeds `max_cond`.
pub fn hermitian_inverse(a: &CMatrix, max_cond: f64) -> Result<CMatrix, f64> {
    let sym = hermitian_part(a);
    let cond = hermitian_condition(&sym);
    if !(cond <= max_cond) {
        return Err(cond);
    }
    match sym.cholesky() {
        Some(chol) => Ok(chol.inverse()),
        None => Err(f64::INFINITY),
    }
}

/// Real diagonal of the inverse of a Hermitian positive-definite matrix.
pub fn inverse_diagonal(a: &CMatrix, max_cond: f64) -> Result<Vec<f64>, f64> {
    let inv = hermitian_inverse(a, max_cond)?;
    Ok((0..inv.nrows()).map(|k| inv[(k, k)].re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_of_hermitian_2x2() {
        let a =
            CMatrix::from_row_slice(2, 2, &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)]);
        let inv = hermitian_inverse(&a, MAX_CONDITION).unwrap();
        let prod = &a * &inv;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - c(target, 0.0)).norm() < 1e-14);
            }
        }
        // eigenvalues 1 and 3
        assert!((hermitian_condition(&a) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = CMatrix::from_element(3, 3, c(1.0, 0.0));
        assert!(hermitian_inverse(&a, MAX_CONDITION).is_err());
    }
}
