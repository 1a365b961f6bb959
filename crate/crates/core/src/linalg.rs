//! Dense complex linear algebra used across the crate: singular values,
//! Hermitian square roots and principal fractional powers.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigenvector matrices with a larger condition number are treated as
/// defective.
pub const DEFECTIVE_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixFunctionError {
    #[error("matrix is not diagonalizable (eigenvector condition number {condition:e})")]
    Defective { condition: f64 },
    #[error("eigenvalue {re} + {im}i lies on the branch cut (-∞, 0]")]
    BranchCut { re: f64, im: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("matrix must be square and non-empty")]
    Shape,
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    a.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn largest_singular_value(a: &CMatrix) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

pub fn smallest_singular_value(a: &CMatrix) -> f64 {
    singular_values(a).into_iter().fold(f64::INFINITY, f64::min)
}

/// Two-norm condition number `σ_max / σ_min`.
pub fn condition_number(a: &CMatrix) -> f64 {
    let s = singular_values(a);
    let max = s.iter().copied().fold(0.0, f64::max);
    let min = s.iter().copied().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn hermitian_defect(a: &CMatrix) -> f64 {
    (a - a.adjoint()).norm() / a.norm().max(f64::MIN_POSITIVE)
}

pub fn is_diagonal(a: &CMatrix) -> bool {
    a.iter()
        .enumerate()
        .all(|(idx, z)| *z == Complex64::default() || idx % a.nrows() == idx / a.nrows())
}

/// `(S^{1/2}, S^{-1/2})` for a Hermitian positive definite `S`.
pub fn hermitian_sqrt_pair(s: &CMatrix) -> Result<(CMatrix, CMatrix), MatrixFunctionError> {
    if s.nrows() != s.ncols() || s.is_empty() {
        return Err(MatrixFunctionError::Shape);
    }
    let sym = (s + s.adjoint()) * c(0.5);
    let eig = sym.symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if !(min > max * 1e-14) || min <= 0.0 {
        return Err(MatrixFunctionError::NotPositiveDefinite {
            min_eigenvalue: min,
        });
    }
    let v = &eig.eigenvectors;
    let build = |p: f64| {
        let d = CMatrix::from_diagonal(&DVector::from_iterator(
            eig.eigenvalues.len(),
            eig.eigenvalues.iter().map(|l| c(l.powf(p))),
        ));
        v * d * v.adjoint()
    };
    Ok((build(0.5), build(-0.5)))
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn hermitian_max_eigenvalue(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let sym = (a + a.adjoint()) * c(0.5);
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// An eigendecomposition `M = V diag(λ) V⁻¹`.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<Complex64>,
    pub vectors: CMatrix,
    pub inverse: CMatrix,
    pub condition: f64,
}

impl Eigensystem {
    /// Hermitian matrices use the unitary eigenbasis; everything else goes
    /// through a complex Schur form with triangular back-substitution.
    pub fn new(m: &CMatrix) -> Result<Self, MatrixFunctionError> {
        let n = m.nrows();
        if n != m.ncols() || n == 0 {
            return Err(MatrixFunctionError::Shape);
        }
        if hermitian_defect(m) < 1e-13 {
            let eig = ((m + m.adjoint()) * c(0.5)).symmetric_eigen();
            let vectors = eig.eigenvectors;
            return Ok(Self {
                values: eig.eigenvalues.iter().map(|l| c(*l)).collect(),
                inverse: vectors.adjoint(),
                vectors,
                condition: 1.0,
            });
        }
        if is_diagonal(m) {
            return Ok(Self {
                values: m.diagonal().iter().copied().collect(),
                vectors: CMatrix::identity(n, n),
                inverse: CMatrix::identity(n, n),
                condition: 1.0,
            });
        }
        let (q, t) = m.clone().schur().unpack();
        let scale = t.norm().max(f64::MIN_POSITIVE);
        // eigenvectors of the upper-triangular T
        let mut y = CMatrix::zeros(n, n);
        for k in 0..n {
            let lambda = t[(k, k)];
            y[(k, k)] = c(1.0);
            for i in (0..k).rev() {
                let mut acc = Complex64::default();
                for j in i + 1..=k {
                    acc += t[(i, j)] * y[(j, k)];
                }
                let mut denom = t[(i, i)] - lambda;
                if denom.norm() < 1e-14 * scale {
                    denom = c(1e-14 * scale);
                }
                y[(i, k)] = -acc / denom;
            }
            let norm = y.column(k).norm();
            y.column_mut(k).scale_mut(1.0 / norm);
        }
        let vectors = q * y;
        let condition = condition_number(&vectors);
        if !(condition <= DEFECTIVE_CONDITION) {
            return Err(MatrixFunctionError::Defective { condition });
        }
        let inverse = vectors
            .clone()
            .try_inverse()
            .ok_or(MatrixFunctionError::Defective {
                condition: f64::INFINITY,
            })?;
        Ok(Self {
            values: t.diagonal().iter().copied().collect(),
            vectors,
            inverse,
            condition,
        })
    }

    /// `V diag(g(λ)) V⁻¹`.
    pub fn apply(&self, g: impl Fn(Complex64) -> Complex64) -> CMatrix {
        let d = CMatrix::from_diagonal(&DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|l| g(*l)),
        ));
        &self.vectors * d * &self.inverse
    }
}

/// Principal power `M^p` of a diagonalizable matrix whose spectrum avoids
/// `(-∞, 0]`. Returns the power and the eigenvector condition number.
pub fn principal_power(m: &CMatrix, p: f64) -> Result<(CMatrix, f64), MatrixFunctionError> {
    let eig = Eigensystem::new(m)?;
    let scale = eig
        .values
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    for z in &eig.values {
        if z.im.abs() <= 1e-12 * scale && z.re <= 1e-14 * scale {
            return Err(MatrixFunctionError::BranchCut { re: z.re, im: z.im });
        }
    }
    Ok((eig.apply(|z| z.powf(p)), eig.condition))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, data: &[f64]) -> CMatrix {
        CMatrix::from_row_iterator(rows, rows, data.iter().map(|x| c(*x)))
    }

    #[test]
    fn singular_values_of_diagonal() {
        let a = m(2, &[3.0, 0.0, 0.0, -0.5]);
        assert!((largest_singular_value(&a) - 3.0).abs() < 1e-14);
        assert!((smallest_singular_value(&a) - 0.5).abs() < 1e-14);
        assert!((condition_number(&a) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn sqrt_pair_inverts() {
        let s = CMatrix::from_row_slice(
            2,
            2,
            &[c(2.0), Complex64::new(0.5, 0.3), Complex64::new(0.5, -0.3), c(1.0)],
        );
        let (r, ri) = hermitian_sqrt_pair(&s).unwrap();
        assert!((&r * &r - &s).norm() < 1e-13);
        assert!((&r * &ri - CMatrix::identity(2, 2)).norm() < 1e-13);
        assert!(hermitian_sqrt_pair(&m(2, &[1.0, 0.0, 0.0, -1.0])).is_err());
    }

    #[test]
    fn fractional_power_of_nonnormal_matrix() {
        // upper triangular with distinct eigenvalues 1 and 4
        let a = m(2, &[1.0, 3.0, 0.0, 4.0]);
        let (half, _) = principal_power(&a, 0.5).unwrap();
        assert!((&half * &half - &a).norm() < 1e-12);
        let (inv, _) = principal_power(&a, -1.0).unwrap();
        assert!((&inv * &a - CMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn jordan_block_is_defective() {
        let a = m(2, &[2.0, 1.0, 0.0, 2.0]);
        assert!(matches!(
            principal_power(&a, 0.5),
            Err(MatrixFunctionError::Defective { .. })
        ));
    }

    #[test]
    fn branch_cut_reports_eigenvalue() {
        let a = m(2, &[1.0, 0.0, 0.0, -2.0]);
        match principal_power(&a, 0.5) {
            Err(MatrixFunctionError::BranchCut { re, .. }) => assert_eq!(re, -2.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn integer_power_matches_product() {
        let a = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(5.0),
                c(1.0),
                Complex64::new(0.0, 1.0),
                c(0.0),
                c(3.0),
                c(0.5),
                c(0.2),
                c(0.0),
                c(2.0),
            ],
        );
        let (cube, _) = principal_power(&a, 3.0).unwrap();
        assert!((cube - &a * &a * &a).norm() < 1e-9);
    }
}
