//! Real Lie algebras given by structure constants in a basis that is declared
//! orthonormal for a left-invariant metric.
//!
//! Basis indices are zero-based throughout the crate: `X_0, …, X_{n-1}`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pbw::{EnvelopingElement, Monomial};

/// Tolerance used by the antisymmetry and Jacobi checks.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("basis index {index} out of range for a {dim}-dimensional algebra")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("structure constants must have shape {dim}x{dim}x{dim}")]
    Shape { dim: usize },
    #[error("algebra dimension must be positive")]
    EmptyAlgebra,
    #[error("antisymmetry violated: c[{i}][{j}][{k}] + c[{j}][{i}][{k}] = {residual:e}")]
    Antisymmetry {
        i: usize,
        j: usize,
        k: usize,
        residual: f64,
    },
    #[error("Jacobi identity violated for triple ({i}, {j}, {k}), component {l}: residual {residual:e}")]
    Jacobi {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        residual: f64,
    },
    #[error("unknown algebra preset `{0}`")]
    UnknownPreset(String),
}

/// A finite-dimensional real Lie algebra, `[X_i, X_j] = Σ_k c[i][j][k] X_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    // flattened c[i][j][k]
    constants: Vec<f64>,
    labels: Vec<String>,
}

impl LieAlgebra {
    /// Builds an algebra from nested structure constants `c[i][j][k]`,
    /// validating antisymmetry and the Jacobi identity.
    pub fn new(constants: &[Vec<Vec<f64>>], labels: Option<Vec<String>>) -> Result<Self, LieError> {
        let dim = constants.len();
        if dim == 0 {
            return Err(LieError::EmptyAlgebra);
        }
        let mut flat = Vec::with_capacity(dim * dim * dim);
        for plane in constants {
            if plane.len() != dim {
                return Err(LieError::Shape { dim });
            }
            for row in plane {
                if row.len() != dim {
                    return Err(LieError::Shape { dim });
                }
                flat.extend_from_slice(row);
            }
        }
        let labels = labels.unwrap_or_else(|| (0..dim).map(|i| format!("X{}", i + 1)).collect());
        let algebra = Self {
            dim,
            constants: flat,
            labels,
        };
        algebra.validate()?;
        Ok(algebra)
    }

    fn from_flat(dim: usize, constants: Vec<f64>, labels: Vec<String>) -> Self {
        Self {
            dim,
            constants,
            labels,
        }
    }

    /// Abelian algebra `ℝⁿ`.
    pub fn abelian(n: usize) -> Self {
        let labels = (0..n).map(|i| format!("X{}", i + 1)).collect();
        Self::from_flat(n, vec![0.0; n * n * n], labels)
    }

    /// Lie algebra of the torus `ℝⁿ/2πℤⁿ`.
    pub fn torus(n: usize) -> Self {
        Self::abelian(n)
    }

    /// Lie algebra of the translation group `ℝⁿ`.
    pub fn euclidean(n: usize) -> Self {
        Self::abelian(n)
    }

    /// `su(2)` with `[X_i, X_j] = ε_{ijk} X_k`.
    pub fn su2() -> Self {
        let mut c = vec![0.0; 27];
        let idx = |i: usize, j: usize, k: usize| (i * 3 + j) * 3 + k;
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[idx(i, j, k)] = 1.0;
            c[idx(j, i, k)] = -1.0;
        }
        Self::from_flat(3, c, vec!["X1".into(), "X2".into(), "X3".into()])
    }

    /// The `ax+b` algebra with basis `{X, Y}` and `[X, Y] = Y`.
    pub fn axb() -> Self {
        let mut c = vec![0.0; 8];
        // [X, Y] = Y, [Y, X] = -Y
        c[2 + 1] = 1.0;
        c[2 * 2 + 1] = -1.0;
        Self::from_flat(2, c, vec!["X".into(), "Y".into()])
    }

    pub fn preset(name: &str, dim: Option<usize>) -> Result<Self, LieError> {
        match name {
            "su2" => Ok(Self::su2()),
            "axb" => Ok(Self::axb()),
            "torus" => Ok(Self::torus(dim.unwrap_or(1))),
            "euclidean" | "abelian" => Ok(Self::euclidean(dim.unwrap_or(1))),
            other => Err(LieError::UnknownPreset(other.to_string())),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    #[inline]
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.constants[(i * self.dim + j) * self.dim + k]
    }

    /// Coefficients of `[X_i, X_j]` in the basis.
    pub fn bracket(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.dim + j) * self.dim;
        &self.constants[start..start + self.dim]
    }

    pub fn is_abelian(&self) -> bool {
        self.constants.iter().all(|c| *c == 0.0)
    }

    fn check_index(&self, index: usize) -> Result<(), LieError> {
        if index < self.dim {
            Ok(())
        } else {
            Err(LieError::IndexOutOfRange {
                index,
                dim: self.dim,
            })
        }
    }

    /// Checks antisymmetry and the Jacobi identity; the first failing
    /// index combination is reported.
    pub fn validate(&self) -> Result<(), LieError> {
        let n = self.dim;
        let scale = self
            .constants
            .iter()
            .fold(1.0_f64, |acc, c| acc.max(c.abs()));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let residual =
                        self.structure_constant(i, j, k) + self.structure_constant(j, i, k);
                    if residual.abs() > JACOBI_TOLERANCE * scale {
                        return Err(LieError::Antisymmetry { i, j, k, residual });
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut residual = 0.0;
                        for m in 0..n {
                            residual += self.structure_constant(i, j, m)
                                * self.structure_constant(m, k, l)
                                + self.structure_constant(j, k, m) * self.structure_constant(m, i, l)
                                + self.structure_constant(k, i, m) * self.structure_constant(m, j, l);
                        }
                        if residual.abs() > JACOBI_TOLERANCE * scale * scale {
                            return Err(LieError::Jacobi {
                                i,
                                j,
                                k,
                                l,
                                residual,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Matrix of `ad X_j`, with `(ad X_j)_{ki} = c[j][i][k]`.
    pub fn ad_matrix(&self, j: usize) -> Result<DMatrix<f64>, LieError> {
        self.check_index(j)?;
        let n = self.dim;
        Ok(DMatrix::from_fn(n, n, |k, i| self.structure_constant(j, i, k)))
    }

    /// `tr(ad X_j) = Σ_i c[j][i][i]`.
    pub fn trace_ad(&self, j: usize) -> Result<f64, LieError> {
        self.check_index(j)?;
        Ok((0..self.dim).map(|i| self.structure_constant(j, i, i)).sum())
    }

    pub fn is_unimodular(&self) -> bool {
        (0..self.dim).all(|j| self.trace_ad(j).map(|t| t == 0.0).unwrap_or(false))
    }

    /// The Laplace–Beltrami element `Δ = Σ_j (-X_j - tr(ad X_j)) X_j`
    /// written in PBW form: `-Σ X_j² - Σ tr(ad X_j) X_j`.
    pub fn laplace_element(self: &Arc<Self>) -> EnvelopingElement {
        let mut delta = EnvelopingElement::zero(self.clone());
        for j in 0..self.dim {
            delta.add_term(Monomial::generator_power(self.dim, j, 2), (-1.0).into());
            let tr = self.trace_ad(j).expect("index in range");
            if tr != 0.0 {
                delta.add_term(Monomial::generator(self.dim, j), (-tr).into());
            }
        }
        delta
    }
}

/// Config block for an algebra: either a preset name or explicit constants.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum AlgebraConfig {
    Preset {
        preset: String,
        #[serde(default)]
        dim: Option<usize>,
    },
    Explicit {
        dim: usize,
        structure_constants: Vec<Vec<Vec<f64>>>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
}

impl AlgebraConfig {
    pub fn build(&self) -> Result<LieAlgebra, LieError> {
        match self {
            AlgebraConfig::Preset { preset, dim } => LieAlgebra::preset(preset, *dim),
            AlgebraConfig::Explicit {
                dim,
                structure_constants,
                labels,
            } => {
                if structure_constants.len() != *dim {
                    return Err(LieError::Shape { dim: *dim });
                }
                LieAlgebra::new(structure_constants, labels.clone())
            }
        }
    }
}
