//! Finite-dimensional Banach representations of the model groups, given by
//! generator matrices `D_j = dπ(X_j)` and a norm on the carrier space.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::su2::spin_generators;
use crate::geometry::{fit_slope, GeometryError, GroupElement, GroupFunction, GroupModel, ModelKind};
use crate::linalg::{
    c, hermitian_sqrt_pair, is_diagonal, largest_singular_value, CMatrix, CVector,
    MatrixFunctionError,
};
use crate::pbw::EnvelopingElement;

/// Bracket compatibility tolerance, relative to `1 + ‖D_i‖‖D_j‖`.
pub const BRACKET_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum RepresentationError {
    #[error("expected {expected} generators, got {got}")]
    GeneratorCount { expected: usize, got: usize },
    #[error("generator {index} is not a {dim}×{dim} matrix")]
    GeneratorShape { index: usize, dim: usize },
    #[error("generators violate [D_{i},D_{j}] = Σ c D_k (defect {defect:e})", i = .i + 1, j = .j + 1)]
    Bracket { i: usize, j: usize, defect: f64 },
    #[error("enveloping element belongs to a different Lie algebra")]
    AlgebraMismatch,
    #[error("vector has length {got}, representation dimension is {dim}")]
    VectorLength { got: usize, dim: usize },
    #[error("invalid Gram matrix: {0}")]
    Gram(MatrixFunctionError),
    #[error("smearing diverges: function decays at rate {decay}, representation grows at rate {growth}")]
    Divergent { decay: f64, growth: f64 },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A Hermitian norm `p(v) = (v* S v)^{1/2}` with its Gram square roots.
#[derive(Debug, Clone)]
pub struct HermitianNorm {
    gram: CMatrix,
    sqrt: CMatrix,
    inv_sqrt: CMatrix,
}

impl HermitianNorm {
    pub fn new(gram: CMatrix) -> Result<Self, MatrixFunctionError> {
        let (sqrt, inv_sqrt) = hermitian_sqrt_pair(&gram)?;
        Ok(Self {
            gram,
            sqrt,
            inv_sqrt,
        })
    }

    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    pub fn sqrt(&self) -> &CMatrix {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &CMatrix {
        &self.inv_sqrt
    }
}

#[derive(Debug, Clone)]
pub enum NormKind {
    L1,
    L2,
    LInf,
    Hermitian(HermitianNorm),
}

impl NormKind {
    pub fn hermitian(gram: CMatrix) -> Result<Self, RepresentationError> {
        HermitianNorm::new(gram)
            .map(NormKind::Hermitian)
            .map_err(RepresentationError::Gram)
    }

    pub fn name(&self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::LInf => "linf",
            NormKind::Hermitian(_) => "hermitian",
        }
    }

    pub fn eval(&self, v: &CVector) -> f64 {
        match self {
            NormKind::L1 => v.iter().map(|z| z.norm()).sum(),
            NormKind::L2 => v.norm(),
            NormKind::LInf => v.iter().map(|z| z.norm()).fold(0.0, f64::max),
            NormKind::Hermitian(h) => (h.sqrt() * v).norm(),
        }
    }

    /// Operator norm induced on `N×N` matrices.
    pub fn operator_norm(&self, a: &CMatrix) -> f64 {
        match self {
            NormKind::L2 => largest_singular_value(a),
            NormKind::L1 => (0..a.ncols())
                .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max),
            NormKind::LInf => (0..a.nrows())
                .map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max),
            NormKind::Hermitian(h) => largest_singular_value(&(h.sqrt() * a * h.inv_sqrt())),
        }
    }

    /// Gram matrix when the norm is Hilbertian (`ℓ²` or Hermitian).
    pub fn gram(&self, dim: usize) -> Option<CMatrix> {
        match self {
            NormKind::L2 => Some(CMatrix::identity(dim, dim)),
            NormKind::Hermitian(h) => Some(h.gram().clone()),
            _ => None,
        }
    }
}

/// Fitted exponential growth `‖π(g)‖ ≤ C e^{c_π d(g)}`.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthEstimate {
    pub c_pi: f64,
    pub prefactor: f64,
    /// `(d(g), log ‖π(g)‖)` pairs.
    pub samples: Vec<(f64, f64)>,
    pub t_max: f64,
    /// True when `t_max` was reduced to avoid overflow.
    pub reduced: bool,
}

/// Sampling parameters for the cached growth estimate.
pub const DEFAULT_GROWTH_DIRECTIONS: usize = 8;
pub const DEFAULT_GROWTH_T_MAX: f64 = 200.0;
const GROWTH_SAMPLES: usize = 64;
const GROWTH_SEED: u64 = 0x6772_6f77;

#[derive(Debug)]
pub struct Representation {
    model: Arc<GroupModel>,
    generators: Vec<CMatrix>,
    norm: NormKind,
    diagonal: Option<Vec<Vec<Complex64>>>,
    torus_modes: Option<Vec<Vec<i64>>>,
    growth: OnceLock<GrowthEstimate>,
}

impl Clone for Representation {
    fn clone(&self) -> Self {
        Self {
            model: self.model.clone(),
            generators: self.generators.clone(),
            norm: self.norm.clone(),
            diagonal: self.diagonal.clone(),
            torus_modes: self.torus_modes.clone(),
            growth: self.growth.clone(),
        }
    }
}

impl Representation {
    /// Validates dimensions, bracket compatibility with the model's algebra
    /// and (through [`NormKind::hermitian`]) positivity of the Gram matrix.
    pub fn new(
        model: Arc<GroupModel>,
        generators: Vec<CMatrix>,
        norm: NormKind,
    ) -> Result<Self, RepresentationError> {
        let algebra = model.algebra().clone();
        let n = algebra.dim();
        if generators.len() != n {
            return Err(RepresentationError::GeneratorCount {
                expected: n,
                got: generators.len(),
            });
        }
        let dim = generators[0].nrows();
        for (index, g) in generators.iter().enumerate() {
            if g.nrows() != dim || g.ncols() != dim || dim == 0 {
                return Err(RepresentationError::GeneratorShape { index, dim });
            }
        }
        if let NormKind::Hermitian(h) = &norm {
            if h.gram().nrows() != dim {
                return Err(RepresentationError::GeneratorShape { index: n, dim });
            }
        }
        for i in 0..n {
            for j in 0..n {
                let comm = &generators[i] * &generators[j] - &generators[j] * &generators[i];
                let mut target = CMatrix::zeros(dim, dim);
                for (k, ck) in algebra.bracket(i, j).iter().enumerate() {
                    if *ck != 0.0 {
                        target += &generators[k] * c(*ck);
                    }
                }
                let defect = (comm - target).norm();
                let scale = 1.0 + generators[i].norm() * generators[j].norm();
                if defect > BRACKET_TOLERANCE * scale {
                    return Err(RepresentationError::Bracket { i, j, defect });
                }
            }
        }
        let diagonal = generators
            .iter()
            .all(is_diagonal)
            .then(|| generators.iter().map(|g| g.diagonal().iter().copied().collect()).collect());
        Ok(Self {
            model,
            generators,
            norm,
            diagonal,
            torus_modes: None,
            growth: OnceLock::new(),
        })
    }

    /// Left regular representation of `Tⁿ` on trigonometric polynomials
    /// `e_k(θ) = e^{ik·θ}`, `|k|_∞ ≤ truncation`: `π(θ)e_k = e^{-ik·θ}e_k`,
    /// `D_j = diag(-i k_j)`. Basis vectors are ordered lexicographically in
    /// `k`.
    pub fn torus_regular(
        model: Arc<GroupModel>,
        truncation: usize,
        norm: NormKind,
    ) -> Result<Self, RepresentationError> {
        let ModelKind::Torus(n) = model.kind() else {
            return Err(RepresentationError::Unsupported(
                "torus_regular needs a torus model".into(),
            ));
        };
        let t = truncation as i64;
        let side = 2 * truncation + 1;
        let total = side.pow(n as u32);
        let modes: Vec<Vec<i64>> = (0..total)
            .map(|mut q| {
                let mut k = vec![0; n];
                for axis in (0..n).rev() {
                    k[axis] = (q % side) as i64 - t;
                    q /= side;
                }
                k
            })
            .collect();
        let generators = (0..n)
            .map(|j| {
                CMatrix::from_diagonal(&DVector::from_iterator(
                    total,
                    modes.iter().map(|k| Complex64::new(0.0, -(k[j] as f64))),
                ))
            })
            .collect();
        let mut rep = Self::new(model, generators, norm)?;
        rep.torus_modes = Some(modes);
        Ok(rep)
    }

    /// Spin-ℓ irreducible representation of SU(2) (`two_l = 2ℓ`), unitary
    /// for the default `ℓ²` norm. Smearing is exact for `ℓ ≤ ℓ_max` of the
    /// model.
    pub fn su2_irrep(
        model: Arc<GroupModel>,
        two_l: u32,
        norm: NormKind,
    ) -> Result<Self, RepresentationError> {
        if model.kind() != ModelKind::Su2 {
            return Err(RepresentationError::Unsupported(
                "su2_irrep needs the SU(2) model".into(),
            ));
        }
        Self::new(model, spin_generators(two_l), norm)
    }

    /// `ℝⁿ` acting through `π(x) = exp(Σ x_j A_j)` for commuting `A_j`.
    pub fn euclidean_matrix(
        model: Arc<GroupModel>,
        matrices: Vec<CMatrix>,
        norm: NormKind,
    ) -> Result<Self, RepresentationError> {
        if !matches!(model.kind(), ModelKind::Euclidean(_)) {
            return Err(RepresentationError::Unsupported(
                "euclidean_matrix needs a Euclidean model".into(),
            ));
        }
        Self::new(model, matrices, norm)
    }

    pub fn model(&self) -> &Arc<GroupModel> {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.generators[0].nrows()
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn norm_kind(&self) -> &NormKind {
        &self.norm
    }

    /// Frequencies `k` of the basis vectors of a torus regular
    /// representation.
    pub fn torus_modes(&self) -> Option<&[Vec<i64>]> {
        self.torus_modes.as_deref()
    }

    pub fn mode_index(&self, k: &[i64]) -> Option<usize> {
        self.torus_modes.as_ref()?.iter().position(|m| m == k)
    }

    /// Same representation with generators `D'_i = Σ_j T_ij D_j` of the
    /// transformed basis. The algebra is re-expressed accordingly, so only
    /// abelian algebras are accepted.
    pub fn with_generators(&self, generators: Vec<CMatrix>) -> Result<Self, RepresentationError> {
        let mut out = Self::new(self.model.clone(), generators, self.norm.clone())?;
        out.torus_modes = self.torus_modes.clone();
        Ok(out)
    }

    pub fn norm(&self, v: &CVector) -> f64 {
        self.norm.eval(v)
    }

    pub fn operator_norm(&self, a: &CMatrix) -> f64 {
        self.norm.operator_norm(a)
    }

    pub fn check_vector(&self, v: &CVector) -> Result<(), RepresentationError> {
        if v.len() != self.dim() {
            return Err(RepresentationError::VectorLength {
                got: v.len(),
                dim: self.dim(),
            });
        }
        Ok(())
    }

    /// `dπ(u)` for an element of the enveloping algebra.
    pub fn d_pi(&self, u: &EnvelopingElement) -> Result<CMatrix, RepresentationError> {
        if **u.algebra() != **self.model.algebra() {
            return Err(RepresentationError::AlgebraMismatch);
        }
        let dim = self.dim();
        let mut powers: HashMap<(usize, u32), CMatrix> = HashMap::new();
        let mut out = CMatrix::zeros(dim, dim);
        for (mono, coef) in u.terms() {
            let mut term = CMatrix::identity(dim, dim);
            for (j, &e) in mono.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let p = powers
                    .entry((j, e))
                    .or_insert_with(|| matrix_power(&self.generators[j], e));
                term *= &*p;
            }
            out += term * *coef;
        }
        Ok(out)
    }

    /// `exp(Σ x_j D_j)`.
    pub fn pi_exp(&self, x: &[f64]) -> CMatrix {
        let dim = self.dim();
        if let Some(diag) = &self.diagonal {
            return CMatrix::from_diagonal(&DVector::from_iterator(
                dim,
                (0..dim).map(|i| {
                    diag.iter()
                        .zip(x)
                        .map(|(d, xj)| d[i] * *xj)
                        .sum::<Complex64>()
                        .exp()
                }),
            ));
        }
        let mut a = CMatrix::zeros(dim, dim);
        for (g, xj) in self.generators.iter().zip(x) {
            a += g * c(*xj);
        }
        a.exp()
    }

    /// `π(g)`, through exponential coordinates.
    pub fn pi(&self, g: &GroupElement) -> Result<CMatrix, RepresentationError> {
        let x = self.model.log(g)?;
        Ok(self.pi_exp(&x))
    }

    /// Samples `‖π(exp(t u))‖` along the coordinate directions `±e_j` and
    /// `n_dirs` seeded random unit directions, for `t ∈ (0, t_max]`, and
    /// fits the exponential rate on the upper half of each ray. Compact
    /// models have `c_π = 0`.
    pub fn growth_rate(&self, n_dirs: usize, t_max: f64) -> GrowthEstimate {
        let n = self.model.dim();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for j in 0..n {
            for s in [1.0, -1.0] {
                let mut u = vec![0.0; n];
                u[j] = s;
                dirs.push(u);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(GROWTH_SEED);
        for _ in 0..n_dirs {
            let u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let len = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            if len > 0.0 {
                dirs.push(u.into_iter().map(|x| x / len).collect());
            }
        }
        let mut t_max = t_max.max(f64::MIN_POSITIVE);
        let mut reduced = false;
        loop {
            let mut samples = vec![(0.0, self.operator_norm(&CMatrix::identity(self.dim(), self.dim())).ln())];
            let mut rate = 0.0_f64;
            let mut overflow = false;
            'dirs: for u in &dirs {
                let mut ray = Vec::with_capacity(GROWTH_SAMPLES);
                for i in 1..=GROWTH_SAMPLES {
                    let t = t_max * i as f64 / GROWTH_SAMPLES as f64;
                    let x: Vec<f64> = u.iter().map(|v| v * t).collect();
                    let w = self.operator_norm(&self.pi_exp(&x));
                    if !w.is_finite() || w <= 0.0 {
                        overflow = true;
                        break 'dirs;
                    }
                    ray.push((t, w.ln()));
                }
                if self.model.is_compact() {
                    samples.extend(ray);
                    continue;
                }
                let upper = &ray[ray.len() / 2..];
                if let Some((slope, _)) = fit_slope(upper) {
                    rate = rate.max(slope);
                }
                samples.extend(ray);
            }
            if overflow && t_max > 1e-3 {
                t_max /= 2.0;
                reduced = true;
                continue;
            }
            let c_pi = if self.model.is_compact() { 0.0 } else { rate.max(0.0) };
            let prefactor = samples
                .iter()
                .map(|(t, lw)| (lw - c_pi * t).exp())
                .fold(0.0, f64::max);
            return GrowthEstimate {
                c_pi,
                prefactor,
                samples,
                t_max,
                reduced,
            };
        }
    }

    /// Growth estimate with the default sampling, computed once.
    pub fn growth(&self) -> &GrowthEstimate {
        self.growth
            .get_or_init(|| self.growth_rate(DEFAULT_GROWTH_DIRECTIONS, DEFAULT_GROWTH_T_MAX))
    }

    /// `Π(φ)v = ∫ φ(g) π(g) v dg` by quadrature over the model's nodes.
    ///
    /// On Euclidean models the fitted decay rate of `φ` must exceed the
    /// growth rate `c_π`.
    pub fn smear(&self, phi: &GroupFunction, v: &CVector) -> Result<CVector, RepresentationError> {
        self.check_vector(v)?;
        if phi.signature() != self.model.signature() {
            return Err(GeometryError::ModelMismatch.into());
        }
        if let Some(decay) = self.model.decay_rate(phi)? {
            let growth = self.growth().c_pi;
            if decay <= growth + 1e-6 {
                return Err(RepresentationError::Divergent { decay, growth });
            }
        }
        let dim = self.dim();
        let values = phi.values();
        let mut out = CVector::zeros(dim);
        if let Some(grid) = self.model.grid() {
            if let Some(diag) = &self.diagonal {
                // π(x) is diagonal: accumulate per basis vector
                let h = grid.spacing();
                for (q, f) in values.iter().enumerate() {
                    if *f == Complex64::default() {
                        continue;
                    }
                    let fw = f * grid.weight();
                    let offs = grid.offsets(q);
                    for i in 0..dim {
                        let arg: Complex64 = diag
                            .iter()
                            .zip(&offs)
                            .map(|(d, o)| d[i] * (*o as f64 * h))
                            .sum();
                        out[i] += fw * arg.exp() * v[i];
                    }
                }
                return Ok(out);
            }
            // commuting generators: π(x) = Π_j exp(x_j D_j), cached per axis
            let h = grid.spacing();
            let axis_cache: Vec<Vec<CMatrix>> = self
                .generators
                .iter()
                .map(|g| {
                    (0..grid.points())
                        .map(|i| (g * c(grid.wrap(i) as f64 * h)).exp())
                        .collect()
                })
                .collect();
            for (q, f) in values.iter().enumerate() {
                if *f == Complex64::default() {
                    continue;
                }
                let idx = grid.multi_index(q);
                let mut w = v.clone();
                for (j, i) in idx.iter().enumerate() {
                    w = &axis_cache[j][*i] * w;
                }
                out += w * (f * grid.weight());
            }
            return Ok(out);
        }
        let su2 = self.model.su2_grid().expect("grid or SU(2)");
        // π(g) = e^{αD₃} e^{βD₂} e^{γD₃}
        let mut cache: HashMap<(usize, u64), CMatrix> = HashMap::new();
        let mut factor = |gen: usize, angle: f64| {
            cache
                .entry((gen, angle.to_bits()))
                .or_insert_with(|| (&self.generators[gen] * c(angle)).exp())
                .clone()
        };
        for (q, f) in values.iter().enumerate() {
            if *f == Complex64::default() {
                continue;
            }
            let [a, b, g] = su2.euler(q);
            let w = factor(2, a) * (factor(1, b) * (factor(2, g) * v));
            out += w * (f * su2.weight(q));
        }
        Ok(out)
    }
}

fn matrix_power(a: &CMatrix, e: u32) -> CMatrix {
    let mut out = CMatrix::identity(a.nrows(), a.ncols());
    for _ in 0..e {
        out *= a;
    }
    out
}

/// Norm block of a representation config: `"l1"`, `"l2"`, `"linf"` or
/// `{ "hermitian": [[[re, im], ...], ...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormConfig {
    Named(String),
    Hermitian { hermitian: Vec<Vec<[f64; 2]>> },
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig::Named("l2".into())
    }
}

impl NormConfig {
    pub fn build(&self) -> Result<NormKind, RepresentationError> {
        match self {
            NormConfig::Named(name) => match name.as_str() {
                "l1" => Ok(NormKind::L1),
                "l2" => Ok(NormKind::L2),
                "linf" => Ok(NormKind::LInf),
                other => Err(RepresentationError::Unsupported(format!(
                    "unknown norm `{other}` (expected l1, l2, linf or a hermitian Gram matrix)"
                ))),
            },
            NormConfig::Hermitian { hermitian } => NormKind::hermitian(complex_matrix(hermitian)?),
        }
    }
}

fn complex_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix, RepresentationError> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(RepresentationError::Unsupported(
            "matrices must be square and non-empty".into(),
        ));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| {
        Complex64::new(rows[i][j][0], rows[i][j][1])
    }))
}

/// Representation block of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepresentationConfig {
    TorusRegular {
        #[serde(rename = "N")]
        truncation: usize,
        #[serde(default)]
        norm: NormConfig,
    },
    Su2Irrep {
        l: f64,
        #[serde(default)]
        norm: NormConfig,
    },
    /// Real generator matrices; `matrices_imag` optionally adds imaginary parts.
    EuclideanMatrix {
        matrices: Vec<Vec<Vec<f64>>>,
        #[serde(default)]
        matrices_imag: Option<Vec<Vec<Vec<f64>>>>,
        #[serde(default)]
        norm: NormConfig,
    },
}

impl RepresentationConfig {
    pub fn build(&self, model: Arc<GroupModel>) -> Result<Representation, RepresentationError> {
        match self {
            RepresentationConfig::TorusRegular { truncation, norm } => {
                Representation::torus_regular(model, *truncation, norm.build()?)
            }
            RepresentationConfig::Su2Irrep { l, norm } => {
                let two = 2.0 * l;
                if two < 0.0 || (two - two.round()).abs() > 1e-12 {
                    return Err(RepresentationError::Unsupported(format!(
                        "spin l = {l} must be a non-negative multiple of 1/2"
                    )));
                }
                Representation::su2_irrep(model, two.round() as u32, norm.build()?)
            }
            RepresentationConfig::EuclideanMatrix {
                matrices,
                matrices_imag,
                norm,
            } => {
                let mut mats = Vec::with_capacity(matrices.len());
                for (idx, m) in matrices.iter().enumerate() {
                    let imag = matrices_imag.as_ref().and_then(|v| v.get(idx));
                    let n = m.len();
                    if n == 0
                        || m.iter().any(|r| r.len() != n)
                        || imag.is_some_and(|im| im.len() != n || im.iter().any(|r| r.len() != n))
                    {
                        return Err(RepresentationError::GeneratorShape { index: idx, dim: n });
                    }
                    mats.push(CMatrix::from_fn(n, n, |i, j| {
                        Complex64::new(m[i][j], imag.map_or(0.0, |im| im[i][j]))
                    }));
                }
                Representation::euclidean_matrix(model, mats, norm.build()?)
            }
        }
    }
}
