//! The four Sobolev norm families on a representation: standard `p_k`,
//! Laplace `Δp_s`, induced `Sp_s` and negative `p_{-k}`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{ModelKind, PeriodicGrid};
use crate::linalg::{
    c, condition_number, hermitian_max_eigenvalue, principal_power, CMatrix, CVector,
    MatrixFunctionError,
};
use crate::pbw::{resolvent_element, Monomial};
use crate::representation::{NormKind, Representation, RepresentationError};

/// Gram matrices with a larger condition number are flagged.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Error)]
pub enum SobolevError {
    #[error("Laplace Sobolev order {0} must be even")]
    OddOrder(u32),
    #[error("R must be positive (got {0})")]
    NonPositiveR(f64),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Matrix(#[from] MatrixFunctionError),
    #[error(transparent)]
    Representation(#[from] RepresentationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormFamily {
    Standard,
    Laplace,
    Induced,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub family: NormFamily,
    pub order: f64,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub value: f64,
    pub diagnostics: BTreeMap<String, f64>,
}

impl NormReport {
    fn new(family: NormFamily, order: f64, r: Option<f64>, value: f64) -> Self {
        Self {
            family,
            order,
            r,
            value,
            diagnostics: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }
}

/// Fractional powers keyed by `(s, R)` bits, with eigenvector condition.
type PowerCache = Mutex<HashMap<(u64, u64), Arc<(CMatrix, f64)>>>;

/// Norm evaluator for one representation, caching the matrices shared by
/// repeated evaluations (monomial actions, Gram matrices, fractional powers).
#[derive(Debug)]
pub struct Sobolev<'a> {
    rep: &'a Representation,
    monomials: Mutex<HashMap<u32, Arc<Vec<CMatrix>>>>,
    laplace_powers: PowerCache,
    laplace_integer: Mutex<HashMap<(u32, u64), Arc<CMatrix>>>,
    dual_grams: Mutex<HashMap<u32, Arc<DualNorm>>>,
}

/// `p'_k` on the dual space, `λ(v) = Σ λ_i v_i`.
#[derive(Debug, Clone)]
pub struct DualNorm {
    k: u32,
    kind: DualKind,
}

#[derive(Debug, Clone)]
enum DualKind {
    /// `p'_k(λ)² = λ* T λ`, stored with `conj(T)⁻¹` for `p_{-k}`.
    Gram {
        gram: CMatrix,
        inverse_conj: CMatrix,
        condition: f64,
    },
    /// Dual of `ℓ¹` at `k = 0`.
    Sup,
    /// Dual of `ℓ^∞` at `k = 0`.
    Sum,
}

impl DualNorm {
    pub fn order(&self) -> u32 {
        self.k
    }

    pub fn eval(&self, lambda: &CVector) -> f64 {
        match &self.kind {
            DualKind::Gram { gram, .. } => (lambda.adjoint() * gram * lambda)[(0, 0)].re.max(0.0).sqrt(),
            DualKind::Sup => lambda.iter().map(|z| z.norm()).fold(0.0, f64::max),
            DualKind::Sum => lambda.iter().map(|z| z.norm()).sum(),
        }
    }

    /// `p_{-k}(v) = sup_{p'_k(λ) ≤ 1} |λ(v)|`.
    pub fn negative(&self, v: &CVector) -> f64 {
        match &self.kind {
            DualKind::Gram { inverse_conj, .. } => {
                (v.adjoint() * inverse_conj * v)[(0, 0)].re.max(0.0).sqrt()
            }
            DualKind::Sup => v.iter().map(|z| z.norm()).sum(),
            DualKind::Sum => v.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }

    pub fn condition(&self) -> f64 {
        match &self.kind {
            DualKind::Gram { condition, .. } => *condition,
            _ => 1.0,
        }
    }
}

impl<'a> Sobolev<'a> {
    pub fn new(rep: &'a Representation) -> Self {
        Self {
            rep,
            monomials: Mutex::new(HashMap::new()),
            laplace_powers: Mutex::new(HashMap::new()),
            laplace_integer: Mutex::new(HashMap::new()),
            dual_grams: Mutex::new(HashMap::new()),
        }
    }

    pub fn representation(&self) -> &Representation {
        self.rep
    }

    /// `dπ(X^α)` for every PBW monomial of degree `≤ k`, graded order.
    pub fn monomial_matrices(&self, k: u32) -> Arc<Vec<CMatrix>> {
        if let Some(m) = self.monomials.lock().expect("cache").get(&k) {
            return m.clone();
        }
        let m = Arc::new(monomial_actions(self.rep.generators(), k));
        self.monomials.lock().expect("cache").insert(k, m.clone());
        m
    }

    /// `p_k(v) = (Σ_{|α| ≤ k} p(dπ(X^α) v)²)^{1/2}`.
    pub fn standard(&self, v: &CVector, k: u32) -> Result<f64, SobolevError> {
        self.rep.check_vector(v)?;
        let sum: f64 = self
            .monomial_matrices(k)
            .iter()
            .map(|m| self.rep.norm(&(m * v)).powi(2))
            .sum();
        Ok(sum.sqrt())
    }

    /// `Δp_k(v) = p(dπ((R²+Δ)^{k/2}) v)` for even `k`.
    pub fn laplace_even(&self, v: &CVector, order: u32, r: f64) -> Result<f64, SobolevError> {
        self.rep.check_vector(v)?;
        if !order.is_multiple_of(2) {
            return Err(SobolevError::OddOrder(order));
        }
        if !(r > 0.0) {
            return Err(SobolevError::NonPositiveR(r));
        }
        let key = (order, r.to_bits());
        let cached = self.laplace_integer.lock().expect("cache").get(&key).cloned();
        let m = match cached {
            Some(m) => m,
            None => {
                let u = resolvent_element(self.rep.model().algebra(), r, order / 2);
                let m = Arc::new(self.rep.d_pi(&u)?);
                self.laplace_integer.lock().expect("cache").insert(key, m.clone());
                m
            }
        };
        Ok(self.rep.norm(&(m.as_ref() * v)))
    }

    /// `M = R² I + dπ(Δ)`.
    pub fn laplace_matrix(&self, r: f64) -> Result<CMatrix, SobolevError> {
        let n = self.rep.dim();
        Ok(CMatrix::identity(n, n) * c(r * r)
            + self.rep.d_pi(&self.rep.model().algebra().laplace_element())?)
    }

    /// `Δp_s(v) = p(M^{s/2} v)` with the principal power.
    pub fn laplace(&self, v: &CVector, s: f64, r: f64) -> Result<NormReport, SobolevError> {
        self.rep.check_vector(v)?;
        if !(r > 0.0) {
            return Err(SobolevError::NonPositiveR(r));
        }
        let key = (s.to_bits(), r.to_bits());
        let cached = self.laplace_powers.lock().expect("cache").get(&key).cloned();
        let power = match cached {
            Some(p) => p,
            None => {
                let p = Arc::new(principal_power(&self.laplace_matrix(r)?, s / 2.0)?);
                self.laplace_powers.lock().expect("cache").insert(key, p.clone());
                p
            }
        };
        Ok(
            NormReport::new(NormFamily::Laplace, s, Some(r), self.rep.norm(&(&power.0 * v)))
                .with("eigenvector_condition", power.1),
        )
    }

    /// The dual norm `p'_k`: the standard Sobolev norm of the dual
    /// representation `dπ'(X) = -dπ(X)ᵀ` over the dual of `p`.
    pub fn dual_norm(&self, k: u32) -> Result<Arc<DualNorm>, SobolevError> {
        if let Some(d) = self.dual_grams.lock().expect("cache").get(&k) {
            return Ok(d.clone());
        }
        let n = self.rep.dim();
        let kind = match self.rep.norm_kind() {
            NormKind::L1 | NormKind::LInf if k > 0 => {
                return Err(SobolevError::Unsupported(format!(
                    "dual Sobolev norms of order {k} need a Hermitian norm; ℓ¹/ℓ^∞ duals are only available at order 0"
                )))
            }
            NormKind::L1 => DualKind::Sup,
            NormKind::LInf => DualKind::Sum,
            hilbert => {
                let s = hilbert.gram(n).expect("Hilbertian norm");
                let base = s
                    .clone()
                    .try_inverse()
                    .ok_or(MatrixFunctionError::NotPositiveDefinite { min_eigenvalue: 0.0 })?
                    .map(|z| z.conj());
                let dual_gens: Vec<CMatrix> =
                    self.rep.generators().iter().map(|d| -d.transpose()).collect();
                let mut gram = CMatrix::zeros(n, n);
                for m in monomial_actions(&dual_gens, k) {
                    gram += m.adjoint() * &base * m;
                }
                let gram = (&gram + gram.adjoint()) * c(0.5);
                let condition = condition_number(&gram);
                let inverse_conj = gram
                    .map(|z| z.conj())
                    .try_inverse()
                    .ok_or(MatrixFunctionError::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
                DualKind::Gram {
                    gram,
                    inverse_conj,
                    condition,
                }
            }
        };
        let d = Arc::new(DualNorm { k, kind });
        self.dual_grams.lock().expect("cache").insert(k, d.clone());
        Ok(d)
    }

    /// `p_{-k}(v) = sup { |λ(v)| : p'_k(λ) ≤ 1 }`.
    pub fn negative(&self, v: &CVector, k: u32) -> Result<NormReport, SobolevError> {
        self.rep.check_vector(v)?;
        let dual = self.dual_norm(k)?;
        let cond = dual.condition();
        Ok(NormReport::new(NormFamily::Negative, -(k as f64), None, dual.negative(v))
            .with("gram_condition", cond)
            .with("ill_conditioned", if cond > GRAM_CONDITION_LIMIT { 1.0 } else { 0.0 }))
    }

    /// Sobolev norm of integer order `j`, negative orders through the dual
    /// pipeline.
    pub fn integer_order(&self, v: &CVector, j: i64) -> Result<f64, SobolevError> {
        if j >= 0 {
            self.standard(v, j as u32)
        } else {
            Ok(self.negative(v, (-j) as u32)?.value)
        }
    }
}

/// `dπ(X^α)` for all monomials of degree `≤ k`, given generator matrices.
pub fn monomial_actions(generators: &[CMatrix], k: u32) -> Vec<CMatrix> {
    let n = generators.len();
    let dim = generators[0].nrows();
    let mut cache: HashMap<Vec<u32>, CMatrix> = HashMap::new();
    Monomial::all_up_to_degree(n, k)
        .into_iter()
        .map(|mono| {
            let e = mono.exponents().to_vec();
            let mut m = CMatrix::identity(dim, dim);
            for (j, &p) in e.iter().enumerate() {
                for _ in 0..p {
                    m *= &generators[j];
                }
            }
            cache.insert(e, m.clone());
            m
        })
        .collect()
}

pub fn standard_sobolev(rep: &Representation, v: &CVector, k: u32) -> Result<f64, SobolevError> {
    Sobolev::new(rep).standard(v, k)
}

pub fn laplace_sobolev_even(
    rep: &Representation,
    v: &CVector,
    order: u32,
    r: f64,
) -> Result<f64, SobolevError> {
    Sobolev::new(rep).laplace_even(v, order, r)
}

pub fn laplace_sobolev(
    rep: &Representation,
    v: &CVector,
    s: f64,
    r: f64,
) -> Result<NormReport, SobolevError> {
    Sobolev::new(rep).laplace(v, s, r)
}

pub fn negative_sobolev(rep: &Representation, v: &CVector, k: u32) -> Result<NormReport, SobolevError> {
    Sobolev::new(rep).negative(v, k)
}

pub fn dual_norm(rep: &Representation, k: u32) -> Result<Arc<DualNorm>, SobolevError> {
    Sobolev::new(rep).dual_norm(k)
}

/// Discretization of the induced norms `Sp_s`: the bump
/// `φ(x) = exp(1 - 1/(1-|x|²))` on the unit ball in exponential
/// coordinates, sampled on `points` nodes per axis of `[-1, 1)` and
/// zero-padded by `pad`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InducedSettings {
    pub points: usize,
    pub pad: usize,
    /// Random restarts of the phase ascent used for `ℓ¹` norms.
    pub restarts: usize,
}

impl Default for InducedSettings {
    fn default() -> Self {
        Self {
            points: 256,
            pad: 2,
            restarts: 8,
        }
    }
}

pub fn bump(x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|t| t * t).sum();
    if r2 >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r2)).exp()
    }
}

/// `Sp_s(v) = sup_{p'(λ) ≤ 1} ‖φ · λ(π(·)v)‖_{H^s(ℝⁿ)}` on torus and
/// Euclidean models.
#[derive(Debug)]
pub struct InducedSobolev<'a> {
    rep: &'a Representation,
    settings: InducedSettings,
    grid: PeriodicGrid,
    /// (node, φ(x)) for nodes inside the ball.
    support: Vec<(usize, f64)>,
}

impl<'a> InducedSobolev<'a> {
    pub fn new(rep: &'a Representation, settings: InducedSettings) -> Result<Self, SobolevError> {
        let n = match rep.model().kind() {
            ModelKind::Torus(n) | ModelKind::Euclidean(n) => n,
            ModelKind::Su2 => {
                return Err(SobolevError::Unsupported(
                    "induced Sobolev norms need a torus or Euclidean model (no SU(2) chart)".into(),
                ))
            }
        };
        if settings.points < 4 || settings.pad == 0 {
            return Err(SobolevError::Unsupported("induced grid too small".into()));
        }
        let total = settings.points * settings.pad;
        let period = 2.0 * settings.pad as f64;
        let grid = PeriodicGrid::new(n, total, period);
        let support = (0..grid.len())
            .filter_map(|q| {
                let x = grid.coords(q);
                let b = bump(&x);
                (b > 0.0).then_some((q, b))
            })
            .collect();
        Ok(Self {
            rep,
            settings,
            grid,
            support,
        })
    }

    /// Gram matrix `G = Σ_ξ w_ξ Û(ξ) Û(ξ)*` of `λ ↦ ‖φ λ(π(·)v)‖²_{H^s}`
    /// in the variable `a = conj(λ)`, for each order in `orders`.
    pub fn grams(&self, v: &CVector, orders: &[f64]) -> Result<Vec<CMatrix>, SobolevError> {
        self.rep.check_vector(v)?;
        let dim = self.rep.dim();
        let len = self.grid.len();
        // columns: component i of φ(x) π(x) v over the padded grid
        let mut columns = vec![vec![Complex64::default(); len]; dim];
        for &(q, b) in &self.support {
            let x = self.grid.coords(q);
            let w = self.rep.pi_exp(&x) * v;
            for i in 0..dim {
                columns[i][q] = w[i] * b;
            }
        }
        let coeffs: Vec<Vec<Complex64>> = columns.iter().map(|col| self.grid.forward(col)).collect();
        let vol = self.grid.period().powi(self.grid.dim() as i32);
        let lambdas: Vec<f64> = (0..len).map(|q| self.grid.frequency_norm_sq(q)).collect();
        Ok(orders
            .iter()
            .map(|s| {
                let mut g = CMatrix::zeros(dim, dim);
                for q in 0..len {
                    let w = vol * (1.0 + lambdas[q]).powf(*s);
                    let u = DVector::from_iterator(dim, coeffs.iter().map(|c| c[q]));
                    if u.iter().all(|z| *z == Complex64::default()) {
                        continue;
                    }
                    g += &u * u.adjoint() * c(w);
                }
                g
            })
            .collect())
    }

    pub fn value(&self, v: &CVector, s: f64) -> Result<NormReport, SobolevError> {
        Ok(self.values(v, &[s])?.remove(0))
    }

    /// `Sp_s(v)` for several orders at once (the grid transform is shared).
    pub fn values(&self, v: &CVector, orders: &[f64]) -> Result<Vec<NormReport>, SobolevError> {
        let grams = self.grams(v, orders)?;
        Ok(orders
            .iter()
            .zip(grams)
            .map(|(s, g)| {
                let value = self.dual_ball_sup(&g).max(0.0).sqrt();
                NormReport::new(NormFamily::Induced, *s, None, value)
                    .with("grid_points", self.settings.points as f64)
                    .with("padding", self.settings.pad as f64)
            })
            .collect())
    }

    /// `sup a*Ga` over the dual unit ball of the representation's norm.
    fn dual_ball_sup(&self, g: &CMatrix) -> f64 {
        match self.rep.norm_kind() {
            NormKind::L2 => hermitian_max_eigenvalue(g),
            NormKind::Hermitian(h) => hermitian_max_eigenvalue(&(h.sqrt() * g * h.sqrt())),
            // dual ball is the ℓ¹ ball: extreme points are phased basis vectors
            NormKind::LInf => g.diagonal().iter().map(|z| z.re).fold(0.0, f64::max),
            // dual ball is the polydisc: phase ascent from several starts
            NormKind::L1 => polydisc_max(g, self.settings.restarts),
        }
    }
}

/// Maximizes `a*Ga` over `|a_i| ≤ 1` by coordinate phase ascent. The
/// result is a lower bound for the true maximum.
fn polydisc_max(g: &CMatrix, restarts: usize) -> f64 {
    let n = g.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x706f_6c79);
    let mut best = 0.0_f64;
    for start in 0..restarts.max(1) {
        let mut a: Vec<Complex64> = (0..n)
            .map(|_| {
                if start == 0 {
                    c(1.0)
                } else {
                    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
                }
            })
            .collect();
        let value = |a: &[Complex64]| {
            let av = DVector::from_column_slice(a);
            (av.adjoint() * g * &av)[(0, 0)].re
        };
        let mut current = value(&a);
        for _ in 0..200 {
            for i in 0..n {
                let s: Complex64 = (0..n).filter(|j| *j != i).map(|j| g[(i, j)] * a[j]).sum();
                if s.norm() > 0.0 {
                    a[i] = s / s.norm();
                }
            }
            let next = value(&a);
            if next <= current * (1.0 + 1e-14) {
                current = current.max(next);
                break;
            }
            current = next;
        }
        best = best.max(current);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GroupModel;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    fn torus_rep(n_trunc: usize, norm: NormKind) -> Representation {
        let model = Arc::new(GroupModel::torus(1, 64).unwrap());
        Representation::torus_regular(model, n_trunc, norm).unwrap()
    }

    fn unit(rep: &Representation, k: i64) -> CVector {
        let mut v = CVector::zeros(rep.dim());
        v[rep.mode_index(&[k]).unwrap()] = c(1.0);
        v
    }

    fn random_vector(dim: usize, rng: &mut ChaCha8Rng) -> CVector {
        CVector::from_iterator(
            dim,
            (0..dim).map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))),
        )
    }

    #[test]
    fn standard_norms_on_modes() {
        let rep = torus_rep(6, NormKind::L2);
        let s = Sobolev::new(&rep);
        for k in -6..=6i64 {
            let v = unit(&rep, k);
            assert_eq!(s.standard(&v, 0).unwrap(), 1.0);
            let kf = k as f64;
            let expect = (1.0 + kf * kf + kf.powi(4)).sqrt();
            assert!((s.standard(&v, 2).unwrap() - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn standard_norm_spin_one_definition() {
        let model = Arc::new(GroupModel::su2(1.0).unwrap());
        let rep = Representation::su2_irrep(model, 2, NormKind::L2).unwrap();
        let v = CVector::from_vec(vec![c(1.0), Complex64::new(0.5, -1.0), c(0.25)]);
        let direct: f64 = v.norm_squared()
            + rep.generators().iter().map(|d| (d * &v).norm_squared()).sum::<f64>();
        assert!((standard_sobolev(&rep, &v, 1).unwrap() - direct.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn laplace_norms_on_modes() {
        let rep = torus_rep(5, NormKind::L2);
        let s = Sobolev::new(&rep);
        for k in -5..=5i64 {
            let v = unit(&rep, k);
            let kf = (k * k) as f64;
            assert!((s.laplace_even(&v, 2, 1.0).unwrap() - (1.0 + kf)).abs() < 1e-12);
            for order in [-2.0, -0.5, 0.0, 1.3, 4.0] {
                let lap = s.laplace(&v, order, 1.0).unwrap().value;
                assert!((lap - (1.0 + kf).powf(order / 2.0)).abs() < 1e-10 * lap);
            }
        }
        assert!(matches!(s.laplace_even(&unit(&rep, 0), 3, 1.0), Err(SobolevError::OddOrder(3))));
    }

    #[test]
    fn even_and_real_laplace_agree() {
        let model = Arc::new(GroupModel::su2(2.0).unwrap());
        let rep = Representation::su2_irrep(model, 3, NormKind::L2).unwrap();
        let s = Sobolev::new(&rep);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_vector(4, &mut rng);
        for order in [0u32, 2, 4, 6] {
            let a = s.laplace_even(&v, order, 0.7).unwrap();
            let b = s.laplace(&v, order as f64, 0.7).unwrap().value;
            assert!((a - b).abs() < 1e-9 * a);
        }
    }

    #[test]
    fn laplace_matrix_errors() {
        // a = 1: M = R² - 1 vanishes at R = 1
        let model = Arc::new(GroupModel::euclidean(1, 4.0, 8).unwrap());
        let rep = Representation::euclidean_matrix(
            model.clone(),
            vec![CMatrix::from_element(1, 1, c(1.0))],
            NormKind::L2,
        )
        .unwrap();
        let v = CVector::from_element(1, c(1.0));
        assert!(matches!(
            laplace_sobolev(&rep, &v, 1.0, 0.5),
            Err(SobolevError::Matrix(MatrixFunctionError::BranchCut { .. }))
        ));
        // a non-diagonalizable M: A = [[1, 1], [0, 1]] gives M = R² - A²
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(1.0), c(0.0), c(1.0)]);
        let rep = Representation::euclidean_matrix(model, vec![a], NormKind::L2).unwrap();
        let v = CVector::from_vec(vec![c(1.0), c(1.0)]);
        assert!(matches!(
            laplace_sobolev(&rep, &v, 1.0, 2.0),
            Err(SobolevError::Matrix(MatrixFunctionError::Defective { .. }))
        ));
    }

    #[test]
    fn negative_norms_on_modes() {
        let rep = torus_rep(4, NormKind::L2);
        let s = Sobolev::new(&rep);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = random_vector(rep.dim(), &mut rng);
        assert!((s.negative(&v, 0).unwrap().value - v.norm()).abs() < 1e-12);
        for k in -4..=4i64 {
            let kf = k as f64;
            let expect = (1.0 + kf * kf + kf.powi(4)).powf(-0.5);
            let got = s.negative(&unit(&rep, k), 2).unwrap().value;
            assert!((got - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_two_matches_laplace_on_hermitian_torus() {
        // on a diagonal rep p_{-2} and Δp_{-2} differ only by per-mode weights
        let rep = torus_rep(3, NormKind::L2);
        let s = Sobolev::new(&rep);
        for k in -3..=3i64 {
            let kf = (k * k) as f64;
            let v = unit(&rep, k);
            let neg = s.negative(&v, 1).unwrap().value;
            let lap = s.laplace(&v, -1.0, 1.0).unwrap().value;
            assert!((neg - (1.0 + kf).powf(-0.5)).abs() < 1e-12);
            assert!((lap - neg).abs() < 1e-8);
        }
    }

    #[test]
    fn dual_norm_is_dual() {
        // sup over random λ of |λ(v)| / p'_k(λ) never exceeds p_{-k}(v)
        let model = Arc::new(GroupModel::su2(1.0).unwrap());
        let gram = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0),
                Complex64::new(0.3, 0.2),
                c(0.0),
                Complex64::new(0.3, -0.2),
                c(1.0),
                Complex64::new(0.0, 0.4),
                c(0.0),
                Complex64::new(0.0, -0.4),
                c(1.5),
            ],
        );
        let rep = Representation::su2_irrep(model, 2, NormKind::hermitian(gram).unwrap()).unwrap();
        let s = Sobolev::new(&rep);
        let dual = s.dual_norm(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_vector(3, &mut rng);
        let target = s.negative(&v, 1).unwrap().value;
        let mut best = 0.0_f64;
        for _ in 0..20000 {
            let l = random_vector(3, &mut rng);
            let ratio = (l.transpose() * &v)[(0, 0)].norm() / dual.eval(&l);
            assert!(ratio <= target * (1.0 + 1e-12));
            best = best.max(ratio);
        }
        assert!(best > 0.95 * target);
    }

    #[test]
    fn l1_and_linf_duals() {
        let model = Arc::new(GroupModel::torus(1, 16).unwrap());
        let rep = Representation::torus_regular(model.clone(), 2, NormKind::L1).unwrap();
        let v = CVector::from_vec(vec![c(1.0), c(-2.0), c(0.5), c(0.0), c(1.0)]);
        assert_eq!(negative_sobolev(&rep, &v, 0).unwrap().value, 4.5);
        assert!(negative_sobolev(&rep, &v, 1).is_err());
        let rep = Representation::torus_regular(model, 2, NormKind::LInf).unwrap();
        assert_eq!(negative_sobolev(&rep, &v, 0).unwrap().value, 2.0);
    }

    #[test]
    fn induced_constant_mode_is_bump_norm() {
        let rep = torus_rep(3, NormKind::L2);
        let ind = InducedSobolev::new(&rep, InducedSettings::default()).unwrap();
        // ‖φ‖_{L²}² = ∫_{-1}^{1} exp(2 - 2/(1-x²)) dx
        let n = 200_000;
        let h = 2.0 / n as f64;
        let l2: f64 = (0..n)
            .map(|i| {
                let x = -1.0 + (i as f64 + 0.5) * h;
                bump(&[x]).powi(2) * h
            })
            .sum();
        let v = unit(&rep, 0);
        let got = ind.value(&v, 0.0).unwrap().value;
        assert!((got - l2.sqrt()).abs() < 1e-6 * got, "{got} vs {}", l2.sqrt());
        assert_eq!(ind.value(&CVector::zeros(rep.dim()), 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn induced_monotone_in_order() {
        let rep = torus_rep(3, NormKind::L2);
        let ind = InducedSobolev::new(&rep, InducedSettings::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = random_vector(rep.dim(), &mut rng);
        let vals = ind.values(&v, &[-1.0, 0.0, 0.5, 1.0, 2.0]).unwrap();
        for w in vals.windows(2) {
            assert!(w[0].value <= w[1].value);
        }
    }

    #[test]
    fn induced_dual_balls() {
        let model = Arc::new(GroupModel::torus(1, 16).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let v = random_vector(5, &mut rng);
        let mut vals = Vec::new();
        for norm in [NormKind::L1, NormKind::L2, NormKind::LInf] {
            let rep = Representation::torus_regular(model.clone(), 2, norm).unwrap();
            let ind = InducedSobolev::new(&rep, InducedSettings::default()).unwrap();
            vals.push(ind.value(&v, 1.0).unwrap().value);
        }
        // dual balls are nested: ℓ¹-ball ⊂ ℓ²-ball ⊂ ℓ^∞-ball
        assert!(vals[2] <= vals[1] * (1.0 + 1e-12));
        assert!(vals[1] <= vals[0] * (1.0 + 1e-9));
        let su2 = Arc::new(GroupModel::su2(1.0).unwrap());
        let rep = Representation::su2_irrep(su2, 1, NormKind::L2).unwrap();
        assert!(InducedSobolev::new(&rep, InducedSettings::default()).is_err());
    }

    #[test]
    fn induced_hermitian_dual_ball() {
        // sup over λ of ‖φ λ(π(·)v)‖_{H^s} / p'(λ) with p'(λ)² = λ* conj(S)⁻¹ λ
        let model = Arc::new(GroupModel::torus(1, 16).unwrap());
        let gram = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(2.0),
                Complex64::new(0.3, 0.2),
                c(0.1),
                Complex64::new(0.3, -0.2),
                c(1.0),
                Complex64::new(0.0, 0.4),
                c(0.1),
                Complex64::new(0.0, -0.4),
                c(1.5),
            ],
        );
        let norm = NormKind::hermitian(gram.clone()).unwrap();
        let rep = Representation::torus_regular(model, 1, norm).unwrap();
        let ind = InducedSobolev::new(&rep, InducedSettings::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v = random_vector(3, &mut rng);
        let g = ind.grams(&v, &[1.0]).unwrap().remove(0);
        let dual = gram.map(|z| z.conj()).try_inverse().unwrap();
        let target = ind.value(&v, 1.0).unwrap().value;
        let mut best = 0.0_f64;
        for _ in 0..20000 {
            let l = random_vector(3, &mut rng);
            let a = l.map(|z| z.conj());
            let num = (a.adjoint() * &g * &a)[(0, 0)].re.sqrt();
            let den = (l.adjoint() * &dual * &l)[(0, 0)].re.sqrt();
            assert!(num / den <= target * (1.0 + 1e-10));
            best = best.max(num / den);
        }
        assert!(best > 0.97 * target, "{best} vs {target}");
    }

    #[test]
    fn norm_axioms() {
        let rep = torus_rep(3, NormKind::L2);
        let s = Sobolev::new(&rep);
        let ind = InducedSobolev::new(&rep, InducedSettings::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let u = random_vector(rep.dim(), &mut rng);
            let w = random_vector(rep.dim(), &mut rng);
            let a = Complex64::new(-1.5, 0.7);
            type NormFn<'a> = Box<dyn Fn(&CVector) -> f64 + 'a>;
            let norms: Vec<NormFn> = vec![
                Box::new(|x| s.standard(x, 2).unwrap()),
                Box::new(|x| s.laplace(x, 1.5, 1.0).unwrap().value),
                Box::new(|x| s.negative(x, 2).unwrap().value),
                Box::new(|x| ind.value(x, 0.5).unwrap().value),
            ];
            for p in &norms {
                let sum = p(&(&u + &w));
                assert!(sum <= (p(&u) + p(&w)) * (1.0 + 1e-10));
                assert!((p(&(&u * a)) - a.norm() * p(&u)).abs() < 1e-10 * p(&u));
            }
        }
    }

    #[test]
    fn first_sandwich_direction_with_coefficient_bound() {
        // Δp_{2k} ≤ (Σ |coefficients of (R²+Δ)^k|) p_{2k}
        let rep = torus_rep(6, NormKind::L2);
        let s = Sobolev::new(&rep);
        let alg = rep.model().algebra().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in 1..=2u32 {
            let bound: f64 = resolvent_element(&alg, 1.5, k).terms().map(|(_, c)| c.norm()).sum();
            for _ in 0..20 {
                let v = random_vector(rep.dim(), &mut rng);
                assert!(s.laplace_even(&v, 2 * k, 1.5).unwrap() <= bound * s.standard(&v, 2 * k).unwrap());
            }
        }
        let _ = PI;
    }
}
