//! End-to-end experiments: spectral gap, vector factorization and the
//! comparison sandwiches between norm families.

pub mod acceptance;

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{GeometryError, GroupModel};
use crate::linalg::{c, smallest_singular_value, CMatrix, CVector};
use crate::pbw::resolvent_element;
use crate::representation::{NormKind, Representation, RepresentationError};
use crate::sobolev::{monomial_actions, InducedSettings, InducedSobolev, Sobolev, SobolevError};
use crate::spectral::{Kernel, ResolventPower, SpectralError};

/// Default ensemble: random unit vectors drawn from this seed, plus the
/// standard basis.
pub const DEFAULT_ENSEMBLE_SIZE: usize = 64;
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Relative threshold below which `σ_min` counts as singular.
const SINGULAR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("R = {r} does not exceed the measured threshold R_E = {r_e}")]
    BelowThreshold { r: f64, r_e: f64 },
    #[error("kernel order m = {m} is too small for dim G = {dim}: need 2m - dim G - 1 ≥ 0")]
    KernelOrder { m: u32, dim: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Sobolev(#[from] SobolevError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Representation(#[from] RepresentationError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "R_E")]
    pub r_e: f64,
    pub c_pi: f64,
    pub c_g: f64,
    pub sigma_min: f64,
    pub invertible: bool,
    /// `R > R_E`, where the gap theorem guarantees invertibility.
    pub above_threshold: bool,
}

/// `σ_min(R² I + dπ(Δ))` against the threshold `R_E = c_π + c_G`.
pub fn spectral_gap(rep: &Representation, r: f64) -> Result<GapReport, HarnessError> {
    if !(r > 0.0) {
        return Err(SobolevError::NonPositiveR(r).into());
    }
    let m = Sobolev::new(rep).laplace_matrix(r)?;
    let sigma_min = smallest_singular_value(&m);
    let c_pi = rep.growth().c_pi;
    let c_g = rep.model().c_g(1.0).c_g;
    let scale = m.iter().map(|z| z.norm()).fold(r * r, f64::max);
    Ok(GapReport {
        r,
        r_e: c_pi + c_g,
        c_pi,
        c_g,
        sigma_min,
        invertible: sigma_min > SINGULAR_TOLERANCE * scale,
        above_threshold: r > c_pi + c_g,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationReport {
    #[serde(rename = "R")]
    pub r: f64,
    pub m: u32,
    #[serde(rename = "R_E")]
    pub r_e: f64,
    pub residual: f64,
}

/// `‖v - Π(κ) dπ((R²+Δ)^m) v‖ / ‖v‖` with `κ` the kernel of
/// `(R²+Δ)^{-m}` on the representation's model.
pub fn vector_factorization_residual(
    rep: &Representation,
    v: &CVector,
    r: f64,
    m: u32,
) -> Result<FactorizationReport, HarnessError> {
    rep.check_vector(v)?;
    let model = rep.model().clone();
    let n = model.dim();
    if 2 * (m as usize) < n + 1 {
        return Err(HarnessError::KernelOrder { m, dim: n });
    }
    let r_e = rep.growth().c_pi + model.c_g(1.0).c_g;
    if r <= r_e {
        return Err(HarnessError::BelowThreshold { r, r_e });
    }
    let kernel = Kernel::new(model.clone(), ResolventPower::new(r, m)?)?;
    let lift = rep.d_pi(&resolvent_element(model.algebra(), r, m))?;
    let w = rep.smear(kernel.values(), &(lift * v))?;
    let residual = rep.norm(&(v - w)) / rep.norm(v);
    Ok(FactorizationReport { r, m, r_e, residual })
}

/// Fixed test vectors: `random` seeded Gaussian vectors normalized in the
/// representation's norm, followed by the standard basis.
#[derive(Debug, Clone)]
pub struct Ensemble {
    pub seed: u64,
    pub random: usize,
    pub vectors: Vec<CVector>,
}

impl Ensemble {
    pub fn new(rep: &Representation, random: usize, seed: u64) -> Self {
        let dim = rep.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vectors: Vec<CVector> = (0..random)
            .map(|_| {
                let v = CVector::from_iterator(
                    dim,
                    (0..dim).map(|_| {
                        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
                    }),
                );
                let p = rep.norm(&v);
                v / c(p)
            })
            .collect();
        for i in 0..dim {
            let mut e = CVector::zeros(dim);
            e[i] = c(1.0);
            vectors.push(e);
        }
        Self { seed, random, vectors }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    /// `"<numerator>/<denominator>"` norm families.
    pub family: String,
    pub order: f64,
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub ensemble_size: usize,
    pub lower: f64,
    pub upper: f64,
    /// Order shift used in the upper ratio.
    pub shift: f64,
    pub truncation: usize,
}

/// Smallest even integer `≥ n + 1`.
pub fn sandwich_shift(n: usize) -> u32 {
    let m = n as u32 + 1;
    m + m % 2
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

/// `min p_{2k}/Δp_{2k}` and `max p_{2k}/Δp_{2k+m}` over the ensemble.
pub fn sandwich_report(
    rep: &Representation,
    k: u32,
    r: f64,
    ensemble: &Ensemble,
) -> Result<SandwichReport, HarnessError> {
    let s = Sobolev::new(rep);
    let shift = sandwich_shift(rep.model().dim());
    let mut lower = Vec::with_capacity(ensemble.len());
    let mut upper = Vec::with_capacity(ensemble.len());
    for v in &ensemble.vectors {
        let p = s.standard(v, 2 * k)?;
        lower.push(p / s.laplace_even(v, 2 * k, r)?);
        upper.push(p / s.laplace_even(v, 2 * k + shift, r)?);
    }
    Ok(SandwichReport {
        family: "standard/laplace".into(),
        order: 2.0 * k as f64,
        r: Some(r),
        ensemble_size: ensemble.len(),
        lower: min_max(lower.into_iter()).0,
        upper: min_max(upper.into_iter()).1,
        shift: shift as f64,
        truncation: rep.dim(),
    })
}

/// `min Δp_s/Sp_s` and `max Δp_s/Sp_{s+n/2+ε}` over the ensemble.
pub fn compare_induced(
    rep: &Representation,
    s_order: f64,
    epsilon: f64,
    r: f64,
    ensemble: &Ensemble,
    settings: InducedSettings,
) -> Result<SandwichReport, HarnessError> {
    if !(epsilon > 0.0) {
        return Err(HarnessError::Unsupported(format!("ε must be positive (got {epsilon})")));
    }
    let s = Sobolev::new(rep);
    let induced = InducedSobolev::new(rep, settings)?;
    let shift = rep.model().dim() as f64 / 2.0 + epsilon;
    let mut lower = Vec::with_capacity(ensemble.len());
    let mut upper = Vec::with_capacity(ensemble.len());
    for v in &ensemble.vectors {
        let lap = s.laplace(v, s_order, r)?.value;
        let sp = induced.values(v, &[s_order, s_order + shift])?;
        lower.push(lap / sp[0].value);
        upper.push(lap / sp[1].value);
    }
    Ok(SandwichReport {
        family: "laplace/induced".into(),
        order: s_order,
        r: Some(r),
        ensemble_size: ensemble.len(),
        lower: min_max(lower.into_iter()).0,
        upper: min_max(upper.into_iter()).1,
        shift,
        truncation: rep.dim(),
    })
}

/// `min Δp_{-k}/p_{-k}` and `max Δp_{-k}/p_{-k+n+1}` over the ensemble.
/// The shifted order is an integer, so both standard orders come from the
/// dual (or, when nonnegative, the standard) pipeline directly.
pub fn negative_sandwich(
    rep: &Representation,
    k: u32,
    r: f64,
    ensemble: &Ensemble,
) -> Result<SandwichReport, HarnessError> {
    if !matches!(rep.norm_kind(), NormKind::L2 | NormKind::Hermitian(_)) {
        return Err(HarnessError::Unsupported(
            "the negative sandwich needs a Hermitian norm".into(),
        ));
    }
    let s = Sobolev::new(rep);
    let n = rep.model().dim() as i64;
    let shifted = -(k as i64) + n + 1;
    let mut lower = Vec::with_capacity(ensemble.len());
    let mut upper = Vec::with_capacity(ensemble.len());
    for v in &ensemble.vectors {
        let lap = s.laplace(v, -(k as f64), r)?.value;
        lower.push(lap / s.negative(v, k)?.value);
        upper.push(lap / s.integer_order(v, shifted)?);
    }
    Ok(SandwichReport {
        family: "laplace/negative".into(),
        order: -(k as f64),
        r: Some(r),
        ensemble_size: ensemble.len(),
        lower: min_max(lower.into_iter()).0,
        upper: min_max(upper.into_iter()).1,
        shift: (n + 1) as f64,
        truncation: rep.dim(),
    })
}

/// `p_k` over the basis `Y_i = Σ_j T_ij X_j` against the original basis:
/// `(min, max)` of `p_{k,X}/p_{k,Y}` over the ensemble.
pub fn basis_stress(
    rep: &Representation,
    k: u32,
    transform: &nalgebra::DMatrix<f64>,
    ensemble: &Ensemble,
) -> Result<(f64, f64), HarnessError> {
    let n = rep.model().dim();
    if transform.shape() != (n, n) {
        return Err(HarnessError::Unsupported(format!("basis change must be {n}×{n}")));
    }
    if transform.determinant().abs() < 1e-12 {
        return Err(HarnessError::Unsupported("basis change is singular".into()));
    }
    let gens = rep.generators();
    let changed: Vec<CMatrix> = (0..n)
        .map(|i| {
            (0..n).fold(CMatrix::zeros(rep.dim(), rep.dim()), |acc, j| {
                acc + &gens[j] * c(transform[(i, j)])
            })
        })
        .collect();
    let original = Sobolev::new(rep);
    let monos = monomial_actions(&changed, k);
    let ratios = ensemble.vectors.iter().map(|v| -> Result<f64, HarnessError> {
        let p = original.standard(v, k)?;
        let q: f64 = monos.iter().map(|m| rep.norm(&(m * v)).powi(2)).sum();
        Ok(p / q.sqrt())
    });
    let ratios: Vec<f64> = ratios.collect::<Result<_, _>>()?;
    Ok(min_max(ratios.into_iter()))
}

/// Relative spread `max/min - 1` of a positive sequence.
pub fn spread(values: &[f64]) -> f64 {
    let (lo, hi) = min_max(values.iter().copied());
    hi / lo - 1.0
}

/// Sandwich reports of `torus_regular(N)` over increasing truncations.
///
/// The test vectors of every coarser truncation are carried into the finer
/// ones (mode by mode), so each ensemble contains the previous ones and the
/// empirical extremes can only move outward, as the true constants do.
pub fn truncation_sweep<F>(
    model: &Arc<GroupModel>,
    truncations: &[usize],
    ensemble_size: usize,
    seed: u64,
    report: F,
) -> Result<Vec<SandwichReport>, HarnessError>
where
    F: Fn(&Representation, &Ensemble) -> Result<SandwichReport, HarnessError>,
{
    let mut sizes = truncations.to_vec();
    sizes.sort_unstable();
    let mut coarse: Vec<Vec<(Vec<i64>, Complex64)>> = Vec::new();
    let mut out = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let rep = Representation::torus_regular(model.clone(), n, NormKind::L2)?;
        let mut ensemble = Ensemble::new(&rep, ensemble_size, seed);
        let modes = rep.torus_modes().expect("torus_regular has modes").to_vec();
        for v in &coarse {
            let mut w = CVector::zeros(rep.dim());
            for (mode, z) in v {
                w[rep.mode_index(mode).expect("coarser modes are included")] = *z;
            }
            ensemble.vectors.push(w);
        }
        for v in &ensemble.vectors[..ensemble.random] {
            coarse.push(modes.iter().cloned().zip(v.iter().copied()).collect());
        }
        let mut r = report(&rep, &ensemble)?;
        r.truncation = n;
        out.push(r);
    }
    Ok(out)
}
