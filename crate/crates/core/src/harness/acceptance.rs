//! The ten acceptance checks, each returning a pass/fail line with the
//! measured quantities.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::{
    compare_induced, negative_sandwich, sandwich_report, spectral_gap, spread, truncation_sweep,
    vector_factorization_residual, Ensemble, HarnessError, DEFAULT_ENSEMBLE_SIZE, DEFAULT_SEED,
};
use crate::geometry::{GroupElement, GroupModel, Spectrum};
use crate::linalg::{c, CMatrix, CVector};
use crate::pbw::{EnvelopingElement, Monomial};
use crate::representation::{NormKind, Representation};
use crate::sobolev::{InducedSettings, Sobolev};
use crate::spectral::{
    delta_factorization_residual, derivative_jumps, holder_exponent, tail_decay_rate, Kernel,
    ResolventPower,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<34} {:>8.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

type Check = fn() -> Result<(bool, String), HarnessError>;

const CRITERIA: [(u32, &str, Check); 10] = [
    (1, "PBW homomorphism", pbw_homomorphism),
    (2, "Casimir scalarity", casimir_scalarity),
    (3, "kernel closed forms", kernel_closed_forms),
    (4, "delta factorization", delta_factorization),
    (5, "vector factorization", vector_factorization),
    (6, "spectral gap sharpness", gap_sharpness),
    (7, "standard/Laplace sandwich", standard_sandwich),
    (8, "induced-norm comparison", induced_comparison),
    (9, "kernel split diagnostics", split_diagnostics),
    (10, "duality", duality),
];

/// Runs one criterion by number.
pub fn run(id: u32) -> Option<CriterionResult> {
    let (id, name, check) = CRITERIA.iter().find(|(i, _, _)| *i == id)?;
    let start = Instant::now();
    let outcome = check();
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = match outcome {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Some(CriterionResult {
        id: *id,
        name,
        passed,
        detail,
        seconds,
    })
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|(id, _, _)| run(*id)).collect()
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn random_element(rep: &Representation, degree: u32, rng: &mut ChaCha8Rng) -> EnvelopingElement {
    let alg = rep.model().algebra().clone();
    let mut u = EnvelopingElement::zero(alg.clone());
    for mono in Monomial::all_up_to_degree(alg.dim(), degree) {
        u.add_term(mono, gaussian(rng));
    }
    u
}

fn pbw_homomorphism() -> Result<(bool, String), HarnessError> {
    let start = Instant::now();
    let model = Arc::new(GroupModel::su2(2.0)?);
    let rep = Representation::su2_irrep(model, 4, NormKind::L2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let u = random_element(&rep, 3, &mut rng);
        let v = random_element(&rep, 3, &mut rng);
        let uv = u.product(&v).expect("same algebra");
        let (du, dv) = (rep.d_pi(&u)?, rep.d_pi(&v)?);
        let defect = (rep.d_pi(&uv)? - &du * &dv).norm();
        worst = worst.max(defect / (1.0 + du.norm() * dv.norm()));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-9 && secs < 5.0,
        format!("max scaled defect {worst:.3e} (≤ 1e-9), {secs:.2}s (< 5s)"),
    ))
}

fn casimir_scalarity() -> Result<(bool, String), HarnessError> {
    let model = Arc::new(GroupModel::su2(5.0)?);
    let lap = model.algebra().laplace_element();
    let mut ok = true;
    let mut worst = 0.0_f64;
    for two_l in 0..=10u32 {
        let l = two_l as f64 / 2.0;
        let rep = Representation::su2_irrep(model.clone(), two_l, NormKind::L2)?;
        let d = rep.dim();
        let defect = (rep.d_pi(&lap)? - CMatrix::identity(d, d) * c(l * (l + 1.0))).norm();
        let scale = l * (l + 1.0);
        ok &= defect <= 1e-10 * scale;
        if scale > 0.0 {
            worst = worst.max(defect / scale);
        }
    }
    Ok((ok, format!("max ‖dπ(Δ) - ℓ(ℓ+1)I‖/ℓ(ℓ+1) = {worst:.3e} over 2ℓ ≤ 10 (≤ 1e-10)")))
}

fn kernel_closed_forms() -> Result<(bool, String), HarnessError> {
    let euc = Arc::new(GroupModel::euclidean(1, 16.0, 4096)?);
    let k = Kernel::new(euc.clone(), ResolventPower::new(1.0, 1)?)?;
    let mut euc_err = 0.0_f64;
    for q in 0..euc.node_count() {
        let d = euc.node_distance(q);
        if (0.1..=10.0).contains(&d) {
            let exact = (-d).exp() / 2.0;
            euc_err = euc_err.max((k.values().values()[q].re - exact).abs() / exact);
        }
    }
    let torus = Arc::new(GroupModel::torus(1, 256)?);
    let k = Kernel::new(torus.clone(), ResolventPower::new(1.0, 1)?)?;
    let mut torus_err = 0.0_f64;
    for q in 0..torus.node_count() {
        let d = torus.node_distance(q);
        let exact = (PI - d).cosh() / (2.0 * PI.sinh());
        torus_err = torus_err.max((k.values().values()[q].re - exact).abs());
    }
    Ok((
        euc_err <= 1e-6 && torus_err <= 1e-8,
        format!("Euclidean max rel err {euc_err:.3e} (≤ 1e-6), torus max err {torus_err:.3e} (≤ 1e-8)"),
    ))
}

fn delta_factorization() -> Result<(bool, String), HarnessError> {
    let torus = GroupModel::torus(1, 64)?;
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let coeffs: Vec<Complex64> = (0..33).map(|_| gaussian(&mut rng)).collect();
    let phi = torus.sample(|g| match g {
        GroupElement::Coords(x) => (-16..=16i32)
            .map(|k| coeffs[(k + 16) as usize] * Complex64::from_polar(1.0, k as f64 * x[0]))
            .sum(),
        GroupElement::Su2(_) => unreachable!("torus nodes are coordinates"),
    });
    let torus_res = delta_factorization_residual(&torus, &ResolventPower::new(1.0, 1)?, &phi)?;

    let su2 = GroupModel::su2(12.0)?;
    let blocks: Vec<DMatrix<Complex64>> = (0..=24usize)
        .map(|t| DMatrix::from_fn(t + 1, t + 1, |_, _| gaussian(&mut rng)))
        .collect();
    let psi = su2.synthesize(&Spectrum::PeterWeyl(blocks))?;
    let su2_res = delta_factorization_residual(&su2, &ResolventPower::new(1.0, 2)?, &psi)?
        / psi.sup_norm();
    Ok((
        torus_res <= 1e-8 && su2_res <= 1e-6,
        format!("torus residual {torus_res:.3e} (≤ 1e-8), SU(2) ℓ_max=12 residual {su2_res:.3e} (≤ 1e-6)"),
    ))
}

fn vector_factorization() -> Result<(bool, String), HarnessError> {
    let euc = Arc::new(GroupModel::euclidean(1, 48.0, 1 << 16)?);
    let scalar = Representation::euclidean_matrix(euc, vec![CMatrix::from_element(1, 1, c(0.5))], NormKind::L2)?;
    let v = CVector::from_element(1, c(1.0));
    let scalar_res = vector_factorization_residual(&scalar, &v, 1.0, 1)?.residual;

    let torus = Arc::new(GroupModel::torus(1, 1 << 17)?);
    let rep = Representation::torus_regular(torus, 32, NormKind::L2)?;
    let ensemble = Ensemble::new(&rep, 4, DEFAULT_SEED);
    let mut torus_res = 0.0_f64;
    for v in &ensemble.vectors[..4] {
        torus_res = torus_res.max(vector_factorization_residual(&rep, v, 1.0, 1)?.residual);
    }
    Ok((
        scalar_res <= 1e-6 && torus_res <= 1e-6,
        format!("scalar a=0.5 residual {scalar_res:.3e}, torus_regular(32) residual {torus_res:.3e} (≤ 1e-6)"),
    ))
}

fn gap_sharpness() -> Result<(bool, String), HarnessError> {
    let euc = Arc::new(GroupModel::euclidean(1, 8.0, 64)?);
    let scalar = Representation::euclidean_matrix(euc, vec![CMatrix::from_element(1, 1, c(1.0))], NormKind::L2)?;
    let at_one = spectral_gap(&scalar, 1.0)?.sigma_min;
    let above = spectral_gap(&scalar, 1.5)?.sigma_min;
    let torus = Arc::new(GroupModel::torus(1, 64)?);
    let rep = Representation::torus_regular(torus, 16, NormKind::L2)?;
    let mut torus_ok = true;
    for r in [0.5, 1.0, 2.0] {
        torus_ok &= spectral_gap(&rep, r)?.sigma_min == r * r;
    }
    Ok((
        at_one <= 1e-12 && (above - 1.25).abs() <= 1e-10 && torus_ok,
        format!(
            "σ_min at R=1: {at_one:.3e} (≤ 1e-12), at R=1.5: {above:.12} (1.25 ± 1e-10), torus σ_min = R²: {torus_ok}"
        ),
    ))
}

/// Closed-form per-mode extremes of `p_{2k}/Δp_{2k+j}` on `torus_regular(N)`.
fn mode_ratio_extremes(n: i64, k: u32, shift: u32, r: f64) -> (f64, f64) {
    (-n..=n)
        .map(|j| {
            let x = (j * j) as f64;
            let p: f64 = (0..=2 * k).map(|i| x.powi(i as i32)).sum::<f64>().sqrt();
            p / (r * r + x).powf((2 * k + shift) as f64 / 2.0)
        })
        .fold((f64::INFINITY, 0.0), |(lo, hi), x| (lo.min(x), hi.max(x)))
}

fn standard_sandwich() -> Result<(bool, String), HarnessError> {
    let start = Instant::now();
    let torus = Arc::new(GroupModel::torus(1, 64)?);
    let sizes = [8usize, 16, 32];
    let mut ok = true;
    let mut notes = Vec::new();
    for k in [1u32, 2] {
        let reports = truncation_sweep(&torus, &sizes, DEFAULT_ENSEMBLE_SIZE, DEFAULT_SEED, |rep, ens| {
            sandwich_report(rep, k, 1.0, ens)
        })?;
        let mut closed_err = 0.0_f64;
        for (rep, &n) in reports.iter().zip(&sizes) {
            let (lo, _) = mode_ratio_extremes(n as i64, k, 0, 1.0);
            let (_, hi) = mode_ratio_extremes(n as i64, k, rep.shift as u32, 1.0);
            closed_err = closed_err.max((rep.lower - lo).abs() / lo).max((rep.upper - hi).abs() / hi);
            ok &= rep.lower.is_finite() && rep.lower > 0.0 && rep.upper.is_finite() && rep.upper > 0.0;
        }
        let lows: Vec<f64> = reports.iter().map(|r| r.lower).collect();
        let highs: Vec<f64> = reports.iter().map(|r| r.upper).collect();
        let (sl, su) = (spread(&lows), spread(&highs));
        ok &= closed_err <= 1e-8 && sl <= 0.10 && su <= 0.10;
        notes.push(format!(
            "k={k}: lower {:.6} upper {:.6}, closed-form err {closed_err:.1e}, spread {:.1}%/{:.1}%",
            lows[2],
            highs[2],
            100.0 * sl,
            100.0 * su
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 30.0;
    Ok((ok, format!("{}; {secs:.2}s (< 30s)", notes.join("; "))))
}

fn induced_comparison() -> Result<(bool, String), HarnessError> {
    let torus = Arc::new(GroupModel::torus(1, 64)?);
    let sizes = [8usize, 16];
    let mut ok = true;
    let mut notes = Vec::new();
    for s in [0.0, 1.0, 2.0] {
        let reports = truncation_sweep(&torus, &sizes, DEFAULT_ENSEMBLE_SIZE, DEFAULT_SEED, |rep, ens| {
            compare_induced(rep, s, 0.5, 1.0, ens, InducedSettings::default())
        })?;
        let lows: Vec<f64> = reports.iter().map(|r| r.lower).collect();
        let highs: Vec<f64> = reports.iter().map(|r| r.upper).collect();
        let finite = lows.iter().chain(&highs).all(|x| x.is_finite() && *x > 0.0);
        let (sl, su) = (spread(&lows), spread(&highs));
        ok &= finite && sl <= 0.15 && su <= 0.15;
        notes.push(format!(
            "s={s}: min Δp_s/Sp_s {:.4}, max Δp_s/Sp_(s+1) {:.4}, spread {:.1}%/{:.1}%",
            lows[1],
            highs[1],
            100.0 * sl,
            100.0 * su
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn split_diagnostics() -> Result<(bool, String), HarnessError> {
    let euc = Arc::new(GroupModel::euclidean(1, 48.0, 1 << 14)?);
    let k1 = Kernel::new(euc.clone(), ResolventPower::new(1.0, 1)?)?;
    let split1 = k1.cgt_split(1.0)?;
    let alpha = holder_exponent(&split1)?.alpha;
    let rate = tail_decay_rate(&euc, split1.tail(), (5.0, 40.0))?.rate;
    let k2 = Kernel::new(euc, ResolventPower::new(1.0, 2)?)?;
    let jumps = derivative_jumps(&k2.cgt_split(1.0)?, 1e-3);
    let (first, second) = (jumps.first_jump().abs(), jumps.second_jump().abs());
    let kink = derivative_jumps(&split1, 1e-3).first_jump();
    Ok((
        (0.9..=1.0).contains(&alpha) && (rate - 1.0).abs() <= 0.05 && first <= 1e-6 && second <= 1e-6,
        format!(
            "m=1 Hölder α {alpha:.4} (∈ [0.9, 1]), tail decay {rate:.4} (1 ± 0.05), m=2 derivative jumps {first:.3e}/{second:.3e} (≤ 1e-6; m=1 first jump {kink:.4})"
        ),
    ))
}

fn duality() -> Result<(bool, String), HarnessError> {
    let su2 = Arc::new(GroupModel::su2(1.0)?);
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
    let rep = Representation::su2_irrep(su2, 2, NormKind::hermitian(gram)?)?;
    let sob = Sobolev::new(&rep);
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut worst = 0.0_f64;
    let mut ok = true;
    for k in [1u32, 2] {
        let dual = sob.dual_norm(k)?;
        let v = CVector::from_iterator(3, (0..3).map(|_| gaussian(&mut rng)));
        let target = sob.negative(&v, k)?.value;
        let mut best = 0.0_f64;
        for _ in 0..100_000 {
            let l = CVector::from_iterator(3, (0..3).map(|_| gaussian(&mut rng)));
            best = best.max((l.transpose() * &v)[(0, 0)].norm() / dual.eval(&l));
        }
        let rel = (best - target).abs() / target;
        worst = worst.max(rel);
        ok &= rel <= 0.02;
    }
    let torus = Arc::new(GroupModel::torus(1, 64)?);
    let mut finite = true;
    for k in [1u32, 2] {
        let reports = truncation_sweep(&torus, &[8, 16, 32], DEFAULT_ENSEMBLE_SIZE, DEFAULT_SEED, |rep, ens| {
            negative_sandwich(rep, k, 1.0, ens)
        })?;
        finite &= reports
            .iter()
            .all(|r| r.lower.is_finite() && r.lower > 0.0 && r.upper.is_finite() && r.upper > 0.0);
    }
    Ok((
        ok && finite,
        format!("Monte Carlo dual sup vs p_(-k): max rel gap {:.2}% (≤ 2%), negative sandwich finite: {finite}", 100.0 * worst),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_mode_extremes() {
        // k=1, shift 0: min over modes of √(1+x+x²)/(1+x) is √3/2 at |j| = 1
        let (lo, hi) = mode_ratio_extremes(8, 1, 0, 1.0);
        assert!((lo - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(hi, 1.0);
    }

    #[test]
    fn unknown_criterion() {
        assert!(run(11).is_none());
    }
}
