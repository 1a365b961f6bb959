//! Functional calculus `f(√Δ)` on the model groups for the resolvent powers
//! `f(z) = (R² + z²)^{-m}`: convolution kernels, their local/tail split and
//! the delta factorization.

pub mod bessel;
mod split;

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::su2::character;
use crate::geometry::{GeometryError, GroupElement, GroupFunction, GroupModel, ModelKind, Spectrum};
use bessel::bessel_potential;
pub use split::{
    derivative_jumps, holder_exponent, smooth_cutoff, tail_decay_rate, CgtSplit, DecayFit,
    DerivativeJumps, HolderEstimate, DEFAULT_EPSILON,
};

/// Largest Poisson image index tried on the torus before giving up.
pub const MAX_IMAGES: usize = 256;
/// Relative size of the first omitted image shell on the torus.
const IMAGE_TOLERANCE: f64 = 1e-17;
/// Tolerance on out-of-band content for the delta factorization.
pub const BAND_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("resolvent power needs R > 0 and m ≥ 1 (got R = {r}, m = {m})")]
    InvalidFunction { r: f64, m: u32 },
    #[error("kernel of order -{order} is unbounded at the identity in dimension {dim}; sampling needs 2m > n")]
    Unbounded { order: u32, dim: usize },
    #[error("truncation-tail budget exceeded: {0}")]
    TruncationBudget(String),
    #[error("cutoff radius ε = {epsilon} must lie in (0, {limit})")]
    EpsilonOutOfRange { epsilon: f64, limit: f64 },
    #[error("decay fits need a non-compact model")]
    CompactModel,
    #[error("not enough samples in the fit window [{lo}, {hi}]")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("function exceeds the model's band (out-of-band content {excess:e})")]
    OutOfBand { excess: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `f(z) = (R² + z²)^{-m}`, a member of the symbol class of order `-2m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventPower {
    r: f64,
    m: u32,
}

impl ResolventPower {
    pub fn new(r: f64, m: u32) -> Result<Self, SpectralError> {
        if !(r > 0.0) || !r.is_finite() || m == 0 {
            return Err(SpectralError::InvalidFunction { r, m });
        }
        Ok(Self { r, m })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn order(&self) -> f64 {
        -2.0 * self.m as f64
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.eval_squared(z * z)
    }

    /// `f` as a function of `λ = z²`, the Laplace eigenvalue.
    pub fn eval_squared(&self, lambda: f64) -> f64 {
        (self.r * self.r + lambda).powi(-(self.m as i32))
    }
}

/// Exact spectral data of `κ_f` on a model: `f(|ξ|)/Pⁿ` per Fourier mode
/// on grids, `f(√(ℓ(ℓ+1)))·I` per Peter–Weyl block on SU(2).
pub fn kernel_spectrum(model: &GroupModel, f: &ResolventPower) -> Spectrum {
    let eig = model.laplace_eigenvalues();
    match model.grid() {
        Some(g) => {
            let vol = g.period().powi(g.dim() as i32);
            Spectrum::Fourier(
                eig.iter()
                    .map(|l| Complex64::new(f.eval_squared(*l) / vol, 0.0))
                    .collect(),
            )
        }
        None => Spectrum::PeterWeyl(
            eig.iter()
                .enumerate()
                .map(|(two_l, l)| {
                    DMatrix::identity(two_l + 1, two_l + 1)
                        * Complex64::new(f.eval_squared(*l), 0.0)
                })
                .collect(),
        ),
    }
}

#[derive(Debug, Clone)]
enum Evaluator {
    Euclidean { n: usize },
    Torus { n: usize, images: usize },
    Su2 { two_l_max: u32 },
}

/// The convolution kernel `κ_f` of `f(√Δ)` on a model.
#[derive(Debug, Clone)]
pub struct Kernel {
    model: Arc<GroupModel>,
    function: ResolventPower,
    spectrum: Spectrum,
    values: GroupFunction,
    evaluator: Evaluator,
    tail: f64,
}

impl Kernel {
    /// Samples `κ_f` at the model's nodes.
    ///
    /// * `ℝⁿ`: the Bessel-potential closed form.
    /// * `Tⁿ`: Poisson summation of the `ℝⁿ` kernel over `2πℤⁿ`, with images
    ///   added until the next shell is below `1e-17` of the kernel scale.
    /// * SU(2): `V⁻¹ Σ_{ℓ≤ℓ_max} (2ℓ+1) f(√(ℓ(ℓ+1))) χ_ℓ`; the omitted mass
    ///   `V⁻¹ Σ_{ℓ>ℓ_max} (2ℓ+1)² f` is reported by [`Kernel::truncation_tail`].
    pub fn new(model: Arc<GroupModel>, function: ResolventPower) -> Result<Self, SpectralError> {
        let (evaluator, tail) = match model.kind() {
            ModelKind::Euclidean(n) => {
                check_bounded(&function, n)?;
                (Evaluator::Euclidean { n }, 0.0)
            }
            ModelKind::Torus(n) => {
                check_bounded(&function, n)?;
                let (images, tail) = torus_images(n, &function)?;
                (Evaluator::Torus { n, images }, tail)
            }
            ModelKind::Su2 => {
                let two_l_max = model.su2_grid().expect("su2").two_l_max();
                (Evaluator::Su2 { two_l_max }, su2_tail(two_l_max, &function))
            }
        };
        let mut kernel = Self {
            spectrum: kernel_spectrum(&model, &function),
            values: model.zero_function(),
            model,
            function,
            evaluator,
            tail,
        };
        let values = (0..kernel.model.node_count())
            .map(|q| Complex64::new(kernel.evaluate(&kernel.model.node(q)), 0.0))
            .collect();
        kernel.values = kernel.model.function_from_values(values)?;
        Ok(kernel)
    }

    pub fn model(&self) -> &Arc<GroupModel> {
        &self.model
    }

    pub fn function(&self) -> &ResolventPower {
        &self.function
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn values(&self) -> &GroupFunction {
        &self.values
    }

    /// Bound on the sup-norm of what truncation leaves out (SU(2) band
    /// limit, torus image sum); `0` on `ℝⁿ`.
    pub fn truncation_tail(&self) -> f64 {
        self.tail
    }

    /// `κ_f` at an arbitrary element.
    pub fn evaluate(&self, g: &GroupElement) -> f64 {
        match (&self.evaluator, g) {
            (Evaluator::Euclidean { n }, GroupElement::Coords(x)) => bessel_potential(
                *n,
                self.function.r,
                self.function.m,
                x.iter().map(|t| t * t).sum::<f64>().sqrt(),
            ),
            (Evaluator::Torus { n, images }, GroupElement::Coords(x)) => {
                torus_value(*n, *images, &self.function, x)
            }
            (Evaluator::Su2 { two_l_max }, GroupElement::Su2(_)) => {
                let d = self.model.distance(g).expect("well-formed element");
                su2_value(*two_l_max, &self.function, d)
            }
            _ => panic!("element does not belong to the kernel's model"),
        }
    }

    /// `κ_f(exp(t X₁))`, the kernel along the first coordinate geodesic.
    pub fn profile(&self, t: f64) -> f64 {
        let mut x = vec![0.0; self.model.dim()];
        x[0] = t;
        match &self.evaluator {
            Evaluator::Su2 { .. } => {
                let g = self.model.exp(&x).expect("dimension matches");
                self.evaluate(&g)
            }
            _ => self.evaluate(&GroupElement::Coords(x)),
        }
    }

    /// `max_q |κ(x_q) - conj κ(x_q⁻¹)|`.
    pub fn involution_defect(&self) -> f64 {
        (0..self.model.node_count())
            .map(|q| {
                let g = self.model.node(q);
                let inv = self.model.inverse(&g).expect("node");
                (self.values.values()[q] - Complex64::new(self.evaluate(&inv), 0.0).conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `ψ ∗ κ_f`, using the exact spectral data of `κ_f`.
    pub fn apply(&self, psi: &GroupFunction) -> Result<GroupFunction, SpectralError> {
        let s = self.model.transform(psi)?;
        let out = match (s, &self.spectrum) {
            (Spectrum::Fourier(a), Spectrum::Fourier(k)) => {
                let vol = self.model.grid().expect("grid").period().powi(self.model.dim() as i32);
                Spectrum::Fourier(a.iter().zip(k).map(|(x, y)| x * y * vol).collect())
            }
            (Spectrum::PeterWeyl(a), Spectrum::PeterWeyl(k)) => {
                Spectrum::PeterWeyl(a.iter().zip(k).map(|(x, y)| y * x).collect())
            }
            _ => unreachable!("spectrum matches model"),
        };
        Ok(self.model.synthesize(&out)?)
    }

    /// CSV rows `distance,value`, sorted by distance.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SpectralError> {
        let mut rows: Vec<(f64, f64)> = (0..self.model.node_count())
            .map(|q| (self.model.node_distance(q), self.values.values()[q].re))
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["distance", "value"])
            .map_err(GeometryError::from)?;
        for (d, v) in rows {
            w.write_record([format!("{d:.17e}"), format!("{v:.17e}")])
                .map_err(GeometryError::from)?;
        }
        w.flush().map_err(GeometryError::from)?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "R": self.function.r,
            "m": self.function.m,
            "order": self.function.order(),
            "truncation_tail": self.tail,
            "spectrum": self.spectrum.to_json(),
        })
    }
}

fn check_bounded(f: &ResolventPower, n: usize) -> Result<(), SpectralError> {
    if 2 * f.m as usize <= n {
        return Err(SpectralError::Unbounded {
            order: 2 * f.m,
            dim: n,
        });
    }
    Ok(())
}

/// Number of image shells needed on `Tⁿ`, and a bound on what is left out.
fn torus_images(n: usize, f: &ResolventPower) -> Result<(usize, f64), SpectralError> {
    let scale = bessel_potential(n, f.r, f.m, PI * (n as f64).sqrt());
    let shell = |j: usize| {
        let count = ((2 * j + 1).pow(n as u32) - (2 * j - 1).pow(n as u32)) as f64;
        count * bessel_potential(n, f.r, f.m, 2.0 * PI * j as f64 - PI)
    };
    for images in 0..MAX_IMAGES {
        let next = shell(images + 1);
        if next <= IMAGE_TOLERANCE * scale {
            let tail: f64 = (images + 1..images + 40).map(shell).sum();
            return Ok((images, tail));
        }
    }
    Err(SpectralError::TruncationBudget(format!(
        "Poisson sum needs more than {MAX_IMAGES} image shells at R = {}",
        f.r
    )))
}

fn torus_value(n: usize, images: usize, f: &ResolventPower, x: &[f64]) -> f64 {
    let j = images as i64;
    let side = (2 * j + 1) as usize;
    let base: Vec<f64> = x.iter().map(|t| crate::geometry::wrap_angle(*t)).collect();
    let mut sum = 0.0;
    for q in 0..side.pow(n as u32) {
        let mut rem = q;
        let mut r2 = 0.0;
        for b in &base {
            let shift = (rem % side) as i64 - j;
            rem /= side;
            let y = b + 2.0 * PI * shift as f64;
            r2 += y * y;
        }
        sum += bessel_potential(n, f.r, f.m, r2.sqrt());
    }
    sum
}

fn su2_value(two_l_max: u32, f: &ResolventPower, d: f64) -> f64 {
    (0..=two_l_max)
        .map(|two_l| {
            let l = two_l as f64 / 2.0;
            (two_l + 1) as f64 * f.eval_squared(l * (l + 1.0)) * character(two_l, d)
        })
        .sum::<f64>()
        / crate::geometry::SU2_HAAR_MASS
}

/// `V⁻¹ Σ_{ℓ>ℓ_max} (2ℓ+1)² f(√(ℓ(ℓ+1)))`, infinite when `m < 2`.
fn su2_tail(two_l_max: u32, f: &ResolventPower) -> f64 {
    if f.m < 2 {
        return f64::INFINITY;
    }
    let stop = two_l_max + 200_000;
    let partial: f64 = (two_l_max + 1..=stop)
        .map(|two_l| {
            let l = two_l as f64 / 2.0;
            ((two_l + 1) as f64).powi(2) * f.eval_squared(l * (l + 1.0))
        })
        .sum();
    // summand ~ 4ℓ^{2-2m} with two terms per unit of ℓ
    let l_stop = stop as f64 / 2.0;
    let rest = 8.0 * l_stop.powf(3.0 - 2.0 * f.m as f64) / (2.0 * f.m as f64 - 3.0);
    (partial + rest) / crate::geometry::SU2_HAAR_MASS
}

/// `‖φ - [(R²+Δ)^m φ] ∗ κ_f‖_∞` with `Δ` acting by its spectral multiplier
/// and `κ_f` through its exact spectral data.
pub fn delta_factorization_residual(
    model: &GroupModel,
    f: &ResolventPower,
    phi: &GroupFunction,
) -> Result<f64, SpectralError> {
    let excess = model.band_excess(phi)?;
    if excess > BAND_TOLERANCE {
        return Err(SpectralError::OutOfBand { excess });
    }
    let lifted = model.apply_multiplier(&model.transform(phi)?, |l| {
        Complex64::new((f.r * f.r + l).powi(f.m as i32), 0.0)
    })?;
    let spectrum = kernel_spectrum(model, f);
    let out = match (lifted, spectrum) {
        (Spectrum::Fourier(a), Spectrum::Fourier(k)) => {
            let vol = model.grid().expect("grid").period().powi(model.dim() as i32);
            Spectrum::Fourier(a.iter().zip(&k).map(|(x, y)| x * y * vol).collect())
        }
        (Spectrum::PeterWeyl(a), Spectrum::PeterWeyl(k)) => {
            Spectrum::PeterWeyl(a.iter().zip(&k).map(|(x, y)| y * x).collect())
        }
        _ => unreachable!("spectrum matches model"),
    };
    Ok(model.synthesize(&out)?.sup_distance(phi)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn euclidean_kernel_closed_form() {
        let model = Arc::new(GroupModel::euclidean(1, 16.0, 1024).unwrap());
        let k = Kernel::new(model.clone(), ResolventPower::new(1.0, 1).unwrap()).unwrap();
        for q in 0..model.node_count() {
            let d = model.node_distance(q);
            if (0.1..=10.0).contains(&d) {
                let exact = (-d).exp() / 2.0;
                assert!(((k.values().values()[q].re - exact) / exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn euclidean_kernel_matches_numerical_fourier_inversion() {
        // inverse FFT of f(|ξ|) on a large box, away from the periodic images
        for (n, m, points, half) in [(1usize, 1u32, 1 << 14, 64.0), (2, 2, 512, 24.0)] {
            let model = GroupModel::euclidean(n, half, points).unwrap();
            let f = ResolventPower::new(1.0, m).unwrap();
            let numeric = model.synthesize(&kernel_spectrum(&model, &f)).unwrap();
            let kernel = Kernel::new(Arc::new(model.clone()), f).unwrap();
            for q in 0..model.node_count() {
                let d = model.node_distance(q);
                if (0.5..3.0).contains(&d) {
                    let exact = kernel.values().values()[q].re;
                    let rel = (numeric.values()[q].re - exact).abs() / exact;
                    assert!(rel < 1e-3, "n={n} d={d} rel={rel}");
                }
            }
        }
    }

    #[test]
    fn torus_kernel_closed_form() {
        let model = Arc::new(GroupModel::torus(1, 256).unwrap());
        let k = Kernel::new(model.clone(), ResolventPower::new(1.0, 1).unwrap()).unwrap();
        for q in 0..model.node_count() {
            let t = model.node_distance(q);
            let exact = (PI - t).cosh() / (2.0 * PI.sinh());
            assert!((k.values().values()[q].re - exact).abs() < 1e-13);
        }
        assert!(k.truncation_tail() < 1e-12);
    }

    #[test]
    fn torus_kernel_matches_fourier_series() {
        // Σ_k f(|k|) e^{ikθ} / 2π converges fast for m = 2
        let model = Arc::new(GroupModel::torus(1, 32).unwrap());
        let f = ResolventPower::new(0.7, 2).unwrap();
        let k = Kernel::new(model.clone(), f).unwrap();
        for q in 0..model.node_count() {
            let theta = model.node_coordinates(q)[0];
            let series: f64 = (-20000i64..=20000)
                .map(|j| f.eval(j as f64) * (j as f64 * theta).cos())
                .sum::<f64>()
                / (2.0 * PI);
            assert!((k.values().values()[q].re - series).abs() < 1e-10);
        }
    }

    #[test]
    fn su2_kernel_reproduces_block_spectrum() {
        let model = Arc::new(GroupModel::su2(6.0).unwrap());
        let f = ResolventPower::new(1.0, 2).unwrap();
        let k = Kernel::new(model.clone(), f).unwrap();
        match model.transform(k.values()).unwrap() {
            Spectrum::PeterWeyl(blocks) => {
                for (two_l, b) in blocks.iter().enumerate() {
                    let l = two_l as f64 / 2.0;
                    let expect = DMatrix::identity(two_l + 1, two_l + 1) * c(f.eval_squared(l * (l + 1.0)));
                    assert!((b - expect).norm() < 1e-10);
                }
            }
            _ => unreachable!(),
        }
        assert!(k.truncation_tail() > 0.0 && k.truncation_tail() < 1e-2);
        let m1 = Kernel::new(model, ResolventPower::new(1.0, 1).unwrap()).unwrap();
        assert!(m1.truncation_tail().is_infinite());
    }

    #[test]
    fn involution_and_positivity() {
        for model in [
            GroupModel::torus(1, 64).unwrap(),
            GroupModel::euclidean(1, 10.0, 128).unwrap(),
            GroupModel::torus(2, 12).unwrap(),
            GroupModel::su2(3.0).unwrap(),
        ] {
            let m = if model.dim() >= 2 { 2 } else { 1 };
            let k = Kernel::new(Arc::new(model), ResolventPower::new(1.3, m).unwrap()).unwrap();
            assert!(k.involution_defect() < 1e-10);
        }
    }

    #[test]
    fn unbounded_kernels_are_rejected() {
        let model = Arc::new(GroupModel::torus(2, 8).unwrap());
        assert!(matches!(
            Kernel::new(model, ResolventPower::new(1.0, 1).unwrap()),
            Err(SpectralError::Unbounded { .. })
        ));
        assert!(ResolventPower::new(0.0, 1).is_err());
        assert!(ResolventPower::new(1.0, 0).is_err());
    }

    #[test]
    fn convolution_by_kernel_is_self_adjoint() {
        let model = Arc::new(GroupModel::torus(1, 64).unwrap());
        let k = Kernel::new(model.clone(), ResolventPower::new(1.0, 1).unwrap()).unwrap();
        let phi = model.sample(|g| match g {
            GroupElement::Coords(x) => Complex64::new(x[0].sin(), (3.0 * x[0]).cos()),
            _ => unreachable!(),
        });
        let psi = model.sample(|g| match g {
            GroupElement::Coords(x) => Complex64::new((2.0 * x[0]).cos() + 0.5, x[0].sin()),
            _ => unreachable!(),
        });
        let ip = |a: &GroupFunction, b: &GroupFunction| -> Complex64 {
            a.values().iter().zip(b.values()).map(|(x, y)| x * y.conj()).sum::<Complex64>()
                * model.weight(0)
        };
        let lhs = ip(&model.convolve_direct(&phi, k.values()).unwrap(), &psi);
        let rhs = ip(&phi, &model.convolve_direct(&psi, k.values()).unwrap());
        assert!((lhs - rhs).norm() < 1e-8);
    }

    #[test]
    fn delta_factorization_cases() {
        let torus = GroupModel::torus(1, 64).unwrap();
        let f = ResolventPower::new(1.0, 1).unwrap();
        let phi = torus.sample(|g| match g {
            GroupElement::Coords(x) => (0..=16)
                .map(|k| Complex64::from_polar(1.0 / (1.0 + k as f64), k as f64 * x[0]))
                .sum(),
            _ => unreachable!(),
        });
        assert!(delta_factorization_residual(&torus, &f, &phi).unwrap() < 1e-8);
        let su2 = GroupModel::su2(4.0).unwrap();
        let one = su2.sample(|_| c(1.0));
        let f = ResolventPower::new(2.3, 3).unwrap();
        assert!(delta_factorization_residual(&su2, &f, &one).unwrap() < 1e-10);
        let euc = GroupModel::euclidean(1, 20.0, 1024).unwrap();
        let gauss = euc.sample_radial(|d| c((-d * d).exp()));
        let f = ResolventPower::new(1.0, 1).unwrap();
        assert!(delta_factorization_residual(&euc, &f, &gauss).unwrap() < 1e-6);
        let nyq = torus.sample(|g| match g {
            GroupElement::Coords(x) => c((32.0 * x[0]).cos()),
            _ => unreachable!(),
        });
        assert!(matches!(
            delta_factorization_residual(&torus, &f, &nyq),
            Err(SpectralError::OutOfBand { .. })
        ));
    }

    #[test]
    fn multiplier_is_exact_per_mode() {
        let model = GroupModel::torus(1, 32).unwrap();
        let f = ResolventPower::new(0.9, 2).unwrap();
        let spec = kernel_spectrum(&model, &f);
        let Spectrum::Fourier(k) = spec else { unreachable!() };
        for (q, kq) in k.iter().enumerate() {
            let l = model.laplace_eigenvalues()[q];
            let prod = (0.81 + l).powi(2) * kq.re * 2.0 * PI;
            assert!((prod - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dumps() {
        let model = Arc::new(GroupModel::torus(1, 8).unwrap());
        let k = Kernel::new(model, ResolventPower::new(1.0, 1).unwrap()).unwrap();
        let mut buf = Vec::new();
        k.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("distance,value\n0.00000000000000000e0,"));
        assert_eq!(k.to_json()["spectrum"]["kind"], "fourier");
    }

    proptest! {
        #[test]
        fn kernels_are_positive(r in 0.2..3.0f64, m in 1u32..4) {
            let torus = Arc::new(GroupModel::torus(1, 32).unwrap());
            let k = Kernel::new(torus, ResolventPower::new(r, m).unwrap()).unwrap();
            prop_assert!(k.values().values().iter().all(|v| v.re > 0.0));
            let euc = Arc::new(GroupModel::euclidean(1, 8.0, 64).unwrap());
            let k = Kernel::new(euc, ResolventPower::new(r, m).unwrap()).unwrap();
            prop_assert!(k.values().values().iter().all(|v| v.re > 0.0));
        }
    }
}
