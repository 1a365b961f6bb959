//! Local/tail split `κ = κ₁ + κ₂` by a smooth cutoff, and the numerical
//! diagnostics for each part: Hölder regularity of `κ₁` at the identity
//! and exponential decay of `κ₂`.

use num_complex::Complex64;
use serde::Serialize;

use super::{Kernel, SpectralError};
use crate::geometry::{fit_slope, GroupFunction, GroupModel};

pub const DEFAULT_EPSILON: f64 = 1.0;

/// Dyadic scales `h = 2^{-j}` used by the Hölder estimate.
const HOLDER_SCALES: std::ops::RangeInclusive<i32> = 3..=10;
/// Slopes above this are reported as saturated.
const HOLDER_SATURATION: f64 = 1.9;

fn bump_tail(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth `χ(r)`: `1` for `r ≤ ε/2`, `0` for `r ≥ ε`, built from `e^{-1/t}`.
pub fn smooth_cutoff(r: f64, epsilon: f64) -> f64 {
    let half = epsilon / 2.0;
    if r <= half {
        return 1.0;
    }
    if r >= epsilon {
        return 0.0;
    }
    let s = (r - half) / half;
    let a = bump_tail(1.0 - s);
    a / (a + bump_tail(s))
}

/// `κ₁ = χκ` (supported in `B_ε(e)`) and `κ₂ = κ - κ₁`.
#[derive(Debug, Clone)]
pub struct CgtSplit {
    kernel: Kernel,
    epsilon: f64,
    local: GroupFunction,
    tail: GroupFunction,
}

impl Kernel {
    pub fn cgt_split(&self, epsilon: f64) -> Result<CgtSplit, SpectralError> {
        let limit = self.model().injectivity_radius();
        if !(epsilon > 0.0 && epsilon < limit) {
            return Err(SpectralError::EpsilonOutOfRange { epsilon, limit });
        }
        let model = self.model();
        let kv = self.values().values();
        let local: Vec<Complex64> = (0..model.node_count())
            .map(|q| kv[q] * smooth_cutoff(model.node_distance(q), epsilon))
            .collect();
        let tail: Vec<Complex64> = kv.iter().zip(&local).map(|(k, l)| k - l).collect();
        Ok(CgtSplit {
            kernel: self.clone(),
            epsilon,
            local: model.function_from_values(local)?,
            tail: model.function_from_values(tail)?,
        })
    }
}

impl CgtSplit {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn local(&self) -> &GroupFunction {
        &self.local
    }

    pub fn tail(&self) -> &GroupFunction {
        &self.tail
    }

    /// `κ₁(exp(tX₁))`.
    pub fn local_profile(&self, t: f64) -> f64 {
        self.kernel.profile(t) * smooth_cutoff(t.abs(), self.epsilon)
    }

    /// `κ₂(exp(tX₁))`.
    pub fn tail_profile(&self, t: f64) -> f64 {
        self.kernel.profile(t) * (1.0 - smooth_cutoff(t.abs(), self.epsilon))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    /// RMS residual of the linear fit of `-log|κ₂|` against `d`.
    pub residual: f64,
    pub samples: usize,
}

/// Least-squares slope of `-log|κ₂(g)|` against `d(g)` over nodes with
/// `d(g)` in `window`.
pub fn tail_decay_rate(
    model: &GroupModel,
    tail: &GroupFunction,
    window: (f64, f64),
) -> Result<DecayFit, SpectralError> {
    if model.is_compact() {
        return Err(SpectralError::CompactModel);
    }
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = (0..model.node_count())
        .filter_map(|q| {
            let d = model.node_distance(q);
            let v = tail.values()[q].norm();
            (d >= lo && d <= hi && v > 0.0).then(|| (d, -v.ln()))
        })
        .collect();
    let (rate, residual) = fit_slope(&pts).ok_or(SpectralError::EmptyWindow { lo, hi })?;
    Ok(DecayFit {
        rate,
        residual,
        samples: pts.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderEstimate {
    pub alpha: f64,
    /// True when the slope reached the second-difference ceiling of 2, so
    /// the true regularity may be higher.
    pub saturated: bool,
    /// `(h, |Δ²_h κ₁(e)|)` pairs.
    pub samples: Vec<(f64, f64)>,
}

/// Log-log slope of the second differences `κ₁(h) - 2κ₁(0) + κ₁(-h)` along
/// `exp(tX₁)` for `h = 2^{-j}`, `j = 3..10`.
pub fn holder_exponent(split: &CgtSplit) -> Result<HolderEstimate, SpectralError> {
    let f = split.kernel.function();
    let n = split.kernel.model().dim();
    if 2 * f.m() as usize <= n {
        return Err(SpectralError::Unbounded {
            order: 2 * f.m(),
            dim: n,
        });
    }
    let k0 = split.local_profile(0.0);
    let samples: Vec<(f64, f64)> = HOLDER_SCALES
        .map(|j| {
            let h = 2f64.powi(-j);
            let d2 = split.local_profile(h) - 2.0 * k0 + split.local_profile(-h);
            (h, d2.abs())
        })
        .collect();
    let logs: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|(h, d)| (h.ln(), d.ln()))
        .collect();
    let alpha = fit_slope(&logs).map(|(s, _)| s).unwrap_or(f64::INFINITY);
    Ok(HolderEstimate {
        alpha,
        saturated: alpha >= HOLDER_SATURATION,
        samples,
    })
}

/// One-sided derivatives of `κ₁` at the identity along `exp(tX₁)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeJumps {
    pub first_right: f64,
    pub first_left: f64,
    pub second_right: f64,
    pub second_left: f64,
}

impl DerivativeJumps {
    pub fn first_jump(&self) -> f64 {
        self.first_right - self.first_left
    }

    pub fn second_jump(&self) -> f64 {
        self.second_right - self.second_left
    }
}

/// Fourth-order one-sided difference stencils with step `h`.
pub fn derivative_jumps(split: &CgtSplit, h: f64) -> DerivativeJumps {
    let side = |sign: f64| -> [f64; 6] {
        std::array::from_fn(|i| split.local_profile(sign * i as f64 * h))
    };
    let first = |f: &[f64; 6]| (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
    let second = |f: &[f64; 6]| {
        (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] - 10.0 * f[5])
            / (12.0 * h * h)
    };
    let (r, l) = (side(1.0), side(-1.0));
    DerivativeJumps {
        first_right: first(&r),
        first_left: -first(&l),
        second_right: second(&r),
        second_left: second(&l),
    }
}
