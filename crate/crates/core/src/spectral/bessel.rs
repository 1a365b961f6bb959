//! Modified Bessel functions of the second kind and the Bessel-potential
//! kernel of `(R² + |ξ|²)^{-m}` on `ℝⁿ`.

use std::f64::consts::PI;

use libm::tgamma;

/// `K_ν(z)` for `z > 0`. Half-integer orders use the terminating series,
/// other orders the integral `∫₀^∞ e^{-z cosh t} cosh(νt) dt` by the
/// trapezoidal rule, which converges geometrically for this integrand.
pub fn bessel_k(nu: f64, z: f64) -> f64 {
    assert!(z > 0.0, "K_ν needs z > 0");
    let nu = nu.abs();
    let twice = 2.0 * nu;
    if (twice - twice.round()).abs() < 1e-12 && twice.round() as i64 % 2 == 1 {
        let p = (nu - 0.5).round() as u32;
        return half_integer_k(p, z);
    }
    let h: f64 = 0.1;
    let mut sum = 0.5 * (-z).exp();
    let mut t: f64 = h;
    loop {
        let exponent = -z * t.cosh() + nu * t;
        let term = exponent.exp() * 0.5 * (1.0 + (-2.0 * nu * t).exp());
        sum += term;
        if exponent < -750.0 || (term < 1e-18 * sum && z * t.sinh() > nu) {
            break;
        }
        t += h;
    }
    sum * h
}

/// `K_{p+1/2}(z) = √(π/2z) e^{-z} Σ_{j≤p} (p+j)! / (j!(p-j)!) (2z)^{-j}`.
fn half_integer_k(p: u32, z: f64) -> f64 {
    let mut coef = 1.0;
    let mut sum = 1.0;
    for j in 1..=p {
        let j = j as f64;
        let p = p as f64;
        // ratio of consecutive coefficients
        coef *= (p + j) * (p - j + 1.0) / j;
        sum += coef / (2.0 * z).powi(j as i32);
    }
    (PI / (2.0 * z)).sqrt() * (-z).exp() * sum
}

/// Kernel of `(R² - Δ_{ℝⁿ})^{-m}` at distance `r`:
/// `2^{1-m} / ((2π)^{n/2} Γ(m)) · (r/R)^{m-n/2} K_{m-n/2}(R r)`.
///
/// At `r = 0` this is `Γ(m - n/2) / ((4π)^{n/2} Γ(m) R^{2m-n})` when
/// `2m > n` and `+∞` otherwise.
pub fn bessel_potential(n: usize, r_param: f64, m: u32, r: f64) -> f64 {
    let nf = n as f64;
    let mf = m as f64;
    let nu = mf - nf / 2.0;
    if r == 0.0 {
        if nu > 0.0 {
            return tgamma(nu) / ((4.0 * PI).powf(nf / 2.0) * tgamma(mf) * r_param.powf(2.0 * nu));
        }
        return f64::INFINITY;
    }
    let pre = 2f64.powf(1.0 - mf) / ((2.0 * PI).powf(nf / 2.0) * tgamma(mf));
    pre * (r / r_param).powf(nu) * bessel_k(nu, r_param * r)
}
