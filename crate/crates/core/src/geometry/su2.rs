//! SU(2): spin matrices, Euler-angle Haar quadrature and the Peter–Weyl
//! transform.
//!
//! Elements are parametrised as `g = e^{αX₃} e^{βX₂} e^{γX₃}` with
//! `α ∈ [0, 2π)`, `β ∈ [0, π]`, `γ ∈ [0, 4π)`, which covers SU(2) exactly
//! once. In these coordinates the Riemannian measure of the orthonormal
//! basis `X_j = -iσ_j/2` is `sin β dα dβ dγ`, of total mass `16π²`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use super::quadrature::gauss_legendre;

pub const SU2_HAAR_MASS: f64 = 16.0 * PI * PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Generators `dπ_ℓ(X_j) = -i J_j` of the spin-ℓ irrep (`two_l = 2ℓ`), in
/// the basis `|ℓ, m⟩`, `m = ℓ, ℓ-1, …, -ℓ`.
pub fn spin_generators(two_l: u32) -> Vec<DMatrix<Complex64>> {
    let d = two_l as usize + 1;
    let l = two_l as f64 / 2.0;
    let mut j_plus = DMatrix::<Complex64>::zeros(d, d);
    for a in 1..d {
        let m = l - a as f64;
        j_plus[(a - 1, a)] = Complex64::new((l * (l + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let j_minus = j_plus.transpose();
    let j3 = DMatrix::from_fn(d, d, |a, b| {
        if a == b {
            Complex64::new(l - a as f64, 0.0)
        } else {
            Complex64::default()
        }
    });
    let j1 = (&j_plus + &j_minus) * Complex64::new(0.5, 0.0);
    let j2 = (&j_plus - &j_minus) * Complex64::new(0.0, -0.5);
    vec![j1 * -I, j2 * -I, j3 * -I]
}

/// `m`-values of the spin-ℓ basis, doubled: `2m = 2ℓ - 2a`.
fn two_m(two_l: u32, a: usize) -> i64 {
    two_l as i64 - 2 * a as i64
}

pub fn euler_to_matrix(alpha: f64, beta: f64, gamma: f64) -> Matrix2<Complex64> {
    let za = Complex64::from_polar(1.0, -alpha / 2.0);
    let zg = Complex64::from_polar(1.0, -gamma / 2.0);
    let (s, c) = (beta / 2.0).sin_cos();
    let ea = Matrix2::new(za, Complex64::default(), Complex64::default(), za.conj());
    let eb = Matrix2::new(
        Complex64::new(c, 0.0),
        Complex64::new(-s, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(c, 0.0),
    );
    let eg = Matrix2::new(zg, Complex64::default(), Complex64::default(), zg.conj());
    ea * eb * eg
}

/// `exp(Σ x_j X_j)` for the orthonormal basis `X_j = -iσ_j/2`.
pub fn exp_su2(x: [f64; 3]) -> Matrix2<Complex64> {
    let theta = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let c = (theta / 2.0).cos();
    // sin(θ/2)/θ, stable near 0
    let s = if theta < 1e-8 {
        0.5 - theta * theta / 48.0
    } else {
        (theta / 2.0).sin() / theta
    };
    // c I - i s (x·σ)
    Matrix2::new(
        Complex64::new(c, -s * x[2]),
        Complex64::new(-s * x[1], -s * x[0]),
        Complex64::new(s * x[1], -s * x[0]),
        Complex64::new(c, s * x[2]),
    )
}

/// Exponential coordinates of an SU(2) matrix, with `|x| ∈ [0, 2π]`.
pub fn log_su2(u: &Matrix2<Complex64>) -> [f64; 3] {
    // u = a I - i (b·σ), a = Re tr(u)/2
    let a = ((u[(0, 0)] + u[(1, 1)]).re / 2.0).clamp(-1.0, 1.0);
    let b3 = -(u[(0, 0)] - u[(1, 1)]).im / 2.0;
    let b1 = -(u[(0, 1)] + u[(1, 0)]).im / 2.0;
    let b2 = (u[(1, 0)] - u[(0, 1)]).re / 2.0;
    let norm_b = (b1 * b1 + b2 * b2 + b3 * b3).sqrt();
    let theta = 2.0 * a.acos();
    if norm_b < 1e-300 {
        // ±I; any axis reaches -I at θ = 2π
        return [0.0, 0.0, theta];
    }
    let scale = theta / norm_b;
    [b1 * scale, b2 * scale, b3 * scale]
}

/// Euler-angle product quadrature on SU(2) that integrates products of
/// matrix coefficients of spins up to `ℓ_max` exactly.
#[derive(Debug, Clone)]
pub struct Su2Grid {
    two_l_max: u32,
    alphas: Vec<f64>,
    betas: Vec<f64>,
    beta_weights: Vec<f64>,
    gammas: Vec<f64>,
    // small_d[two_l][ib] = exp(β dπ_ℓ(X₂)), a real matrix
    small_d: Vec<Vec<DMatrix<f64>>>,
}

impl Su2Grid {
    pub fn new(two_l_max: u32) -> Self {
        let t = two_l_max as usize;
        let n_alpha = t + 2;
        let n_gamma = 2 * t + 2;
        let n_beta = t / 2 + 2;
        let alphas = (0..n_alpha)
            .map(|i| 2.0 * PI * i as f64 / n_alpha as f64)
            .collect();
        let gammas = (0..n_gamma)
            .map(|i| 4.0 * PI * i as f64 / n_gamma as f64)
            .collect();
        let (cos_nodes, beta_weights) = gauss_legendre(n_beta);
        let betas: Vec<f64> = cos_nodes.iter().map(|c| c.acos()).collect();
        let small_d = (0..=two_l_max)
            .map(|two_l| {
                let d2 = &spin_generators(two_l)[1];
                betas
                    .iter()
                    .map(|&b| {
                        let e = (d2 * Complex64::new(b, 0.0)).exp();
                        e.map(|z| z.re)
                    })
                    .collect()
            })
            .collect();
        Self {
            two_l_max,
            alphas,
            betas,
            beta_weights,
            gammas,
            small_d,
        }
    }

    pub fn two_l_max(&self) -> u32 {
        self.two_l_max
    }

    pub fn len(&self) -> usize {
        self.alphas.len() * self.betas.len() * self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn split(&self, q: usize) -> (usize, usize, usize) {
        let ng = self.gammas.len();
        let nb = self.betas.len();
        let ig = q % ng;
        let ib = (q / ng) % nb;
        let ia = q / (ng * nb);
        (ia, ib, ig)
    }

    pub fn euler(&self, q: usize) -> [f64; 3] {
        let (ia, ib, ig) = self.split(q);
        [self.alphas[ia], self.betas[ib], self.gammas[ig]]
    }

    pub fn element(&self, q: usize) -> Matrix2<Complex64> {
        let [a, b, g] = self.euler(q);
        euler_to_matrix(a, b, g)
    }

    pub fn weight(&self, q: usize) -> f64 {
        let (_, ib, _) = self.split(q);
        (2.0 * PI / self.alphas.len() as f64)
            * self.beta_weights[ib]
            * (4.0 * PI / self.gammas.len() as f64)
    }

    /// Block sizes `2ℓ+1` for `2ℓ = 0..=2ℓ_max`.
    pub fn block_dims(&self) -> Vec<usize> {
        (0..=self.two_l_max as usize).map(|t| t + 1).collect()
    }

    /// `f̂(ℓ) = ∫ f(g) π_ℓ(g)^* dg` for every `2ℓ ≤ 2ℓ_max`.
    pub fn forward(&self, values: &[Complex64]) -> Vec<DMatrix<Complex64>> {
        let t = self.two_l_max as i64;
        let n_mu = (2 * t + 1) as usize;
        let (na, nb, ng) = (self.alphas.len(), self.betas.len(), self.gammas.len());
        let wa = 2.0 * PI / na as f64;
        let wg = 4.0 * PI / ng as f64;
        // phase tables e^{i m θ} indexed by μ = 2m + t
        let phase = |angles: &[f64], sign: f64| -> Vec<Vec<Complex64>> {
            angles
                .iter()
                .map(|&th| {
                    (0..n_mu)
                        .map(|mu| {
                            let m = (mu as i64 - t) as f64 / 2.0;
                            Complex64::from_polar(1.0, sign * m * th)
                        })
                        .collect()
                })
                .collect()
        };
        let pa = phase(&self.alphas, 1.0);
        let pg = phase(&self.gammas, 1.0);
        // H[ia][ib][μ_b] = Σ_γ wγ f e^{i m_b γ}
        let mut h = vec![Complex64::default(); na * nb * n_mu];
        for ia in 0..na {
            for ib in 0..nb {
                let base = (ia * nb + ib) * ng;
                let out = &mut h[(ia * nb + ib) * n_mu..(ia * nb + ib + 1) * n_mu];
                for (ig, row) in pg.iter().enumerate() {
                    let f = values[base + ig] * wg;
                    for (o, p) in out.iter_mut().zip(row) {
                        *o += f * p;
                    }
                }
            }
        }
        // G[ib][μ_a][μ_b] = Σ_α wα H e^{i m_a α}
        let mut g = vec![Complex64::default(); nb * n_mu * n_mu];
        for ib in 0..nb {
            for (ia, row_a) in pa.iter().enumerate() {
                let hrow = &h[(ia * nb + ib) * n_mu..(ia * nb + ib + 1) * n_mu];
                for (mu_a, pa_v) in row_a.iter().enumerate() {
                    let w = pa_v * wa;
                    let out = &mut g[(ib * n_mu + mu_a) * n_mu..(ib * n_mu + mu_a + 1) * n_mu];
                    for (o, hv) in out.iter_mut().zip(hrow) {
                        *o += w * hv;
                    }
                }
            }
        }
        (0..=self.two_l_max)
            .map(|two_l| {
                let d = two_l as usize + 1;
                let mut block = DMatrix::<Complex64>::zeros(d, d);
                for ib in 0..nb {
                    let wb = self.beta_weights[ib];
                    let dm = &self.small_d[two_l as usize][ib];
                    for a in 0..d {
                        let mu_a = (two_m(two_l, a) + t) as usize;
                        for b in 0..d {
                            let mu_b = (two_m(two_l, b) + t) as usize;
                            block[(b, a)] +=
                                g[(ib * n_mu + mu_a) * n_mu + mu_b] * (wb * dm[(a, b)]);
                        }
                    }
                }
                block
            })
            .collect()
    }

    /// `f(g) = V⁻¹ Σ_ℓ (2ℓ+1) tr(f̂(ℓ) π_ℓ(g))` at every node.
    pub fn inverse(&self, blocks: &[DMatrix<Complex64>]) -> Vec<Complex64> {
        let t = self.two_l_max as i64;
        let n_mu = (2 * t + 1) as usize;
        let (na, nb, ng) = (self.alphas.len(), self.betas.len(), self.gammas.len());
        // A[ib][μ_a][μ_b]
        let mut a_tab = vec![Complex64::default(); nb * n_mu * n_mu];
        for (two_l, block) in blocks.iter().enumerate() {
            let d = two_l + 1;
            let scale = d as f64 / SU2_HAAR_MASS;
            for ib in 0..nb {
                let dm = &self.small_d[two_l][ib];
                for a in 0..d {
                    let mu_a = (two_m(two_l as u32, a) + t) as usize;
                    for b in 0..d {
                        let mu_b = (two_m(two_l as u32, b) + t) as usize;
                        a_tab[(ib * n_mu + mu_a) * n_mu + mu_b] +=
                            block[(b, a)] * (scale * dm[(a, b)]);
                    }
                }
            }
        }
        let phase = |th: f64, mu: usize| {
            let m = (mu as i64 - t) as f64 / 2.0;
            Complex64::from_polar(1.0, -m * th)
        };
        // B[ia][ib][μ_b] = Σ_{μ_a} A e^{-i m_a α}
        let mut b_tab = vec![Complex64::default(); na * nb * n_mu];
        for (ia, &alpha) in self.alphas.iter().enumerate() {
            let pa: Vec<Complex64> = (0..n_mu).map(|mu| phase(alpha, mu)).collect();
            for ib in 0..nb {
                let out = &mut b_tab[(ia * nb + ib) * n_mu..(ia * nb + ib + 1) * n_mu];
                for (mu_a, p) in pa.iter().enumerate() {
                    let row = &a_tab[(ib * n_mu + mu_a) * n_mu..(ib * n_mu + mu_a + 1) * n_mu];
                    for (o, v) in out.iter_mut().zip(row) {
                        *o += p * v;
                    }
                }
            }
        }
        let pg: Vec<Vec<Complex64>> = self
            .gammas
            .iter()
            .map(|&g| (0..n_mu).map(|mu| phase(g, mu)).collect())
            .collect();
        let mut values = vec![Complex64::default(); na * nb * ng];
        for ia in 0..na {
            for ib in 0..nb {
                let row = &b_tab[(ia * nb + ib) * n_mu..(ia * nb + ib + 1) * n_mu];
                for (ig, p) in pg.iter().enumerate() {
                    values[(ia * nb + ib) * ng + ig] =
                        row.iter().zip(p).map(|(v, p)| v * p).sum();
                }
            }
        }
        values
    }

    /// `π_ℓ(g)` at an arbitrary element, via exponential coordinates.
    pub fn irrep_matrix(two_l: u32, u: &Matrix2<Complex64>) -> DMatrix<Complex64> {
        let x = log_su2(u);
        let gens = spin_generators(two_l);
        let mut a = DMatrix::<Complex64>::zeros(two_l as usize + 1, two_l as usize + 1);
        for (g, xi) in gens.iter().zip(x) {
            a += g * Complex64::new(xi, 0.0);
        }
        a.exp()
    }
}

/// Character `χ_ℓ` at an element at distance `t` from the identity:
/// `Σ_m e^{imt}`.
pub fn character(two_l: u32, t: f64) -> f64 {
    (0..=two_l as usize)
        .map(|a| (two_m(two_l, a) as f64 / 2.0 * t).cos())
        .sum()
}
