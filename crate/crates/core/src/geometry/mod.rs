//! Model groups: the torus `Tⁿ = ℝⁿ/2πℤⁿ`, the translation group `ℝⁿ` and
//! `SU(2)`, each with its distance function, Haar quadrature, harmonic
//! analysis and convolution.

mod grid;
mod quadrature;
pub mod su2;

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lie::LieAlgebra;
pub use grid::PeriodicGrid;
pub use quadrature::gauss_legendre;
pub use su2::{Su2Grid, SU2_HAAR_MASS};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("group functions live on different models")]
    ModelMismatch,
    #[error("malformed group element: {0}")]
    MalformedElement(String),
    #[error("weighted integral diverges: fitted decay rate {decay} does not exceed weight rate {rate}")]
    Divergent { decay: f64, rate: f64 },
    #[error("function is not band-limited on this model (out-of-band content {excess:e})")]
    OutOfBand { excess: f64 },
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Torus(usize),
    Euclidean(usize),
    Su2,
}

/// A group element: coordinates on the abelian models, a 2×2 unitary
/// matrix on SU(2).
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Coords(Vec<f64>),
    Su2(Matrix2<Complex64>),
}

#[derive(Debug, Clone)]
enum Layout {
    Grid(PeriodicGrid),
    Su2(Su2Grid),
}

/// Identifies the node set a [`GroupFunction`] is sampled on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSignature {
    kind: ModelKind,
    nodes: usize,
    extent: f64,
}

#[derive(Debug, Clone)]
pub struct GroupModel {
    kind: ModelKind,
    algebra: Arc<LieAlgebra>,
    layout: Layout,
}

/// Values of a function at the quadrature nodes of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupFunction {
    signature: ModelSignature,
    values: Vec<Complex64>,
}

impl GroupFunction {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn signature(&self) -> ModelSignature {
        self.signature
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            signature: self.signature,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &Self,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self, GeometryError> {
        if self.signature != other.signature {
            return Err(GeometryError::ModelMismatch);
        }
        Ok(Self {
            signature: self.signature,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        })
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |self - other|` over the nodes.
    pub fn sup_distance(&self, other: &Self) -> Result<f64, GeometryError> {
        Ok(self.zip_with(other, |a, b| a - b)?.sup_norm())
    }
}

/// Harmonic-analysis coefficients of a [`GroupFunction`].
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    /// `c_k` with `f(x) = Σ_k c_k e^{i k·x}`, in grid FFT order.
    Fourier(Vec<Complex64>),
    /// Peter–Weyl blocks `f̂(ℓ) = ∫ f(g) π_ℓ(g)^* dg`, indexed by `2ℓ`.
    PeterWeyl(Vec<DMatrix<Complex64>>),
}

/// `c_G` together with the numerical witness `∫ e^{-C d(g)} dg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrabilityWitness {
    pub c_g: f64,
    pub rate: f64,
    pub integral: f64,
}

impl GroupModel {
    /// `Tⁿ` with `points` nodes per axis.
    pub fn torus(n: usize, points: usize) -> Result<Self, GeometryError> {
        if n == 0 || points < 2 {
            return Err(GeometryError::InvalidParameter(
                "torus needs n ≥ 1 and at least 2 points per axis".into(),
            ));
        }
        Ok(Self {
            kind: ModelKind::Torus(n),
            algebra: Arc::new(LieAlgebra::torus(n)),
            layout: Layout::Grid(PeriodicGrid::new(n, points, 2.0 * PI)),
        })
    }

    /// `ℝⁿ` truncated to the periodic box `[-L, L)ⁿ` with `points` nodes
    /// per axis (`points` even, so that `0` is a node).
    pub fn euclidean(n: usize, half_width: f64, points: usize) -> Result<Self, GeometryError> {
        if n == 0 || points < 2 || !points.is_multiple_of(2) || half_width <= 0.0 {
            return Err(GeometryError::InvalidParameter(
                "euclidean model needs n ≥ 1, an even number of points and L > 0".into(),
            ));
        }
        Ok(Self {
            kind: ModelKind::Euclidean(n),
            algebra: Arc::new(LieAlgebra::euclidean(n)),
            layout: Layout::Grid(PeriodicGrid::new(n, points, 2.0 * half_width)),
        })
    }

    /// SU(2) with a Peter–Weyl band `ℓ ≤ l_max` (`l_max` a multiple of 1/2).
    pub fn su2(l_max: f64) -> Result<Self, GeometryError> {
        let two = 2.0 * l_max;
        if !(two >= 0.0) || (two - two.round()).abs() > 1e-12 || two > 400.0 {
            return Err(GeometryError::InvalidParameter(format!(
                "l_max = {l_max} must be a non-negative multiple of 1/2"
            )));
        }
        Ok(Self {
            kind: ModelKind::Su2,
            algebra: Arc::new(LieAlgebra::su2()),
            layout: Layout::Su2(Su2Grid::new(two.round() as u32)),
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self.kind, ModelKind::Euclidean(_))
    }

    pub fn grid(&self) -> Option<&PeriodicGrid> {
        match &self.layout {
            Layout::Grid(g) => Some(g),
            Layout::Su2(_) => None,
        }
    }

    pub fn su2_grid(&self) -> Option<&Su2Grid> {
        match &self.layout {
            Layout::Su2(g) => Some(g),
            Layout::Grid(_) => None,
        }
    }

    /// Half-width `L` of the Euclidean box.
    pub fn half_width(&self) -> Option<f64> {
        match (&self.kind, &self.layout) {
            (ModelKind::Euclidean(_), Layout::Grid(g)) => Some(g.period() / 2.0),
            _ => None,
        }
    }

    /// Largest radius below which balls around `e` are embedded.
    pub fn injectivity_radius(&self) -> f64 {
        match self.kind {
            ModelKind::Torus(_) => PI,
            ModelKind::Euclidean(_) => f64::INFINITY,
            ModelKind::Su2 => 2.0 * PI,
        }
    }

    pub fn signature(&self) -> ModelSignature {
        let (nodes, extent) = match &self.layout {
            Layout::Grid(g) => (g.len(), g.period()),
            Layout::Su2(g) => (g.len(), g.two_l_max() as f64),
        };
        ModelSignature {
            kind: self.kind,
            nodes,
            extent,
        }
    }

    pub fn haar_mass(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Torus(n) => Some((2.0 * PI).powi(n as i32)),
            ModelKind::Euclidean(_) => None,
            ModelKind::Su2 => Some(SU2_HAAR_MASS),
        }
    }

    pub fn node_count(&self) -> usize {
        match &self.layout {
            Layout::Grid(g) => g.len(),
            Layout::Su2(g) => g.len(),
        }
    }

    pub fn node(&self, q: usize) -> GroupElement {
        match &self.layout {
            Layout::Grid(g) => GroupElement::Coords(g.coords(q)),
            Layout::Su2(g) => GroupElement::Su2(g.element(q)),
        }
    }

    /// Node coordinates used for export: grid coordinates, or Euler angles
    /// `(α, β, γ)` on SU(2).
    pub fn node_coordinates(&self, q: usize) -> Vec<f64> {
        match &self.layout {
            Layout::Grid(g) => g.coords(q),
            Layout::Su2(g) => g.euler(q).to_vec(),
        }
    }

    pub fn weight(&self, q: usize) -> f64 {
        match &self.layout {
            Layout::Grid(g) => g.weight(),
            Layout::Su2(g) => g.weight(q),
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.node_count()).map(|q| self.weight(q)).collect()
    }

    pub fn node_distance(&self, q: usize) -> f64 {
        self.distance(&self.node(q)).expect("nodes are well formed")
    }

    pub fn identity(&self) -> GroupElement {
        match self.kind {
            ModelKind::Su2 => GroupElement::Su2(Matrix2::identity()),
            _ => GroupElement::Coords(vec![0.0; self.dim()]),
        }
    }

    fn check(&self, g: &GroupElement) -> Result<(), GeometryError> {
        match (self.kind, g) {
            (ModelKind::Su2, GroupElement::Su2(u)) => {
                let defect = (u.adjoint() * u - Matrix2::identity()).norm();
                let det = u.determinant();
                if defect > 1e-8 || (det - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
                    return Err(GeometryError::MalformedElement(
                        "matrix is not in SU(2)".into(),
                    ));
                }
                Ok(())
            }
            (ModelKind::Torus(n) | ModelKind::Euclidean(n), GroupElement::Coords(x)) => {
                if x.len() != n {
                    return Err(GeometryError::MalformedElement(format!(
                        "expected {n} coordinates, got {}",
                        x.len()
                    )));
                }
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(GeometryError::MalformedElement(
                        "non-finite coordinate".into(),
                    ));
                }
                Ok(())
            }
            _ => Err(GeometryError::MalformedElement(
                "element type does not match the model".into(),
            )),
        }
    }

    /// Riemannian distance `d(g) = d(g, e)`.
    pub fn distance(&self, g: &GroupElement) -> Result<f64, GeometryError> {
        self.check(g)?;
        Ok(match g {
            GroupElement::Coords(x) => match self.kind {
                ModelKind::Torus(_) => x
                    .iter()
                    .map(|t| {
                        let r = wrap_angle(*t);
                        r * r
                    })
                    .sum::<f64>()
                    .sqrt(),
                _ => x.iter().map(|t| t * t).sum::<f64>().sqrt(),
            },
            GroupElement::Su2(u) => {
                let half_trace = ((u[(0, 0)] + u[(1, 1)]).re / 2.0).clamp(-1.0, 1.0);
                2.0 * half_trace.acos()
            }
        })
    }

    /// `exp(Σ x_j X_j)`.
    pub fn exp(&self, x: &[f64]) -> Result<GroupElement, GeometryError> {
        if x.len() != self.dim() {
            return Err(GeometryError::MalformedElement(format!(
                "expected {} exponential coordinates",
                self.dim()
            )));
        }
        Ok(match self.kind {
            ModelKind::Su2 => GroupElement::Su2(su2::exp_su2([x[0], x[1], x[2]])),
            ModelKind::Torus(_) => GroupElement::Coords(x.iter().map(|t| wrap_angle(*t)).collect()),
            ModelKind::Euclidean(_) => GroupElement::Coords(x.to_vec()),
        })
    }

    /// Exponential coordinates of `g` (principal branch).
    pub fn log(&self, g: &GroupElement) -> Result<Vec<f64>, GeometryError> {
        self.check(g)?;
        Ok(match g {
            GroupElement::Coords(x) => match self.kind {
                ModelKind::Torus(_) => x.iter().map(|t| wrap_angle(*t)).collect(),
                _ => x.clone(),
            },
            GroupElement::Su2(u) => su2::log_su2(u).to_vec(),
        })
    }

    pub fn compose(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement, GeometryError> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (a, b) {
            (GroupElement::Coords(x), GroupElement::Coords(y)) => {
                let sum = x.iter().zip(y).map(|(p, q)| p + q);
                GroupElement::Coords(match self.kind {
                    ModelKind::Torus(_) => sum.map(wrap_angle).collect(),
                    _ => sum.collect(),
                })
            }
            (GroupElement::Su2(u), GroupElement::Su2(v)) => GroupElement::Su2(u * v),
            _ => unreachable!("checked above"),
        })
    }

    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement, GeometryError> {
        self.check(g)?;
        Ok(match g {
            GroupElement::Coords(x) => {
                GroupElement::Coords(self.log(&GroupElement::Coords(x.iter().map(|t| -t).collect()))?)
            }
            GroupElement::Su2(u) => GroupElement::Su2(u.adjoint()),
        })
    }

    pub fn zero_function(&self) -> GroupFunction {
        self.function_from_values(vec![Complex64::default(); self.node_count()])
            .expect("length matches")
    }

    pub fn function_from_values(&self, values: Vec<Complex64>) -> Result<GroupFunction, GeometryError> {
        if values.len() != self.node_count() {
            return Err(GeometryError::ModelMismatch);
        }
        Ok(GroupFunction {
            signature: self.signature(),
            values,
        })
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(&GroupElement) -> Complex64) -> GroupFunction {
        let values = (0..self.node_count()).map(|q| f(&self.node(q))).collect();
        GroupFunction {
            signature: self.signature(),
            values,
        }
    }

    /// Samples a function of the distance to the identity.
    pub fn sample_radial(&self, f: impl Fn(f64) -> Complex64) -> GroupFunction {
        self.sample(|g| f(self.distance(g).expect("node")))
    }

    fn check_function(&self, f: &GroupFunction) -> Result<(), GeometryError> {
        if f.signature == self.signature() {
            Ok(())
        } else {
            Err(GeometryError::ModelMismatch)
        }
    }

    pub fn transform(&self, f: &GroupFunction) -> Result<Spectrum, GeometryError> {
        self.check_function(f)?;
        Ok(match &self.layout {
            Layout::Grid(g) => Spectrum::Fourier(g.forward(&f.values)),
            Layout::Su2(g) => Spectrum::PeterWeyl(g.forward(&f.values)),
        })
    }

    pub fn synthesize(&self, s: &Spectrum) -> Result<GroupFunction, GeometryError> {
        let values = match (&self.layout, s) {
            (Layout::Grid(g), Spectrum::Fourier(c)) if c.len() == g.len() => g.inverse(c),
            (Layout::Su2(g), Spectrum::PeterWeyl(b)) if b.len() == g.two_l_max() as usize + 1 => {
                g.inverse(b)
            }
            _ => return Err(GeometryError::ModelMismatch),
        };
        self.function_from_values(values)
    }

    /// Multiplies every spectral component by `m(λ)`, where `λ ≥ 0` is the
    /// eigenvalue of the Laplace–Beltrami operator on that component
    /// (`|ξ|²` on grids, `ℓ(ℓ+1)` on SU(2)).
    pub fn apply_multiplier(
        &self,
        s: &Spectrum,
        m: impl Fn(f64) -> Complex64,
    ) -> Result<Spectrum, GeometryError> {
        Ok(match (&self.layout, s) {
            (Layout::Grid(g), Spectrum::Fourier(c)) if c.len() == g.len() => Spectrum::Fourier(
                c.iter()
                    .enumerate()
                    .map(|(q, v)| v * m(g.frequency_norm_sq(q)))
                    .collect(),
            ),
            (Layout::Su2(_), Spectrum::PeterWeyl(b)) => Spectrum::PeterWeyl(
                b.iter()
                    .enumerate()
                    .map(|(two_l, block)| {
                        let l = two_l as f64 / 2.0;
                        block * m(l * (l + 1.0))
                    })
                    .collect(),
            ),
            _ => return Err(GeometryError::ModelMismatch),
        })
    }

    /// Laplace eigenvalue attached to every spectral index (grid models)
    /// or block (SU(2)).
    pub fn laplace_eigenvalues(&self) -> Vec<f64> {
        match &self.layout {
            Layout::Grid(g) => (0..g.len()).map(|q| g.frequency_norm_sq(q)).collect(),
            Layout::Su2(g) => (0..=g.two_l_max())
                .map(|t| {
                    let l = t as f64 / 2.0;
                    l * (l + 1.0)
                })
                .collect(),
        }
    }

    /// Relative size of the content a round trip through the spectrum
    /// cannot represent (Nyquist modes on grids, spins above `ℓ_max` on
    /// SU(2)).
    pub fn band_excess(&self, f: &GroupFunction) -> Result<f64, GeometryError> {
        let scale = f.sup_norm().max(f64::MIN_POSITIVE);
        match (&self.layout, self.transform(f)?) {
            (Layout::Grid(g), Spectrum::Fourier(c)) => {
                let nyq: f64 = c
                    .iter()
                    .enumerate()
                    .filter(|(q, _)| g.is_nyquist(*q))
                    .map(|(_, v)| v.norm())
                    .sum();
                Ok(nyq / scale)
            }
            (Layout::Su2(_), s) => {
                let back = self.synthesize(&s)?;
                Ok(back.sup_distance(f)? / scale)
            }
            _ => unreachable!(),
        }
    }

    /// Left convolution `φ∗ψ(g) = ∫ φ(x) ψ(x⁻¹g) dx`, computed spectrally.
    pub fn convolve(&self, phi: &GroupFunction, psi: &GroupFunction) -> Result<GroupFunction, GeometryError> {
        let sp = self.transform(phi)?;
        let ss = self.transform(psi)?;
        let out = match (&self.layout, sp, ss) {
            (Layout::Grid(g), Spectrum::Fourier(a), Spectrum::Fourier(b)) => {
                let vol = g.period().powi(g.dim() as i32);
                Spectrum::Fourier(a.iter().zip(&b).map(|(x, y)| x * y * vol).collect())
            }
            (Layout::Su2(_), Spectrum::PeterWeyl(a), Spectrum::PeterWeyl(b)) => {
                Spectrum::PeterWeyl(a.iter().zip(&b).map(|(fa, fb)| fb * fa).collect())
            }
            _ => unreachable!(),
        };
        self.synthesize(&out)
    }

    /// Left convolution by direct quadrature over the nodes. On SU(2) the
    /// second factor is evaluated off-grid through its Peter–Weyl expansion.
    pub fn convolve_direct(
        &self,
        phi: &GroupFunction,
        psi: &GroupFunction,
    ) -> Result<GroupFunction, GeometryError> {
        self.check_function(phi)?;
        self.check_function(psi)?;
        match &self.layout {
            Layout::Grid(g) => {
                let w = g.weight();
                let n = g.len();
                let idx: Vec<Vec<usize>> = (0..n).map(|q| g.multi_index(q)).collect();
                let values = (0..n)
                    .map(|i| {
                        let gi = &idx[i];
                        let mut acc = Complex64::default();
                        let mut diff = vec![0usize; g.dim()];
                        for (j, gj) in idx.iter().enumerate() {
                            for a in 0..g.dim() {
                                diff[a] = (gi[a] + g.points() - gj[a]) % g.points();
                            }
                            acc += phi.values[j] * psi.values[g.flat_index(&diff)];
                        }
                        acc * w
                    })
                    .collect();
                self.function_from_values(values)
            }
            Layout::Su2(grid) => {
                let blocks = match self.transform(psi)? {
                    Spectrum::PeterWeyl(b) => b,
                    Spectrum::Fourier(_) => unreachable!(),
                };
                let n = grid.len();
                let elements: Vec<Matrix2<Complex64>> = (0..n).map(|q| grid.element(q)).collect();
                let values = elements
                    .iter()
                    .map(|gi| {
                        elements
                            .iter()
                            .enumerate()
                            .map(|(j, x)| {
                                let h = x.adjoint() * gi;
                                phi.values[j] * evaluate_peter_weyl(&blocks, &h) * grid.weight(j)
                            })
                            .sum()
                    })
                    .collect();
                self.function_from_values(values)
            }
        }
    }

    /// `∫ e^{-C d(g)} dg`; `c_G = 0` for every included model.
    pub fn c_g(&self, rate: f64) -> IntegrabilityWitness {
        let integral = (0..self.node_count())
            .map(|q| self.weight(q) * (-rate * self.node_distance(q)).exp())
            .sum();
        IntegrabilityWitness {
            c_g: 0.0,
            rate,
            integral,
        }
    }

    /// Least-squares exponential decay rate of `|φ|` against `d(g)` over the
    /// outer shell `d ∈ [L/2, 0.95 L]` of a Euclidean model. `None` on
    /// compact models; `+∞` when `φ` vanishes on the shell.
    pub fn decay_rate(&self, phi: &GroupFunction) -> Result<Option<f64>, GeometryError> {
        self.check_function(phi)?;
        let Some(l) = self.half_width() else {
            return Ok(None);
        };
        let (lo, hi) = (0.5 * l, 0.95 * l);
        let pts: Vec<(f64, f64)> = (0..self.node_count())
            .filter_map(|q| {
                let d = self.node_distance(q);
                let v = phi.values[q].norm();
                (d >= lo && d <= hi && v > 1e-300).then(|| (d, -v.ln()))
            })
            .collect();
        Ok(Some(fit_slope(&pts).map(|(s, _)| s).unwrap_or(f64::INFINITY)))
    }

    /// Norm of `φ` in `L¹(G, e^{R d(g)} dg)`.
    pub fn weighted_l1_norm(&self, phi: &GroupFunction, rate: f64) -> Result<f64, GeometryError> {
        if let Some(decay) = self.decay_rate(phi)? {
            if decay <= rate + 1e-6 {
                return Err(GeometryError::Divergent { decay, rate });
            }
        }
        Ok((0..self.node_count())
            .map(|q| self.weight(q) * phi.values[q].norm() * (rate * self.node_distance(q)).exp())
            .sum())
    }

    /// Writes `coords…, real, imag` rows.
    pub fn write_csv<W: Write>(&self, f: &GroupFunction, out: W) -> Result<(), GeometryError> {
        self.check_function(f)?;
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = match self.kind {
            ModelKind::Su2 => vec!["alpha".into(), "beta".into(), "gamma".into()],
            _ => (0..self.dim()).map(|i| format!("x{}", i + 1)).collect(),
        };
        header.push("real".into());
        header.push("imag".into());
        w.write_record(&header)?;
        for (q, v) in f.values.iter().enumerate() {
            let mut row: Vec<String> = self
                .node_coordinates(q)
                .iter()
                .map(|c| format!("{c:.17e}"))
                .collect();
            row.push(format!("{:.17e}", v.re));
            row.push(format!("{:.17e}", v.im));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a function written by [`GroupModel::write_csv`]; node
    /// coordinates must match this model's nodes.
    pub fn read_csv<R: Read>(&self, input: R) -> Result<GroupFunction, GeometryError> {
        let mut r = csv::Reader::from_reader(input);
        let mut values = Vec::with_capacity(self.node_count());
        for (q, rec) in r.records().enumerate() {
            let rec = rec?;
            let nums: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| GeometryError::MalformedElement(e.to_string()))?;
            if q >= self.node_count() || nums.len() < 2 {
                return Err(GeometryError::ModelMismatch);
            }
            let coords = self.node_coordinates(q);
            if nums.len() != coords.len() + 2
                || coords.iter().zip(&nums).any(|(a, b)| (a - b).abs() > 1e-9)
            {
                return Err(GeometryError::ModelMismatch);
            }
            values.push(Complex64::new(nums[nums.len() - 2], nums[nums.len() - 1]));
        }
        self.function_from_values(values)
    }
}

/// Group block of a run configuration, e.g.
/// `{ "model": "euclidean", "n": 1, "half_width": 48.0, "points": 65536 }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelConfig {
    Torus {
        #[serde(default = "one")]
        n: usize,
        points: usize,
    },
    Euclidean {
        #[serde(default = "one")]
        n: usize,
        half_width: f64,
        points: usize,
    },
    Su2 {
        l_max: f64,
    },
}

fn one() -> usize {
    1
}

impl ModelConfig {
    pub fn build(&self) -> Result<GroupModel, GeometryError> {
        match *self {
            ModelConfig::Torus { n, points } => GroupModel::torus(n, points),
            ModelConfig::Euclidean {
                n,
                half_width,
                points,
            } => GroupModel::euclidean(n, half_width, points),
            ModelConfig::Su2 { l_max } => GroupModel::su2(l_max),
        }
    }
}

/// Evaluates `V⁻¹ Σ_ℓ (2ℓ+1) tr(f̂(ℓ) π_ℓ(h))` at an arbitrary element.
pub fn evaluate_peter_weyl(blocks: &[DMatrix<Complex64>], h: &Matrix2<Complex64>) -> Complex64 {
    blocks
        .iter()
        .enumerate()
        .map(|(two_l, b)| {
            let pi = Su2Grid::irrep_matrix(two_l as u32, h);
            (b * pi).trace() * ((two_l + 1) as f64 / SU2_HAAR_MASS)
        })
        .sum()
}

/// Reduces an angle to `[-π, π)`.
pub fn wrap_angle(t: f64) -> f64 {
    let r = (t + PI).rem_euclid(2.0 * PI) - PI;
    if r >= PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Least-squares slope and RMS residual of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (points
        .iter()
        .map(|p| (p.1 - icpt - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Some((slope, rms))
}

impl Spectrum {
    /// JSON dump with complex numbers as `[re, im]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        let pair = |z: &Complex64| serde_json::json!([z.re, z.im]);
        match self {
            Spectrum::Fourier(c) => serde_json::json!({
                "kind": "fourier",
                "coefficients": c.iter().map(pair).collect::<Vec<_>>(),
            }),
            Spectrum::PeterWeyl(blocks) => serde_json::json!({
                "kind": "peter_weyl",
                "blocks": blocks.iter().enumerate().map(|(two_l, b)| serde_json::json!({
                    "two_l": two_l,
                    "rows": (0..b.nrows())
                        .map(|r| (0..b.ncols()).map(|c| pair(&b[(r, c)])).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn distances() {
        let t = GroupModel::torus(1, 16).unwrap();
        assert_eq!(t.distance(&t.identity()).unwrap(), 0.0);
        let d = t.distance(&GroupElement::Coords(vec![1.5 * PI])).unwrap();
        assert!((d - PI / 2.0).abs() < 1e-14);
        let e = GroupModel::euclidean(2, 5.0, 8).unwrap();
        assert!((e.distance(&GroupElement::Coords(vec![3.0, 4.0])).unwrap() - 5.0).abs() < 1e-15);
        let s = GroupModel::su2(1.0).unwrap();
        let minus_i = GroupElement::Su2(-Matrix2::identity());
        assert!((s.distance(&minus_i).unwrap() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn su2_geodesic_reaches_minus_identity() {
        // Matrix exponential of 2π X₃, computed by nalgebra's Padé routine.
        let x3 = &su2::spin_generators(1)[2];
        let u = (x3 * c(2.0 * PI)).exp();
        let m = Matrix2::new(u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
        assert!((m + Matrix2::identity()).norm() < 1e-12);
        let s = GroupModel::su2(0.5).unwrap();
        assert!((s.distance(&GroupElement::Su2(m)).unwrap() - 2.0 * PI).abs() < 1e-6);
        // intermediate points along the geodesic are at distance t
        let half = (x3 * c(1.0)).exp();
        let m = Matrix2::new(half[(0, 0)], half[(0, 1)], half[(1, 0)], half[(1, 1)]);
        assert!((s.distance(&GroupElement::Su2(m)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn malformed_elements() {
        let t = GroupModel::torus(2, 8).unwrap();
        assert!(t.distance(&GroupElement::Coords(vec![1.0])).is_err());
        assert!(t.distance(&GroupElement::Coords(vec![1.0, f64::NAN])).is_err());
        let s = GroupModel::su2(1.0).unwrap();
        assert!(s
            .distance(&GroupElement::Su2(Matrix2::identity() * c(2.0)))
            .is_err());
        assert!(s.distance(&GroupElement::Coords(vec![0.0; 3])).is_err());
    }

    #[test]
    fn weights_sum_to_mass() {
        let t = GroupModel::torus(2, 12).unwrap();
        let total: f64 = t.weights().iter().sum();
        assert!((total - 4.0 * PI * PI).abs() < 1e-12);
        let s = GroupModel::su2(2.0).unwrap();
        assert!((s.weights().iter().sum::<f64>() - SU2_HAAR_MASS).abs() < 1e-10);
        assert!(s.weights().iter().all(|w| *w > 0.0));
    }

    #[test]
    fn c_g_witnesses() {
        // ∫_{-π}^{π} e^{-|θ|} dθ = 2(1 - e^{-π})
        let t = GroupModel::torus(1, 4096).unwrap();
        let w = t.c_g(1.0);
        assert_eq!(w.c_g, 0.0);
        assert!((w.integral - 2.0 * (1.0 - (-PI).exp())).abs() < 1e-6);
        // ∫ e^{-|x|} dx = 2
        let e = GroupModel::euclidean(1, 30.0, 1 << 15).unwrap();
        assert!((e.c_g(1.0).integral - 2.0).abs() < 1e-6);
        let s = GroupModel::su2(1.0).unwrap();
        assert!((s.c_g(0.0).integral - SU2_HAAR_MASS).abs() < 1e-10);
    }

    #[test]
    fn torus_characters_convolve() {
        let t = GroupModel::torus(1, 32).unwrap();
        let e = |k: f64| t.sample(|g| match g {
            GroupElement::Coords(x) => Complex64::from_polar(1.0, k * x[0]),
            _ => unreachable!(),
        });
        let e3 = e(3.0);
        let self_conv = t.convolve(&e3, &e3).unwrap();
        let expected = e3.map(|v| v * 2.0 * PI);
        assert!(self_conv.sup_distance(&expected).unwrap() < 1e-10);
        let cross = t.convolve(&e(2.0), &e3).unwrap();
        assert!(cross.sup_norm() < 1e-10);
        let direct = t.convolve_direct(&e3, &e3).unwrap();
        assert!(direct.sup_distance(&expected).unwrap() < 1e-10);
    }

    #[test]
    fn euclidean_indicator_convolution_is_triangle() {
        let e = GroupModel::euclidean(1, 4.0, 800).unwrap();
        let h = e.grid().unwrap().spacing();
        // indicator of [-1, 1], with half weight at the jump nodes
        let ind = e.sample(|g| match g {
            GroupElement::Coords(x) => {
                let a = x[0].abs();
                if a < 1.0 - h / 2.0 {
                    c(1.0)
                } else if a < 1.0 + h / 2.0 {
                    c(0.5)
                } else {
                    c(0.0)
                }
            }
            _ => unreachable!(),
        });
        let tri = e.convolve(&ind, &ind).unwrap();
        for q in 0..e.node_count() {
            let x = e.node_distance(q);
            let expect = (2.0 - x).max(0.0);
            assert!((tri.values()[q].re - expect).abs() < 2.0 * h, "x={x}");
        }
        let direct = e.convolve_direct(&ind, &ind).unwrap();
        assert!(direct.sup_distance(&tri).unwrap() < 1e-10);
    }

    #[test]
    fn bump_is_approximate_identity() {
        let t = GroupModel::torus(1, 512).unwrap();
        let phi = t.sample(|g| match g {
            GroupElement::Coords(x) => c(x[0].cos() + 0.5 * (2.0 * x[0]).sin()),
            _ => unreachable!(),
        });
        let mut last = f64::INFINITY;
        for width in [0.4, 0.2, 0.1] {
            let bump = t.sample_radial(|d| c((-(d / width).powi(2)).exp()));
            let mass: f64 = bump.values().iter().map(|v| v.re).sum::<f64>() * t.weight(0);
            let bump = bump.map(|v| v / mass);
            let err = t.convolve(&phi, &bump).unwrap().sup_distance(&phi).unwrap();
            assert!(err < last);
            last = err;
        }
        assert!(last < 0.02);
    }

    #[test]
    fn su2_spectral_and_direct_convolution_agree() {
        let s = GroupModel::su2(2.0).unwrap();
        let f1 = s.sample(|g| match g {
            GroupElement::Su2(u) => u[(0, 0)] + c(0.3) * u[(1, 0)],
            _ => unreachable!(),
        });
        let f2 = s.sample(|g| match g {
            GroupElement::Su2(u) => {
                let tr = (u[(0, 0)] + u[(1, 1)]).re;
                c(tr) + u[(0, 1)].conj()
            }
            _ => unreachable!(),
        });
        let a = s.convolve(&f1, &f2).unwrap();
        let b = s.convolve_direct(&f1, &f2).unwrap();
        assert!(a.sup_distance(&b).unwrap() < 1e-8 * (1.0 + a.sup_norm()));
    }

    #[test]
    fn weighted_l1() {
        let t = GroupModel::torus(1, 64).unwrap();
        let one = t.sample(|_| c(1.0));
        assert!((t.weighted_l1_norm(&one, 0.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        let e = GroupModel::euclidean(1, 40.0, 1 << 14).unwrap();
        let f = e.sample_radial(|d| c((-2.0 * d).exp()));
        assert!((e.weighted_l1_norm(&f, 1.0).unwrap() - 2.0).abs() < 1e-4);
        let g = e.sample_radial(|d| c((-d).exp()));
        assert!(matches!(
            e.weighted_l1_norm(&g, 1.0),
            Err(GeometryError::Divergent { .. })
        ));
    }

    #[test]
    fn model_config_parses() {
        let cfg: ModelConfig =
            serde_json::from_str(r#"{ "model": "torus", "points": 16 }"#).unwrap();
        assert_eq!(cfg.build().unwrap().kind(), ModelKind::Torus(1));
        let cfg: ModelConfig = serde_json::from_str(r#"{ "model": "su2", "l_max": 2.5 }"#).unwrap();
        assert_eq!(cfg.build().unwrap().kind(), ModelKind::Su2);
        let bad: ModelConfig =
            serde_json::from_str(r#"{ "model": "euclidean", "half_width": 1.0, "points": 7 }"#)
                .unwrap();
        assert!(bad.build().is_err());
    }

    #[test]
    fn csv_round_trip_and_mismatch() {
        let t = GroupModel::torus(1, 8).unwrap();
        let f = t.sample_radial(|d| Complex64::new(d, -d * d));
        let mut buf = Vec::new();
        t.write_csv(&f, &mut buf).unwrap();
        let back = t.read_csv(buf.as_slice()).unwrap();
        assert!(back.sup_distance(&f).unwrap() < 1e-15);
        let other = GroupModel::torus(1, 16).unwrap();
        assert!(other.read_csv(buf.as_slice()).is_err());
        assert!(matches!(
            other.convolve(&f, &f),
            Err(GeometryError::ModelMismatch)
        ));
    }

    #[test]
    fn spectrum_json_dump() {
        let s = GroupModel::su2(0.5).unwrap();
        let f = s.sample(|_| c(1.0));
        let j = s.transform(&f).unwrap().to_json();
        assert_eq!(j["kind"], "peter_weyl");
        let v = j["blocks"][0]["rows"][0][0][0].as_f64().unwrap();
        assert!((v - SU2_HAAR_MASS).abs() < 1e-9);
    }

    #[test]
    fn nyquist_content_is_out_of_band() {
        let t = GroupModel::torus(1, 16).unwrap();
        let f = t.sample(|g| match g {
            GroupElement::Coords(x) => c((8.0 * x[0]).cos()),
            _ => unreachable!(),
        });
        assert!(t.band_excess(&f).unwrap() > 0.5);
    }

    fn band_limited_torus(coeffs: &[(i64, f64, f64)], t: &GroupModel) -> GroupFunction {
        t.sample(|g| match g {
            GroupElement::Coords(x) => coeffs
                .iter()
                .map(|(k, a, b)| Complex64::new(*a, *b) * Complex64::from_polar(1.0, *k as f64 * x[0]))
                .sum(),
            _ => unreachable!(),
        })
    }

    proptest! {
        #[test]
        fn torus_round_trip(coeffs in prop::collection::vec((-7i64..8, -1.0..1.0f64, -1.0..1.0f64), 1..6)) {
            let t = GroupModel::torus(1, 16).unwrap();
            let f = band_limited_torus(&coeffs, &t);
            let back = t.synthesize(&t.transform(&f).unwrap()).unwrap();
            prop_assert!(back.sup_distance(&f).unwrap() < 1e-10);
        }

        #[test]
        fn torus_convolution_associative(
            a in prop::collection::vec((-7i64..8, -1.0..1.0f64, -1.0..1.0f64), 1..5),
            b in prop::collection::vec((-7i64..8, -1.0..1.0f64, -1.0..1.0f64), 1..5),
            cc in prop::collection::vec((-7i64..8, -1.0..1.0f64, -1.0..1.0f64), 1..5),
        ) {
            let t = GroupModel::torus(1, 16).unwrap();
            let (fa, fb, fc) = (band_limited_torus(&a, &t), band_limited_torus(&b, &t), band_limited_torus(&cc, &t));
            let left = t.convolve(&t.convolve(&fa, &fb).unwrap(), &fc).unwrap();
            let right = t.convolve(&fa, &t.convolve(&fb, &fc).unwrap()).unwrap();
            prop_assert!(left.sup_distance(&right).unwrap() < 1e-8 * (1.0 + left.sup_norm()));
        }

        #[test]
        fn triangle_inequality_su2(x in prop::array::uniform3(-3.0..3.0f64), y in prop::array::uniform3(-3.0..3.0f64)) {
            let s = GroupModel::su2(0.5).unwrap();
            let g = s.exp(&x).unwrap();
            let h = s.exp(&y).unwrap();
            let gh = s.compose(&g, &h).unwrap();
            let (dg, dh, dgh) = (s.distance(&g).unwrap(), s.distance(&h).unwrap(), s.distance(&gh).unwrap());
            prop_assert!(dgh <= dg + dh + 1e-9);
            let ginv = s.inverse(&g).unwrap();
            prop_assert!((s.distance(&ginv).unwrap() - dg).abs() < 1e-9);
        }

        #[test]
        fn triangle_inequality_torus(x in prop::array::uniform2(-7.0..7.0f64), y in prop::array::uniform2(-7.0..7.0f64)) {
            let t = GroupModel::torus(2, 8).unwrap();
            let g = GroupElement::Coords(x.to_vec());
            let h = GroupElement::Coords(y.to_vec());
            let gh = t.compose(&g, &h).unwrap();
            prop_assert!(t.distance(&gh).unwrap() <= t.distance(&g).unwrap() + t.distance(&h).unwrap() + 1e-12);
        }
    }
}
