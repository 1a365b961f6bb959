//! Universal enveloping algebra arithmetic in the PBW basis
//! `X_0^{m_0} X_1^{m_1} ⋯ X_{n-1}^{m_{n-1}}`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::lie::LieAlgebra;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PbwError {
    #[error("enveloping elements belong to different Lie algebras")]
    AlgebraMismatch,
}

/// Exponent vector of a PBW monomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(dim: usize) -> Self {
        Monomial(vec![0; dim])
    }

    pub fn generator(dim: usize, j: usize) -> Self {
        Self::generator_power(dim, j, 1)
    }

    pub fn generator_power(dim: usize, j: usize, power: u32) -> Self {
        let mut e = vec![0; dim];
        e[j] = power;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// The monomial spelled out as a word of basis indices in PBW order.
    pub fn word(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(j, &m)| std::iter::repeat_n(j, m as usize))
            .collect()
    }

    fn first_index(&self) -> Option<usize> {
        self.0.iter().position(|&m| m > 0)
    }

    /// All monomials in `dim` variables of total degree `≤ max_degree`,
    /// in graded-lexicographic order.
    pub fn all_up_to_degree(dim: usize, max_degree: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        for d in 0..=max_degree {
            let mut current = vec![0u32; dim];
            fill_degree(&mut current, 0, d, &mut out);
        }
        out.sort();
        out
    }
}

fn fill_degree(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<Monomial>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(Monomial(current.clone()));
        current[pos] = 0;
        return;
    }
    if current.is_empty() {
        if remaining == 0 {
            out.push(Monomial(Vec::new()));
        }
        return;
    }
    for e in 0..=remaining {
        current[pos] = e;
        fill_degree(current, pos + 1, remaining - e, out);
    }
    current[pos] = 0;
}

impl Ord for Monomial {
    /// Graded order: total degree first, then exponents compared so that
    /// higher powers of earlier generators come later.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "]")
    }
}

type Terms = BTreeMap<Monomial, Complex64>;

/// A finite linear combination of PBW monomials with complex coefficients.
///
/// Zero coefficients are never stored.
#[derive(Debug, Clone)]
pub struct EnvelopingElement {
    algebra: Arc<LieAlgebra>,
    terms: Terms,
}

impl PartialEq for EnvelopingElement {
    fn eq(&self, other: &Self) -> bool {
        self.same_algebra(other) && self.terms == other.terms
    }
}

impl EnvelopingElement {
    pub fn zero(algebra: Arc<LieAlgebra>) -> Self {
        Self {
            algebra,
            terms: Terms::new(),
        }
    }

    pub fn identity(algebra: Arc<LieAlgebra>) -> Self {
        Self::scalar(algebra, Complex64::new(1.0, 0.0))
    }

    pub fn scalar(algebra: Arc<LieAlgebra>, c: Complex64) -> Self {
        let dim = algebra.dim();
        let mut e = Self::zero(algebra);
        e.add_term(Monomial::one(dim), c);
        e
    }

    pub fn generator(algebra: Arc<LieAlgebra>, j: usize) -> Self {
        let dim = algebra.dim();
        let mut e = Self::zero(algebra);
        e.add_term(Monomial::generator(dim, j), Complex64::new(1.0, 0.0));
        e
    }

    /// Element with a single term `c · X^exponents`. The exponents are read
    /// as an already-ordered PBW monomial.
    pub fn monomial(algebra: Arc<LieAlgebra>, mono: Monomial, c: Complex64) -> Self {
        let mut e = Self::zero(algebra);
        e.add_term(mono, c);
        e
    }

    /// Normal-ordered product of an arbitrary word of basis indices.
    pub fn word(algebra: Arc<LieAlgebra>, word: &[usize]) -> Self {
        let mut acc = Self::identity(algebra.clone());
        let mut memo = HashMap::new();
        for &j in word.iter().rev() {
            acc = acc.left_mul_generator(j, &mut memo);
        }
        acc
    }

    pub fn algebra(&self) -> &Arc<LieAlgebra> {
        &self.algebra
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &Monomial) -> Complex64 {
        self.terms.get(mono).copied().unwrap_or_default()
    }

    /// Highest total degree among the terms, `None` for the zero element.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn add_term(&mut self, mono: Monomial, c: Complex64) {
        debug_assert_eq!(mono.dim(), self.algebra.dim());
        accumulate(&mut self.terms, mono, c);
    }

    fn same_algebra(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.algebra, &other.algebra) || *self.algebra == *other.algebra
    }

    fn check(&self, other: &Self) -> Result<(), PbwError> {
        if self.same_algebra(other) {
            Ok(())
        } else {
            Err(PbwError::AlgebraMismatch)
        }
    }

    pub fn sum(&self, other: &Self) -> Result<Self, PbwError> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        Ok(out)
    }

    pub fn difference(&self, other: &Self) -> Result<Self, PbwError> {
        self.sum(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.algebra.clone());
        for (m, v) in &self.terms {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    /// PBW normal form of `self · other`.
    pub fn product(&self, other: &Self) -> Result<Self, PbwError> {
        self.check(other)?;
        let mut memo = HashMap::new();
        let mut out = Terms::new();
        for (mu, cu) in &self.terms {
            // mu · other, by left-multiplying the letters of mu from the right.
            let mut acc = other.clone();
            for j in mu.word().into_iter().rev() {
                acc = acc.left_mul_generator(j, &mut memo);
            }
            for (m, c) in acc.terms {
                accumulate(&mut out, m, c * cu);
            }
        }
        Ok(Self {
            algebra: self.algebra.clone(),
            terms: out,
        })
    }

    /// `self^m`, with `self^0 = 1`.
    pub fn power(&self, m: u32) -> Self {
        let mut result = Self::identity(self.algebra.clone());
        let mut base = self.clone();
        let mut e = m;
        while e > 0 {
            if e & 1 == 1 {
                result = result.product(&base).expect("same algebra");
            }
            e >>= 1;
            if e > 0 {
                base = base.product(&base).expect("same algebra");
            }
        }
        result
    }

    fn left_mul_generator(&self, j: usize, memo: &mut Memo) -> Self {
        let mut out = Terms::new();
        for (m, c) in &self.terms {
            for (m2, c2) in generator_times_monomial(&self.algebra, j, m, memo).iter() {
                accumulate(&mut out, m2.clone(), c * c2);
            }
        }
        Self {
            algebra: self.algebra.clone(),
            terms: out,
        }
    }
}

type Memo = HashMap<(usize, Monomial), Terms>;

fn accumulate(terms: &mut Terms, mono: Monomial, c: Complex64) {
    if c == Complex64::new(0.0, 0.0) {
        return;
    }
    let entry = terms.entry(mono);
    match entry {
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let v = *o.get() + c;
            if v == Complex64::new(0.0, 0.0) {
                o.remove();
            } else {
                *o.get_mut() = v;
            }
        }
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
    }
}

/// Normal form of `X_j · mono`, using `X_j X_i = X_i X_j + [X_j, X_i]`.
fn generator_times_monomial(
    algebra: &LieAlgebra,
    j: usize,
    mono: &Monomial,
    memo: &mut Memo,
) -> Terms {
    let key = (j, mono.clone());
    if let Some(hit) = memo.get(&key) {
        return hit.clone();
    }
    let result = match mono.first_index() {
        Some(i) if i < j => {
            let mut rest = mono.clone();
            rest.0[i] -= 1;
            let mut out = Terms::new();
            // X_i (X_j rest)
            let inner = generator_times_monomial(algebra, j, &rest, memo);
            for (m, c) in inner {
                for (m2, c2) in generator_times_monomial(algebra, i, &m, memo) {
                    accumulate(&mut out, m2, c * c2);
                }
            }
            // [X_j, X_i] rest
            for (k, &ck) in algebra.bracket(j, i).iter().enumerate() {
                if ck != 0.0 {
                    for (m2, c2) in generator_times_monomial(algebra, k, &rest, memo) {
                        accumulate(&mut out, m2, c2 * ck);
                    }
                }
            }
            out
        }
        _ => {
            let mut m = mono.clone();
            m.0[j] += 1;
            let mut out = Terms::new();
            out.insert(m, Complex64::new(1.0, 0.0));
            out
        }
    };
    memo.insert(key, result.clone());
    result
}

/// Free-function form of [`EnvelopingElement::product`].
pub fn normal_order_product(
    u: &EnvelopingElement,
    v: &EnvelopingElement,
) -> Result<EnvelopingElement, PbwError> {
    u.product(v)
}

/// `(R² + Δ)^m` in PBW form.
pub fn resolvent_element(algebra: &Arc<LieAlgebra>, r: f64, m: u32) -> EnvelopingElement {
    let base = EnvelopingElement::scalar(algebra.clone(), Complex64::new(r * r, 0.0))
        .sum(&algebra.laplace_element())
        .expect("same algebra");
    base.power(m)
}

fn write_coefficient(f: &mut fmt::Formatter<'_>, c: Complex64, leading: bool) -> fmt::Result {
    if c.im == 0.0 {
        let v = c.re;
        if leading {
            write!(f, "{v:?}")
        } else if v < 0.0 {
            write!(f, " - {:?}", -v)
        } else {
            write!(f, " + {v:?}")
        }
    } else {
        let sep = if leading { "" } else { " + " };
        write!(f, "{sep}({:?}{:+?}i)", c.re, c.im)
    }
}

impl fmt::Display for EnvelopingElement {
    /// `1.0*[2,0,0] - 1.0*[0,0,1]` means `X₁² − X₃`; highest terms first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            write_coefficient(f, *c, i == 0)?;
            write!(f, "*{m}")?;
        }
        Ok(())
    }
}
