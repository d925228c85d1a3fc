//! Finitely supported group-algebra elements with `d × d` complex coefficients.
//!
//! Coefficients live in an ordered map keyed by the element encoding, so every
//! iteration (and therefore every floating-point reduction) happens in a fixed
//! order independent of hashing or scheduling.

mod json;
mod norms;
mod spectral;

pub use json::{element_from_json, element_to_json};
pub use spectral::{DualGrid, SpectralElement};
pub use norms::{lk_norm, norm_report, quasiderivation, rd_norm, uc_bounds, NormReport, TensorElement, UcBounds};

use std::collections::BTreeMap;

use num_complex::Complex64;
use rustc_hash::FxHashMap;

use crate::groups::{ConjugacyClass, Element, Group};
use crate::linalg::{self, CMat, ZERO};
use crate::{Error, Result};

/// Relative magnitude below which coefficients are dropped by [`AlgebraElement::cleanup`].
pub const ZERO_THRESHOLD: f64 = 1e-14;

#[derive(Clone)]
pub struct AlgebraElement {
    group: Group,
    dim: usize,
    entries: BTreeMap<Element, Vec<Complex64>>,
}

impl std::fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut m = f.debug_map();
        for (g, b) in &self.entries {
            m.entry(&self.group.format(g), b);
        }
        m.finish()
    }
}

impl AlgebraElement {
    pub fn zero(group: &Group, dim: usize) -> Self {
        AlgebraElement { group: group.clone(), dim, entries: BTreeMap::new() }
    }

    /// `1·δ_e`.
    pub fn unit(group: &Group, dim: usize) -> Self {
        Self::delta(group, group.identity(), dim)
    }

    /// `1·δ_g` with identity coefficient.
    pub fn delta(group: &Group, g: Element, dim: usize) -> Self {
        let mut a = Self::zero(group, dim);
        a.entries.insert(g, linalg::identity(dim));
        a
    }

    pub fn scalar_delta(group: &Group, g: Element, c: Complex64) -> Self {
        let mut a = Self::zero(group, 1);
        a.entries.insert(g, vec![c]);
        a
    }

    pub fn from_blocks(group: &Group, dim: usize, blocks: impl IntoIterator<Item = (Element, Vec<Complex64>)>) -> Result<Self> {
        let mut a = Self::zero(group, dim);
        for (g, b) in blocks {
            group.validate(&g)?;
            if b.len() != dim * dim {
                return Err(Error::Shape(format!("block of length {} for dimension {dim}", b.len())));
            }
            a.add_block(g, &b);
        }
        Ok(a)
    }

    pub fn from_matrices(group: &Group, blocks: impl IntoIterator<Item = (Element, CMat)>) -> Result<Self> {
        let blocks: Vec<(Element, CMat)> = blocks.into_iter().collect();
        let dim = blocks.first().map(|(_, m)| m.nrows()).unwrap_or(1);
        for (_, m) in &blocks {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::Shape(format!("{}x{} block in a dimension-{dim} element", m.nrows(), m.ncols())));
            }
        }
        Self::from_blocks(group, dim, blocks.iter().map(|(g, m)| (g.clone(), linalg::from_matrix(m))))
    }

    pub fn group(&self) -> &Group {
        &self.group
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Element, &[Complex64])> {
        self.entries.iter().map(|(g, b)| (g, b.as_slice()))
    }

    pub fn support(&self) -> impl Iterator<Item = &Element> {
        self.entries.keys()
    }

    pub fn block(&self, g: &Element) -> Option<&[Complex64]> {
        self.entries.get(g).map(|b| b.as_slice())
    }

    pub fn matrix(&self, g: &Element) -> CMat {
        match self.entries.get(g) {
            Some(b) => linalg::to_matrix(b, self.dim),
            None => CMat::zeros(self.dim, self.dim),
        }
    }

    /// Scalar coefficient of a dimension-1 element.
    pub fn coeff(&self, g: &Element) -> Complex64 {
        self.entries.get(g).map(|b| b[0]).unwrap_or(ZERO)
    }

    pub fn add_block(&mut self, g: Element, b: &[Complex64]) {
        let e = self.entries.entry(g).or_insert_with(|| vec![ZERO; b.len()]);
        for (x, y) in e.iter_mut().zip(b) {
            *x += *y;
        }
    }

    /// Drops coefficients whose largest entry falls below
    /// `ZERO_THRESHOLD` times the largest entry of the element.
    pub fn cleanup(&mut self) {
        self.cleanup_relative(ZERO_THRESHOLD);
    }

    pub fn cleanup_relative(&mut self, rel: f64) {
        let top = self.entries.values().map(|b| linalg::max_abs(b)).fold(0.0, f64::max);
        let cut = rel * top;
        self.entries.retain(|_, b| linalg::max_abs(b) > cut);
    }

    /// Drops coefficients outside `B_R`.
    pub fn truncate(&self, radius: usize) -> Self {
        let mut out = Self::zero(&self.group, self.dim);
        for (g, b) in &self.entries {
            if self.group.word_length(g) <= radius {
                out.entries.insert(g.clone(), b.clone());
            }
        }
        out
    }

    /// Largest word length in the support (propagation).
    pub fn propagation(&self) -> usize {
        self.entries.keys().map(|g| self.group.word_length(g)).max().unwrap_or(0)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !std::sync::Arc::ptr_eq(&self.group, &other.group) && self.group.kind() != other.group.kind() {
            return Err(Error::Shape("elements over different groups".into()));
        }
        if self.dim != other.dim {
            return Err(Error::Shape(format!("coefficient dimensions {} and {} differ", self.dim, other.dim)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (g, b) in &other.entries {
            out.add_block(g.clone(), b);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for b in out.entries.values_mut() {
            for x in b.iter_mut() {
                *x *= c;
            }
        }
        out
    }

    /// Adds `c` times the unit.
    pub fn add_unit(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        let mut id = linalg::identity(self.dim);
        for x in id.iter_mut() {
            *x *= c;
        }
        out.add_block(self.group.identity(), &id);
        out
    }

    /// `(A*)_g = (A_{g⁻¹})†`.
    pub fn star(&self) -> Self {
        let mut out = Self::zero(&self.group, self.dim);
        for (g, b) in &self.entries {
            out.entries.insert(self.group.inverse(g), linalg::adjoint(b, self.dim));
        }
        out
    }

    /// Exact convolution `(AB)_g = Σ_{g₁g₂=g} A_{g₁}B_{g₂}`. Summation runs in
    /// the fixed order of the two supports.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let d = self.dim;
        let mut acc: FxHashMap<Element, Vec<Complex64>> = FxHashMap::default();
        for (g1, a) in &self.entries {
            for (g2, b) in &other.entries {
                let g = self.group.multiply(g1, g2);
                let slot = acc.entry(g).or_insert_with(|| vec![ZERO; d * d]);
                linalg::mul_add(a, b, d, slot);
            }
        }
        Ok(AlgebraElement { group: self.group.clone(), dim: d, entries: acc.into_iter().collect() })
    }

    /// Convolution restricted to output coefficients in `B_R`.
    pub fn convolve_truncated(&self, other: &Self, radius: usize) -> Result<Self> {
        self.check_compatible(other)?;
        let d = self.dim;
        let mut acc: FxHashMap<Element, Vec<Complex64>> = FxHashMap::default();
        for (g1, a) in &self.entries {
            for (g2, b) in &other.entries {
                let g = self.group.multiply(g1, g2);
                if self.group.word_length(&g) > radius {
                    continue;
                }
                let slot = acc.entry(g).or_insert_with(|| vec![ZERO; d * d]);
                linalg::mul_add(a, b, d, slot);
            }
        }
        Ok(AlgebraElement { group: self.group.clone(), dim: d, entries: acc.into_iter().collect() })
    }

    /// Scalar element `|A| = Σ |A_g|₁ g`.
    pub fn abs(&self) -> Self {
        let mut out = Self::zero(&self.group, 1);
        for (g, b) in &self.entries {
            out.entries.insert(g.clone(), vec![Complex64::new(linalg::trace_norm(b, self.dim), 0.0)]);
        }
        out
    }

    pub fn trace_at(&self, g: &Element) -> Complex64 {
        self.entries.get(g).map(|b| linalg::trace(b, self.dim)).unwrap_or(ZERO)
    }

    /// `Σ_{g ∈ ⟨h⟩} tr A_g`.
    pub fn class_trace(&self, class: &ConjugacyClass) -> Complex64 {
        self.entries.iter().filter(|(g, _)| class.contains(g)).map(|(_, b)| linalg::trace(b, self.dim)).sum()
    }

    /// Largest entry-wise difference over the union of supports.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for (g, b) in &self.entries {
            let d = match other.entries.get(g) {
                Some(c) => b.iter().zip(c).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max),
                None => linalg::max_abs(b),
            };
            m = m.max(d);
        }
        for (g, c) in &other.entries {
            if !self.entries.contains_key(g) {
                m = m.max(linalg::max_abs(c));
            }
        }
        m
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::groups::GroupModel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    pub(crate) fn random_element(g: &Group, radius: usize, dim: usize, rng: &mut ChaCha8Rng) -> AlgebraElement {
        let ball = g.ball(radius).unwrap();
        let mut blocks = Vec::new();
        for x in &ball.elements {
            if rng.random_bool(0.6) {
                let b: Vec<Complex64> = (0..dim * dim)
                    .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                blocks.push((x.clone(), b));
            }
        }
        AlgebraElement::from_blocks(g, dim, blocks).unwrap()
    }

    #[test]
    fn delta_products() {
        let g = GroupModel::free(2);
        let a = g.parse_str("a").unwrap();
        let b = g.parse_str("bA").unwrap();
        let p = AlgebraElement::delta(&g, a.clone(), 1).convolve(&AlgebraElement::delta(&g, b.clone(), 1)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff(&g.multiply(&a, &b)), c(1.0));
    }

    #[test]
    fn square_of_symmetric_generator() {
        let g = GroupModel::free(2);
        let x = AlgebraElement::delta(&g, g.parse_str("a").unwrap(), 1)
            .add(&AlgebraElement::delta(&g, g.parse_str("A").unwrap(), 1))
            .unwrap();
        let sq = x.convolve(&x).unwrap();
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.coeff(&g.parse_str("aa").unwrap()), c(1.0));
        assert_eq!(sq.coeff(&g.identity()), c(2.0));
        assert_eq!(sq.coeff(&g.parse_str("AA").unwrap()), c(1.0));
    }

    #[test]
    fn star_reverses_products() {
        let g = GroupModel::free_abelian(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in [1, 2] {
            let a = random_element(&g, 2, dim, &mut rng);
            let b = random_element(&g, 2, dim, &mut rng);
            let lhs = a.convolve(&b).unwrap().star();
            let rhs = b.star().convolve(&a.star()).unwrap();
            assert!(lhs.max_diff(&rhs) < 1e-13);
            assert!(a.star().star().max_diff(&a) == 0.0);
        }
    }

    #[test]
    fn convolution_is_associative() {
        let g = GroupModel::free(2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_element(&g, 1, 2, &mut rng);
        let b = random_element(&g, 1, 2, &mut rng);
        let cc = random_element(&g, 1, 2, &mut rng);
        let l = a.convolve(&b).unwrap().convolve(&cc).unwrap();
        let r = a.convolve(&b.convolve(&cc).unwrap()).unwrap();
        assert!(l.max_diff(&r) < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_a_shape_error() {
        let g = GroupModel::free(1);
        let a = AlgebraElement::unit(&g, 1);
        let b = AlgebraElement::unit(&g, 2);
        assert!(matches!(a.convolve(&b), Err(Error::Shape(_))));
    }

    #[test]
    fn cleanup_drops_noise() {
        let g = GroupModel::free_abelian(1);
        let mut a = AlgebraElement::from_blocks(
            &g,
            1,
            vec![(g.identity(), vec![c(1.0)]), (g.parse_str("[1]").unwrap(), vec![c(1e-16)])],
        )
        .unwrap();
        a.cleanup();
        assert_eq!(a.len(), 1);
    }
}
