//! Weighted norms on the group algebra and the quasiderivation `Δ_q`.
//!
//! All norms here are unconditional: they only see the trace norms
//! `|A_g|₁` of the coefficients.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::AlgebraElement;
use crate::groups::{Element, Group};
use crate::linalg::{self, ZERO};
use crate::Result;

/// `(1 + ℓ(g))^p`.
fn rd_weight(group: &Group, g: &Element, p: f64) -> f64 {
    (1.0 + group.word_length(g) as f64).powf(p)
}

/// `sqrt(Σ_g |A_g|₁² (1+ℓ(g))^{2p})`.
pub fn rd_norm(a: &AlgebraElement, p: f64) -> f64 {
    a.iter()
        .map(|(g, b)| {
            let w = linalg::trace_norm(b, a.dim()) * rd_weight(a.group(), g, p);
            w * w
        })
        .sum::<f64>()
        .sqrt()
}

/// `Σ_g e^{K ℓ(g)} |A_g|₁`.
pub fn lk_norm(a: &AlgebraElement, k: f64) -> f64 {
    a.iter().map(|(g, b)| (k * a.group().word_length(g) as f64).exp() * linalg::trace_norm(b, a.dim())).sum()
}

/// Finitely supported element of `ℂG ⊗ ℂG` with matrix coefficients.
#[derive(Clone, Debug)]
pub struct TensorElement {
    group: Group,
    dim: usize,
    entries: BTreeMap<(Element, Element), Vec<Complex64>>,
}

impl TensorElement {
    pub fn zero(group: &Group, dim: usize) -> Self {
        TensorElement { group: group.clone(), dim, entries: BTreeMap::new() }
    }

    pub fn elementary(group: &Group, g1: Element, g2: Element) -> Self {
        let mut t = Self::zero(group, 1);
        t.add(g1, g2, &[Complex64::new(1.0, 0.0)]);
        t
    }

    pub fn add(&mut self, g1: Element, g2: Element, b: &[Complex64]) {
        let e = self.entries.entry((g1, g2)).or_insert_with(|| vec![ZERO; b.len()]);
        for (x, y) in e.iter_mut().zip(b) {
            *x += *y;
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Element, Element), &[Complex64])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn support(&self) -> impl Iterator<Item = &(Element, Element)> {
        self.entries.keys()
    }

    /// Entrywise magnitudes `|T_{g₁,g₂}|₁` as a scalar tensor.
    pub fn abs(&self) -> Self {
        let mut out = Self::zero(&self.group, 1);
        for (k, b) in &self.entries {
            out.entries.insert(k.clone(), vec![Complex64::new(linalg::trace_norm(b, self.dim), 0.0)]);
        }
        out
    }
}

/// `Δ_q A = Σ_g A_g Σ_{(g₁,g₂) ∈ C(q,g)} g₁ ⊗ g₂`.
pub fn quasiderivation(a: &AlgebraElement, q: usize) -> Result<TensorElement> {
    let mut t = TensorElement::zero(a.group(), a.dim());
    for (g, b) in a.iter() {
        for (g1, g2) in a.group().geodesic_splittings(g, q)? {
            t.add(g1, g2, b);
        }
    }
    Ok(t)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct UcBounds {
    /// Each support pair taken as its own elementary term.
    pub upper: f64,
    /// Weighted ℓ² bound: the RD weights are Hilbertian, so every admissible
    /// decomposition costs at least the weighted ℓ² norm of `|T|`.
    pub lower: f64,
}

/// Upper and lower bounds on the unconditional tensor norm.
pub fn uc_bounds(t: &TensorElement, p: f64) -> UcBounds {
    let mut upper = 0.0;
    let mut sq = 0.0;
    for ((g1, g2), b) in t.iter() {
        let w = linalg::trace_norm(b, t.dim) * rd_weight(&t.group, g1, p) * rd_weight(&t.group, g2, p);
        upper += w;
        sq += w * w;
    }
    UcBounds { upper, lower: sq.sqrt() }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    pub rd: f64,
    pub uc_upper: f64,
    pub uc_lower: f64,
    /// `rd + uc_upper`.
    pub b: f64,
    pub lk: f64,
    pub p: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub q: usize,
}

pub fn norm_report(a: &AlgebraElement, p: f64, k: f64, q: usize) -> Result<NormReport> {
    let rd = rd_norm(a, p);
    let uc = uc_bounds(&quasiderivation(a, q)?, p);
    Ok(NormReport { rd, uc_upper: uc.upper, uc_lower: uc.lower, b: rd + uc.upper, lk: lk_norm(a, k), p, k, q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupModel;
    use serde_json::json;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn rd_examples() {
        let g = GroupModel::free(2);
        assert_eq!(rd_norm(&AlgebraElement::unit(&g, 1), 1.0), 1.0);
        let x = AlgebraElement::delta(&g, g.parse_str("ab").unwrap(), 1);
        assert!((rd_norm(&x, 1.0) - 3.0).abs() < 1e-15);
        let y = AlgebraElement::delta(&g, g.parse_str("a").unwrap(), 1)
            .add(&AlgebraElement::delta(&g, g.parse_str("b").unwrap(), 1))
            .unwrap();
        assert!((rd_norm(&y, 1.0) - 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn lk_example() {
        let g = GroupModel::free_abelian(1);
        let blocks: Vec<_> =
            (-3i64..=3).map(|n| (g.lattice(&[n]).unwrap(), vec![Complex64::new((-(n * n) as f64).exp(), 0.0)])).collect();
        let a = AlgebraElement::from_blocks(&g, 1, blocks).unwrap();
        let expect: f64 = (-3i64..=3).map(|n| (-(n * n) as f64 + n.abs() as f64).exp()).sum();
        assert!((lk_norm(&a, 1.0) - expect).abs() < 1e-13);
        assert_eq!(lk_norm(&AlgebraElement::unit(&g, 1), 1.0), 1.0);
    }

    #[test]
    fn quasiderivation_examples() {
        let g = GroupModel::free(2);
        let t = quasiderivation(&AlgebraElement::unit(&g, 1), 0).unwrap();
        assert_eq!(t.support().cloned().collect::<Vec<_>>(), vec![(g.identity(), g.identity())]);
        let ab = g.parse_str("ab").unwrap();
        let t = quasiderivation(&AlgebraElement::delta(&g, ab, 1), 0).unwrap();
        assert_eq!(t.len(), 3);
        let uc = uc_bounds(&t, 1.0);
        assert!((uc.upper - 10.0).abs() < 1e-14);
        assert!(uc.lower <= uc.upper);
        let z2 = GroupModel::free_abelian(2);
        let x = z2.parse_element(&json!([1, 1])).unwrap();
        assert_eq!(quasiderivation(&AlgebraElement::delta(&z2, x, 1), 0).unwrap().len(), 4);
    }

    #[test]
    fn uc_elementary_and_zero() {
        let g = GroupModel::free(2);
        let t = TensorElement::elementary(&g, g.parse_str("ab").unwrap(), g.parse_str("b").unwrap());
        let uc = uc_bounds(&t, 1.5);
        let exact = 3f64.powf(1.5) * 2f64.powf(1.5);
        assert!((uc.upper - exact).abs() < 1e-12 && (uc.lower - exact).abs() < 1e-12);
        let z = uc_bounds(&TensorElement::zero(&g, 1), 1.0);
        assert_eq!((z.upper, z.lower), (0.0, 0.0));
    }

    #[test]
    fn b_is_rd_plus_uc() {
        let g = GroupModel::free(2);
        let a = AlgebraElement::delta(&g, g.parse_str("ab").unwrap(), 1).scale(one() * 2.0);
        let r = norm_report(&a, 1.0, 0.5, 0).unwrap();
        assert_eq!(r.b, r.rd + r.uc_upper);
        assert!((r.uc_upper - 20.0).abs() < 1e-13);
    }
}
