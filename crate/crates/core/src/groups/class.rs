//! Conjugacy classes.
//!
//! Conjugation acts factorwise on a direct product, so a class is the product
//! of the factor classes. Abelian factors contribute singletons; a free
//! factor contributes every word whose cyclically reduced core is a rotation
//! of the representative's core.

use std::fmt;

use super::{Element, Factor, Group};
use crate::{Error, Result};

#[derive(Clone)]
pub struct ConjugacyClass {
    group: Group,
    rep: Element,
    /// Canonical rotation of the cyclic core, one entry per free factor.
    cores: Vec<Vec<i32>>,
    min_length: usize,
}

/// Splits a reduced word into `(w, c)` with `x = w c w⁻¹` and `c` cyclically reduced.
pub(crate) fn cyclic_core(x: &[i32]) -> (&[i32], &[i32]) {
    let n = x.len();
    let mut k = 0;
    while 2 * k + 1 < n && x[k] == -x[n - 1 - k] {
        k += 1;
    }
    (&x[..k], &x[k..n - k])
}

fn min_rotation(c: &[i32]) -> Vec<i32> {
    if c.is_empty() {
        return Vec::new();
    }
    (0..c.len())
        .map(|r| {
            let mut v = c[r..].to_vec();
            v.extend_from_slice(&c[..r]);
            v
        })
        .min()
        .unwrap()
}

impl ConjugacyClass {
    pub fn new(group: &Group, rep: Element) -> Result<Self> {
        group.validate(&rep)?;
        let mut cores = Vec::new();
        let mut min_length = 0;
        for (f, x) in group.factors().iter().zip(group.split(rep.code())) {
            if let Factor::Free(_) = f {
                let (_, c) = cyclic_core(x);
                min_length += c.len();
                cores.push(min_rotation(c));
            }
        }
        // Abelian components keep their own length.
        let mut abel = 0;
        for (f, x) in group.factors().iter().zip(group.split(rep.code())) {
            match f {
                Factor::Lattice(_) => abel += x.iter().map(|v| v.unsigned_abs() as usize).sum::<usize>(),
                Factor::Cyclic(k) => abel += (x[0] as usize).min(*k as usize - x[0] as usize),
                Factor::Free(_) => {}
            }
        }
        min_length += abel;
        Ok(ConjugacyClass { group: group.clone(), rep, cores, min_length })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn representative(&self) -> &Element {
        &self.rep
    }

    pub fn is_trivial(&self) -> bool {
        self.group.is_identity(&self.rep)
    }

    /// A class is a singleton exactly when every free component is trivial
    /// or lies in an abelian (rank ≤ 1) free factor.
    pub fn is_singleton(&self) -> bool {
        self.group
            .factors()
            .iter()
            .filter(|f| matches!(f, Factor::Free(_)))
            .zip(&self.cores)
            .all(|(f, c)| matches!(f, Factor::Free(r) if *r <= 1) || c.is_empty())
    }

    /// Shortest word length attained in the class.
    pub fn min_length(&self) -> usize {
        self.min_length
    }

    pub fn contains(&self, g: &Element) -> bool {
        let mut free_idx = 0;
        for ((f, x), y) in self
            .group
            .factors()
            .iter()
            .zip(self.group.split(g.code()))
            .zip(self.group.split(self.rep.code()))
        {
            match f {
                Factor::Free(_) => {
                    let (_, c) = cyclic_core(x);
                    if c.len() != self.cores[free_idx].len() || min_rotation(c) != self.cores[free_idx] {
                        return false;
                    }
                    free_idx += 1;
                }
                _ => {
                    if x != y {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// `⟨h⟩ ∩ B_R`, sorted by length then encoding.
    pub fn elements_in_ball(&self, radius: usize) -> Result<Vec<Element>> {
        if self.is_singleton() {
            let l = self.group.word_length(&self.rep);
            return Ok(if l <= radius { vec![self.rep.clone()] } else { Vec::new() });
        }
        let ball = self.group.ball(radius)?;
        Ok(ball.elements.into_iter().filter(|g| self.contains(g)).collect())
    }

    /// `#{g ∈ ⟨h⟩ : ℓ(g) = n}` for `n = 0..=radius`.
    pub fn sphere_counts(&self, radius: usize) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; radius + 1];
        for g in self.elements_in_ball(radius)? {
            counts[self.group.word_length(&g)] += 1;
        }
        Ok(counts)
    }
}

impl fmt::Debug for ConjugacyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}> in {}", self.group.format(&self.rep), self.group)
    }
}

/// `min{ℓ(γ) : γ⁻¹hγ = g, ℓ(γ) ≤ R}` by search over `B_R`.
pub fn min_conjugator_length(group: &Group, h: &Element, g: &Element, radius: usize) -> Result<usize> {
    group.validate(h)?;
    group.validate(g)?;
    let ball = group.ball(radius)?;
    for (i, gamma) in ball.elements.iter().enumerate() {
        if group.conjugate(gamma, h) == *g {
            return Ok(ball.length_of_index(i));
        }
    }
    Err(Error::NotFound(format!(
        "no conjugator of length ≤ {radius} takes {} to {}",
        group.format(h),
        group.format(g)
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{GroupKind, GroupModel};
    use serde_json::json;

    #[test]
    fn conjugator_examples() {
        let g = GroupModel::free(2);
        let h = g.parse_str("ab").unwrap();
        assert_eq!(min_conjugator_length(&g, &h, &g.parse_str("ba").unwrap(), 3).unwrap(), 1);
        assert_eq!(min_conjugator_length(&g, &h, &g.parse_str("aabA").unwrap(), 3).unwrap(), 1);
        assert!(matches!(
            min_conjugator_length(&g, &h, &g.parse_str("aaab").unwrap(), 3),
            Err(Error::NotFound(_))
        ));
        let z2 = GroupModel::free_abelian(2);
        let x = z2.parse_element(&json!([2, 1])).unwrap();
        assert_eq!(min_conjugator_length(&z2, &x, &x, 2).unwrap(), 0);
    }

    #[test]
    fn membership_matches_brute_force() {
        let groups = vec![
            GroupModel::free(2),
            GroupModel::product(vec![GroupKind::Cyclic { order: 2 }, GroupKind::Free { rank: 2 }]),
        ];
        for g in groups {
            let b4 = g.ball(4).unwrap();
            let b2 = g.ball(2).unwrap();
            for h in g.ball(2).unwrap().elements {
                let class = ConjugacyClass::new(&g, h.clone()).unwrap();
                let conj: std::collections::BTreeSet<Element> =
                    b2.elements.iter().map(|gm| g.conjugate(gm, &h)).filter(|x| g.word_length(x) <= 4).collect();
                for x in &b4.elements {
                    if conj.contains(x) {
                        assert!(class.contains(x));
                    }
                }
                for x in &b4.elements {
                    if class.contains(x) {
                        assert!(min_conjugator_length(&g, &h, x, 4).is_ok());
                    }
                }
            }
        }
    }

    #[test]
    fn abelian_classes_are_singletons() {
        let g = GroupModel::product(vec![GroupKind::FreeAbelian { rank: 2 }, GroupKind::Cyclic { order: 3 }]);
        let h = g.parse_element(&json!([[1, 0], 2])).unwrap();
        let c = ConjugacyClass::new(&g, h.clone()).unwrap();
        assert!(c.is_singleton());
        assert_eq!(c.elements_in_ball(10).unwrap(), vec![h]);
        assert_eq!(c.min_length(), 2);
    }

    #[test]
    fn free_class_counts() {
        let g = GroupModel::free(2);
        let c = ConjugacyClass::new(&g, g.parse_str("ab").unwrap()).unwrap();
        let counts = c.sphere_counts(6).unwrap();
        assert_eq!(&counts[..3], &[0, 0, 2]);
        // w·c·w⁻¹ with |w| = 1: 4 letters minus cancellations against either rotation.
        assert_eq!(counts[3], 0);
        assert!(counts[4] > 0 && counts[6] > counts[4]);
        assert_eq!(c.min_length(), 2);
    }
}
