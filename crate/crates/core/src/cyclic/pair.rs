//! Direct evaluation of `φ#tr` by summing over support tuples.

use num_complex::Complex64;
use rayon::prelude::*;

use super::Cochain;
use crate::algebra::{AlgebraElement, SpectralElement};
use crate::groups::Element;
use crate::linalg::{self, ZERO};
use crate::{Error, Result};

/// Anything that can fill a pairing slot and be multiplied.
pub trait Slot: Clone {
    fn times(&self, other: &Self) -> Result<Self>;
}

impl Slot for AlgebraElement {
    fn times(&self, other: &Self) -> Result<Self> {
        self.convolve(other)
    }
}

impl Slot for SpectralElement {
    fn times(&self, other: &Self) -> Result<Self> {
        self.mul(other)
    }
}

/// `Σ tr(w₀^{g₀}⋯w_n^{g_n}) φ(g₀,…,g_n)` over all support tuples. When `φ`
/// carries a support class the last slot is solved from the class
/// elements that the product can reach, instead of being enumerated.
pub fn pair_brute<C: Cochain + ?Sized>(phi: &C, w: &[&AlgebraElement]) -> Result<Complex64> {
    let n = phi.degree();
    if w.len() != n + 1 {
        return Err(Error::Shape(format!("{} has degree {n} but received {} slots", phi.name(), w.len())));
    }
    let d = w[0].dim();
    if w.iter().any(|a| a.dim() != d) {
        return Err(Error::Shape("pairing slots have different coefficient dimensions".into()));
    }
    if w.iter().any(|a| a.is_empty()) {
        return Ok(ZERO);
    }
    let group = phi.group();
    let targets: Option<Vec<Element>> = match phi.support_class() {
        Some(cl) if cl.is_singleton() => Some(vec![cl.representative().clone()]),
        Some(cl) => {
            let reach: usize = w.iter().map(|a| a.propagation()).sum();
            Some(cl.elements_in_ball(reach)?)
        }
        None => None,
    };
    let slots: Vec<Vec<(&Element, &[Complex64])>> = w.iter().map(|a| a.iter().collect()).collect();
    let run = |first: &[(&Element, &[Complex64])]| {
        let mut st = State {
            phi,
            w,
            slots: &slots,
            first,
            targets: targets.as_deref(),
            d,
            args: Vec::with_capacity(n + 1),
            total: ZERO,
        };
        st.descend(0, &linalg::identity(d), &group.identity());
        st.total
    };
    if n == 0 || slots[0].len() < 2 * CHUNK {
        return Ok(run(&slots[0]));
    }
    // Fixed chunks summed in order keep the result independent of the thread count.
    let partial: Vec<Complex64> = slots[0].par_chunks(CHUNK).map(run).collect();
    Ok(partial.iter().sum())
}

/// First-slot entries per parallel task.
const CHUNK: usize = 16;

struct State<'a, C: Cochain + ?Sized> {
    phi: &'a C,
    w: &'a [&'a AlgebraElement],
    slots: &'a [Vec<(&'a Element, &'a [Complex64])>],
    first: &'a [(&'a Element, &'a [Complex64])],
    targets: Option<&'a [Element]>,
    d: usize,
    args: Vec<Element>,
    total: Complex64,
}

impl<C: Cochain + ?Sized> State<'_, C> {
    fn descend(&mut self, i: usize, prefix: &[Complex64], prod: &Element) {
        let n = self.slots.len() - 1;
        let group = self.phi.group();
        if i == n {
            match self.targets {
                Some(ts) => {
                    let inv = group.inverse(prod);
                    for t in ts {
                        let g = group.multiply(&inv, t);
                        if let Some(b) = self.w[n].block(&g) {
                            self.finish(prefix, g, b);
                        }
                    }
                }
                None => {
                    for &(g, b) in &self.slots[n] {
                        self.finish(prefix, g.clone(), b);
                    }
                }
            }
            return;
        }
        let entries = if i == 0 { self.first } else { &self.slots[i][..] };
        for &(g, b) in entries {
            let p = if i == 0 { b.to_vec() } else { linalg::mul(prefix, b, self.d) };
            let next = group.multiply(prod, g);
            self.args.push(g.clone());
            self.descend(i + 1, &p, &next);
            self.args.pop();
        }
    }

    fn finish(&mut self, prefix: &[Complex64], g: Element, b: &[Complex64]) {
        self.args.push(g);
        let v = self.phi.eval(&self.args);
        self.args.pop();
        if v != ZERO {
            self.total += linalg::trace_of_product(prefix, b, self.d) * v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::{AreaCocycle, ClassTrace, FnCochain, Growth};
    use crate::groups::{ConjugacyClass, GroupKind, GroupModel};
    use serde_json::json;

    #[test]
    fn trace_of_delta() {
        let g = GroupModel::free(2);
        let h = g.parse_str("ab").unwrap();
        let tr = ClassTrace::new(ConjugacyClass::new(&g, h.clone()).unwrap());
        let x = AlgebraElement::delta(&g, h, 1);
        assert_eq!(pair_brute(&tr, &[&x]).unwrap(), Complex64::new(1.0, 0.0));
        // A conjugate of h is in the class too.
        let y = AlgebraElement::delta(&g, g.parse_str("ba").unwrap(), 1);
        assert_eq!(pair_brute(&tr, &[&y]).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(tr.pair(&[&y]).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn class_solving_matches_full_enumeration() {
        // Same cochain with and without a declared class.
        let g = GroupModel::product(vec![GroupKind::FreeAbelian { rank: 2 }, GroupKind::Cyclic { order: 2 }]);
        let h = g.parse_element(&json!([[0, 0], 1])).unwrap();
        let area = AreaCocycle::new(&g, h).unwrap();
        let open = FnCochain::new(&g, 2, None, Growth::Polynomial { c: 1.0, k: 1.0 }, true, "open", {
            let g2 = g.clone();
            let area = AreaCocycle::new(&g2, g2.parse_element(&json!([[0, 0], 1])).unwrap()).unwrap();
            move |x| area.eval(x)
        });
        let mk = |s: u64| {
            let ball = g.ball(2).unwrap();
            let blocks: Vec<_> = ball
                .elements
                .iter()
                .enumerate()
                .map(|(i, x)| (x.clone(), vec![Complex64::new(((i as u64 * 7 + s) % 11) as f64 - 5.0, (i % 3) as f64)]))
                .collect();
            AlgebraElement::from_blocks(&g, 1, blocks).unwrap()
        };
        let (a, b, c) = (mk(1), mk(2), mk(3));
        let x = pair_brute(&area, &[&a, &b, &c]).unwrap();
        let y = pair_brute(&open, &[&a, &b, &c]).unwrap();
        assert!(x.norm() > 1.0);
        assert!((x - y).norm() < 1e-9 * x.norm());
    }

    #[test]
    fn arity_is_checked() {
        let g = GroupModel::cyclic(2);
        let tr = ClassTrace::new(ConjugacyClass::new(&g, g.identity()).unwrap());
        let x = AlgebraElement::unit(&g, 1);
        assert!(matches!(pair_brute(&tr, &[&x, &x]), Err(Error::Shape(_))));
    }
}
