//! Chern character of idempotents against even cyclic cocycles.

use num_complex::Complex64;

use super::Cochain;
use crate::algebra::AlgebraElement;
use crate::{Error, Result};

/// An algebra element verified to satisfy `p² = p` up to a tolerance.
#[derive(Clone, Debug)]
pub struct Idempotent {
    p: AlgebraElement,
    defect: f64,
}

impl Idempotent {
    pub fn new(p: AlgebraElement) -> Result<Self> {
        Self::with_tolerance(p, 1e-12)
    }

    pub fn with_tolerance(p: AlgebraElement, tol: f64) -> Result<Self> {
        let pp = p.convolve(&p)?;
        let defect = pp.max_diff(&p);
        if defect > tol {
            return Err(Error::Precondition(format!("not an idempotent: max |p² − p| = {defect:.3e}")));
        }
        Ok(Idempotent { p, defect })
    }

    pub fn element(&self) -> &AlgebraElement {
        &self.p
    }

    pub fn defect(&self) -> f64 {
        self.defect
    }
}

/// `ch_φ(p) = (2m)!/m! · φ#tr(p, …, p)` for a cocycle of degree `2m`.
pub fn connes_chern(phi: &(impl Cochain + ?Sized), p: &Idempotent) -> Result<Complex64> {
    let n = phi.degree();
    if n % 2 == 1 {
        return Err(Error::Shape(format!("Chern pairing needs an even cocycle; {} has degree {n}", phi.name())));
    }
    let m = n / 2;
    let c: f64 = (m + 1..=2 * m).map(|k| k as f64).product();
    let slots: Vec<&AlgebraElement> = vec![p.element(); n + 1];
    Ok(phi.pair(&slots)? * c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::{ClassTrace, Coboundary, CochainRef, RandomCyclic};
    use crate::groups::{ConjugacyClass, GroupModel};
    use crate::linalg::ZERO;
    use serde_json::json;
    use std::sync::Arc;

    fn half_projection() -> (crate::groups::Group, Idempotent) {
        let g = GroupModel::cyclic(2);
        let h = g.parse_element(&json!(1)).unwrap();
        let p = AlgebraElement::from_blocks(
            &g,
            1,
            vec![(g.identity(), vec![Complex64::new(0.5, 0.0)]), (h, vec![Complex64::new(0.5, 0.0)])],
        )
        .unwrap();
        (g, Idempotent::new(p).unwrap())
    }

    #[test]
    fn trace_of_group_projection() {
        let (g, p) = half_projection();
        let h = g.parse_element(&json!(1)).unwrap();
        let tr = ClassTrace::new(ConjugacyClass::new(&g, h).unwrap());
        assert!((connes_chern(&tr, &p).unwrap() - 0.5).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_idempotents_and_odd_degree() {
        let g = GroupModel::cyclic(2);
        let x = AlgebraElement::unit(&g, 1).scale(Complex64::new(2.0, 0.0));
        assert!(matches!(Idempotent::new(x), Err(Error::Precondition(_))));
        let (g, p) = half_projection();
        let psi = RandomCyclic::new(&g, 1, None, 1.0, 0.0, 1);
        assert!(matches!(connes_chern(&psi, &p), Err(Error::Shape(_))));
    }

    #[test]
    fn coboundaries_pair_to_zero() {
        let g = GroupModel::free_abelian(1);
        let a = g.lattice(&[1]).unwrap();
        // p = (1 x; 0 0) conjugated by a unipotent with off-diagonal δ_a.
        let one = Complex64::new(1.0, 0.0);
        let p = AlgebraElement::from_blocks(
            &g,
            2,
            vec![(g.identity(), vec![one, ZERO, ZERO, ZERO]), (a, vec![ZERO, one, ZERO, ZERO])],
        )
        .unwrap();
        let p = Idempotent::new(p).unwrap();
        let psi: CochainRef = Arc::new(RandomCyclic::new(&g, 1, None, 1.0, 0.1, 4));
        let b = Coboundary::new(psi);
        assert!(connes_chern(&b, &p).unwrap().norm() < 1e-12);
        assert!(crate::cyclic::pair_brute(&b, &[p.element(); 3]).unwrap().norm() < 1e-12);
    }
}
