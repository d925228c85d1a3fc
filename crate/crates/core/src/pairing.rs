//! K-theoretic consistency checks: the exponential loop attached to an
//! idempotent, the identity `τ_φ(∂p) = −2·ch_φ(p)`, the scalar loop integral
//! behind it, and vanishing of pairings over loops too short to reach the
//! support of a delocalized cocycle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::AlgebraElement;
use crate::cyclic::{connes_chern, Cochain, Idempotent};
use crate::eta::{tau_pair, ComplexValue, InvertiblePath};
use crate::quad;
use crate::{Error, Result};

/// `u(t) = e^{2πi(1−t)p}` on `[0, 1]` and the unit afterwards.
#[derive(Clone, Debug)]
pub struct BoundaryLoop {
    p: Idempotent,
    degree: usize,
}

impl BoundaryLoop {
    /// `degree` is the degree `2m` of the cocycle the loop will be paired with.
    pub fn new(p: Idempotent, degree: usize) -> Result<Self> {
        if degree % 2 == 1 {
            return Err(Error::Shape(format!("boundary loops pair with even cocycles, got degree {degree}")));
        }
        Ok(BoundaryLoop { p, degree })
    }

    pub fn idempotent(&self) -> &Idempotent {
        &self.p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `(u(t), u(t)⁻¹)`, using `u(t) − 1 = (e^{2πi(1−t)} − 1)p`.
    pub fn at(&self, t: f64) -> (AlgebraElement, AlgebraElement) {
        let pe = self.p.element();
        let group = pe.group();
        let unit = AlgebraElement::unit(group, pe.dim());
        if t >= 1.0 {
            return (unit.clone(), unit);
        }
        let z = Complex64::from_polar(1.0, 2.0 * PI * (1.0 - t));
        let one = Complex64::new(1.0, 0.0);
        (pe.scale(z - one).add_unit(one), pe.scale(z.conj() - one).add_unit(one))
    }

    pub fn path(&self) -> InvertiblePath<'static> {
        InvertiblePath::ExpLoop { p: self.p.clone(), forward: false }
    }
}

/// `∫₀¹ (2 − 2cos 2πs)^m ds`, by adaptive quadrature.
pub fn scalar_loop_integral(m: u32) -> f64 {
    let r = quad::adaptive(
        |s| Complex64::new((2.0 - 2.0 * (2.0 * PI * s).cos()).powi(m as i32), 0.0),
        0.0,
        1.0,
        1e-13,
        1e-15,
        400,
    );
    r.value.re
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryReport {
    pub cochain: String,
    pub degree: usize,
    /// `τ_φ` of the boundary loop.
    pub lhs: ComplexValue,
    /// Quadrature error of the left side.
    pub lhs_error: f64,
    /// `−2·ch_φ(p)`.
    pub rhs: ComplexValue,
    pub difference: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares `τ_φ(∂p)`, integrated along [`BoundaryLoop`], with `−2·ch_φ(p)`
/// from the Chern character. The two sides only share the pairing `φ#tr`.
pub fn boundary_identity(phi: &dyn Cochain, p: &Idempotent, tol: f64) -> Result<BoundaryReport> {
    let lp = BoundaryLoop::new(p.clone(), phi.degree())?;
    let tau = tau_pair(phi, &lp.path(), 0.1 * tol)?;
    let rhs = -2.0 * connes_chern(phi, p)?;
    let difference = (tau.value() - rhs).norm();
    Ok(BoundaryReport {
        cochain: phi.name(),
        degree: phi.degree(),
        lhs: tau.value,
        lhs_error: tau.error,
        rhs: rhs.into(),
        difference,
        tolerance: tol,
        passed: difference <= tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalLoopReport {
    pub cochain: String,
    /// Propagation `r` of the idempotent.
    pub propagation: usize,
    /// `(2m+1)·r`, the longest product reached by the slots.
    pub reach: usize,
    /// Shortest word length in the support class of the cocycle.
    pub class_length: usize,
    pub value: ComplexValue,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Pairs a delocalized cocycle with `β(t) = e^{2πit}p + (1 − p)`, which must
/// vanish when `(2m+1)·r < ℓ(h)`.
pub fn local_loop_vanishing(phi: &dyn Cochain, p: &Idempotent, tol: f64) -> Result<LocalLoopReport> {
    let class = phi
        .support_class()
        .ok_or_else(|| Error::Precondition(format!("{} is not delocalized at a conjugacy class", phi.name())))?;
    let m = phi.degree() / 2;
    let r = p.element().propagation();
    let reach = (2 * m + 1) * r;
    let class_length = class.min_length();
    if reach >= class_length {
        return Err(Error::Precondition(format!(
            "(2m+1)·r = {reach} must be below ℓ(h) = {class_length}; need propagation r < {:.3}",
            class_length as f64 / (2 * m + 1) as f64
        )));
    }
    let tau = tau_pair(phi, &InvertiblePath::ExpLoop { p: p.clone(), forward: true }, 0.1 * tol)?;
    let norm = tau.value().norm();
    Ok(LocalLoopReport {
        cochain: phi.name(),
        propagation: r,
        reach,
        class_length,
        value: tau.value,
        error: tau.error,
        tolerance: tol,
        passed: norm <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::{ClassTrace, Periodicity};
    use crate::fixtures;
    use crate::groups::{ConjugacyClass, GroupModel};
    use std::sync::Arc;

    /// Constant term of `(2 − z − z⁻¹)^m`, by integer polynomial expansion.
    fn constant_term(m: usize) -> i64 {
        let mut poly = vec![1i64];
        for _ in 0..m {
            let mut next = vec![0i64; poly.len() + 2];
            for (i, &c) in poly.iter().enumerate() {
                next[i] -= c;
                next[i + 1] += 2 * c;
                next[i + 2] -= c;
            }
            poly = next;
        }
        poly[m]
    }

    #[test]
    fn scalar_loop_integral_matches_expansion() {
        assert_eq!(constant_term(3), 20);
        for m in 0..=8 {
            let v = scalar_loop_integral(m as u32);
            assert!((v - constant_term(m) as f64).abs() <= 1e-10, "m={m}: {v}");
        }
    }

    #[test]
    fn loop_endpoints() {
        let p = fixtures::lattice_shift_idempotent([1, 0]).unwrap();
        let lp = BoundaryLoop::new(p, 2).unwrap();
        let (u, v) = lp.at(0.0);
        let one = Complex64::new(1.0, 0.0);
        let d = u.convolve(&v).unwrap().add_unit(-one);
        assert!(d.iter().all(|(_, b)| crate::linalg::max_abs(b) <= 1e-12));
        let (u1, _) = lp.at(1.0);
        let blocks: Vec<_> = u1.iter().collect();
        assert_eq!(blocks.len(), 1);
        assert!(u1.group().is_identity(blocks[0].0));
        assert_eq!(blocks[0].1, &[one, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), one][..]);
        assert!(BoundaryLoop::new(lp.idempotent().clone(), 1).is_err());
    }

    #[test]
    fn scalar_unit_gives_minus_two() {
        let z = GroupModel::free_abelian(1);
        let phi = ClassTrace::new(ConjugacyClass::new(&z, z.identity()).unwrap());
        let p = Idempotent::new(AlgebraElement::unit(&z, 1)).unwrap();
        let r = boundary_identity(&phi, &p, 1e-10).unwrap();
        assert!(r.passed);
        assert!((r.lhs.complex() - Complex64::new(-2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn boundary_identity_on_fixtures() {
        for fx in fixtures::idempotent_fixtures().unwrap() {
            let r = boundary_identity(fx.phi.as_ref(), &fx.p, 1e-8).unwrap();
            assert!(r.passed, "{}: {r:?}", fx.name);
        }
    }

    #[test]
    fn local_loop_vanishes_below_class_length() {
        let g = GroupModel::free_abelian(2);
        let h = g.lattice(&[5, 5]).unwrap();
        let tr = Arc::new(ClassTrace::new(ConjugacyClass::new(&g, h).unwrap()));
        let s = Periodicity::new(tr.clone()).unwrap();
        let p = fixtures::lattice_shift_idempotent([1, 0]).unwrap();
        let r = local_loop_vanishing(&s, &p, 1e-10).unwrap();
        assert_eq!((r.reach, r.class_length), (3, 10));
        assert!(r.passed && r.value.complex().norm() <= 1e-10);

        let far = fixtures::lattice_shift_idempotent([4, 0]).unwrap();
        assert!(matches!(local_loop_vanishing(&s, &far, 1e-10), Err(Error::Precondition(_))));
        assert!(matches!(local_loop_vanishing(tr.as_ref(), &far, 1e-10), Ok(_)));
    }
}
