//! Sampled verification of cochain properties.
//!
//! Tuples are drawn from a ball: exhaustively when `|B_R|^{arity}` fits the
//! budget, otherwise from a seeded generator. For delocalized cochains half
//! of the random tuples are steered into the support class by solving the
//! last entry, since uniform tuples almost never land there.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use super::{coboundary_eval, Cochain};
use crate::groups::{ConjugacyClass, Element, Group};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 0x00de_10c0;

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub cochain: String,
    pub radius: usize,
    pub tuples: usize,
    pub exhaustive: bool,
    pub seed: u64,
    pub max_defect: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Worst tuple, as JSON group elements.
    pub witness: Option<Vec<Value>>,
}

pub struct Sample {
    pub tuples: Vec<Vec<Element>>,
    pub exhaustive: bool,
}

pub fn sample_tuples(
    group: &Group,
    arity: usize,
    radius: usize,
    budget: usize,
    seed: u64,
    class: Option<&ConjugacyClass>,
) -> Result<Sample> {
    let ball = group.ball(radius)?;
    let m = ball.len();
    let total = (m as f64).powi(arity as i32);
    if total <= budget as f64 {
        let mut tuples = Vec::with_capacity(total as usize);
        let mut idx = vec![0usize; arity];
        loop {
            tuples.push(idx.iter().map(|&i| ball.elements[i].clone()).collect());
            let mut k = arity;
            loop {
                if k == 0 {
                    return Ok(Sample { tuples, exhaustive: true });
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < m {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let targets = match class {
        Some(c) => c.elements_in_ball(radius)?,
        None => Vec::new(),
    };
    let mut tuples = Vec::with_capacity(budget);
    for t in 0..budget {
        let mut tup: Vec<Element> = (0..arity).map(|_| ball.elements[rng.random_range(0..m)].clone()).collect();
        if t % 2 == 1 && !targets.is_empty() {
            let c = &targets[rng.random_range(0..targets.len())];
            let prefix = group.product_of(&tup[..arity - 1]);
            tup[arity - 1] = group.multiply(&group.inverse(&prefix), c);
        }
        tuples.push(tup);
    }
    Ok(Sample { tuples, exhaustive: false })
}

fn run_check(
    name: &str,
    phi: &(impl Cochain + ?Sized),
    arity: usize,
    radius: usize,
    budget: usize,
    seed: u64,
    tol: f64,
    defect: impl Fn(&[Element]) -> f64,
) -> Result<CheckReport> {
    let sample = sample_tuples(phi.group(), arity, radius, budget, seed, phi.support_class())?;
    let mut worst = (0.0, None::<&Vec<Element>>);
    for t in &sample.tuples {
        let d = defect(t);
        if d > worst.0 || d.is_nan() {
            worst = (d, Some(t));
        }
    }
    let passed = worst.0 <= tol;
    Ok(CheckReport {
        check: name.into(),
        cochain: phi.name(),
        radius,
        tuples: sample.tuples.len(),
        exhaustive: sample.exhaustive,
        seed,
        max_defect: worst.0,
        tolerance: tol,
        passed,
        witness: worst.1.filter(|_| !passed).map(|t| t.iter().map(|g| phi.group().element_to_json(g)).collect()),
    })
}

fn scale(v: Complex64) -> f64 {
    1.0 + v.norm()
}

/// `φ(g₁,…,g_n,g₀) = (−1)ⁿ φ(g₀,…,g_n)`.
pub fn check_cyclic(phi: &(impl Cochain + ?Sized), radius: usize, budget: usize, seed: u64, tol: f64) -> Result<CheckReport> {
    let n = phi.degree();
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    run_check("cyclic", phi, n + 1, radius, budget, seed, tol, |g| {
        let mut rot = g[1..].to_vec();
        rot.push(g[0].clone());
        let a = phi.eval(g);
        let b = phi.eval(&rot);
        (b - a * sign).norm() / scale(a)
    })
}

/// `bφ = 0`.
pub fn check_cocycle(phi: &(impl Cochain + ?Sized), radius: usize, budget: usize, seed: u64, tol: f64) -> Result<CheckReport> {
    let n = phi.degree();
    run_check("cocycle", phi, n + 2, radius, budget, seed, tol, |g| coboundary_eval(phi, g).norm())
}

/// Vanishing off the declared class.
pub fn check_support(phi: &(impl Cochain + ?Sized), radius: usize, budget: usize, seed: u64) -> Result<CheckReport> {
    let n = phi.degree();
    let class = phi.support_class().cloned();
    run_check("support", phi, n + 1, radius, budget, seed, 0.0, |g| match &class {
        Some(c) if !c.contains(&phi.group().product_of(g)) => phi.eval(g).norm(),
        _ => 0.0,
    })
}

/// Vanishing whenever an argument past the first is the identity.
pub fn check_normalized(phi: &(impl Cochain + ?Sized), radius: usize, budget: usize, seed: u64) -> Result<CheckReport> {
    let n = phi.degree();
    let group = phi.group().clone();
    run_check("normalized", phi, n + 1, radius, budget, seed, 0.0, |g| {
        let mut worst: f64 = 0.0;
        for i in 1..g.len() {
            let mut h = g.to_vec();
            h[i] = group.identity();
            worst = worst.max(phi.eval(&h).norm());
        }
        worst
    })
}

/// Verifies the declared growth envelope; a violation is a certificate
/// error naming the worst tuple.
pub fn growth_certify(phi: &(impl Cochain + ?Sized), radius: usize, budget: usize, seed: u64) -> Result<CheckReport> {
    let growth = phi.growth();
    let group = phi.group().clone();
    let n = phi.degree();
    let report = run_check("growth", phi, n + 1, radius, budget, seed, 1e-12, |g| {
        let lengths: Vec<usize> = g.iter().map(|x| group.word_length(x)).collect();
        let bound = growth.bound(&lengths);
        let v = phi.eval(g).norm();
        if v <= bound {
            0.0
        } else {
            (v - bound) / bound.max(1e-300)
        }
    })?;
    if !report.passed {
        return Err(Error::Certificate(format!(
            "{} exceeds its {:?} envelope by a relative {:.3e} at {:?}",
            phi.name(),
            growth,
            report.max_defect,
            report.witness
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::{AreaCocycle, ClassTrace, Coboundary, CochainRef, FnCochain, Growth, Periodicity, RandomCyclic, TableCochain};
    use crate::groups::{GroupKind, GroupModel};
    use serde_json::json;
    use std::sync::Arc;

    fn z2_z2() -> (Group, Element) {
        let g = GroupModel::product(vec![GroupKind::FreeAbelian { rank: 2 }, GroupKind::Cyclic { order: 2 }]);
        let h = g.parse_element(&json!([[0, 0], 1])).unwrap();
        (g, h)
    }

    #[test]
    fn area_cocycle_certified_on_b4() {
        let (g, h) = z2_z2();
        let area = AreaCocycle::new(&g, h).unwrap();
        for r in [
            check_cyclic(&area, 4, 200_000, 1, 1e-12).unwrap(),
            check_cocycle(&area, 4, 200_000, 2, 1e-12).unwrap(),
            check_support(&area, 4, 100_000, 3).unwrap(),
            check_normalized(&area, 4, 100_000, 4).unwrap(),
            growth_certify(&area, 4, 100_000, 5).unwrap(),
        ] {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn area_growth_exhaustive_on_b5_cube() {
        // ℤ² with the trivial class: B_5 has 61 elements, 61³ tuples.
        let g = GroupModel::free_abelian(2);
        let area = AreaCocycle::new(&g, g.identity()).unwrap();
        let r = growth_certify(&area, 5, 61usize.pow(3), 0).unwrap();
        assert!(r.exhaustive && r.passed);
    }

    #[test]
    fn coboundaries_are_cocycles() {
        let (g, h) = z2_z2();
        let class = ConjugacyClass::new(&g, h).unwrap();
        for n in 0..3 {
            let psi: CochainRef = Arc::new(RandomCyclic::new(&g, n, Some(class.clone()), 1.0, 0.1, 17 + n as u64));
            assert!(check_cyclic(psi.as_ref(), 2, 20_000, 9, 1e-12).unwrap().passed);
            let b = Coboundary::new(psi);
            let r = check_cocycle(&b, 2, 20_000, 5, 1e-9).unwrap();
            assert!(r.passed, "{r:?}");
            assert!(check_cyclic(&b, 2, 20_000, 6, 1e-12).unwrap().passed);
            assert!(check_support(&b, 2, 20_000, 7).unwrap().passed);
        }
    }

    #[test]
    fn traces_are_cocycles_and_s_preserves_that() {
        let g = GroupModel::free(2);
        let class = ConjugacyClass::new(&g, g.parse_str("ab").unwrap()).unwrap();
        let tr: CochainRef = Arc::new(ClassTrace::new(class));
        assert!(check_cocycle(tr.as_ref(), 3, 50_000, 1, 1e-12).unwrap().passed);
        let s: CochainRef = Arc::new(Periodicity::new(tr).unwrap());
        assert!(check_cyclic(s.as_ref(), 2, 20_000, 2, 1e-12).unwrap().passed);
        assert!(check_cocycle(s.as_ref(), 2, 20_000, 3, 1e-12).unwrap().passed);
        assert!(check_support(s.as_ref(), 2, 20_000, 4).unwrap().passed);
        let ss = Periodicity::new(s).unwrap();
        assert!(check_cyclic(&ss, 1, 50_000, 5, 1e-12).unwrap().passed);
        assert!(check_cocycle(&ss, 1, 20_000, 6, 1e-12).unwrap().passed);
    }

    #[test]
    fn s_of_area_cocycle() {
        let (g, h) = z2_z2();
        let s = Periodicity::new(Arc::new(AreaCocycle::new(&g, h).unwrap())).unwrap();
        assert!(check_cyclic(&s, 2, 20_000, 1, 1e-12).unwrap().passed);
        assert!(check_cocycle(&s, 2, 20_000, 2, 1e-12).unwrap().passed);
        assert!(check_support(&s, 2, 20_000, 3).unwrap().passed);
        assert!(growth_certify(&s, 2, 20_000, 4).unwrap().passed);
    }

    #[test]
    fn non_cyclic_table_fails_with_witness() {
        let g = GroupModel::cyclic(3);
        let e = |x: i64| g.parse_element(&json!(x)).unwrap();
        let t = TableCochain::new(&g, 1, None, vec![(vec![e(1), e(2)], Complex64::new(1.0, 0.0))], "bad").unwrap();
        let r = check_cyclic(&t, 1, 1000, 0, 1e-12).unwrap();
        assert!(!r.passed);
        assert_eq!(r.witness.unwrap().len(), 2);
    }

    #[test]
    fn exponential_violation_is_a_certificate_error() {
        let g = GroupModel::free_abelian(1);
        let g2 = g.clone();
        let psi = FnCochain::new(&g, 0, None, Growth::Exponential { c: 1.0, k: 1.0 }, true, "e^{2l}", move |x| {
            Complex64::new((2.0 * g2.word_length(&x[0]) as f64).exp(), 0.0)
        });
        match growth_certify(&psi, 4, 100, 0) {
            Err(Error::Certificate(msg)) => assert!(msg.contains("e^{2l}")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn b_squared_vanishes() {
        let g = GroupModel::free(2);
        let psi: CochainRef = Arc::new(RandomCyclic::new(&g, 1, None, 1.0, 0.0, 3));
        let bb = Coboundary::new(Arc::new(Coboundary::new(psi)));
        let r = crate::cyclic::checks::run_check("bb", &bb, 4, 2, 20_000, 1, 1e-12, |t| bb.eval(t).norm()).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
