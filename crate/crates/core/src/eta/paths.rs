//! The pairing `τ_φ(w) = (m!/πi) ∫ φ#tr(ẇw⁻¹ ⊗ ((w−1) ⊗ (w⁻¹−1))^{⊗m}) ds`
//! along explicit invertible paths, and the transgression identity behind
//! `η_{bψ} = 0`.
//!
//! The operator paths run from the unit to `−1`: `s ↦ u_{1/s}` and
//! `s ↦ w_{1/s}`. With `F(t)` the integrand in the original time, the leg
//! `s ∈ [1, ∞)` becomes `∫₀¹ F(t) dt` and the leg `s ∈ (0, 1]` is integrated
//! directly as `∫₀¹ F(1/s) s⁻² ds`, so no infinite tail remains. Hence
//! `τ = −(m!/πi) ∫₀^∞ F(t) dt`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::slots::{Family, SlotEngine};
use super::{refine_engine, ComplexValue, IntervalReport};
use crate::algebra::AlgebraElement;
use crate::cyclic::{Coboundary, Cochain, CochainRef, Idempotent};
use crate::groups::Group;
use crate::operators::EquivariantOperator;
use crate::quad;
use crate::{Error, Result};

/// Largest `‖w·w⁻¹ − 1‖` accepted at a sample.
pub const INVERTIBILITY_TOL: f64 = 1e-8;

/// `s ↦ (w(s), w(s)⁻¹)` on `[a, b]`, differentiated numerically.
pub struct CustomPath {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub step: f64,
    #[allow(clippy::type_complexity)]
    pub w: Box<dyn Fn(f64) -> Result<(AlgebraElement, AlgebraElement)> + Send + Sync>,
}

pub enum InvertiblePath<'a> {
    /// `s ↦ u_{1/s}(D)`.
    Ut(&'a EquivariantOperator),
    /// `s ↦ w_{1/s}(D)`; needs a group of polynomial growth.
    Wt(&'a EquivariantOperator),
    /// `e^{2πi(1−t)p}` on `[0, 1]`, or `e^{2πitp}` when `forward`.
    ExpLoop { p: Idempotent, forward: bool },
    /// The constant unit.
    Constant { group: Group, dim: usize },
    Custom(CustomPath),
}

impl InvertiblePath<'_> {
    pub fn name(&self) -> String {
        match self {
            InvertiblePath::Ut(_) => "ut".into(),
            InvertiblePath::Wt(_) => "wt".into(),
            InvertiblePath::ExpLoop { forward: false, .. } => "boundary_loop".into(),
            InvertiblePath::ExpLoop { forward: true, .. } => "exp_loop".into(),
            InvertiblePath::Constant { .. } => "constant".into(),
            InvertiblePath::Custom(c) => c.name.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TauReport {
    pub path: String,
    pub cochain: String,
    pub value: ComplexValue,
    pub error: f64,
    pub intervals: Vec<IntervalReport>,
    /// Largest `‖w·w⁻¹ − 1‖` over the checked samples.
    pub invertibility_defect: f64,
    pub method: String,
    pub converged: bool,
}

impl TauReport {
    pub fn value(&self) -> Complex64 {
        self.value.complex()
    }
}

fn prefactor(m: usize) -> Complex64 {
    let m_fact: f64 = (1..=m).map(|k| k as f64).product();
    Complex64::new(0.0, -m_fact / PI)
}

fn scaled(r: quad::QuadResult, a: f64, b: f64, c: Complex64) -> IntervalReport {
    IntervalReport { a, b, value: (r.value * c).into(), error: r.error * c.norm(), panels: r.panels, converged: r.converged }
}

/// `τ_φ` along `path` to absolute error `tol`.
pub fn tau_pair(phi: &dyn Cochain, path: &InvertiblePath, tol: f64) -> Result<TauReport> {
    let deg = phi.degree();
    if deg % 2 == 1 {
        return Err(Error::Unsupported(format!(
            "{} has odd degree {deg}; only even cocycles paired with unitary paths are implemented",
            phi.name()
        )));
    }
    let m = deg / 2;
    let pref = prefactor(m);
    match path {
        InvertiblePath::Ut(op) | InvertiblePath::Wt(op) => {
            let family = if matches!(path, InvertiblePath::Ut(_)) { Family::Ut } else { Family::Wt };
            if family == Family::Wt && !op.group().has_polynomial_growth() {
                return Err(Error::Unsupported(format!(
                    "the wt path needs a polynomial-growth group; {} has none certified",
                    op.group()
                )));
            }
            let gap = op.gap_certificate()?;
            if gap.sigma <= 0.0 || gap.kernel_dim.unwrap_or(0) > 0 {
                return Err(Error::Precondition("operator paths need an invertible operator".into()));
            }
            let probe = [0.3, 1.0, 2.0, 3.5];
            let (engine, grid_diff) = refine_engine(op, phi, family, &probe, tol / pref.norm())?;
            let mut defect: f64 = 0.0;
            for s in [0.05, 0.3, 1.0, 3.0, 20.0] {
                let d = engine.invertibility_defect(family, 1.0 / s)?;
                if d > INVERTIBILITY_TOL {
                    return Err(Error::Precondition(format!("path is not invertible at s = {s} (defect {d:.3e})")));
                }
                defect = defect.max(d);
            }
            let abs = 0.45 * tol / pref.norm();
            let mut failure = None;
            let mut eval = |t: f64| match engine.integrand(family, t) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            };
            let t_leg = quad::adaptive(&mut eval, 0.0, 1.0, abs, 0.0, 400);
            let s_leg = quad::adaptive(|s: f64| eval(1.0 / s) / (s * s), 0.0, 1.0, abs, 0.0, 400);
            if let Some(e) = failure {
                return Err(e);
            }
            let c = -pref;
            let intervals = vec![scaled(t_leg, 0.0, 1.0, c), scaled(s_leg, 0.0, 1.0, c)];
            Ok(finish(path, phi, intervals, grid_diff * 2.0 * pref.norm(), defect, engine.describe()))
        }
        InvertiblePath::ExpLoop { p, forward } => {
            let pe = p.element();
            let sign = if *forward { 1.0 } else { -1.0 };
            let angle = |t: f64| if *forward { 2.0 * PI * t } else { 2.0 * PI * (1.0 - t) };
            let slots_at = |t: f64| -> Vec<AlgebraElement> {
                let z = Complex64::from_polar(1.0, angle(t));
                let mut v = vec![pe.scale(Complex64::new(0.0, 2.0 * PI * sign))];
                for _ in 0..m {
                    v.push(pe.scale(z - 1.0));
                    v.push(pe.scale(z.conj() - 1.0));
                }
                v
            };
            let one = Complex64::new(1.0, 0.0);
            let mut defect: f64 = 0.0;
            for t in [0.1, 0.37, 0.5, 0.81] {
                let z = Complex64::from_polar(1.0, angle(t));
                let u = pe.scale(z - 1.0).add_unit(one);
                let v = pe.scale(z.conj() - 1.0).add_unit(one);
                let d = u.convolve(&v)?.add_unit(-one).iter().map(|(_, b)| crate::linalg::max_abs(b)).fold(0.0, f64::max);
                if d > INVERTIBILITY_TOL {
                    return Err(Error::Precondition(format!("loop is not invertible at t = {t} (defect {d:.3e})")));
                }
                defect = defect.max(d);
            }
            let mut failure = None;
            let r = quad::adaptive(
                |t| {
                    let s = slots_at(t);
                    let refs: Vec<&AlgebraElement> = s.iter().collect();
                    phi.pair(&refs).unwrap_or_else(|e| {
                        failure.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    })
                },
                0.0,
                1.0,
                0.5 * tol / pref.norm(),
                0.0,
                200,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            Ok(finish(path, phi, vec![scaled(r, 0.0, 1.0, pref)], 0.0, defect, "closed-form loop slots".into()))
        }
        InvertiblePath::Constant { .. } => Ok(finish(path, phi, vec![], 0.0, 0.0, "constant path, zero derivative".into())),
        InvertiblePath::Custom(cp) => custom_tau(phi, cp, m, tol),
    }
}

fn finish(path: &InvertiblePath, phi: &dyn Cochain, intervals: Vec<IntervalReport>, extra: f64, defect: f64, method: String) -> TauReport {
    let value: Complex64 = intervals.iter().map(|i| i.value.complex()).sum();
    let error = intervals.iter().map(|i| i.error).sum::<f64>() + extra;
    TauReport {
        path: path.name(),
        cochain: phi.name(),
        value: value.into(),
        error,
        converged: intervals.iter().all(|i| i.converged) && error.is_finite(),
        intervals,
        invertibility_defect: defect,
        method,
    }
}

/// Custom paths: `ẇ` by Richardson-extrapolated central differences; the
/// difference between extrapolated and plain quotients enters the error.
fn custom_tau(phi: &dyn Cochain, cp: &CustomPath, m: usize, tol: f64) -> Result<TauReport> {
    let pref = prefactor(m);
    let one = Complex64::new(1.0, 0.0);
    let h = cp.step;
    let mut defect: f64 = 0.0;
    let mut fd_err: f64 = 0.0;
    let mut failure = None;
    let mut eval = |s: f64| -> Result<Complex64> {
        let (w, wi) = (cp.w)(s)?;
        let d = w.convolve(&wi)?.add_unit(-one).iter().map(|(_, b)| crate::linalg::max_abs(b)).fold(0.0, f64::max);
        if d > INVERTIBILITY_TOL {
            return Err(Error::Precondition(format!("path is not invertible at s = {s} (defect {d:.3e})")));
        }
        defect = defect.max(d);
        let diff = |step: f64| -> Result<AlgebraElement> {
            let (lo, hi) = ((s - step).max(cp.a), (s + step).min(cp.b));
            let (wp, _) = (cp.w)(hi)?;
            let (wm, _) = (cp.w)(lo)?;
            Ok(wp.sub(&wm)?.scale(Complex64::new(1.0 / (hi - lo), 0.0)))
        };
        let d1 = diff(h)?;
        let d2 = diff(h / 2.0)?;
        let rich = d2.scale(Complex64::new(4.0 / 3.0, 0.0)).sub(&d1.scale(Complex64::new(1.0 / 3.0, 0.0)))?;
        let pair_with = |wdot: &AlgebraElement| -> Result<Complex64> {
            let mut slots = vec![wdot.convolve(&wi)?];
            for _ in 0..m {
                slots.push(w.add_unit(-one));
                slots.push(wi.add_unit(-one));
            }
            let refs: Vec<&AlgebraElement> = slots.iter().collect();
            phi.pair(&refs)
        };
        let best = pair_with(&rich)?;
        fd_err = fd_err.max((best - pair_with(&d2)?).norm());
        Ok(best)
    };
    let r = quad::adaptive(
        |s| {
            eval(s).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            })
        },
        cp.a,
        cp.b,
        0.5 * tol / pref.norm(),
        0.0,
        200,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let extra = fd_err * (cp.b - cp.a) * pref.norm();
    let path = InvertiblePath::Custom(CustomPath { name: cp.name.clone(), a: cp.a, b: cp.b, step: cp.step, w: Box::new(|_| unreachable!()) });
    let mut rep = finish(&path, phi, vec![scaled(r, cp.a, cp.b, pref)], extra, defect, format!("finite differences, step {h}"));
    rep.path = cp.name.clone();
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct TransgressionReport {
    pub t: f64,
    pub step: f64,
    /// Central difference of `ψ#tr(((u−1) ⊗ (u⁻¹−1))^{⊗m})`.
    pub finite_difference: ComplexValue,
    /// `m·bψ#tr(u̇u⁻¹ ⊗ ((u−1) ⊗ (u⁻¹−1))^{⊗m})`.
    pub direct: ComplexValue,
    pub relative_error: f64,
}

/// Compares the time derivative of the loop pairing of an odd cochain `ψ`
/// of degree `2m−1` with `m` times the raw integrand of `bψ`.
pub fn transgression_check(op: &EquivariantOperator, psi: CochainRef, t: f64, step: f64) -> Result<TransgressionReport> {
    let deg = psi.degree();
    if deg % 2 == 0 {
        return Err(Error::Shape("transgression needs an odd cochain".into()));
    }
    let m = (deg + 1) / 2;
    let b = Coboundary::new(psi.clone());
    let probe = [t];
    let (eb, _) = refine_engine(op, &b, Family::Ut, &probe, 1e-12)?;
    let ep = SlotEngine::new(op, psi.as_ref(), Family::Ut, eb.nodes(), &[t - step, t, t + step])?;
    let fd = (ep.loop_pairing(Family::Ut, t + step)? - ep.loop_pairing(Family::Ut, t - step)?) / (2.0 * step);
    let direct = eb.integrand(Family::Ut, t)? * m as f64;
    let relative_error = (fd - direct).norm() / direct.norm().max(1e-300);
    Ok(TransgressionReport { t, step, finite_difference: fd.into(), direct: direct.into(), relative_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclic::{connes_chern, ClassTrace, RandomCyclic};
    use crate::eta::{eta_class, EtaOptions};
    use crate::fixtures;
    use std::sync::Arc;

    #[test]
    fn ut_pairing_is_minus_eta() {
        let t = fixtures::torsion_model();
        let phi = ClassTrace::new(t.class.clone());
        let tau = tau_pair(&phi, &InvertiblePath::Ut(&t.operator), 1e-9).unwrap();
        let eta = eta_class(&t.operator, &t.class, &EtaOptions::with_tol(1e-9)).unwrap();
        assert!((tau.value() + eta.value()).norm() < 1e-8, "{:?} {:?}", tau.value, eta.value);
    }

    #[test]
    fn wt_agrees_with_ut() {
        let t = fixtures::torsion_model();
        let phi = ClassTrace::new(t.class.clone());
        let a = tau_pair(&phi, &InvertiblePath::Ut(&t.operator), 1e-8).unwrap();
        let b = tau_pair(&phi, &InvertiblePath::Wt(&t.operator), 1e-8).unwrap();
        assert!((a.value() - b.value()).norm() < 1e-7, "{:?} {:?}", a.value, b.value);
    }

    #[test]
    fn constant_path_is_zero() {
        let t = fixtures::torsion_model();
        let phi = ClassTrace::new(t.class.clone());
        let r = tau_pair(&phi, &InvertiblePath::Constant { group: t.group.clone(), dim: 1 }, 1e-9).unwrap();
        assert_eq!(r.value(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn boundary_loop_and_custom_path_agree() {
        for fx in fixtures::idempotent_fixtures().unwrap() {
            let exact = tau_pair(fx.phi.as_ref(), &InvertiblePath::ExpLoop { p: fx.p.clone(), forward: false }, 1e-10).unwrap();
            let ch = connes_chern(fx.phi.as_ref(), &fx.p).unwrap();
            assert!((exact.value() + 2.0 * ch).norm() < 1e-9, "{}: {:?} vs {ch}", fx.name, exact.value);
            let p = fx.p.element().clone();
            let custom = CustomPath {
                name: "loop".into(),
                a: 0.0,
                b: 1.0,
                step: 1e-3,
                w: Box::new(move |t| {
                    let z = Complex64::from_polar(1.0, 2.0 * PI * (1.0 - t));
                    let one = Complex64::new(1.0, 0.0);
                    Ok((p.scale(z - 1.0).add_unit(one), p.scale(z.conj() - 1.0).add_unit(one)))
                }),
            };
            let fd = tau_pair(fx.phi.as_ref(), &InvertiblePath::Custom(custom), 1e-8).unwrap();
            assert!((fd.value() - exact.value()).norm() < 1e-6 + fd.error, "{}: {:?} vs {:?}", fx.name, fd.value, exact.value);
        }
    }

    #[test]
    fn transgression_identity() {
        let t = fixtures::torsion_model();
        let psi: CochainRef = Arc::new(RandomCyclic::new(&t.group, 1, Some(t.class.clone()), 1.0, 0.1, 7));
        for time in [0.5, 1.0, 2.0] {
            let r = transgression_check(&t.operator, psi.clone(), time, 1e-3).unwrap();
            assert!(r.relative_error < 1e-4, "{r:?}");
        }
    }

    #[test]
    fn wt_is_refused_on_free_groups() {
        let g = crate::groups::GroupModel::free(2);
        let a = AlgebraElement::unit(&g, 1).scale(Complex64::new(2.0, 0.0));
        let op = EquivariantOperator::free_convolution(a).unwrap();
        let phi = ClassTrace::new(crate::groups::ConjugacyClass::new(&g, g.generators()[0].clone()).unwrap());
        assert!(matches!(tau_pair(&phi, &InvertiblePath::Wt(&op), 1e-6), Err(Error::Unsupported(_))));
    }
}
