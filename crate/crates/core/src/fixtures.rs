//! Shipped models: symbols, operators, cocycles and idempotents used by the
//! tests, the acceptance harness and the CLI examples.

use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::AlgebraElement;
use crate::cyclic::{AreaCocycle, ClassTrace, CochainRef, Idempotent, Periodicity};
use crate::groups::{ConjugacyClass, Element, Group, GroupKind, GroupModel};
use crate::operators::EquivariantOperator;
use crate::Result;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `ℤ` with `d(θ) = 2 + cos θ`.
pub fn z_scalar() -> AlgebraElement {
    let g = GroupModel::free_abelian(1);
    let blocks = vec![
        (g.identity(), vec![c(2.0, 0.0)]),
        (g.lattice(&[1]).unwrap(), vec![c(0.5, 0.0)]),
        (g.lattice(&[-1]).unwrap(), vec![c(0.5, 0.0)]),
    ];
    AlgebraElement::from_blocks(&g, 1, blocks).unwrap()
}

/// `ℤ²` with `d(θ) = 3 + cos θ₁ + cos θ₂`.
pub fn z2_scalar() -> AlgebraElement {
    let g = GroupModel::free_abelian(2);
    let mut blocks = vec![(g.identity(), vec![c(3.0, 0.0)])];
    for v in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
        blocks.push((g.lattice(&v).unwrap(), vec![c(0.5, 0.0)]));
    }
    AlgebraElement::from_blocks(&g, 1, blocks).unwrap()
}

/// `ℤ` with the chiral symbol `[[m, e^{iθ}−1], [e^{−iθ}−1, −m]]`, whose
/// eigenvalues are `±√(m² + 2 − 2cos θ)`.
pub fn wilson(m: f64) -> AlgebraElement {
    let g = GroupModel::free_abelian(1);
    let blocks = vec![
        (g.identity(), vec![c(m, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(-m, 0.0)]),
        (g.lattice(&[1]).unwrap(), vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
        (g.lattice(&[-1]).unwrap(), vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
    ];
    AlgebraElement::from_blocks(&g, 2, blocks).unwrap()
}

/// The three symbols used for backend agreement.
pub fn shipped_symbols() -> Vec<(&'static str, AlgebraElement)> {
    vec![("z_scalar", z_scalar()), ("wilson_0.5", wilson(0.5)), ("z2_scalar", z2_scalar())]
}

/// `ℤ × ℤ/2` with `D = ½(δ₁ + δ₋₁) + 2δ_h`, `h` the torsion generator. The
/// symbol is `cos θ ± 2` on the two characters, so the gap is 1 and
/// `η_⟨h⟩ = 1`.
pub struct TorsionModel {
    pub group: Group,
    pub h: Element,
    pub class: ConjugacyClass,
    pub operator: EquivariantOperator,
}

pub fn torsion_model() -> TorsionModel {
    let g = GroupModel::product(vec![GroupKind::FreeAbelian { rank: 1 }, GroupKind::Cyclic { order: 2 }]);
    let h = g.from_abelian_coords(&[0], &[1]);
    let a = AlgebraElement::from_blocks(
        &g,
        1,
        vec![
            (h.clone(), vec![c(2.0, 0.0)]),
            (g.from_abelian_coords(&[1], &[0]), vec![c(0.5, 0.0)]),
            (g.from_abelian_coords(&[-1], &[0]), vec![c(0.5, 0.0)]),
        ],
    )
    .unwrap();
    let class = ConjugacyClass::new(&g, h.clone()).unwrap();
    TorsionModel { operator: EquivariantOperator::fourier(a).unwrap(), group: g, h, class }
}

/// `ℤ² × ℤ/2` with a two-band lattice Dirac operator
/// `sin θ₁ σx + sin θ₂ σy + (m + cos θ₁ + cos θ₂) σz`, where `m = 2 + χ(h)`
/// is 3 on the trivial character and 1 on the sign character, paired with
/// the area cocycle at the torsion element `h`.
pub struct AreaModel {
    pub group: Group,
    pub h: Element,
    pub operator: EquivariantOperator,
    pub area: CochainRef,
}

pub fn area_model() -> AreaModel {
    let g = GroupModel::product(vec![GroupKind::FreeAbelian { rank: 2 }, GroupKind::Cyclic { order: 2 }]);
    let h = g.from_abelian_coords(&[0, 0], &[1]);
    let sz = |x: f64| vec![c(x, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-x, 0.0)];
    // σx/(2i) and its adjoint; σy/(2i) and its adjoint.
    let sx = |s: f64| vec![c(0.0, 0.0), c(0.0, -0.5 * s), c(0.0, -0.5 * s), c(0.0, 0.0)];
    let sy = |s: f64| vec![c(0.0, 0.0), c(-0.5 * s, 0.0), c(0.5 * s, 0.0), c(0.0, 0.0)];
    let add = |a: Vec<Complex64>, b: Vec<Complex64>| a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>();
    let blocks = vec![
        (g.identity(), sz(2.0)),
        (h.clone(), sz(1.0)),
        (g.from_abelian_coords(&[1, 0], &[0]), add(sz(0.5), sx(1.0))),
        (g.from_abelian_coords(&[-1, 0], &[0]), add(sz(0.5), sx(-1.0))),
        (g.from_abelian_coords(&[0, 1], &[0]), add(sz(0.5), sy(1.0))),
        (g.from_abelian_coords(&[0, -1], &[0]), add(sz(0.5), sy(-1.0))),
    ];
    let a = AlgebraElement::from_blocks(&g, 2, blocks).unwrap();
    let area: CochainRef = Arc::new(AreaCocycle::new(&g, h.clone()).unwrap());
    AreaModel { operator: EquivariantOperator::fourier(a).unwrap(), group: g, h, area }
}

/// A pairing fixture for the boundary identity.
pub struct IdempotentFixture {
    pub name: &'static str,
    pub phi: CochainRef,
    pub p: Idempotent,
}

/// `½(1 + δ_h)` for an element `h` of order two.
fn half_projection(g: &Group, h: &Element) -> AlgebraElement {
    AlgebraElement::from_blocks(g, 1, vec![(g.identity(), vec![c(0.5, 0.0)]), (h.clone(), vec![c(0.5, 0.0)])]).unwrap()
}

pub fn idempotent_fixtures() -> Result<Vec<IdempotentFixture>> {
    let mut out = Vec::new();

    // Scalar unit with the trace at the identity.
    let z = GroupModel::free_abelian(1);
    out.push(IdempotentFixture {
        name: "unit_trivial_class",
        phi: Arc::new(ClassTrace::new(ConjugacyClass::new(&z, z.identity())?)),
        p: Idempotent::new(AlgebraElement::unit(&z, 1))?,
    });

    let t = torsion_model();
    let tr_h: CochainRef = Arc::new(ClassTrace::new(t.class.clone()));
    let half = half_projection(&t.group, &t.h);
    out.push(IdempotentFixture { name: "torsion_half_trace", phi: tr_h.clone(), p: Idempotent::new(half.clone())? });
    let s_tr: CochainRef = Arc::new(Periodicity::new(tr_h.clone())?);
    out.push(IdempotentFixture { name: "torsion_half_s_trace", phi: s_tr.clone(), p: Idempotent::new(half.clone())? });

    // [[e, e·δ_a], [0, 0]] with e = ½(1+δ_h): a rank-one family that meets ⟨h⟩.
    let a = t.group.from_abelian_coords(&[1], &[0]);
    let mut blocks = Vec::new();
    for (g, b) in half.iter() {
        blocks.push((g.clone(), vec![b[0], c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
        blocks.push((t.group.multiply(g, &a), vec![c(0.0, 0.0), b[0], c(0.0, 0.0), c(0.0, 0.0)]));
    }
    let shift = AlgebraElement::from_blocks(&t.group, 2, blocks)?;
    out.push(IdempotentFixture { name: "torsion_shift_trace", phi: tr_h, p: Idempotent::new(shift.clone())? });
    out.push(IdempotentFixture { name: "torsion_shift_s_trace", phi: s_tr, p: Idempotent::new(shift)? });

    // Identity-supported projection against the delocalized area cocycle.
    let am = area_model();
    let diag = AlgebraElement::from_blocks(&am.group, 2, vec![(am.group.identity(), vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)])])?;
    out.push(IdempotentFixture { name: "identity_supported_area", phi: am.area.clone(), p: Idempotent::new(diag)? });
    Ok(out)
}

/// `[[1, δ_v], [0, 0]]` on `ℤ²`, an idempotent of propagation `ℓ(v)`.
pub fn lattice_shift_idempotent(v: [i64; 2]) -> Result<Idempotent> {
    let g = GroupModel::free_abelian(2);
    let a = AlgebraElement::from_blocks(
        &g,
        2,
        vec![
            (g.identity(), vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
            (g.lattice(&v)?, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
        ],
    )?;
    Idempotent::new(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        let f = idempotent_fixtures().unwrap();
        assert_eq!(f.len(), 6);
        for x in &f {
            assert!(x.p.defect() < 1e-14, "{}", x.name);
        }
        assert!(lattice_shift_idempotent([1, 0]).unwrap().defect() == 0.0);
    }

    #[test]
    fn operators_are_gapped() {
        let t = torsion_model();
        assert!((t.operator.gap_certificate().unwrap().sigma - 1.0).abs() < 1e-3);
        let a = area_model();
        assert!(a.operator.gap_certificate().unwrap().sigma > 0.5);
    }
}
