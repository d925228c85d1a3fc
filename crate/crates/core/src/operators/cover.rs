//! Finite-cover backend: a Hermitian matrix on a finite-dimensional space
//! with a unitary action of a finite group commuting with it. Everything is
//! exact up to one dense eigendecomposition.
//!
//! Class traces are taken on the whole space, `Σ_{γ∈⟨h⟩} tr(T U_γ)`. For the
//! regular action built by [`FiniteCover::from_element`] this is `|G|` times
//! the coefficient trace `Σ_{c∈⟨h⟩} tr A_c`.

use num_complex::Complex64;

use super::SpectralMeasure;
use crate::algebra::AlgebraElement;
use crate::groups::{ConjugacyClass, Element, Group};
use crate::linalg::{self, CMat, ZERO};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct FiniteCover {
    group: Group,
    matrix: CMat,
    deck: Vec<(Element, CMat)>,
    /// Block size when the action is the regular one in the element order of
    /// `deck`, so that `f(H)` is an element of the group algebra.
    regular: Option<usize>,
    evals: Vec<f64>,
    evecs: CMat,
}

const CHECK_TOL: f64 = 1e-10;

impl FiniteCover {
    /// Verifies the deck action: every element appears once, each `U_g` is
    /// unitary, `U_g U_k = U_{gk}`, and each commutes with `H = H*`.
    pub fn new(group: &Group, matrix: CMat, deck: Vec<(Element, CMat)>) -> Result<Self> {
        let order = group
            .order()
            .ok_or_else(|| Error::Precondition(format!("finite-cover backend needs a finite group; {group} is infinite")))?;
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::Shape("operator matrix is not square".into()));
        }
        let scale = 1.0 + matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if linalg::hermitian_defect(&matrix) > CHECK_TOL * scale {
            return Err(Error::Precondition("operator matrix is not Hermitian".into()));
        }
        if deck.len() as u64 != order {
            return Err(Error::Shape(format!("deck has {} operators for a group of order {order}", deck.len())));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (g, u) in &deck {
            group.validate(g)?;
            if !seen.insert(g.clone()) {
                return Err(Error::Shape(format!("deck lists {} twice", group.format(g))));
            }
            if u.nrows() != n || u.ncols() != n {
                return Err(Error::Shape("deck operator dimension differs from the operator".into()));
            }
            let id = CMat::identity(n, n);
            if (u * u.adjoint() - &id).iter().any(|z| z.norm() > CHECK_TOL) {
                return Err(Error::Precondition(format!("deck operator for {} is not unitary", group.format(g))));
            }
            if (u * &matrix - &matrix * u).iter().any(|z| z.norm() > CHECK_TOL * scale) {
                return Err(Error::Precondition(format!(
                    "operator does not commute with the deck action of {}",
                    group.format(g)
                )));
            }
        }
        let lookup = |g: &Element| deck.iter().find(|(k, _)| k == g).map(|(_, u)| u);
        for (g, u) in &deck {
            for (k, v) in &deck {
                let gk = group.multiply(g, k);
                let w = lookup(&gk).expect("deck covers the group");
                if (u * v - w).iter().any(|z| z.norm() > CHECK_TOL) {
                    return Err(Error::Precondition("deck operators do not form a representation".into()));
                }
            }
        }
        let (evals, evecs) = linalg::hermitian_eigen(&matrix);
        Ok(FiniteCover { group: group.clone(), matrix, deck, regular: None, evals, evecs })
    }

    /// `H` acting on `ℓ²(G) ⊗ ℂ^d` by `(Hξ)(x) = Σ_g A_g ξ(g⁻¹x)`, with
    /// `G` acting by right translation `(U_γξ)(x) = ξ(xγ)`.
    pub fn from_element(a: &AlgebraElement) -> Result<Self> {
        let group = a.group();
        if group.order().is_none() {
            return Err(Error::Precondition(format!("finite-cover backend needs a finite group; {group} is infinite")));
        }
        let elems = all_elements(group)?;
        let d = a.dim();
        let n = elems.len() * d;
        let index = |g: &Element| elems.iter().position(|x| x == g).expect("complete enumeration");
        let mut h = CMat::zeros(n, n);
        for (xi, x) in elems.iter().enumerate() {
            for (yi, y) in elems.iter().enumerate() {
                let g = group.multiply(x, &group.inverse(y));
                if let Some(b) = a.block(&g) {
                    for i in 0..d {
                        for j in 0..d {
                            h[(xi * d + i, yi * d + j)] = b[i * d + j];
                        }
                    }
                }
            }
        }
        let mut deck = Vec::with_capacity(elems.len());
        for gamma in &elems {
            let mut u = CMat::zeros(n, n);
            for (xi, x) in elems.iter().enumerate() {
                let yi = index(&group.multiply(x, gamma));
                for i in 0..d {
                    u[(xi * d + i, yi * d + i)] = Complex64::new(1.0, 0.0);
                }
            }
            deck.push((gamma.clone(), u));
        }
        let mut fc = Self::new(group, h, deck)?;
        fc.regular = Some(d);
        Ok(fc)
    }

    /// The same model in the basis `W`: `WHW*` with `WU_gW*`.
    pub fn conjugated(&self, w: &CMat) -> Result<Self> {
        let wh = w.adjoint();
        let deck = self.deck.iter().map(|(g, u)| (g.clone(), w * u * &wh)).collect();
        Self::new(&self.group, w * &self.matrix * &wh, deck)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn deck(&self) -> &[(Element, CMat)] {
        &self.deck
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.evals
    }

    pub fn is_regular(&self) -> bool {
        self.regular.is_some()
    }

    pub fn block_dim(&self) -> usize {
        self.regular.unwrap_or(self.matrix.nrows())
    }

    pub fn norm(&self) -> f64 {
        self.evals.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    /// Zero modes are eigenvalues below `10⁻¹²‖H‖`.
    pub fn gap(&self) -> (f64, usize) {
        let tiny = 1e-12 * (1.0 + self.norm());
        let kernel = self.evals.iter().filter(|x| x.abs() <= tiny).count();
        let sigma = self.evals.iter().map(|x| x.abs()).filter(|&x| x > tiny).fold(f64::INFINITY, f64::min);
        (if sigma.is_finite() { sigma } else { 0.0 }, kernel)
    }

    /// `f(H)` as a group-algebra element; needs the regular action.
    pub fn calculus(&self, f: impl Fn(f64) -> Complex64) -> Result<AlgebraElement> {
        let d = self.regular.ok_or_else(|| {
            Error::Unsupported("functional calculus as an algebra element needs the regular deck action".into())
        })?;
        let fh = linalg::hermitian_apply(&self.evals, &self.evecs, f);
        let elems: Vec<&Element> = self.deck.iter().map(|(g, _)| g).collect();
        let e = elems.iter().position(|g| self.group.is_identity(g)).expect("identity present");
        // Block (g, e) of L_A is A_g.
        let blocks = elems.iter().enumerate().map(|(gi, g)| {
            let mut b = vec![ZERO; d * d];
            for i in 0..d {
                for j in 0..d {
                    b[i * d + j] = fh[(gi * d + i, e * d + j)];
                }
            }
            ((*g).clone(), b)
        });
        AlgebraElement::from_blocks(&self.group, d, blocks.collect::<Vec<_>>())
    }

    /// `c_j = Σ_{γ∈⟨h⟩} ⟨ψ_j, U_γ ψ_j⟩`, so that `Σ_γ tr(f(H)U_γ) = Σ_j f(λ_j) c_j`.
    pub fn measure(&self, class: &ConjugacyClass) -> Result<SpectralMeasure> {
        if class.group().kind() != self.group.kind() {
            return Err(Error::Shape("class and operator live over different groups".into()));
        }
        let n = self.evals.len();
        let mut sum = CMat::zeros(n, n);
        for (g, u) in &self.deck {
            if class.contains(g) {
                sum += u;
            }
        }
        let weights = (0..n)
            .map(|j| {
                let psi = self.evecs.column(j);
                (psi.adjoint() * &sum * psi)[(0, 0)]
            })
            .collect();
        Ok(SpectralMeasure::new(self.evals.clone(), weights))
    }
}

/// All elements of a finite group, in ball order.
pub(crate) fn all_elements(group: &Group) -> Result<Vec<Element>> {
    let order = group.order().ok_or_else(|| Error::Precondition("group is infinite".into()))? as usize;
    let mut r = 0;
    loop {
        let b = group.ball(r)?;
        if b.len() == order {
            return Ok(b.elements.clone());
        }
        r += 1;
    }
}
