//! Cyclic cochains on group algebras.
//!
//! A cochain of degree `n` is a function of `n+1` group elements, extended
//! multilinearly to the algebra. Cochains are evaluated lazily; each carries
//! an optional delocalized support class, a growth envelope and a flag for
//! normalization. Pairing with algebra elements goes through
//! [`Cochain::pair`], which concrete cochains may override with faster or
//! structured formulas, and through [`Cochain::pair_spectral`] for abelian
//! groups in the Fourier picture.

mod chern;
pub mod checks;
mod pair;

pub use chern::{connes_chern, Idempotent};
pub use pair::{pair_brute, Slot};

use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rustc_hash::FxHashMap;
use serde::Serialize;

use crate::algebra::{AlgebraElement, SpectralElement};
use crate::groups::{ConjugacyClass, Element, Group};
use crate::linalg::{self, ZERO};
use crate::{Error, Result};

/// Declared envelope for `|φ(g₀,…,g_n)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Growth {
    Bounded { c: f64 },
    /// `C·Π(1+ℓ(g_i))^k`.
    Polynomial { c: f64, k: f64 },
    /// `C·e^{K Σℓ(g_i)}`.
    Exponential { c: f64, k: f64 },
}

impl Growth {
    pub fn bound(&self, lengths: &[usize]) -> f64 {
        match *self {
            Growth::Bounded { c } => c,
            Growth::Polynomial { c, k } => c * lengths.iter().map(|&l| (1.0 + l as f64).powf(k)).product::<f64>(),
            Growth::Exponential { c, k } => c * (k * lengths.iter().sum::<usize>() as f64).exp(),
        }
    }

    /// Exponential rate `K_φ`; zero for bounded and polynomial envelopes.
    pub fn rate(&self) -> f64 {
        match *self {
            Growth::Exponential { k, .. } => k,
            _ => 0.0,
        }
    }

    pub fn scaled(self, f: f64) -> Growth {
        match self {
            Growth::Bounded { c } => Growth::Bounded { c: c * f },
            Growth::Polynomial { c, k } => Growth::Polynomial { c: c * f, k },
            Growth::Exponential { c, k } => Growth::Exponential { c: c * f, k },
        }
    }
}

pub trait Cochain: Send + Sync {
    fn group(&self) -> &Group;
    fn degree(&self) -> usize;
    fn eval(&self, g: &[Element]) -> Complex64;
    fn support_class(&self) -> Option<&ConjugacyClass>;
    fn growth(&self) -> Growth;
    fn normalized(&self) -> bool;
    fn name(&self) -> String;

    /// `φ#tr(w₀,…,w_n) = Σ tr(w₀^{g₀}⋯w_n^{g_n}) φ(g₀,…,g_n)`.
    fn pair(&self, w: &[&AlgebraElement]) -> Result<Complex64> {
        pair_brute(self, w)
    }

    /// The same pairing with every slot given by its symbol.
    fn pair_spectral(&self, _w: &[&SpectralElement]) -> Result<Complex64> {
        Err(Error::Unsupported(format!("{} has no Fourier-side pairing", self.name())))
    }

    /// Whether [`Cochain::pair_spectral`] reads first derivatives of the slots.
    fn spectral_needs_jets(&self) -> bool {
        false
    }
}

pub type CochainRef = Arc<dyn Cochain>;

fn check_arity(phi: &(impl Cochain + ?Sized), n: usize) -> Result<()> {
    if n != phi.degree() + 1 {
        return Err(Error::Shape(format!("{} has degree {} but received {n} slots", phi.name(), phi.degree())));
    }
    Ok(())
}

/// Degree-0 delocalized trace `tr_⟨h⟩(g) = [g ∈ ⟨h⟩]`.
pub struct ClassTrace {
    class: ConjugacyClass,
}

impl ClassTrace {
    pub fn new(class: ConjugacyClass) -> Self {
        ClassTrace { class }
    }
}

impl Cochain for ClassTrace {
    fn group(&self) -> &Group {
        self.class.group()
    }
    fn degree(&self) -> usize {
        0
    }
    fn eval(&self, g: &[Element]) -> Complex64 {
        if self.class.contains(&g[0]) {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO
        }
    }
    fn support_class(&self) -> Option<&ConjugacyClass> {
        Some(&self.class)
    }
    fn growth(&self) -> Growth {
        Growth::Bounded { c: 1.0 }
    }
    fn normalized(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("tr<{}>", self.class.group().format(self.class.representative()))
    }
    fn pair(&self, w: &[&AlgebraElement]) -> Result<Complex64> {
        check_arity(self, w.len())?;
        Ok(w[0].class_trace(&self.class))
    }
    fn pair_spectral(&self, w: &[&SpectralElement]) -> Result<Complex64> {
        check_arity(self, w.len())?;
        if !self.class.is_singleton() {
            return Err(Error::Unsupported("Fourier pairing needs a singleton class".into()));
        }
        Ok(w[0].trace_coefficient(self.class.representative()))
    }
}

/// Delocalized area 2-cocycle `φ(g₀,g₁,g₂) = [g₀g₁g₂ = h]·det(πg₁, πg₂)`,
/// where `π` reads the first two lattice coordinates. It needs `πh = 0`, so on
/// a product `ℤ²×F` with finite `F` the class of a torsion element `h` works.
pub struct AreaCocycle {
    group: Group,
    class: ConjugacyClass,
}

impl AreaCocycle {
    pub fn new(group: &Group, h: Element) -> Result<Self> {
        if group.lattice_rank() < 2 || !group.is_abelian() {
            return Err(Error::Precondition("area cocycle needs an abelian group of lattice rank ≥ 2".into()));
        }
        let (lat, _) = group.abelian_coords(&h);
        if lat.iter().any(|&x| x != 0) {
            return Err(Error::Precondition(format!(
                "area cocycle needs a torsion class; {} has a lattice component",
                group.format(&h)
            )));
        }
        Ok(AreaCocycle { group: group.clone(), class: ConjugacyClass::new(group, h)? })
    }

    fn det(&self, a: &Element, b: &Element) -> f64 {
        let (x, _) = self.group.abelian_coords(a);
        let (y, _) = self.group.abelian_coords(b);
        x[0] as f64 * y[1] as f64 - x[1] as f64 * y[0] as f64
    }
}

impl Cochain for AreaCocycle {
    fn group(&self) -> &Group {
        &self.group
    }
    fn degree(&self) -> usize {
        2
    }
    fn eval(&self, g: &[Element]) -> Complex64 {
        if self.group.product_of(g) != *self.class.representative() {
            return ZERO;
        }
        Complex64::new(self.det(&g[1], &g[2]), 0.0)
    }
    fn support_class(&self) -> Option<&ConjugacyClass> {
        Some(&self.class)
    }
    fn growth(&self) -> Growth {
        // |det(x, y)| ≤ ℓ(x)ℓ(y) for the L¹ word length.
        Growth::Polynomial { c: 1.0, k: 1.0 }
    }
    fn normalized(&self) -> bool {
        true
    }
    fn name(&self) -> String {
        format!("area<{}>", self.group.format(self.class.representative()))
    }
    fn spectral_needs_jets(&self) -> bool {
        true
    }
    /// `tr[w₀ (X₁w₁)(X₂w₂) − w₀ (X₂w₁)(X₁w₂)]_h` with `(X_j w)_g = g_j w_g`,
    /// whose symbol is `−i ∂_j ŵ`.
    fn pair_spectral(&self, w: &[&SpectralElement]) -> Result<Complex64> {
        check_arity(self, w.len())?;
        let (d1x, d1y) = match (w[1].jet(0), w[1].jet(1)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Precondition("area pairing needs slot derivatives".into())),
        };
        let (d2x, d2y) = match (w[2].jet(0), w[2].jet(1)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Precondition("area pairing needs slot derivatives".into())),
        };
        let grid = w[0].grid();
        let d = w[0].dim();
        let d2 = d * d;
        let v0 = w[0].values();
        let mut field = vec![ZERO; grid.points()];
        let mut m = vec![ZERO; d2];
        for (p, f) in field.iter_mut().enumerate() {
            let r = p * d2..(p + 1) * d2;
            m.iter_mut().for_each(|x| *x = ZERO);
            linalg::mul_add(&d1x[r.clone()], &d2y[r.clone()], d, &mut m);
            let neg: Vec<Complex64> = d1y[r.clone()].iter().map(|x| -x).collect();
            linalg::mul_add(&neg, &d2x[r.clone()], d, &mut m);
            *f = -linalg::trace_of_product(&v0[r], &m, d);
        }
        Ok(SpectralElement::average_scalar(grid, &field, self.class.representative()))
    }
}

/// Deterministic pseudo-random cyclic cochain with exponential growth:
/// `ψ(g) = [Πg ∈ ⟨h⟩]·C e^{K Σℓ(g_i)} Σ_k (−1)^{nk} u(σ^k g)` where `σ` rotates
/// the tuple and `u` hashes a tuple to `[−1, 1]`.
pub struct RandomCyclic {
    group: Group,
    degree: usize,
    class: Option<ConjugacyClass>,
    c: f64,
    k: f64,
    seed: u64,
}

impl RandomCyclic {
    pub fn new(group: &Group, degree: usize, class: Option<ConjugacyClass>, c: f64, k: f64, seed: u64) -> Self {
        RandomCyclic { group: group.clone(), degree, class, c, k, seed }
    }

    fn u(&self, g: &[Element], start: usize) -> f64 {
        let n = g.len();
        let mut h = splitmix(self.seed ^ 0x5eed);
        for i in 0..n {
            for &x in g[(start + i) % n].code() {
                h = splitmix(h ^ (x as i64 as u64));
            }
            h = splitmix(h ^ 0xfeed_beef);
        }
        (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }
}

pub(crate) fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Cochain for RandomCyclic {
    fn group(&self) -> &Group {
        &self.group
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval(&self, g: &[Element]) -> Complex64 {
        if let Some(cl) = &self.class {
            if !cl.contains(&self.group.product_of(g)) {
                return ZERO;
            }
        }
        let n = self.degree;
        let mut s = 0.0;
        for k in 0..=n {
            let sign = if (n * k) % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * self.u(g, k);
        }
        let len: usize = g.iter().map(|x| self.group.word_length(x)).sum();
        Complex64::new(self.c * (self.k * len as f64).exp() * s, 0.0)
    }
    fn support_class(&self) -> Option<&ConjugacyClass> {
        self.class.as_ref()
    }
    fn growth(&self) -> Growth {
        Growth::Exponential { c: self.c * (self.degree + 1) as f64, k: self.k }
    }
    fn normalized(&self) -> bool {
        false
    }
    fn name(&self) -> String {
        format!("random{}[seed={}]", self.degree, self.seed)
    }
}

/// Cochain given by a finite table; zero off the table.
pub struct TableCochain {
    group: Group,
    degree: usize,
    class: Option<ConjugacyClass>,
    values: FxHashMap<Vec<Element>, Complex64>,
    name: String,
}

impl TableCochain {
    pub fn new(
        group: &Group,
        degree: usize,
        class: Option<ConjugacyClass>,
        values: impl IntoIterator<Item = (Vec<Element>, Complex64)>,
        name: &str,
    ) -> Result<Self> {
        let mut map = FxHashMap::default();
        for (k, v) in values {
            if k.len() != degree + 1 {
                return Err(Error::Shape(format!("table entry with {} arguments for degree {degree}", k.len())));
            }
            for g in &k {
                group.validate(g)?;
            }
            map.insert(k, v);
        }
        Ok(TableCochain { group: group.clone(), degree, class, values: map, name: name.to_string() })
    }
}

impl Cochain for TableCochain {
    fn group(&self) -> &Group {
        &self.group
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval(&self, g: &[Element]) -> Complex64 {
        self.values.get(g).copied().unwrap_or(ZERO)
    }
    fn support_class(&self) -> Option<&ConjugacyClass> {
        self.class.as_ref()
    }
    fn growth(&self) -> Growth {
        Growth::Bounded { c: self.values.values().map(|z| z.norm()).fold(0.0, f64::max) }
    }
    fn normalized(&self) -> bool {
        false
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

type EvalFn = dyn Fn(&[Element]) -> Complex64 + Send + Sync;

/// Cochain from a closure, with caller-declared metadata.
pub struct FnCochain {
    group: Group,
    degree: usize,
    class: Option<ConjugacyClass>,
    growth: Growth,
    normalized: bool,
    name: String,
    f: Box<EvalFn>,
}

impl FnCochain {
    pub fn new(
        group: &Group,
        degree: usize,
        class: Option<ConjugacyClass>,
        growth: Growth,
        normalized: bool,
        name: &str,
        f: impl Fn(&[Element]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        FnCochain { group: group.clone(), degree, class, growth, normalized, name: name.into(), f: Box::new(f) }
    }
}

impl Cochain for FnCochain {
    fn group(&self) -> &Group {
        &self.group
    }
    fn degree(&self) -> usize {
        self.degree
    }
    fn eval(&self, g: &[Element]) -> Complex64 {
        (self.f)(g)
    }
    fn support_class(&self) -> Option<&ConjugacyClass> {
        self.class.as_ref()
    }
    fn growth(&self) -> Growth {
        self.growth
    }
    fn normalized(&self) -> bool {
        self.normalized
    }
    fn name(&self) -> String {
        self.name.clone()
    }
}

/// `(bφ)(g₀,…,g_{n+1}) = Σ_{i≤n} (−1)^i φ(…, g_i g_{i+1}, …) + (−1)^{n+1} φ(g_{n+1}g₀, g₁, …, g_n)`.
pub fn coboundary_eval(phi: &(impl Cochain + ?Sized), g: &[Element]) -> Complex64 {
    let group = phi.group();
    let n = phi.degree();
    debug_assert_eq!(g.len(), n + 2);
    let mut total = ZERO;
    let mut args: Vec<Element> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        args.clear();
        args.extend_from_slice(&g[..i]);
        args.push(group.multiply(&g[i], &g[i + 1]));
        args.extend_from_slice(&g[i + 2..]);
        let v = phi.eval(&args);
        total += if i % 2 == 0 { v } else { -v };
    }
    args.clear();
    args.push(group.multiply(&g[n + 1], &g[0]));
    args.extend_from_slice(&g[1..=n]);
    let v = phi.eval(&args);
    total += if (n + 1) % 2 == 0 { v } else { -v };
    total
}

pub struct Coboundary {
    inner: CochainRef,
}

impl Coboundary {
    pub fn new(inner: CochainRef) -> Self {
        Coboundary { inner }
    }

    /// Slot products `[(w₀w₁, w₂, …), (w₀, w₁w₂, …), …, (w_{n+1}w₀, w₁, …)]` with signs.
    fn pullback<S: Slot>(&self, w: &[&S]) -> Result<Vec<(f64, Vec<S>)>> {
        let n = self.inner.degree();
        let mut terms = Vec::with_capacity(n + 2);
        for i in 0..=n {
            let mut args: Vec<S> = Vec::with_capacity(n + 1);
            args.extend(w[..i].iter().map(|x| (*x).clone()));
            args.push(w[i].times(w[i + 1])?);
            args.extend(w[i + 2..].iter().map(|x| (*x).clone()));
            terms.push((if i % 2 == 0 { 1.0 } else { -1.0 }, args));
        }
        let mut args: Vec<S> = vec![w[n + 1].times(w[0])?];
        args.extend(w[1..=n].iter().map(|x| (*x).clone()));
        terms.push((if (n + 1) % 2 == 0 { 1.0 } else { -1.0 }, args));
        Ok(terms)
    }
}

impl Cochain for Coboundary {
    fn group(&self) -> &Group {
        self.inner.group()
    }
    fn degree(&self) -> usize {
        self.inner.degree() + 1
    }
    fn eval(&self, g: &[Element]) -> Complex64 {
        coboundary_eval(self.inner.as_ref(), g)
    }
    fn support_class(&self) -> Option<&ConjugacyClass> {
        self.inner.support_class()
    }
    fn growth(&self) -> Growth {
        // Each of the n+2 terms obeys the inner envelope by subadditivity of ℓ.
        self.inner.growth().scaled((self.inner.degree() + 2) as f64)
    }
    fn normalized(&self) -> bool {
        self.inner.normalized()
    }
    fn name(&self) -> String {
        format!("b({})", self.inner.name())
    }
    fn pair(&self, w: &[&AlgebraElement]) -> Result<Complex64> {
        check_arity(self, w.len())?;
        let mut total = ZERO;
        for (s, args) in self.pullback(w)? {
            let refs: Vec<&AlgebraElement> = args.iter().collect();
            total += self.inner.pair(&refs)? * s;
        }
        Ok(total)
    }
    fn pair_spectral(&self, w: &[&SpectralElement]) -> Result<Complex64> {
        check_arity(self, w.len())?;
        let mut total = ZERO;
        for (s, args) in self.pullback(w)? {
            let refs: Vec<&SpectralElement> = args.iter().collect();
            total += self.inner.pair_spectral(&refs)? * s;
        }
        Ok(total)
    }
    fn spectral_needs_jets(&self) -> bool {
        self.inner.spectral_needs_jets()
    }
}

/// A term of the periodicity expansion: a signed list of consecutive index
/// ranges, one per argument of the degree-`n` cochain.
pub type OmegaTerm = (f64, Vec<Range<usize>>);

/// Right multiplication of a form `x₀ dx₁ ⋯ dx_k` by `x`:
/// `(ω dx_k)·x = ω d(x_k x) − (ω·x_k) dx`.
fn omega_mul(form: &[Range<usize>], coef: f64, r: Range<usize>, out: &mut Vec<OmegaTerm>) {
    let k = form.len() - 1;
    if k == 0 {
        out.push((coef, vec![form[0].start..r.end]));
        return;
    }
    let mut first = form.to_vec();
    first[k] = form[k].start..r.end;
    out.push((coef, first));
    let mut inner = Vec::new();
    omega_mul(&form[..k], -coef, form[k].clone(), &mut inner);
    for (c, mut f) in inner {
        f.push(r.clone());
        out.push((c, f));
    }
}

/// Expansion of `Sφ(a₀,…,a_{n+2}) = Σ_{j=1}^{n+1} φ̂(a₀da₁⋯da_{j−1}·(a_j a_{j+1})·da_{j+2}⋯da_{n+2})`
/// into products of consecutive arguments, before the factor `1/((n+2)(n+1))`.
pub fn omega_terms(n: usize) -> Vec<OmegaTerm> {
    let mut terms = Vec::new();
    for j in 1..=n + 1 {
        let form: Vec<Range<usize>> = (0..j).map(|i| i..i + 1).collect();
        let mut expanded = Vec::new();
        omega_mul(&form, 1.0, j..j + 2, &mut expanded);
        for (c, mut f) in expanded {
            f.extend((j + 2..n + 3).map(|i| i..i + 1));
            debug_assert_eq!(f.len(), n + 1);
            terms.push((c, f));
        }
    }
    terms
}

/// Connes' periodicity operator on cocycles, in its differential-form
/// expression with normalization `1/((n+2)(n+1))`.
pub struct Periodicity {
    inner: CochainRef,
    terms: Vec<OmegaTerm>,
    scale: f64,
}

impl Periodicity {
    /// Checks the cocycle property on sampled tuples first.
    pub fn new(inner: CochainRef) -> Result<Self> {
        let report = checks::check_cocycle(inner.as_ref(), 2, 20_000, checks::DEFAULT_SEED, 1e-9)?;
        if !report.passed {
            return Err(Error::Precondition(format!(
                "periodicity needs a cocycle; {} fails bφ = 0 (defect {:.3e}, witness {:?})",
                inner.name(),
                report.max_defect,
                report.witness
            )));
        }
        Ok(Self::unchecked(inner))
    }

    pub fn unchecked(inner: CochainRef) -> Self {
        let n = inner.degree();
        Periodicity { terms: omega_terms(n), scale: 1.0 / ((n + 2) * (n + 1)) as f64, inner }
    }

    pub fn terms(&self) -> &[OmegaTerm] {
        &self.terms
    }

    fn pair_via<S: Slot>(&self, w: &[&S], pair: impl Fn(&[&S]) -> Result<Complex64>) -> Result<Complex64> {
        check_arity(self, w.len())?;
        let mut cache: FxHashMap<(usize, usize), S> = FxHashMap::default();
        let mut total = ZERO;
        for (c, ranges) in &self.terms {
            for r in ranges {
                if r.len() > 1 && !cache.contains_key(&(r.start, r.end)) {
                    let mut p = w[r.start].clone();
                    for x in &w[r.start + 1..r.end] {
                        p = p.times(x)?;
                    }
                    cache.insert((r.start, r.end), p);
                }
            }
            let args: Vec<&S> =
                ranges.iter().map(|r| if r.len() == 1 { w[r.start] } else { &cache[&(r.start, r.end)] }).collect();
            total += pair(&args)? * *c;
        }
        Ok(total * self.scale)
    }
}

impl Cochain for Periodicity {
    fn group(&self) -> &Group {
        self.inner.group()
    }
    fn degree(&self) -> usize {
        self.inner.degree() + 2
    }
    fn eval(&self, g: &[Element]) -> Complex64 {
        let group = self.inner.group();
        let mut total = ZERO;
        let mut args = Vec::with_capacity(self.inner.degree() + 1);
        for (c, ranges) in &self.terms {
            args.clear();
            for r in ranges {
                args.push(group.product_of(&g[r.clone()]));
            }
            total += self.inner.eval(&args) * *c;
        }
        total * self.scale
    }
    fn support_class(&self) -> Option<&ConjugacyClass> {
        self.inner.support_class()
    }
    fn growth(&self) -> Growth {
        // Products only shorten words: 1+ℓ(xy) ≤ (1+ℓx)(1+ℓy) and ℓ(xy) ≤ ℓx+ℓy.
        self.inner.growth().scaled(self.scale * self.terms.len() as f64)
    }
    fn normalized(&self) -> bool {
        false
    }
    fn name(&self) -> String {
        format!("S({})", self.inner.name())
    }
    fn pair(&self, w: &[&AlgebraElement]) -> Result<Complex64> {
        self.pair_via(w, |args| self.inner.pair(args))
    }
    fn pair_spectral(&self, w: &[&SpectralElement]) -> Result<Complex64> {
        self.pair_via(w, |args| self.inner.pair_spectral(args))
    }
    fn spectral_needs_jets(&self) -> bool {
        self.inner.spectral_needs_jets()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{GroupKind, GroupModel};
    use serde_json::json;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn omega_terms_degree_two() {
        // Hand expansion of the three j-terms for n = 2.
        let mut t = omega_terms(2);
        t.sort_by(|a, b| format!("{:?}", a.1).cmp(&format!("{:?}", b.1)));
        let mut expect: Vec<OmegaTerm> = vec![
            (1.0, vec![0..3, 3..4, 4..5]),
            (1.0, vec![0..1, 1..4, 4..5]),
            (-1.0, vec![0..2, 2..4, 4..5]),
            (1.0, vec![0..1, 1..2, 2..5]),
            (-1.0, vec![0..1, 1..3, 3..5]),
            (1.0, vec![0..2, 2..3, 3..5]),
        ];
        expect.sort_by(|a, b| format!("{:?}", a.1).cmp(&format!("{:?}", b.1)));
        assert_eq!(t, expect);
        assert_eq!(omega_terms(0), vec![(1.0, vec![0..3])]);
    }

    fn z5_trace(h: i64) -> (Group, CochainRef) {
        let g = GroupModel::cyclic(5);
        let c = ConjugacyClass::new(&g, g.parse_element(&json!(h)).unwrap()).unwrap();
        (g, Arc::new(ClassTrace::new(c)))
    }

    #[test]
    fn periodicity_of_trace_by_hand() {
        // S(tr)(g₀,g₁,g₂) = ½ tr(g₀g₁g₂).
        let (g, tr) = z5_trace(2);
        let s = Periodicity::new(tr).unwrap();
        for a in 0..5 {
            for b in 0..5 {
                for c in 0..5 {
                    let args: Vec<Element> = [a, b, c].iter().map(|x| g.parse_element(&json!(x)).unwrap()).collect();
                    let expect = if (a + b + c) % 5 == 2 { 0.5 } else { 0.0 };
                    assert_eq!(s.eval(&args), re(expect));
                }
            }
        }
    }

    #[test]
    fn periodicity_unit_ratio() {
        // (Sφ#tr)(1,1,1) = ½ φ#tr(1) for the trivial-class trace.
        let g = GroupModel::cyclic(3);
        let tr: CochainRef = Arc::new(ClassTrace::new(ConjugacyClass::new(&g, g.identity()).unwrap()));
        let s = Periodicity::new(tr.clone()).unwrap();
        let one = AlgebraElement::unit(&g, 1);
        let lhs = s.pair(&[&one, &one, &one]).unwrap();
        let rhs = tr.pair(&[&one]).unwrap();
        assert!((lhs - rhs * 0.5).norm() < 1e-15);
        let brute = pair_brute(&s, &[&one, &one, &one]).unwrap();
        assert!((brute - lhs).norm() < 1e-15);
    }

    #[test]
    fn periodicity_of_zero_is_zero() {
        let g = GroupModel::free_abelian(2);
        let zero: CochainRef = Arc::new(FnCochain::new(&g, 2, None, Growth::Bounded { c: 0.0 }, true, "0", |_| ZERO));
        let s = Periodicity::new(zero).unwrap();
        let b = g.ball(1).unwrap();
        for x in &b.elements {
            assert_eq!(s.eval(&[x.clone(), x.clone(), g.identity(), x.clone(), x.clone()]), ZERO);
        }
    }

    #[test]
    fn periodicity_rejects_non_cocycles() {
        let g = GroupModel::free_abelian(2);
        let psi: CochainRef = Arc::new(FnCochain::new(&g, 1, None, Growth::Polynomial { c: 1.0, k: 1.0 }, false, "x0*x1", {
            let g = g.clone();
            move |x| {
                let (a, _) = g.abelian_coords(&x[0]);
                let (b, _) = g.abelian_coords(&x[1]);
                re((a[0] * b[0]) as f64)
            }
        }));
        assert!(matches!(Periodicity::new(psi), Err(Error::Precondition(_))));
    }

    #[test]
    fn area_cocycle_needs_torsion_class() {
        let g = GroupModel::free_abelian(2);
        assert!(AreaCocycle::new(&g, g.parse_element(&json!([1, 0])).unwrap()).is_err());
        assert!(AreaCocycle::new(&g, g.identity()).is_ok());
        let g = GroupModel::product(vec![GroupKind::FreeAbelian { rank: 2 }, GroupKind::Cyclic { order: 2 }]);
        assert!(AreaCocycle::new(&g, g.parse_element(&json!([[0, 0], 1])).unwrap()).is_ok());
        assert!(AreaCocycle::new(&GroupModel::free(2), GroupModel::free(2).identity()).is_err());
    }

    #[test]
    fn random_cyclic_is_deterministic() {
        let g = GroupModel::free_abelian(1);
        let a = RandomCyclic::new(&g, 1, None, 1.0, 0.1, 9);
        let b = RandomCyclic::new(&g, 1, None, 1.0, 0.1, 9);
        let x = vec![g.lattice(&[2]).unwrap(), g.lattice(&[-1]).unwrap()];
        assert_eq!(a.eval(&x), b.eval(&x));
        assert_ne!(a.eval(&x), RandomCyclic::new(&g, 1, None, 1.0, 0.1, 10).eval(&x));
    }

    #[test]
    fn spectral_pairings_match_brute_force() {
        use crate::algebra::{tests::random_element, DualGrid};
        use rand::SeedableRng;
        let g = GroupModel::product(vec![GroupKind::FreeAbelian { rank: 2 }, GroupKind::Cyclic { order: 2 }]);
        let h = g.parse_element(&json!([[0, 0], 1])).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let w: Vec<AlgebraElement> = (0..5).map(|_| random_element(&g, 2, 2, &mut rng)).collect();
        let grid = DualGrid::new(&g, 16).unwrap();
        let ws: Vec<SpectralElement> = w.iter().map(|a| SpectralElement::from_algebra(&grid, a, true).unwrap()).collect();
        let area: CochainRef = Arc::new(AreaCocycle::new(&g, h).unwrap());
        let s = Periodicity::new(area.clone()).unwrap();
        let cases: Vec<(&dyn Cochain, usize)> = vec![(area.as_ref(), 3), (&s, 5)];
        for (phi, k) in cases {
            let wr: Vec<&AlgebraElement> = w[..k].iter().collect();
            let sr: Vec<&SpectralElement> = ws[..k].iter().collect();
            let brute = pair_brute(phi, &wr).unwrap();
            let fast = phi.pair(&wr).unwrap();
            let spec = phi.pair_spectral(&sr).unwrap();
            assert!(brute.norm() > 1e-3, "{}: {brute} {:?}", phi.name(), phi.pair_spectral(&sr));
            assert!((brute - fast).norm() < 1e-10 * (1.0 + brute.norm()), "{}", phi.name());
            assert!((brute - spec).norm() < 1e-10 * (1.0 + brute.norm()), "{}: {brute} vs {spec}", phi.name());
        }
    }
}
