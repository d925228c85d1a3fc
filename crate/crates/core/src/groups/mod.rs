//! Finitely generated group models with word metrics.
//!
//! Every element is kept in a canonical normal form, so equality of elements
//! is equality of their encodings and the word problem never has to be solved.
//! A group is a direct product of atomic factors: free abelian lattices with
//! the standard basis, finite cyclic groups generated by `±1`, and free groups
//! on `r` letters. Word length is taken with respect to the union of the
//! factor generating sets, hence it is additive over factors.

mod class;
mod growth;

pub use class::{min_conjugator_length, ConjugacyClass};
pub use growth::{growth_constants, GrowthConstants};

use std::fmt;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use smallvec::SmallVec;

use crate::{Error, Result};

/// Default cap on the number of elements a ball enumeration may produce.
pub const DEFAULT_BALL_BUDGET: usize = 1_000_000;

/// Encoded group element. Lattice factors contribute their coordinates,
/// cyclic factors a residue, free factors a length prefix followed by the
/// reduced word (letters `±1..=±r`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Element(pub(crate) SmallVec<[i32; 8]>);

impl Element {
    pub fn code(&self) -> &[i32] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupKind {
    FreeAbelian { rank: usize },
    Cyclic { order: u32 },
    Free { rank: usize },
    Product { factors: Vec<GroupKind> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    Lattice(usize),
    Cyclic(u32),
    Free(usize),
}

impl Factor {
    fn is_abelian(self) -> bool {
        match self {
            Factor::Free(r) => r <= 1,
            _ => true,
        }
    }
}

/// A concrete group model. Shared through [`Group`].
#[derive(Debug)]
pub struct GroupModel {
    kind: GroupKind,
    factors: Vec<Factor>,
    generators: Vec<Element>,
    budget: usize,
}

pub type Group = Arc<GroupModel>;

/// Enumerated ball with an index for O(1) lookup.
#[derive(Clone, Debug)]
pub struct Ball {
    pub radius: usize,
    pub elements: Vec<Element>,
    /// `sphere_start[n]` is the offset of the first element of length `n`;
    /// has `radius + 2` entries.
    pub sphere_start: Vec<usize>,
    index: FxHashMap<Element, usize>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.elements.len()
    }
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
    pub fn index_of(&self, g: &Element) -> Option<usize> {
        self.index.get(g).copied()
    }
    pub fn contains(&self, g: &Element) -> bool {
        self.index.contains_key(g)
    }
    pub fn sphere(&self, n: usize) -> &[Element] {
        &self.elements[self.sphere_start[n]..self.sphere_start[n + 1]]
    }
    pub fn length_of_index(&self, i: usize) -> usize {
        self.sphere_start.partition_point(|&s| s <= i) - 1
    }
}

fn flatten(kind: &GroupKind, out: &mut Vec<Factor>) -> Result<()> {
    match kind {
        GroupKind::FreeAbelian { rank } => out.push(Factor::Lattice(*rank)),
        GroupKind::Cyclic { order } => {
            if *order == 0 {
                return Err(Error::Representation("cyclic group of order 0".into()));
            }
            out.push(Factor::Cyclic(*order))
        }
        GroupKind::Free { rank } => {
            if *rank > 26 {
                return Err(Error::Representation("free rank above 26 has no letter names".into()));
            }
            out.push(Factor::Free(*rank))
        }
        GroupKind::Product { factors } => {
            for f in factors {
                flatten(f, out)?;
            }
        }
    }
    Ok(())
}

impl GroupModel {
    pub fn new(kind: GroupKind) -> Result<Group> {
        Self::with_budget(kind, DEFAULT_BALL_BUDGET)
    }

    pub fn with_budget(kind: GroupKind, budget: usize) -> Result<Group> {
        let mut factors = Vec::new();
        flatten(&kind, &mut factors)?;
        let mut model = GroupModel { kind, factors, generators: Vec::new(), budget };
        model.generators = model.build_generators();
        Ok(Arc::new(model))
    }

    pub fn free_abelian(rank: usize) -> Group {
        Self::new(GroupKind::FreeAbelian { rank }).expect("lattice model")
    }
    pub fn cyclic(order: u32) -> Group {
        Self::new(GroupKind::Cyclic { order }).expect("cyclic model")
    }
    pub fn free(rank: usize) -> Group {
        Self::new(GroupKind::Free { rank }).expect("free model")
    }
    pub fn product(factors: Vec<GroupKind>) -> Group {
        Self::new(GroupKind::Product { factors }).expect("product model")
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }
    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }
    pub fn generators(&self) -> &[Element] {
        &self.generators
    }
    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn is_abelian(&self) -> bool {
        self.factors.iter().all(|f| f.is_abelian())
    }

    pub fn is_finite(&self) -> bool {
        self.factors.iter().all(|f| match f {
            Factor::Cyclic(_) => true,
            Factor::Lattice(d) => *d == 0,
            Factor::Free(r) => *r == 0,
        })
    }

    /// Polynomial growth holds exactly when no factor is a free group of rank ≥ 2.
    pub fn has_polynomial_growth(&self) -> bool {
        self.is_abelian()
    }

    pub fn order(&self) -> Option<u64> {
        if !self.is_finite() {
            return None;
        }
        Some(
            self.factors
                .iter()
                .map(|f| match f {
                    Factor::Cyclic(k) => *k as u64,
                    _ => 1,
                })
                .product(),
        )
    }

    /// Number of `ℤ` coordinates (lattice ranks summed).
    pub fn lattice_rank(&self) -> usize {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::Lattice(d) => *d,
                _ => 0,
            })
            .sum()
    }

    pub fn identity(&self) -> Element {
        let mut w = SmallVec::new();
        for f in &self.factors {
            match f {
                Factor::Lattice(d) => w.extend(std::iter::repeat_n(0, *d)),
                Factor::Cyclic(_) => w.push(0),
                Factor::Free(_) => w.push(0),
            }
        }
        Element(w)
    }

    pub fn is_identity(&self, g: &Element) -> bool {
        *g == self.identity()
    }

    /// Component slices of an encoded element, one per factor.
    pub(crate) fn split<'a>(&self, g: &'a [i32]) -> SmallVec<[&'a [i32]; 4]> {
        let mut out = SmallVec::new();
        let mut pos = 0;
        for f in &self.factors {
            match f {
                Factor::Lattice(d) => {
                    out.push(&g[pos..pos + d]);
                    pos += d;
                }
                Factor::Cyclic(_) => {
                    out.push(&g[pos..pos + 1]);
                    pos += 1;
                }
                Factor::Free(_) => {
                    let n = g[pos] as usize;
                    out.push(&g[pos + 1..pos + 1 + n]);
                    pos += 1 + n;
                }
            }
        }
        out
    }

    fn join(&self, parts: &[&[i32]]) -> Element {
        let mut w = SmallVec::new();
        for (f, p) in self.factors.iter().zip(parts) {
            if let Factor::Free(_) = f {
                w.push(p.len() as i32);
            }
            w.extend_from_slice(p);
        }
        Element(w)
    }

    fn build_generators(&self) -> Vec<Element> {
        let id = self.identity();
        let id_parts: Vec<Vec<i32>> = self.split(&id.0).iter().map(|s| s.to_vec()).collect();
        let mut gens = Vec::new();
        for (i, f) in self.factors.iter().enumerate() {
            let mut local: Vec<Vec<i32>> = Vec::new();
            match f {
                Factor::Lattice(d) => {
                    for j in 0..*d {
                        for s in [1, -1] {
                            let mut v = vec![0; *d];
                            v[j] = s;
                            local.push(v);
                        }
                    }
                }
                Factor::Cyclic(k) => {
                    if *k >= 2 {
                        local.push(vec![1]);
                        if *k > 2 {
                            local.push(vec![*k as i32 - 1]);
                        }
                    }
                }
                Factor::Free(r) => {
                    for j in 1..=*r as i32 {
                        local.push(vec![j]);
                        local.push(vec![-j]);
                    }
                }
            }
            for l in local {
                let mut parts: Vec<&[i32]> = id_parts.iter().map(|v| v.as_slice()).collect();
                parts[i] = &l;
                gens.push(self.join(&parts));
            }
        }
        gens
    }

    pub fn multiply(&self, a: &Element, b: &Element) -> Element {
        let pa = self.split(&a.0);
        let pb = self.split(&b.0);
        let mut w = SmallVec::with_capacity(a.0.len() + b.0.len());
        for ((f, x), y) in self.factors.iter().zip(pa).zip(pb) {
            match f {
                Factor::Lattice(_) => w.extend(x.iter().zip(y).map(|(p, q)| p + q)),
                Factor::Cyclic(k) => w.push(((x[0] as i64 + y[0] as i64) % *k as i64) as i32),
                Factor::Free(_) => {
                    let mut cancel = 0;
                    while cancel < x.len().min(y.len()) && x[x.len() - 1 - cancel] == -y[cancel] {
                        cancel += 1;
                    }
                    let n = x.len() + y.len() - 2 * cancel;
                    w.push(n as i32);
                    w.extend_from_slice(&x[..x.len() - cancel]);
                    w.extend_from_slice(&y[cancel..]);
                }
            }
        }
        Element(w)
    }

    pub fn inverse(&self, a: &Element) -> Element {
        let pa = self.split(&a.0);
        let mut w = SmallVec::with_capacity(a.0.len());
        for (f, x) in self.factors.iter().zip(pa) {
            match f {
                Factor::Lattice(_) => w.extend(x.iter().map(|p| -p)),
                Factor::Cyclic(k) => w.push(((*k as i64 - x[0] as i64) % *k as i64) as i32),
                Factor::Free(_) => {
                    w.push(x.len() as i32);
                    w.extend(x.iter().rev().map(|l| -l));
                }
            }
        }
        Element(w)
    }

    pub fn product_of(&self, gs: &[Element]) -> Element {
        let mut acc = self.identity();
        for g in gs {
            acc = self.multiply(&acc, g);
        }
        acc
    }

    /// `γ⁻¹ h γ`.
    pub fn conjugate(&self, gamma: &Element, h: &Element) -> Element {
        self.multiply(&self.multiply(&self.inverse(gamma), h), gamma)
    }

    pub fn word_length(&self, g: &Element) -> usize {
        let mut total = 0usize;
        for (f, x) in self.factors.iter().zip(self.split(&g.0)) {
            total += match f {
                Factor::Lattice(_) => x.iter().map(|v| v.unsigned_abs() as usize).sum(),
                Factor::Cyclic(k) => {
                    let r = x[0] as usize;
                    r.min(*k as usize - r)
                }
                Factor::Free(_) => x.len(),
            };
        }
        total
    }

    /// Checks that an encoding is a well-formed normal form for this group.
    pub fn validate(&self, g: &Element) -> Result<()> {
        let w = &g.0;
        let mut pos = 0;
        for f in &self.factors {
            match f {
                Factor::Lattice(d) => pos += d,
                Factor::Cyclic(k) => {
                    let r = *w.get(pos).ok_or_else(|| Error::Representation("truncated element".into()))?;
                    if r < 0 || r as u32 >= *k {
                        return Err(Error::Representation(format!("residue {r} outside [0,{k})")));
                    }
                    pos += 1;
                }
                Factor::Free(r) => {
                    let n = *w.get(pos).ok_or_else(|| Error::Representation("truncated element".into()))?;
                    if n < 0 || pos + 1 + n as usize > w.len() {
                        return Err(Error::Representation("bad word length".into()));
                    }
                    let word = &w[pos + 1..pos + 1 + n as usize];
                    for (i, &l) in word.iter().enumerate() {
                        if l == 0 || l.unsigned_abs() as usize > *r {
                            return Err(Error::Representation(format!("letter {l} outside rank {r}")));
                        }
                        if i > 0 && word[i - 1] == -l {
                            return Err(Error::Representation("word is not reduced".into()));
                        }
                    }
                    pos += 1 + n as usize;
                }
            }
        }
        if pos != w.len() {
            return Err(Error::Representation(format!("encoding has {} entries, expected {pos}", w.len())));
        }
        Ok(())
    }

    /// True when every factor is a lattice or a finite cyclic group, so the
    /// dual group is a torus times a finite character group.
    pub fn has_torus_dual(&self) -> bool {
        self.factors.iter().all(|f| !matches!(f, Factor::Free(r) if *r > 0))
    }

    /// Orders of the cyclic factors, in factor order.
    pub fn cyclic_orders(&self) -> Vec<u32> {
        self.factors
            .iter()
            .filter_map(|f| match f {
                Factor::Cyclic(k) => Some(*k),
                _ => None,
            })
            .collect()
    }

    /// Lattice coordinates and cyclic residues of an element of a group with
    /// torus dual.
    pub fn abelian_coords(&self, g: &Element) -> (SmallVec<[i32; 4]>, SmallVec<[i32; 4]>) {
        let mut lat = SmallVec::new();
        let mut res = SmallVec::new();
        for (f, x) in self.factors.iter().zip(self.split(&g.0)) {
            match f {
                Factor::Lattice(_) => lat.extend_from_slice(x),
                Factor::Cyclic(_) => res.push(x[0]),
                Factor::Free(_) => {}
            }
        }
        (lat, res)
    }

    /// Inverse of [`GroupModel::abelian_coords`]; residues are reduced.
    pub fn from_abelian_coords(&self, lat: &[i32], res: &[i32]) -> Element {
        let mut w = SmallVec::new();
        let (mut li, mut ri) = (0, 0);
        for f in &self.factors {
            match f {
                Factor::Lattice(d) => {
                    w.extend_from_slice(&lat[li..li + d]);
                    li += d;
                }
                Factor::Cyclic(k) => {
                    w.push(res[ri].rem_euclid(*k as i32));
                    ri += 1;
                }
                Factor::Free(_) => w.push(0),
            }
        }
        Element(w)
    }

    /// Builds an element of a pure lattice (or the lattice part of a product
    /// whose other factors are set to the identity).
    pub fn lattice(&self, coords: &[i64]) -> Result<Element> {
        let mut remaining = coords;
        let id = self.identity();
        let id_parts: Vec<Vec<i32>> = self.split(&id.0).iter().map(|s| s.to_vec()).collect();
        let mut parts = id_parts.clone();
        for (i, f) in self.factors.iter().enumerate() {
            if let Factor::Lattice(d) = f {
                if remaining.len() < *d {
                    return Err(Error::Representation("too few lattice coordinates".into()));
                }
                parts[i] = remaining[..*d].iter().map(|&v| v as i32).collect();
                remaining = &remaining[*d..];
            }
        }
        if !remaining.is_empty() {
            return Err(Error::Representation("too many lattice coordinates".into()));
        }
        let refs: Vec<&[i32]> = parts.iter().map(|v| v.as_slice()).collect();
        Ok(self.join(&refs))
    }

    /// Parses the JSON representation of an element. Lattice factors are
    /// integer arrays, cyclic factors integers (reduced mod k), free factors
    /// strings over `a..z` with upper case for inverses (`"e"` is the unit).
    /// Products take an array with one entry per factor.
    pub fn parse_element(&self, v: &Value) -> Result<Element> {
        if self.factors.len() == 1 {
            let part = parse_factor(self.factors[0], v)?;
            return Ok(self.join(&[&part]));
        }
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Representation(format!("product element must be an array, got {v}")))?;
        if arr.len() != self.factors.len() {
            return Err(Error::Representation(format!(
                "product element needs {} components, got {}",
                self.factors.len(),
                arr.len()
            )));
        }
        let parts: Vec<Vec<i32>> =
            self.factors.iter().zip(arr).map(|(f, x)| parse_factor(*f, x)).collect::<Result<_>>()?;
        let refs: Vec<&[i32]> = parts.iter().map(|v| v.as_slice()).collect();
        Ok(self.join(&refs))
    }

    pub fn parse_str(&self, s: &str) -> Result<Element> {
        let v: Value = serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string()));
        self.parse_element(&v)
    }

    pub fn element_to_json(&self, g: &Element) -> Value {
        let parts = self.split(&g.0);
        let vals: Vec<Value> = self.factors.iter().zip(parts).map(|(f, p)| factor_to_json(*f, p)).collect();
        if vals.len() == 1 {
            vals.into_iter().next().unwrap()
        } else {
            Value::Array(vals)
        }
    }

    pub fn format(&self, g: &Element) -> String {
        let parts = self.split(&g.0);
        let strs: Vec<String> = self
            .factors
            .iter()
            .zip(parts)
            .map(|(f, p)| match f {
                Factor::Lattice(_) => {
                    format!("({})", p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
                }
                Factor::Cyclic(_) => p[0].to_string(),
                Factor::Free(_) => free_word_string(p),
            })
            .collect();
        strs.join("×")
    }

    /// Elements of length at most `radius`, ordered by length and then by
    /// encoding. Fails when the ball would exceed the element budget.
    pub fn ball(&self, radius: usize) -> Result<Ball> {
        let mut seen: FxHashSet<Element> = FxHashSet::default();
        let id = self.identity();
        seen.insert(id.clone());
        let mut elements = vec![id];
        let mut sphere_start = vec![0, 1];
        let mut frontier_lo = 0;
        for _ in 0..radius {
            let frontier_hi = elements.len();
            let mut next: Vec<Element> = Vec::new();
            for i in frontier_lo..frontier_hi {
                for s in &self.generators {
                    let y = self.multiply(&elements[i], s);
                    if seen.insert(y.clone()) {
                        next.push(y);
                        if seen.len() > self.budget {
                            return Err(Error::Resource(format!(
                                "ball of radius {radius} exceeds the budget of {} elements",
                                self.budget
                            )));
                        }
                    }
                }
            }
            next.sort();
            elements.extend(next);
            frontier_lo = frontier_hi;
            sphere_start.push(elements.len());
        }
        let index = elements.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
        Ok(Ball { radius, elements, sphere_start, index })
    }

    /// All points lying on some geodesic from `e` to `g`.
    pub fn geodesic_points(&self, g: &Element) -> Vec<Element> {
        let parts = self.split(&g.0);
        let mut per_factor: Vec<Vec<Vec<i32>>> = Vec::new();
        for (f, p) in self.factors.iter().zip(parts) {
            let pts: Vec<Vec<i32>> = match f {
                Factor::Lattice(_) => {
                    let mut pts = vec![Vec::new()];
                    for &c in p {
                        let range: Vec<i32> = if c >= 0 { (0..=c).collect() } else { (c..=0).collect() };
                        pts = pts
                            .into_iter()
                            .flat_map(|pre: Vec<i32>| {
                                range.iter().map(move |&x| {
                                    let mut v = pre.clone();
                                    v.push(x);
                                    v
                                })
                            })
                            .collect();
                    }
                    pts
                }
                Factor::Cyclic(k) => {
                    let k = *k as i32;
                    let r = p[0];
                    let mut pts = Vec::new();
                    if r <= k - r {
                        pts.extend((0..=r).map(|j| vec![j]));
                    }
                    if k - r <= r {
                        pts.extend((0..=(k - r)).map(|j| vec![(k - j) % k]));
                    }
                    pts.sort();
                    pts.dedup();
                    pts
                }
                Factor::Free(_) => (0..=p.len()).map(|i| p[..i].to_vec()).collect(),
            };
            per_factor.push(pts);
        }
        let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
        for pts in &per_factor {
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    (0..pts.len()).map(move |i| {
                        let mut c = c.clone();
                        c.push(i);
                        c
                    })
                })
                .collect();
        }
        let mut out: Vec<Element> = combos
            .into_iter()
            .map(|c| {
                let refs: Vec<&[i32]> = c.iter().zip(&per_factor).map(|(&i, pts)| pts[i].as_slice()).collect();
                self.join(&refs)
            })
            .collect();
        out.sort();
        out
    }

    /// `C(q, g)`: pairs `(g₁, g₂)` with `g₁g₂ = g` and `g₁` within distance `q`
    /// of a geodesic from `e` to `g`. Sorted by `(ℓ(g₁), g₁)`.
    pub fn geodesic_splittings(&self, g: &Element, q: usize) -> Result<Vec<(Element, Element)>> {
        self.validate(g)?;
        let pts = self.geodesic_points(g);
        let near: Vec<Element> = if q == 0 {
            pts
        } else {
            let bq = self.ball(q)?;
            let mut set: FxHashSet<Element> = FxHashSet::default();
            for p in &pts {
                for y in &bq.elements {
                    set.insert(self.multiply(p, y));
                }
            }
            set.into_iter().collect()
        };
        let mut pairs: Vec<(usize, Element, Element)> = near
            .into_iter()
            .map(|x| {
                let y = self.multiply(&self.inverse(&x), g);
                (self.word_length(&x), x, y)
            })
            .collect();
        pairs.sort();
        Ok(pairs.into_iter().map(|(_, x, y)| (x, y)).collect())
    }
}

impl fmt::Display for GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self
            .factors
            .iter()
            .map(|x| match x {
                Factor::Lattice(d) => format!("Z^{d}"),
                Factor::Cyclic(k) => format!("Z/{k}"),
                Factor::Free(r) => format!("F{r}"),
            })
            .collect();
        write!(f, "{}", names.join(" x "))
    }
}

fn free_word_string(p: &[i32]) -> String {
    if p.is_empty() {
        return "e".into();
    }
    p.iter()
        .map(|&l| {
            let c = (b'a' + (l.unsigned_abs() as u8 - 1)) as char;
            if l > 0 {
                c
            } else {
                c.to_ascii_uppercase()
            }
        })
        .collect()
}

fn parse_factor(f: Factor, v: &Value) -> Result<Vec<i32>> {
    let bad = |what: &str| Error::Representation(format!("{what}: {v}"));
    match f {
        Factor::Lattice(d) => {
            let arr: Vec<i64> = match v {
                Value::Array(a) => a.iter().map(|x| x.as_i64().ok_or_else(|| bad("non-integer coordinate"))).collect::<Result<_>>()?,
                Value::Number(n) if d == 1 => vec![n.as_i64().ok_or_else(|| bad("non-integer coordinate"))?],
                _ => return Err(bad("lattice element must be an integer array")),
            };
            if arr.len() != d {
                return Err(bad(&format!("expected {d} coordinates")));
            }
            arr.into_iter()
                .map(|x| i32::try_from(x).map_err(|_| bad("coordinate out of range")))
                .collect()
        }
        Factor::Cyclic(k) => {
            let x = v.as_i64().ok_or_else(|| bad("residue must be an integer"))?;
            Ok(vec![x.rem_euclid(k as i64) as i32])
        }
        Factor::Free(r) => {
            let letters: Vec<i32> = match v {
                Value::String(s) if s == "e" || s.is_empty() => Vec::new(),
                Value::String(s) => s
                    .chars()
                    .map(|c| {
                        if !c.is_ascii_alphabetic() {
                            return Err(bad("letters must be a..z or A..Z"));
                        }
                        let idx = (c.to_ascii_lowercase() as u8 - b'a') as i32 + 1;
                        if idx as usize > r {
                            return Err(bad(&format!("letter {c} exceeds rank {r}")));
                        }
                        Ok(if c.is_ascii_lowercase() { idx } else { -idx })
                    })
                    .collect::<Result<_>>()?,
                Value::Array(a) => a
                    .iter()
                    .map(|x| {
                        let l = x.as_i64().ok_or_else(|| bad("letters must be integers"))? as i32;
                        if l == 0 || l.unsigned_abs() as usize > r {
                            return Err(bad("letter outside rank"));
                        }
                        Ok(l)
                    })
                    .collect::<Result<_>>()?,
                _ => return Err(bad("free-group element must be a string")),
            };
            let mut reduced: Vec<i32> = Vec::with_capacity(letters.len());
            for l in letters {
                if reduced.last() == Some(&-l) {
                    reduced.pop();
                } else {
                    reduced.push(l);
                }
            }
            Ok(reduced)
        }
    }
}

fn factor_to_json(f: Factor, p: &[i32]) -> Value {
    match f {
        Factor::Lattice(_) => Value::Array(p.iter().map(|&x| Value::from(x)).collect()),
        Factor::Cyclic(_) => Value::from(p[0]),
        Factor::Free(_) => Value::String(free_word_string(p)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn f2() -> Group {
        GroupModel::free(2)
    }

    #[test]
    fn word_lengths() {
        let g = f2();
        assert_eq!(g.word_length(&g.parse_str("abA").unwrap()), 3);
        let z2 = GroupModel::free_abelian(2);
        assert_eq!(z2.word_length(&z2.parse_element(&json!([3, -2])).unwrap()), 5);
        let z5 = GroupModel::cyclic(5);
        assert_eq!(z5.word_length(&z5.parse_element(&json!(4)).unwrap()), 1);
    }

    #[test]
    fn cyclic_length_matches_cayley_bfs() {
        for k in 1..12u32 {
            let g = GroupModel::cyclic(k);
            let ball = g.ball(k as usize).unwrap();
            for (i, x) in ball.elements.iter().enumerate() {
                assert_eq!(ball.length_of_index(i), g.word_length(x), "k={k} x={x:?}");
            }
        }
    }

    #[test]
    fn ball_sizes() {
        assert_eq!(GroupModel::free_abelian(2).ball(1).unwrap().len(), 5);
        assert_eq!(f2().ball(2).unwrap().len(), 17);
        assert_eq!(GroupModel::cyclic(3).ball(10).unwrap().len(), 3);
        let f2b = f2().ball(6).unwrap();
        for n in 1..=6 {
            assert_eq!(f2b.sphere(n).len(), 4 * 3usize.pow(n as u32 - 1));
        }
    }

    #[test]
    fn ball_budget_is_enforced() {
        let g = GroupModel::with_budget(GroupKind::Free { rank: 2 }, 100).unwrap();
        assert!(matches!(g.ball(4), Err(Error::Resource(_))));
        assert!(g.ball(3).is_ok());
    }

    #[test]
    fn normal_forms_are_unique() {
        let g = f2();
        let x = g.parse_str("abBA").unwrap();
        assert_eq!(x, g.identity());
        assert!(g.validate(&Element(smallvec::smallvec![2, 1, -1])).is_err());
        assert!(g.parse_str("abc").is_err());
    }

    #[test]
    fn element_json_roundtrip() {
        let g = GroupModel::product(vec![
            GroupKind::FreeAbelian { rank: 2 },
            GroupKind::Cyclic { order: 3 },
            GroupKind::Free { rank: 2 },
        ]);
        let v = json!([[1, -4], 2, "aBB"]);
        let x = g.parse_element(&v).unwrap();
        assert_eq!(g.element_to_json(&x), v);
        assert_eq!(g.word_length(&x), 5 + 1 + 3);
    }

    #[test]
    fn metric_axioms_on_small_balls() {
        let groups = vec![
            GroupModel::free_abelian(2),
            GroupModel::cyclic(5),
            f2(),
            GroupModel::product(vec![GroupKind::FreeAbelian { rank: 1 }, GroupKind::Cyclic { order: 4 }]),
        ];
        for g in groups {
            let b = g.ball(3).unwrap();
            assert_eq!(g.word_length(&g.identity()), 0);
            for x in &b.elements {
                assert_eq!(g.word_length(x), g.word_length(&g.inverse(x)));
                for y in &b.elements {
                    let xy = g.multiply(x, y);
                    assert!(g.word_length(&xy) <= g.word_length(x) + g.word_length(y));
                }
            }
        }
    }

    #[test]
    fn splittings_examples() {
        let g = f2();
        let ab = g.parse_str("ab").unwrap();
        let c0 = g.geodesic_splittings(&ab, 0).unwrap();
        let names: Vec<(String, String)> = c0.iter().map(|(x, y)| (g.format(x), g.format(y))).collect();
        assert_eq!(
            names,
            vec![("e".into(), "ab".into()), ("a".into(), "b".into()), ("ab".into(), "e".into())]
        );
        let z2 = GroupModel::free_abelian(2);
        let p = z2.parse_element(&json!([1, 1])).unwrap();
        assert_eq!(z2.geodesic_splittings(&p, 0).unwrap().len(), 4);
    }

    /// Brute force over `B_{ℓ(g)+q}`: `x` is admissible when some geodesic
    /// point `y` has `d(x, y) ≤ q`.
    fn splittings_brute(g: &Group, x: &Element, q: usize) -> Vec<(Element, Element)> {
        let n = g.word_length(x);
        let ball = g.ball(n + q).unwrap();
        let on_geodesic: Vec<&Element> = ball
            .elements
            .iter()
            .filter(|y| g.word_length(y) + g.word_length(&g.multiply(&g.inverse(y), x)) == n)
            .collect();
        let mut out: Vec<(usize, Element, Element)> = ball
            .elements
            .iter()
            .filter(|z| on_geodesic.iter().any(|y| g.word_length(&g.multiply(&g.inverse(y), z)) <= q))
            .map(|z| (g.word_length(z), z.clone(), g.multiply(&g.inverse(z), x)))
            .collect();
        out.sort();
        out.into_iter().map(|(_, a, b)| (a, b)).collect()
    }

    #[test]
    fn splittings_match_brute_force() {
        let groups = vec![
            GroupModel::free_abelian(2),
            GroupModel::cyclic(6),
            GroupModel::cyclic(7),
            f2(),
            GroupModel::product(vec![GroupKind::FreeAbelian { rank: 1 }, GroupKind::Free { rank: 2 }]),
        ];
        for g in groups {
            for x in g.ball(3).unwrap().elements.iter() {
                for q in 0..=1 {
                    assert_eq!(g.geodesic_splittings(x, q).unwrap(), splittings_brute(&g, x, q), "{}", g.format(x));
                }
            }
        }
    }

    #[test]
    fn q1_splittings_strictly_contain_q0() {
        let g = f2();
        let ab = g.parse_str("ab").unwrap();
        let c0 = g.geodesic_splittings(&ab, 0).unwrap();
        let c1 = g.geodesic_splittings(&ab, 1).unwrap();
        assert!(c0.iter().all(|p| c1.contains(p)));
        assert!(c1.len() > c0.len());
        assert!(c1.iter().all(|(x, y)| g.multiply(x, y) == ab));
    }

    #[test]
    fn tree_splittings_are_length_additive() {
        let g = f2();
        for x in g.ball(6).unwrap().elements.iter() {
            let c = g.geodesic_splittings(x, 0).unwrap();
            assert_eq!(c.len(), g.word_length(x) + 1);
            for (a, b) in &c {
                assert_eq!(g.word_length(a) + g.word_length(b), g.word_length(x));
            }
        }
    }
}
