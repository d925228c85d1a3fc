//! Fourier picture of the group algebra of `ℤ^d × ℤ/k₁ × ⋯`.
//!
//! An element `A = Σ A_g g` is represented by its symbol
//! `Â(θ, s) = Σ_g A_g e^{i⟨g,θ⟩} χ_s(g)` sampled on a uniform tensor grid in
//! `θ ∈ [0, 2π)^d` times all characters `χ_s` of the finite part.
//! Convolution becomes pointwise multiplication. Alongside the values we
//! optionally carry the first derivatives `∂Â/∂θ_j`, which are the symbols
//! of `(X_j A)_g = g_j A_g` up to a factor `i`; products propagate them by
//! the Leibniz rule. Coefficients are recovered by the quadrature average
//! `A_g = avg_{θ,s} Â(θ,s) e^{−i⟨g,θ⟩} χ_s(g)⁻¹`. The periodic trapezoid rule
//! is exact for trigonometric polynomials of degree below the node count and
//! converges geometrically for symbols analytic in a strip.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::AlgebraElement;
use crate::groups::{Element, Group};
use crate::linalg::{self, ZERO};
use crate::{Error, Result};

/// Sample points of the dual group.
#[derive(Debug)]
pub struct DualGrid {
    group: Group,
    lattice_dim: usize,
    orders: Vec<u32>,
    n: usize,
    theta: Vec<f64>,
    /// 1D weights normalized to sum to one.
    weight: Vec<f64>,
    points: usize,
    point_weights: Vec<f64>,
}

impl DualGrid {
    pub fn new(group: &Group, n: usize) -> Result<Arc<Self>> {
        if !group.has_torus_dual() {
            return Err(Error::Unsupported(format!("{group} has no torus dual")));
        }
        let lattice_dim = group.lattice_rank();
        let orders = group.cyclic_orders();
        let n = n.max(1);
        let theta = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let weight = vec![1.0 / n as f64; n];
        let points = n.pow(lattice_dim as u32) * orders.iter().map(|&k| k as usize).product::<usize>();
        let mut grid =
            DualGrid { group: group.clone(), lattice_dim, orders, n, theta, weight, points, point_weights: Vec::new() };
        grid.point_weights = grid.compute_weights();
        Ok(Arc::new(grid))
    }

    pub fn group(&self) -> &Group {
        &self.group
    }
    pub fn points(&self) -> usize {
        self.points
    }
    pub fn lattice_dim(&self) -> usize {
        self.lattice_dim
    }
    pub fn nodes_per_dim(&self) -> usize {
        self.n
    }

    /// Decomposes a point index into lattice node indices and character indices.
    fn split_index(&self, mut p: usize, lat: &mut [usize], chars: &mut [usize]) {
        for (c, &k) in chars.iter_mut().zip(&self.orders).rev() {
            *c = p % k as usize;
            p /= k as usize;
        }
        for l in lat.iter_mut().rev() {
            *l = p % self.n;
            p /= self.n;
        }
    }

    /// Quadrature weights of every point (sum to one).
    pub fn weights(&self) -> &[f64] {
        &self.point_weights
    }

    fn compute_weights(&self) -> Vec<f64> {
        let nchar: usize = self.orders.iter().map(|&k| k as usize).product();
        let mut lat = vec![0; self.lattice_dim];
        let mut chars = vec![0; self.orders.len()];
        (0..self.points)
            .map(|p| {
                self.split_index(p, &mut lat, &mut chars);
                lat.iter().map(|&i| self.weight[i]).product::<f64>() / nchar as f64
            })
            .collect()
    }

    /// Coordinates `θ` and character indices of a point.
    pub fn point(&self, p: usize) -> (Vec<f64>, Vec<usize>) {
        let mut lat = vec![0; self.lattice_dim];
        let mut chars = vec![0; self.orders.len()];
        self.split_index(p, &mut lat, &mut chars);
        (lat.iter().map(|&i| self.theta[i]).collect(), chars)
    }

    /// `e^{i⟨g,θ⟩} χ_s(g)` at every point.
    pub fn phases(&self, g: &Element) -> Vec<Complex64> {
        let (lat, res) = self.group.abelian_coords(g);
        // Per-dimension tables of e^{i g_j θ}.
        let tables: Vec<Vec<Complex64>> = lat
            .iter()
            .map(|&m| self.theta.iter().map(|&t| Complex64::from_polar(1.0, m as f64 * t)).collect())
            .collect();
        let mut li = vec![0; self.lattice_dim];
        let mut ci = vec![0; self.orders.len()];
        (0..self.points)
            .map(|p| {
                self.split_index(p, &mut li, &mut ci);
                let mut z = Complex64::new(1.0, 0.0);
                for (j, &i) in li.iter().enumerate() {
                    z *= tables[j][i];
                }
                let mut ang = 0.0;
                for ((&s, &r), &k) in ci.iter().zip(&res).zip(&self.orders) {
                    ang += 2.0 * PI * (s as f64) * (r as f64) / k as f64;
                }
                if ang != 0.0 {
                    z *= Complex64::from_polar(1.0, ang);
                }
                z
            })
            .collect()
    }
}

/// Symbol samples of an element, with optional first derivatives in each
/// lattice direction.
#[derive(Clone, Debug)]
pub struct SpectralElement {
    grid: Arc<DualGrid>,
    dim: usize,
    /// `points × dim²`, row-major blocks.
    values: Vec<Complex64>,
    /// One array like `values` per lattice direction, when tracked.
    jets: Option<Vec<Vec<Complex64>>>,
}

impl SpectralElement {
    pub fn from_parts(grid: &Arc<DualGrid>, dim: usize, values: Vec<Complex64>, jets: Option<Vec<Vec<Complex64>>>) -> Result<Self> {
        let n = grid.points * dim * dim;
        if values.len() != n || jets.as_ref().is_some_and(|j| j.len() != grid.lattice_dim || j.iter().any(|v| v.len() != n)) {
            return Err(Error::Shape("spectral sample arrays do not match the grid".into()));
        }
        Ok(SpectralElement { grid: grid.clone(), dim, values, jets })
    }

    /// Exact symbol of a finitely supported element.
    pub fn from_algebra(grid: &Arc<DualGrid>, a: &AlgebraElement, with_jets: bool) -> Result<Self> {
        if a.group().kind() != grid.group.kind() {
            return Err(Error::Shape("element and grid live over different groups".into()));
        }
        let d2 = a.dim() * a.dim();
        let np = grid.points;
        let mut values = vec![ZERO; np * d2];
        let mut jets = if with_jets { Some(vec![vec![ZERO; np * d2]; grid.lattice_dim]) } else { None };
        for (g, b) in a.iter() {
            let ph = grid.phases(g);
            let (lat, _) = grid.group.abelian_coords(g);
            for (p, z) in ph.iter().enumerate() {
                let out = &mut values[p * d2..(p + 1) * d2];
                for (o, x) in out.iter_mut().zip(b) {
                    *o += z * x;
                }
            }
            if let Some(js) = jets.as_mut() {
                for (j, arr) in js.iter_mut().enumerate() {
                    let m = Complex64::new(0.0, lat[j] as f64);
                    if lat[j] == 0 {
                        continue;
                    }
                    for (p, z) in ph.iter().enumerate() {
                        let out = &mut arr[p * d2..(p + 1) * d2];
                        for (o, x) in out.iter_mut().zip(b) {
                            *o += m * z * x;
                        }
                    }
                }
            }
        }
        Ok(SpectralElement { grid: grid.clone(), dim: a.dim(), values, jets })
    }

    pub fn unit(grid: &Arc<DualGrid>, dim: usize, with_jets: bool) -> Self {
        let id = linalg::identity(dim);
        let values = (0..grid.points).flat_map(|_| id.iter().cloned()).collect();
        let jets = with_jets.then(|| vec![vec![ZERO; grid.points * dim * dim]; grid.lattice_dim]);
        SpectralElement { grid: grid.clone(), dim, values, jets }
    }

    pub fn grid(&self) -> &Arc<DualGrid> {
        &self.grid
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn has_jets(&self) -> bool {
        self.jets.is_some()
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn jet(&self, j: usize) -> Option<&[Complex64]> {
        self.jets.as_ref().map(|js| js[j].as_slice())
    }

    fn check(&self, o: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.grid, &o.grid) || self.dim != o.dim {
            return Err(Error::Shape("spectral elements on different grids or dimensions".into()));
        }
        Ok(())
    }

    /// Pointwise product with the Leibniz rule on jets. Jets survive only
    /// when both factors carry them.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let d = self.dim;
        let d2 = d * d;
        let np = self.grid.points;
        let mut values = vec![ZERO; np * d2];
        for p in 0..np {
            let r = p * d2..(p + 1) * d2;
            linalg::mul_add(&self.values[r.clone()], &o.values[r.clone()], d, &mut values[r]);
        }
        let jets = match (&self.jets, &o.jets) {
            (Some(ja), Some(jb)) => Some(
                ja.iter()
                    .zip(jb)
                    .map(|(da, db)| {
                        let mut out = vec![ZERO; np * d2];
                        for p in 0..np {
                            let r = p * d2..(p + 1) * d2;
                            linalg::mul_add(&da[r.clone()], &o.values[r.clone()], d, &mut out[r.clone()]);
                            linalg::mul_add(&self.values[r.clone()], &db[r.clone()], d, &mut out[r]);
                        }
                        out
                    })
                    .collect(),
            ),
            _ => None,
        };
        Ok(SpectralElement { grid: self.grid.clone(), dim: d, values, jets })
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let values = self.values.iter().zip(&o.values).map(|(a, b)| a + b).collect();
        let jets = match (&self.jets, &o.jets) {
            (Some(ja), Some(jb)) => {
                Some(ja.iter().zip(jb).map(|(x, y)| x.iter().zip(y).map(|(a, b)| a + b).collect()).collect())
            }
            _ => None,
        };
        Ok(SpectralElement { grid: self.grid.clone(), dim: self.dim, values, jets })
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SpectralElement {
            grid: self.grid.clone(),
            dim: self.dim,
            values: self.values.iter().map(|x| x * c).collect(),
            jets: self.jets.as_ref().map(|js| js.iter().map(|v| v.iter().map(|x| x * c).collect()).collect()),
        }
    }

    pub fn add_unit(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        let d = self.dim;
        for p in 0..self.grid.points {
            for i in 0..d {
                out.values[p * d * d + i * d + i] += c;
            }
        }
        out
    }

    /// Coefficient block `A_g`.
    pub fn coefficient(&self, g: &Element) -> Vec<Complex64> {
        self.average_against(&self.values, g)
    }

    /// `tr A_g` computed as the average of `tr Â` against the conjugate phase.
    pub fn trace_coefficient(&self, g: &Element) -> Complex64 {
        linalg::trace(&self.coefficient(g), self.dim)
    }

    pub(crate) fn average_against(&self, arr: &[Complex64], g: &Element) -> Vec<Complex64> {
        let d2 = self.dim * self.dim;
        let ph = self.grid.phases(g);
        let w = self.grid.weights();
        let mut out = vec![ZERO; d2];
        for p in 0..self.grid.points {
            let z = ph[p].conj() * w[p];
            for (o, x) in out.iter_mut().zip(&arr[p * d2..(p + 1) * d2]) {
                *o += z * x;
            }
        }
        out
    }

    /// `Σ_θ,s w·e^{−i⟨g,θ⟩}χ_s(g)⁻¹ · tr(x_p)` for a per-point scalar field.
    pub fn average_scalar(grid: &DualGrid, field: &[Complex64], g: &Element) -> Complex64 {
        let ph = grid.phases(g);
        let w = grid.weights();
        field.iter().zip(ph.iter().zip(w)).map(|(f, (z, wi))| f * z.conj() * *wi).sum()
    }

    /// Truncated real-space element: all coefficients in `B_R`.
    pub fn to_algebra(&self, radius: usize) -> Result<AlgebraElement> {
        let ball = self.grid.group.ball(radius)?;
        let blocks = ball.elements.iter().map(|g| (g.clone(), self.coefficient(g)));
        AlgebraElement::from_blocks(&self.grid.group, self.dim, blocks.collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{GroupKind, GroupModel};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_element(g: &Group, r: usize, dim: usize, seed: u64) -> AlgebraElement {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ball = g.ball(r).unwrap();
        let blocks: Vec<_> = ball
            .elements
            .iter()
            .map(|x| {
                (x.clone(), (0..dim * dim).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
            })
            .collect();
        AlgebraElement::from_blocks(g, dim, blocks).unwrap()
    }

    #[test]
    fn products_match_convolution() {
        let g = GroupModel::product(vec![GroupKind::FreeAbelian { rank: 2 }, GroupKind::Cyclic { order: 3 }]);
        let grid = DualGrid::new(&g, 12).unwrap();
        let a = random_element(&g, 2, 2, 1);
        let b = random_element(&g, 2, 2, 2);
        let ab = a.convolve(&b).unwrap();
        let sa = SpectralElement::from_algebra(&grid, &a, false).unwrap();
        let sb = SpectralElement::from_algebra(&grid, &b, false).unwrap();
        let back = sa.mul(&sb).unwrap().to_algebra(5).unwrap();
        assert!(back.max_diff(&ab) < 1e-12, "{}", back.max_diff(&ab));
    }

    #[test]
    fn jets_are_coordinate_weights() {
        let g = GroupModel::free_abelian(2);
        let grid = DualGrid::new(&g, 10).unwrap();
        let a = random_element(&g, 2, 1, 3);
        let b = random_element(&g, 1, 1, 4);
        let s = SpectralElement::from_algebra(&grid, &a, true).unwrap().mul(&SpectralElement::from_algebra(&grid, &b, true).unwrap()).unwrap();
        let ab = a.convolve(&b).unwrap();
        for x in ab.support() {
            let (lat, _) = g.abelian_coords(x);
            for j in 0..2 {
                let c = s.average_against(s.jet(j).unwrap(), x)[0];
                let expect = ab.coeff(x) * Complex64::new(0.0, lat[j] as f64);
                assert!((c - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn free_groups_have_no_torus_dual() {
        assert!(DualGrid::new(&GroupModel::free(2), 8).is_err());
    }
}
