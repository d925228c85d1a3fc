//! Dense Dirichlet truncation: the operator restricted to `ℓ²(B_L) ⊗ ℂ^d`
//! and diagonalized. Coefficients of `f(D)` near the identity converge to
//! the infinite-volume ones as `L` grows; this serves as an independent
//! reference for the backends.

use num_complex::Complex64;

use crate::algebra::AlgebraElement;
use crate::groups::{Ball, Element};
use crate::linalg::{self, CMat, ZERO};
use crate::{Error, Result};

/// Largest truncated matrix the oracle will build.
pub const DENSE_LIMIT: usize = 4000;

pub struct DenseTruncation {
    ball: Ball,
    dim: usize,
    evals: Vec<f64>,
    evecs: CMat,
}

impl DenseTruncation {
    /// `(Hξ)(x) = Σ_g A_g ξ(g⁻¹x)` restricted to `x, g⁻¹x ∈ B_L`.
    pub fn new(a: &AlgebraElement, radius: usize) -> Result<Self> {
        let group = a.group();
        let ball = group.ball(radius)?;
        let d = a.dim();
        let n = ball.len() * d;
        if n > DENSE_LIMIT {
            return Err(Error::Resource(format!("dense truncation of size {n} exceeds {DENSE_LIMIT}")));
        }
        let mut h = CMat::zeros(n, n);
        for (xi, x) in ball.elements.iter().enumerate() {
            for (g, b) in a.iter() {
                let y = group.multiply(&group.inverse(g), x);
                if let Some(yi) = ball.index_of(&y) {
                    for i in 0..d {
                        for j in 0..d {
                            h[(xi * d + i, yi * d + j)] += b[i * d + j];
                        }
                    }
                }
            }
        }
        let (evals, evecs) = linalg::hermitian_eigen(&h);
        Ok(DenseTruncation { ball, dim: d, evals, evecs })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.evals
    }

    /// Block `(g, e)` of `f(H)`, i.e. the truncated `f(D)_g`.
    pub fn coefficient(&self, f: &dyn Fn(f64) -> Complex64, g: &Element) -> Result<Vec<Complex64>> {
        let d = self.dim;
        let gi = self.ball.index_of(g).ok_or_else(|| Error::NotFound("element outside the truncation".into()))?;
        let ei = 0;
        let mut out = vec![ZERO; d * d];
        for k in 0..self.evals.len() {
            let fk = f(self.evals[k]);
            for i in 0..d {
                for j in 0..d {
                    out[i * d + j] += fk * self.evecs[(gi * d + i, k)] * self.evecs[(ei * d + j, k)].conj();
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::GroupModel;

    #[test]
    fn first_ball_element_is_identity() {
        let g = GroupModel::free(2);
        let b = g.ball(2).unwrap();
        assert!(g.is_identity(&b.elements[0]));
    }

    #[test]
    fn polynomial_coefficients_are_exact_far_from_the_boundary() {
        let g = GroupModel::free(2);
        let mut blocks = vec![(g.identity(), vec![Complex64::new(1.0, 0.0)])];
        for s in g.generators() {
            blocks.push((s.clone(), vec![Complex64::new(0.5, 0.0)]));
        }
        let a = AlgebraElement::from_blocks(&g, 1, blocks).unwrap();
        let dt = DenseTruncation::new(&a, 3).unwrap();
        let sq = a.convolve(&a).unwrap();
        for x in g.ball(1).unwrap().elements.iter() {
            let v = dt.coefficient(&|x| Complex64::new(x * x, 0.0), x).unwrap();
            assert!((v[0] - sq.coeff(x)).norm() < 1e-12);
        }
    }
}
