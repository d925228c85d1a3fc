//! Convolution backend for any group model, aimed at free groups: `D` is a
//! finitely supported self-adjoint element and `f(D)` is approximated by a
//! Chebyshev series in `D/ρ`, `ρ = Σ_g ‖D_g‖ ≥ ‖D‖`. A degree-`k` polynomial
//! has propagation `k·band`, and every coefficient block of `T_j(D/ρ)` has
//! operator norm at most one, so `Σ_{j>k} |c_j|` bounds the error of each
//! coefficient block.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::AlgebraElement;
use crate::groups::{ConjugacyClass, Factor, Group};
use crate::linalg::{self, ZERO};
use crate::{Error, Result};

/// Chebyshev nodes used to compute coefficients.
const NODES: usize = 1024;
/// Highest coefficient index computed; later ones are taken as zero, which is
/// safe for the entire builtins far below this degree.
const MAX_INDEX: usize = NODES / 2;

#[derive(Clone, Debug)]
pub struct FreeConvolution {
    a: AlgebraElement,
    rho: f64,
    band: usize,
}

#[derive(Clone, Debug)]
pub struct ChebyshevResult {
    pub element: AlgebraElement,
    pub degree: usize,
    /// Bound on the operator norm of every coefficient block error.
    pub error: f64,
    pub converged: bool,
}

impl FreeConvolution {
    pub fn new(a: AlgebraElement) -> Result<Self> {
        let defect = a.max_diff(&a.star());
        if defect > 1e-12 {
            return Err(Error::Precondition(format!("convolution operator is not self-adjoint (defect {defect:.3e})")));
        }
        let rho = a.iter().map(|(_, b)| linalg::op_norm(b, a.dim())).sum::<f64>().max(1e-300) * (1.0 + 1e-12);
        let band = a.propagation().max(1);
        Ok(FreeConvolution { a, rho, band })
    }

    pub fn element(&self) -> &AlgebraElement {
        &self.a
    }

    /// `ρ = Σ‖D_g‖`, an upper bound for `‖D‖`.
    pub fn norm_bound(&self) -> f64 {
        self.rho
    }

    pub fn band(&self) -> usize {
        self.band
    }

    /// `c_j` with `f(ρx) ≈ Σ c_j T_j(x)` on `[−1, 1]`, from Chebyshev–Gauss nodes.
    pub fn coefficients(&self, f: &dyn Fn(f64) -> Complex64) -> Vec<Complex64> {
        let fx: Vec<Complex64> =
            (0..NODES).map(|k| f(self.rho * (PI * (k as f64 + 0.5) / NODES as f64).cos())).collect();
        (0..MAX_INDEX)
            .map(|j| {
                let s: Complex64 = fx
                    .iter()
                    .enumerate()
                    .map(|(k, v)| v * (PI * j as f64 * (k as f64 + 0.5) / NODES as f64).cos())
                    .sum();
                s * (if j == 0 { 1.0 } else { 2.0 } / NODES as f64)
            })
            .collect()
    }

    /// Smallest degree whose coefficient tail is at most `tol`, with that tail.
    /// Coefficients at the rounding floor of the transform are not counted.
    pub fn degree_for(coeffs: &[Complex64], tol: f64) -> (usize, f64) {
        let floor = 1e-15 * coeffs.iter().map(|c| c.norm()).sum::<f64>();
        let mut tail = 0.0;
        let mut tails = vec![0.0; coeffs.len()];
        for j in (0..coeffs.len()).rev() {
            tails[j] = tail;
            tail += (coeffs[j].norm() - floor).max(0.0);
        }
        let k = (0..coeffs.len()).find(|&k| tails[k] <= tol).unwrap_or(coeffs.len() - 1);
        (k, tails[k] + floor)
    }

    /// `Σ_{j≤k} c_j T_j(D/ρ)` on `B_R`. `T_j` is kept on the light cone
    /// `B_{R+(k−j)·band}` it can still influence.
    pub fn evaluate(&self, coeffs: &[Complex64], radius: usize) -> Result<AlgebraElement> {
        let k = coeffs.len() - 1;
        let group = self.a.group();
        let d = self.a.dim();
        let x = self.a.scale(Complex64::new(1.0 / self.rho, 0.0));
        let reach = |j: usize| radius + (k - j) * self.band;
        let mut prev = AlgebraElement::unit(group, d);
        let mut out = prev.scale(coeffs[0]);
        if k == 0 {
            return Ok(out);
        }
        let mut cur = x.truncate(reach(1));
        out = out.add(&cur.truncate(radius).scale(coeffs[1]))?;
        for j in 2..=k {
            let r = reach(j);
            let next = x.convolve_truncated(&cur, r)?.scale(Complex64::new(2.0, 0.0)).sub(&prev.truncate(r))?;
            out = out.add(&next.truncate(radius).scale(coeffs[j]))?;
            prev = cur;
            cur = next;
        }
        Ok(out)
    }

    /// `f(D)` on `B_R` to block accuracy `tol`, capped at `max_degree`.
    pub fn calculus(&self, f: &dyn Fn(f64) -> Complex64, radius: usize, tol: f64, max_degree: usize) -> Result<ChebyshevResult> {
        let coeffs = self.coefficients(f);
        let (mut k, mut tail) = Self::degree_for(&coeffs, tol);
        let converged = k <= max_degree;
        if !converged {
            k = max_degree;
            tail = coeffs[k + 1..].iter().map(|c| c.norm()).sum();
        }
        let element = self.evaluate(&coeffs[..=k], radius)?;
        Ok(ChebyshevResult { element, degree: k, error: tail, converged })
    }

    /// `Σ_{g∈⟨h⟩} tr f(D)_g` with the full polynomial support included. The
    /// error bound uses `|Σ_{g∈S} tr X_g| ≤ d·√|S|·‖X‖` for `X = T_j(D/ρ)`,
    /// `S ⊆ ⟨h⟩ ∩ B_{j·band}`, and `|S| ≤ |B_{j·band}|` from closed-form
    /// sphere counts.
    pub fn class_trace(&self, f: &dyn Fn(f64) -> Complex64, class: &ConjugacyClass, tol: f64, max_degree: usize) -> Result<(Complex64, f64, usize)> {
        let coeffs = self.coefficients(f);
        let d = self.a.dim() as f64;
        let sizes = ball_sizes(self.a.group(), MAX_INDEX * self.band);
        let floor = 1e-15 * coeffs.iter().map(|c| c.norm()).sum::<f64>();
        let weighted: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let w = (c.norm() - floor).max(0.0);
                if w == 0.0 { 0.0 } else { w * d * sizes[j * self.band].sqrt() }
            })
            .collect();
        let mut tails = vec![0.0; weighted.len()];
        let mut acc = 0.0;
        for j in (0..weighted.len()).rev() {
            tails[j] = acc;
            acc += weighted[j];
        }
        let k = (0..weighted.len()).find(|&k| tails[k] <= tol).unwrap_or(weighted.len() - 1).min(max_degree);
        let radius = k * self.band;
        let p = self.evaluate(&coeffs[..=k], radius)?;
        let value = p.class_trace(class);
        Ok((value, tails[k], k))
    }

    /// Weyl bound `σ ≥ min|spec D_e| − ‖K‖` for `K = D − D_e`. On a free
    /// group the generator part of `K` is dominated by `max_s‖D_s‖` times the
    /// Kesten norm `2√(2r−1)`; longer words are bounded by `Σ‖D_g‖`.
    pub fn gap_certificate(&self) -> (f64, String) {
        let group = self.a.group();
        let d = self.a.dim();
        let e = group.identity();
        let diag = self.a.block(&e).map(|b| b.to_vec()).unwrap_or_else(|| vec![ZERO; d * d]);
        let (vals, _) = linalg::hermitian_eigen(&linalg::to_matrix(&diag, d));
        let a0 = vals.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
        let free_rank = match group.factors() {
            [Factor::Free(r)] => Some(*r),
            _ => None,
        };
        let mut gen_max: f64 = 0.0;
        let mut gen_l1 = 0.0;
        let mut rest = 0.0;
        for (g, b) in self.a.iter() {
            let n = linalg::op_norm(b, d);
            match group.word_length(g) {
                0 => {}
                1 => {
                    gen_max = gen_max.max(n);
                    gen_l1 += n;
                }
                _ => rest += n,
            }
        }
        let (gen_bound, how) = match free_rank {
            Some(r) if r >= 1 => {
                let kesten = gen_max * 2.0 * ((2 * r - 1) as f64).sqrt();
                if kesten < gen_l1 {
                    (kesten, "Weyl bound with the Kesten norm for the generator part")
                } else {
                    (gen_l1, "Weyl bound with l1 norms")
                }
            }
            _ => (gen_l1, "Weyl bound with l1 norms"),
        };
        ((a0 - gen_bound - rest).max(0.0), how.into())
    }
}

/// `|B_n|` for `n ≤ n_max` from closed-form sphere counts of each factor,
/// convolved because word length is additive over factors.
pub fn ball_sizes(group: &Group, n_max: usize) -> Vec<f64> {
    let mut spheres = vec![0.0; n_max + 1];
    spheres[0] = 1.0;
    for f in group.factors() {
        let s = factor_spheres(*f, n_max);
        let mut out = vec![0.0; n_max + 1];
        for (i, a) in spheres.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in s.iter().enumerate().take(n_max + 1 - i) {
                out[i + j] += a * b;
            }
        }
        spheres = out;
    }
    let mut acc = 0.0;
    spheres
        .iter()
        .map(|s| {
            acc += s;
            acc
        })
        .collect()
}

fn factor_spheres(f: Factor, n_max: usize) -> Vec<f64> {
    let mut s = vec![0.0; n_max + 1];
    s[0] = 1.0;
    match f {
        Factor::Lattice(d) => {
            // Σ_k 2^k C(d,k) C(n−1,k−1).
            for (n, v) in s.iter_mut().enumerate().skip(1) {
                *v = (1..=d.min(n)).map(|k| 2f64.powi(k as i32) * binom(d, k) * binom(n - 1, k - 1)).sum();
            }
        }
        Factor::Cyclic(k) => {
            let k = k as usize;
            for r in 1..k {
                let l = r.min(k - r);
                if l <= n_max {
                    s[l] += 1.0;
                }
            }
        }
        Factor::Free(r) => {
            for (n, v) in s.iter_mut().enumerate().skip(1) {
                *v = 2.0 * r as f64 * ((2 * r - 1) as f64).powi(n as i32 - 1);
            }
        }
    }
    s
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{GroupKind, GroupModel};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn adjacency_plus(g: &Group, diag: f64, w: f64) -> AlgebraElement {
        let mut blocks = vec![(g.identity(), vec![c(diag)])];
        for s in g.generators() {
            blocks.push((s.clone(), vec![c(w)]));
        }
        AlgebraElement::from_blocks(g, 1, blocks).unwrap()
    }

    #[test]
    fn ball_sizes_match_enumeration() {
        for kind in [
            GroupKind::Free { rank: 2 },
            GroupKind::FreeAbelian { rank: 3 },
            GroupKind::Product { factors: vec![GroupKind::FreeAbelian { rank: 2 }, GroupKind::Cyclic { order: 5 }] },
            GroupKind::Product { factors: vec![GroupKind::Free { rank: 2 }, GroupKind::Cyclic { order: 2 }] },
        ] {
            let g = GroupModel::new(kind).unwrap();
            let sizes = ball_sizes(&g, 4);
            for (r, s) in sizes.iter().enumerate() {
                assert_eq!(*s as usize, g.ball(r).unwrap().len(), "{g} r={r}");
            }
        }
    }

    #[test]
    fn polynomial_is_exact() {
        // f(x) = x² reproduces the convolution square.
        let g = GroupModel::free(2);
        let a = adjacency_plus(&g, 1.0, 0.25);
        let fc = FreeConvolution::new(a.clone()).unwrap();
        let r = fc.calculus(&|x| c(x * x), 3, 1e-12, 6).unwrap();
        assert!(r.converged && r.degree <= 2, "{}", r.degree);
        assert!(r.element.max_diff(&a.convolve(&a).unwrap()) < 1e-12);
    }

    #[test]
    fn light_cone_truncation_matches_full_evaluation() {
        let g = GroupModel::free(2);
        let fc = FreeConvolution::new(adjacency_plus(&g, 0.5, 0.2)).unwrap();
        let coeffs = fc.coefficients(&|x| c((-x * x).exp()));
        let k = 8;
        let full = fc.evaluate(&coeffs[..=k], k).unwrap().truncate(2);
        let cone = fc.evaluate(&coeffs[..=k], 2).unwrap();
        assert!(full.max_diff(&cone) < 1e-15);
    }

    #[test]
    fn kesten_gap() {
        let g = GroupModel::free(2);
        let fc = FreeConvolution::new(adjacency_plus(&g, 4.0, 1.0)).unwrap();
        let (sigma, _) = fc.gap_certificate();
        assert!((sigma - (4.0 - 2.0 * 3f64.sqrt())).abs() < 1e-12);
    }
}
