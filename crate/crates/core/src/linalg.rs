//! Small dense complex linear algebra on row-major blocks.
//!
//! Group-algebra coefficients are `d × d` blocks stored as flat row-major
//! slices. Hot loops (convolution, pairings) use the hand-written kernels
//! here; decompositions go through nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// `out += a·b` for `d × d` row-major blocks.
#[inline]
pub fn mul_add(a: &[Complex64], b: &[Complex64], d: usize, out: &mut [Complex64]) {
    if d == 1 {
        out[0] += a[0] * b[0];
        return;
    }
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            if aik == ZERO {
                continue;
            }
            let brow = &b[k * d..(k + 1) * d];
            let orow = &mut out[i * d..(i + 1) * d];
            for j in 0..d {
                orow[j] += aik * brow[j];
            }
        }
    }
}

/// `a·b` as a fresh block.
pub fn mul(a: &[Complex64], b: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; d * d];
    mul_add(a, b, d, &mut out);
    out
}

pub fn trace(a: &[Complex64], d: usize) -> Complex64 {
    (0..d).map(|i| a[i * d + i]).sum()
}

/// `tr(a·b)` without forming the product.
#[inline]
pub fn trace_of_product(a: &[Complex64], b: &[Complex64], d: usize) -> Complex64 {
    if d == 1 {
        return a[0] * b[0];
    }
    let mut s = ZERO;
    for i in 0..d {
        for k in 0..d {
            s += a[i * d + k] * b[k * d + i];
        }
    }
    s
}

pub fn identity(d: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; d * d];
    for i in 0..d {
        v[i * d + i] = ONE;
    }
    v
}

/// Conjugate transpose.
pub fn adjoint(a: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            v[j * d + i] = a[i * d + j].conj();
        }
    }
    v
}

pub fn to_matrix(a: &[Complex64], d: usize) -> CMat {
    CMat::from_row_slice(d, d, a)
}

pub fn from_matrix(m: &CMat) -> Vec<Complex64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            v.push(m[(i, j)]);
        }
    }
    v
}

/// Largest entry modulus.
pub fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Trace norm (sum of singular values).
pub fn trace_norm(a: &[Complex64], d: usize) -> f64 {
    if d == 1 {
        return a[0].norm();
    }
    to_matrix(a, d).singular_values().iter().sum()
}

/// Operator norm (largest singular value).
pub fn op_norm(a: &[Complex64], d: usize) -> f64 {
    if d == 1 {
        return a[0].norm();
    }
    to_matrix(a, d).singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// `f(H)` for Hermitian `H` via its eigendecomposition.
pub fn hermitian_apply(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> Complex64) -> CMat {
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let fl = f(l);
        for i in 0..n {
            scaled[(i, j)] *= fl;
        }
    }
    scaled * vecs.adjoint()
}

/// Hermitian-ness defect `max |m − m†|`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn block_product_matches_nalgebra() {
        let a = vec![c(1., 2.), c(0., -1.), c(3., 0.), c(-2., 0.5)];
        let b = vec![c(0.5, 0.), c(1., 1.), c(-1., 0.), c(2., -3.)];
        let p = mul(&a, &b, 2);
        let q = to_matrix(&a, 2) * to_matrix(&b, 2);
        assert_eq!(p, from_matrix(&q));
        let t = trace_of_product(&a, &b, 2);
        assert!((t - q.trace()).norm() < 1e-14);
    }

    #[test]
    fn trace_norm_of_diagonal() {
        let a = vec![c(-3., 0.), ZERO, ZERO, c(0., 2.)];
        assert!((trace_norm(&a, 2) - 5.0).abs() < 1e-12);
        assert!((op_norm(&a, 2) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_reconstructs() {
        let m = to_matrix(&[c(2., 0.), c(1., -1.), c(1., 1.), c(-1., 0.)], 2);
        let (vals, vecs) = hermitian_eigen(&m);
        assert!(vals[0] < vals[1]);
        let back = hermitian_apply(&vals, &vecs, |x| c(x, 0.));
        assert!((back - m).norm() < 1e-12);
        // eigenvalues of [[2,1-i],[1+i,-1]]: (1 ± √17)/2
        assert!((vals[1] - (1.0 + 17f64.sqrt()) / 2.0).abs() < 1e-12);
    }
}
