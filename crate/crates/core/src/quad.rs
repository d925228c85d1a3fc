//! One-dimensional quadrature: Gauss-Legendre rules and globally adaptive
//! Gauss-Kronrod (7/15) integration of complex-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use serde::Serialize;

use crate::linalg::ZERO;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// `P_n` from the Chebyshev-like initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            let dz = p / (n as f64 * (z * p - pm) / (z * z - 1.0));
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        // Recompute the derivative at the converged node.
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = if n > 1 { n as f64 * (z * p1 - p0) / (z * z - 1.0) } else { 1.0 };
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Fixed `n`-point Gauss-Legendre rule on `[a, b]`.
pub fn gl_integrate(f: impl Fn(f64) -> Complex64, a: f64, b: f64, n: usize) -> Complex64 {
    let (x, w) = gauss_legendre(n);
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    x.iter().zip(&w).map(|(xi, wi)| f(c + h * xi) * *wi).sum::<Complex64>() * h
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One Kronrod panel: `(K15 value, |K15 − G7|)`.
fn gk15(f: &mut impl FnMut(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadResult {
    #[serde(serialize_with = "crate::quad::ser_complex")]
    pub value: Complex64,
    /// Sum of the per-panel `|K15 − G7|` estimates.
    pub error: f64,
    pub panels: usize,
    pub evals: usize,
    pub converged: bool,
}

pub(crate) fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("complex", 2)?;
    st.serialize_field("re", &z.re)?;
    st.serialize_field("im", &z.im)?;
    st.end()
}

struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err).then(o.a.total_cmp(&self.a))
    }
}

/// Globally adaptive G7/K15 on `[a, b]`: bisects the panel with the largest
/// error estimate until the total estimate is below `max(abs_tol, rel_tol·|I|)`
/// or `max_panels` is reached.
pub fn adaptive(
    mut f: impl FnMut(f64) -> Complex64,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult {
    adaptive_from(&mut f, &[a, b], abs_tol, rel_tol, max_panels)
}

/// As [`adaptive`], starting from the panels between consecutive `breaks`.
pub fn adaptive_from(
    f: &mut impl FnMut(f64) -> Complex64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in breaks.windows(2) {
        let (value, err) = gk15(f, w[0], w[1]);
        evals += 15;
        heap.push(Panel { a: w[0], b: w[1], value, err });
    }
    loop {
        let total: Complex64 = sorted_sum(&heap);
        let err: f64 = heap.iter().map(|p| p.err).sum();
        let target = abs_tol.max(rel_tol * total.norm());
        if err <= target || heap.len() >= max_panels {
            return QuadResult { value: total, error: err, panels: heap.len(), evals, converged: err <= target };
        }
        let worst = heap.pop().unwrap();
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            heap.push(worst);
            let total = sorted_sum(&heap);
            let err: f64 = heap.iter().map(|p| p.err).sum();
            return QuadResult { value: total, error: err, panels: heap.len(), evals, converged: false };
        }
        for (lo, hi) in [(worst.a, m), (m, worst.b)] {
            let (value, err) = gk15(f, lo, hi);
            evals += 15;
            heap.push(Panel { a: lo, b: hi, value, err });
        }
    }
}

/// Panel values summed left to right, independent of heap layout.
fn sorted_sum(heap: &BinaryHeap<Panel>) -> Complex64 {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    panels.iter().fold(ZERO, |s, p| s + p.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn legendre_rules_are_exact_on_polynomials() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13, "n={n}");
            for k in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(k as i32)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-12, "n={n} k={k}");
            }
        }
        let (x, _) = gauss_legendre(200);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn gl_on_gaussian() {
        let v = gl_integrate(|x| re((-x * x).exp()), -8.0, 8.0, 80);
        assert!((v.re - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn adaptive_on_peaked_integrand() {
        let r = adaptive(|x| re(1.0 / (1e-4 + x * x)), -1.0, 1.0, 1e-10, 1e-12, 2000);
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!(r.converged);
        assert!((r.value.re - exact).abs() < 1e-7 * exact, "{} vs {exact}", r.value.re);
    }

    #[test]
    fn adaptive_complex_oscillation() {
        let r = adaptive(|x| Complex64::new(0.0, 5.0 * x).exp(), 0.0, 3.0, 1e-12, 0.0, 500);
        let exact = (Complex64::new(0.0, 15.0).exp() - 1.0) / Complex64::new(0.0, 5.0);
        assert!((r.value - exact).norm() < 1e-12);
        assert!(r.error < 1e-11);
    }
}
