//! Builtin functions for the functional calculus.
//!
//! Every builtin is a closed form with a closed-form derivative (used for
//! divided differences), a parity flag, and where available the Fourier
//! decay envelope `F_f(s) = sup_{n≤N} ∫_{|ξ|>s} |d^n f̂/dξ^n| dξ` with
//! `f̂(ξ) = ∫ f(x) e^{−ixξ} dx`, and the strip norm
//! `‖f‖ = sup_{n≤N} sup_{|Im z|<Λ} |zⁿ f(z)|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::quad;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const SQRT_PI: f64 = 1.772_453_850_905_516;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchwartzFunction {
    /// `e^{−t²x²}`.
    Gauss {
        #[serde(default = "one")]
        t: f64,
    },
    /// `x e^{−t²x²}`.
    Xgauss {
        #[serde(default = "one")]
        t: f64,
    },
    /// `u_t − 1` with `u_t(x) = −exp(iπ erf(tx))`.
    UtMinus1 { t: f64 },
    UtInvMinus1 { t: f64 },
    /// `w_t − 1` with `w_t(x) = (tx − i)/(tx + i)`.
    WtMinus1 { t: f64 },
    WtInvMinus1 { t: f64 },
    /// `u̇_t u_t⁻¹ = 2√π i x e^{−t²x²}`.
    UdotUinv { t: f64 },
    /// `ẇ_t w_t⁻¹ = 2ix/(t²x² + 1)`.
    WdotWinv { t: f64 },
    /// `f(x) = x`; not decaying, accepted by the exact backends only.
    Identity,
}

fn one() -> f64 {
    1.0
}

impl SchwartzFunction {
    pub fn name(&self) -> String {
        match self {
            SchwartzFunction::Gauss { t } => format!("gauss(t={t})"),
            SchwartzFunction::Xgauss { t } => format!("xgauss(t={t})"),
            SchwartzFunction::UtMinus1 { t } => format!("ut_minus_1(t={t})"),
            SchwartzFunction::UtInvMinus1 { t } => format!("ut_inv_minus_1(t={t})"),
            SchwartzFunction::WtMinus1 { t } => format!("wt_minus_1(t={t})"),
            SchwartzFunction::WtInvMinus1 { t } => format!("wt_inv_minus_1(t={t})"),
            SchwartzFunction::UdotUinv { t } => format!("udot_uinv(t={t})"),
            SchwartzFunction::WdotWinv { t } => format!("wdot_winv(t={t})"),
            SchwartzFunction::Identity => "identity".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.param() {
            Some(t) if !(t.is_finite() && t > 0.0) => {
                Err(Error::Precondition(format!("{}: the scale t must be positive and finite", self.name())))
            }
            _ => Ok(()),
        }
    }

    fn param(&self) -> Option<f64> {
        match *self {
            SchwartzFunction::Gauss { t }
            | SchwartzFunction::Xgauss { t }
            | SchwartzFunction::UtMinus1 { t }
            | SchwartzFunction::UtInvMinus1 { t }
            | SchwartzFunction::WtMinus1 { t }
            | SchwartzFunction::WtInvMinus1 { t }
            | SchwartzFunction::UdotUinv { t }
            | SchwartzFunction::WdotWinv { t } => Some(t),
            SchwartzFunction::Identity => None,
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match *self {
            SchwartzFunction::Gauss { t } => re((-t * t * x * x).exp()),
            SchwartzFunction::Xgauss { t } => re(x * (-t * t * x * x).exp()),
            SchwartzFunction::UtMinus1 { t } => -Complex64::from_polar(1.0, PI * erf(t * x)) - 1.0,
            SchwartzFunction::UtInvMinus1 { t } => -Complex64::from_polar(1.0, -PI * erf(t * x)) - 1.0,
            SchwartzFunction::WtMinus1 { t } => -2.0 * I / Complex64::new(t * x, 1.0),
            SchwartzFunction::WtInvMinus1 { t } => 2.0 * I / Complex64::new(t * x, -1.0),
            SchwartzFunction::UdotUinv { t } => I * (2.0 * SQRT_PI * x * (-t * t * x * x).exp()),
            SchwartzFunction::WdotWinv { t } => I * (2.0 * x / (t * t * x * x + 1.0)),
            SchwartzFunction::Identity => re(x),
        }
    }

    pub fn deriv(&self, x: f64) -> Complex64 {
        match *self {
            SchwartzFunction::Gauss { t } => re(-2.0 * t * t * x * (-t * t * x * x).exp()),
            SchwartzFunction::Xgauss { t } => re((1.0 - 2.0 * t * t * x * x) * (-t * t * x * x).exp()),
            SchwartzFunction::UtMinus1 { t } => {
                let u = -Complex64::from_polar(1.0, PI * erf(t * x));
                u * I * (2.0 * SQRT_PI * t * (-t * t * x * x).exp())
            }
            SchwartzFunction::UtInvMinus1 { t } => {
                let v = -Complex64::from_polar(1.0, -PI * erf(t * x));
                -v * I * (2.0 * SQRT_PI * t * (-t * t * x * x).exp())
            }
            SchwartzFunction::WtMinus1 { t } => {
                let z = Complex64::new(t * x, 1.0);
                2.0 * I * t / (z * z)
            }
            SchwartzFunction::WtInvMinus1 { t } => {
                let z = Complex64::new(t * x, -1.0);
                -2.0 * I * t / (z * z)
            }
            SchwartzFunction::UdotUinv { t } => {
                I * (2.0 * SQRT_PI * (1.0 - 2.0 * t * t * x * x) * (-t * t * x * x).exp())
            }
            SchwartzFunction::WdotWinv { t } => {
                let q = t * t * x * x;
                I * (2.0 * (1.0 - q) / ((q + 1.0) * (q + 1.0)))
            }
            SchwartzFunction::Identity => re(1.0),
        }
    }

    /// Whether `f` is real on the real line, so that `f(D) = f(D)*`.
    pub fn is_real(&self) -> bool {
        matches!(self, SchwartzFunction::Gauss { .. } | SchwartzFunction::Xgauss { .. } | SchwartzFunction::Identity)
    }

    pub fn is_odd(&self) -> bool {
        matches!(
            self,
            SchwartzFunction::Xgauss { .. }
                | SchwartzFunction::UdotUinv { .. }
                | SchwartzFunction::WdotWinv { .. }
                | SchwartzFunction::Identity
        )
    }

    /// `F_f(s)` with `n ≤ N` derivatives of `f̂`.
    pub fn decay_envelope(&self, s: f64, n_max: usize) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(Error::Precondition("decay envelope needs s ≥ 0".into()));
        }
        self.validate()?;
        let gaussian = |t: f64, shift: usize, scale: f64| -> f64 {
            // f(x) = scale·t^{−shift}·k(tx) where k̂^{(n)} = ĝ^{(n+shift)} up to a phase,
            // and ∫_{|ξ|>s} |f̂_t^{(n)}| = t^{−n} ∫_{|η|>s/t} |ĝ^{(n+shift)}(η)| dη.
            (0..=n_max)
                .map(|n| scale * t.powi(-(n as i32) - shift as i32) * gauss_derivative_tail(n + shift, s / t))
                .fold(0.0, f64::max)
        };
        let exponential = |t: f64, c: f64| -> f64 {
            (0..=n_max).map(|n| c * t.powi(-(n as i32)) * (-s / t).exp()).fold(0.0, f64::max)
        };
        match *self {
            SchwartzFunction::Gauss { t } => Ok(gaussian(t, 0, 1.0)),
            SchwartzFunction::Xgauss { t } => Ok(gaussian(t, 1, 1.0)),
            SchwartzFunction::UdotUinv { t } => Ok(gaussian(t, 1, 2.0 * SQRT_PI)),
            // f̂ = −4π t⁻¹ e^{−ξ/t} on ξ > 0 (mirrored for the inverse).
            SchwartzFunction::WtMinus1 { t } | SchwartzFunction::WtInvMinus1 { t } => Ok(exponential(t, 4.0 * PI)),
            // f̂ = −iπ t⁻² sign(ξ) e^{−|ξ|/t}·2.
            SchwartzFunction::WdotWinv { t } => Ok(exponential(t, 4.0 * PI / t)),
            SchwartzFunction::UtMinus1 { .. } | SchwartzFunction::UtInvMinus1 { .. } | SchwartzFunction::Identity => {
                Err(Error::Unsupported(format!("{} has no closed-form decay envelope", self.name())))
            }
        }
    }

    /// Strip norm on `|Im z| < Λ` with powers `zⁿ`, `n ≤ N`; closed form for
    /// the Gaussian family.
    pub fn strip_norm(&self, lambda: f64, n_max: usize) -> Result<f64> {
        self.validate()?;
        let gaussian = |t: f64, extra: usize, scale: f64| -> f64 {
            // sup_x (x² + Λ²)^{k/2} e^{−t²(x² − Λ²)} at x² = max(0, k/(2t²) − Λ²).
            (0..=n_max)
                .map(|n| {
                    let k = (n + extra) as f64;
                    let u = (k / (2.0 * t * t) - lambda * lambda).max(0.0);
                    scale * (u + lambda * lambda).powf(k / 2.0) * (-t * t * u).exp() * (t * t * lambda * lambda).exp()
                })
                .fold(0.0, f64::max)
        };
        match *self {
            SchwartzFunction::Gauss { t } => Ok(gaussian(t, 0, 1.0)),
            SchwartzFunction::Xgauss { t } => Ok(gaussian(t, 1, 1.0)),
            SchwartzFunction::UdotUinv { t } => Ok(gaussian(t, 1, 2.0 * SQRT_PI)),
            _ => Err(Error::Unsupported(format!("no closed-form strip norm for {}", self.name()))),
        }
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Physicists' Hermite polynomial `H_n(y)`.
pub(crate) fn hermite(n: usize, y: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * y);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = 2.0 * y * b - 2.0 * k as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// `∫_{|η|>a} |ĝ^{(n)}(η)| dη` for `ĝ(η) = √π e^{−η²/4}`. With `y = η/2`,
/// `ĝ^{(n)}(η) = √π (−½)ⁿ H_n(y) e^{−y²}`, so the integral is
/// `4√π 2^{−n} ∫_{a/2}^∞ |H_n(y)| e^{−y²} dy`. The quadrature runs to
/// `Y = max(a/2, n+1) + 12`; beyond `Y ≥ n` we use `|H_n(y)| ≤ 2(2y)ⁿ`, and
/// `∫_Y^∞ (2y)ⁿ e^{−y²} dy ≤ (2Y)ⁿ e^{−Y²}/(2Y − n/Y)` is added as a bound.
pub(crate) fn gauss_derivative_tail(n: usize, a: f64) -> f64 {
    let lo = a / 2.0;
    let hi = lo.max(n as f64 + 1.0) + 12.0;
    let r = quad::adaptive(|y| re(hermite(n, y).abs() * (-y * y).exp()), lo, hi, 1e-300, 1e-13, 4000);
    let tail = 2.0 * (2.0 * hi).powi(n as i32) * (-hi * hi).exp() / (2.0 * hi - n as f64 / hi);
    4.0 * SQRT_PI * 0.5f64.powi(n as i32) * (r.value.re + r.error + tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_envelope_at_zero_is_two_pi() {
        let v = SchwartzFunction::Gauss { t: 1.0 }.decay_envelope(0.0, 0).unwrap();
        assert!((v - 2.0 * PI).abs() < 1e-10, "{v}");
    }

    #[test]
    fn envelopes_decrease_to_zero() {
        for f in [
            SchwartzFunction::Gauss { t: 1.0 },
            SchwartzFunction::Xgauss { t: 0.7 },
            SchwartzFunction::UdotUinv { t: 2.0 },
            SchwartzFunction::WtMinus1 { t: 1.5 },
            SchwartzFunction::WdotWinv { t: 0.5 },
        ] {
            let mut prev = f64::INFINITY;
            for k in 0..40 {
                let v = f.decay_envelope(k as f64 * 0.5, 3).unwrap();
                assert!(v <= prev * (1.0 + 1e-12), "{} at {k}", f.name());
                prev = v;
            }
            assert!(prev < 1e-3 * f.decay_envelope(0.0, 3).unwrap(), "{}", f.name());
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let fs = [
            SchwartzFunction::Gauss { t: 1.3 },
            SchwartzFunction::Xgauss { t: 0.8 },
            SchwartzFunction::UtMinus1 { t: 1.1 },
            SchwartzFunction::UtInvMinus1 { t: 0.6 },
            SchwartzFunction::WtMinus1 { t: 2.0 },
            SchwartzFunction::WtInvMinus1 { t: 0.3 },
            SchwartzFunction::UdotUinv { t: 1.7 },
            SchwartzFunction::WdotWinv { t: 0.9 },
            SchwartzFunction::Identity,
        ];
        for f in fs {
            for &x in &[-1.7, -0.3, 0.0, 0.4, 2.2] {
                let h = 1e-5;
                let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
                assert!((fd - f.deriv(x)).norm() < 1e-7 * (1.0 + fd.norm()), "{} at {x}", f.name());
            }
        }
    }

    #[test]
    fn path_values_are_inverse_pairs() {
        for &x in &[-2.0, -0.1, 0.0, 0.5, 3.0] {
            for t in [0.2, 1.0, 4.0] {
                let u = SchwartzFunction::UtMinus1 { t }.eval(x) + 1.0;
                let v = SchwartzFunction::UtInvMinus1 { t }.eval(x) + 1.0;
                assert!((u * v - 1.0).norm() < 1e-14);
                let w = SchwartzFunction::WtMinus1 { t }.eval(x) + 1.0;
                let wi = SchwartzFunction::WtInvMinus1 { t }.eval(x) + 1.0;
                assert!((w * wi - 1.0).norm() < 1e-14);
                assert!((w - Complex64::new(t * x, -1.0) / Complex64::new(t * x, 1.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn logarithmic_derivatives_match_time_differences() {
        let (x, t, h) = (0.8, 1.3, 1e-5);
        let u = |t: f64| SchwartzFunction::UtMinus1 { t }.eval(x) + 1.0;
        let w = |t: f64| SchwartzFunction::WtMinus1 { t }.eval(x) + 1.0;
        let du = (u(t + h) - u(t - h)) / (2.0 * h) / u(t);
        let dw = (w(t + h) - w(t - h)) / (2.0 * h) / w(t);
        assert!((du - SchwartzFunction::UdotUinv { t }.eval(x)).norm() < 1e-8);
        assert!((dw - SchwartzFunction::WdotWinv { t }.eval(x)).norm() < 1e-8);
    }

    #[test]
    fn scaled_gauss_rescaling() {
        // Oracle integrates f̂_t^{(n)}(ξ) = (√π/t)(−1/(2t))ⁿ H_n(ξ/2t) e^{−ξ²/4t²}
        // directly in ξ, with no change of variables.
        for (t, s) in [(0.5, 1.0), (2.0, 3.0), (1.7, 0.2)] {
            for n in 0..4usize {
                let direct = |k: usize| {
                    let g = |xi: f64| {
                        let y = xi / (2.0 * t);
                        re(SQRT_PI / t * (0.5 / t).powi(k as i32) * hermite(k, y).abs() * (-y * y).exp())
                    };
                    2.0 * quad::adaptive(g, s, s + 2.0 * t * 40.0, 1e-300, 1e-13, 4000).value.re
                };
                let oracle = (0..=n).map(direct).fold(0.0, f64::max);
                let v = SchwartzFunction::Gauss { t }.decay_envelope(s, n).unwrap();
                assert!((v - oracle).abs() < 1e-9 * oracle, "t={t} s={s} n={n}: {v} vs {oracle}");
            }
        }
    }

    #[test]
    fn strip_norm_of_gauss() {
        // N = 0: sup |e^{−z²}| on |Im z| < Λ is e^{Λ²}.
        let v = SchwartzFunction::Gauss { t: 1.0 }.strip_norm(0.5, 0).unwrap();
        assert!((v - 0.25f64.exp()).abs() < 1e-14);
        assert!(SchwartzFunction::WtMinus1 { t: 1.0 }.strip_norm(0.5, 2).is_err());
    }
}
