//! Evaluation of the pairing `φ#tr(u̇u⁻¹, u−1, u⁻¹−1, …)` at one time `t`,
//! with the slots produced by the operator backend. Fourier models pair on
//! the dual grid when the cochain allows it and otherwise in real space on a
//! truncation radius chosen from coefficient decay; finite covers pair the
//! exact group-algebra elements.

use num_complex::Complex64;

use crate::algebra::{AlgebraElement, SpectralElement};
use crate::cyclic::Cochain;
use crate::operators::{Backend, EquivariantOperator, FiniteCover, SchwartzFunction, SymbolSpectrum};
use crate::{Error, Result};

/// Invertible path families given by functions of `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// `u_t = −exp(iπ erf(tD))`.
    Ut,
    /// `w_t = (tD − i)(tD + i)⁻¹`.
    Wt,
}

impl Family {
    pub fn dot(self, t: f64) -> SchwartzFunction {
        match self {
            Family::Ut => SchwartzFunction::UdotUinv { t },
            Family::Wt => SchwartzFunction::WdotWinv { t },
        }
    }
    pub fn minus(self, t: f64) -> SchwartzFunction {
        match self {
            Family::Ut => SchwartzFunction::UtMinus1 { t },
            Family::Wt => SchwartzFunction::WtMinus1 { t },
        }
    }
    pub fn inv(self, t: f64) -> SchwartzFunction {
        match self {
            Family::Ut => SchwartzFunction::UtInvMinus1 { t },
            Family::Wt => SchwartzFunction::WtInvMinus1 { t },
        }
    }
    pub fn name(self) -> &'static str {
        match self {
            Family::Ut => "ut",
            Family::Wt => "wt",
        }
    }
}

/// Largest real-space ball used for Fourier slots.
const MAX_REAL_BALL: usize = 4000;

enum Mode<'a> {
    Spectral { spec: SymbolSpectrum, jets: bool },
    Real { spec: SymbolSpectrum, radius: usize },
    Cover(&'a FiniteCover),
}

pub(crate) struct SlotEngine<'a> {
    phi: &'a dyn Cochain,
    mode: Mode<'a>,
    nodes: usize,
}

impl<'a> SlotEngine<'a> {
    /// `nodes` is the dual-grid size per lattice direction (ignored for
    /// finite covers); `probe` are times at which the real-space radius is
    /// chosen.
    pub fn new(op: &'a EquivariantOperator, phi: &'a dyn Cochain, family: Family, nodes: usize, probe: &[f64]) -> Result<Self> {
        if phi.group().kind() != op.group().kind() {
            return Err(Error::Shape("cochain and operator live over different groups".into()));
        }
        let mode = match op.backend() {
            Backend::FiniteCover(fc) => {
                if !fc.is_regular() {
                    return Err(Error::Unsupported("higher pairings need the regular deck action".into()));
                }
                Mode::Cover(fc)
            }
            Backend::FreeConvolution(_) => {
                return Err(Error::Unsupported(
                    "the Chebyshev backend has no certified eta integrand; use a Fourier or finite-cover model".into(),
                ))
            }
            Backend::FourierSymbol(fs) => {
                let spec = fs.spectrum(nodes)?;
                let jets = phi.spectral_needs_jets();
                let unit = SpectralElement::unit(spec.grid(), spec.dim(), jets);
                let units = vec![&unit; phi.degree() + 1];
                match phi.pair_spectral(&units) {
                    Ok(_) => Mode::Spectral { spec, jets },
                    Err(Error::Unsupported(_)) => {
                        let radius = choose_radius(&spec, phi, family, nodes, probe)?;
                        Mode::Real { spec, radius }
                    }
                    Err(e) => return Err(e),
                }
            }
        };
        Ok(SlotEngine { phi, mode, nodes })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn describe(&self) -> String {
        match &self.mode {
            Mode::Spectral { .. } => format!("dual-grid pairing, {} nodes per direction", self.nodes),
            Mode::Real { radius, .. } => {
                format!("real-space pairing on B_{radius} from a {}-node dual grid", self.nodes)
            }
            Mode::Cover(_) => "exact finite-cover pairing".into(),
        }
    }

    /// `φ#tr(w₀, …, w_n)` for slots `f_i(D)`.
    pub fn pair_functions(&self, fs: &[SchwartzFunction]) -> Result<Complex64> {
        match &self.mode {
            Mode::Spectral { spec, jets } => {
                let slots: Vec<SpectralElement> = fs.iter().map(|f| spec.apply_fn(f, *jets)).collect();
                let refs: Vec<&SpectralElement> = slots.iter().collect();
                self.phi.pair_spectral(&refs)
            }
            Mode::Real { spec, radius } => {
                let slots: Vec<AlgebraElement> =
                    fs.iter().map(|f| spec.apply_fn(f, false).to_algebra(*radius)).collect::<Result<_>>()?;
                let refs: Vec<&AlgebraElement> = slots.iter().collect();
                self.phi.pair(&refs)
            }
            Mode::Cover(fc) => {
                let slots: Vec<AlgebraElement> = fs.iter().map(|f| fc.calculus(|x| f.eval(x))).collect::<Result<_>>()?;
                let refs: Vec<&AlgebraElement> = slots.iter().collect();
                self.phi.pair(&refs)
            }
        }
    }

    /// Raw integrand `φ#tr(u̇u⁻¹ ⊗ ((u−1) ⊗ (u⁻¹−1))^{⊗m})` at time `t`.
    pub fn integrand(&self, family: Family, t: f64) -> Result<Complex64> {
        let m = self.phi.degree() / 2;
        let mut fs = Vec::with_capacity(2 * m + 1);
        fs.push(family.dot(t));
        for _ in 0..m {
            fs.push(family.minus(t));
            fs.push(family.inv(t));
        }
        self.pair_functions(&fs)
    }

    /// `φ#tr(((u−1) ⊗ (u⁻¹−1))^{⊗m})` for an odd cochain of degree `2m−1`.
    pub fn loop_pairing(&self, family: Family, t: f64) -> Result<Complex64> {
        let n = self.phi.degree() + 1;
        if n % 2 == 1 {
            return Err(Error::Shape("loop pairing needs an odd cochain".into()));
        }
        let fs: Vec<SchwartzFunction> =
            (0..n).map(|i| if i % 2 == 0 { family.minus(t) } else { family.inv(t) }).collect();
        self.pair_functions(&fs)
    }

    /// `max‖(1 + (w−1))(1 + (w⁻¹−1)) − 1‖` over the sampled representation.
    pub fn invertibility_defect(&self, family: Family, t: f64) -> Result<f64> {
        let one = Complex64::new(1.0, 0.0);
        match &self.mode {
            Mode::Spectral { spec, .. } | Mode::Real { spec, .. } => {
                let a = spec.apply_fn(&family.minus(t), false).add_unit(one);
                let b = spec.apply_fn(&family.inv(t), false).add_unit(one);
                let p = a.mul(&b)?.add_unit(-one);
                Ok(p.values().iter().map(|z| z.norm()).fold(0.0, f64::max))
            }
            Mode::Cover(fc) => {
                let a = fc.calculus(|x| family.minus(t).eval(x))?.add_unit(one);
                let b = fc.calculus(|x| family.inv(t).eval(x))?.add_unit(one);
                let p = a.convolve(&b)?.add_unit(-one);
                Ok(p.iter().map(|(_, b)| crate::linalg::max_abs(b)).fold(0.0, f64::max))
            }
        }
    }
}

/// Smallest radius whose excluded coefficients, weighted by the cochain's
/// growth envelope, are below `10⁻¹³` of the total at every probe time.
fn choose_radius(spec: &SymbolSpectrum, phi: &dyn Cochain, family: Family, nodes: usize, probe: &[f64]) -> Result<usize> {
    let group = phi.group();
    let mut rmax = nodes / 2 - 1;
    while rmax > 1 && group.ball(rmax)?.len() > MAX_REAL_BALL {
        rmax -= 1;
    }
    let growth = phi.growth();
    let base = growth.bound(&[0]).max(1e-300);
    let mut radius = 1;
    for &t in probe {
        for f in [family.dot(t), family.minus(t), family.inv(t)] {
            let a = spec.apply_fn(&f, false).to_algebra(rmax)?;
            let mut by_len = vec![0.0; rmax + 1];
            for (g, b) in a.iter() {
                let l = group.word_length(g);
                by_len[l] += crate::linalg::max_abs(b) * growth.bound(&[l]) / base;
            }
            let total: f64 = by_len.iter().sum();
            let mut tail = 0.0;
            let mut r = rmax;
            while r > 0 && tail + by_len[r] <= 1e-13 * total {
                tail += by_len[r];
                r -= 1;
            }
            radius = radius.max(r);
        }
    }
    Ok(radius)
}
