//! Self-adjoint equivariant operators with finite propagation and a
//! certified functional calculus.
//!
//! Three backends share one interface:
//! - [`FourierSymbol`] for `ℤ^d × Πℤ/k`, diagonalizing the symbol on a dual grid;
//! - [`FiniteCover`] for finite groups, a dense matrix with a deck action;
//! - [`FreeConvolution`] for any group (free groups in practice), by Chebyshev
//!   polynomials of the convolution operator.
//!
//! Class traces that feed the eta engine go through a [`SpectralMeasure`]:
//! nodes `λ_k` with complex weights `c_k` such that the class trace of
//! `f(D)` is `Σ_k c_k f(λ_k)`.

pub mod cover;
pub mod dense;
pub mod fourier;
pub mod free;
pub mod functions;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use cover::FiniteCover;
pub use dense::DenseTruncation;
pub use fourier::{FourierSymbol, GapReport, SymbolSpectrum};
pub use free::FreeConvolution;
pub use functions::SchwartzFunction;

use crate::algebra::{element_from_json, AlgebraElement};
use crate::groups::{ConjugacyClass, Element, Group, GroupKind, GroupModel};
use crate::linalg::{self, CMat};
use crate::{Error, Result};

/// Default cone slack `μ > 1` in kernel-decay certificates.
pub const MU: f64 = 1.1;

/// Largest Chebyshev degree the free backend will evaluate.
const MAX_CHEBYSHEV_DEGREE: usize = 400;

/// Discrete measure `Σ_k c_k δ_{λ_k}` representing a class trace.
#[derive(Clone, Debug)]
pub struct SpectralMeasure {
    nodes: Vec<f64>,
    weights: Vec<Complex64>,
}

impl SpectralMeasure {
    pub fn new(nodes: Vec<f64>, weights: Vec<Complex64>) -> Self {
        assert_eq!(nodes.len(), weights.len(), "one weight per node");
        SpectralMeasure { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn integrate(&self, f: impl Fn(f64) -> Complex64) -> Complex64 {
        self.nodes.iter().zip(&self.weights).map(|(x, c)| c * f(*x)).sum()
    }

    /// `Σ|c_k|`, which bounds `|∫f| ≤ sup|f|·Σ|c_k|`.
    pub fn total_variation(&self) -> f64 {
        self.weights.iter().map(|c| c.norm()).sum()
    }

    /// Smallest `|λ_k|` among nodes with non-negligible weight.
    pub fn gap(&self) -> f64 {
        let w = self.total_variation();
        self.nodes
            .iter()
            .zip(&self.weights)
            .filter(|(_, c)| c.norm() > 1e-15 * (1.0 + w))
            .map(|(x, _)| x.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug)]
pub enum Backend {
    FourierSymbol(FourierSymbol),
    FiniteCover(FiniteCover),
    FreeConvolution(FreeConvolution),
}

#[derive(Clone, Debug)]
pub struct EquivariantOperator {
    group: Group,
    backend: Backend,
    band: usize,
    dim: usize,
    norm_bound: f64,
}

/// Result of a functional calculus with per-coefficient error bounds.
#[derive(Clone, Debug)]
pub struct Calculus {
    pub element: AlgebraElement,
    pub errors: Vec<(Element, f64)>,
    pub max_error: f64,
    /// Whether the requested tolerance was met within the budget.
    pub converged: bool,
    pub method: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassTraceReport {
    pub re: f64,
    pub im: f64,
    pub error: f64,
    pub converged: bool,
    pub method: String,
}

impl ClassTraceReport {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl EquivariantOperator {
    pub fn fourier(symbol: AlgebraElement) -> Result<Self> {
        let fs = FourierSymbol::new(symbol)?;
        let s = fs.symbol();
        let norm_bound = l1_norm(s);
        Ok(EquivariantOperator {
            group: s.group().clone(),
            band: s.propagation().max(1),
            dim: s.dim(),
            norm_bound,
            backend: Backend::FourierSymbol(fs),
        })
    }

    pub fn finite_cover(fc: FiniteCover) -> Result<Self> {
        let group = fc.group().clone();
        let band = if fc.is_regular() {
            fc.calculus(|x| Complex64::new(x, 0.0))?.propagation().max(1)
        } else {
            // Without the regular structure every deck element may be reached.
            crate::operators::cover::all_elements(&group)?.iter().map(|g| group.word_length(g)).max().unwrap_or(0).max(1)
        };
        Ok(EquivariantOperator { group, band, dim: fc.block_dim(), norm_bound: fc.norm(), backend: Backend::FiniteCover(fc) })
    }

    pub fn free_convolution(a: AlgebraElement) -> Result<Self> {
        let fc = FreeConvolution::new(a)?;
        Ok(EquivariantOperator {
            group: fc.element().group().clone(),
            band: fc.band(),
            dim: fc.element().dim(),
            norm_bound: fc.norm_bound(),
            backend: Backend::FreeConvolution(fc),
        })
    }

    /// Picks the backend from the group: Fourier for abelian torus duals with
    /// a lattice part, the finite cover for other finite groups, Chebyshev
    /// otherwise.
    pub fn from_element(a: AlgebraElement) -> Result<Self> {
        let g = a.group();
        if g.has_torus_dual() && g.lattice_rank() > 0 {
            Self::fourier(a)
        } else if g.is_finite() {
            Self::finite_cover(FiniteCover::from_element(&a)?)
        } else {
            Self::free_convolution(a)
        }
    }

    pub fn from_spec(spec: &OperatorSpec, group: Option<&Group>) -> Result<Self> {
        match spec {
            OperatorSpec::Auto { symbol } => Self::from_element(element_from_json(symbol, group)?),
            OperatorSpec::FourierSymbol { symbol } => Self::fourier(element_from_json(symbol, group)?),
            OperatorSpec::FreeConvolution { symbol } => Self::free_convolution(element_from_json(symbol, group)?),
            OperatorSpec::FiniteCover { symbol: Some(symbol), group: None, matrix: None, deck: None } => {
                Self::finite_cover(FiniteCover::from_element(&element_from_json(symbol, group)?)?)
            }
            OperatorSpec::FiniteCover { symbol: None, group: Some(kind), matrix: Some(m), deck: Some(deck) } => {
                let g = match group {
                    Some(g) if g.kind() == kind => g.clone(),
                    Some(_) => return Err(Error::Shape("operator group differs from the configured group".into())),
                    None => GroupModel::new(kind.clone())?,
                };
                let matrix = parse_matrix(m)?;
                let mut ops = Vec::with_capacity(deck.len());
                for e in deck {
                    ops.push((g.parse_element(&e.element)?, parse_matrix(&e.matrix)?));
                }
                Self::finite_cover(FiniteCover::new(&g, matrix, ops)?)
            }
            OperatorSpec::FiniteCover { .. } => Err(Error::Representation(
                "finite_cover needs either `symbol` or all of `group`, `matrix` and `deck`".into(),
            )),
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Upper bound for `‖D‖`.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    /// Effective light-cone constant `c_D = band·‖D‖`.
    pub fn c_d(&self) -> f64 {
        self.band as f64 * self.norm_bound
    }

    /// `f(D)` on `B_R` with per-coefficient errors.
    pub fn functional_calculus(&self, f: &SchwartzFunction, radius: usize, tol: f64) -> Result<Calculus> {
        f.validate()?;
        if radius < self.band {
            return Err(Error::Precondition(format!("truncation radius {radius} is below the band {}", self.band)));
        }
        match &self.backend {
            Backend::FourierSymbol(fs) => {
                if matches!(f, SchwartzFunction::Identity) {
                    let element = fs.symbol().truncate(radius);
                    return Ok(exact(element, "symbol itself"));
                }
                let (element, errors, converged) = fs.calculus(f, radius, tol)?;
                let max_error = errors.iter().map(|(_, e)| *e).fold(0.0, f64::max);
                Ok(Calculus { element, errors, max_error, converged, method: "dual-grid quadrature, doubled until agreement".into() })
            }
            Backend::FiniteCover(fc) => {
                let element = fc.calculus(|x| f.eval(x))?.truncate(radius);
                Ok(exact(element, "dense eigendecomposition"))
            }
            Backend::FreeConvolution(fc) => {
                if matches!(f, SchwartzFunction::Identity) {
                    return Ok(exact(fc.element().truncate(radius), "symbol itself"));
                }
                let max_degree = self.feasible_degree(radius)?;
                let r = fc.calculus(&|x| f.eval(x), radius, tol, max_degree)?;
                let errors = self.group.ball(radius)?.elements.iter().map(|g| (g.clone(), r.error)).collect();
                Ok(Calculus {
                    element: r.element,
                    errors,
                    max_error: r.error,
                    converged: r.converged && r.error <= tol,
                    method: format!("Chebyshev series of degree {}", r.degree),
                })
            }
        }
    }

    /// Highest polynomial degree whose light cone from `B_R` fits the ball budget.
    fn feasible_degree(&self, radius: usize) -> Result<usize> {
        let budget = self.group.budget() as f64;
        let sizes = free::ball_sizes(&self.group, radius + MAX_CHEBYSHEV_DEGREE * self.band);
        let k = (0..=MAX_CHEBYSHEV_DEGREE).take_while(|k| sizes[radius + k * self.band] <= budget).last();
        k.ok_or_else(|| Error::Resource(format!("ball of radius {radius} exceeds the group budget")))
    }

    /// `Σ_{g∈⟨h⟩} tr f(D)_g` with an error certificate.
    pub fn class_trace(&self, f: &SchwartzFunction, class: &ConjugacyClass, tol: f64) -> Result<ClassTraceReport> {
        f.validate()?;
        if class.group().kind() != self.group.kind() {
            return Err(Error::Shape("class and operator live over different groups".into()));
        }
        let report = |v: Complex64, error: f64, converged: bool, method: String| ClassTraceReport {
            re: v.re,
            im: v.im,
            error,
            converged,
            method,
        };
        match &self.backend {
            Backend::FourierSymbol(fs) => {
                // Abelian: the class is the representative alone.
                let h = class.representative();
                let mut n = fs.base_nodes(self.group.word_length(h) + self.band);
                let mut prev = fs.spectrum(n)?.measure(h).integrate(|x| f.eval(x));
                loop {
                    let m = 2 * n;
                    if fourier::grid_points(&self.group, m) * self.dim * self.dim > fourier::GRID_BUDGET {
                        return Ok(report(prev, f64::INFINITY, false, format!("dual grid {n}, budget reached")));
                    }
                    let next = fs.spectrum(m)?.measure(h).integrate(|x| f.eval(x));
                    let diff = (next - prev).norm();
                    if diff <= 0.1 * tol {
                        return Ok(report(next, diff, true, format!("dual grid {m}")));
                    }
                    n = m;
                    prev = next;
                }
            }
            Backend::FiniteCover(fc) => {
                let mu = fc.measure(class)?;
                let v = mu.integrate(|x| f.eval(x));
                // Rounding of one eigendecomposition.
                let err = 1e-13 * mu.total_variation() * (1.0 + self.norm_bound);
                Ok(report(v, err, true, "exact eigendecomposition".into()))
            }
            Backend::FreeConvolution(fc) => {
                let max_degree = self.feasible_degree(0)?;
                let (v, err, k) = fc.class_trace(&|x| f.eval(x), class, tol, max_degree)?;
                Ok(report(v, err, err <= tol, format!("Chebyshev series of degree {k}")))
            }
        }
    }

    /// Spectral measure of the class trace. The Fourier backend samples the
    /// dual grid with `nodes` points per lattice direction; the finite cover
    /// is exact and ignores `nodes`.
    pub fn measure(&self, class: &ConjugacyClass, nodes: usize) -> Result<SpectralMeasure> {
        match &self.backend {
            Backend::FourierSymbol(fs) => Ok(fs.spectrum(nodes)?.measure(class.representative())),
            Backend::FiniteCover(fc) => fc.measure(class),
            Backend::FreeConvolution(_) => Err(Error::Unsupported(
                "the Chebyshev backend has no spectral measure; eta needs the Fourier or finite-cover backend".into(),
            )),
        }
    }

    pub fn gap_certificate(&self) -> Result<GapCertificate> {
        match &self.backend {
            Backend::FourierSymbol(fs) => {
                let r = fs.gap_certificate()?;
                Ok(GapCertificate { sigma: r.sigma, upper: r.grid_min, kernel_dim: None, method: format!("{} ({} nodes)", r.method, r.nodes) })
            }
            Backend::FiniteCover(fc) => {
                let (sigma, kernel) = fc.gap();
                Ok(GapCertificate { sigma, upper: sigma, kernel_dim: Some(kernel), method: "exact eigenvalues".into() })
            }
            Backend::FreeConvolution(fc) => {
                let (sigma, method) = fc.gap_certificate();
                Ok(GapCertificate { sigma, upper: f64::INFINITY, kernel_dim: Some(0).filter(|_| sigma > 0.0), method })
            }
        }
    }

    /// `F_f(ℓ(g)/(μ c_D))`, the shape of the kernel-decay bound at `g`.
    pub fn decay_envelope(&self, f: &SchwartzFunction, g: &Element, n_max: usize, mu: f64) -> Result<f64> {
        f.decay_envelope(self.group.word_length(g) as f64 / (mu * self.c_d()), n_max)
    }
}

fn exact(element: AlgebraElement, method: &str) -> Calculus {
    let errors = element.support().map(|g| (g.clone(), 0.0)).collect();
    Calculus { element, errors, max_error: 0.0, converged: true, method: method.into() }
}

fn l1_norm(a: &AlgebraElement) -> f64 {
    a.iter().map(|(_, b)| linalg::op_norm(b, a.dim())).sum()
}

#[derive(Clone, Debug, Serialize)]
pub struct GapCertificate {
    /// Certified lower bound on the distance from 0 to the nonzero spectrum.
    pub sigma: f64,
    /// An upper bound or observed value, for diagnostics.
    pub upper: f64,
    /// Kernel dimension when the backend resolves it.
    pub kernel_dim: Option<usize>,
    pub method: String,
}

/// Operator section of a configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    /// Backend chosen from the group.
    Auto { symbol: Value },
    FourierSymbol { symbol: Value },
    FreeConvolution { symbol: Value },
    /// Either the regular action of `symbol`, or an explicit matrix and deck.
    FiniteCover {
        #[serde(default)]
        symbol: Option<Value>,
        #[serde(default)]
        group: Option<GroupKind>,
        #[serde(default)]
        matrix: Option<Vec<Vec<[f64; 2]>>>,
        #[serde(default)]
        deck: Option<Vec<DeckEntry>>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeckEntry {
    pub element: Value,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

fn parse_matrix(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("matrix is not square".into()));
    }
    Ok(CMat::from_fn(n, n, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}
