//! Subcommands. Each returns an [`Outcome`]: the report body, the list of
//! failed certificates, and optional CSV rows.

use std::sync::Arc;

use deloc::algebra::{element_from_json, norm_report, AlgebraElement};
use deloc::cyclic::checks::{check_cocycle, check_cyclic, check_normalized, check_support, growth_certify, CheckReport};
use deloc::cyclic::{AreaCocycle, ClassTrace, Coboundary, CochainRef, Idempotent, Periodicity, RandomCyclic, TableCochain};
use deloc::eta::{eta_class, eta_higher, EtaOptions, EtaReport};
use deloc::fixtures;
use deloc::groups::{ConjugacyClass, Group, GroupModel};
use deloc::operators::dense::DENSE_LIMIT;
use deloc::operators::{Backend, DenseTruncation, EquivariantOperator, OperatorSpec, SchwartzFunction};
use deloc::pairing::{boundary_identity, local_loop_vanishing};
use deloc::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{CocycleKind, CocycleSpec, RunConfig};
use crate::CliError;

pub struct Outcome {
    pub result: Value,
    pub failures: Vec<String>,
    pub csv: Option<String>,
}

impl Outcome {
    fn new(result: impl Serialize, failures: Vec<String>) -> Result<Self, CliError> {
        let result = serde_json::to_value(result).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(Outcome { result, failures, csv: None })
    }
}

/// Everything resolved from a configuration before any computation.
struct Context {
    group: Option<Group>,
    operator: Option<EquivariantOperator>,
    class: Option<ConjugacyClass>,
}

fn resolve(c: &RunConfig) -> Result<Context, CliError> {
    let mut group = match &c.group {
        Some(kind) => Some(GroupModel::new(kind.clone())?),
        None => None,
    };
    let operator = match &c.operator {
        Some(spec) => {
            let op = EquivariantOperator::from_spec(spec, group.as_ref())?;
            if let Some(g) = &group {
                if g.kind() != op.group().kind() {
                    return Err(CliError::Config("operator group differs from the configured group".into()));
                }
            }
            group = Some(op.group().clone());
            Some(op)
        }
        None => None,
    };
    let class = match &c.class {
        Some(v) => {
            let g = group.as_ref().ok_or_else(|| CliError::Config("class needs a group or an operator".into()))?;
            Some(ConjugacyClass::new(g, g.parse_element(v)?)?)
        }
        None => None,
    };
    Ok(Context { group, operator, class })
}

fn need<'a, T>(x: &'a Option<T>, what: &str) -> Result<&'a T, CliError> {
    x.as_ref().ok_or_else(|| CliError::Config(format!("this subcommand needs {what}")))
}

fn build_cocycle(spec: &CocycleSpec, ctx: &Context, seed: u64) -> Result<CochainRef, CliError> {
    let group = need(&ctx.group, "a group")?;
    let class = || need(&ctx.class, "a class").cloned();
    let restricted = || -> Result<Option<ConjugacyClass>, CliError> {
        if spec.delocalized.unwrap_or(false) {
            Ok(Some(class()?))
        } else {
            Ok(None)
        }
    };
    let mut phi: CochainRef = match spec.kind {
        CocycleKind::Trace => Arc::new(ClassTrace::new(class()?)),
        CocycleKind::Area => Arc::new(AreaCocycle::new(group, class()?.representative().clone())?),
        CocycleKind::Random => Arc::new(RandomCyclic::new(
            group,
            spec.degree.unwrap_or(0),
            restricted()?,
            spec.c.unwrap_or(1.0),
            spec.k.unwrap_or(0.1),
            seed,
        )),
        CocycleKind::Table => {
            let entries = spec.entries.as_deref().unwrap_or_default();
            let mut values = Vec::with_capacity(entries.len());
            for e in entries {
                let args = e.args.iter().map(|v| group.parse_element(v)).collect::<deloc::Result<Vec<_>>>()?;
                values.push((args, Complex64::new(e.value[0], e.value[1])));
            }
            Arc::new(TableCochain::new(group, spec.degree.unwrap_or(0), restricted()?, values, "table")?)
        }
    };
    if spec.coboundary {
        phi = Arc::new(Coboundary::new(phi));
    }
    for _ in 0..spec.periodicity {
        phi = Arc::new(Periodicity::new(phi)?);
    }
    Ok(phi)
}

fn eta_options(c: &RunConfig) -> EtaOptions {
    EtaOptions {
        tol: c.tolerances.tol,
        quad_rel: c.tolerances.quad_rel,
        tail_frac: c.tolerances.tail_frac,
        growth_radius: c.radii.growth,
        seed: c.seed,
        ..Default::default()
    }
}

fn eta_outcome(r: EtaReport) -> Result<Outcome, CliError> {
    let mut failures = Vec::new();
    if !r.certified() {
        failures.push(format!("error certificate {:.3e} does not meet tolerance {:.3e}", r.error, r.tolerance));
    }
    if !r.threshold_verdict.passed {
        failures.push(format!(
            "spectral gap {:.4} is not above the threshold {} = {:.4}",
            r.threshold_verdict.gap, r.threshold_verdict.compared_to, r.threshold_verdict.threshold
        ));
    }
    let csv = r.integrand_csv();
    let mut o = Outcome::new(&r, failures)?;
    o.csv = Some(csv);
    Ok(o)
}

pub fn eta(c: &RunConfig) -> Result<Outcome, CliError> {
    let ctx = resolve(c)?;
    let op = need(&ctx.operator, "an operator")?;
    let class = need(&ctx.class, "a class")?;
    eta_outcome(eta_class(op, class, &eta_options(c))?)
}

pub fn higher_eta(c: &RunConfig) -> Result<Outcome, CliError> {
    let ctx = resolve(c)?;
    let op = need(&ctx.operator, "an operator")?;
    let phi = build_cocycle(need(&c.cocycle, "a cocycle")?, &ctx, c.seed)?;
    eta_outcome(eta_higher(op, phi.as_ref(), &eta_options(c))?)
}

pub fn gap(c: &RunConfig) -> Result<Outcome, CliError> {
    let ctx = resolve(c)?;
    let cert = need(&ctx.operator, "an operator")?.gap_certificate()?;
    let failures = if cert.sigma > 0.0 { vec![] } else { vec![format!("no spectral gap certified (sigma = {:.3e})", cert.sigma)] };
    Outcome::new(cert, failures)
}

pub fn norms(c: &RunConfig) -> Result<Outcome, CliError> {
    let ctx = resolve(c)?;
    let a = match (&c.element, &c.operator) {
        (Some(v), _) => element_from_json(v, ctx.group.as_ref())?,
        (None, Some(spec)) => element_from_json(
            spec_symbol(spec).ok_or_else(|| CliError::Config("operator has no symbol; set element".into()))?,
            ctx.group.as_ref(),
        )?,
        (None, None) => return Err(CliError::Config("norms needs an element or an operator".into())),
    };
    let mut r = serde_json::to_value(norm_report(&a, c.norms.p, c.norms.k, c.norms.q)?).map_err(|e| CliError::Io(e.to_string()))?;
    r["certificate"] = json!("exact");
    Outcome::new(r, vec![])
}

fn spec_symbol(spec: &OperatorSpec) -> Option<&Value> {
    match spec {
        OperatorSpec::Auto { symbol } | OperatorSpec::FourierSymbol { symbol } | OperatorSpec::FreeConvolution { symbol } => Some(symbol),
        OperatorSpec::FiniteCover { symbol, .. } => symbol.as_ref(),
    }
}

pub fn cocycle_check(c: &RunConfig) -> Result<Outcome, CliError> {
    let ctx = resolve(c)?;
    let spec = need(&c.cocycle, "a cocycle")?;
    let phi = build_cocycle(spec, &ctx, c.seed)?;
    let (r, b, seed, tol) = (c.radii.check, c.radii.budget, c.seed, c.tolerances.tol);
    let mut checks: Vec<CheckReport> =
        vec![check_cyclic(phi.as_ref(), r, b, seed, tol)?, check_cocycle(phi.as_ref(), r, b, seed, tol)?];
    if phi.support_class().is_some() {
        checks.push(check_support(phi.as_ref(), r, b, seed)?);
    }
    if phi.normalized() {
        checks.push(check_normalized(phi.as_ref(), r, b, seed)?);
    }
    checks.push(growth_certify(phi.as_ref(), r, b, seed)?);
    let mut failures: Vec<String> = checks.iter().filter(|x| !x.passed).map(describe_failure).collect();
    let mut periodicity = None;
    if failures.is_empty() {
        let s: CochainRef = Arc::new(Periodicity::new(phi.clone())?);
        let sr = check_cocycle(s.as_ref(), r.min(1), b, seed, tol)?;
        if !sr.passed {
            failures.push(describe_failure(&sr));
        }
        periodicity = Some(sr);
    }
    Outcome::new(json!({ "cochain": phi.name(), "degree": phi.degree(), "checks": checks, "periodicity": periodicity }), failures)
}

fn describe_failure(r: &CheckReport) -> String {
    let witness = r.witness.as_ref().map(|w| serde_json::to_string(w).unwrap_or_default()).unwrap_or_else(|| "none".into());
    format!("{} failed for {} (defect {:.3e}); witness tuple {witness}", r.check, r.cochain, r.max_defect)
}

pub fn boundary_check(c: &RunConfig) -> Result<Outcome, CliError> {
    let tol = c.tolerances.tol;
    let cases: Vec<(String, CochainRef, Idempotent)> = match (&c.cocycle, &c.idempotent) {
        (Some(spec), Some(p)) => {
            let ctx = resolve(c)?;
            let phi = build_cocycle(spec, &ctx, c.seed)?;
            let p = Idempotent::new(element_from_json(p, ctx.group.as_ref())?)?;
            vec![("configured".into(), phi, p)]
        }
        (None, None) => fixtures::idempotent_fixtures()?.into_iter().map(|f| (f.name.to_string(), f.phi, f.p)).collect(),
        _ => return Err(CliError::Config("boundary-check needs both cocycle and idempotent, or neither for the shipped fixtures".into())),
    };
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for (name, phi, p) in cases {
        let r = boundary_identity(phi.as_ref(), &p, tol)?;
        if !r.passed {
            failures.push(format!("{name}: |tau(dp) + 2 ch(p)| = {:.3e} exceeds {tol:.3e}", r.difference));
        }
        let local = match local_loop_vanishing(phi.as_ref(), &p, tol) {
            Ok(l) => {
                if !l.passed {
                    failures.push(format!("{name}: local loop pairing {:.3e} is not zero", l.value.complex().norm()));
                }
                serde_json::to_value(l).map_err(|e| CliError::Io(e.to_string()))?
            }
            Err(deloc::Error::Precondition(msg)) => json!({ "skipped": msg }),
            Err(e) => return Err(e.into()),
        };
        rows.push(json!({ "case": name, "boundary": r, "local_loop": local }));
    }
    Outcome::new(json!({ "cases": rows }), failures)
}

fn oracle_functions() -> Vec<SchwartzFunction> {
    vec![SchwartzFunction::Gauss { t: 1.0 }, SchwartzFunction::Xgauss { t: 1.0 }, SchwartzFunction::UtMinus1 { t: 1.0 }]
}

/// Largest ball within a quarter of the dense budget, at most 15 steps
/// beyond `r`; the compared functions are entire, so their coefficients decay
/// faster than any exponential and the boundary is invisible at that margin.
fn dense_radius(a: &AlgebraElement, r: usize) -> Result<usize, CliError> {
    let group = a.group();
    let mut l = r;
    while l < r + 15 && group.ball(l + 1)?.len() * a.dim() <= DENSE_LIMIT / 4 {
        l += 1;
    }
    Ok(l)
}

pub fn oracle_compare(c: &RunConfig) -> Result<Outcome, CliError> {
    let ctx = resolve(c)?;
    let op = need(&ctx.operator, "an operator")?;
    let symbol = match op.backend() {
        Backend::FourierSymbol(fs) => fs.symbol().clone(),
        Backend::FreeConvolution(fc) => fc.element().clone(),
        Backend::FiniteCover(_) => match c.operator.as_ref().and_then(spec_symbol) {
            Some(v) => element_from_json(v, ctx.group.as_ref())?,
            None => return Err(CliError::Config("oracle-compare needs an operator given by a symbol".into())),
        },
    };
    let r = c.radii.truncation.max(op.band());
    let l = match c.radii.dense {
        Some(l) => l,
        None => dense_radius(&symbol, r)?,
    };
    let dense = DenseTruncation::new(&symbol, l)?;
    let group = op.group().clone();
    let ball = group.ball(r)?;
    let tol = c.tolerances.tol;
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for f in oracle_functions() {
        let calc = op.functional_calculus(&f, r, 0.01 * tol)?;
        let zero = vec![Complex64::new(0.0, 0.0); op.dim() * op.dim()];
        let mut max_diff: f64 = 0.0;
        let mut worst = group.identity();
        for g in ball.elements.iter() {
            let d = dense.coefficient(&|x| f.eval(x), g)?;
            let b = calc.element.block(g).unwrap_or(&zero);
            let diff = d.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            if diff > max_diff {
                max_diff = diff;
                worst = g.clone();
            }
        }
        if max_diff > tol {
            failures.push(format!("{}: backend and dense oracle differ by {max_diff:.3e} at {}", f.name(), group.format(&worst)));
        }
        rows.push(json!({
            "function": f.name(),
            "max_diff": max_diff,
            "worst_element": group.element_to_json(&worst),
            "backend_error": calc.max_error,
            "backend_method": calc.method,
            "passed": max_diff <= tol,
        }));
    }
    Outcome::new(json!({ "radius": r, "dense_radius": l, "comparisons": rows }), failures)
}
