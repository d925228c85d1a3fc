//! Run configuration. Two input forms are accepted: JSON, or flat text with
//! one `dotted.key = value` per line, where each value is read as JSON when
//! it parses and as a bare string otherwise. Both forms go through the same
//! typed schema, which rejects unknown keys.

use std::collections::BTreeMap;

use deloc::cyclic::checks::DEFAULT_SEED;
use deloc::operators::OperatorSpec;
use deloc::groups::GroupKind;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub group: Option<GroupKind>,
    #[serde(default)]
    pub operator: Option<OperatorSpec>,
    /// Representative of the conjugacy class.
    #[serde(default)]
    pub class: Option<Value>,
    #[serde(default)]
    pub cocycle: Option<CocycleSpec>,
    /// Algebra element for `norms`; defaults to the operator symbol.
    #[serde(default)]
    pub element: Option<Value>,
    /// Idempotent for `boundary-check`.
    #[serde(default)]
    pub idempotent: Option<Value>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub radii: Radii,
    #[serde(default)]
    pub norms: NormParams,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: Output,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub tol: f64,
    pub quad_rel: f64,
    pub tail_frac: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { tol: 1e-6, quad_rel: 0.0, tail_frac: 0.1 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Radii {
    /// Ball radius for sampled cochain checks.
    pub check: usize,
    /// Tuple budget for sampled cochain checks.
    pub budget: usize,
    /// Sphere radius behind the growth constants.
    pub growth: usize,
    /// Radius on which backends are compared with the oracle.
    pub truncation: usize,
    /// Radius of the dense oracle; chosen from the matrix budget when absent.
    pub dense: Option<usize>,
}

impl Default for Radii {
    fn default() -> Self {
        Radii { check: 2, budget: 20_000, growth: 8, truncation: 5, dense: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormParams {
    pub p: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub q: usize,
}

impl Default for NormParams {
    fn default() -> Self {
        NormParams { p: 2.0, k: 1.0, q: 1 }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// JSON report path; standard output when absent.
    #[serde(default)]
    pub report: Option<String>,
    /// CSV integrand dump path.
    #[serde(default)]
    pub integrand: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CocycleKind {
    /// `tr_⟨h⟩` on the configured class.
    Trace,
    /// The area 2-cocycle at the configured class.
    Area,
    /// Seeded random cyclic cochain with controlled growth.
    Random,
    /// Explicit values on finitely many tuples, zero elsewhere.
    Table,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleSpec {
    pub kind: CocycleKind,
    #[serde(default)]
    pub degree: Option<usize>,
    /// Growth constants `C`, `k` of `random`.
    #[serde(default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub k: Option<f64>,
    #[serde(default)]
    pub entries: Option<Vec<TableEntry>>,
    /// Whether `random` and `table` are restricted to the configured class.
    #[serde(default)]
    pub delocalized: Option<bool>,
    /// Number of applications of the periodicity operator `S`.
    #[serde(default)]
    pub periodicity: usize,
    /// Replace the cochain by its coboundary.
    #[serde(default)]
    pub coboundary: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub args: Vec<Value>,
    pub value: [f64; 2],
}

/// Parses either form; JSON is detected by a leading `{`.
pub fn parse(text: &str) -> Result<RunConfig, String> {
    let value = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| format!("config JSON: {e}"))?
    } else {
        dotted_to_json(text)?
    };
    serde_json::from_value(value).map_err(|e| format!("config: {e}"))
}

/// Builds a JSON object from `a.b.c = value` lines. `#` starts a comment line.
pub fn dotted_to_json(text: &str) -> Result<Value, String> {
    let mut seen = BTreeMap::new();
    let mut root = Map::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, val) = line.split_once('=').ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
        let key = key.trim();
        if key.is_empty() || key.split('.').any(|p| p.is_empty()) {
            return Err(format!("line {}: malformed key '{key}'", no + 1));
        }
        if let Some(prev) = seen.insert(key.to_string(), no + 1) {
            return Err(format!("line {}: key '{key}' already set on line {prev}", no + 1));
        }
        let val = val.trim();
        let v = serde_json::from_str(val).unwrap_or_else(|_| Value::String(val.to_string()));
        insert(&mut root, &key.split('.').collect::<Vec<_>>(), v).map_err(|e| format!("line {}: {e}", no + 1))?;
    }
    Ok(Value::Object(root))
}

fn insert(map: &mut Map<String, Value>, path: &[&str], v: Value) -> Result<(), String> {
    let (head, rest) = path.split_first().expect("non-empty key");
    if rest.is_empty() {
        if map.contains_key(*head) {
            return Err(format!("'{head}' is both a value and a section"));
        }
        map.insert(head.to_string(), v);
        return Ok(());
    }
    let entry = map.entry(head.to_string()).or_insert_with(|| Value::Object(Map::new()));
    match entry {
        Value::Object(m) => insert(m, rest, v),
        _ => Err(format!("'{head}' is both a value and a section")),
    }
}

/// Validation that needs more than the schema.
pub fn validate(c: &RunConfig) -> Result<(), String> {
    let t = &c.tolerances;
    if !(t.tol > 0.0 && t.tol.is_finite()) {
        return Err(format!("tolerances.tol must be positive, got {}", t.tol));
    }
    if !(t.quad_rel >= 0.0 && t.quad_rel < 1.0) {
        return Err(format!("tolerances.quad_rel must lie in [0, 1), got {}", t.quad_rel));
    }
    if !(t.tail_frac > 0.0 && t.tail_frac < 1.0) {
        return Err(format!("tolerances.tail_frac must lie in (0, 1), got {}", t.tail_frac));
    }
    if c.radii.budget == 0 {
        return Err("radii.budget must be positive".into());
    }
    if !(c.norms.p >= 0.0 && c.norms.k >= 0.0) {
        return Err("norms.p and norms.K must be nonnegative".into());
    }
    if let Some(cs) = &c.cocycle {
        let has = |b: bool, what: &str| if b { Ok(()) } else { Err(format!("cocycle.kind = {:?} needs {what}", cs.kind)) };
        match cs.kind {
            CocycleKind::Trace | CocycleKind::Area => {
                has(cs.degree.is_none() && cs.entries.is_none() && cs.c.is_none() && cs.k.is_none(), "no degree, c, k or entries")?;
                has(c.class.is_some(), "a class")?;
            }
            CocycleKind::Random => {
                has(cs.degree.is_some() && cs.entries.is_none(), "a degree and no entries")?;
            }
            CocycleKind::Table => {
                has(cs.degree.is_some() && cs.entries.is_some() && cs.c.is_none() && cs.k.is_none(), "a degree and entries")?;
            }
        }
        if cs.delocalized == Some(true) && c.class.is_none() {
            return Err("cocycle.delocalized needs a class".into());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_and_json_agree() {
        let text = "# comment\ngroup.kind = free_abelian\ngroup.rank = 1\nclass = [1]\ntolerances.tol = 1e-8\nseed = 7\n";
        let a = parse(text).unwrap();
        let b = parse(r#"{"group": {"kind": "free_abelian", "rank": 1}, "class": [1], "tolerances": {"tol": 1e-8}, "seed": 7}"#).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.tolerances.quad_rel, 0.0);
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        assert!(parse("colour = red").unwrap_err().contains("unknown field"));
        assert!(parse("tolerances.tol = 1\ntolerances.bogus = 2").unwrap_err().contains("unknown field"));
        assert!(parse("seed = 1\nseed = 2").unwrap_err().contains("already set"));
        assert!(parse("seed = 1\nseed.x = 2").is_err());
        assert!(parse("just words").is_err());
    }

    #[test]
    fn validation() {
        let mut c = parse("tolerances.tol = 0").unwrap();
        assert!(validate(&c).is_err());
        c.tolerances.tol = 1e-6;
        assert!(validate(&c).is_ok());
        let c = parse("cocycle.kind = table\ncocycle.degree = 1").unwrap();
        assert!(validate(&c).is_err());
    }
}
