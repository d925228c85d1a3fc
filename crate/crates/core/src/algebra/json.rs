//! JSON form of algebra elements:
//! `{"group": <kind>, "dim": d, "entries": [{"element": .., "matrix": [[re, im], ..]}]}`
//! with the matrix row-major. `dim` may be omitted and is then inferred.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::AlgebraElement;
use crate::groups::{Group, GroupKind, GroupModel};
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    group: GroupKind,
    #[serde(default)]
    dim: Option<usize>,
    entries: Vec<Entry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    element: Value,
    matrix: Vec<[f64; 2]>,
}

/// Parses an element; reuses `group` when its kind matches the document.
pub fn element_from_json(v: &Value, group: Option<&Group>) -> Result<AlgebraElement> {
    let doc: Doc = serde_json::from_value(v.clone()).map_err(|e| Error::Representation(format!("algebra element: {e}")))?;
    let group = match group {
        Some(g) if *g.kind() == doc.group => g.clone(),
        Some(_) => return Err(Error::Shape("element group differs from the configured group".into())),
        None => GroupModel::new(doc.group.clone())?,
    };
    let dim = match doc.dim {
        Some(d) => d,
        None => {
            let n = doc.entries.first().map(|e| e.matrix.len()).unwrap_or(1);
            let d = (n as f64).sqrt().round() as usize;
            if d * d != n {
                return Err(Error::Shape(format!("matrix with {n} entries is not square")));
            }
            d
        }
    };
    let mut blocks = Vec::with_capacity(doc.entries.len());
    for e in doc.entries {
        let g = group.parse_element(&e.element)?;
        blocks.push((g, e.matrix.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()));
    }
    AlgebraElement::from_blocks(&group, dim, blocks)
}

pub fn element_to_json(a: &AlgebraElement) -> Value {
    let doc = Doc {
        group: a.group().kind().clone(),
        dim: Some(a.dim()),
        entries: a
            .iter()
            .map(|(g, b)| Entry { element: a.group().element_to_json(g), matrix: b.iter().map(|z| [z.re, z.im]).collect() })
            .collect(),
    };
    serde_json::to_value(doc).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn roundtrip() {
        let v = json!({
            "group": {"kind": "free", "rank": 2},
            "entries": [
                {"element": "ab", "matrix": [[1.0, 0.0], [0.0, 2.0], [0.0, -2.0], [3.0, 0.0]]},
                {"element": "e", "matrix": [[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]]}
            ]
        });
        let a = element_from_json(&v, None).unwrap();
        assert_eq!(a.dim(), 2);
        assert_eq!(a.len(), 2);
        let back = element_from_json(&element_to_json(&a), Some(a.group())).unwrap();
        assert_eq!(back.max_diff(&a), 0.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        let v = json!({"group": {"kind": "cyclic", "order": 3}, "entries": [{"element": 1, "matrix": [[1.0, 0.0], [1.0, 0.0]]}]});
        assert!(matches!(element_from_json(&v, None), Err(Error::Shape(_))));
        let v = json!({"group": {"kind": "cyclic", "order": 3}, "entries": [], "extra": 1});
        assert!(element_from_json(&v, None).is_err());
    }
}
