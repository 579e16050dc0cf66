//! JSON encoding of report pieces. Keys come out sorted because `serde_json`
//! maps are ordered.

use gramspec::linalg::CMatrix;
use gramspec::{ComponentIndex, Flavor, SpectralComponentSet, Spectrum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Map, Value};

pub fn complex(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn real_rows(m: &DMatrix<f64>) -> Value {
    Value::Array(
        m.row_iter()
            .map(|r| Value::Array(r.iter().map(|&v| json!(v)).collect()))
            .collect(),
    )
}

pub fn complex_matrix(m: &CMatrix) -> Value {
    json!({ "re": real_rows(&m.map(|z| z.re)), "im": real_rows(&m.map(|z| z.im)) })
}

pub fn flavor_name(f: Flavor) -> &'static str {
    match f {
        Flavor::Raw => "raw",
        Flavor::Symmetrized => "symmetrized",
    }
}

pub fn index_value(idx: ComponentIndex) -> Value {
    match idx {
        ComponentIndex::Eigen(i) => json!([i]),
        ComponentIndex::Pair(i, j) => json!([i, j]),
    }
}

pub fn spectrum(spec: &Spectrum) -> Value {
    Value::Array(
        spec.entries()
            .iter()
            .enumerate()
            .map(|(i, e)| json!({ "index": i, "re": e.value.re, "im": e.value.im, "multiplicity": e.multiplicity }))
            .collect(),
    )
}

/// One component set with a residual per matrix; `residuals[k]` belongs to `set.components[k]`.
pub fn component_set(set: &SpectralComponentSet, residuals: &[Option<f64>]) -> Value {
    let comps = set
        .components
        .iter()
        .enumerate()
        .map(|(k, (idx, m))| {
            let eig = match *idx {
                ComponentIndex::Eigen(i) => vec![complex(set.eigenvalues[i])],
                ComponentIndex::Pair(i, j) => {
                    vec![complex(set.eigenvalues[i]), complex(set.eigenvalues[j])]
                }
            };
            json!({
                "index": index_value(*idx),
                "eigenvalues": eig,
                "matrix": complex_matrix(m),
                "residual": residuals.get(k).copied().flatten(),
            })
        })
        .collect();
    json!({
        "flavor": flavor_name(set.flavor),
        "components": Value::Array(comps),
    })
}

/// Builder for a JSON object.
#[derive(Debug, Default)]
pub struct Obj(Map<String, Value>);

impl Obj {
    pub fn new() -> Self {
        Obj(Map::new())
    }

    pub fn put(&mut self, key: &str, v: impl Into<Value>) -> &mut Self {
        self.0.insert(key.to_string(), v.into());
        self
    }

    pub fn get_mut(&mut self, key: &str) -> Option<&mut Value> {
        self.0.get_mut(key)
    }

    pub fn into_value(self) -> Value {
        Value::Object(self.0)
    }
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values always serialize");
    s.push('\n');
    s
}
