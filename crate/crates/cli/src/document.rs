//! Input documents.

use gramspec::Tolerances;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const SCHEMA: u32 = 1;

/// A system given by its matrices, its characteristic polynomial or its spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    #[serde(default = "default_schema")]
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Matrices>,
    /// Ascending coefficients `a_0, …, a_{n−1}, 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_poly: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<EigenvalueEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_condition: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Matrices {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenvalueEntry {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    #[serde(default = "one")]
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSpec {
    pub root: f64,
    pub cluster: f64,
    pub solve: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        let t = Tolerances::default();
        ToleranceSpec {
            root: t.root,
            cluster: t.cluster,
            solve: t.solve,
        }
    }
}

impl ToleranceSpec {
    pub fn to_tolerances(self) -> Tolerances {
        Tolerances {
            root: self.root,
            cluster: self.cluster,
            solve: self.solve,
            ..Tolerances::default()
        }
    }
}

fn default_schema() -> u32 {
    SCHEMA
}

fn one() -> usize {
    1
}

/// Schema or consistency failure, located by a field path such as `matrices.A[1]`.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct DocumentError {
    pub path: String,
    pub message: String,
}

fn fail<T>(path: impl Into<String>, message: impl Into<String>) -> Result<T, DocumentError> {
    Err(DocumentError {
        path: path.into(),
        message: message.into(),
    })
}

/// Where the system came from, already converted to matrices and spectra.
#[derive(Debug, Clone)]
pub enum Source {
    Matrices { a: DMatrix<f64>, b: DMatrix<f64> },
    CharPoly(Vec<f64>),
    Eigenvalues(Vec<(Complex64, usize)>),
}

impl Source {
    pub fn kind(&self) -> &'static str {
        match self {
            Source::Matrices { .. } => "matrices",
            Source::CharPoly(_) => "char_poly",
            Source::Eigenvalues(_) => "eigenvalues",
        }
    }
}

impl SystemDocument {
    pub fn from_char_poly(coeffs: Vec<f64>) -> Self {
        SystemDocument {
            schema: SCHEMA,
            label: None,
            matrices: None,
            char_poly: Some(coeffs),
            eigenvalues: None,
            initial_condition: None,
            tolerances: ToleranceSpec::default(),
        }
    }

    /// State dimension implied by whichever source is present.
    pub fn n(&self) -> usize {
        if let Some(m) = &self.matrices {
            m.a.len()
        } else if let Some(c) = &self.char_poly {
            c.len().saturating_sub(1)
        } else if let Some(e) = &self.eigenvalues {
            e.iter().map(|e| e.multiplicity).sum()
        } else {
            0
        }
    }

    /// Input count; polynomial and spectrum documents are single-input.
    pub fn m(&self) -> usize {
        match &self.matrices {
            Some(m) => m.b.first().map_or(0, |r| r.len()),
            None => 1,
        }
    }

    pub fn source(&self) -> Source {
        if let Some(m) = &self.matrices {
            Source::Matrices {
                a: rows_to_matrix(&m.a),
                b: rows_to_matrix(&m.b),
            }
        } else if let Some(c) = &self.char_poly {
            Source::CharPoly(c.clone())
        } else {
            let e = self.eigenvalues.as_deref().unwrap_or_default();
            Source::Eigenvalues(
                e.iter()
                    .map(|e| (Complex64::new(e.re, e.im), e.multiplicity))
                    .collect(),
            )
        }
    }

    pub fn initial_matrix(&self) -> Option<DMatrix<f64>> {
        self.initial_condition.as_deref().map(rows_to_matrix)
    }

    /// Checks exclusivity, shapes, monicity, conjugate closure and symmetry of `P₀`.
    pub fn validate(&self) -> Result<(), DocumentError> {
        if self.schema != SCHEMA {
            return fail(
                "schema",
                format!("unsupported schema {}, expected {SCHEMA}", self.schema),
            );
        }
        let present: Vec<&str> = [
            ("matrices", self.matrices.is_some()),
            ("char_poly", self.char_poly.is_some()),
            ("eigenvalues", self.eigenvalues.is_some()),
        ]
        .iter()
        .filter(|(_, p)| *p)
        .map(|(k, _)| *k)
        .collect();
        if present.len() != 1 {
            return fail(
                "$",
                format!(
                    "exactly one of `matrices`, `char_poly`, `eigenvalues` is required, found {}",
                    if present.is_empty() {
                        "none".to_string()
                    } else {
                        present.join(", ")
                    }
                ),
            );
        }
        let t = &self.tolerances;
        for (name, v) in [("root", t.root), ("cluster", t.cluster), ("solve", t.solve)] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("tolerances.{name}"), "must be positive and finite");
            }
        }
        if let Some(m) = &self.matrices {
            validate_matrices(m)?;
        }
        if let Some(c) = &self.char_poly {
            validate_poly(c)?;
        }
        if let Some(e) = &self.eigenvalues {
            validate_eigenvalues(e)?;
        }
        if let Some(p0) = &self.initial_condition {
            validate_initial(p0, self.n())?;
        }
        Ok(())
    }
}

fn validate_matrices(m: &Matrices) -> Result<(), DocumentError> {
    let n = m.a.len();
    if n == 0 {
        return fail("matrices.A", "must have at least one row");
    }
    for (i, row) in m.a.iter().enumerate() {
        if row.len() != n {
            return fail(
                format!("matrices.A[{i}]"),
                format!(
                    "`A` must be square: row has {} entries, expected {n}",
                    row.len()
                ),
            );
        }
    }
    if m.b.len() != n {
        return fail(
            "matrices.B",
            format!("`B` has {} rows, expected {n}", m.b.len()),
        );
    }
    let inputs = m.b[0].len();
    if inputs == 0 {
        return fail("matrices.B[0]", "`B` must have at least one column");
    }
    for (i, row) in m.b.iter().enumerate() {
        if row.len() != inputs {
            return fail(
                format!("matrices.B[{i}]"),
                format!("row has {} entries, expected {inputs}", row.len()),
            );
        }
    }
    Ok(())
}

fn validate_poly(c: &[f64]) -> Result<(), DocumentError> {
    if c.len() < 2 {
        return fail("char_poly", "need at least two coefficients (degree ≥ 1)");
    }
    let last = c.len() - 1;
    if c[last] != 1.0 {
        return fail(
            format!("char_poly[{last}]"),
            format!("leading coefficient must be 1 (monic), got {}", c[last]),
        );
    }
    Ok(())
}

fn validate_eigenvalues(e: &[EigenvalueEntry]) -> Result<(), DocumentError> {
    if e.is_empty() {
        return fail("eigenvalues", "must list at least one eigenvalue");
    }
    for (i, v) in e.iter().enumerate() {
        if v.multiplicity == 0 {
            return fail(
                format!("eigenvalues[{i}].multiplicity"),
                "must be at least 1",
            );
        }
        if v.im != 0.0 {
            let partner = e
                .iter()
                .any(|w| w.re == v.re && w.im == -v.im && w.multiplicity == v.multiplicity);
            if !partner {
                return fail(
                    format!("eigenvalues[{i}]"),
                    format!(
                        "complex eigenvalue {}{:+}i needs its conjugate with the same multiplicity",
                        v.re, v.im
                    ),
                );
            }
        }
    }
    Ok(())
}

fn validate_initial(p0: &[Vec<f64>], n: usize) -> Result<(), DocumentError> {
    if p0.len() != n {
        return fail(
            "initial_condition",
            format!("has {} rows, expected {n}", p0.len()),
        );
    }
    for (i, row) in p0.iter().enumerate() {
        if row.len() != n {
            return fail(
                format!("initial_condition[{i}]"),
                format!("row has {} entries, expected {n}", row.len()),
            );
        }
    }
    let scale = p0
        .iter()
        .flatten()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(1.0);
    for i in 0..n {
        for j in i + 1..n {
            if (p0[i][j] - p0[j][i]).abs() > 1e-12 * scale {
                return fail(
                    format!("initial_condition[{i}][{j}]"),
                    format!(
                        "P0 must be symmetric: entry is {} but [{j}][{i}] is {}",
                        p0[i][j], p0[j][i]
                    ),
                );
            }
        }
    }
    Ok(())
}

pub fn rows_to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    DMatrix::from_fn(r, c, |i, j| rows[i][j])
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Parses and validates a system document.
pub fn parse_system(text: &str) -> Result<SystemDocument, DocumentError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: SystemDocument = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        DocumentError {
            path: if path == "." { "$".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })?;
    doc.validate()?;
    Ok(doc)
}

/// Reads a bare `P₀` file: either an array of rows or `{"initial_condition": rows}`.
pub fn parse_initial(text: &str) -> Result<Vec<Vec<f64>>, DocumentError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum P0File {
        Rows(Vec<Vec<f64>>),
        Wrapped { initial_condition: Vec<Vec<f64>> },
    }
    let de = &mut serde_json::Deserializer::from_str(text);
    let f: P0File = serde_path_to_error::deserialize(de).map_err(|e| DocumentError {
        path: "initial_condition".into(),
        message: e.into_inner().to_string(),
    })?;
    Ok(match f {
        P0File::Rows(r) => r,
        P0File::Wrapped { initial_condition } => initial_condition,
    })
}

/// Canonical JSON form with sorted keys.
pub fn emit_system(doc: &SystemDocument) -> String {
    let v = serde_json::to_value(doc).expect("documents always serialize");
    serde_json::to_string_pretty(&v).expect("values always serialize")
}

pub fn validate_with_initial(doc: &SystemDocument, p0: &[Vec<f64>]) -> Result<(), DocumentError> {
    validate_initial(p0, doc.n())
}
