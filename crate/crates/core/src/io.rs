//! File formats: CSV tables and JSON matrices, paths and generator families.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::linalg::{c, CMat, RMat};
use crate::volterra_transport::GeneratorFamily;
use crate::{artifact_header, Error, Result};

/// CSV text starting with the artifact header line.
#[derive(Clone, Debug)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        let mut text = artifact_header();
        text.push('\n');
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv { text, columns: columns.len() }
    }

    pub fn row<I, T>(&mut self, cells: I)
    where
        I: IntoIterator<Item = T>,
        T: std::fmt::Display,
    {
        let cells: Vec<String> = cells.into_iter().map(|c| c.to_string()).collect();
        debug_assert_eq!(cells.len(), self.columns);
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// `{"header": ..., ...fields}` rendered as pretty JSON with a trailing newline.
pub fn json_artifact(mut body: Value) -> String {
    if let Value::Object(map) = &mut body {
        map.insert("header".into(), Value::String(artifact_header()));
    }
    let mut s = serde_json::to_string_pretty(&body).expect("JSON values serialise");
    s.push('\n');
    s
}

/// Writes to `out`, or stdout when `None`.
pub fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, content)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

/// Row-major `[[[re, im], ...], ...]`.
pub fn matrix_to_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

fn entry(v: &Value) -> Result<Complex64> {
    match v {
        Value::Number(n) => Ok(c(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(p) if p.len() == 2 => match (p[0].as_f64(), p[1].as_f64()) {
            (Some(re), Some(im)) => Ok(c(re, im)),
            _ => Err(Error::Invalid(format!("matrix entry {v} is not a [re, im] pair"))),
        },
        _ => Err(Error::Invalid(format!("matrix entry {v} is neither a number nor a [re, im] pair"))),
    }
}

/// Accepts real entries or `[re, im]` pairs.
pub fn matrix_from_json(v: &Value) -> Result<CMat> {
    let rows = v.as_array().ok_or_else(|| Error::Invalid("matrix must be an array of rows".into()))?;
    let n = rows.len();
    let mut data = Vec::new();
    let mut ncols = None;
    for r in rows {
        let r = r.as_array().ok_or_else(|| Error::Invalid("matrix row must be an array".into()))?;
        if *ncols.get_or_insert(r.len()) != r.len() {
            return Err(Error::Invalid("matrix rows have different lengths".into()));
        }
        for e in r {
            data.push(entry(e)?);
        }
    }
    Ok(CMat::from_row_slice(n, ncols.unwrap_or(0), &data))
}

pub fn real_matrix_from_json(v: &Value) -> Result<RMat> {
    let m = matrix_from_json(v)?;
    if m.iter().any(|z| z.im != 0.0) {
        return Err(Error::Invalid("expected a real matrix".into()));
    }
    Ok(m.map(|z| z.re))
}

/// A list of `[re, im]` pairs.
pub fn path_from_json(text: &str) -> Result<Vec<Complex64>> {
    let v: Vec<[f64; 2]> = serde_json::from_str(text)?;
    Ok(v.into_iter().map(|[re, im]| c(re, im)).collect())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeltaInput {
    #[serde(rename = "type")]
    kind: String,
    #[serde(rename = "C")]
    coeff: Value,
    alpha: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyInput {
    #[serde(rename = "P_infinity")]
    p_infinity: Value,
    delta: DeltaInput,
    #[serde(default = "default_t_min")]
    t_min: f64,
}

fn default_t_min() -> f64 {
    1.0
}

/// `{"P_infinity": M, "delta": {"type": "power", "C": M, "alpha": a}, "t_min": t}`.
pub fn family_from_json(text: &str) -> Result<GeneratorFamily> {
    let input: FamilyInput = serde_json::from_str(text)?;
    if input.delta.kind != "power" {
        return Err(Error::Invalid(format!("unknown delta type {:?}; only \"power\" is supported", input.delta.kind)));
    }
    let p = matrix_from_json(&input.p_infinity)?;
    let coeff = matrix_from_json(&input.delta.coeff)?;
    GeneratorFamily::power(p, coeff, input.delta.alpha, input.t_min)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SiegelInput {
    #[serde(rename = "X")]
    x: Value,
    #[serde(rename = "Y")]
    y: Value,
}

/// `{"X": real matrix, "Y": real matrix}`.
pub fn siegel_input_from_json(text: &str) -> Result<(RMat, RMat)> {
    let input: SiegelInput = serde_json::from_str(text)?;
    Ok((real_matrix_from_json(&input.x)?, real_matrix_from_json(&input.y)?))
}

/// Shortest representation that round-trips.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0, 2.0), c(0.0, -1.0), c(3.5, 0.0), c(0.0, 0.0)]);
        assert_eq!(matrix_from_json(&matrix_to_json(&m)).unwrap(), m);
        assert!(matrix_from_json(&json!([[1.0, 2.0], [3.0]])).is_err());
        assert_eq!(matrix_from_json(&json!([[1, 2]])).unwrap()[(0, 1)], c(2.0, 0.0));
    }

    #[test]
    fn family_parsing() {
        let ok = r#"{"P_infinity": [[0, 0], [0, 1]], "delta": {"type": "power", "C": [[0, 1], [1, 0]], "alpha": -2}}"#;
        let f = family_from_json(ok).unwrap();
        assert_eq!(f.dim(), 2);
        let bad = r#"{"P_infinity": [[1]], "delta": {"type": "exp", "C": [[1]], "alpha": -2}}"#;
        assert!(family_from_json(bad).is_err());
        let extra = r#"{"P_infinity": [[1]], "delta": {"type": "power", "C": [[1]], "alpha": -2}, "q": 1}"#;
        assert!(family_from_json(extra).is_err());
    }

    #[test]
    fn csv_has_header() {
        let mut csv = Csv::new(&["a", "b"]);
        csv.row([1, 2]);
        assert_eq!(csv.into_string(), format!("{}\na,b\n1,2\n", artifact_header()));
    }
}
