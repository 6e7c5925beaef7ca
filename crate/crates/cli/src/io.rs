//! File formats: CSV with 17 significant digits and correlation-vector JSON.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ovskale_core::{CorrelationVector, StateSpace};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Locale-free float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// An in-memory table written in one go.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.render()).map_err(|e| CliError::io(path, e))
    }
}

/// `{"N_max": n, "layers": [[...], ...]}` in canonical subset order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelationJson {
    #[serde(rename = "N_max")]
    pub n_max: usize,
    pub layers: Vec<Vec<f64>>,
}

impl CorrelationJson {
    pub fn from_vector(space: &StateSpace, k: &CorrelationVector) -> Self {
        CorrelationJson {
            n_max: space.n_max(),
            layers: (0..=space.n_max()).map(|n| k.layer(space, n).to_vec()).collect(),
        }
    }

    pub fn to_vector(&self, space: &StateSpace) -> Result<CorrelationVector, CliError> {
        if self.n_max != space.n_max() {
            return Err(CliError::Config(format!(
                "correlation file has N_max = {}, the model uses {}",
                self.n_max,
                space.n_max()
            )));
        }
        Ok(CorrelationVector::from_layers(space, &self.layers)?)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ovskale_core::Torus;

    #[test]
    fn floats_keep_seventeen_digits() {
        let x = 0.1f64 + 0.2;
        let s = fmt_f64(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(s, "3.0000000000000004e-1");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn header_only_table() {
        let t = Table::new(&["series", "x", "y"]);
        assert_eq!(t.render(), "series,x,y\n");
    }

    #[test]
    fn correlation_json_round_trip() {
        let sp = StateSpace::new(Torus::new(1, 4, 0.25).unwrap(), 2).unwrap();
        let k = CorrelationVector::product_form(&sp, &[0.1, 0.2, 0.3, 0.4]).unwrap();
        let doc = CorrelationJson::from_vector(&sp, &k);
        assert_eq!(doc.layers.iter().map(Vec::len).collect::<Vec<_>>(), vec![1, 4, 6]);
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.starts_with("{\"N_max\":2"));
        let back: CorrelationJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_vector(&sp).unwrap(), k);
    }
}
