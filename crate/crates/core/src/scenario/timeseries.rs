use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::config::OutputFormat;
use crate::error::{invalid, Result};

/// Sampled observables in named columns, the first of which is `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeries", into = "RawSeries")]
pub struct TimeSeries {
    columns: Vec<(String, Vec<f64>)>,
    metadata: Map<String, Value>,
}

impl TimeSeries {
    /// Starts a series from its time column, which must be strictly
    /// increasing and finite.
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.iter().any(|x| !x.is_finite()) {
            return Err(invalid("t", "must be finite"));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("t", "must be strictly increasing"));
        }
        Ok(Self {
            columns: vec![("t".to_string(), t)],
            metadata: Map::new(),
        })
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.len() {
            return Err(invalid(
                "column",
                format!(
                    "`{name}` has {} rows, expected {}",
                    values.len(),
                    self.len()
                ),
            ));
        }
        if self.column(name).is_some() {
            return Err(invalid("column", format!("`{name}` defined twice")));
        }
        if name.contains([',', '\n', '"']) {
            return Err(invalid(
                "column",
                format!("`{name}` is not a plain CSV header"),
            ));
        }
        self.columns.push((name.to_string(), values));
        Ok(())
    }

    pub fn with_column(mut self, name: &str, values: Vec<f64>) -> Result<Self> {
        self.push_column(name, values)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.columns[0].1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn times(&self) -> &[f64] {
        &self.columns[0].1
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|(n, _)| n.as_str())
    }

    pub fn metadata(&self) -> &Map<String, Value> {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut Map<String, Value> {
        &mut self.metadata
    }

    /// Header row then one row per sample, each value in `{:.16e}` so every
    /// double survives a round trip.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self.column_names().collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in 0..self.len() {
            for (j, (_, col)) in self.columns.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{:.16e}", col[row]).expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("series values are finite");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    pub fn emit(&self, format: OutputFormat, path: &Path) -> io::Result<()> {
        fs::write(path, self.render(format))
    }
}

#[derive(Serialize, Deserialize)]
struct RawSeries {
    columns: Map<String, Value>,
    metadata: Map<String, Value>,
}

impl From<TimeSeries> for RawSeries {
    fn from(ts: TimeSeries) -> Self {
        let columns = ts
            .columns
            .into_iter()
            .map(|(n, v)| (n, Value::from(v)))
            .collect();
        Self {
            columns,
            metadata: ts.metadata,
        }
    }
}

impl TryFrom<RawSeries> for TimeSeries {
    type Error = String;

    fn try_from(raw: RawSeries) -> std::result::Result<Self, String> {
        let mut cols = raw.columns.into_iter().map(|(name, v)| {
            let values: Vec<f64> =
                serde_json::from_value(v).map_err(|e| format!("column `{name}`: {e}"))?;
            Ok::<_, String>((name, values))
        });
        let (first, t) = cols.next().ok_or("no columns")??;
        if first != "t" {
            return Err(format!("first column must be `t`, found `{first}`"));
        }
        let mut ts = TimeSeries::new(t).map_err(|e| e.to_string())?;
        for col in cols {
            let (name, values) = col?;
            ts.push_column(&name, values).map_err(|e| e.to_string())?;
        }
        ts.metadata = raw.metadata;
        Ok(ts)
    }
}
