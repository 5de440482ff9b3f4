//! CSV input and output.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use log::warn;
use serde::{Deserialize, Serialize};

/// Training or prediction table: input columns `x1..xd`, optional `y`, and
/// any other columns carried along unchanged.
#[derive(Debug, Clone)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Positions of `x1..xd` in `headers`.
    pub x_cols: Vec<usize>,
    pub y_col: Option<usize>,
}

impl Table {
    pub fn dim(&self) -> usize {
        self.x_cols.len()
    }

    pub fn inputs(&self) -> Result<Vec<Vec<f64>>> {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| self.x_cols.iter().map(|&c| parse(&r[c], i, &self.headers[c])).collect())
            .collect()
    }

    pub fn outputs(&self) -> Result<Vec<f64>> {
        let c = self.y_col.context("CSV has no `y` column")?;
        self.rows.iter().enumerate().map(|(i, r)| parse(&r[c], i, "y")).collect()
    }
}

fn parse(field: &str, row: usize, col: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .with_context(|| format!("row {}: column `{col}` is not a number: {field:?}", row + 1))?;
    if !v.is_finite() {
        bail!("row {}: column `{col}` is not finite", row + 1);
    }
    Ok(v)
}

pub fn read_table(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_table_from(file).with_context(|| format!("reading {}", path.display()))
}

pub fn read_table_from<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut x_cols = Vec::new();
    for k in 1.. {
        match headers.iter().position(|h| *h == format!("x{k}")) {
            Some(c) => x_cols.push(c),
            None => break,
        }
    }
    if x_cols.is_empty() {
        bail!("CSV header needs input columns x1..xd");
    }
    let y_col = headers.iter().position(|h| h == "y");
    let rows = rdr
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()?;
    Ok(Table {
        headers,
        rows,
        x_cols,
        y_col,
    })
}

/// Per-column affine map onto `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputScaling {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl InputScaling {
    pub fn fit(points: &[Vec<f64>]) -> Result<Self> {
        let d = points.first().map_or(0, Vec::len);
        let mut lower = vec![f64::INFINITY; d];
        let mut upper = vec![f64::NEG_INFINITY; d];
        for p in points {
            for k in 0..d {
                lower[k] = lower[k].min(p[k]);
                upper[k] = upper[k].max(p[k]);
            }
        }
        if let Some(k) = (0..d).find(|&k| !(upper[k] > lower[k])) {
            bail!("input column x{} is constant and cannot be scaled", k + 1);
        }
        Ok(Self { lower, upper })
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(k, &v)| (v - self.lower[k]) / (self.upper[k] - self.lower[k]))
            .collect()
    }

    /// Scales and clamps into `[0, 1]^d`, warning once per call site.
    pub fn to_unit_clamped(&self, x: &[f64], row: usize) -> Vec<f64> {
        let z = self.to_unit(x);
        if z.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            warn!("row {}: input outside the training range, clamped", row + 1);
        }
        z.into_iter().map(|v| v.clamp(0.0, 1.0)).collect()
    }

    pub fn from_unit(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .enumerate()
            .map(|(k, &v)| self.lower[k] + v * (self.upper[k] - self.lower[k]))
            .collect()
    }
}

/// Opens `path`, or stdout when absent.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}
