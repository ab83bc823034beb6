//! Response and main-effect data, with CSV ingestion.

use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Centering and scaling applied to each main effect before expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    y: Vec<f64>,
    mains: DMatrix<f64>,
    names: Vec<String>,
    standardization: Option<Standardization>,
}

impl Dataset {
    pub fn new(y: Vec<f64>, mains: DMatrix<f64>) -> Result<Self> {
        let names = (1..=mains.ncols()).map(|j| format!("x{j}")).collect();
        Self::with_names(y, mains, names)
    }

    pub fn with_names(y: Vec<f64>, mains: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Data("no observations".into()));
        }
        if mains.nrows() != y.len() {
            return Err(Error::Data(format!(
                "{} responses but {} rows of predictors",
                y.len(),
                mains.nrows()
            )));
        }
        if names.len() != mains.ncols() {
            return Err(Error::Data("one name per predictor column is required".into()));
        }
        if y.iter().chain(mains.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite value".into()));
        }
        Ok(Self {
            y,
            mains,
            names,
            standardization: None,
        })
    }

    /// Reads a CSV with a header row; `response` names the response column
    /// and every other column is a main effect.
    pub fn from_csv<R: Read>(reader: R, response: &str) -> Result<Self> {
        let table = read_numeric_csv(reader)?;
        let col = table
            .header
            .iter()
            .position(|h| h == response)
            .ok_or_else(|| Error::Data(format!("response column {response:?} not found")))?;
        let names: Vec<String> = table
            .header
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != col)
            .map(|(_, h)| h.clone())
            .collect();
        if names.is_empty() {
            return Err(Error::Data("no predictor columns".into()));
        }
        let n = table.rows.len();
        let y: Vec<f64> = table.rows.iter().map(|r| r[col]).collect();
        let mains = DMatrix::from_fn(n, names.len(), |i, j| {
            let src = if j < col { j } else { j + 1 };
            table.rows[i][src]
        });
        Self::with_names(y, mains, names)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P, response: &str) -> Result<Self> {
        let f =
            std::fs::File::open(path.as_ref()).map_err(|e| Error::Data(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv(f, response)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.mains.ncols()
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn mains(&self) -> &DMatrix<f64> {
        &self.mains
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    /// Centers each main to mean zero and scales it to unit standard deviation.
    pub fn standardized(&self) -> Self {
        let n = self.n() as f64;
        let mut center = Vec::with_capacity(self.p());
        let mut scale = Vec::with_capacity(self.p());
        for col in self.mains.column_iter() {
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            center.push(mean);
            scale.push(if var > 0.0 { var.sqrt() } else { 1.0 });
        }
        let s = Standardization { center, scale };
        Self {
            y: self.y.clone(),
            mains: apply(&self.mains, &s),
            names: self.names.clone(),
            standardization: Some(s),
        }
    }

    /// Applies this dataset's standardization (if any) to new raw mains.
    pub fn transform_mains(&self, raw: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if raw.ncols() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                found: raw.ncols(),
            });
        }
        Ok(match &self.standardization {
            Some(s) => apply(raw, s),
            None => raw.clone(),
        })
    }

    /// Same mains with a new response vector.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        if y.len() != self.n() {
            return Err(Error::Data("response length does not match".into()));
        }
        Ok(Self { y, ..self.clone() })
    }

    /// Applies `x_j -> a_j x_j + b_j` to each main effect.
    pub fn recoded(&self, a: &[f64], b: &[f64]) -> Self {
        let mut mains = self.mains.clone();
        for (j, mut col) in mains.column_iter_mut().enumerate() {
            col.iter_mut().for_each(|v| *v = a[j] * *v + b[j]);
        }
        Self { mains, ..self.clone() }
    }
}

fn apply(raw: &DMatrix<f64>, s: &Standardization) -> DMatrix<f64> {
    DMatrix::from_fn(raw.nrows(), raw.ncols(), |i, j| {
        (raw[(i, j)] - s.center[j]) / s.scale[j]
    })
}

/// Header plus numeric rows of a CSV file.
#[derive(Debug, Clone)]
pub struct NumericTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Reads a CSV whose cells must all parse as numbers. Errors carry the
/// 1-based line number of the offending record.
pub fn read_numeric_csv<R: Read>(reader: R) -> Result<NumericTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Data(format!("header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::Data("missing header row".into()));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::DataLine {
                line,
                message: e.to_string(),
            }
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(Error::DataLine {
                line,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(Error::DataLine {
                    line,
                    message: format!("column {:?}: cannot parse {cell:?} as a number", header[j]),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Data("no data rows".into()));
    }
    Ok(NumericTable { header, rows })
}
