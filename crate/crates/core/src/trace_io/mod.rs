//! Loading, validating, sampling and splitting runtime-trace tables.

mod schema;

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use schema::{AttributeKind, AttributeSpec, ErnestColumns, Role, Schema};

use crate::error::{Error, Result};

/// One table cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Cat(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(*v),
            Value::Cat(_) => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Num(_) => None,
            Value::Cat(s) => Some(s),
        }
    }

    fn render(&self, kind: AttributeKind) -> String {
        match (self, kind) {
            (Value::Num(v), AttributeKind::NumericInteger) => format!("{}", *v as i64),
            (Value::Num(v), _) => format!("{v}"),
            (Value::Cat(s), _) => s.clone(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Num(v) => write!(f, "{v}"),
            Value::Cat(s) => f.write_str(s),
        }
    }
}

/// Job-execution records aligned to a schema; the target column holds positive runtimes.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceDataset {
    name: String,
    schema: Schema,
    rows: Vec<Vec<Value>>,
}

impl TraceDataset {
    /// Validates every row against `schema`. Row numbers in errors are 1-based data rows.
    pub fn new(name: impl Into<String>, schema: Schema, rows: Vec<Vec<Value>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (i, row) in rows.iter().enumerate() {
            check_row(&schema, row, i + 1)?;
        }
        Ok(Self {
            name: name.into(),
            schema,
            rows,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, idx: usize) -> impl Iterator<Item = &Value> + '_ {
        self.rows.iter().map(move |r| &r[idx])
    }

    /// Numeric column as floats; `None` for categorical attributes.
    pub fn numeric_column(&self, idx: usize) -> Option<Vec<f64>> {
        self.column(idx).map(Value::as_f64).collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.numeric_column(self.schema.target_index())
            .expect("target is numeric")
    }

    pub fn with_rows(&self, rows: Vec<Vec<Value>>) -> Result<Self> {
        Self::new(self.name.clone(), self.schema.clone(), rows)
    }

    fn select(&self, indices: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.schema.attributes().iter().map(|a| a.name.as_str()))?;
        for row in &self.rows {
            w.write_record(
                row.iter()
                    .zip(self.schema.attributes())
                    .map(|(v, a)| v.render(a.kind)),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io_util::write_atomic(path.as_ref(), self.to_csv_string().as_bytes())
    }
}

fn check_row(schema: &Schema, row: &[Value], row_no: usize) -> Result<()> {
    if row.len() != schema.len() {
        return Err(Error::Validation {
            row: row_no,
            message: format!("expected {} values, found {}", schema.len(), row.len()),
        });
    }
    for (v, a) in row.iter().zip(schema.attributes()) {
        match (v, a.kind) {
            (Value::Num(x), k) if k.is_numeric() => {
                if !x.is_finite() {
                    return Err(Error::Validation {
                        row: row_no,
                        message: format!("`{}` is not finite", a.name),
                    });
                }
                if k == AttributeKind::NumericInteger && x.fract() != 0.0 {
                    return Err(Error::Validation {
                        row: row_no,
                        message: format!("`{}` must be an integer, found {x}", a.name),
                    });
                }
                if a.role == Role::Target && *x <= 0.0 {
                    return Err(Error::Validation {
                        row: row_no,
                        message: format!("target `{}` must be positive, found {x}", a.name),
                    });
                }
            }
            (Value::Cat(s), AttributeKind::Categorical) => {
                if s.is_empty() {
                    return Err(Error::Validation {
                        row: row_no,
                        message: format!("missing value for `{}`", a.name),
                    });
                }
            }
            _ => {
                return Err(Error::Validation {
                    row: row_no,
                    message: format!("value of `{}` does not match kind {}", a.name, a.kind),
                })
            }
        }
    }
    Ok(())
}

/// Loads a CSV trace file; the dataset is named after the file stem.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<TraceDataset> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_csv(File::open(path)?, schema, name)
}

/// Reads CSV text, reordering columns to schema order and dropping extra columns.
pub fn read_csv<R: Read>(input: R, schema: &Schema, name: impl Into<String>) -> Result<TraceDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::EmptyInput);
    }
    let mut positions = Vec::with_capacity(schema.len());
    for a in schema.attributes() {
        let pos = header
            .iter()
            .position(|h| h == a.name)
            .ok_or_else(|| Error::SchemaMismatch {
                column: a.name.clone(),
            })?;
        positions.push(pos);
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row_no = i + 1;
        let record = record.map_err(|e| Error::Validation {
            row: row_no,
            message: e.to_string(),
        })?;
        let mut row = Vec::with_capacity(schema.len());
        for (a, &pos) in schema.attributes().iter().zip(&positions) {
            let cell = record.get(pos).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::Validation {
                    row: row_no,
                    message: format!("missing value for `{}`", a.name),
                });
            }
            let value = if a.kind.is_numeric() {
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row: row_no,
                    column: a.name.clone(),
                    value: cell.to_string(),
                })?;
                Value::Num(v)
            } else {
                Value::Cat(cell.to_string())
            };
            row.push(value);
        }
        check_row(schema, &row, row_no)?;
        rows.push(row);
    }
    TraceDataset::new(name, schema.clone(), rows)
}

/// Draws `n` distinct rows uniformly without replacement.
pub fn sample_rows(data: &TraceDataset, n: usize, seed: u64) -> Result<TraceDataset> {
    if n == 0 || n > data.len() {
        return Err(Error::Range(format!(
            "cannot sample {n} rows from a dataset of {}",
            data.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = index::sample(&mut rng, data.len(), n).into_vec();
    Ok(data.select(&picked))
}

/// Partitions rows into `(train, test)` with `|test| = round(test_fraction * len)`,
/// clamped so neither side is empty.
pub fn split(data: &TraceDataset, test_fraction: f64, seed: u64) -> Result<(TraceDataset, TraceDataset)> {
    let n = data.len();
    if n < 2 {
        return Err(Error::Range(format!("cannot split a dataset of {n} row(s)")));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Range(format!(
            "test fraction {test_fraction} is outside (0, 1)"
        )));
    }
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perm = index::sample(&mut rng, n, n).into_vec();
    let mut test: Vec<usize> = perm[..n_test].to_vec();
    let mut train: Vec<usize> = perm[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((data.select(&train), data.select(&test)))
}
