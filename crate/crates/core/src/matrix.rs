use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// An `n × p` sample matrix: `n` observations (rows) of a `p`-dimensional
/// population (columns).
///
/// Constructors take values in row-major order. Storage is column-major
/// because every kernel in the crate walks one coordinate across all
/// observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    columns: Vec<f64>,
}

impl DataMatrix {
    pub fn from_row_major(n: usize, p: usize, values: &[f64]) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::Dimension(format!(
                "matrix must have at least one row and one column, got {n}x{p}"
            )));
        }
        if values.len() != n * p {
            return Err(Error::Dimension(format!(
                "{n}x{p} matrix needs {} values, got {}",
                n * p,
                values.len()
            )));
        }
        let mut columns = vec![0.0; n * p];
        for k in 0..n {
            for i in 0..p {
                columns[i * n + k] = values[k * p + i];
            }
        }
        Self::from_column_major(n, p, columns)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::Dimension(format!(
                "row {} has {} values, expected {p}",
                k + 1,
                r.len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(n, p, &flat)
    }

    /// Column-major constructor: column `i` occupies `values[i*n..(i+1)*n]`.
    pub fn from_column_major(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || p == 0 || values.len() != n * p {
            return Err(Error::Dimension(format!(
                "{n}x{p} matrix needs {} values, got {}",
                n * p,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value at row {}, column {}",
                pos % n + 1,
                pos / n + 1
            )));
        }
        Ok(Self {
            n,
            p,
            columns: values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Entry at 0-based row `k`, column `i`.
    #[inline]
    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.columns[i * self.n + k]
    }

    /// All observations of 0-based coordinate `i`.
    #[inline]
    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i * self.n..(i + 1) * self.n]
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.p);
        for k in 0..self.n {
            out.extend((0..self.p).map(|i| self.get(k, i)));
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_column_major(self.n, self.p, self.columns.iter().map(|&v| f(v)).collect())
    }

    /// Copy with columns permuted: column `j` of the result is column `perm[j]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.p {
            return Err(Error::Dimension("permutation length must equal p".into()));
        }
        let mut values = Vec::with_capacity(self.columns.len());
        for &src in perm {
            if src >= self.p {
                return Err(Error::Dimension(format!("column {src} out of range")));
            }
            values.extend_from_slice(self.column(src));
        }
        Self::from_column_major(self.n, self.p, values)
    }

    /// Overwrites 0-based column `dst` with a copy of column `src`.
    pub fn with_column_copied(&self, src: usize, dst: usize) -> Result<Self> {
        if src >= self.p || dst >= self.p {
            return Err(Error::Dimension("column index out of range".into()));
        }
        let mut values = self.columns.clone();
        let col = self.column(src).to_vec();
        values[dst * self.n..(dst + 1) * self.n].copy_from_slice(&col);
        Self::from_column_major(self.n, self.p, values)
    }

    /// Centers each column on its sample mean and scales it by its sample
    /// standard deviation (n − 1 denominator).
    pub fn studentized(&self) -> Result<Self> {
        if self.n < 2 {
            return Err(Error::Dimension(
                "studentizing needs at least two observations".into(),
            ));
        }
        let mut values = Vec::with_capacity(self.columns.len());
        for i in 0..self.p {
            let col = self.column(i);
            let mean = col.iter().sum::<f64>() / self.n as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (self.n - 1) as f64;
            let sd = var.sqrt();
            if sd == 0.0 {
                return Err(Error::Domain(format!(
                    "column {} has zero variance and cannot be studentized",
                    i + 1
                )));
            }
            values.extend(col.iter().map(|v| (v - mean) / sd));
        }
        Self::from_column_major(self.n, self.p, values)
    }

    /// Reads a headerless CSV of decimal floats, one observation per line.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut text = String::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text).map_err(|reason| Error::Format {
            path: path.to_path_buf(),
            reason,
        })
    }

    fn parse_csv(text: &str) -> std::result::Result<Self, String> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut rows = Vec::new();
        for (k, record) in reader.records().enumerate() {
            let record = record.map_err(|e| e.to_string())?;
            let row = record
                .iter()
                .enumerate()
                .map(|(i, field)| {
                    field.parse::<f64>().map_err(|_| {
                        format!("row {}, column {}: `{field}` is not a number", k + 1, i + 1)
                    })
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows).map_err(|e| e.to_string())
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for k in 0..self.n {
            let row: Vec<String> = (0..self.p).map(|i| format!("{:e}", self.get(k, i))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}
