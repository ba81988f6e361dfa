//! One-hot encoding of mixed-type columns into a dense numeric matrix.

use super::Column;
use crate::error::{Error, Result};

/// Row-major numeric design matrix plus the categorical encoding map.
#[derive(Debug, Clone)]
pub struct EncodedMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub values: Vec<f64>,
    pub column_names: Vec<String>,
    pub groups: Vec<EncodingGroup>,
}

/// Maps one source categorical column onto its indicator columns.
#[derive(Debug, Clone)]
pub struct EncodingGroup {
    pub source: String,
    pub levels: Vec<String>,
    pub columns: Vec<usize>,
}

impl EncodedMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn column_values(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.row(i)[j]).collect()
    }

    pub fn group(&self, source: &str) -> Option<&EncodingGroup> {
        self.groups.iter().find(|g| g.source == source)
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, column_names: Vec<String>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = column_names.len();
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::invalid("ragged rows"));
        }
        Ok(EncodedMatrix {
            n_rows,
            n_cols,
            values: rows.into_iter().flatten().collect(),
            column_names,
            groups: Vec::new(),
        })
    }
}

/// Numeric columns pass through; each categorical column becomes one
/// indicator column per level (levels sorted for determinism). Fails when
/// missing cells remain, so run imputation first.
pub fn one_hot_encode(columns: &[Column], n_rows: usize) -> Result<EncodedMatrix> {
    let mut column_names = Vec::new();
    let mut groups = Vec::new();
    let mut writers: Vec<Box<dyn Fn(usize) -> f64 + '_>> = Vec::new();

    for column in columns {
        if column.has_missing() {
            return Err(Error::invalid(format!(
                "column {} still has missing cells; impute before encoding",
                column.name()
            )));
        }
        match column {
            Column::Numeric { name, values } => {
                column_names.push(name.clone());
                writers.push(Box::new(move |i| values[i].unwrap()));
            }
            Column::Categorical { name, values } => {
                let mut levels: Vec<String> =
                    values.iter().flatten().cloned().collect::<Vec<_>>();
                levels.sort();
                levels.dedup();
                let first_col = column_names.len();
                for level in &levels {
                    column_names.push(format!("{name}={level}"));
                }
                groups.push(EncodingGroup {
                    source: name.clone(),
                    levels: levels.clone(),
                    columns: (first_col..first_col + levels.len()).collect(),
                });
                for (k, level) in levels.into_iter().enumerate() {
                    let _ = k;
                    writers.push(Box::new(move |i| {
                        f64::from(values[i].as_deref() == Some(level.as_str()))
                    }));
                }
            }
        }
    }

    let n_cols = column_names.len();
    let mut values = Vec::with_capacity(n_rows * n_cols);
    for i in 0..n_rows {
        for w in &writers {
            values.push(w(i));
        }
    }
    Ok(EncodedMatrix {
        n_rows,
        n_cols,
        values,
        column_names,
        groups,
    })
}
