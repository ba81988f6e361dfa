//! Survival tables, pseudo data tables and feature encoding.

mod encode;
mod expand;
mod io;

pub use encode::{one_hot_encode, EncodedMatrix, EncodingGroup};
pub use expand::{aggregate_exposures, exposure_expansion, ExposureSummary, PseudoTable};
pub use io::load_survival_table_from_reader;

use crate::error::{Error, Result};
use crate::rng::SplitRng;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

/// Declares how a CSV maps onto a survival table.
#[derive(Debug, Clone)]
pub struct Schema {
    /// Optional id column; row index is used when absent.
    pub id: Option<String>,
    pub duration: String,
    pub event: String,
    pub covariates: Vec<(String, ColumnKind)>,
}

/// A covariate column with explicit missing markers.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Numeric {
        name: String,
        values: Vec<Option<f64>>,
    },
    Categorical {
        name: String,
        values: Vec<Option<String>>,
    },
}

impl Column {
    pub fn name(&self) -> &str {
        match self {
            Column::Numeric { name, .. } => name,
            Column::Categorical { name, .. } => name,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Column::Numeric { values, .. } => values.len(),
            Column::Categorical { values, .. } => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn has_missing(&self) -> bool {
        match self {
            Column::Numeric { values, .. } => values.iter().any(|v| v.is_none()),
            Column::Categorical { values, .. } => values.iter().any(|v| v.is_none()),
        }
    }
}

/// Raw right-censored dataset: covariates plus observed duration Y and event
/// indicator delta. Immutable after construction; transformations return new
/// tables.
#[derive(Debug, Clone)]
pub struct SurvivalTable {
    ids: Vec<String>,
    durations: Vec<f64>,
    events: Vec<u8>,
    columns: Vec<Column>,
}

impl SurvivalTable {
    pub fn new(
        ids: Vec<String>,
        durations: Vec<f64>,
        events: Vec<u8>,
        columns: Vec<Column>,
    ) -> Result<Self> {
        let n = ids.len();
        if durations.len() != n || events.len() != n {
            return Err(Error::invalid("id, duration and event lengths differ"));
        }
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::invalid(format!(
                "column {} has {} rows, expected {n}",
                c.name(),
                c.len()
            )));
        }
        if let Some(d) = durations.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::invalid(format!("negative or non-finite duration {d}")));
        }
        if events.iter().any(|&e| e > 1) {
            return Err(Error::invalid("event indicator must be 0 or 1"));
        }
        let mut seen = std::collections::HashSet::new();
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::invalid(format!("duplicate id {id}")));
            }
        }
        Ok(SurvivalTable {
            ids,
            durations,
            events,
            columns,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn events(&self) -> &[u8] {
        &self.events
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name() == name)
    }

    /// Replace missing cells: numeric columns get the column median of the
    /// observed values, categorical columns get a dedicated "Missing value"
    /// level. Idempotent.
    pub fn impute_missing(&self) -> Result<SurvivalTable> {
        let columns = self
            .columns
            .iter()
            .map(|c| impute_column(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(SurvivalTable {
            ids: self.ids.clone(),
            durations: self.durations.clone(),
            events: self.events.clone(),
            columns,
        })
    }

    /// One-hot encode categorical covariates; numeric columns pass through.
    /// Requires imputation to have run (no missing cells).
    pub fn one_hot_encode(&self) -> Result<EncodedMatrix> {
        one_hot_encode(&self.columns, self.n_rows())
    }

    pub fn select_rows(&self, rows: &[usize]) -> SurvivalTable {
        let columns = self
            .columns
            .iter()
            .map(|c| match c {
                Column::Numeric { name, values } => Column::Numeric {
                    name: name.clone(),
                    values: rows.iter().map(|&i| values[i]).collect(),
                },
                Column::Categorical { name, values } => Column::Categorical {
                    name: name.clone(),
                    values: rows.iter().map(|&i| values[i].clone()).collect(),
                },
            })
            .collect();
        SurvivalTable {
            ids: rows.iter().map(|&i| self.ids[i].clone()).collect(),
            durations: rows.iter().map(|&i| self.durations[i]).collect(),
            events: rows.iter().map(|&i| self.events[i]).collect(),
            columns,
        }
    }
}

fn impute_column(column: &Column) -> Result<Column> {
    match column {
        Column::Numeric { name, values } => {
            let mut observed: Vec<f64> = values.iter().flatten().copied().collect();
            if observed.is_empty() && values.iter().any(|v| v.is_none()) {
                return Err(Error::invalid(format!(
                    "numeric column {name} is entirely missing, no median exists"
                )));
            }
            observed.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = if observed.is_empty() {
                0.0
            } else if observed.len() % 2 == 1 {
                observed[observed.len() / 2]
            } else {
                let hi = observed.len() / 2;
                (observed[hi - 1] + observed[hi]) / 2.0
            };
            Ok(Column::Numeric {
                name: name.clone(),
                values: values.iter().map(|v| Some(v.unwrap_or(median))).collect(),
            })
        }
        Column::Categorical { name, values } => Ok(Column::Categorical {
            name: name.clone(),
            values: values
                .iter()
                .map(|v| Some(v.clone().unwrap_or_else(|| MISSING_LEVEL.to_string())))
                .collect(),
        }),
    }
}

/// Level assigned to missing categorical cells.
pub const MISSING_LEVEL: &str = "Missing value";

/// Load a survival table from a CSV file with a header row.
pub fn load_survival_table(path: impl AsRef<Path>, schema: &Schema) -> Result<SurvivalTable> {
    let file = std::fs::File::open(path)?;
    load_survival_table_from_reader(file, schema)
}

/// Event-stratified train/test split: shuffles each event stratum and moves
/// `test_fraction` of it to the test side. Deterministic for a fixed rng
/// stream.
pub fn stratified_split(
    table: &SurvivalTable,
    test_fraction: f64,
    rng: &mut SplitRng,
) -> Result<(SurvivalTable, SurvivalTable)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for stratum in [0u8, 1u8] {
        let mut idx: Vec<usize> = (0..table.n_rows())
            .filter(|&i| table.events[i] == stratum)
            .collect();
        if idx.is_empty() {
            return Err(Error::invalid(format!("event stratum {stratum} is empty")));
        }
        rng.shuffle(&mut idx);
        let n_test = (idx.len() as f64 * test_fraction).round() as usize;
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::invalid(
            "split produced an empty partition; table too small for the fraction",
        ));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((table.select_rows(&train), table.select_rows(&test)))
}
