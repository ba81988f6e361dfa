//! Expansion of survival tables into exposure-weighted pseudo data tables.
//!
//! Each individual contributes one row per time interval. Intervals are
//! [j, j+1) in units of `interval_length`; a death falling exactly on a
//! boundary closes the interval it starts (an extra row with ec = 0, ei = 1),
//! while a censoring on a boundary simply completes the previous interval.

use super::{one_hot_encode, Column, EncodedMatrix, SurvivalTable};
use crate::error::{Error, Result};
use std::io::Write;

const BOUNDARY_EPS: f64 = 1e-9;

/// Discretized per-interval rows carrying initial exposure `ei`, central
/// exposure `ec` and the interval death indicator `delta`.
#[derive(Debug, Clone)]
pub struct PseudoTable {
    pub ids: Vec<String>,
    pub intervals: Vec<u32>,
    pub ei: Vec<f64>,
    pub ec: Vec<f64>,
    pub delta: Vec<u8>,
    pub columns: Vec<Column>,
    /// Length of the discretization interval the table was built with.
    pub interval_length: f64,
    /// Ids of individuals with duration 0 and no event (single all-zero row).
    pub degenerate_ids: Vec<String>,
}

impl PseudoTable {
    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    /// Design matrix over the covariates plus the interval index as a
    /// trailing numeric feature.
    pub fn encode_features(&self) -> Result<EncodedMatrix> {
        let mut columns = self.columns.clone();
        columns.push(Column::Numeric {
            name: "interval".into(),
            values: self.intervals.iter().map(|&j| Some(j as f64)).collect(),
        });
        one_hot_encode(&columns, self.n_rows())
    }

    /// CSV with columns id, interval, ei, ec, delta, then covariates.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = vec![
            "id".to_string(),
            "interval".to_string(),
            "ei".to_string(),
            "ec".to_string(),
            "delta".to_string(),
        ];
        header.extend(self.columns.iter().map(|c| c.name().to_string()));
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.n_rows() {
            let mut fields = vec![
                self.ids[i].clone(),
                self.intervals[i].to_string(),
                self.ei[i].to_string(),
                self.ec[i].to_string(),
                self.delta[i].to_string(),
            ];
            for c in &self.columns {
                fields.push(match c {
                    Column::Numeric { values, .. } => {
                        values[i].map(|v| v.to_string()).unwrap_or_default()
                    }
                    Column::Categorical { values, .. } => values[i].clone().unwrap_or_default(),
                });
            }
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Expand a survival table into a pseudo data table.
///
/// `time_varying` names numeric covariates incremented by `interval_length`
/// per elapsed interval (attained age / attained year); all other covariates
/// are frozen at entry.
pub fn exposure_expansion(
    table: &SurvivalTable,
    interval_length: f64,
    time_varying: &[String],
) -> Result<PseudoTable> {
    if !(interval_length > 0.0) {
        return Err(Error::invalid("interval_length must be positive"));
    }
    for name in time_varying {
        match table.column(name) {
            Some(Column::Numeric { .. }) => {}
            Some(_) => {
                return Err(Error::invalid(format!(
                    "time-varying field {name} is not numeric"
                )))
            }
            None => return Err(Error::MissingColumn(name.clone())),
        }
    }

    let mut ids = Vec::new();
    let mut intervals = Vec::new();
    let mut ei = Vec::new();
    let mut ec = Vec::new();
    let mut delta = Vec::new();
    let mut degenerate_ids = Vec::new();
    // (source row, interval index) per pseudo row, to materialize covariates.
    let mut origins: Vec<(usize, u32)> = Vec::new();

    for row in 0..table.n_rows() {
        let duration = table.durations()[row];
        let event = table.events()[row];
        let ratio = duration / interval_length;
        let rounded = ratio.round();
        let on_boundary = (ratio - rounded).abs() < BOUNDARY_EPS;
        let (full, frac) = if on_boundary {
            (rounded as u32, 0.0)
        } else {
            (ratio.floor() as u32, ratio - ratio.floor())
        };

        if full == 0 && on_boundary && event == 0 {
            // Duration 0 without an event: no exposure at all.
            degenerate_ids.push(table.ids()[row].clone());
            ids.push(table.ids()[row].clone());
            intervals.push(0);
            ei.push(0.0);
            ec.push(0.0);
            delta.push(0);
            origins.push((row, 0));
            continue;
        }

        let last = if on_boundary {
            if event == 1 {
                full // death closes the interval it starts
            } else {
                full - 1
            }
        } else {
            full
        };

        for j in 0..=last {
            ids.push(table.ids()[row].clone());
            intervals.push(j);
            origins.push((row, j));
            if j < last {
                ei.push(1.0);
                ec.push(1.0);
                delta.push(0);
            } else if event == 1 {
                ei.push(1.0);
                ec.push(if on_boundary { 0.0 } else { frac });
                delta.push(1);
            } else {
                ei.push(if on_boundary { 1.0 } else { frac });
                ec.push(if on_boundary { 1.0 } else { frac });
                delta.push(0);
            }
        }
    }

    let columns = table
        .columns()
        .iter()
        .map(|c| match c {
            Column::Numeric { name, values } => {
                let varying = time_varying.contains(name);
                Column::Numeric {
                    name: name.clone(),
                    values: origins
                        .iter()
                        .map(|&(row, j)| {
                            values[row].map(|v| {
                                if varying {
                                    v + j as f64 * interval_length
                                } else {
                                    v
                                }
                            })
                        })
                        .collect(),
                }
            }
            Column::Categorical { name, values } => Column::Categorical {
                name: name.clone(),
                values: origins.iter().map(|&(row, _)| values[row].clone()).collect(),
            },
        })
        .collect();

    Ok(PseudoTable {
        ids,
        intervals,
        ei,
        ec,
        delta,
        columns,
        interval_length,
        degenerate_ids,
    })
}

/// Aggregated exposure statistics for one interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ExposureSummary {
    /// Total initial exposure EI_j.
    pub initial: f64,
    /// Total central exposure EC_j.
    pub central: f64,
    /// Deaths d_j.
    pub deaths: u32,
    /// Lives entering the interval l_j.
    pub alive: u32,
    /// Withdrawals (censored with partial exposure) w_j.
    pub withdrawals: u32,
    /// Sum of the withdrawal fractions c_{i,j}.
    pub censored_fraction_sum: f64,
}

/// Sum exposures over one interval of a pseudo table.
/// Satisfies EI_j = l_j - w_j + sum of censoring fractions.
pub fn aggregate_exposures(table: &PseudoTable, interval: u32) -> Result<ExposureSummary> {
    let rows: Vec<usize> = (0..table.n_rows())
        .filter(|&i| table.intervals[i] == interval)
        .collect();
    if rows.is_empty() {
        return Err(Error::invalid(format!(
            "interval {interval} not present in pseudo table"
        )));
    }
    let mut summary = ExposureSummary {
        initial: 0.0,
        central: 0.0,
        deaths: 0,
        alive: rows.len() as u32,
        withdrawals: 0,
        censored_fraction_sum: 0.0,
    };
    for &i in &rows {
        summary.initial += table.ei[i];
        summary.central += table.ec[i];
        summary.deaths += u32::from(table.delta[i]);
        if table.delta[i] == 0 && table.ei[i] < 1.0 {
            summary.withdrawals += 1;
            summary.censored_fraction_sum += table.ei[i];
        }
    }
    Ok(summary)
}
