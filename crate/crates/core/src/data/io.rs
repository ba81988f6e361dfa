//! CSV ingestion of survival tables.
//!
//! UTF-8, header row, "." decimal separator. Unparseable numeric covariate
//! cells and empty cells become missing markers; the mandatory duration and
//! event columns must parse.

use super::{Column, ColumnKind, Schema, SurvivalTable};
use crate::error::{Error, Result};
use std::io::Read;

pub fn load_survival_table_from_reader<R: Read>(
    reader: R,
    schema: &Schema,
) -> Result<SurvivalTable> {
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let col_index = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };

    let duration_idx = col_index(&schema.duration)?;
    let event_idx = col_index(&schema.event)?;
    let id_idx = schema.id.as_deref().map(col_index).transpose()?;
    let cov_idx: Vec<(usize, &str, ColumnKind)> = schema
        .covariates
        .iter()
        .map(|(name, kind)| Ok((col_index(name)?, name.as_str(), *kind)))
        .collect::<Result<_>>()?;

    let mut ids = Vec::new();
    let mut durations = Vec::new();
    let mut events = Vec::new();
    let mut columns: Vec<Column> = schema
        .covariates
        .iter()
        .map(|(name, kind)| match kind {
            ColumnKind::Numeric => Column::Numeric {
                name: name.clone(),
                values: Vec::new(),
            },
            ColumnKind::Categorical => Column::Categorical {
                name: name.clone(),
                values: Vec::new(),
            },
        })
        .collect();

    for (row_no, record) in csv_reader.records().enumerate() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("").trim();

        let duration: f64 = field(duration_idx).parse().map_err(|_| {
            Error::invalid(format!(
                "row {row_no}: duration {:?} is not a number",
                field(duration_idx)
            ))
        })?;
        if !duration.is_finite() || duration < 0.0 {
            return Err(Error::invalid(format!(
                "row {row_no}: negative duration {duration}"
            )));
        }
        let event: f64 = field(event_idx).parse().map_err(|_| {
            Error::invalid(format!(
                "row {row_no}: event {:?} is not a number",
                field(event_idx)
            ))
        })?;
        let event = if event == 0.0 {
            0u8
        } else if event == 1.0 {
            1u8
        } else {
            return Err(Error::invalid(format!(
                "row {row_no}: event {event} outside {{0, 1}}"
            )));
        };

        ids.push(match id_idx {
            Some(i) => field(i).to_string(),
            None => row_no.to_string(),
        });
        durations.push(duration);
        events.push(event);

        for (k, (idx, _, kind)) in cov_idx.iter().enumerate() {
            let raw = field(*idx);
            match (kind, &mut columns[k]) {
                (ColumnKind::Numeric, Column::Numeric { values, .. }) => {
                    values.push(raw.parse::<f64>().ok().filter(|v| v.is_finite()));
                }
                (ColumnKind::Categorical, Column::Categorical { values, .. }) => {
                    values.push(if raw.is_empty() {
                        None
                    } else {
                        Some(raw.to_string())
                    });
                }
                _ => unreachable!(),
            }
        }
    }

    SurvivalTable::new(ids, durations, events, columns)
}
