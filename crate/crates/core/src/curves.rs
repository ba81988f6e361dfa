//! Right-continuous step curves over event times.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Survival step function S(t), right-continuous, S(t) = 1 before the first
/// stored time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCurve {
    times: Vec<f64>,
    values: Vec<f64>,
}

/// Cumulative hazard step function H(t), right-continuous, H(t) = 0 before
/// the first stored time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumHazardCurve {
    times: Vec<f64>,
    values: Vec<f64>,
}

fn check_times(times: &[f64], values: &[f64]) -> Result<()> {
    if times.len() != values.len() {
        return Err(Error::invalid("curve times and values differ in length"));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("curve times must be strictly increasing"));
    }
    if times.iter().chain(values.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("curve entries must be finite"));
    }
    Ok(())
}

/// Index of the rightmost time <= t, or None when t precedes every time.
fn step_index(times: &[f64], t: f64) -> Option<usize> {
    match times.partition_point(|&x| x <= t) {
        0 => None,
        k => Some(k - 1),
    }
}

/// Index of the rightmost time strictly < t.
fn step_index_left(times: &[f64], t: f64) -> Option<usize> {
    match times.partition_point(|&x| x < t) {
        0 => None,
        k => Some(k - 1),
    }
}

impl SurvivalCurve {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_times(&times, &values)?;
        if values.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::invalid("survival values must lie in [0, 1]"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::invalid("survival values must be nonincreasing"));
        }
        Ok(SurvivalCurve { times, values })
    }

    /// Constant curve S(t) = 1.
    pub fn ones() -> Self {
        SurvivalCurve {
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match step_index(&self.times, t) {
            Some(i) => self.values[i],
            None => 1.0,
        }
    }

    /// Left limit S(t-).
    pub fn eval_left(&self, t: f64) -> f64 {
        match step_index_left(&self.times, t) {
            Some(i) => self.values[i],
            None => 1.0,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_curve_csv(w, &self.times, &self.values)
    }
}

impl CumHazardCurve {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_times(&times, &values)?;
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::invalid("cumulative hazard must be nonnegative"));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::invalid("cumulative hazard must be nondecreasing"));
        }
        Ok(CumHazardCurve { times, values })
    }

    /// Constant curve H(t) = 0.
    pub fn zero() -> Self {
        CumHazardCurve {
            times: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match step_index(&self.times, t) {
            Some(i) => self.values[i],
            None => 0.0,
        }
    }

    pub fn eval_left(&self, t: f64) -> f64 {
        match step_index_left(&self.times, t) {
            Some(i) => self.values[i],
            None => 0.0,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Plug-in survival curve S(t) = exp(-H(t)).
    pub fn to_survival(&self) -> SurvivalCurve {
        SurvivalCurve {
            times: self.times.clone(),
            values: self.values.iter().map(|&h| (-h).exp()).collect(),
        }
    }

    /// Pointwise average of several cumulative hazard curves on the union of
    /// their time grids.
    pub fn average(curves: &[CumHazardCurve]) -> CumHazardCurve {
        if curves.is_empty() {
            return CumHazardCurve::zero();
        }
        let mut grid: Vec<f64> = curves.iter().flat_map(|c| c.times.iter().copied()).collect();
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        grid.dedup();
        let b = curves.len() as f64;
        let values: Vec<f64> = grid
            .iter()
            .map(|&t| curves.iter().map(|c| c.eval(t)).sum::<f64>() / b)
            .collect();
        CumHazardCurve {
            times: grid,
            values,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_curve_csv(w, &self.times, &self.values)
    }
}

fn write_curve_csv<W: Write>(mut w: W, times: &[f64], values: &[f64]) -> Result<()> {
    writeln!(w, "time,value")?;
    for (t, v) in times.iter().zip(values) {
        writeln!(w, "{t},{v}")?;
    }
    Ok(())
}
