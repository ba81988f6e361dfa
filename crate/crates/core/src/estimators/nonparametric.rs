//! Kaplan-Meier, Nelson-Aalen, censoring-distribution curve and the two-group
//! log-rank statistic.

use crate::curves::{CumHazardCurve, SurvivalCurve};
use crate::error::{Error, Result};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn check_inputs(durations: &[f64], events: &[u8]) -> Result<()> {
    if durations.is_empty() {
        return Err(Error::EmptyInput("no observations".into()));
    }
    if durations.len() != events.len() {
        return Err(Error::invalid("durations and events differ in length"));
    }
    if durations.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::invalid("durations must be finite and nonnegative"));
    }
    if events.iter().any(|&e| e > 1) {
        return Err(Error::invalid("events must be 0 or 1"));
    }
    Ok(())
}

/// Death and at-risk counts per distinct time, ascending. Individuals
/// censored at a death time are counted at risk for that death.
fn risk_table(durations: &[f64], events: &[u8]) -> Vec<(f64, usize, usize)> {
    let mut order: Vec<usize> = (0..durations.len()).collect();
    order.sort_by(|&a, &b| durations[a].partial_cmp(&durations[b]).unwrap());

    let mut out = Vec::new();
    let mut at_risk = durations.len();
    let mut i = 0;
    while i < order.len() {
        let t = durations[order[i]];
        let mut deaths = 0;
        let mut count = 0;
        while i < order.len() && durations[order[i]] == t {
            deaths += events[order[i]] as usize;
            count += 1;
            i += 1;
        }
        out.push((t, deaths, at_risk));
        at_risk -= count;
    }
    out
}

/// Kaplan-Meier estimator of the survival function. Jumps only at times with
/// at least one observed event.
pub fn kaplan_meier(durations: &[f64], events: &[u8]) -> Result<SurvivalCurve> {
    check_inputs(durations, events)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut survival = 1.0;
    for (t, deaths, at_risk) in risk_table(durations, events) {
        if deaths > 0 {
            survival *= 1.0 - deaths as f64 / at_risk as f64;
            times.push(t);
            values.push(survival.max(0.0));
        }
    }
    SurvivalCurve::new(times, values)
}

/// Nelson-Aalen estimator of the cumulative hazard function.
pub fn nelson_aalen(durations: &[f64], events: &[u8]) -> Result<CumHazardCurve> {
    check_inputs(durations, events)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut hazard = 0.0;
    for (t, deaths, at_risk) in risk_table(durations, events) {
        if deaths > 0 {
            hazard += deaths as f64 / at_risk as f64;
            times.push(t);
            values.push(hazard);
        }
    }
    CumHazardCurve::new(times, values)
}

/// Kaplan-Meier curve of the censoring distribution G(t): the event roles are
/// swapped, so jumps occur at censoring times.
pub fn censoring_survival(durations: &[f64], events: &[u8]) -> Result<SurvivalCurve> {
    check_inputs(durations, events)?;
    let flipped: Vec<u8> = events.iter().map(|&e| 1 - e).collect();
    kaplan_meier(durations, &flipped)
}

/// Two-group log-rank test. Returns the chi-square statistic and its p-value
/// with one degree of freedom.
pub fn logrank_statistic(
    durations_a: &[f64],
    events_a: &[u8],
    durations_b: &[f64],
    events_b: &[u8],
) -> Result<(f64, f64)> {
    check_inputs(durations_a, events_a)?;
    check_inputs(durations_b, events_b)?;
    if events_a.iter().chain(events_b).all(|&e| e == 0) {
        return Err(Error::invalid("log-rank needs at least one event"));
    }

    // Distinct times with at least one death in the pooled sample.
    let mut event_times: Vec<f64> = durations_a
        .iter()
        .zip(events_a)
        .chain(durations_b.iter().zip(events_b))
        .filter(|(_, &e)| e == 1)
        .map(|(&t, _)| t)
        .collect();
    event_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    event_times.dedup();

    let count_at = |durations: &[f64], events: &[u8], t: f64| {
        let at_risk = durations.iter().filter(|&&d| d >= t).count() as f64;
        let deaths = durations
            .iter()
            .zip(events)
            .filter(|(&d, &e)| d == t && e == 1)
            .count() as f64;
        (at_risk, deaths)
    };

    let (mut observed_a, mut expected_a) = (0.0, 0.0);
    let (mut observed_b, mut expected_b) = (0.0, 0.0);
    for &t in &event_times {
        let (n_a, d_a) = count_at(durations_a, events_a, t);
        let (n_b, d_b) = count_at(durations_b, events_b, t);
        let n = n_a + n_b;
        let d = d_a + d_b;
        observed_a += d_a;
        observed_b += d_b;
        expected_a += n_a * d / n;
        expected_b += n_b * d / n;
    }
    if expected_a == 0.0 || expected_b == 0.0 {
        return Err(Error::invalid(
            "log-rank undefined: one group has zero expected deaths",
        ));
    }

    let x2 = (observed_a - expected_a).powi(2) / expected_a
        + (observed_b - expected_b).powi(2) / expected_b;
    let p_value = if x2 <= 0.0 {
        1.0
    } else {
        ChiSquared::new(1.0).unwrap().sf(x2)
    };
    Ok((x2, p_value))
}
