//! Pluggable boosting losses over raw scores.
//!
//! All losses expose the batch objective, its gradient with respect to the
//! raw score vector, and a second-order term (identically 1 for the
//! first-order losses). For the exposure-weighted binomial loss the raw
//! score lives in logit space and `w` is the initial exposure; for the Cox
//! partial loss `y` is the observed duration and `w` the event indicator.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "name")]
pub enum Loss {
    Squared,
    Absolute,
    Huber { quantile: f64 },
    ExposureBinomial,
    CoxPartial,
}

/// Targets and per-row weights a loss is evaluated against.
#[derive(Debug, Clone, Copy)]
pub struct LossData<'a> {
    pub y: &'a [f64],
    pub w: &'a [f64],
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Empirical quantile by the nearest-rank rule.
pub fn empirical_quantile(values: &[f64], q: f64) -> f64 {
    debug_assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((sorted.len() as f64 * q).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Huber loss value at a fixed transition point delta.
pub fn huber_value_fixed(data: &LossData, raw: &[f64], delta: f64) -> f64 {
    data.y
        .iter()
        .zip(raw)
        .zip(data.w)
        .map(|((&y, &f), &w)| {
            let r = y - f;
            if r.abs() <= delta {
                w * 0.5 * r * r
            } else {
                w * delta * (r.abs() - 0.5 * delta)
            }
        })
        .sum()
}

/// Gradient of the fixed-delta Huber loss with respect to the raw scores.
pub fn huber_gradient_fixed(data: &LossData, raw: &[f64], delta: f64) -> Vec<f64> {
    data.y
        .iter()
        .zip(raw)
        .zip(data.w)
        .map(|((&y, &f), &w)| {
            let r = y - f;
            if r.abs() <= delta {
                -w * r
            } else {
                -w * delta * r.signum()
            }
        })
        .collect()
}

impl Loss {
    pub fn uses_logit_link(&self) -> bool {
        matches!(self, Loss::ExposureBinomial)
    }

    /// Transition point for the Huber loss at the current residuals; unused
    /// by the other losses.
    pub fn huber_delta(&self, data: &LossData, raw: &[f64]) -> Option<f64> {
        match self {
            Loss::Huber { quantile } => {
                let abs_res: Vec<f64> = data
                    .y
                    .iter()
                    .zip(raw)
                    .map(|(&y, &f)| (y - f).abs())
                    .collect();
                Some(empirical_quantile(&abs_res, *quantile))
            }
            _ => None,
        }
    }

    pub fn value(&self, data: &LossData, raw: &[f64]) -> f64 {
        match self {
            Loss::Squared => data
                .y
                .iter()
                .zip(raw)
                .zip(data.w)
                .map(|((&y, &f), &w)| w * 0.5 * (y - f) * (y - f))
                .sum(),
            Loss::Absolute => data
                .y
                .iter()
                .zip(raw)
                .zip(data.w)
                .map(|((&y, &f), &w)| w * (y - f).abs())
                .sum(),
            Loss::Huber { .. } => {
                let delta = self.huber_delta(data, raw).unwrap();
                huber_value_fixed(data, raw, delta)
            }
            Loss::ExposureBinomial => data
                .y
                .iter()
                .zip(raw)
                .zip(data.w)
                .map(|((&y, &f), &w)| {
                    let q = sigmoid(f).clamp(1e-15, 1.0 - 1e-15);
                    -w * (y * q.ln() + (1.0 - y) * (1.0 - q).ln())
                })
                .sum(),
            Loss::CoxPartial => cox_partial_value(data, raw),
        }
    }

    /// dL/draw_i.
    pub fn gradient(&self, data: &LossData, raw: &[f64]) -> Vec<f64> {
        match self {
            Loss::Squared => data
                .y
                .iter()
                .zip(raw)
                .zip(data.w)
                .map(|((&y, &f), &w)| w * (f - y))
                .collect(),
            Loss::Absolute => data
                .y
                .iter()
                .zip(raw)
                .zip(data.w)
                .map(|((&y, &f), &w)| -w * (y - f).signum())
                .collect(),
            Loss::Huber { .. } => {
                let delta = self.huber_delta(data, raw).unwrap();
                huber_gradient_fixed(data, raw, delta)
            }
            Loss::ExposureBinomial => data
                .y
                .iter()
                .zip(raw)
                .zip(data.w)
                .map(|((&y, &f), &w)| w * (sigmoid(f) - y))
                .collect(),
            Loss::CoxPartial => cox_partial_gradient(data, raw),
        }
    }

    /// Second-order term; identically 1 for the first-order losses.
    pub fn hessian(&self, data: &LossData, raw: &[f64]) -> Vec<f64> {
        match self {
            Loss::Squared => data.w.to_vec(),
            Loss::ExposureBinomial => raw
                .iter()
                .zip(data.w)
                .map(|(&f, &w)| {
                    let q = sigmoid(f);
                    w * q * (1.0 - q)
                })
                .collect(),
            Loss::Absolute | Loss::Huber { .. } | Loss::CoxPartial => vec![1.0; raw.len()],
        }
    }

    pub fn validate(&self, data: &LossData) -> Result<()> {
        if data.y.len() != data.w.len() {
            return Err(Error::invalid("targets and weights differ in length"));
        }
        match self {
            Loss::ExposureBinomial => {
                if data.y.iter().any(|&y| y != 0.0 && y != 1.0) {
                    return Err(Error::invalid("exposure-binomial targets must be 0 or 1"));
                }
                if data.w.iter().any(|&w| !(0.0..=1.0).contains(&w)) {
                    return Err(Error::invalid("initial exposures must lie in [0, 1]"));
                }
            }
            Loss::CoxPartial => {
                if data.w.iter().any(|&w| w != 0.0 && w != 1.0) {
                    return Err(Error::invalid("cox event indicators must be 0 or 1"));
                }
                if data.y.iter().any(|&t| t < 0.0 || !t.is_finite()) {
                    return Err(Error::invalid("cox durations must be nonnegative"));
                }
            }
            Loss::Huber { quantile } => {
                if !(*quantile > 0.0 && *quantile <= 1.0) {
                    return Err(Error::invalid("huber quantile must lie in (0, 1]"));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// Negative Cox log partial likelihood over raw scores. Ties share the risk
/// set of their common time.
fn cox_partial_value(data: &LossData, raw: &[f64]) -> f64 {
    let order = time_order(data.y);
    // Sweep decreasing time, accumulating sum of exp(raw) over the risk set.
    let mut acc = 0.0f64;
    let mut value = 0.0;
    let mut i = 0;
    while i < order.len() {
        let t = data.y[order[i]];
        let mut j = i;
        while j < order.len() && data.y[order[j]] == t {
            acc += raw[order[j]].min(700.0).exp();
            j += 1;
        }
        for &k in &order[i..j] {
            if data.w[k] == 1.0 {
                value -= raw[k] - acc.ln();
            }
        }
        i = j;
    }
    value
}

fn cox_partial_gradient(data: &LossData, raw: &[f64]) -> Vec<f64> {
    let order = time_order(data.y);
    let exp_raw: Vec<f64> = raw.iter().map(|&f| f.min(700.0).exp()).collect();

    // Decreasing-time sweep: per distinct time, the risk-set denominator S0
    // and the event count.
    let mut blocks: Vec<(usize, usize, f64, f64)> = Vec::new();
    let mut acc = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let t = data.y[order[i]];
        let mut j = i;
        while j < order.len() && data.y[order[j]] == t {
            acc += exp_raw[order[j]];
            j += 1;
        }
        let deaths = order[i..j].iter().filter(|&&k| data.w[k] == 1.0).count() as f64;
        blocks.push((i, j, acc, deaths));
        i = j;
    }

    // Increasing-time accumulation: a row picks up d/S0 mass from every
    // event time up to and including its own.
    let mut grad: Vec<f64> = data.w.iter().map(|&w| -w).collect();
    let mut cum = 0.0f64;
    for &(start, end, s0, deaths) in blocks.iter().rev() {
        if deaths > 0.0 {
            cum += deaths / s0;
        }
        for &k in &order[start..end] {
            grad[k] += exp_raw[k] * cum;
        }
    }
    grad
}

/// Row order by decreasing time.
fn time_order(times: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[b].partial_cmp(&times[a]).unwrap());
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitRng;

    fn finite_difference_check(loss: Loss, n: usize, seed: u64, fixed_huber_delta: Option<f64>) {
        let mut rng = SplitRng::new(seed);
        for _ in 0..20 {
            let y: Vec<f64> = match loss {
                Loss::ExposureBinomial => (0..n).map(|_| f64::from(rng.bernoulli(0.4))).collect(),
                Loss::CoxPartial => (0..n).map(|_| 0.2 + rng.next_f64() * 5.0).collect(),
                _ => (0..n).map(|_| rng.normal() * 2.0).collect(),
            };
            let w: Vec<f64> = match loss {
                Loss::ExposureBinomial => y
                    .iter()
                    .map(|&yi| if yi == 1.0 { 1.0 } else { 0.2 + 0.8 * rng.next_f64() })
                    .collect(),
                Loss::CoxPartial => (0..n).map(|_| f64::from(rng.bernoulli(0.7))).collect(),
                _ => (0..n).map(|_| 0.5 + rng.next_f64()).collect(),
            };
            let raw: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            let data = LossData { y: &y, w: &w };

            let (value, grad): (Box<dyn Fn(&[f64]) -> f64>, Vec<f64>) = match fixed_huber_delta {
                Some(delta) => (
                    Box::new(move |r: &[f64]| huber_value_fixed(&LossData { y: &y, w: &w }, r, delta)),
                    huber_gradient_fixed(&data, &raw, delta),
                ),
                None => (
                    Box::new(move |r: &[f64]| loss.value(&LossData { y: &y, w: &w }, r)),
                    loss.gradient(&data, &raw),
                ),
            };

            let h = 1e-6;
            for i in 0..n {
                // The absolute loss has a kink at zero residual; skip points
                // too close to it.
                if matches!(loss, Loss::Absolute) && (data.y[i] - raw[i]).abs() < 1e-3 {
                    continue;
                }
                let mut plus = raw.to_vec();
                let mut minus = raw.to_vec();
                plus[i] += h;
                minus[i] -= h;
                let numeric = (value(&plus) - value(&minus)) / (2.0 * h);
                let denom = numeric.abs().max(1e-8);
                assert!(
                    ((grad[i] - numeric) / denom).abs() < 1e-6,
                    "{loss:?} row {i}: {} vs {numeric}",
                    grad[i]
                );
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        finite_difference_check(Loss::Squared, 8, 1, None);
        finite_difference_check(Loss::Absolute, 8, 2, None);
        finite_difference_check(Loss::Huber { quantile: 0.9 }, 8, 3, Some(1.2));
        finite_difference_check(Loss::ExposureBinomial, 8, 4, None);
        finite_difference_check(Loss::CoxPartial, 8, 5, None);
    }

    #[test]
    fn hessians_match_finite_differences_of_gradient() {
        let mut rng = SplitRng::new(6);
        for loss in [Loss::Squared, Loss::ExposureBinomial] {
            let n = 8;
            let y: Vec<f64> = match loss {
                Loss::ExposureBinomial => (0..n).map(|_| f64::from(rng.bernoulli(0.5))).collect(),
                _ => (0..n).map(|_| rng.normal()).collect(),
            };
            let w: Vec<f64> = (0..n).map(|_| 0.3 + 0.7 * rng.next_f64()).collect();
            let raw: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            let data = LossData { y: &y, w: &w };
            let hess = loss.hessian(&data, &raw);
            let step = 1e-6;
            for i in 0..n {
                let mut plus = raw.clone();
                let mut minus = raw.clone();
                plus[i] += step;
                minus[i] -= step;
                let numeric =
                    (loss.gradient(&data, &plus)[i] - loss.gradient(&data, &minus)[i])
                        / (2.0 * step);
                assert!(
                    (hess[i] - numeric).abs() / numeric.abs().max(1e-8) < 1e-5,
                    "{loss:?} row {i}: {} vs {numeric}",
                    hess[i]
                );
            }
        }
    }

    #[test]
    fn exposure_binomial_gradient_form() {
        // g_i = ei (q - y) and h_i = ei q (1 - q).
        let y = vec![1.0, 0.0];
        let w = vec![1.0, 0.6];
        let raw = vec![0.3, -0.2];
        let data = LossData { y: &y, w: &w };
        let g = Loss::ExposureBinomial.gradient(&data, &raw);
        let h = Loss::ExposureBinomial.hessian(&data, &raw);
        for i in 0..2 {
            let q = sigmoid(raw[i]);
            assert!((g[i] - w[i] * (q - y[i])).abs() < 1e-15);
            assert!((h[i] - w[i] * q * (1.0 - q)).abs() < 1e-15);
        }
    }

    #[test]
    fn cox_partial_matches_likelihood_layout() {
        // Two rows, event on the first at the earlier time: the later row
        // only contributes through the risk set.
        let y = vec![1.0, 2.0];
        let w = vec![1.0, 0.0];
        let raw = vec![0.5, -0.3];
        let data = LossData { y: &y, w: &w };
        let expected = -(raw[0] - (raw[0].exp() + raw[1].exp()).ln());
        assert!((Loss::CoxPartial.value(&data, &raw) - expected).abs() < 1e-12);
    }

    #[test]
    fn huber_delta_matches_sort_oracle() {
        let mut rng = SplitRng::new(9);
        let n = 31;
        let y: Vec<f64> = (0..n).map(|_| rng.normal() * 3.0).collect();
        let raw: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let w = vec![1.0; n];
        let loss = Loss::Huber { quantile: 0.9 };
        let delta = loss
            .huber_delta(&LossData { y: &y, w: &w }, &raw)
            .unwrap();

        // Oracle: sort absolute residuals and take the ceil(0.9 n)-th.
        let mut abs: Vec<f64> = y.iter().zip(&raw).map(|(&a, &b)| (a - b).abs()).collect();
        abs.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let idx = ((n as f64) * 0.9).ceil() as usize - 1;
        assert_eq!(delta, abs[idx]);
    }

    #[test]
    fn quantile_nearest_rank_edges() {
        let v = vec![3.0, 1.0, 2.0];
        assert_eq!(empirical_quantile(&v, 1.0), 3.0);
        assert_eq!(empirical_quantile(&v, 0.34), 2.0);
        assert_eq!(empirical_quantile(&v, 0.01), 1.0);
    }

    #[test]
    fn sigmoid_saturates_without_overflow() {
        assert!(sigmoid(30.0) >= 1.0 - 1e-13);
        assert!(sigmoid(-30.0) <= 1e-13);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(1e308).is_finite());
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let data = LossData {
            y: &[0.0, 2.0],
            w: &[1.0, 1.0],
        };
        assert!(Loss::ExposureBinomial.validate(&data).is_err());
        let data = LossData {
            y: &[0.0, 1.0],
            w: &[1.0, 1.5],
        };
        assert!(Loss::ExposureBinomial.validate(&data).is_err());
        assert!(Loss::Huber { quantile: 0.0 }
            .validate(&LossData { y: &[], w: &[] })
            .is_err());
    }
}
