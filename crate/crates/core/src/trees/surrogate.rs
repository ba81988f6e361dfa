//! Surrogate divisions and surrogate-based variable importance.

use super::grow::{split_gain, GrowTarget};
use super::{SplitRecord, Tree};
use crate::data::EncodedMatrix;
use crate::error::{Error, Result};

/// A candidate division on an alternate feature, with its probability of
/// agreeing with the node's optimal split.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateDivision {
    pub feature: usize,
    /// Threshold of the surrogate; +inf encodes the trivial all-left
    /// division used when the feature is constant within the node.
    pub threshold: f64,
    pub agreement: f64,
}

/// Find the division on `feature` that best mimics the primary split over
/// the given rows. The agreement is the class-weighted probability that both
/// divisions route an individual the same way; classes with zero weight in
/// the node contribute nothing.
pub fn surrogate_split(
    x: &EncodedMatrix,
    rows: &[usize],
    target: &GrowTarget,
    primary: &SplitRecord,
    feature: usize,
) -> SurrogateDivision {
    let weights = target.weights();
    let node_weight: f64 = rows.iter().map(|&r| weights[r]).sum();
    // Weight routed left/right by the primary split.
    let primary_left: Vec<bool> = rows
        .iter()
        .map(|&r| x.row(r)[primary.feature] <= primary.threshold)
        .collect();

    // Candidate thresholds: midpoints of consecutive distinct values, plus
    // the all-left sentinel.
    let mut pairs: Vec<(f64, usize)> = rows
        .iter()
        .enumerate()
        .map(|(k, &r)| (x.row(r)[feature], k))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // agreement(threshold) = [w(left & primary-left) + w(right & primary-right)] / w(node)
    // Scanning in sorted order keeps this an O(n) sweep per candidate set.
    let right_primary_right: f64 = rows
        .iter()
        .enumerate()
        .filter(|(k, _)| !primary_left[*k])
        .map(|(_, &r)| weights[r])
        .sum();

    // Start with everything on the right (threshold below the minimum),
    // then move points left one by one.
    let mut agree_left = 0.0; // w(surrogate-left & primary-left)
    let mut agree_right = right_primary_right; // w(surrogate-right & primary-right)

    // All-left sentinel.
    let all_left_agreement: f64 = rows
        .iter()
        .enumerate()
        .filter(|(k, _)| primary_left[*k])
        .map(|(_, &r)| weights[r])
        .sum::<f64>()
        / node_weight;
    let mut best = SurrogateDivision {
        feature,
        threshold: f64::INFINITY,
        agreement: all_left_agreement,
    };

    for i in 0..pairs.len() {
        let (value, k) = pairs[i];
        let r = rows[k];
        if primary_left[k] {
            agree_left += weights[r];
        } else {
            agree_right -= weights[r];
        }
        if i + 1 == pairs.len() || value == pairs[i + 1].0 {
            continue;
        }
        let agreement = (agree_left + agree_right) / node_weight;
        let threshold = (value + pairs[i + 1].0) / 2.0;
        if agreement > best.agreement {
            best = SurrogateDivision {
                feature,
                threshold,
                agreement,
            };
        }
    }
    best
}

/// Surrogate-division variable importance: for every internal node, each
/// feature is credited with the impurity decrease its surrogate division
/// achieves there; totals are rescaled so the largest equals 100.
pub fn cart_variable_importance(
    tree: &Tree,
    x: &EncodedMatrix,
    target: &GrowTarget,
) -> Result<Vec<f64>> {
    if x.n_cols != tree.n_features {
        return Err(Error::invalid("matrix does not match tree features"));
    }
    let mut importance = vec![0.0; tree.n_features];

    // Rows reaching each node.
    let mut node_rows: Vec<Vec<usize>> = vec![Vec::new(); tree.nodes.len()];
    for row in 0..x.n_rows {
        let mut idx = 0usize;
        loop {
            node_rows[idx].push(row);
            match &tree.nodes[idx].split {
                None => break,
                Some(split) => {
                    idx = if x.row(row)[split.feature] <= split.threshold {
                        tree.nodes[idx].left
                    } else {
                        tree.nodes[idx].right
                    };
                }
            }
        }
    }

    for idx in tree.reachable() {
        let Some(primary) = &tree.nodes[idx].split else {
            continue;
        };
        let rows = &node_rows[idx];
        if rows.len() < 2 {
            continue;
        }
        for feature in 0..tree.n_features {
            let division = surrogate_split(x, rows, target, primary, feature);
            if !division.threshold.is_finite() {
                continue;
            }
            if let Some(gain) = split_gain(x, rows, target, feature, division.threshold) {
                if gain > 0.0 {
                    importance[feature] += gain;
                }
            }
        }
    }

    let max = importance.iter().cloned().fold(0.0f64, f64::max);
    if max > 0.0 {
        for v in &mut importance {
            *v *= 100.0 / max;
        }
    }
    Ok(importance)
}
