//! Survival trees split on the two-group log-rank statistic; each leaf
//! carries the Nelson-Aalen cumulative hazard of its members.

use super::grow::FeatureSampler;
use super::{LeafValue, Node, SplitRecord, Tree, TreeKind};
use crate::data::EncodedMatrix;
use crate::error::{Error, Result};
use crate::estimators::nelson_aalen;

#[derive(Debug, Clone)]
pub struct SurvivalTreeConfig {
    pub min_events_per_leaf: usize,
    /// Chi-square threshold for accepting a split; 3.84 is the 5% bound of
    /// the underlying log-rank test.
    pub min_logrank: f64,
    pub max_depth: usize,
}

impl Default for SurvivalTreeConfig {
    fn default() -> Self {
        SurvivalTreeConfig {
            min_events_per_leaf: 5,
            min_logrank: 3.84,
            max_depth: 30,
        }
    }
}

/// Log-rank chi-square between the two sides of a candidate partition,
/// restricted to one node's rows. Returns None when either group has zero
/// expected deaths.
fn logrank_x2(
    durations: &[f64],
    events: &[u8],
    rows: &[usize],
    is_left: impl Fn(usize) -> bool,
) -> Option<f64> {
    let mut event_times: Vec<f64> = rows
        .iter()
        .filter(|&&r| events[r] == 1)
        .map(|&r| durations[r])
        .collect();
    event_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    event_times.dedup();
    if event_times.is_empty() {
        return None;
    }
    let (mut o_l, mut e_l) = (0.0f64, 0.0f64);
    let (mut o_r, mut e_r) = (0.0f64, 0.0f64);
    for &t in &event_times {
        let (mut n_l, mut n_r, mut d_l, mut d_r) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &r in rows {
            let at_risk = durations[r] >= t;
            let dies = durations[r] == t && events[r] == 1;
            if is_left(r) {
                n_l += f64::from(at_risk);
                d_l += f64::from(dies);
            } else {
                n_r += f64::from(at_risk);
                d_r += f64::from(dies);
            }
        }
        let n = n_l + n_r;
        let d = d_l + d_r;
        if n == 0.0 {
            continue;
        }
        o_l += d_l;
        o_r += d_r;
        e_l += n_l * d / n;
        e_r += n_r * d / n;
    }
    if e_l <= 0.0 || e_r <= 0.0 {
        return None;
    }
    Some((o_l - e_l).powi(2) / e_l + (o_r - e_r).powi(2) / e_r)
}

fn best_logrank_split(
    x: &EncodedMatrix,
    durations: &[f64],
    events: &[u8],
    rows: &[usize],
    config: &SurvivalTreeConfig,
    features: &[usize],
) -> Option<SplitRecord> {
    let mut best: Option<SplitRecord> = None;
    for &feature in features {
        let mut values: Vec<f64> = rows.iter().map(|&r| x.row(r)[feature]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for w in values.windows(2) {
            let threshold = (w[0] + w[1]) / 2.0;
            let left_events = rows
                .iter()
                .filter(|&&r| x.row(r)[feature] <= threshold && events[r] == 1)
                .count();
            let total_events = rows.iter().filter(|&&r| events[r] == 1).count();
            let right_events = total_events - left_events;
            if left_events < config.min_events_per_leaf
                || right_events < config.min_events_per_leaf
            {
                continue;
            }
            let Some(x2) = logrank_x2(durations, events, rows, |r| {
                x.row(r)[feature] <= threshold
            }) else {
                continue;
            };
            let better = match &best {
                None => x2 > 0.0,
                Some(b) => x2 > b.gain,
            };
            if better {
                best = Some(SplitRecord {
                    feature,
                    threshold,
                    gain: x2,
                });
            }
        }
    }
    // The statistic must clear the test bound.
    best.filter(|b| b.gain >= config.min_logrank)
}

/// Grow a survival tree; leaves store the Nelson-Aalen estimate of their
/// members.
pub fn grow_survival_tree(
    x: &EncodedMatrix,
    durations: &[f64],
    events: &[u8],
    config: &SurvivalTreeConfig,
) -> Result<Tree> {
    let rows: Vec<usize> = (0..x.n_rows).collect();
    grow_survival_on_rows(x, durations, events, &rows, config, &mut FeatureSampler::All)
}

pub(crate) fn grow_survival_on_rows(
    x: &EncodedMatrix,
    durations: &[f64],
    events: &[u8],
    rows: &[usize],
    config: &SurvivalTreeConfig,
    sampler: &mut FeatureSampler,
) -> Result<Tree> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("cannot grow a survival tree on no rows".into()));
    }
    let root_events = rows.iter().filter(|&&r| events[r] == 1).count();
    if root_events == 0 {
        return Err(Error::invalid("survival tree needs at least one event"));
    }
    if root_events < config.min_events_per_leaf {
        return Err(Error::invalid(format!(
            "root has {root_events} events, fewer than min_events_per_leaf"
        )));
    }
    let mut nodes = Vec::new();
    build(x, durations, events, rows, config, sampler, 0, &mut nodes)?;
    Ok(Tree {
        kind: TreeKind::Survival,
        n_features: x.n_cols,
        nodes,
    })
}

#[allow(clippy::too_many_arguments)]
fn build(
    x: &EncodedMatrix,
    durations: &[f64],
    events: &[u8],
    rows: &[usize],
    config: &SurvivalTreeConfig,
    sampler: &mut FeatureSampler,
    depth: usize,
    nodes: &mut Vec<Node>,
) -> Result<usize> {
    let node_durations: Vec<f64> = rows.iter().map(|&r| durations[r]).collect();
    let node_events: Vec<u8> = rows.iter().map(|&r| events[r]).collect();
    let hazard = nelson_aalen(&node_durations, &node_events)?;

    let idx = nodes.len();
    nodes.push(Node {
        split: None,
        left: 0,
        right: 0,
        n_rows: rows.len(),
        weight: rows.len() as f64,
        class_weights: Vec::new(),
        node_error: 0.0,
        leaf: LeafValue::Hazard(hazard),
    });

    if depth >= config.max_depth {
        return Ok(idx);
    }
    let subset = sampler.draw(x.n_cols);
    let all: Vec<usize>;
    let features: &[usize] = match &subset {
        Some(s) => s,
        None => {
            all = (0..x.n_cols).collect();
            &all
        }
    };
    let Some(split) = best_logrank_split(x, durations, events, rows, config, features) else {
        return Ok(idx);
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| x.row(r)[split.feature] <= split.threshold);
    let left = build(x, durations, events, &left_rows, config, sampler, depth + 1, nodes)?;
    let right = build(x, durations, events, &right_rows, config, sampler, depth + 1, nodes)?;
    nodes[idx].split = Some(split);
    nodes[idx].left = left;
    nodes[idx].right = right;
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitRng;

    /// Two clusters with disjoint death-time ranges, separable on feature 0.
    fn clustered() -> (EncodedMatrix, Vec<f64>, Vec<u8>) {
        let mut rng = SplitRng::new(7);
        let mut rows = Vec::new();
        let mut durations = Vec::new();
        let mut events = Vec::new();
        for i in 0..60 {
            let early = i < 30;
            rows.push(vec![if early { 0.0 } else { 1.0 }, rng.next_f64()]);
            durations.push(if early {
                1.0 + rng.next_f64()
            } else {
                10.0 + rng.next_f64()
            });
            events.push(1u8);
        }
        (
            EncodedMatrix::from_rows(rows, vec!["cluster".into(), "noise".into()]).unwrap(),
            durations,
            events,
        )
    }

    #[test]
    fn recovers_separating_threshold_and_leaf_curves() {
        let (x, durations, events) = clustered();
        let config = SurvivalTreeConfig {
            max_depth: 1,
            ..Default::default()
        };
        let tree = grow_survival_tree(&x, &durations, &events, &config).unwrap();
        let split = tree.nodes[0].split.as_ref().unwrap();
        assert_eq!(split.feature, 0);
        assert!((split.threshold - 0.5).abs() < 1e-12);

        // Leaf curves equal the per-cluster Nelson-Aalen oracle.
        for side in [0.0, 1.0] {
            let leaf = tree.predict_hazard(&[side, 0.5]);
            let members: Vec<usize> = (0..60)
                .filter(|&i| x.row(i)[0] == side)
                .collect();
            let d: Vec<f64> = members.iter().map(|&i| durations[i]).collect();
            let e: Vec<u8> = members.iter().map(|&i| events[i]).collect();
            let oracle = nelson_aalen(&d, &e).unwrap();
            assert_eq!(leaf, &oracle);
        }
    }

    #[test]
    fn infinite_threshold_gives_pooled_curve() {
        let (x, durations, events) = clustered();
        let config = SurvivalTreeConfig {
            min_logrank: f64::INFINITY,
            ..Default::default()
        };
        let tree = grow_survival_tree(&x, &durations, &events, &config).unwrap();
        assert_eq!(tree.n_leaves(), 1);
        let pooled = nelson_aalen(&durations, &events).unwrap();
        assert_eq!(tree.predict_hazard(&[0.0, 0.0]), &pooled);
    }

    #[test]
    fn identical_children_mean_no_split() {
        // Feature splits the sample into halves with identical survival.
        let mut rows = Vec::new();
        let mut durations = Vec::new();
        let mut events = Vec::new();
        for side in [0.0, 1.0] {
            for k in 0..10 {
                rows.push(vec![side]);
                durations.push(1.0 + k as f64);
                events.push(1u8);
            }
        }
        let x = EncodedMatrix::from_rows(rows, vec!["f".into()]).unwrap();
        let tree =
            grow_survival_tree(&x, &durations, &events, &SurvivalTreeConfig::default()).unwrap();
        assert_eq!(tree.n_leaves(), 1);
    }

    #[test]
    fn no_events_is_an_error() {
        let x = EncodedMatrix::from_rows(vec![vec![0.0], vec![1.0]], vec!["f".into()]).unwrap();
        assert!(grow_survival_tree(
            &x,
            &[1.0, 2.0],
            &[0, 0],
            &SurvivalTreeConfig::default()
        )
        .is_err());
    }

    #[test]
    fn leaf_curves_satisfy_hazard_invariants() {
        let (x, durations, events) = clustered();
        let tree =
            grow_survival_tree(&x, &durations, &events, &SurvivalTreeConfig::default()).unwrap();
        for idx in tree.reachable() {
            if let LeafValue::Hazard(h) = &tree.nodes[idx].leaf {
                assert!(h.values().windows(2).all(|w| w[1] >= w[0]));
                assert!(h.values().iter().all(|&v| v >= 0.0));
            }
        }
    }
}
