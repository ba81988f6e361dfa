//! Split search and maximal tree growth.
//!
//! Split quality follows the information-gain form: node impurity minus
//! child impurities mixed by row-count shares. Node class proportions use
//! the supplied weights (exposures, boosting weights), which is what makes
//! censoring-aware classification trees work; the mixing shares stay counts.

use super::{LeafValue, Node, SplitRecord, Tree, TreeKind};
use crate::data::EncodedMatrix;
use crate::error::{Error, Result};
use crate::rng::SplitRng;
use crate::trees::impurity::{impurity_unchecked, Impurity};

#[derive(Debug, Clone)]
pub struct TreeConfig {
    /// A node is split only when it holds more rows than this.
    pub min_node_size: usize,
    pub max_depth: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            min_node_size: 5,
            max_depth: 30,
        }
    }
}

/// What the tree is fit to.
#[derive(Debug, Clone, Copy)]
pub enum GrowTarget<'a> {
    Classification {
        labels: &'a [usize],
        n_classes: usize,
        weights: &'a [f64],
        criterion: Impurity,
    },
    Regression {
        values: &'a [f64],
        weights: &'a [f64],
    },
}

impl<'a> GrowTarget<'a> {
    pub fn weights(&self) -> &'a [f64] {
        match self {
            GrowTarget::Classification { weights, .. } => weights,
            GrowTarget::Regression { weights, .. } => weights,
        }
    }

    fn kind(&self) -> TreeKind {
        match self {
            GrowTarget::Classification {
                n_classes,
                criterion,
                ..
            } => TreeKind::Classification {
                n_classes: *n_classes,
                criterion: *criterion,
            },
            GrowTarget::Regression { .. } => TreeKind::Regression,
        }
    }
}

pub(crate) enum FeatureSampler<'r> {
    All,
    Random { m: usize, rng: &'r mut SplitRng },
}

impl FeatureSampler<'_> {
    pub(crate) fn draw(&mut self, n_features: usize) -> Option<Vec<usize>> {
        match self {
            FeatureSampler::All => None,
            FeatureSampler::Random { m, rng } => {
                let mut subset = rng.sample_without_replacement(n_features, *m);
                subset.sort_unstable();
                Some(subset)
            }
        }
    }
}

/// Node summary used both for leaves and for split evaluation.
struct NodeStats {
    n_rows: usize,
    weight: f64,
    class_weights: Vec<f64>,
    node_error: f64,
    leaf: LeafValue,
    pure: bool,
    /// Node impurity (classification) or weighted variance (regression).
    impurity: f64,
}

fn node_stats(rows: &[usize], target: &GrowTarget) -> NodeStats {
    match target {
        GrowTarget::Classification {
            labels,
            n_classes,
            weights,
            criterion,
        } => {
            let mut class_weights = vec![0.0; *n_classes];
            for &r in rows {
                class_weights[labels[r]] += weights[r];
            }
            let weight: f64 = class_weights.iter().sum();
            let (mut best_class, mut best_w) = (0usize, f64::NEG_INFINITY);
            for (k, &w) in class_weights.iter().enumerate() {
                if w > best_w {
                    best_class = k;
                    best_w = w;
                }
            }
            let proportions: Vec<f64> = if weight > 0.0 {
                class_weights.iter().map(|&w| w / weight).collect()
            } else {
                vec![0.0; *n_classes]
            };
            let node_error = if weight > 0.0 { 1.0 - best_w / weight } else { 0.0 };
            let imp = if weight > 0.0 {
                impurity_unchecked(&class_weights, weight, *criterion)
            } else {
                0.0
            };
            let pure = class_weights.iter().filter(|&&w| w > 0.0).count() <= 1;
            NodeStats {
                n_rows: rows.len(),
                weight,
                class_weights,
                node_error,
                leaf: LeafValue::Class {
                    class: best_class,
                    proportions,
                },
                pure,
                impurity: imp,
            }
        }
        GrowTarget::Regression { values, weights } => {
            let weight: f64 = rows.iter().map(|&r| weights[r]).sum();
            let mean = if weight > 0.0 {
                rows.iter().map(|&r| weights[r] * values[r]).sum::<f64>() / weight
            } else {
                0.0
            };
            let variance = if weight > 0.0 {
                (rows
                    .iter()
                    .map(|&r| weights[r] * (values[r] - mean) * (values[r] - mean))
                    .sum::<f64>()
                    / weight)
                    .max(0.0)
            } else {
                0.0
            };
            let pure = rows
                .iter()
                .all(|&r| values[r] == values[rows[0]]);
            NodeStats {
                n_rows: rows.len(),
                weight,
                class_weights: Vec::new(),
                node_error: variance,
                leaf: LeafValue::Value(mean),
                pure,
                impurity: variance,
            }
        }
    }
}

/// Impurity decrease of splitting `rows` at (feature, threshold), child
/// impurities mixed by row-count shares. Returns None when a child ends up
/// with zero weight.
pub(crate) fn split_gain(
    x: &EncodedMatrix,
    rows: &[usize],
    target: &GrowTarget,
    feature: usize,
    threshold: f64,
) -> Option<f64> {
    let parent = node_stats(rows, target);
    let (left, right): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| x.row(r)[feature] <= threshold);
    if left.is_empty() || right.is_empty() {
        return None;
    }
    let ls = node_stats(&left, target);
    let rs = node_stats(&right, target);
    if ls.weight <= 0.0 || rs.weight <= 0.0 {
        return None;
    }
    let n = rows.len() as f64;
    Some(parent.impurity - ls.n_rows as f64 / n * ls.impurity - rs.n_rows as f64 / n * rs.impurity)
}

/// Exhaustive best split over sorted unique thresholds of the candidate
/// features. Returns None when no candidate has strictly positive gain.
pub fn best_split(
    x: &EncodedMatrix,
    rows: &[usize],
    target: &GrowTarget,
    feature_subset: Option<&[usize]>,
) -> Option<SplitRecord> {
    if rows.len() < 2 {
        return None;
    }
    let parent = node_stats(rows, target);
    if parent.weight <= 0.0 {
        return None;
    }
    let all_features: Vec<usize>;
    let features: &[usize] = match feature_subset {
        Some(f) => f,
        None => {
            all_features = (0..x.n_cols).collect();
            &all_features
        }
    };

    let n = rows.len();
    let mut best: Option<SplitRecord> = None;
    let mut pairs: Vec<(f64, usize)> = Vec::with_capacity(n);

    for &feature in features {
        pairs.clear();
        pairs.extend(rows.iter().map(|&r| (x.row(r)[feature], r)));
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        match target {
            GrowTarget::Classification {
                labels,
                n_classes,
                weights,
                criterion,
            } => {
                let mut left_cw = vec![0.0; *n_classes];
                let mut left_cnt = 0usize;
                for i in 0..n - 1 {
                    let (value, row) = pairs[i];
                    left_cw[labels[row]] += weights[row];
                    left_cnt += 1;
                    if value == pairs[i + 1].0 {
                        continue;
                    }
                    let left_w: f64 = left_cw.iter().sum();
                    let right_w = parent.weight - left_w;
                    if left_w <= 0.0 || right_w <= 0.0 {
                        continue;
                    }
                    let right_cw: Vec<f64> = parent
                        .class_weights
                        .iter()
                        .zip(&left_cw)
                        .map(|(p, l)| (p - l).max(0.0))
                        .collect();
                    let imp_l = impurity_unchecked(&left_cw, left_w, *criterion);
                    let imp_r = impurity_unchecked(&right_cw, right_w, *criterion);
                    let share_l = left_cnt as f64 / n as f64;
                    let share_r = 1.0 - share_l;
                    let gain = parent.impurity - share_l * imp_l - share_r * imp_r;
                    let threshold = (value + pairs[i + 1].0) / 2.0;
                    consider(&mut best, feature, threshold, gain);
                }
            }
            GrowTarget::Regression { values, weights } => {
                let total_w = parent.weight;
                let total_wy: f64 = rows.iter().map(|&r| weights[r] * values[r]).sum();
                let total_wyy: f64 =
                    rows.iter().map(|&r| weights[r] * values[r] * values[r]).sum();
                let (mut lw, mut lwy, mut lwyy) = (0.0f64, 0.0f64, 0.0f64);
                let mut left_cnt = 0usize;
                for i in 0..n - 1 {
                    let (value, row) = pairs[i];
                    lw += weights[row];
                    lwy += weights[row] * values[row];
                    lwyy += weights[row] * values[row] * values[row];
                    left_cnt += 1;
                    if value == pairs[i + 1].0 {
                        continue;
                    }
                    let rw = total_w - lw;
                    if lw <= 0.0 || rw <= 0.0 {
                        continue;
                    }
                    let var_l = (lwyy / lw - (lwy / lw) * (lwy / lw)).max(0.0);
                    let rwy = total_wy - lwy;
                    let rwyy = total_wyy - lwyy;
                    let var_r = (rwyy / rw - (rwy / rw) * (rwy / rw)).max(0.0);
                    let share_l = left_cnt as f64 / n as f64;
                    let gain =
                        parent.impurity - share_l * var_l - (1.0 - share_l) * var_r;
                    let threshold = (value + pairs[i + 1].0) / 2.0;
                    consider(&mut best, feature, threshold, gain);
                }
            }
        }
    }
    best
}

/// Keep the strictly better candidate; iteration order (features then
/// thresholds ascending) makes ties resolve to the lowest feature index and
/// lowest threshold.
fn consider(best: &mut Option<SplitRecord>, feature: usize, threshold: f64, gain: f64) {
    if gain <= 0.0 || !gain.is_finite() {
        return;
    }
    let better = match best {
        None => true,
        Some(b) => gain > b.gain,
    };
    if better {
        *best = Some(SplitRecord {
            feature,
            threshold,
            gain,
        });
    }
}

/// Grow a maximal tree. Recursion stops on pure nodes, node size,
/// depth, or when no split has positive gain.
pub fn grow_maximal_tree(
    x: &EncodedMatrix,
    target: &GrowTarget,
    config: &TreeConfig,
) -> Result<Tree> {
    let rows: Vec<usize> = (0..x.n_rows).collect();
    grow_on_rows(x, &rows, target, config, &mut FeatureSampler::All)
}

pub(crate) fn grow_on_rows(
    x: &EncodedMatrix,
    rows: &[usize],
    target: &GrowTarget,
    config: &TreeConfig,
    sampler: &mut FeatureSampler,
) -> Result<Tree> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("cannot grow a tree on no rows".into()));
    }
    match target {
        GrowTarget::Classification {
            labels, n_classes, ..
        } => {
            if let Some(&l) = labels.iter().max() {
                if l >= *n_classes {
                    return Err(Error::invalid("label outside declared class range"));
                }
            }
        }
        GrowTarget::Regression { .. } => {}
    }
    let mut nodes = Vec::new();
    build(x, rows, target, config, sampler, 0, &mut nodes);
    Ok(Tree {
        kind: target.kind(),
        n_features: x.n_cols,
        nodes,
    })
}

fn build(
    x: &EncodedMatrix,
    rows: &[usize],
    target: &GrowTarget,
    config: &TreeConfig,
    sampler: &mut FeatureSampler,
    depth: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let stats = node_stats(rows, target);
    let idx = nodes.len();
    nodes.push(Node {
        split: None,
        left: 0,
        right: 0,
        n_rows: stats.n_rows,
        weight: stats.weight,
        class_weights: stats.class_weights.clone(),
        node_error: stats.node_error,
        leaf: stats.leaf.clone(),
    });

    if stats.pure
        || depth >= config.max_depth
        || rows.len() <= config.min_node_size
        || stats.weight <= 0.0
    {
        return idx;
    }
    let subset = sampler.draw(x.n_cols);
    let Some(split) = best_split(x, rows, target, subset.as_deref()) else {
        return idx;
    };
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&r| x.row(r)[split.feature] <= split.threshold);
    if left_rows.is_empty() || right_rows.is_empty() {
        return idx;
    }
    let left = build(x, &left_rows, target, config, sampler, depth + 1, nodes);
    let right = build(x, &right_rows, target, config, sampler, depth + 1, nodes);
    nodes[idx].split = Some(split);
    nodes[idx].left = left;
    nodes[idx].right = right;
    idx
}
