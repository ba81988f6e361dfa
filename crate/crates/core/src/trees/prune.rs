//! Weak-link cost-complexity pruning.
//!
//! Repeatedly collapses the internal nodes minimizing
//! g(t, T) = (R(t) - R(T_t)) / (|T_t| - 1), producing the nested subtree
//! sequence indexed by strictly increasing complexity parameters. Zero-gain
//! branches fall inside the alpha = 0 step, so alphas strictly increase.

use super::{GrowTarget, LeafValue, Tree};
use crate::data::EncodedMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct PruneSequence {
    /// (alpha_k, T_k) pairs; alphas strictly increasing, sizes strictly
    /// decreasing, last tree a single leaf.
    pub steps: Vec<(f64, Tree)>,
}

const G_TOL: f64 = 1e-12;

/// Per-node subtree aggregates on the reachable part of a tree.
struct SubtreeInfo {
    /// R(T_t): subtree resubstitution error.
    subtree_error: Vec<f64>,
    /// |T_t|: leaves under each node.
    leaves: Vec<usize>,
}

fn subtree_info(tree: &Tree) -> SubtreeInfo {
    let n = tree.nodes.len();
    let root_rows = tree.nodes[0].n_rows as f64;
    let mut info = SubtreeInfo {
        subtree_error: vec![0.0; n],
        leaves: vec![0; n],
    };
    // Children have larger indices, so a reverse sweep sees children first.
    for idx in (0..n).rev() {
        let node = &tree.nodes[idx];
        if node.is_leaf() {
            info.subtree_error[idx] = node.node_error * node.n_rows as f64 / root_rows;
            info.leaves[idx] = 1;
        } else {
            info.subtree_error[idx] =
                info.subtree_error[node.left] + info.subtree_error[node.right];
            info.leaves[idx] = info.leaves[node.left] + info.leaves[node.right];
        }
    }
    info
}

fn node_error_share(tree: &Tree, idx: usize) -> f64 {
    tree.nodes[idx].node_error * tree.nodes[idx].n_rows as f64 / tree.nodes[0].n_rows as f64
}

/// Collapse every reachable internal node whose weak-link value is within
/// tolerance of `alpha`. Returns whether anything was pruned.
fn prune_at(tree: &mut Tree, alpha: f64) -> bool {
    let mut pruned = false;
    loop {
        let info = subtree_info(tree);
        let mut hit = false;
        for idx in tree.reachable() {
            if tree.nodes[idx].is_leaf() {
                continue;
            }
            let g = (node_error_share(tree, idx) - info.subtree_error[idx])
                / (info.leaves[idx] as f64 - 1.0);
            if g <= alpha + G_TOL {
                tree.nodes[idx].split = None;
                hit = true;
                pruned = true;
            }
        }
        if !hit {
            return pruned;
        }
        // Re-evaluate: collapsing children changes ancestors' g values.
    }
}

fn min_weak_link(tree: &Tree) -> Option<f64> {
    let info = subtree_info(tree);
    tree.reachable()
        .into_iter()
        .filter(|&idx| !tree.nodes[idx].is_leaf())
        .map(|idx| {
            (node_error_share(tree, idx) - info.subtree_error[idx])
                / (info.leaves[idx] as f64 - 1.0)
        })
        .min_by(|a, b| a.partial_cmp(b).unwrap())
}

/// Bottom-up weak-link pruning sequence, starting from alpha = 0.
pub fn prune_sequence(tree: &Tree) -> PruneSequence {
    let mut current = tree.clone();
    // Alpha = 0 step: collapse all zero-gain branches first.
    prune_at(&mut current, 0.0);
    let mut steps = vec![(0.0, current.clone())];

    while let Some(alpha) = min_weak_link(&current) {
        prune_at(&mut current, alpha);
        steps.push((alpha, current.clone()));
    }
    PruneSequence { steps }
}

/// Rule used to pick a tree out of a pruning sequence.
pub enum SelectionMethod<'a> {
    /// argmin over k of R(T_k) + alpha_k |T_k| on the training data.
    PenalizedTrain,
    /// argmin of the unpenalized error on held-out data.
    Holdout {
        x: &'a EncodedMatrix,
        target: &'a GrowTarget<'a>,
    },
}

/// Error of a tree on held-out data: weighted misclassification rate for
/// classification, weighted mean squared error for regression.
pub fn holdout_error(tree: &Tree, x: &EncodedMatrix, target: &GrowTarget) -> f64 {
    let mut total_w = 0.0;
    let mut loss = 0.0;
    for i in 0..x.n_rows {
        let w = target.weights()[i];
        total_w += w;
        match (tree.leaf_value(x.row(i)), target) {
            (LeafValue::Class { class, .. }, GrowTarget::Classification { labels, .. }) => {
                if *class != labels[i] {
                    loss += w;
                }
            }
            (LeafValue::Value(v), GrowTarget::Regression { values, .. }) => {
                loss += w * (values[i] - v) * (values[i] - v);
            }
            _ => panic!("tree kind does not match target"),
        }
    }
    if total_w > 0.0 {
        loss / total_w
    } else {
        0.0
    }
}

/// Pick a subtree from the pruning sequence; ties resolve to the smallest
/// tree.
pub fn select_subtree<'s>(
    sequence: &'s PruneSequence,
    method: SelectionMethod,
) -> Result<&'s Tree> {
    if sequence.steps.is_empty() {
        return Err(Error::EmptyInput("empty pruning sequence".into()));
    }
    let score = |step: &(f64, Tree)| -> f64 {
        match &method {
            SelectionMethod::PenalizedTrain => {
                step.1.training_error() + step.0 * step.1.n_leaves() as f64
            }
            SelectionMethod::Holdout { x, target } => holdout_error(&step.1, x, target),
        }
    };
    let mut best = 0usize;
    let mut best_score = score(&sequence.steps[0]);
    for (k, step) in sequence.steps.iter().enumerate().skip(1) {
        let s = score(step);
        // <= prefers later (smaller) trees on ties.
        if s <= best_score {
            best = k;
            best_score = s;
        }
    }
    Ok(&sequence.steps[best].1)
}

#[cfg(test)]
mod tests {
    use super::super::grow::{grow_maximal_tree, GrowTarget, TreeConfig};
    use super::super::impurity::Impurity;
    use super::*;
    use crate::rng::SplitRng;

    fn classification_target<'a>(labels: &'a [usize], weights: &'a [f64]) -> GrowTarget<'a> {
        GrowTarget::Classification {
            labels,
            n_classes: 2,
            weights,
            criterion: Impurity::Gini,
        }
    }

    #[test]
    fn single_useful_split_sequence() {
        // Perfectly separable by one split: sequence is (0, stump), (R(root), leaf).
        let x = EncodedMatrix::from_rows(
            (0..8).map(|i| vec![i as f64]).collect(),
            vec!["f".into()],
        )
        .unwrap();
        let labels: Vec<usize> = (0..8).map(|i| usize::from(i >= 4)).collect();
        let weights = vec![1.0; 8];
        let t = classification_target(&labels, &weights);
        let tree = grow_maximal_tree(
            &x,
            &t,
            &TreeConfig {
                min_node_size: 1,
                max_depth: 10,
            },
        )
        .unwrap();
        assert_eq!(tree.n_leaves(), 2);

        let seq = prune_sequence(&tree);
        assert_eq!(seq.steps.len(), 2);
        assert_eq!(seq.steps[0].0, 0.0);
        assert_eq!(seq.steps[0].1.n_leaves(), 2);
        assert_eq!(seq.steps[1].1.n_leaves(), 1);
        // alpha_1 = R(root) - 0: root error is 0.5.
        assert!((seq.steps[1].0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_gain_stump_collapses_at_alpha_zero() {
        // Hand-built stump whose split leaves the error rate unchanged:
        // R(root) = 0.25 and R(T) = 0.5 * 2/4 + 0 = 0.25, so g = 0 and the
        // whole thing belongs to the alpha = 0 step.
        use super::super::{LeafValue, Node, SplitRecord, Tree, TreeKind};
        let leaf = |n_rows: usize, cw: Vec<f64>, err: f64, class: usize| Node {
            split: None,
            left: 0,
            right: 0,
            n_rows,
            weight: n_rows as f64,
            class_weights: cw,
            node_error: err,
            leaf: LeafValue::Class {
                class,
                proportions: vec![0.5, 0.5],
            },
        };
        let mut root = leaf(4, vec![3.0, 1.0], 0.25, 0);
        root.split = Some(SplitRecord {
            feature: 0,
            threshold: 0.5,
            gain: 0.1,
        });
        root.left = 1;
        root.right = 2;
        let tree = Tree {
            kind: TreeKind::Classification {
                n_classes: 2,
                criterion: Impurity::Gini,
            },
            n_features: 1,
            nodes: vec![
                root,
                leaf(2, vec![1.0, 1.0], 0.5, 0),
                leaf(2, vec![2.0, 0.0], 0.0, 0),
            ],
        };
        let seq = prune_sequence(&tree);
        assert_eq!(seq.steps.len(), 1);
        assert_eq!(seq.steps[0].0, 0.0);
        assert_eq!(seq.steps[0].1.n_leaves(), 1);
    }

    #[test]
    fn sequences_shrink_with_increasing_alpha_on_random_trees() {
        let mut rng = SplitRng::new(404);
        for trial in 0..30 {
            let n = 60;
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.next_f64(), rng.next_f64(), rng.next_f64()])
                .collect();
            let labels: Vec<usize> = rows
                .iter()
                .map(|r| usize::from(r[0] + 0.3 * rng.normal() > 0.5))
                .collect();
            let x = EncodedMatrix::from_rows(rows, vec!["a".into(), "b".into(), "c".into()])
                .unwrap();
            let weights = vec![1.0; n];
            let t = classification_target(&labels, &weights);
            let tree = grow_maximal_tree(
                &x,
                &t,
                &TreeConfig {
                    min_node_size: 2,
                    max_depth: 12,
                },
            )
            .unwrap();
            let seq = prune_sequence(&tree);

            for w in seq.steps.windows(2) {
                assert!(w[1].0 > w[0].0, "trial {trial}: alphas not increasing");
                assert!(
                    w[1].1.n_leaves() < w[0].1.n_leaves(),
                    "trial {trial}: sizes not decreasing"
                );
            }
            assert_eq!(seq.steps.last().unwrap().1.n_leaves(), 1);

            // Node-set inclusion: each tree's reachable splits are a subset
            // of its predecessor's.
            for w in seq.steps.windows(2) {
                let prev: std::collections::HashSet<usize> = w[0]
                    .1
                    .reachable()
                    .into_iter()
                    .filter(|&i| !w[0].1.nodes[i].is_leaf())
                    .collect();
                for i in w[1].1.reachable() {
                    if !w[1].1.nodes[i].is_leaf() {
                        assert!(prev.contains(&i), "trial {trial}: not nested");
                    }
                }
            }
        }
    }

    #[test]
    fn penalized_error_matches_leaf_walk_oracle() {
        let mut rng = SplitRng::new(777);
        let n = 80;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.next_f64(), rng.next_f64()])
            .collect();
        let labels: Vec<usize> = rows.iter().map(|r| usize::from(r[1] > 0.4)).collect();
        let x = EncodedMatrix::from_rows(rows, vec!["a".into(), "b".into()]).unwrap();
        let weights = vec![1.0; n];
        let t = classification_target(&labels, &weights);
        let tree = grow_maximal_tree(&x, &t, &TreeConfig::default()).unwrap();
        let seq = prune_sequence(&tree);
        for (alpha, subtree) in &seq.steps {
            // Oracle: walk every row to its leaf and count misclassified.
            let mut wrong = 0.0;
            for i in 0..n {
                if subtree.predict_class(x.row(i)) != labels[i] {
                    wrong += 1.0;
                }
            }
            let oracle = wrong / n as f64 + alpha * subtree.n_leaves() as f64;
            let computed = subtree.training_error() + alpha * subtree.n_leaves() as f64;
            assert!((oracle - computed).abs() < 1e-12);
        }
    }

    #[test]
    fn selection_rules() {
        let x = EncodedMatrix::from_rows(
            (0..8).map(|i| vec![i as f64]).collect(),
            vec!["f".into()],
        )
        .unwrap();
        let labels: Vec<usize> = (0..8).map(|i| usize::from(i >= 4)).collect();
        let weights = vec![1.0; 8];
        let t = classification_target(&labels, &weights);
        let tree = grow_maximal_tree(
            &x,
            &t,
            &TreeConfig {
                min_node_size: 1,
                max_depth: 10,
            },
        )
        .unwrap();
        let seq = prune_sequence(&tree);
        // Separable data: the stump (zero training error) wins.
        let chosen = select_subtree(&seq, SelectionMethod::PenalizedTrain).unwrap();
        assert_eq!(chosen.n_leaves(), 2);

        // Single-step sequence returns its only tree.
        let only = PruneSequence {
            steps: vec![seq.steps[1].clone()],
        };
        assert_eq!(
            select_subtree(&only, SelectionMethod::PenalizedTrain)
                .unwrap()
                .n_leaves(),
            1
        );
    }

    #[test]
    fn holdout_on_pure_noise_prefers_root() {
        // Imbalanced labels independent of the features: overfit branches
        // predicting the minority class are strictly worse out of sample.
        let mut root_wins = 0;
        for seed in 0..100u64 {
            let mut rng = SplitRng::new(seed);
            let n = 300;
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.next_f64(), rng.next_f64()])
                .collect();
            let labels: Vec<usize> = (0..n).map(|_| usize::from(rng.bernoulli(0.3))).collect();
            let x = EncodedMatrix::from_rows(rows, vec!["a".into(), "b".into()]).unwrap();
            let weights = vec![1.0; n];
            let t = classification_target(&labels, &weights);

            let train: Vec<usize> = (0..n / 2).collect();
            let tree = super::super::grow::grow_on_rows(
                &x,
                &train,
                &t,
                &TreeConfig {
                    min_node_size: 2,
                    max_depth: 10,
                },
                &mut super::super::grow::FeatureSampler::All,
            )
            .unwrap();
            let seq = prune_sequence(&tree);

            // Holdout rows as their own matrix.
            let holdout_rows: Vec<Vec<f64>> =
                (n / 2..n).map(|i| x.row(i).to_vec()).collect();
            let holdout_labels: Vec<usize> = (n / 2..n).map(|i| labels[i]).collect();
            let holdout_weights = vec![1.0; n / 2];
            let hx =
                EncodedMatrix::from_rows(holdout_rows, vec!["a".into(), "b".into()]).unwrap();
            let ht = classification_target(&holdout_labels, &holdout_weights);
            let chosen = select_subtree(
                &seq,
                SelectionMethod::Holdout {
                    x: &hx,
                    target: &ht,
                },
            )
            .unwrap();
            if chosen.n_leaves() == 1 {
                root_wins += 1;
            }
        }
        assert!(root_wins > 90, "root won only {root_wins}/100");
    }
}
