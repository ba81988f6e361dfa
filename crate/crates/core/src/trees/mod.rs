//! CART growth, cost-complexity pruning, surrogate-split importance,
//! exposure-weighted classification trees, log-rank survival trees and
//! forests.

#[cfg(test)]
pub(crate) mod fixtures;
mod forest;
mod grow;
mod impurity;
mod prune;
mod surrogate;
mod survival;

pub use forest::{fit_forest, Forest, ForestConfig, ForestKind, ForestTarget};
pub use grow::{best_split, grow_maximal_tree, GrowTarget, TreeConfig};
pub use impurity::{impurity, Impurity};
pub use prune::{prune_sequence, select_subtree, PruneSequence, SelectionMethod};
pub use surrogate::{cart_variable_importance, surrogate_split, SurrogateDivision};
pub use survival::{grow_survival_tree, SurvivalTreeConfig};

use crate::curves::CumHazardCurve;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeKind {
    Classification { n_classes: usize, criterion: Impurity },
    Regression,
    Survival,
}

/// A binary split: rows with feature value <= threshold go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LeafValue {
    Class { class: usize, proportions: Vec<f64> },
    Value(f64),
    Hazard(CumHazardCurve),
}

/// Tree node in a flat array; children always carry larger indices than
/// their parent. Every node keeps the statistics it would have as a leaf so
/// pruning can turn internal nodes into leaves in place.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub split: Option<SplitRecord>,
    pub left: usize,
    pub right: usize,
    pub n_rows: usize,
    pub weight: f64,
    /// Weighted count per class; empty outside classification.
    pub class_weights: Vec<f64>,
    /// Within-node error: weighted misclassification share (classification)
    /// or weighted mean squared error (regression).
    pub node_error: f64,
    pub leaf: LeafValue,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub kind: TreeKind,
    pub n_features: usize,
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Index of the leaf a sample routes to.
    pub fn leaf_index(&self, sample: &[f64]) -> usize {
        let mut idx = 0;
        while let Some(split) = &self.nodes[idx].split {
            idx = if sample[split.feature] <= split.threshold {
                self.nodes[idx].left
            } else {
                self.nodes[idx].right
            };
        }
        idx
    }

    pub fn leaf_value(&self, sample: &[f64]) -> &LeafValue {
        &self.nodes[self.leaf_index(sample)].leaf
    }

    pub fn predict_class(&self, sample: &[f64]) -> usize {
        match self.leaf_value(sample) {
            LeafValue::Class { class, .. } => *class,
            _ => panic!("not a classification tree"),
        }
    }

    pub fn predict_value(&self, sample: &[f64]) -> f64 {
        match self.leaf_value(sample) {
            LeafValue::Value(v) => *v,
            _ => panic!("not a regression tree"),
        }
    }

    pub fn predict_hazard(&self, sample: &[f64]) -> &CumHazardCurve {
        match self.leaf_value(sample) {
            LeafValue::Hazard(h) => h,
            _ => panic!("not a survival tree"),
        }
    }

    /// Reachable node indices in depth-first order.
    pub fn reachable(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(idx) = stack.pop() {
            out.push(idx);
            if let Some(_) = &self.nodes[idx].split {
                stack.push(self.nodes[idx].right);
                stack.push(self.nodes[idx].left);
            }
        }
        out
    }

    /// Number of reachable leaves.
    pub fn n_leaves(&self) -> usize {
        self.reachable()
            .iter()
            .filter(|&&i| self.nodes[i].is_leaf())
            .count()
    }

    /// Resubstitution error R(T): leaf errors aggregated by row share.
    pub fn training_error(&self) -> f64 {
        let root_rows = self.nodes[0].n_rows as f64;
        self.reachable()
            .iter()
            .filter(|&&i| self.nodes[i].is_leaf())
            .map(|&i| self.nodes[i].node_error * self.nodes[i].n_rows as f64 / root_rows)
            .sum()
    }

    pub fn to_json(&self) -> crate::error::Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> crate::error::Result<Tree> {
        Ok(serde_json::from_str(text)?)
    }
}
