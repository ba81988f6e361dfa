//! AdaBoost with shallow weighted classification trees as weak learners.

use crate::data::EncodedMatrix;
use crate::error::{Error, Result};
use crate::trees::{grow_maximal_tree, GrowTarget, Impurity, Tree, TreeConfig};
use serde::{Deserialize, Serialize};

const MIN_ERROR: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct AdaBoostConfig {
    pub n_rounds: usize,
    /// Weak learner depth (1 or 2).
    pub depth: usize,
    pub criterion: Impurity,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        AdaBoostConfig {
            n_rounds: 50,
            depth: 2,
            criterion: Impurity::Gini,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdaBoostModel {
    pub learners: Vec<Tree>,
    pub alphas: Vec<f64>,
}

/// Classifier weight for a round with weighted error `eps`; the error is
/// clamped away from zero so a perfect learner gets a large finite weight.
pub fn adaboost_alpha(eps: f64) -> f64 {
    let eps = eps.max(MIN_ERROR);
    ((1.0 - eps) / eps).ln()
}

impl AdaBoostModel {
    /// Weighted vote sum; the label is its sign.
    pub fn decision_function(&self, sample: &[f64]) -> f64 {
        self.learners
            .iter()
            .zip(&self.alphas)
            .map(|(tree, &alpha)| {
                let vote = if tree.predict_class(sample) == 1 { 1.0 } else { -1.0 };
                alpha * vote
            })
            .sum()
    }

    /// Predicted label in {-1, +1}; a zero vote resolves to +1.
    pub fn predict(&self, sample: &[f64]) -> f64 {
        if self.decision_function(sample) >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Training error after each round, for staged diagnostics.
    pub fn staged_errors(&self, x: &EncodedMatrix, y: &[f64]) -> Vec<f64> {
        let n = x.n_rows;
        let mut scores = vec![0.0f64; n];
        let mut out = Vec::with_capacity(self.learners.len());
        for (tree, &alpha) in self.learners.iter().zip(&self.alphas) {
            let mut wrong = 0usize;
            for i in 0..n {
                let vote = if tree.predict_class(x.row(i)) == 1 { 1.0 } else { -1.0 };
                scores[i] += alpha * vote;
                let label = if scores[i] >= 0.0 { 1.0 } else { -1.0 };
                if label != y[i] {
                    wrong += 1;
                }
            }
            out.push(wrong as f64 / n as f64);
        }
        out
    }
}

/// Fit AdaBoost on labels in {-1, +1}. Stops early when a round's weighted
/// error reaches 0 (perfect learner kept) or exceeds 0.5 (learner dropped).
pub fn adaboost_fit(x: &EncodedMatrix, y: &[f64], config: &AdaBoostConfig) -> Result<AdaBoostModel> {
    if config.n_rounds == 0 {
        return Err(Error::invalid("adaboost needs at least one round"));
    }
    if !(1..=2).contains(&config.depth) {
        return Err(Error::invalid("weak learner depth must be 1 or 2"));
    }
    let n = x.n_rows;
    if n == 0 || y.len() != n {
        return Err(Error::invalid("labels do not match the design matrix"));
    }
    if y.iter().any(|&v| v != -1.0 && v != 1.0) {
        return Err(Error::invalid("adaboost labels must be -1 or +1"));
    }
    let labels: Vec<usize> = y.iter().map(|&v| usize::from(v == 1.0)).collect();
    let mut weights = vec![1.0 / n as f64; n];
    let tree_config = TreeConfig {
        min_node_size: 1,
        max_depth: config.depth,
    };

    let mut model = AdaBoostModel {
        learners: Vec::new(),
        alphas: Vec::new(),
    };
    for _ in 0..config.n_rounds {
        let target = GrowTarget::Classification {
            labels: &labels,
            n_classes: 2,
            weights: &weights,
            criterion: config.criterion,
        };
        let tree = grow_maximal_tree(x, &target, &tree_config)?;
        let eps: f64 = (0..n)
            .filter(|&i| tree.predict_class(x.row(i)) != labels[i])
            .map(|i| weights[i])
            .sum();

        if eps > 0.5 {
            break;
        }
        let alpha = adaboost_alpha(eps);
        model.learners.push(tree);
        model.alphas.push(alpha);
        if eps == 0.0 {
            break;
        }
        let tree = model.learners.last().unwrap();
        for i in 0..n {
            if tree.predict_class(x.row(i)) != labels[i] {
                weights[i] *= alpha.exp();
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
    }
    if model.learners.is_empty() {
        return Err(Error::invalid(
            "no weak learner beat random guessing on the first round",
        ));
    }
    Ok(model)
}
