//! Bagged and random forests over classification, regression and survival
//! trees.

use super::grow::{grow_on_rows, FeatureSampler, GrowTarget, TreeConfig};
use super::survival::{grow_survival_on_rows, SurvivalTreeConfig};
use super::Tree;
use crate::curves::CumHazardCurve;
use crate::data::EncodedMatrix;
use crate::error::{Error, Result};
use crate::rng::SplitRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForestKind {
    Classification,
    Regression,
    Survival,
}

#[derive(Debug, Clone)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features drawn fresh at every split; None means all features.
    pub feature_subset_size: Option<usize>,
    /// Draw a bootstrap resample (with replacement, original size) per tree.
    pub bootstrap: bool,
    pub tree: TreeConfig,
    pub survival: SurvivalTreeConfig,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            feature_subset_size: None,
            bootstrap: true,
            tree: TreeConfig::default(),
            survival: SurvivalTreeConfig::default(),
        }
    }
}

pub enum ForestTarget<'a> {
    Classification(GrowTarget<'a>),
    Regression(GrowTarget<'a>),
    Survival {
        durations: &'a [f64],
        events: &'a [u8],
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Forest {
    pub kind: ForestKind,
    pub trees: Vec<Tree>,
    /// Bootstrap multiplicity of every row in every tree; rows with count 0
    /// are that tree's out-of-bag set.
    pub in_bag: Vec<Vec<u32>>,
    pub n_classes: usize,
}

impl Forest {
    pub fn predict_class(&self, sample: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes.max(1)];
        for tree in &self.trees {
            votes[tree.predict_class(sample)] += 1;
        }
        // Ties resolve to the lowest class index.
        let mut best = 0;
        for (k, &v) in votes.iter().enumerate() {
            if v > votes[best] {
                best = k;
            }
        }
        best
    }

    /// Share of trees voting each class.
    pub fn vote_shares(&self, sample: &[f64]) -> Vec<f64> {
        let mut votes = vec![0.0; self.n_classes.max(1)];
        for tree in &self.trees {
            votes[tree.predict_class(sample)] += 1.0;
        }
        let b = self.trees.len() as f64;
        votes.iter_mut().for_each(|v| *v /= b);
        votes
    }

    pub fn predict_value(&self, sample: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_value(sample)).sum::<f64>() / self.trees.len() as f64
    }

    /// Ensemble cumulative hazard: pointwise average of per-tree leaf curves.
    pub fn predict_hazard(&self, sample: &[f64]) -> CumHazardCurve {
        let curves: Vec<CumHazardCurve> = self
            .trees
            .iter()
            .map(|t| t.predict_hazard(sample).clone())
            .collect();
        CumHazardCurve::average(&curves)
    }

    /// Mean over trees of the fraction of rows left out of the bootstrap.
    pub fn oob_fraction(&self) -> f64 {
        let b = self.in_bag.len() as f64;
        self.in_bag
            .iter()
            .map(|counts| {
                counts.iter().filter(|&&c| c == 0).count() as f64 / counts.len() as f64
            })
            .sum::<f64>()
            / b
    }
}

/// Fit a forest of B trees on bootstrap resamples with per-split feature
/// subsets. Deterministic for a fixed rng stream; trees train in parallel.
pub fn fit_forest(
    x: &EncodedMatrix,
    target: &ForestTarget,
    config: &ForestConfig,
    rng: &SplitRng,
) -> Result<Forest> {
    if config.n_trees == 0 {
        return Err(Error::invalid("forest needs at least one tree"));
    }
    if let Some(m) = config.feature_subset_size {
        if m == 0 || m > x.n_cols {
            return Err(Error::invalid(format!(
                "feature subset size {m} outside 1..={}",
                x.n_cols
            )));
        }
    }
    let n = x.n_rows;
    if n == 0 {
        return Err(Error::EmptyInput("empty design matrix".into()));
    }

    let results: Vec<(Tree, Vec<u32>)> = (0..config.n_trees)
        .into_par_iter()
        .map(|b| {
            let mut tree_rng = rng.split(b as u64);
            let rows: Vec<usize> = if config.bootstrap {
                tree_rng.sample_with_replacement(n, n)
            } else {
                (0..n).collect()
            };
            let mut counts = vec![0u32; n];
            for &r in &rows {
                counts[r] += 1;
            }
            let mut sampler = match config.feature_subset_size {
                Some(m) if m < x.n_cols => FeatureSampler::Random {
                    m,
                    rng: &mut tree_rng,
                },
                _ => FeatureSampler::All,
            };
            let tree = match target {
                ForestTarget::Classification(t) | ForestTarget::Regression(t) => {
                    grow_on_rows(x, &rows, t, &config.tree, &mut sampler)
                }
                ForestTarget::Survival { durations, events } => grow_survival_on_rows(
                    x,
                    durations,
                    events,
                    &rows,
                    &config.survival,
                    &mut sampler,
                ),
            }?;
            Ok((tree, counts))
        })
        .collect::<Result<_>>()?;

    let n_classes = match target {
        ForestTarget::Classification(GrowTarget::Classification { n_classes, .. }) => *n_classes,
        _ => 0,
    };
    let kind = match target {
        ForestTarget::Classification(_) => ForestKind::Classification,
        ForestTarget::Regression(_) => ForestKind::Regression,
        ForestTarget::Survival { .. } => ForestKind::Survival,
    };
    let (trees, in_bag) = results.into_iter().unzip();
    Ok(Forest {
        kind,
        trees,
        in_bag,
        n_classes,
    })
}
