//! First-order gradient boosting for regression with squared, absolute and
//! Huber losses.

use super::loss::{Loss, LossData};
use crate::data::EncodedMatrix;
use crate::error::{Error, Result};
use crate::trees::{grow_maximal_tree, GrowTarget, Tree, TreeConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct GbmConfig {
    pub n_rounds: usize,
    /// Shrinkage applied to every stage.
    pub shrinkage: f64,
    pub tree: TreeConfig,
}

impl Default for GbmConfig {
    fn default() -> Self {
        GbmConfig {
            n_rounds: 100,
            shrinkage: 0.1,
            tree: TreeConfig {
                min_node_size: 5,
                max_depth: 3,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GbmModel {
    pub loss: Loss,
    /// Constant initial model f0.
    pub init: f64,
    pub shrinkage: f64,
    /// Per-stage line-search coefficients and trees.
    pub stages: Vec<(f64, Tree)>,
    /// Training objective after each round.
    pub train_log: Vec<f64>,
}

impl GbmModel {
    pub fn predict(&self, sample: &[f64]) -> f64 {
        self.init
            + self
                .stages
                .iter()
                .map(|(theta, tree)| self.shrinkage * theta * tree.predict_value(sample))
                .sum::<f64>()
    }
}

/// Constant minimizing the loss: mean (squared), median (absolute), or an
/// iteratively reweighted location estimate (Huber).
fn initial_constant(loss: &Loss, y: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    match loss {
        Loss::Squared => mean,
        Loss::Absolute => median(y),
        Loss::Huber { quantile } => {
            let mut center = median(y);
            for _ in 0..30 {
                let residuals: Vec<f64> = y.iter().map(|&v| (v - center).abs()).collect();
                let delta = super::loss::empirical_quantile(&residuals, *quantile).max(1e-12);
                // One IRLS step for the Huber location problem.
                let mut num = 0.0;
                let mut den = 0.0;
                for &v in y {
                    let r = v - center;
                    let w = if r.abs() <= delta { 1.0 } else { delta / r.abs() };
                    num += w * v;
                    den += w;
                }
                let next = num / den;
                if (next - center).abs() < 1e-12 {
                    center = next;
                    break;
                }
                center = next;
            }
            center
        }
        _ => mean,
    }
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Golden-section search for the stage coefficient.
fn golden_section(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..120 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / 2.0
}

/// Fit gradient boosting: each stage fits a regression tree to the pseudo
/// residuals, scales it by a line-searched coefficient and shrinks it.
pub fn gbm_fit(
    x: &EncodedMatrix,
    y: &[f64],
    loss: Loss,
    config: &GbmConfig,
) -> Result<GbmModel> {
    match loss {
        Loss::Squared | Loss::Absolute | Loss::Huber { .. } => {}
        _ => {
            return Err(Error::Unsupported(
                "gbm_fit supports squared, absolute and huber losses".into(),
            ))
        }
    }
    if y.len() != x.n_rows || y.is_empty() {
        return Err(Error::invalid("targets do not match the design matrix"));
    }
    if config.n_rounds == 0 {
        return Err(Error::invalid("gbm needs at least one round"));
    }
    let unit = vec![1.0; y.len()];
    let data = LossData { y, w: &unit };
    loss.validate(&data)?;

    let init = initial_constant(&loss, y);
    let mut raw = vec![init; y.len()];
    let mut stages = Vec::with_capacity(config.n_rounds);
    let mut train_log = Vec::with_capacity(config.n_rounds);

    for _ in 0..config.n_rounds {
        let residuals: Vec<f64> = loss.gradient(&data, &raw).iter().map(|g| -g).collect();
        let target = GrowTarget::Regression {
            values: &residuals,
            weights: &unit,
        };
        let tree = grow_maximal_tree(x, &target, &config.tree)?;
        let predictions: Vec<f64> = (0..x.n_rows).map(|i| tree.predict_value(x.row(i))).collect();

        let theta = match loss {
            Loss::Squared => {
                let num: f64 = residuals.iter().zip(&predictions).map(|(r, p)| r * p).sum();
                let den: f64 = predictions.iter().map(|p| p * p).sum();
                if den > 0.0 {
                    num / den
                } else {
                    0.0
                }
            }
            _ => golden_section(
                |theta| {
                    let candidate: Vec<f64> = raw
                        .iter()
                        .zip(&predictions)
                        .map(|(f, p)| f + theta * p)
                        .collect();
                    loss.value(&data, &candidate)
                },
                0.0,
                8.0,
            ),
        };

        for (f, p) in raw.iter_mut().zip(&predictions) {
            *f += config.shrinkage * theta * p;
        }
        stages.push((theta, tree));
        train_log.push(loss.value(&data, &raw));
    }

    Ok(GbmModel {
        loss,
        init,
        shrinkage: config.shrinkage,
        stages,
        train_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitRng;

    #[test]
    fn single_leaf_squared_stage_predicts_the_mean() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64]).collect();
        let x = EncodedMatrix::from_rows(rows, vec!["f".into()]).unwrap();
        let y = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let config = GbmConfig {
            n_rounds: 1,
            shrinkage: 1.0,
            tree: TreeConfig {
                min_node_size: 6,
                max_depth: 0,
            },
        };
        let model = gbm_fit(&x, &y, Loss::Squared, &config).unwrap();
        let mean = 3.5;
        for i in 0..6 {
            assert!((model.predict(x.row(i)) - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn squared_pseudo_residuals_equal_plain_residuals() {
        // With j = (y - f)^2 / 2 the negative gradient is exactly y - f.
        let y = vec![2.0, -1.0, 0.5];
        let raw = vec![1.0, 1.0, 1.0];
        let w = vec![1.0; 3];
        let g = Loss::Squared.gradient(&LossData { y: &y, w: &w }, &raw);
        for i in 0..3 {
            assert!((-g[i] - (y[i] - raw[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn fits_a_noisy_linear_function() {
        let mut rng = SplitRng::new(12);
        let n = 200;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.next_f64() * 4.0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] + 0.05 * rng.normal()).collect();
        let x = EncodedMatrix::from_rows(rows.clone(), vec!["f".into()]).unwrap();
        let config = GbmConfig {
            n_rounds: 150,
            shrinkage: 0.1,
            tree: TreeConfig {
                min_node_size: 5,
                max_depth: 3,
            },
        };
        for loss in [Loss::Squared, Loss::Absolute, Loss::Huber { quantile: 0.9 }] {
            let model = gbm_fit(&x, &y, loss, &config).unwrap();
            let mse: f64 = rows
                .iter()
                .zip(&y)
                .map(|(r, &t)| (model.predict(r) - t).powi(2))
                .sum::<f64>()
                / n as f64;
            assert!(mse < 0.05, "{loss:?} mse {mse}");
        }
    }

    #[test]
    fn absolute_loss_initializes_at_the_median() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let x = EncodedMatrix::from_rows(rows, vec!["f".into()]).unwrap();
        let y = vec![1.0, 1.0, 2.0, 9.0, 50.0];
        let config = GbmConfig {
            n_rounds: 1,
            shrinkage: 0.0,
            tree: TreeConfig::default(),
        };
        let model = gbm_fit(&x, &y, Loss::Absolute, &config).unwrap();
        assert_eq!(model.init, 2.0);
    }

    #[test]
    fn unknown_loss_is_rejected() {
        let x = EncodedMatrix::from_rows(vec![vec![0.0]], vec!["f".into()]).unwrap();
        assert!(matches!(
            gbm_fit(&x, &[1.0], Loss::ExposureBinomial, &GbmConfig::default()),
            Err(Error::Unsupported(_))
        ));
    }
}
