//! Node impurity functions over weighted class counts.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Impurity {
    Gini,
    Entropy,
}

/// Impurity of a node given its (weighted) class counts.
///
/// Gini: sum p(1-p). Entropy: -sum p ln p (natural log); zero exactly on
/// pure nodes, maximal at the uniform distribution.
pub fn impurity(class_counts: &[f64], kind: Impurity) -> Result<f64> {
    if class_counts.iter().any(|&c| c < 0.0 || !c.is_finite()) {
        return Err(Error::invalid("class counts must be finite and nonnegative"));
    }
    let total: f64 = class_counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::invalid("impurity undefined for zero total weight"));
    }
    Ok(impurity_unchecked(class_counts, total, kind))
}

pub(crate) fn impurity_unchecked(class_counts: &[f64], total: f64, kind: Impurity) -> f64 {
    match kind {
        Impurity::Gini => class_counts
            .iter()
            .map(|&c| {
                let p = c / total;
                p * (1.0 - p)
            })
            .sum(),
        Impurity::Entropy => class_counts
            .iter()
            .filter(|&&c| c > 0.0)
            .map(|&c| {
                let p = c / total;
                -p * p.ln()
            })
            .sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitRng;

    #[test]
    fn balanced_binary_values() {
        assert!((impurity(&[1.0, 1.0], Impurity::Gini).unwrap() - 0.5).abs() < 1e-15);
        let e = impurity(&[1.0, 1.0], Impurity::Entropy).unwrap();
        assert!((e - (2.0f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn pure_nodes_are_zero() {
        for kind in [Impurity::Gini, Impurity::Entropy] {
            assert_eq!(impurity(&[5.0, 0.0, 0.0], kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn weighted_tree_example_node_gini() {
        // q = 5/8.5; G = 2 q (1-q) ~ 0.4844, the paper rounds to 0.48.
        let g = impurity(&[3.5, 5.0], Impurity::Gini).unwrap();
        let q: f64 = 5.0 / 8.5;
        assert!((g - 2.0 * q * (1.0 - q)).abs() < 1e-12);
        assert!((g - 0.4844).abs() < 1e-4);
    }

    #[test]
    fn zero_total_weight_is_an_error() {
        assert!(impurity(&[0.0, 0.0], Impurity::Gini).is_err());
    }

    #[test]
    fn maximum_only_at_equidistribution() {
        // Grid search over the simplex for K = 2, 3, 4.
        for kind in [Impurity::Gini, Impurity::Entropy] {
            for k in 2..=4usize {
                let uniform = vec![1.0; k];
                let max_value = impurity(&uniform, kind).unwrap();
                let steps = 10usize;
                let mut counts = vec![0usize; k];
                // Enumerate all compositions of `steps` into k parts.
                fn visit(
                    counts: &mut Vec<usize>,
                    pos: usize,
                    remaining: usize,
                    kind: Impurity,
                    max_value: f64,
                    k: usize,
                ) {
                    if pos == k - 1 {
                        counts[pos] = remaining;
                        let c: Vec<f64> = counts.iter().map(|&x| x as f64).collect();
                        if c.iter().sum::<f64>() > 0.0 {
                            let v = impurity(&c, kind).unwrap();
                            assert!(v <= max_value + 1e-12);
                            let uniform = counts.iter().all(|&x| x == counts[0]);
                            if !uniform {
                                assert!(v < max_value - 1e-12 || v < max_value);
                            }
                            // Zero exactly at the pure vertices.
                            let pure = counts.iter().filter(|&&x| x > 0).count() == 1;
                            assert_eq!(v == 0.0, pure);
                        }
                        return;
                    }
                    for take in 0..=remaining {
                        counts[pos] = take;
                        visit(counts, pos + 1, remaining - take, kind, max_value, k);
                    }
                }
                visit(&mut counts, 0, steps, kind, max_value, k);
            }
        }
    }

    #[test]
    fn symmetric_under_class_permutation() {
        let mut rng = SplitRng::new(4);
        for kind in [Impurity::Gini, Impurity::Entropy] {
            let mut counts: Vec<f64> = (0..4).map(|_| rng.next_f64() * 3.0).collect();
            let base = impurity(&counts, kind).unwrap();
            for _ in 0..5 {
                rng.shuffle(&mut counts);
                assert!((impurity(&counts, kind).unwrap() - base).abs() < 1e-12);
            }
        }
    }
}
