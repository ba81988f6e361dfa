//! Shared numerical optimization: fixed-step gradient descent and a Newton
//! ascent driver with step halving, used by the Cox and GLM fitters.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Outcome of a gradient-descent run.
#[derive(Debug, Clone)]
pub struct GradientDescentResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the objective failed to decrease overall, indicating a step
    /// size too large for the problem.
    pub diverging: bool,
    /// Objective value at each iterate, starting with f(x0).
    pub trace: Vec<f64>,
}

/// Minimize `f` by fixed-step gradient descent: x <- x - alpha * grad(x).
/// Stops when the gradient infinity norm drops to `eps` or after `max_iter`
/// steps.
pub fn gradient_descent(
    f: impl Fn(&[f64]) -> f64,
    grad: impl Fn(&[f64]) -> Vec<f64>,
    x0: &[f64],
    alpha: f64,
    eps: f64,
    max_iter: usize,
) -> Result<GradientDescentResult> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("step size alpha must be positive"));
    }
    let mut x = x0.to_vec();
    let mut trace = vec![f(&x)];
    if !trace[0].is_finite() {
        return Err(Error::invalid("objective not finite at starting point"));
    }
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iter {
        let g = grad(&x);
        if inf_norm(&g) <= eps {
            converged = true;
            break;
        }
        for (xi, gi) in x.iter_mut().zip(&g) {
            *xi -= alpha * gi;
        }
        iterations += 1;
        let value = f(&x);
        if !value.is_finite() {
            return Err(Error::invalid(format!(
                "objective became non-finite at iteration {iterations}"
            )));
        }
        trace.push(value);
    }
    let diverging = !converged && trace.last().unwrap() > trace.first().unwrap();
    Ok(GradientDescentResult {
        x,
        iterations,
        converged,
        diverging,
        trace,
    })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone)]
pub struct NewtonConfig {
    pub max_iter: usize,
    /// Convergence threshold on the gradient infinity norm.
    pub tol: f64,
    /// Halvings before falling back to a gradient ascent step.
    pub max_halvings: usize,
    /// Iterate norm beyond which a still-unconverged fit is flagged.
    pub beta_norm_limit: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            max_iter: 100,
            tol: 1e-8,
            max_halvings: 5,
            beta_norm_limit: 50.0,
        }
    }
}

/// Convergence report shared by the Cox and GLM fitters.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FitReport {
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Likelihood has no finite maximizer (monotone likelihood / separation).
    pub monotone_likelihood: bool,
    /// Log-likelihood after each accepted step, starting at the initial point.
    pub ll_trace: Vec<f64>,
}

/// Maximize a concave objective with Newton steps and step halving.
///
/// `eval` returns (log-likelihood, gradient, hessian) at a point. Detects a
/// maximizer at infinity in two ways: the iterate norm exceeding
/// `beta_norm_limit` with an unconverged gradient, and the likelihood still
/// increasing along the ray through the final iterate.
pub fn newton_maximize(
    eval: &dyn Fn(&[f64]) -> (f64, DVector<f64>, DMatrix<f64>),
    beta0: Vec<f64>,
    config: &NewtonConfig,
) -> (Vec<f64>, FitReport) {
    let mut beta = DVector::from_vec(beta0);
    let (mut ll, mut grad, mut hess) = eval(beta.as_slice());
    let mut trace = vec![ll];
    let mut converged = false;
    let mut monotone = false;
    let mut iterations = 0;

    for _ in 0..config.max_iter {
        let grad_norm = grad.amax();
        if grad_norm <= config.tol {
            converged = true;
            break;
        }
        if beta.norm() > config.beta_norm_limit {
            monotone = true;
            break;
        }

        let neg_hess = -&hess;
        let direction = neg_hess
            .clone()
            .cholesky()
            .map(|c| c.solve(&grad))
            .or_else(|| neg_hess.lu().solve(&grad))
            .unwrap_or_else(|| grad.clone());

        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=config.max_halvings {
            let candidate = &beta + step * &direction;
            let (cand_ll, cand_grad, cand_hess) = eval(candidate.as_slice());
            if cand_ll.is_finite() && cand_ll >= ll {
                beta = candidate;
                ll = cand_ll;
                grad = cand_grad;
                hess = cand_hess;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if !accepted {
            // Gradient ascent fallback with its own backtracking.
            let mut step = 1.0 / (1.0 + grad.norm());
            let mut improved = false;
            for _ in 0..40 {
                let candidate = &beta + step * &grad;
                let (cand_ll, cand_grad, cand_hess) = eval(candidate.as_slice());
                if cand_ll.is_finite() && cand_ll > ll {
                    beta = candidate;
                    ll = cand_ll;
                    grad = cand_grad;
                    hess = cand_hess;
                    improved = true;
                    break;
                }
                step /= 2.0;
            }
            if !improved {
                break; // numerically stuck
            }
        }
        iterations += 1;
        trace.push(ll);
    }

    // Ray check: at a genuine interior maximum the likelihood must drop when
    // the iterate is pushed further out along its own direction.
    if !monotone && beta.norm() > 0.0 {
        let doubled: Vec<f64> = beta.iter().map(|b| 2.0 * b).collect();
        let (ll2, _, _) = eval(&doubled);
        if ll2.is_finite() && ll2 > ll {
            monotone = true;
        }
    }

    let report = FitReport {
        iterations,
        gradient_norm: grad.amax(),
        converged: converged && !monotone,
        monotone_likelihood: monotone,
        ll_trace: trace,
    };
    (beta.data.into(), report)
}
