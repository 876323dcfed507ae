//! Maximum conditional empirical likelihood estimator of `theta2`.
//!
//! For fixed `theta1 = a` the maximiser of `L(a, theta2)` over `theta2` is
//! found in two stages: first the trial weights `nu(a)` maximise the EL under
//! the g-constraints alone, then `theta2` solves `sum_i nu_i h(x_i, a, theta2) = 0`.
//! At that root the full stacked problem has the same optimal weights, so
//! `L(a, theta2_hat) = prod nu_i` and no further EL solve is needed.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::elcore::{solve_el, ElSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::estimating::{build_g_constraints, ElModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MceleOptions {
    pub solver: SolverOptions,
    /// Infinity-norm tolerance on the weighted h-residual.
    pub root_tol: f64,
    pub max_root_iter: usize,
}

impl Default for MceleOptions {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), root_tol: 1e-8, max_root_iter: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MceleResult {
    pub feasible: bool,
    /// Empty when infeasible.
    pub theta2_hat: Vec<f64>,
    /// Empty when infeasible.
    pub trial_weights: Vec<f64>,
    pub trial_log_el: f64,
}

impl MceleResult {
    fn infeasible() -> Self {
        Self { feasible: false, theta2_hat: Vec::new(), trial_weights: Vec::new(), trial_log_el: f64::NEG_INFINITY }
    }
}

/// EL under the g-constraints only.
pub fn trial_weights<M: ElModel + ?Sized>(model: &M, theta1: &[f64], opts: &SolverOptions) -> Result<ElSolution> {
    solve_el(&build_g_constraints(model, theta1)?, opts)
}

/// `sum_i nu_i h(x_i, theta1, theta2)`.
pub fn weighted_h<M: ElModel + ?Sized>(model: &M, theta1: &[f64], theta2: &[f64], nu: &[f64]) -> Vec<f64> {
    let d = model.h_dim();
    let mut acc = vec![0.0; d];
    let mut buf = vec![0.0; d];
    for (i, &w) in nu.iter().enumerate() {
        model.eval_h(i, theta1, theta2, &mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += w * b;
        }
    }
    acc
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, &b| a.max(b.abs()))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn fd_jacobian(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], fx: &[f64]) -> DMatrix<f64> {
    let (d, q) = (fx.len(), x.len());
    let mut jac = DMatrix::zeros(d, q);
    let mut xp = x.to_vec();
    for k in 0..q {
        let step = 1e-7 * (1.0 + x[k].abs());
        xp[k] = x[k] + step;
        let fp = f(&xp);
        xp[k] = x[k];
        for r in 0..d {
            jac[(r, k)] = (fp[r] - fx[r]) / step;
        }
    }
    jac
}

/// Solve `sum_i nu_i h(x_i, theta1, theta2) = 0` for `theta2`.
///
/// Uses the model's closed form when it has one, otherwise damped Broyden
/// iterations seeded with a finite-difference Jacobian.
pub fn solve_theta2<M: ElModel + ?Sized>(model: &M, theta1: &[f64], nu: &[f64], opts: &MceleOptions) -> Result<Vec<f64>> {
    let q = model.theta2_dim();
    if model.h_dim() != q {
        return Err(Error::Dimension(format!(
            "root equation needs as many h-functions as theta2 entries (d = {}, q = {q})",
            model.h_dim()
        )));
    }
    if nu.len() != model.n_obs() {
        return Err(Error::Dimension(format!("{} weights for {} observations", nu.len(), model.n_obs())));
    }
    if let Some(t2) = model.closed_form_theta2(theta1, nu) {
        if t2.len() != q || t2.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("closed-form theta2".into()));
        }
        return Ok(t2);
    }
    broyden(&|t2: &[f64]| weighted_h(model, theta1, t2, nu), model.theta2_guess(theta1, nu), opts)
}

fn broyden(f: &dyn Fn(&[f64]) -> Vec<f64>, x0: Vec<f64>, opts: &MceleOptions) -> Result<Vec<f64>> {
    let q = x0.len();
    let mut x = x0;
    let mut fx = f(&x);
    if fx.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("root equation at the starting point".into()));
    }
    let mut jac = fd_jacobian(f, &x, &fx);
    let mut fresh = true;
    let mut iterations = 0;
    while iterations < opts.max_root_iter {
        if inf_norm(&fx) <= opts.root_tol {
            return Ok(x);
        }
        iterations += 1;
        let rhs = DVector::from_iterator(q, fx.iter().map(|v| -v));
        let dir = match jac.clone().lu().solve(&rhs) {
            Some(d) if d.iter().all(|v| v.is_finite()) => d,
            _ if !fresh => {
                jac = fd_jacobian(f, &x, &fx);
                fresh = true;
                continue;
            }
            _ => break,
        };

        let norm0 = l2(&fx);
        let mut t = 1.0;
        let mut next = None;
        for _ in 0..30 {
            let xt: Vec<f64> = x.iter().zip(dir.iter()).map(|(a, d)| a + t * d).collect();
            let ft = f(&xt);
            if ft.iter().all(|v| v.is_finite()) && l2(&ft) < norm0 {
                next = Some((xt, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, fnew)) = next else {
            if fresh {
                break;
            }
            jac = fd_jacobian(f, &x, &fx);
            fresh = true;
            continue;
        };

        let dx = DVector::from_iterator(q, xn.iter().zip(&x).map(|(a, b)| a - b));
        let df = DVector::from_iterator(q, fnew.iter().zip(&fx).map(|(a, b)| a - b));
        let denom = dx.dot(&dx);
        if denom > 0.0 {
            let corr = (df - &jac * &dx) / denom;
            jac += corr * dx.transpose();
        }
        fresh = false;
        x = xn;
        fx = fnew;
    }
    if inf_norm(&fx) <= opts.root_tol {
        return Ok(x);
    }
    Err(Error::RootNotFound { iterations, residual: inf_norm(&fx) })
}

/// Conditional EL maximiser of `theta2` at `theta1`.
///
/// An infeasible trial problem short-circuits to `feasible == false`.
pub fn mcele<M: ElModel + ?Sized>(model: &M, theta1: &[f64], opts: &MceleOptions) -> Result<MceleResult> {
    let (n, l, d) = (model.n_obs(), model.g_dim(), model.h_dim());
    if l + d >= n {
        return Err(Error::Dimension(format!("need l + d < n, got l = {l}, d = {d}, n = {n}")));
    }
    let trial = trial_weights(model, theta1, &opts.solver)?;
    let Some(nu) = trial.weights else {
        return Ok(MceleResult::infeasible());
    };
    let theta2_hat = solve_theta2(model, theta1, &nu, opts)?;
    // the stacked problem shares the trial optimum only if the h-equations hold at nu
    let resid = weighted_h(model, theta1, &theta2_hat, &nu);
    let scale = 1.0 + theta2_hat.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if inf_norm(&resid) > 1e3 * opts.root_tol * scale {
        return Ok(MceleResult::infeasible());
    }
    Ok(MceleResult { feasible: true, theta2_hat, trial_weights: nu, trial_log_el: trial.log_el })
}
