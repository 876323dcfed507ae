//! Anchored dimension-matching maps between a model and the model with one
//! more covariate.
//!
//! Coefficients keep their offset from the least-squares fit of their own
//! model, the new coefficient is its least-squares value plus `u`, and the
//! variance keeps its offset from the conditional EL maximiser.

use crate::error::{Error, Result};

/// Reference points of the smaller model and the larger model.
#[derive(Debug, Clone, PartialEq)]
pub struct Anchors {
    pub ols_small: Vec<f64>,
    /// Least-squares fit of the larger model, in its own coordinate order.
    pub ols_big: Vec<f64>,
    pub sigma2_hat_small: f64,
    pub sigma2_hat_big: f64,
}

fn check(anchors: &Anchors, pos: usize) -> Result<()> {
    if anchors.ols_big.len() != anchors.ols_small.len() + 1 || pos >= anchors.ols_big.len() {
        return Err(Error::Dimension("anchor lengths do not describe a one-covariate step".into()));
    }
    Ok(())
}

/// Coefficients of the larger model; `pos` is where the new covariate sits in it.
pub fn map_up_beta(beta_small: &[f64], u: f64, anchors: &Anchors, pos: usize) -> Result<Vec<f64>> {
    check(anchors, pos)?;
    if beta_small.len() != anchors.ols_small.len() {
        return Err(Error::Dimension("coefficient vector does not match the smaller model".into()));
    }
    let mut out = Vec::with_capacity(beta_small.len() + 1);
    let mut k = 0;
    for (i, &b_big) in anchors.ols_big.iter().enumerate() {
        if i == pos {
            out.push(b_big + u);
        } else {
            out.push(beta_small[k] + b_big - anchors.ols_small[k]);
            k += 1;
        }
    }
    Ok(out)
}

/// Inverse of [`map_up_beta`]: smaller-model coefficients and `u`.
pub fn map_down_beta(beta_big: &[f64], anchors: &Anchors, pos: usize) -> Result<(Vec<f64>, f64)> {
    check(anchors, pos)?;
    if beta_big.len() != anchors.ols_big.len() {
        return Err(Error::Dimension("coefficient vector does not match the larger model".into()));
    }
    let mut out = Vec::with_capacity(beta_big.len() - 1);
    let mut k = 0;
    for (i, (&b, &b_hat)) in beta_big.iter().zip(&anchors.ols_big).enumerate() {
        if i != pos {
            out.push(b - (b_hat - anchors.ols_small[k]));
            k += 1;
        }
    }
    Ok((out, beta_big[pos] - anchors.ols_big[pos]))
}

/// `(beta_small, u, sigma2_small) -> (beta_big, sigma2_big)`.
pub fn map_up(beta_small: &[f64], u: f64, sigma2_small: f64, anchors: &Anchors, pos: usize) -> Result<(Vec<f64>, f64)> {
    let beta = map_up_beta(beta_small, u, anchors, pos)?;
    Ok((beta, sigma2_small + anchors.sigma2_hat_big - anchors.sigma2_hat_small))
}

/// `(beta_big, sigma2_big) -> (beta_small, u, sigma2_small)`.
pub fn map_down(beta_big: &[f64], sigma2_big: f64, anchors: &Anchors, pos: usize) -> Result<(Vec<f64>, f64, f64)> {
    let (beta, u) = map_down_beta(beta_big, anchors, pos)?;
    Ok((beta, u, sigma2_big - (anchors.sigma2_hat_big - anchors.sigma2_hat_small)))
}
