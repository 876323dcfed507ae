//! Linear-model BayesEL and reversible-jump model selection.
//!
//! For inclusion vector `gamma` with coefficients `beta` on the included
//! covariates, the residual `r_i = y_i - x_{gamma,i} beta` must have mean
//! zero and be uncorrelated with every covariate (included or not), and
//! `r_i^2 - sigma2` must have mean zero. The first `1 + s` columns depend on
//! `beta` only, so `sigma2` plays the role of the conditionally maximised block.

pub mod map;
pub mod rjmcmc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::elcore::ConstraintMatrix;
use crate::error::{Error, Result};
use crate::estimating::{build_constraints_raw, ElModel};
use crate::io::DataMatrix;
use crate::mcele::{mcele, MceleOptions};
use crate::priors::{sample_inverse_gamma, BetaBinomial, Prior};

pub use map::{map_down, map_up, Anchors};
pub use rjmcmc::{birth, birth_map, death, modal_support, rjmcmc, CrossProposal, ModelState, ModelTrace, ModelTraceRow, MoveKind, RjConfig, SelectionPriors, WithinProposal};

/// Response and covariates; `x` is `n x s` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionData {
    y: Vec<f64>,
    x: Vec<f64>,
    n: usize,
    s: usize,
    standardized: bool,
}

impl RegressionData {
    pub fn new(y: Vec<f64>, x: Vec<f64>, s: usize) -> Result<Self> {
        let n = y.len();
        if x.len() != n * s {
            return Err(Error::Dimension(format!("covariates have {} values, expected {n} x {s}", x.len())));
        }
        if s >= n {
            return Err(Error::Dimension(format!("need fewer covariates than observations (s = {s}, n = {n})")));
        }
        if y.iter().chain(&x).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("regression data".into()));
        }
        Ok(Self { y, x, n, s, standardized: false })
    }

    /// Response from column `response`, covariates from `covariates`, in that order.
    pub fn from_matrix(data: &DataMatrix, response: usize, covariates: &[usize]) -> Result<Self> {
        if response >= data.v() || covariates.iter().any(|&c| c >= data.v()) {
            return Err(Error::Dimension("column index out of range".into()));
        }
        let y = data.column(response);
        let mut x = Vec::with_capacity(data.n() * covariates.len());
        for i in 0..data.n() {
            let row = data.row(i);
            x.extend(covariates.iter().map(|&c| row[c]));
        }
        Self::new(y, x, covariates.len())
    }

    /// Centre and scale the response and every covariate to unit sample sd.
    pub fn standardize(&self) -> Result<Self> {
        let scale = |v: &[f64]| -> Result<Vec<f64>> {
            let n = v.len() as f64;
            let m = v.iter().sum::<f64>() / n;
            let sd = (v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            if sd == 0.0 {
                return Err(Error::Invalid("cannot standardise a constant column".into()));
            }
            Ok(v.iter().map(|a| (a - m) / sd).collect())
        };
        let y = scale(&self.y)?;
        let mut x = vec![0.0; self.n * self.s];
        for j in 0..self.s {
            for (i, v) in scale(&self.column(j))?.into_iter().enumerate() {
                x[i * self.s + j] = v;
            }
        }
        Ok(Self { y, x, n: self.n, s: self.s, standardized: true })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn standardized(&self) -> bool {
        self.standardized
    }

    pub fn x_row(&self, i: usize) -> &[f64] {
        &self.x[i * self.s..(i + 1) * self.s]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.x[i * self.s + j]).collect()
    }
}

/// Indices of the included covariates, increasing.
pub fn included(gamma: &[bool]) -> Vec<usize> {
    gamma.iter().enumerate().filter(|(_, &g)| g).map(|(j, _)| j).collect()
}

pub fn gamma_bits(gamma: &[bool]) -> String {
    gamma.iter().map(|&g| if g { '1' } else { '0' }).collect()
}

/// The BayesEL regression model for one fixed inclusion vector.
/// `theta1 = beta` (included coefficients), `theta2 = [sigma2]`.
pub struct LinearModel<'a> {
    data: &'a RegressionData,
    cols: Vec<usize>,
    beta_prior: Prior,
    sigma2_prior: Prior,
}

impl<'a> LinearModel<'a> {
    pub fn new(data: &'a RegressionData, gamma: &[bool]) -> Result<Self> {
        if gamma.len() != data.s() {
            return Err(Error::Dimension(format!("inclusion vector has {} entries, data has {} covariates", gamma.len(), data.s())));
        }
        Ok(Self { data, cols: included(gamma), beta_prior: Prior::Flat, sigma2_prior: Prior::Flat })
    }

    pub fn with_priors(mut self, beta: Prior, sigma2: Prior) -> Self {
        self.beta_prior = beta;
        self.sigma2_prior = sigma2;
        self
    }

    pub fn residual(&self, i: usize, beta: &[f64]) -> f64 {
        let row = self.data.x_row(i);
        self.data.y[i] - self.cols.iter().zip(beta).map(|(&c, b)| row[c] * b).sum::<f64>()
    }
}

impl ElModel for LinearModel<'_> {
    fn n_obs(&self) -> usize {
        self.data.n()
    }
    fn g_dim(&self) -> usize {
        1 + self.data.s()
    }
    fn h_dim(&self) -> usize {
        1
    }
    fn theta1_dim(&self) -> usize {
        self.cols.len()
    }
    fn theta2_dim(&self) -> usize {
        1
    }
    fn eval_g(&self, i: usize, theta1: &[f64], out: &mut [f64]) {
        let r = self.residual(i, theta1);
        out[0] = r;
        for (o, x) in out[1..].iter_mut().zip(self.data.x_row(i)) {
            *o = x * r;
        }
    }
    fn eval_h(&self, i: usize, theta1: &[f64], theta2: &[f64], out: &mut [f64]) {
        let r = self.residual(i, theta1);
        out[0] = r * r - theta2[0];
    }
    fn log_prior(&self, theta1: &[f64], theta2: &[f64]) -> f64 {
        theta1.iter().map(|&b| self.beta_prior.ln_pdf(b)).sum::<f64>() + self.sigma2_prior.ln_pdf(theta2[0])
    }
    fn closed_form_theta2(&self, theta1: &[f64], nu: &[f64]) -> Option<Vec<f64>> {
        Some(vec![(0..self.data.n()).map(|i| nu[i] * self.residual(i, theta1).powi(2)).sum()])
    }
}

/// `n x (s + 2)` constraint matrix: residual, covariate-residual products, squared residual minus `sigma2`.
pub fn build_ms_constraints(data: &RegressionData, gamma: &[bool], beta: &[f64], sigma2: f64) -> Result<ConstraintMatrix> {
    let model = LinearModel::new(data, gamma)?;
    if beta.len() != model.theta1_dim() {
        return Err(Error::Dimension(format!("{} coefficients for {} included covariates", beta.len(), model.theta1_dim())));
    }
    build_constraints_raw(&model, beta, &[sigma2])
}

/// Least-squares coefficients of the included covariates, the minimum-norm
/// solution when the design is rank deficient.
pub fn ols(data: &RegressionData, gamma: &[bool]) -> Vec<f64> {
    let cols = included(gamma);
    let k = cols.len();
    if k == 0 {
        return Vec::new();
    }
    let n = data.n();
    let x = DMatrix::from_fn(n, k, |i, j| data.x_row(i)[cols[j]]);
    let y = DVector::from_column_slice(data.y());
    let svd = x.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * n.max(k) as f64 * f64::EPSILON;
    svd.solve(&y, eps).expect("U and V were computed").iter().copied().collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMcele {
    pub feasible: bool,
    pub sigma2_hat: f64,
    pub trial_weights: Vec<f64>,
    pub trial_log_el: f64,
}

/// Conditional EL maximiser of `sigma2` given `beta` under model `gamma`.
pub fn mcele_sigma2(data: &RegressionData, gamma: &[bool], beta: &[f64]) -> Result<SigmaMcele> {
    let model = LinearModel::new(data, gamma)?;
    let r = mcele(&model, beta, &MceleOptions::default())?;
    Ok(SigmaMcele {
        feasible: r.feasible,
        sigma2_hat: r.theta2_hat.first().copied().unwrap_or(f64::NAN),
        trial_weights: r.trial_weights,
        trial_log_el: r.trial_log_el,
    })
}

/// Beta-binomial model prior with the `(2, 7)` default.
pub fn log_model_prior(gamma: &[bool], prior: &BetaBinomial) -> f64 {
    prior.ln_prob(included(gamma).len(), gamma.len())
}

/// Draw the double-exponential scale from its inverse-gamma full conditional.
pub fn gibbs_lambda<R: Rng + ?Sized>(rng: &mut R, beta: &[f64], a0: f64, b0: f64) -> f64 {
    sample_inverse_gamma(rng, a0 + beta.len() as f64, b0 + beta.iter().map(|b| b.abs()).sum::<f64>())
}
