//! Prior densities and the conjugate updates used by Gibbs blocks.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Univariate prior. Densities are normalised; `Flat` is the improper constant 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prior {
    Normal { mean: f64, var: f64 },
    InverseGamma { shape: f64, scale: f64 },
    DoubleExponential { loc: f64, scale: f64 },
    Flat,
}

impl Prior {
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match *self {
            Prior::Normal { mean, var } => normal_ln_pdf(x, mean, var),
            Prior::InverseGamma { shape, scale } => inverse_gamma_ln_pdf(x, shape, scale),
            Prior::DoubleExponential { loc, scale } => double_exponential_ln_pdf(x, loc, scale),
            Prior::Flat => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Prior::Normal { mean, var } => mean.is_finite() && var > 0.0 && var.is_finite(),
            Prior::InverseGamma { shape, scale } => shape > 0.0 && scale > 0.0,
            Prior::DoubleExponential { loc, scale } => loc.is_finite() && scale > 0.0,
            Prior::Flat => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("bad prior parameters {self:?}")))
        }
    }
}

/// Independent product of univariate priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPrior(pub Vec<Prior>);

impl ProductPrior {
    pub fn ln_pdf(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.0.len());
        let mut acc = 0.0;
        for (p, &v) in self.0.iter().zip(x) {
            acc += p.ln_pdf(v);
            if acc == f64::NEG_INFINITY {
                break;
            }
        }
        acc
    }
}

pub fn normal_ln_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -LN_SQRT_2PI - 0.5 * var.ln() - 0.5 * d * d / var
}

/// `IG(shape, scale)`: density proportional to `x^(-shape-1) exp(-scale / x)` on `x > 0`.
pub fn inverse_gamma_ln_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - scale / x
}

/// Laplace density `exp(-|x - loc| / scale) / (2 scale)`.
pub fn double_exponential_ln_pdf(x: f64, loc: f64, scale: f64) -> f64 {
    -(2.0 * scale).ln() - (x - loc).abs() / scale
}

/// Draw from `IG(shape, scale)` as the reciprocal of a `Gamma(shape, rate = scale)` draw.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, scale: f64) -> f64 {
    let g = Gamma::new(shape, 1.0 / scale).expect("positive inverse-gamma parameters");
    1.0 / g.sample(rng)
}

pub fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, var: f64) -> f64 {
    Normal::new(mean, var.sqrt()).expect("positive variance").sample(rng)
}

/// Beta-binomial prior on inclusion vectors: each of `s` indicators is
/// Bernoulli(p) with `p ~ Beta(a, b)` integrated out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaBinomial {
    pub a: f64,
    pub b: f64,
}

impl Default for BetaBinomial {
    fn default() -> Self {
        Self { a: 2.0, b: 7.0 }
    }
}

impl BetaBinomial {
    /// Log prior mass of one specific inclusion vector with `k` of `s` included.
    pub fn ln_prob(&self, k: usize, s: usize) -> f64 {
        ln_beta(self.a + k as f64, self.b + (s - k) as f64) - ln_beta(self.a, self.b)
    }
}

/// Posterior of a normal mean given `count` observations with known
/// variance `obs_var` summing to `sum`, under a `N(prior_mean, prior_var)` prior.
/// Returns `(mean, var)`.
pub fn normal_mean_posterior(prior_mean: f64, prior_var: f64, sum: f64, count: usize, obs_var: f64) -> (f64, f64) {
    let prec = count as f64 / obs_var + 1.0 / prior_var;
    let mean = (sum / obs_var + prior_mean / prior_var) / prec;
    (mean, 1.0 / prec)
}

/// Posterior of a normal variance given `count` centred observations with
/// sum of squares `ss`, under an `IG(shape, scale)` prior. Returns `(shape, scale)`.
pub fn normal_variance_posterior(shape: f64, scale: f64, ss: f64, count: usize) -> (f64, f64) {
    (shape + 0.5 * count as f64, scale + 0.5 * ss)
}
