//! Mean and variance of a univariate sample.
//!
//! `theta1 = [mu]` with `g = x - mu`; `theta2 = [sigma2]` with
//! `h = (x - mu)^2 - sigma2`. Priors are `N(0, 100)` on `mu` and
//! `IG(0.001, 0.001)` on `sigma2`.

use crate::error::{Error, Result};
use crate::estimating::ElModel;
use crate::priors::{inverse_gamma_ln_pdf, normal_ln_pdf};

#[derive(Debug, Clone, PartialEq)]
pub struct NormalToy {
    xs: Vec<f64>,
    sorted: Vec<f64>,
    pub mu_prior_var: f64,
    pub sigma2_shape: f64,
    pub sigma2_scale: f64,
}

pub fn normal_toy_model(xs: &[f64]) -> Result<NormalToy> {
    NormalToy::new(xs)
}

impl NormalToy {
    pub fn new(xs: &[f64]) -> Result<Self> {
        if xs.len() < 3 {
            return Err(Error::TooShort { needed: 3, got: xs.len() });
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("sample".into()));
        }
        let mut sorted = xs.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { xs: xs.to_vec(), sorted, mu_prior_var: 100.0, sigma2_shape: 0.001, sigma2_scale: 0.001 })
    }

    pub fn data(&self) -> &[f64] {
        &self.xs
    }

    /// Open interval of `sigma2` values with positive EL at `mu`, or `None`
    /// when `mu` is outside the sample range.
    ///
    /// `(mu, sigma2 + mu^2)` must lie inside the convex hull of the points
    /// `(x_i, x_i^2)`, which sit on a parabola: below the chord joining the
    /// extremes and above the chain of chords joining neighbours.
    pub fn feasible_sigma2(&self, mu: f64) -> Option<(f64, f64)> {
        let (lo, hi) = (self.sorted[0], self.sorted[self.sorted.len() - 1]);
        if !(mu > lo && mu < hi) {
            return None;
        }
        let k = self.sorted.partition_point(|&x| x <= mu);
        let (a, b) = (self.sorted[k - 1], self.sorted[k]);
        let lower_m2 = if a == mu { a * a } else { a * a + (b * b - a * a) * (mu - a) / (b - a) };
        Some((lower_m2 - mu * mu, (hi - mu) * (mu - lo)))
    }

    /// Box containing the whole feasible region.
    pub fn feasible_box(&self) -> ((f64, f64), (f64, f64)) {
        let (lo, hi) = (self.sorted[0], self.sorted[self.sorted.len() - 1]);
        ((lo, hi), (0.0, ((hi - lo) / 2.0).powi(2)))
    }

    pub fn mean(&self) -> f64 {
        self.xs.iter().sum::<f64>() / self.xs.len() as f64
    }

    /// Variance with divisor `n`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / self.xs.len() as f64
    }
}

impl ElModel for NormalToy {
    fn n_obs(&self) -> usize {
        self.xs.len()
    }
    fn g_dim(&self) -> usize {
        1
    }
    fn h_dim(&self) -> usize {
        1
    }
    fn theta1_dim(&self) -> usize {
        1
    }
    fn theta2_dim(&self) -> usize {
        1
    }
    fn eval_g(&self, i: usize, theta1: &[f64], out: &mut [f64]) {
        out[0] = self.xs[i] - theta1[0];
    }
    fn eval_h(&self, i: usize, theta1: &[f64], theta2: &[f64], out: &mut [f64]) {
        out[0] = (self.xs[i] - theta1[0]).powi(2) - theta2[0];
    }
    fn log_prior(&self, theta1: &[f64], theta2: &[f64]) -> f64 {
        normal_ln_pdf(theta1[0], 0.0, self.mu_prior_var) + inverse_gamma_ln_pdf(theta2[0], self.sigma2_shape, self.sigma2_scale)
    }
    fn closed_form_theta2(&self, theta1: &[f64], nu: &[f64]) -> Option<Vec<f64>> {
        Some(vec![self.xs.iter().zip(nu).map(|(x, w)| w * (x - theta1[0]).powi(2)).sum()])
    }
    fn param_names(&self) -> Vec<String> {
        vec!["mu".into(), "sigma2".into()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimating::{build_constraints_raw, el_at};
    use crate::elcore::SolverOptions;
    use crate::mcele::{mcele, MceleOptions};

    const XS: [f64; 8] = [-1.3, -0.4, 0.1, 0.35, 0.8, 1.2, 1.9, 2.4];

    #[test]
    fn constraint_columns() {
        let m = normal_toy_model(&XS).unwrap();
        let c = build_constraints_raw(&m, &[0.5], &[1.1]).unwrap();
        for (i, x) in XS.iter().enumerate() {
            assert_eq!(c.row(i), &[x - 0.5, (x - 0.5).powi(2) - 1.1]);
        }
    }

    #[test]
    fn uniform_weights_at_sample_moments() {
        let m = normal_toy_model(&XS).unwrap();
        let sol = el_at(&m, &[m.mean()], &[m.variance()], &SolverOptions::default()).unwrap();
        assert!(sol.feasible);
        assert!((sol.log_el + 8.0 * 8f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn mcele_is_weighted_squared_deviation() {
        let m = normal_toy_model(&XS).unwrap();
        let r = mcele(&m, &[0.3], &MceleOptions::default()).unwrap();
        let expected: f64 = XS.iter().zip(&r.trial_weights).map(|(x, w)| w * (x - 0.3).powi(2)).sum();
        assert!((r.theta2_hat[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn feasible_interval_matches_solver() {
        let m = normal_toy_model(&XS).unwrap();
        let opts = SolverOptions::default();
        for k in 1..60 {
            let mu = -1.3 + 3.7 * k as f64 / 60.0;
            let (lo, hi) = m.feasible_sigma2(mu).unwrap();
            assert!(lo >= 0.0 && lo < hi);
            let inside = |s2: f64| el_at(&m, &[mu], &[s2], &opts).unwrap().feasible;
            let w = hi - lo;
            assert!(inside(lo + 0.01 * w) && inside(hi - 0.01 * w) && inside(0.5 * (lo + hi)));
            assert!(!inside(lo - 0.01 * w) && !inside(hi + 0.01 * w));
        }
        assert!(m.feasible_sigma2(-1.3).is_none() && m.feasible_sigma2(3.0).is_none());
        let ((a, b), (c, d)) = m.feasible_box();
        assert_eq!((a, b, c), (-1.3, 2.4, 0.0));
        assert!((d - 1.85f64.powi(2)).abs() < 1e-12);
    }

    #[test]
    fn short_samples_are_rejected() {
        assert!(normal_toy_model(&[1.0, 2.0]).is_err());
    }
}
