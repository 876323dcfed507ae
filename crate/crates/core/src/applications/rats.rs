//! Hierarchical linear growth model for the rats data.
//!
//! `y_ij = a_i + b_i (t_j - t_bar) + e_ij` for 30 rats weighed on 5 days.
//! `theta1` holds the 30 intercepts followed by the 30 slopes and
//! `theta2 = [sigma2_e]`. Each rat contributes a mean and a score column
//! (the score uses the raw day `t_j`), and one pooled column ties the squared
//! residuals to `sigma2_e`. Population means and variances of intercepts and
//! slopes are updated by Gibbs steps.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{summarize_columns, Summary};
use crate::error::{Error, Result};
use crate::estimating::{ElModel, ThetaSplit};
use crate::io::DataMatrix;
use crate::priors::{inverse_gamma_ln_pdf, normal_ln_pdf};
use crate::sampler::{metropolis_within_gibbs, Block, Conjugate, GibbsBlock, GibbsStats, MwgSpec, Proposal1, Proposal2, RunConfig, RunError, Trace};

pub const RATS: usize = 30;
pub const DAYS: [f64; 5] = [8.0, 15.0, 22.0, 29.0, 36.0];
pub const T_BAR: f64 = 22.0;

const BUNDLED: &str = include_str!("../../data/rats.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct RatData {
    /// `30 x 5` masses, row-major.
    pub y: Vec<f64>,
    pub t: [f64; 5],
    pub t_bar: f64,
}

impl RatData {
    pub fn bundled() -> Self {
        Self::from_matrix(&DataMatrix::parse_csv(BUNDLED).expect("bundled data parses")).expect("bundled data is 30 x 5")
    }

    pub fn from_matrix(m: &DataMatrix) -> Result<Self> {
        if m.n() != RATS || m.v() != DAYS.len() {
            return Err(Error::Dimension(format!("rats data must be {RATS} x {}, got {} x {}", DAYS.len(), m.n(), m.v())));
        }
        Ok(Self { y: m.values().to_vec(), t: DAYS, t_bar: T_BAR })
    }

    pub fn mass(&self, rat: usize, day: usize) -> f64 {
        self.y[rat * 5 + day]
    }

    /// Per-rat least-squares intercepts (at `t_bar`) and slopes.
    pub fn per_rat_ols(&self) -> (Vec<f64>, Vec<f64>) {
        let sxx: f64 = self.t.iter().map(|t| (t - self.t_bar).powi(2)).sum();
        (0..RATS)
            .map(|i| {
                let mean = (0..5).map(|j| self.mass(i, j)).sum::<f64>() / 5.0;
                let sxy: f64 = (0..5).map(|j| (self.t[j] - self.t_bar) * self.mass(i, j)).sum();
                (mean, sxy / sxx)
            })
            .unzip()
    }

    pub fn residual(&self, rat: usize, day: usize, intercept: f64, slope: f64) -> f64 {
        self.mass(rat, day) - intercept - slope * (self.t[day] - self.t_bar)
    }
}

#[derive(Debug, Clone)]
pub struct RatModel {
    data: RatData,
}

impl RatModel {
    pub fn new(data: RatData) -> Self {
        Self { data }
    }

    pub fn data(&self) -> &RatData {
        &self.data
    }

    fn residual_at(&self, i: usize, theta1: &[f64]) -> f64 {
        let (rat, day) = (i / 5, i % 5);
        self.data.residual(rat, day, theta1[rat], theta1[RATS + rat])
    }

    /// Starting point: per-rat least squares and the pooled mean squared residual.
    pub fn initial_theta(&self) -> ThetaSplit {
        let (a, b) = self.data.per_rat_ols();
        let rss: f64 = (0..RATS).map(|i| (0..5).map(|j| self.data.residual(i, j, a[i], b[i]).powi(2)).sum::<f64>()).sum();
        let mut theta1 = a;
        theta1.extend(b);
        ThetaSplit { theta1, theta2: vec![rss / (5 * RATS) as f64] }
    }
}

impl ElModel for RatModel {
    fn n_obs(&self) -> usize {
        5 * RATS
    }
    fn g_dim(&self) -> usize {
        2 * RATS
    }
    fn h_dim(&self) -> usize {
        1
    }
    fn theta1_dim(&self) -> usize {
        2 * RATS
    }
    fn theta2_dim(&self) -> usize {
        1
    }
    fn eval_g(&self, i: usize, theta1: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let (rat, day) = (i / 5, i % 5);
        let r = self.residual_at(i, theta1);
        out[2 * rat] = r;
        out[2 * rat + 1] = self.data.t[day] * r;
    }
    fn eval_h(&self, i: usize, theta1: &[f64], theta2: &[f64], out: &mut [f64]) {
        out[0] = self.residual_at(i, theta1).powi(2) - theta2[0];
    }
    fn log_prior(&self, _theta1: &[f64], theta2: &[f64]) -> f64 {
        inverse_gamma_ln_pdf(theta2[0], 2.5, 5.0)
    }
    fn closed_form_theta2(&self, theta1: &[f64], nu: &[f64]) -> Option<Vec<f64>> {
        Some(vec![nu.iter().enumerate().map(|(i, w)| w * self.residual_at(i, theta1).powi(2)).sum()])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatConfig {
    pub length: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub chain: u64,
    pub intercept_sd: f64,
    pub slope_sd: f64,
    pub sigma2_sd: f64,
}

impl Default for RatConfig {
    fn default() -> Self {
        Self { length: 50_000, burn_in: 10_000, seed: 0, chain: 0, intercept_sd: 0.3, slope_sd: 0.03, sigma2_sd: 5.0 }
    }
}

pub const AUX_NAMES: [&str; 4] = ["theta1c", "theta2c", "sigma2_1", "sigma2_2"];

/// Population hyperparameters of the intercepts and slopes.
const HYPER_MEAN_VAR: f64 = 1.0e4;
const HYPER_SHAPE: f64 = 2.5;
const HYPER_SCALE: f64 = 5.0;

fn population_log_prior(theta1: &[f64], aux: &[f64]) -> f64 {
    let (a, b) = theta1.split_at(RATS);
    a.iter().map(|&v| normal_ln_pdf(v, aux[0], aux[2])).sum::<f64>() + b.iter().map(|&v| normal_ln_pdf(v, aux[1], aux[3])).sum::<f64>()
}

/// Metropolis-within-Gibbs specification: one two-step block per rat, then
/// conjugate draws of the two population means and variances.
pub fn rat_model<'a>(model: &'a RatModel, config: &RatConfig) -> MwgSpec<'a, RatModel> {
    let mut scales = vec![config.intercept_sd; RATS];
    scales.extend(vec![config.slope_sd; RATS]);
    let mut blocks: Vec<Block> = (0..RATS).map(|i| Block::TwoStep { indices: Some(vec![i, RATS + i]) }).collect();
    let mean_block = |target: usize, offset: usize, var_idx: usize| {
        GibbsBlock::new(target, Conjugate::NormalMean { prior_mean: 0.0, prior_var: HYPER_MEAN_VAR }, move |th: &ThetaSplit, aux: &[f64]| {
            GibbsStats::Mean { sum: th.theta1[offset..offset + RATS].iter().sum(), count: RATS, obs_var: aux[var_idx] }
        })
    };
    let var_block = |target: usize, offset: usize, mean_idx: usize| {
        GibbsBlock::new(target, Conjugate::NormalVariance { shape: HYPER_SHAPE, scale: HYPER_SCALE }, move |th: &ThetaSplit, aux: &[f64]| {
            GibbsStats::Variance { ss: th.theta1[offset..offset + RATS].iter().map(|v| (v - aux[mean_idx]).powi(2)).sum(), count: RATS }
        })
    };
    blocks.push(Block::Gibbs(mean_block(0, 0, 2)));
    blocks.push(Block::Gibbs(mean_block(1, RATS, 3)));
    blocks.push(Block::Gibbs(var_block(2, 0, 0)));
    blocks.push(Block::Gibbs(var_block(3, RATS, 1)));
    MwgSpec {
        model,
        q1: Proposal1::random_walk(scales),
        q2: Proposal2::TruncatedNormalAtMcele { scales: vec![config.sigma2_sd], lower_bounds: vec![0.0] },
        blocks,
        aux_names: AUX_NAMES.iter().map(|s| s.to_string()).collect(),
        log_prior: Box::new(|t1, t2, aux| population_log_prior(t1, aux) + inverse_gamma_ln_pdf(t2[0], 2.5, 5.0)),
    }
}

/// Hyperparameters matching the starting intercepts and slopes.
pub fn initial_aux(theta: &ThetaSplit) -> Vec<f64> {
    let moments = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64)
    };
    let (a, b) = theta.theta1.split_at(RATS);
    let ((ma, va), (mb, vb)) = (moments(a), moments(b));
    vec![ma, mb, va, vb]
}

pub fn run_rats(data: &RatData, config: &RatConfig) -> std::result::Result<Trace, RunError> {
    let model = RatModel::new(data.clone());
    let spec = rat_model(&model, config);
    let init = model.initial_theta();
    let aux = initial_aux(&init);
    let run = RunConfig { length: config.length, burn_in: config.burn_in, seed: config.seed, chain: config.chain, scan: Default::default() };
    metropolis_within_gibbs(&spec, init, aux, &run)
}

/// Summaries of the population intercept at day 0, the population slope and
/// the residual sd.
pub fn rat_summary(trace: &Trace, burn_in: usize) -> Result<Vec<Summary>> {
    let names = trace.column_names();
    let find = |n: &str| names.iter().position(|c| c == n).ok_or_else(|| Error::Invalid(format!("trace has no column {n}")));
    let (c1, c2, s2) = (find("theta1c")?, find("theta2c")?, find("theta2_1")?);
    let columns = vec![trace.column(c1), trace.column(c2), trace.column(s2)];
    let theta0 = |r: &[f64]| r[0] - T_BAR * r[1];
    let sigma = |r: &[f64]| r[2].sqrt();
    let mut out = summarize_columns(&["theta1c".into(), "theta2c".into(), "sigma2_e".into()], &columns, burn_in, &[("theta0", &theta0), ("sigma_e", &sigma)])?;
    out.remove(2);
    out.remove(0);
    Ok(out)
}
