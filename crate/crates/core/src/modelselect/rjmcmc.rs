//! Reversible-jump sampler over inclusion vectors with one-covariate
//! birth and death moves.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::elcore::SolverOptions;
use crate::error::{Error, Result};
use crate::estimating::{el_at, ThetaSplit};
use crate::priors::{double_exponential_ln_pdf, inverse_gamma_ln_pdf, BetaBinomial};
use crate::sampler::{chain_rng, ChainState, Proposal1, Proposal2, TwoStepKernel};

use super::map::{map_down_beta, map_up_beta, Anchors};
use super::{gamma_bits, gibbs_lambda, included, log_model_prior, mcele_sigma2, ols, LinearModel, RegressionData};

/// How the within-model step proposes coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WithinProposal {
    #[default]
    RandomWalk,
    OlsCentered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionPriors {
    pub sigma2_shape: f64,
    pub sigma2_scale: f64,
    pub lambda_shape: f64,
    pub lambda_scale: f64,
    pub model: BetaBinomial,
}

impl Default for SelectionPriors {
    fn default() -> Self {
        Self { sigma2_shape: 0.1, sigma2_scale: 0.1, lambda_shape: 5.0, lambda_scale: 5.0, model: BetaBinomial::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RjConfig {
    pub length: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub chain: u64,
    /// Random-walk sd of each included coefficient.
    pub beta_scale: f64,
    /// Sd of the truncated-normal variance proposal.
    pub sigma2_scale: f64,
    /// Sd of the dimension-matching variable.
    pub u_sd: f64,
    pub within: WithinProposal,
    pub priors: SelectionPriors,
    /// Starting model; the null model when absent.
    pub init_gamma: Option<Vec<bool>>,
}

impl Default for RjConfig {
    fn default() -> Self {
        Self {
            length: 10_000,
            burn_in: 2_000,
            seed: 0,
            chain: 0,
            beta_scale: 0.03,
            sigma2_scale: 1.0,
            u_sd: 0.05,
            within: WithinProposal::RandomWalk,
            priors: SelectionPriors::default(),
            init_gamma: None,
        }
    }
}

impl RjConfig {
    pub fn validate(&self, s: usize) -> Result<()> {
        for (name, v) in [("beta_scale", self.beta_scale), ("sigma2_scale", self.sigma2_scale), ("u_sd", self.u_sd)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be positive")));
            }
        }
        let p = &self.priors;
        if [p.sigma2_shape, p.sigma2_scale, p.lambda_shape, p.lambda_scale, p.model.a, p.model.b].iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Invalid("prior parameters must be positive".into()));
        }
        if self.burn_in >= self.length {
            return Err(Error::EmptyTrace { length: self.length, burn_in: self.burn_in });
        }
        if let Some(g) = &self.init_gamma {
            if g.len() != s {
                return Err(Error::Dimension(format!("initial model has {} indicators, data has {s} covariates", g.len())));
            }
        }
        Ok(())
    }
}

/// Position of the chain in the joint model and parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub gamma: Vec<bool>,
    pub beta: Vec<f64>,
    pub sigma2: f64,
    /// Conditional EL maximiser of `sigma2` at `beta`.
    pub sigma2_hat: f64,
    pub log_el: f64,
    /// Coefficient, variance and model priors at the current `lambda`.
    pub log_prior: f64,
}

impl ModelState {
    pub fn log_post(&self) -> f64 {
        self.log_el + self.log_prior
    }

    pub fn k(&self) -> usize {
        self.beta.len()
    }
}

pub fn log_prior(gamma: &[bool], beta: &[f64], sigma2: f64, lambda: f64, priors: &SelectionPriors) -> f64 {
    beta.iter().map(|&b| double_exponential_ln_pdf(b, 0.0, lambda)).sum::<f64>()
        + inverse_gamma_ln_pdf(sigma2, priors.sigma2_shape, priors.sigma2_scale)
        + log_model_prior(gamma, &priors.model)
}

/// Evaluate the target at a point; `None` when it has zero density.
pub fn evaluate(
    data: &RegressionData,
    gamma: Vec<bool>,
    beta: Vec<f64>,
    sigma2: f64,
    sigma2_hat: f64,
    lambda: f64,
    priors: &SelectionPriors,
) -> Result<Option<ModelState>> {
    if !(sigma2 > 0.0) {
        return Ok(None);
    }
    let model = LinearModel::new(data, &gamma)?;
    let sol = el_at(&model, &beta, &[sigma2], &SolverOptions::default())?;
    if !sol.feasible {
        return Ok(None);
    }
    let lp = log_prior(&gamma, &beta, sigma2, lambda, priors);
    Ok(Some(ModelState { gamma, beta, sigma2, sigma2_hat, log_el: sol.log_el, log_prior: lp }))
}

/// Least-squares fits memoised by inclusion vector.
#[derive(Debug, Default)]
pub struct OlsCache(HashMap<Vec<bool>, Vec<f64>>);

impl OlsCache {
    pub fn get(&mut self, data: &RegressionData, gamma: &[bool]) -> Vec<f64> {
        self.0.entry(gamma.to_vec()).or_insert_with(|| ols(data, gamma)).clone()
    }
}

fn position(gamma: &[bool], j: usize) -> usize {
    gamma[..j].iter().filter(|&&g| g).count()
}

fn ln_q_u(u: f64, sd: f64) -> f64 {
    -0.5 * (u / sd).powi(2) - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

/// A cross-model proposal and its log acceptance ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossProposal {
    pub state: ModelState,
    pub log_alpha: f64,
    pub u: f64,
}

/// Add covariate `j` (currently excluded) with dimension-matching value `u`.
/// `None` means the proposal has zero target density.
#[allow(clippy::too_many_arguments)]
pub fn birth(
    data: &RegressionData,
    state: &ModelState,
    j: usize,
    u: f64,
    u_sd: f64,
    lambda: f64,
    priors: &SelectionPriors,
    cache: &mut OlsCache,
) -> Result<Option<CrossProposal>> {
    if state.gamma[j] {
        return Err(Error::Invalid(format!("covariate {j} is already included")));
    }
    let mut gamma = state.gamma.clone();
    gamma[j] = true;
    let pos = position(&gamma, j);
    let anchors = Anchors {
        ols_small: cache.get(data, &state.gamma),
        ols_big: cache.get(data, &gamma),
        sigma2_hat_small: state.sigma2_hat,
        sigma2_hat_big: f64::NAN,
    };
    let beta = map_up_beta(&state.beta, u, &anchors, pos)?;
    let m = mcele_sigma2(data, &gamma, &beta)?;
    if !m.feasible {
        return Ok(None);
    }
    let sigma2 = state.sigma2 + (m.sigma2_hat - state.sigma2_hat);
    let Some(next) = evaluate(data, gamma, beta, sigma2, m.sigma2_hat, lambda, priors)? else {
        return Ok(None);
    };
    let log_alpha = next.log_post() - state.log_post() - ln_q_u(u, u_sd);
    Ok(Some(CrossProposal { state: next, log_alpha, u }))
}

/// Remove covariate `j` (currently included).
pub fn death(
    data: &RegressionData,
    state: &ModelState,
    j: usize,
    u_sd: f64,
    lambda: f64,
    priors: &SelectionPriors,
    cache: &mut OlsCache,
) -> Result<Option<CrossProposal>> {
    if !state.gamma[j] {
        return Err(Error::Invalid(format!("covariate {j} is not included")));
    }
    let pos = position(&state.gamma, j);
    let mut gamma = state.gamma.clone();
    gamma[j] = false;
    let anchors = Anchors {
        ols_small: cache.get(data, &gamma),
        ols_big: cache.get(data, &state.gamma),
        sigma2_hat_small: f64::NAN,
        sigma2_hat_big: state.sigma2_hat,
    };
    let (beta, u) = map_down_beta(&state.beta, &anchors, pos)?;
    let m = mcele_sigma2(data, &gamma, &beta)?;
    if !m.feasible {
        return Ok(None);
    }
    let sigma2 = state.sigma2 - (state.sigma2_hat - m.sigma2_hat);
    let Some(next) = evaluate(data, gamma, beta, sigma2, m.sigma2_hat, lambda, priors)? else {
        return Ok(None);
    };
    let log_alpha = next.log_post() - state.log_post() + ln_q_u(u, u_sd);
    Ok(Some(CrossProposal { state: next, log_alpha, u }))
}

/// Data-aware birth map `(beta, u, sigma2) -> (beta', sigma2')`; `None` if a
/// conditional maximiser is infeasible.
pub fn birth_map(data: &RegressionData, gamma: &[bool], j: usize, beta: &[f64], u: f64, sigma2: f64) -> Result<Option<(Vec<f64>, f64)>> {
    let small = mcele_sigma2(data, gamma, beta)?;
    if !small.feasible {
        return Ok(None);
    }
    let mut big_gamma = gamma.to_vec();
    big_gamma[j] = true;
    let anchors = Anchors {
        ols_small: ols(data, gamma),
        ols_big: ols(data, &big_gamma),
        sigma2_hat_small: small.sigma2_hat,
        sigma2_hat_big: f64::NAN,
    };
    let beta_big = map_up_beta(beta, u, &anchors, position(&big_gamma, j))?;
    let big = mcele_sigma2(data, &big_gamma, &beta_big)?;
    if !big.feasible {
        return Ok(None);
    }
    Ok(Some((beta_big, sigma2 + big.sigma2_hat - small.sigma2_hat)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    Within,
    Birth,
    Death,
}

impl MoveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MoveKind::Within => "within",
            MoveKind::Birth => "birth",
            MoveKind::Death => "death",
        }
    }
}

/// State after one move.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelTraceRow {
    pub iter: usize,
    pub kind: MoveKind,
    pub accepted: bool,
    pub gamma: Vec<bool>,
    pub beta: Vec<f64>,
    pub sigma2: f64,
    pub log_post: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelTrace {
    pub s: usize,
    pub seed: u64,
    pub burn_in: usize,
    pub length: usize,
    pub rows: Vec<ModelTraceRow>,
    /// Double-exponential scale after each iteration.
    pub lambda: Vec<f64>,
}

impl ModelTrace {
    /// Model at the end of each iteration.
    pub fn iteration_ends(&self) -> impl Iterator<Item = &ModelTraceRow> {
        self.rows.chunk_by(|a, b| a.iter == b.iter).map(|c| c.last().expect("non-empty chunk"))
    }

    /// Visit frequency of each model over the post-burn-in iterations.
    pub fn model_frequencies(&self) -> BTreeMap<String, f64> {
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        let mut total = 0;
        for row in self.iteration_ends().filter(|r| r.iter >= self.burn_in) {
            *counts.entry(gamma_bits(&row.gamma)).or_default() += 1;
            total += 1;
        }
        counts.into_iter().map(|(k, c)| (k, c as f64 / total as f64)).collect()
    }

    /// Most visited model; ties go to the lexicographically smallest bit string.
    pub fn modal_model(&self) -> Option<String> {
        let freq = self.model_frequencies();
        let mut best: Option<(&String, f64)> = None;
        for (k, &f) in &freq {
            if best.is_none_or(|(_, b)| f > b) {
                best = Some((k, f));
            }
        }
        best.map(|(k, _)| k.clone())
    }

    /// Acceptance rate of birth and death moves.
    pub fn cross_acceptance(&self) -> f64 {
        let cross: Vec<_> = self.rows.iter().filter(|r| r.kind != MoveKind::Within).collect();
        if cross.is_empty() {
            return 0.0;
        }
        cross.iter().filter(|r| r.accepted).count() as f64 / cross.len() as f64
    }

    pub fn moves(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.kind.as_str().to_string()).collect()
    }

    pub fn accepted(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.accepted).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Invalid(format!("writing trace: {e}"));
        w.write_record(["iter", "move", "accepted", "k", "gamma_bits", "sigma2", "log_post", "beta_json"]).map_err(io)?;
        for r in &self.rows {
            let beta = serde_json::to_string(&r.beta).map_err(|e| Error::Invalid(e.to_string()))?;
            w.write_record([
                r.iter.to_string(),
                r.kind.as_str().to_string(),
                u8::from(r.accepted).to_string(),
                r.beta.len().to_string(),
                gamma_bits(&r.gamma),
                r.sigma2.to_string(),
                r.log_post.to_string(),
                beta,
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Invalid(format!("writing trace: {e}")))?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn frequencies_json(&self) -> String {
        serde_json::to_string_pretty(&self.model_frequencies()).expect("string keys and finite values")
    }
}

fn sample_variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Starting state: the requested model at its least-squares fit, or the null
/// model at the sample variance of the response, with fallbacks to the
/// conditional maximiser and then the full model.
pub fn initial_state(data: &RegressionData, config: &RjConfig, lambda: f64) -> Result<ModelState> {
    let at_ols = |gamma: Vec<bool>, sigma2: Option<f64>| -> Result<Option<ModelState>> {
        let beta = ols(data, &gamma);
        let m = mcele_sigma2(data, &gamma, &beta)?;
        if !m.feasible {
            return Ok(None);
        }
        if let Some(s2) = sigma2 {
            if let Some(st) = evaluate(data, gamma.clone(), beta.clone(), s2, m.sigma2_hat, lambda, &config.priors)? {
                return Ok(Some(st));
            }
        }
        evaluate(data, gamma, beta, m.sigma2_hat, m.sigma2_hat, lambda, &config.priors)
    };
    let s = data.s();
    let first = match &config.init_gamma {
        Some(g) => at_ols(g.clone(), None)?,
        None => at_ols(vec![false; s], Some(sample_variance(data.y())))?,
    };
    match first {
        Some(st) => Ok(st),
        None => at_ols(vec![true; s], None)?.ok_or(Error::InitInfeasible),
    }
}

fn accept<R: Rng + ?Sized>(log_alpha: f64, rng: &mut R) -> bool {
    log_alpha >= 0.0 || rng.random::<f64>().ln() < log_alpha
}

/// Run the multi-step reversible-jump sampler.
pub fn rjmcmc(data: &RegressionData, config: &RjConfig) -> Result<ModelTrace> {
    let s = data.s();
    config.validate(s)?;
    let priors = &config.priors;
    let mut rng = chain_rng(config.seed, config.chain);
    let mut lambda = if priors.lambda_shape > 1.0 { priors.lambda_scale / (priors.lambda_shape - 1.0) } else { 1.0 };
    let mut state = initial_state(data, config, lambda)?;
    let mut cache = OlsCache::default();
    let q_u = Normal::new(0.0, config.u_sd).map_err(|e| Error::Invalid(e.to_string()))?;
    let q2 = Proposal2::TruncatedNormalAtMcele { scales: vec![config.sigma2_scale], lower_bounds: vec![0.0] };
    let mut trace = ModelTrace {
        s,
        seed: config.seed,
        burn_in: config.burn_in,
        length: config.length,
        rows: Vec::with_capacity(2 * config.length),
        lambda: Vec::with_capacity(config.length),
    };
    let record = |trace: &mut ModelTrace, iter: usize, kind: MoveKind, accepted: bool, st: &ModelState| {
        trace.rows.push(ModelTraceRow {
            iter,
            kind,
            accepted,
            gamma: st.gamma.clone(),
            beta: st.beta.clone(),
            sigma2: st.sigma2,
            log_post: st.log_post(),
        });
    };

    for iter in 0..config.length {
        // within-model two-step update
        let model = LinearModel::new(data, &state.gamma)?;
        let k = state.k();
        let q1 = match config.within {
            WithinProposal::RandomWalk => Proposal1::random_walk(vec![config.beta_scale; k]),
            WithinProposal::OlsCentered => Proposal1::IndependentGaussian {
                center: cache.get(data, &state.gamma),
                scales: vec![config.beta_scale; k],
            },
        };
        let kernel = TwoStepKernel::new(&model, &q1, &q2)?;
        let gamma = state.gamma.clone();
        let prior = |b: &[f64], t2: &[f64]| log_prior(&gamma, b, t2[0], lambda, priors);
        let mut chain = ChainState {
            theta: ThetaSplit { theta1: state.beta.clone(), theta2: vec![state.sigma2] },
            log_el: state.log_el,
            log_prior: state.log_prior,
            mcele: vec![state.sigma2_hat],
        };
        let rec = kernel.step(&mut chain, None, &prior, &mut rng)?;
        if rec.accepted {
            state.beta = chain.theta.theta1;
            state.sigma2 = chain.theta.theta2[0];
            state.sigma2_hat = chain.mcele[0];
            state.log_el = chain.log_el;
        }
        state.log_prior = chain.log_prior;
        record(&mut trace, iter, MoveKind::Within, rec.accepted, &state);

        lambda = gibbs_lambda(&mut rng, &state.beta, priors.lambda_shape, priors.lambda_scale);
        state.log_prior = log_prior(&state.gamma, &state.beta, state.sigma2, lambda, priors);

        if s > 0 {
            let j = rng.random_range(0..s);
            let (kind, proposal) = if state.gamma[j] {
                (MoveKind::Death, death(data, &state, j, config.u_sd, lambda, priors, &mut cache)?)
            } else {
                let u = q_u.sample(&mut rng);
                (MoveKind::Birth, birth(data, &state, j, u, config.u_sd, lambda, priors, &mut cache)?)
            };
            let accepted = match proposal {
                Some(p) if accept(p.log_alpha, &mut rng) => {
                    state = p.state;
                    true
                }
                _ => false,
            };
            record(&mut trace, iter, kind, accepted, &state);
        }
        trace.lambda.push(lambda);
    }
    Ok(trace)
}

/// Included covariate indices of the modal model.
pub fn modal_support(trace: &ModelTrace) -> Vec<usize> {
    trace
        .modal_model()
        .map(|bits| included(&bits.chars().map(|c| c == '1').collect::<Vec<_>>()))
        .unwrap_or_default()
}
