//! Two-step Metropolis-Hastings for BayesEL posteriors.
//!
//! Each update proposes `theta1` from `q1`, computes the conditional EL
//! maximiser of `theta2` at the proposal, draws `theta2` from `q2` centred
//! there and accepts jointly. The reverse move density needs `q2` centred at
//! the maximiser for the current `theta1`, which is cached in [`ChainState`].

pub mod gibbs;
pub mod proposal;
pub mod trace;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

use crate::error::Error;
use crate::estimating::{el_at, ElModel, ThetaSplit};
use crate::mcele::{mcele, MceleOptions};

pub use gibbs::{metropolis_within_gibbs, Block, Conjugate, GibbsBlock, GibbsStats, MwgSpec};
pub use proposal::{Proposal1, Proposal2};
pub use trace::{Trace, TraceTable};

/// Deterministic generator for `(seed, stream)`; distinct streams are independent.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Current chain position with everything the next acceptance ratio needs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChainState {
    pub theta: ThetaSplit,
    pub log_el: f64,
    pub log_prior: f64,
    /// Conditional EL maximiser of `theta2` at `theta.theta1`.
    pub mcele: Vec<f64>,
}

impl ChainState {
    pub fn log_post(&self) -> f64 {
        self.log_el + self.log_prior
    }
}

/// Outcome of one two-step update.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub accepted: bool,
    /// Conditional maximiser at the proposed `theta1`; `None` if its trial problem was infeasible.
    pub proposal_mcele: Option<Vec<f64>>,
    pub log_alpha: f64,
}

/// `log` of the acceptance ratio before truncation at 1.
///
/// `block` restricts the `q1` densities to the updated coordinates.
pub fn log_acceptance_ratio(
    curr: &ChainState,
    prop: &ChainState,
    q1: &Proposal1,
    q2: &Proposal2,
    block: Option<&[usize]>,
) -> f64 {
    let post_prop = prop.log_post();
    if post_prop == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let q1_ratio = if q1.is_symmetric() {
        0.0
    } else {
        q1.log_density(&curr.theta.theta1, &prop.theta.theta1, block)
            - q1.log_density(&prop.theta.theta1, &curr.theta.theta1, block)
    };
    post_prop - curr.log_post() + q2.log_density(&curr.theta.theta2, &curr.mcele)
        - q2.log_density(&prop.theta.theta2, &prop.mcele)
        + q1_ratio
}

/// `min(1, ratio)`.
pub fn acceptance_ratio(curr: &ChainState, prop: &ChainState, q1: &Proposal1, q2: &Proposal2, block: Option<&[usize]>) -> f64 {
    log_acceptance_ratio(curr, prop, q1, q2, block).min(0.0).exp()
}

/// The two-step kernel bound to a model and proposals.
pub struct TwoStepKernel<'a, M: ElModel + ?Sized> {
    pub model: &'a M,
    pub q1: &'a Proposal1,
    pub q2: &'a Proposal2,
    pub opts: MceleOptions,
}

impl<'a, M: ElModel + ?Sized> TwoStepKernel<'a, M> {
    pub fn new(model: &'a M, q1: &'a Proposal1, q2: &'a Proposal2) -> Result<Self, Error> {
        q1.validate(model.theta1_dim())?;
        q2.validate(model.theta2_dim())?;
        Ok(Self { model, q1, q2, opts: MceleOptions::default() })
    }

    /// Evaluate and cache everything at `theta`; zero posterior density is an error.
    pub fn init_state(&self, theta: ThetaSplit, log_prior: &dyn Fn(&[f64], &[f64]) -> f64) -> Result<ChainState, Error> {
        if theta.p() != self.model.theta1_dim() || theta.q() != self.model.theta2_dim() {
            return Err(Error::Dimension(format!(
                "initial state has ({}, {}) entries, model expects ({}, {})",
                theta.p(),
                theta.q(),
                self.model.theta1_dim(),
                self.model.theta2_dim()
            )));
        }
        let lp = log_prior(&theta.theta1, &theta.theta2);
        if lp == f64::NEG_INFINITY {
            return Err(Error::InitInfeasible);
        }
        let sol = el_at(self.model, &theta.theta1, &theta.theta2, &self.opts.solver)?;
        if !sol.feasible {
            return Err(Error::InitInfeasible);
        }
        let m = mcele(self.model, &theta.theta1, &self.opts)?;
        if !m.feasible {
            return Err(Error::InitInfeasible);
        }
        Ok(ChainState { theta, log_el: sol.log_el, log_prior: lp, mcele: m.theta2_hat })
    }

    /// One two-step update of `state` in place. The current prior is
    /// re-evaluated so priors that depend on outside quantities stay consistent.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut ChainState,
        block: Option<&[usize]>,
        log_prior: &dyn Fn(&[f64], &[f64]) -> f64,
        rng: &mut R,
    ) -> Result<StepRecord, Error> {
        state.log_prior = log_prior(&state.theta.theta1, &state.theta.theta2);
        let theta1 = self.q1.sample(&state.theta.theta1, block, rng);
        let m = mcele(self.model, &theta1, &self.opts)?;
        if !m.feasible {
            return Ok(StepRecord { accepted: false, proposal_mcele: None, log_alpha: f64::NEG_INFINITY });
        }
        let theta2 = self.q2.sample(&m.theta2_hat, rng);
        let lp = log_prior(&theta1, &theta2);
        let log_el = if lp == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            el_at(self.model, &theta1, &theta2, &self.opts.solver)?.log_el
        };
        let prop = ChainState { theta: ThetaSplit { theta1, theta2 }, log_el, log_prior: lp, mcele: m.theta2_hat };
        let log_alpha = log_acceptance_ratio(state, &prop, self.q1, self.q2, block);
        let accepted = log_alpha >= 0.0 || (log_alpha > f64::NEG_INFINITY && rng.random::<f64>().ln() < log_alpha);
        let proposal_mcele = Some(prop.mcele.clone());
        if accepted {
            *state = prop;
        }
        Ok(StepRecord { accepted, proposal_mcele, log_alpha })
    }
}

/// How `theta1` is split into updates within one step.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scan {
    /// Whole `theta1` at once.
    #[default]
    Joint,
    /// Systematic scan over the given coordinate blocks; each block is one
    /// two-step update (with a fresh `theta2` proposal).
    Blocks(Vec<Vec<usize>>),
}

impl Scan {
    pub fn blocks(&self) -> Vec<Option<&[usize]>> {
        match self {
            Scan::Joint => vec![None],
            Scan::Blocks(b) => b.iter().map(|v| Some(v.as_slice())).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub length: usize,
    #[serde(default)]
    pub burn_in: usize,
    pub seed: u64,
    /// RNG stream, so chains sharing a seed stay independent.
    #[serde(default)]
    pub chain: u64,
    #[serde(default)]
    pub scan: Scan,
}

/// A failed run together with what was sampled before the failure.
#[derive(Debug, ThisError)]
#[error("{error} (after {} steps)", partial.as_ref().map_or(0, |t| t.len()))]
pub struct RunError {
    pub error: Error,
    pub partial: Option<Box<Trace>>,
}

impl From<Error> for RunError {
    fn from(error: Error) -> Self {
        Self { error, partial: None }
    }
}

/// Fixed-dimension two-step Metropolis-Hastings with the model's own prior.
pub fn two_step_mh<M: ElModel + ?Sized>(
    model: &M,
    init: ThetaSplit,
    q1: &Proposal1,
    q2: &Proposal2,
    config: &RunConfig,
) -> Result<Trace, RunError> {
    let kernel = TwoStepKernel::new(model, q1, q2)?;
    let prior = |t1: &[f64], t2: &[f64]| model.log_prior(t1, t2);
    let mut state = kernel.init_state(init, &prior)?;
    let mut rng = chain_rng(config.seed, config.chain);
    let mut trace = Trace::new(model.param_names(), Vec::new(), config.seed, config.burn_in);
    let blocks = config.scan.blocks();
    if let Scan::Blocks(b) = &config.scan {
        if b.iter().flatten().any(|&k| k >= model.theta1_dim()) {
            return Err(Error::Dimension("scan block index out of range".into()).into());
        }
    }
    for _ in 0..config.length {
        let mut any = false;
        let mut last_mcele = None;
        for block in &blocks {
            match kernel.step(&mut state, *block, &prior, &mut rng) {
                Ok(rec) => {
                    trace.mh_attempts += 1;
                    trace.mh_accepts += usize::from(rec.accepted);
                    any |= rec.accepted;
                    last_mcele = rec.proposal_mcele;
                }
                Err(error) => return Err(RunError { error, partial: Some(Box::new(trace)) }),
            }
        }
        trace.push(&state.theta, &[], state.log_post(), any, last_mcele);
    }
    Ok(trace)
}

/// Run `chains` independent chains in parallel, chain `k` on RNG stream `k`.
/// Results come back in chain order.
pub fn run_chains<T: Send>(chains: usize, run: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..chains as u64).into_par_iter().map(run).collect()
}
