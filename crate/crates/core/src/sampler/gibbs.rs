//! Metropolis-within-Gibbs: conjugate updates of auxiliary quantities
//! interleaved with two-step MH updates of the EL parameters.

use crate::error::Error;
use crate::estimating::{ElModel, ThetaSplit};
use crate::priors::{normal_mean_posterior, normal_variance_posterior, sample_inverse_gamma, sample_normal};

use super::{chain_rng, Proposal1, Proposal2, RunConfig, RunError, Trace, TwoStepKernel};

/// Conjugate family of a Gibbs block's prior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conjugate {
    /// Normal prior on a normal mean.
    NormalMean { prior_mean: f64, prior_var: f64 },
    /// Inverse-gamma prior on a normal variance.
    NormalVariance { shape: f64, scale: f64 },
}

/// Sufficient statistics handed to a conjugate update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GibbsStats {
    /// `count` observations with known variance `obs_var` summing to `sum`.
    Mean { sum: f64, count: usize, obs_var: f64 },
    /// `count` centred observations with sum of squares `ss`.
    Variance { ss: f64, count: usize },
}

type StatsFn = dyn Fn(&ThetaSplit, &[f64]) -> GibbsStats + Send + Sync;
type AuxPriorFn = dyn Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync;

pub struct GibbsBlock {
    /// Index of the auxiliary quantity this block redraws.
    pub target: usize,
    pub conjugate: Conjugate,
    pub stats: Box<StatsFn>,
}

impl GibbsBlock {
    pub fn new(target: usize, conjugate: Conjugate, stats: impl Fn(&ThetaSplit, &[f64]) -> GibbsStats + Send + Sync + 'static) -> Self {
        Self { target, conjugate, stats: Box::new(stats) }
    }

    /// Full-conditional parameters: `(mean, var)` for a mean, `(shape, scale)` for a variance.
    pub fn conditional(&self, theta: &ThetaSplit, aux: &[f64]) -> Result<(f64, f64), Error> {
        match (self.conjugate, (self.stats)(theta, aux)) {
            (Conjugate::NormalMean { prior_mean, prior_var }, GibbsStats::Mean { sum, count, obs_var }) => {
                Ok(normal_mean_posterior(prior_mean, prior_var, sum, count, obs_var))
            }
            (Conjugate::NormalVariance { shape, scale }, GibbsStats::Variance { ss, count }) => {
                Ok(normal_variance_posterior(shape, scale, ss, count))
            }
            _ => Err(Error::Invalid("Gibbs statistics do not match the block's conjugate family".into())),
        }
    }
}

pub enum Block {
    Gibbs(GibbsBlock),
    /// Two-step MH update of the `theta1` coordinates listed (all when `None`).
    TwoStep { indices: Option<Vec<usize>> },
}

/// Everything that defines a Metropolis-within-Gibbs sampler.
pub struct MwgSpec<'a, M: ElModel + ?Sized> {
    pub model: &'a M,
    pub q1: Proposal1,
    pub q2: Proposal2,
    pub blocks: Vec<Block>,
    pub aux_names: Vec<String>,
    /// Joint log prior of `(theta1, theta2)` given the auxiliaries.
    pub log_prior: Box<AuxPriorFn>,
}

/// Systematic scan over `spec.blocks`, one full pass per step.
pub fn metropolis_within_gibbs<M: ElModel + ?Sized>(
    spec: &MwgSpec<'_, M>,
    init: ThetaSplit,
    aux_init: Vec<f64>,
    config: &RunConfig,
) -> Result<Trace, RunError> {
    if aux_init.len() != spec.aux_names.len() {
        return Err(Error::Dimension(format!("{} auxiliary values for {} names", aux_init.len(), spec.aux_names.len())).into());
    }
    for block in &spec.blocks {
        match block {
            Block::Gibbs(g) if g.target >= aux_init.len() => {
                return Err(Error::Dimension(format!("Gibbs target {} out of range", g.target)).into());
            }
            Block::TwoStep { indices: Some(idx) } if idx.iter().any(|&k| k >= spec.model.theta1_dim()) => {
                return Err(Error::Dimension("two-step block index out of range".into()).into());
            }
            _ => {}
        }
    }
    let kernel = TwoStepKernel::new(spec.model, &spec.q1, &spec.q2)?;
    let mut aux = aux_init;
    let mut state = {
        let a = aux.clone();
        kernel.init_state(init, &|t1, t2| (spec.log_prior)(t1, t2, &a))?
    };
    let mut rng = chain_rng(config.seed, config.chain);
    let mut trace = Trace::new(spec.model.param_names(), spec.aux_names.clone(), config.seed, config.burn_in);
    let has_mh = spec.blocks.iter().any(|b| matches!(b, Block::TwoStep { .. }));

    for _ in 0..config.length {
        let mut any = !has_mh;
        let mut last_mcele = None;
        for block in &spec.blocks {
            match block {
                Block::Gibbs(g) => {
                    let (a, b) = match g.conditional(&state.theta, &aux) {
                        Ok(v) => v,
                        Err(error) => return Err(RunError { error, partial: Some(Box::new(trace)) }),
                    };
                    aux[g.target] = match g.conjugate {
                        Conjugate::NormalMean { .. } => sample_normal(&mut rng, a, b),
                        Conjugate::NormalVariance { .. } => sample_inverse_gamma(&mut rng, a, b),
                    };
                }
                Block::TwoStep { indices } => {
                    let prior = |t1: &[f64], t2: &[f64]| (spec.log_prior)(t1, t2, &aux);
                    match kernel.step(&mut state, indices.as_deref(), &prior, &mut rng) {
                        Ok(rec) => {
                            trace.mh_attempts += 1;
                            trace.mh_accepts += usize::from(rec.accepted);
                            any |= rec.accepted;
                            last_mcele = rec.proposal_mcele;
                        }
                        Err(error) => return Err(RunError { error, partial: Some(Box::new(trace)) }),
                    }
                }
            }
        }
        state.log_prior = (spec.log_prior)(&state.theta.theta1, &state.theta.theta2, &aux);
        trace.push(&state.theta, &aux, state.log_post(), any, last_mcele);
    }
    Ok(trace)
}
