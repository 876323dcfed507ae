//! JSON run configurations and the models they describe.

use std::path::{Path, PathBuf};

use bayesel::applications::synth::EXAMPLE_EDGES;
use bayesel::applications::{normal_toy_model, synth_dag, synth_regression, NormalToy, RatConfig, RatData, RatModel};
use bayesel::elcore::ConstraintMatrix;
use bayesel::estimating::{ElModel, ThetaSplit};
use bayesel::io::DataMatrix;
use bayesel::mcele::{mcele, MceleOptions};
use bayesel::modelselect::{ols, LinearModel, RegressionData, RjConfig};
use bayesel::priors::Prior;
use bayesel::sampler::{Proposal1, Proposal2, Scan};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::failure::Failure;

/// Where observations come from: a CSV path (relative to the config file),
/// inline values, or a synthetic generator.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum DataSource {
    Path(PathBuf),
    Column(Vec<f64>),
    Rows(Vec<Vec<f64>>),
    Synthetic(Synthetic),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "synthetic", rename_all = "snake_case", deny_unknown_fields)]
pub enum Synthetic {
    /// Response in column 0, covariates after it.
    Regression { seed: u64, n: usize, beta: Vec<f64>, sigma: f64 },
    /// The bundled 13-node example network.
    Network { seed: u64, n: usize, noise_sd: f64 },
}

impl DataSource {
    pub fn load(&self, base: &Path) -> Result<DataMatrix, Failure> {
        match self {
            DataSource::Path(p) => DataMatrix::read_csv(base.join(p)).map_err(Failure::input),
            DataSource::Column(v) => DataMatrix::new(v.len(), 1, v.clone()).map_err(Failure::input),
            DataSource::Rows(r) => DataMatrix::from_rows(r).map_err(Failure::input),
            DataSource::Synthetic(Synthetic::Regression { seed, n, beta, sigma }) => {
                let d = synth_regression(*seed, *n, beta.len(), beta, *sigma).map_err(Failure::input)?;
                let s = d.s();
                let mut values = Vec::with_capacity(d.n() * (s + 1));
                for i in 0..d.n() {
                    values.push(d.y()[i]);
                    values.extend_from_slice(d.x_row(i));
                }
                let names = std::iter::once("y".to_string()).chain((1..=s).map(|j| format!("x{j}"))).collect();
                DataMatrix::new(d.n(), s + 1, values).and_then(|m| m.with_names(names)).map_err(Failure::input)
            }
            DataSource::Synthetic(Synthetic::Network { seed, n, noise_sd }) => {
                synth_dag(*seed, *n, 13, &EXAMPLE_EDGES, *noise_sd).map_err(Failure::input)
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Mean and variance of one column.
    NormalToy {
        data: DataSource,
        #[serde(default)]
        column: usize,
        mu_prior_var: Option<f64>,
        sigma2_shape: Option<f64>,
        sigma2_scale: Option<f64>,
    },
    /// Linear regression on the listed covariates.
    Linear {
        data: DataSource,
        response: usize,
        covariates: Vec<usize>,
        #[serde(default)]
        standardize: bool,
        #[serde(default = "flat")]
        beta_prior: Prior,
        #[serde(default = "flat")]
        sigma2_prior: Prior,
    },
    /// Growth curves; the bundled data unless `data` is given.
    Rats {
        data: Option<DataSource>,
        intercept_sd: Option<f64>,
        slope_sd: Option<f64>,
        sigma2_sd: Option<f64>,
    },
    /// Data rows are the constraint rows (optionally a subset of columns).
    Raw { data: DataSource, columns: Option<Vec<usize>> },
}

fn flat() -> Prior {
    Prior::Flat
}

#[derive(Debug, Clone)]
pub struct RatSettings {
    pub intercept_sd: Option<f64>,
    pub slope_sd: Option<f64>,
    pub sigma2_sd: Option<f64>,
}

/// A model with its data loaded.
pub enum Built {
    Toy(NormalToy),
    Linear { data: RegressionData, beta_prior: Prior, sigma2_prior: Prior },
    Rats { model: RatModel, settings: RatSettings },
    Raw(ConstraintMatrix),
}

impl ModelSpec {
    pub fn build(&self, base: &Path) -> Result<Built, Failure> {
        match self {
            ModelSpec::NormalToy { data, column, mu_prior_var, sigma2_shape, sigma2_scale } => {
                let m = data.load(base)?;
                if *column >= m.v() {
                    return Err(Failure::input(format!("column {column} out of range")));
                }
                let mut toy = normal_toy_model(&m.column(*column)).map_err(Failure::input)?;
                if let Some(v) = mu_prior_var {
                    toy.mu_prior_var = *v;
                }
                if let Some(v) = sigma2_shape {
                    toy.sigma2_shape = *v;
                }
                if let Some(v) = sigma2_scale {
                    toy.sigma2_scale = *v;
                }
                Ok(Built::Toy(toy))
            }
            ModelSpec::Linear { data, response, covariates, standardize, beta_prior, sigma2_prior } => {
                beta_prior.validate().map_err(Failure::input)?;
                sigma2_prior.validate().map_err(Failure::input)?;
                let m = data.load(base)?;
                let mut d = RegressionData::from_matrix(&m, *response, covariates).map_err(Failure::input)?;
                if *standardize {
                    d = d.standardize().map_err(Failure::input)?;
                }
                Ok(Built::Linear { data: d, beta_prior: beta_prior.clone(), sigma2_prior: sigma2_prior.clone() })
            }
            ModelSpec::Rats { data, intercept_sd, slope_sd, sigma2_sd } => {
                let settings = RatSettings { intercept_sd: *intercept_sd, slope_sd: *slope_sd, sigma2_sd: *sigma2_sd };
                let d = match data {
                    Some(src) => RatData::from_matrix(&src.load(base)?).map_err(Failure::input)?,
                    None => RatData::bundled(),
                };
                Ok(Built::Rats { model: RatModel::new(d), settings })
            }
            ModelSpec::Raw { data, columns } => {
                let m = data.load(base)?;
                let c = ConstraintMatrix::new(m.n(), m.v(), m.values().to_vec()).map_err(Failure::input)?;
                match columns {
                    Some(cols) => c.select_columns(cols).map_err(Failure::input).map(Built::Raw),
                    None => Ok(Built::Raw(c)),
                }
            }
        }
    }
}

impl Built {
    /// The estimating-equation model, unavailable for raw constraint rows.
    pub fn model(&self) -> Option<Box<dyn ElModel + '_>> {
        match self {
            Built::Toy(t) => Some(Box::new(t.clone())),
            Built::Linear { data, beta_prior, sigma2_prior } => Some(Box::new(
                LinearModel::new(data, &vec![true; data.s()]).expect("matching length").with_priors(beta_prior.clone(), sigma2_prior.clone()),
            )),
            Built::Rats { model, .. } => Some(Box::new(model.clone())),
            Built::Raw(_) => None,
        }
    }

    /// A natural starting point: sample moments, least squares, or per-rat fits.
    pub fn default_init(&self) -> Result<ThetaSplit, Failure> {
        match self {
            Built::Toy(t) => Ok(ThetaSplit { theta1: vec![t.mean()], theta2: vec![t.variance()] }),
            Built::Linear { data, .. } => {
                let gamma = vec![true; data.s()];
                let beta = ols(data, &gamma);
                let model = LinearModel::new(data, &gamma).map_err(Failure::input)?;
                let m = mcele(&model, &beta, &MceleOptions::default()).map_err(Failure::from)?;
                if !m.feasible {
                    return Err(Failure::init("least-squares start is infeasible"));
                }
                Ok(ThetaSplit { theta1: beta, theta2: m.theta2_hat })
            }
            Built::Rats { model, .. } => Ok(model.initial_theta()),
            Built::Raw(_) => Err(Failure::input("raw constraint rows have no parameters")),
        }
    }

    pub fn rat_config(&self, length: usize, burn_in: usize, seed: u64, chain: u64) -> Option<RatConfig> {
        let Built::Rats { settings, .. } = self else { return None };
        let d = RatConfig::default();
        Some(RatConfig {
            length,
            burn_in,
            seed,
            chain,
            intercept_sd: settings.intercept_sd.unwrap_or(d.intercept_sd),
            slope_sd: settings.slope_sd.unwrap_or(d.slope_sd),
            sigma2_sd: settings.sigma2_sd.unwrap_or(d.sigma2_sd),
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub theta1: Vec<f64>,
    #[serde(default)]
    pub theta2: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub model: ModelSpec,
    pub theta1_range: [f64; 2],
    pub theta2_range: [f64; 2],
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_resolution() -> usize {
    100
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    pub model: ModelSpec,
    pub length: usize,
    pub burn_in: usize,
    pub seed: Option<u64>,
    pub q1: Option<Proposal1>,
    pub q2: Option<Proposal2>,
    pub init: Option<ThetaSplit>,
    #[serde(default)]
    pub scan: Scan,
    #[serde(default = "default_alpha")]
    pub hw_alpha: f64,
    #[serde(default = "default_eps")]
    pub hw_eps: f64,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_eps() -> f64 {
    0.1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum SelectConfig {
    Regression {
        data: DataSource,
        #[serde(default)]
        response: usize,
        /// Every other column when absent.
        covariates: Option<Vec<usize>>,
        #[serde(default = "yes")]
        standardize: bool,
        #[serde(default)]
        sampler: RjConfig,
    },
    Dag {
        data: DataSource,
        #[serde(default = "three")]
        roots: usize,
        sampler: Option<RjConfig>,
    },
}

fn yes() -> bool {
    true
}

fn three() -> usize {
    3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub trace: PathBuf,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

/// Parse a config file; relative paths inside it resolve against its directory.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<(T, PathBuf), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let cfg = serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}
