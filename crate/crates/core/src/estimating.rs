//! Models defined by split estimating equations.
//!
//! A model supplies per-observation functions `g(x_i, theta1)` (length `l`)
//! and `h(x_i, theta1, theta2)` (length `d`) plus a prior. The constraint
//! matrix at `(theta1, theta2)` stacks the g-columns first and the h-columns
//! after them.

use serde::{Deserialize, Serialize};

use crate::elcore::{solve_el, ConstraintMatrix, ElSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::io::DataMatrix;

/// Parameter value split into the part proposed freely (`theta1`) and the
/// part proposed around its conditional EL maximiser (`theta2`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ThetaSplit {
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
}

impl ThetaSplit {
    pub fn new(theta1: Vec<f64>, theta2: Vec<f64>) -> Result<Self> {
        if theta1.is_empty() || theta2.is_empty() {
            return Err(Error::Dimension(format!(
                "both parameter blocks must be non-empty (p = {}, q = {})",
                theta1.len(),
                theta2.len()
            )));
        }
        if theta1.iter().chain(&theta2).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameter vector".into()));
        }
        Ok(Self { theta1, theta2 })
    }

    pub fn p(&self) -> usize {
        self.theta1.len()
    }

    pub fn q(&self) -> usize {
        self.theta2.len()
    }

    pub fn concat(&self) -> Vec<f64> {
        let mut v = self.theta1.clone();
        v.extend_from_slice(&self.theta2);
        v
    }
}

/// A BayesEL model. `eval_g` never sees `theta2`, which is what makes the
/// conditional maximiser of `theta2` computable from the g-only problem.
pub trait ElModel: Send + Sync {
    fn n_obs(&self) -> usize;
    fn g_dim(&self) -> usize;
    fn h_dim(&self) -> usize;
    fn theta1_dim(&self) -> usize;
    fn theta2_dim(&self) -> usize;

    fn eval_g(&self, i: usize, theta1: &[f64], out: &mut [f64]);
    fn eval_h(&self, i: usize, theta1: &[f64], theta2: &[f64], out: &mut [f64]);

    /// Log prior density; `-inf` outside the support.
    fn log_prior(&self, theta1: &[f64], theta2: &[f64]) -> f64;

    /// Closed-form root of `sum_i nu_i h(x_i, theta1, theta2) = 0` when `h`
    /// is affine in `theta2`. `None` means the generic root finder is used.
    fn closed_form_theta2(&self, _theta1: &[f64], _nu: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Starting point for the generic root finder.
    fn theta2_guess(&self, _theta1: &[f64], _nu: &[f64]) -> Vec<f64> {
        vec![0.0; self.theta2_dim()]
    }

    fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.theta1_dim()).map(|k| format!("theta1_{k}")).collect();
        names.extend((1..=self.theta2_dim()).map(|k| format!("theta2_{k}")));
        names
    }
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

/// `n x l` matrix of g-values at `theta1`.
pub fn build_g_constraints<M: ElModel + ?Sized>(model: &M, theta1: &[f64]) -> Result<ConstraintMatrix> {
    check_finite(theta1, "theta1")?;
    let (n, l) = (model.n_obs(), model.g_dim());
    let mut values = vec![0.0; n * l];
    for i in 0..n {
        model.eval_g(i, theta1, &mut values[i * l..(i + 1) * l]);
    }
    ConstraintMatrix::new(n, l, values).map_err(|e| match e {
        Error::NonFinite(_) => Error::NonFinite("estimating function g".into()),
        other => other,
    })
}

/// `n x (l + d)` matrix: g-columns then h-columns.
pub fn build_constraints<M: ElModel + ?Sized>(model: &M, theta: &ThetaSplit) -> Result<ConstraintMatrix> {
    build_constraints_raw(model, &theta.theta1, &theta.theta2)
}

pub fn build_constraints_raw<M: ElModel + ?Sized>(
    model: &M,
    theta1: &[f64],
    theta2: &[f64],
) -> Result<ConstraintMatrix> {
    check_finite(theta1, "theta1")?;
    check_finite(theta2, "theta2")?;
    let (n, l, d) = (model.n_obs(), model.g_dim(), model.h_dim());
    let m = l + d;
    let mut values = vec![0.0; n * m];
    for i in 0..n {
        let row = &mut values[i * m..(i + 1) * m];
        model.eval_g(i, theta1, &mut row[..l]);
        model.eval_h(i, theta1, theta2, &mut row[l..]);
    }
    ConstraintMatrix::new(n, m, values).map_err(|e| match e {
        Error::NonFinite(_) => Error::NonFinite("estimating functions".into()),
        other => other,
    })
}

/// Empirical likelihood at `(theta1, theta2)`.
pub fn el_at<M: ElModel + ?Sized>(model: &M, theta1: &[f64], theta2: &[f64], opts: &SolverOptions) -> Result<ElSolution> {
    solve_el(&build_constraints_raw(model, theta1, theta2)?, opts)
}

/// `log L(theta) + log pi(theta)`; `-inf` when infeasible or off the prior support.
pub fn log_posterior_unnorm<M: ElModel + ?Sized>(model: &M, theta: &ThetaSplit) -> Result<f64> {
    let lp = model.log_prior(&theta.theta1, &theta.theta2);
    if lp == f64::NEG_INFINITY {
        return Ok(lp);
    }
    let sol = el_at(model, &theta.theta1, &theta.theta2, &SolverOptions::default())?;
    Ok(sol.log_el + lp)
}

type GFn = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;
type HFn = dyn Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync;
type PriorFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type ClosedFormFn = dyn Fn(&DataMatrix, &[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// Model assembled from closures over the rows of a data matrix.
///
/// ```
/// use bayesel::estimating::{FnModel, log_posterior_unnorm, ThetaSplit};
/// use bayesel::io::DataMatrix;
///
/// let data = DataMatrix::from_column(&[-1.0, 0.0, 1.0, 0.5]);
/// let model = FnModel::new(data, 1, 1, 1, 1)
///     .g(|x, t1, out| out[0] = x[0] - t1[0])
///     .h(|x, t1, t2, out| out[0] = (x[0] - t1[0]).powi(2) - t2[0]);
/// let lp = log_posterior_unnorm(&model, &ThetaSplit::new(vec![0.1], vec![0.6]).unwrap()).unwrap();
/// assert!(lp.is_finite());
/// ```
pub struct FnModel {
    data: DataMatrix,
    g_dim: usize,
    h_dim: usize,
    p: usize,
    q: usize,
    g: Box<GFn>,
    h: Box<HFn>,
    prior: Box<PriorFn>,
    closed_form: Option<Box<ClosedFormFn>>,
}

impl FnModel {
    /// Starts with zero estimating functions and a flat prior.
    pub fn new(data: DataMatrix, g_dim: usize, h_dim: usize, p: usize, q: usize) -> Self {
        Self {
            data,
            g_dim,
            h_dim,
            p,
            q,
            g: Box::new(|_, _, out| out.fill(0.0)),
            h: Box::new(|_, _, _, out| out.fill(0.0)),
            prior: Box::new(|_, _| 0.0),
            closed_form: None,
        }
    }

    pub fn g(mut self, f: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.g = Box::new(f);
        self
    }

    pub fn h(mut self, f: impl Fn(&[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        self.h = Box::new(f);
        self
    }

    pub fn prior(mut self, f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.prior = Box::new(f);
        self
    }

    pub fn closed_form(mut self, f: impl Fn(&DataMatrix, &[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.closed_form = Some(Box::new(f));
        self
    }

    pub fn data(&self) -> &DataMatrix {
        &self.data
    }
}

impl ElModel for FnModel {
    fn n_obs(&self) -> usize {
        self.data.n()
    }
    fn g_dim(&self) -> usize {
        self.g_dim
    }
    fn h_dim(&self) -> usize {
        self.h_dim
    }
    fn theta1_dim(&self) -> usize {
        self.p
    }
    fn theta2_dim(&self) -> usize {
        self.q
    }
    fn eval_g(&self, i: usize, theta1: &[f64], out: &mut [f64]) {
        (self.g)(self.data.row(i), theta1, out)
    }
    fn eval_h(&self, i: usize, theta1: &[f64], theta2: &[f64], out: &mut [f64]) {
        (self.h)(self.data.row(i), theta1, theta2, out)
    }
    fn log_prior(&self, theta1: &[f64], theta2: &[f64]) -> f64 {
        (self.prior)(theta1, theta2)
    }
    fn closed_form_theta2(&self, theta1: &[f64], nu: &[f64]) -> Option<Vec<f64>> {
        self.closed_form.as_ref().map(|f| f(&self.data, theta1, nu))
    }
}
