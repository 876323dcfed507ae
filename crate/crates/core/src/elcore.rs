//! Empirical likelihood for a fixed constraint matrix.
//!
//! Given rows `c_1, ..., c_n` the empirical likelihood is
//! `max prod w_i` over the probability simplex subject to `sum w_i c_i = 0`.
//! The problem is solved through its Lagrangian dual: the optimal weights are
//! `w_i = 1 / (n (1 + lambda' c_i))`, where `lambda` minimises
//! `-sum log*(1 + lambda' c_i)` and `log*` is Owen's quadratic extension of
//! the logarithm below `1/n`. The extension keeps the dual objective finite
//! everywhere, so damped Newton can run from `lambda = 0` without a domain
//! check. When the origin is outside the convex hull of the rows the dual is
//! unbounded and `lambda` diverges; that is how infeasibility is detected.

use crate::error::{Error, Result};

/// `n x m` matrix of per-observation estimating-function values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintMatrix {
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl ConstraintMatrix {
    pub fn new(n: usize, m: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("constraint matrix has no rows".into()));
        }
        if values.len() != n * m {
            return Err(Error::Dimension(format!(
                "expected {} values for a {n}x{m} matrix, got {}",
                n * m,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("constraint matrix".into()));
        }
        Ok(Self { n, m, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Dimension("ragged constraint rows".into()));
        }
        Self::new(n, m, rows.concat())
    }

    /// Single-column matrix.
    pub fn from_column(col: &[f64]) -> Result<Self> {
        Self::new(col.len(), 1, col.to_vec())
    }

    /// `n x 0` matrix: no constraints beyond the simplex.
    pub fn unconstrained(n: usize) -> Result<Self> {
        Self::new(n, 0, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.values[i * self.m + j]).collect()
    }

    /// Keep the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&c| c >= self.m) {
            return Err(Error::Dimension(format!("column {bad} out of range (m = {})", self.m)));
        }
        let mut values = Vec::with_capacity(self.n * cols.len());
        for i in 0..self.n {
            let row = self.row(i);
            values.extend(cols.iter().map(|&c| row[c]));
        }
        Self::new(self.n, cols.len(), values)
    }

    pub fn append_column(&self, col: &[f64]) -> Result<Self> {
        if col.len() != self.n {
            return Err(Error::Dimension(format!(
                "appended column has length {}, expected {}",
                col.len(),
                self.n
            )));
        }
        let mut values = Vec::with_capacity(self.n * (self.m + 1));
        for (i, &c) in col.iter().enumerate() {
            values.extend_from_slice(self.row(i));
            values.push(c);
        }
        Self::new(self.n, self.m + 1, values)
    }

    /// Weighted column sums `sum_i w_i c_i`.
    pub fn weighted_column_sums(&self, weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (i, &w) in weights.iter().enumerate().take(self.n) {
            for (o, &c) in out.iter_mut().zip(self.row(i)) {
                *o += w * c;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Convergence threshold on the infinity norm of the dual gradient.
    pub grad_tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Multipliers larger than this (infinity norm) mean the dual diverged.
    pub lambda_cap: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { grad_tol: 1e-8, max_iter: 200, max_halvings: 30, lambda_cap: 1e8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElSolution {
    pub feasible: bool,
    /// Optimal simplex weights; `None` when infeasible.
    pub weights: Option<Vec<f64>>,
    /// `sum log w_i`, or `-inf` when infeasible.
    pub log_el: f64,
    /// Lagrange multipliers of the moment constraints (last iterate when infeasible).
    pub multipliers: Vec<f64>,
    pub iterations: usize,
    pub grad_norm: f64,
}

impl ElSolution {
    fn infeasible(multipliers: Vec<f64>, iterations: usize, grad_norm: f64) -> Self {
        Self {
            feasible: false,
            weights: None,
            log_el: f64::NEG_INFINITY,
            multipliers,
            iterations,
            grad_norm,
        }
    }

    fn uniform(n: usize, m: usize) -> Self {
        let nf = n as f64;
        Self {
            feasible: true,
            weights: Some(vec![1.0 / nf; n]),
            log_el: -nf * nf.ln(),
            multipliers: vec![0.0; m],
            iterations: 0,
            grad_norm: 0.0,
        }
    }
}

/// Owen's pseudo-logarithm: `ln z` for `z >= eps`, quadratic below.
/// Returns `(log*, d/dz, d2/dz2)`.
#[inline]
fn log_star(z: f64, eps: f64) -> (f64, f64, f64) {
    if z >= eps {
        (z.ln(), 1.0 / z, -1.0 / (z * z))
    } else {
        let r = z / eps;
        (eps.ln() - 1.5 + 2.0 * r - 0.5 * r * r, (2.0 - r) / eps, -1.0 / (eps * eps))
    }
}

/// Compressed-row copy of the nonzero pattern plus the envelope of the
/// dual Hessian. Block-structured constraint sets (one block of columns per
/// group of rows plus a few shared columns) factor in near-linear time.
struct Pattern {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    /// First column of the lower-triangle envelope in each Hessian row.
    first: Vec<usize>,
    /// Start of each Hessian row in envelope storage; the last entry is the total size.
    offset: Vec<usize>,
}

impl Pattern {
    fn new(c: &ConstraintMatrix) -> Self {
        let (n, m) = (c.n(), c.m());
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut first: Vec<usize> = (0..m).collect();
        row_ptr.push(0);
        for i in 0..n {
            let start = cols.len();
            for (j, &v) in c.row(i).iter().enumerate() {
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            if let Some(&lo) = cols[start..].first() {
                for &j in &cols[start..] {
                    first[j] = first[j].min(lo);
                }
            }
            row_ptr.push(cols.len());
        }
        let mut offset = Vec::with_capacity(m + 1);
        offset.push(0);
        for (j, &f) in first.iter().enumerate() {
            offset.push(offset[j] + j - f + 1);
        }
        Self { row_ptr, cols, vals, first, offset }
    }

    /// Envelope index of Hessian entry `(i, j)`, `first[i] <= j <= i`.
    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        self.offset[i] + j - self.first[i]
    }

    fn envelope_size(&self) -> usize {
        self.offset[self.offset.len() - 1]
    }

    fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    fn n(&self) -> usize {
        self.row_ptr.len() - 1
    }
}

/// Dual objective `-sum log*(z_i)`, its gradient and the `z_i`.
fn evaluate(pat: &Pattern, lambda: &[f64], eps: f64, z: &mut [f64], grad: &mut [f64]) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut f = 0.0;
    for (i, zi) in z.iter_mut().enumerate().take(pat.n()) {
        let (cols, vals) = pat.row(i);
        let mut s = 1.0;
        for (&j, &v) in cols.iter().zip(vals) {
            s += lambda[j] * v;
        }
        *zi = s;
        let (ls, d1, _) = log_star(s, eps);
        f -= ls;
        for (&j, &v) in cols.iter().zip(vals) {
            grad[j] -= d1 * v;
        }
    }
    f
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |a, &b| a.max(b.abs()))
}

/// Solve `H d = -grad` for the Newton direction, where
/// `H = -sum psi''(z_i) c_i c_i'` is assembled on the envelope and factored
/// by Cholesky. Near-zero pivots are lifted to keep the factor defined
/// (degenerate columns, e.g. all-zero, get a zero step).
fn newton_direction(pat: &Pattern, z: &[f64], eps: f64, grad: &[f64], h: &mut [f64], out: &mut [f64]) {
    let m = grad.len();
    h.iter_mut().for_each(|x| *x = 0.0);
    for (i, &zi) in z.iter().enumerate() {
        let (cols, vals) = pat.row(i);
        let (_, _, d2) = log_star(zi, eps);
        let s = -d2;
        for p in 0..cols.len() {
            let a = cols[p];
            let sa = s * vals[p];
            for q in 0..=p {
                h[pat.at(a, cols[q])] += sa * vals[q];
            }
        }
    }
    let first = &pat.first;
    let scale = (0..m).fold(0.0_f64, |acc, j| acc.max(h[pat.at(j, j)]));
    let floor = 1e-13 * scale + f64::MIN_POSITIVE;
    // row-wise envelope Cholesky in place: h becomes L
    for i in 0..m {
        let fi = first[i];
        let oi = pat.offset[i] - fi;
        for j in fi..i {
            let fj = first[j];
            let oj = pat.offset[j] - fj;
            let mut s = h[oi + j];
            for k in fi.max(fj)..j {
                s -= h[oi + k] * h[oj + k];
            }
            h[oi + j] = s / h[oj + j];
        }
        let mut d = h[oi + i];
        for k in fi..i {
            d -= h[oi + k] * h[oi + k];
        }
        h[oi + i] = d.max(floor).sqrt();
    }
    for i in 0..m {
        let oi = pat.offset[i] - first[i];
        let mut s = -grad[i];
        for k in first[i]..i {
            s -= h[oi + k] * out[k];
        }
        out[i] = s / h[oi + i];
    }
    for i in (0..m).rev() {
        let oi = pat.offset[i] - first[i];
        out[i] /= h[oi + i];
        let xi = out[i];
        for k in first[i]..i {
            out[k] -= h[oi + k] * xi;
        }
    }
}

/// Full Newton steps past the tolerance while they keep shrinking the
/// gradient; near the optimum each one roughly squares the error.
#[allow(clippy::too_many_arguments)]
fn polish(
    pat: &Pattern,
    eps: f64,
    lambda: &mut Vec<f64>,
    z: &mut Vec<f64>,
    grad: &mut Vec<f64>,
    gnorm: &mut f64,
    h: &mut [f64],
    dir: &mut [f64],
) {
    let mut trial = vec![0.0; lambda.len()];
    let mut z_trial = vec![0.0; z.len()];
    let mut grad_trial = vec![0.0; grad.len()];
    for _ in 0..3 {
        newton_direction(pat, z, eps, grad, h, dir);
        for ((tr, &l), &d) in trial.iter_mut().zip(lambda.iter()).zip(dir.iter()) {
            *tr = l + d;
        }
        evaluate(pat, &trial, eps, &mut z_trial, &mut grad_trial);
        let g_trial = inf_norm(&grad_trial);
        if !(g_trial < *gnorm) {
            return;
        }
        std::mem::swap(lambda, &mut trial);
        std::mem::swap(z, &mut z_trial);
        std::mem::swap(grad, &mut grad_trial);
        *gnorm = g_trial;
    }
}

/// Maximise `prod w_i` over the simplex subject to `sum w_i c_i = 0`.
///
/// Infeasibility (origin not in the interior of the convex hull of the rows)
/// is a valid result with `feasible == false` and `log_el == -inf`.
pub fn solve_el(c: &ConstraintMatrix, opts: &SolverOptions) -> Result<ElSolution> {
    let (n, m) = (c.n(), c.m());
    if m >= n {
        return Err(Error::Dimension(format!("need m < n for the EL problem, got n = {n}, m = {m}")));
    }
    if m == 0 {
        return Ok(ElSolution::uniform(n, 0));
    }
    if m == 1 && !hull_contains_origin_1d(&c.column(0)) {
        return Ok(ElSolution::infeasible(vec![0.0], 0, f64::NAN));
    }

    let pat = Pattern::new(c);
    let eps = 1.0 / n as f64;
    let mut lambda = vec![0.0; m];
    let mut z = vec![0.0; n];
    let mut grad = vec![0.0; m];
    let mut f = evaluate(&pat, &lambda, eps, &mut z, &mut grad);
    let mut gnorm = inf_norm(&grad);

    let mut h = vec![0.0; pat.envelope_size()];
    let mut dir = vec![0.0; m];
    let mut trial = vec![0.0; m];
    let mut z_trial = vec![0.0; n];
    let mut grad_trial = vec![0.0; m];

    let mut converged = false;
    let mut diverged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        if gnorm <= opts.grad_tol {
            converged = true;
            polish(&pat, eps, &mut lambda, &mut z, &mut grad, &mut gnorm, &mut h, &mut dir);
            break;
        }
        iterations += 1;
        newton_direction(&pat, &z, eps, &grad, &mut h, &mut dir);

        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            for ((tr, &l), &d) in trial.iter_mut().zip(&lambda).zip(&dir) {
                *tr = l + t * d;
            }
            let f_trial = evaluate(&pat, &trial, eps, &mut z_trial, &mut grad_trial);
            let g_trial = inf_norm(&grad_trial);
            // near the optimum f stops resolving decreases; fall back to the gradient
            let flat = f_trial <= f + 1e-13 * (1.0 + f.abs()) && g_trial < gnorm;
            if f_trial < f || flat {
                std::mem::swap(&mut lambda, &mut trial);
                std::mem::swap(&mut z, &mut z_trial);
                std::mem::swap(&mut grad, &mut grad_trial);
                f = f_trial;
                gnorm = g_trial;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        if inf_norm(&lambda) > opts.lambda_cap {
            diverged = true;
            break;
        }
    }
    if !converged && gnorm <= opts.grad_tol {
        converged = true;
    }

    if diverged || !converged || z.iter().any(|&zi| zi < eps) {
        return Ok(ElSolution::infeasible(lambda, iterations, gnorm));
    }

    let nf = n as f64;
    let weights: Vec<f64> = z.iter().map(|&zi| 1.0 / (nf * zi)).collect();
    let log_el = -nf * nf.ln() - z.iter().map(|zi| zi.ln()).sum::<f64>();
    Ok(ElSolution {
        feasible: true,
        weights: Some(weights),
        log_el,
        multipliers: lambda,
        iterations,
        grad_norm: gnorm,
    })
}

/// One-dimensional hull test: the origin is interior iff the values change
/// sign. An identically zero column constrains nothing and counts as feasible
/// (the origin is in the relative interior of the degenerate hull).
fn hull_contains_origin_1d(col: &[f64]) -> bool {
    let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo < 0.0 && hi > 0.0) || (lo == 0.0 && hi == 0.0)
}

/// Whether the origin lies in the interior of the convex hull of the rows.
///
/// Exact for `m <= 1`; otherwise decided by the dual solver's divergence test.
pub fn check_feasibility(c: &ConstraintMatrix) -> Result<bool> {
    match c.m() {
        _ if c.m() >= c.n() => Err(Error::Dimension(format!(
            "need m < n for the EL problem, got n = {}, m = {}",
            c.n(),
            c.m()
        ))),
        0 => Ok(true),
        1 => Ok(hull_contains_origin_1d(&c.column(0))),
        _ => Ok(solve_el(c, &SolverOptions::default())?.feasible),
    }
}
