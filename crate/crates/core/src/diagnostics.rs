//! Posterior summaries and convergence diagnostics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampler::Trace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub median: f64,
    pub q975: f64,
}

/// Type-7 quantile (linear interpolation between order statistics) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize_series(name: &str, xs: &[f64]) -> Result<Summary> {
    if xs.is_empty() {
        return Err(Error::EmptyTrace { length: 0, burn_in: 0 });
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Summary {
        name: name.to_string(),
        mean,
        sd,
        q025: quantile_sorted(&sorted, 0.025),
        median: quantile_sorted(&sorted, 0.5),
        q975: quantile_sorted(&sorted, 0.975),
    })
}

/// Derived scalar computed from one full row of trace columns.
pub type Derived<'a> = (&'a str, &'a dyn Fn(&[f64]) -> f64);

/// Summaries of every column of `trace` after `burn_in`, then of each derived quantity.
pub fn summarize(trace: &Trace, burn_in: usize, derived: &[Derived<'_>]) -> Result<Vec<Summary>> {
    let names = trace.column_names();
    let columns: Vec<Vec<f64>> = (0..names.len()).map(|j| trace.column(j)).collect();
    summarize_columns(&names, &columns, burn_in, derived)
}

pub fn summarize_columns(names: &[String], columns: &[Vec<f64>], burn_in: usize, derived: &[Derived<'_>]) -> Result<Vec<Summary>> {
    let length = columns.first().map_or(0, Vec::len);
    if burn_in >= length {
        return Err(Error::EmptyTrace { length, burn_in });
    }
    let mut out = Vec::with_capacity(names.len() + derived.len());
    for (name, col) in names.iter().zip(columns) {
        out.push(summarize_series(name, &col[burn_in..])?);
    }
    let mut row = vec![0.0; columns.len()];
    for (name, f) in derived {
        let values: Vec<f64> = (burn_in..length)
            .map(|t| {
                for (r, c) in row.iter_mut().zip(columns) {
                    *r = c[t];
                }
                f(&row)
            })
            .collect();
        out.push(summarize_series(name, &values)?);
    }
    Ok(out)
}

/// Aligned text table with columns Mean, SD, 2.5%, Median, 97.5%.
pub fn format_table(rows: &[Summary]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(9);
    let mut s = format!("{:<width$} {:>12} {:>12} {:>12} {:>12} {:>12}\n", "parameter", "Mean", "SD", "2.5%", "Median", "97.5%");
    for r in rows {
        s.push_str(&format!(
            "{:<width$} {:>12.4} {:>12.4} {:>12.4} {:>12.4} {:>12.4}\n",
            r.name, r.mean, r.sd, r.q025, r.median, r.q975
        ));
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeidelbergerWelch {
    pub stationary: bool,
    /// Fraction of the series kept after discarding the initial segment.
    pub kept_fraction: f64,
    /// Index of the first kept sample.
    pub start: usize,
    pub pvalue: f64,
    pub halfwidth_ok: bool,
    pub mean: f64,
    pub halfwidth: f64,
}

/// Heidelberger-Welch stationarity and half-width test.
///
/// The spectral density at zero of the second half of the series
/// standardises the Cramer-von Mises statistic of the centred partial sums.
/// The first 0%, 10%, ..., 50% are discarded in turn until the test passes
/// at level `alpha`; the half-width test then compares the 95% half-width of
/// the mean of the kept segment to `eps` times the mean.
pub fn heidelberger_welch(series: &[f64], alpha: f64, eps: f64) -> Result<HeidelbergerWelch> {
    let n_full = series.len();
    if n_full < 100 {
        return Err(Error::TooShort { needed: 100, got: n_full });
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("diagnostic series".into()));
    }
    let first = series[0];
    if series.iter().all(|&x| x == first) {
        return Ok(HeidelbergerWelch {
            stationary: true,
            kept_fraction: 1.0,
            start: 0,
            pvalue: 1.0,
            halfwidth_ok: true,
            mean: first,
            halfwidth: 0.0,
        });
    }
    let s0 = spectrum0(&series[n_full / 2..]);
    let step = n_full / 10;
    let mut start = 0;
    let mut pvalue = 0.0;
    let mut stationary = false;
    for k in 0..=5 {
        start = k * step;
        let y = &series[start..];
        let n = y.len() as f64;
        let ybar = y.iter().sum::<f64>() / n;
        let mut b = 0.0;
        let mut stat = 0.0;
        for (i, &v) in y.iter().enumerate() {
            b += v;
            let bridge = b - ybar * (i + 1) as f64;
            stat += bridge * bridge;
        }
        stat /= n * n * s0;
        pvalue = 1.0 - cramer_von_mises_cdf(stat);
        if pvalue > alpha {
            stationary = true;
            break;
        }
    }
    let kept = &series[start..];
    let n = kept.len() as f64;
    let mean = kept.iter().sum::<f64>() / n;
    let halfwidth = 1.96 * (spectrum0(kept) / n).sqrt();
    Ok(HeidelbergerWelch {
        stationary,
        kept_fraction: n / n_full as f64,
        start,
        pvalue,
        halfwidth_ok: stationary && (halfwidth / mean).abs() <= eps,
        mean,
        halfwidth,
    })
}

/// Spectral density at frequency zero (variance of the mean times length).
///
/// Fits a gamma GLM with log link, linear in frequency, to the first
/// `0.5 sqrt(n)` periodogram ordinates (at least 4) and extrapolates to zero.
pub fn spectrum0(series: &[f64]) -> f64 {
    let n = series.len();
    let nf = n as f64;
    let mean = series.iter().sum::<f64>() / nf;
    let k_max = ((0.5 * nf.sqrt()).floor() as usize).max(4).min(n / 2);
    let mut freq = Vec::with_capacity(k_max);
    let mut spec = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let w = 2.0 * std::f64::consts::PI * k as f64 / nf;
        let (mut re, mut im) = (0.0, 0.0);
        // rotate by the fixed angle instead of calling sin/cos per sample
        let (cw, sw) = (w.cos(), w.sin());
        let (mut c, mut s) = (1.0_f64, 0.0_f64);
        for (t, &x) in series.iter().enumerate() {
            let d = x - mean;
            re += d * c;
            im -= d * s;
            let c_next = c * cw - s * sw;
            s = s * cw + c * sw;
            c = c_next;
            if t % 1024 == 1023 {
                // renormalise accumulated rounding in the rotation
                let r = (c * c + s * s).sqrt();
                c /= r;
                s /= r;
            }
        }
        freq.push(k as f64 / nf);
        spec.push((re * re + im * im) / nf);
    }
    if spec.iter().all(|&p| p == 0.0) {
        return 0.0;
    }
    let floor = spec.iter().cloned().fold(f64::INFINITY, |a, b| if b > 0.0 { a.min(b) } else { a });
    let y: Vec<f64> = spec.iter().map(|&p| p.max(floor)).collect();
    let (a, _) = gamma_log_glm(&freq, &y);
    a.exp()
}

/// IRLS for `E[y] = exp(a + b x)` with gamma variance; the working weights are 1.
fn gamma_log_glm(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let xbar = x.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - xbar).powi(2)).sum();
    let mut eta: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mut a, mut b) = (0.0, 0.0);
    for _ in 0..100 {
        let z: Vec<f64> = eta.iter().zip(y).map(|(&e, &v)| e + (v - e.exp()) / e.exp()).collect();
        let zbar = z.iter().sum::<f64>() / n;
        let sxz: f64 = x.iter().zip(&z).map(|(xi, zi)| (xi - xbar) * (zi - zbar)).sum();
        let b_new = sxz / sxx;
        let a_new = zbar - b_new * xbar;
        let done = (a_new - a).abs() < 1e-12 * (1.0 + a.abs()) && (b_new - b).abs() < 1e-12 * (1.0 + b.abs());
        a = a_new;
        b = b_new;
        for (e, xi) in eta.iter_mut().zip(x) {
            *e = a + b * xi;
        }
        if done {
            break;
        }
    }
    (a, b)
}

/// Modified Bessel function of the second kind times `exp(u)`, by quadrature
/// of `int_0^inf exp(-u (cosh t - 1)) cosh(nu t) dt`.
fn scaled_bessel_k(nu: f64, u: f64) -> f64 {
    // integrand below exp(-60) past t_max
    let t_max = (1.0 + 60.0 / u).acosh() + 1.0;
    let steps = 4000;
    let h = t_max / steps as f64;
    let f = |t: f64| (-u * (t.cosh() - 1.0)).exp() * (nu * t).cosh();
    let mut s = 0.5 * (f(0.0) + f(t_max));
    for i in 1..steps {
        s += f(i as f64 * h);
    }
    s * h
}

/// Limiting distribution function of the Cramer-von Mises statistic of a
/// Brownian bridge, four-term series.
pub fn cramer_von_mises_cdf(q: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let pi32 = std::f64::consts::PI.powf(1.5);
    let mut total = 0.0;
    for k in 0..4 {
        let kf = k as f64;
        let u = (4.0 * kf + 1.0).powi(2) / (16.0 * q);
        if u > 1e-5_f64.ln().abs() {
            continue;
        }
        let z = (statrs::function::gamma::ln_gamma(kf + 0.5) - statrs::function::gamma::ln_gamma(kf + 1.0)).exp()
            * (4.0 * kf + 1.0).sqrt()
            / (pi32 * q.sqrt());
        // exp(-u) K(u) = exp(-2u) * (exp(u) K(u))
        total += z * (-2.0 * u).exp() * scaled_bessel_k(0.25, u);
    }
    total
}

/// Effective sample size from Geyer's initial positive sequence.
pub fn ess(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 10 {
        return Err(Error::TooShort { needed: 10, got: n });
    }
    let nf = n as f64;
    let mean = series.iter().sum::<f64>() / nf;
    let c0 = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / nf;
    if c0 == 0.0 {
        return Ok(nf);
    }
    let rho = |lag: usize| -> f64 {
        let mut s = 0.0;
        for t in 0..n - lag {
            s += (series[t] - mean) * (series[t + lag] - mean);
        }
        s / nf / c0
    };
    let mut sum = 0.0;
    let mut k = 0;
    while 2 * k + 1 < n {
        let gamma = rho(2 * k) + rho(2 * k + 1);
        if gamma <= 0.0 {
            break;
        }
        sum += gamma;
        k += 1;
    }
    let tau = -1.0 + 2.0 * sum;
    if tau <= 0.0 {
        return Ok(nf);
    }
    Ok((nf / tau).min(nf))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub overall: f64,
    pub by_move: BTreeMap<String, f64>,
}

/// Acceptance rates overall and per move label.
pub fn acceptance_report<S: AsRef<str>>(moves: &[S], accepted: &[bool]) -> AcceptanceReport {
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for (m, &a) in moves.iter().zip(accepted) {
        let e = counts.entry(m.as_ref().to_string()).or_default();
        e.0 += usize::from(a);
        e.1 += 1;
    }
    let total = accepted.len();
    let overall = if total == 0 { 0.0 } else { accepted.iter().filter(|&&a| a).count() as f64 / total as f64 };
    let by_move = counts.into_iter().map(|(k, (a, t))| (k, a as f64 / t as f64)).collect();
    AcceptanceReport { overall, by_move }
}
