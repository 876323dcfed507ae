//! Synthetic data with known structure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::io::DataMatrix;
use crate::modelselect::RegressionData;

/// `x` iid standard normal, `y = x beta_true + sigma_true * e`.
pub fn synth_regression(seed: u64, n: usize, s: usize, beta_true: &[f64], sigma_true: f64) -> Result<RegressionData> {
    if beta_true.len() != s {
        return Err(Error::Dimension(format!("{} true coefficients for {s} covariates", beta_true.len())));
    }
    if s >= n {
        return Err(Error::Dimension(format!("need fewer covariates than observations (s = {s}, n = {n})")));
    }
    if !(sigma_true >= 0.0) {
        return Err(Error::Invalid("noise sd must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n * s).map(|_| StandardNormal.sample(&mut rng)).collect();
    let y = (0..n)
        .map(|i| {
            let e: f64 = StandardNormal.sample(&mut rng);
            x[i * s..(i + 1) * s].iter().zip(beta_true).map(|(a, b)| a * b).sum::<f64>() + sigma_true * e
        })
        .collect();
    RegressionData::new(y, x, s)
}

/// Linear-Gaussian network: node `k` is the weighted sum of its parents plus
/// noise with sd `noise_sd`; nodes without parents are standard normal.
/// `edges` holds `(parent, child, weight)` with `parent < child`.
pub fn synth_dag(seed: u64, n: usize, nodes: usize, edges: &[(usize, usize, f64)], noise_sd: f64) -> Result<DataMatrix> {
    if edges.iter().any(|&(p, c, _)| p >= c || c >= nodes) {
        return Err(Error::Invalid("edges must point from earlier to later nodes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; n * nodes];
    for i in 0..n {
        for k in 0..nodes {
            let e: f64 = StandardNormal.sample(&mut rng);
            let parents: f64 = edges.iter().filter(|e| e.1 == k).map(|&(p, _, w)| w * values[i * nodes + p]).sum();
            let has_parents = edges.iter().any(|e| e.1 == k);
            values[i * nodes + k] = parents + if has_parents { noise_sd } else { 1.0 } * e;
        }
    }
    DataMatrix::new(n, nodes, values)?.with_names((1..=nodes).map(|k| format!("g{k}")).collect())
}

/// Edges of the bundled 13-node example network (0-based).
pub const EXAMPLE_EDGES: [(usize, usize, f64); 9] = [
    (0, 3, 1.0),
    (1, 4, -0.9),
    (2, 5, 0.8),
    (3, 6, 1.0),
    (0, 7, 0.9),
    (5, 8, -1.0),
    (4, 9, 0.9),
    (7, 11, 1.0),
    (9, 12, -0.8),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelselect::ols;

    #[test]
    fn zero_coefficients_give_uncorrelated_response() {
        let d = synth_regression(1, 400, 3, &[0.0; 3], 1.0).unwrap();
        let y = d.y();
        let my = y.iter().sum::<f64>() / 400.0;
        for j in 0..3 {
            let x = d.column(j);
            let mx = x.iter().sum::<f64>() / 400.0;
            let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
            let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
            let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
            assert!((sxy / (sxx * syy).sqrt()).abs() < 4.0 / 20.0);
        }
    }

    #[test]
    fn seeded_and_recoverable() {
        let a = synth_regression(2, 200, 4, &[1.0, 0.0, -0.5, 0.0], 0.3).unwrap();
        assert_eq!(a, synth_regression(2, 200, 4, &[1.0, 0.0, -0.5, 0.0], 0.3).unwrap());
        let b = ols(&a, &[true; 4]);
        // standard error about 0.3 / sqrt(200)
        for (est, truth) in b.iter().zip([1.0, 0.0, -0.5, 0.0]) {
            assert!((est - truth).abs() < 3.0 * 0.3 / 200f64.sqrt() * 1.2);
        }
        assert!(synth_regression(2, 4, 4, &[0.0; 4], 1.0).is_err());
        assert!(synth_regression(2, 10, 2, &[0.0; 3], 1.0).is_err());
    }

    #[test]
    fn network_follows_its_edges() {
        let m = synth_dag(3, 2000, 13, &EXAMPLE_EDGES, 0.3).unwrap();
        let d = RegressionData::from_matrix(&m, 3, &[0, 1, 2]).unwrap();
        let b = ols(&d, &[true, true, true]);
        assert!((b[0] - 1.0).abs() < 0.05 && b[1].abs() < 0.05 && b[2].abs() < 0.05);
        assert!(synth_dag(3, 10, 4, &[(2, 1, 1.0)], 0.3).is_err());
    }
}
