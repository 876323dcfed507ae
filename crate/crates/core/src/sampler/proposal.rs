//! Proposal densities for the two sampler stages.

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Proposal for `theta1`, optionally restricted to a block of coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Proposal1 {
    /// `theta1' = theta1 + scales * z`.
    GaussianRandomWalk { scales: Vec<f64> },
    /// `theta1' = center + scales * z`, independent of the current value.
    IndependentGaussian { center: Vec<f64>, scales: Vec<f64> },
}

impl Proposal1 {
    pub fn random_walk(scales: Vec<f64>) -> Self {
        Proposal1::GaussianRandomWalk { scales }
    }

    pub fn scales(&self) -> &[f64] {
        match self {
            Proposal1::GaussianRandomWalk { scales } | Proposal1::IndependentGaussian { scales, .. } => scales,
        }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        let scales = self.scales();
        if scales.len() != p {
            return Err(Error::Dimension(format!("q1 has {} scales, theta1 has {p} entries", scales.len())));
        }
        if scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Invalid("q1 scales must be positive".into()));
        }
        if let Proposal1::IndependentGaussian { center, .. } = self {
            if center.len() != p {
                return Err(Error::Dimension(format!("q1 center has {} entries, expected {p}", center.len())));
            }
        }
        Ok(())
    }

    fn center_of(&self, current: &[f64], k: usize) -> f64 {
        match self {
            Proposal1::GaussianRandomWalk { .. } => current[k],
            Proposal1::IndependentGaussian { center, .. } => center[k],
        }
    }

    /// Draw a new `theta1`; coordinates outside `block` are copied.
    pub fn sample<R: Rng + ?Sized>(&self, current: &[f64], block: Option<&[usize]>, rng: &mut R) -> Vec<f64> {
        let mut out = current.to_vec();
        let scales = self.scales();
        let mut draw = |k: usize| {
            let z: f64 = StandardNormal.sample(rng);
            out[k] = self.center_of(current, k) + scales[k] * z;
        };
        match block {
            Some(idx) => idx.iter().for_each(|&k| draw(k)),
            None => (0..current.len()).for_each(draw),
        }
        out
    }

    /// `log q1(to | from)` over the updated coordinates.
    pub fn log_density(&self, to: &[f64], from: &[f64], block: Option<&[usize]>) -> f64 {
        let scales = self.scales();
        let term = |k: usize| {
            let z = (to[k] - self.center_of(from, k)) / scales[k];
            -LN_SQRT_2PI - scales[k].ln() - 0.5 * z * z
        };
        match block {
            Some(idx) => idx.iter().map(|&k| term(k)).sum(),
            None => (0..to.len()).map(term).sum(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        matches!(self, Proposal1::GaussianRandomWalk { .. })
    }
}

/// Proposal for `theta2`, centred at the conditional EL maximiser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Proposal2 {
    GaussianAtMcele { scales: Vec<f64> },
    /// Independent normals truncated below at `lower_bounds` (use `-inf`
    /// for an untruncated coordinate); densities include the tail-mass normaliser.
    TruncatedNormalAtMcele { scales: Vec<f64>, lower_bounds: Vec<f64> },
}

impl Proposal2 {
    pub fn scales(&self) -> &[f64] {
        match self {
            Proposal2::GaussianAtMcele { scales } | Proposal2::TruncatedNormalAtMcele { scales, .. } => scales,
        }
    }

    pub fn validate(&self, q: usize) -> Result<()> {
        let scales = self.scales();
        if scales.len() != q {
            return Err(Error::Dimension(format!("q2 has {} scales, theta2 has {q} entries", scales.len())));
        }
        if scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Invalid("q2 scales must be positive".into()));
        }
        if let Proposal2::TruncatedNormalAtMcele { lower_bounds, .. } = self {
            if lower_bounds.len() != q {
                return Err(Error::Dimension(format!("q2 has {} lower bounds, expected {q}", lower_bounds.len())));
            }
            if lower_bounds.iter().any(|b| b.is_nan() || *b == f64::INFINITY) {
                return Err(Error::Invalid("q2 lower bounds must be finite or -inf".into()));
            }
        }
        Ok(())
    }

    fn lower(&self, k: usize) -> f64 {
        match self {
            Proposal2::GaussianAtMcele { .. } => f64::NEG_INFINITY,
            Proposal2::TruncatedNormalAtMcele { lower_bounds, .. } => lower_bounds[k],
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, center: &[f64], rng: &mut R) -> Vec<f64> {
        let scales = self.scales();
        (0..center.len())
            .map(|k| {
                let lo = self.lower(k);
                if lo == f64::NEG_INFINITY {
                    let z: f64 = StandardNormal.sample(rng);
                    center[k] + scales[k] * z
                } else {
                    center[k] + scales[k] * sample_std_normal_above(rng, (lo - center[k]) / scales[k])
                }
            })
            .collect()
    }

    /// `log q2(x | center)`; `-inf` below a truncation point.
    pub fn log_density(&self, x: &[f64], center: &[f64]) -> f64 {
        let scales = self.scales();
        (0..x.len())
            .map(|k| {
                let z = (x[k] - center[k]) / scales[k];
                let base = -LN_SQRT_2PI - scales[k].ln() - 0.5 * z * z;
                let lo = self.lower(k);
                if lo == f64::NEG_INFINITY {
                    base
                } else if x[k] < lo {
                    f64::NEG_INFINITY
                } else {
                    base - ln_upper_tail((lo - center[k]) / scales[k])
                }
            })
            .sum()
    }
}

/// `ln P(Z > a)` for standard normal `Z`, accurate far into the tail.
pub fn ln_upper_tail(a: f64) -> f64 {
    if a < 30.0 {
        (0.5 * erfc(a / std::f64::consts::SQRT_2)).ln()
    } else {
        // Mills ratio expansion
        let a2 = a * a;
        -LN_SQRT_2PI - 0.5 * a2 - a.ln() + (1.0 - 1.0 / a2 + 3.0 / (a2 * a2)).ln()
    }
}

/// Standard normal conditioned on `Z > a`.
fn sample_std_normal_above<R: Rng + ?Sized>(rng: &mut R, a: f64) -> f64 {
    if a <= 0.0 {
        loop {
            let z: f64 = StandardNormal.sample(rng);
            if z > a {
                return z;
            }
        }
    }
    // exponential rejection with the optimal rate
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    let exp = Exp::new(rate).expect("positive rate");
    loop {
        let z = a + exp.sample(rng);
        let u: f64 = rng.random();
        if u.ln() <= -0.5 * (z - rate) * (z - rate) {
            return z;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn truncated_density_integrates_to_one() {
        for (center, lo) in [(1.0_f64, 0.0), (-2.0, 0.0), (0.0, -0.5), (-12.0, 0.0)] {
            let q2 = Proposal2::TruncatedNormalAtMcele { scales: vec![1.5], lower_bounds: vec![lo] };
            let steps = 200_000;
            let hi = center.max(lo) + 20.0;
            let h = (hi - lo) / steps as f64;
            let mass: f64 = (0..steps)
                .map(|i| q2.log_density(&[lo + (i as f64 + 0.5) * h], &[center]).exp() * h)
                .sum();
            assert!((mass - 1.0).abs() < 1e-6, "center {center}: {mass}");
        }
    }

    #[test]
    fn tail_log_mass_is_continuous_at_the_switch() {
        let below = ln_upper_tail(30.0 - 1e-9);
        let above = ln_upper_tail(30.0);
        assert!((below - above).abs() < 1e-6);
    }

    #[test]
    fn truncated_sampler_matches_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for a in [-1.0, 0.5, 3.0] {
            let draws: Vec<f64> = (0..200_000).map(|_| sample_std_normal_above(&mut rng, a)).collect();
            assert!(draws.iter().all(|&z| z > a));
            let mean = draws.iter().sum::<f64>() / draws.len() as f64;
            // E[Z | Z > a] = phi(a) / (1 - Phi(a))
            let expected = (-LN_SQRT_2PI - 0.5 * a * a - ln_upper_tail(a)).exp();
            assert!((mean - expected).abs() < 0.01, "a {a}: {mean} vs {expected}");
        }
    }

    #[test]
    fn block_proposal_leaves_other_coordinates() {
        let q1 = Proposal1::random_walk(vec![1.0, 1.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = q1.sample(&[1.0, 2.0, 3.0], Some(&[1]), &mut rng);
        assert_eq!(out[0], 1.0);
        assert_eq!(out[2], 3.0);
        assert_ne!(out[1], 2.0);
        let fwd = q1.log_density(&out, &[1.0, 2.0, 3.0], Some(&[1]));
        let rev = q1.log_density(&[1.0, 2.0, 3.0], &out, Some(&[1]));
        assert_eq!(fwd, rev);
    }

    #[test]
    fn validation() {
        assert!(Proposal1::random_walk(vec![0.0]).validate(1).is_err());
        assert!(Proposal1::random_walk(vec![1.0]).validate(2).is_err());
        let q2 = Proposal2::TruncatedNormalAtMcele { scales: vec![1.0], lower_bounds: vec![] };
        assert!(q2.validate(1).is_err());
        let json = r#"{"kind":"truncated_normal_at_mcele","scales":[5.0],"lower_bounds":[0.0]}"#;
        let parsed: Proposal2 = serde_json::from_str(json).unwrap();
        assert!(parsed.validate(1).is_ok());
    }
}
