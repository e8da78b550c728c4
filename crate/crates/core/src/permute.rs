//! Permutation estimate of the null standard deviation of a sum statistic.
//!
//! Draw `b` shuffles the rows of x with a uniform permutation taken from
//! stream `b` of the plan's seed, recomputes the statistic matrix against the
//! fixed y ranks, and records the sum statistic. Marginal ranks are reused;
//! only the pairing changes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{null_moments, sum_stat};
use crate::error::{Error, Result};
use crate::nulldist::TailLaw;
use crate::paircorr::{stat_matrix, CorrelationKind};
use crate::ranks::RankedPair;
use crate::rng::{fisher_yates, substream, RNG_NAME};
use crate::scalar::{CompensatedSum, Scalar};

pub const DEFAULT_PERMUTATIONS: usize = 50;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct PermutationPlan {
    pub b_count: usize,
    pub seed: u64,
    pub rng_tag: String,
}

impl Default for PermutationPlan {
    fn default() -> Self {
        Self::new(DEFAULT_PERMUTATIONS, 0)
    }
}

impl PermutationPlan {
    pub fn new(b_count: usize, seed: u64) -> Self {
        Self {
            b_count,
            seed,
            rng_tag: RNG_NAME.to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.b_count < 2 {
            return Err(Error::TooFewPermutations(self.b_count));
        }
        Ok(())
    }

    /// Row permutation used by draw `b`.
    pub fn permutation(&self, b: usize, n: usize) -> Vec<usize> {
        fisher_yates(&mut substream(self.seed, b as u64), n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationEstimate<T = f64> {
    pub kind: CorrelationKind,
    pub sigma_hat: T,
    pub draws: Vec<T>,
    pub plan: PermutationPlan,
}

/// Unbiased sample variance, two-pass with compensated sums.
pub fn sample_variance<T: Scalar>(values: &[T]) -> T {
    let count = T::from_usize(values.len()).expect("usize representable");
    let mean = values.iter().copied().collect::<CompensatedSum<T>>().total() / count;
    let ss = values
        .iter()
        .map(|&v| (v - mean) * (v - mean))
        .collect::<CompensatedSum<T>>()
        .total();
    ss / (count - T::one())
}

pub fn permuted_sum_draws<T: Scalar>(
    ranked: &RankedPair,
    kind: CorrelationKind,
    plan: &PermutationPlan,
) -> Result<PermutationEstimate<T>> {
    plan.validate()?;
    let moments = null_moments::<T>(kind, ranked.n)?;
    let draws = (0..plan.b_count)
        .into_par_iter()
        .map(|b| {
            let perm = plan.permutation(b, ranked.n);
            let permuted = ranked.with_x_rows_permuted(&perm);
            let mat = stat_matrix::<T>(&permuted, kind)?;
            sum_stat(&mat, &moments)
        })
        .collect::<Result<Vec<T>>>()?;
    let variance = sample_variance(&draws);
    if !(variance > T::zero()) || !variance.is_finite() {
        return Err(Error::DegenerateVariance(plan.b_count));
    }
    Ok(PermutationEstimate {
        kind,
        sigma_hat: variance.sqrt(),
        draws,
        plan: plan.clone(),
    })
}

/// `s / σ̂`, or `s / (σ̂ (1 + 2/√n))` when adjusted.
pub fn sum_zscore<T: Scalar>(s: T, sigma_hat: T, adjusted: bool, n: usize) -> Result<T> {
    if !(sigma_hat > T::zero()) {
        return Err(Error::ZeroSigma);
    }
    let divisor = if adjusted {
        sigma_hat * (T::one() + T::c(2.0 / (n as f64).sqrt()))
    } else {
        sigma_hat
    };
    Ok(s / divisor)
}

/// `1 − Φ(z)` of the (possibly adjusted) z-score.
pub fn sum_pvalue<T: Scalar>(s: T, est: &PermutationEstimate<T>, adjusted: bool, n: usize) -> Result<T> {
    let z = sum_zscore(s, est.sigma_hat, adjusted, n)?;
    Ok(TailLaw::StdNormal.survival(z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranks::{rank_columns, DataPair, TiePolicy};

    fn ranked(cols_x: Vec<Vec<f64>>, cols_y: Vec<Vec<f64>>) -> RankedPair {
        rank_columns(&DataPair::from_columns(cols_x, cols_y).unwrap(), TiePolicy::Error).unwrap()
    }

    fn toy() -> RankedPair {
        ranked(
            vec![vec![0.3, 1.2, -0.5, 2.2, 0.9, -1.1, 1.7, 0.1]],
            vec![vec![1.0, 0.2, 0.7, -0.3, 2.5, 1.4, -0.8, 0.05]],
        )
    }

    #[test]
    fn plan_needs_two_draws() {
        let err = permuted_sum_draws::<f64>(&toy(), CorrelationKind::KendallTau, &PermutationPlan::new(1, 3));
        assert_eq!(err, Err(Error::TooFewPermutations(1)));
    }

    #[test]
    fn stream_prefix_property() {
        let r = toy();
        let short = permuted_sum_draws::<f64>(&r, CorrelationKind::KendallTau, &PermutationPlan::new(5, 11)).unwrap();
        let long = permuted_sum_draws::<f64>(&r, CorrelationKind::KendallTau, &PermutationPlan::new(10, 11)).unwrap();
        assert_eq!(short.draws[..], long.draws[..5]);
    }

    #[test]
    fn sigma_is_unbiased_sd_of_draws() {
        let est = permuted_sum_draws::<f64>(&toy(), CorrelationKind::SpearmanRho, &PermutationPlan::new(20, 5)).unwrap();
        let b = est.draws.len() as f64;
        let mean = est.draws.iter().sum::<f64>() / b;
        let var = est.draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (b - 1.0);
        assert!((est.sigma_hat.powi(2) - var).abs() < 1e-14);
    }

    #[test]
    fn constant_draws_are_degenerate() {
        // With n = 2 every Spearman coefficient is ±1, so S is always 0.
        let r = ranked(vec![vec![1.0, 2.0]], vec![vec![2.0, 1.0]]);
        assert_eq!(
            permuted_sum_draws::<f64>(&r, CorrelationKind::SpearmanRho, &PermutationPlan::new(2, 0)),
            Err(Error::DegenerateVariance(2))
        );
    }

    #[test]
    fn pvalue_examples() {
        let est: PermutationEstimate<f64> = PermutationEstimate {
            kind: CorrelationKind::HoeffdingD,
            sigma_hat: 2.0,
            draws: vec![],
            plan: PermutationPlan::default(),
        };
        assert_eq!(sum_pvalue(0.0, &est, false, 100).unwrap(), 0.5);
        let p = sum_pvalue(1.6448536269514722 * 2.0, &est, false, 100).unwrap();
        assert!((p - 0.05).abs() < 1e-9);
        for s in [0.1, 1.0, 5.0] {
            assert!(sum_pvalue(s, &est, true, 100).unwrap() >= sum_pvalue(s, &est, false, 100).unwrap());
        }
        let zero = PermutationEstimate { sigma_hat: 0.0, ..est };
        assert_eq!(sum_pvalue(1.0, &zero, false, 100), Err(Error::ZeroSigma));
    }
}
