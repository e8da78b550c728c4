//! Max and sum aggregation of a statistic matrix, with exact null moments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nulldist::DEFAULT_KAPPA;
use crate::oracle::Exact;
use crate::paircorr::{CorrelationKind, PairStatMatrix};
use crate::scalar::{CompensatedSum, Scalar};

/// Constants of the extreme-value limit for a degenerate kernel.
///
/// The standardized max is `multiplier·(n−1)·L − 2 log N + log log N + offset`,
/// i.e. `(n−1)L/(λ₁ C(m,2)) − 2 log N − (μ₁−2) log log N + Λ/λ₁` with the
/// spectral constants already reduced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateLimitParams {
    pub multiplier: f64,
    pub offset: f64,
    pub kappa: f64,
    pub mu1: u32,
}

/// Marker for the Gaussian-type limit of ρ and τ (`L²/σ²_L − 2 log N + log log N`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GaussianLimitParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LimitParams {
    Gaussian(GaussianLimitParams),
    Degenerate(DegenerateLimitParams),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullMoments<T = f64> {
    pub kind: CorrelationKind,
    pub n: usize,
    /// Null variance of one pair statistic (ρ and τ only).
    pub var_l: Option<T>,
    /// Null second moment of one pair statistic.
    pub e2: T,
    pub limit: LimitParams,
}

impl<T: Scalar> NullMoments<T> {
    /// Replaces κ for the degenerate kinds; no effect on ρ and τ.
    pub fn with_kappa(mut self, kappa: f64) -> Self {
        if let LimitParams::Degenerate(ref mut d) = self.limit {
            d.kappa = kappa;
        }
        self
    }

    pub fn kappa(&self) -> f64 {
        match self.limit {
            LimitParams::Degenerate(d) => d.kappa,
            LimitParams::Gaussian(_) => DEFAULT_KAPPA,
        }
    }
}

/// Exact `E_{H0}[stat²]`.
pub fn e2_exact(kind: CorrelationKind, n: usize) -> Result<Exact> {
    if n < kind.min_n() {
        return Err(Error::SampleTooSmall {
            kind,
            n,
            min: kind.min_n(),
        });
    }
    let n = n as i128;
    let (num, den) = match kind {
        CorrelationKind::SpearmanRho => (1, n - 1),
        CorrelationKind::KendallTau => (2 * (2 * n + 5), 9 * n * (n - 1)),
        CorrelationKind::HoeffdingD => (
            2 * (n * n + 5 * n - 32),
            9 * n * (n - 1) * (n - 3) * (n - 4),
        ),
        CorrelationKind::BkrR => (
            2 * (n * n * n - 3 * n * n - 6 * n + 10),
            n * (n - 1) * (n - 2) * (n - 3) * (n - 4),
        ),
        CorrelationKind::BdyTauStar => (
            8 * (3 * n * n + 5 * n - 18),
            75 * n * (n - 1) * (n - 2) * (n - 3),
        ),
    };
    Ok(Exact::new(num, den))
}

fn degenerate_params(kind: CorrelationKind) -> Option<DegenerateLimitParams> {
    let pi4 = PI.powi(4);
    let multiplier = match kind {
        CorrelationKind::HoeffdingD => pi4 / 30.0,
        CorrelationKind::BkrR => pi4 / 90.0,
        CorrelationKind::BdyTauStar => pi4 / 36.0,
        _ => return None,
    };
    Some(DegenerateLimitParams {
        multiplier,
        offset: pi4 / 36.0,
        kappa: DEFAULT_KAPPA,
        mu1: 1,
    })
}

pub fn null_moments<T: Scalar>(kind: CorrelationKind, n: usize) -> Result<NullMoments<T>> {
    let e2 = e2_exact(kind, n)?;
    let e2 = T::from_ratio(*e2.numer(), *e2.denom());
    let (var_l, limit) = match degenerate_params(kind) {
        Some(d) => (None, LimitParams::Degenerate(d)),
        None => (Some(e2), LimitParams::Gaussian(GaussianLimitParams)),
    };
    Ok(NullMoments {
        kind,
        n,
        var_l,
        e2,
        limit,
    })
}

/// `max |v|` for ρ and τ, signed `max v` for the degenerate kinds.
pub fn max_stat<T: Scalar>(mat: &PairStatMatrix<T>) -> Result<T> {
    let degenerate = mat.kind.is_degenerate();
    mat.values
        .iter()
        .map(|&v| if degenerate { v } else { v.abs() })
        .reduce(T::max)
        .ok_or(Error::EmptyMatrix)
}

fn check_kind<T: Scalar>(mat: &PairStatMatrix<T>, mom: &NullMoments<T>) -> Result<()> {
    if mat.kind != mom.kind {
        return Err(Error::KindMismatch {
            matrix: mat.kind,
            moments: mom.kind,
        });
    }
    Ok(())
}

/// Transforms a max statistic onto the scale of its Gumbel-type limit.
pub fn standardize_max_value<T: Scalar>(max_value: T, pairs: usize, mom: &NullMoments<T>) -> Result<T> {
    if pairs < 2 {
        return Err(Error::InvalidArgument(format!(
            "max statistic needs at least 2 pairs, got {pairs}"
        )));
    }
    let log_n = T::c((pairs as f64).ln());
    let centering = -T::c(2.0) * log_n + log_n.ln();
    match (mom.limit, mom.var_l) {
        (LimitParams::Degenerate(d), _) => {
            let scale = T::c(d.multiplier) * T::from_usize(mom.n - 1).expect("usize representable");
            Ok(scale * max_value + centering + T::c(d.offset))
        }
        (LimitParams::Gaussian(_), Some(var_l)) => Ok(max_value * max_value / var_l + centering),
        (LimitParams::Gaussian(_), None) => Err(Error::InvalidArgument(
            "Gaussian-limit moments without a variance".into(),
        )),
    }
}

pub fn standardized_max<T: Scalar>(mat: &PairStatMatrix<T>, mom: &NullMoments<T>) -> Result<T> {
    check_kind(mat, mom)?;
    let max_value = max_stat(mat)?;
    standardize_max_value(max_value, mat.len(), mom)
}

/// `Σ (v² − E_{H0}[v²])`, row-major, compensated.
pub fn sum_stat<T: Scalar>(mat: &PairStatMatrix<T>, mom: &NullMoments<T>) -> Result<T> {
    check_kind(mat, mom)?;
    Ok(mat
        .values
        .iter()
        .map(|&v| v * v - mom.e2)
        .collect::<CompensatedSum<T>>()
        .total())
}
