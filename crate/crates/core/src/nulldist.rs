//! Limit laws, critical values and p-values.
//!
//! Max statistics of Spearman's ρ and Kendall's τ are calibrated against
//! `G(y) = exp(−π^{−1/2} e^{−y/2})`; those of the degenerate kernels against
//! `L^h(y) = exp(−κ/√π · e^{−y/2})` (largest eigenvalue of multiplicity one,
//! so `Γ(μ₁/2) = √π`). Sum statistics are standard normal and the max-sum
//! combination is χ² with four degrees of freedom.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paircorr::CorrelationKind;
use crate::scalar::Scalar;

/// `κ ≈ 2.467` as tabulated for D, R and τ*.
pub const DEFAULT_KAPPA: f64 = 2.467;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum TailLaw {
    GumbelPi,
    GumbelKappa(f64),
    StdNormal,
    ChiSq4,
}

impl TailLaw {
    /// Law of the standardized max statistic for `kind`.
    pub fn for_max(kind: CorrelationKind, kappa: f64) -> TailLaw {
        if kind.is_degenerate() {
            TailLaw::GumbelKappa(kappa)
        } else {
            TailLaw::GumbelPi
        }
    }

    pub fn cdf<T: Scalar>(self, y: T) -> T {
        let half = T::c(0.5);
        match self {
            TailLaw::GumbelPi => (-(T::c(PI).sqrt().recip()) * (-y * half).exp()).exp(),
            TailLaw::GumbelKappa(kappa) => (-(T::c(kappa / PI.sqrt())) * (-y * half).exp()).exp(),
            TailLaw::StdNormal => half * (-y / T::c(std::f64::consts::SQRT_2)).erfc(),
            TailLaw::ChiSq4 => {
                if y <= T::zero() {
                    T::zero()
                } else {
                    T::one() - chi4_survival(y)
                }
            }
        }
    }

    /// `1 − cdf(y)`, computed without cancellation where a closed form allows it.
    pub fn survival<T: Scalar>(self, y: T) -> T {
        let half = T::c(0.5);
        match self {
            TailLaw::GumbelPi => -(-(T::c(PI).sqrt().recip()) * (-y * half).exp()).exp_m1(),
            TailLaw::GumbelKappa(kappa) => -(-(T::c(kappa / PI.sqrt())) * (-y * half).exp()).exp_m1(),
            TailLaw::StdNormal => half * (y / T::c(std::f64::consts::SQRT_2)).erfc(),
            TailLaw::ChiSq4 => {
                if y <= T::zero() {
                    T::one()
                } else {
                    chi4_survival(y)
                }
            }
        }
    }
}

fn chi4_survival<T: Scalar>(y: T) -> T {
    let h = y * T::c(0.5);
    (-h).exp() * (T::one() + h)
}

/// Standard normal CDF.
pub fn normal_cdf<T: Scalar>(z: T) -> T {
    TailLaw::StdNormal.cdf(z)
}

pub fn cdf<T: Scalar>(law: TailLaw, y: T) -> T {
    law.cdf(y)
}

/// p-value of a standardized max statistic, with the default κ.
pub fn max_pvalue<T: Scalar>(kind: CorrelationKind, std_max: T) -> T {
    max_pvalue_with_kappa(kind, std_max, DEFAULT_KAPPA)
}

pub fn max_pvalue_with_kappa<T: Scalar>(kind: CorrelationKind, std_max: T, kappa: f64) -> T {
    TailLaw::for_max(kind, kappa).survival(std_max)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// `−2 log log (1−α)^{−1}`, the α-dependent part of both Gumbel quantiles.
fn gumbel_level_term(alpha: f64) -> f64 {
    -2.0 * (-(-alpha).ln_1p()).ln()
}

/// Upper-α critical value of the standardized max statistic, default κ.
pub fn max_critical(kind: CorrelationKind, alpha: f64) -> Result<f64> {
    max_critical_with_kappa(kind, alpha, DEFAULT_KAPPA)
}

/// `q_α = −log π − 2 log log (1−α)^{−1}` for ρ and τ;
/// `l_α = log(κ²/π) − 2 log log (1−α)^{−1}` for D, R and τ*.
pub fn max_critical_with_kappa(kind: CorrelationKind, alpha: f64, kappa: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let base = if kind.is_degenerate() {
        (kappa * kappa / PI).ln()
    } else {
        -PI.ln()
    };
    Ok(base + gumbel_level_term(alpha))
}

/// Bisection for the point where a decreasing function crosses `target`.
fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `w_α` with `P(χ²₄ > w_α) = α`.
pub fn chi4_upper_quantile(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(bisect_decreasing(
        |w| TailLaw::ChiSq4.survival(w),
        alpha,
        0.0,
        2000.0,
        1e-12,
    ))
}

/// `z_α` with `1 − Φ(z_α) = α`.
pub fn normal_upper_quantile(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 0.5 {
        return Ok(0.0);
    }
    Ok(bisect_decreasing(
        |z| TailLaw::StdNormal.survival(z),
        alpha,
        -40.0,
        40.0,
        1e-13,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_examples() {
        let g0: f64 = TailLaw::GumbelPi.cdf(0.0);
        assert!((g0 - (-1.0 / PI.sqrt()).exp()).abs() < 1e-15);
        assert!((g0 - 0.568_820_941_864_020_2).abs() < 1e-15);
        assert_eq!(TailLaw::ChiSq4.cdf(0.0f64), 0.0);
        assert_eq!(TailLaw::StdNormal.cdf(0.0f64), 0.5);
    }

    // Reference values from mpmath at 30 digits.
    #[test]
    fn normal_cdf_matches_high_precision_reference() {
        let cases = [
            (-8.0, 6.22096057427178412352e-16),
            (-3.0, 1.34989803163009452665e-3),
            (-1.0, 1.58655253931457051415e-1),
            (0.3, 6.17911422188952637307e-1),
            (1.6448536269514722, 9.49999999999999946899e-1),
            (2.5, 9.93790334674223864833e-1),
        ];
        for (z, expected) in cases {
            let got: f64 = normal_cdf(z);
            assert!((got - expected).abs() <= 1e-12 * expected.max(1e-300) + 1e-16, "{z}: {got}");
        }
    }

    #[test]
    fn laws_are_monotone_with_correct_limits() {
        for law in [TailLaw::GumbelPi, TailLaw::GumbelKappa(DEFAULT_KAPPA), TailLaw::StdNormal, TailLaw::ChiSq4] {
            let mut prev = -1.0;
            for i in -200..=400 {
                let y = i as f64 * 0.25;
                let c: f64 = law.cdf(y);
                assert!(c >= prev, "{law:?} at {y}");
                assert!((0.0..=1.0).contains(&c));
                assert!((c + law.survival(y) - 1.0).abs() < 1e-12);
                prev = c;
            }
            assert!(law.cdf(-60.0f64) < 1e-12);
            assert!(law.cdf(200.0f64) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn max_pvalue_examples() {
        assert!(max_pvalue(CorrelationKind::SpearmanRho, 200.0f64) < 1e-40);
        let q = max_critical(CorrelationKind::SpearmanRho, 0.05).unwrap();
        assert!((max_pvalue(CorrelationKind::SpearmanRho, q) - 0.05f64).abs() < 1e-12);
        let p0: f64 = max_pvalue(CorrelationKind::HoeffdingD, 0.0);
        assert!((p0 - (1.0 - (-2.467 / PI.sqrt()).exp())).abs() < 1e-15);
    }

    #[test]
    fn max_pvalue_strictly_decreasing() {
        for kind in CorrelationKind::ALL {
            let mut prev = 2.0;
            // Below about −6 the p-value rounds to exactly 1.
            for i in -10..80 {
                let p: f64 = max_pvalue(kind, i as f64 * 0.5);
                assert!(p < prev);
                prev = p;
            }
        }
    }

    #[test]
    fn critical_values() {
        let q = max_critical(CorrelationKind::SpearmanRho, 0.05).unwrap();
        assert!((q - 4.7957).abs() < 1e-4, "{q}");
        let l = max_critical(CorrelationKind::HoeffdingD, 0.05).unwrap();
        let expected = (2.467f64 * 2.467 / PI).ln() - 2.0 * (1.0f64 / 0.95).ln().ln();
        assert!((l - expected).abs() < 1e-12);
        for kind in CorrelationKind::ALL {
            assert!(max_critical(kind, 0.5).unwrap() < max_critical(kind, 0.05).unwrap());
        }
        assert_eq!(max_critical(CorrelationKind::KendallTau, 1.0), Err(Error::AlphaOutOfRange(1.0)));
        assert_eq!(max_critical(CorrelationKind::KendallTau, 0.0), Err(Error::AlphaOutOfRange(0.0)));
    }

    #[test]
    fn critical_round_trip() {
        for kind in CorrelationKind::ALL {
            for alpha in [0.01, 0.05, 0.1] {
                let c = max_critical(kind, alpha).unwrap();
                let p: f64 = max_pvalue(kind, c);
                assert!((p - alpha).abs() < 1e-9, "{kind} {alpha}");
            }
        }
    }

    #[test]
    fn chi4_quantiles() {
        let w = chi4_upper_quantile(0.05).unwrap();
        assert!((w - 9.4877).abs() < 1e-4, "{w}");
        for alpha in [0.001, 0.01, 0.05, 0.3, 0.9] {
            let w = chi4_upper_quantile(alpha).unwrap();
            assert!((TailLaw::ChiSq4.cdf(w) - (1.0 - alpha)).abs() < 1e-9);
        }
        let near_one = chi4_upper_quantile(1.0 - 1e-9).unwrap();
        assert!(near_one > 0.0 && near_one < 1e-3);
        assert!(chi4_upper_quantile(1.5).is_err());
    }

    #[test]
    fn normal_quantiles() {
        assert_eq!(normal_upper_quantile(0.5).unwrap(), 0.0);
        assert!((normal_upper_quantile(0.025).unwrap() - 1.959964).abs() < 1e-6);
        for alpha in [0.01, 0.05, 0.2] {
            let a = normal_upper_quantile(alpha).unwrap();
            let b = normal_upper_quantile(1.0 - alpha).unwrap();
            assert!((a + b).abs() < 1e-9);
        }
        assert!(normal_upper_quantile(-0.1).is_err());
    }

    #[test]
    fn f32_laws() {
        let c: f32 = TailLaw::StdNormal.cdf(1.0f32);
        assert!((c - 0.841_344_75).abs() < 1e-6);
    }
}
