//! Brute-force kernels and exhaustive U-statistics.
//!
//! Everything here follows the kernel definitions literally: each symmetrized
//! kernel is the average of its unsymmetrized form over all `m!` orderings of
//! the input points, and a U-statistic is the average kernel value over every
//! size-`m` subset. Values are exact rationals. This module is slow on purpose
//! and exists to certify the counting formulas in [`crate::paircorr`].

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paircorr::{pair_exact, pair_statistic, CorrelationKind};
use crate::ranks::joint_rank_sequence;
use crate::rng::{fisher_yates, substream};

/// Exact rational value.
pub type Exact = Ratio<i128>;

/// Largest sample size [`brute_ustat`] accepts.
pub const BRUTE_MAX_N: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    KendallTau,
    HoeffdingD,
    BkrR,
    BdyTauStar,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::KendallTau,
        KernelKind::HoeffdingD,
        KernelKind::BkrR,
        KernelKind::BdyTauStar,
    ];

    pub fn arity(self) -> usize {
        match self {
            KernelKind::KendallTau => 2,
            KernelKind::HoeffdingD => 5,
            KernelKind::BkrR => 6,
            KernelKind::BdyTauStar => 4,
        }
    }
}

fn le(a: f64, b: f64) -> i64 {
    (a <= b) as i64
}

fn lt(a: f64, b: f64) -> i64 {
    (a < b) as i64
}

/// `{I(a ≤ e) − I(b ≤ e)}{I(c ≤ e) − I(d ≤ e)}` on one axis.
fn hoeffding_factor(a: f64, b: f64, c: f64, d: f64, e: f64) -> i64 {
    (le(a, e) - le(b, e)) * (le(c, e) - le(d, e))
}

/// `I(a, b < c, d)`: both of the first two below both of the last two.
fn both_below(a: f64, b: f64, c: f64, d: f64) -> i64 {
    lt(a, c) * lt(a, d) * lt(b, c) * lt(b, d)
}

/// The signed four-point factor of the τ* kernel on one axis.
fn sign_covariance_factor(v: [f64; 4]) -> i64 {
    both_below(v[0], v[2], v[1], v[3]) + both_below(v[1], v[3], v[0], v[2])
        - both_below(v[0], v[3], v[1], v[2])
        - both_below(v[1], v[2], v[0], v[3])
}

/// Calls `f` with every permutation of `0..m`, in lexicographic order.
pub(crate) fn for_each_permutation(m: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..m).collect();
    loop {
        f(&perm);
        // next lexicographic permutation
        let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            return;
        };
        let j = (i + 1..m).rev().find(|&j| perm[j] > perm[i]).expect("successor exists");
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

fn check_distinct(points: &[(f64, f64)]) -> Result<()> {
    for axis in 0..2 {
        let mut vals: Vec<f64> = points
            .iter()
            .map(|p| if axis == 0 { p.0 } else { p.1 })
            .collect();
        vals.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        if vals.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::TiedCoordinates { axis: axis + 1 });
        }
    }
    Ok(())
}

/// Symmetrized kernel value on exactly `kind.arity()` points.
pub fn eval_kernel(kind: KernelKind, points: &[(f64, f64)]) -> Result<Exact> {
    let m = kind.arity();
    if points.len() != m {
        return Err(Error::ArityMismatch {
            expected: m,
            got: points.len(),
        });
    }
    check_distinct(points)?;
    let x = |i: usize| points[i].0;
    let y = |i: usize| points[i].1;
    let value = match kind {
        KernelKind::KendallTau => {
            let prod = (x(0) - x(1)) * (y(0) - y(1));
            Exact::from_integer(if prod > 0.0 { 1 } else { -1 })
        }
        KernelKind::HoeffdingD => {
            let mut total = 0i64;
            for_each_permutation(5, |p| {
                total += hoeffding_factor(x(p[0]), x(p[1]), x(p[2]), x(p[3]), x(p[4]))
                    * hoeffding_factor(y(p[0]), y(p[1]), y(p[2]), y(p[3]), y(p[4]));
            });
            Exact::new(total as i128, 16)
        }
        KernelKind::BkrR => {
            let mut total = 0i64;
            for_each_permutation(6, |p| {
                total += hoeffding_factor(x(p[0]), x(p[1]), x(p[2]), x(p[3]), x(p[4]))
                    * hoeffding_factor(y(p[0]), y(p[1]), y(p[2]), y(p[3]), y(p[5]));
            });
            Exact::new(total as i128, 32)
        }
        KernelKind::BdyTauStar => {
            let mut total = 0i64;
            for_each_permutation(4, |p| {
                total += sign_covariance_factor([x(p[0]), x(p[1]), x(p[2]), x(p[3])])
                    * sign_covariance_factor([y(p[0]), y(p[1]), y(p[2]), y(p[3])]);
            });
            Exact::new(total as i128, 24)
        }
    };
    Ok(value)
}

/// Calls `f` with every size-`m` subset of `0..n`, in lexicographic order.
fn for_each_subset(n: usize, m: usize, mut f: impl FnMut(&[usize])) {
    if m > n {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx);
        let Some(i) = (0..m).rev().find(|&i| idx[i] != i + n - m) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact U-statistic: the kernel averaged over all `C(n, m)` subsets.
pub fn brute_ustat_exact(kind: KernelKind, x_col: &[f64], y_col: &[f64]) -> Result<Exact> {
    if x_col.len() != y_col.len() {
        return Err(Error::LengthMismatch {
            left: x_col.len(),
            right: y_col.len(),
        });
    }
    let n = x_col.len();
    let m = kind.arity();
    if n > BRUTE_MAX_N {
        return Err(Error::SampleTooLarge { n, max: BRUTE_MAX_N });
    }
    if n < m {
        return Err(Error::SampleSmallerThanArity { arity: m, n });
    }
    let points: Vec<(f64, f64)> = x_col.iter().copied().zip(y_col.iter().copied()).collect();
    check_distinct(&points)?;
    let mut total = Exact::from_integer(0);
    let mut count = 0i128;
    let mut buf = Vec::with_capacity(m);
    let mut failure = None;
    for_each_subset(n, m, |subset| {
        buf.clear();
        buf.extend(subset.iter().map(|&k| points[k]));
        match eval_kernel(kind, &buf) {
            Ok(v) => total += v,
            Err(e) => failure = Some(e),
        }
        count += 1;
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(total / count)
}

pub fn brute_ustat(kind: KernelKind, x_col: &[f64], y_col: &[f64]) -> Result<f64> {
    brute_ustat_exact(kind, x_col, y_col).map(exact_to_f64)
}

pub fn exact_to_f64(v: Exact) -> f64 {
    *v.numer() as f64 / *v.denom() as f64
}

/// Agreement of the fast pair statistic with [`brute_ustat`] for one kernel
/// and sample size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub kind: KernelKind,
    pub n: usize,
    pub pairs: usize,
    /// Pairs whose exact rational values coincide.
    pub exact_matches: usize,
    pub max_abs_diff: f64,
}

impl EquivalenceRow {
    pub fn passed(&self, tol: f64) -> bool {
        self.exact_matches == self.pairs && self.max_abs_diff <= tol
    }
}

/// Compares fast and brute-force statistics on `pairs` random rank pairs for
/// every kernel and every `n` from its arity to `max_n`.
pub fn check_equivalence(seed: u64, pairs: usize, max_n: usize) -> Result<Vec<EquivalenceRow>> {
    if max_n > BRUTE_MAX_N {
        return Err(Error::SampleTooLarge { n: max_n, max: BRUTE_MAX_N });
    }
    let mut rows = Vec::new();
    for (k, kind) in KernelKind::ALL.into_iter().enumerate() {
        let fast_kind = CorrelationKind::from(kind);
        for n in kind.arity()..=max_n {
            let mut rng = substream(seed, (k * 64 + n) as u64);
            let mut row = EquivalenceRow {
                kind,
                n,
                pairs,
                exact_matches: 0,
                max_abs_diff: 0.0,
            };
            for _ in 0..pairs {
                let rx: Vec<u32> = fisher_yates(&mut rng, n).into_iter().map(|v| v as u32 + 1).collect();
                let ry: Vec<u32> = fisher_yates(&mut rng, n).into_iter().map(|v| v as u32 + 1).collect();
                let x: Vec<f64> = rx.iter().map(|&v| v as f64).collect();
                let y: Vec<f64> = ry.iter().map(|&v| v as f64).collect();
                let brute = brute_ustat_exact(kind, &x, &y)?;
                let fast = pair_exact(fast_kind, &joint_rank_sequence(&rx, &ry)?)?;
                row.exact_matches += usize::from(fast == brute);
                let fast_f64: f64 = pair_statistic(fast_kind, &rx, &ry)?;
                row.max_abs_diff = row.max_abs_diff.max((fast_f64 - exact_to_f64(brute)).abs());
            }
            rows.push(row);
        }
    }
    Ok(rows)
}
