//! Fast pair statistics and the p×q statistic matrix.
//!
//! Each statistic is a function of the joint rank sequence `s` of a column
//! pair: point `k` (0-based) has x-rank `k + 1` and y-rank `s[k]`. All five
//! are computed as an exact ratio of integer counts and rounded once.
//!
//! Counting identities used here:
//!
//! * Kendall: `τ = 1 − 2·inv(s)/C(n,2)`, inversions by merge sort.
//! * Hoeffding D and BKR R: expanding the symmetrized kernel around its
//!   reference point(s) `e` (and `f` for R) leaves, over the other points,
//!   `Σ w(k1,k2)·w(k3,k4)` on ordered distinct 4-tuples with
//!   `w(k,l) = (u_k − u_l)(v_k − v_l)`, `u = I(x < x_e)`, `v = I(y < y_f)`.
//!   That sum depends only on the four quadrant counts around the reference,
//!   see [`quadrant_term`].
//! * τ*: the symmetrized kernel on four points is `2/3` when splitting them
//!   into the two lowest and two highest gives the same partition on both
//!   axes (in either orientation) and `−1/3` otherwise, so the statistic is
//!   `N/C(n,4) − 1/3` with `N` the number of such 4-subsets.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::{Exact, KernelKind};
use crate::ranks::{check_permutation, inverse_permutation, joint_rank_sequence, RankedPair};
use crate::scalar::{CompensatedSum, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CorrelationKind {
    #[serde(rename = "rho")]
    SpearmanRho,
    #[serde(rename = "tau")]
    KendallTau,
    #[serde(rename = "D")]
    HoeffdingD,
    #[serde(rename = "R")]
    BkrR,
    #[serde(rename = "tau*")]
    BdyTauStar,
}

impl CorrelationKind {
    pub const ALL: [CorrelationKind; 5] = [
        CorrelationKind::SpearmanRho,
        CorrelationKind::KendallTau,
        CorrelationKind::HoeffdingD,
        CorrelationKind::BkrR,
        CorrelationKind::BdyTauStar,
    ];

    /// Smallest sample size for which the statistic is defined.
    pub fn min_n(self) -> usize {
        match self {
            CorrelationKind::SpearmanRho | CorrelationKind::KendallTau => 2,
            CorrelationKind::BdyTauStar => 4,
            CorrelationKind::HoeffdingD => 5,
            CorrelationKind::BkrR => 6,
        }
    }

    /// D, R and τ* have order-2 degenerate kernels.
    pub fn is_degenerate(self) -> bool {
        matches!(
            self,
            CorrelationKind::HoeffdingD | CorrelationKind::BkrR | CorrelationKind::BdyTauStar
        )
    }

    pub fn kernel(self) -> Option<KernelKind> {
        match self {
            CorrelationKind::SpearmanRho => None,
            CorrelationKind::KendallTau => Some(KernelKind::KendallTau),
            CorrelationKind::HoeffdingD => Some(KernelKind::HoeffdingD),
            CorrelationKind::BkrR => Some(KernelKind::BkrR),
            CorrelationKind::BdyTauStar => Some(KernelKind::BdyTauStar),
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            CorrelationKind::SpearmanRho => "rho",
            CorrelationKind::KendallTau => "tau",
            CorrelationKind::HoeffdingD => "D",
            CorrelationKind::BkrR => "R",
            CorrelationKind::BdyTauStar => "tau*",
        }
    }
}

impl From<KernelKind> for CorrelationKind {
    fn from(k: KernelKind) -> Self {
        match k {
            KernelKind::KendallTau => CorrelationKind::KendallTau,
            KernelKind::HoeffdingD => CorrelationKind::HoeffdingD,
            KernelKind::BkrR => CorrelationKind::BkrR,
            KernelKind::BdyTauStar => CorrelationKind::BdyTauStar,
        }
    }
}

impl fmt::Display for CorrelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for CorrelationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rho" | "spearman" => Ok(CorrelationKind::SpearmanRho),
            "tau" | "kendall" => Ok(CorrelationKind::KendallTau),
            "d" | "hoeffding" => Ok(CorrelationKind::HoeffdingD),
            "r" | "bkr" => Ok(CorrelationKind::BkrR),
            "tau*" | "taustar" | "tau-star" | "bdy" => Ok(CorrelationKind::BdyTauStar),
            other => Err(Error::InvalidArgument(format!("unknown correlation kind '{other}'"))),
        }
    }
}

/// One statistic evaluated on every (x column, y column) pair. Row-major p×q.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairStatMatrix<T = f64> {
    pub kind: CorrelationKind,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub values: Vec<T>,
}

impl<T: Scalar> PairStatMatrix<T> {
    pub fn new(kind: CorrelationKind, n: usize, p: usize, q: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != p * q {
            return Err(Error::InvalidArgument(format!(
                "{} values for a {p}x{q} matrix",
                values.len()
            )));
        }
        Ok(Self { kind, n, p, q, values })
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.q + j]
    }

    /// Number of pairs `N = p·q`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Scratch buffers reused across pairs.
#[derive(Debug, Default)]
pub struct PairWorkspace {
    joint: Vec<u32>,
    merge_a: Vec<u32>,
    merge_b: Vec<u32>,
    counts: Vec<u32>,
}

impl PairWorkspace {
    pub fn new() -> Self {
        Self::default()
    }
}

fn choose(n: i128, k: i128) -> i128 {
    if k < 0 || k > n {
        return 0;
    }
    let mut r = 1i128;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

fn choose2(m: i64) -> i64 {
    m * (m - 1) / 2
}

/// `Σ w(k1,k2)·w(k3,k4)` over ordered distinct 4-tuples of the points around
/// a reference, from the counts of points in each quadrant (`a10`: below in x
/// only, `a01`: below in y only).
///
/// With `W = Σ_{k≠l} w`, row sums `r_k` and `Σ w²`, inclusion–exclusion over
/// shared indices gives `W² − 4Σ r_k² + 2Σ w²`.
#[inline]
fn quadrant_term(a11: i64, a10: i64, a01: i64, a00: i64) -> i64 {
    let pc = a11 * a00;
    let qd = a10 * a01;
    let w = 2 * (pc - qd);
    let row_sq = pc * (a11 + a00) + qd * (a10 + a01);
    let w_sq = 2 * (pc + qd);
    w * w - 4 * row_sq + 2 * w_sq
}

fn spearman_ratio(s: &[u32]) -> (i128, i128) {
    let n = s.len() as i128;
    let total: i128 = s
        .iter()
        .enumerate()
        .map(|(k, &y)| (2 * (k as i128 + 1) - n - 1) * (2 * y as i128 - n - 1))
        .sum();
    (3 * total, n * (n * n - 1))
}

/// Inversion count by bottom-up merge sort.
fn count_inversions(s: &[u32], a: &mut Vec<u32>, b: &mut Vec<u32>) -> u64 {
    let n = s.len();
    a.clear();
    a.extend_from_slice(s);
    b.clear();
    b.resize(n, 0);
    let mut inversions = 0u64;
    let mut width = 1;
    while width < n {
        let mut start = 0;
        while start < n {
            let mid = (start + width).min(n);
            let end = (start + 2 * width).min(n);
            let (mut i, mut j, mut k) = (start, mid, start);
            while i < mid && j < end {
                if a[i] <= a[j] {
                    b[k] = a[i];
                    i += 1;
                } else {
                    b[k] = a[j];
                    inversions += (mid - i) as u64;
                    j += 1;
                }
                k += 1;
            }
            b[k..k + (mid - i)].copy_from_slice(&a[i..mid]);
            k += mid - i;
            b[k..k + (end - j)].copy_from_slice(&a[j..end]);
            start = end;
        }
        std::mem::swap(a, b);
        width *= 2;
    }
    inversions
}

fn kendall_ratio(s: &[u32], ws: &mut PairWorkspace) -> (i128, i128) {
    let pairs = choose(s.len() as i128, 2);
    let inv = count_inversions(s, &mut ws.merge_a, &mut ws.merge_b) as i128;
    (pairs - 2 * inv, pairs)
}

fn hoeffding_ratio(s: &[u32], ws: &mut PairWorkspace) -> (i128, i128) {
    let n = s.len();
    // Fenwick tree over y-ranks of points already visited (lower x-rank).
    let tree = &mut ws.counts;
    tree.clear();
    tree.resize(n + 1, 0);
    let mut total = 0i128;
    for (r, &y) in s.iter().enumerate() {
        let mut below = 0i64;
        let mut i = y as usize - 1;
        while i > 0 {
            below += tree[i] as i64;
            i &= i - 1;
        }
        let mut i = y as usize;
        while i <= n {
            tree[i] += 1;
            i += i & i.wrapping_neg();
        }
        let a11 = below;
        let a10 = r as i64 - a11;
        let a01 = y as i64 - 1 - a11;
        let a00 = n as i64 - 1 - a11 - a10 - a01;
        total += quadrant_term(a11, a10, a01, a00) as i128;
    }
    (total, 16 * choose(n as i128, 5))
}

/// Adds `quadrant_term` over corners `(x_e, y_w)` for `w` in `ys`, where `e`
/// sits at x-position `r`; `a11` carries the count of points left of `e` and
/// below the current `w`.
#[inline]
fn corner_sweep(pos: &[u32], r: usize, ys: std::ops::Range<usize>, above_e: i64, a11: &mut i64) -> i64 {
    let others = pos.len() as i64 - 2;
    let mut acc = 0i64;
    for w in ys {
        let left = (pos[w - 1] < r as u32) as i64;
        let a10 = r as i64 - left - *a11;
        let a01 = w as i64 - 1 - above_e - *a11;
        let a00 = others - *a11 - a10 - a01;
        acc += quadrant_term(*a11, a10, a01, a00);
        *a11 += left;
    }
    acc
}

fn bkr_ratio(s: &[u32], ws: &mut PairWorkspace) -> (i128, i128) {
    let n = s.len();
    // pos[w − 1] = x-position of the point with y-rank w
    let pos = &mut ws.counts;
    pos.clear();
    pos.resize(n, 0);
    for (r, &y) in s.iter().enumerate() {
        pos[y as usize - 1] = r as u32;
    }
    let mut total = 0i128;
    for (r, &ye) in s.iter().enumerate() {
        let ye = ye as usize;
        let mut a11 = 0i64;
        let below = corner_sweep(pos, r, 1..ye, 0, &mut a11);
        let above = corner_sweep(pos, r, ye + 1..n + 1, 1, &mut a11);
        total += (below + above) as i128;
    }
    (total, 32 * choose(n as i128, 6))
}

/// Number of 4-subsets whose two lowest points in x are also the two lowest
/// in y (`same`), and whose two lowest in x are the two highest in y
/// (`opposite`).
///
/// For each point k the lower pair is either {k, i} with i south-west of k,
/// counted as `SW(k)·C(NE(k), 2)`, or {k, i} with i right of and below k, in
/// which case the upper pair lies north-east of the corner (x_i, y_k). The
/// second count is `Σ_i C(NE(k) − t_i, 2)` where `t_i` is the number of
/// points between k and i in x that lie above k; it is accumulated from
/// power sums of `t` in one sweep. `opposite` is the same on reflected y.
fn partition_counts(s: &[u32]) -> (i128, i128) {
    let n = s.len() as i64;
    let mut same = 0i128;
    let mut opposite = 0i128;
    for (k, &yk) in s.iter().enumerate() {
        let (mut t_up, mut t_down) = (0i64, 0i64);
        let (mut h_up, mut s_up, mut q_up) = (0i64, 0i64, 0i64);
        let (mut h_down, mut s_down, mut q_down) = (0i64, 0i64, 0i64);
        for &yj in &s[k + 1..] {
            let up = (yj > yk) as i64;
            let down = 1 - up;
            t_up += up;
            t_down += down;
            h_up += down;
            s_up += down * t_up;
            q_up += down * t_up * t_up;
            h_down += up;
            s_down += up * t_down;
            q_down += up * t_down * t_down;
        }
        let ne = t_up;
        let se = t_down;
        let sw = yk as i64 - 1 - se;
        let nw = k as i64 - sw;
        let tail = |u: i64, h: i64, s1: i64, s2: i64| (h * u * u - 2 * u * s1 + s2 - h * u + s1) / 2;
        same += (sw * choose2(ne) + tail(ne, h_up, s_up, q_up)) as i128;
        opposite += (nw * choose2(se) + tail(se, h_down, s_down, q_down)) as i128;
        debug_assert_eq!(ne + se + sw + nw, n - 1);
    }
    (same, opposite)
}

fn taustar_ratio(s: &[u32], _ws: &mut PairWorkspace) -> (i128, i128) {
    // The symmetrized kernel is 2/3 when both axes split the 4-subset into the
    // same pairs (in either orientation) and −1/3 otherwise.
    let (same, opposite) = partition_counts(s);
    let subsets = choose(s.len() as i128, 4);
    (3 * (same + opposite) - subsets, 3 * subsets)
}

fn pair_ratio(kind: CorrelationKind, s: &[u32], ws: &mut PairWorkspace) -> (i128, i128) {
    match kind {
        CorrelationKind::SpearmanRho => spearman_ratio(s),
        CorrelationKind::KendallTau => kendall_ratio(s, ws),
        CorrelationKind::HoeffdingD => hoeffding_ratio(s, ws),
        CorrelationKind::BkrR => bkr_ratio(s, ws),
        CorrelationKind::BdyTauStar => taustar_ratio(s, ws),
    }
}

fn check_joint(kind: CorrelationKind, joint: &[u32]) -> Result<()> {
    check_permutation(joint)?;
    if joint.len() < kind.min_n() {
        return Err(Error::SampleSmallerThanArity {
            arity: kind.min_n(),
            n: joint.len(),
        });
    }
    Ok(())
}

/// Exact value of a statistic from its joint rank sequence.
pub fn pair_exact(kind: CorrelationKind, joint: &[u32]) -> Result<Exact> {
    check_joint(kind, joint)?;
    let (num, den) = pair_ratio(kind, joint, &mut PairWorkspace::new());
    Ok(Exact::new(num, den))
}

/// Statistic from a joint rank sequence.
pub fn pair_from_joint<T: Scalar>(kind: CorrelationKind, joint: &[u32]) -> Result<T> {
    check_joint(kind, joint)?;
    let (num, den) = pair_ratio(kind, joint, &mut PairWorkspace::new());
    Ok(T::from_ratio(num, den))
}

/// Statistic from the two marginal rank vectors of a pair.
pub fn pair_statistic<T: Scalar>(kind: CorrelationKind, x_ranks: &[u32], y_ranks: &[u32]) -> Result<T> {
    let joint = joint_rank_sequence(x_ranks, y_ranks)?;
    pair_from_joint(kind, &joint)
}

/// `12/(n(n²−1)) Σ_k (k − (n+1)/2)(joint[k] − (n+1)/2)`.
pub fn spearman_pair<T: Scalar>(joint: &[u32]) -> Result<T> {
    pair_from_joint(CorrelationKind::SpearmanRho, joint)
}

/// `n⁻¹ Σ_k f(k/(n+1)) g(joint[k]/(n+1))`.
///
/// With `f(u) = g(u) = u − 1/2` this equals `(n−1)/(12(n+1))` times Spearman's ρ.
pub fn generic_linear_rank_pair<T: Scalar>(
    joint: &[u32],
    f: impl Fn(T) -> T,
    g: impl Fn(T) -> T,
) -> Result<T> {
    check_permutation(joint)?;
    let n = joint.len();
    let scale = T::from_usize(n + 1).expect("usize representable");
    let sum: CompensatedSum<T> = joint
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let u = T::from_usize(k + 1).expect("usize representable") / scale;
            let v = T::from_u32(r).expect("u32 representable") / scale;
            f(u) * g(v)
        })
        .collect();
    Ok(sum.total() / T::from_usize(n).expect("usize representable"))
}

pub fn kendall_pair<T: Scalar>(x_ranks: &[u32], y_ranks: &[u32]) -> Result<T> {
    pair_statistic(CorrelationKind::KendallTau, x_ranks, y_ranks)
}

pub fn hoeffding_d_pair<T: Scalar>(x_ranks: &[u32], y_ranks: &[u32]) -> Result<T> {
    pair_statistic(CorrelationKind::HoeffdingD, x_ranks, y_ranks)
}

pub fn bkr_r_pair<T: Scalar>(x_ranks: &[u32], y_ranks: &[u32]) -> Result<T> {
    pair_statistic(CorrelationKind::BkrR, x_ranks, y_ranks)
}

/// τ* with the U-statistic weight `(n−4)!4!/n!`.
pub fn bdy_taustar_pair<T: Scalar>(x_ranks: &[u32], y_ranks: &[u32]) -> Result<T> {
    pair_statistic(CorrelationKind::BdyTauStar, x_ranks, y_ranks)
}

/// Evaluates `kind` on every (x column, y column) pair.
///
/// Each output cell is written by exactly one task, so the result does not
/// depend on the number of worker threads.
pub fn stat_matrix<T: Scalar>(ranked: &RankedPair, kind: CorrelationKind) -> Result<PairStatMatrix<T>> {
    let n = ranked.n;
    let (p, q) = (ranked.p(), ranked.q());
    if p == 0 || q == 0 {
        return Err(Error::EmptyMatrix);
    }
    if n < kind.min_n() {
        return Err(Error::Pair {
            i: 0,
            j: 0,
            source: Box::new(Error::SampleSmallerThanArity {
                arity: kind.min_n(),
                n,
            }),
        });
    }
    let orders = ranked
        .rx
        .iter()
        .enumerate()
        .map(|(i, col)| {
            inverse_permutation(col).map_err(|e| Error::Pair {
                i,
                j: 0,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for (j, col) in ranked.ry.iter().enumerate() {
        check_permutation(col).map_err(|e| Error::Pair {
            i: 0,
            j,
            source: Box::new(e),
        })?;
    }
    let mut values = vec![T::zero(); p * q];
    values
        .par_chunks_mut(q)
        .zip(orders.par_iter())
        .for_each_init(PairWorkspace::new, |ws, (row, order)| {
            for (cell, ry) in row.iter_mut().zip(&ranked.ry) {
                let mut joint = std::mem::take(&mut ws.joint);
                joint.clear();
                joint.extend(order.iter().map(|&r| ry[r as usize]));
                let (num, den) = pair_ratio(kind, &joint, ws);
                *cell = T::from_ratio(num, den);
                ws.joint = joint;
            }
        });
    PairStatMatrix::new(kind, n, p, q, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_ustat_exact;

    fn as_f64(v: &[u32]) -> Vec<f64> {
        v.iter().map(|&r| r as f64).collect()
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman_pair::<f64>(&[1, 2, 3]).unwrap(), 1.0);
        assert_eq!(spearman_pair::<f64>(&[3, 2, 1]).unwrap(), -1.0);
        assert_eq!(spearman_pair::<f64>(&[2, 1, 3]).unwrap(), 0.5);
        assert_eq!(
            spearman_pair::<f64>(&[1, 1, 3]),
            Err(Error::NotAPermutation { n: 3 })
        );
    }

    #[test]
    fn linear_rank_examples() {
        let id = |u: f64| u;
        let n = 6usize;
        let joint: Vec<u32> = (1..=n as u32).collect();
        let expected: f64 = (1..=n).map(|k| (k * k) as f64).sum::<f64>() / (49.0 * n as f64);
        let got = generic_linear_rank_pair(&joint, id, id).unwrap();
        assert!((got - expected).abs() < 1e-15);

        let centered = |u: f64| u - 0.5;
        let v = generic_linear_rank_pair(&[2, 1], centered, centered).unwrap();
        assert!((v - (-1.0 / 36.0)).abs() < 1e-15, "{v}");

        let constant = |_: f64| 3.0;
        let a = generic_linear_rank_pair(&[3, 1, 2], id, constant).unwrap();
        let b = generic_linear_rank_pair(&[1, 2, 3], id, constant).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!((a - 3.0 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn linear_rank_reproduces_spearman() {
        let joint = [4, 1, 6, 2, 5, 3, 7];
        let n = joint.len() as f64;
        let centered = |u: f64| u - 0.5;
        let v = generic_linear_rank_pair(&joint, centered, centered).unwrap();
        let rho: f64 = spearman_pair(&joint).unwrap();
        assert!((rho - 12.0 * (n + 1.0) / (n - 1.0) * v).abs() < 1e-13);
    }

    #[test]
    fn kendall_examples() {
        assert_eq!(kendall_pair::<f64>(&[1, 2, 3, 4], &[1, 2, 3, 4]).unwrap(), 1.0);
        assert_eq!(kendall_pair::<f64>(&[1, 2, 3, 4], &[4, 3, 2, 1]).unwrap(), -1.0);
        assert_eq!(
            pair_exact(
                CorrelationKind::KendallTau,
                &joint_rank_sequence(&[1, 2, 3], &[3, 1, 2]).unwrap()
            )
            .unwrap(),
            Exact::new(-1, 3)
        );
    }

    #[test]
    fn inversion_count_matches_quadratic_count() {
        let s = [5u32, 3, 8, 1, 2, 7, 4, 6];
        let slow = (0..s.len())
            .flat_map(|i| (i + 1..s.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| s[i] > s[j])
            .count() as u64;
        assert_eq!(count_inversions(&s, &mut vec![], &mut vec![]), slow);
    }

    #[test]
    fn degenerate_kinds_match_oracle_on_single_subsets() {
        for (kind, m) in [
            (CorrelationKind::HoeffdingD, 5),
            (CorrelationKind::BkrR, 6),
            (CorrelationKind::BdyTauStar, 4),
        ] {
            let id: Vec<u32> = (1..=m).collect();
            let fast = pair_exact(kind, &id).unwrap();
            let brute = brute_ustat_exact(kind.kernel().unwrap(), &as_f64(&id), &as_f64(&id)).unwrap();
            assert_eq!(fast, brute, "{kind}");
        }
    }

    #[test]
    fn seeded_oracle_comparisons() {
        // n = 6 for D and τ*, n = 7 for R
        let cases: [(CorrelationKind, Vec<u32>, Vec<u32>); 3] = [
            (CorrelationKind::HoeffdingD, vec![3, 6, 1, 5, 2, 4], vec![2, 5, 6, 1, 3, 4]),
            (CorrelationKind::BkrR, vec![7, 2, 5, 1, 3, 6, 4], vec![1, 4, 7, 6, 2, 3, 5]),
            (CorrelationKind::BdyTauStar, vec![4, 1, 6, 2, 3, 5], vec![6, 3, 2, 4, 1, 5]),
        ];
        for (kind, x, y) in cases {
            let fast: f64 = pair_statistic(kind, &x, &y).unwrap();
            let brute = crate::oracle::brute_ustat(kind.kernel().unwrap(), &as_f64(&x), &as_f64(&y)).unwrap();
            assert!((fast - brute).abs() <= 1e-12, "{kind}: {fast} vs {brute}");
        }
    }

    fn shuffled(n: usize, seed: u64) -> Vec<u32> {
        let mut rng = crate::rng::substream(seed, 0);
        crate::rng::fisher_yates(&mut rng, n).into_iter().map(|v| v as u32 + 1).collect()
    }

    #[test]
    fn partition_counts_match_subset_enumeration() {
        for seed in 0..4 {
            let s = shuffled(22, seed);
            let (mut same, mut opposite) = (0i128, 0i128);
            let n = s.len();
            for a in 0..n {
                for b in a + 1..n {
                    for c in b + 1..n {
                        for d in c + 1..n {
                            let mut ys = [s[a], s[b], s[c], s[d]];
                            let low = [s[a], s[b]];
                            ys.sort_unstable();
                            let lo2 = (low.contains(&ys[0]) && low.contains(&ys[1])) as i128;
                            let hi2 = (low.contains(&ys[2]) && low.contains(&ys[3])) as i128;
                            same += lo2;
                            opposite += hi2;
                        }
                    }
                }
            }
            assert_eq!(partition_counts(&s), (same, opposite));
        }
    }

    #[test]
    fn bkr_matches_direct_corner_counts() {
        for seed in 0..4 {
            let s = shuffled(19, seed);
            let n = s.len();
            let mut total = 0i128;
            for e in 0..n {
                for f in 0..n {
                    if e == f {
                        continue;
                    }
                    let (mut a11, mut a10, mut a01, mut a00) = (0, 0, 0, 0);
                    for g in (0..n).filter(|&g| g != e && g != f) {
                        match (g < e, s[g] < s[f]) {
                            (true, true) => a11 += 1,
                            (true, false) => a10 += 1,
                            (false, true) => a01 += 1,
                            (false, false) => a00 += 1,
                        }
                    }
                    total += quadrant_term(a11, a10, a01, a00) as i128;
                }
            }
            let (num, den) = bkr_ratio(&s, &mut PairWorkspace::new());
            assert_eq!(num, total);
            assert_eq!(den, 32 * choose(n as i128, 6));
        }
    }

    #[test]
    fn arity_guards() {
        let four = [1, 2, 3, 4];
        assert_eq!(
            hoeffding_d_pair::<f64>(&four, &four),
            Err(Error::SampleSmallerThanArity { arity: 5, n: 4 })
        );
        let five = [1, 2, 3, 4, 5];
        assert_eq!(
            bkr_r_pair::<f64>(&five, &five),
            Err(Error::SampleSmallerThanArity { arity: 6, n: 5 })
        );
        let three = [1, 2, 3];
        assert_eq!(
            bdy_taustar_pair::<f64>(&three, &three),
            Err(Error::SampleSmallerThanArity { arity: 4, n: 3 })
        );
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in CorrelationKind::ALL {
            assert_eq!(kind.short_name().parse::<CorrelationKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(serde_json::from_str::<CorrelationKind>(&json).unwrap(), kind);
        }
        assert!("pearson".parse::<CorrelationKind>().is_err());
    }

    #[test]
    fn f32_and_f64_agree() {
        let x = [4, 1, 6, 2, 3, 5, 8, 7];
        let y = [6, 3, 2, 4, 1, 5, 7, 8];
        for kind in CorrelationKind::ALL {
            let a: f64 = pair_statistic(kind, &x, &y).unwrap();
            let b: f32 = pair_statistic(kind, &x, &y).unwrap();
            assert!((a - b as f64).abs() < 1e-6, "{kind}");
        }
    }
}
