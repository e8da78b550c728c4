//! Within-column ranks and the joint rank sequence of a column pair.
//!
//! Every statistic in this crate consumes ranks only. Ranks are 1-based and
//! stored column-major so that a column is a contiguous slice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Observed samples: `x` is n×p, `y` is n×q, rows aligned.
///
/// Stored column-major; `x[i]` is column `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPair<T = f64> {
    x: Vec<Vec<T>>,
    y: Vec<Vec<T>>,
    n: usize,
}

impl<T: Scalar> DataPair<T> {
    /// Builds a pair from column vectors, checking shape and finiteness.
    pub fn from_columns(x: Vec<Vec<T>>, y: Vec<Vec<T>>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::NoColumns { side: "x" });
        }
        if y.is_empty() {
            return Err(Error::NoColumns { side: "y" });
        }
        let n = x[0].len();
        for (side, cols) in [("x", &x), ("y", &y)] {
            for (col, values) in cols.iter().enumerate() {
                if values.len() != n {
                    return Err(Error::RowCountMismatch {
                        x_rows: n,
                        y_rows: values.len(),
                    });
                }
                if let Some(row) = values.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFiniteInput { side, row, col });
                }
            }
        }
        if n < 2 {
            return Err(Error::TooFewRows { min: 2, got: n });
        }
        Ok(Self { x, y, n })
    }

    /// Builds a pair from row-major rows.
    pub fn from_rows(x_rows: &[Vec<T>], y_rows: &[Vec<T>]) -> Result<Self> {
        if x_rows.len() != y_rows.len() {
            return Err(Error::RowCountMismatch {
                x_rows: x_rows.len(),
                y_rows: y_rows.len(),
            });
        }
        Self::from_columns(transpose(x_rows, "x")?, transpose(y_rows, "y")?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.x.len()
    }

    pub fn q(&self) -> usize {
        self.y.len()
    }

    pub fn x_columns(&self) -> &[Vec<T>] {
        &self.x
    }

    pub fn y_columns(&self) -> &[Vec<T>] {
        &self.y
    }

    /// Applies `f` to every entry of x column `col`. Used for transform checks.
    pub fn map_x_column(&mut self, col: usize, f: impl Fn(T) -> T) {
        for v in &mut self.x[col] {
            *v = f(*v);
        }
    }

    pub fn map_y_column(&mut self, col: usize, f: impl Fn(T) -> T) {
        for v in &mut self.y[col] {
            *v = f(*v);
        }
    }

    /// Keeps only the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let pick = |cols: &[Vec<T>]| -> Vec<Vec<T>> {
            cols.iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect()
        };
        Self::from_columns(pick(&self.x), pick(&self.y))
    }
}

fn transpose<T: Copy>(rows: &[Vec<T>], side: &'static str) -> Result<Vec<Vec<T>>> {
    let cols = rows.first().map_or(0, Vec::len);
    if cols == 0 {
        return Err(Error::NoColumns { side });
    }
    let mut out = vec![Vec::with_capacity(rows.len()); cols];
    for row in rows {
        if row.len() != cols {
            return Err(Error::InvalidArgument(format!(
                "ragged {side} rows: expected {cols} values, found {}",
                row.len()
            )));
        }
        for (c, v) in row.iter().enumerate() {
            out[c].push(*v);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Abort on any duplicated value within a column.
    #[default]
    Error,
    /// Break ties by original row index and flag the column.
    AverageJitterFree,
}

/// Ranks of every column, 1-based, column-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedPair {
    pub n: usize,
    pub rx: Vec<Vec<u32>>,
    pub ry: Vec<Vec<u32>>,
    pub x_tie_flags: Vec<bool>,
    pub y_tie_flags: Vec<bool>,
}

impl RankedPair {
    pub fn p(&self) -> usize {
        self.rx.len()
    }

    pub fn q(&self) -> usize {
        self.ry.len()
    }

    pub fn has_ties(&self) -> bool {
        self.x_tie_flags.iter().chain(&self.y_tie_flags).any(|&t| t)
    }

    /// Reorders x rows: row `r` of the result is row `perm[r]` of `self`.
    /// Only the pairing between x and y changes.
    pub fn with_x_rows_permuted(&self, perm: &[usize]) -> RankedPair {
        let rx = self
            .rx
            .iter()
            .map(|col| perm.iter().map(|&r| col[r]).collect())
            .collect();
        RankedPair {
            n: self.n,
            rx,
            ry: self.ry.clone(),
            x_tie_flags: self.x_tie_flags.clone(),
            y_tie_flags: self.y_tie_flags.clone(),
        }
    }
}

/// Ranks a single column. Returns the ranks and whether ties were broken.
pub fn rank_column<T: Scalar>(values: &[T], tie_policy: TiePolicy) -> Result<(Vec<u32>, bool), usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // Stable sort keeps equal values in row order, which is the tie-break.
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite input"));
    let tied = order.windows(2).any(|w| values[w[0]] == values[w[1]]);
    if tied && tie_policy == TiePolicy::Error {
        return Err(order.len());
    }
    let mut ranks = vec![0u32; values.len()];
    for (pos, &row) in order.iter().enumerate() {
        ranks[row] = pos as u32 + 1;
    }
    Ok((ranks, tied))
}

pub fn rank_columns<T: Scalar>(data: &DataPair<T>, tie_policy: TiePolicy) -> Result<RankedPair> {
    let rank_side = |cols: &[Vec<T>], side: &'static str| -> Result<(Vec<Vec<u32>>, Vec<bool>)> {
        let mut ranks = Vec::with_capacity(cols.len());
        let mut flags = Vec::with_capacity(cols.len());
        for (col, values) in cols.iter().enumerate() {
            if let Some(row) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteInput { side, row, col });
            }
            let (r, tied) =
                rank_column(values, tie_policy).map_err(|_| Error::TiesPresent { side, col })?;
            ranks.push(r);
            flags.push(tied);
        }
        Ok((ranks, flags))
    };
    let (rx, x_tie_flags) = rank_side(data.x_columns(), "x")?;
    let (ry, y_tie_flags) = rank_side(data.y_columns(), "y")?;
    Ok(RankedPair {
        n: data.n(),
        rx,
        ry,
        x_tie_flags,
        y_tie_flags,
    })
}

/// Returns the 0-based inverse of a 1-based permutation: `inv[r - 1]` is the
/// position holding rank `r`.
pub(crate) fn inverse_permutation(ranks: &[u32]) -> Result<Vec<u32>> {
    let n = ranks.len();
    let mut inv = vec![u32::MAX; n];
    for (pos, &r) in ranks.iter().enumerate() {
        let r = r as usize;
        if r == 0 || r > n || inv[r - 1] != u32::MAX {
            return Err(Error::NotAPermutation { n });
        }
        inv[r - 1] = pos as u32;
    }
    Ok(inv)
}

pub(crate) fn check_permutation(ranks: &[u32]) -> Result<()> {
    inverse_permutation(ranks).map(|_| ())
}

/// Position `k` of the result holds the y-rank of the sample whose x-rank is `k + 1`.
pub fn joint_rank_sequence(rx_col: &[u32], ry_col: &[u32]) -> Result<Vec<u32>> {
    if rx_col.len() != ry_col.len() {
        return Err(Error::LengthMismatch {
            left: rx_col.len(),
            right: ry_col.len(),
        });
    }
    check_permutation(ry_col)?;
    let order = inverse_permutation(rx_col)?;
    Ok(order.iter().map(|&row| ry_col[row as usize]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranks_of(values: &[f64]) -> Vec<u32> {
        rank_column(values, TiePolicy::Error).unwrap().0
    }

    #[test]
    fn ranks_of_distinct_values() {
        assert_eq!(ranks_of(&[3.0, 1.0, 2.0]), vec![3, 1, 2]);
        assert_eq!(ranks_of(&[-1.2, 7.7, 0.0, 3.3]), vec![1, 4, 2, 3]);
    }

    #[test]
    fn ties_rejected_by_default() {
        let data = DataPair::from_columns(vec![vec![5.0, 5.0]], vec![vec![1.0, 2.0]]).unwrap();
        assert_eq!(
            rank_columns(&data, TiePolicy::Error),
            Err(Error::TiesPresent { side: "x", col: 0 })
        );
    }

    #[test]
    fn ties_broken_by_row_index() {
        let data =
            DataPair::from_columns(vec![vec![5.0, 1.0, 5.0]], vec![vec![1.0, 2.0, 3.0]]).unwrap();
        let ranked = rank_columns(&data, TiePolicy::AverageJitterFree).unwrap();
        assert_eq!(ranked.rx[0], vec![2, 1, 3]);
        assert_eq!(ranked.x_tie_flags, vec![true]);
        assert_eq!(ranked.y_tie_flags, vec![false]);
        assert!(ranked.has_ties());
    }

    #[test]
    fn non_finite_rejected() {
        let err = DataPair::from_columns(vec![vec![1.0, f64::NAN]], vec![vec![1.0, 2.0]]);
        assert_eq!(
            err,
            Err(Error::NonFiniteInput {
                side: "x",
                row: 1,
                col: 0
            })
        );
    }

    #[test]
    fn shape_checks() {
        assert!(matches!(
            DataPair::from_columns(vec![vec![1.0, 2.0]], vec![vec![1.0]]),
            Err(Error::RowCountMismatch { .. })
        ));
        assert!(matches!(
            DataPair::from_columns(vec![vec![1.0]], vec![vec![1.0]]),
            Err(Error::TooFewRows { .. })
        ));
        assert!(matches!(
            DataPair::<f64>::from_columns(vec![], vec![vec![1.0]]),
            Err(Error::NoColumns { side: "x" })
        ));
    }

    #[test]
    fn from_rows_transposes() {
        let d = DataPair::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]], &[vec![5.0], vec![6.0]])
            .unwrap();
        assert_eq!(d.x_columns(), &[vec![1.0, 3.0], vec![2.0, 4.0]]);
        assert_eq!((d.n(), d.p(), d.q()), (2, 2, 1));
    }

    #[test]
    fn joint_sequence_examples() {
        assert_eq!(joint_rank_sequence(&[3, 1, 2], &[3, 1, 2]).unwrap(), vec![1, 2, 3]);
        assert_eq!(joint_rank_sequence(&[2, 1], &[1, 2]).unwrap(), vec![2, 1]);
        assert_eq!(joint_rank_sequence(&[1, 2, 3, 4], &[4, 2, 1, 3]).unwrap(), vec![4, 2, 1, 3]);
    }

    #[test]
    fn joint_sequence_rejects_non_permutations() {
        assert_eq!(
            joint_rank_sequence(&[1, 1, 2], &[1, 2, 3]),
            Err(Error::NotAPermutation { n: 3 })
        );
        assert_eq!(
            joint_rank_sequence(&[1, 2, 3], &[0, 2, 3]),
            Err(Error::NotAPermutation { n: 3 })
        );
        assert!(matches!(
            joint_rank_sequence(&[1, 2], &[1, 2, 3]),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
