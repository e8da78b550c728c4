#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rank_indep::rng::{fisher_yates, substream};
use rank_indep::DataPair;

pub fn random_ranks(n: usize, rng: &mut impl Rng) -> Vec<u32> {
    fisher_yates(rng, n).into_iter().map(|v| v as u32 + 1).collect()
}

pub fn gaussian_pair(n: usize, p: usize, q: usize, seed: u64) -> DataPair {
    let mut rng = substream(seed, 0);
    let mut col = |_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect::<Vec<f64>>();
    let x = (0..p).map(&mut col).collect();
    let y = (0..q).map(&mut col).collect();
    DataPair::from_columns(x, y).unwrap()
}

pub fn as_points(x: &[u32], y: &[u32]) -> (Vec<f64>, Vec<f64>) {
    (x.iter().map(|&v| v as f64).collect(), y.iter().map(|&v| v as f64).collect())
}

/// Lexicographic successor; false after the last permutation.
pub fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}
