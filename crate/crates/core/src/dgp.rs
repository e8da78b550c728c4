//! Synthetic designs: the m-dependent moving-average null and six alternatives.
//!
//! Randomness is drawn from three substreams of the setting's seed: stream 0
//! for the moving-average coefficients, stream 1 for everything on the x side
//! and stream 2 for everything on the y side. Gaussian draws use
//! `rand_distr::StandardNormal`; matrices are filled column by column.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ranks::DataPair;
use crate::rng::substream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SettingLabel {
    NullMa,
    /// (a) `X = 0.2 cos Z`, `Y = 0.2 sin Z`.
    NonSparse1,
    /// (b) `X = Z`, `Y = 0.01 log |X|³`.
    NonSparse2,
    /// (c) linear combination of neighbouring x columns in the first three y columns.
    Sparse1,
    /// (d) `0.5 exp(X)` in the first three y columns.
    Sparse2,
    /// (e) `⌊(v/2)³⌋` quadratic signals of strength `a(v)`.
    VaryingSparsity,
    /// (f) `⌊p/9⌋` quadratic signals with alternating sign.
    SignedSparse,
}

impl SettingLabel {
    pub const ALL: [SettingLabel; 7] = [
        SettingLabel::NullMa,
        SettingLabel::NonSparse1,
        SettingLabel::NonSparse2,
        SettingLabel::Sparse1,
        SettingLabel::Sparse2,
        SettingLabel::VaryingSparsity,
        SettingLabel::SignedSparse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SettingLabel::NullMa => "null-ma",
            SettingLabel::NonSparse1 => "non-sparse1",
            SettingLabel::NonSparse2 => "non-sparse2",
            SettingLabel::Sparse1 => "sparse1",
            SettingLabel::Sparse2 => "sparse2",
            SettingLabel::VaryingSparsity => "varying-sparsity",
            SettingLabel::SignedSparse => "signed-sparse",
        }
    }

    pub fn is_null(self) -> bool {
        self == SettingLabel::NullMa
    }
}

impl fmt::Display for SettingLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SettingLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        let label = match key.as_str() {
            "null-ma" | "null" => SettingLabel::NullMa,
            "non-sparse1" | "non-sparse-1" | "a" => SettingLabel::NonSparse1,
            "non-sparse2" | "non-sparse-2" | "b" => SettingLabel::NonSparse2,
            "sparse1" | "sparse-1" | "c" => SettingLabel::Sparse1,
            "sparse2" | "sparse-2" | "d" => SettingLabel::Sparse2,
            "varying-sparsity" | "e" => SettingLabel::VaryingSparsity,
            "signed-sparse" | "f" => SettingLabel::SignedSparse,
            _ => return Err(Error::BadLabel(s.to_string())),
        };
        Ok(label)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Innovation {
    #[default]
    Normal,
    /// `(χ²₁ − 1)/√2`.
    StdChiSq1,
}

impl Innovation {
    pub fn name(self) -> &'static str {
        match self {
            Innovation::Normal => "normal",
            Innovation::StdChiSq1 => "std-chi-sq1",
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        match self {
            Innovation::Normal => z,
            Innovation::StdChiSq1 => (z * z - 1.0) / std::f64::consts::SQRT_2,
        }
    }
}

impl FromStr for Innovation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "normal" | "gaussian" | "i" => Ok(Innovation::Normal),
            "std-chi-sq1" | "chisq" | "chi-square" | "chi2" | "ii" => Ok(Innovation::StdChiSq1),
            _ => Err(Error::InvalidArgument(format!("unknown innovation `{s}`"))),
        }
    }
}

fn default_m() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimSetting {
    pub label: SettingLabel,
    #[serde(default)]
    pub innovation: Innovation,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    #[serde(default = "default_m")]
    pub m: usize,
    /// Sparsity level of the varying-sparsity design, 2 to 7.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<u32>,
    #[serde(default)]
    pub seed: u64,
}

impl SimSetting {
    pub fn new(label: SettingLabel, n: usize, p: usize, q: usize) -> Self {
        Self {
            label,
            innovation: Innovation::Normal,
            n,
            p,
            q,
            m: 3,
            v: None,
            seed: 0,
        }
    }

    pub fn with_innovation(mut self, innovation: Innovation) -> Self {
        self.innovation = innovation;
        self
    }

    pub fn with_v(mut self, v: u32) -> Self {
        self.v = Some(v);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// e.g. `null-ma/normal/n100/p50/q50` or `varying-sparsity(v=3)/...`.
    pub fn name(&self) -> String {
        let label = match (self.label, self.v) {
            (SettingLabel::VaryingSparsity, Some(v)) => format!("{}(v={v})", self.label),
            _ => self.label.to_string(),
        };
        let innovation = match self.label {
            SettingLabel::VaryingSparsity | SettingLabel::SignedSparse => String::new(),
            _ => format!("/{}", self.innovation.name()),
        };
        format!("{label}{innovation}/n{}/p{}/q{}", self.n, self.p, self.q)
    }

    /// Number of y columns that depend on x by construction.
    pub fn dependent_columns(&self) -> Result<usize> {
        self.validate()?;
        Ok(match self.label {
            SettingLabel::NullMa => 0,
            SettingLabel::NonSparse1 | SettingLabel::NonSparse2 => self.q,
            SettingLabel::Sparse1 | SettingLabel::Sparse2 => 3,
            SettingLabel::VaryingSparsity => varying_count(self.v.expect("validated")),
            SettingLabel::SignedSparse => self.p / 9,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let dim = |msg: String| Err(Error::DimensionTooSmall(msg));
        if self.n < 2 {
            return dim(format!("n = {} (need at least 2)", self.n));
        }
        if self.p == 0 || self.q == 0 {
            return dim(format!("p = {}, q = {}", self.p, self.q));
        }
        if self.m == 0 {
            return Err(Error::InvalidSpec("moving-average order m must be at least 1".into()));
        }
        match self.label {
            SettingLabel::NullMa => {}
            SettingLabel::NonSparse1 | SettingLabel::NonSparse2 | SettingLabel::Sparse1 | SettingLabel::Sparse2 => {
                if self.p != self.q {
                    return Err(Error::InvalidSpec(format!("{} needs p = q", self.label)));
                }
                if matches!(self.label, SettingLabel::Sparse1 | SettingLabel::Sparse2) && self.q < 4 {
                    return dim(format!("{} needs p = q ≥ 4, got {}", self.label, self.q));
                }
            }
            SettingLabel::VaryingSparsity => {
                let v = self
                    .v
                    .ok_or_else(|| Error::InvalidSpec("varying-sparsity needs v".into()))?;
                if !(2..=7).contains(&v) {
                    return Err(Error::InvalidSpec(format!("v must lie in 2..=7, got {v}")));
                }
                let d = varying_count(v);
                if d > self.p.min(self.q) {
                    return dim(format!("v = {v} needs {d} columns, have p = {}, q = {}", self.p, self.q));
                }
            }
            SettingLabel::SignedSparse => {
                if self.p != self.q {
                    return Err(Error::InvalidSpec(format!("{} needs p = q", self.label)));
                }
                if self.p < 9 {
                    return dim(format!("signed-sparse needs p ≥ 9, got {}", self.p));
                }
            }
        }
        if self.label != SettingLabel::VaryingSparsity && self.v.is_some() {
            return Err(Error::InvalidSpec(format!("v is only meaningful for varying-sparsity, not {}", self.label)));
        }
        Ok(())
    }
}

/// `⌊(v/2)³⌋`.
pub fn varying_count(v: u32) -> usize {
    (v * v * v / 8) as usize
}

/// Signal strength `a = 6.8 / {(log v)^0.4 √(log(pq)/n)}`.
pub fn varying_strength(v: u32, n: usize, p: usize, q: usize) -> f64 {
    6.8 / ((v as f64).ln().powf(0.4) * (((p * q) as f64).ln() / n as f64).sqrt())
}

/// A dataset together with, per y column, whether its construction read x.
#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub data: DataPair,
    pub y_uses_x: Vec<bool>,
}

pub fn gen_null(setting: &SimSetting) -> Result<DataPair> {
    if !setting.label.is_null() {
        return Err(Error::BadLabel(format!("{} is not a null design", setting.label)));
    }
    generate(setting).map(|g| g.data)
}

pub fn gen_alternative(setting: &SimSetting) -> Result<DataPair> {
    if setting.label.is_null() {
        return Err(Error::BadLabel("null-ma is not an alternative".into()));
    }
    generate(setting).map(|g| g.data)
}

pub fn generate(setting: &SimSetting) -> Result<Generated> {
    setting.validate()?;
    match setting.label {
        SettingLabel::VaryingSparsity | SettingLabel::SignedSparse => Ok(banded_design(setting)),
        _ => Ok(moving_average_design(setting)),
    }
}

fn normal_column(rng: &mut ChaCha8Rng, n: usize, sd: f64) -> Vec<f64> {
    (0..n).map(|_| sd * Innovation::Normal.sample(rng)).collect()
}

/// `Σ_t σ_t ε_{·, c+t}` for `c = 1..=width`, from an innovation matrix with
/// `width + m` columns (1-based column `t` stored at index `t − 1`).
fn moving_sums(innov: &[Vec<f64>], sigma: &[f64], width: usize, n: usize) -> Vec<Vec<f64>> {
    (1..=width)
        .map(|c| {
            (0..n)
                .map(|k| sigma.iter().enumerate().map(|(t, s)| s * innov[c + t][k]).sum())
                .collect()
        })
        .collect()
}

fn moving_average_design(s: &SimSetting) -> Generated {
    let n = s.n;
    let mut coeff_rng = substream(s.seed, 0);
    let sigma_x: Vec<f64> = (0..s.m).map(|_| coeff_rng.random_range(1.0..2.0)).collect();
    let sigma_y: Vec<f64> = (0..s.m).map(|_| coeff_rng.random_range(0.5..1.5)).collect();
    let innovations = |stream: u64, cols: usize| {
        let mut rng = substream(s.seed, stream);
        (0..cols)
            .map(|_| (0..n).map(|_| s.innovation.sample(&mut rng)).collect::<Vec<f64>>())
            .collect::<Vec<_>>()
    };
    let e1 = innovations(1, s.p + s.m);
    let e2 = innovations(2, s.q + s.m);
    let ma_x = moving_sums(&e1, &sigma_x, s.p, n);
    let ma_y = moving_sums(&e2, &sigma_y, s.q, n);
    let map = |col: &Vec<f64>, f: fn(f64) -> f64| col.iter().map(|&v| f(v)).collect::<Vec<f64>>();

    if s.label.is_null() {
        return finish(ma_x, ma_y.into_iter().map(|c| (c, false)).collect());
    }
    let z: Vec<Vec<f64>> = ma_x.iter().map(|c| map(c, f64::cos)).collect();
    let z_star: Vec<Vec<f64>> = ma_y.iter().map(|c| map(c, f64::sin)).collect();
    let (x, y): (Vec<Vec<f64>>, Vec<(Vec<f64>, bool)>) = match s.label {
        SettingLabel::NonSparse1 => (
            z.iter().map(|c| map(c, |v| 0.2 * v.cos())).collect(),
            z.iter().map(|c| (map(c, |v| 0.2 * v.sin()), true)).collect(),
        ),
        SettingLabel::NonSparse2 => {
            let y = z.iter().map(|c| (map(c, |v| 0.01 * (v.abs().powi(3)).ln()), true)).collect();
            (z, y)
        }
        SettingLabel::Sparse1 => {
            // Columns outside 1..=p (X_{·,0}) contribute zero.
            let y = (0..s.q)
                .map(|j| {
                    if j >= 3 {
                        return (z_star[j].clone(), false);
                    }
                    let col = (0..n)
                        .map(|k| {
                            let prev = if j == 0 { 0.0 } else { z[j - 1][k] };
                            0.2 * z[j][k] - 0.4 * z[j + 1][k] + 0.6 * prev + z_star[j][k]
                        })
                        .collect();
                    (col, true)
                })
                .collect();
            (z, y)
        }
        SettingLabel::Sparse2 => {
            let y = (0..s.q)
                .map(|j| {
                    if j >= 3 {
                        return (z_star[j].clone(), false);
                    }
                    let col = (0..n).map(|k| 0.5 * z[j][k].exp() + z_star[j][k]).collect();
                    (col, true)
                })
                .collect();
            (z, y)
        }
        _ => unreachable!("banded designs are generated elsewhere"),
    };
    finish(x, y)
}

fn finish(x: Vec<Vec<f64>>, y: Vec<(Vec<f64>, bool)>) -> Generated {
    let (y, y_uses_x): (Vec<_>, Vec<_>) = y.into_iter().unzip();
    Generated {
        data: DataPair::from_columns(x, y).expect("generated columns are rectangular and finite"),
        y_uses_x,
    }
}

/// `σ_ss = √s`, `σ_st = 0.3 √(σ_ss σ_tt)` for `0 < |s − t| ≤ 3`, 1-based.
pub fn banded_covariance(dim: usize) -> Vec<Vec<f64>> {
    let diag = |s: usize| ((s + 1) as f64).sqrt();
    (0..dim)
        .map(|s| {
            (0..dim)
                .map(|t| match s.abs_diff(t) {
                    0 => diag(s),
                    1..=3 => 0.3 * (diag(s) * diag(t)).sqrt(),
                    _ => 0.0,
                })
                .collect()
        })
        .collect()
}

/// Lower-triangular `L` with `L Lᵀ = a`, for symmetric positive definite `a`.
pub fn cholesky(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let dim = a.len();
    let mut l = vec![vec![0.0; dim]; dim];
    for i in 0..dim {
        for j in 0..=i {
            let dot: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - dot;
                if d <= 0.0 {
                    return Err(Error::InvalidArgument(format!("matrix not positive definite at {i}")));
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - dot) / l[j][j];
            }
        }
    }
    Ok(l)
}

/// `n` draws from `N(0, L Lᵀ)`, returned column-major.
fn mvn_columns(rng: &mut ChaCha8Rng, l: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let dim = l.len();
    let mut cols = vec![vec![0.0; n]; dim];
    let mut z = vec![0.0; dim];
    for k in 0..n {
        for v in z.iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        for (i, col) in cols.iter_mut().enumerate() {
            col[k] = (0..=i).map(|t| l[i][t] * z[t]).sum();
        }
    }
    cols
}

fn banded_design(s: &SimSetting) -> Generated {
    let n = s.n;
    let l = cholesky(&banded_covariance(s.p)).expect("banded covariance is positive definite");
    let x = mvn_columns(&mut substream(s.seed, 1), &l, n);
    let mut y_rng = substream(s.seed, 2);
    let (d, square_rest) = match s.label {
        SettingLabel::VaryingSparsity => (varying_count(s.v.expect("validated")), true),
        _ => (s.p / 9, false),
    };
    let strength = |j: usize| match s.label {
        SettingLabel::VaryingSparsity => varying_strength(s.v.expect("validated"), n, s.p, s.q),
        // 2(−1)^{−j} with 1-based j.
        _ => {
            if (j + 1).is_multiple_of(2) {
                2.0
            } else {
                -2.0
            }
        }
    };
    let mut y: Vec<(Vec<f64>, bool)> = (0..d)
        .map(|j| {
            let eps = normal_column(&mut y_rng, n, (j + 1) as f64);
            let a = strength(j);
            let col = (0..n).map(|k| a * x[j][k] * x[j][k] + eps[k]).collect();
            (col, true)
        })
        .collect();
    if d < s.q {
        let l_star = cholesky(&banded_covariance(s.q - d)).expect("banded covariance is positive definite");
        for col in mvn_columns(&mut y_rng, &l_star, n) {
            let col = if square_rest { col.iter().map(|v| v * v).collect() } else { col };
            y.push((col, false));
        }
    }
    finish(x, y)
}
