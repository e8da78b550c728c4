//! Rank-based tests of independence between two random vectors in high
//! dimension.
//!
//! Every coordinate pair `(X_i, Y_j)` contributes one rank correlation:
//! Spearman's ρ, Kendall's τ, Hoeffding's D, the Blum–Kiefer–Rosenblatt R or
//! the Bergsma–Dassios–Yanagimoto τ*. The `p × q` matrix of these is
//! aggregated by its maximum (sparse alternatives), by its centred sum of
//! squares (dense alternatives), or by a Fisher combination of both.
//!
//! ```
//! use rank_indep::{run_test, CorrelationKind, DataPair, Family, TestSpec};
//!
//! let x = vec![vec![0.1, 0.7, 0.3, 0.9, 0.5, 0.2, 0.8]];
//! let y = vec![
//!     vec![1.0, 6.0, 2.0, 7.5, 4.0, 1.5, 7.0],
//!     vec![0.4, 0.1, 0.6, 0.3, 0.2, 0.5, 0.7],
//! ];
//! let data = DataPair::from_columns(x, y).unwrap();
//! let spec = TestSpec::new(CorrelationKind::KendallTau, Family::Max);
//! let report = run_test(&data, &spec).unwrap();
//! assert_eq!(report.statistic, 1.0);
//! ```
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); pair
//! statistics are computed from exact integer counts and rounded once.

pub mod aggregate;
pub mod dgp;
pub mod error;
pub mod nulldist;
pub mod oracle;
pub mod paircorr;
pub mod permute;
pub mod ranks;
pub mod rng;
pub mod scalar;
pub mod sim;
pub mod testsuite;

pub use aggregate::{max_stat, null_moments, standardized_max, sum_stat, NullMoments};
pub use dgp::{gen_alternative, gen_null, generate, Innovation, SettingLabel, SimSetting};
pub use error::{Error, Result};
pub use nulldist::{chi4_upper_quantile, max_critical, max_pvalue, normal_upper_quantile, TailLaw};
pub use oracle::{brute_ustat, brute_ustat_exact, eval_kernel, Exact, KernelKind};
pub use paircorr::{pair_statistic, stat_matrix, CorrelationKind, PairStatMatrix};
pub use permute::{permuted_sum_draws, sum_pvalue, PermutationEstimate, PermutationPlan};
pub use ranks::{joint_rank_sequence, rank_columns, DataPair, RankedPair, TiePolicy};
pub use scalar::Scalar;
pub use sim::{power_curve, run_study, subsample_rejection, StudyConfig, StudyReport};
pub use testsuite::{
    fisher_combine, run_battery, run_max_test, run_maxsum_test, run_sum_test, run_test, BatterySpec, Family,
    TestReport, TestSpec,
};

pub type DataPair64 = DataPair<f64>;
pub type DataPair32 = DataPair<f32>;
pub type PairStatMatrix64 = PairStatMatrix<f64>;
pub type PairStatMatrix32 = PairStatMatrix<f32>;
pub type NullMoments64 = NullMoments<f64>;
pub type NullMoments32 = NullMoments<f32>;
pub type PermutationEstimate64 = PermutationEstimate<f64>;
pub type PermutationEstimate32 = PermutationEstimate<f32>;
pub type TestReport64 = TestReport<f64>;
pub type TestReport32 = TestReport<f32>;
