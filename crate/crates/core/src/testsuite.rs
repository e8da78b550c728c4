//! Max-type, sum-type and max-sum tests for one correlation kind.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::aggregate::{max_stat, null_moments, standardize_max_value, sum_stat, NullMoments};
use crate::error::{Error, Result};
use crate::nulldist::{chi4_upper_quantile, max_critical_with_kappa, normal_upper_quantile, TailLaw, DEFAULT_KAPPA};
use crate::paircorr::{stat_matrix, CorrelationKind, PairStatMatrix};
use crate::permute::{permuted_sum_draws, sum_zscore, PermutationEstimate, PermutationPlan};
use crate::ranks::{rank_columns, DataPair, RankedPair, TiePolicy};
use crate::scalar::Scalar;

/// Smallest p-value passed to the logarithm in the max-sum combination.
pub const PVALUE_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Max,
    Sum,
    MaxSum,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Max, Family::Sum, Family::MaxSum];

    pub fn name(self) -> &'static str {
        match self {
            Family::Max => "max",
            Family::Sum => "sum",
            Family::MaxSum => "maxsum",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "max" | "l" => Ok(Family::Max),
            "sum" | "s" => Ok(Family::Sum),
            "maxsum" | "tc" | "fisher" => Ok(Family::MaxSum),
            _ => Err(Error::InvalidArgument(format!("unknown test family `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub kind: CorrelationKind,
    pub family: Family,
    pub alpha: f64,
    #[serde(default)]
    pub adjusted: bool,
    #[serde(default)]
    pub plan: PermutationPlan,
    #[serde(default)]
    pub tie_policy: TiePolicy,
    /// Overrides the tabulated κ of the degenerate-kernel max law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl TestSpec {
    /// Level 0.05, unadjusted, default permutation plan.
    pub fn new(kind: CorrelationKind, family: Family) -> Self {
        Self {
            kind,
            family,
            alpha: 0.05,
            adjusted: false,
            plan: PermutationPlan::default(),
            tie_policy: TiePolicy::Error,
            kappa: None,
        }
    }

    pub fn adjusted(mut self, adjusted: bool) -> Self {
        self.adjusted = adjusted;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_plan(mut self, plan: PermutationPlan) -> Self {
        self.plan = plan;
        self
    }

    /// Whether the finite-sample adjustment exists for this kind and family.
    pub fn adjustment_available(kind: CorrelationKind, family: Family) -> bool {
        match family {
            Family::Max => kind == CorrelationKind::HoeffdingD,
            Family::Sum | Family::MaxSum => kind.is_degenerate(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::AlphaOutOfRange(self.alpha));
        }
        if self.adjusted && !Self::adjustment_available(self.kind, self.family) {
            return Err(Error::InvalidSpec(format!(
                "no adjusted {} test for {}",
                self.family, self.kind
            )));
        }
        if self.family != Family::Max {
            self.plan.validate()?;
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidSpec(format!("kappa must be positive, got {k}")));
            }
        }
        Ok(())
    }

    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(DEFAULT_KAPPA)
    }

    /// Short label such as `L_rho`, `S_D'` or `TC_tau*'`.
    pub fn label(&self) -> String {
        let prefix = match self.family {
            Family::Max => "L",
            Family::Sum => "S",
            Family::MaxSum => "TC",
        };
        let prime = if self.adjusted { "'" } else { "" };
        format!("{prefix}_{}{prime}", self.kind.short_name())
    }

    fn adjust_max(&self) -> bool {
        self.adjusted && self.kind == CorrelationKind::HoeffdingD
    }

    fn adjust_sum(&self) -> bool {
        self.adjusted && self.kind.is_degenerate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport<T = f64> {
    pub spec: TestSpec,
    pub label: String,
    /// `max`, `S` or `T_C` depending on the family.
    pub statistic: T,
    /// Standardized max, z-score, or `T_C` again for the max-sum family.
    pub standardized: T,
    pub p_value: T,
    pub critical: f64,
    pub reject: bool,
    /// `(P_L, P_S)` for the max-sum family.
    pub components: Option<(T, T)>,
    pub sigma_hat: Option<T>,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    /// Set when a tie policy other than `Error` actually broke ties.
    pub ties_broken: bool,
}

/// `−2 log P_L − 2 log P_S`, each p-value floored at [`PVALUE_FLOOR`].
pub fn fisher_combine<T: Scalar>(p_max: T, p_sum: T) -> T {
    let floor = T::c(PVALUE_FLOOR);
    -T::c(2.0) * (p_max.max(floor).ln() + p_sum.max(floor).ln())
}

/// Ranks, statistic matrix and null moments for one kind: everything the
/// three families share.
#[derive(Clone, Debug)]
pub struct Prepared<T = f64> {
    pub ranked: RankedPair,
    pub matrix: PairStatMatrix<T>,
    pub moments: NullMoments<T>,
}

impl<T: Scalar> Prepared<T> {
    pub fn new(ranked: RankedPair, kind: CorrelationKind, kappa: f64) -> Result<Self> {
        let moments = null_moments::<T>(kind, ranked.n)?.with_kappa(kappa);
        let matrix = stat_matrix::<T>(&ranked, kind)?;
        Ok(Self { ranked, matrix, moments })
    }

    fn kind(&self) -> CorrelationKind {
        self.matrix.kind
    }
}

struct MaxPart<T> {
    statistic: T,
    standardized: T,
    p_value: T,
    critical: f64,
}

struct SumPart<T> {
    statistic: T,
    z: T,
    p_value: T,
    sigma_hat: T,
}

fn max_part<T: Scalar>(prep: &Prepared<T>, spec: &TestSpec) -> Result<MaxPart<T>> {
    let statistic = max_stat(&prep.matrix)?;
    let mut standardized = standardize_max_value(statistic, prep.matrix.len(), &prep.moments)?;
    if spec.adjust_max() {
        let np = (prep.ranked.n * prep.ranked.p()) as f64;
        standardized = standardized / T::c(1.0 + 2.0 / np.ln());
    }
    let law = TailLaw::for_max(prep.kind(), spec.kappa());
    Ok(MaxPart {
        statistic,
        standardized,
        p_value: law.survival(standardized),
        critical: max_critical_with_kappa(prep.kind(), spec.alpha, spec.kappa())?,
    })
}

fn sum_part<T: Scalar>(prep: &Prepared<T>, spec: &TestSpec, est: &PermutationEstimate<T>) -> Result<SumPart<T>> {
    let statistic = sum_stat(&prep.matrix, &prep.moments)?;
    let z = sum_zscore(statistic, est.sigma_hat, spec.adjust_sum(), prep.ranked.n)?;
    Ok(SumPart {
        statistic,
        z,
        p_value: TailLaw::StdNormal.survival(z),
        sigma_hat: est.sigma_hat,
    })
}

fn base_report<T: Scalar>(prep: &Prepared<T>, spec: &TestSpec, value: T) -> TestReport<T> {
    TestReport {
        spec: spec.clone(),
        label: spec.label(),
        statistic: value,
        standardized: value,
        p_value: T::one(),
        critical: 0.0,
        reject: false,
        components: None,
        sigma_hat: None,
        n: prep.ranked.n,
        p: prep.ranked.p(),
        q: prep.ranked.q(),
        ties_broken: prep.ranked.has_ties(),
    }
}

/// Runs `spec` against prepared pieces. `estimate` is required for the sum
/// and max-sum families.
pub fn run_prepared<T: Scalar>(
    prep: &Prepared<T>,
    spec: &TestSpec,
    estimate: Option<&PermutationEstimate<T>>,
) -> Result<TestReport<T>> {
    spec.validate()?;
    if prep.kind() != spec.kind {
        return Err(Error::KindMismatch {
            matrix: prep.kind(),
            moments: spec.kind,
        });
    }
    let need_estimate = || {
        estimate.ok_or_else(|| Error::InvalidArgument(format!("{} test needs a permutation estimate", spec.family)))
    };
    let mut report = base_report(prep, spec, T::zero());
    match spec.family {
        Family::Max => {
            let m = max_part(prep, spec)?;
            report.statistic = m.statistic;
            report.standardized = m.standardized;
            report.p_value = m.p_value;
            report.critical = m.critical;
            report.reject = m.standardized.to_f64_lossy() >= m.critical;
        }
        Family::Sum => {
            let s = sum_part(prep, spec, need_estimate()?)?;
            let critical = normal_upper_quantile(spec.alpha)?;
            report.statistic = s.statistic;
            report.standardized = s.z;
            report.p_value = s.p_value;
            report.critical = critical;
            report.reject = s.z.to_f64_lossy() >= critical;
            report.sigma_hat = Some(s.sigma_hat);
        }
        Family::MaxSum => {
            let m = max_part(prep, spec)?;
            let s = sum_part(prep, spec, need_estimate()?)?;
            let t_c = fisher_combine(m.p_value, s.p_value);
            let critical = chi4_upper_quantile(spec.alpha)?;
            report.statistic = t_c;
            report.standardized = t_c;
            report.p_value = TailLaw::ChiSq4.survival(t_c);
            report.critical = critical;
            report.reject = t_c.to_f64_lossy() > critical;
            report.components = Some((m.p_value, s.p_value));
            report.sigma_hat = Some(s.sigma_hat);
        }
    }
    Ok(report)
}

fn prepare<T: Scalar>(data: &DataPair<T>, spec: &TestSpec) -> Result<Prepared<T>> {
    spec.validate()?;
    let ranked = rank_columns(data, spec.tie_policy)?;
    Prepared::new(ranked, spec.kind, spec.kappa())
}

fn run_single<T: Scalar>(data: &DataPair<T>, spec: &TestSpec, family: Family) -> Result<TestReport<T>> {
    if spec.family != family {
        return Err(Error::InvalidSpec(format!(
            "spec family is {}, expected {family}",
            spec.family
        )));
    }
    let prep = prepare(data, spec)?;
    let estimate = match family {
        Family::Max => None,
        _ => Some(permuted_sum_draws::<T>(&prep.ranked, spec.kind, &spec.plan)?),
    };
    run_prepared(&prep, spec, estimate.as_ref())
}

pub fn run_max_test<T: Scalar>(data: &DataPair<T>, spec: &TestSpec) -> Result<TestReport<T>> {
    run_single(data, spec, Family::Max)
}

pub fn run_sum_test<T: Scalar>(data: &DataPair<T>, spec: &TestSpec) -> Result<TestReport<T>> {
    run_single(data, spec, Family::Sum)
}

pub fn run_maxsum_test<T: Scalar>(data: &DataPair<T>, spec: &TestSpec) -> Result<TestReport<T>> {
    run_single(data, spec, Family::MaxSum)
}

/// Dispatches on `spec.family`.
pub fn run_test<T: Scalar>(data: &DataPair<T>, spec: &TestSpec) -> Result<TestReport<T>> {
    run_single(data, spec, spec.family)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatterySpec {
    pub kinds: Vec<CorrelationKind>,
    pub families: Vec<Family>,
    pub alpha: f64,
    /// Applied to each (kind, family) for which an adjustment exists.
    #[serde(default)]
    pub adjusted: bool,
    #[serde(default)]
    pub plan: PermutationPlan,
    #[serde(default)]
    pub tie_policy: TiePolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl BatterySpec {
    pub fn new(kinds: Vec<CorrelationKind>, families: Vec<Family>) -> Self {
        Self {
            kinds,
            families,
            alpha: 0.05,
            adjusted: false,
            plan: PermutationPlan::default(),
            tie_policy: TiePolicy::Error,
            kappa: None,
        }
    }

    /// Specs in battery order: kind-major, family-minor.
    pub fn specs(&self) -> Vec<TestSpec> {
        self.kinds
            .iter()
            .flat_map(|&kind| self.families.iter().map(move |&family| (kind, family)))
            .map(|(kind, family)| TestSpec {
                kind,
                family,
                alpha: self.alpha,
                adjusted: self.adjusted && TestSpec::adjustment_available(kind, family),
                plan: self.plan.clone(),
                tie_policy: self.tie_policy,
                kappa: self.kappa,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatteryEntry<T = f64> {
    pub spec: TestSpec,
    pub outcome: Result<TestReport<T>>,
}

/// Every (kind, family) combination on one dataset. Ranks are computed once,
/// and the statistic matrix and permutation estimate once per kind.
/// Failures of individual entries are recorded, not propagated.
pub fn run_battery<T: Scalar>(data: &DataPair<T>, battery: &BatterySpec) -> Result<Vec<BatteryEntry<T>>> {
    if battery.kinds.is_empty() {
        return Err(Error::InvalidArgument("battery needs at least one kind".into()));
    }
    if battery.families.is_empty() {
        return Err(Error::InvalidArgument("battery needs at least one family".into()));
    }
    let ranked = rank_columns(data, battery.tie_policy)?;
    let specs = battery.specs();
    let mut entries = Vec::with_capacity(specs.len());
    for chunk in specs.chunks(battery.families.len()) {
        let kind = chunk[0].kind;
        let prep = Prepared::<T>::new(ranked.clone(), kind, chunk[0].kappa());
        let needs_sum = chunk.iter().any(|s| s.family != Family::Max);
        let estimate = match (&prep, needs_sum) {
            (Ok(p), true) => Some(permuted_sum_draws::<T>(&p.ranked, kind, &battery.plan)),
            _ => None,
        };
        for spec in chunk {
            let outcome = match (&prep, &estimate) {
                (Err(e), _) => Err(e.clone()),
                (Ok(_), Some(Err(e))) if spec.family != Family::Max => Err(e.clone()),
                (Ok(p), est) => run_prepared(p, spec, est.as_ref().and_then(|r| r.as_ref().ok())),
            };
            entries.push(BatteryEntry {
                spec: spec.clone(),
                outcome,
            });
        }
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, p: usize, q: usize, seed: u64) -> DataPair {
        let mut rng = substream(seed, 0);
        let mut col = |_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect::<Vec<f64>>();
        let x = (0..p).map(&mut col).collect();
        let y = (0..q).map(&mut col).collect();
        DataPair::from_columns(x, y).unwrap()
    }

    fn copy(n: usize, p: usize, seed: u64) -> DataPair {
        let g = gaussian(n, p, 1, seed);
        DataPair::from_columns(g.x_columns().to_vec(), g.x_columns().to_vec()).unwrap()
    }

    #[test]
    fn labels_and_validation() {
        let d = TestSpec::new(CorrelationKind::HoeffdingD, Family::MaxSum).adjusted(true);
        assert_eq!(d.label(), "TC_D'");
        assert!(d.validate().is_ok());
        assert_eq!(TestSpec::new(CorrelationKind::SpearmanRho, Family::Max).label(), "L_rho");
        assert!(TestSpec::new(CorrelationKind::BkrR, Family::Max).adjusted(true).validate().is_err());
        assert!(TestSpec::new(CorrelationKind::HoeffdingD, Family::Max).adjusted(true).validate().is_ok());
        assert!(TestSpec::new(CorrelationKind::KendallTau, Family::Sum).adjusted(true).validate().is_err());
        assert!(TestSpec::new(CorrelationKind::KendallTau, Family::Sum).with_alpha(0.0).validate().is_err());
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
    }

    #[test]
    fn fisher_examples() {
        assert_eq!(fisher_combine(1.0f64, 1.0), 0.0);
        let t = fisher_combine(0.05f64, 0.05);
        assert!((t - (-4.0 * 0.05f64.ln())).abs() < 1e-12);
        assert!(t > chi4_upper_quantile(0.05).unwrap());
        assert!(fisher_combine(0.0f64, 0.5).is_finite());
        assert!(fisher_combine(0.2f64, 0.3) < fisher_combine(0.1, 0.3));
        assert!(fisher_combine(0.2f64, 0.3) < fisher_combine(0.2, 0.25));
    }

    #[test]
    fn perfect_dependence_rejects_max() {
        let spec = TestSpec::new(CorrelationKind::SpearmanRho, Family::Max);
        let r = run_max_test(&copy(100, 50, 1), &spec).unwrap();
        assert!(r.reject);
        assert_eq!(r.statistic, 1.0);
    }

    #[test]
    fn perfect_dependence_rejects_sum() {
        let spec = TestSpec::new(CorrelationKind::KendallTau, Family::Sum);
        let r = run_sum_test(&copy(50, 5, 2), &spec).unwrap();
        assert!(r.reject);
    }

    #[test]
    fn family_mismatch_is_an_error() {
        let spec = TestSpec::new(CorrelationKind::KendallTau, Family::Sum);
        assert!(matches!(run_max_test(&gaussian(10, 2, 2, 0), &spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn vacuous_level_rejects() {
        let data = gaussian(40, 4, 4, 9);
        let spec = TestSpec::new(CorrelationKind::SpearmanRho, Family::Max).with_alpha(1.0 - 1e-12);
        let r = run_max_test(&data, &spec).unwrap();
        assert!(r.p_value < 1.0);
        assert!(r.reject);
    }

    #[test]
    fn maxsum_components_match_single_tests() {
        let data = gaussian(30, 4, 3, 5);
        let plan = PermutationPlan::new(20, 77);
        for kind in CorrelationKind::ALL {
            let spec = |f| TestSpec::new(kind, f).with_plan(plan.clone());
            let l = run_max_test(&data, &spec(Family::Max)).unwrap();
            let s = run_sum_test(&data, &spec(Family::Sum)).unwrap();
            let c = run_maxsum_test(&data, &spec(Family::MaxSum)).unwrap();
            assert_eq!(c.components, Some((l.p_value, s.p_value)));
            assert_eq!(c.statistic, fisher_combine(l.p_value, s.p_value));
            assert_eq!(c.reject, c.statistic > c.critical);
        }
    }

    #[test]
    fn battery_order_and_sharing() {
        let data = gaussian(20, 3, 3, 3);
        let mut b = BatterySpec::new(CorrelationKind::ALL.to_vec(), Family::ALL.to_vec());
        b.plan = PermutationPlan::new(10, 1);
        b.adjusted = true;
        let entries = run_battery(&data, &b).unwrap();
        assert_eq!(entries.len(), 15);
        let order: Vec<_> = entries.iter().map(|e| (e.spec.kind, e.spec.family)).collect();
        let expected: Vec<_> = CorrelationKind::ALL
            .iter()
            .flat_map(|&k| Family::ALL.iter().map(move |&f| (k, f)))
            .collect();
        assert_eq!(order, expected);
        for e in &entries {
            let standalone = run_test(&data, &e.spec).unwrap();
            assert_eq!(e.outcome.as_ref().unwrap(), &standalone);
        }
        assert_eq!(entries[1].spec.adjusted, false);
        assert_eq!(entries[7].spec.label(), "S_D'");
        assert_eq!(entries[6].spec.label(), "L_D'");
        assert_eq!(entries[9].spec.label(), "L_R");
    }

    #[test]
    fn battery_guards_and_entry_errors() {
        let data = gaussian(5, 2, 2, 3);
        assert!(run_battery(&data, &BatterySpec::new(vec![], vec![Family::Max])).is_err());
        let b = BatterySpec::new(vec![CorrelationKind::SpearmanRho, CorrelationKind::BkrR], vec![Family::Max]);
        let entries = run_battery(&data, &b).unwrap();
        assert!(entries[0].outcome.is_ok());
        assert!(entries[1].outcome.is_err());
    }
}
