//! Monte Carlo size and power studies.
//!
//! Replication `r` of setting `s` draws its data from seed
//! `derive_seed([base_seed, s, r])` and its permutations from
//! `derive_seed([plan.seed, cell_seed])`, so every cell can be recomputed in
//! isolation and the report does not depend on the thread schedule.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dgp::{generate, SettingLabel, SimSetting};
use crate::error::{Error, Result};
use crate::paircorr::CorrelationKind;
use crate::permute::{permuted_sum_draws, PermutationEstimate, PermutationPlan};
use crate::ranks::{rank_columns, DataPair, RankedPair, TiePolicy};
use crate::rng::{derive_seed, sample_without_replacement, substream, RNG_NAME};
use crate::testsuite::{run_prepared, Family, Prepared, TestReport, TestSpec};

/// A test that is not one of the built-in families, run alongside them.
pub trait ExternalTest: Send + Sync {
    fn label(&self) -> String;
    fn reject(&self, data: &DataPair, alpha: f64) -> Result<bool>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub settings: Vec<SimSetting>,
    pub specs: Vec<TestSpec>,
    pub replications: usize,
    pub base_seed: u64,
    /// Worker threads; 0 uses the ambient rayon pool.
    #[serde(default)]
    pub worker_hint: usize,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidArgument("replications must be at least 1".into()));
        }
        if self.settings.is_empty() {
            return Err(Error::InvalidArgument("study needs at least one setting".into()));
        }
        if self.specs.is_empty() {
            return Err(Error::InvalidArgument("study needs at least one test spec".into()));
        }
        for s in &self.settings {
            s.validate()?;
        }
        for spec in &self.specs {
            spec.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, excluding `worker_hint`.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(map) = value.as_object_mut() {
            map.remove("worker_hint");
        }
        hex::encode(Sha256::digest(value.to_string().as_bytes()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub setting: String,
    pub spec: String,
    pub rejections: usize,
    /// Replications that produced a decision.
    pub replications: usize,
    pub failures: usize,
    /// `rejections / replications`; 0 when every replication failed.
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub setting: String,
    pub spec: String,
    pub replication: usize,
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyMetadata {
    pub base_seed: u64,
    pub replications: usize,
    pub config_hash: String,
    pub rng: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub cells: Vec<CellResult>,
    pub failures: Vec<FailureRecord>,
    pub metadata: StudyMetadata,
}

/// Wall-clock timings, kept apart from [`StudyReport`] so that the report
/// itself is reproducible byte for byte.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StudyTiming {
    /// Mean seconds per replication, one entry per setting.
    pub mean_replication_secs: Vec<f64>,
    pub total_secs: f64,
}

impl StudyReport {
    pub const TSV_HEADER: &'static str = "setting\tspec\trate\treps";

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(Self::TSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            out.push_str(&format!("{}\t{}\t{:.4}\t{}\n", c.setting, c.spec, c.rate, c.replications));
        }
        out
    }

    /// Sorted keys, shortest round-trip floats.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_value(self).expect("report serializes").to_string()
    }

    pub fn cell(&self, setting: &str, spec: &str) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.setting == setting && c.spec == spec)
    }
}

/// Per-spec outcome of one replication: `Ok(reject)` or an error message.
type Decisions = Vec<std::result::Result<bool, String>>;

/// Runs `specs` on one dataset, computing ranks once per tie policy, the
/// statistic matrix once per kind, and each permutation estimate once.
/// `cell_seed` is mixed into each plan's seed.
pub fn evaluate_specs(data: &DataPair, specs: &[TestSpec], cell_seed: Option<u64>) -> Vec<Result<TestReport>> {
    let mut ranked: Vec<(TiePolicy, Result<RankedPair>)> = Vec::new();
    let mut prepared: Vec<((TiePolicy, CorrelationKind, u64), Result<Prepared>)> = Vec::new();
    let mut estimates: Vec<((TiePolicy, CorrelationKind, u64, PermutationPlan), Result<PermutationEstimate>)> =
        Vec::new();
    specs
        .iter()
        .map(|spec| {
            spec.validate()?;
            if !ranked.iter().any(|(t, _)| *t == spec.tie_policy) {
                ranked.push((spec.tie_policy, rank_columns(data, spec.tie_policy)));
            }
            let r = ranked.iter().find(|(t, _)| *t == spec.tie_policy).expect("inserted").1.clone()?;
            let kappa_bits = spec.kappa().to_bits();
            let pkey = (spec.tie_policy, spec.kind, kappa_bits);
            if !prepared.iter().any(|(k, _)| *k == pkey) {
                prepared.push((pkey, Prepared::new(r, spec.kind, spec.kappa())));
            }
            let prep = prepared.iter().find(|(k, _)| *k == pkey).expect("inserted").1.as_ref().map_err(Clone::clone)?;
            if spec.family == Family::Max {
                return run_prepared(prep, spec, None);
            }
            let mut plan = spec.plan.clone();
            if let Some(seed) = cell_seed {
                plan.seed = derive_seed(&[plan.seed, seed]);
            }
            let ekey = (spec.tie_policy, spec.kind, kappa_bits, plan.clone());
            if !estimates.iter().any(|(k, _)| *k == ekey) {
                estimates.push((ekey.clone(), permuted_sum_draws(&prep.ranked, spec.kind, &plan)));
            }
            let est = estimates.iter().find(|(k, _)| *k == ekey).expect("inserted").1.as_ref().map_err(Clone::clone)?;
            run_prepared(prep, spec, Some(est))
        })
        .collect()
}

fn run_cell(
    setting: &SimSetting,
    specs: &[TestSpec],
    externals: &[&dyn ExternalTest],
    seed: u64,
) -> (Decisions, f64) {
    let start = Instant::now();
    let data = generate(&setting.clone().with_seed(seed));
    let decisions = match data {
        Err(e) => vec![Err(e.to_string()); specs.len() + externals.len()],
        Ok(g) => {
            let mut d: Decisions = evaluate_specs(&g.data, specs, Some(seed))
                .into_iter()
                .map(|r| r.map(|rep| rep.reject).map_err(|e| e.to_string()))
                .collect();
            let alpha = specs.first().map_or(0.05, |s| s.alpha);
            d.extend(externals.iter().map(|t| t.reject(&g.data, alpha).map_err(|e| e.to_string())));
            d
        }
    };
    (decisions, start.elapsed().as_secs_f64())
}

fn with_workers<R: Send>(worker_hint: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    if worker_hint == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_hint)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn cell_seed(base_seed: u64, setting_idx: usize, rep: usize) -> u64 {
    derive_seed(&[base_seed, setting_idx as u64, rep as u64])
}

pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    run_study_with(cfg, &[]).map(|(r, _)| r)
}

pub fn run_study_timed(cfg: &StudyConfig) -> Result<(StudyReport, StudyTiming)> {
    run_study_with(cfg, &[])
}

/// Like [`run_study`], with extra tests appended after the built-in specs.
pub fn run_study_with(cfg: &StudyConfig, externals: &[&dyn ExternalTest]) -> Result<(StudyReport, StudyTiming)> {
    cfg.validate()?;
    let start = Instant::now();
    let reps = cfg.replications;
    let cells: Vec<(usize, usize)> = (0..cfg.settings.len())
        .flat_map(|s| (0..reps).map(move |r| (s, r)))
        .collect();
    let outcomes: Vec<(Decisions, f64)> = with_workers(cfg.worker_hint, || {
        cells
            .par_iter()
            .map(|&(s, r)| run_cell(&cfg.settings[s], &cfg.specs, externals, cell_seed(cfg.base_seed, s, r)))
            .collect()
    })?;

    let labels: Vec<String> = cfg
        .specs
        .iter()
        .map(TestSpec::label)
        .chain(externals.iter().map(|t| t.label()))
        .collect();
    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut timing = StudyTiming::default();
    for (s, setting) in cfg.settings.iter().enumerate() {
        let rows = &outcomes[s * reps..(s + 1) * reps];
        timing
            .mean_replication_secs
            .push(rows.iter().map(|(_, t)| t).sum::<f64>() / reps as f64);
        for (j, label) in labels.iter().enumerate() {
            let mut rejections = 0;
            let mut ok = 0;
            for (r, (decisions, _)) in rows.iter().enumerate() {
                match &decisions[j] {
                    Ok(reject) => {
                        ok += 1;
                        rejections += usize::from(*reject);
                    }
                    Err(e) => failures.push(FailureRecord {
                        setting: setting.name(),
                        spec: label.clone(),
                        replication: r,
                        seed: cell_seed(cfg.base_seed, s, r),
                        error: e.clone(),
                    }),
                }
            }
            results.push(CellResult {
                setting: setting.name(),
                spec: label.clone(),
                rejections,
                replications: ok,
                failures: reps - ok,
                rate: if ok == 0 { 0.0 } else { rejections as f64 / ok as f64 },
            });
        }
    }
    timing.total_secs = start.elapsed().as_secs_f64();
    let report = StudyReport {
        cells: results,
        failures,
        metadata: StudyMetadata {
            base_seed: cfg.base_seed,
            replications: reps,
            config_hash: cfg.hash(),
            rng: RNG_NAME.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    };
    Ok((report, timing))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub v: u32,
    pub spec: String,
    pub rate: f64,
    pub replications: usize,
}

/// One study per sparsity level of the varying-sparsity design.
pub fn power_curve(
    base: &SimSetting,
    specs: &[TestSpec],
    v_grid: &[u32],
    replications: usize,
    base_seed: u64,
    worker_hint: usize,
) -> Result<Vec<CurvePoint>> {
    if base.label != SettingLabel::VaryingSparsity {
        return Err(Error::BadLabel(format!("power curves need varying-sparsity, got {}", base.label)));
    }
    if v_grid.is_empty() {
        return Err(Error::InvalidArgument("empty v grid".into()));
    }
    if let Some(v) = v_grid.iter().find(|v| !(2..=7).contains(*v)) {
        return Err(Error::InvalidArgument(format!("v = {v} outside 2..=7")));
    }
    let mut points = Vec::new();
    for &v in v_grid {
        let cfg = StudyConfig {
            settings: vec![base.clone().with_v(v)],
            specs: specs.to_vec(),
            replications,
            base_seed: derive_seed(&[base_seed, v as u64]),
            worker_hint,
        };
        let report = run_study(&cfg)?;
        points.extend(report.cells.into_iter().map(|c| CurvePoint {
            v,
            spec: c.spec,
            rate: c.rate,
            replications: c.replications,
        }));
    }
    Ok(points)
}

pub fn curve_to_tsv(points: &[CurvePoint]) -> String {
    let mut out = String::from("v\tspec\trate\treps\n");
    for p in points {
        out.push_str(&format!("{}\t{}\t{:.4}\t{}\n", p.v, p.spec, p.rate, p.replications));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsampleRow {
    pub n_prime: usize,
    pub spec: String,
    pub rejections: usize,
    pub repeats: usize,
    pub failures: usize,
    pub rate: f64,
}

/// Rows kept by repeat `r` at subsample size `n_prime`, ascending.
pub fn subsample_rows(n: usize, n_prime: usize, r: usize, seed: u64) -> Vec<usize> {
    let mut rng = substream(derive_seed(&[seed, n_prime as u64, r as u64]), 0);
    let mut rows = sample_without_replacement(&mut rng, n, n_prime);
    rows.sort_unstable();
    rows
}

/// Rejection fractions over `repeats` random subsamples of each size.
pub fn subsample_rejection(
    data: &DataPair,
    n_primes: &[usize],
    repeats: usize,
    specs: &[TestSpec],
    seed: u64,
) -> Result<Vec<SubsampleRow>> {
    if specs.is_empty() || n_primes.is_empty() || repeats == 0 {
        return Err(Error::InvalidArgument("need specs, subsample sizes and at least one repeat".into()));
    }
    for &n_prime in n_primes {
        if n_prime > data.n() {
            return Err(Error::SubsampleTooLarge { n_prime, n: data.n() });
        }
    }
    for spec in specs {
        spec.validate()?;
    }
    let mut rows = Vec::new();
    for &n_prime in n_primes {
        let decisions: Vec<Vec<Result<bool>>> = (0..repeats)
            .into_par_iter()
            .map(|r| match data.select_rows(&subsample_rows(data.n(), n_prime, r, seed)) {
                Err(e) => vec![Err(e); specs.len()],
                Ok(sub) => evaluate_specs(&sub, specs, None)
                    .into_iter()
                    .map(|rep| rep.map(|x| x.reject))
                    .collect(),
            })
            .collect();
        for (j, spec) in specs.iter().enumerate() {
            let ok: Vec<bool> = decisions.iter().filter_map(|d| d[j].as_ref().ok().copied()).collect();
            let rejections = ok.iter().filter(|&&b| b).count();
            rows.push(SubsampleRow {
                n_prime,
                spec: spec.label(),
                rejections,
                repeats: ok.len(),
                failures: repeats - ok.len(),
                rate: if ok.is_empty() { 0.0 } else { rejections as f64 / ok.len() as f64 },
            });
        }
    }
    Ok(rows)
}

pub fn subsample_to_tsv(rows: &[SubsampleRow]) -> String {
    let mut out = String::from("n_prime\tspec\trate\treps\n");
    for r in rows {
        out.push_str(&format!("{}\t{}\t{:.4}\t{}\n", r.n_prime, r.spec, r.rate, r.repeats));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::SettingLabel;

    fn small_config(reps: usize) -> StudyConfig {
        let plan = PermutationPlan::new(8, 3);
        StudyConfig {
            settings: vec![
                SimSetting::new(SettingLabel::NullMa, 20, 4, 4),
                SimSetting::new(SettingLabel::NonSparse1, 20, 4, 4),
            ],
            specs: vec![
                TestSpec::new(CorrelationKind::KendallTau, Family::MaxSum).with_plan(plan.clone()),
                TestSpec::new(CorrelationKind::KendallTau, Family::Max),
                TestSpec::new(CorrelationKind::HoeffdingD, Family::Sum).adjusted(true).with_plan(plan),
            ],
            replications: reps,
            base_seed: 99,
            worker_hint: 0,
        }
    }

    #[test]
    fn single_replication_rates_are_binary() {
        let report = run_study(&small_config(1)).unwrap();
        assert_eq!(report.cells.len(), 6);
        for c in &report.cells {
            assert!(c.rate == 0.0 || c.rate == 1.0);
            assert_eq!(c.rejections as f64 / c.replications as f64, c.rate);
        }
    }

    #[test]
    fn study_is_deterministic_across_runs_and_workers() {
        let mut cfg = small_config(6);
        let a = run_study(&cfg).unwrap();
        cfg.worker_hint = 1;
        let b = run_study(&cfg).unwrap();
        cfg.worker_hint = 4;
        let c = run_study(&cfg).unwrap();
        assert_eq!(a.to_canonical_json(), b.to_canonical_json());
        assert_eq!(a.to_canonical_json(), c.to_canonical_json());
    }

    #[test]
    fn config_guards() {
        let mut cfg = small_config(0);
        assert!(run_study(&cfg).is_err());
        cfg.replications = 1;
        cfg.specs.clear();
        assert!(run_study(&cfg).is_err());
    }

    #[test]
    fn cell_failures_are_recorded() {
        let mut cfg = small_config(2);
        cfg.settings = vec![SimSetting::new(SettingLabel::NullMa, 5, 3, 3)];
        cfg.specs = vec![
            TestSpec::new(CorrelationKind::BkrR, Family::Max),
            TestSpec::new(CorrelationKind::SpearmanRho, Family::Max),
        ];
        let report = run_study(&cfg).unwrap();
        assert_eq!(report.cells[0].failures, 2);
        assert_eq!(report.cells[0].replications, 0);
        assert_eq!(report.cells[1].replications, 2);
        assert_eq!(report.failures.len(), 2);
    }

    #[test]
    fn tsv_layout() {
        let report = run_study(&small_config(1)).unwrap();
        let tsv = report.to_tsv();
        let mut lines = tsv.lines();
        assert_eq!(lines.next(), Some("setting\tspec\trate\treps"));
        assert_eq!(lines.next().unwrap().split('\t').count(), 4);
        assert_eq!(tsv.lines().count(), 7);
    }

    #[test]
    fn hash_ignores_worker_hint() {
        let mut cfg = small_config(3);
        let h = cfg.hash();
        cfg.worker_hint = 7;
        assert_eq!(cfg.hash(), h);
        cfg.base_seed += 1;
        assert_ne!(cfg.hash(), h);
        assert_eq!(h.len(), 64);
    }

    struct AlwaysReject;

    impl ExternalTest for AlwaysReject {
        fn label(&self) -> String {
            "always".into()
        }
        fn reject(&self, _: &DataPair, _: f64) -> Result<bool> {
            Ok(true)
        }
    }

    #[test]
    fn external_tests_are_tallied() {
        let (report, timing) = run_study_with(&small_config(2), &[&AlwaysReject]).unwrap();
        assert_eq!(report.cells.len(), 8);
        assert_eq!(report.cell(&report.cells[3].setting, "always").unwrap().rate, 1.0);
        assert_eq!(timing.mean_replication_secs.len(), 2);
    }

    #[test]
    fn power_curve_guards() {
        let base = SimSetting::new(SettingLabel::VaryingSparsity, 20, 10, 10);
        let specs = [TestSpec::new(CorrelationKind::SpearmanRho, Family::Max)];
        assert!(power_curve(&base, &specs, &[], 1, 0, 0).is_err());
        assert!(power_curve(&base, &specs, &[8], 1, 0, 0).is_err());
        let pts = power_curve(&base, &specs, &[2, 3], 2, 0, 0).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].v, 3);
    }

    #[test]
    fn subsample_full_size_is_identical_each_repeat() {
        let data = generate(&SimSetting::new(SettingLabel::Sparse2, 30, 5, 5).with_seed(4)).unwrap().data;
        let specs = [
            TestSpec::new(CorrelationKind::SpearmanRho, Family::MaxSum).with_plan(PermutationPlan::new(10, 2)),
            TestSpec::new(CorrelationKind::KendallTau, Family::Max),
        ];
        assert_eq!(subsample_rows(30, 30, 5, 1), (0..30).collect::<Vec<_>>());
        let rows = subsample_rejection(&data, &[30], 4, &specs, 1).unwrap();
        for r in &rows {
            assert!(r.rate == 0.0 || r.rate == 1.0);
        }
        let single = subsample_rejection(&data, &[20], 1, &specs, 1).unwrap();
        assert_eq!(single.len(), 2);
        assert_eq!(
            subsample_rejection(&data, &[31], 1, &specs, 1),
            Err(Error::SubsampleTooLarge { n_prime: 31, n: 30 })
        );
    }
}
