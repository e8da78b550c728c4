use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use rank_indep::oracle::check_equivalence;
use rank_indep::rng::RNG_NAME;
use rank_indep::sim::{curve_to_tsv, run_study, subsample_to_tsv, CurvePoint, StudyConfig, SubsampleRow};
use rank_indep::testsuite::BatteryEntry;
use rank_indep::{
    power_curve, run_battery, run_test, subsample_rejection, BatterySpec, PermutationPlan, SettingLabel, SimSetting,
    StudyReport, TestReport, TestSpec,
};

use crate::args::{
    BatteryArgs, Command, CurveArgs, Format, OracleArgs, SimulateArgs, SpecSetArgs, SubsampleArgs, TestArgs,
    TestOptions,
};
use crate::ingest::{ingest_csv, IngestError, Ingested, Table};

pub const TEST_SCHEMA: &str = "rank-indep/test-report/1";
pub const BATTERY_SCHEMA: &str = "rank-indep/battery-report/1";
pub const STUDY_SCHEMA: &str = "rank-indep/study-report/1";
pub const CURVE_SCHEMA: &str = "rank-indep/power-curve/1";
pub const SUBSAMPLE_SCHEMA: &str = "rank-indep/subsample-report/1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl From<rank_indep::Error> for CliError {
    fn from(e: rank_indep::Error) -> Self {
        use rank_indep::Error as E;
        if e.is_numeric() {
            return CliError::Numeric(e.to_string());
        }
        match e {
            E::InvalidSpec(_)
            | E::InvalidArgument(_)
            | E::AlphaOutOfRange(_)
            | E::TooFewPermutations(_)
            | E::BadLabel(_)
            | E::DimensionTooSmall(_)
            | E::SubsampleTooLarge { .. }
            | E::SampleTooLarge { .. }
            | E::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Data(inner) if inner.is_numeric() => CliError::Numeric(inner.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

/// Text for stdout (or the output file) and whether the run counts as failed.
#[derive(Debug, PartialEq)]
pub struct Output {
    pub text: String,
    pub failed: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, failed: false }
    }
}

/// Sorted keys, shortest round-trip floats, trailing newline.
pub fn canonical_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_value(value).expect("serializable").to_string();
    s.push('\n');
    s
}

fn sha256_json<S: Serialize>(value: &S) -> String {
    hex::encode(Sha256::digest(serde_json::to_value(value).expect("serializable").to_string()))
}

fn table_provenance(path: &std::path::Path, t: &Table) -> Value {
    json!({
        "path": path.display().to_string(),
        "sha256": t.digest,
        "rows": t.rows,
        "columns": t.names,
    })
}

fn provenance<S: Serialize>(args_x: &std::path::Path, args_y: &std::path::Path, data: &Ingested, config: &S) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "rng": RNG_NAME,
        "config_hash": sha256_json(config),
        "x": table_provenance(args_x, &data.x),
        "y": table_provenance(args_y, &data.y),
    })
}

fn spec_from(opts: &TestOptions, kind: rank_indep::CorrelationKind, family: rank_indep::Family, seed: u64) -> TestSpec {
    TestSpec {
        kind,
        family,
        alpha: opts.alpha,
        adjusted: opts.adjusted,
        plan: PermutationPlan::new(opts.b, seed),
        tie_policy: opts.ties,
        kappa: opts.kappa,
    }
}

fn battery_from(set: &SpecSetArgs, opts: &TestOptions, seed: u64) -> BatterySpec {
    BatterySpec {
        kinds: set.kinds.clone(),
        families: set.families.clone(),
        alpha: opts.alpha,
        adjusted: opts.adjusted,
        plan: PermutationPlan::new(opts.b, seed),
        tie_policy: opts.ties,
        kappa: opts.kappa,
    }
}

const REPORT_TSV_HEADER: &str = "label\tstatistic\tstandardized\tp_value\tcritical\treject";

fn report_tsv_row(r: &TestReport) -> String {
    format!(
        "{}\t{}\t{}\t{}\t{}\t{}",
        r.label, r.statistic, r.standardized, r.p_value, r.critical, r.reject
    )
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn report_pretty(r: &TestReport) -> String {
    let mut s = format!("{}  (n = {}, p = {}, q = {}, alpha = {})\n", r.label, r.n, r.p, r.q, r.spec.alpha);
    s += &format!("  statistic     {:>12.4}\n", r.statistic);
    s += &format!("  standardized  {:>12.4}\n", r.standardized);
    s += &format!("  p-value       {:>12.4}\n", r.p_value);
    s += &format!("  critical      {:>12.4}\n", r.critical);
    if let Some((pl, ps)) = r.components {
        s += &format!("  P_L, P_S      {:>12.4} {:.4}\n", pl, ps);
    }
    if let Some(sigma) = r.sigma_hat {
        s += &format!("  sigma_hat     {:>12.4}\n", sigma);
    }
    s += &format!("  reject        {:>12}\n", yes_no(r.reject));
    if r.ties_broken {
        s += "  warning: ties were broken by row order\n";
    }
    s
}

pub fn cmd_test(args: &TestArgs) -> Result<Output, CliError> {
    let data = ingest_csv(&args.input.x, &args.input.y, args.input.options())?;
    let spec = spec_from(&args.opts, args.kind, args.family, args.seed);
    spec.validate()?;
    let report = run_test(&data.data, &spec)?;
    let text = match args.out.format.unwrap_or(Format::Json) {
        Format::Json => canonical_json(&json!({
            "schema": TEST_SCHEMA,
            "provenance": provenance(&args.input.x, &args.input.y, &data, &spec),
            "report": report,
        })),
        Format::Tsv => format!("{REPORT_TSV_HEADER}\n{}\n", report_tsv_row(&report)),
        Format::Pretty => report_pretty(&report),
    };
    Ok(Output::ok(text))
}

fn entry_json(e: &BatteryEntry) -> Value {
    match &e.outcome {
        Ok(r) => json!({ "label": e.spec.label(), "report": r, "error": Value::Null }),
        Err(err) => json!({ "label": e.spec.label(), "spec": e.spec, "report": Value::Null, "error": err.to_string() }),
    }
}

pub fn cmd_battery(args: &BatteryArgs) -> Result<Output, CliError> {
    let data = ingest_csv(&args.input.x, &args.input.y, args.input.options())?;
    let battery = battery_from(&args.set, &args.opts, args.seed);
    for spec in battery.specs() {
        spec.validate()?;
    }
    let entries = run_battery(&data.data, &battery)?;
    let text = match args.out.format.unwrap_or(Format::Json) {
        Format::Json => canonical_json(&json!({
            "schema": BATTERY_SCHEMA,
            "provenance": provenance(&args.input.x, &args.input.y, &data, &battery),
            "entries": entries.iter().map(entry_json).collect::<Vec<_>>(),
        })),
        Format::Tsv => {
            let mut s = format!("{REPORT_TSV_HEADER}\terror\n");
            for e in &entries {
                match &e.outcome {
                    Ok(r) => s += &format!("{}\t\n", report_tsv_row(r)),
                    Err(err) => s += &format!("{}\t\t\t\t\t\t{err}\n", e.spec.label()),
                }
            }
            s
        }
        Format::Pretty => entries
            .iter()
            .map(|e| match &e.outcome {
                Ok(r) => report_pretty(r),
                Err(err) => format!("{}  error: {err}\n", e.spec.label()),
            })
            .collect::<Vec<_>>()
            .join("\n"),
    };
    Ok(Output::ok(text))
}

fn study_config(args: &SimulateArgs, threads: Option<usize>) -> Result<StudyConfig, CliError> {
    let mut cfg = if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str::<StudyConfig>(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
    } else {
        let label = args.setting.expect("required unless --config");
        let setting = SimSetting {
            label,
            innovation: args.innovation,
            n: args.n,
            p: args.p,
            q: args.q,
            m: args.m,
            v: args.v,
            seed: 0,
        };
        StudyConfig {
            settings: vec![setting],
            specs: battery_from(&args.set, &args.opts, args.seed).specs(),
            replications: args.reps,
            base_seed: args.seed,
            worker_hint: args.workers,
        }
    };
    if let Some(t) = threads {
        cfg.worker_hint = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn without_worker_hint(cfg: &StudyConfig) -> Value {
    let mut v = serde_json::to_value(cfg).expect("serializable");
    if let Some(map) = v.as_object_mut() {
        map.remove("worker_hint");
    }
    v
}

fn study_pretty(report: &StudyReport) -> String {
    let sw = report.cells.iter().map(|c| c.setting.len()).max().unwrap_or(7).max(7);
    let pw = report.cells.iter().map(|c| c.spec.len()).max().unwrap_or(4).max(4);
    let mut s = format!("{:<sw$}  {:<pw$}  {:>6}  {:>5}\n", "setting", "spec", "rate", "reps");
    for c in &report.cells {
        s += &format!("{:<sw$}  {:<pw$}  {:>6.4}  {:>5}\n", c.setting, c.spec, c.rate, c.replications);
    }
    if !report.failures.is_empty() {
        s += &format!("{} failed replication(s)\n", report.failures.len());
    }
    s
}

pub fn cmd_simulate(args: &SimulateArgs, threads: Option<usize>) -> Result<Output, CliError> {
    let cfg = study_config(args, threads)?;
    let report = run_study(&cfg)?;
    let text = match args.out.format.unwrap_or(Format::Tsv) {
        Format::Tsv => report.to_tsv(),
        Format::Json => canonical_json(&json!({
            "schema": STUDY_SCHEMA,
            "config": without_worker_hint(&cfg),
            "report": report,
        })),
        Format::Pretty => study_pretty(&report),
    };
    Ok(Output::ok(text))
}

fn curve_pretty(points: &[CurvePoint]) -> String {
    let pw = points.iter().map(|p| p.spec.len()).max().unwrap_or(4).max(4);
    let mut s = format!("{:>2}  {:<pw$}  {:>6}  {:>5}\n", "v", "spec", "rate", "reps");
    for p in points {
        s += &format!("{:>2}  {:<pw$}  {:>6.4}  {:>5}\n", p.v, p.spec, p.rate, p.replications);
    }
    s
}

pub fn cmd_curve(args: &CurveArgs, threads: Option<usize>) -> Result<Output, CliError> {
    let base = SimSetting::new(SettingLabel::VaryingSparsity, args.n, args.p, args.q);
    let specs = battery_from(&args.set, &args.opts, args.seed).specs();
    for spec in &specs {
        spec.validate()?;
    }
    let workers = threads.unwrap_or(args.workers);
    let points = power_curve(&base, &specs, &args.v_grid, args.reps, args.seed, workers)?;
    let text = match args.out.format.unwrap_or(Format::Tsv) {
        Format::Tsv => curve_to_tsv(&points),
        Format::Json => canonical_json(&json!({
            "schema": CURVE_SCHEMA,
            "base": base,
            "specs": specs,
            "replications": args.reps,
            "base_seed": args.seed,
            "v_grid": args.v_grid,
            "points": points,
        })),
        Format::Pretty => curve_pretty(&points),
    };
    Ok(Output::ok(text))
}

fn subsample_pretty(rows: &[SubsampleRow]) -> String {
    let pw = rows.iter().map(|r| r.spec.len()).max().unwrap_or(4).max(4);
    let mut s = format!("{:>7}  {:<pw$}  {:>6}  {:>5}\n", "n_prime", "spec", "rate", "reps");
    for r in rows {
        s += &format!("{:>7}  {:<pw$}  {:>6.4}  {:>5}\n", r.n_prime, r.spec, r.rate, r.repeats);
    }
    s
}

pub fn cmd_subsample(args: &SubsampleArgs) -> Result<Output, CliError> {
    let data = ingest_csv(&args.input.x, &args.input.y, args.input.options())?;
    let specs = battery_from(&args.set, &args.opts, args.seed).specs();
    let rows = subsample_rejection(&data.data, &args.n_primes, args.repeats, &specs, args.seed)?;
    let text = match args.out.format.unwrap_or(Format::Tsv) {
        Format::Tsv => subsample_to_tsv(&rows),
        Format::Json => canonical_json(&json!({
            "schema": SUBSAMPLE_SCHEMA,
            "provenance": provenance(&args.input.x, &args.input.y, &data, &specs),
            "repeats": args.repeats,
            "seed": args.seed,
            "rows": rows,
        })),
        Format::Pretty => subsample_pretty(&rows),
    };
    Ok(Output::ok(text))
}

pub fn cmd_oracle_check(args: &OracleArgs) -> Result<Output, CliError> {
    let rows = check_equivalence(args.seed, args.pairs, args.max_n)?;
    let mut text = String::new();
    let mut failed = false;
    for r in &rows {
        let pass = r.passed(args.tol);
        failed |= !pass;
        text += &format!(
            "{:<11} n={:<2} exact {:>4}/{:<4} max|diff| {:.1e}  {}\n",
            format!("{:?}", r.kind),
            r.n,
            r.exact_matches,
            r.pairs,
            r.max_abs_diff,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    text += &format!("oracle-check: {}\n", if failed { "FAIL" } else { "PASS" });
    Ok(Output { text, failed })
}

pub fn dispatch(command: &Command, threads: Option<usize>) -> Result<Output, CliError> {
    match command {
        Command::Test(a) => cmd_test(a),
        Command::Battery(a) => cmd_battery(a),
        Command::Simulate(a) => cmd_simulate(a, threads),
        Command::Curve(a) => cmd_curve(a, threads),
        Command::Subsample(a) => cmd_subsample(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
    }
}
