//! Reproduction reports behind the `qmfcut` command-line tool.
//!
//! [`run`] turns a [`RunConfig`] into an [`Outcome`]: a JSON report, the
//! flat table rows used for CSV and text output, and the list of checks
//! that failed. Reports depend only on the configuration, so reruns are
//! byte-identical and can be served from the [`crate::cache`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::counting::{checked_pow, necklace_count};
use crate::error::{Error, Result};
use crate::line_kernel::theorem3_report;
use crate::mps::Partition;
use crate::qcut::qmc;
use crate::qflow::{invariant_span_dimension, qmf_estimate, qmf_estimate_numerical, QmfResult};
use crate::scalars::{ComplexField, PrimeField, Rationals, ScalarRing};
use crate::symmetry::{qmf_upper_bound_parity, sign_multiplicity_character, sign_multiplicity_formula};

pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// Largest `N^{2d}` for which the theorem-2 sweep also samples `QMF'`.
pub const THEOREM2_SAMPLE_LIMIT: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Qmf,
    Qmc,
    Compare,
    Theorem1,
    Theorem2,
    Theorem3,
    InvariantSpan,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

/// `odd-even`, `first-half`, or explicit 1-based sources/sinks such as
/// `1,3/2,4`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionSpec {
    OddEven,
    FirstHalf,
    Explicit(String),
}

impl PartitionSpec {
    pub fn resolve(&self, m: usize) -> Result<Partition> {
        match self {
            PartitionSpec::OddEven => Partition::odd_even(m),
            PartitionSpec::FirstHalf => Partition::first_half(m),
            PartitionSpec::Explicit(s) => Partition::parse(m, s),
        }
    }
}

impl fmt::Display for PartitionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionSpec::OddEven => f.write_str("odd-even"),
            PartitionSpec::FirstHalf => f.write_str("first-half"),
            PartitionSpec::Explicit(s) => f.write_str(s),
        }
    }
}

impl FromStr for PartitionSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "odd-even" => Ok(PartitionSpec::OddEven),
            "first-half" => Ok(PartitionSpec::FirstHalf),
            other if other.contains('/') => Ok(PartitionSpec::Explicit(other.to_string())),
            other => Err(Error::InvalidPartition(format!(
                "expected odd-even, first-half or sources/sinks like 1,3/2,4, got {other:?}"
            ))),
        }
    }
}

impl Serialize for PartitionSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Inclusive integer ranges: `5`, `2..8`, `2..=8`, or lists `2,3,7`.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("not a nonnegative integer: {t:?}")))
    };
    let mut out = Vec::new();
    for part in s.split(',') {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?);
            if a > b {
                return Err(Error::Parse(format!("empty range {part:?}")));
            }
            out.extend(a..=b);
        } else {
            out.push(num(part)?);
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("empty range".into()));
    }
    if out.contains(&0) {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    Ok(out)
}

/// Everything that determines a report. Output format and cache location
/// are deliberately absent, so they do not affect the cache key.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub m: Option<Vec<usize>>,
    pub d: Option<Vec<usize>>,
    #[serde(rename = "N")]
    pub physical: Option<Vec<usize>>,
    pub n: Option<Vec<usize>>,
    pub partition: PartitionSpec,
    pub trials: usize,
    pub seed: u64,
    pub ring: ScalarRing,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            m: None,
            d: None,
            physical: None,
            n: None,
            partition: PartitionSpec::OddEven,
            trials: crate::qflow::DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            ring: ScalarRing::PrimeField {
                p: crate::scalars::MERSENNE_31,
            },
        }
    }
}

/// One line of the CSV/text table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub m: usize,
    #[serde(rename = "N")]
    pub physical_dim: usize,
    pub n: usize,
    pub partition: String,
    pub qmf_observed: Option<usize>,
    pub bound: Option<u128>,
    pub qmc: u128,
    pub trials: usize,
    pub seed: u64,
    pub ring: String,
}

pub const CSV_HEADER: &str = "m,N,n,partition,qmf_observed,bound,qmc,trials,seed,ring";

impl TableRow {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},\"{}\",{},{},{},{},{},{}",
            self.m,
            self.physical_dim,
            self.n,
            self.partition,
            opt(self.qmf_observed.map(|v| v.to_string())),
            opt(self.bound.map(|v| v.to_string())),
            self.qmc,
            self.trials,
            self.seed,
            self.ring
        )
    }
}

/// A check that did not hold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub check: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub report: Value,
    pub rows: Vec<TableRow>,
    pub failures: Vec<Failure>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.report)
                    .map_err(|e| Error::Parse(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            OutputFormat::Csv => {
                if self.rows.is_empty() {
                    return Err(Error::InvalidArgument(
                        "this command has no tabular output; use --format json or text".into(),
                    ));
                }
                let mut s = String::from(CSV_HEADER);
                s.push('\n');
                for r in &self.rows {
                    s.push_str(&r.to_csv());
                    s.push('\n');
                }
                Ok(s)
            }
            OutputFormat::Text => Ok(self.render_text()),
        }
    }

    fn render_text(&self) -> String {
        let mut s = String::new();
        if self.rows.is_empty() {
            if let Value::Object(map) = &self.report {
                for (k, v) in map {
                    s.push_str(&format!("{k}: {v}\n"));
                }
            }
        } else {
            let dash = || "-".to_string();
            let w = self.rows.iter().map(|r| r.partition.len()).max().unwrap_or(0).max(9);
            s.push_str(&format!(
                "{:>3} {:>3} {:>3}  {:<w$} {:>12} {:>12} {:>12}\n",
                "m", "N", "n", "partition", "qmf_observed", "bound", "qmc"
            ));
            for r in &self.rows {
                s.push_str(&format!(
                    "{:>3} {:>3} {:>3}  {:<w$} {:>12} {:>12} {:>12}\n",
                    r.m,
                    r.physical_dim,
                    r.n,
                    r.partition,
                    r.qmf_observed.map_or_else(dash, |v| v.to_string()),
                    r.bound.map_or_else(dash, |v| v.to_string()),
                    r.qmc
                ));
            }
        }
        if self.failures.is_empty() {
            s.push_str("all checks passed\n");
        } else {
            for f in &self.failures {
                s.push_str(&format!("FAILED {}: {}\n", f.check, f.detail));
            }
        }
        s
    }
}

type Estimator = dyn Fn(usize, usize, usize, &Partition, usize, u64) -> Result<QmfResult> + Sync;

fn estimator(ring: &ScalarRing) -> Result<Box<Estimator>> {
    ring.validate()?;
    Ok(match *ring {
        ScalarRing::PrimeField { p } => {
            let f = PrimeField::new(p)?;
            Box::new(move |m, big_n, n, part, trials, seed| qmf_estimate(&f, m, big_n, n, part, trials, seed))
        }
        ScalarRing::Rational => Box::new(|m, big_n, n, part, trials, seed| {
            qmf_estimate(&Rationals, m, big_n, n, part, trials, seed)
        }),
        ScalarRing::ComplexFloat { tolerance } => {
            let f = ComplexField::new(tolerance)?;
            Box::new(move |m, big_n, n, part, trials, seed| {
                qmf_estimate_numerical(&f, m, big_n, n, part, trials, seed)
            })
        }
    })
}

fn to_u128(v: &num_bigint::BigUint) -> Result<u128> {
    u128::try_from(v).map_err(|_| Error::Overflow("min-cut value".into()))
}

/// Strongest known upper bound on `QMF'` beyond the min-cut: the parity
/// bound for odd/even cuts of `C_{2d}` with `d` even, and `3·2^{d-2}` at
/// `N = n = 2`.
pub fn flattening_bound(m: usize, big_n: usize, n: usize, part: &Partition) -> Result<Option<u128>> {
    if m % 2 == 1 || m < 4 || *part != Partition::odd_even(m)? {
        return Ok(None);
    }
    let d = m / 2;
    let mut bound = None;
    if d.is_multiple_of(2) {
        bound = Some(qmf_upper_bound_parity(d, big_n)?);
    }
    if big_n == 2 && n == 2 {
        let line = checked_pow(2, d as u32 - 2, "line bound")? * 3;
        bound = Some(bound.map_or(line, |b: u128| b.min(line)));
    }
    Ok(bound)
}

fn single(values: &Option<Vec<usize>>, name: &str) -> Result<usize> {
    match values.as_deref() {
        Some([v]) => Ok(*v),
        Some(_) => Err(Error::InvalidArgument(format!("--{name} takes a single value for this command"))),
        None => Err(Error::InvalidArgument(format!("--{name} is required"))),
    }
}

fn required<'a>(values: &'a Option<Vec<usize>>, name: &str) -> Result<&'a [usize]> {
    values
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument(format!("--{name} is required")))
}

/// Bond dimensions to pair with physical dimension `big_n`: `--n` if given,
/// else `n = N`.
fn bond_dims(cfg: &RunConfig, big_n: usize) -> Vec<usize> {
    cfg.n.clone().unwrap_or_else(|| vec![big_n])
}

fn check(failures: &mut Vec<Failure>, ok: bool, check: &str, detail: impl FnOnce() -> String) {
    if !ok {
        failures.push(Failure {
            check: check.to_string(),
            detail: detail(),
        });
    }
}

struct Evaluated {
    row: TableRow,
    qmf: QmfResult,
    qmc: Value,
}

fn evaluate(cfg: &RunConfig, est: &Estimator, m: usize, big_n: usize, n: usize, failures: &mut Vec<Failure>) -> Result<Evaluated> {
    let part = cfg.partition.resolve(m)?;
    let qmf = est(m, big_n, n, &part, cfg.trials, cfg.seed)?;
    let cut = qmc(m, big_n as u64, n as u64, &part)?;
    let cut_value = to_u128(&cut.qmc)?;
    let bound = flattening_bound(m, big_n, n, &part)?;
    let observed = qmf.max_rank_observed as u128;
    let label = format!("m={m} N={big_n} n={n} partition={part}");
    check(failures, observed <= cut_value, "weak_duality", || {
        format!("{label}: observed rank {observed} exceeds min-cut {cut_value}")
    });
    if let Some(b) = bound {
        check(failures, observed <= b, "flattening_bound", || {
            format!("{label}: observed rank {observed} exceeds bound {b}")
        });
        check(failures, b <= cut_value, "bound_below_min_cut", || {
            format!("{label}: bound {b} exceeds min-cut {cut_value}")
        });
    }
    let row = TableRow {
        m,
        physical_dim: big_n,
        n,
        partition: part.to_string(),
        qmf_observed: Some(qmf.max_rank_observed),
        bound,
        qmc: cut_value,
        trials: cfg.trials,
        seed: cfg.seed,
        ring: cfg.ring.to_string(),
    };
    let qmc_json = serde_json::to_value(&cut).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(Evaluated { row, qmf, qmc: qmc_json })
}

fn to_json<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Parse(e.to_string()))
}

/// Runs one command. Errors are usage problems; failed checks are reported
/// in [`Outcome::failures`].
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.trials == 0 {
        return Err(Error::InvalidArgument("--trials must be positive".into()));
    }
    cfg.ring.validate()?;
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    let report = match cfg.command {
        Command::Qmf => {
            let m = single(&cfg.m, "m")?;
            let big_n = single(&cfg.physical, "N")?;
            let n = cfg.n.as_ref().map_or(Ok(big_n), |_| single(&cfg.n, "n"))?;
            let est = estimator(&cfg.ring)?;
            let e = evaluate(cfg, &*est, m, big_n, n, &mut failures)?;
            rows.push(e.row);
            to_json(&e.qmf)?
        }
        Command::Qmc => {
            let m = single(&cfg.m, "m")?;
            let big_n = single(&cfg.physical, "N")?;
            let n = cfg.n.as_ref().map_or(Ok(big_n), |_| single(&cfg.n, "n"))?;
            let part = cfg.partition.resolve(m)?;
            let r = qmc(m, big_n as u64, n as u64, &part)?;
            rows.push(TableRow {
                m,
                physical_dim: big_n,
                n,
                partition: part.to_string(),
                qmf_observed: None,
                bound: flattening_bound(m, big_n, n, &part)?,
                qmc: to_u128(&r.qmc)?,
                trials: cfg.trials,
                seed: cfg.seed,
                ring: cfg.ring.to_string(),
            });
            to_json(&r)?
        }
        Command::Compare => {
            let m = single(&cfg.m, "m")?;
            let big_n = single(&cfg.physical, "N")?;
            let n = cfg.n.as_ref().map_or(Ok(big_n), |_| single(&cfg.n, "n"))?;
            let est = estimator(&cfg.ring)?;
            let e = evaluate(cfg, &*est, m, big_n, n, &mut failures)?;
            let weak_duality = e.row.qmf_observed.unwrap_or(0) as u128 <= e.row.qmc;
            let report = json!({
                "qmf": to_json(&e.qmf)?,
                "qmc": e.qmc,
                "bound": e.row.bound,
                "weak_duality": weak_duality,
                "gap": e.row.qmc - (e.row.qmf_observed.unwrap_or(0) as u128).min(e.row.qmc),
            });
            rows.push(e.row);
            report
        }
        Command::Table => {
            let est = estimator(&cfg.ring)?;
            let mut out = Vec::new();
            for &m in required(&cfg.m, "m")? {
                for &big_n in required(&cfg.physical, "N")? {
                    for n in bond_dims(cfg, big_n) {
                        let e = evaluate(cfg, &*est, m, big_n, n, &mut failures)?;
                        out.push(to_json(&e.row)?);
                        rows.push(e.row);
                    }
                }
            }
            Value::Array(out)
        }
        Command::Theorem1 => {
            let est = estimator(&cfg.ring)?;
            let mut out = Vec::new();
            for &big_n in required(&cfg.physical, "N")? {
                for n in bond_dims(cfg, big_n) {
                    let bound = qmf_upper_bound_parity(2, big_n)?;
                    let e = evaluate(cfg, &*est, 4, big_n, n, &mut failures)?;
                    let observed = e.qmf.max_rank_observed as u128;
                    check(&mut failures, observed <= bound, "parity_bound", || {
                        format!("N={big_n} n={n}: observed {observed} exceeds {bound}")
                    });
                    out.push(json!({
                        "N": big_n,
                        "n": n,
                        "N_mod_4": big_n % 4,
                        "parity_bound": bound,
                        "qmf_observed": e.qmf.max_rank_observed,
                        "qmc": e.row.qmc,
                        "equals_bound": observed == bound,
                        "histogram": e.qmf.histogram,
                    }));
                    rows.push(TableRow { bound: Some(bound), ..e.row });
                }
            }
            Value::Array(out)
        }
        Command::Theorem2 => {
            let est = estimator(&cfg.ring)?;
            let mut out = Vec::new();
            for &d in required(&cfg.d, "d")? {
                if d % 4 != 2 {
                    return Err(Error::InvalidArgument(format!(
                        "theorem2 sweeps d ≡ 2 (mod 4), got d = {d}"
                    )));
                }
                let m = 2 * d;
                let part = Partition::odd_even(m)?;
                for &big_n in required(&cfg.physical, "N")? {
                    let character = sign_multiplicity_character(d, big_n)?;
                    let formula = sign_multiplicity_formula(d, big_n)?;
                    let bound = qmf_upper_bound_parity(d, big_n)?;
                    let cut = to_u128(&qmc(m, big_n as u64, big_n as u64, &part)?.qmc)?;
                    check(&mut failures, character == formula, "sign_multiplicity", || {
                        format!("d={d} N={big_n}: character {character} != closed form {formula}")
                    });
                    check(&mut failures, big_n % 4 != 3 || character % 2 == 1, "multiplicity_parity", || {
                        format!("d={d} N={big_n}: multiplicity {character} is even although N ≡ 3 (mod 4)")
                    });
                    check(&mut failures, bound <= cut, "bound_below_min_cut", || {
                        format!("d={d} N={big_n}: bound {bound} exceeds min-cut {cut}")
                    });
                    let sampled = checked_pow(big_n as u128, m as u32, "state size")
                        .is_ok_and(|size| size <= THEOREM2_SAMPLE_LIMIT);
                    let observed = if sampled {
                        let r = est(m, big_n, big_n, &part, cfg.trials, cfg.seed)?;
                        let obs = r.max_rank_observed as u128;
                        check(&mut failures, obs <= bound, "parity_bound", || {
                            format!("d={d} N={big_n}: observed {obs} exceeds {bound}")
                        });
                        Some(r.max_rank_observed)
                    } else {
                        None
                    };
                    out.push(json!({
                        "d": d,
                        "N": big_n,
                        "sign_multiplicity_character": character,
                        "sign_multiplicity_formula": formula,
                        "multiplicity_odd": character % 2 == 1,
                        "parity_bound": bound,
                        "qmc": cut,
                        "qmf_observed": observed,
                    }));
                    rows.push(TableRow {
                        m,
                        physical_dim: big_n,
                        n: big_n,
                        partition: part.to_string(),
                        qmf_observed: observed,
                        bound: Some(bound),
                        qmc: cut,
                        trials: cfg.trials,
                        seed: cfg.seed,
                        ring: cfg.ring.to_string(),
                    });
                }
            }
            Value::Array(out)
        }
        Command::Theorem3 => {
            let mut out = Vec::new();
            for &d in required(&cfg.d, "d")? {
                let r = match cfg.ring {
                    ScalarRing::PrimeField { p } => theorem3_report(&PrimeField::new(p)?, d, cfg.trials, cfg.seed)?,
                    ScalarRing::Rational => theorem3_report(&Rationals, d, cfg.trials, cfg.seed)?,
                    ScalarRing::ComplexFloat { .. } => return Err(Error::InexactRing(cfg.ring.to_string())),
                };
                check(&mut failures, r.all_ks_verified, "kernel_vectors", || {
                    format!("d={d}: some K_S is not annihilated")
                });
                check(&mut failures, r.kernel_span == 1 << (d - 2), "kernel_span", || {
                    format!("d={d}: kernel span {} != {}", r.kernel_span, 1u64 << (d - 2))
                });
                check(&mut failures, r.within_bound, "line_bound", || {
                    format!("d={d}: observed {} exceeds {}", r.qmf_observed, r.bound)
                });
                check(&mut failures, r.bound < r.qmc, "strict_gap", || {
                    format!("d={d}: bound {} is not below min-cut {}", r.bound, r.qmc)
                });
                rows.push(TableRow {
                    m: 2 * d,
                    physical_dim: 2,
                    n: 2,
                    partition: Partition::odd_even(2 * d)?.to_string(),
                    qmf_observed: Some(r.qmf_observed),
                    bound: Some(r.bound as u128),
                    qmc: r.qmc as u128,
                    trials: cfg.trials,
                    seed: cfg.seed,
                    ring: cfg.ring.to_string(),
                });
                out.push(to_json(&r)?);
            }
            Value::Array(out)
        }
        Command::InvariantSpan => {
            let m = single(&cfg.m, "m")?;
            let big_n = single(&cfg.physical, "N")?;
            let n = cfg.n.as_ref().map_or(Ok(big_n), |_| single(&cfg.n, "n"))?;
            let span = match cfg.ring {
                ScalarRing::PrimeField { p } => {
                    invariant_span_dimension(&PrimeField::new(p)?, m, big_n, n, cfg.trials, cfg.seed)?
                }
                ScalarRing::Rational => invariant_span_dimension(&Rationals, m, big_n, n, cfg.trials, cfg.seed)?,
                ScalarRing::ComplexFloat { .. } => return Err(Error::InexactRing(cfg.ring.to_string())),
            };
            let necklaces = necklace_count(m, big_n)?;
            check(&mut failures, span as u128 <= necklaces, "invariant_span", || {
                format!("span {span} exceeds the invariant dimension {necklaces}")
            });
            json!({
                "m": m,
                "N": big_n,
                "n": n,
                "samples": cfg.trials,
                "seed": cfg.seed,
                "ring": cfg.ring.to_string(),
                "span_dimension": span,
                "invariant_dimension": necklaces,
                "saturated": span as u128 == necklaces,
            })
        }
    };
    Ok(Outcome {
        report,
        rows,
        failures,
    })
}

/// Runs through the cache: a stored outcome for the same configuration is
/// returned as is, otherwise the fresh outcome is stored.
pub fn run_cached(cfg: &RunConfig, cache: Option<&crate::cache::Cache>) -> Result<Outcome> {
    let Some(cache) = cache else {
        return run(cfg);
    };
    let key = crate::cache::cache_key(cfg);
    if let Some(hit) = cache.lookup(&key) {
        match serde_json::from_value::<Outcome>(hit) {
            Ok(outcome) => return Ok(outcome),
            Err(e) => log::warn!("ignoring malformed cache entry {key}: {e}"),
        }
    }
    let outcome = run(cfg)?;
    let value = to_json(&outcome)?;
    if let Err(e) = cache.store(&key, &value) {
        log::warn!("could not write cache {}: {e}", cache.path().display());
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: Command) -> RunConfig {
        RunConfig::new(command)
    }

    #[test]
    fn failed_checks_are_recorded() {
        let mut failures = Vec::new();
        check(&mut failures, true, "fine", || unreachable!());
        check(&mut failures, false, "parity_bound", || "observed 9 exceeds 8".into());
        let out = Outcome { report: Value::Null, rows: Vec::new(), failures };
        assert!(!out.passed());
        assert_eq!(out.failures[0].check, "parity_bound");
        assert!(out.render(OutputFormat::Text).is_ok());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_range("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_range("7").unwrap(), vec![7]);
        assert_eq!(parse_range("2,4..5").unwrap(), vec![2, 4, 5]);
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("x").is_err());
        assert!(parse_range("0..2").is_err());
    }

    #[test]
    fn partition_specs() {
        assert_eq!("odd-even".parse::<PartitionSpec>().unwrap(), PartitionSpec::OddEven);
        assert_eq!(
            "first-half".parse::<PartitionSpec>().unwrap().resolve(4).unwrap(),
            Partition::from_sources(4, &[0, 1]).unwrap()
        );
        let p: PartitionSpec = "1,3/2,4".parse().unwrap();
        assert_eq!(p.resolve(4).unwrap(), Partition::odd_even(4).unwrap());
        assert!("sideways".parse::<PartitionSpec>().is_err());
    }

    #[test]
    fn bounds() {
        let oe = |m| Partition::odd_even(m).unwrap();
        assert_eq!(flattening_bound(4, 2, 2, &oe(4)).unwrap(), Some(3));
        assert_eq!(flattening_bound(4, 3, 3, &oe(4)).unwrap(), Some(8));
        assert_eq!(flattening_bound(4, 4, 4, &oe(4)).unwrap(), Some(16));
        assert_eq!(flattening_bound(6, 2, 2, &oe(6)).unwrap(), Some(6));
        assert_eq!(flattening_bound(6, 3, 3, &oe(6)).unwrap(), None);
        let fh = Partition::first_half(4).unwrap();
        assert_eq!(flattening_bound(4, 2, 2, &fh).unwrap(), None);
    }

    #[test]
    fn qmc_command() {
        let mut c = cfg(Command::Qmc);
        c.m = Some(vec![4]);
        c.physical = Some(vec![2]);
        let out = run(&c).unwrap();
        assert_eq!(out.report["qmc"], 4);
        assert!(out.passed());
        assert!(out.render(OutputFormat::Csv).unwrap().starts_with(CSV_HEADER));
    }

    #[test]
    fn usage_errors() {
        let mut c = cfg(Command::Qmc);
        assert!(run(&c).is_err());
        c.m = Some(vec![4, 5]);
        c.physical = Some(vec![2]);
        assert!(run(&c).is_err());
        let mut c = cfg(Command::Theorem2);
        c.d = Some(vec![4]);
        c.physical = Some(vec![2]);
        assert!(run(&c).is_err());
        let mut c = cfg(Command::Theorem3);
        c.d = Some(vec![2]);
        c.ring = "complex".parse().unwrap();
        assert!(matches!(run(&c), Err(Error::InexactRing(_))));
    }

    #[test]
    fn theorem_sweeps_pass() {
        let mut c = cfg(Command::Theorem1);
        c.physical = Some(vec![2, 3, 4]);
        let out = run(&c).unwrap();
        assert!(out.passed(), "{:?}", out.failures);
        let observed: Vec<_> = out.rows.iter().map(|r| r.qmf_observed.unwrap()).collect();
        assert_eq!(observed, vec![3, 8, 16]);

        let mut c = cfg(Command::Theorem2);
        c.d = Some(vec![2, 6]);
        c.physical = Some(vec![2, 4]);
        let out = run(&c).unwrap();
        assert!(out.passed(), "{:?}", out.failures);
        assert_eq!(out.report[0]["qmf_observed"], 3);
        assert_eq!(out.report[3]["qmf_observed"], Value::Null);

        let mut c = cfg(Command::Theorem3);
        c.d = Some(vec![2, 3]);
        let out = run(&c).unwrap();
        assert!(out.passed(), "{:?}", out.failures);
    }

    #[test]
    fn reports_are_deterministic_and_cacheable() {
        let mut c = cfg(Command::Table);
        c.m = Some(vec![4, 5]);
        c.physical = Some(vec![2]);
        c.n = Some(vec![2, 3]);
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(
            a.render(OutputFormat::Json).unwrap(),
            b.render(OutputFormat::Json).unwrap()
        );
        assert_eq!(a.rows.len(), 4);

        let dir = tempfile::tempdir().unwrap();
        let cache = crate::cache::Cache::new(dir.path().join("c.jsonl"));
        let first = run_cached(&c, Some(&cache)).unwrap();
        let second = run_cached(&c, Some(&cache)).unwrap();
        assert_eq!(first, second);
        assert_eq!(first, a);
    }
}
