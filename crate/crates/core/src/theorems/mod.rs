//! Randomised verification of the structural results, with per-trial
//! seeds so any failure can be replayed from `(theorem id, seed)`.

mod fixtures;
mod trials;
pub mod verifiers;

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::tolerances::Tolerances;

pub use fixtures::run_fixtures;
pub use verifiers::*;

/// Largest fraction of inconclusive trials a passing run may have.
pub const MAX_INCONCLUSIVE_RATE: f64 = 0.02;

/// Every randomised theorem id, in report order.
pub const THEOREM_IDS: [&str; 11] = [
    "qnil-lemmas",
    "existence-equivalences",
    "additive-kstar",
    "drazin-additive",
    "block-triangular",
    "kast-properties",
    "anti-triangular",
    "product-swap",
    "unit-anti-triangular",
    "drazin-engine",
    "word-monotonicity",
];

/// Legs asserted for one instance.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub legs: usize,
    pub failures: Vec<String>,
    pub not_applicable: Vec<String>,
    pub worst_residual: f64,
}

impl Outcome {
    pub fn leg(&mut self, name: &str, ok: bool) {
        self.leg_with(name, ok, String::new);
    }

    pub fn leg_with(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        self.legs += 1;
        if !ok {
            let d = detail();
            self.failures.push(if d.is_empty() { name.to_string() } else { format!("{name}: {d}") });
        }
    }

    pub fn not_applicable(&mut self, name: &str) {
        self.not_applicable.push(name.to_string());
    }

    pub fn residual(&mut self, r: f64) {
        if r > self.worst_residual || r.is_nan() {
            self.worst_residual = r;
        }
    }

    pub fn merge(&mut self, other: Outcome) {
        self.legs += other.legs;
        self.failures.extend(other.failures);
        self.not_applicable.extend(other.not_applicable);
        self.residual(other.worst_residual);
    }

    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Holds,
    Violated,
    /// Numerics could not decide (ambiguity, overflow, conditioning).
    Inconclusive,
    /// The instance fell outside the hypotheses; nothing was asserted.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub theorem_id: String,
    pub trial: usize,
    pub seed: u64,
    /// SHA-256 of the serialised inputs.
    pub inputs_digest: String,
    pub status: TrialStatus,
    pub legs: usize,
    pub not_applicable: usize,
    pub worst_residual: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl TrialReport {
    pub fn holds(&self) -> bool {
        self.status != TrialStatus::Violated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub trials: usize,
    pub sizes: Vec<usize>,
    pub k_max: usize,
    pub seed: u64,
    /// Record wall-clock seconds per theorem (breaks byte-identical reports).
    #[serde(default)]
    pub timings: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            trials: 100,
            sizes: (1..=8).collect(),
            k_max: 3,
            seed: 0,
            timings: false,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.iter().any(|&n| n == 0 || n > 64) {
            return Err(Error::InvalidArgument("sizes must be nonempty and within 1..=64".into()));
        }
        if !(1..=4).contains(&self.k_max) {
            return Err(Error::InvalidArgument(format!("k_max must be within 1..=4, got {}", self.k_max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremSummary {
    pub theorem_id: String,
    pub trials: usize,
    pub violations: usize,
    pub inconclusive: usize,
    pub skipped: usize,
    /// Legs whose hypotheses the drawn instances did not meet.
    pub not_applicable: usize,
    pub legs: usize,
    pub worst_residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub trials_per_theorem: usize,
    pub sizes: Vec<usize>,
    pub k_max: usize,
    pub tolerances: Tolerances,
    pub theorems: Vec<TheoremSummary>,
    /// Violated and inconclusive trials, for replay.
    pub failures: Vec<TrialReport>,
    pub inconclusive_rate: f64,
    pub passed: bool,
}

impl SuiteReport {
    fn assemble(cfg: &SuiteConfig, tol: &Tolerances, theorems: Vec<TheoremSummary>, failures: Vec<TrialReport>) -> Self {
        let total: usize = theorems.iter().map(|t| t.trials).sum();
        let inconclusive: usize = theorems.iter().map(|t| t.inconclusive).sum();
        let violations: usize = theorems.iter().map(|t| t.violations).sum();
        let rate = if total == 0 { 0.0 } else { inconclusive as f64 / total as f64 };
        SuiteReport {
            seed: cfg.seed,
            trials_per_theorem: cfg.trials,
            sizes: cfg.sizes.clone(),
            k_max: cfg.k_max,
            tolerances: tol.clone(),
            theorems,
            failures,
            inconclusive_rate: rate,
            passed: violations == 0 && rate <= MAX_INCONCLUSIVE_RATE,
        }
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# Verification report\n");
        let _ = writeln!(
            s,
            "seed {}, {} trials per theorem, sizes {:?}, k_max {}\n",
            self.seed, self.trials_per_theorem, self.sizes, self.k_max
        );
        let timed = self.theorems.iter().any(|t| t.seconds.is_some());
        let _ = write!(s, "| theorem | trials | legs | violations | inconclusive | skipped | n/a | worst residual |");
        let _ = writeln!(s, "{}", if timed { " seconds |" } else { "" });
        let _ = write!(s, "|---|---|---|---|---|---|---|---|");
        let _ = writeln!(s, "{}", if timed { "---|" } else { "" });
        for t in &self.theorems {
            let _ = write!(
                s,
                "| {} | {} | {} | {} | {} | {} | {} | {:.2e} |",
                t.theorem_id, t.trials, t.legs, t.violations, t.inconclusive, t.skipped, t.not_applicable, t.worst_residual
            );
            match t.seconds {
                Some(sec) => {
                    let _ = writeln!(s, " {sec:.3} |");
                }
                None => s.push('\n'),
            }
        }
        let _ = writeln!(
            s,
            "\ninconclusive rate {:.4}; {}",
            self.inconclusive_rate,
            if self.passed { "PASSED" } else { "FAILED" }
        );
        if !self.failures.is_empty() {
            let _ = writeln!(s, "\n## Failures\n");
            for f in &self.failures {
                let _ = writeln!(
                    s,
                    "- `{}` trial {} seed {} ({:?}): {}",
                    f.theorem_id, f.trial, f.seed, f.status, f.detail
                );
            }
        }
        s
    }
}

/// Hex SHA-256 of the JSON form of the inputs.
pub fn inputs_digest(inputs: &[&Matrix]) -> String {
    let bytes = serde_json::to_vec(inputs).expect("matrices serialise");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ trial as u64
}

fn check_id(id: &str) -> Result<()> {
    if THEOREM_IDS.contains(&id) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "unknown theorem id '{id}' (expected one of {})",
            THEOREM_IDS.join(", ")
        )))
    }
}

/// Re-runs one trial from its theorem id and trial seed.
pub fn replay(id: &str, seed: u64, cfg: &SuiteConfig, tol: &Tolerances) -> Result<TrialReport> {
    check_id(id)?;
    cfg.validate()?;
    tol.validate()?;
    Ok(trials::run_trial(id, 0, seed, cfg, tol))
}

/// Like [`replay`], also returning the generated inputs.
pub fn replay_with_inputs(id: &str, seed: u64, cfg: &SuiteConfig, tol: &Tolerances) -> Result<(TrialReport, Vec<Matrix>)> {
    check_id(id)?;
    cfg.validate()?;
    tol.validate()?;
    Ok(trials::run_trial_with_inputs(id, 0, seed, cfg, tol))
}

fn summarise(id: &str, reports: &[TrialReport], seconds: Option<f64>) -> TheoremSummary {
    let count = |s: TrialStatus| reports.iter().filter(|r| r.status == s).count();
    TheoremSummary {
        theorem_id: id.to_string(),
        trials: reports.len(),
        violations: count(TrialStatus::Violated),
        inconclusive: count(TrialStatus::Inconclusive),
        skipped: count(TrialStatus::Skipped),
        not_applicable: reports.iter().map(|r| r.not_applicable).sum(),
        legs: reports.iter().map(|r| r.legs).sum(),
        worst_residual: reports.iter().map(|r| r.worst_residual).fold(0.0, f64::max),
        seconds,
    }
}

/// Runs `cfg.trials` trials of each listed theorem. Trials run in parallel
/// and are collected in trial order, so the report depends only on the
/// configuration.
pub fn run_theorems(ids: &[&str], cfg: &SuiteConfig, tol: &Tolerances) -> Result<SuiteReport> {
    cfg.validate()?;
    tol.validate()?;
    for id in ids {
        check_id(id)?;
    }
    let mut summaries = Vec::with_capacity(ids.len());
    let mut failures = Vec::new();
    for &id in ids {
        let start = Instant::now();
        let reports: Vec<TrialReport> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| trials::run_trial(id, t, trial_seed(cfg.seed, t), cfg, tol))
            .collect();
        let seconds = cfg.timings.then(|| start.elapsed().as_secs_f64());
        summaries.push(summarise(id, &reports, seconds));
        failures.extend(
            reports
                .into_iter()
                .filter(|r| matches!(r.status, TrialStatus::Violated | TrialStatus::Inconclusive)),
        );
    }
    Ok(SuiteReport::assemble(cfg, tol, summaries, failures))
}

/// Every theorem plus the fixed fixtures.
pub fn run_suite(cfg: &SuiteConfig, tol: &Tolerances) -> Result<SuiteReport> {
    let mut report = run_theorems(&THEOREM_IDS, cfg, tol)?;
    let fixtures = run_fixtures(tol)?;
    report.theorems.extend(fixtures.theorems);
    report.failures.extend(fixtures.failures);
    let total: usize = report.theorems.iter().map(|t| t.trials).sum();
    let inconclusive: usize = report.theorems.iter().map(|t| t.inconclusive).sum();
    report.inconclusive_rate = inconclusive as f64 / total.max(1) as f64;
    report.passed = report.theorems.iter().all(|t| t.violations == 0) && report.inconclusive_rate <= MAX_INCONCLUSIVE_RATE;
    Ok(report)
}

fn report_from(id: &str, trial: usize, seed: u64, digest: String, result: Result<Outcome>) -> TrialReport {
    let (status, legs, na, worst, detail) = match result {
        Ok(o) => {
            let status = if o.holds() { TrialStatus::Holds } else { TrialStatus::Violated };
            (status, o.legs, o.not_applicable.len(), o.worst_residual, o.failures.join("; "))
        }
        Err(e) if e.is_inconclusive() || matches!(e, Error::GeneratorFailure(_) | Error::ConditioningRejected { .. }) => {
            (TrialStatus::Inconclusive, 0, 0, 0.0, e.to_string())
        }
        Err(e) => (TrialStatus::Skipped, 0, 0, 0.0, e.to_string()),
    };
    TrialReport {
        theorem_id: id.to_string(),
        trial,
        seed,
        inputs_digest: digest,
        status,
        legs,
        not_applicable: na,
        worst_residual: worst,
        detail,
    }
}
