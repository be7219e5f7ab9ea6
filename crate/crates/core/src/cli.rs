//! The `ginv` command-line front end.
//!
//! Exit codes: 0 on success or a passing run, 1 on a property violation, an
//! `--expect` mismatch or an inconclusive numeric result, 2 on usage and
//! input errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::conditions::{self, check_word_condition, trial_rng, CommutingFamily, PoolRecipe, WordPattern};
use crate::error::Error;
use crate::ginverse::{self, ClassificationReport, InverseKind};
use crate::matrix::Matrix;
use crate::theorems::{self, SuiteConfig, SuiteReport, TrialStatus, THEOREM_IDS};
use crate::tolerances::Tolerances;

/// Options that may also come from `--config`. Flags win over the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub tol_rank: Option<f64>,
    pub tol_eig: Option<f64>,
    pub tol_res: Option<f64>,
    pub tol_unity: Option<f64>,
    pub tol_cluster: Option<f64>,
    pub n_max_unity: Option<u32>,
    pub n_oracle: Option<u32>,
    pub cond_max: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub sizes: Option<Vec<usize>>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl CliConfig {
    /// Later values override earlier ones field by field.
    fn overlay(mut self, other: CliConfig) -> CliConfig {
        macro_rules! take {
            ($($f:ident),*) => { $(if other.$f.is_some() { self.$f = other.$f; })* };
        }
        take!(tol_rank, tol_eig, tol_res, tol_unity, tol_cluster, n_max_unity, n_oracle, cond_max, seed, trials, sizes, output, format);
        self
    }

    /// Defaults with every override applied, plus the overrides by name.
    fn tolerances(&self) -> (Tolerances, BTreeMap<&'static str, Value>) {
        let mut tol = Tolerances::default();
        let mut echoed = BTreeMap::new();
        macro_rules! apply {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { tol.$f = v; echoed.insert(stringify!($f), json!(v)); })* };
        }
        apply!(tol_rank, tol_eig, tol_res, tol_unity, tol_cluster, n_max_unity, n_oracle, cond_max);
        (tol, echoed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Markdown,
}

#[derive(Parser)]
#[command(name = "ginv", version, about = "Generalized inverses of complex square matrices")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON file mirroring the command-line options
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    #[arg(long, global = true)]
    tol_eig: Option<f64>,
    #[arg(long, global = true)]
    tol_res: Option<f64>,
    #[arg(long, global = true)]
    tol_unity: Option<f64>,
    #[arg(long, global = true)]
    tol_cluster: Option<f64>,
    #[arg(long = "tol-n-max-unity", global = true)]
    n_max_unity: Option<u32>,
    #[arg(long = "tol-n-oracle", global = true)]
    n_oracle: Option<u32>,
    #[arg(long = "tol-cond-max", global = true)]
    cond_max: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum, index and membership in every class
    Classify {
        #[arg(short, long)]
        input: PathBuf,
        /// Required outcome, e.g. `gpih` or `not-ghirano`; repeatable
        #[arg(long)]
        expect: Vec<String>,
    },
    /// Compute one generalized inverse
    Invert {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Evaluate a word condition on a pair
    Check {
        #[arg(long)]
        pattern: WordPattern,
        #[arg(long)]
        k: usize,
        #[arg(short = 'a')]
        a: PathBuf,
        #[arg(short = 'b')]
        b: PathBuf,
        /// Required outcome: `holds` or `fails`
        #[arg(long)]
        expect: Option<String>,
    },
    /// Run fixtures and property trials
    Verify {
        /// `all`, `fixtures` or a theorem id
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated matrix orders
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        k_max: Option<usize>,
        /// Record per-theorem wall time (reports stop being reproducible)
        #[arg(long)]
        timings: bool,
        /// Re-run one trial of `--suite <id>` from its reported seed
        #[arg(long)]
        replay: Option<u64>,
    },
    /// Dump generated instances for inspection
    Gen {
        #[arg(long, value_enum)]
        generator: GenArg,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 4)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, value_enum, default_value = "mixed")]
        recipe: RecipeArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Drazin,
    Group,
    Gpih,
    Gsd,
    Ghirano,
}

impl From<KindArg> for InverseKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Drazin => InverseKind::Drazin,
            KindArg::Group => InverseKind::Group,
            KindArg::Gpih => InverseKind::GPiHirano,
            KindArg::Gsd => InverseKind::GsDrazin,
            KindArg::Ghirano => InverseKind::GHirano,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GenArg {
    Planted,
    AbZero,
    AbZeroPlanted,
    AbBaZero,
    KStar,
    KAst,
    Commuting,
    ProductPair,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecipeArg {
    Zero,
    Unity,
    Gpih,
    Mixed,
    Arbitrary,
}

impl From<RecipeArg> for PoolRecipe {
    fn from(r: RecipeArg) -> Self {
        match r {
            RecipeArg::Zero => PoolRecipe::zero(),
            RecipeArg::Unity => PoolRecipe::unity(),
            RecipeArg::Gpih => PoolRecipe::gpih(),
            RecipeArg::Mixed => PoolRecipe::mixed(),
            RecipeArg::Arbitrary => PoolRecipe::arbitrary(),
        }
    }
}

/// Why a command failed, mapped onto the exit code.
enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let numeric = e.is_inconclusive()
            || matches!(e, Error::OverflowDetected(_) | Error::GeneratorFailure(_) | Error::ConditioningRejected { .. });
        if numeric {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

/// What a command produced: a report and whether it passed.
struct Output {
    command: &'static str,
    body: Value,
    markdown: String,
    passed: bool,
}

/// Parses `argv` (program name first), runs one subcommand and returns the
/// exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return 0;
            }
            // Some clap errors omit the grammar; usage errors always show it.
            if !e.render().to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return 2;
        }
    };
    match run(cli) {
        Ok(passed) => i32::from(!passed),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("inconclusive: {msg}");
            1
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let file = match &cli.common.config {
        Some(path) => read_json::<CliConfig>(path)?,
        None => CliConfig::default(),
    };
    let c = &cli.common;
    let flags = CliConfig {
        tol_rank: c.tol_rank,
        tol_eig: c.tol_eig,
        tol_res: c.tol_res,
        tol_unity: c.tol_unity,
        tol_cluster: c.tol_cluster,
        n_max_unity: c.n_max_unity,
        n_oracle: c.n_oracle,
        cond_max: c.cond_max,
        output: c.output.clone(),
        format: c.format,
        ..CliConfig::default()
    };
    let mut config = file.overlay(flags);
    let (tol, overrides) = config.tolerances();
    tol.validate()?;

    let out = match cli.command {
        Command::Classify { input, expect } => classify(&input, &expect, &tol)?,
        Command::Invert { input, kind } => invert(&input, kind.into(), &tol)?,
        Command::Check { pattern, k, a, b, expect } => check(pattern, k, &a, &b, expect.as_deref(), &tol)?,
        Command::Verify { suite, trials, seed, sizes, k_max, timings, replay } => {
            config = config.overlay(CliConfig { trials, seed, sizes, ..CliConfig::default() });
            let mut cfg = SuiteConfig {
                trials: config.trials.unwrap_or(SuiteConfig::default().trials),
                seed: config.seed.unwrap_or(0),
                timings,
                ..SuiteConfig::default()
            };
            if let Some(sizes) = config.sizes.clone() {
                cfg.sizes = sizes;
            }
            if let Some(k) = k_max {
                cfg.k_max = k;
            }
            match replay {
                Some(s) => replay_trial(&suite, s, &cfg, &tol)?,
                None => verify(&suite, &cfg, &tol)?,
            }
        }
        Command::Gen { generator, seed, size, k, recipe } => {
            let seed = seed.or(config.seed).unwrap_or(0);
            config.seed = Some(seed);
            generate(generator, seed, size, k, recipe.into())?
        }
    };
    emit(&out, &config, &tol, &overrides)?;
    Ok(out.passed)
}

fn emit(out: &Output, config: &CliConfig, tol: &Tolerances, overrides: &BTreeMap<&'static str, Value>) -> Result<(), Failure> {
    let text = match config.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut envelope = json!({
                "command": out.command,
                "tolerances": tol,
                "overrides": overrides,
            });
            if let Some(seed) = config.seed {
                envelope["seed"] = json!(seed);
            }
            envelope["passed"] = json!(out.passed);
            envelope["report"] = out.body.clone();
            let mut s = serde_json::to_string_pretty(&envelope).map_err(|e| Failure::Usage(e.to_string()))?;
            s.push('\n');
            s
        }
        Format::Markdown => {
            let mut s = format!("<!-- ginv {} -->\n", out.command);
            let _ = writeln!(s, "tolerances: `{}`", serde_json::to_string(tol).unwrap_or_default());
            let _ = writeln!(s, "overrides: `{}`", serde_json::to_string(overrides).unwrap_or_default());
            if let Some(seed) = config.seed {
                let _ = writeln!(s, "seed: {seed}");
            }
            s.push('\n');
            s.push_str(&out.markdown);
            s
        }
    };
    match &config.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn read_matrix(path: &Path) -> Result<Matrix, Failure> {
    read_json(path)
}

fn classify(input: &Path, expect: &[String], tol: &Tolerances) -> Result<Output, Failure> {
    let a = read_matrix(input)?;
    let r = ginverse::classify(&a, tol)?;
    let mut mismatches = Vec::new();
    for e in expect {
        let (want, name) = match e.strip_prefix("not-") {
            Some(rest) => (false, rest),
            None => (true, e.as_str()),
        };
        if class_flag(&r, name)? != want {
            mismatches.push(e.clone());
        }
    }
    let mut md = String::from("| property | value |\n|---|---|\n");
    for (name, v) in [
        ("invertible", r.invertible),
        ("group invertible", r.group_invertible),
        ("quasinilpotent", r.quasinilpotent),
        ("gs-Drazin", r.gs_drazin),
        ("g-Hirano", r.g_hirano),
        ("g-pi-Hirano", r.g_pi_hirano),
    ] {
        let _ = writeln!(md, "| {name} | {v} |");
    }
    let _ = writeln!(md, "| Drazin index | {} |", r.drazin_index);
    let _ = writeln!(md, "| witness n | {} |", r.gpih_witness_n.map_or("-".into(), |n| n.to_string()));
    md.push_str("\nspectrum:\n");
    for z in &r.spectrum.eigenvalues {
        let _ = writeln!(md, "- {:.12} {:+.12}i", z.re, z.im);
    }
    if !mismatches.is_empty() {
        let _ = writeln!(md, "\nexpectation mismatch: {}", mismatches.join(", "));
    }
    let mut body = serde_json::to_value(&r).map_err(|e| Failure::Usage(e.to_string()))?;
    body["input"] = json!(input.display().to_string());
    body["expect_mismatches"] = json!(mismatches);
    Ok(Output { command: "classify", body, markdown: md, passed: mismatches.is_empty() })
}

fn class_flag(r: &ClassificationReport, name: &str) -> Result<bool, Failure> {
    Ok(match name {
        "invertible" => r.invertible,
        "group" => r.group_invertible,
        "qnil" => r.quasinilpotent,
        "gsd" => r.gs_drazin,
        "ghirano" => r.g_hirano,
        "gpih" => r.g_pi_hirano,
        _ => {
            return Err(Failure::Usage(format!(
                "unknown expectation '{name}' (expected [not-]invertible, group, qnil, gsd, ghirano or gpih)"
            )))
        }
    })
}

fn invert(input: &Path, kind: InverseKind, tol: &Tolerances) -> Result<Output, Failure> {
    let a = read_matrix(input)?;
    let w = ginverse::invert(&a, kind, tol)?;
    let md = match &w {
        Some(w) => {
            let mut s = format!("{kind:?} inverse (index {}", w.drazin_index);
            if let Some(n) = w.witness_n {
                let _ = write!(s, ", witness n = {n}");
            }
            let _ = writeln!(s, ", worst residual {:.2e}):\n", w.residuals.worst());
            s.push_str(&markdown_matrix(&w.x));
            s
        }
        None => format!("{kind:?} inverse does not exist.\n"),
    };
    let body = json!({
        "input": input.display().to_string(),
        "kind": kind,
        "exists": w.is_some(),
        "witness": w,
    });
    Ok(Output { command: "invert", body, markdown: md, passed: true })
}

fn markdown_matrix(m: &Matrix) -> String {
    let mut s = String::new();
    for i in 0..m.order() {
        let cells: Vec<String> = m.row(i).iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
        let _ = writeln!(s, "    {}", cells.join("  "));
    }
    s
}

fn check(pattern: WordPattern, k: usize, a: &Path, b: &Path, expect: Option<&str>, tol: &Tolerances) -> Result<Output, Failure> {
    let (ma, mb) = (read_matrix(a)?, read_matrix(b)?);
    let r = check_word_condition(&ma, &mb, k, pattern, tol)?;
    let passed = match expect {
        None => true,
        Some("holds") => r.holds,
        Some("fails") => !r.holds,
        Some(other) => return Err(Failure::Usage(format!("unknown expectation '{other}' (expected holds or fails)"))),
    };
    let md = format!(
        "{pattern} with k = {k}: {} (worst relative residual {:.2e})\n",
        if r.holds { "holds" } else { "fails" },
        r.worst_residual
    );
    let mut body = serde_json::to_value(&r).map_err(|e| Failure::Usage(e.to_string()))?;
    body["a"] = json!(a.display().to_string());
    body["b"] = json!(b.display().to_string());
    Ok(Output { command: "check", body, markdown: md, passed })
}

fn verify(suite: &str, cfg: &SuiteConfig, tol: &Tolerances) -> Result<Output, Failure> {
    let report: SuiteReport = match suite {
        "all" => theorems::run_suite(cfg, tol)?,
        "fixtures" => theorems::run_fixtures(tol)?,
        id if THEOREM_IDS.contains(&id) => theorems::run_theorems(&[id], cfg, tol)?,
        other => {
            return Err(Failure::Usage(format!(
                "unknown suite '{other}' (expected all, fixtures or one of {})",
                THEOREM_IDS.join(", ")
            )))
        }
    };
    let body = serde_json::to_value(&report).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(Output { command: "verify", body, markdown: report.to_markdown(), passed: report.passed })
}

fn replay_trial(id: &str, seed: u64, cfg: &SuiteConfig, tol: &Tolerances) -> Result<Output, Failure> {
    let (report, inputs) = theorems::replay_with_inputs(id, seed, cfg, tol)?;
    let md = format!(
        "replay of `{id}` seed {seed}: {:?}, {} legs{}\n",
        report.status,
        report.legs,
        if report.detail.is_empty() { String::new() } else { format!(": {}", report.detail) }
    );
    let passed = report.status == TrialStatus::Holds;
    let body = json!({ "trial": report, "inputs": inputs });
    Ok(Output { command: "verify", body, markdown: md, passed })
}

fn generate(generator: GenArg, seed: u64, n: usize, k: usize, recipe: PoolRecipe) -> Result<Output, Failure> {
    if n == 0 {
        return Err(Failure::Usage("size must be at least 1".into()));
    }
    let mut rng = trial_rng(seed);
    let rng = &mut rng;
    let matrices: Vec<Matrix> = match generator {
        GenArg::Planted => vec![conditions::gen_from_recipe(n, &recipe, rng)?],
        GenArg::AbZero => pair(conditions::gen_ab_zero(n, rng)?),
        GenArg::AbZeroPlanted => pair(conditions::gen_ab_zero_planted(n, &recipe, &recipe, rng)?),
        GenArg::AbBaZero => pair(conditions::gen_ab_ba_zero(n, &recipe, &recipe, rng)?),
        GenArg::KStar => pair(conditions::gen_k_star(k, n.max(k + 4), &recipe, &recipe, rng)?),
        GenArg::KAst => pair(conditions::gen_k_ast(k, n.max(k + 1), false, &recipe, &recipe, rng)?),
        GenArg::Commuting => pair(conditions::gen_commuting(n, CommutingFamily::Polynomial, rng)?),
        GenArg::ProductPair => pair(conditions::gen_product_pair(n, &recipe, rng)?),
    };
    let mut md = String::new();
    for (i, m) in matrices.iter().enumerate() {
        let _ = writeln!(md, "matrix {i}:\n");
        md.push_str(&markdown_matrix(m));
        md.push('\n');
    }
    let name = generator.to_possible_value().map(|v| v.get_name().to_owned());
    let manifest = json!({ "generator": name, "seed": seed, "size": matrices.first().map_or(n, Matrix::order), "k": k, "recipe": recipe });
    let body = json!({ "manifest": manifest, "matrices": matrices });
    Ok(Output { command: "gen", body, markdown: md, passed: true })
}

fn pair((a, b): (Matrix, Matrix)) -> Vec<Matrix> {
    vec![a, b]
}
