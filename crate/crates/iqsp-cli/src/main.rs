//! Command-line surface: catalog browsing, computation jobs, verification
//! suites, machine-readable exports.
//!
//! Exit codes: 0 success (for `verify`: all suites passed), 2 unknown
//! identifier, 3 bound exceeded, 4 parameter violation, 1 other failures.

use std::io::Write;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use iqsp_cli::jobs::{self, cache, result_doc, run_catalog, run_verify_suite, JobSpec, EXIT_UNKNOWN};

#[derive(Parser)]
#[command(name = "iqsp", version, about = "exact quantum symmetric pair computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Satake type label (AI, AII3, AIII11, DII, FII, ...)
    #[arg(long = "type")]
    type_name: Option<String>,
    /// Rank qualifier for plain family labels
    #[arg(long)]
    rank: Option<usize>,
    /// Plain Cartan type for split/quantum-group jobs (e.g. A2, B2, A1xA1)
    #[arg(long)]
    cartan: Option<String>,
    /// Dominant weight, comma separated fundamental coordinates
    #[arg(long, value_parser = parse_weight)]
    lambda: Option<Vec<i64>>,
    /// Second dominant weight for tensor jobs
    #[arg(long, value_parser = parse_weight)]
    mu: Option<Vec<i64>>,
    /// Height bound
    #[arg(long)]
    height: Option<u32>,
    /// Degree (multiples of the minimal intertwiner support)
    #[arg(long)]
    degree: Option<u32>,
    /// kappa parameter (integer or exact Laurent text), attached at the
    /// first node where it is allowed
    #[arg(long)]
    kappa: Option<String>,
    /// Comma-separated 1-based white nodes whose varsigma sign to flip
    #[arg(long = "sigma-signs")]
    sigma_signs: Option<String>,
    /// Schedule length for stabilization jobs
    #[arg(long, default_value_t = 6)]
    schedule: u32,
    /// Label family for modified-form jobs: f (white/any) or e (black)
    #[arg(long)]
    family: Option<String>,
    /// 1-based node of the label
    #[arg(long, default_value_t = 1)]
    node: usize,
    /// Divided power of the label
    #[arg(long, default_value_t = 1)]
    power: u32,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<String>,
    /// Output format
    #[arg(long, default_value = "json")]
    format: String,
    /// Time budget such as `300s` (soft: checked between suites)
    #[arg(long)]
    budget: Option<String>,
}

fn parse_weight(s: &str) -> Result<Vec<i64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<i64>().map_err(|e| e.to_string()))
        .collect()
}

#[derive(Subcommand)]
enum Command {
    /// List Satake diagrams with admissibility, parameters, and rank-one data
    Catalog {
        #[command(flatten)]
        common: CommonArgs,
        /// List every catalog entry
        #[arg(long)]
        all: bool,
        /// Check admissibility of the listed entries (nonzero exit on failure)
        #[arg(long)]
        check: bool,
    },
    /// Run a computation and export exact tables
    Compute {
        /// cbf | cbl | cbtensor | upsilon | icb | icbdot | form
        kind: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run verification suites
    Verify {
        /// braid | wp | integrality | stabilize | orthonormal | all
        suite: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn job_from(common: &CommonArgs, command: &str) -> JobSpec {
    JobSpec {
        command: command.to_string(),
        type_name: common.type_name.clone(),
        rank: common.rank,
        cartan: common.cartan.clone(),
        lambda: common.lambda.clone(),
        mu: common.mu.clone(),
        height: common.height,
        degree: common.degree,
        kappa: common.kappa.clone(),
        sigma_signs: common.sigma_signs.clone(),
        schedule: common.schedule,
        family: common.family.clone(),
        node: common.node,
        power: common.power,
    }
}

fn emit(common: &CommonArgs, doc: &serde_json::Value) -> anyhow::Result<()> {
    let text = match common.format.as_str() {
        "json" => serde_json::to_string_pretty(doc)? + "\n",
        "tsv" => jobs::to_tsv(doc),
        other => anyhow::bail!("unknown format '{other}'"),
    };
    match &common.out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            // atomic write
            let tmp = format!("{path}.tmp");
            std::fs::write(&tmp, &text)?;
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
    }
}

fn parse_budget(s: &str) -> Option<Duration> {
    let t = s.trim();
    let (num, unit) = t.split_at(t.find(|c: char| !c.is_ascii_digit()).unwrap_or(t.len()));
    let n: u64 = num.parse().ok()?;
    match unit {
        "" | "s" => Some(Duration::from_secs(n)),
        "m" => Some(Duration::from_secs(n * 60)),
        "ms" => Some(Duration::from_millis(n)),
        _ => None,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let msg = format!("{e:#}");
            if msg.contains("unknown type")
                || msg.contains("no catalog entry")
                || msg.contains("unknown cartan")
            {
                ExitCode::from(EXIT_UNKNOWN as u8)
            } else if msg.contains("bound exceeded") {
                ExitCode::from(jobs::EXIT_BOUND as u8)
            } else if msg.contains("parameter") || msg.contains("violat") {
                ExitCode::from(jobs::EXIT_PARAM as u8)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Catalog { common, all, check } => {
            let started = Instant::now();
            let (results, all_valid) =
                run_catalog(common.type_name.as_deref(), common.rank, all, check)?;
            let job = job_from(&common, "catalog");
            let doc = result_doc(&job, results, started, None);
            emit(&common, &doc)?;
            if check && !all_valid {
                return Ok(ExitCode::FAILURE);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Compute { kind, common } => {
            let started = Instant::now();
            let job = job_from(&common, &format!("compute {kind}"));
            let cartan = jobs::resolve_job(&job)?.cartan_name;
            let (results, mut f) = match kind.as_str() {
                "upsilon" => jobs::compute_upsilon(&job)?,
                "cbf" => jobs::compute_cbf(&job)?,
                "cbl" => jobs::compute_cbl(&job)?,
                "cbtensor" => jobs::compute_cbtensor(&job)?,
                "icb" => jobs::compute_icb(&job)?,
                "icbdot" => jobs::compute_icbdot(&job)?,
                "form" => jobs::compute_form(&job, None)?.into(),
                other => anyhow::bail!("unknown compute kind '{other}'"),
            };
            let loaded = 0; // caches are hydrated inside runners when enabled
            cache::save(&mut f, &cartan);
            let doc = result_doc(&job, results, started, Some(cache::stats(&f, loaded)));
            emit(&common, &doc)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, common } => {
            let started = Instant::now();
            let budget = common.budget.as_deref().and_then(parse_budget);
            let job = job_from(&common, &format!("verify {suite}"));
            let suites: Vec<String> = if suite == "all" {
                jobs::suites_for_all().into_iter().map(String::from).collect()
            } else {
                vec![suite.clone()]
            };
            let mut all_pass = true;
            let mut summaries = Vec::new();
            let mut last_algebra: Option<(iqsp_core::falg::FAlgebra, String)> = None;
            for s in &suites {
                if let Some(b) = budget {
                    if started.elapsed() > b {
                        summaries.push(json!({"suite": s, "skipped": "budget exhausted"}));
                        continue;
                    }
                }
                let t0 = Instant::now();
                let (pass, details, f) = run_verify_suite(s, &job)?;
                all_pass &= pass;
                let line = json!({
                    "suite": s,
                    "pass": pass,
                    "elapsed_ms": t0.elapsed().as_millis() as u64,
                    "details": details,
                });
                println!(
                    "{}: {}",
                    s,
                    if pass { "PASS" } else { "FAIL" }
                );
                std::io::stdout().flush().ok();
                summaries.push(line);
                last_algebra = Some((f, jobs::resolve_job(&job)?.cartan_name));
            }
            let cache_stats = last_algebra.as_ref().map(|(f, _)| cache::stats(f, 0));
            if let Some((mut f, cartan)) = last_algebra {
                cache::save(&mut f, &cartan);
            }
            let doc = result_doc(&job, json!({ "suites": summaries }), started, cache_stats);
            emit(&common, &doc)?;
            Ok(if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}
