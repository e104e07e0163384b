//! `zipfirm utest`: split bankruptcy records into small and large firms and
//! test whether the two leverage-ratio samples share a distribution.
//!
//! Sample 1 is always the small-firm side, so z < 0 means small firms carry
//! the larger ratios.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use zipfirm::firmdata::parse_csv;
use zipfirm::riskstats::{
    compute_ratios, mann_whitney_u, period_slice, split_by_size, RatioSource, SplitRule,
    UTestResult, DEFAULT_TRUNCATION,
};

use crate::errors::CliError;
use crate::io::{fmt_f64, parse_year_range, write_json, write_tsv, ColFlags};
use crate::manifest::{config_hash, RunManifest};

pub const UTEST_JSON: &str = "utest.json";
pub const UTEST_TSV: &str = "utest.tsv";

#[derive(Debug, Args)]
pub struct UtestArgs {
    /// Bankruptcy CSV with asset and debt columns
    input: PathBuf,
    /// median, or threshold:<size> (small = size strictly below)
    #[arg(long, default_value = "median")]
    split: String,
    /// Drop ratios at or above this value
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    truncate: f64,
    /// Keep filing years in LO:HI
    #[arg(long, value_name = "LO:HI")]
    years: Option<String>,
    #[command(flatten)]
    cols: ColFlags,
    /// Output directory
    #[arg(long, default_value = "utest")]
    out: PathBuf,
}

#[derive(Serialize)]
struct UtestStamp {
    input: String,
    split: String,
    truncate: f64,
    years: Option<(i32, i32)>,
}

/// utest.json payload: the test result plus how the split was made.
#[derive(Serialize)]
struct UtestReport<'a> {
    split: &'a str,
    #[serde(flatten)]
    result: &'a UTestResult,
}

pub fn run(args: UtestArgs) -> Result<(), CliError> {
    let rule = parse_split(&args.split)?;
    let years = args
        .years
        .as_deref()
        .map(|t| parse_year_range(t, "--years"))
        .transpose()?;

    let file = std::fs::File::open(&args.input)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.input.display())))?;
    let outcome = parse_csv(file, &args.cols.to_map(), &args.input.display().to_string())?;
    if !outcome.rejects.is_empty() {
        eprintln!(
            "utest: skipped {} of {} rows",
            outcome.rejects.len(),
            outcome.rows_seen
        );
    }
    let ds = match years {
        Some((lo, hi)) => period_slice(&outcome.dataset, lo, hi)?,
        None => outcome.dataset,
    };

    let ratios = compute_ratios(&ds, args.truncate, RatioSource::Bankrupt)?;
    if ratios.excluded > 0 {
        eprintln!("utest: truncated {} ratios at {}", ratios.excluded, args.truncate);
    }
    let split = split_by_size(&ratios.sample, rule)?;
    if split.small.is_empty() || split.large.is_empty() {
        let side = if split.small.is_empty() { "small" } else { "large" };
        return Err(CliError::Data(format!(
            "split '{}' left the {side}-firm side empty ({} ratios total)",
            args.split,
            ratios.sample.len()
        )));
    }
    let result = mann_whitney_u(split.small.ratios(), split.large.ratios())?;

    std::fs::create_dir_all(&args.out)?;
    write_json(
        &args.out.join(UTEST_JSON),
        &UtestReport { split: &args.split, result: &result },
    )?;
    write_tsv(
        &args.out.join(UTEST_TSV),
        "u\tz\tp\tn1\tn2",
        [format!(
            "{}\t{}\t{}\t{}\t{}",
            fmt_f64(result.u_statistic),
            fmt_f64(result.z_value),
            fmt_f64(result.p_value_two_sided),
            result.n1,
            result.n2
        )],
    )?;

    let stamp = UtestStamp {
        input: args.input.display().to_string(),
        split: args.split.clone(),
        truncate: args.truncate,
        years,
    };
    RunManifest::new(
        "utest",
        config_hash(&stamp)?,
        None,
        vec![args.input.display().to_string()],
        vec![UTEST_JSON.to_string(), UTEST_TSV.to_string()],
    )
    .write(&args.out)?;

    println!(
        "utest: split {} -> n1 = {} (small), n2 = {} (large), z = {:.3}, p = {:.4}, outputs in {}",
        args.split,
        result.n1,
        result.n2,
        result.z_value,
        result.p_value_two_sided,
        args.out.display()
    );
    Ok(())
}

fn parse_split(text: &str) -> Result<SplitRule, CliError> {
    if text == "median" {
        return Ok(SplitRule::Median);
    }
    if let Some(value) = text.strip_prefix("threshold:") {
        let v: f64 = value.parse().map_err(|_| {
            CliError::usage(format!("--split threshold: bad size '{value}'"))
        })?;
        if !v.is_finite() || v <= 0.0 {
            return Err(CliError::usage(format!(
                "--split threshold: size must be positive, got {value}"
            )));
        }
        return Ok(SplitRule::Threshold(v));
    }
    Err(CliError::usage(format!(
        "--split: expected 'median' or 'threshold:<size>', got '{text}'"
    )))
}
