//! `zipfirm bayes`: combine a bankrupt-side and an existing-side power-law
//! fit into a bankruptcy probability curve P(B|R), optionally tabulated on
//! a ratio grid.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use zipfirm::riskstats::bayes_compose;
use zipfirm::scalefit::PowerLawFit;

use crate::errors::CliError;
use crate::io::{fmt_f64, parse_f64_range, read_versioned, write_json, write_tsv};
use crate::manifest::{config_hash, RunManifest};

pub const BAYES_FILE: &str = "bayes.json";
pub const GRID_FILE: &str = "grid.tsv";

#[derive(Debug, Args)]
pub struct BayesArgs {
    /// fit.json for the ratios of bankrupt firms
    #[arg(long, value_name = "FILE")]
    fit_bankrupt: PathBuf,
    /// fit.json for the ratios of existing firms
    #[arg(long, value_name = "FILE")]
    fit_existing: PathBuf,
    /// Density prefactor of the bankrupt-side tail
    #[arg(long)]
    prefactor_bankrupt: f64,
    /// Density prefactor of the existing-side tail
    #[arg(long)]
    prefactor_existing: f64,
    /// Base rate P(B): share of firms that go bankrupt per period
    #[arg(long)]
    p_b: f64,
    /// Override the valid ratio range (default: intersection of fit ranges)
    #[arg(long, value_name = "LO:HI")]
    range: Option<String>,
    /// Also tabulate P(B|R) at N evenly spaced ratios in [LO, HI]
    #[arg(long, value_name = "LO:HI:N")]
    grid: Option<String>,
    /// Output directory
    #[arg(long, default_value = "bayes")]
    out: PathBuf,
}

#[derive(Serialize)]
struct BayesStamp {
    fit_bankrupt: String,
    fit_existing: String,
    prefactor_bankrupt: f64,
    prefactor_existing: f64,
    p_b: f64,
    range: Option<(f64, f64)>,
    grid: Option<(f64, f64, usize)>,
}

pub fn run(args: BayesArgs) -> Result<(), CliError> {
    let range = args
        .range
        .as_deref()
        .map(|t| parse_f64_range(t, "--range"))
        .transpose()?;
    let grid = args.grid.as_deref().map(parse_grid).transpose()?;

    let fit_b: PowerLawFit = read_versioned(&args.fit_bankrupt)?;
    let fit_e: PowerLawFit = read_versioned(&args.fit_existing)?;
    let estimate = bayes_compose(
        &fit_b,
        &fit_e,
        args.prefactor_bankrupt,
        args.prefactor_existing,
        args.p_b,
        range,
    )?;

    std::fs::create_dir_all(&args.out)?;
    write_json(&args.out.join(BAYES_FILE), &estimate)?;
    let mut outputs = vec![BAYES_FILE.to_string()];

    if let Some((lo, hi, n)) = grid {
        let rows = (0..n).map(|i| {
            let r = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let (p, clamped) = estimate.evaluate(r);
            format!("{}\t{}\t{}", fmt_f64(r), fmt_f64(p), clamped)
        });
        write_tsv(&args.out.join(GRID_FILE), "ratio\tp\tclamped", rows)?;
        outputs.push(GRID_FILE.to_string());
    }

    let stamp = BayesStamp {
        fit_bankrupt: args.fit_bankrupt.display().to_string(),
        fit_existing: args.fit_existing.display().to_string(),
        prefactor_bankrupt: args.prefactor_bankrupt,
        prefactor_existing: args.prefactor_existing,
        p_b: args.p_b,
        range,
        grid,
    };
    RunManifest::new(
        "bayes",
        config_hash(&stamp)?,
        None,
        vec![
            args.fit_bankrupt.display().to_string(),
            args.fit_existing.display().to_string(),
        ],
        outputs,
    )
    .write(&args.out)?;

    println!(
        "bayes: P(B|R) = {:.4} * {} * R^{:.4} on [{:.3}, {:.3}], outputs in {}",
        estimate.prefactor,
        fmt_f64(estimate.p_b),
        estimate.exponent,
        estimate.r_lo,
        estimate.r_hi,
        args.out.display()
    );
    Ok(())
}

fn parse_grid(text: &str) -> Result<(f64, f64, usize), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let usage = || CliError::usage(format!("--grid: expected LO:HI:N, got '{text}'"));
    if parts.len() != 3 {
        return Err(usage());
    }
    let lo: f64 = parts[0].parse().map_err(|_| usage())?;
    let hi: f64 = parts[1].parse().map_err(|_| usage())?;
    let n: usize = parts[2].parse().map_err(|_| usage())?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi || n < 2 {
        return Err(CliError::usage(format!(
            "--grid: need LO < HI and N >= 2, got '{text}'"
        )));
    }
    Ok((lo, hi, n))
}
