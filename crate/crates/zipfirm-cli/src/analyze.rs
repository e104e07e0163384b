//! `zipfirm analyze`: rank a field from a bankruptcy CSV or an economy
//! snapshot, fit it, and write fit.json plus a plot-ready TSV.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use zipfirm::firmdata::{load_snapshot, parse_csv, Dataset, Snapshot};
use zipfirm::riskstats::{compute_ratios, period_slice, RatioSource, DEFAULT_TRUNCATION};
use zipfirm::scalefit::{
    build_rank_series, detect_crossover, fit_power_law, fitted_value_at_rank,
    fit_stretched_exponential, FitMethod, FitRange, RankSeries, DEFAULT_MIN_SEGMENT,
};
use zipfirm::simonsim::SeriesField;

use crate::errors::CliError;
use crate::io::{
    fmt_f64, parse_f64_range, parse_rank_range, parse_year_range, sniff_input, write_json,
    write_tsv, ColFlags, InputKind,
};
use crate::manifest::{config_hash, RunManifest};

pub const FIT_FILE: &str = "fit.json";
pub const PLOT_FILE: &str = "plot.tsv";

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Bankruptcy CSV or economy snapshot (detected by content)
    input: PathBuf,
    /// CSV inputs: pre_assets | assets | debt | ratio.
    /// Snapshots: assets | debt | ratio_alive | ratio_bankrupt_events
    #[arg(long, default_value = "assets")]
    field: String,
    /// ols | gi | pdf | ccdf | stretched
    #[arg(long, default_value = "gi")]
    method: String,
    /// Restrict the fit to ranks LO:HI
    #[arg(long, value_name = "LO:HI", conflicts_with = "value_range")]
    rank_range: Option<String>,
    /// Restrict the fit to values in [LO, HI]
    #[arg(long, value_name = "LO:HI")]
    value_range: Option<String>,
    /// Fit two power-law regimes with a scanned break rank instead of one
    #[arg(long, conflicts_with_all = ["rank_range", "value_range"])]
    crossover: bool,
    /// Smallest ranks a crossover regime may hold
    #[arg(long, default_value_t = DEFAULT_MIN_SEGMENT)]
    min_segment: usize,
    /// CSV inputs only: keep filing years in LO:HI
    #[arg(long, value_name = "LO:HI")]
    years: Option<String>,
    /// CSV ratio field only: drop ratios at or above this value
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    truncate: f64,
    #[command(flatten)]
    cols: ColFlags,
    /// Output directory
    #[arg(long, default_value = "analysis")]
    out: PathBuf,
}

/// Everything that determines the result, hashed into the manifest.
#[derive(Serialize)]
struct AnalyzeStamp<'a> {
    input: String,
    field: &'a str,
    method: &'a str,
    rank_range: Option<(usize, usize)>,
    value_range: Option<(f64, f64)>,
    crossover: bool,
    min_segment: usize,
    years: Option<(i32, i32)>,
    truncate: f64,
}

pub fn run(args: AnalyzeArgs) -> Result<(), CliError> {
    let rank_range = args
        .rank_range
        .as_deref()
        .map(|t| parse_rank_range(t, "--rank-range"))
        .transpose()?;
    let value_range = args
        .value_range
        .as_deref()
        .map(|t| parse_f64_range(t, "--value-range"))
        .transpose()?;
    let years = args
        .years
        .as_deref()
        .map(|t| parse_year_range(t, "--years"))
        .transpose()?;

    let values = extract_values(&args, years)?;
    let (series, dropped) = build_rank_series(&values)?;
    if dropped > 0 {
        eprintln!("analyze: dropped {dropped} non-positive or non-finite values");
    }

    std::fs::create_dir_all(&args.out)?;
    let fit_range = match (rank_range, value_range) {
        (Some((lo, hi)), None) => FitRange::Ranks(lo, hi),
        (None, Some((lo, hi))) => FitRange::Values(lo, hi),
        (None, None) => FitRange::All,
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };

    if args.crossover {
        fit_crossover(&args.out, &series, args.min_segment)?;
    } else if args.method == "stretched" {
        fit_stretched(&args.out, &series)?;
    } else {
        let method = args.method.parse::<FitMethod>().map_err(|_| {
            CliError::usage(format!(
                "unknown method '{}' (expected ols, gi, pdf, ccdf, or stretched)",
                args.method
            ))
        })?;
        fit_single(&args.out, &series, method, fit_range)?;
    }

    let stamp = AnalyzeStamp {
        input: args.input.display().to_string(),
        field: &args.field,
        method: &args.method,
        rank_range,
        value_range,
        crossover: args.crossover,
        min_segment: args.min_segment,
        years,
        truncate: args.truncate,
    };
    RunManifest::new(
        "analyze",
        config_hash(&stamp)?,
        None,
        vec![args.input.display().to_string()],
        vec![FIT_FILE.to_string(), PLOT_FILE.to_string()],
    )
    .write(&args.out)?;
    Ok(())
}

fn fit_single(
    out: &Path,
    series: &RankSeries,
    method: FitMethod,
    range: FitRange,
) -> Result<(), CliError> {
    let fit = fit_power_law(series, method, range)?;
    write_json(&out.join(FIT_FILE), &fit)?;
    write_plot(out, series, |rank| fitted_value_at_rank(&fit, rank, series.len()))?;
    println!(
        "analyze: {} fit zeta = {:.4} (stderr {:.4}) over {} points, outputs in {}",
        method.as_str(),
        fit.zeta,
        fit.stderr,
        fit.n_used,
        out.display()
    );
    Ok(())
}

fn fit_crossover(out: &Path, series: &RankSeries, min_segment: usize) -> Result<(), CliError> {
    let fit = detect_crossover(series, min_segment)?;
    write_json(&out.join(FIT_FILE), &fit)?;
    write_plot(out, series, |rank| fit.fitted_value_at_rank(rank))?;
    println!(
        "analyze: crossover at rank {}, zeta {:.4} then {:.4}, improvement ratio {:.3}, outputs in {}",
        fit.break_rank,
        fit.fit_i.zeta,
        fit.fit_ii.zeta,
        fit.improvement_ratio(),
        out.display()
    );
    Ok(())
}

fn fit_stretched(out: &Path, series: &RankSeries) -> Result<(), CliError> {
    let fit = fit_stretched_exponential(series)?;
    write_json(&out.join(FIT_FILE), &fit)?;
    write_plot(out, series, |rank| fit.model_value(rank))?;
    println!(
        "analyze: stretched exponential beta = {:.4}, tau = {:.3}, outputs in {}",
        fit.beta,
        fit.tau,
        out.display()
    );
    Ok(())
}

fn write_plot(
    out: &Path,
    series: &RankSeries,
    model: impl Fn(usize) -> f64,
) -> Result<(), CliError> {
    let rows = series
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{}\t{}\t{}", i + 1, fmt_f64(*v), fmt_f64(model(i + 1))));
    write_tsv(&out.join(PLOT_FILE), "rank\tvalue\tfitted_value", rows)
}

fn extract_values(args: &AnalyzeArgs, years: Option<(i32, i32)>) -> Result<Vec<f64>, CliError> {
    match sniff_input(&args.input)? {
        InputKind::Snapshot => {
            if years.is_some() {
                return Err(CliError::usage("--years applies to CSV inputs only"));
            }
            let field = snapshot_field(&args.field)?;
            let state = match load_snapshot(&args.input)? {
                Snapshot::Economy(state) => state,
                Snapshot::Dataset(_) => {
                    return Err(CliError::Data(format!(
                        "{}: dataset snapshot, expected an economy snapshot",
                        args.input.display()
                    )))
                }
            };
            let series = state.extract_series(field)?;
            Ok(series.values().to_vec())
        }
        InputKind::Csv => {
            let file = std::fs::File::open(&args.input)
                .map_err(|e| CliError::Io(format!("{}: {e}", args.input.display())))?;
            let outcome = parse_csv(
                file,
                &args.cols.to_map(),
                &args.input.display().to_string(),
            )?;
            if !outcome.rejects.is_empty() {
                eprintln!(
                    "analyze: skipped {} of {} rows",
                    outcome.rejects.len(),
                    outcome.rows_seen
                );
            }
            let ds = match years {
                Some((lo, hi)) => period_slice(&outcome.dataset, lo, hi)?,
                None => outcome.dataset,
            };
            csv_field_values(&ds, &args.field, args.truncate)
        }
    }
}

fn snapshot_field(name: &str) -> Result<SeriesField, CliError> {
    match name {
        "assets" => Ok(SeriesField::Assets),
        "debt" => Ok(SeriesField::Debt),
        "ratio_alive" => Ok(SeriesField::RatioAlive),
        "ratio_bankrupt_events" => Ok(SeriesField::RatioBankruptEvents),
        other => Err(CliError::usage(format!(
            "unknown snapshot field '{other}' (expected assets, debt, ratio_alive, or ratio_bankrupt_events)"
        ))),
    }
}

fn csv_field_values(ds: &Dataset, field: &str, truncate: f64) -> Result<Vec<f64>, CliError> {
    let values = match field {
        "pre_assets" => ds
            .records
            .iter()
            .filter_map(|r| r.pre_petition_assets)
            .collect(),
        "assets" => ds.records.iter().filter_map(|r| r.petition_assets).collect(),
        "debt" => ds.records.iter().filter_map(|r| r.petition_debt).collect(),
        "ratio" => {
            let outcome = compute_ratios(ds, truncate, RatioSource::Bankrupt)?;
            if outcome.excluded > 0 {
                eprintln!(
                    "analyze: truncated {} ratios at {}",
                    outcome.excluded, truncate
                );
            }
            outcome.sample.ratios().to_vec()
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown CSV field '{other}' (expected pre_assets, assets, debt, or ratio)"
            )))
        }
    };
    Ok(values)
}
