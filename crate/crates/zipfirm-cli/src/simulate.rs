//! `zipfirm simulate`: run the firm-growth model and write a snapshot, rank
//! series, event log, and manifest into a run directory.
//!
//! Parameter precedence per key: CLI flag > config file > built-in default.
//! The seed additionally reads `ZIPFIRM_SEED` as its default, so the chain
//! for `seed` is flag > file > env > 0.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use zipfirm::firmdata::save_economy;
use zipfirm::simonsim::{EconomyState, HazardMode, SeriesField, SimConfig};

use crate::errors::CliError;
use crate::io::{fmt_f64, write_tsv};
use crate::manifest::{config_hash, RunManifest};

pub const SNAPSHOT_FILE: &str = "economy.snap";
pub const EVENTS_FILE: &str = "events.tsv";

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Probability an arriving asset unit founds a new firm
    #[arg(long)]
    p: Option<f64>,
    /// Debt unit assigned at founding and per absorbed asset unit
    #[arg(long)]
    m: Option<f64>,
    /// Bankruptcy rate scale
    #[arg(long)]
    q: Option<f64>,
    /// Exponent e in the hazard q * R^e
    #[arg(long)]
    hazard_exponent: Option<f64>,
    /// Per-step merger probability
    #[arg(long)]
    p_merge: Option<f64>,
    /// Entry growth exponent (arrivals per step accumulate as t^theta)
    #[arg(long)]
    theta: Option<f64>,
    /// Steps to run; with --resume, additional steps past the snapshot
    #[arg(long)]
    steps: Option<u64>,
    /// RNG seed (default: ZIPFIRM_SEED env var, else 0)
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Comma-separated seeds for a batch; each runs in its own
    /// seed-<N> subdirectory
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// aggregated (default) or per_firm_sweep
    #[arg(long)]
    hazard_mode: Option<String>,
    /// Drop the target's debt on merger instead of transferring it
    #[arg(long)]
    merger_drops_debt: bool,
    /// Flat key=value config file; flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Continue from an economy snapshot; --steps then counts extra steps
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Run directory for outputs
    #[arg(long, default_value = "run")]
    out: PathBuf,
}

impl SimulateArgs {
    fn has_param_flags(&self) -> bool {
        self.p.is_some()
            || self.m.is_some()
            || self.q.is_some()
            || self.hazard_exponent.is_some()
            || self.p_merge.is_some()
            || self.theta.is_some()
            || self.seed.is_some()
            || self.seeds.is_some()
            || self.hazard_mode.is_some()
            || self.merger_drops_debt
            || self.config.is_some()
    }
}

/// Hash input for a resumed run: the original configuration plus how far it
/// was extended, so a resumed run never collides with a fresh one.
#[derive(Serialize)]
struct ResumeStamp<'a> {
    config: &'a SimConfig,
    resumed_steps: u64,
}

pub fn run(args: SimulateArgs) -> Result<(), CliError> {
    if let Some(snapshot) = &args.resume {
        return run_resume(&args, snapshot);
    }

    let base = build_config(&args)?;
    match &args.seeds {
        None => {
            let state = run_one(&base)?;
            write_run_dir(&args.out, &state, &base, Vec::new())?;
            println!(
                "simulate: seed {} ran {} steps, {} firms alive, outputs in {}",
                base.seed,
                base.steps,
                state.alive_count(),
                args.out.display()
            );
        }
        Some(seeds) => {
            if seeds.is_empty() {
                return Err(CliError::usage("--seeds needs at least one seed"));
            }
            let mut sorted = seeds.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != seeds.len() {
                return Err(CliError::usage("--seeds has duplicates"));
            }
            run_batch(&args.out, &base, seeds)?;
        }
    }
    Ok(())
}

fn run_batch(out: &Path, base: &SimConfig, seeds: &[u64]) -> Result<(), CliError> {
    // One worker per seed; nothing is shared, results land in per-seed
    // directories so the only ordering concern is the summary printout.
    let results: Vec<Result<usize, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let mut cfg = base.clone();
                cfg.seed = seed;
                let dir = out.join(format!("seed-{seed}"));
                scope.spawn(move || -> Result<usize, CliError> {
                    let state = run_one(&cfg)?;
                    write_run_dir(&dir, &state, &cfg, Vec::new())?;
                    Ok(state.alive_count())
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation worker panicked"))
            .collect()
    });
    for (seed, result) in seeds.iter().zip(results) {
        let alive = result?;
        println!(
            "simulate: seed {seed} ran {} steps, {alive} firms alive, outputs in {}",
            base.steps,
            out.join(format!("seed-{seed}")).display()
        );
    }
    Ok(())
}

fn run_resume(args: &SimulateArgs, snapshot: &Path) -> Result<(), CliError> {
    if args.has_param_flags() {
        return Err(CliError::usage(
            "--resume takes its parameters from the snapshot; only --steps and --out apply",
        ));
    }
    let extra = args
        .steps
        .ok_or_else(|| CliError::usage("--resume requires --steps (additional steps to run)"))?;
    if extra == 0 {
        return Err(CliError::usage("--steps must be positive"));
    }
    let mut state = load_economy(snapshot)?;
    state.extend_run(extra);

    let stamp = ResumeStamp { config: state.config(), resumed_steps: extra };
    let hash = config_hash(&stamp)?;
    let seed = state.config().seed;
    let manifest = RunManifest::new(
        "simulate",
        hash,
        Some(seed),
        vec![snapshot.display().to_string()],
        output_names(),
    );
    write_outputs(&args.out, &state, &manifest)?;
    println!(
        "simulate: resumed {} for {} steps (t = {}), outputs in {}",
        snapshot.display(),
        extra,
        state.t(),
        args.out.display()
    );
    Ok(())
}

fn load_economy(path: &Path) -> Result<EconomyState, CliError> {
    match zipfirm::firmdata::load_snapshot(path)? {
        zipfirm::firmdata::Snapshot::Economy(state) => Ok(state),
        zipfirm::firmdata::Snapshot::Dataset(_) => Err(CliError::Data(format!(
            "{}: dataset snapshot, expected an economy snapshot",
            path.display()
        ))),
    }
}

fn run_one(cfg: &SimConfig) -> Result<EconomyState, CliError> {
    Ok(zipfirm::simonsim::run(cfg)?)
}

/// Files a simulate run produces next to its manifest.
fn output_names() -> Vec<String> {
    vec![
        SNAPSHOT_FILE.to_string(),
        "assets.tsv".to_string(),
        "debt.tsv".to_string(),
        "ratio.tsv".to_string(),
        EVENTS_FILE.to_string(),
    ]
}

fn write_run_dir(
    dir: &Path,
    state: &EconomyState,
    cfg: &SimConfig,
    input_paths: Vec<String>,
) -> Result<(), CliError> {
    let manifest = RunManifest::new(
        "simulate",
        config_hash(cfg)?,
        Some(cfg.seed),
        input_paths,
        output_names(),
    );
    write_outputs(dir, state, &manifest)
}

fn write_outputs(
    dir: &Path,
    state: &EconomyState,
    manifest: &RunManifest,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    save_economy(state, dir.join(SNAPSHOT_FILE))?;
    write_series(dir, "assets.tsv", state, SeriesField::Assets)?;
    write_series(dir, "debt.tsv", state, SeriesField::Debt)?;
    write_series(dir, "ratio.tsv", state, SeriesField::RatioAlive)?;
    write_events(&dir.join(EVENTS_FILE), state)?;
    manifest.write(dir)?;
    Ok(())
}

fn write_series(
    dir: &Path,
    name: &str,
    state: &EconomyState,
    field: SeriesField,
) -> Result<(), CliError> {
    let series = state.extract_series(field)?;
    let rows = series
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{}\t{}", i + 1, fmt_f64(*v)));
    write_tsv(&dir.join(name), "rank\tvalue", rows)
}

/// Bankruptcies and mergers interleaved by step; bankruptcies first within a
/// step, matching the order they happen in.
fn write_events(path: &Path, state: &EconomyState) -> Result<(), CliError> {
    let mut rows: Vec<(u64, u8, String)> = Vec::new();
    for ev in state.bankruptcy_log() {
        rows.push((
            ev.step,
            0,
            format!("{}\tbankruptcy\t{}\t{}", ev.step, ev.firm, fmt_f64(ev.ratio)),
        ));
    }
    for ev in state.merger_log() {
        rows.push((
            ev.step,
            1,
            format!("{}\tmerger\t{}\t{}", ev.step, ev.acquirer, ev.target),
        ));
    }
    rows.sort_by_key(|(step, kind, _)| (*step, *kind));
    write_tsv(path, "step\tevent\tfirm\tvalue", rows.into_iter().map(|(_, _, r)| r))
}

fn build_config(args: &SimulateArgs) -> Result<SimConfig, CliError> {
    let mut cfg = SimConfig::default();

    if let Ok(text) = std::env::var("ZIPFIRM_SEED") {
        cfg.seed = text
            .parse()
            .map_err(|_| CliError::usage(format!("ZIPFIRM_SEED: bad seed '{text}'")))?;
    }
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        apply_config_file(&mut cfg, &text)?;
    }

    if let Some(v) = args.p {
        cfg.p = v;
    }
    if let Some(v) = args.m {
        cfg.m = v;
    }
    if let Some(v) = args.q {
        cfg.q = v;
    }
    if let Some(v) = args.hazard_exponent {
        cfg.hazard_exponent = v;
    }
    if let Some(v) = args.p_merge {
        cfg.p_merge = v;
    }
    if let Some(v) = args.theta {
        cfg.theta = v;
    }
    if let Some(v) = args.steps {
        cfg.steps = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(mode) = &args.hazard_mode {
        cfg.hazard_mode = mode.parse::<HazardMode>().map_err(CliError::from)?;
    }
    if args.merger_drops_debt {
        cfg.merger_drops_debt = true;
    }

    cfg.validate()?;
    Ok(cfg)
}

/// Flat key=value lines; `#` comments and blank lines ignored. Keys match
/// the SimConfig field names.
fn apply_config_file(cfg: &mut SimConfig, text: &str) -> Result<(), CliError> {
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", idx + 1)))?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| CliError::usage(format!("config key {key}: bad {what} '{value}'"));
        match key {
            "p" => cfg.p = value.parse().map_err(|_| bad("number"))?,
            "m" => cfg.m = value.parse().map_err(|_| bad("number"))?,
            "q" => cfg.q = value.parse().map_err(|_| bad("number"))?,
            "hazard_exponent" => cfg.hazard_exponent = value.parse().map_err(|_| bad("number"))?,
            "p_merge" => cfg.p_merge = value.parse().map_err(|_| bad("number"))?,
            "theta" => cfg.theta = value.parse().map_err(|_| bad("number"))?,
            "steps" => cfg.steps = value.parse().map_err(|_| bad("integer"))?,
            "seed" => cfg.seed = value.parse().map_err(|_| bad("integer"))?,
            "hazard_mode" => cfg.hazard_mode = value.parse().map_err(CliError::from)?,
            "merger_drops_debt" => {
                cfg.merger_drops_debt = value.parse().map_err(|_| bad("bool"))?
            }
            other => {
                return Err(CliError::usage(format!("config: unknown key '{other}'")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_overrides_defaults_but_not_flags() {
        let mut cfg = SimConfig::default();
        apply_config_file(&mut cfg, "p = 0.02\nsteps=1000\nhazard_mode=per_firm_sweep\n")
            .unwrap();
        assert_eq!(cfg.p, 0.02);
        assert_eq!(cfg.steps, 1000);
        assert_eq!(cfg.hazard_mode, HazardMode::PerFirmSweep);
        assert_eq!(cfg.m, 0.5);
    }

    #[test]
    fn unknown_config_key_is_a_usage_error() {
        let mut cfg = SimConfig::default();
        let err = apply_config_file(&mut cfg, "pee=0.02\n").unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let mut cfg = SimConfig::default();
        apply_config_file(&mut cfg, "# tuning\n\n  q = 1e-6\n").unwrap();
        assert_eq!(cfg.q, 1e-6);
    }
}
