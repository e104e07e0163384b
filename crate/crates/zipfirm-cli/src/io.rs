//! Shared file plumbing: versioned JSON envelopes, TSV writers with a `#`
//! header line, input sniffing, and flag parsing helpers used by more than
//! one subcommand.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use zipfirm::firmdata::ColumnMap;

use crate::errors::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// First line of the binary economy snapshot format, used to sniff inputs.
const SNAPSHOT_MAGIC: &str = "ZIPFIRM-SNAP-1";

/// JSON envelope: a top-level `schema` field next to the flattened payload.
#[derive(Debug, Serialize, Deserialize)]
pub struct Versioned<T> {
    pub schema: u32,
    #[serde(flatten)]
    pub body: T,
}

pub fn write_json<T: Serialize>(path: &Path, body: &T) -> Result<(), CliError> {
    let wrapped = Versioned { schema: SCHEMA_VERSION, body };
    let text = serde_json::to_string_pretty(&wrapped)?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn read_versioned<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let wrapped: Versioned<T> = serde_json::from_str(&text)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    if wrapped.schema != SCHEMA_VERSION {
        return Err(CliError::Data(format!(
            "{}: unsupported schema {} (expected {})",
            path.display(),
            wrapped.schema,
            SCHEMA_VERSION
        )));
    }
    Ok(wrapped.body)
}

/// Writes rows as tab-separated values under a `# `-prefixed header line.
/// Lines end with LF regardless of platform.
pub fn write_tsv<I, R>(path: &Path, header: &str, rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = R>,
    R: AsRef<str>,
{
    let mut out = std::io::BufWriter::new(File::create(path)?);
    writeln!(out, "# {header}")?;
    for row in rows {
        writeln!(out, "{}", row.as_ref())?;
    }
    out.flush()?;
    Ok(())
}

/// What kind of file an `analyze`/`utest` input is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputKind {
    Snapshot,
    Csv,
}

/// Peeks at the first line: the snapshot format announces itself with a
/// `ZIPFIRM-SNAP-1 <kind>` header, anything else is treated as CSV.
pub fn sniff_input(path: &Path) -> Result<InputKind, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut first = String::new();
    BufReader::new(file)
        .read_line(&mut first)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if first.starts_with(SNAPSHOT_MAGIC) {
        Ok(InputKind::Snapshot)
    } else {
        Ok(InputKind::Csv)
    }
}

/// Column-name overrides shared by every command that reads bankruptcy CSVs.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ColFlags {
    /// Column holding the firm identifier
    #[arg(long, value_name = "NAME")]
    pub col_id: Option<String>,
    /// Column holding the firm name
    #[arg(long, value_name = "NAME")]
    pub col_name: Option<String>,
    /// Column holding the event date
    #[arg(long, value_name = "NAME")]
    pub col_date: Option<String>,
    /// Column holding pre-event assets
    #[arg(long, value_name = "NAME")]
    pub col_pre_assets: Option<String>,
    /// Column holding assets at filing
    #[arg(long, value_name = "NAME")]
    pub col_assets: Option<String>,
    /// Column holding debt at filing
    #[arg(long, value_name = "NAME")]
    pub col_debt: Option<String>,
    /// Column holding the court venue
    #[arg(long, value_name = "NAME")]
    pub col_venue: Option<String>,
    /// Column holding the filing year
    #[arg(long, value_name = "NAME")]
    pub col_year: Option<String>,
}

impl ColFlags {
    pub fn to_map(&self) -> ColumnMap {
        let mut map = ColumnMap::default();
        if let Some(v) = &self.col_id {
            map.firm_id = v.clone();
        }
        if self.col_name.is_some() {
            map.name = self.col_name.clone();
        }
        if self.col_date.is_some() {
            map.event_date = self.col_date.clone();
        }
        if self.col_pre_assets.is_some() {
            map.pre_petition_assets = self.col_pre_assets.clone();
        }
        if self.col_assets.is_some() {
            map.petition_assets = self.col_assets.clone();
        }
        if self.col_debt.is_some() {
            map.petition_debt = self.col_debt.clone();
        }
        if self.col_venue.is_some() {
            map.venue = self.col_venue.clone();
        }
        if self.col_year.is_some() {
            map.year = self.col_year.clone();
        }
        map
    }
}

/// Parses "LO:HI" with LO < HI.
pub fn parse_f64_range(text: &str, flag: &str) -> Result<(f64, f64), CliError> {
    let (lo, hi) = split_pair(text, flag)?;
    let lo: f64 = lo
        .parse()
        .map_err(|_| CliError::usage(format!("{flag}: bad number '{lo}'")))?;
    let hi: f64 = hi
        .parse()
        .map_err(|_| CliError::usage(format!("{flag}: bad number '{hi}'")))?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(CliError::usage(format!("{flag}: need LO < HI, got {text}")));
    }
    Ok((lo, hi))
}

/// Parses "LO:HI" with 1 <= LO < HI as ranks.
pub fn parse_rank_range(text: &str, flag: &str) -> Result<(usize, usize), CliError> {
    let (lo, hi) = split_pair(text, flag)?;
    let lo: usize = lo
        .parse()
        .map_err(|_| CliError::usage(format!("{flag}: bad rank '{lo}'")))?;
    let hi: usize = hi
        .parse()
        .map_err(|_| CliError::usage(format!("{flag}: bad rank '{hi}'")))?;
    if lo < 1 || lo >= hi {
        return Err(CliError::usage(format!("{flag}: need 1 <= LO < HI, got {text}")));
    }
    Ok((lo, hi))
}

/// Parses "LO:HI" as a closed year interval.
pub fn parse_year_range(text: &str, flag: &str) -> Result<(i32, i32), CliError> {
    let (lo, hi) = split_pair(text, flag)?;
    let lo: i32 = lo
        .parse()
        .map_err(|_| CliError::usage(format!("{flag}: bad year '{lo}'")))?;
    let hi: i32 = hi
        .parse()
        .map_err(|_| CliError::usage(format!("{flag}: bad year '{hi}'")))?;
    if lo > hi {
        return Err(CliError::usage(format!("{flag}: need LO <= HI, got {text}")));
    }
    Ok((lo, hi))
}

fn split_pair<'a>(text: &'a str, flag: &str) -> Result<(&'a str, &'a str), CliError> {
    text.split_once(':')
        .ok_or_else(|| CliError::usage(format!("{flag}: expected LO:HI, got '{text}'")))
}

/// Formats an f64 with enough digits to round-trip exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
