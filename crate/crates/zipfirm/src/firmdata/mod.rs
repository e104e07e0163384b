//! Empirical firm records: CSV ingestion with per-row validation, monetary
//! deflation, and text snapshots (see [`snapshot`]).
//!
//! Monetary fields are optional everywhere: a missing value is represented as
//! absent, never as zero, so downstream ratio computations can tell "not
//! reported" from "reported zero" (the latter is rejected outright, since all
//! reported amounts must be positive).

mod snapshot;

pub use snapshot::{load_snapshot, save_dataset, save_economy, Snapshot};

use chrono::{Datelike, NaiveDate};
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Read;
use std::str::FromStr;
use thiserror::Error;

use crate::simonsim::SimError;

#[derive(Debug, Error)]
pub enum FirmDataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("no deflator factor for year {0}")]
    MissingYear(i32),
    #[error("bad deflator table: {0}")]
    BadTable(String),
    #[error("unrecognized snapshot header {found:?}")]
    Version { found: String },
    #[error("snapshot line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error(transparent)]
    State(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Venue {
    Bankrupt,
    Nasdaq,
    Nyse,
    #[default]
    Other,
}

impl Venue {
    pub fn as_str(&self) -> &'static str {
        match self {
            Venue::Bankrupt => "bankrupt",
            Venue::Nasdaq => "nasdaq",
            Venue::Nyse => "nyse",
            Venue::Other => "other",
        }
    }
}

impl fmt::Display for Venue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Venue {
    type Err = std::convert::Infallible;

    /// Case-insensitive; anything unrecognized lands in Other.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "bankrupt" => Venue::Bankrupt,
            "nasdaq" => Venue::Nasdaq,
            "nyse" => Venue::Nyse,
            _ => Venue::Other,
        })
    }
}

/// One firm observation. Amounts are USD.
#[derive(Debug, Clone, PartialEq)]
pub struct FirmRecord {
    pub firm_id: String,
    pub name: String,
    pub event_date: Option<NaiveDate>,
    /// Book assets before the bankruptcy petition (A_a).
    pub pre_petition_assets: Option<f64>,
    /// Assets at petition (A_b); the denominator of the leverage ratio.
    pub petition_assets: Option<f64>,
    /// Debt at petition (D_b); the numerator of the leverage ratio.
    pub petition_debt: Option<f64>,
    pub venue: Venue,
    pub year: i32,
}

impl FirmRecord {
    /// R = D_b / A_b when both are present.
    pub fn leverage_ratio(&self) -> Option<f64> {
        match (self.petition_debt, self.petition_assets) {
            (Some(d), Some(a)) => Some(d / a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub records: Vec<FirmRecord>,
    pub provenance: String,
}

/// Maps CSV header names onto record fields. `firm_id` must resolve; every
/// `Some` column must exist in the header (a misspelled mapping is a schema
/// error, not silently-absent data). `None` means the field is not ingested.
/// The year of a record comes from the year column when mapped, otherwise
/// from the event date; at least one of the two must be mapped.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMap {
    pub firm_id: String,
    pub name: Option<String>,
    pub event_date: Option<String>,
    pub pre_petition_assets: Option<String>,
    pub petition_assets: Option<String>,
    pub petition_debt: Option<String>,
    pub venue: Option<String>,
    pub year: Option<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            firm_id: "firm_id".to_string(),
            name: None,
            event_date: None,
            pre_petition_assets: None,
            petition_assets: Some("petition_assets".to_string()),
            petition_debt: Some("petition_debt".to_string()),
            venue: None,
            year: Some("year".to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowReject {
    /// 1-based file line the record starts on; the header is line 1.
    pub row: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome {
    pub dataset: Dataset,
    pub rejects: Vec<RowReject>,
    /// Data rows in the input; always rejects.len() + records.len().
    pub rows_seen: usize,
}

struct ResolvedColumns {
    firm_id: usize,
    name: Option<usize>,
    event_date: Option<usize>,
    pre_petition_assets: Option<usize>,
    petition_assets: Option<usize>,
    petition_debt: Option<usize>,
    venue: Option<usize>,
    year: Option<usize>,
}

fn resolve(headers: &csv::StringRecord, map: &ColumnMap) -> Result<ResolvedColumns, FirmDataError> {
    let find = |name: &str| headers.iter().position(|h| h == name);
    let require = |name: &str| {
        find(name).ok_or_else(|| FirmDataError::Schema(format!("mapped column {name:?} not in header")))
    };
    let opt = |name: &Option<String>| -> Result<Option<usize>, FirmDataError> {
        name.as_deref().map(require).transpose()
    };
    let cols = ResolvedColumns {
        firm_id: require(&map.firm_id)?,
        name: opt(&map.name)?,
        event_date: opt(&map.event_date)?,
        pre_petition_assets: opt(&map.pre_petition_assets)?,
        petition_assets: opt(&map.petition_assets)?,
        petition_debt: opt(&map.petition_debt)?,
        venue: opt(&map.venue)?,
        year: opt(&map.year)?,
    };
    if cols.year.is_none() && cols.event_date.is_none() {
        return Err(FirmDataError::Schema(
            "no year source: map a year column or an event date column".to_string(),
        ));
    }
    Ok(cols)
}

/// Blank cells are absent; present cells must be positive finite numbers.
fn money_cell(record: &csv::StringRecord, idx: Option<usize>, label: &str) -> Result<Option<f64>, String> {
    let Some(idx) = idx else { return Ok(None) };
    let cell = record.get(idx).unwrap_or("").trim();
    if cell.is_empty() {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(Some(v)),
        Ok(v) => Err(format!("{label} must be positive, got {v}")),
        Err(_) => Err(format!("{label} is not a number: {cell:?}")),
    }
}

/// Parses CSV text into a Dataset. Invalid rows are collected as rejects with
/// their file line and reason; they never abort the parse. Structural
/// problems (unmapped columns, empty input) do.
pub fn parse_csv(
    input: impl Read,
    map: &ColumnMap,
    provenance: &str,
) -> Result<ParseOutcome, FirmDataError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|_| FirmDataError::EmptyInput("no header row".to_string()))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(FirmDataError::EmptyInput("no header row".to_string()));
    }
    let cols = resolve(&headers, map)?;

    let mut records = Vec::new();
    let mut rejects = Vec::new();
    let mut rows_seen = 0usize;
    let mut seen_keys: HashSet<(String, i32)> = HashSet::new();

    for row in reader.records() {
        let row = row?;
        rows_seen += 1;
        let line = row.position().map(|p| p.line()).unwrap_or(rows_seen as u64 + 1);
        match build_record(&row, &cols) {
            Ok(record) => {
                if !seen_keys.insert((record.firm_id.clone(), record.year)) {
                    rejects.push(RowReject {
                        row: line,
                        reason: format!(
                            "duplicate firm {:?} for year {}",
                            record.firm_id, record.year
                        ),
                    });
                } else {
                    records.push(record);
                }
            }
            Err(reason) => rejects.push(RowReject { row: line, reason }),
        }
    }

    Ok(ParseOutcome {
        dataset: Dataset {
            records,
            provenance: provenance.to_string(),
        },
        rejects,
        rows_seen,
    })
}

fn build_record(row: &csv::StringRecord, cols: &ResolvedColumns) -> Result<FirmRecord, String> {
    let firm_id = row.get(cols.firm_id).unwrap_or("").trim().to_string();
    if firm_id.is_empty() {
        return Err("empty firm id".to_string());
    }
    let name = cols
        .name
        .and_then(|i| row.get(i))
        .unwrap_or("")
        .to_string();

    let event_date = match cols.event_date.and_then(|i| row.get(i)).map(str::trim) {
        None | Some("") => None,
        Some(cell) => Some(
            NaiveDate::parse_from_str(cell, "%Y-%m-%d")
                .map_err(|_| format!("bad date {cell:?} (expected YYYY-MM-DD)"))?,
        ),
    };

    let year = match cols.year.and_then(|i| row.get(i)).map(str::trim) {
        Some(cell) if !cell.is_empty() => cell
            .parse::<i32>()
            .map_err(|_| format!("bad year {cell:?}"))?,
        _ => match event_date {
            Some(d) => d.year(),
            None => return Err("no year and no event date".to_string()),
        },
    };

    let venue = cols
        .venue
        .and_then(|i| row.get(i))
        .map(|s| s.parse::<Venue>().expect("venue parsing is infallible"))
        .unwrap_or_default();

    Ok(FirmRecord {
        firm_id,
        name,
        event_date,
        pre_petition_assets: money_cell(row, cols.pre_petition_assets, "pre-petition assets")?,
        petition_assets: money_cell(row, cols.petition_assets, "petition assets")?,
        petition_debt: money_cell(row, cols.petition_debt, "petition debt")?,
        venue,
        year,
    })
}

/// Year → multiplier table for converting amounts to base-year dollars.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflatorTable {
    base_year: i32,
    factors: BTreeMap<i32, f64>,
}

impl DeflatorTable {
    /// The base year is the smallest year whose factor is exactly 1.0; a
    /// table without one has no anchor and is rejected.
    pub fn new(factors: BTreeMap<i32, f64>) -> Result<Self, FirmDataError> {
        if let Some((&year, &factor)) = factors.iter().find(|&(_, &f)| !(f > 0.0 && f.is_finite()))
        {
            return Err(FirmDataError::BadTable(format!(
                "factor for {year} must be positive, got {factor}"
            )));
        }
        let base_year = factors
            .iter()
            .find(|&(_, &f)| f == 1.0)
            .map(|(&y, _)| y)
            .ok_or_else(|| {
                FirmDataError::BadTable("no year with factor 1.0 to act as base".to_string())
            })?;
        Ok(DeflatorTable { base_year, factors })
    }

    /// Reads a two-column `year,factor` CSV (header required).
    pub fn from_csv(input: impl Read) -> Result<Self, FirmDataError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut factors = BTreeMap::new();
        for row in reader.records() {
            let row = row?;
            let year: i32 = row
                .get(0)
                .unwrap_or("")
                .parse()
                .map_err(|_| FirmDataError::BadTable(format!("bad year {:?}", row.get(0))))?;
            let factor: f64 = row
                .get(1)
                .unwrap_or("")
                .parse()
                .map_err(|_| FirmDataError::BadTable(format!("bad factor {:?}", row.get(1))))?;
            match factors.entry(year) {
                Entry::Vacant(e) => {
                    e.insert(factor);
                }
                Entry::Occupied(_) => {
                    return Err(FirmDataError::BadTable(format!("year {year} listed twice")));
                }
            }
        }
        Self::new(factors)
    }

    pub fn base_year(&self) -> i32 {
        self.base_year
    }

    pub fn factor(&self, year: i32) -> Option<f64> {
        self.factors.get(&year).copied()
    }
}

/// Multiplies every present monetary field by the record-year factor.
/// Record order is preserved; a year missing from the table fails the whole
/// call rather than silently passing nominal values through.
pub fn deflate(ds: &Dataset, table: &DeflatorTable) -> Result<Dataset, FirmDataError> {
    let mut records = Vec::with_capacity(ds.records.len());
    for record in &ds.records {
        let factor = table
            .factor(record.year)
            .ok_or(FirmDataError::MissingYear(record.year))?;
        let scale = |v: Option<f64>| v.map(|x| x * factor);
        records.push(FirmRecord {
            pre_petition_assets: scale(record.pre_petition_assets),
            petition_assets: scale(record.petition_assets),
            petition_debt: scale(record.petition_debt),
            ..record.clone()
        });
    }
    Ok(Dataset {
        records,
        provenance: ds.provenance.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full_map() -> ColumnMap {
        ColumnMap {
            firm_id: "firm_id".into(),
            name: Some("name".into()),
            event_date: Some("event_date".into()),
            pre_petition_assets: Some("pre_petition_assets".into()),
            petition_assets: Some("petition_assets".into()),
            petition_debt: Some("petition_debt".into()),
            venue: Some("venue".into()),
            year: Some("year".into()),
        }
    }

    const FULL_HEADER: &str =
        "firm_id,name,event_date,pre_petition_assets,petition_assets,petition_debt,venue,year";

    #[test]
    fn parses_a_valid_row() {
        let csv = format!(
            "{FULL_HEADER}\nL1,Lehman,2008-09-15,691000000000,639000000000,613000000000,bankrupt,2008\n"
        );
        let out = parse_csv(csv.as_bytes(), &full_map(), "test").unwrap();
        assert_eq!(out.rows_seen, 1);
        assert!(out.rejects.is_empty());
        let r = &out.dataset.records[0];
        assert_eq!(r.firm_id, "L1");
        assert_eq!(r.petition_assets, Some(639000000000.0));
        assert_eq!(r.petition_debt, Some(613000000000.0));
        assert_eq!(r.venue, Venue::Bankrupt);
        assert_eq!(r.leverage_ratio().unwrap(), 613.0 / 639.0);
        assert_eq!(r.event_date, NaiveDate::from_ymd_opt(2008, 9, 15));
    }

    #[test]
    fn negative_money_rejects_the_row() {
        let csv = format!("{FULL_HEADER}\nF1,X,,,-5,10,other,2002\n");
        let out = parse_csv(csv.as_bytes(), &full_map(), "test").unwrap();
        assert!(out.dataset.records.is_empty());
        assert_eq!(out.rejects.len(), 1);
        assert_eq!(out.rejects[0].row, 2);
        assert!(out.rejects[0].reason.contains("positive"));
        assert_eq!(out.rows_seen, 1);
    }

    #[test]
    fn blank_money_is_absent_not_zero() {
        let csv = format!(
            "{FULL_HEADER}\nF1,A,,,100,140,other,2002\nF2,B,,,50,60,other,2002\nF3,C,,,25,,other,2002\n"
        );
        let out = parse_csv(csv.as_bytes(), &full_map(), "test").unwrap();
        assert_eq!(out.dataset.records.len(), 3);
        let third = &out.dataset.records[2];
        assert_eq!(third.petition_debt, None);
        assert_eq!(third.leverage_ratio(), None);
        assert_eq!(out.dataset.records[0].leverage_ratio(), Some(1.4));
    }

    #[test]
    fn missing_mapped_column_is_schema_error() {
        let csv = "firm_id,year\nF1,2002\n";
        let err = parse_csv(csv.as_bytes(), &full_map(), "test").unwrap_err();
        assert!(matches!(err, FirmDataError::Schema(_)), "got {err:?}");
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            parse_csv(&b""[..], &full_map(), "test"),
            Err(FirmDataError::EmptyInput(_))
        ));
    }

    #[test]
    fn year_falls_back_to_event_date() {
        let map = ColumnMap {
            year: None,
            ..full_map()
        };
        let csv = format!("{FULL_HEADER}\nF1,A,2007-03-01,,100,140,nyse,2002\n");
        let out = parse_csv(csv.as_bytes(), &map, "test").unwrap();
        assert_eq!(out.dataset.records[0].year, 2007);

        let no_year_source = ColumnMap {
            year: None,
            event_date: None,
            ..full_map()
        };
        assert!(parse_csv(csv.as_bytes(), &no_year_source, "t").is_err());
    }

    #[test]
    fn duplicate_firm_year_pairs_reject() {
        let csv = format!(
            "{FULL_HEADER}\nF1,A,,,100,140,other,2002\nF1,A,,,90,120,other,2002\nF1,A,,,90,120,other,2003\n"
        );
        let out = parse_csv(csv.as_bytes(), &full_map(), "test").unwrap();
        assert_eq!(out.dataset.records.len(), 2);
        assert_eq!(out.rejects.len(), 1);
        assert_eq!(out.rejects[0].row, 3);
        assert_eq!(out.rejects.len() + out.dataset.records.len(), out.rows_seen);
    }

    #[test]
    fn bad_rows_never_abort_good_ones() {
        let csv = format!(
            "{FULL_HEADER}\nF1,A,,,100,140,other,2002\n,B,,,1,1,other,2002\nF3,C,bad-date,,1,1,other,2002\nF4,D,,,abc,1,other,2002\n"
        );
        let out = parse_csv(csv.as_bytes(), &full_map(), "test").unwrap();
        assert_eq!(out.dataset.records.len(), 1);
        assert_eq!(out.rejects.len(), 3);
        assert_eq!(out.rows_seen, 4);
    }

    #[test]
    fn deflation_scales_by_record_year() {
        let table = DeflatorTable::new(BTreeMap::from([(2002, 1.0), (2007, 0.8)])).unwrap();
        assert_eq!(table.base_year(), 2002);
        let ds = Dataset {
            records: vec![
                FirmRecord {
                    firm_id: "a".into(),
                    name: String::new(),
                    event_date: None,
                    pre_petition_assets: None,
                    petition_assets: Some(100.0),
                    petition_debt: Some(50.0),
                    venue: Venue::Other,
                    year: 2002,
                },
                FirmRecord {
                    firm_id: "b".into(),
                    name: String::new(),
                    event_date: None,
                    pre_petition_assets: Some(10.0),
                    petition_assets: Some(100.0),
                    petition_debt: None,
                    venue: Venue::Other,
                    year: 2007,
                },
            ],
            provenance: "p".into(),
        };
        let out = deflate(&ds, &table).unwrap();
        assert_eq!(out.records[0].petition_assets, Some(100.0)); // base year
        assert_eq!(out.records[1].petition_assets, Some(80.0));
        assert_eq!(out.records[1].pre_petition_assets, Some(8.0));
        assert_eq!(out.records[1].petition_debt, None);

        let missing = Dataset {
            records: vec![FirmRecord {
                year: 1999,
                ..ds.records[0].clone()
            }],
            provenance: String::new(),
        };
        assert!(matches!(
            deflate(&missing, &table),
            Err(FirmDataError::MissingYear(1999))
        ));
    }

    #[test]
    fn all_ones_table_is_identity() {
        let table = DeflatorTable::new(BTreeMap::from([(2002, 1.0), (2003, 1.0)])).unwrap();
        let ds = Dataset {
            records: vec![FirmRecord {
                firm_id: "a".into(),
                name: String::new(),
                event_date: None,
                pre_petition_assets: Some(3.0),
                petition_assets: Some(7.0),
                petition_debt: Some(11.0),
                venue: Venue::Nasdaq,
                year: 2003,
            }],
            provenance: "x".into(),
        };
        assert_eq!(deflate(&ds, &table).unwrap(), ds);
    }

    #[test]
    fn deflator_table_validation() {
        assert!(matches!(
            DeflatorTable::new(BTreeMap::from([(2002, 0.9)])),
            Err(FirmDataError::BadTable(_))
        ));
        assert!(DeflatorTable::new(BTreeMap::from([(2002, -1.0), (2003, 1.0)])).is_err());
        // smallest year with factor 1.0 wins
        let t =
            DeflatorTable::new(BTreeMap::from([(2001, 1.0), (2005, 1.0), (2007, 0.8)])).unwrap();
        assert_eq!(t.base_year(), 2001);
    }

    #[test]
    fn deflator_csv_round_trip() {
        let table = DeflatorTable::from_csv(&b"year,factor\n2002,1.0\n2007,0.8\n"[..]).unwrap();
        assert_eq!(table.factor(2007), Some(0.8));
        assert!(DeflatorTable::from_csv(&b"year,factor\n2002,1.0\n2002,0.9\n"[..]).is_err());
    }
}
