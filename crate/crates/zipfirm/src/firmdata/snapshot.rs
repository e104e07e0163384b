//! Versioned line-oriented text snapshots for datasets and simulator states.
//!
//! Layout: a header line `ZIPFIRM-SNAP-1 <kind>`, then keyword-tagged lines
//! with tab-separated fields in fixed order, one entity per line. Counts
//! precede each entity block so a truncated file is always detected. Strings
//! escape backslash, tab, CR and LF; absent optional fields are written as
//! `-`. Floats use the shortest decimal form that parses back to the same
//! bits, so a snapshot round-trip is exact, including the RNG position, and
//! a resumed simulation continues bit-for-bit.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::{Dataset, FirmDataError, FirmRecord, Venue};
use crate::simonsim::{
    BankruptcyEvent, EconomyState, EntryCounter, FirmState, MergerEvent, SimConfig,
};

const VERSION_TAG: &str = "ZIPFIRM-SNAP-1";

// Transient loader return value, never stored in bulk; not worth boxing.
#[allow(clippy::large_enum_variant)]
#[derive(Debug)]
pub enum Snapshot {
    Dataset(Dataset),
    Economy(EconomyState),
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
    out
}

fn unescape(s: &str, line: usize) -> Result<String, FirmDataError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => {
                return Err(FirmDataError::Format {
                    line,
                    msg: format!("bad escape sequence \\{}", other.map(String::from).unwrap_or_default()),
                })
            }
        }
    }
    Ok(out)
}

fn opt_money(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".to_string())
}

pub fn write_dataset(ds: &Dataset, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{VERSION_TAG} dataset")?;
    writeln!(w, "provenance\t{}", escape(&ds.provenance))?;
    writeln!(w, "records\t{}", ds.records.len())?;
    for r in &ds.records {
        writeln!(
            w,
            "record\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            escape(&r.firm_id),
            escape(&r.name),
            r.event_date
                .map(|d| d.format("%Y-%m-%d").to_string())
                .unwrap_or_else(|| "-".to_string()),
            opt_money(r.pre_petition_assets),
            opt_money(r.petition_assets),
            opt_money(r.petition_debt),
            r.venue,
            r.year,
        )?;
    }
    Ok(())
}

pub fn write_economy(state: &EconomyState, mut w: impl Write) -> io::Result<()> {
    let c = state.config();
    writeln!(w, "{VERSION_TAG} economy")?;
    writeln!(
        w,
        "config\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        c.p,
        c.m,
        c.q,
        c.hazard_exponent,
        c.p_merge,
        c.theta,
        c.steps,
        c.seed,
        c.hazard_mode,
        u8::from(c.merger_drops_debt),
    )?;
    writeln!(w, "clock\t{}", state.t())?;
    writeln!(w, "rng\t{}", state.rng_word_pos())?;
    let entry = state.entry_counter();
    writeln!(w, "entry\t{}\t{}", entry.acc(), entry.emitted())?;
    writeln!(w, "firms\t{}", state.firms().len())?;
    for f in state.firms() {
        writeln!(
            w,
            "firm\t{}\t{}\t{}\t{}\t{}\t{}",
            f.birth_time,
            f.assets,
            f.debt,
            u8::from(f.alive),
            f.bankruptcies_count,
            f.debt_injections,
        )?;
    }
    writeln!(w, "bankruptcies\t{}", state.bankruptcy_log().len())?;
    for e in state.bankruptcy_log() {
        writeln!(w, "bankruptcy\t{}\t{}\t{}", e.step, e.firm, e.ratio)?;
    }
    writeln!(w, "mergers\t{}", state.merger_log().len())?;
    for e in state.merger_log() {
        writeln!(w, "merger\t{}\t{}\t{}", e.step, e.acquirer, e.target)?;
    }
    Ok(())
}

/// Sequential reader that tracks line numbers for error messages.
struct Lines<R> {
    inner: R,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn new(inner: R) -> Self {
        Lines { inner, line: 0 }
    }

    fn next(&mut self) -> Result<Option<String>, FirmDataError> {
        let mut buf = String::new();
        let n = self.inner.read_line(&mut buf)?;
        if n == 0 {
            return Ok(None);
        }
        self.line += 1;
        while buf.ends_with('\n') || buf.ends_with('\r') {
            buf.pop();
        }
        Ok(Some(buf))
    }

    fn expect(&mut self, keyword: &str, fields: usize) -> Result<Vec<String>, FirmDataError> {
        let line = self.next()?.ok_or(FirmDataError::Format {
            line: self.line + 1,
            msg: format!("unexpected end of file, wanted {keyword:?}"),
        })?;
        let parts: Vec<String> = line.split('\t').map(str::to_string).collect();
        if parts.first().map(String::as_str) != Some(keyword) {
            return Err(FirmDataError::Format {
                line: self.line,
                msg: format!("expected {keyword:?}, found {:?}", parts.first()),
            });
        }
        if parts.len() != fields + 1 {
            return Err(FirmDataError::Format {
                line: self.line,
                msg: format!(
                    "{keyword:?} takes {fields} fields, found {}",
                    parts.len() - 1
                ),
            });
        }
        Ok(parts)
    }

    fn fail<T>(&self, msg: String) -> Result<T, FirmDataError> {
        Err(FirmDataError::Format {
            line: self.line,
            msg,
        })
    }
}

macro_rules! field {
    ($lines:expr, $parts:expr, $idx:expr, $ty:ty) => {
        match $parts[$idx].parse::<$ty>() {
            Ok(v) => v,
            Err(_) => {
                return $lines.fail(format!(
                    "field {} is not a valid {}: {:?}",
                    $idx,
                    stringify!($ty),
                    $parts[$idx]
                ))
            }
        }
    };
}

fn parse_opt_money<R: BufRead>(
    lines: &Lines<R>,
    cell: &str,
) -> Result<Option<f64>, FirmDataError> {
    if cell == "-" {
        return Ok(None);
    }
    match cell.parse::<f64>() {
        Ok(v) => Ok(Some(v)),
        Err(_) => lines.fail(format!("bad amount {cell:?}")),
    }
}

pub fn read_snapshot(r: impl BufRead) -> Result<Snapshot, FirmDataError> {
    let mut lines = Lines::new(r);
    let header = lines.next()?.unwrap_or_default();
    match header.strip_prefix(VERSION_TAG).map(str::trim) {
        Some("dataset") => read_dataset(lines).map(Snapshot::Dataset),
        Some("economy") => read_economy(lines).map(Snapshot::Economy),
        _ => Err(FirmDataError::Version { found: header }),
    }
}

fn read_dataset<R: BufRead>(mut lines: Lines<R>) -> Result<Dataset, FirmDataError> {
    let parts = lines.expect("provenance", 1)?;
    let provenance = unescape(&parts[1], lines.line)?;
    let parts = lines.expect("records", 1)?;
    let count = field!(lines, parts, 1, usize);
    let mut records = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let p = lines.expect("record", 8)?;
        let event_date = if p[3] == "-" {
            None
        } else {
            match NaiveDate::parse_from_str(&p[3], "%Y-%m-%d") {
                Ok(d) => Some(d),
                Err(_) => return lines.fail(format!("bad date {:?}", p[3])),
            }
        };
        records.push(FirmRecord {
            firm_id: unescape(&p[1], lines.line)?,
            name: unescape(&p[2], lines.line)?,
            event_date,
            pre_petition_assets: parse_opt_money(&lines, &p[4])?,
            petition_assets: parse_opt_money(&lines, &p[5])?,
            petition_debt: parse_opt_money(&lines, &p[6])?,
            venue: p[7].parse::<Venue>().expect("venue parsing is infallible"),
            year: field!(lines, p, 8, i32),
        });
    }
    expect_eof(&mut lines)?;
    Ok(Dataset {
        records,
        provenance,
    })
}

fn read_economy<R: BufRead>(mut lines: Lines<R>) -> Result<EconomyState, FirmDataError> {
    let p = lines.expect("config", 10)?;
    let config = SimConfig {
        p: field!(lines, p, 1, f64),
        m: field!(lines, p, 2, f64),
        q: field!(lines, p, 3, f64),
        hazard_exponent: field!(lines, p, 4, f64),
        p_merge: field!(lines, p, 5, f64),
        theta: field!(lines, p, 6, f64),
        steps: field!(lines, p, 7, u64),
        seed: field!(lines, p, 8, u64),
        hazard_mode: match p[9].parse() {
            Ok(mode) => mode,
            Err(_) => return lines.fail(format!("bad hazard mode {:?}", p[9])),
        },
        merger_drops_debt: field!(lines, p, 10, u8) != 0,
    };
    let p = lines.expect("clock", 1)?;
    let t = field!(lines, p, 1, u64);
    let p = lines.expect("rng", 1)?;
    let word_pos = field!(lines, p, 1, u128);
    let p = lines.expect("entry", 2)?;
    let entry = EntryCounter::from_parts(field!(lines, p, 1, f64), field!(lines, p, 2, u64));

    let p = lines.expect("firms", 1)?;
    let count = field!(lines, p, 1, usize);
    let mut firms = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let p = lines.expect("firm", 6)?;
        firms.push(FirmState {
            birth_time: field!(lines, p, 1, u64),
            assets: field!(lines, p, 2, u64),
            debt: field!(lines, p, 3, f64),
            alive: field!(lines, p, 4, u8) != 0,
            bankruptcies_count: field!(lines, p, 5, u32),
            debt_injections: field!(lines, p, 6, u32),
        });
    }

    let p = lines.expect("bankruptcies", 1)?;
    let count = field!(lines, p, 1, usize);
    let mut bankruptcy_log = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let p = lines.expect("bankruptcy", 3)?;
        bankruptcy_log.push(BankruptcyEvent {
            step: field!(lines, p, 1, u64),
            firm: field!(lines, p, 2, usize),
            ratio: field!(lines, p, 3, f64),
        });
    }

    let p = lines.expect("mergers", 1)?;
    let count = field!(lines, p, 1, usize);
    let mut merger_log = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let p = lines.expect("merger", 3)?;
        merger_log.push(MergerEvent {
            step: field!(lines, p, 1, u64),
            acquirer: field!(lines, p, 2, usize),
            target: field!(lines, p, 3, usize),
        });
    }
    expect_eof(&mut lines)?;

    Ok(EconomyState::restore(
        config,
        t,
        firms,
        entry,
        word_pos,
        bankruptcy_log,
        merger_log,
    )?)
}

fn expect_eof<R: BufRead>(lines: &mut Lines<R>) -> Result<(), FirmDataError> {
    match lines.next()? {
        None => Ok(()),
        Some(extra) => Err(FirmDataError::Format {
            line: lines.line,
            msg: format!("trailing content: {extra:?}"),
        }),
    }
}

pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>) -> Result<(), FirmDataError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_dataset(ds, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn save_economy(state: &EconomyState, path: impl AsRef<Path>) -> Result<(), FirmDataError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_economy(state, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Snapshot, FirmDataError> {
    read_snapshot(BufReader::new(File::open(path)?))
}
