//! Finalized reports: rounding, unit selection, rendering and warnings.
//!
//! Every timing value in a [`ReportRow`] is held as whole nanoseconds, so
//! the microsecond figures shown to users always carry exactly three
//! decimals and the CSV/JSON forms parse back without loss.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aggregation::StatEntry;
use crate::timer::Timer;

const NANOS_PER_MICRO: u64 = 1_000;
const NANOS_PER_MILLI: u64 = 1_000_000;

pub const CSV_HEADER: [&str; 6] = ["tag", "mean_us", "sd_us", "min_us", "max_us", "count"];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unexpected csv header {0:?}")]
    Header(Vec<String>),
    #[error("invalid microsecond value {0:?}")]
    Value(String),
    #[error("invalid count {0:?}")]
    Count(String),
    #[error("unsupported unit {0:?}")]
    Unit(String),
    #[error("unknown format {0:?}, expected table, csv or json")]
    Format(String),
}

/// Rounds to the nearest whole nanosecond, ties to even.
pub fn round_ns(value: f64) -> u64 {
    value.round_ties_even() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Unit {
    Nanoseconds,
    #[default]
    Microseconds,
    Milliseconds,
}

impl Unit {
    /// Column header used in the table format.
    pub fn header(self) -> &'static str {
        match self {
            Unit::Nanoseconds => "Nanoseconds",
            Unit::Microseconds => "Microseconds",
            Unit::Milliseconds => "Milliseconds",
        }
    }

    /// Formats whole nanoseconds in this unit without losing precision.
    pub fn format(self, nanos: u64) -> String {
        match self {
            Unit::Nanoseconds => nanos.to_string(),
            Unit::Microseconds => {
                format!("{}.{:03}", nanos / NANOS_PER_MICRO, nanos % NANOS_PER_MICRO)
            }
            Unit::Milliseconds => {
                format!("{}.{:06}", nanos / NANOS_PER_MILLI, nanos % NANOS_PER_MILLI)
            }
        }
    }
}

impl FromStr for Unit {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ns" | "nanoseconds" => Ok(Unit::Nanoseconds),
            "us" | "microseconds" => Ok(Unit::Microseconds),
            "ms" | "milliseconds" => Ok(Unit::Milliseconds),
            other => Err(ReportError::Unit(other.to_owned())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(ReportError::Format(other.to_owned())),
        }
    }
}

/// Summary of one tag, rounded to whole nanoseconds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportRow {
    pub tag: String,
    pub mean_ns: u64,
    pub sd_ns: u64,
    pub min_ns: u64,
    pub max_ns: u64,
    pub count: u64,
}

impl ReportRow {
    pub fn from_stat(tag: impl Into<String>, entry: &StatEntry) -> Self {
        ReportRow {
            tag: tag.into(),
            mean_ns: round_ns(entry.mean),
            sd_ns: round_ns(entry.sd()),
            min_ns: round_ns(entry.min),
            max_ns: round_ns(entry.max),
            count: entry.count,
        }
    }

    pub fn mean_us(&self) -> f64 {
        to_micros(self.mean_ns)
    }

    pub fn sd_us(&self) -> f64 {
        to_micros(self.sd_ns)
    }

    pub fn min_us(&self) -> f64 {
        to_micros(self.min_ns)
    }

    pub fn max_us(&self) -> f64 {
        to_micros(self.max_ns)
    }
}

fn to_micros(nanos: u64) -> f64 {
    nanos as f64 / NANOS_PER_MICRO as f64
}

/// Picks the display unit: nanoseconds when every max is below 1 µs,
/// milliseconds when every min is at least 1 ms, microseconds otherwise.
pub fn choose_unit(rows: &[ReportRow]) -> Unit {
    if rows.is_empty() {
        Unit::Microseconds
    } else if rows.iter().all(|r| r.max_ns < NANOS_PER_MICRO) {
        Unit::Nanoseconds
    } else if rows.iter().all(|r| r.min_ns >= NANOS_PER_MILLI) {
        Unit::Milliseconds
    } else {
        Unit::Microseconds
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub name: String,
    /// Sorted by tag.
    pub rows: Vec<ReportRow>,
    pub display_unit: Unit,
}

#[derive(Serialize, Deserialize)]
struct JsonRow {
    tag: String,
    mean: f64,
    sd: f64,
    min: f64,
    max: f64,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct JsonReport {
    name: String,
    unit: String,
    rows: Vec<JsonRow>,
}

impl Report {
    /// Sorts `rows` by tag and picks the display unit.
    pub fn new(name: impl Into<String>, mut rows: Vec<ReportRow>) -> Self {
        rows.sort_by(|a, b| a.tag.cmp(&b.tag));
        let display_unit = choose_unit(&rows);
        Report {
            name: name.into(),
            rows,
            display_unit,
        }
    }

    pub fn from_stats(name: impl Into<String>, stats: &BTreeMap<String, StatEntry>) -> Self {
        let rows = stats
            .iter()
            .map(|(tag, entry)| ReportRow::from_stat(tag.as_str(), entry))
            .collect();
        Report::new(name, rows)
    }

    pub fn with_unit(mut self, unit: Unit) -> Self {
        self.display_unit = unit;
        self
    }

    pub fn row(&self, tag: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.tag == tag)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.to_table(),
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Column-aligned table in the display unit, one line per row.
    pub fn to_table(&self) -> String {
        let unit = self.display_unit;
        let header: Vec<String> = ["", unit.header(), "SD", "Min", "Max", "Count"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let mut lines = vec![header];
        for row in &self.rows {
            lines.push(vec![
                row.tag.clone(),
                unit.format(row.mean_ns),
                unit.format(row.sd_ns),
                unit.format(row.min_ns),
                unit.format(row.max_ns),
                row.count.to_string(),
            ]);
        }

        let mut widths = [0usize; 6];
        for line in &lines {
            for (width, cell) in widths.iter_mut().zip(line) {
                *width = (*width).max(cell.chars().count());
            }
        }

        let mut out = String::new();
        for line in &lines {
            let mut text = format!("{:<width$}", line[0], width = widths[0]);
            for (cell, width) in line.iter().zip(widths).skip(1) {
                text.push_str(&format!(" {cell:>width$}"));
            }
            out.push_str(text.trim_end());
            out.push('\n');
        }
        out
    }

    /// CSV with microsecond values, independent of the display unit.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        let us = Unit::Microseconds;
        writer
            .write_record(CSV_HEADER)
            .expect("writing to a Vec cannot fail");
        for row in &self.rows {
            writer
                .write_record([
                    row.tag.clone(),
                    us.format(row.mean_ns),
                    us.format(row.sd_ns),
                    us.format(row.min_ns),
                    us.format(row.max_ns),
                    row.count.to_string(),
                ])
                .expect("writing to a Vec cannot fail");
        }
        let bytes = writer.into_inner().expect("flushing a Vec cannot fail");
        String::from_utf8(bytes).expect("csv output is built from UTF-8 strings")
    }

    /// JSON with microsecond values, independent of the display unit.
    pub fn to_json(&self) -> String {
        let report = JsonReport {
            name: self.name.clone(),
            unit: "microseconds".to_owned(),
            rows: self
                .rows
                .iter()
                .map(|row| JsonRow {
                    tag: row.tag.clone(),
                    mean: row.mean_us(),
                    sd: row.sd_us(),
                    min: row.min_us(),
                    max: row.max_us(),
                    count: row.count,
                })
                .collect(),
        };
        serde_json::to_string(&report).expect("report serialization cannot fail")
    }

    /// Parses rows rendered by [`Report::to_csv`].
    pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>, ReportError> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let header = reader.headers()?;
        if header.iter().ne(CSV_HEADER) {
            return Err(ReportError::Header(
                header.iter().map(str::to_owned).collect(),
            ));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let count = &record[5];
            rows.push(ReportRow {
                tag: record[0].to_owned(),
                mean_ns: parse_micros(&record[1])?,
                sd_ns: parse_micros(&record[2])?,
                min_ns: parse_micros(&record[3])?,
                max_ns: parse_micros(&record[4])?,
                count: count
                    .parse()
                    .map_err(|_| ReportError::Count(count.to_owned()))?,
            });
        }
        Ok(rows)
    }

    /// Parses a report rendered by [`Report::to_json`].
    pub fn from_json(text: &str) -> Result<Report, ReportError> {
        let parsed: JsonReport = serde_json::from_str(text)?;
        if parsed.unit != "microseconds" {
            return Err(ReportError::Unit(parsed.unit));
        }
        let rows = parsed
            .rows
            .into_iter()
            .map(|row| {
                Ok(ReportRow {
                    tag: row.tag,
                    mean_ns: micros_to_nanos(row.mean)?,
                    sd_ns: micros_to_nanos(row.sd)?,
                    min_ns: micros_to_nanos(row.min)?,
                    max_ns: micros_to_nanos(row.max)?,
                    count: row.count,
                })
            })
            .collect::<Result<Vec<_>, ReportError>>()?;
        Ok(Report::new(parsed.name, rows))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table())
    }
}

/// Exact decimal parse of a microsecond value with at most 3 decimals.
fn parse_micros(text: &str) -> Result<u64, ReportError> {
    let invalid = || ReportError::Value(text.to_owned());
    let (whole, frac) = text.split_once('.').unwrap_or((text, ""));
    if whole.is_empty()
        || frac.len() > 3
        || !whole.bytes().all(|b| b.is_ascii_digit())
        || !frac.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(invalid());
    }
    let whole: u64 = whole.parse().map_err(|_| invalid())?;
    let frac: u64 = if frac.is_empty() {
        0
    } else {
        format!("{frac:0<3}").parse().map_err(|_| invalid())?
    };
    whole
        .checked_mul(NANOS_PER_MICRO)
        .and_then(|n| n.checked_add(frac))
        .ok_or_else(invalid)
}

fn micros_to_nanos(micros: f64) -> Result<u64, ReportError> {
    let nanos = micros * NANOS_PER_MICRO as f64;
    let rounded = nanos.round();
    if !nanos.is_finite() || nanos < 0.0 || (nanos - rounded).abs() > 1e-6 {
        return Err(ReportError::Value(micros.to_string()));
    }
    Ok(rounded as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WarningKind {
    MissingTic,
    NeedlessToc,
    UnmatchedTic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Warning {
    pub kind: WarningKind,
    pub tag: String,
    pub message: String,
}

impl Warning {
    pub fn new(kind: WarningKind, tag: impl Into<String>) -> Self {
        let tag = tag.into();
        let message = match kind {
            WarningKind::MissingTic => {
                format!("timer \"{tag}\": toc() was called without a matching tic()")
            }
            WarningKind::NeedlessToc => {
                format!("timer \"{tag}\": toc() was called more than once after a single tic()")
            }
            WarningKind::UnmatchedTic => {
                format!("timer \"{tag}\": tic() was never matched by a toc()")
            }
        };
        Warning { kind, tag, message }
    }
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl Timer {
    /// One warning per kind and tag, ordered by kind then tag.
    ///
    /// Needless tocs only show up once the spans have been aggregated.
    pub fn collect_warnings(&self) -> Vec<Warning> {
        let diagnostics = self.diagnostics();
        let missing = diagnostics
            .missing_tics
            .into_iter()
            .map(|tag| Warning::new(WarningKind::MissingTic, tag));
        let needless = diagnostics
            .needless_tocs
            .into_iter()
            .map(|tag| Warning::new(WarningKind::NeedlessToc, tag));
        let unmatched = self
            .unmatched_tics()
            .into_iter()
            .map(|tag| Warning::new(WarningKind::UnmatchedTic, tag));
        missing.chain(needless).chain(unmatched).collect()
    }

    /// Aggregates pending spans and builds the report.
    ///
    /// With autoreturn enabled, the first finalize also writes the report to
    /// the configured sink. With verbose enabled, warnings not yet emitted
    /// are written to the warning sink.
    pub fn finalize(&mut self) -> Report {
        self.aggregate();
        let report = Report::from_stats(self.config.name.clone(), &self.stats);
        if self.config.autoreturn && !self.emitted.report {
            self.emitted.report = true;
            let text = match self.config.format {
                Format::Table => format!("{}\n{}", report.name, report.to_table()),
                Format::Csv => report.to_csv(),
                Format::Json => format!("{}\n", report.to_json()),
            };
            if let Err(err) = self.config.sink.write_str(&text) {
                eprintln!(
                    "failed to write timer report to {}: {err}",
                    self.config.sink
                );
            }
        }
        if self.config.verbose {
            self.emit_warnings();
        }
        report
    }

    pub(crate) fn emit_warnings(&mut self) {
        let mut text = String::new();
        for warning in self.collect_warnings() {
            if self
                .emitted
                .warnings
                .insert((warning.kind, warning.tag.clone()))
            {
                text.push_str(&format!("warning: {warning}\n"));
            }
        }
        if !text.is_empty() {
            if let Err(err) = self.config.warnings.write_str(&text) {
                eprintln!("failed to write timer warnings: {err}");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::MockClock;
    use crate::timer::{SharedBuffer, Sink, TimerConfig};

    fn row(tag: &str, mean: u64, sd: u64, min: u64, max: u64, count: u64) -> ReportRow {
        ReportRow {
            tag: tag.to_owned(),
            mean_ns: mean,
            sd_ns: sd,
            min_ns: min,
            max_ns: max,
            count,
        }
    }

    fn captured(config: TimerConfig) -> (Timer, MockClock, SharedBuffer, SharedBuffer) {
        let out = SharedBuffer::new();
        let warn = SharedBuffer::new();
        let mock = MockClock::default();
        let config = config
            .sink(Sink::Buffer(out.clone()))
            .warnings(Sink::Buffer(warn.clone()));
        (Timer::with_clock(config, mock.clone()), mock, out, warn)
    }

    #[test]
    fn ties_round_to_even() {
        assert_eq!(round_ns(12250.5), 12250);
        assert_eq!(round_ns(12251.5), 12252);
        assert_eq!(round_ns(0.5), 0);
        assert_eq!(round_ns(1.5), 2);
        assert_eq!(round_ns(2.4999), 2);
    }

    #[test]
    fn single_measurement_row() {
        let entry = crate::aggregation::welford_update(None, 3_956_690.0);
        let r = ReportRow::from_stat("gibbs_cpp", &entry);
        assert_eq!(r, row("gibbs_cpp", 3_956_690, 0, 3_956_690, 3_956_690, 1));
        let us = Unit::Microseconds;
        assert_eq!(
            [r.mean_ns, r.sd_ns, r.min_ns, r.max_ns].map(|n| us.format(n)),
            ["3956.690", "0.000", "3956.690", "3956.690"]
        );
    }

    #[test]
    fn mean_tie_reported_even() {
        let entry = StatEntry {
            mean: 12250.5,
            sst: 0.5,
            min: 12250.0,
            max: 12251.0,
            count: 2,
        };
        let r = ReportRow::from_stat("t", &entry);
        assert_eq!(Unit::Microseconds.format(r.mean_ns), "12.250");
    }

    #[test]
    fn bessel_corrected_sd() {
        let entry = StatEntry {
            mean: 20.0,
            sst: 200.0,
            min: 10.0,
            max: 30.0,
            count: 3,
        };
        let r = ReportRow::from_stat("t", &entry);
        assert_eq!(r.sd_ns, 10);
        assert_eq!(Unit::Microseconds.format(r.sd_ns), "0.010");
    }

    #[test]
    fn unit_choice() {
        assert_eq!(
            choose_unit(&[row("a", 75, 55, 58, 75, 10), row("b", 500, 0, 500, 800, 1)]),
            Unit::Nanoseconds
        );
        assert_eq!(
            choose_unit(&[row("tictoc", 12_251, 66_225, 67, 870_598, 1000)]),
            Unit::Microseconds
        );
        assert_eq!(choose_unit(&[]), Unit::Microseconds);
        assert_eq!(
            choose_unit(&[row("a", 2_000_000, 0, 1_000_000, 3_000_000, 2)]),
            Unit::Milliseconds
        );
        assert_eq!(
            choose_unit(&[row("a", 999, 0, 999, 1000, 2)]),
            Unit::Microseconds
        );
    }

    #[test]
    fn unit_formatting() {
        assert_eq!(Unit::Nanoseconds.format(1699), "1699");
        assert_eq!(Unit::Microseconds.format(67), "0.067");
        assert_eq!(Unit::Microseconds.format(870_598), "870.598");
        assert_eq!(Unit::Milliseconds.format(3_956_690), "3.956690");
        assert_eq!("ns".parse::<Unit>().unwrap(), Unit::Nanoseconds);
        assert!("weeks".parse::<Unit>().is_err());
        assert_eq!("json".parse::<Format>().unwrap(), Format::Json);
        assert!("xml".parse::<Format>().is_err());
    }

    #[test]
    fn table_in_microseconds() {
        let report = Report::new(
            "times",
            vec![row("tictoc", 12_251, 66_225, 67, 870_598, 1000)],
        );
        let table = report.to_table();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(
            lines[0].split_whitespace().collect::<Vec<_>>(),
            ["Microseconds", "SD", "Min", "Max", "Count"]
        );
        assert_eq!(
            lines[1].split_whitespace().collect::<Vec<_>>(),
            ["tictoc", "12.251", "66.225", "0.067", "870.598", "1000"]
        );
        // right-aligned columns end at the same offset
        assert_eq!(lines[0].len(), lines[1].len());
    }

    #[test]
    fn table_in_nanoseconds() {
        let report = Report::new("times", vec![row("tictoc", 75, 55, 58, 1699, 1000)])
            .with_unit(Unit::Nanoseconds);
        let table = report.to_table();
        let data = table.lines().nth(1).unwrap();
        assert_eq!(
            data.split_whitespace()
                .skip(1)
                .collect::<Vec<_>>()
                .join(" "),
            "75 55 58 1699 1000"
        );
        assert!(table.starts_with(' '));
        assert!(table.lines().next().unwrap().contains("Nanoseconds"));
    }

    #[test]
    fn rows_sorted_by_tag() {
        let report = Report::new(
            "gibbs_cpp_times",
            vec![
                row("outer_loop", 1, 0, 1, 1, 100),
                row("gibbs_cpp", 1, 0, 1, 1, 1),
                row("make_matrix", 1, 0, 1, 1, 1),
                row("inner_loop", 1, 0, 1, 1, 10000),
            ],
        );
        let tags: Vec<_> = report
            .to_table()
            .lines()
            .skip(1)
            .map(|l| l.split_whitespace().next().unwrap().to_owned())
            .collect();
        assert_eq!(
            tags,
            ["gibbs_cpp", "inner_loop", "make_matrix", "outer_loop"]
        );
    }

    #[test]
    fn empty_csv_is_header_only() {
        let report = Report::new("times", vec![]);
        assert_eq!(report.to_csv(), "tag,mean_us,sd_us,min_us,max_us,count\n");
        assert!(Report::parse_csv(&report.to_csv()).unwrap().is_empty());
    }

    #[test]
    fn csv_always_microseconds() {
        let report = Report::new("times", vec![row("tictoc", 75, 55, 58, 1699, 1000)]);
        assert_eq!(report.display_unit, Unit::Microseconds);
        let report = report.with_unit(Unit::Nanoseconds);
        assert_eq!(
            report.to_csv(),
            "tag,mean_us,sd_us,min_us,max_us,count\ntictoc,0.075,0.055,0.058,1.699,1000\n"
        );
    }

    #[test]
    fn json_shape() {
        let report = Report::new(
            "times",
            vec![row("tictoc", 12_251, 66_225, 67, 870_598, 1000)],
        );
        let value: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(
            value,
            serde_json::json!({
                "name": "times",
                "unit": "microseconds",
                "rows": [{"tag": "tictoc", "mean": 12.251, "sd": 66.225,
                          "min": 0.067, "max": 870.598, "count": 1000}]
            })
        );
        assert_eq!(Report::from_json(&report.to_json()).unwrap(), report);
    }

    #[test]
    fn csv_quotes_awkward_tags() {
        let report = Report::new("times", vec![row("a,\"b\"", 1, 2, 3, 4, 5)]);
        assert_eq!(Report::parse_csv(&report.to_csv()).unwrap(), report.rows);
    }

    #[test]
    fn csv_rejects_bad_input() {
        assert!(matches!(
            Report::parse_csv("tag,mean\n"),
            Err(ReportError::Header(_))
        ));
        let bad = "tag,mean_us,sd_us,min_us,max_us,count\na,1.2345,0,0,0,1\n";
        assert!(matches!(Report::parse_csv(bad), Err(ReportError::Value(_))));
        let bad = "tag,mean_us,sd_us,min_us,max_us,count\na,-1.000,0,0,0,1\n";
        assert!(Report::parse_csv(bad).is_err());
        let short = "tag,mean_us,sd_us,min_us,max_us,count\na,1.5,0.25,1,2,x\n";
        assert!(matches!(
            Report::parse_csv(short),
            Err(ReportError::Count(_))
        ));
        assert_eq!(parse_micros("1.5").unwrap(), 1500);
        assert_eq!(parse_micros("2").unwrap(), 2000);
    }

    #[test]
    fn json_rejects_other_units() {
        let text = r#"{"name":"t","unit":"seconds","rows":[]}"#;
        assert!(matches!(Report::from_json(text), Err(ReportError::Unit(_))));
        let text = r#"{"name":"t","unit":"microseconds","rows":[{"tag":"a","mean":0.0005,"sd":0,"min":0,"max":0,"count":1}]}"#;
        assert!(matches!(
            Report::from_json(text),
            Err(ReportError::Value(_))
        ));
    }

    #[test]
    fn finalize_builds_report() {
        let (mut timer, mock, _, _) =
            captured(TimerConfig::named("gibbs_cpp_times").autoreturn(false));
        for d in [10, 20, 30] {
            timer.tic("a");
            mock.advance(d).unwrap();
            timer.toc("a");
        }
        let report = timer.finalize();
        assert_eq!(report.name, "gibbs_cpp_times");
        assert_eq!(report.rows, vec![row("a", 20, 10, 10, 30, 3)]);
        assert_eq!(report.display_unit, Unit::Nanoseconds);
    }

    #[test]
    fn finalize_empty_timer() {
        let (mut timer, _, _, _) = captured(TimerConfig::default().autoreturn(false));
        let report = timer.finalize();
        assert!(report.rows.is_empty());
        assert_eq!(report.display_unit, Unit::Microseconds);
    }

    #[test]
    fn finalize_updates_with_new_spans() {
        let (mut timer, mock, _, _) = captured(TimerConfig::default().autoreturn(false));
        timer.tic("a");
        mock.advance(10).unwrap();
        timer.toc("a");
        let first = timer.finalize();
        assert_eq!(first, timer.finalize());
        timer.tic("a");
        mock.advance(30).unwrap();
        timer.toc("a");
        let second = timer.finalize();
        assert_eq!(second.rows, vec![row("a", 20, 14, 10, 30, 2)]);
    }

    #[test]
    fn autoreturn_emits_once() {
        let (mut timer, mock, out, _) = captured(TimerConfig::named("runs"));
        timer.tic_default();
        mock.advance(75).unwrap();
        timer.toc_default();
        timer.finalize();
        timer.finalize();
        drop(timer);
        let text = out.contents();
        assert_eq!(text.matches("Nanoseconds").count(), 1);
        assert!(text.starts_with("runs\n"));
    }

    #[test]
    fn autoreturn_on_drop() {
        let (timer, mock, out, _) = captured(TimerConfig::default().format(Format::Csv));
        timer.tic_default();
        mock.advance(1500).unwrap();
        timer.toc_default();
        drop(timer);
        assert_eq!(
            Report::parse_csv(&out.contents()).unwrap(),
            vec![row("tictoc", 1500, 0, 1500, 1500, 1)]
        );
    }

    #[test]
    fn no_autoreturn_means_no_output() {
        let (mut timer, mock, out, _) = captured(TimerConfig::default().autoreturn(false));
        timer.tic_default();
        mock.advance(1).unwrap();
        timer.toc_default();
        timer.finalize();
        drop(timer);
        assert!(out.contents().is_empty());
    }

    #[test]
    fn warnings_collected_by_kind() {
        let (mut timer, mock, _, warn) = captured(TimerConfig::default().autoreturn(false));
        timer.toc("ghost");
        timer.tic("open");
        for _ in 0..3 {
            timer.tic("a");
            mock.advance(1).unwrap();
            timer.toc("a");
            timer.toc("a");
        }
        timer.aggregate();
        let warnings = timer.collect_warnings();
        let kinds: Vec<_> = warnings.iter().map(|w| (w.kind, w.tag.as_str())).collect();
        assert_eq!(
            kinds,
            [
                (WarningKind::MissingTic, "ghost"),
                (WarningKind::NeedlessToc, "a"),
                (WarningKind::UnmatchedTic, "open"),
            ]
        );
        timer.finalize();
        timer.finalize();
        drop(timer);
        let text = warn.contents();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("\"ghost\""));
    }

    #[test]
    fn quiet_timer_emits_no_warnings() {
        let (mut timer, _, _, warn) =
            captured(TimerConfig::default().autoreturn(false).verbose(false));
        timer.toc("ghost");
        timer.tic("open");
        let report = timer.finalize();
        drop(timer);
        assert!(warn.contents().is_empty());
        assert!(report.rows.is_empty());
    }
}
