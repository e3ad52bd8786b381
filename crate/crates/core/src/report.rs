//! Datasets of labeled observations, CSV ingestion, ranking by an indicator,
//! and rendering of the ranked reports as a table, CSV or JSON.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::io::Read;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Number, Value};

use crate::approximation::format_significant;
use crate::error::{Error, Result};
use crate::indicator::{abs_change, eval_big_f, eval_f, rel_change, Lambda, PositivePair};

/// Values within this relative distance share a rank.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Precision at which numbers are written in shortest round-trip form
/// instead of a fixed number of decimals.
pub const FULL_PRECISION: u8 = 15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledObservation {
    pub label: String,
    pub pair: PositivePair,
}

/// A non-empty list of observations with unique, non-empty labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<LabeledObservation>,
}

impl Dataset {
    pub fn new(observations: Vec<LabeledObservation>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::Validation {
                message: "no observations".into(),
            });
        }
        let mut seen = HashSet::new();
        for obs in &observations {
            if obs.label.is_empty() {
                return Err(Error::Validation {
                    message: "empty label".into(),
                });
            }
            if !seen.insert(obs.label.as_str()) {
                return Err(Error::Validation {
                    message: format!("duplicate label '{}'", obs.label),
                });
            }
        }
        Ok(Dataset { observations })
    }

    pub fn observations(&self) -> &[LabeledObservation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

const INPUT_COLUMNS: [&str; 3] = ["label", "past", "present"];
/// Extra columns written by [`render`]; accepted and ignored on input so that
/// CSV output can be read back.
const OUTPUT_COLUMNS: [&str; 4] = ["abs", "rel", "indicator", "rank"];

/// Reads a CSV with header `label,past,present` (case-insensitive).
///
/// Line numbers in errors are 1-based and count the header.
pub fn parse_csv<R: Read>(input: R) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let mut records = reader.records();

    let header = match records.next() {
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "missing header row 'label,past,present'".into(),
            })
        }
        Some(r) => r.map_err(csv_error)?,
    };
    let names: Vec<String> = header
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect();
    let known = names.len() >= 3
        && names[..3] == INPUT_COLUMNS
        && names[3..]
            .iter()
            .all(|n| OUTPUT_COLUMNS.contains(&n.as_str()));
    if !known {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header 'label,past,present', found '{}'",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut observations = Vec::new();
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != names.len() {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", names.len(), record.len()),
            });
        }
        let label = record[0].to_string();
        let past = parse_value(&record[1], &label, "past", line)?;
        let present = parse_value(&record[2], &label, "present", line)?;
        let pair = PositivePair::new(past, present).expect("validated");
        observations.push(LabeledObservation { label, pair });
    }
    Dataset::new(observations)
}

fn parse_value(field: &str, label: &str, column: &str, line: u64) -> Result<f64> {
    let value: f64 = field.parse().map_err(|_| Error::Validation {
        message: format!("line {line}, label '{label}': {column} value '{field}' is not a number"),
    })?;
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Validation {
            message: format!("line {line}, label '{label}': {column} must be > 0, got {field}"),
        })
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Which family ranks the observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IndicatorKind {
    /// `f_λ`
    Small,
    /// `F_λ`
    Big,
}

impl FromStr for IndicatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f" => Ok(IndicatorKind::Small),
            "F" => Ok(IndicatorKind::Big),
            other => Err(Error::Validation {
                message: format!("unknown indicator '{other}' (expected f or F)"),
            }),
        }
    }
}

impl IndicatorKind {
    pub fn symbol(self) -> &'static str {
        match self {
            IndicatorKind::Small => "f",
            IndicatorKind::Big => "F",
        }
    }
}

/// Computed values for one observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorReport {
    pub label: String,
    pub past: f64,
    pub present: f64,
    pub abs: f64,
    pub rel: f64,
    pub f: f64,
    #[serde(rename = "F")]
    pub big_f: f64,
    pub rank: usize,
}

impl IndicatorReport {
    pub fn value(&self, kind: IndicatorKind) -> f64 {
        match kind {
            IndicatorKind::Small => self.f,
            IndicatorKind::Big => self.big_f,
        }
    }
}

fn ties(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs())
}

/// Reports sorted by dense rank, descending in the chosen indicator. Values
/// within [`TIE_TOLERANCE`] of the first member of a group share its rank;
/// within a group rows are ordered by label.
pub fn rank(ds: &Dataset, lambda: Lambda, kind: IndicatorKind) -> Vec<IndicatorReport> {
    let mut reports: Vec<IndicatorReport> = ds
        .observations
        .iter()
        .map(|obs| {
            let p = obs.pair;
            IndicatorReport {
                label: obs.label.clone(),
                past: p.x(),
                present: p.y(),
                abs: abs_change(p),
                rel: rel_change(p),
                f: eval_f(lambda, p),
                big_f: eval_big_f(lambda, p),
                rank: 0,
            }
        })
        .collect();
    reports.sort_by(|a, b| {
        b.value(kind)
            .total_cmp(&a.value(kind))
            .then_with(|| a.label.cmp(&b.label))
    });

    let mut start = 0;
    let mut current = 0;
    while start < reports.len() {
        current += 1;
        let leader = reports[start].value(kind);
        let mut end = start + 1;
        while end < reports.len() && ties(leader, reports[end].value(kind)) {
            end += 1;
        }
        let group = &mut reports[start..end];
        group.sort_by(|a, b| a.label.cmp(&b.label));
        for r in group {
            r.rank = current;
        }
        start = end;
    }
    reports
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Format {
    Table,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "table" => Ok(Format::Table),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Validation {
                message: format!("unknown format '{other}' (expected table, csv or json)"),
            }),
        }
    }
}

/// Output format and number of decimals. Precision 15 ([`FULL_PRECISION`])
/// writes every number in shortest round-trip form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OutputFormat {
    pub format: Format,
    pub precision: u8,
}

impl Default for OutputFormat {
    fn default() -> Self {
        OutputFormat {
            format: Format::Table,
            precision: 2,
        }
    }
}

impl OutputFormat {
    pub fn new(format: Format, precision: u8) -> Result<Self> {
        if precision > FULL_PRECISION {
            return Err(Error::Validation {
                message: format!("precision must lie in [0, 15], got {precision}"),
            });
        }
        Ok(OutputFormat { format, precision })
    }

    pub fn is_full(&self) -> bool {
        self.precision == FULL_PRECISION
    }

    /// Fixed decimals, ties to even on the binary value, or shortest
    /// round-trip form at full precision.
    pub fn number(&self, v: f64) -> String {
        if self.is_full() {
            format!("{v}")
        } else {
            let s = format!("{v:.*}", self.precision as usize);
            // "-0.00" reads as a sign error
            if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
                s[1..].to_string()
            } else {
                s
            }
        }
    }

    fn json_number(&self, v: f64) -> Value {
        let rounded = if self.is_full() {
            v
        } else {
            self.number(v).parse().unwrap_or(v)
        };
        Number::from_f64(rounded).map_or(Value::Null, Value::Number)
    }
}

/// Column name of the indicator, e.g. `f_0.5`.
pub fn indicator_name(kind: IndicatorKind, lambda: Lambda) -> String {
    format!(
        "{}_{}",
        kind.symbol(),
        format_significant(lambda.value(), 4)
    )
}

fn unit_footnote(kind: IndicatorKind, lambda: Lambda, unit: &str) -> String {
    let name = indicator_name(kind, lambda);
    let exponent = 1.0 - lambda.value();
    if exponent == 0.0 {
        format!("{name} is dimensionless")
    } else {
        format!(
            "{name} carries unit {unit}^{}; only ratios of its values are unit-free",
            format_significant(exponent, 4)
        )
    }
}

/// Renders ranked reports.
///
/// Table output shows rel as a percentage and ends with a footnote naming
/// the unit exponent of the indicator. CSV uses the header
/// `label,past,present,abs,rel,indicator,rank`; JSON is a single array of
/// objects with the same keys.
pub fn render(
    reports: &[IndicatorReport],
    kind: IndicatorKind,
    lambda: Lambda,
    out: OutputFormat,
    unit: &str,
) -> String {
    match out.format {
        Format::Csv => render_csv(reports, kind, out),
        Format::Json => render_json(reports, kind, out),
        Format::Table => render_table(reports, kind, lambda, out, unit),
    }
}

fn render_csv(reports: &[IndicatorReport], kind: IndicatorKind, out: OutputFormat) -> String {
    let mut s = String::from("label,past,present,abs,rel,indicator,rank\n");
    for r in reports {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            csv_field(&r.label),
            out.number(r.past),
            out.number(r.present),
            out.number(r.abs),
            out.number(r.rel),
            out.number(r.value(kind)),
            r.rank
        )
        .unwrap();
    }
    s
}

fn csv_field(label: &str) -> String {
    if label.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", label.replace('"', "\"\""))
    } else {
        label.to_string()
    }
}

#[derive(Serialize)]
struct JsonRow<'a> {
    label: &'a str,
    past: Value,
    present: Value,
    abs: Value,
    rel: Value,
    indicator: Value,
    rank: usize,
}

fn render_json(reports: &[IndicatorReport], kind: IndicatorKind, out: OutputFormat) -> String {
    let rows: Vec<JsonRow> = reports
        .iter()
        .map(|r| JsonRow {
            label: &r.label,
            past: out.json_number(r.past),
            present: out.json_number(r.present),
            abs: out.json_number(r.abs),
            rel: out.json_number(r.rel),
            indicator: out.json_number(r.value(kind)),
            rank: r.rank,
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("json");
    s.push('\n');
    s
}

fn render_table(
    reports: &[IndicatorReport],
    kind: IndicatorKind,
    lambda: Lambda,
    out: OutputFormat,
    unit: &str,
) -> String {
    let name = indicator_name(kind, lambda);
    let header = [
        "label",
        "past",
        "present",
        "abs",
        "rel",
        name.as_str(),
        "rank",
    ];
    let rows: Vec<[String; 7]> = reports
        .iter()
        .map(|r| {
            [
                r.label.clone(),
                out.number(r.past),
                out.number(r.present),
                out.number(r.abs),
                format!("{}%", out.number(100.0 * r.rel)),
                out.number(r.value(kind)),
                r.rank.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut s = String::new();
    let line = |s: &mut String, cells: &[&str]| {
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            if i == 0 {
                write!(s, "{cell:<w$}").unwrap();
            } else {
                write!(s, "{cell:>w$}").unwrap();
            }
        }
        s.push('\n');
    };
    line(&mut s, &header);
    for row in &rows {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut s, &cells);
    }
    writeln!(s, "\n* {}", unit_footnote(kind, lambda, unit)).unwrap();
    s
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Table => "table",
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SALES: &str =
        "label,past,present\nI,10,20\nII,500,570\nIII,140,210\nIV,35,70\nV,80,135\n";

    fn sales() -> Dataset {
        parse_csv(SALES.as_bytes()).unwrap()
    }

    fn by_label<'a>(reports: &'a [IndicatorReport], label: &str) -> &'a IndicatorReport {
        reports.iter().find(|r| r.label == label).unwrap()
    }

    #[test]
    fn parses_single_row() {
        let ds = parse_csv("label,past,present\nI,10,20\n".as_bytes()).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(
            ds.observations()[0].pair,
            PositivePair::new(10.0, 20.0).unwrap()
        );
    }

    #[test]
    fn header_is_case_insensitive_and_crlf_ok() {
        let ds = parse_csv("Label,PAST,Present\r\nA,1,2\r\nB,3,4\r\n".as_bytes()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.observations()[1].label, "B");
    }

    #[test]
    fn parse_errors() {
        let err = parse_csv("label,past,present\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("no observations"));
        let err = parse_csv("label,past,present\nX,0,5\n".as_bytes()).unwrap_err();
        assert_eq!(err.code(), "ValidationError");
        assert!(err.to_string().contains("past") && err.to_string().contains("'X'"));
        let err = parse_csv("label,past,present\nX,1,abc\n".as_bytes()).unwrap_err();
        assert_eq!(err.code(), "ValidationError");
        assert!(err.to_string().contains("present"));
        let err = parse_csv("label,past,present\nX,1,2\nX,3,4\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let err = parse_csv("name,old,new\nX,1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_csv("".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_csv("label,past,present\nX,1,2\nY,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
        let err = parse_csv("label,past,present,extra\nX,1,2,3\n".as_bytes()).unwrap_err();
        assert_eq!(err.code(), "ParseError");
    }

    #[test]
    fn ranks_sales_channels_at_half() {
        let reports = rank(&sales(), Lambda::HALF, IndicatorKind::Small);
        let expected = [
            ("I", 3.16),
            ("II", 3.13),
            ("III", 5.92),
            ("IV", 5.92),
            ("V", 6.15),
        ];
        for (label, v) in expected {
            assert!((by_label(&reports, label).f - v).abs() <= 0.005, "{label}");
        }
        let order: Vec<(&str, usize)> =
            reports.iter().map(|r| (r.label.as_str(), r.rank)).collect();
        assert_eq!(
            order,
            [("V", 1), ("III", 2), ("IV", 2), ("I", 3), ("II", 4)]
        );
    }

    #[test]
    fn ranks_sales_channels_by_absolute_change() {
        let reports = rank(&sales(), Lambda::ZERO, IndicatorKind::Small);
        let abs: Vec<f64> = ["I", "II", "III", "IV", "V"]
            .iter()
            .map(|l| by_label(&reports, l).f)
            .collect();
        assert_eq!(abs, [10.0, 70.0, 70.0, 35.0, 55.0]);
        assert_eq!(by_label(&reports, "II").rank, 1);
        assert_eq!(by_label(&reports, "III").rank, 1);
        assert_eq!(reports[0].label, "II");
    }

    #[test]
    fn single_row_is_first() {
        let ds = parse_csv("label,past,present\nonly,3,1\n".as_bytes()).unwrap();
        let reports = rank(&ds, Lambda::HALF, IndicatorKind::Big);
        assert_eq!(reports.len(), 1);
        assert_eq!(reports[0].rank, 1);
    }

    #[test]
    fn ranks_by_big_f() {
        let reports = rank(&sales(), Lambda::ONE, IndicatorKind::Big);
        // log-ratio: I and IV both double
        assert_eq!(by_label(&reports, "I").rank, 1);
        assert_eq!(by_label(&reports, "IV").rank, 1);
        assert_eq!(by_label(&reports, "II").rank, 4);
    }

    #[test]
    fn table_rendering() {
        let reports = rank(&sales(), Lambda::HALF, IndicatorKind::Small);
        let s = render(
            &reports,
            IndicatorKind::Small,
            Lambda::HALF,
            OutputFormat::default(),
            "u",
        );
        assert!(s.starts_with("label"));
        assert!(s.contains("f_0.5"));
        assert!(s.contains("68.75%"));
        assert!(s.contains("14.00%"));
        assert!(s.contains("6.15"));
        assert!(s.contains("u^0.5"));
    }

    #[test]
    fn csv_and_json_rendering() {
        let reports = rank(&sales(), Lambda::HALF, IndicatorKind::Small);
        let out = OutputFormat::new(Format::Csv, 2).unwrap();
        let s = render(&reports, IndicatorKind::Small, Lambda::HALF, out, "u");
        let mut lines = s.lines();
        assert_eq!(
            lines.next().unwrap(),
            "label,past,present,abs,rel,indicator,rank"
        );
        assert_eq!(lines.next().unwrap(), "V,80.00,135.00,55.00,0.69,6.15,1");
        assert!(!s.contains('\r'));

        let out = OutputFormat::new(Format::Json, 2).unwrap();
        let s = render(&reports, IndicatorKind::Small, Lambda::HALF, out, "u");
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v[0]["label"], "V");
        assert_eq!(v[0]["indicator"], 6.15);
        assert_eq!(v[0]["rank"], 1);
        assert!(OutputFormat::new(Format::Json, 16).is_err());
    }

    #[test]
    fn full_precision_round_trip() {
        let text = "label,past,present\na,0.1,0.7\nb,3.3333,1e-3\nc,123456.789,98765.4321\n";
        let ds = parse_csv(text.as_bytes()).unwrap();
        let lambda = Lambda::new(0.37).unwrap();
        let reports = rank(&ds, lambda, IndicatorKind::Small);
        let out = OutputFormat::new(Format::Csv, FULL_PRECISION).unwrap();
        let s = render(&reports, IndicatorKind::Small, lambda, out, "u");
        let again = parse_csv(s.as_bytes()).unwrap();
        let recomputed = rank(&again, lambda, IndicatorKind::Small);
        for (row, (a, b)) in s.lines().skip(1).zip(reports.iter().zip(&recomputed)) {
            assert_eq!(a.f.to_bits(), b.f.to_bits());
            let written: f64 = row.split(',').nth(5).unwrap().parse().unwrap();
            assert_eq!(written.to_bits(), a.f.to_bits());
        }
    }

    #[test]
    fn rounding_is_half_even() {
        let out = OutputFormat::new(Format::Csv, 2).unwrap();
        assert_eq!(out.number(0.125), "0.12");
        assert_eq!(out.number(0.375), "0.38");
        assert_eq!(out.number(-0.001), "0.00");
        let out = OutputFormat::new(Format::Csv, 0).unwrap();
        assert_eq!(out.number(2.5), "2");
    }

    #[test]
    fn labels_with_commas_are_quoted() {
        let ds = parse_csv("label,past,present\n\"a,b\",1,2\n".as_bytes()).unwrap();
        let reports = rank(&ds, Lambda::HALF, IndicatorKind::Small);
        let out = OutputFormat::new(Format::Csv, FULL_PRECISION).unwrap();
        let s = render(&reports, IndicatorKind::Small, Lambda::HALF, out, "u");
        assert_eq!(
            parse_csv(s.as_bytes()).unwrap().observations()[0].label,
            "a,b"
        );
    }
}
