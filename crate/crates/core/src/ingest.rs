//! Economic-Tracker style CSV parsing and daily/weekly source merging.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{align_weekly_to_daily, CalendarDate, ColumnRole, ObservationFrame, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    Daily,
    Weekly,
}

/// Where the date of each CSV row comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DateColumns {
    /// Separate integer year, month and day columns (the tracker layout).
    YearMonthDay { year: String, month: String, day: String },
    /// A single `YYYY-MM-DD` column.
    Iso(String),
}

impl DateColumns {
    pub fn ymd(year: &str, month: &str, day: &str) -> Self {
        DateColumns::YearMonthDay { year: year.into(), month: month.into(), day: day.into() }
    }

    fn names(&self) -> Vec<&str> {
        match self {
            DateColumns::YearMonthDay { year, month, day } => vec![year, month, day],
            DateColumns::Iso(col) => vec![col],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub path: PathBuf,
    pub date_columns: DateColumns,
    pub frequency: Frequency,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnBinding {
    pub source: String,
    pub name: String,
    pub role: ColumnRole,
}

/// Maps source column names onto canonical names and roles.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMap {
    pub bindings: Vec<ColumnBinding>,
    pub missing_token: String,
    /// Accept `1e-3` style numbers. Off by default.
    pub allow_exponent: bool,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self { bindings: Vec::new(), missing_token: ".".to_string(), allow_exponent: false }
    }
}

impl ColumnMap {
    pub fn bind(mut self, source: &str, name: &str, role: ColumnRole) -> Self {
        self.bindings.push(ColumnBinding { source: source.into(), name: name.into(), role });
        self
    }

    /// Canonical names must be unique.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for b in &self.bindings {
            if !seen.insert(b.name.as_str()) {
                return Err(Error::DuplicateColumn(b.name.clone()));
            }
        }
        Ok(())
    }
}

/// Checks that exactly one column across the given maps is a Target.
pub fn check_single_target<'a>(maps: impl IntoIterator<Item = &'a ColumnMap>) -> Result<()> {
    let count = maps.into_iter().flat_map(|m| &m.bindings).filter(|b| b.role == ColumnRole::Target).count();
    if count == 1 {
        Ok(())
    } else {
        Err(Error::TargetCount(count))
    }
}

/// Strict decimal parse: optional sign, digits with an optional fraction.
fn parse_decimal(text: &str, allow_exponent: bool) -> Option<f64> {
    let body = text.strip_prefix(['+', '-']).unwrap_or(text);
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) if allow_exponent => (&body[..pos], Some(&body[pos + 1..])),
        Some(_) => return None,
        None => (body, None),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if int.is_empty() && frac.is_empty() || !digits(int) || !digits(frac) {
        return None;
    }
    if let Some(exp) = exponent {
        let exp = exp.strip_prefix(['+', '-']).unwrap_or(exp);
        if exp.is_empty() || !digits(exp) {
            return None;
        }
    }
    text.parse().ok()
}

fn header_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::MissingHeaderColumn(name.to_string()))
}

/// Parses one tracker CSV file into a frame with canonical column names.
pub fn parse_tracker_csv(spec: &SourceSpec, map: &ColumnMap) -> Result<ObservationFrame> {
    map.validate()?;
    let file = std::fs::File::open(&spec.path).map_err(|e| Error::io(&spec.path, e))?;
    parse_tracker_reader(file, spec, map)
}

pub(crate) fn parse_tracker_reader<R: std::io::Read>(
    reader: R,
    spec: &SourceSpec,
    map: &ColumnMap,
) -> Result<ObservationFrame> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Csv { row: 0, message: e.to_string() })?.clone();

    let date_idx =
        spec.date_columns.names().into_iter().map(|n| header_index(&headers, n)).collect::<Result<Vec<_>>>()?;
    let value_idx = map.bindings.iter().map(|b| header_index(&headers, &b.source)).collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<(CalendarDate, Vec<Option<f64>>)> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        // Row numbers count the header as row 1.
        let row = i + 2;
        let record = record.map_err(|e| Error::Csv { row, message: e.to_string() })?;
        let field = |idx: usize| record.get(idx).unwrap_or("").trim();
        let date = match &spec.date_columns {
            DateColumns::YearMonthDay { .. } => {
                let names = spec.date_columns.names();
                let located = |k: usize| Error::UnparsableNumber {
                    row,
                    column: names[k].to_string(),
                    text: field(date_idx[k]).to_string(),
                };
                let year: i32 = field(date_idx[0]).parse().map_err(|_| located(0))?;
                let month: u32 = field(date_idx[1]).parse().map_err(|_| located(1))?;
                let day: u32 = field(date_idx[2]).parse().map_err(|_| located(2))?;
                CalendarDate::new(year, month, day)?
            }
            DateColumns::Iso(_) => field(date_idx[0]).parse()?,
        };
        let values = map
            .bindings
            .iter()
            .zip(&value_idx)
            .map(|(b, &idx)| {
                let text = field(idx);
                if text.is_empty() || text == map.missing_token {
                    Ok(None)
                } else {
                    parse_decimal(text, map.allow_exponent).map(Some).ok_or_else(|| Error::UnparsableNumber {
                        row,
                        column: b.source.clone(),
                        text: text.to_string(),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((date, values));
    }

    rows.sort_by_key(|(date, _)| *date);
    let dates: Vec<CalendarDate> = rows.iter().map(|(d, _)| *d).collect();
    let mut frame = ObservationFrame::new(dates)?;
    for (j, binding) in map.bindings.iter().enumerate() {
        let series = Series::from_options(rows.iter().map(|(_, v)| v[j]));
        frame.insert_column(&binding.name, series, binding.role)?;
    }
    Ok(frame)
}

/// Re-indexes `weekly` onto the dates of `daily` and appends its columns.
pub fn merge_sources(daily: &ObservationFrame, weekly: &ObservationFrame) -> Result<ObservationFrame> {
    let mut merged = daily.clone();
    for (name, series) in weekly.columns() {
        if merged.has_column(name) {
            return Err(Error::ColumnNameClash(name.to_string()));
        }
        let pairs: Vec<(CalendarDate, f64)> =
            weekly.dates().iter().zip(series.iter()).filter_map(|(d, v)| v.map(|v| (*d, v))).collect();
        let aligned = align_weekly_to_daily(daily.dates(), &pairs)?;
        merged.insert_column(name, aligned, weekly.role(name).unwrap_or_default())?;
    }
    Ok(merged)
}

/// Parses every source and merges weekly sources onto the daily index.
///
/// Daily sources are joined on identical dates; the first daily source
/// defines the index.
pub fn load_sources(sources: &[(SourceSpec, ColumnMap)]) -> Result<ObservationFrame> {
    check_single_target(sources.iter().map(|(_, m)| m))?;
    let parsed = sources
        .iter()
        .map(|(spec, map)| parse_tracker_csv(spec, map).map(|f| (spec.frequency, f)))
        .collect::<Result<Vec<_>>>()?;
    let mut daily: Option<ObservationFrame> = None;
    for (_, frame) in parsed.iter().filter(|(f, _)| *f == Frequency::Daily) {
        daily = Some(match daily {
            None => frame.clone(),
            Some(base) => merge_sources(&base, frame)?,
        });
    }
    let mut merged = daily.ok_or_else(|| Error::Format("no daily source configured".into()))?;
    for (_, frame) in parsed.iter().filter(|(f, _)| *f == Frequency::Weekly) {
        merged = merge_sources(&merged, frame)?;
    }
    Ok(merged)
}

/// Writes a frame back out in tracker CSV layout (year, month, day columns).
pub fn write_tracker_csv(frame: &ObservationFrame, path: &Path, missing_token: &str) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
    let io_err = |e: csv::Error| Error::Io { path: path.display().to_string(), message: e.to_string() };
    let mut header = vec!["year".to_string(), "month".to_string(), "day".to_string()];
    header.extend(frame.column_names().map(String::from));
    wtr.write_record(&header).map_err(io_err)?;
    for (i, date) in frame.dates().iter().enumerate() {
        let mut record = vec![date.year().to_string(), date.month().to_string(), date.day().to_string()];
        for (_, series) in frame.columns() {
            record.push(series.get(i).map_or_else(|| missing_token.to_string(), |v| v.to_string()));
        }
        wtr.write_record(&record).map_err(io_err)?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SourceSpec {
        SourceSpec {
            path: PathBuf::from("mem.csv"),
            date_columns: DateColumns::ymd("year", "month", "day"),
            frequency: Frequency::Daily,
        }
    }

    fn parse(text: &str, map: &ColumnMap) -> Result<ObservationFrame> {
        parse_tracker_reader(text.as_bytes(), &spec(), map)
    }

    #[test]
    fn missing_token_marks_cell_missing() {
        let map = ColumnMap::default().bind("spend_all", "spend", ColumnRole::Feature);
        let frame = parse("year,month,day,spend_all\n2020,1,1,0.280\n2020,1,2,.\n2020,1,3,-0.1\n", &map).unwrap();
        let s = frame.column("spend").unwrap();
        assert_eq!(s.mask(), &[true, false, true]);
        assert_eq!(s.get(0), Some(0.280));
    }

    #[test]
    fn empty_cell_is_missing() {
        let map = ColumnMap::default().bind("a", "a", ColumnRole::Feature);
        let frame = parse("year,month,day,a\n2020,1,1,\n", &map).unwrap();
        assert_eq!(frame.column("a").unwrap().observed_count(), 0);
    }

    #[test]
    fn missing_header_column() {
        let map = ColumnMap::default().bind("a", "a", ColumnRole::Feature);
        let err = parse("month,day,a\n1,1,0.5\n", &map).unwrap_err();
        assert_eq!(err, Error::MissingHeaderColumn("year".into()));
        let err = parse("year,month,day,b\n2020,1,1,0.5\n", &map).unwrap_err();
        assert_eq!(err, Error::MissingHeaderColumn("a".into()));
    }

    #[test]
    fn unparsable_number_is_located() {
        let map = ColumnMap::default().bind("a", "a", ColumnRole::Feature);
        let err = parse("year,month,day,a\n2020,1,1,0.5\n2020,1,2,abc\n", &map).unwrap_err();
        assert_eq!(err, Error::UnparsableNumber { row: 3, column: "a".into(), text: "abc".into() });
    }

    #[test]
    fn exponent_rejected_unless_enabled() {
        let mut map = ColumnMap::default().bind("a", "a", ColumnRole::Feature);
        assert!(parse("year,month,day,a\n2020,1,1,1e-3\n", &map).is_err());
        map.allow_exponent = true;
        let frame = parse("year,month,day,a\n2020,1,1,1e-3\n", &map).unwrap();
        assert_eq!(frame.column("a").unwrap().get(0), Some(1e-3));
    }

    #[test]
    fn rows_sorted_and_duplicates_rejected() {
        let map = ColumnMap::default().bind("a", "a", ColumnRole::Feature);
        let frame = parse("year,month,day,a\n2020,1,2,2\n2020,1,1,1\n", &map).unwrap();
        assert_eq!(frame.column("a").unwrap().observed_values(), vec![1.0, 2.0]);
        let err = parse("year,month,day,a\n2020,1,1,2\n2020,1,1,1\n", &map).unwrap_err();
        assert!(matches!(err, Error::DuplicateDate(_)));
    }

    #[test]
    fn iso_date_column() {
        let spec = SourceSpec { date_columns: DateColumns::Iso("date".into()), ..spec() };
        let map = ColumnMap::default().bind("a", "a", ColumnRole::Feature);
        let frame = parse_tracker_reader("date,a\n2020-01-05,1.5\n".as_bytes(), &spec, &map).unwrap();
        assert_eq!(frame.dates()[0].to_string(), "2020-01-05");
    }

    #[test]
    fn decimal_grammar() {
        for ok in ["0", "-0.5", "+1.25", ".5", "5.", "0.280"] {
            assert!(parse_decimal(ok, false).is_some(), "{ok}");
        }
        for bad in ["", "-", ".", "1.2.3", "nan", "inf", "1e5", "0x10", "1,5"] {
            assert!(parse_decimal(bad, false).is_none(), "{bad}");
        }
    }

    #[test]
    fn merge_places_weekly_and_keeps_daily() {
        let dates = CalendarDate::new(2020, 1, 1).unwrap().consecutive(14);
        let mut daily = ObservationFrame::new(dates.clone()).unwrap();
        daily.insert_column("spend", Series::full((0..14).map(f64::from).collect()), ColumnRole::Feature).unwrap();
        let mut weekly = ObservationFrame::new(vec![dates[9]]).unwrap();
        weekly.insert_column("merchants", Series::full(vec![-0.05]), ColumnRole::Target).unwrap();

        let merged = merge_sources(&daily, &weekly).unwrap();
        assert_eq!(merged.column("merchants").unwrap().observed_count(), 1);
        assert_eq!(merged.column("merchants").unwrap().get(9), Some(-0.05));
        assert_eq!(merged.role("merchants"), Some(ColumnRole::Target));
        assert_eq!(merged.project(&["spend"]).unwrap(), daily);

        let empty_weekly = {
            let mut f = ObservationFrame::new(vec![]).unwrap();
            f.insert_column("merchants", Series::missing(0), ColumnRole::Target).unwrap();
            f
        };
        let merged = merge_sources(&daily, &empty_weekly).unwrap();
        assert_eq!(merged.column("merchants").unwrap().observed_count(), 0);

        assert_eq!(merge_sources(&daily, &daily).unwrap_err(), Error::ColumnNameClash("spend".into()));
    }

    #[test]
    fn single_target_required() {
        let none = ColumnMap::default().bind("a", "a", ColumnRole::Feature);
        assert_eq!(check_single_target([&none]), Err(Error::TargetCount(0)));
        let one = ColumnMap::default().bind("b", "b", ColumnRole::Target);
        assert!(check_single_target([&none, &one]).is_ok());
        assert_eq!(check_single_target([&one, &one]), Err(Error::TargetCount(2)));
    }
}
