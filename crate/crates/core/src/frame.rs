//! Date-indexed frames with an explicit per-cell missingness mask.
//!
//! Missing cells are tracked only through the mask. The value slot behind a
//! missing cell holds `NaN` and is never handed out by the accessors, so no
//! numeric routine can accidentally consume it.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Gregorian calendar date. Field order gives calendar ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CalendarDate {
    year: i32,
    month: u32,
    day: u32,
}

fn is_leap(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        2 if is_leap(year) => 29,
        _ => 28,
    }
}

impl CalendarDate {
    pub fn new(year: i32, month: u32, day: u32) -> Result<Self> {
        if !(1..=12).contains(&month) || day == 0 || day > days_in_month(year, month) {
            return Err(Error::InvalidDate { year, month, day });
        }
        Ok(Self { year, month, day })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u32 {
        self.month
    }

    pub fn day(&self) -> u32 {
        self.day
    }

    /// The following calendar day.
    pub fn succ(&self) -> Self {
        if self.day < days_in_month(self.year, self.month) {
            Self { day: self.day + 1, ..*self }
        } else if self.month < 12 {
            Self { month: self.month + 1, day: 1, ..*self }
        } else {
            Self { year: self.year + 1, month: 1, day: 1 }
        }
    }

    /// `n` consecutive days starting at `self`.
    pub fn consecutive(self, n: usize) -> Vec<CalendarDate> {
        std::iter::successors(Some(self), |d| Some(d.succ())).take(n).collect()
    }
}

impl fmt::Display for CalendarDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl FromStr for CalendarDate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnparsableDate(s.to_string());
        let mut parts = s.trim().splitn(3, '-');
        let mut next = || parts.next().ok_or_else(bad);
        let (y, m, d) = (next()?, next()?, next()?);
        let year = y.parse().map_err(|_| bad())?;
        let month = m.parse().map_err(|_| bad())?;
        let day = d.parse().map_err(|_| bad())?;
        CalendarDate::new(year, month, day)
    }
}

impl Serialize for CalendarDate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CalendarDate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How a column participates in the analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ColumnRole {
    /// The column whose gaps are imputed.
    Target,
    #[default]
    Feature,
    Ignored,
}

impl fmt::Display for ColumnRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnRole::Target => "target",
            ColumnRole::Feature => "feature",
            ColumnRole::Ignored => "ignored",
        })
    }
}

impl FromStr for ColumnRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "target" => Ok(ColumnRole::Target),
            "feature" => Ok(ColumnRole::Feature),
            "ignored" => Ok(ColumnRole::Ignored),
            other => Err(Error::Format(format!("unknown column role `{other}`"))),
        }
    }
}

/// A value vector paired with its observation mask.
#[derive(Debug, Clone, Default)]
pub struct Series {
    values: Vec<f64>,
    observed: Vec<bool>,
}

impl PartialEq for Series {
    // Missing slots are ignored; observed slots compare bit-exactly.
    fn eq(&self, other: &Self) -> bool {
        self.observed == other.observed
            && self.iter().zip(other.iter()).all(|(a, b)| a.map(f64::to_bits) == b.map(f64::to_bits))
    }
}

impl Series {
    pub fn from_options<I: IntoIterator<Item = Option<f64>>>(cells: I) -> Self {
        let mut values = Vec::new();
        let mut observed = Vec::new();
        for cell in cells {
            values.push(cell.unwrap_or(f64::NAN));
            observed.push(cell.is_some());
        }
        Self { values, observed }
    }

    pub fn full(values: Vec<f64>) -> Self {
        let observed = vec![true; values.len()];
        Self { values, observed }
    }

    pub fn missing(len: usize) -> Self {
        Self { values: vec![f64::NAN; len], observed: vec![false; len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.observed[i].then(|| self.values[i])
    }

    pub fn is_observed(&self, i: usize) -> bool {
        self.observed[i]
    }

    pub fn set(&mut self, i: usize, value: f64) {
        self.values[i] = value;
        self.observed[i] = true;
    }

    pub fn mask(&self) -> &[bool] {
        &self.observed
    }

    pub fn iter(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Observed values in row order.
    pub fn observed_values(&self) -> Vec<f64> {
        self.iter().flatten().collect()
    }

    pub fn observed_count(&self) -> usize {
        self.observed.iter().filter(|&&o| o).count()
    }

    pub fn is_complete(&self) -> bool {
        self.observed.iter().all(|&o| o)
    }

    /// Dense values, or `None` if any cell is missing.
    pub fn dense(&self) -> Option<Vec<f64>> {
        self.is_complete().then(|| self.values.clone())
    }

    pub fn select(&self, rows: &[usize]) -> Series {
        Series {
            values: rows.iter().map(|&i| self.values[i]).collect(),
            observed: rows.iter().map(|&i| self.observed[i]).collect(),
        }
    }
}

/// A date-indexed table of named numeric columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservationFrame {
    dates: Vec<CalendarDate>,
    columns: IndexMap<String, Series>,
    roles: IndexMap<String, ColumnRole>,
}

fn check_dates(dates: &[CalendarDate]) -> Result<()> {
    for pair in dates.windows(2) {
        if pair[1] == pair[0] {
            return Err(Error::DuplicateDate(pair[1]));
        }
        if pair[1] < pair[0] {
            return Err(Error::UnsortedDates(pair[1], pair[0]));
        }
    }
    Ok(())
}

/// Builds a frame from dates and columns whose missing cells are `None`.
pub fn build_frame<S: Into<String>>(
    dates: Vec<CalendarDate>,
    columns: Vec<(S, Vec<Option<f64>>)>,
) -> Result<ObservationFrame> {
    let mut frame = ObservationFrame::new(dates)?;
    for (name, cells) in columns {
        frame.insert_column(name, Series::from_options(cells), ColumnRole::Feature)?;
    }
    Ok(frame)
}

impl ObservationFrame {
    pub fn new(dates: Vec<CalendarDate>) -> Result<Self> {
        check_dates(&dates)?;
        Ok(Self { dates, columns: IndexMap::new(), roles: IndexMap::new() })
    }

    pub fn insert_column(&mut self, name: impl Into<String>, series: Series, role: ColumnRole) -> Result<()> {
        let name = name.into();
        if series.len() != self.dates.len() {
            return Err(Error::LengthMismatch { column: name, expected: self.dates.len(), found: series.len() });
        }
        if self.columns.contains_key(&name) {
            return Err(Error::DuplicateColumn(name));
        }
        self.roles.insert(name.clone(), role);
        self.columns.insert(name, series);
        Ok(())
    }

    /// Swaps in new values for an existing column, keeping its role.
    pub fn replace_column(&mut self, name: &str, series: Series) -> Result<()> {
        let expected = self.dates.len();
        let slot = self.columns.get_mut(name).ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        if series.len() != expected {
            return Err(Error::LengthMismatch { column: name.to_string(), expected, found: series.len() });
        }
        *slot = series;
        Ok(())
    }

    pub fn set_role(&mut self, name: &str, role: ColumnRole) -> Result<()> {
        let slot = self.roles.get_mut(name).ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        *slot = role;
        Ok(())
    }

    pub fn dates(&self) -> &[CalendarDate] {
        &self.dates
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn column(&self, name: &str) -> Result<&Series> {
        self.columns.get(name).ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn role(&self, name: &str) -> Option<ColumnRole> {
        self.roles.get(name).copied()
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &Series)> {
        self.columns.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn column_names(&self) -> impl Iterator<Item = &str> {
        self.columns.keys().map(String::as_str)
    }

    pub fn roles(&self) -> impl Iterator<Item = (&str, ColumnRole)> {
        self.roles.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn has_column(&self, name: &str) -> bool {
        self.columns.contains_key(name)
    }

    /// Columns carrying `role`, in frame order.
    pub fn columns_with_role(&self, role: ColumnRole) -> Vec<String> {
        self.roles.iter().filter(|(_, r)| **r == role).map(|(k, _)| k.clone()).collect()
    }

    /// Sub-frame of the given rows, which must be strictly increasing.
    pub fn select_rows(&self, rows: &[usize]) -> ObservationFrame {
        ObservationFrame {
            dates: rows.iter().map(|&i| self.dates[i]).collect(),
            columns: self.columns.iter().map(|(k, s)| (k.clone(), s.select(rows))).collect(),
            roles: self.roles.clone(),
        }
    }

    /// Sub-frame with only the named columns, in the order given.
    pub fn project(&self, names: &[&str]) -> Result<ObservationFrame> {
        let mut out = ObservationFrame { dates: self.dates.clone(), ..Default::default() };
        for &name in names {
            let series = self.column(name)?.clone();
            out.roles.insert(name.to_string(), self.roles[name]);
            out.columns.insert(name.to_string(), series);
        }
        Ok(out)
    }

    /// Row indices where every named column is observed.
    pub fn complete_row_indices(&self, required: &[&str]) -> Result<Vec<usize>> {
        let series = required.iter().map(|name| self.column(name)).collect::<Result<Vec<_>>>()?;
        Ok((0..self.n_rows()).filter(|&i| series.iter().all(|s| s.is_observed(i))).collect())
    }

    /// Rows as dense feature vectors, or the first column with a missing cell.
    pub fn dense_rows(&self, names: &[&str]) -> Result<Vec<Vec<f64>>> {
        let cols = names
            .iter()
            .map(|&name| self.column(name)?.dense().ok_or_else(|| Error::MissingValuesPresent(name.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..self.n_rows()).map(|i| cols.iter().map(|c| c[i]).collect()).collect())
    }
}

/// Keeps only rows where every `required` column is observed.
pub fn complete_rows(frame: &ObservationFrame, required: &[&str]) -> Result<ObservationFrame> {
    let rows = frame.complete_row_indices(required)?;
    Ok(frame.select_rows(&rows))
}

/// Places weekly observations onto a daily index.
///
/// A daily slot is observed only when a weekly record carries exactly that
/// date; weekly records outside the daily index are dropped.
pub fn align_weekly_to_daily(daily_dates: &[CalendarDate], weekly: &[(CalendarDate, f64)]) -> Result<Series> {
    let mut seen = std::collections::HashSet::with_capacity(weekly.len());
    let mut out = Series::missing(daily_dates.len());
    for &(date, value) in weekly {
        if !seen.insert(date) {
            return Err(Error::DuplicateWeeklyDate(date));
        }
        if let Ok(i) = daily_dates.binary_search(&date) {
            out.set(i, value);
        }
    }
    Ok(out)
}
