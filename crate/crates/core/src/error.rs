use thiserror::Error;

use crate::frame::CalendarDate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid date {year:04}-{month:02}-{day:02}")]
    InvalidDate { year: i32, month: u32, day: u32 },
    #[error("cannot parse date `{0}`")]
    UnparsableDate(String),
    #[error("column `{column}` has {found} values but the frame has {expected} dates")]
    LengthMismatch { column: String, expected: usize, found: usize },
    #[error("dates are not sorted: {0} follows {1}")]
    UnsortedDates(CalendarDate, CalendarDate),
    #[error("duplicate date {0}")]
    DuplicateDate(CalendarDate),
    #[error("duplicate weekly date {0}")]
    DuplicateWeeklyDate(CalendarDate),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("column `{0}` exists in both sources")]
    ColumnNameClash(String),

    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
    #[error("header is missing column `{0}`")]
    MissingHeaderColumn(String),
    #[error("cannot parse number `{text}` at row {row}, column `{column}`")]
    UnparsableNumber { row: usize, column: String, text: String },
    #[error("malformed csv at row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("malformed document: {0}")]
    Format(String),
    #[error("column map must bind exactly one target column, found {0}")]
    TargetCount(usize),

    #[error("column has no observed values")]
    NoObservedValues,
    #[error("only {0} training rows available, at least 2 required")]
    InsufficientTrainingRows(usize),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("design matrix is rank deficient (column {0})")]
    RankDeficient(usize),
    #[error("{rows} rows are too few for {params} parameters")]
    TooFewRows { rows: usize, params: usize },
    #[error("degrees of freedom must be at least 1")]
    InvalidDf,
    #[error("probability {0} is outside (0, 1)")]
    ProbOutOfRange(f64),

    #[error("empty input")]
    EmptyInput,
    #[error("model expects {expected} features, got {found}")]
    FeatureCountMismatch { expected: usize, found: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyper(String),

    #[error("fold count {k} invalid for {n} rows")]
    BadK { n: usize, k: usize },
    #[error("missing values present in column `{0}`")]
    MissingValuesPresent(String),

    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),
    #[error("frame does not match the simulation truth: {0}")]
    FrameMismatch(String),

    #[error("config parse error at line {line}: {message}")]
    ConfigParse { line: usize, message: String },
    #[error("invalid config field `{field}`: {message}")]
    ConfigValidation { field: String, message: String },
}

impl Error {
    /// Stable snake_case name of the variant, for machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDate { .. } => "invalid_date",
            Error::UnparsableDate(_) => "unparsable_date",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::UnsortedDates(..) => "unsorted_dates",
            Error::DuplicateDate(_) => "duplicate_date",
            Error::DuplicateWeeklyDate(_) => "duplicate_weekly_date",
            Error::UnknownColumn(_) => "unknown_column",
            Error::DuplicateColumn(_) => "duplicate_column",
            Error::ColumnNameClash(_) => "column_name_clash",
            Error::FileNotFound(_) => "file_not_found",
            Error::Io { .. } => "io",
            Error::MissingHeaderColumn(_) => "missing_header_column",
            Error::UnparsableNumber { .. } => "unparsable_number",
            Error::Csv { .. } => "csv",
            Error::Format(_) => "format",
            Error::TargetCount(_) => "target_count",
            Error::NoObservedValues => "no_observed_values",
            Error::InsufficientTrainingRows(_) => "insufficient_training_rows",
            Error::InvalidStrategy(_) => "invalid_strategy",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::RankDeficient(_) => "rank_deficient",
            Error::TooFewRows { .. } => "too_few_rows",
            Error::InvalidDf => "invalid_df",
            Error::ProbOutOfRange(_) => "prob_out_of_range",
            Error::EmptyInput => "empty_input",
            Error::FeatureCountMismatch { .. } => "feature_count_mismatch",
            Error::InvalidHyper(_) => "invalid_hyper",
            Error::BadK { .. } => "bad_k",
            Error::MissingValuesPresent(_) => "missing_values_present",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::FrameMismatch(_) => "frame_mismatch",
            Error::ConfigParse { .. } => "config_parse",
            Error::ConfigValidation { .. } => "config_validation",
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        if err.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path.display().to_string())
        } else {
            Error::Io { path: path.display().to_string(), message: err.to_string() }
        }
    }

    pub(crate) fn validation(field: &str, message: impl Into<String>) -> Self {
        Error::ConfigValidation { field: field.to_string(), message: message.into() }
    }
}
