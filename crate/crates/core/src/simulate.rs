//! Ground-truth scenarios for scoring imputers.
//!
//! A fully observed feature follows an AR(1) process; the target is a known
//! function of it plus Gaussian noise, then masked down to one observation
//! per `weekly_period` days (rows 0, p, 2p, ...).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{CalendarDate, ColumnRole, ObservationFrame, Series};
use crate::impute::HybridFrame;
use crate::rng::{self, domain};

pub const FEATURE_COLUMN: &str = "spend";
pub const TARGET_COLUMN: &str = "merchants";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum Relation {
    /// `a + b * x`
    Linear { a: f64, b: f64 },
    /// `a + b * tanh(c * (x - center))`
    Tanh { a: f64, b: f64, c: f64, center: f64 },
    /// `a + b * sin(c * x)`
    Sine { a: f64, b: f64, c: f64 },
}

impl Relation {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Relation::Linear { a, b } => a + b * x,
            Relation::Tanh { a, b, c, center } => a + b * (c * (x - center)).tanh(),
            Relation::Sine { a, b, c } => a + b * (c * x).sin(),
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            Relation::Linear { a, b } => vec![a, b],
            Relation::Tanh { a, b, c, center } => vec![a, b, c, center],
            Relation::Sine { a, b, c } => vec![a, b, c],
        }
    }
}

impl std::str::FromStr for Relation {
    type Err = Error;

    /// `linear:a,b`, `tanh:a,b,c,center` or `sine:a,b,c`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("relation `{s}`"));
        let (form, args) = s.split_once(':').ok_or_else(bad)?;
        let v = args.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<Vec<_>>>()?;
        match (form, v.as_slice()) {
            ("linear", &[a, b]) => Ok(Relation::Linear { a, b }),
            ("tanh", &[a, b, c, center]) => Ok(Relation::Tanh { a, b, c, center }),
            ("sine", &[a, b, c]) => Ok(Relation::Sine { a, b, c }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationSpec {
    pub n_days: usize,
    pub start: CalendarDate,
    pub relation: Relation,
    /// AR(1) persistence, in (-1, 1).
    pub phi: f64,
    pub feature_mean: f64,
    pub feature_noise_sd: f64,
    pub target_noise_sd: f64,
    pub weekly_period: usize,
    pub seed: u64,
}

impl Default for SimulationSpec {
    /// The default nonlinear scenario: roughly the scale of a spending index
    /// driving a merchant-count index, with a saturating response.
    fn default() -> Self {
        Self {
            n_days: 1253,
            start: CalendarDate::new(2020, 1, 13).expect("valid date"),
            relation: Relation::Tanh { a: -0.05, b: 0.1, c: 4.0, center: 0.28 },
            phi: 0.98,
            feature_mean: 0.28,
            feature_noise_sd: 0.05,
            target_noise_sd: 0.01,
            weekly_period: 7,
            seed: 0,
        }
    }
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.phi, self.feature_mean, self.feature_noise_sd, self.target_noise_sd]
            .into_iter()
            .chain(self.relation.params())
            .all(f64::is_finite);
        if !finite {
            return Err(Error::InvalidSpec("parameters must be finite".into()));
        }
        if self.n_days == 0 {
            return Err(Error::InvalidSpec("n_days must be positive".into()));
        }
        if !(self.phi > -1.0 && self.phi < 1.0) {
            return Err(Error::InvalidSpec(format!("phi {} outside (-1, 1)", self.phi)));
        }
        if self.feature_noise_sd < 0.0 || self.target_noise_sd < 0.0 {
            return Err(Error::InvalidSpec("noise standard deviations must be nonnegative".into()));
        }
        if self.weekly_period < 2 {
            return Err(Error::InvalidSpec("weekly_period must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTruth {
    pub full: ObservationFrame,
    pub masked: ObservationFrame,
    pub spec: SimulationSpec,
}

pub fn generate(spec: &SimulationSpec) -> Result<SimulationTruth> {
    spec.validate()?;
    let n = spec.n_days;
    let mut feature_rng = rng::stream(spec.seed, domain::SIM_FEATURE, 0);
    let mut noise_rng = rng::stream(spec.seed, domain::SIM_NOISE, 0);

    let stationary_sd = spec.feature_noise_sd / (1.0 - spec.phi * spec.phi).sqrt();
    let mut feature = Vec::with_capacity(n);
    let mut level = spec.feature_mean + stationary_sd * rng::standard_normal(&mut feature_rng);
    for t in 0..n {
        if t > 0 {
            level = spec.feature_mean
                + spec.phi * (level - spec.feature_mean)
                + spec.feature_noise_sd * rng::standard_normal(&mut feature_rng);
        }
        feature.push(level);
    }
    let target: Vec<f64> = feature
        .iter()
        .map(|&x| spec.relation.eval(x) + spec.target_noise_sd * rng::standard_normal(&mut noise_rng))
        .collect();

    let dates = spec.start.consecutive(n);
    let mut full = ObservationFrame::new(dates)?;
    full.insert_column(FEATURE_COLUMN, Series::full(feature.clone()), ColumnRole::Feature)?;
    full.insert_column(TARGET_COLUMN, Series::full(target.clone()), ColumnRole::Target)?;

    let mut masked = full.clone();
    let weekly =
        Series::from_options(target.iter().enumerate().map(|(i, &v)| (i % spec.weekly_period == 0).then_some(v)));
    masked.replace_column(TARGET_COLUMN, weekly)?;
    Ok(SimulationTruth { full, masked, spec: spec.clone() })
}

/// RMSE of `hybrid`'s target against the truth, over cells the mask hid.
pub fn imputation_rmse(truth: &SimulationTruth, hybrid: &HybridFrame) -> Result<f64> {
    if hybrid.frame.dates() != truth.masked.dates() {
        return Err(Error::FrameMismatch("dates differ".into()));
    }
    let target =
        hybrid.frame.column(TARGET_COLUMN).map_err(|_| Error::FrameMismatch(format!("no `{TARGET_COLUMN}` column")))?;
    let masked = truth.masked.column(TARGET_COLUMN)?;
    let actual = truth.full.column(TARGET_COLUMN)?;
    let mut sq = 0.0;
    let mut count = 0usize;
    for i in (0..masked.len()).filter(|&i| !masked.is_observed(i)) {
        let imputed =
            target.get(i).ok_or_else(|| Error::FrameMismatch(format!("row {i} of the target is still missing")))?;
        sq += (imputed - actual.get(i).expect("truth is fully observed")).powi(2);
        count += 1;
    }
    Ok(if count == 0 { 0.0 } else { (sq / count as f64).sqrt() })
}
