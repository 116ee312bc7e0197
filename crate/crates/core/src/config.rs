//! Run configuration files (TOML).
//!
//! ```toml
//! seed = 42
//! folds = 5
//! output_dir = "out"
//!
//! [dataset]
//! response = "daily_spend_19_all"
//! regressors = ["merchants_all"]
//!
//! [[sources]]
//! path = "affinity_daily.csv"
//! frequency = "daily"
//! date_columns = ["year", "month", "day"]
//! missing_token = "."
//! columns = { spend_all = { name = "daily_spend_19_all", role = "feature" } }
//! ```
//!
//! Instead of `sources`, `frame = "frame.json"` reads a canonical frame
//! document. Relative paths resolve against the config file's directory.

use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Deserialize;

use crate::document::read_frame;
use crate::error::{Error, Result};
use crate::evaluate::{BenchSpec, Learner, ModelConfig, DEFAULT_FOLDS};
use crate::forest::ForestHyper;
use crate::frame::{ColumnRole, ObservationFrame};
use crate::impute::{ImputationStrategy, DEFAULT_MC_DRAWS};
use crate::ingest::{load_sources, ColumnBinding, ColumnMap, DateColumns, Frequency, SourceSpec};
use crate::rng::derive_seed;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawColumn {
    name: String,
    #[serde(default)]
    role: ColumnRole,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    path: PathBuf,
    frequency: Frequency,
    date_columns: Vec<String>,
    #[serde(default = "default_missing_token")]
    missing_token: String,
    #[serde(default)]
    allow_exponent: bool,
    columns: IndexMap<String, RawColumn>,
}

fn default_missing_token() -> String {
    ".".to_string()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    response: String,
    regressors: Vec<String>,
    impute_column: Option<String>,
    model_features: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    id: u8,
    #[serde(default = "default_learner")]
    learner: String,
}

fn default_learner() -> String {
    "forest".to_string()
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawMonteCarlo {
    draws: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    folds: Option<usize>,
    output_dir: Option<PathBuf>,
    frame: Option<PathBuf>,
    #[serde(default)]
    sources: Vec<RawSource>,
    dataset: RawDataset,
    #[serde(default)]
    forest: ForestHyper,
    #[serde(default)]
    monte_carlo: RawMonteCarlo,
    models: Option<Vec<RawModel>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataInput {
    Tracker(Vec<(SourceSpec, ColumnMap)>),
    Frame(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    Ols,
    Forest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: DataInput,
    pub response: String,
    pub regressors: Vec<String>,
    pub impute_column: Option<String>,
    pub model_features: Option<Vec<String>>,
    pub models: Vec<(u8, LearnerKind)>,
    pub forest: ForestHyper,
    pub mc_draws: usize,
    pub folds: usize,
    pub seed: Option<u64>,
    pub output_dir: PathBuf,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    load_config_with(path, &Overrides::default())
}

pub fn load_config_with(path: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base, overrides)
}

pub fn parse_config(text: &str, base: &Path, overrides: &Overrides) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigParse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };

    let input = match (raw.frame, raw.sources.is_empty()) {
        (Some(_), false) => return Err(Error::validation("frame", "give either `frame` or `sources`, not both")),
        (Some(frame), true) => DataInput::Frame(resolve(&frame)),
        (None, true) => return Err(Error::validation("sources", "no data sources configured")),
        (None, false) => {
            let mut sources = Vec::new();
            for (i, s) in raw.sources.into_iter().enumerate() {
                let field = |name: &str| format!("sources[{i}].{name}");
                let date_columns = match s.date_columns.as_slice() {
                    [iso] => DateColumns::Iso(iso.clone()),
                    [y, m, d] => DateColumns::ymd(y, m, d),
                    _ => {
                        return Err(Error::validation(&field("date_columns"), "expected [date] or [year, month, day]"))
                    }
                };
                if s.columns.is_empty() {
                    return Err(Error::validation(&field("columns"), "no columns mapped"));
                }
                let spec = SourceSpec { path: resolve(&s.path), date_columns, frequency: s.frequency };
                let map = ColumnMap {
                    bindings: s
                        .columns
                        .into_iter()
                        .map(|(source, c)| ColumnBinding { source, name: c.name, role: c.role })
                        .collect(),
                    missing_token: s.missing_token,
                    allow_exponent: s.allow_exponent,
                };
                map.validate().map_err(|e| Error::validation(&field("columns"), e.to_string()))?;
                sources.push((spec, map));
            }
            if !sources.iter().any(|(s, _)| s.frequency == Frequency::Daily) {
                return Err(Error::validation("sources", "at least one daily source is required"));
            }
            let targets =
                sources.iter().flat_map(|(_, m)| &m.bindings).filter(|b| b.role == ColumnRole::Target).count();
            if targets != 1 {
                return Err(Error::validation(
                    "sources",
                    format!("exactly one target column required, found {targets}"),
                ));
            }
            DataInput::Tracker(sources)
        }
    };

    let models = match raw.models {
        None => (1..=5).map(|id| (id, LearnerKind::Forest)).collect(),
        Some(list) => list
            .into_iter()
            .enumerate()
            .map(|(i, m)| {
                if !(1..=5).contains(&m.id) {
                    return Err(Error::validation(&format!("models[{i}].id"), "must be between 1 and 5"));
                }
                let kind = match m.learner.as_str() {
                    "ols" => LearnerKind::Ols,
                    "forest" => LearnerKind::Forest,
                    _ => return Err(Error::validation(&format!("models[{i}].learner"), "expected `ols` or `forest`")),
                };
                Ok((m.id, kind))
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let config = RunConfig {
        input,
        response: raw.dataset.response,
        regressors: raw.dataset.regressors,
        impute_column: raw.dataset.impute_column,
        model_features: raw.dataset.model_features,
        models,
        forest: raw.forest,
        mc_draws: raw.monte_carlo.draws.unwrap_or(DEFAULT_MC_DRAWS),
        folds: overrides.folds.or(raw.folds).unwrap_or(DEFAULT_FOLDS),
        seed: overrides.seed.or(raw.seed),
        output_dir: overrides
            .output_dir
            .clone()
            .unwrap_or_else(|| resolve(&raw.output_dir.unwrap_or_else(|| PathBuf::from("report")))),
    };
    config.validate()?;
    Ok(config)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::validation("folds", "must be at least 2"));
        }
        if self.regressors.is_empty() {
            return Err(Error::validation("dataset.regressors", "at least one regressor is required"));
        }
        if self.mc_draws == 0 {
            return Err(Error::validation("monte_carlo.draws", "must be at least 1"));
        }
        self.forest.validate().map_err(|e| Error::validation("forest", e.to_string()))?;
        // Every configured model either shuffles folds or draws random numbers.
        if !self.models.is_empty() && self.seed.is_none() {
            return Err(Error::validation("seed", "an explicit seed is required for randomized steps"));
        }
        Ok(())
    }

    pub fn load_frame(&self) -> Result<ObservationFrame> {
        match &self.input {
            DataInput::Tracker(sources) => load_sources(sources),
            DataInput::Frame(path) => read_frame(path),
        }
    }

    pub fn bench_spec(&self, frame: &ObservationFrame) -> Result<BenchSpec> {
        let impute_column = match &self.impute_column {
            Some(c) => c.clone(),
            None => match frame.columns_with_role(ColumnRole::Target).as_slice() {
                [one] => one.clone(),
                _ => return Err(Error::validation("dataset.impute_column", "no unique target column in the data")),
            },
        };
        for col in std::iter::once(&self.response).chain(&self.regressors).chain([&impute_column]) {
            frame.column(col)?;
        }
        Ok(BenchSpec {
            response: self.response.clone(),
            regressors: self.regressors.clone(),
            impute_column,
            folds: self.folds,
            seed: self.seed.unwrap_or(0),
        })
    }

    /// Feature columns used by model-based imputation.
    pub fn imputation_features(&self, frame: &ObservationFrame, impute_column: &str) -> Vec<String> {
        self.model_features.clone().unwrap_or_else(|| {
            frame.columns_with_role(ColumnRole::Feature).into_iter().filter(|c| c != impute_column).collect()
        })
    }

    pub fn model_configs(&self, frame: &ObservationFrame, spec: &BenchSpec) -> Vec<ModelConfig> {
        let seed = spec.seed;
        self.models
            .iter()
            .map(|&(id, kind)| {
                let strategy = match id {
                    1 => ImputationStrategy::Passthrough,
                    2 => ImputationStrategy::DropMissing,
                    3 => ImputationStrategy::GlobalMean,
                    4 => ImputationStrategy::MonteCarlo { draws: self.mc_draws, seed: derive_seed(seed, 0x494d, 4) },
                    _ => ImputationStrategy::ModelBased {
                        hyper: self.forest.clone(),
                        features: self.imputation_features(frame, &spec.impute_column),
                        seed: derive_seed(seed, 0x494d, 5),
                    },
                };
                let learner = match kind {
                    LearnerKind::Ols => Learner::Ols,
                    LearnerKind::Forest => Learner::Forest(self.forest.clone()),
                };
                ModelConfig { id, strategy, learner }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7
frame = "frame.json"

[dataset]
response = "y"
regressors = ["x"]
"#;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config(text, Path::new("/data"), &Overrides::default())
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.folds, DEFAULT_FOLDS);
        assert_eq!(c.mc_draws, DEFAULT_MC_DRAWS);
        assert_eq!(c.forest, ForestHyper::default());
        assert_eq!(c.models.len(), 5);
        assert_eq!(c.input, DataInput::Frame(PathBuf::from("/data/frame.json")));
        assert_eq!(c.output_dir, PathBuf::from("/data/report"));
    }

    #[test]
    fn folds_below_two_rejected() {
        let err = parse(&format!("folds = 1\n{MINIMAL}")).unwrap_err();
        assert!(matches!(err, Error::ConfigValidation { ref field, .. } if field == "folds"));
    }

    #[test]
    fn seed_required_for_randomized_runs() {
        let text = MINIMAL.replace("seed = 7\n", "");
        let err = parse(&text).unwrap_err();
        assert!(matches!(err, Error::ConfigValidation { ref field, .. } if field == "seed"));
        let ok = parse_config(&text, Path::new("/"), &Overrides { seed: Some(1), ..Default::default() });
        assert_eq!(ok.unwrap().seed, Some(1));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let err = parse("seed = 7\nfolds = = 3\n").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn sources_are_validated() {
        let text = r#"
seed = 1
[dataset]
response = "y"
regressors = ["x"]
[[sources]]
path = "a.csv"
frequency = "daily"
date_columns = ["year", "month"]
columns = { a = { name = "y" } }
"#;
        let err = parse(text).unwrap_err();
        assert!(matches!(err, Error::ConfigValidation { ref field, .. } if field == "sources[0].date_columns"));
        let no_target = text.replace(r#"["year", "month"]"#, r#"["year", "month", "day"]"#);
        let err = parse(&no_target).unwrap_err();
        assert!(matches!(err, Error::ConfigValidation { ref field, .. } if field == "sources"));
    }

    #[test]
    fn model_list_and_learners() {
        let text = format!("{MINIMAL}\n[[models]]\nid = 3\nlearner = \"ols\"\n[[models]]\nid = 9\n");
        let err = parse(&text).unwrap_err();
        assert!(matches!(err, Error::ConfigValidation { ref field, .. } if field == "models[1].id"));
    }
}
