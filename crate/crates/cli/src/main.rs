//! `peanut` command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error. Failures print one
//! diagnostic line `error[<kind>]: <message>` on stderr.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use peanut::config::{load_config, load_config_with, Overrides};
use peanut::describe::{descriptive_stats, missingness_summary, scatter_csv, scatter_export};
use peanut::document::{read_frame, FrameDocument};
use peanut::frame::{complete_rows, ColumnRole, ObservationFrame};
use peanut::impute::{impute, ImputationStrategy, DEFAULT_MC_DRAWS};
use peanut::ols::{fit_ols, render_ols_table};
use peanut::simulate::{generate, Relation, SimulationSpec};
use peanut::{fit_forest, ForestHyper, MaxFeatures};

const THREADS_VAR: &str = "PEANUT_THREADS";

#[derive(Parser)]
#[command(name = "peanut", version, about = "Missing-data imputation benchmark for daily economic series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and merge the configured tracker CSV sources into a frame document.
    Ingest {
        #[arg(long)]
        config: PathBuf,
        /// Frame document to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print descriptive statistics of every column.
    Describe {
        /// Frame document (.json) or run config (.toml).
        input: PathBuf,
        /// Also print per-column missingness.
        #[arg(long)]
        missingness: bool,
        /// Export the observed points of this column as `date,value` CSV.
        #[arg(long, value_name = "COLUMN")]
        scatter: Option<String>,
        /// Scatter destination; stdout when absent.
        #[arg(long, requires = "scatter")]
        out: Option<PathBuf>,
    },
    /// Fill the gaps of one column and write a hybrid frame document.
    Impute {
        input: PathBuf,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// Column to fill; defaults to the frame's target column.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = DEFAULT_MC_DRAWS)]
        draws: usize,
        /// Required by `mc` and `model`.
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated feature columns for `model`; defaults to all feature columns.
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<String>>,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit OLS with intercept on the complete rows of the named columns.
    FitOls {
        input: PathBuf,
        #[arg(long)]
        y: String,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<String>,
        /// Also write every fit field as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Train a random forest on the complete rows of the named columns.
    TrainForest {
        input: PathBuf,
        #[arg(long)]
        y: String,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<String>,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long)]
        seed: u64,
        /// Model document to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the five-model benchmark described by a config file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a ground-truth scenario and its weekly-masked counterpart.
    Simulate {
        #[arg(long, default_value_t = 1253)]
        n_days: usize,
        /// `linear:a,b`, `tanh:a,b,c,center` or `sine:a,b,c`; the default is the tanh scenario.
        #[arg(long)]
        relation: Option<String>,
        #[arg(long, default_value_t = 7)]
        weekly_period: usize,
        #[arg(long)]
        target_noise_sd: Option<f64>,
        #[arg(long)]
        seed: u64,
        /// Directory receiving `full.json` and `masked.json`.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum StrategyArg {
    Passthrough,
    Drop,
    Mean,
    Mc,
    Model,
}

#[derive(Args)]
struct ForestArgs {
    #[arg(long, default_value_t = 100)]
    n_trees: usize,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 1)]
    min_samples_leaf: usize,
    #[arg(long, default_value_t = 2)]
    min_samples_split: usize,
    /// `all`, `sqrt` or a count.
    #[arg(long, default_value = "all")]
    max_features: String,
    /// Grow every tree on the full training set.
    #[arg(long)]
    no_bootstrap: bool,
}

enum Failure {
    Usage(String),
    Data(peanut::Error),
}

impl From<peanut::Error> for Failure {
    fn from(e: peanut::Error) -> Self {
        Failure::Data(e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

impl ForestArgs {
    fn hyper(&self, seed: u64) -> CliResult<ForestHyper> {
        let hyper = ForestHyper {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            min_samples_split: self.min_samples_split,
            max_features: self.max_features.parse::<MaxFeatures>().map_err(|e| Failure::Usage(e.to_string()))?,
            bootstrap: !self.no_bootstrap,
            seed,
        };
        hyper.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(hyper)
    }
}

fn load_input(path: &Path) -> CliResult<ObservationFrame> {
    if path.extension().is_some_and(|e| e == "toml") {
        Ok(load_config(path)?.load_frame()?)
    } else {
        Ok(read_frame(path)?)
    }
}

fn write_file(path: &Path, text: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Data(peanut::Error::Io { path: path.display().to_string(), message: e.to_string() })
}

fn dense_design(frame: &ObservationFrame, y: &str, x: &[String]) -> CliResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut cols = vec![y];
    cols.extend(x.iter().map(String::as_str));
    let complete = complete_rows(frame, &cols)?;
    let xs: Vec<&str> = x.iter().map(String::as_str).collect();
    let rows = complete.dense_rows(&xs)?;
    let targets = complete.dense_rows(&[y])?.into_iter().map(|r| r[0]).collect();
    Ok((rows, targets))
}

fn target_column(frame: &ObservationFrame, explicit: Option<String>) -> CliResult<String> {
    if let Some(t) = explicit {
        return Ok(t);
    }
    match frame.columns_with_role(ColumnRole::Target).as_slice() {
        [one] => Ok(one.clone()),
        _ => Err(Failure::Usage("--target is required: the frame has no unique target column".into())),
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Ingest { config, out } => {
            let frame = load_config(&config)?.load_frame()?;
            write_file(&out, &FrameDocument::from(&frame).to_json())?;
            print!("{}", missingness_summary(&frame).render());
        }
        Command::Describe { input, missingness, scatter, out } => {
            let frame = load_input(&input)?;
            match scatter {
                Some(column) => {
                    let csv = scatter_csv(&scatter_export(&frame, &column)?, &column);
                    match out {
                        Some(path) => write_file(&path, &csv)?,
                        None => print!("{csv}"),
                    }
                }
                None => {
                    print!("{}", descriptive_stats(&frame).render());
                    if missingness {
                        print!("\n{}", missingness_summary(&frame).render());
                    }
                }
            }
        }
        Command::Impute { input, strategy, target, draws, seed, features, forest, out } => {
            let frame = load_input(&input)?;
            let target = target_column(&frame, target)?;
            let need_seed =
                || seed.ok_or_else(|| Failure::Usage("--seed is required for randomized strategies".into()));
            let strategy = match strategy {
                StrategyArg::Passthrough => ImputationStrategy::Passthrough,
                StrategyArg::Drop => ImputationStrategy::DropMissing,
                StrategyArg::Mean => ImputationStrategy::GlobalMean,
                StrategyArg::Mc => ImputationStrategy::MonteCarlo { draws, seed: need_seed()? },
                StrategyArg::Model => {
                    let seed = need_seed()?;
                    let features = features.unwrap_or_else(|| {
                        frame.columns_with_role(ColumnRole::Feature).into_iter().filter(|c| *c != target).collect()
                    });
                    ImputationStrategy::ModelBased { hyper: forest.hyper(seed)?, features, seed }
                }
            };
            let hybrid = impute(&frame, &target, &strategy)?;
            write_file(&out, &FrameDocument::from(&hybrid).to_json())?;
            println!(
                "strategy={} rows={} synthetic={} unfilled={}",
                strategy.name(),
                hybrid.frame.n_rows(),
                hybrid.synthetic_count(),
                hybrid.unfilled_rows().len()
            );
        }
        Command::FitOls { input, y, x, json } => {
            let frame = load_input(&input)?;
            let (rows, targets) = dense_design(&frame, &y, &x)?;
            let fit = fit_ols(&rows, &targets)?;
            let mut names = vec!["const"];
            names.extend(x.iter().map(String::as_str));
            print!("{}", render_ols_table(&fit, &names, &y)?);
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&fit).expect("fits always serialize") + "\n";
                write_file(&path, &text)?;
            }
        }
        Command::TrainForest { input, y, x, forest, seed, out } => {
            let frame = load_input(&input)?;
            let (rows, targets) = dense_design(&frame, &y, &x)?;
            let model = fit_forest(&rows, &targets, &forest.hyper(seed)?)?.with_feature_names(x.clone());
            write_file(&out, &model.to_json())?;
            let fitted = model.predict(&rows)?;
            let train = peanut::evaluate::metrics(&targets, &fitted)?;
            let depth = model.trees.iter().map(|t| t.depth()).max().unwrap_or(0);
            println!(
                "trees={} rows={} max_depth={} train_mse={:.6} train_r2={}",
                model.trees.len(),
                rows.len(),
                depth,
                train.mse,
                train.r2.map_or("NA".into(), |r| format!("{r:.4}"))
            );
        }
        Command::Bench { config, folds, seed, out } => {
            let overrides = Overrides { seed, folds, output_dir: out };
            let config = load_config_with(&config, &overrides)?;
            let frame = config.load_frame()?;
            let spec = config.bench_spec(&frame)?;
            let configs = config.model_configs(&frame, &spec);
            let report = peanut::run_benchmark(&frame, &configs, &spec);
            let dir = &config.output_dir;
            let text = report.render();
            write_file(&dir.join("report.txt"), &text)?;
            write_file(&dir.join("report.json"), &report.to_json())?;
            for m in &report.models {
                let table = match &m.ols {
                    peanut::evaluate::Outcome::Value(s) => s.table.clone(),
                    peanut::evaluate::Outcome::Na { na } => format!("Model {}: NA ({na})\n", m.id),
                };
                write_file(&dir.join(format!("model{}_ols.txt", m.id)), &table)?;
            }
            print!("{text}");
        }
        Command::Simulate { n_days, relation, weekly_period, target_noise_sd, seed, out } => {
            let defaults = SimulationSpec::default();
            let relation = match relation {
                Some(r) => r.parse::<Relation>().map_err(|e| Failure::Usage(e.to_string()))?,
                None => defaults.relation,
            };
            let spec = SimulationSpec {
                n_days,
                relation,
                weekly_period,
                target_noise_sd: target_noise_sd.unwrap_or(defaults.target_noise_sd),
                seed,
                ..defaults
            };
            let truth = generate(&spec)?;
            write_file(&out.join("full.json"), &FrameDocument::from(&truth.full).to_json())?;
            write_file(&out.join("masked.json"), &FrameDocument::from(&truth.masked).to_json())?;
            let observed = truth.masked.column(peanut::simulate::TARGET_COLUMN)?.observed_count();
            println!("rows={} observed_target={observed}", truth.full.n_rows());
        }
    }
    Ok(())
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn configure_threads() -> CliResult {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("{THREADS_VAR} must be a non-negative integer, got `{value}`")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot configure {n} threads: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or_default();
            eprintln!("error[usage]: {}", one_line(first.trim_start_matches("error:")));
            eprint!("{}", rendered.lines().skip(1).map(|l| format!("{l}\n")).collect::<String>());
            return ExitCode::from(1);
        }
    };
    match configure_threads().and_then(|_| run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error[usage]: {}", one_line(&msg));
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error[{}]: {}", e.kind(), one_line(&e.to_string()));
            ExitCode::from(2)
        }
    }
}
