//! Encoding-scenario benchmark: per scenario and repetition, fit the
//! pipeline, tune a boosted classifier by cross-validation, refit and score
//! f1 on the held-out validation partition.

mod report;
pub mod synthetic;

pub use report::{aggregate, emit_report, Aggregate, Band, Ranking, ReportFormat, REPORT_COLUMNS};

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gbdt::{
    boost_fit, derive_seed, f1_average_for, f1_score_with, tune, F1Average, HyperParams, SearchSpace, TuneConfig,
};
use crate::pipeline::{fit_pipeline, CategoricScenario, FitConfig, NumericScenario, Scenario};
use crate::table::RawTable;
use synthetic::SyntheticKind;

const REFIT_STREAM: u64 = 0x7265_6669;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DataSource {
    Csv { path: PathBuf },
    Synthetic { kind: String, rows: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    pub source: DataSource,
    pub label: String,
}

impl DatasetSpec {
    pub fn csv(path: impl Into<PathBuf>, label: impl Into<String>) -> Self {
        let path = path.into();
        let name = path
            .file_stem()
            .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
        Self {
            name,
            source: DataSource::Csv { path },
            label: label.into(),
        }
    }

    pub fn synthetic(kind: SyntheticKind, rows: usize, seed: u64) -> Self {
        Self {
            name: format!("synthetic_{kind}"),
            source: DataSource::Synthetic {
                kind: kind.name().to_string(),
                rows,
                seed,
            },
            label: synthetic::LABEL.to_string(),
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        let table = match &self.source {
            DataSource::Csv { path } => RawTable::read_csv_path(path)?,
            DataSource::Synthetic { kind, rows, seed } => kind.parse::<SyntheticKind>()?.generate(*rows, *seed),
        };
        Ok(Dataset {
            name: self.name.clone(),
            label: self.label.clone(),
            table,
        })
    }
}

/// Expands `--data` entries: CSV files, directories of CSVs (sorted), or
/// `synthetic:<kind>[:<rows>]`. Labels pair up with CSVs in order; a single
/// label applies to all of them.
pub fn parse_data_specs(entries: &[String], labels: &[String]) -> Result<Vec<DatasetSpec>> {
    let mut csvs: Vec<PathBuf> = Vec::new();
    let mut specs: Vec<(usize, DatasetSpec)> = Vec::new();
    for entry in entries {
        if let Some(rest) = entry.strip_prefix("synthetic:") {
            let (kind, rows) = match rest.split_once(':') {
                Some((k, r)) => {
                    let rows = r
                        .parse()
                        .map_err(|_| Error::InvalidArgument(format!("bad row count in {entry:?}")))?;
                    (k.parse::<SyntheticKind>()?, rows)
                }
                None => {
                    let k = rest.parse::<SyntheticKind>()?;
                    (k, k.default_rows())
                }
            };
            specs.push((usize::MAX, DatasetSpec::synthetic(kind, rows, 0)));
            continue;
        }
        let path = Path::new(entry);
        if path.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(path)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort();
            for p in found {
                specs.push((csvs.len(), DatasetSpec::csv(&p, "")));
                csvs.push(p);
            }
        } else {
            specs.push((csvs.len(), DatasetSpec::csv(path, "")));
            csvs.push(path.to_path_buf());
        }
    }
    if !csvs.is_empty() && labels.len() != 1 && labels.len() != csvs.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels given for {} csv files",
            labels.len(),
            csvs.len()
        )));
    }
    Ok(specs
        .into_iter()
        .map(|(i, mut s)| {
            if i != usize::MAX {
                s.label = if labels.len() == 1 {
                    labels[0].clone()
                } else {
                    labels[i].clone()
                };
            }
            s
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub label: String,
    pub table: RawTable,
}

/// The benchmark's numeric sweep followed by its categoric sweep, with the
/// shared default scenario once.
pub fn all_scenarios() -> Vec<Scenario> {
    let mut out: Vec<Scenario> = NumericScenario::SWEEP.iter().map(|&n| Scenario::numeric(n)).collect();
    out.extend(
        CategoricScenario::SWEEP
            .iter()
            .filter(|&&c| c != CategoricScenario::Default)
            .map(|&c| Scenario::categoric(c)),
    );
    out
}

/// Parses `numeric:all`, `categoric:all`, `all` or scenario names, comma separated.
pub fn parse_scenarios(spec: &str) -> Result<Vec<Scenario>> {
    let mut out: Vec<Scenario> = Vec::new();
    let mut push = |s: Scenario| {
        if !out.contains(&s) {
            out.push(s);
        }
    };
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "all" => all_scenarios().into_iter().for_each(&mut push),
            "numeric:all" => NumericScenario::SWEEP.iter().for_each(|&n| push(Scenario::numeric(n))),
            "categoric:all" => CategoricScenario::SWEEP
                .iter()
                .for_each(|&c| push(Scenario::categoric(c))),
            name => push(name.parse()?),
        }
    }
    if out.is_empty() {
        return Err(Error::UnknownScenario(spec.to_string()));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub datasets: Vec<DatasetSpec>,
    pub scenarios: Vec<Scenario>,
    pub repetitions: usize,
    pub validation_fraction: f64,
    pub k: usize,
    pub patience: usize,
    pub max_trials: usize,
    pub seed: u64,
    pub space: SearchSpace,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            datasets: Vec::new(),
            scenarios: all_scenarios(),
            repetitions: 5,
            validation_fraction: 0.25,
            k: 5,
            patience: 50,
            max_trials: 200,
            seed: 0,
            space: SearchSpace::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions < 1 {
            return Err(Error::InvalidArgument("repetitions must be at least 1".into()));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction <= 0.5) {
            return Err(Error::InvalidFraction(self.validation_fraction));
        }
        if self.scenarios.is_empty() {
            return Err(Error::InvalidArgument("no scenarios selected".into()));
        }
        if self.k < 2 || self.patience < 1 || self.max_trials < 1 {
            return Err(Error::InvalidArgument(
                "k ≥ 2, patience ≥ 1 and max_trials ≥ 1 are required".into(),
            ));
        }
        self.space.validate()
    }

    pub fn tune_config(&self) -> TuneConfig {
        TuneConfig {
            k: self.k,
            patience: self.patience,
            max_trials: self.max_trials,
            space: self.space,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub dataset: String,
    pub scenario: String,
    pub repetition: usize,
    pub seed: u64,
    /// Wall time of the tuning loop only.
    pub tuning_seconds: f64,
    /// Pipeline fit plus encoding of both partitions.
    pub encoding_seconds: f64,
    pub validation_f1: f64,
    pub best_cv_f1: f64,
    pub trials: usize,
    pub encoded_column_count: usize,
    pub best_params: HyperParams,
}

/// Protocol settings echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub repetitions: usize,
    pub validation_fraction: f64,
    pub k: usize,
    pub patience: usize,
    pub max_trials: usize,
    pub base_seed: u64,
    pub space: SearchSpace,
    /// `binary` (positive class code 1) for two classes, `weighted` otherwise.
    pub f1_average: String,
    pub timing: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub os: String,
    pub arch: String,
    pub logical_cpus: usize,
    pub tool_version: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub protocol: Protocol,
    pub environment: Environment,
    pub rows: Vec<BenchRow>,
    pub aggregates: Vec<Aggregate>,
    pub rankings: Vec<Ranking>,
}

/// One (dataset, scenario, repetition) run with seed `base_seed + repetition`.
pub fn run_scenario(
    dataset: &Dataset,
    scenario: Scenario,
    config: &BenchConfig,
    repetition: usize,
) -> Result<BenchRow> {
    let seed = config.seed.wrapping_add(repetition as u64);
    let mut fit_config = FitConfig::new(dataset.label.clone(), scenario);
    fit_config.validation_fraction = config.validation_fraction;
    fit_config.seed = seed;

    let start = Instant::now();
    let fit = fit_pipeline(&dataset.table, &fit_config)?;
    let encoding_seconds = start.elapsed().as_secs_f64();

    let n_classes = fit.record.n_classes();
    if n_classes < 2 {
        return Err(Error::DegenerateLabel(n_classes));
    }
    // code 0 never occurs in the train partition; validation rows with an
    // unseen label map past the last class and can never be matched
    let train_labels: Vec<u32> = fit
        .train
        .labels
        .as_ref()
        .expect("train partition carries the label")
        .iter()
        .map(|&c| c - 1)
        .collect();
    let valid_labels: Vec<u32> = fit
        .validation
        .labels
        .as_ref()
        .expect("validation partition carries the label")
        .iter()
        .map(|&c| if c == 0 { n_classes as u32 } else { c - 1 })
        .collect();

    let tuned = tune(&fit.train.matrix, &train_labels, n_classes, &config.tune_config(), seed)?;
    let model = boost_fit(
        &fit.train.matrix,
        &train_labels,
        &tuned.best_params,
        derive_seed(seed, REFIT_STREAM),
    )?;
    let predicted = model.predict_classes(&fit.validation.matrix)?;
    let validation_f1 = f1_score_with(&predicted, &valid_labels, f1_average_for(n_classes))?;

    Ok(BenchRow {
        dataset: dataset.name.clone(),
        scenario: scenario.name(),
        repetition,
        seed,
        tuning_seconds: tuned.wall_time_seconds,
        encoding_seconds,
        validation_f1,
        best_cv_f1: tuned.best_cv_f1,
        trials: tuned.trials.len(),
        encoded_column_count: fit.train.column_names.len(),
        best_params: tuned.best_params,
    })
}

/// Runs every (dataset, scenario, repetition) in order on a single thread.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    run_bench_with_progress(config, |_| {})
}

pub fn run_bench_with_progress<F: FnMut(&BenchRow)>(config: &BenchConfig, mut progress: F) -> Result<BenchReport> {
    config.validate()?;
    if config.datasets.is_empty() {
        return Err(Error::InvalidArgument("no datasets given".into()));
    }
    let mut rows = Vec::new();
    for spec in &config.datasets {
        let dataset = spec.load()?;
        for &scenario in &config.scenarios {
            for rep in 0..config.repetitions {
                let row = run_scenario(&dataset, scenario, config, rep)?;
                progress(&row);
                rows.push(row);
            }
        }
    }
    Ok(build_report(config, rows))
}

pub fn protocol(config: &BenchConfig) -> Protocol {
    Protocol {
        repetitions: config.repetitions,
        validation_fraction: config.validation_fraction,
        k: config.k,
        patience: config.patience,
        max_trials: config.max_trials,
        base_seed: config.seed,
        space: config.space,
        f1_average: format!(
            "{} for 2 classes, {} otherwise",
            average_name(F1Average::Binary),
            average_name(F1Average::Weighted)
        ),
        timing: "sequential".to_string(),
    }
}

fn average_name(a: F1Average) -> &'static str {
    match a {
        F1Average::Binary => "binary",
        F1Average::Weighted => "weighted",
    }
}

pub fn build_report(config: &BenchConfig, rows: Vec<BenchRow>) -> BenchReport {
    let (aggregates, rankings) = aggregate(&rows);
    BenchReport {
        protocol: protocol(config),
        environment: Environment::current(),
        rows,
        aggregates,
        rankings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protocol_defaults() {
        let c = BenchConfig::default();
        assert_eq!(
            (c.repetitions, c.validation_fraction, c.k, c.patience, c.max_trials),
            (5, 0.25, 5, 50, 200)
        );
        assert_eq!(c.scenarios.len(), 11);
        assert_eq!(c.scenarios[0].name(), "default");
    }

    #[test]
    fn scenario_lists() {
        let both = parse_scenarios("numeric:all,categoric:all").unwrap();
        assert_eq!(both, all_scenarios());
        assert_eq!(parse_scenarios("onht, default").unwrap().len(), 2);
        assert!(parse_scenarios("bogus").is_err());
        assert!(parse_scenarios("").is_err());
    }

    #[test]
    fn data_specs() {
        let specs = parse_data_specs(
            &["synthetic:highcard:100".into(), "a.csv".into(), "b.csv".into()],
            &["y".into()],
        )
        .unwrap();
        assert_eq!(specs.len(), 3);
        assert_eq!(specs[0].label, "class");
        assert_eq!(specs[1].label, "y");
        assert_eq!(specs[2].name, "b");
        assert!(parse_data_specs(&["a.csv".into(), "b.csv".into()], &["y".into(), "z".into(), "w".into()]).is_err());
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = BenchConfig {
            repetitions: 0,
            ..BenchConfig::default()
        };
        assert!(c.validate().is_err());
        c.repetitions = 1;
        c.validation_fraction = 0.0;
        assert!(c.validate().is_err());
    }
}
