use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use tabmunge::bench::synthetic::SyntheticKind;
use tabmunge::bench::{
    emit_report, parse_data_specs, parse_scenarios, run_bench_with_progress, BenchConfig, ReportFormat,
};
use tabmunge::infill::InfillStrategy;
use tabmunge::pipeline::{
    apply_pipeline, drift_report, fit_pipeline, invert_pipeline, inverted_table, read_record_path, unknown_columns,
    write_record_path, EncodedTable, FitConfig, Scenario,
};
use tabmunge::table::RawTable;

#[derive(Parser)]
#[command(
    name = "tabmunge",
    version,
    about = "Tabular feature encoding and encoding benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a transform record on a training CSV and write the encoded train partition.
    Fit {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        label: String,
        #[arg(long, default_value = "default")]
        scenario: Scenario,
        #[arg(long = "valid-frac", default_value_t = 0.25)]
        valid_frac: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the encoded validation partition.
        #[arg(long = "valid-out")]
        valid_out: Option<PathBuf>,
        #[arg(long, default_value = "simple")]
        infill: InfillStrategy,
        /// Append a 0/1 column per feature marking infilled cells.
        #[arg(long)]
        indicators: bool,
    },
    /// Encode a CSV with a saved record.
    Apply {
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover raw feature values from an encoded CSV.
    Invert {
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        features: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print drift statistics of a CSV against the record's baseline as JSON.
    Drift {
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the encoding benchmark.
    Bench {
        /// CSV files, directories of CSVs, or synthetic:<highcard|skewed|separable>[:rows].
        #[arg(long, value_delimiter = ',', required = true)]
        data: Vec<String>,
        /// Label column per CSV, or one for all.
        #[arg(long, value_delimiter = ',', default_value = "class")]
        label: Vec<String>,
        #[arg(long, default_value = "numeric:all,categoric:all")]
        scenarios: String,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long = "valid-frac", default_value_t = 0.25)]
        valid_frac: f64,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 50)]
        patience: usize,
        #[arg(long = "max-trials", default_value_t = 200)]
        max_trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Suppress per-run progress lines on standard error.
        #[arg(long)]
        quiet: bool,
    },
    /// Write a synthetic benchmark dataset as CSV.
    Generate {
        #[arg(long)]
        kind: SyntheticKind,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn read_table(path: &PathBuf) -> Result<RawTable> {
    RawTable::read_csv_path(path).with_context(|| format!("reading {}", path.display()))
}

fn warn(message: &str) {
    eprintln!("warning: {message}");
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Fit {
            train,
            label,
            scenario,
            valid_frac,
            seed,
            record,
            out,
            valid_out,
            infill,
            indicators,
        } => {
            let table = read_table(&train)?;
            let mut config = FitConfig::new(label.clone(), scenario);
            config.validation_fraction = valid_frac;
            config.seed = seed;
            config.infill = infill;
            config.indicators = indicators;
            let fit = fit_pipeline(&table, &config)?;
            for w in &fit.warnings {
                warn(w);
            }
            write_record_path(&fit.record, &record)?;
            fit.train.write_csv(create(&out)?, &label)?;
            if let Some(path) = valid_out {
                fit.validation.write_csv(create(&path)?, &label)?;
            }
        }
        Command::Apply { record, input, out } => {
            let record = read_record_path(&record)?;
            let table = read_table(&input)?;
            for c in unknown_columns(&record, &table) {
                warn(&format!("ignoring unknown column `{c}`"));
            }
            apply_pipeline(&record, &table)?.write_csv(create(&out)?, &record.label.name)?;
        }
        Command::Invert {
            record,
            input,
            features,
            out,
        } => {
            let record = read_record_path(&record)?;
            let file = File::open(&input).with_context(|| format!("reading {}", input.display()))?;
            let encoded = EncodedTable::read_csv(file, &record)?;
            let names: Vec<&str> = features.iter().map(String::as_str).collect();
            let columns = invert_pipeline(&record, &encoded, &names)?;
            inverted_table(&columns)?.write_csv(create(&out)?)?;
        }
        Command::Drift { record, input } => {
            let record = read_record_path(&record)?;
            let report = drift_report(&record, &read_table(&input)?);
            let mut stdout = io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, &serde_json::to_value(&report)?)?;
            writeln!(stdout)?;
        }
        Command::Bench {
            data,
            label,
            scenarios,
            reps,
            valid_frac,
            k,
            patience,
            max_trials,
            seed,
            report,
            csv,
            quiet,
        } => {
            let config = BenchConfig {
                datasets: parse_data_specs(&data, &label)?,
                scenarios: parse_scenarios(&scenarios)?,
                repetitions: reps,
                validation_fraction: valid_frac,
                k,
                patience,
                max_trials,
                seed,
                ..BenchConfig::default()
            };
            let result = run_bench_with_progress(&config, |row| {
                if !quiet {
                    eprintln!(
                        "{} {} rep {}: f1 {:.4}, tuning {:.3}s, {} trials, {} columns",
                        row.dataset,
                        row.scenario,
                        row.repetition,
                        row.validation_f1,
                        row.tuning_seconds,
                        row.trials,
                        row.encoded_column_count
                    );
                }
            })?;
            let json = emit_report(&result, ReportFormat::Json)?;
            match report {
                Some(path) => create(&path)?.write_all(&json)?,
                None if csv.is_none() => io::stdout().lock().write_all(&json)?,
                None => {}
            }
            if let Some(path) = csv {
                create(&path)?.write_all(&emit_report(&result, ReportFormat::Csv)?)?;
            }
        }
        Command::Generate { kind, rows, seed, out } => {
            kind.generate(rows.unwrap_or(kind.default_rows()), seed)
                .write_csv(create(&out)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.downcast_ref::<tabmunge::error::Error>().map_or("error", error_kind);
            let payload = serde_json::json!({ "error": kind, "message": format!("{e:#}") });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}

fn error_kind(e: &tabmunge::error::Error) -> &'static str {
    use tabmunge::error::Error::*;
    match e {
        EmptyTable | DuplicateColumn(_) | EmptyColumnName | RaggedColumn { .. } => "invalid_table",
        ColumnNotFound(_) | LabelMissing(_) => "column_not_found",
        UnknownScenario(_) => "unknown_scenario",
        UnknownFormat(_) => "unknown_format",
        VersionMismatch { .. } => "version_mismatch",
        CorruptPayload(_) => "corrupt_payload",
        DegenerateLabel(_) => "degenerate_label",
        NoInvertibleLeg(_) | NotInvertible(_) => "not_invertible",
        Io(_) | Csv(_) => "io",
        _ => "invalid_input",
    }
}
