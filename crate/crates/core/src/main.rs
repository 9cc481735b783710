use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use annosel::dataio::{self, export::DatasetInfo, Manifest};
use annosel::harness::{aggregate, run_grid, NamedBatch};
use annosel::population::generate_batch;
use annosel::Result;

#[derive(Parser)]
#[command(name = "annosel", version, about = "Simulated annotator selection for active learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an annotator batch from a batch configuration.
    GenAnnotators {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every (batch, seed, mode) experiment of a configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated modes, e.g. test1,test3. Overrides the config.
        #[arg(long)]
        modes: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate exported runs from one or more result directories.
    Summarize {
        #[arg(long = "in", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write smoothed curve tables from a summary.
    PlotData {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = dataio::plot::DEFAULT_WINDOW)]
        window: usize,
    },
}

fn gen_annotators(config: &Path, out: &Path) -> Result<()> {
    let cfg = dataio::load_batch_config(config)?;
    let batch = generate_batch(&cfg)?;
    dataio::save_batch(out, &batch)?;
    eprintln!("wrote {} annotators to {}", batch.len(), out.display());
    Ok(())
}

fn run(config: &Path, modes: Option<&str>, out: &Path) -> Result<()> {
    let mut exp = dataio::load_config(config)?;
    if let Some(list) = modes {
        exp.modes = dataio::parse_modes(list)?;
    }
    let loaded = dataio::load_dataset(&exp.dataset)?;
    let data = &loaded.data;
    eprintln!(
        "dataset: {} rows ({} dropped), {} features, {} classes",
        data.n_rows(),
        loaded.dropped_rows,
        data.n_features(),
        data.n_classes()
    );
    let batches = exp
        .batch_files
        .iter()
        .enumerate()
        .map(|(i, p)| {
            Ok(NamedBatch {
                batch_id: i as u32,
                annotators: dataio::load_batch(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let results = run_grid(&exp.settings, data, &batches, &exp.modes, &exp.seeds)?;
    let summary = aggregate(&results)?;
    let manifest = Manifest::new(
        Some(exp.config_hash.clone()),
        Some(DatasetInfo {
            rows: data.n_rows(),
            features: data.n_features(),
            source_rows: loaded.source_rows,
            dropped_rows: loaded.dropped_rows,
            label_names: data.label_names.clone(),
        }),
    );
    dataio::export_results(out, &results, &summary, manifest)?;
    let plots = dataio::emit_plot_data(&summary, &out.join("plots"), exp.smoothing_window)?;
    dataio::extend_manifest(out, &plots)?;
    for (mode, s) in &summary.modes {
        eprintln!(
            "{mode}: correct {:.4}  accuracy {:.4}  f1 {:.4}  uncertainty {:.4}  ({} runs)",
            s.correct_rate, s.final_accuracy, s.final_f1, s.mean_uncertainty, s.n_runs
        );
    }
    eprintln!("results in {}", out.display());
    Ok(())
}

fn summarize(inputs: &[PathBuf], out: &Path) -> Result<()> {
    let mut results = Vec::new();
    for dir in inputs {
        results.extend(dataio::load_runs(dir)?);
    }
    let summary = aggregate(&results)?;
    let (hash, dataset) = match dataio::read_manifest(&inputs[0]) {
        Ok(m) => (m.config_hash, m.dataset),
        Err(_) => (None, None),
    };
    dataio::export_summary(out, &summary, Manifest::new(hash, dataset))?;
    eprintln!("aggregated {} runs into {}", results.len(), out.display());
    Ok(())
}

fn plot_data(input: &Path, out: &Path, window: usize) -> Result<()> {
    let summary = dataio::read_summary(&input.join(dataio::export::SUMMARY_FILE))?;
    let files = dataio::emit_plot_data(&summary, out, window)?;
    if out.join(dataio::export::MANIFEST_FILE).is_file() {
        dataio::extend_manifest(out, &files)?;
    }
    eprintln!("wrote {} plot tables to {}", files.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::GenAnnotators { config, out } => gen_annotators(config, out),
        Command::Run { config, modes, out } => run(config, modes.as_deref(), out),
        Command::Summarize { inputs, out } => summarize(inputs, out),
        Command::PlotData { input, out, window } => plot_data(input, out, *window),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
