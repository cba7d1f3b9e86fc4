use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hfl_core::experiment::{
    cmd_compare, cmd_curves, curve_run_name, load_prepared, prepare, run_dirs, run_experiment, write_run,
    ExperimentConfig, ExperimentError, Mode,
};
use log::info;

#[derive(Parser)]
#[command(name = "hfl", version, about = "Hierarchical federated learning experiments for network anomaly detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load or generate data, split, encode and partition it across clients.
    Preprocess(Overrides),
    /// Train in central, individual or hfl mode on preprocessed data.
    Train(Overrides),
    /// Tabulate finished runs from their manifest.json files.
    Compare {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
        /// Also write the table as CSV.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Turn history CSVs into one long-format learning-curve CSV.
    Curves {
        #[arg(required = true)]
        histories: Vec<PathBuf>,
        /// Write to a file instead of stdout.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long)]
    mode: Option<Mode>,
    #[arg(long, value_name = "N")]
    clients: Option<usize>,
    #[arg(long, value_name = "N")]
    edges: Option<usize>,
    #[arg(long, value_name = "N")]
    itrs: Option<usize>,
    #[arg(long, value_name = "SEED")]
    seed_data: Option<u64>,
    #[arg(long, value_name = "SEED")]
    seed_model: Option<u64>,
    #[arg(long, value_name = "SEED")]
    seed_shuffle: Option<u64>,
    /// Prepared-data directory for preprocess, run directory for train.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl Overrides {
    fn load(&self) -> Result<ExperimentConfig, ExperimentError> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(mode) = self.mode {
            cfg.mode = mode;
        }
        if let Some(n) = self.clients {
            cfg.n_clients = n;
            if let hfl_core::experiment::DataSource::Synthetic(spec) = &mut cfg.source {
                if let Some(skew) = &mut spec.skew {
                    skew.n_clients = n;
                }
            }
        }
        if let Some(n) = self.edges {
            cfg.n_edges = n;
        }
        if let Some(n) = self.itrs {
            cfg.itrs = n;
        }
        if let Some(s) = self.seed_data {
            cfg.seeds.data = s;
        }
        if let Some(s) = self.seed_model {
            cfg.seeds.model = s;
        }
        if let Some(s) = self.seed_shuffle {
            cfg.seeds.shuffle = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn threads_from_env() -> Result<Option<usize>, ExperimentError> {
    match std::env::var("HFL_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(ExperimentError::Config(format!("HFL_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn preprocess(args: &Overrides) -> Result<(), ExperimentError> {
    let mut cfg = args.load()?;
    if let Some(out) = &args.out {
        cfg.data_dir = out.clone();
    }
    let prepared = prepare(&cfg)?;
    prepared.persist(&cfg.data_dir)?;
    let m = &prepared.manifest;
    println!(
        "{} rows → {} train / {} test; {} shards × {} rows ({} dropped); written to {}",
        m.total_rows,
        m.train_rows,
        m.test_rows,
        m.shards.len(),
        m.shards.first().map_or(0, |s| s.rows),
        m.partition_dropped,
        cfg.data_dir.display()
    );
    Ok(())
}

fn train(args: &Overrides) -> Result<(), ExperimentError> {
    let mut cfg = args.load()?;
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    let threads = threads_from_env()?;
    if !cfg.data_dir.join("split_manifest.json").exists() {
        return Err(ExperimentError::Io {
            path: cfg.data_dir.clone(),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "no preprocessed data here; run `hfl preprocess` first",
            ),
        });
    }
    let prepared = load_prepared(&cfg.data_dir)?;
    info!("training {:?} on {} clients", cfg.mode, cfg.n_clients);
    let runs = run_experiment(&cfg, &prepared, threads)?;
    for (dir, run) in run_dirs(&cfg.out_dir, cfg.mode, runs.len()).iter().zip(&runs) {
        write_run(dir, run)?;
        let m = &run.manifest;
        println!(
            "{}: accuracy {:.2}%, f1 {:.2}%, {} rounds (best {}), {:.2}s → {}",
            m.label,
            m.metrics.accuracy * 100.0,
            m.metrics.f1 * 100.0,
            m.rounds_run,
            m.best_round,
            m.train_seconds,
            dir.display()
        );
    }
    Ok(())
}

fn write_output(path: &Path, text: &str) -> Result<(), ExperimentError> {
    fs::write(path, text).map_err(|e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Preprocess(args) => preprocess(&args),
        Command::Train(args) => train(&args),
        Command::Compare { manifests, csv } => {
            let table = cmd_compare(&manifests)?;
            print!("{}", table.to_text());
            if let Some(path) = csv {
                write_output(&path, &table.to_csv())?;
            }
            Ok(())
        }
        Command::Curves { histories, out } => {
            let named: Vec<(String, PathBuf)> = histories.into_iter().map(|p| (curve_run_name(&p), p)).collect();
            let csv = cmd_curves(&named)?;
            match out {
                Some(path) => write_output(&path, &csv),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
