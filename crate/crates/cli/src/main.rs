use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ephad::calibration::AdaConfig;
use ephad::experiment::{
    fuse_files, fused_csv, run_tabular, run_toy, with_threads, write_fused_scores, write_grid,
    BetaChoice, ExperimentConfig, FuseFilesRequest, Report, SweepAxis,
};
use ephad::{Error, Normalization, Orientation};

/// Evidence-based post-hoc adjustment of anomaly detectors.
#[derive(Debug, Parser)]
#[command(name = "ephad", version, about)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON experiment config; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Two-dimensional toy comparison of blind, refine and fused detectors.
    Toy2d(RunArgs),
    /// Tabular benchmark over the configured datasets.
    Run(RunArgs),
    /// Sweep one axis (toy when no datasets are configured).
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_parser = ["beta", "epsilon", "test-fraction"])]
        axis: String,
    },
    /// Fuse two precomputed `index,score` files.
    FuseFiles(FuseArgs),
}

#[derive(Debug, Args)]
struct FuseArgs {
    #[arg(long)]
    base: PathBuf,
    #[arg(long)]
    evidence: PathBuf,
    #[arg(long, default_value = "anomaly-high")]
    base_orientation: Orientation,
    #[arg(long, default_value = "anomaly-high")]
    evidence_orientation: Orientation,
    /// `index,label` file; prints AUROC when given.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long, conflicts_with = "ada")]
    beta: Option<f64>,
    /// Use the entropy-calibrated temperature.
    #[arg(long)]
    ada: bool,
    #[arg(long, default_value = "zscore")]
    normalization: Normalization,
    #[arg(long, default_value_t = 1e-12)]
    delta: f64,
    /// Directory for `fused_scores.csv`; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig, command: &str) -> PathBuf {
    cfg.out_dir
        .clone()
        .unwrap_or_else(|| Path::new("results").join(command))
}

fn print_summary(report: &Report, dir: &Path) {
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(
        stdout,
        "{:<10} {:<10} {:<10} {:<14} {:<18} {:>8} {:>8} {:>6} {:>8} {:>8}",
        "dataset",
        "detector",
        "evidence",
        "method",
        "axis",
        "beta",
        "epsilon",
        "seeds",
        "auroc",
        "se"
    );
    for a in &report.aggregates {
        let k = &a.key;
        let _ = writeln!(
            stdout,
            "{:<10} {:<10} {:<10} {:<14} {:<18} {:>8} {:>8} {:>6} {:>8.4} {:>8.4}",
            k.dataset,
            k.detector,
            k.evidence,
            k.method.as_str(),
            k.axis.as_deref().unwrap_or("-"),
            k.beta,
            k.epsilon,
            a.n_seeds,
            a.mean,
            a.se
        );
    }
    let _ = writeln!(stdout, "wrote {}", dir.display());
}

fn toy2d(args: &RunArgs, threads: Option<usize>) -> Result<(), Error> {
    let cfg = load_config(args)?;
    let outcome = with_threads(threads, || run_toy(&cfg, None))??;
    let dir = out_dir(&cfg, "toy2d");
    let report = Report::new("toy2d", None, &cfg, outcome.cells);
    report.write(&dir)?;
    if let Some(grid) = &outcome.grid {
        write_grid(&dir.join("grid.csv"), grid)?;
    }
    print_summary(&report, &dir);
    Ok(())
}

fn run(args: &RunArgs, threads: Option<usize>) -> Result<(), Error> {
    let cfg = load_config(args)?;
    if cfg.datasets.is_empty() {
        return Err(Error::Config(
            "no datasets configured; use `toy2d` for the synthetic example".into(),
        ));
    }
    let cells = with_threads(threads, || run_tabular(&cfg, None))??;
    let dir = out_dir(&cfg, "run");
    let report = Report::new("run", None, &cfg, cells);
    report.write(&dir)?;
    print_summary(&report, &dir);
    Ok(())
}

fn sweep(args: &RunArgs, axis: &str, threads: Option<usize>) -> Result<(), Error> {
    let cfg = load_config(args)?;
    let axis: SweepAxis = axis.parse()?;
    let cells = if cfg.datasets.is_empty() {
        with_threads(threads, || run_toy(&cfg, Some(axis)))??.cells
    } else {
        with_threads(threads, || run_tabular(&cfg, Some(axis)))??
    };
    let dir = out_dir(&cfg, "sweep");
    let report = Report::new("sweep", Some(axis.as_str()), &cfg, cells);
    report.write(&dir)?;
    print_summary(&report, &dir);
    Ok(())
}

fn fuse(args: &FuseArgs) -> Result<(), Error> {
    let beta = match (args.ada, args.beta) {
        (true, _) => BetaChoice::Adaptive,
        (false, Some(b)) => BetaChoice::Fixed(b),
        (false, None) => BetaChoice::Fixed(0.5),
    };
    let ada = AdaConfig { delta: args.delta };
    ada.validate()?;
    let fused = fuse_files(&FuseFilesRequest {
        base: args.base.clone(),
        base_orientation: args.base_orientation,
        evidence: args.evidence.clone(),
        evidence_orientation: args.evidence_orientation,
        labels: args.labels.clone(),
        beta,
        normalization: args.normalization,
        ada,
    })?;
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| Error::Io {
                path: dir.clone(),
                source,
            })?;
            let path = dir.join("fused_scores.csv");
            write_fused_scores(&path, &fused)?;
            println!("wrote {} (beta_used {})", path.display(), fused.beta_used);
            if let Some(auc) = fused.auroc {
                println!("auroc {auc:.6}");
            }
        }
        None => {
            print!("{}", fused_csv(&fused));
            if let Some(auc) = fused.auroc {
                eprintln!("auroc {auc:.6}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Toy2d(args) => toy2d(args, cli.threads),
        Command::Run(args) => run(args, cli.threads),
        Command::Sweep { run, axis } => sweep(run, axis, cli.threads),
        Command::FuseFiles(args) => fuse(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 3 })
        }
    }
}
