use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use frugal_al::active::Strategy;
use frugal_al::display::GammaMode;
use frugal_al::error::Error;
use frugal_al::experiment::{self, DataSource, ExperimentConfig};
use frugal_al::net::{certify, LatentModel};
use frugal_al::numerics::SeededRng;
use frugal_al::skeleton::{save_dataset, synth_sequences, SynthSpec};

#[derive(Parser)]
#[command(name = "frugal-al", about = "Label-frugal active learning by exemplar design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid from a JSON config (CLI flags override file
    /// fields, which override defaults)
    Run(RunArgs),
    /// Aggregate per-round record files into a long-format CSV
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the Lipschitz certificate of a model checkpoint
    Certify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Synthesize a dataset file in the canonical JSON-lines format
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// output directory override (default also via FRUGAL_AL_OUT)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long = "chunks")]
    chunks: Option<usize>,
    #[arg(long = "strategies", value_delimiter = ',')]
    strategies: Option<Vec<Strategy>>,
    #[arg(long = "rates", value_delimiter = ',')]
    rates: Option<Vec<f64>>,
    #[arg(long = "seeds", value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long = "display.K")]
    display_k: Option<usize>,
    #[arg(long = "display.tol")]
    display_tol: Option<f64>,
    #[arg(long = "display.max-iters")]
    display_max_iters: Option<usize>,
    #[arg(long = "display.sigma-ratio")]
    sigma_ratio: Option<f64>,
    /// "adaptive" or "fixed:<value>"
    #[arg(long = "display.gamma-mode")]
    gamma_mode: Option<String>,
    #[arg(long = "net.depth")]
    net_depth: Option<usize>,
    #[arg(long = "net.u")]
    net_u: Option<f64>,
    #[arg(long = "net.l")]
    net_l: Option<f64>,
    /// orthonormality penalty weight (default 1/p)
    #[arg(long = "net.lambda")]
    net_lambda: Option<f64>,
    #[arg(long = "train.epochs")]
    train_epochs: Option<usize>,
    #[arg(long = "train.batch")]
    train_batch: Option<usize>,
    #[arg(long = "train.lr0")]
    train_lr0: Option<f64>,
    #[arg(long = "train.momentum")]
    train_momentum: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 8)]
    classes: usize,
    #[arg(long = "per-class", default_value_t = 30)]
    per_class: usize,
    #[arg(long = "test-per-class", default_value_t = 0)]
    test_per_class: usize,
    #[arg(long, default_value_t = 5)]
    joints: usize,
    #[arg(long, default_value_t = 16)]
    frames: usize,
    #[arg(long, default_value_t = 0.3)]
    noise: f64,
    #[arg(long, default_value_t = 4)]
    chunks: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &RunArgs) -> Result<(), Error> {
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    } else if let Ok(env_out) = std::env::var("FRUGAL_AL_OUT") {
        if cfg.out_dir.as_os_str().is_empty() {
            cfg.out_dir = PathBuf::from(env_out);
        }
    }
    if let Some(data) = &args.data {
        cfg.data = DataSource::Path(data.clone());
    }
    if let Some(jobs) = args.jobs {
        cfg.jobs = jobs.max(1);
    }
    if let Some(chunks) = args.chunks {
        cfg.chunks = chunks;
    }
    if let Some(s) = &args.strategies {
        cfg.strategies = s.clone();
    }
    if let Some(r) = &args.rates {
        cfg.rates = r.clone();
    }
    if let Some(s) = &args.seeds {
        cfg.seeds = s.clone();
    }
    if let Some(v) = args.display_k {
        cfg.params.display_k = v;
    }
    if let Some(v) = args.display_tol {
        cfg.params.display_tol = v;
    }
    if let Some(v) = args.display_max_iters {
        cfg.params.display_max_iters = v;
    }
    if let Some(v) = args.sigma_ratio {
        cfg.params.sigma_ratio = v;
    }
    if let Some(mode) = &args.gamma_mode {
        cfg.params.gamma = parse_gamma_mode(mode)?;
    }
    if let Some(v) = args.net_depth {
        cfg.params.net_depth = v;
    }
    if let Some(v) = args.net_u {
        cfg.params.activation.u = v;
    }
    if let Some(v) = args.net_l {
        cfg.params.activation.l = v;
    }
    if let Some(v) = args.net_lambda {
        cfg.params.lambda = Some(v);
    }
    if let Some(v) = args.train_epochs {
        cfg.params.train.epochs = v;
    }
    if let Some(v) = args.train_batch {
        cfg.params.train.batch = v;
    }
    if let Some(v) = args.train_lr0 {
        cfg.params.train.lr0 = v;
    }
    if let Some(v) = args.train_momentum {
        cfg.params.train.momentum = v;
    }
    Ok(())
}

fn parse_gamma_mode(s: &str) -> Result<GammaMode, Error> {
    if s == "adaptive" {
        return Ok(GammaMode::Adaptive);
    }
    if let Some(rest) = s.strip_prefix("fixed:") {
        let v: f64 = rest
            .parse()
            .map_err(|_| Error::Config(format!("bad fixed gamma value '{rest}'")))?;
        return Ok(GammaMode::Fixed(v));
    }
    Err(Error::Config(format!(
        "gamma mode must be 'adaptive' or 'fixed:<value>', got '{s}'"
    )))
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Parameter(_) => 1,
        Error::Io(_) | Error::Json(_) | Error::Format { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Run(args) => {
            let mut cfg = ExperimentConfig::load(&args.config)?;
            apply_overrides(&mut cfg, &args)?;
            std::fs::create_dir_all(&cfg.out_dir)?;
            let outcome = experiment::run_grid(&cfg)?;
            print!("{}", outcome.table.to_pretty());
            if !outcome.failed_cells.is_empty() {
                for f in &outcome.failed_cells {
                    eprintln!("failed cell: {f}");
                }
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { records, out } => {
            let csv = experiment::report(&records)?;
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify { model, samples, seed } => {
            let model = LatentModel::load(&model)?;
            let cert = certify(&model.stack, &mut SeededRng::new(seed), samples)?;
            println!(
                "K_bound={:.6} K_emp={:.6} M_bound={:.6} M_emp={:.6} ortho_residual={:.3e} samples={} ok={}",
                cert.k_bound, cert.k_emp, cert.m_bound, cert.m_emp, cert.ortho_residual,
                cert.samples, cert.ok()
            );
            Ok(if cert.ok() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Synth(args) => {
            let spec = SynthSpec {
                classes: args.classes,
                per_class: args.per_class,
                test_per_class: args.test_per_class,
                joints: args.joints,
                frames: args.frames,
                noise: args.noise,
                chunks: args.chunks,
            };
            let seqs = synth_sequences(&spec, &mut SeededRng::new(args.seed));
            save_dataset(&args.out, &seqs)?;
            println!("wrote {} sequences to {}", seqs.len(), args.out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
