use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bitload::experiment::output::{allocation_files, channel_files, sweep_files, write_files};
use bitload::experiment::presets::{self, preset};
use bitload::experiment::run::resolve_profile;
use bitload::experiment::{
    base_point, run_allocation, run_sweep, sweep_points, ExperimentConfig, ExperimentError, Method,
};

#[derive(Parser)]
#[command(name = "bitload", version, about = "Robust bit-loading experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Allocate once at the config's base point (any sweep is ignored).
    Allocate(Common),
    /// Run every sweep point and write one row per point and method.
    Sweep(Common),
    /// Write the resolved channel SNR profile.
    ChannelGen(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment: fig2, fig3, fig4, fig6 or table1.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated: analytic, greedy_margin, greedy_ber, oracle.
    #[arg(long, value_delimiter = ',')]
    method: Option<Vec<String>>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
    beta: Option<u32>,
    #[arg(long)]
    rmax: Option<u32>,
}

impl Common {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf), ExperimentError> {
        let (mut cfg, base) = match (&self.config, &self.preset) {
            (Some(path), _) => (
                ExperimentConfig::from_file(path)?,
                path.parent().unwrap_or(Path::new(".")).to_path_buf(),
            ),
            (None, Some(name)) => (preset(name)?, PathBuf::from(".")),
            (None, None) => {
                return Err(ExperimentError::Config(format!(
                    "pass --config or --preset ({})",
                    presets::NAMES.join(", ")
                )))
            }
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(list) = &self.method {
            cfg.methods = list
                .iter()
                .map(|m| {
                    Method::parse(m.trim())
                        .ok_or_else(|| ExperimentError::Config(format!("unknown method `{m}`")))
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(beta) = self.beta {
            cfg.beta = beta;
            cfg.betas = None;
        }
        if let Some(r_max) = self.rmax {
            cfg.r_max = r_max;
        }
        cfg.validate()?;
        Ok((cfg, base))
    }

    fn jobs(&self) -> usize {
        self.jobs
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

fn run(command: Command) -> Result<(), ExperimentError> {
    match command {
        Command::Allocate(args) => {
            let (cfg, base) = args.load()?;
            let point = base_point(&cfg, &base)?;
            let result = run_allocation(&cfg, &point)?;
            write_files(&args.out, &allocation_files(&cfg, &result)?)
        }
        Command::Sweep(args) => {
            let (cfg, base) = args.load()?;
            let points = sweep_points(&cfg, &base)?;
            let results = run_sweep(&cfg, &points, args.jobs())?;
            write_files(&args.out, &sweep_files(&cfg, &results)?)
        }
        Command::ChannelGen(args) => {
            let (cfg, base) = args.load()?;
            let profile = resolve_profile(&cfg.channel.load(&base)?, cfg.seed)?;
            write_files(&args.out, &channel_files(&cfg, &profile)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bitload: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
