use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use binaural_doa::codec::Topology;
use binaural_doa::pipeline::{self, DirLock, Estimator, PipelineConfig};

#[derive(Parser)]
#[command(
    version,
    about = "Binaural BRIR banks, datasets, codec topologies and DOA evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Pipeline configuration (TOML or JSON).
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set dataset.n_segments=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<PipelineConfig> {
        PipelineConfig::load(self.config.as_deref(), &self.overrides)
            .context("loading configuration")
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorKind {
    SrpPhat,
    Scores,
}

#[derive(Subcommand)]
enum Command {
    /// Render the BRIR bank for the configured rooms, poses and distances.
    BuildBrirs(ConfigArgs),
    /// Render a labelled dataset from an existing BRIR bank.
    GenDataset(ConfigArgs),
    /// Pass a dataset through a codec topology into a new directory.
    Encode {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// none, encode-3, encode-3-left, encode-3-right or encode-6.
        /// Defaults to the configured topology.
        #[arg(long)]
        topology: Option<Topology>,
        /// Codec bitrate in bit/s. Defaults to the configured bitrate.
        #[arg(long)]
        bitrate: Option<u32>,
    },
    /// Frame accuracy of SRP-PHAT or of precomputed scores on a dataset.
    Eval {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "srp-phat")]
        estimator: EstimatorKind,
        /// Directory of `<segment id>.scores` files (with `--estimator scores`).
        #[arg(long)]
        scores: Option<PathBuf>,
        /// Tolerance in sectors; repeatable. Defaults to the configured list.
        #[arg(long)]
        tolerance: Vec<usize>,
        /// Output prefix; writes `<out>.csv` and `<out>.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Merge JSON evaluation reports into one table.
    Report {
        /// Output prefix; writes `<out>.csv` and `<out>.json`.
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Write the configured HRIR set as WAV files plus a manifest.
    SynthHrirs {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the network input features of every segment.
    Features {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    s.into()
}

fn write_report(report: &binaural_doa::doa::EvalReport, out: &Path) -> Result<()> {
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    report.write_csv(&with_ext(out, "csv"))?;
    report.write_json(&with_ext(out, "json"))?;
    info!(
        "wrote {} rows to {}.{{csv,json}}",
        report.rows.len(),
        out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildBrirs(args) => {
            pipeline::build_brirs(&args.load()?)?;
        }
        Command::GenDataset(args) => {
            pipeline::gen_dataset(&args.load()?)?;
        }
        Command::Encode {
            config,
            input,
            output,
            topology,
            bitrate,
        } => {
            let mut config = config.load()?;
            if let Some(b) = bitrate {
                config.codec.bitrate_bps = b;
            }
            let topology = topology.unwrap_or(config.topology);
            pipeline::encode_dataset(&input, &output, topology, &config.codec)?;
        }
        Command::Eval {
            config,
            dataset,
            estimator,
            scores,
            tolerance,
            out,
        } => {
            let mut config = config.load()?;
            if !tolerance.is_empty() {
                config.eval.tolerances = tolerance;
            }
            let estimator = match (estimator, scores) {
                (EstimatorKind::SrpPhat, None) => Estimator::SrpPhat,
                (EstimatorKind::Scores, Some(dir)) => Estimator::Scores(dir),
                (EstimatorKind::SrpPhat, Some(_)) => bail!("--scores needs --estimator scores"),
                (EstimatorKind::Scores, None) => bail!("--estimator scores needs --scores <dir>"),
            };
            let report = pipeline::eval_dataset(&dataset, &estimator, &config)?;
            write_report(&report, &out)?;
        }
        Command::Report { out, inputs } => {
            write_report(&pipeline::report(&inputs)?, &out)?;
        }
        Command::SynthHrirs { config, out } => {
            let hrirs = config.load()?.hrirs.load()?;
            let _lock = DirLock::acquire(&out)?;
            let manifest = hrirs.save(&out)?;
            info!("wrote {} directions to {}", hrirs.len(), manifest.display());
        }
        Command::Features { dataset, out } => {
            let index = pipeline::write_features(&dataset, &out)?;
            info!(
                "wrote features for {} segments to {}",
                index.entries.len(),
                out.display()
            );
        }
    }
    Ok(())
}

fn main() -> std::process::ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
