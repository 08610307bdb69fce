//! Command-line front end for network generation, wind synthesis, selection
//! and benchmarking.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sdaas_core::aero::AeroModel;
use sdaas_core::harness::{
    group_energy, grouped_csv, run_benchmark, run_experiment, timing_csv, with_threads,
    ExperimentConfig, GroupBy,
};
use sdaas_core::network::{gen_network_with, load_network_dir, save_network_dir};
use sdaas_core::selection::{detail_csv, report_csv, select, SelectionMode, Swarm};
use sdaas_core::wind::{synth_wind, write_wind_csv, SpeedDistribution};
use sdaas_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "sdaas",
    version,
    about = "Formation-aware selection of drone swarm delivery services"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic skyway network.
    GenNetwork {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Nearest neighbours joined per node.
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Synthesize per-segment wind for a network.
    GenWind {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        min_speed: f64,
        #[arg(long, default_value_t = 13.8)]
        max_speed: f64,
        /// Give every segment this wind speed instead of a uniform draw.
        #[arg(long)]
        constant_speed: Option<f64>,
    },
    /// Run fixed or adaptive selection over every segment.
    Select {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        wind: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write per-drone energy rows here.
        #[arg(long)]
        detail: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Time both policies against network size.
    Bench {
        /// Comma-separated node counts, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Group the selected services of both policies by distance or wind.
    Report {
        #[arg(long, value_enum)]
        group_by: GroupArg,
        #[arg(long)]
        bin_width: Option<f64>,
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long)]
        wind: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Full experiment: both policies, groupings and timings, written to a directory.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        wind_seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Formation calibration tables replacing the embedded ones.
    #[arg(long)]
    tables: Option<PathBuf>,
    #[arg(long)]
    drone_speed: Option<f64>,
    #[arg(long)]
    base_power: Option<f64>,
    #[arg(long)]
    battery_pct: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
}

impl ModelArgs {
    fn apply(&self, config: &mut ExperimentConfig) {
        if let Some(t) = &self.tables {
            config.tables = Some(t.clone());
        }
        if let Some(v) = self.drone_speed {
            config.aero.drone_speed_mps = v;
        }
        if let Some(p) = self.base_power {
            config.drone.base_power_w = p;
        }
        if let Some(b) = self.battery_pct {
            config.drone.battery_level_pct = b;
        }
        if self.threads.is_some() {
            config.threads = self.threads;
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Fixed,
    Adaptive,
}

#[derive(Clone, Copy, ValueEnum)]
enum GroupArg {
    Distance,
    Wind,
}

fn base_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::from_json_file(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn model_and_swarm(config: &ExperimentConfig) -> Result<(AeroModel, Swarm)> {
    config.validate()?;
    Ok((config.model()?, config.swarm()?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenNetwork {
            nodes,
            seed,
            out,
            k,
        } => {
            let network = gen_network_with(nodes, seed, k)?;
            save_network_dir(&network, &out)?;
            eprintln!(
                "{} nodes, {} segments -> {}",
                network.nodes().len(),
                network.segments().len(),
                out.display()
            );
        }
        Command::GenWind {
            network,
            seed,
            out,
            min_speed,
            max_speed,
            constant_speed,
        } => {
            let network = load_network_dir(&network)?;
            let dist = match constant_speed {
                Some(speed_mps) => SpeedDistribution::Constant { speed_mps },
                None => SpeedDistribution::Uniform {
                    min_mps: min_speed,
                    max_mps: max_speed,
                },
            };
            write_wind_csv(&out, &synth_wind(&network, seed, &dist)?)?;
        }
        Command::Select {
            mode,
            network,
            wind,
            out,
            detail,
            model,
        } => {
            let mut config = ExperimentConfig {
                network_dir: Some(network),
                wind_file: Some(wind),
                ..ExperimentConfig::default()
            };
            model.apply(&mut config);
            let (aero, swarm) = model_and_swarm(&config)?;
            let instance = config.instance()?;
            let mode = match mode {
                ModeArg::Fixed => SelectionMode::Fixed,
                ModeArg::Adaptive => SelectionMode::Adaptive,
            };
            let report = with_threads(config.threads, || {
                select(mode, instance.segments(), &swarm, &aero)
            })??;
            write(&out, &report_csv(&report))?;
            if let Some(path) = detail {
                write(&path, &detail_csv(&report))?;
            }
            eprintln!(
                "{mode}: {} of {} segments selected{}",
                report.selected_ids.len(),
                report.verdicts.len(),
                report
                    .fixed_formation
                    .map(|f| format!(" (formation {f})"))
                    .unwrap_or_default()
            );
        }
        Command::Bench {
            sizes,
            reps,
            out,
            seed,
            config,
            model,
        } => {
            let mut config = base_config(config.as_deref())?;
            model.apply(&mut config);
            if let Some(s) = sizes {
                config.bench_sizes = s;
            }
            if let Some(r) = reps {
                config.repetitions = r;
            }
            if let Some(s) = seed {
                config.network_seed = s;
                config.wind_seed = s;
            }
            let (aero, swarm) = model_and_swarm(&config)?;
            let rows = with_threads(config.threads, || {
                run_benchmark(
                    &config.bench_sizes,
                    config.repetitions,
                    config.network_seed,
                    config.wind_seed,
                    &config.speed_dist,
                    &swarm,
                    &aero,
                )
            })??;
            write(&out, &timing_csv(&rows))?;
        }
        Command::Report {
            group_by,
            bin_width,
            network,
            wind,
            out,
            config,
            model,
        } => {
            let mut config = base_config(config.as_deref())?;
            model.apply(&mut config);
            if network.is_some() {
                config.network_dir = network;
            }
            if wind.is_some() {
                config.wind_file = wind;
            }
            if let Some(w) = bin_width {
                config.distance_bin_m = w;
            }
            let (aero, swarm) = model_and_swarm(&config)?;
            let instance = config.instance()?;
            let group_by = match group_by {
                GroupArg::Distance => GroupBy::Distance,
                GroupArg::Wind => GroupBy::Wind,
            };
            let rows = with_threads(config.threads, || -> Result<_> {
                let mut rows = Vec::new();
                for mode in [SelectionMode::Fixed, SelectionMode::Adaptive] {
                    let report = select(mode, instance.segments(), &swarm, &aero)?;
                    rows.extend(group_energy(&report, group_by, config.distance_bin_m)?);
                }
                Ok(rows)
            })??;
            let body = grouped_csv(&rows);
            match out {
                Some(path) => write(&path, &body)?,
                None => print!("{body}"),
            }
        }
        Command::Run {
            config,
            out,
            nodes,
            seed,
            wind_seed,
            reps,
            sizes,
            threads,
        } => {
            let mut config = base_config(config.as_deref())?;
            if let Some(n) = nodes {
                config.node_count = n;
            }
            if let Some(s) = seed {
                config.network_seed = s;
            }
            if let Some(s) = wind_seed {
                config.wind_seed = s;
            }
            if let Some(r) = reps {
                config.repetitions = r;
            }
            if let Some(s) = sizes {
                config.bench_sizes = s;
            }
            if threads.is_some() {
                config.threads = threads;
            }
            let output = run_experiment(&config)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            output.write(&out)?;
            let d = &output.dominance;
            eprintln!(
                "fixed formation {}; fixed selected {}, adaptive selected {} of {} segments; \
                 adaptive strictly better on {}, worse on {}, per-drone regressions on {}",
                output
                    .fixed
                    .fixed_formation
                    .map(|f| f.to_string())
                    .unwrap_or_default(),
                output.fixed.selected_ids.len(),
                output.adaptive.selected_ids.len(),
                d.segments,
                d.strictly_better,
                d.swarm_violations.len(),
                d.per_drone_violations.len(),
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
