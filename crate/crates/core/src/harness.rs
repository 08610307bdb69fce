//! Experiment driver: builds the network and wind instance, runs both
//! selection policies on it, groups the selected services and times the
//! policies against network size.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::aero::{AeroModel, AeroModelConfig, FormationTable};
use crate::error::{Error, Result};
use crate::network::{gen_network, load_network_dir, save_network_dir, SkywayNetwork};
use crate::selection::{
    adaptive_select, compare_reports, detail_csv, fixed_select, report_csv, DominanceSummary,
    Drone, SelectionMode, SelectionReport, Swarm,
};
use crate::wind::{read_wind_csv, synth_wind, write_wind_csv, SpeedDistribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub node_count: usize,
    pub network_seed: u64,
    /// Load `nodes.csv` / `edges.csv` from here instead of generating.
    pub network_dir: Option<PathBuf>,
    pub wind_seed: u64,
    pub speed_dist: SpeedDistribution,
    /// Load the wind assignment from a CSV instead of synthesizing it.
    pub wind_file: Option<PathBuf>,
    pub drone: Drone,
    pub aero: AeroModelConfig,
    pub tables: Option<PathBuf>,
    pub distance_bin_m: f64,
    pub bench_sizes: Vec<usize>,
    pub repetitions: usize,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            node_count: 2732,
            network_seed: 42,
            network_dir: None,
            wind_seed: 42,
            speed_dist: SpeedDistribution::default(),
            wind_file: None,
            drone: Drone::default(),
            aero: AeroModelConfig::default(),
            tables: None,
            distance_bin_m: 200.0,
            bench_sizes: vec![500, 1000, 2732],
            repetitions: 5,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&body).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.distance_bin_m.is_finite() && self.distance_bin_m > 0.0) {
            return Err(Error::Argument(format!(
                "distance bin width must be positive, got {}",
                self.distance_bin_m
            )));
        }
        if self.bench_sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument(
                "benchmark sizes must be strictly increasing".into(),
            ));
        }
        if self.bench_sizes.iter().any(|&n| n < 2) {
            return Err(Error::Argument(
                "benchmark sizes must be at least 2 nodes".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::Argument("repetitions must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Argument("thread count must be at least 1".into()));
        }
        self.aero.validate()
    }

    pub fn model(&self) -> Result<AeroModel> {
        let table = match &self.tables {
            Some(path) => FormationTable::load(path)?,
            None => FormationTable::embedded().clone(),
        };
        AeroModel::new(table, self.aero)
    }

    pub fn swarm(&self) -> Result<Swarm> {
        Swarm::uniform(&self.drone, 0)
    }

    /// The network with wind attached, from files or generated from the seeds.
    pub fn instance(&self) -> Result<SkywayNetwork> {
        let network = match &self.network_dir {
            Some(dir) => load_network_dir(dir).map_err(|e| e.context("loading network"))?,
            None => gen_network(self.node_count, self.network_seed)?,
        };
        let wind = match &self.wind_file {
            Some(path) => read_wind_csv(path).map_err(|e| e.context("loading wind"))?,
            None => synth_wind(&network, self.wind_seed, &self.speed_dist)?,
        };
        network.with_wind(&wind)
    }
}

/// Runs `f` on a dedicated pool when a thread count is given.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    Distance,
    Wind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupedEnergyRow {
    /// Lower bin edge in meters for distance groups, Beaufort number for wind groups.
    pub group_key: String,
    pub mode: SelectionMode,
    /// Mean over selected segments of the swarm-mean aero energy, Wh.
    pub mean_aero_wh: f64,
    pub count: usize,
}

/// Groups the selected segments of `report` and averages their swarm-mean
/// aero energy. Rejected segments are left out; empty groups are not emitted.
pub fn group_energy(
    report: &SelectionReport,
    group_by: GroupBy,
    bin_width_m: f64,
) -> Result<Vec<GroupedEnergyRow>> {
    if !(bin_width_m.is_finite() && bin_width_m > 0.0) {
        return Err(Error::Argument(format!(
            "bin width must be positive, got {bin_width_m}"
        )));
    }
    // Keyed by bin index so groups sort numerically.
    let mut groups: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for v in report.verdicts.iter().filter(|v| v.selected) {
        let key = match group_by {
            GroupBy::Distance => (v.length_m / bin_width_m).floor() as u64,
            GroupBy::Wind => v.wind.beaufort() as u64,
        };
        let entry = groups.entry(key).or_default();
        entry.0 += v.mean_aero_wh();
        entry.1 += 1;
    }
    Ok(groups
        .into_iter()
        .map(|(key, (sum, count))| GroupedEnergyRow {
            group_key: match group_by {
                GroupBy::Distance => format!("{}", key as f64 * bin_width_m),
                GroupBy::Wind => key.to_string(),
            },
            mode: report.mode,
            mean_aero_wh: sum / count as f64,
            count,
        })
        .collect())
}

/// Like [`group_energy`] for both reports at once, but restricted to the
/// segments both policies selected, so the two modes are compared on the same
/// services.
pub fn group_energy_paired(
    fixed: &SelectionReport,
    adaptive: &SelectionReport,
    group_by: GroupBy,
    bin_width_m: f64,
) -> Result<Vec<GroupedEnergyRow>> {
    let common: BTreeSet<u64> = fixed
        .selected_ids
        .intersection(&adaptive.selected_ids)
        .copied()
        .collect();
    let restrict = |r: &SelectionReport| {
        let mut r = r.clone();
        for v in &mut r.verdicts {
            v.selected = common.contains(&v.segment_id);
        }
        r
    };
    let mut rows = group_energy(&restrict(fixed), group_by, bin_width_m)?;
    rows.extend(group_energy(&restrict(adaptive), group_by, bin_width_m)?);
    Ok(rows)
}

pub fn grouped_csv(rows: &[GroupedEnergyRow]) -> String {
    let mut out = String::from("group_key,mode,mean_aero_wh,count\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{}",
            r.group_key, r.mode, r.mean_aero_wh, r.count
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub nodes: usize,
    pub segments: usize,
    pub mode: SelectionMode,
    pub median_ms: f64,
    pub reps: usize,
}

pub fn timing_csv(rows: &[TimingRow]) -> String {
    let mut out = String::from("nodes,segments,mode,median_ms,reps\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{}",
            r.nodes, r.segments, r.mode, r.median_ms, r.reps
        );
    }
    out
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

/// Times both policies on generated networks of each size. Network and wind
/// construction are outside the timed region.
pub fn run_benchmark(
    sizes: &[usize],
    reps: usize,
    network_seed: u64,
    wind_seed: u64,
    dist: &SpeedDistribution,
    swarm: &Swarm,
    model: &AeroModel,
) -> Result<Vec<TimingRow>> {
    if reps == 0 {
        return Err(Error::Argument("repetitions must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(sizes.len() * 2);
    for &nodes in sizes {
        let network = gen_network(nodes, network_seed)?;
        let network = network.with_wind(&synth_wind(&network, wind_seed, dist)?)?;
        let segments = network.segments();
        for mode in [SelectionMode::Fixed, SelectionMode::Adaptive] {
            let mut samples = Vec::with_capacity(reps);
            for _ in 0..reps {
                let start = Instant::now();
                let report = match mode {
                    SelectionMode::Fixed => fixed_select(segments, swarm, model)?,
                    SelectionMode::Adaptive => adaptive_select(segments, swarm, model)?,
                };
                samples.push(start.elapsed().as_secs_f64() * 1e3);
                std::hint::black_box(report);
            }
            rows.push(TimingRow {
                nodes,
                segments: segments.len(),
                mode,
                median_ms: median(&mut samples),
                reps,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub network: SkywayNetwork,
    pub fixed: SelectionReport,
    pub adaptive: SelectionReport,
    pub dominance: DominanceSummary,
    pub by_distance: Vec<GroupedEnergyRow>,
    pub by_wind: Vec<GroupedEnergyRow>,
    pub timing: Vec<TimingRow>,
}

/// Runs both policies on the configured instance, groups the results and
/// times the policies at each benchmark size.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let model = config.model()?;
    let swarm = config.swarm()?;
    let network = config.instance()?;
    with_threads(config.threads, || -> Result<ExperimentOutput> {
        let fixed = fixed_select(network.segments(), &swarm, &model)
            .map_err(|e| e.context("fixed selection"))?;
        let adaptive = adaptive_select(network.segments(), &swarm, &model)
            .map_err(|e| e.context("adaptive selection"))?;
        let dominance = compare_reports(&fixed, &adaptive)?;
        let mut by_distance = group_energy(&fixed, GroupBy::Distance, config.distance_bin_m)?;
        by_distance.extend(group_energy(
            &adaptive,
            GroupBy::Distance,
            config.distance_bin_m,
        )?);
        let mut by_wind = group_energy(&fixed, GroupBy::Wind, config.distance_bin_m)?;
        by_wind.extend(group_energy(
            &adaptive,
            GroupBy::Wind,
            config.distance_bin_m,
        )?);
        let timing = run_benchmark(
            &config.bench_sizes,
            config.repetitions,
            config.network_seed,
            config.wind_seed,
            &config.speed_dist,
            &swarm,
            &model,
        )
        .map_err(|e| e.context("benchmark"))?;
        Ok(ExperimentOutput {
            network: network.clone(),
            fixed,
            adaptive,
            dominance,
            by_distance,
            by_wind,
            timing,
        })
    })?
}

impl ExperimentOutput {
    /// Writes every artifact of the run into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        save_network_dir(&self.network, &dir.join("network"))?;
        let wind = self
            .network
            .segments()
            .iter()
            .filter_map(|s| s.wind.map(|w| (s.id, w)))
            .collect();
        write_wind_csv(&dir.join("wind.csv"), &wind)?;
        let files = [
            ("fixed.csv", report_csv(&self.fixed)),
            ("adaptive.csv", report_csv(&self.adaptive)),
            ("fixed_detail.csv", detail_csv(&self.fixed)),
            ("adaptive_detail.csv", detail_csv(&self.adaptive)),
            ("grouped_distance.csv", grouped_csv(&self.by_distance)),
            ("grouped_wind.csv", grouped_csv(&self.by_wind)),
            ("timing.csv", timing_csv(&self.timing)),
        ];
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}
