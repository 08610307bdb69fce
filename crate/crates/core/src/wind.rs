//! Beaufort binning and seeded per-segment wind synthesis.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::SkywayNetwork;

/// Highest wind speed a commercial quadcopter can safely fly in (m/s).
pub const MAX_SAFE_WIND_MPS: f64 = 13.8;

/// Lower edges of Beaufort numbers 1..=6. Bins are half-open `[lower, next)`,
/// except the top bin which includes the safety ceiling.
const BEAUFORT_LOWER_EDGES: [f64; 6] = [0.5, 1.6, 3.4, 5.5, 8.0, 10.8];

/// Wind direction relative to the swarm's heading. Tailwinds are not modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum WindDirection {
    Front,
    Right,
    Left,
}

impl WindDirection {
    /// In tie-break order: Front wins over Right, Right over Left.
    pub const ALL: [WindDirection; 3] = [
        WindDirection::Front,
        WindDirection::Right,
        WindDirection::Left,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WindDirection::Front => "FRONT",
            WindDirection::Right => "RIGHT",
            WindDirection::Left => "LEFT",
        }
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for WindDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WindDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "FRONT" => Ok(WindDirection::Front),
            "RIGHT" => Ok(WindDirection::Right),
            "LEFT" => Ok(WindDirection::Left),
            other => Err(Error::Argument(format!(
                "unknown wind direction {other:?} (expected FRONT, RIGHT or LEFT)"
            ))),
        }
    }
}

/// Maps a wind speed in m/s to its Beaufort number (0..=6).
pub fn beaufort_from_speed(speed_mps: f64) -> Result<u8> {
    if !(0.0..=MAX_SAFE_WIND_MPS).contains(&speed_mps) {
        return Err(Error::WindOutOfRange(speed_mps));
    }
    Ok(BEAUFORT_LOWER_EDGES
        .iter()
        .take_while(|&&edge| speed_mps >= edge)
        .count() as u8)
}

/// Wind on one segment. The Beaufort number is derived from the speed on
/// construction and cannot drift from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindCondition {
    speed_mps: f64,
    direction: WindDirection,
    beaufort: u8,
}

impl WindCondition {
    pub fn new(speed_mps: f64, direction: WindDirection) -> Result<Self> {
        let beaufort = beaufort_from_speed(speed_mps)?;
        Ok(Self {
            speed_mps,
            direction,
            beaufort,
        })
    }

    pub fn speed_mps(&self) -> f64 {
        self.speed_mps
    }

    pub fn direction(&self) -> WindDirection {
        self.direction
    }

    pub fn beaufort(&self) -> u8 {
        self.beaufort
    }
}

/// Distribution wind speeds are drawn from during synthesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpeedDistribution {
    /// Uniform on `[min_mps, max_mps]`.
    Uniform { min_mps: f64, max_mps: f64 },
    /// Every segment gets the same speed.
    Constant { speed_mps: f64 },
}

impl Default for SpeedDistribution {
    fn default() -> Self {
        SpeedDistribution::Uniform {
            min_mps: 0.0,
            max_mps: MAX_SAFE_WIND_MPS,
        }
    }
}

impl SpeedDistribution {
    fn validate(&self) -> Result<()> {
        let in_range = |v: f64| (0.0..=MAX_SAFE_WIND_MPS).contains(&v);
        match *self {
            SpeedDistribution::Uniform { min_mps, max_mps } => {
                if !in_range(min_mps) || !in_range(max_mps) || min_mps > max_mps {
                    return Err(Error::Argument(format!(
                        "uniform wind range [{min_mps}, {max_mps}] must lie within [0, {MAX_SAFE_WIND_MPS}]"
                    )));
                }
            }
            SpeedDistribution::Constant { speed_mps } => {
                if !in_range(speed_mps) {
                    return Err(Error::WindOutOfRange(speed_mps));
                }
            }
        }
        Ok(())
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            SpeedDistribution::Uniform { min_mps, max_mps } => {
                min_mps + (max_mps - min_mps) * rng.random::<f64>()
            }
            SpeedDistribution::Constant { speed_mps } => speed_mps,
        }
    }
}

/// Draws the wind for a single segment. The draw is keyed by `(seed, segment_id)`
/// through a dedicated ChaCha stream, so it does not depend on which other
/// segments exist or the order they are visited in.
pub fn wind_for_segment(
    seed: u64,
    segment_id: u64,
    dist: &SpeedDistribution,
) -> Result<WindCondition> {
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(segment_id);
    // Quantized to the 6-decimal resolution of the wind CSV so files reload exactly.
    let speed = (dist.sample(&mut rng) * 1e6).round() / 1e6;
    let direction = WindDirection::ALL[rng.random_range(0..3)];
    WindCondition::new(speed.clamp(0.0, MAX_SAFE_WIND_MPS), direction)
}

/// Assigns a wind condition to every segment of `network`.
pub fn synth_wind(
    network: &SkywayNetwork,
    seed: u64,
    dist: &SpeedDistribution,
) -> Result<BTreeMap<u64, WindCondition>> {
    if network.segments().is_empty() {
        return Err(Error::Argument(
            "cannot synthesize wind for a network without segments".into(),
        ));
    }
    dist.validate()?;
    network
        .segments()
        .iter()
        .map(|s| Ok((s.id, wind_for_segment(seed, s.id, dist)?)))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct WindRow {
    edge_id: u64,
    wind_speed_mps: f64,
    wind_dir: WindDirection,
}

pub fn write_wind_csv(path: &Path, wind: &BTreeMap<u64, WindCondition>) -> Result<()> {
    let mut out = String::from("edge_id,wind_speed_mps,wind_dir\n");
    for (id, w) in wind {
        out.push_str(&format!("{id},{:.6},{}\n", w.speed_mps(), w.direction()));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_wind_csv(path: &Path) -> Result<BTreeMap<u64, WindCondition>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut wind = BTreeMap::new();
    for row in reader.deserialize::<WindRow>() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let cond = WindCondition::new(row.wind_speed_mps, row.wind_dir)
            .map_err(|e| e.context(format!("edge {}", row.edge_id)))?;
        if wind.insert(row.edge_id, cond).is_some() {
            return Err(Error::Validation(format!(
                "duplicate wind row for edge {}",
                row.edge_id
            )));
        }
    }
    Ok(wind)
}
