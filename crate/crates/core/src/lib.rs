//! Energy-aware selection of drone swarm delivery services over a skyway network.
//!
//! A skyway segment is a candidate service for a five-drone swarm. Each segment
//! carries a wind condition; the [`aero`] model turns formation, wind direction
//! and Beaufort number into per-drone power, and [`selection`] decides which
//! segments every swarm member can traverse on its remaining battery, either
//! with one formation held for the whole network (fixed) or with the formation
//! re-chosen per segment (adaptive).

pub mod aero;
pub mod error;
pub mod harness;
pub mod network;
pub mod selection;
pub mod wind;

pub use aero::{AeroModel, AeroModelConfig, Formation, FormationProfile, FormationTable};
pub use error::{Error, Result};
pub use network::{SkywayNetwork, SkywayNode, SkywaySegment};
pub use selection::{
    adaptive_select, fixed_select, segment_energy, Drone, EnergyBreakdown, SegmentVerdict,
    SelectionMode, SelectionReport, Swarm,
};
pub use wind::{beaufort_from_speed, synth_wind, SpeedDistribution, WindCondition, WindDirection};
