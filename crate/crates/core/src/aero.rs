//! Formation energy model.
//!
//! Per-drone drag and swarm-average combined power were measured for five
//! formations under three wind directions at one reference condition
//! (Beaufort 5, flight speed 15.6 m/s). Power at other Beaufort numbers is
//! obtained by doubling per Beaufort step, and the combined power is split into
//! a drag part (`F_D · v` per drone) and an upwash/downwash part shared equally
//! by the five drones.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wind::{beaufort_from_speed, WindDirection};

/// Flight speed at which the embedded tables were calibrated (m/s).
pub const REF_SPEED_MPS: f64 = 15.6;
/// Beaufort number at which the embedded tables were calibrated.
pub const REF_BEAUFORT: u8 = 5;
pub const SWARM_SIZE: usize = 5;

/// Embedded calibration tables, `formation,direction,d1_n..d5_n,avg_n,combined_w`.
pub const EMBEDDED_TABLES_CSV: &str = include_str!("../data/formation_tables.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Formation {
    Column,
    Front,
    Echelon,
    Vee,
    Diamond,
}

impl Formation {
    pub const ALL: [Formation; 5] = [
        Formation::Column,
        Formation::Front,
        Formation::Echelon,
        Formation::Vee,
        Formation::Diamond,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Formation::Column => "COLUMN",
            Formation::Front => "FRONT",
            Formation::Echelon => "ECHELON",
            Formation::Vee => "VEE",
            Formation::Diamond => "DIAMOND",
        }
    }
}

impl fmt::Display for Formation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Formation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Formation::ALL
            .into_iter()
            .find(|f| f.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Argument(format!("unknown formation {s:?}")))
    }
}

/// Calibration record for one (formation, wind direction) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormationProfile {
    pub formation: Formation,
    pub direction: WindDirection,
    /// Drag on the drones in slots 1..=5, Newtons.
    pub drone_drag_n: [f64; SWARM_SIZE],
    pub avg_drag_n: f64,
    /// Swarm-average drag plus upwash/downwash power, Watts.
    pub combined_power_w: f64,
}

impl FormationProfile {
    /// Upwash/downwash power per drone at the reference condition. Negative
    /// means the formation's wake gives net lift.
    pub fn updown_power_w(&self) -> f64 {
        self.combined_power_w - self.avg_drag_n * REF_SPEED_MPS
    }
}

#[derive(Deserialize)]
struct TableRow {
    formation: Formation,
    direction: WindDirection,
    d1_n: f64,
    d2_n: f64,
    d3_n: f64,
    d4_n: f64,
    d5_n: f64,
    avg_n: f64,
    combined_w: f64,
}

/// All fifteen calibration cells.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationTable {
    cells: [[FormationProfile; 3]; 5],
}

/// Allowed gap between the listed average drag and the mean of the per-drone
/// values (the source rounds to two decimals).
pub const AVG_DRAG_TOLERANCE_N: f64 = 0.05;

impl FormationTable {
    /// The tables shipped with the crate.
    pub fn embedded() -> &'static FormationTable {
        static TABLE: OnceLock<FormationTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            FormationTable::from_csv_str(EMBEDDED_TABLES_CSV)
                .expect("embedded formation tables are valid")
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv_str(&body).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn from_csv_str(body: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let mut cells: [[Option<FormationProfile>; 3]; 5] = [[None; 3]; 5];
        for row in reader.deserialize::<TableRow>() {
            let row = row.map_err(|e| Error::Validation(format!("formation table: {e}")))?;
            let profile = FormationProfile {
                formation: row.formation,
                direction: row.direction,
                drone_drag_n: [row.d1_n, row.d2_n, row.d3_n, row.d4_n, row.d5_n],
                avg_drag_n: row.avg_n,
                combined_power_w: row.combined_w,
            };
            let label = format!("{}/{}", row.formation, row.direction);
            if profile
                .drone_drag_n
                .iter()
                .chain([&profile.avg_drag_n])
                .any(|d| !(d.is_finite() && *d > 0.0))
            {
                return Err(Error::Validation(format!(
                    "formation table {label}: drag values must be positive"
                )));
            }
            if !profile.combined_power_w.is_finite() {
                return Err(Error::Validation(format!(
                    "formation table {label}: combined power not finite"
                )));
            }
            let mean = profile.drone_drag_n.iter().sum::<f64>() / SWARM_SIZE as f64;
            if (mean - profile.avg_drag_n).abs() > AVG_DRAG_TOLERANCE_N {
                return Err(Error::Validation(format!(
                    "formation table {label}: per-drone mean {mean:.3} N disagrees with average {:.2} N",
                    profile.avg_drag_n
                )));
            }
            let slot = &mut cells[row.formation as usize][row.direction.index()];
            if slot.replace(profile).is_some() {
                return Err(Error::Validation(format!(
                    "formation table: duplicate row {label}"
                )));
            }
        }
        let mut out = [[FormationProfile {
            formation: Formation::Column,
            direction: WindDirection::Front,
            drone_drag_n: [0.0; SWARM_SIZE],
            avg_drag_n: 0.0,
            combined_power_w: 0.0,
        }; 3]; 5];
        for f in Formation::ALL {
            for d in WindDirection::ALL {
                out[f as usize][d.index()] = cells[f as usize][d.index()].ok_or_else(|| {
                    Error::Validation(format!("formation table: missing row {f}/{d}"))
                })?;
            }
        }
        Ok(Self { cells: out })
    }

    pub fn profile(&self, formation: Formation, direction: WindDirection) -> &FormationProfile {
        &self.cells[formation as usize][direction.index()]
    }

    pub fn profiles(&self) -> impl Iterator<Item = &FormationProfile> {
        self.cells.iter().flatten()
    }

    pub fn updown_power(&self, formation: Formation, direction: WindDirection) -> f64 {
        self.profile(formation, direction).updown_power_w()
    }

    /// Formation with the lowest combined power for `direction`; ties go to the
    /// earlier formation in [`Formation::ALL`].
    pub fn best_formation(&self, direction: WindDirection) -> Formation {
        Formation::ALL
            .into_iter()
            .min_by(|a, b| {
                self.profile(*a, direction)
                    .combined_power_w
                    .total_cmp(&self.profile(*b, direction).combined_power_w)
            })
            .expect("five formations")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AeroModelConfig {
    pub drone_speed_mps: f64,
    /// Lower bound on any single drone's aerodynamic power, Watts.
    pub power_floor_w: f64,
}

impl Default for AeroModelConfig {
    fn default() -> Self {
        Self {
            drone_speed_mps: REF_SPEED_MPS,
            power_floor_w: 0.0,
        }
    }
}

impl AeroModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.drone_speed_mps.is_finite() && self.drone_speed_mps > 0.0) {
            return Err(Error::Argument(format!(
                "drone speed must be positive, got {}",
                self.drone_speed_mps
            )));
        }
        if !(self.power_floor_w.is_finite() && self.power_floor_w >= 0.0) {
            return Err(Error::Argument(format!(
                "power floor must be non-negative, got {}",
                self.power_floor_w
            )));
        }
        Ok(())
    }
}

/// `P = F_D · v`.
pub fn drag_power(drag_n: f64, speed_mps: f64) -> Result<f64> {
    if !(drag_n >= 0.0 && speed_mps >= 0.0) {
        return Err(Error::Argument(format!(
            "drag ({drag_n} N) and speed ({speed_mps} m/s) must be non-negative"
        )));
    }
    Ok(drag_n * speed_mps)
}

/// Power multiplier relative to the Beaufort 5 calibration: doubles per step.
pub fn beaufort_factor(beaufort: u8) -> Result<f64> {
    if beaufort > 6 {
        return Err(Error::Argument(format!(
            "Beaufort number {beaufort} outside 0..=6"
        )));
    }
    Ok(2f64.powi(beaufort as i32 - REF_BEAUFORT as i32))
}

/// Aerodynamic power of one drone, split into its two components after the
/// power floor is applied. The floor adjustment is charged to `updown_w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DronePower {
    pub drag_w: f64,
    pub updown_w: f64,
}

impl DronePower {
    pub fn total_w(&self) -> f64 {
        self.drag_w + self.updown_w
    }
}

/// Calibration tables plus the flight configuration they are evaluated under.
#[derive(Debug, Clone, PartialEq)]
pub struct AeroModel {
    table: FormationTable,
    config: AeroModelConfig,
}

impl Default for AeroModel {
    fn default() -> Self {
        Self {
            table: FormationTable::embedded().clone(),
            config: AeroModelConfig::default(),
        }
    }
}

impl AeroModel {
    pub fn new(table: FormationTable, config: AeroModelConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { table, config })
    }

    pub fn with_config(config: AeroModelConfig) -> Result<Self> {
        Self::new(FormationTable::embedded().clone(), config)
    }

    pub fn table(&self) -> &FormationTable {
        &self.table
    }

    pub fn config(&self) -> &AeroModelConfig {
        &self.config
    }

    pub fn updown_power(&self, formation: Formation, direction: WindDirection) -> f64 {
        self.table.updown_power(formation, direction)
    }

    /// Best formation for a wind condition. Every cell scales by the same
    /// Beaufort factor, so the ranking only depends on the direction; the
    /// speed is still range-checked.
    pub fn select_formation(
        &self,
        wind_speed_mps: f64,
        direction: WindDirection,
    ) -> Result<Formation> {
        beaufort_from_speed(wind_speed_mps)?;
        Ok(self.table.best_formation(direction))
    }

    pub fn drone_power(
        &self,
        formation: Formation,
        direction: WindDirection,
        beaufort: u8,
        position: usize,
    ) -> Result<DronePower> {
        if !(1..=SWARM_SIZE).contains(&position) {
            return Err(Error::Argument(format!(
                "formation slot {position} outside 1..=5"
            )));
        }
        let factor = beaufort_factor(beaufort)?;
        let profile = self.table.profile(formation, direction);
        let drag_w = factor
            * drag_power(
                profile.drone_drag_n[position - 1],
                self.config.drone_speed_mps,
            )?;
        let updown_w = factor * profile.updown_power_w();
        let total = (drag_w + updown_w).max(self.config.power_floor_w);
        Ok(DronePower {
            drag_w,
            updown_w: total - drag_w,
        })
    }

    /// Aerodynamic power of the drone in `position` (1..=5), Watts.
    pub fn drone_aero_power(
        &self,
        formation: Formation,
        direction: WindDirection,
        beaufort: u8,
        position: usize,
    ) -> Result<f64> {
        Ok(self
            .drone_power(formation, direction, beaufort, position)?
            .total_w())
    }

    /// Mean aerodynamic power across the five slots, Watts.
    pub fn swarm_aero_power(
        &self,
        formation: Formation,
        direction: WindDirection,
        beaufort: u8,
    ) -> Result<f64> {
        let mut sum = 0.0;
        for position in 1..=SWARM_SIZE {
            sum += self.drone_aero_power(formation, direction, beaufort, position)?;
        }
        Ok(sum / SWARM_SIZE as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use WindDirection::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eq1_examples() {
        assert!(close(drag_power(95.87, 15.6).unwrap(), 1495.572, 1e-9));
        assert_eq!(drag_power(0.0, 15.6).unwrap(), 0.0);
        assert!(close(drag_power(153.91, 15.6).unwrap(), 2400.996, 1e-9));
        assert!(drag_power(-1.0, 15.6).is_err());
        assert!(drag_power(1.0, -15.6).is_err());
    }

    #[test]
    fn scaling_factor() {
        assert_eq!(beaufort_factor(5).unwrap(), 1.0);
        assert_eq!(beaufort_factor(6).unwrap(), 2.0);
        assert_eq!(beaufort_factor(2).unwrap(), 0.125);
        assert_eq!(beaufort_factor(0).unwrap(), 1.0 / 32.0);
        assert!(beaufort_factor(7).is_err());
    }

    #[test]
    fn updown_examples() {
        let t = FormationTable::embedded();
        assert!(close(
            t.updown_power(Formation::Vee, Front),
            -1063.306,
            1e-9
        ));
        assert!(close(
            t.updown_power(Formation::Column, Front),
            363.208,
            1e-9
        ));
        assert!(close(
            t.updown_power(Formation::Diamond, Right),
            -881.674,
            1e-9
        ));
    }

    #[test]
    fn winners_by_direction() {
        let m = AeroModel::default();
        assert_eq!(m.select_formation(9.35, Front).unwrap(), Formation::Vee);
        assert_eq!(m.select_formation(2.0, Right).unwrap(), Formation::Diamond);
        assert_eq!(m.select_formation(13.8, Left).unwrap(), Formation::Diamond);
        assert!(m.select_formation(14.0, Left).is_err());
    }

    #[test]
    fn per_drone_power() {
        // Oracle values: slot drag × 15.6 + per-drone upwash share, computed by hand.
        let m = AeroModel::default();
        let vee3 = m.drone_aero_power(Formation::Vee, Front, 5, 3).unwrap();
        assert!(close(vee3, 131.27 * 15.6 + (1337.69 - 153.91 * 15.6), 1e-9));
        assert!(close(vee3, 984.506, 1e-6));
        let col1 = m.drone_aero_power(Formation::Column, Front, 5, 1).unwrap();
        assert!(close(col1, 2459.848, 1e-6));
        assert!(m.drone_aero_power(Formation::Vee, Front, 5, 0).is_err());
        assert!(m.drone_aero_power(Formation::Vee, Front, 5, 6).is_err());
    }

    #[test]
    fn swarm_power_reproduces_table() {
        let m = AeroModel::default();
        assert!(close(
            m.swarm_aero_power(Formation::Vee, Front, 5).unwrap(),
            1337.69,
            1.0
        ));
        assert!(close(
            m.swarm_aero_power(Formation::Diamond, Left, 5).unwrap(),
            1354.63,
            1.0
        ));
        assert!(close(
            m.swarm_aero_power(Formation::Vee, Front, 6).unwrap(),
            2675.38,
            2.0
        ));
    }

    #[test]
    fn floor_absorbs_into_updown() {
        let cfg = AeroModelConfig {
            drone_speed_mps: 1.0,
            power_floor_w: 50.0,
        };
        let m = AeroModel::with_config(cfg).unwrap();
        let p = m.drone_power(Formation::Vee, Front, 5, 3).unwrap();
        assert_eq!(p.total_w(), 50.0);
        assert!(close(p.drag_w, 131.27, 1e-12));
        assert!(close(p.updown_w, 50.0 - 131.27, 1e-12));
    }

    #[test]
    fn config_validation() {
        assert!(AeroModel::with_config(AeroModelConfig {
            drone_speed_mps: 0.0,
            power_floor_w: 0.0
        })
        .is_err());
        assert!(AeroModel::with_config(AeroModelConfig {
            drone_speed_mps: 10.0,
            power_floor_w: -1.0
        })
        .is_err());
    }

    #[test]
    fn table_validation() {
        let mut lines: Vec<&str> = EMBEDDED_TABLES_CSV.lines().collect();
        lines.pop();
        assert!(FormationTable::from_csv_str(&lines.join("\n"))
            .unwrap_err()
            .to_string()
            .contains("missing row"));
        let bad = EMBEDDED_TABLES_CSV.replace("VEE,FRONT,184.41", "VEE,FRONT,284.41");
        assert!(FormationTable::from_csv_str(&bad)
            .unwrap_err()
            .to_string()
            .contains("disagrees"));
        let dup = format!(
            "{EMBEDDED_TABLES_CSV}VEE,FRONT,184.41,133.87,131.27,152.18,167.81,153.91,1337.69\n"
        );
        assert!(FormationTable::from_csv_str(&dup)
            .unwrap_err()
            .to_string()
            .contains("duplicate"));
    }

    #[test]
    fn formation_names() {
        for f in Formation::ALL {
            assert_eq!(f.as_str().parse::<Formation>().unwrap(), f);
        }
        assert!("WEDGE".parse::<Formation>().is_err());
    }
}
