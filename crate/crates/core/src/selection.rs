//! Per-segment energy accounting and the fixed / adaptive selection policies.
//!
//! A segment is selected when every drone of the swarm can traverse it within
//! its remaining battery percentage. Segments are judged independently: the
//! battery is not depleted from one segment to the next.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aero::{AeroModel, Formation, SWARM_SIZE};
use crate::error::{Error, Result};
use crate::network::SkywaySegment;
use crate::wind::{beaufort_from_speed, WindCondition, WindDirection};

/// Tolerance used to flag verdicts that sit exactly on the battery limit.
const AT_LIMIT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Drone {
    pub id: u64,
    pub battery_capacity_mah: f64,
    pub voltage_v: f64,
    /// Charge available for the segment, percent of nominal capacity.
    pub battery_level_pct: f64,
    /// Carried for completeness; payload does not enter the energy model.
    pub payload_kg: f64,
    /// Power drawn to hold the flight regardless of wind, Watts.
    pub base_power_w: f64,
}

impl Default for Drone {
    fn default() -> Self {
        Self {
            id: 0,
            battery_capacity_mah: 4480.0,
            voltage_v: 15.2,
            battery_level_pct: 100.0,
            payload_kg: 0.0,
            base_power_w: 180.0,
        }
    }
}

impl Drone {
    pub fn battery_wh(&self) -> f64 {
        self.battery_capacity_mah * self.voltage_v / 1000.0
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Argument(format!("drone {}: {what}", self.id)));
        if !(self.battery_wh().is_finite()
            && self.battery_capacity_mah > 0.0
            && self.voltage_v > 0.0)
        {
            return bad("battery capacity and voltage must be positive");
        }
        if !(self.battery_level_pct > 0.0 && self.battery_level_pct <= 100.0) {
            return bad("battery level must be in (0, 100]");
        }
        if self.payload_kg.is_nan() || self.payload_kg < 0.0 {
            return bad("payload must be non-negative");
        }
        if !(self.base_power_w.is_finite() && self.base_power_w >= 0.0) {
            return bad("base power must be non-negative");
        }
        Ok(())
    }
}

/// Five drones; list position `i` flies formation slot `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Swarm {
    drones: Vec<Drone>,
    pub current_node: u64,
}

impl Swarm {
    pub fn new(drones: Vec<Drone>, current_node: u64) -> Result<Self> {
        if drones.len() != SWARM_SIZE {
            return Err(Error::Argument(format!(
                "a swarm has exactly {SWARM_SIZE} drones, got {}",
                drones.len()
            )));
        }
        for d in &drones {
            d.validate()?;
        }
        Ok(Self {
            drones,
            current_node,
        })
    }

    /// Five copies of `template`, numbered 1..=5.
    pub fn uniform(template: &Drone, current_node: u64) -> Result<Self> {
        let drones = (1..=SWARM_SIZE as u64)
            .map(|id| Drone {
                id,
                ..template.clone()
            })
            .collect();
        Self::new(drones, current_node)
    }

    pub fn drones(&self) -> &[Drone] {
        &self.drones
    }
}

impl Default for Swarm {
    fn default() -> Self {
        Swarm::uniform(&Drone::default(), 0).expect("default drone is valid")
    }
}

/// Energy one drone spends on one segment, `total = fr + drag + updown`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub e_fr_wh: f64,
    pub e_drag_wh: f64,
    /// Negative when upwash saves energy.
    pub e_updown_wh: f64,
    pub total_wh: f64,
    pub pct_of_battery: f64,
}

impl EnergyBreakdown {
    /// Wind-dependent part: drag plus upwash/downwash.
    pub fn aero_wh(&self) -> f64 {
        self.e_drag_wh + self.e_updown_wh
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    Fixed,
    Adaptive,
}

impl SelectionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectionMode::Fixed => "fixed",
            SelectionMode::Adaptive => "adaptive",
        }
    }
}

impl fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fixed" => Ok(SelectionMode::Fixed),
            "adaptive" => Ok(SelectionMode::Adaptive),
            other => Err(Error::Argument(format!("unknown selection mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentVerdict {
    pub segment_id: u64,
    pub length_m: f64,
    pub wind: WindCondition,
    pub formation: Formation,
    pub per_drone: [EnergyBreakdown; SWARM_SIZE],
    pub selected: bool,
    pub reject_reason: Option<String>,
    /// Selected, but some drone needs exactly its remaining charge.
    pub at_limit: bool,
    pub travel_time_s: f64,
}

impl SegmentVerdict {
    pub fn max_drone_pct(&self) -> f64 {
        self.per_drone
            .iter()
            .map(|e| e.pct_of_battery)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Swarm-mean wind-dependent energy, Wh.
    pub fn mean_aero_wh(&self) -> f64 {
        self.per_drone
            .iter()
            .map(EnergyBreakdown::aero_wh)
            .sum::<f64>()
            / SWARM_SIZE as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub mode: SelectionMode,
    pub fixed_formation: Option<Formation>,
    /// Sorted by segment id.
    pub verdicts: Vec<SegmentVerdict>,
    pub selected_ids: BTreeSet<u64>,
}

impl SelectionReport {
    fn from_verdicts(
        mode: SelectionMode,
        fixed_formation: Option<Formation>,
        mut verdicts: Vec<SegmentVerdict>,
    ) -> Self {
        verdicts.sort_by_key(|v| v.segment_id);
        let selected_ids = verdicts
            .iter()
            .filter(|v| v.selected)
            .map(|v| v.segment_id)
            .collect();
        Self {
            mode,
            fixed_formation,
            verdicts,
            selected_ids,
        }
    }

    pub fn verdict(&self, segment_id: u64) -> Option<&SegmentVerdict> {
        self.verdicts
            .binary_search_by_key(&segment_id, |v| v.segment_id)
            .ok()
            .map(|i| &self.verdicts[i])
    }
}

fn wind_of(segment: &SkywaySegment) -> Result<WindCondition> {
    segment.wind.ok_or_else(|| {
        Error::State(format!(
            "segment {} has no wind condition assigned",
            segment.id
        ))
    })
}

pub fn travel_time_s(segment: &SkywaySegment, model: &AeroModel) -> f64 {
    segment.length_m / model.config().drone_speed_mps
}

/// Energy of each swarm member for flying `segment` in `formation`.
pub fn segment_energy(
    segment: &SkywaySegment,
    swarm: &Swarm,
    formation: Formation,
    model: &AeroModel,
) -> Result<[EnergyBreakdown; SWARM_SIZE]> {
    let wind = wind_of(segment)?;
    let hours = travel_time_s(segment, model) / 3600.0;
    let mut out = [EnergyBreakdown::default(); SWARM_SIZE];
    for (slot, (drone, slot_energy)) in swarm.drones().iter().zip(out.iter_mut()).enumerate() {
        let power = model.drone_power(formation, wind.direction(), wind.beaufort(), slot + 1)?;
        let e_fr_wh = drone.base_power_w * hours;
        let e_drag_wh = power.drag_w * hours;
        let e_updown_wh = power.updown_w * hours;
        let total_wh = e_fr_wh + e_drag_wh + e_updown_wh;
        *slot_energy = EnergyBreakdown {
            e_fr_wh,
            e_drag_wh,
            e_updown_wh,
            total_wh,
            pct_of_battery: total_wh / drone.battery_wh() * 100.0,
        };
    }
    Ok(out)
}

/// Evaluates one segment in a given formation and applies the feasibility test.
pub fn evaluate_segment(
    segment: &SkywaySegment,
    swarm: &Swarm,
    formation: Formation,
    model: &AeroModel,
) -> Result<SegmentVerdict> {
    let wind = wind_of(segment)?;
    let per_drone = segment_energy(segment, swarm, formation, model)?;
    let violation = swarm
        .drones()
        .iter()
        .zip(&per_drone)
        .enumerate()
        .find(|(_, (d, e))| e.pct_of_battery > d.battery_level_pct);
    let reject_reason = violation.map(|(slot, (d, e))| {
        format!(
            "slot {} (drone {}) needs {:.2}% > {:.2}% available",
            slot + 1,
            d.id,
            e.pct_of_battery,
            d.battery_level_pct
        )
    });
    let selected = reject_reason.is_none();
    let at_limit = selected
        && swarm
            .drones()
            .iter()
            .zip(&per_drone)
            .any(|(d, e)| d.battery_level_pct - e.pct_of_battery <= AT_LIMIT_EPS);
    Ok(SegmentVerdict {
        segment_id: segment.id,
        length_m: segment.length_m,
        wind,
        formation,
        per_drone,
        selected,
        reject_reason,
        at_limit,
        travel_time_s: travel_time_s(segment, model),
    })
}

/// Averaged wind conditions that pick the single formation of a fixed selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPlan {
    pub avg_wind_mps: f64,
    pub avg_beaufort: u8,
    /// Most frequent direction; ties go Front, then Right, then Left.
    pub dominant_direction: WindDirection,
    pub direction_counts: [usize; 3],
    pub formation: Formation,
}

pub fn fixed_plan(segments: &[SkywaySegment], model: &AeroModel) -> Result<FixedPlan> {
    if segments.is_empty() {
        return Err(Error::Argument(
            "no candidate segments to select from".into(),
        ));
    }
    let mut total_speed = 0.0;
    let mut counts = [0usize; 3];
    for s in segments {
        let w = wind_of(s)?;
        total_speed += w.speed_mps();
        counts[w.direction().index()] += 1;
    }
    let avg_wind_mps = total_speed / segments.len() as f64;
    let mut dominant_direction = WindDirection::Front;
    for d in WindDirection::ALL {
        if counts[d.index()] > counts[dominant_direction.index()] {
            dominant_direction = d;
        }
    }
    Ok(FixedPlan {
        avg_wind_mps,
        avg_beaufort: beaufort_from_speed(avg_wind_mps)?,
        dominant_direction,
        direction_counts: counts,
        formation: model.select_formation(avg_wind_mps, dominant_direction)?,
    })
}

fn check_input(segments: &[SkywaySegment]) -> Result<()> {
    if segments.is_empty() {
        return Err(Error::Argument(
            "no candidate segments to select from".into(),
        ));
    }
    segments.iter().try_for_each(|s| wind_of(s).map(|_| ()))
}

/// One formation, chosen from the averaged wind, held on every segment.
pub fn fixed_select(
    segments: &[SkywaySegment],
    swarm: &Swarm,
    model: &AeroModel,
) -> Result<SelectionReport> {
    check_input(segments)?;
    let plan = fixed_plan(segments, model)?;
    let verdicts = segments
        .par_iter()
        .map(|s| evaluate_segment(s, swarm, plan.formation, model))
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionReport::from_verdicts(
        SelectionMode::Fixed,
        Some(plan.formation),
        verdicts,
    ))
}

/// Formation re-chosen on every segment from that segment's own wind.
pub fn adaptive_select(
    segments: &[SkywaySegment],
    swarm: &Swarm,
    model: &AeroModel,
) -> Result<SelectionReport> {
    check_input(segments)?;
    let verdicts = segments
        .par_iter()
        .map(|s| {
            let wind = wind_of(s)?;
            let formation = model.select_formation(wind.speed_mps(), wind.direction())?;
            evaluate_segment(s, swarm, formation, model)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SelectionReport::from_verdicts(
        SelectionMode::Adaptive,
        None,
        verdicts,
    ))
}

pub fn select(
    mode: SelectionMode,
    segments: &[SkywaySegment],
    swarm: &Swarm,
    model: &AeroModel,
) -> Result<SelectionReport> {
    match mode {
        SelectionMode::Fixed => fixed_select(segments, swarm, model),
        SelectionMode::Adaptive => adaptive_select(segments, swarm, model),
    }
}

/// How the adaptive policy compares with the fixed one over the same segments.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DominanceSummary {
    pub segments: usize,
    /// Adaptive swarm-mean aero energy strictly below fixed.
    pub strictly_better: usize,
    /// Adaptive swarm-mean aero energy above fixed (expected to be empty).
    pub swarm_violations: Vec<u64>,
    /// Segments where some slot spends more aero energy under adaptive.
    pub per_drone_violations: Vec<u64>,
    /// Selected by fixed but rejected by adaptive.
    pub lost_by_adaptive: Vec<u64>,
}

pub fn compare_reports(
    fixed: &SelectionReport,
    adaptive: &SelectionReport,
) -> Result<DominanceSummary> {
    if fixed.verdicts.len() != adaptive.verdicts.len() {
        return Err(Error::Argument(
            "reports cover different segment sets".into(),
        ));
    }
    let mut summary = DominanceSummary::default();
    for (f, a) in fixed.verdicts.iter().zip(&adaptive.verdicts) {
        if f.segment_id != a.segment_id {
            return Err(Error::Argument(
                "reports cover different segment sets".into(),
            ));
        }
        summary.segments += 1;
        let (fa, aa) = (f.mean_aero_wh(), a.mean_aero_wh());
        if aa < fa {
            summary.strictly_better += 1;
        } else if aa > fa {
            summary.swarm_violations.push(f.segment_id);
        }
        if f.per_drone
            .iter()
            .zip(&a.per_drone)
            .any(|(x, y)| y.aero_wh() > x.aero_wh())
        {
            summary.per_drone_violations.push(f.segment_id);
        }
        if f.selected && !a.selected {
            summary.lost_by_adaptive.push(f.segment_id);
        }
    }
    Ok(summary)
}

/// One row of the selection report CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub edge_id: u64,
    pub mode: SelectionMode,
    pub formation: Formation,
    pub selected: bool,
    pub travel_time_s: f64,
    pub max_drone_pct: f64,
    pub reject_reason: String,
}

/// One row of the per-drone detail CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailRow {
    pub edge_id: u64,
    pub slot: usize,
    pub e_fr_wh: f64,
    pub e_drag_wh: f64,
    pub e_updown_wh: f64,
    pub total_wh: f64,
    pub pct: f64,
}

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

fn finish(writer: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(writer.into_inner().expect("in-memory writer")).expect("CSV output is UTF-8")
}

/// Renders `edge_id,mode,formation,selected,travel_time_s,max_drone_pct,reject_reason`.
/// Selected rows sitting exactly on a battery limit carry `at-limit` in the
/// last column.
pub fn report_csv(report: &SelectionReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "edge_id",
        "mode",
        "formation",
        "selected",
        "travel_time_s",
        "max_drone_pct",
        "reject_reason",
    ])
    .expect("in-memory write");
    for v in &report.verdicts {
        let note = match (&v.reject_reason, v.at_limit) {
            (Some(r), _) => r.clone(),
            (None, true) => "at-limit".to_string(),
            (None, false) => String::new(),
        };
        w.write_record([
            v.segment_id.to_string(),
            report.mode.to_string(),
            v.formation.to_string(),
            v.selected.to_string(),
            f6(v.travel_time_s),
            f6(v.max_drone_pct()),
            note,
        ])
        .expect("in-memory write");
    }
    finish(w)
}

/// Renders `edge_id,slot,e_fr_wh,e_drag_wh,e_updown_wh,total_wh,pct`.
pub fn detail_csv(report: &SelectionReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "edge_id",
        "slot",
        "e_fr_wh",
        "e_drag_wh",
        "e_updown_wh",
        "total_wh",
        "pct",
    ])
    .expect("in-memory write");
    for v in &report.verdicts {
        for (slot, e) in v.per_drone.iter().enumerate() {
            w.write_record([
                v.segment_id.to_string(),
                (slot + 1).to_string(),
                f6(e.e_fr_wh),
                f6(e.e_drag_wh),
                f6(e.e_updown_wh),
                f6(e.total_wh),
                f6(e.pct_of_battery),
            ])
            .expect("in-memory write");
        }
    }
    finish(w)
}

pub fn parse_csv<T: for<'de> Deserialize<'de>>(body: &str) -> Result<Vec<T>> {
    csv::Reader::from_reader(body.as_bytes())
        .deserialize()
        .map(|r| r.map_err(|e| Error::Validation(format!("CSV row: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(id: u64, length_m: f64, speed: f64, dir: WindDirection) -> SkywaySegment {
        SkywaySegment {
            id,
            src: 0,
            dst: 1,
            length_m,
            wind: Some(WindCondition::new(speed, dir).unwrap()),
        }
    }

    #[test]
    fn energy_chain_vee_front_slot3() {
        // Oracle chain: t = 1000/15.6 s; aero = 131.27*15.6 + (1337.69 - 153.91*15.6);
        // total = aero + 180; Wh = total * t / 3600; pct against 4480 mAh * 15.2 V.
        let t = 1000.0 / 15.6;
        let aero = 131.27 * 15.6 + (1337.69 - 153.91 * 15.6);
        let wh = (aero + 180.0) * t / 3600.0;
        let pct = wh / 68.096 * 100.0;
        let model = AeroModel::default();
        let s = seg(1, 1000.0, 9.35, WindDirection::Front);
        let e = segment_energy(&s, &Swarm::default(), Formation::Vee, &model).unwrap();
        assert!((travel_time_s(&s, &model) - 64.102564).abs() < 1e-6);
        assert!((e[2].total_wh - wh).abs() <= 1e-9 * wh);
        assert!((e[2].pct_of_battery - pct).abs() <= 1e-9 * pct);
        assert!((e[2].e_fr_wh - 180.0 * t / 3600.0).abs() < 1e-12);
    }

    #[test]
    fn breakdown_invariants() {
        let model = AeroModel::default();
        let swarm = Swarm::default();
        for dir in WindDirection::ALL {
            for f in Formation::ALL {
                let e = segment_energy(&seg(1, 777.0, 12.0, dir), &swarm, f, &model).unwrap();
                for b in e {
                    assert!((b.total_wh - (b.e_fr_wh + b.e_drag_wh + b.e_updown_wh)).abs() < 1e-9);
                    assert!((b.pct_of_battery - b.total_wh / 68.096 * 100.0).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn tiny_segment_is_negligible() {
        // Worst cell (Vee, Right, slot 1, Beaufort 6): 2*(379.84*15.6 - 1063.304) + 180 W for 1/15.6 s.
        let bound = (2.0 * (379.84 * 15.6 - 1063.304) + 180.0) / 15.6 / 3600.0 / 68.096 * 100.0;
        let model = AeroModel::default();
        let mut worst: f64 = 0.0;
        for dir in WindDirection::ALL {
            for f in Formation::ALL {
                let e =
                    segment_energy(&seg(1, 1.0, 13.8, dir), &Swarm::default(), f, &model).unwrap();
                worst = e.iter().map(|b| b.pct_of_battery).fold(worst, f64::max);
            }
        }
        assert!((worst - bound).abs() < 1e-6, "{worst} vs {bound}");
        assert!(worst / 100.0 < 0.01);
    }

    #[test]
    fn beaufort_six_doubles_aero_only() {
        let model = AeroModel::default();
        let swarm = Swarm::default();
        let b5 = segment_energy(
            &seg(1, 800.0, 9.0, WindDirection::Left),
            &swarm,
            Formation::Echelon,
            &model,
        )
        .unwrap();
        let b6 = segment_energy(
            &seg(1, 800.0, 12.0, WindDirection::Left),
            &swarm,
            Formation::Echelon,
            &model,
        )
        .unwrap();
        for (x, y) in b5.iter().zip(&b6) {
            assert_eq!(y.e_drag_wh, 2.0 * x.e_drag_wh);
            assert_eq!(y.e_updown_wh, 2.0 * x.e_updown_wh);
            assert_eq!(y.e_fr_wh, x.e_fr_wh);
        }
    }

    #[test]
    fn missing_wind_is_state_error() {
        let mut s = seg(3, 100.0, 1.0, WindDirection::Front);
        s.wind = None;
        let err = segment_energy(&s, &Swarm::default(), Formation::Vee, &AeroModel::default())
            .unwrap_err();
        assert!(matches!(err, Error::State(_)));
        assert!(fixed_select(&[s], &Swarm::default(), &AeroModel::default()).is_err());
    }

    #[test]
    fn algorithm_one_trace() {
        let segs = [
            seg(1, 300.0, 2.0, WindDirection::Front),
            seg(2, 300.0, 9.0, WindDirection::Front),
            seg(3, 300.0, 12.0, WindDirection::Right),
        ];
        let model = AeroModel::default();
        let plan = fixed_plan(&segs, &model).unwrap();
        assert!((plan.avg_wind_mps - 23.0 / 3.0).abs() < 1e-12);
        assert_eq!(plan.avg_beaufort, 4);
        assert_eq!(plan.dominant_direction, WindDirection::Front);
        assert_eq!(plan.formation, Formation::Vee);
        let report = fixed_select(&segs, &Swarm::default(), &model).unwrap();
        assert_eq!(report.fixed_formation, Some(Formation::Vee));
        assert!(report
            .verdicts
            .iter()
            .all(|v| v.formation == Formation::Vee));
    }

    #[test]
    fn direction_tie_break() {
        let model = AeroModel::default();
        let segs = [
            seg(1, 300.0, 2.0, WindDirection::Left),
            seg(2, 300.0, 2.0, WindDirection::Right),
            seg(3, 300.0, 2.0, WindDirection::Left),
            seg(4, 300.0, 2.0, WindDirection::Right),
        ];
        assert_eq!(
            fixed_plan(&segs, &model).unwrap().dominant_direction,
            WindDirection::Right
        );
        let three = [
            seg(1, 300.0, 2.0, WindDirection::Left),
            seg(2, 300.0, 2.0, WindDirection::Right),
            seg(3, 300.0, 2.0, WindDirection::Front),
        ];
        assert_eq!(
            fixed_plan(&three, &model).unwrap().dominant_direction,
            WindDirection::Front
        );
    }

    #[test]
    fn long_segment_rejected_with_reason() {
        let report = fixed_select(
            &[seg(9, 50_000.0, 4.0, WindDirection::Front)],
            &Swarm::default(),
            &AeroModel::default(),
        )
        .unwrap();
        let v = &report.verdicts[0];
        assert!(!v.selected);
        assert!(report.selected_ids.is_empty());
        let reason = v.reject_reason.as_deref().unwrap();
        assert!(reason.starts_with("slot 1 (drone 1)"), "{reason}");
        assert!(v.max_drone_pct() > 200.0);
    }

    #[test]
    fn empty_input_rejected() {
        assert!(matches!(
            fixed_select(&[], &Swarm::default(), &AeroModel::default()),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            adaptive_select(&[], &Swarm::default(), &AeroModel::default()),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn adaptive_uses_per_segment_winner() {
        let segs = [
            seg(1, 300.0, 4.0, WindDirection::Left),
            seg(2, 300.0, 4.0, WindDirection::Front),
            seg(3, 300.0, 4.0, WindDirection::Right),
        ];
        let r = adaptive_select(&segs, &Swarm::default(), &AeroModel::default()).unwrap();
        let f: Vec<_> = r.verdicts.iter().map(|v| v.formation).collect();
        assert_eq!(f, [Formation::Diamond, Formation::Vee, Formation::Diamond]);
        assert_eq!(r.fixed_formation, None);
    }

    #[test]
    fn partial_battery_limits_selection() {
        let model = AeroModel::default();
        let s = seg(1, 1000.0, 9.35, WindDirection::Front);
        let e = segment_energy(&s, &Swarm::default(), Formation::Vee, &model).unwrap();
        let worst = e.iter().map(|b| b.pct_of_battery).fold(0.0, f64::max);
        let mut drones: Vec<Drone> = Swarm::default().drones().to_vec();
        drones[0].battery_level_pct = worst - 1.0;
        let swarm = Swarm::new(drones.clone(), 0).unwrap();
        assert!(!adaptive_select(&[s], &swarm, &model).unwrap().verdicts[0].selected);
        drones[0].battery_level_pct = e[0].pct_of_battery;
        let swarm = Swarm::new(drones, 0).unwrap();
        let v = adaptive_select(&[s], &swarm, &model)
            .unwrap()
            .verdicts
            .remove(0);
        assert!(v.selected && v.at_limit);
    }

    #[test]
    fn swarm_validation() {
        assert!(Swarm::new(vec![Drone::default(); 4], 0).is_err());
        let bad = Drone {
            battery_level_pct: 0.0,
            ..Drone::default()
        };
        assert!(Swarm::uniform(&bad, 0).is_err());
        assert!((Drone::default().battery_wh() - 68.096).abs() < 1e-12);
    }

    #[test]
    fn csv_outputs_parse_back() {
        let segs = [
            seg(2, 50_000.0, 4.0, WindDirection::Front),
            seg(1, 300.0, 4.0, WindDirection::Right),
        ];
        let r = adaptive_select(&segs, &Swarm::default(), &AeroModel::default()).unwrap();
        let rows: Vec<ReportRow> = parse_csv(&report_csv(&r)).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].edge_id, 1);
        assert_eq!(rows[0].formation, Formation::Diamond);
        assert!(rows[0].selected && !rows[1].selected);
        assert!(rows[1].reject_reason.contains('%'));
        let detail: Vec<DetailRow> = parse_csv(&detail_csv(&r)).unwrap();
        assert_eq!(detail.len(), 10);
        assert_eq!(detail[9].slot, 5);
    }
}
