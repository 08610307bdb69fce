use std::collections::BTreeMap;

use proptest::prelude::*;
use sdaas_core::aero::{AeroModel, Formation};
use sdaas_core::network::{load_network, save_network, SkywayNetwork, SkywayNode, SkywaySegment};
use sdaas_core::selection::{adaptive_select, fixed_select, segment_energy, Swarm};
use sdaas_core::wind::{
    beaufort_from_speed, wind_for_segment, SpeedDistribution, WindCondition, WindDirection,
};

fn micro(v: i64) -> f64 {
    v as f64 / 1e6
}

fn direction() -> impl Strategy<Value = WindDirection> {
    prop_oneof![
        Just(WindDirection::Front),
        Just(WindDirection::Right),
        Just(WindDirection::Left)
    ]
}

fn segments() -> impl Strategy<Value = Vec<SkywaySegment>> {
    prop::collection::vec((1.0f64..3000.0, 0.0f64..=13.8, direction()), 1..40).prop_map(|v| {
        v.into_iter()
            .enumerate()
            .map(|(i, (len, speed, dir))| SkywaySegment {
                id: i as u64 * 3 + 1,
                src: 0,
                dst: 1,
                length_m: len,
                wind: Some(WindCondition::new(speed, dir).unwrap()),
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn beaufort_is_monotone(a in 0.0f64..=13.8, b in 0.0f64..=13.8) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(beaufort_from_speed(lo).unwrap() <= beaufort_from_speed(hi).unwrap());
    }

    #[test]
    fn save_load_round_trip(
        coords in prop::collection::btree_map(0u64..500, (-10_000_000_000i64..10_000_000_000, -10_000_000_000i64..10_000_000_000), 2..30),
        picks in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>(), prop::option::of(1i64..5_000_000_000)), 0..40),
    ) {
        let nodes: Vec<SkywayNode> = coords.iter().map(|(&id, &(x, y))| SkywayNode { id, x: micro(x), y: micro(y) }).collect();
        let ids: Vec<u64> = coords.keys().copied().collect();
        let mut segments = Vec::new();
        for (i, (a, b, len)) in picks.iter().enumerate() {
            let (src, dst) = (*a.get(&ids), *b.get(&ids));
            if src == dst { continue; }
            let (p, q) = (&nodes[ids.binary_search(&src).unwrap()], &nodes[ids.binary_search(&dst).unwrap()]);
            let geometric = ((p.x - q.x).hypot(p.y - q.y) * 1e6).round() / 1e6;
            let length_m = len.map(micro).unwrap_or(geometric);
            if length_m <= 0.0 { continue; }
            segments.push(SkywaySegment { id: i as u64, src, dst, length_m, wind: None });
        }
        let net = SkywayNetwork::new(nodes, segments).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (n, e) = (dir.path().join("n.csv"), dir.path().join("e.csv"));
        save_network(&net, &n, &e).unwrap();
        let back = load_network(&n, &e).unwrap();
        prop_assert_eq!(back.nodes(), net.nodes());
        for (x, y) in back.segments().iter().zip(net.segments()) {
            prop_assert_eq!((x.id, x.src, x.dst), (y.id, y.src, y.dst));
            prop_assert!((x.length_m - y.length_m).abs() <= 1e-9);
        }
    }

    #[test]
    fn wind_draw_depends_only_on_seed_and_id(seed in any::<u64>(), id in any::<u64>()) {
        let dist = SpeedDistribution::default();
        let w = wind_for_segment(seed, id, &dist).unwrap();
        prop_assert_eq!(w, wind_for_segment(seed, id, &dist).unwrap());
        prop_assert!((0.0..=13.8).contains(&w.speed_mps()));
        prop_assert_eq!(w.beaufort(), beaufort_from_speed(w.speed_mps()).unwrap());
    }

    #[test]
    fn selected_formation_dominates(speed in 0.0f64..=13.8, dir in direction()) {
        let model = AeroModel::default();
        let best = model.select_formation(speed, dir).unwrap();
        let b = beaufort_from_speed(speed).unwrap();
        let p = model.swarm_aero_power(best, dir, b).unwrap();
        for f in Formation::ALL {
            prop_assert!(p <= model.swarm_aero_power(f, dir, b).unwrap());
        }
    }

    #[test]
    fn energy_components_add_up(segs in segments(), f in prop::sample::select(Formation::ALL.to_vec())) {
        let model = AeroModel::default();
        for s in &segs {
            for e in segment_energy(s, &Swarm::default(), f, &model).unwrap() {
                prop_assert!((e.total_wh - (e.e_fr_wh + e.e_drag_wh + e.e_updown_wh)).abs() <= 1e-9);
                prop_assert!((e.pct_of_battery - e.total_wh / 68.096 * 100.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn reports_are_closed_and_adaptive_dominates(segs in segments(), level in 1.0f64..=100.0) {
        let model = AeroModel::default();
        let drone = sdaas_core::Drone { battery_level_pct: level, ..Default::default() };
        let swarm = Swarm::uniform(&drone, 0).unwrap();
        let fixed = fixed_select(&segs, &swarm, &model).unwrap();
        let adaptive = adaptive_select(&segs, &swarm, &model).unwrap();
        for r in [&fixed, &adaptive] {
            let expect: std::collections::BTreeSet<u64> = r.verdicts.iter()
                .filter(|v| v.per_drone.iter().all(|e| e.pct_of_battery <= level))
                .map(|v| v.segment_id).collect();
            prop_assert_eq!(&r.selected_ids, &expect);
            prop_assert!(r.verdicts.windows(2).all(|w| w[0].segment_id < w[1].segment_id));
        }
        for (f, a) in fixed.verdicts.iter().zip(&adaptive.verdicts) {
            prop_assert!(a.mean_aero_wh() <= f.mean_aero_wh() + 1e-12);
        }
        prop_assert_eq!(&fixed, &fixed_select(&segs, &swarm, &model).unwrap());
    }
}

#[test]
fn uniform_wind_everywhere_makes_policies_agree() {
    let model = AeroModel::default();
    for dir in WindDirection::ALL {
        let segs: Vec<SkywaySegment> = (0..20)
            .map(|i| SkywaySegment {
                id: i,
                src: 0,
                dst: 1,
                length_m: 100.0 + 97.0 * i as f64,
                wind: Some(WindCondition::new(6.5, dir).unwrap()),
            })
            .collect();
        let f = fixed_select(&segs, &Swarm::default(), &model).unwrap();
        let a = adaptive_select(&segs, &Swarm::default(), &model).unwrap();
        assert_eq!(f.verdicts, a.verdicts);
        assert_eq!(f.selected_ids, a.selected_ids);
    }
}

#[test]
fn direction_frequencies_are_balanced() {
    // 10,000 uniform trinomial draws: sd of each frequency is sqrt(p(1-p)/n) ≈ 0.0047,
    // so [0.31, 0.36] sits beyond 4.9 sd on either side of 1/3 (two-sided p < 1e-6).
    let dist = SpeedDistribution::default();
    let mut counts: BTreeMap<WindDirection, usize> = BTreeMap::new();
    for id in 0..10_000 {
        *counts
            .entry(wind_for_segment(42, id, &dist).unwrap().direction())
            .or_default() += 1;
    }
    for (d, c) in counts {
        let freq = c as f64 / 10_000.0;
        assert!((0.31..=0.36).contains(&freq), "{d}: {freq}");
    }
}
