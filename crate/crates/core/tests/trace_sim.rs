use leofault::faults::FaultModelConfig;
use leofault::geometry::GroundStation;
use leofault::orbital::{SatelliteId, ShellSpec};
use leofault::sim::{run_simulation, PrecipitationConfig, SimulationConfig};
use leofault::topology::link_snapshot;
use leofault::trace::{
    merge_traces, parse_event, read_trace, serialize_event, trace_to_string, FaultEvent,
    FaultKind, Target,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sat(rng: &mut impl Rng) -> SatelliteId {
    SatelliteId::new(rng.random_range(0..3), rng.random_range(0..80), rng.random_range(0..60))
}

fn random_event(rng: &mut impl Rng) -> FaultEvent {
    let kind = FaultKind::ALL[rng.random_range(0..FaultKind::ALL.len())];
    let target = match kind {
        FaultKind::DeviceReboot | FaultKind::DevicePermanentFailure => Target::Device {
            sat: random_sat(rng),
            device: rng.random_range(0..60),
        },
        FaultKind::GsLinkDegraded | FaultKind::HandoverSpike => {
            Target::GroundLink(format!("gs-{}", rng.random_range(0..1000)))
        }
        FaultKind::ManeuverStart | FaultKind::ManeuverEnd => Target::Satellite(random_sat(rng)),
        FaultKind::IslDown | FaultKind::IslUp => loop {
            let (a, b) = (random_sat(rng), random_sat(rng));
            if a != b {
                break Target::isl(a, b);
            }
        },
    };
    let scale = 10f64.powi(rng.random_range(-6..7));
    let params: Vec<(&str, f64)> = kind
        .param_keys()
        .iter()
        .map(|k| (*k, rng.random_range(-1.0..1.0) * scale))
        .collect();
    let t = rng.random_range(0.0..1.0) * 10f64.powi(rng.random_range(0..9));
    FaultEvent::new(t, kind, target, params).unwrap()
}

#[test]
fn random_events_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10_000 {
        let e = random_event(&mut rng);
        let line = serialize_event(&e);
        assert!(!line.contains('\n'));
        let back = parse_event(&line).unwrap_or_else(|err| panic!("{line}: {err}"));
        assert_eq!(back, e, "{line}");
        assert_eq!(serialize_event(&back), line);
    }
}

#[test]
fn merge_is_input_order_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut a: Vec<FaultEvent> = (0..200).map(|_| random_event(&mut rng)).collect();
    let mut b: Vec<FaultEvent> = (0..200).map(|_| random_event(&mut rng)).collect();
    // force timestamp collisions across the two lists
    for (x, y) in a.iter_mut().zip(b.iter_mut()).step_by(3) {
        y.t_s = x.t_s;
    }
    a.sort_by(leofault::trace::event_order);
    b.sort_by(leofault::trace::event_order);
    let ab = merge_traces(vec![a.clone(), b.clone()]).unwrap();
    let ba = merge_traces(vec![b, a]).unwrap();
    assert_eq!(trace_to_string(&ab), trace_to_string(&ba));
    assert!(ab.windows(2).all(|w| w[0].t_s <= w[1].t_s));
}

fn polar_config() -> SimulationConfig {
    let mut cfg = SimulationConfig::new(vec![ShellSpec::starlink_gen1_polar()], 3600.0);
    cfg.faults = FaultModelConfig::quiet();
    cfg
}

#[test]
fn quiet_run_has_only_isl_events() {
    let out = run_simulation(&polar_config()).unwrap();
    assert!(!out.events.is_empty());
    assert!(out
        .events
        .iter()
        .all(|e| matches!(e.kind, FaultKind::IslDown | FaultKind::IslUp)));
    assert_eq!(out.summary.seu_sampled, 0);
}

#[test]
fn polar_isl_down_names_both_endpoints() {
    let cfg = polar_config();
    let out = run_simulation(&cfg).unwrap();
    let onset = out
        .events
        .iter()
        .find(|e| e.kind == FaultKind::IslDown && e.t_s > 0.0)
        .expect("an isl_down onset after t = 0");
    let line = serialize_event(onset);
    let parsed = parse_event(&line).unwrap();
    let Target::Isl(a, b) = parsed.target else {
        panic!("isl_down must target an isl: {line}");
    };
    assert!(line.contains("\"isl\""));
    assert!(a < b);
    assert_ne!(a.plane, b.plane, "only cross-plane links dip below the threshold");

    let c = leofault::orbital::build_constellation(&cfg.shells).unwrap();
    let snap = link_snapshot(&c, parsed.t_s, cfg.isl_threshold_km);
    let link = snap.iter().find(|l| l.a == a && l.b == b).unwrap();
    assert!(!link.viable);
    assert!((link.grazing_km - parsed.param("grazing_km").unwrap()).abs() < 1e-3);
    let before = link_snapshot(&c, parsed.t_s - cfg.step_s, cfg.isl_threshold_km);
    assert!(before.iter().find(|l| l.a == a && l.b == b).unwrap().viable);
}

fn busy_config(dir: &std::path::Path) -> SimulationConfig {
    let csv = dir.join("rain.csv");
    std::fs::write(&csv, "t_s,mm_per_h\n0,0\n600,3\n1200,5\n2400,1\n").unwrap();
    let mut cfg = SimulationConfig::new(vec![ShellSpec::new(550.0, 53.0, 12, 10)], 3600.0);
    cfg.seed = 1234;
    cfg.ground_stations = vec![
        GroundStation::new("a", 47.6, -122.3),
        GroundStation::new("b", -33.9, 151.2),
    ];
    cfg.precipitation = Some(PrecipitationConfig::Csv(csv));
    cfg.faults.seu_rate_per_device_day = 0.05;
    cfg.faults.seu_permanent_prob = 0.1;
    cfg.faults.maneuver_rate_per_sat_year = 2000.0;
    cfg.faults.maneuver_dwell_s = 600.0;
    cfg
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = busy_config(dir.path());
    let first = trace_to_string(&run_simulation(&cfg).unwrap().events);
    let second = trace_to_string(&run_simulation(&cfg).unwrap().events);
    assert_eq!(first, second);
    for kind in ["device_reboot", "gs_link_degraded", "handover_spike", "maneuver_start", "maneuver_end"] {
        assert!(first.contains(kind), "missing {kind}");
    }
    let back = read_trace(first.as_bytes()).unwrap();
    assert_eq!(trace_to_string(&back), first);

    let mut other = cfg.clone();
    other.seed += 1;
    assert_ne!(trace_to_string(&run_simulation(&other).unwrap().events), first);
}

#[test]
fn adding_a_model_leaves_other_streams_alone() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = busy_config(dir.path());
    let seu = |cfg: &SimulationConfig| -> Vec<FaultEvent> {
        run_simulation(cfg)
            .unwrap()
            .events
            .into_iter()
            .filter(|e| matches!(e.kind, FaultKind::DeviceReboot | FaultKind::DevicePermanentFailure))
            .collect()
    };
    let mut no_maneuvers = cfg.clone();
    no_maneuvers.faults.maneuver_rate_per_sat_year = 0.0;
    assert_eq!(seu(&cfg), seu(&no_maneuvers));
}

#[test]
fn day_long_seu_count_matches_scaled_oracle() {
    let mut cfg = SimulationConfig::new(vec![ShellSpec::starlink_gen1_53()], 86_400.0);
    cfg.step_s = 600.0;
    cfg.seed = 2024;
    let out = run_simulation(&cfg).unwrap();
    let expected = 26.448 * 1584.0 / 4408.0;
    assert!((out.summary.seu_expected - expected).abs() < 1e-9);
    let sampled = out.summary.seu_sampled as f64;
    assert!((sampled - expected).abs() <= 3.0 * expected.sqrt(), "{sampled} vs {expected}");
}
