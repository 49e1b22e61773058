//! Fault models: radiation upsets and dose, rain fade, handover loss spikes
//! and conjunction-avoidance maneuvers.
//!
//! Stochastic samplers take a [`StreamFactory`] and draw from one stream per
//! `(model, target)`, so results do not depend on evaluation order.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SPEED_OF_LIGHT_KM_S;
use crate::orbital::{mean_motion, CircularElements, EciPosition, SatelliteId};
use crate::rng::StreamFactory;
use crate::topology::Handover;
use crate::trace::{event_order, FaultEvent, FaultKind, Target};

pub const SECONDS_PER_DAY: f64 = 86_400.0;
pub const SECONDS_PER_YEAR: f64 = 365.25 * SECONDS_PER_DAY;

/// Lower and upper per-device SEU rates, events/device/day.
pub const SEU_RATE_LOW: f64 = 1e-4;
pub const SEU_RATE_HIGH: f64 = 1e-3;

/// Overlapping maneuvers are summed and clamped to this magnitude.
pub const MAX_ALTITUDE_OFFSET_KM: f64 = 10.0;

// ============================================================================
// Configuration
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandoverMode {
    /// Renewal process with uniform inter-arrival times.
    Renewal,
    /// Spikes at the attachment changes of the geometric handover schedule.
    Geometric,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaultModelConfig {
    pub seu_rate_per_device_day: f64,
    pub devices_per_satellite: u32,
    pub seu_downtime_s: f64,
    pub seu_permanent_prob: f64,
    pub tid_limit_krad: f64,
    pub dose_profile: DoseProfile,
    pub mission_years: f64,
    pub rain_light_mm_h: f64,
    pub rain_moderate_mm_h: f64,
    pub rain_moderate_multiplier: f64,
    pub rain_latency_factor: f64,
    pub handover_mode: HandoverMode,
    pub handover_min_s: f64,
    pub handover_max_s: f64,
    pub handover_loss_min: f64,
    pub handover_loss_max: f64,
    pub handover_spike_s: f64,
    pub maneuver_rate_per_sat_year: f64,
    pub maneuver_dh_min_km: f64,
    pub maneuver_dh_max_km: f64,
    pub maneuver_dwell_s: f64,
}

impl Default for FaultModelConfig {
    fn default() -> Self {
        Self {
            seu_rate_per_device_day: SEU_RATE_LOW,
            devices_per_satellite: 60,
            seu_downtime_s: 30.0,
            seu_permanent_prob: 0.0,
            tid_limit_krad: 50.0,
            dose_profile: DoseProfile::default(),
            mission_years: 5.0,
            rain_light_mm_h: 2.0,
            rain_moderate_mm_h: 4.0,
            rain_moderate_multiplier: 120.0 / 215.0,
            rain_latency_factor: 2.0,
            handover_mode: HandoverMode::Renewal,
            handover_min_s: 60.0,
            handover_max_s: 120.0,
            handover_loss_min: 0.01,
            handover_loss_max: 0.02,
            handover_spike_s: 1.0,
            maneuver_rate_per_sat_year: 12.0,
            maneuver_dh_min_km: 1.0,
            maneuver_dh_max_km: 3.0,
            maneuver_dwell_s: SECONDS_PER_DAY,
        }
    }
}

impl FaultModelConfig {
    /// Defaults with every event-producing model switched off.
    pub fn quiet() -> Self {
        Self {
            seu_rate_per_device_day: 0.0,
            handover_mode: HandoverMode::Off,
            maneuver_rate_per_sat_year: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("seu_rate_per_device_day", self.seu_rate_per_device_day),
            ("seu_downtime_s", self.seu_downtime_s),
            ("rain_light_mm_h", self.rain_light_mm_h),
            ("rain_moderate_mm_h", self.rain_moderate_mm_h),
            ("handover_min_s", self.handover_min_s),
            ("handover_max_s", self.handover_max_s),
            ("handover_spike_s", self.handover_spike_s),
            ("maneuver_rate_per_sat_year", self.maneuver_rate_per_sat_year),
            ("maneuver_dh_min_km", self.maneuver_dh_min_km),
            ("maneuver_dh_max_km", self.maneuver_dh_max_km),
            ("maneuver_dwell_s", self.maneuver_dwell_s),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("faults.{name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("tid_limit_krad", self.tid_limit_krad), ("mission_years", self.mission_years)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("faults.{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("seu_permanent_prob", self.seu_permanent_prob),
            ("handover_loss_min", self.handover_loss_min),
            ("handover_loss_max", self.handover_loss_max),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("faults.{name} must be a probability, got {v}")));
            }
        }
        for (lo_name, lo, hi_name, hi) in [
            ("rain_light_mm_h", self.rain_light_mm_h, "rain_moderate_mm_h", self.rain_moderate_mm_h),
            ("handover_min_s", self.handover_min_s, "handover_max_s", self.handover_max_s),
            ("handover_loss_min", self.handover_loss_min, "handover_loss_max", self.handover_loss_max),
            ("maneuver_dh_min_km", self.maneuver_dh_min_km, "maneuver_dh_max_km", self.maneuver_dh_max_km),
        ] {
            if lo > hi {
                return Err(Error::Config(format!("faults.{lo_name} ({lo}) exceeds faults.{hi_name} ({hi})")));
            }
        }
        if !(self.rain_moderate_multiplier > 0.0 && self.rain_moderate_multiplier <= 1.0) {
            return Err(Error::Config(format!(
                "faults.rain_moderate_multiplier must be in (0, 1], got {}",
                self.rain_moderate_multiplier
            )));
        }
        if !(self.rain_latency_factor >= 1.0 && self.rain_latency_factor.is_finite()) {
            return Err(Error::Config(format!(
                "faults.rain_latency_factor must be >= 1, got {}",
                self.rain_latency_factor
            )));
        }
        if self.handover_mode == HandoverMode::Renewal && self.handover_max_s == 0.0 {
            return Err(Error::Config("faults.handover_max_s must be positive in renewal mode".into()));
        }
        if self.maneuver_dh_max_km > MAX_ALTITUDE_OFFSET_KM {
            return Err(Error::Config(format!(
                "faults.maneuver_dh_max_km must not exceed {MAX_ALTITUDE_OFFSET_KM} km"
            )));
        }
        self.dose_profile
            .validate()
            .map_err(|e| Error::Config(format!("faults.dose_profile: {e}")))
    }
}

// ============================================================================
// Single-event upsets
// ============================================================================

/// Expected fleet-wide SEU count: `rate · devices · satellites · days`.
pub fn expected_seu_count(rate_per_device_day: f64, devices: u32, satellites: usize, days: f64) -> f64 {
    rate_per_device_day * devices as f64 * satellites as f64 * days
}

/// Samples device reboots over `[t0, t1)`.
///
/// Each device is a homogeneous Poisson process; per satellite the
/// superposition is drawn (rate × devices) and each arrival is assigned a
/// uniformly chosen device. With probability `seu_permanent_prob` an arrival
/// is a permanent failure, after which that device emits nothing further.
pub fn sample_seu_events(
    cfg: &FaultModelConfig,
    fleet: &[SatelliteId],
    t0: f64,
    t1: f64,
    streams: &StreamFactory,
) -> Vec<FaultEvent> {
    let per_sat_rate = cfg.seu_rate_per_device_day * cfg.devices_per_satellite as f64 / SECONDS_PER_DAY;
    if !(t1 > t0) || per_sat_rate <= 0.0 {
        return Vec::new();
    }
    let exp = Exp::new(per_sat_rate).expect("positive rate");
    let mut out = Vec::new();
    for sat in fleet {
        let mut rng = streams.stream("seu", &sat.to_string());
        let mut dead = BTreeSet::new();
        let mut t = t0;
        loop {
            t += exp.sample(&mut rng);
            if t >= t1 {
                break;
            }
            let device = rng.random_range(0..cfg.devices_per_satellite);
            let permanent = rng.random::<f64>() < cfg.seu_permanent_prob;
            if dead.contains(&device) {
                continue;
            }
            let target = Target::Device { sat: *sat, device };
            let event = if permanent {
                dead.insert(device);
                FaultEvent::new(t, FaultKind::DevicePermanentFailure, target, [])
            } else {
                FaultEvent::new(t, FaultKind::DeviceReboot, target, [("downtime_s", cfg.seu_downtime_s)])
            };
            out.push(event.expect("well-formed SEU event"));
        }
    }
    out.sort_by(event_order);
    out
}

// ============================================================================
// Total ionizing dose
// ============================================================================

/// Mission dose as a function of inclination, mirrored about 90°.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoseProfile {
    /// `(inclination_deg, mission_dose_krad)`, inclinations strictly
    /// increasing within `[0, 90]`.
    pub anchors: Vec<(f64, f64)>,
    #[serde(default = "default_shielding")]
    pub shielding_label: String,
}

fn default_shielding() -> String {
    "1mm aluminum".into()
}

impl Default for DoseProfile {
    /// Coarse anchors only: ~0 krad at 0°, 40 krad peak at 73°,
    /// 35 krad at 90°. Values between anchors are interpolation, not data.
    fn default() -> Self {
        Self {
            anchors: vec![(0.0, 0.0), (73.0, 40.0), (90.0, 35.0)],
            shielding_label: default_shielding(),
        }
    }
}

impl DoseProfile {
    pub fn validate(&self) -> Result<()> {
        if self.anchors.is_empty() {
            return Err(Error::invalid("dose profile needs at least one anchor"));
        }
        for &(i, d) in &self.anchors {
            if !(0.0..=90.0).contains(&i) {
                return Err(Error::invalid(format!("anchor inclination {i} outside [0, 90]")));
            }
            if !(d >= 0.0 && d.is_finite()) {
                return Err(Error::invalid(format!("anchor dose {d} must be finite and >= 0")));
            }
        }
        if self.anchors.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("anchor inclinations must be strictly increasing"));
        }
        Ok(())
    }

    /// Mission dose at `inclination_deg` in `[0, 180]`; flat beyond the
    /// outermost anchors.
    pub fn mission_dose(&self, inclination_deg: f64) -> Result<f64> {
        if !(0.0..=180.0).contains(&inclination_deg) {
            return Err(Error::invalid(format!(
                "inclination must be in [0, 180], got {inclination_deg}"
            )));
        }
        let i = if inclination_deg > 90.0 {
            180.0 - inclination_deg
        } else {
            inclination_deg
        };
        let a = &self.anchors;
        let (first, last) = (a[0], a[a.len() - 1]);
        if i <= first.0 {
            return Ok(first.1);
        }
        if i >= last.0 {
            return Ok(last.1);
        }
        let k = a.partition_point(|&(x, _)| x <= i);
        let (x0, y0) = a[k - 1];
        let (x1, y1) = a[k];
        Ok(y0 + (y1 - y0) * (i - x0) / (x1 - x0))
    }
}

/// Dose rate in krad/year for a profile whose doses accumulate over
/// `mission_years`.
pub fn dose_rate(profile: &DoseProfile, inclination_deg: f64, mission_years: f64) -> Result<f64> {
    if !(mission_years > 0.0) {
        return Err(Error::invalid("mission_years must be positive"));
    }
    Ok(profile.mission_dose(inclination_deg)? / mission_years)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TidAssessment {
    pub survives: bool,
    pub dose_krad: f64,
    pub dose_rate_krad_per_year: f64,
    /// `f64::INFINITY` when the dose rate is zero.
    pub lifetime_years: f64,
}

pub fn tid_survival(
    profile: &DoseProfile,
    inclination_deg: f64,
    limit_krad: f64,
    mission_years: f64,
) -> Result<TidAssessment> {
    if !(limit_krad > 0.0) {
        return Err(Error::invalid("TID limit must be positive"));
    }
    let rate = dose_rate(profile, inclination_deg, mission_years)?;
    let dose = rate * mission_years;
    Ok(TidAssessment {
        survives: dose < limit_krad,
        dose_krad: dose,
        dose_rate_krad_per_year: rate,
        lifetime_years: if rate > 0.0 { limit_krad / rate } else { f64::INFINITY },
    })
}

// ============================================================================
// Rain fade
// ============================================================================

fn rain_fraction(cfg: &FaultModelConfig, precip_mm_h: f64) -> Result<f64> {
    if !(precip_mm_h >= 0.0) {
        return Err(Error::invalid(format!(
            "precipitation must be >= 0 mm/h, got {precip_mm_h}"
        )));
    }
    let (lo, hi) = (cfg.rain_light_mm_h, cfg.rain_moderate_mm_h);
    Ok(if precip_mm_h <= lo {
        0.0
    } else if precip_mm_h >= hi {
        1.0
    } else {
        (precip_mm_h - lo) / (hi - lo)
    })
}

/// Ground-link throughput factor: 1 up to the light-rain threshold, the
/// moderate multiplier from the moderate threshold on, linear between.
pub fn rain_multiplier(cfg: &FaultModelConfig, precip_mm_h: f64) -> Result<f64> {
    let f = rain_fraction(cfg, precip_mm_h)?;
    Ok(1.0 + (cfg.rain_moderate_multiplier - 1.0) * f)
}

/// Latency inflation on the same ramp as [`rain_multiplier`], from 1 to
/// `rain_latency_factor`.
pub fn rain_latency_factor(cfg: &FaultModelConfig, precip_mm_h: f64) -> Result<f64> {
    let f = rain_fraction(cfg, precip_mm_h)?;
    Ok(1.0 + (cfg.rain_latency_factor - 1.0) * f)
}

/// Precipitation over time with step semantics: each row holds until the
/// next. Before the first row the rate is 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrecipitationSeries {
    points: Vec<(f64, f64)>,
}

#[derive(Debug, Deserialize)]
struct PrecipRow {
    t_s: f64,
    mm_per_h: f64,
}

impl PrecipitationSeries {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::invalid("precipitation t_s must be strictly increasing"));
        }
        if let Some(&(t, v)) = points.iter().find(|&&(t, v)| !t.is_finite() || !(v >= 0.0)) {
            return Err(Error::invalid(format!("bad precipitation row t_s={t} mm_per_h={v}")));
        }
        Ok(Self { points })
    }

    /// Reads CSV with header `t_s,mm_per_h`.
    pub fn from_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["t_s", "mm_per_h"] {
            return Err(Error::invalid("precipitation CSV header must be `t_s,mm_per_h`"));
        }
        let mut points = Vec::new();
        for row in reader.deserialize::<PrecipRow>() {
            let row = row?;
            points.push((row.t_s, row.mm_per_h));
        }
        Self::new(points)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    pub fn at(&self, t: f64) -> f64 {
        match self.points.partition_point(|&(ts, _)| ts <= t) {
            0 => 0.0,
            k => self.points[k - 1].1,
        }
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RainSource {
    Constant(f64),
    Series(PrecipitationSeries),
}

impl RainSource {
    fn at(&self, t: f64) -> f64 {
        match self {
            RainSource::Constant(v) => *v,
            RainSource::Series(s) => s.at(t),
        }
    }

    fn change_points(&self, t0: f64, t1: f64) -> Vec<f64> {
        match self {
            RainSource::Constant(_) => Vec::new(),
            RainSource::Series(s) => s
                .points
                .iter()
                .map(|&(t, _)| t)
                .filter(|&t| t > t0 && t < t1)
                .collect(),
        }
    }
}

/// `gs_link_degraded` events for every station: one at `t0` when it starts
/// degraded, then one at each change of the throughput multiplier
/// (a multiplier of 1 marks recovery).
pub fn rain_events(
    cfg: &FaultModelConfig,
    gs_ids: &[String],
    source: &RainSource,
    t0: f64,
    t1: f64,
) -> Result<Vec<FaultEvent>> {
    if !(t1 > t0) {
        return Ok(Vec::new());
    }
    let mut times = vec![t0];
    times.extend(source.change_points(t0, t1));
    let mut steps = Vec::new();
    let mut last = 1.0;
    for t in times {
        let precip = source.at(t);
        let m = rain_multiplier(cfg, precip)?;
        if m != last {
            steps.push((t, precip, m, rain_latency_factor(cfg, precip)?));
            last = m;
        }
    }
    let mut out = Vec::new();
    for gs in gs_ids {
        for &(t, precip, m, lat) in &steps {
            out.push(FaultEvent::new(
                t,
                FaultKind::GsLinkDegraded,
                Target::GroundLink(gs.clone()),
                [("precip_mm_h", precip), ("throughput_multiplier", m), ("latency_factor", lat)],
            )?);
        }
    }
    out.sort_by(event_order);
    Ok(out)
}

// ============================================================================
// Handover loss spikes
// ============================================================================

fn spike(cfg: &FaultModelConfig, gs: &str, t: f64, rng: &mut impl Rng) -> FaultEvent {
    let loss = rng.random_range(cfg.handover_loss_min..=cfg.handover_loss_max);
    FaultEvent::new(
        t,
        FaultKind::HandoverSpike,
        Target::GroundLink(gs.to_string()),
        [("loss_rate", loss), ("duration_s", cfg.handover_spike_s)],
    )
    .expect("well-formed handover spike")
}

/// Renewal-process spikes per station over `[t0, t1)`, inter-arrival
/// uniform in `[handover_min_s, handover_max_s]`.
pub fn sample_handover_spikes(
    cfg: &FaultModelConfig,
    gs_ids: &[String],
    t0: f64,
    t1: f64,
    streams: &StreamFactory,
) -> Vec<FaultEvent> {
    if !(t1 > t0) || cfg.handover_max_s <= 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for gs in gs_ids {
        let mut rng = streams.stream("handover", gs);
        let mut t = t0;
        loop {
            t += rng.random_range(cfg.handover_min_s..=cfg.handover_max_s);
            if t >= t1 {
                break;
            }
            out.push(spike(cfg, gs, t, &mut rng));
        }
    }
    out.sort_by(event_order);
    out
}

/// Spikes at the instants of a geometric handover schedule.
pub fn handover_spikes_from_schedule(
    cfg: &FaultModelConfig,
    gs_id: &str,
    schedule: &[Handover],
    streams: &StreamFactory,
) -> Vec<FaultEvent> {
    let mut rng = streams.stream("handover", gs_id);
    let mut out: Vec<FaultEvent> = schedule
        .iter()
        .map(|h| spike(cfg, gs_id, h.t_s, &mut rng))
        .collect();
    out.sort_by(event_order);
    out
}

// ============================================================================
// Conjunction-avoidance maneuvers
// ============================================================================

/// An altitude change of `dh_km` held for `dwell_s` from `start_s`, with
/// instantaneous transitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManeuverEvent {
    pub sat: SatelliteId,
    pub start_s: f64,
    pub dh_km: f64,
    pub dwell_s: f64,
}

impl ManeuverEvent {
    pub fn end_s(&self) -> f64 {
        self.start_s + self.dwell_s
    }

    pub fn active_at(&self, t: f64) -> bool {
        self.start_s <= t && t < self.end_s()
    }
}

/// Per-satellite Poisson maneuvers over `[t0, t1)`, sorted by start then
/// satellite. `|dh|` is uniform in `[dh_min, dh_max]` with a uniform sign.
pub fn sample_maneuvers(
    cfg: &FaultModelConfig,
    fleet: &[SatelliteId],
    t0: f64,
    t1: f64,
    streams: &StreamFactory,
) -> Vec<ManeuverEvent> {
    let rate = cfg.maneuver_rate_per_sat_year / SECONDS_PER_YEAR;
    if !(t1 > t0) || rate <= 0.0 {
        return Vec::new();
    }
    let exp = Exp::new(rate).expect("positive rate");
    let mut out = Vec::new();
    for sat in fleet {
        let mut rng = streams.stream("maneuver", &sat.to_string());
        let mut t = t0;
        loop {
            t += exp.sample(&mut rng);
            if t >= t1 {
                break;
            }
            let magnitude = rng.random_range(cfg.maneuver_dh_min_km..=cfg.maneuver_dh_max_km);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            out.push(ManeuverEvent {
                sat: *sat,
                start_s: t,
                dh_km: sign * magnitude,
                dwell_s: cfg.maneuver_dwell_s,
            });
        }
    }
    out.sort_by(|a, b| a.start_s.total_cmp(&b.start_s).then(a.sat.cmp(&b.sat)));
    out
}

/// Sum of `dh` over `sat`'s maneuvers active at `t`, clamped to ±10 km.
pub fn active_altitude_offset(events: &[ManeuverEvent], sat: &SatelliteId, t: f64) -> f64 {
    events
        .iter()
        .filter(|e| e.sat == *sat && e.active_at(t))
        .map(|e| e.dh_km)
        .sum::<f64>()
        .clamp(-MAX_ALTITUDE_OFFSET_KM, MAX_ALTITUDE_OFFSET_KM)
}

/// Upper bound on the one-way delay change of any link when each endpoint
/// moves radially by at most `dh_km`.
pub fn maneuver_delay_bound_s(dh_km: f64) -> f64 {
    2.0 * dh_km.abs() / SPEED_OF_LIGHT_KM_S
}

/// Maneuvers indexed by satellite.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ManeuverSchedule {
    by_sat: BTreeMap<SatelliteId, Vec<ManeuverEvent>>,
}

impl ManeuverSchedule {
    pub fn new(events: &[ManeuverEvent]) -> Self {
        let mut by_sat: BTreeMap<SatelliteId, Vec<ManeuverEvent>> = BTreeMap::new();
        for e in events {
            by_sat.entry(e.sat).or_default().push(*e);
        }
        for v in by_sat.values_mut() {
            v.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));
        }
        Self { by_sat }
    }

    pub fn is_empty(&self) -> bool {
        self.by_sat.is_empty()
    }

    pub fn events_for(&self, sat: &SatelliteId) -> &[ManeuverEvent] {
        self.by_sat.get(sat).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn offset_km(&self, sat: &SatelliteId, t: f64) -> f64 {
        active_altitude_offset(self.events_for(sat), sat, t)
    }

    /// Position with phase accumulated continuously: the argument of
    /// latitude advances at the mean motion of whichever altitude was active
    /// over each interval since epoch. Equals
    /// [`CircularElements::propagate`] when the offset is constant.
    pub fn position(&self, sat: &SatelliteId, el: &CircularElements, t: f64) -> EciPosition {
        let events = self.events_for(sat);
        if events.is_empty() {
            return el.propagate(t, 0.0);
        }
        let mut cuts: Vec<f64> = events
            .iter()
            .flat_map(|e| [e.start_s, e.end_s()])
            .filter(|&x| x > el.epoch_s && x < t)
            .collect();
        cuts.push(t);
        cuts.sort_by(f64::total_cmp);
        let mut u = el.phase_deg.to_radians();
        let mut from = el.epoch_s;
        for to in cuts {
            if to > from {
                let dh = active_altitude_offset(events, sat, 0.5 * (from + to));
                u += mean_motion(el.semi_major_axis_km + dh) * (to - from);
                from = to;
            }
        }
        el.position_at(el.semi_major_axis_km + self.offset_km(sat, t), u)
    }

    /// `maneuver_start` / `maneuver_end` events within `[t0, t1)`.
    pub fn to_events(&self, t0: f64, t1: f64) -> Vec<FaultEvent> {
        let mut out = Vec::new();
        for e in self.by_sat.values().flatten() {
            if e.start_s >= t0 && e.start_s < t1 {
                out.push(
                    FaultEvent::new(
                        e.start_s,
                        FaultKind::ManeuverStart,
                        Target::Satellite(e.sat),
                        [("dh_km", e.dh_km), ("dwell_s", e.dwell_s)],
                    )
                    .expect("well-formed maneuver start"),
                );
            }
            let end = e.end_s();
            if end >= t0 && end < t1 {
                out.push(
                    FaultEvent::new(end, FaultKind::ManeuverEnd, Target::Satellite(e.sat), [("dh_km", e.dh_km)])
                        .expect("well-formed maneuver end"),
                );
            }
        }
        out.sort_by(event_order);
        out
    }
}
