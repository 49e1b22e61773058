//! Simulation configuration and the end-to-end driver.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faults::{
    expected_seu_count, handover_spikes_from_schedule, rain_events, sample_handover_spikes,
    sample_maneuvers, sample_seu_events, FaultModelConfig, HandoverMode, ManeuverSchedule,
    PrecipitationSeries, RainSource, SECONDS_PER_DAY,
};
use crate::geometry::{
    elevation_angle, ground_station_eci, GroundStation, DEFAULT_ISL_THRESHOLD_KM,
};
use crate::orbital::{Constellation, ShellSpec, DEFAULT_EARTH_RADIUS_KM};
use crate::rng::StreamFactory;
use crate::stats::step_times;
use crate::tle::{parse_tle_text, tle_to_elements};
use crate::topology::{evaluate_links, grid_edges, handover_schedule, visibility_windows};
use crate::trace::{merge_traces, FaultEvent, FaultKind, Target};

/// Precipitation applied to every ground station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecipitationConfig {
    ConstantMmH(f64),
    /// CSV with header `t_s,mm_per_h`.
    Csv(PathBuf),
}

fn default_step() -> f64 {
    10.0
}

fn default_threshold() -> f64 {
    DEFAULT_ISL_THRESHOLD_KM
}

fn default_radius() -> f64 {
    DEFAULT_EARTH_RADIUS_KM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default)]
    pub shells: Vec<ShellSpec>,
    #[serde(default)]
    pub tle_files: Vec<PathBuf>,
    #[serde(default)]
    pub ground_stations: Vec<GroundStation>,
    #[serde(default)]
    pub faults: FaultModelConfig,
    pub duration_s: f64,
    #[serde(default = "default_step")]
    pub step_s: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_threshold")]
    pub isl_threshold_km: f64,
    #[serde(default = "default_radius")]
    pub earth_radius_km: f64,
    #[serde(default)]
    pub precipitation: Option<PrecipitationConfig>,
}

impl SimulationConfig {
    pub fn new(shells: Vec<ShellSpec>, duration_s: f64) -> Self {
        Self {
            shells,
            tle_files: Vec::new(),
            ground_stations: Vec::new(),
            faults: FaultModelConfig::default(),
            duration_s,
            step_s: default_step(),
            seed: 0,
            isl_threshold_km: default_threshold(),
            earth_radius_km: default_radius(),
            precipitation: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a JSON document; relative paths inside it resolve against the
    /// document's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for f in &mut cfg.tle_files {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
        if let Some(PrecipitationConfig::Csv(p)) = &mut cfg.precipitation {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::Config(format!("duration_s must be positive, got {}", self.duration_s)));
        }
        if !(self.step_s > 0.0 && self.step_s.is_finite()) {
            return Err(Error::Config(format!("step_s must be positive, got {}", self.step_s)));
        }
        if !(self.earth_radius_km > 0.0) {
            return Err(Error::Config("earth_radius_km must be positive".into()));
        }
        if !self.isl_threshold_km.is_finite() {
            return Err(Error::Config("isl_threshold_km must be finite".into()));
        }
        if self.shells.is_empty() && self.tle_files.is_empty() {
            return Err(Error::Config("at least one of shells or tle_files must be non-empty".into()));
        }
        for (i, s) in self.shells.iter().enumerate() {
            s.validate()
                .map_err(|e| Error::Config(format!("shells[{i}]: {e}")))?;
        }
        let mut ids = BTreeSet::new();
        for (i, gs) in self.ground_stations.iter().enumerate() {
            gs.validate()
                .map_err(|e| Error::Config(format!("ground_stations[{i}]: {e}")))?;
            if !ids.insert(gs.id.as_str()) {
                return Err(Error::Config(format!("ground_stations[{i}]: duplicate id {}", gs.id)));
            }
        }
        if let Some(PrecipitationConfig::ConstantMmH(v)) = self.precipitation {
            if !(v >= 0.0) {
                return Err(Error::Config(format!("precipitation.constant_mm_h must be >= 0, got {v}")));
            }
        }
        self.faults.validate()
    }
}

/// Builds shells then one catalog group per TLE file. Returns the
/// constellation and any warnings about the circular approximation.
pub fn build_from_config(cfg: &SimulationConfig) -> Result<(Constellation, Vec<String>)> {
    let mut c = Constellation::empty(cfg.earth_radius_km);
    let mut warnings = Vec::new();
    for (i, s) in cfg.shells.iter().enumerate() {
        c.add_shell(s)
            .map_err(|e| Error::Config(format!("shells[{i}]: {e}")))?;
    }
    for (i, path) in cfg.tle_files.iter().enumerate() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("tle_files[{i}] ({}): {e}", path.display())))?;
        let mut elements = Vec::new();
        for entry in parse_tle_text(&text) {
            let rec = entry.record.map_err(|e| {
                Error::Config(format!(
                    "tle_files[{i}] ({}) record at line {}: {e}",
                    path.display(),
                    entry.first_line
                ))
            })?;
            if rec.eccentricity_warning() {
                warnings.push(format!(
                    "catalog {} eccentricity {} > 0.02; circular approximation is coarse",
                    rec.catalog_number, rec.eccentricity
                ));
            }
            elements.push(tle_to_elements(&rec)?);
        }
        c.add_catalog(elements)?;
    }
    Ok((c, warnings))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub satellites: usize,
    pub isl_links: usize,
    pub event_counts: BTreeMap<String, usize>,
    /// Links whose minimum grazing altitude over the run is below threshold.
    pub infeasible_fraction_per_link_min: f64,
    /// Link-time samples below threshold.
    pub infeasible_fraction_per_step: f64,
    pub seu_expected: f64,
    pub seu_sampled: usize,
    pub warnings: Vec<String>,
    pub resolved_config: SimulationConfig,
}

impl fmt::Display for SimulationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "satellites: {}", self.satellites)?;
        writeln!(f, "isl_links: {}", self.isl_links)?;
        writeln!(f, "events:")?;
        for (k, n) in &self.event_counts {
            writeln!(f, "  {k}: {n}")?;
        }
        writeln!(f, "infeasible_fraction_per_link_min: {:.6}", self.infeasible_fraction_per_link_min)?;
        writeln!(f, "infeasible_fraction_per_step: {:.6}", self.infeasible_fraction_per_step)?;
        writeln!(f, "seu_expected: {:.3}", self.seu_expected)?;
        writeln!(f, "seu_sampled: {}", self.seu_sampled)?;
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        writeln!(f, "resolved_config:")?;
        let json = serde_json::to_string_pretty(&self.resolved_config).map_err(|_| fmt::Error)?;
        writeln!(f, "{json}")
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub events: Vec<FaultEvent>,
    pub summary: SimulationSummary,
}

struct IslPass {
    events: Vec<FaultEvent>,
    links: usize,
    per_link_min_fraction: f64,
    per_step_fraction: f64,
}

/// Steps the +GRID links over the run and emits `isl_down` for links that
/// start non-viable and at every viability transition, snapped to steps.
fn isl_pass(
    cfg: &SimulationConfig,
    c: &Constellation,
    maneuvers: &ManeuverSchedule,
) -> Result<IslPass> {
    let edges = grid_edges(c);
    let times = step_times(0.0, cfg.duration_s, cfg.step_s)?;
    let mut viable: Vec<Option<bool>> = vec![None; edges.len()];
    let mut min_grazing = vec![f64::INFINITY; edges.len()];
    let mut below = 0usize;
    let mut events = Vec::new();
    for &t in &times {
        let positions = c
            .iter()
            .map(|(id, el)| (*id, maneuvers.position(id, el, t)))
            .collect();
        let links = evaluate_links(&edges, &positions, cfg.isl_threshold_km, c.earth_radius_km());
        for (k, l) in links.iter().enumerate() {
            min_grazing[k] = min_grazing[k].min(l.grazing_km);
            if !l.viable {
                below += 1;
            }
            let changed = match viable[k] {
                None => !l.viable,
                Some(v) => v != l.viable,
            };
            if changed {
                let kind = if l.viable { FaultKind::IslUp } else { FaultKind::IslDown };
                events.push(FaultEvent::new(
                    t,
                    kind,
                    Target::isl(l.a, l.b),
                    [("grazing_km", l.grazing_km)],
                )?);
            }
            viable[k] = Some(l.viable);
        }
    }
    let n = edges.len();
    let samples = n * times.len();
    let frac = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(IslPass {
        events,
        links: n,
        per_link_min_fraction: frac(
            min_grazing.iter().filter(|&&g| g < cfg.isl_threshold_km).count(),
            n,
        ),
        per_step_fraction: frac(below, samples),
    })
}

/// Runs every model over `[0, duration_s)` and merges the traces.
pub fn run_simulation(cfg: &SimulationConfig) -> Result<SimulationOutput> {
    cfg.validate()?;
    let (constellation, warnings) = build_from_config(cfg)?;
    let streams = StreamFactory::new(cfg.seed);
    let fleet = constellation.ids();
    let (t0, t1) = (0.0, cfg.duration_s);
    let faults = &cfg.faults;

    let seu = sample_seu_events(faults, &fleet, t0, t1, &streams);
    let maneuver_list = sample_maneuvers(faults, &fleet, t0, t1, &streams);
    let maneuvers = ManeuverSchedule::new(&maneuver_list);
    let maneuver_events = maneuvers.to_events(t0, t1);
    let isl = isl_pass(cfg, &constellation, &maneuvers)?;

    let gs_ids: Vec<String> = cfg.ground_stations.iter().map(|g| g.id.clone()).collect();
    let rain = match &cfg.precipitation {
        None => Vec::new(),
        Some(PrecipitationConfig::ConstantMmH(v)) => {
            rain_events(faults, &gs_ids, &RainSource::Constant(*v), t0, t1)?
        }
        Some(PrecipitationConfig::Csv(path)) => {
            let series = PrecipitationSeries::from_path(path)
                .map_err(|e| Error::Config(format!("precipitation.csv ({}): {e}", path.display())))?;
            rain_events(faults, &gs_ids, &RainSource::Series(series), t0, t1)?
        }
    };

    let handovers = match faults.handover_mode {
        HandoverMode::Off => Vec::new(),
        HandoverMode::Renewal => sample_handover_spikes(faults, &gs_ids, t0, t1, &streams),
        HandoverMode::Geometric => {
            let r = constellation.earth_radius_km();
            let mut all = Vec::new();
            for gs in &cfg.ground_stations {
                let windows = visibility_windows(gs, &constellation, t0, t1, cfg.step_s)?;
                let schedule = handover_schedule(&windows, cfg.step_s, |sat, t| {
                    let el = constellation.get(sat).expect("window satellite exists");
                    elevation_angle(&ground_station_eci(gs, t, r), &el.propagate(t, 0.0))
                        .unwrap_or(-90.0)
                });
                all.extend(handover_spikes_from_schedule(faults, &gs.id, &schedule, &streams));
            }
            all.sort_by(crate::trace::event_order);
            all
        }
    };

    let events = merge_traces(vec![seu, maneuver_events, isl.events, rain, handovers])?;

    let mut event_counts: BTreeMap<String, usize> =
        FaultKind::ALL.iter().map(|k| (k.as_str().to_string(), 0)).collect();
    for e in &events {
        *event_counts.entry(e.kind.as_str().to_string()).or_default() += 1;
    }
    let seu_sampled = event_counts["device_reboot"] + event_counts["device_permanent_failure"];
    let summary = SimulationSummary {
        satellites: constellation.len(),
        isl_links: isl.links,
        event_counts,
        infeasible_fraction_per_link_min: isl.per_link_min_fraction,
        infeasible_fraction_per_step: isl.per_step_fraction,
        seu_expected: expected_seu_count(
            faults.seu_rate_per_device_day,
            faults.devices_per_satellite,
            constellation.len(),
            cfg.duration_s / SECONDS_PER_DAY,
        ),
        seu_sampled,
        warnings,
        resolved_config: cfg.clone(),
    };
    Ok(SimulationOutput { events, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unknown_keys_and_names_fields() {
        let err = SimulationConfig::from_json(r#"{"duration_s": 10, "shelss": []}"#).unwrap_err();
        assert!(err.to_string().contains("shelss"), "{err}");
        let err = SimulationConfig::from_json(
            r#"{"duration_s": 10, "faults": {"seu_rate": 1}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("seu_rate"), "{err}");
    }

    #[test]
    fn validation_messages() {
        let mut c = SimulationConfig::new(vec![], 10.0);
        assert!(c.validate().unwrap_err().to_string().contains("shells"));
        c.shells.push(ShellSpec::new(550.0, 53.0, 0, 3));
        assert!(c.validate().unwrap_err().to_string().contains("shells[0]"));
        c.shells[0].planes = 3;
        c.duration_s = 0.0;
        assert!(c.validate().unwrap_err().to_string().contains("duration_s"));
        c.duration_s = 10.0;
        c.ground_stations = vec![GroundStation::new("a", 0.0, 0.0), GroundStation::new("a", 1.0, 0.0)];
        assert!(c.validate().unwrap_err().to_string().contains("ground_stations[1]"));
    }

    #[test]
    fn defaults_are_materialized() {
        let c = SimulationConfig::from_json(
            r#"{"shells":[{"altitude_km":550,"inclination_deg":53,"planes":3,"sats_per_plane":3}],"duration_s":60}"#,
        )
        .unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["step_s"], 10.0);
        assert_eq!(v["isl_threshold_km"], 80.0);
        assert_eq!(v["faults"]["devices_per_satellite"], 60);
        assert_eq!(v["shells"][0]["raan_spread_deg"], 360.0);
    }

    #[test]
    fn quiet_run_has_only_isl_events() {
        let mut cfg = SimulationConfig::new(vec![ShellSpec::starlink_gen1_polar()], 600.0);
        cfg.faults = FaultModelConfig::quiet();
        cfg.ground_stations.push(GroundStation::new("g", 45.0, 7.0));
        let out = run_simulation(&cfg).unwrap();
        assert!(!out.events.is_empty());
        assert!(out
            .events
            .iter()
            .all(|e| matches!(e.kind, FaultKind::IslDown | FaultKind::IslUp)));
    }
}
