//! Canonical fault events and the JSON-lines trace format.
//!
//! A trace file starts with the header line `{"schema":"leofault/1"}`
//! followed by one event object per line:
//!
//! ```text
//! {"t":12.5,"kind":"device_reboot","target":{"device":{"sat":{"shell":0,"plane":3,"index":7},"device":12}},"params":{"downtime_s":30.0}}
//! ```
//!
//! Parameter keys are fixed per kind:
//!
//! | kind                       | target        | params                                              |
//! |----------------------------|---------------|-----------------------------------------------------|
//! | `device_reboot`            | `device`      | `downtime_s`                                        |
//! | `device_permanent_failure` | `device`      | (none)                                              |
//! | `gs_link_degraded`         | `ground_link` | `precip_mm_h`, `throughput_multiplier`, `latency_factor` |
//! | `handover_spike`           | `ground_link` | `loss_rate`, `duration_s`                           |
//! | `maneuver_start`           | `satellite`   | `dh_km`, `dwell_s`                                  |
//! | `maneuver_end`             | `satellite`   | `dh_km`                                             |
//! | `isl_down`                 | `isl`         | `grazing_km`                                        |
//! | `isl_up`                   | `isl`         | `grazing_km`                                        |
//!
//! Times and parameters carry at most 9 significant digits.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orbital::SatelliteId;

pub const SCHEMA_HEADER: &str = r#"{"schema":"leofault/1"}"#;

pub const SIGNIFICANT_DIGITS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    DeviceReboot,
    DevicePermanentFailure,
    GsLinkDegraded,
    HandoverSpike,
    ManeuverStart,
    ManeuverEnd,
    IslDown,
    IslUp,
}

impl FaultKind {
    pub const ALL: [FaultKind; 8] = [
        FaultKind::DeviceReboot,
        FaultKind::DevicePermanentFailure,
        FaultKind::GsLinkDegraded,
        FaultKind::HandoverSpike,
        FaultKind::ManeuverStart,
        FaultKind::ManeuverEnd,
        FaultKind::IslDown,
        FaultKind::IslUp,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FaultKind::DeviceReboot => "device_reboot",
            FaultKind::DevicePermanentFailure => "device_permanent_failure",
            FaultKind::GsLinkDegraded => "gs_link_degraded",
            FaultKind::HandoverSpike => "handover_spike",
            FaultKind::ManeuverStart => "maneuver_start",
            FaultKind::ManeuverEnd => "maneuver_end",
            FaultKind::IslDown => "isl_down",
            FaultKind::IslUp => "isl_up",
        }
    }

    /// Parameter keys every event of this kind carries, sorted.
    pub fn param_keys(&self) -> &'static [&'static str] {
        match self {
            FaultKind::DeviceReboot => &["downtime_s"],
            FaultKind::DevicePermanentFailure => &[],
            FaultKind::GsLinkDegraded => &["latency_factor", "precip_mm_h", "throughput_multiplier"],
            FaultKind::HandoverSpike => &["duration_s", "loss_rate"],
            FaultKind::ManeuverStart => &["dh_km", "dwell_s"],
            FaultKind::ManeuverEnd => &["dh_km"],
            FaultKind::IslDown | FaultKind::IslUp => &["grazing_km"],
        }
    }

    fn accepts(&self, target: &Target) -> bool {
        matches!(
            (self, target),
            (FaultKind::DeviceReboot | FaultKind::DevicePermanentFailure, Target::Device { .. })
                | (FaultKind::GsLinkDegraded | FaultKind::HandoverSpike, Target::GroundLink(_))
                | (FaultKind::ManeuverStart | FaultKind::ManeuverEnd, Target::Satellite(_))
                | (FaultKind::IslDown | FaultKind::IslUp, Target::Isl(_, _))
        )
    }
}

impl std::fmt::Display for FaultKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Device { sat: SatelliteId, device: u32 },
    Satellite(SatelliteId),
    /// Endpoints in ascending order.
    Isl(SatelliteId, SatelliteId),
    GroundLink(String),
}

impl Target {
    pub fn isl(a: SatelliteId, b: SatelliteId) -> Self {
        if a <= b {
            Target::Isl(a, b)
        } else {
            Target::Isl(b, a)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultEvent {
    #[serde(rename = "t")]
    pub t_s: f64,
    pub kind: FaultKind,
    pub target: Target,
    pub params: BTreeMap<String, f64>,
}

/// Rounds to [`SIGNIFICANT_DIGITS`] significant decimal digits.
pub fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

impl FaultEvent {
    /// Builds a validated event; time and parameters are rounded to 9
    /// significant digits so the event survives serialization unchanged.
    pub fn new<'a>(
        t_s: f64,
        kind: FaultKind,
        target: Target,
        params: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<Self> {
        let params = params
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Self {
            t_s,
            kind,
            target,
            params,
        }
        .normalized()
    }

    fn normalized(mut self) -> Result<Self> {
        if !(self.t_s >= 0.0 && self.t_s.is_finite()) {
            return Err(Error::invalid(format!("event time must be finite and >= 0, got {}", self.t_s)));
        }
        if !self.kind.accepts(&self.target) {
            return Err(Error::invalid(format!(
                "{} cannot target {:?}",
                self.kind, self.target
            )));
        }
        if let Target::Isl(a, b) = &self.target {
            if a >= b {
                return Err(Error::invalid("isl endpoints must be distinct and ascending"));
            }
        }
        let keys: Vec<&str> = self.params.keys().map(String::as_str).collect();
        if keys != self.kind.param_keys() {
            return Err(Error::invalid(format!(
                "{} requires params {:?}, got {:?}",
                self.kind,
                self.kind.param_keys(),
                keys
            )));
        }
        if let Some((k, _)) = self.params.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!("param {k} must be finite")));
        }
        self.t_s = round_significant(self.t_s);
        for v in self.params.values_mut() {
            *v = round_significant(*v);
        }
        Ok(self)
    }

    pub fn param(&self, key: &str) -> Option<f64> {
        self.params.get(key).copied()
    }
}

/// Deterministic total order: time, kind name, target, then parameters.
pub fn event_order(a: &FaultEvent, b: &FaultEvent) -> Ordering {
    a.t_s
        .total_cmp(&b.t_s)
        .then_with(|| a.kind.as_str().cmp(b.kind.as_str()))
        .then_with(|| a.target.cmp(&b.target))
        .then_with(|| {
            let pa = a.params.iter();
            let pb = b.params.iter();
            pa.zip(pb)
                .map(|((ka, va), (kb, vb))| ka.cmp(kb).then(va.total_cmp(vb)))
                .find(|o| o.is_ne())
                .unwrap_or(a.params.len().cmp(&b.params.len()))
        })
}

/// Merges time-sorted event lists into one list in [`event_order`].
pub fn merge_traces(traces: Vec<Vec<FaultEvent>>) -> Result<Vec<FaultEvent>> {
    for (i, trace) in traces.iter().enumerate() {
        if let Some(k) = trace.windows(2).position(|w| w[0].t_s > w[1].t_s) {
            return Err(Error::invalid(format!(
                "trace {i} is not time-sorted at position {}",
                k + 1
            )));
        }
    }
    let mut all: Vec<FaultEvent> = traces.into_iter().flatten().collect();
    all.sort_by(event_order);
    Ok(all)
}

pub fn serialize_event(e: &FaultEvent) -> String {
    serde_json::to_string(e).expect("fault events always serialize")
}

pub fn parse_event(line: &str) -> Result<FaultEvent> {
    let raw: FaultEvent = serde_json::from_str(line).map_err(|err| Error::Parse {
        offset: byte_offset(line, err.line(), err.column()),
        message: err.to_string(),
    })?;
    raw.normalized().map_err(|err| Error::Parse {
        offset: 0,
        message: err.to_string(),
    })
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

/// Writes the schema header and one line per event, each `\n`-terminated.
pub fn write_trace<W: Write>(mut out: W, events: &[FaultEvent]) -> Result<()> {
    out.write_all(SCHEMA_HEADER.as_bytes())?;
    out.write_all(b"\n")?;
    for e in events {
        out.write_all(serialize_event(e).as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn trace_to_string(events: &[FaultEvent]) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, events).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("trace is UTF-8")
}

/// Reads a trace written by [`write_trace`], checking the schema header.
pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<FaultEvent>> {
    let mut lines = input.lines();
    match lines.next() {
        Some(header) => {
            let header = header?;
            if header != SCHEMA_HEADER {
                return Err(Error::Parse {
                    offset: 0,
                    message: format!("expected schema header {SCHEMA_HEADER}"),
                });
            }
        }
        None => {
            return Err(Error::Parse {
                offset: 0,
                message: "empty trace".into(),
            })
        }
    }
    lines.map(|l| parse_event(&l?)).collect()
}
