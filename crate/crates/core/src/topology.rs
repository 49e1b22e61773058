//! +GRID inter-satellite links, ground visibility windows and handovers.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{elevation_angle, grazing_altitude, ground_station_eci, is_isl_viable, GroundStation};
use crate::orbital::{Constellation, EciPosition, SatelliteId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    IntraPlane,
    CrossPlane,
}

/// Undirected +GRID edge with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IslEdge {
    pub a: SatelliteId,
    pub b: SatelliteId,
    pub kind: LinkKind,
}

/// One edge evaluated at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IslLink {
    pub a: SatelliteId,
    pub b: SatelliteId,
    pub kind: LinkKind,
    pub grazing_km: f64,
    pub length_km: f64,
    pub viable: bool,
}

/// The four +GRID neighbours of `(plane, index)`: both in-plane neighbours,
/// then the same slot in the previous and next planes.
pub fn grid_neighbors(plane: u32, index: u32, planes: u32, sats_per_plane: u32) -> Result<[(u32, u32); 4]> {
    if planes < 3 || sats_per_plane < 3 {
        return Err(Error::invalid(format!(
            "+GRID needs at least 3 planes and 3 satellites per plane, got {planes}x{sats_per_plane}"
        )));
    }
    if plane >= planes || index >= sats_per_plane {
        return Err(Error::invalid(format!(
            "({plane}, {index}) outside a {planes}x{sats_per_plane} shell"
        )));
    }
    let s = sats_per_plane;
    let p = planes;
    Ok([
        (plane, (index + 1) % s),
        (plane, (index + s - 1) % s),
        ((plane + 1) % p, index),
        ((plane + p - 1) % p, index),
    ])
}

/// Deduplicated +GRID edges of every gridded shell, sorted.
///
/// Shells smaller than 3x3 still get their distinct neighbour pairs; self
/// links are dropped, so a single-satellite shell has no edges.
pub fn grid_edges(constellation: &Constellation) -> Vec<IslEdge> {
    let mut set = BTreeSet::new();
    for (shell, layout) in constellation.shells().iter().enumerate() {
        if !layout.gridded {
            continue;
        }
        let shell = shell as u32;
        let (p, s) = (layout.planes, layout.sats_per_plane);
        for plane in 0..p {
            for index in 0..s {
                let me = SatelliteId::new(shell, plane, index);
                let next_in_plane = SatelliteId::new(shell, plane, (index + 1) % s);
                let next_plane = SatelliteId::new(shell, (plane + 1) % p, index);
                for (other, kind) in [
                    (next_in_plane, LinkKind::IntraPlane),
                    (next_plane, LinkKind::CrossPlane),
                ] {
                    if other != me {
                        let (a, b) = if me < other { (me, other) } else { (other, me) };
                        set.insert(IslEdge { a, b, kind });
                    }
                }
            }
        }
    }
    set.into_iter().collect()
}

/// Evaluates `edges` against precomputed satellite positions.
pub fn evaluate_links(
    edges: &[IslEdge],
    positions: &BTreeMap<SatelliteId, EciPosition>,
    threshold_km: f64,
    earth_radius_km: f64,
) -> Vec<IslLink> {
    edges
        .iter()
        .map(|e| {
            let pa = &positions[&e.a];
            let pb = &positions[&e.b];
            let grazing_km = grazing_altitude(pa, pb, earth_radius_km);
            IslLink {
                a: e.a,
                b: e.b,
                kind: e.kind,
                grazing_km,
                length_km: pa.distance(pb),
                viable: is_isl_viable(grazing_km, threshold_km),
            }
        })
        .collect()
}

/// Every +GRID link at time `t` with nominal (unmaneuvered) positions.
pub fn link_snapshot(constellation: &Constellation, t: f64, threshold_km: f64) -> Vec<IslLink> {
    link_snapshot_with_offsets(constellation, t, threshold_km, |_| 0.0)
}

/// Every +GRID link at time `t`, each satellite raised by `offset_km(id)`.
pub fn link_snapshot_with_offsets(
    constellation: &Constellation,
    t: f64,
    threshold_km: f64,
    offset_km: impl Fn(&SatelliteId) -> f64,
) -> Vec<IslLink> {
    let edges = grid_edges(constellation);
    let positions = constellation.positions_at(t, offset_km);
    evaluate_links(&edges, &positions, threshold_km, constellation.earth_radius_km())
}

// ============================================================================
// Ground visibility
// ============================================================================

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityWindow {
    pub gs_id: String,
    pub sat: SatelliteId,
    pub start_s: f64,
    pub end_s: f64,
    pub max_elevation_deg: f64,
}

impl VisibilityWindow {
    /// Half-open membership `[start, end)`.
    pub fn contains(&self, t: f64) -> bool {
        self.start_s <= t && t < self.end_s
    }
}

/// Resolution of window endpoints and handover instants, seconds.
pub const REFINE_RESOLUTION_S: f64 = 0.1;

fn sample_times(t0: f64, t1: f64, step_s: f64) -> Vec<f64> {
    let n = ((t1 - t0) / step_s).ceil() as usize;
    (0..=n).map(|k| (t0 + k as f64 * step_s).min(t1)).collect()
}

/// Bisects between `lo` (predicate false) and `hi` (predicate true).
fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    while hi - lo > REFINE_RESOLUTION_S {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Maximal intervals in `[t0, t1]` during which each satellite is at or above
/// the station's minimum elevation. Sampled every `step_s`, endpoints refined
/// by bisection. Sorted by start time then satellite.
pub fn visibility_windows(
    gs: &GroundStation,
    constellation: &Constellation,
    t0: f64,
    t1: f64,
    step_s: f64,
) -> Result<Vec<VisibilityWindow>> {
    if !(t0 < t1) {
        return Err(Error::invalid("visibility interval needs t0 < t1"));
    }
    if !(step_s > 0.0) {
        return Err(Error::invalid("step_s must be positive"));
    }
    let r = constellation.earth_radius_km();
    let times = sample_times(t0, t1, step_s);
    let gs_track: Vec<EciPosition> = times.iter().map(|&t| ground_station_eci(gs, t, r)).collect();

    let mut out = Vec::new();
    for (id, el) in constellation.iter() {
        let elev = |t: f64, gp: &EciPosition| elevation_angle(gp, &el.propagate(t, 0.0)).unwrap_or(-90.0);
        let elev_at = |t: f64| elev(t, &ground_station_eci(gs, t, r));
        let visible = |t: f64| elev_at(t) >= gs.min_elevation_deg;

        let mut open: Option<(f64, f64)> = None;
        let mut prev_t = t0;
        for (k, &t) in times.iter().enumerate() {
            let e = elev(t, &gs_track[k]);
            let vis = e >= gs.min_elevation_deg;
            match (&mut open, vis) {
                (None, true) => {
                    let start = if k == 0 { t } else { bisect(prev_t, t, visible) };
                    open = Some((start, e.max(elev_at(start))));
                }
                (Some((_, max_e)), true) => {
                    *max_e = max_e.max(e);
                }
                (Some((start, max_e)), false) => {
                    let end = bisect(prev_t, t, |x| !visible(x));
                    out.push(VisibilityWindow {
                        gs_id: gs.id.clone(),
                        sat: *id,
                        start_s: *start,
                        end_s: end,
                        max_elevation_deg: *max_e,
                    });
                    open = None;
                }
                (None, false) => {}
            }
            prev_t = t;
        }
        if let Some((start, max_e)) = open {
            if start < t1 {
                out.push(VisibilityWindow {
                    gs_id: gs.id.clone(),
                    sat: *id,
                    start_s: start,
                    end_s: t1,
                    max_elevation_deg: max_e,
                });
            }
        }
    }
    out.sort_by(|a, b| a.start_s.total_cmp(&b.start_s).then(a.sat.cmp(&b.sat)));
    Ok(out)
}

/// An attachment change. `from` is `None` when the station had no satellite
/// (start of a pass after a coverage gap).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Handover {
    pub t_s: f64,
    pub from: Option<SatelliteId>,
    pub to: SatelliteId,
}

/// Attachment schedule for one station under the highest-elevation policy,
/// ties going to the lowest `SatelliteId`.
///
/// `elevation(sat, t)` supplies instantaneous elevations. Attachment is
/// evaluated at every window boundary and every `step_s` between them;
/// changes between samples are refined by bisection. The initial attachment
/// is not a handover.
pub fn handover_schedule(
    windows: &[VisibilityWindow],
    step_s: f64,
    elevation: impl Fn(&SatelliteId, f64) -> f64,
) -> Vec<Handover> {
    if windows.is_empty() {
        return Vec::new();
    }
    let step_s = if step_s > 0.0 { step_s } else { 1.0 };
    let first = windows.iter().map(|w| w.start_s).fold(f64::INFINITY, f64::min);
    let last = windows.iter().map(|w| w.end_s).fold(f64::NEG_INFINITY, f64::max);

    let mut grid: Vec<f64> = sample_times(first, last, step_s);
    grid.extend(windows.iter().flat_map(|w| [w.start_s, w.end_s]));
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let best = |t: f64| -> Option<SatelliteId> {
        let mut choice: Option<(SatelliteId, f64)> = None;
        for w in windows.iter().filter(|w| w.contains(t)) {
            let e = elevation(&w.sat, t);
            choice = match choice {
                Some((s, be)) if be > e || (be == e && s <= w.sat) => Some((s, be)),
                _ => Some((w.sat, e)),
            };
        }
        choice.map(|(s, _)| s)
    };

    let mut out = Vec::new();
    let mut current: Option<SatelliteId> = None;
    let mut attached_once = false;
    let mut prev_t = first;
    for &t in &grid {
        let b = best(t);
        if b != current {
            if let Some(to) = b {
                if attached_once {
                    let at = match current {
                        Some(_) if t > prev_t => bisect(prev_t, t, |x| best(x) != current),
                        _ => t,
                    };
                    out.push(Handover { t_s: at, from: current, to });
                }
                attached_once = true;
            }
            current = b;
        }
        prev_t = t;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbital::{build_constellation, ShellSpec};

    #[test]
    fn neighbor_rule() {
        let n = grid_neighbors(0, 0, 72, 22).unwrap();
        let set: BTreeSet<_> = n.into_iter().collect();
        assert_eq!(set, BTreeSet::from([(0, 1), (0, 21), (1, 0), (71, 0)]));
        let n = grid_neighbors(5, 10, 6, 58).unwrap();
        let set: BTreeSet<_> = n.into_iter().collect();
        assert_eq!(set, BTreeSet::from([(5, 9), (5, 11), (4, 10), (0, 10)]));
        assert!(grid_neighbors(0, 0, 2, 22).is_err());
        assert!(grid_neighbors(0, 0, 72, 2).is_err());
    }

    #[test]
    fn degree_four_and_edge_count() {
        let c = build_constellation(&[ShellSpec::starlink_gen1_53()]).unwrap();
        let edges = grid_edges(&c);
        assert_eq!(edges.len(), 3168);
        let mut degree: BTreeMap<SatelliteId, usize> = BTreeMap::new();
        for e in &edges {
            assert!(e.a < e.b);
            *degree.entry(e.a).or_default() += 1;
            *degree.entry(e.b).or_default() += 1;
        }
        assert_eq!(degree.len(), 1584);
        assert!(degree.values().all(|&d| d == 4));
    }

    #[test]
    fn grid_edges_match_neighbor_sets() {
        let (p, s) = (5, 7);
        let c = build_constellation(&[ShellSpec::new(550.0, 53.0, p, s)]).unwrap();
        let edges: BTreeSet<(SatelliteId, SatelliteId)> =
            grid_edges(&c).iter().map(|e| (e.a, e.b)).collect();
        let mut from_rule = BTreeSet::new();
        for plane in 0..p {
            for index in 0..s {
                let me = SatelliteId::new(0, plane, index);
                for (np, ni) in grid_neighbors(plane, index, p, s).unwrap() {
                    let other = SatelliteId::new(0, np, ni);
                    from_rule.insert((me.min(other), me.max(other)));
                }
            }
        }
        assert_eq!(edges, from_rule);
    }

    #[test]
    fn tiny_shells() {
        let c = build_constellation(&[ShellSpec::new(550.0, 53.0, 1, 1)]).unwrap();
        assert!(grid_edges(&c).is_empty());
        let c = build_constellation(&[ShellSpec::new(550.0, 53.0, 2, 1)]).unwrap();
        assert_eq!(grid_edges(&c).len(), 1);
    }

    #[test]
    fn intra_plane_grazing_closed_form() {
        let c = build_constellation(&[ShellSpec::starlink_gen1_53()]).unwrap();
        let theta = (360.0f64 / 22.0).to_radians();
        let oracle = 6921.0 * (theta / 2.0).cos() - 6371.0;
        assert!((oracle - 479.6).abs() < 0.5);
        let s0 = link_snapshot(&c, 0.0, 80.0);
        let s1 = link_snapshot(&c, 1777.0, 80.0);
        for (a, b) in s0.iter().zip(&s1) {
            if a.kind == LinkKind::IntraPlane {
                assert!((a.grazing_km - oracle).abs() < 1e-6);
                assert!((a.grazing_km - b.grazing_km).abs() < 1e-6);
                assert!((a.length_km - b.length_km).abs() < 1e-6);
            }
            assert!(a.viable);
        }
    }

    fn window(sat: u32, start: f64, end: f64) -> VisibilityWindow {
        VisibilityWindow {
            gs_id: "g".into(),
            sat: SatelliteId::new(0, 0, sat),
            start_s: start,
            end_s: end,
            max_elevation_deg: 60.0,
        }
    }

    #[test]
    fn handover_single_and_abutting() {
        assert!(handover_schedule(&[], 1.0, |_, _| 0.0).is_empty());
        assert!(handover_schedule(&[window(0, 0.0, 100.0)], 1.0, |_, _| 50.0).is_empty());
        let h = handover_schedule(
            &[window(0, 0.0, 100.0), window(1, 100.0, 200.0)],
            7.0,
            |_, _| 50.0,
        );
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].t_s, 100.0);
        assert_eq!(h[0].from, Some(SatelliteId::new(0, 0, 0)));
        assert_eq!(h[0].to, SatelliteId::new(0, 0, 1));
    }

    #[test]
    fn handover_prefers_higher_elevation_and_lowest_id_on_ties() {
        let ws = [window(3, 0.0, 100.0), window(1, 0.0, 100.0)];
        // equal elevation: stays on the lowest id, no handover
        assert!(handover_schedule(&ws, 1.0, |_, _| 40.0).is_empty());
        // satellite 3 overtakes at t = 42.5
        let h = handover_schedule(&ws, 10.0, |s, t| if s.index == 3 { t } else { 42.5 });
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].to.index, 3);
        assert!((h[0].t_s - 42.5).abs() <= REFINE_RESOLUTION_S);
    }

    #[test]
    fn handover_after_gap_is_listed() {
        let h = handover_schedule(
            &[window(0, 0.0, 50.0), window(1, 80.0, 120.0)],
            5.0,
            |_, _| 30.0,
        );
        assert_eq!(h.len(), 1);
        assert_eq!(h[0].from, None);
        assert_eq!(h[0].t_s, 80.0);
    }

    #[test]
    fn empty_constellation_has_no_windows() {
        let c = crate::orbital::Constellation::empty(6371.0);
        let gs = GroundStation::new("g", 45.0, 0.0);
        assert!(visibility_windows(&gs, &c, 0.0, 3600.0, 10.0).unwrap().is_empty());
        assert!(visibility_windows(&gs, &c, 10.0, 0.0, 10.0).is_err());
        assert!(visibility_windows(&gs, &c, 0.0, 10.0, 0.0).is_err());
    }

    #[test]
    fn polar_station_sees_polar_plane_every_orbit() {
        let c = build_constellation(&[ShellSpec::new(550.0, 90.0, 1, 1)]).unwrap();
        let period = c.get(&SatelliteId::new(0, 0, 0)).unwrap().period_s();
        let gs = GroundStation::new("pole", 90.0, 0.0).with_min_elevation(0.0);
        let orbits = 3.0;
        let ws = visibility_windows(&gs, &c, 0.0, orbits * period, 10.0).unwrap();
        assert!(ws.len() as f64 >= orbits, "{}", ws.len());
        for w in &ws {
            assert!(w.start_s < w.end_s);
            assert!(w.max_elevation_deg >= 0.0);
        }
        for pair in ws.windows(2) {
            assert!(pair[0].end_s <= pair[1].start_s);
        }
    }
}
