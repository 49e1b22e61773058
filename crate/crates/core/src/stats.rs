//! Aggregations: ISL grazing-altitude CDFs, infeasible fractions and
//! bent-pipe round-trip times.

use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::{elevation_angle, ground_station_eci, propagation_delay, GroundStation};
use crate::orbital::{Constellation, EciPosition, SatelliteId};
use crate::topology::{evaluate_links, grid_edges, LinkKind};

/// Empirical CDF over a multiset of samples, one point per distinct value.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CdfTable {
    points: Vec<(f64, f64)>,
    sample_count: usize,
}

impl CdfTable {
    /// Builds the table; non-finite samples are rejected.
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self> {
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("CDF samples must be finite"));
        }
        samples.sort_by(f64::total_cmp);
        let n = samples.len();
        let mut points: Vec<(f64, f64)> = Vec::new();
        for (i, v) in samples.iter().enumerate() {
            let p = (i + 1) as f64 / n as f64;
            match points.last_mut() {
                Some(last) if last.0 == *v => last.1 = p,
                _ => points.push((*v, p)),
            }
        }
        if let Some(last) = points.last_mut() {
            last.1 = 1.0;
        }
        Ok(Self {
            points,
            sample_count: n,
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Proportion of samples strictly below `value`.
    pub fn proportion_below(&self, value: f64) -> f64 {
        match self.points.partition_point(|&(v, _)| v < value) {
            0 => 0.0,
            k => self.points[k - 1].1,
        }
    }

    /// CSV with header `value_km,proportion`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "value_km,proportion")?;
        for (v, p) in &self.points {
            writeln!(out, "{v},{p}")?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Proportion of samples strictly below `threshold_km`.
pub fn infeasible_fraction(cdf: &CdfTable, threshold_km: f64) -> f64 {
    cdf.proportion_below(threshold_km)
}

/// One grazing-altitude sample of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub a: SatelliteId,
    pub b: SatelliteId,
    pub kind: LinkKind,
    pub t_s: f64,
    pub grazing_km: f64,
}

/// Sample instants `t0, t0 + step, …` up to and including `t1` when it falls
/// on the grid.
pub fn step_times(t0: f64, t1: f64, step_s: f64) -> Result<Vec<f64>> {
    if !(t0 < t1) {
        return Err(Error::invalid("interval needs t0 < t1"));
    }
    if !(step_s > 0.0) {
        return Err(Error::invalid("step_s must be positive"));
    }
    let n = ((t1 - t0) / step_s + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| t0 + k as f64 * step_s).collect())
}

/// Grazing altitudes of every +GRID link over `[t0, t1]`.
///
/// With `per_link_min` each link contributes one sample, its minimum over
/// the window (stamped with the time it occurred); otherwise every link
/// contributes one sample per step.
pub fn isl_grazing_samples(
    constellation: &Constellation,
    t0: f64,
    t1: f64,
    step_s: f64,
    per_link_min: bool,
) -> Result<Vec<LinkSample>> {
    let times = step_times(t0, t1, step_s)?;
    let edges = grid_edges(constellation);
    let r = constellation.earth_radius_km();
    let mut mins: Vec<Option<LinkSample>> = vec![None; edges.len()];
    let mut all = Vec::new();
    for t in times {
        let positions = constellation.positions_at(t, |_| 0.0);
        let links = evaluate_links(&edges, &positions, f64::NEG_INFINITY, r);
        for (slot, l) in mins.iter_mut().zip(&links) {
            let s = LinkSample {
                a: l.a,
                b: l.b,
                kind: l.kind,
                t_s: t,
                grazing_km: l.grazing_km,
            };
            if per_link_min {
                if slot.is_none_or(|m| s.grazing_km < m.grazing_km) {
                    *slot = Some(s);
                }
            } else {
                all.push(s);
            }
        }
    }
    Ok(if per_link_min {
        mins.into_iter().flatten().collect()
    } else {
        all
    })
}

/// CDF of ISL grazing altitudes (see [`isl_grazing_samples`]).
pub fn min_isl_altitude_cdf(
    constellation: &Constellation,
    t0: f64,
    t1: f64,
    step_s: f64,
    per_link_min: bool,
) -> Result<CdfTable> {
    let samples = isl_grazing_samples(constellation, t0, t1, step_s, per_link_min)?;
    CdfTable::from_samples(samples.into_iter().map(|s| s.grazing_km).collect())
}

/// Tolerance on the elevation mask, degrees.
const ELEVATION_SLACK_DEG: f64 = 1e-9;

/// Bent-pipe round trip `gs → sat → uplink_gs → sat → gs` at time `t`.
pub fn bent_pipe_rtt(
    gs: &GroundStation,
    sat_pos: &EciPosition,
    uplink_gs: &GroundStation,
    t: f64,
    earth_radius_km: f64,
) -> Result<f64> {
    let mut one_way = 0.0;
    for station in [gs, uplink_gs] {
        let p = ground_station_eci(station, t, earth_radius_km);
        let elev = elevation_angle(&p, sat_pos)?;
        if elev + ELEVATION_SLACK_DEG < station.min_elevation_deg {
            return Err(Error::Domain(format!(
                "satellite at {elev:.3}° is below the {}° mask of station {}",
                station.min_elevation_deg, station.id
            )));
        }
        one_way += propagation_delay(p.distance(sat_pos));
    }
    Ok(2.0 * one_way)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{satellite_at_elevation, slant_range, SPEED_OF_LIGHT_KM_S};
    use crate::orbital::{build_constellation, ShellSpec};

    #[test]
    fn cdf_shape() {
        let c = CdfTable::from_samples(vec![3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(c.points(), &[(1.0, 0.25), (2.0, 0.75), (3.0, 1.0)]);
        assert!(CdfTable::from_samples(vec![]).unwrap().is_empty());
        assert!(CdfTable::from_samples(vec![f64::NAN]).is_err());
    }

    #[test]
    fn infeasible_examples() {
        let hi = CdfTable::from_samples(vec![100.0, 200.0]).unwrap();
        assert_eq!(infeasible_fraction(&hi, 80.0), 0.0);
        let lo = CdfTable::from_samples(vec![-10.0, 70.0]).unwrap();
        assert_eq!(infeasible_fraction(&lo, 80.0), 1.0);
        let mixed = CdfTable::from_samples(vec![10.0, 80.0, 300.0, 500.0]).unwrap();
        assert_eq!(infeasible_fraction(&mixed, 80.0), 0.25);
    }

    #[test]
    fn csv_output() {
        let c = CdfTable::from_samples(vec![1.5, 2.0]).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "value_km,proportion\n1.5,0.5\n2,1\n");
    }

    #[test]
    fn single_satellite_has_empty_cdf() {
        let c = build_constellation(&[ShellSpec::new(550.0, 53.0, 1, 1)]).unwrap();
        assert!(min_isl_altitude_cdf(&c, 0.0, 3600.0, 10.0, true).unwrap().is_empty());
    }

    #[test]
    fn step_grid() {
        assert_eq!(step_times(0.0, 3600.0, 10.0).unwrap().len(), 361);
        assert_eq!(step_times(0.0, 25.0, 10.0).unwrap(), vec![0.0, 10.0, 20.0]);
        assert!(step_times(5.0, 5.0, 1.0).is_err());
    }

    #[test]
    fn rtt_cases() {
        let r = 6371.0;
        let gs = GroundStation::new("a", 0.0, 0.0);
        let gp = ground_station_eci(&gs, 0.0, r);
        let zenith = gp * ((r + 550.0) / r);
        let rtt = bent_pipe_rtt(&gs, &zenith, &gs, 0.0, r).unwrap();
        assert!((rtt - 4.0 * 550.0 / SPEED_OF_LIGHT_KM_S).abs() < 1e-12);
        assert!((rtt - 7.34e-3).abs() < 1e-5);

        let low = satellite_at_elevation(&gp, 550.0, 25.0, r);
        let rtt = bent_pipe_rtt(&gs, &low, &gs, 0.0, r).unwrap();
        let oracle = 4.0 * slant_range(550.0, 25.0, r) / SPEED_OF_LIGHT_KM_S;
        assert!((rtt - oracle).abs() < 1e-12);
        assert!((rtt - 14.99e-3).abs() < 0.01e-3);

        let too_low = satellite_at_elevation(&gp, 550.0, 10.0, r);
        assert!(matches!(
            bent_pipe_rtt(&gs, &too_low, &gs, 0.0, r),
            Err(Error::Domain(_))
        ));
    }
}
