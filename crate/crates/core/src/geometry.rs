//! Line-of-sight geometry over a spherical Earth.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orbital::EciPosition;

/// Speed of light in vacuum, km/s.
pub const SPEED_OF_LIGHT_KM_S: f64 = 299_792.458;

/// Sidereal day, s.
pub const SIDEREAL_DAY_S: f64 = 86_164.090_5;

/// Default ISL viability threshold, km above the mean sphere.
pub const DEFAULT_ISL_THRESHOLD_KM: f64 = 80.0;

pub const DEFAULT_MIN_ELEVATION_DEG: f64 = 25.0;

/// Minimum altitude above the sphere of the straight segment `p1`–`p2`.
///
/// The closest point to the Earth center is found at the segment parameter
/// `t* = -p1·(p2-p1)/|p2-p1|²` clamped to `[0, 1]`.
pub fn grazing_altitude(p1: &EciPosition, p2: &EciPosition, earth_radius_km: f64) -> f64 {
    // Evaluate from the lexicographically smaller endpoint so the result is
    // bit-identical under argument swap.
    let (a, b) = if (p1.x, p1.y, p1.z) <= (p2.x, p2.y, p2.z) {
        (p1, p2)
    } else {
        (p2, p1)
    };
    let d = *b - *a;
    let dd = d.dot(&d);
    if dd == 0.0 {
        return a.norm() - earth_radius_km;
    }
    let t = (-a.dot(&d) / dd).clamp(0.0, 1.0);
    (*a + d * t).norm() - earth_radius_km
}

/// Inclusive threshold: a link exactly at the threshold is viable.
pub fn is_isl_viable(grazing_km: f64, threshold_km: f64) -> bool {
    grazing_km >= threshold_km
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundStation {
    pub id: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    #[serde(default = "default_min_elevation")]
    pub min_elevation_deg: f64,
}

fn default_min_elevation() -> f64 {
    DEFAULT_MIN_ELEVATION_DEG
}

impl GroundStation {
    pub fn new(id: impl Into<String>, latitude_deg: f64, longitude_deg: f64) -> Self {
        Self {
            id: id.into(),
            latitude_deg,
            longitude_deg,
            min_elevation_deg: DEFAULT_MIN_ELEVATION_DEG,
        }
    }

    pub fn with_min_elevation(mut self, deg: f64) -> Self {
        self.min_elevation_deg = deg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.latitude_deg) {
            return Err(Error::invalid(format!(
                "ground station {}: latitude_deg must be in [-90, 90]",
                self.id
            )));
        }
        if !(-180.0..=180.0).contains(&self.longitude_deg) {
            return Err(Error::invalid(format!(
                "ground station {}: longitude_deg must be in [-180, 180]",
                self.id
            )));
        }
        if !(0.0..90.0).contains(&self.min_elevation_deg) {
            return Err(Error::invalid(format!(
                "ground station {}: min_elevation_deg must be in [0, 90)",
                self.id
            )));
        }
        Ok(())
    }
}

/// Station position at time `t`; longitude 0 lies on the inertial x-axis at t = 0.
pub fn ground_station_eci(gs: &GroundStation, t: f64, earth_radius_km: f64) -> EciPosition {
    let lat = gs.latitude_deg.to_radians();
    let lon = gs.longitude_deg.to_radians() + std::f64::consts::TAU * t / SIDEREAL_DAY_S;
    let (sl, cl) = lat.sin_cos();
    let (so, co) = lon.sin_cos();
    EciPosition::new(
        earth_radius_km * cl * co,
        earth_radius_km * cl * so,
        earth_radius_km * sl,
    )
}

/// Elevation of `sat_pos` above the local horizontal plane at `gs_pos`, degrees.
pub fn elevation_angle(gs_pos: &EciPosition, sat_pos: &EciPosition) -> Result<f64> {
    let d = *sat_pos - *gs_pos;
    let range = d.norm();
    if range == 0.0 {
        return Err(Error::invalid("station and satellite coincide"));
    }
    let up = gs_pos.unit();
    // atan2 form of asin(d·up / |d|), well conditioned near the zenith
    let vertical = d.dot(&up);
    let horizontal = (d - up * vertical).norm();
    Ok(vertical.atan2(horizontal).to_degrees())
}

/// Slant range from a station to a satellite at `altitude_km` seen at
/// elevation `elevation_deg`.
pub fn slant_range(altitude_km: f64, elevation_deg: f64, earth_radius_km: f64) -> f64 {
    let r = earth_radius_km;
    let (se, ce) = elevation_deg.to_radians().sin_cos();
    let k = (r + altitude_km) / r;
    r * ((k * k - ce * ce).sqrt() - se)
}

/// A satellite at `altitude_km` seen from `gs_pos` at `elevation_deg`,
/// placed toward local east (toward the x-axis at the poles).
pub fn satellite_at_elevation(
    gs_pos: &EciPosition,
    altitude_km: f64,
    elevation_deg: f64,
    earth_radius_km: f64,
) -> EciPosition {
    let up = gs_pos.unit();
    let z = EciPosition::new(0.0, 0.0, 1.0);
    let mut east = z.cross(&up);
    if east.norm() < 1e-12 {
        east = EciPosition::new(1.0, 0.0, 0.0);
    }
    let east = east.unit();
    let (se, ce) = elevation_deg.to_radians().sin_cos();
    let dir = up * se + east * ce;
    *gs_pos + dir * slant_range(altitude_km, elevation_deg, earth_radius_km)
}

/// Free-space one-way delay over `distance_km`, seconds.
pub fn propagation_delay(distance_km: f64) -> f64 {
    distance_km / SPEED_OF_LIGHT_KM_S
}
