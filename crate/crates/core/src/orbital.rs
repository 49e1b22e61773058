//! Walker-style constellation shells and circular Keplerian propagation.
//!
//! Orbits are circular (eccentricity 0) around a spherical Earth. A satellite's
//! state is its orbit radius, plane orientation (inclination, RAAN) and the
//! argument of latitude at the simulation epoch.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard gravitational parameter of Earth, km³/s².
pub const MU_EARTH_KM3_S2: f64 = 398_600.441_8;

/// Mean Earth radius, km.
pub const DEFAULT_EARTH_RADIUS_KM: f64 = 6371.0;

/// Normalizes an angle in degrees to `[0, 360)`.
pub fn normalize_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Period of a circular orbit of the given radius (km from Earth center).
pub fn period_for_radius(radius_km: f64) -> f64 {
    TAU * (radius_km.powi(3) / MU_EARTH_KM3_S2).sqrt()
}

/// Mean motion in rad/s of a circular orbit of the given radius.
pub fn mean_motion(radius_km: f64) -> f64 {
    (MU_EARTH_KM3_S2 / radius_km.powi(3)).sqrt()
}

/// Circular orbital period at `altitude_km` above the default mean Earth radius.
pub fn orbital_period(altitude_km: f64) -> Result<f64> {
    orbital_period_with_radius(altitude_km, DEFAULT_EARTH_RADIUS_KM)
}

pub fn orbital_period_with_radius(altitude_km: f64, earth_radius_km: f64) -> Result<f64> {
    if !(altitude_km > 0.0) {
        return Err(Error::invalid(format!(
            "altitude must be positive, got {altitude_km} km"
        )));
    }
    Ok(period_for_radius(earth_radius_km + altitude_km))
}

// ============================================================================
// Vectors
// ============================================================================

/// Position in an Earth-centered inertial frame, km.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EciPosition {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl EciPosition {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, other: &Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (*self - *other).norm()
    }

    /// Unit vector in the same direction. Returns the zero vector unchanged.
    pub fn unit(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            *self
        } else {
            *self * (1.0 / n)
        }
    }
}

impl Add for EciPosition {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for EciPosition {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for EciPosition {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }
}

// ============================================================================
// Shells and satellites
// ============================================================================

fn default_raan_spread() -> f64 {
    360.0
}

/// Declarative Walker-style shell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellSpec {
    pub altitude_km: f64,
    pub inclination_deg: f64,
    /// Number of orbital planes (P).
    pub planes: u32,
    /// Satellites per plane (S).
    pub sats_per_plane: u32,
    #[serde(default = "default_raan_spread")]
    pub raan_spread_deg: f64,
    /// Walker phasing factor F.
    #[serde(default)]
    pub phase_offset_f: u32,
}

impl ShellSpec {
    pub fn new(altitude_km: f64, inclination_deg: f64, planes: u32, sats_per_plane: u32) -> Self {
        Self {
            altitude_km,
            inclination_deg,
            planes,
            sats_per_plane,
            raan_spread_deg: default_raan_spread(),
            phase_offset_f: 0,
        }
    }

    /// Gen1 Starlink 53° shell: 72 planes of 22 satellites at 550 km.
    pub fn starlink_gen1_53() -> Self {
        Self::new(550.0, 53.0, 72, 22)
    }

    /// Gen1 Starlink polar shell: 6 planes of 58 satellites at 560 km, 97.6°.
    pub fn starlink_gen1_polar() -> Self {
        Self::new(560.0, 97.6, 6, 58)
    }

    pub fn satellite_count(&self) -> usize {
        self.planes as usize * self.sats_per_plane as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.planes < 1 {
            return Err(Error::invalid("planes must be at least 1"));
        }
        if self.sats_per_plane < 1 {
            return Err(Error::invalid("sats_per_plane must be at least 1"));
        }
        if !(0.0..=180.0).contains(&self.inclination_deg) {
            return Err(Error::invalid(format!(
                "inclination_deg must be in [0, 180], got {}",
                self.inclination_deg
            )));
        }
        if !(self.altitude_km > 100.0 && self.altitude_km <= 2000.0) {
            return Err(Error::invalid(format!(
                "altitude_km must be in (100, 2000], got {}",
                self.altitude_km
            )));
        }
        if !self.raan_spread_deg.is_finite() {
            return Err(Error::invalid("raan_spread_deg must be finite"));
        }
        Ok(())
    }
}

/// Identifies one satellite: shell, plane and slot within the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatelliteId {
    pub shell: u32,
    pub plane: u32,
    pub index: u32,
}

impl SatelliteId {
    pub const fn new(shell: u32, plane: u32, index: u32) -> Self {
        Self { shell, plane, index }
    }
}

impl fmt::Display for SatelliteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.shell, self.plane, self.index)
    }
}

/// Circular-orbit state. Angles are degrees in `[0, 360)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularElements {
    pub semi_major_axis_km: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    /// Argument of latitude at `epoch_s`.
    pub phase_deg: f64,
    pub epoch_s: f64,
}

impl CircularElements {
    pub fn period_s(&self) -> f64 {
        period_for_radius(self.semi_major_axis_km)
    }

    /// Position at time `t` on the circle of radius `a + altitude_offset_km`,
    /// advanced since epoch at the mean motion of that (offset) orbit.
    pub fn propagate(&self, t: f64, altitude_offset_km: f64) -> EciPosition {
        let radius = self.semi_major_axis_km + altitude_offset_km;
        let u = self.phase_deg.to_radians() + mean_motion(radius) * (t - self.epoch_s);
        self.position_at(radius, u)
    }

    /// Position for an explicit radius and argument of latitude (radians).
    pub fn position_at(&self, radius_km: f64, arg_latitude_rad: f64) -> EciPosition {
        let (su, cu) = arg_latitude_rad.sin_cos();
        let (si, ci) = self.inclination_deg.to_radians().sin_cos();
        let (so, co) = self.raan_deg.to_radians().sin_cos();
        EciPosition::new(
            radius_km * (co * cu - so * su * ci),
            radius_km * (so * cu + co * su * ci),
            radius_km * (su * si),
        )
    }

    /// Unit normal of the orbital plane (direction of angular momentum).
    pub fn plane_normal(&self) -> EciPosition {
        let (si, ci) = self.inclination_deg.to_radians().sin_cos();
        let (so, co) = self.raan_deg.to_radians().sin_cos();
        EciPosition::new(si * so, -si * co, ci)
    }
}

// ============================================================================
// Constellation
// ============================================================================

/// Layout of one shell inside a [`Constellation`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShellLayout {
    pub planes: u32,
    pub sats_per_plane: u32,
    /// Walker shells carry +GRID links; catalog groups (from TLEs) do not.
    pub gridded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    shells: Vec<ShellLayout>,
    elements: BTreeMap<SatelliteId, CircularElements>,
    earth_radius_km: f64,
}

impl Constellation {
    pub fn empty(earth_radius_km: f64) -> Self {
        Self {
            shells: Vec::new(),
            elements: BTreeMap::new(),
            earth_radius_km,
        }
    }

    pub fn earth_radius_km(&self) -> f64 {
        self.earth_radius_km
    }

    pub fn shells(&self) -> &[ShellLayout] {
        &self.shells
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, id: &SatelliteId) -> Option<&CircularElements> {
        self.elements.get(id)
    }

    /// Satellites in `SatelliteId` order.
    pub fn iter(&self) -> impl Iterator<Item = (&SatelliteId, &CircularElements)> {
        self.elements.iter()
    }

    pub fn ids(&self) -> Vec<SatelliteId> {
        self.elements.keys().copied().collect()
    }

    pub fn as_map(&self) -> &BTreeMap<SatelliteId, CircularElements> {
        &self.elements
    }

    /// Appends a Walker shell.
    pub fn add_shell(&mut self, spec: &ShellSpec) -> Result<u32> {
        spec.validate()?;
        let shell = self.shells.len() as u32;
        let p_count = spec.planes as f64;
        let s_count = spec.sats_per_plane as f64;
        let a = self.earth_radius_km + spec.altitude_km;
        for plane in 0..spec.planes {
            let raan = normalize_deg(plane as f64 * spec.raan_spread_deg / p_count);
            for index in 0..spec.sats_per_plane {
                let phase = index as f64 * 360.0 / s_count
                    + plane as f64 * spec.phase_offset_f as f64 * 360.0 / (p_count * s_count);
                self.elements.insert(
                    SatelliteId::new(shell, plane, index),
                    CircularElements {
                        semi_major_axis_km: a,
                        inclination_deg: spec.inclination_deg,
                        raan_deg: raan,
                        phase_deg: normalize_deg(phase),
                        epoch_s: 0.0,
                    },
                );
            }
        }
        self.shells.push(ShellLayout {
            planes: spec.planes,
            sats_per_plane: spec.sats_per_plane,
            gridded: true,
        });
        Ok(shell)
    }

    /// Appends an ungridded group of satellites (one plane, catalog order).
    pub fn add_catalog(&mut self, elements: Vec<CircularElements>) -> Result<u32> {
        for e in &elements {
            if !(e.semi_major_axis_km > self.earth_radius_km) {
                return Err(Error::invalid(format!(
                    "semi-major axis {} km is inside the Earth",
                    e.semi_major_axis_km
                )));
            }
        }
        let shell = self.shells.len() as u32;
        let count = elements.len() as u32;
        for (index, e) in elements.into_iter().enumerate() {
            self.elements
                .insert(SatelliteId::new(shell, 0, index as u32), e);
        }
        self.shells.push(ShellLayout {
            planes: 1,
            sats_per_plane: count,
            gridded: false,
        });
        Ok(shell)
    }

    /// Positions of every satellite at time `t`, offsets given per satellite.
    pub fn positions_at(
        &self,
        t: f64,
        offset_km: impl Fn(&SatelliteId) -> f64,
    ) -> BTreeMap<SatelliteId, EciPosition> {
        self.elements
            .iter()
            .map(|(id, e)| (*id, e.propagate(t, offset_km(id))))
            .collect()
    }
}

/// Builds every shell with the default mean Earth radius.
pub fn build_constellation(specs: &[ShellSpec]) -> Result<Constellation> {
    build_constellation_with_radius(specs, DEFAULT_EARTH_RADIUS_KM)
}

pub fn build_constellation_with_radius(
    specs: &[ShellSpec],
    earth_radius_km: f64,
) -> Result<Constellation> {
    let mut c = Constellation::empty(earth_radius_km);
    for spec in specs {
        c.add_shell(spec)?;
    }
    Ok(c)
}
