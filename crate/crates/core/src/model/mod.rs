//! Shared domain types: object representations, sensor metadata, belief
//! masses and the digital road map.

mod geometry;
mod map;

pub use geometry::{
    bounding_box_points, fov_distance, in_fov, line_of_sight, segment_hits_box, FovDistance,
    OrientedBox, SensorFrame,
};
pub(crate) use geometry::{inside_fov, points_visible};
pub use map::DigitalMap;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;

use nalgebra::{Matrix6, Point3, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Tolerance used when validating covariance symmetry and PSD-ness.
pub const COVARIANCE_TOLERANCE: f64 = 1e-9;

/// Tolerance on the unit sum of a belief mass.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SensorId(pub u32);

impl fmt::Display for SensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Normalizes an angle to `[-π, π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let wrapped = (angle + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if wrapped >= PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

/// Kinematic state in the global frame: position (m) and velocity (m/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
}

impl StateVector {
    pub fn new(x: f64, y: f64, z: f64, vx: f64, vy: f64, vz: f64) -> Self {
        Self {
            x,
            y,
            z,
            vx,
            vy,
            vz,
        }
    }

    pub fn position(&self) -> Point3<f64> {
        Point3::new(self.x, self.y, self.z)
    }

    pub fn velocity(&self) -> Vector3<f64> {
        Vector3::new(self.vx, self.vy, self.vz)
    }

    pub fn speed(&self) -> f64 {
        self.velocity().norm()
    }

    pub fn as_vector(&self) -> Vector6<f64> {
        Vector6::new(self.x, self.y, self.z, self.vx, self.vy, self.vz)
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    pub fn is_finite(&self) -> bool {
        self.as_vector().iter().all(|c| c.is_finite())
    }
}

/// Object extent (m) and heading (rad, `[-π, π)`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensions {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub heading: f64,
}

impl Dimensions {
    pub fn new(length: f64, width: f64, height: f64, heading: f64) -> Result<Self, ModelError> {
        if !(length > 0.0 && width > 0.0 && height > 0.0) || !heading.is_finite() {
            return Err(ModelError::InvalidDimensions {
                length,
                width,
                height,
            });
        }
        Ok(Self {
            length,
            width,
            height,
            heading: normalize_angle(heading),
        })
    }

    pub fn with_heading(self, heading: f64) -> Self {
        Self {
            heading: normalize_angle(heading),
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackStatus {
    /// Log-likelihood ratio track score.
    pub score: f64,
    pub confirmed: bool,
    /// No measurement update in the current step.
    pub coasting: bool,
}

/// One sensor's tracked object at one time step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalObject {
    pub sensor_id: SensorId,
    pub track_id: u64,
    pub timestamp: f64,
    pub state: StateVector,
    pub covariance: Matrix6<f64>,
    pub dims: Dimensions,
    pub status: TrackStatus,
}

impl LocalObject {
    pub fn check_points(&self) -> [Point3<f64>; 11] {
        bounding_box_points(&self.state, &self.dims)
    }

    pub fn oriented_box(&self) -> OrientedBox {
        OrientedBox::new(self.state.position(), &self.dims)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.state.is_finite() {
            return Err(ModelError::NonFiniteState);
        }
        validate_covariance(&self.covariance)
    }
}

/// Checks symmetry and positive semi-definiteness within [`COVARIANCE_TOLERANCE`].
pub fn validate_covariance(p: &Matrix6<f64>) -> Result<(), ModelError> {
    let asym = (p - p.transpose()).abs().max();
    if asym > COVARIANCE_TOLERANCE * p.abs().max().max(1.0) {
        return Err(ModelError::CovarianceNotSymmetric(asym));
    }
    let sym = (p + p.transpose()) * 0.5;
    let min_eig = sym.symmetric_eigenvalues().min();
    if min_eig < -COVARIANCE_TOLERANCE * p.abs().max().max(1.0) {
        return Err(ModelError::CovarianceNotPsd(min_eig));
    }
    Ok(())
}

/// All local objects registered at one common time step, grouped by sensor.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LocalObjectList {
    pub timestamp: f64,
    pub per_sensor: BTreeMap<SensorId, Vec<LocalObject>>,
}

impl LocalObjectList {
    pub fn new(timestamp: f64) -> Self {
        Self {
            timestamp,
            per_sensor: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, sensor: SensorId, objects: Vec<LocalObject>) {
        self.per_sensor.insert(sensor, objects);
    }

    pub fn iter(&self) -> impl Iterator<Item = &LocalObject> {
        self.per_sensor.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.per_sensor.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn objects_of(&self, sensor: SensorId) -> &[LocalObject] {
        self.per_sensor.get(&sensor).map_or(&[], Vec::as_slice)
    }

    /// Enforces the shared timestamp and `(sensor, track, time)` uniqueness.
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = BTreeSet::new();
        for (sensor, objects) in &self.per_sensor {
            for obj in objects {
                if obj.sensor_id != *sensor {
                    return Err(ModelError::SensorMismatch {
                        expected: *sensor,
                        found: obj.sensor_id,
                    });
                }
                if obj.timestamp != self.timestamp {
                    return Err(ModelError::TimestampMismatch {
                        list: self.timestamp,
                        object: obj.timestamp,
                    });
                }
                if !seen.insert((obj.sensor_id, obj.track_id)) {
                    return Err(ModelError::DuplicateTrack {
                        sensor: obj.sensor_id,
                        track: obj.track_id,
                    });
                }
                obj.validate()?;
            }
        }
        Ok(())
    }
}

/// Fused global object with existence probability and uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemObject {
    pub global_id: u64,
    pub timestamp: f64,
    pub state: StateVector,
    pub covariance: Matrix6<f64>,
    pub dims: Dimensions,
    pub status: TrackStatus,
    pub p_exists: f64,
    pub s_exists: f64,
    /// Fused belief mass after model-based corrections.
    pub mass: BeliefMass,
    pub contributors: BTreeSet<SensorId>,
}

/// Dempster-Shafer mass over `{exists, not-exists, unknown}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeliefMass {
    pub exists: f64,
    pub not_exists: f64,
    pub unknown: f64,
}

impl BeliefMass {
    /// Full ignorance, the identity of Dempster's rule.
    pub const VACUOUS: BeliefMass = BeliefMass {
        exists: 0.0,
        not_exists: 0.0,
        unknown: 1.0,
    };

    pub fn new(exists: f64, not_exists: f64, unknown: f64) -> Result<Self, ModelError> {
        let m = Self {
            exists,
            not_exists,
            unknown,
        };
        if m.is_valid() {
            Ok(m)
        } else {
            Err(ModelError::InvalidMass {
                exists,
                not_exists,
                unknown,
            })
        }
    }

    /// Builds a mass from the two specific components; the remainder is ignorance.
    pub fn from_exists_not_exists(exists: f64, not_exists: f64) -> Result<Self, ModelError> {
        Self::new(exists, not_exists, 1.0 - exists - not_exists)
    }

    pub fn is_valid(&self) -> bool {
        let parts = [self.exists, self.not_exists, self.unknown];
        parts
            .iter()
            .all(|p| p.is_finite() && (0.0..=1.0).contains(p))
            && (self.sum() - 1.0).abs() <= MASS_TOLERANCE
    }

    pub fn sum(&self) -> f64 {
        self.exists + self.not_exists + self.unknown
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.exists, self.not_exists, self.unknown]
    }

    pub fn is_vacuous(&self) -> bool {
        self.exists == 0.0 && self.not_exists == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldOfView {
    /// Range in metres.
    pub range: f64,
    /// Full horizontal opening angle in radians.
    pub horizontal: f64,
    /// Full vertical opening angle in radians.
    pub vertical: f64,
}

impl FieldOfView {
    pub fn covers_full_azimuth(&self) -> bool {
        self.horizontal >= 2.0 * PI - 1e-12
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            range: self.range * factor,
            horizontal: (self.horizontal * factor).min(2.0 * PI),
            vertical: (self.vertical * factor).min(PI - 1e-9),
        }
    }
}

/// Region just beyond the nominal range where the sensor still produces
/// detections with reduced probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverRange {
    /// Multiplier on the nominal range bounding the artefact region.
    pub range_multiplier: f64,
    pub detection_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorMeta {
    pub id: SensorId,
    pub position: Point3<f64>,
    /// Boresight yaw in the global frame (rad, counter-clockwise from +x).
    pub yaw: f64,
    /// Boresight pitch (rad, positive up).
    pub pitch: f64,
    pub fov: FieldOfView,
    pub trust: f64,
    pub detection_probability: f64,
    pub false_alarm_rate: f64,
    pub confirmation_threshold: f64,
    pub deletion_threshold: f64,
    pub over_range: Option<OverRange>,
    /// Measurement noise standard deviation per Cartesian axis (m).
    pub noise_std: f64,
}

impl SensorMeta {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fov = &self.fov;
        let bad = |what: &'static str| Err(ModelError::InvalidSensor { id: self.id, what });
        if !(fov.range > 0.0) {
            return bad("fov range must be > 0");
        }
        if !(fov.horizontal > 0.0 && fov.horizontal <= 2.0 * PI + 1e-12) {
            return bad("horizontal fov must be in (0, 360] degrees");
        }
        if !(fov.vertical > 0.0 && fov.vertical < PI) {
            return bad("vertical fov must be in (0, 180) degrees");
        }
        if !(self.detection_probability > 0.0 && self.detection_probability <= 1.0) {
            return bad("detection probability must be in (0, 1]");
        }
        if !(self.false_alarm_rate > 0.0 && self.false_alarm_rate < 1.0) {
            return bad("false alarm rate must be in (0, 1)");
        }
        if !(self.trust > 0.0 && self.trust <= 1.0) {
            return bad("trust must be in (0, 1]");
        }
        if !(self.confirmation_threshold > self.deletion_threshold) {
            return bad("confirmation threshold must exceed deletion threshold");
        }
        if !(self.noise_std >= 0.0) {
            return bad("noise std must be >= 0");
        }
        if let Some(over) = &self.over_range {
            if !(over.range_multiplier >= 1.0) || !(0.0..=1.0).contains(&over.detection_probability)
            {
                return bad(
                    "over-range extension must have multiplier >= 1 and probability in [0, 1]",
                );
            }
        }
        Ok(())
    }

    /// Pose used to map between the sensor frame and the global frame.
    pub fn frame(&self) -> SensorFrame {
        SensorFrame::new(self.position, self.yaw, self.pitch)
    }

    /// Standard score-based initial track score, one hit worth of evidence.
    pub fn initial_score(&self) -> f64 {
        (self.detection_probability / self.false_alarm_rate).ln()
    }
}
