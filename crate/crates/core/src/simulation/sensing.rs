//! Parametric detection model: field-of-view and occlusion gating, detection
//! probability with an over-range artefact, Gaussian position noise, false
//! alarms, and fault effects.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::model::{
    bounding_box_points, inside_fov, normalize_angle, points_visible, FieldOfView, OrientedBox,
    SensorMeta,
};
use crate::tracker::Detection;

use super::config::{FaultSpec, SensorSpec};
use super::rng::{stream_rng, Stream};
use super::traffic::TruthState;

/// Installed pose and detector behaviour of a sensor, fault effects applied.
#[derive(Debug, Clone)]
pub struct PhysicalSensor {
    pub meta: SensorMeta,
    pub resolution_cells: f64,
    /// Blind wedge as (global centre azimuth, full width), radians.
    pub blind_spot: Option<(f64, f64)>,
}

impl PhysicalSensor {
    pub fn new(spec: &SensorSpec, fault: Option<&FaultSpec>) -> Self {
        let mut meta = spec.meta.clone();
        let mut blind_spot = None;
        match fault {
            Some(FaultSpec::Misorientation { sensor_id, delta }) if *sensor_id == meta.id => {
                meta.yaw = normalize_angle(meta.yaw + delta);
            }
            Some(FaultSpec::BlindSpot {
                sensor_id,
                center,
                width,
            }) if *sensor_id == meta.id => blind_spot = Some((*center, *width)),
            _ => {}
        }
        Self {
            meta,
            resolution_cells: spec.resolution_cells,
            blind_spot,
        }
    }

    fn in_blind_spot(&self, x: f64, y: f64) -> bool {
        match self.blind_spot {
            Some((center, width)) => {
                let p = self.meta.position;
                let az = (y - p.y).atan2(x - p.x);
                normalize_angle(az - center).abs() <= width / 2.0
            }
            None => false,
        }
    }
}

/// Detection probability of a truth object, 0 when it cannot be seen.
fn detection_probability(
    target: &TruthState,
    boxes: &[(u64, OrientedBox)],
    sensor: &PhysicalSensor,
) -> f64 {
    let meta = &sensor.meta;
    let frame = meta.frame();
    let origin = meta.position;
    let center = target.state.position();
    let reach_limit = meta.fov.range * meta.over_range.map_or(1.0, |o| o.range_multiplier);
    let radius = 0.5
        * target
            .dims
            .length
            .hypot(target.dims.width)
            .hypot(target.dims.height);
    if (center - origin).norm() - radius > reach_limit {
        return 0.0;
    }
    if sensor.in_blind_spot(center.x, center.y) {
        return 0.0;
    }
    let points = bounding_box_points(&target.state, &target.dims);
    let p = if points.iter().any(|q| inside_fov(&frame, &meta.fov, q)) {
        meta.detection_probability
    } else if let Some(over) = meta.over_range {
        let extended = FieldOfView {
            range: meta.fov.range * over.range_multiplier,
            ..meta.fov
        };
        if points.iter().any(|q| inside_fov(&frame, &extended, q)) {
            over.detection_probability
        } else {
            return 0.0;
        }
    } else {
        return 0.0;
    };
    let blockers: Vec<OrientedBox> = boxes
        .iter()
        .filter(|(id, _)| *id != target.id)
        .map(|(_, b)| *b)
        .collect();
    if points_visible(&origin, &points, &blockers) {
        p
    } else {
        0.0
    }
}

/// Whether the truth object is unobstructed and inside the sensor's physical
/// field of view (or its over-range extension).
pub fn is_detectable(target: &TruthState, truth: &[TruthState], sensor: &PhysicalSensor) -> bool {
    detection_probability(target, &truth_boxes(truth), sensor) > 0.0
}

fn truth_boxes(truth: &[TruthState]) -> Vec<(u64, OrientedBox)> {
    truth
        .iter()
        .map(|t| (t.id, OrientedBox::new(t.state.position(), &t.dims)))
        .collect()
}

/// Detections of one sensor at one step, in the sensor frame of the
/// physical pose.
pub fn sense(
    truth: &[TruthState],
    sensor: &PhysicalSensor,
    seed: u64,
    step: i64,
    timestamp: f64,
) -> Vec<Detection> {
    let meta = &sensor.meta;
    let frame = meta.frame();
    let sigma = meta.noise_std;
    let noise = Matrix3::identity() * sigma.powi(2).max(1e-6);
    let boxes = truth_boxes(truth);
    let mut out = Vec::new();
    for target in truth {
        let p = detection_probability(target, &boxes, sensor);
        if p <= 0.0 {
            continue;
        }
        let mut rng = stream_rng(
            seed,
            Stream::Detection,
            ((meta.id.0 as u64) << 40) ^ target.id,
            step,
        );
        if rng.random::<f64>() >= p {
            continue;
        }
        let mut q = frame.to_sensor(&target.state.position());
        if sigma > 0.0 {
            let n = Normal::new(0.0, sigma).expect("finite sigma");
            q += Vector3::new(n.sample(&mut rng), n.sample(&mut rng), n.sample(&mut rng));
        }
        out.push(Detection {
            sensor_id: meta.id,
            timestamp,
            position: q,
            noise,
            extent: Some(
                target
                    .dims
                    .with_heading(normalize_angle(target.dims.heading - meta.yaw)),
            ),
        });
    }
    let rate = meta.false_alarm_rate * sensor.resolution_cells;
    if rate > 0.0 {
        let mut rng = stream_rng(seed, Stream::FalseAlarm, meta.id.0 as u64, step);
        let count = Poisson::new(rate).expect("positive rate").sample(&mut rng) as usize;
        let fov = &meta.fov;
        let half_az = if fov.covers_full_azimuth() {
            std::f64::consts::PI
        } else {
            fov.horizontal / 2.0
        };
        for _ in 0..count {
            let r = fov.range * rng.random::<f64>().cbrt();
            let az = rng.random_range(-half_az..=half_az);
            let el = rng.random_range(-fov.vertical / 2.0..=fov.vertical / 2.0);
            let q = Vector3::new(
                r * el.cos() * az.cos(),
                r * el.cos() * az.sin(),
                r * el.sin(),
            );
            out.push(Detection {
                sensor_id: meta.id,
                timestamp,
                position: q,
                noise,
                extent: None,
            });
        }
    }
    out
}
