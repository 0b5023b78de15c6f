//! Per-sensor sequential multi-object tracking: constant-velocity Kalman
//! filter bank with gated optimal assignment and log-likelihood-ratio track
//! scores for confirmation and deletion.

use nalgebra::{Matrix3, Matrix3x6, Matrix6, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use crate::assignment::assign;
use crate::model::{
    normalize_angle, Dimensions, LocalObject, SensorFrame, SensorId, SensorMeta, StateVector,
    TrackStatus,
};

/// A raw sensor detection in the sensor frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub sensor_id: SensorId,
    pub timestamp: f64,
    /// Measured position in the sensor frame (m).
    pub position: Vector3<f64>,
    /// Measurement noise covariance in the sensor frame (m²).
    pub noise: Matrix3<f64>,
    /// Extent estimate, heading relative to the sensor boresight.
    pub extent: Option<Dimensions>,
}

/// Detection mapped to the global frame through an (assumed) sensor pose.
#[derive(Debug, Clone, PartialEq)]
struct GlobalMeasurement {
    position: Vector3<f64>,
    noise: Matrix3<f64>,
    extent: Option<Dimensions>,
}

impl Detection {
    fn to_global(&self, frame: &SensorFrame, yaw: f64) -> GlobalMeasurement {
        let position = frame.to_global(&self.position).coords;
        let r = Matrix3::from_columns(&[
            frame.rotate_to_global(&Vector3::x()),
            frame.rotate_to_global(&Vector3::y()),
            frame.rotate_to_global(&Vector3::z()),
        ]);
        GlobalMeasurement {
            position,
            noise: r * self.noise * r.transpose(),
            extent: self.extent.map(|d| d.with_heading(d.heading + yaw)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    pub confirmation_threshold: f64,
    pub deletion_threshold: f64,
    pub initial_score: f64,
    /// Score change per measurement update, `ln(pd/pfa)`.
    pub hit_increment: f64,
    /// Score change per missed update, `ln((1-pd)/(1-pfa))` (negative).
    pub miss_decrement: f64,
    /// Squared Mahalanobis gate on the 3-D position innovation.
    pub gate: f64,
    /// Horizontal white-noise acceleration intensity (m²/s³).
    pub process_noise: f64,
    pub vertical_process_noise: f64,
    /// Consecutive misses after which a track is dropped.
    pub max_coasting: u32,
    pub init_velocity_std: f64,
    pub default_extent: Dimensions,
}

/// χ² 99.9% quantile with 3 degrees of freedom.
pub const GATE_CHI2_3DOF_999: f64 = 16.266;

impl TrackerConfig {
    pub fn from_sensor(sensor: &SensorMeta) -> Self {
        let pd = sensor.detection_probability;
        let pfa = sensor.false_alarm_rate;
        Self {
            confirmation_threshold: sensor.confirmation_threshold,
            deletion_threshold: sensor.deletion_threshold,
            initial_score: (pd / pfa).ln(),
            hit_increment: (pd / pfa).ln(),
            // pd = 1 would make a miss impossible; keep the decrement finite
            miss_decrement: ((1.0 - pd).max(1e-9) / (1.0 - pfa)).ln(),
            gate: GATE_CHI2_3DOF_999,
            process_noise: 1.0,
            vertical_process_noise: 0.05,
            max_coasting: 5,
            init_velocity_std: 15.0,
            default_extent: Dimensions {
                length: 4.5,
                width: 1.8,
                height: 1.5,
                heading: 0.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub id: u64,
    pub state: Vector6<f64>,
    pub covariance: Matrix6<f64>,
    pub dims: Dimensions,
    pub score: f64,
    pub confirmed: bool,
    pub coasting: bool,
    /// Consecutive steps without update.
    pub misses: u32,
    pub hits: u32,
}

impl Track {
    pub fn to_local(&self, sensor_id: SensorId, timestamp: f64) -> LocalObject {
        let covariance = (self.covariance + self.covariance.transpose()) * 0.5;
        LocalObject {
            sensor_id,
            track_id: self.id,
            timestamp,
            state: StateVector::from_vector(&self.state),
            covariance,
            dims: self.dims,
            status: TrackStatus {
                score: self.score,
                confirmed: self.confirmed,
                coasting: self.coasting,
            },
        }
    }
}

fn position_selector() -> Matrix3x6<f64> {
    let mut h = Matrix3x6::zeros();
    h[(0, 0)] = 1.0;
    h[(1, 1)] = 1.0;
    h[(2, 2)] = 1.0;
    h
}

/// Advances every track under constant velocity; coasting flags untouched.
pub fn predict(mut tracks: Vec<Track>, dt: f64, config: &TrackerConfig) -> Vec<Track> {
    if dt <= 0.0 {
        return tracks;
    }
    let mut f = Matrix6::identity();
    for i in 0..3 {
        f[(i, i + 3)] = dt;
    }
    let mut q = Matrix6::zeros();
    for i in 0..3 {
        let intensity = if i == 2 {
            config.vertical_process_noise
        } else {
            config.process_noise
        };
        q[(i, i)] = intensity * dt.powi(3) / 3.0;
        q[(i, i + 3)] = intensity * dt.powi(2) / 2.0;
        q[(i + 3, i)] = intensity * dt.powi(2) / 2.0;
        q[(i + 3, i + 3)] = intensity * dt;
    }
    for t in &mut tracks {
        t.state = f * t.state;
        t.covariance = f * t.covariance * f.transpose() + q;
    }
    tracks
}

fn innovation(track: &Track, m: &GlobalMeasurement) -> Option<(Vector3<f64>, Matrix3<f64>)> {
    let h = position_selector();
    let s = h * track.covariance * h.transpose() + m.noise;
    let y = m.position - h * track.state;
    s.try_inverse().map(|s_inv| (y, s_inv))
}

/// Squared Mahalanobis distance between a track and a detection.
pub fn gating_distance(track: &Track, detection: &Detection, frame: &SensorFrame, yaw: f64) -> f64 {
    let m = detection.to_global(frame, yaw);
    innovation(track, &m).map_or(f64::INFINITY, |(y, s_inv)| (y.transpose() * s_inv * y)[0])
}

fn update(track: &mut Track, m: &GlobalMeasurement, config: &TrackerConfig) {
    let h = position_selector();
    let s = h * track.covariance * h.transpose() + m.noise;
    if let Some(s_inv) = s.try_inverse() {
        let k = track.covariance * h.transpose() * s_inv;
        let y = m.position - h * track.state;
        track.state += k * y;
        // Joseph form keeps the covariance symmetric PSD
        let ikh = Matrix6::identity() - k * h;
        track.covariance = ikh * track.covariance * ikh.transpose() + k * m.noise * k.transpose();
        track.covariance = (track.covariance + track.covariance.transpose()) * 0.5;
    }
    if let Some(extent) = m.extent {
        let w = 0.3;
        track.dims.length += w * (extent.length - track.dims.length);
        track.dims.width += w * (extent.width - track.dims.width);
        track.dims.height += w * (extent.height - track.dims.height);
        track.dims.heading = extent.heading;
    }
    let (vx, vy) = (track.state[3], track.state[4]);
    if vx.hypot(vy) > 1.0 {
        track.dims.heading = normalize_angle(vy.atan2(vx));
    }
    track.score += config.hit_increment;
    track.coasting = false;
    track.misses = 0;
    track.hits += 1;
}

/// Gated optimal assignment followed by filter updates. Returns the updated
/// tracks and the indices of unassigned detections.
pub fn associate_and_update(
    mut tracks: Vec<Track>,
    detections: &[Detection],
    frame: &SensorFrame,
    yaw: f64,
    config: &TrackerConfig,
) -> (Vec<Track>, Vec<usize>) {
    let measurements: Vec<GlobalMeasurement> =
        detections.iter().map(|d| d.to_global(frame, yaw)).collect();
    let costs: Vec<Vec<f64>> = tracks
        .iter()
        .map(|t| {
            measurements
                .iter()
                .map(|m| {
                    innovation(t, m)
                        .map_or(f64::INFINITY, |(y, s_inv)| (y.transpose() * s_inv * y)[0])
                })
                .collect()
        })
        .collect();
    let pairs = if measurements.is_empty() {
        Vec::new()
    } else {
        assign(&costs, config.gate)
    };
    let mut matched_track = vec![None; tracks.len()];
    let mut detection_used = vec![false; measurements.len()];
    for &(ti, di) in &pairs {
        matched_track[ti] = Some(di);
        detection_used[di] = true;
    }
    for (ti, track) in tracks.iter_mut().enumerate() {
        match matched_track[ti] {
            Some(di) => update(track, &measurements[di], config),
            None => {
                track.score += config.miss_decrement;
                track.coasting = true;
                track.misses += 1;
            }
        }
    }
    let unassigned = (0..measurements.len())
        .filter(|&i| !detection_used[i])
        .collect();
    (tracks, unassigned)
}

/// Initiates tentative tracks from unassigned detections, promotes tracks
/// over the confirmation threshold and drops stale ones.
pub fn manage_tracks(
    mut tracks: Vec<Track>,
    unassigned: &[Detection],
    frame: &SensorFrame,
    yaw: f64,
    config: &TrackerConfig,
    next_id: &mut u64,
) -> Vec<Track> {
    for t in &mut tracks {
        if t.score >= config.confirmation_threshold {
            t.confirmed = true;
        }
    }
    tracks.retain(|t| t.score >= config.deletion_threshold && t.misses < config.max_coasting);
    for d in unassigned {
        let m = d.to_global(frame, yaw);
        let mut covariance = Matrix6::zeros();
        covariance.fixed_view_mut::<3, 3>(0, 0).copy_from(&m.noise);
        let v = config.init_velocity_std.powi(2);
        for i in 3..5 {
            covariance[(i, i)] = v;
        }
        covariance[(5, 5)] = (config.init_velocity_std * 0.1).powi(2);
        let dims = m.extent.unwrap_or(config.default_extent);
        let score = config.initial_score;
        tracks.push(Track {
            id: *next_id,
            state: Vector6::new(m.position.x, m.position.y, m.position.z, 0.0, 0.0, 0.0),
            covariance,
            dims,
            score,
            confirmed: score >= config.confirmation_threshold,
            coasting: false,
            misses: 0,
            hits: 1,
        });
        *next_id += 1;
    }
    tracks
}

/// Stateful tracker bound to one sensor and its assumed (nominal) pose.
#[derive(Debug, Clone)]
pub struct Tracker {
    pub sensor: SensorMeta,
    pub config: TrackerConfig,
    frame: SensorFrame,
    tracks: Vec<Track>,
    next_id: u64,
    last_time: Option<f64>,
}

impl Tracker {
    pub fn new(sensor: SensorMeta, config: TrackerConfig) -> Self {
        let frame = sensor.frame();
        Self {
            sensor,
            config,
            frame,
            tracks: Vec::new(),
            next_id: 1,
            last_time: None,
        }
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Runs one predict / associate / update / manage cycle.
    pub fn step(&mut self, timestamp: f64, detections: &[Detection]) {
        let dt = self.last_time.map_or(0.0, |t| timestamp - t);
        self.last_time = Some(timestamp);
        let yaw = self.sensor.yaw;
        let tracks = predict(std::mem::take(&mut self.tracks), dt, &self.config);
        let (tracks, unassigned) =
            associate_and_update(tracks, detections, &self.frame, yaw, &self.config);
        let fresh: Vec<Detection> = unassigned.iter().map(|&i| detections[i].clone()).collect();
        self.tracks = manage_tracks(
            tracks,
            &fresh,
            &self.frame,
            yaw,
            &self.config,
            &mut self.next_id,
        );
    }

    /// Confirmed tracks as local objects.
    pub fn confirmed_objects(&self, timestamp: f64) -> Vec<LocalObject> {
        self.tracks
            .iter()
            .filter(|t| t.confirmed)
            .map(|t| t.to_local(self.sensor.id, timestamp))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FieldOfView, SensorMeta};
    use nalgebra::Point3;

    fn sensor() -> SensorMeta {
        let pd: f64 = 0.9;
        let pfa: f64 = 1e-6;
        SensorMeta {
            id: SensorId(1),
            position: Point3::origin(),
            yaw: 0.0,
            pitch: 0.0,
            fov: FieldOfView {
                range: 90.0,
                horizontal: 30f64.to_radians(),
                vertical: 8f64.to_radians(),
            },
            trust: 0.9,
            detection_probability: pd,
            false_alarm_rate: pfa,
            confirmation_threshold: 1.5 * (pd / pfa).ln(),
            deletion_threshold: 0.0,
            over_range: None,
            noise_std: 0.5,
        }
    }

    fn detection(x: f64, y: f64) -> Detection {
        Detection {
            sensor_id: SensorId(1),
            timestamp: 0.0,
            position: Vector3::new(x, y, 0.0),
            noise: Matrix3::identity() * 0.25,
            extent: None,
        }
    }

    fn track(id: u64, x: f64, y: f64, vx: f64) -> Track {
        Track {
            id,
            state: Vector6::new(x, y, 0.0, vx, 0.0, 0.0),
            covariance: Matrix6::identity(),
            dims: TrackerConfig::from_sensor(&sensor()).default_extent,
            score: 20.0,
            confirmed: false,
            coasting: false,
            misses: 0,
            hits: 1,
        }
    }

    #[test]
    fn predict_constant_velocity() {
        let cfg = TrackerConfig::from_sensor(&sensor());
        let out = predict(vec![track(1, 0.0, 0.0, 10.0)], 0.1, &cfg);
        assert!((out[0].state[0] - 1.0).abs() < 1e-12);
        assert_eq!(out[0].state[3], 10.0);
    }

    #[test]
    fn predict_zero_dt_is_identity() {
        let cfg = TrackerConfig::from_sensor(&sensor());
        let before = vec![track(1, 3.0, 1.0, 10.0)];
        let out = predict(before.clone(), 0.0, &cfg);
        assert_eq!(out, before);
    }

    #[test]
    fn predict_grows_covariance_trace() {
        let cfg = TrackerConfig::from_sensor(&sensor());
        let before = track(1, 0.0, 0.0, 10.0);
        let out = predict(vec![before.clone()], 0.1, &cfg);
        assert!(out[0].covariance.trace() > before.covariance.trace());
    }

    #[test]
    fn single_match_raises_score() {
        let s = sensor();
        let cfg = TrackerConfig::from_sensor(&s);
        let t = track(1, 10.0, 0.0, 0.0);
        let before = t.score;
        let (out, unassigned) =
            associate_and_update(vec![t], &[detection(10.2, 0.1)], &s.frame(), s.yaw, &cfg);
        assert!(unassigned.is_empty());
        assert!(out[0].score > before);
        assert!(!out[0].coasting);
    }

    #[test]
    fn no_detections_means_every_track_coasts() {
        let s = sensor();
        let cfg = TrackerConfig::from_sensor(&s);
        let tracks = vec![track(1, 10.0, 0.0, 0.0), track(2, 20.0, 0.0, 0.0)];
        let (out, _) = associate_and_update(tracks.clone(), &[], &s.frame(), s.yaw, &cfg);
        for (a, b) in out.iter().zip(&tracks) {
            assert!(a.coasting);
            assert!(a.score < b.score);
        }
    }

    #[test]
    fn crossing_assignment_matches_enumeration() {
        let s = sensor();
        let cfg = TrackerConfig::from_sensor(&s);
        let mut t1 = track(1, 10.0, 0.0, 0.0);
        let mut t2 = track(2, 10.0, 2.0, 0.0);
        t1.covariance = Matrix6::identity() * 2.0;
        t2.covariance = Matrix6::identity() * 2.0;
        let dets = [detection(10.0, 1.4), detection(10.0, 0.9)];
        let frame = s.frame();
        let d = |t: &Track, k: usize| gating_distance(t, &dets[k], &frame, 0.0);
        let identity = d(&t1, 0) + d(&t2, 1);
        let swapped = d(&t1, 1) + d(&t2, 0);
        let expect_swap = swapped < identity;
        let (out, unassigned) = associate_and_update(vec![t1, t2], &dets, &frame, 0.0, &cfg);
        assert!(unassigned.is_empty());
        // track 1 received detection 1 iff swapping is cheaper
        let y1 = out[0].state[1];
        let near_det1 = (y1 - 0.9).abs() < (y1 - 1.4).abs();
        assert_eq!(near_det1, expect_swap);
    }

    #[test]
    fn initiation_and_confirmation() {
        let s = sensor();
        let cfg = TrackerConfig::from_sensor(&s);
        let mut next = 1;
        let tracks = manage_tracks(
            vec![],
            &[detection(20.0, 0.0)],
            &s.frame(),
            0.0,
            &cfg,
            &mut next,
        );
        assert_eq!(tracks.len(), 1);
        assert!(!tracks[0].confirmed);
        assert_eq!(tracks[0].score, cfg.initial_score);

        let mut at_threshold = track(9, 0.0, 0.0, 0.0);
        at_threshold.score = cfg.confirmation_threshold + 1e-9;
        let tracks = manage_tracks(vec![at_threshold], &[], &s.frame(), 0.0, &cfg, &mut next);
        assert!(tracks[0].confirmed);
    }

    #[test]
    fn scripted_hits_reach_confirmation() {
        let mut tracker = Tracker::new(sensor(), TrackerConfig::from_sensor(&sensor()));
        tracker.step(0.0, &[detection(30.0, 0.0)]);
        assert!(!tracker.tracks()[0].confirmed);
        tracker.step(0.1, &[detection(30.0, 0.0)]);
        assert!(tracker.tracks()[0].confirmed);
    }

    #[test]
    fn silent_tracks_are_deleted_within_coasting_limit() {
        let s = sensor();
        let cfg = TrackerConfig::from_sensor(&s);
        let mut tracker = Tracker::new(s, cfg.clone());
        for k in 0..4 {
            tracker.step(
                k as f64 * 0.1,
                &[detection(30.0, 0.0), detection(50.0, 5.0)],
            );
        }
        assert_eq!(tracker.tracks().len(), 2);
        for k in 0..cfg.max_coasting {
            tracker.step(0.4 + k as f64 * 0.1, &[]);
        }
        assert!(tracker.tracks().is_empty());
    }

    #[test]
    fn confirmed_never_reverts() {
        let s = sensor();
        let mut tracker = Tracker::new(s.clone(), TrackerConfig::from_sensor(&s));
        tracker.step(0.0, &[detection(30.0, 0.0)]);
        tracker.step(0.1, &[detection(30.0, 0.0)]);
        assert!(tracker.tracks()[0].confirmed);
        tracker.step(0.2, &[]);
        tracker.step(0.3, &[]);
        assert!(tracker.tracks()[0].confirmed);
        assert!(tracker.tracks()[0].coasting);
    }
}
