//! One radar tracking a passing car plus clutter: score build-up,
//! confirmation, coasting through dropouts and deletion after it leaves.

use nalgebra::Point3;
use plausifuse::model::{Dimensions, FieldOfView, SensorId, SensorMeta, StateVector};
use plausifuse::simulation::{sense, ObjectClass, PhysicalSensor, SensorSpec, TruthState};
use plausifuse::tracker::{Tracker, TrackerConfig};

fn main() {
    let meta = SensorMeta {
        id: SensorId(1),
        position: Point3::new(0.0, -3.0, 3.0),
        yaw: 17f64.to_radians(),
        pitch: -2f64.to_radians(),
        fov: FieldOfView {
            range: 90.0,
            horizontal: 30f64.to_radians(),
            vertical: 8f64.to_radians(),
        },
        trust: 0.9,
        detection_probability: 0.9,
        false_alarm_rate: 1e-6,
        confirmation_threshold: 1.5 * (0.9f64 / 1e-6).ln(),
        deletion_threshold: 0.0,
        over_range: None,
        noise_std: 0.5,
    };
    let spec = SensorSpec {
        meta: meta.clone(),
        resolution_cells: 1e5,
        max_coasting: 5,
    };
    let sensor = PhysicalSensor::new(&spec, None);
    let mut tracker = Tracker::new(meta.clone(), TrackerConfig::from_sensor(&meta));

    for k in 0..60 {
        let t = k as f64 * 0.1;
        let car = TruthState {
            id: 7,
            class: ObjectClass::Car,
            state: StateVector::new(20.0 + 25.0 * t, 5.25, 0.75, 25.0, 0.0, 0.0),
            dims: Dimensions::new(4.5, 1.8, 1.5, 0.0).expect("valid extent"),
        };
        let detections = sense(&[car], &sensor, 3, k, t);
        tracker.step(t, &detections);
        let summary: Vec<String> = tracker
            .tracks()
            .iter()
            .map(|tr| {
                let flag = match (tr.confirmed, tr.coasting) {
                    (true, true) => "C~",
                    (true, false) => "C",
                    (false, _) => "t",
                };
                format!("#{}{} x={:.1} s={:.1}", tr.id, flag, tr.state[0], tr.score)
            })
            .collect();
        if k % 5 == 0 || detections.len() != 1 {
            println!(
                "t={t:4.1} car x={:5.1} dets={} | {}",
                car.state.x,
                detections.len(),
                summary.join(", ")
            );
        }
    }
}
