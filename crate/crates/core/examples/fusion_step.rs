//! Two sensors, one object: sensor 2 stays silent although the object is in
//! its field of view, so the fusion centre registers a miss and lowers the
//! existence probability.

use nalgebra::{Matrix6, Point3};
use plausifuse::fusion::{fuse_step, FusionContext, FusionState};
use plausifuse::model::{
    DigitalMap, Dimensions, FieldOfView, LocalObject, LocalObjectList, SensorId, SensorMeta,
    StateVector, TrackStatus,
};
use plausifuse::plausibility::ValueLimits;

fn sensor(id: u32, y: f64) -> SensorMeta {
    SensorMeta {
        id: SensorId(id),
        position: Point3::new(0.0, y, 3.0),
        yaw: 0.0,
        pitch: 0.0,
        fov: FieldOfView {
            range: 90.0,
            horizontal: 60f64.to_radians(),
            vertical: 20f64.to_radians(),
        },
        trust: 0.9,
        detection_probability: 0.9,
        false_alarm_rate: 1e-6,
        confirmation_threshold: 20.7,
        deletion_threshold: 0.0,
        over_range: None,
        noise_std: 0.5,
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sensors = [sensor(1, 0.0), sensor(2, 8.0)];
    let map = DigitalMap::from_fn((-10.0, -40.0), 1.0, 140, 80, |_, y| y.abs() < 12.0)?;
    let ctx = FusionContext::new(&sensors, map, ValueLimits::default())?;
    let mut state = FusionState::new();

    for k in 0..5 {
        let t = k as f64 * 0.1;
        let reported = LocalObject {
            sensor_id: SensorId(1),
            track_id: 4,
            timestamp: t,
            state: StateVector::new(40.0 + 2.0 * t, 4.0, 0.75, 20.0, 0.0, 0.0),
            covariance: Matrix6::identity() * 0.25,
            dims: Dimensions::new(4.5, 1.8, 1.5, 0.0)?,
            status: TrackStatus {
                score: 30.0,
                confirmed: true,
                coasting: false,
            },
        };
        let mut list = LocalObjectList::new(t);
        list.insert(SensorId(1), vec![reported]);
        list.insert(SensorId(2), vec![]);
        let (objects, ledger) = fuse_step(&list, &ctx, &mut state);
        for o in &objects {
            println!(
                "t={t:.1} object {} m=({:.3}, {:.3}, {:.3}) p_exists={:.3} s={:.3}",
                o.global_id,
                o.mass.exists,
                o.mass.not_exists,
                o.mass.unknown,
                o.p_exists,
                o.s_exists
            );
        }
        for (id, c) in ledger.counts() {
            println!(
                "        sensor {id}: {} observations, {} misses",
                c.observations, c.misses
            );
        }
    }
    Ok(())
}
