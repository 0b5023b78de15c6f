//! Deterministic scenario driver: ground truth, sensing, per-sensor
//! tracking and the fusion centre, stepped in lockstep.

pub mod config;
pub mod rng;
pub mod sensing;
pub mod traffic;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, PlausibilityError};
use crate::fusion::{fuse_step, FusionContext, FusionState, ObservationLedger};
use crate::model::{DigitalMap, LocalObjectList, SystemObject};
use crate::plausibility::ValueLimits;
use crate::tracker::{Tracker, TrackerConfig};

pub use config::{
    AnalysisSpec, BinSpec, FaultSpec, RoadSpec, ScenarioConfig, SensorSpec, TrafficSpec,
};
pub use sensing::{is_detectable, sense, PhysicalSensor};
pub use traffic::{GroundTruth, ObjectClass, TruthState};

/// Everything observed at one recorded step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: u64,
    pub timestamp: f64,
    pub truth: Vec<TruthState>,
    pub local: LocalObjectList,
    pub system: Vec<SystemObject>,
    pub ledger: ObservationLedger,
}

/// Road grid of the scenario, with a margin around the sensed area.
pub fn build_map(road: &RoadSpec) -> Result<DigitalMap, ModelError> {
    match road {
        RoadSpec::Highway(h) => {
            let width = h.lanes as f64 * h.lane_width;
            let (x0, x1) = (h.x_start - 50.0, h.x_end + 50.0);
            let (y0, y1) = (-30.0, width + 46.0);
            let nx = ((x1 - x0) / h.cell_size).ceil() as usize;
            let ny = ((y1 - y0) / h.cell_size).ceil() as usize;
            let map = DigitalMap::from_fn((x0, y0), h.cell_size, nx, ny, |_, y| {
                (0.0..=width).contains(&y)
            })?;
            Ok(map.with_lanes(h.lanes, h.lane_width))
        }
        RoadSpec::Intersection(spec) => {
            let half = spec.leg_length;
            let n = ((2.0 * half) / spec.cell_size).ceil() as usize;
            let map = DigitalMap::from_fn((-half, -half), spec.cell_size, n, n, |x, y| {
                traffic::intersection_surface(spec, x, y)
            })?;
            Ok(map.with_lanes(2 * spec.lanes_per_direction, spec.lane_width))
        }
    }
}

/// Ground truth over the warm-up and the recorded steps.
pub fn generate_traffic(config: &ScenarioConfig) -> GroundTruth {
    let first = -(config.warmup_steps() as i64);
    let last = config.steps() as i64 - 1;
    let dt = config.sample_period;
    match (&config.road, &config.traffic) {
        (RoadSpec::Highway(r), TrafficSpec::Highway(t)) => {
            traffic::generate_highway(r, t, config.seed, dt, first, last)
        }
        (RoadSpec::Intersection(r), TrafficSpec::Intersection(t)) => {
            traffic::generate_intersection(r, t, config.seed, dt, first, last)
        }
        // the parser pairs traffic with the road kind
        _ => unreachable!("traffic model does not match road kind"),
    }
}

fn value_limits(road: &RoadSpec) -> ValueLimits {
    let lane_width = match road {
        RoadSpec::Highway(h) => h.lane_width,
        RoadSpec::Intersection(i) => i.lane_width,
    };
    ValueLimits {
        lane_width,
        ..ValueLimits::default()
    }
}

/// Lockstep simulation of one scenario. Iterate to obtain recorded steps.
pub struct Simulation {
    config: ScenarioConfig,
    truth: GroundTruth,
    physical: Vec<PhysicalSensor>,
    trackers: Vec<Tracker>,
    context: FusionContext,
    state: FusionState,
    step: i64,
    last_step: i64,
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self, PlausibilityError> {
        let map = build_map(&config.road)?;
        let context = FusionContext::new(&config.sensor_metas(), map, value_limits(&config.road))?;
        let fault = config.fault.as_ref();
        let physical = config
            .sensors
            .iter()
            .map(|s| PhysicalSensor::new(s, fault))
            .collect();
        let trackers = config
            .sensors
            .iter()
            .map(|s| {
                let mut tc = TrackerConfig::from_sensor(&s.meta);
                tc.max_coasting = s.max_coasting;
                if let Some(FaultSpec::TrackerThreshold {
                    sensor_id,
                    threshold,
                }) = fault
                {
                    if *sensor_id == s.meta.id {
                        tc.confirmation_threshold = *threshold;
                    }
                }
                Tracker::new(s.meta.clone(), tc)
            })
            .collect();
        let truth = generate_traffic(&config);
        Ok(Self {
            step: truth.first_step,
            last_step: truth.last_step,
            config,
            truth,
            physical,
            trackers,
            context,
            state: FusionState::new(),
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn ground_truth(&self) -> &GroundTruth {
        &self.truth
    }

    pub fn physical_sensors(&self) -> &[PhysicalSensor] {
        &self.physical
    }

    pub fn context(&self) -> &FusionContext {
        &self.context
    }

    fn advance(&mut self) -> StepRecord {
        let k = self.step;
        self.step += 1;
        let t = k as f64 * self.config.sample_period;
        let truth = self.truth.snapshot(k);
        let mut local = LocalObjectList::new(t);
        for (sensor, tracker) in self.physical.iter().zip(&mut self.trackers) {
            let detections = sense(&truth, sensor, self.config.seed, k, t);
            tracker.step(t, &detections);
            local.insert(sensor.meta.id, tracker.confirmed_objects(t));
        }
        let (system, ledger) = fuse_step(&local, &self.context, &mut self.state);
        StepRecord {
            index: k.max(0) as u64,
            timestamp: t,
            truth,
            local,
            system,
            ledger,
        }
    }
}

impl Iterator for Simulation {
    type Item = StepRecord;

    fn next(&mut self) -> Option<StepRecord> {
        while self.step < 0 && self.step <= self.last_step {
            self.advance();
        }
        (self.step <= self.last_step).then(|| self.advance())
    }
}

/// Runs a scenario to completion.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Vec<StepRecord>, PlausibilityError> {
    Ok(Simulation::new(config.clone())?.collect())
}
