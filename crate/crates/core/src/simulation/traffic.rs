//! Ground-truth traffic: path geometry, highway arrivals and a signalised
//! four-way junction with turning vehicles and vulnerable road users.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::model::{normalize_angle, Dimensions, StateVector};

use super::config::{ClassMix, HighwaySpec, HighwayTraffic, IntersectionSpec, IntersectionTraffic};
use super::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectClass {
    Car,
    Truck,
    Bus,
    Cyclist,
    Pedestrian,
}

impl ObjectClass {
    /// Length, width, height in metres.
    pub fn extent(self) -> (f64, f64, f64) {
        match self {
            ObjectClass::Car => (4.5, 1.8, 1.5),
            ObjectClass::Truck => (12.0, 2.5, 3.8),
            ObjectClass::Bus => (12.0, 2.55, 3.2),
            ObjectClass::Cyclist => (1.8, 0.6, 1.7),
            ObjectClass::Pedestrian => (0.5, 0.5, 1.7),
        }
    }

    fn sample(mix: &ClassMix, u: f64) -> Self {
        if u < mix.car {
            ObjectClass::Car
        } else if u < mix.car + mix.truck {
            ObjectClass::Truck
        } else {
            ObjectClass::Bus
        }
    }
}

/// One piece of a planar path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    Line {
        start: (f64, f64),
        heading: f64,
        length: f64,
    },
    /// Circular arc; positive `sweep` turns left.
    Arc {
        center: (f64, f64),
        radius: f64,
        start_angle: f64,
        sweep: f64,
    },
}

impl Segment {
    pub fn length(&self) -> f64 {
        match self {
            Segment::Line { length, .. } => *length,
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Position and heading at arclength `s` along this segment.
    fn eval(&self, s: f64) -> (f64, f64, f64) {
        match *self {
            Segment::Line { start, heading, .. } => (
                start.0 + s * heading.cos(),
                start.1 + s * heading.sin(),
                heading,
            ),
            Segment::Arc {
                center,
                radius,
                start_angle,
                sweep,
            } => {
                let dir = sweep.signum();
                let a = start_angle + dir * s / radius;
                (
                    center.0 + radius * a.cos(),
                    center.1 + radius * a.sin(),
                    normalize_angle(a + dir * FRAC_PI_2),
                )
            }
        }
    }
}

/// Continuous chain of segments parameterised by arclength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub segments: Vec<Segment>,
}

impl Path {
    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    /// `(x, y, heading)` at arclength `s`, clamped to the path.
    pub fn eval(&self, s: f64) -> (f64, f64, f64) {
        let mut rest = s.max(0.0);
        for seg in &self.segments {
            let l = seg.length();
            if rest <= l {
                return seg.eval(rest);
            }
            rest -= l;
        }
        let last = self.segments.last().expect("empty path");
        last.eval(last.length())
    }

    fn straight(start: (f64, f64), heading: f64, length: f64) -> Self {
        Self {
            segments: vec![Segment::Line {
                start,
                heading,
                length,
            }],
        }
    }
}

/// A traffic participant with its full sampled trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthObject {
    pub id: u64,
    pub class: ObjectClass,
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub path: Path,
    /// Global step index of the first sample.
    pub first_step: i64,
    /// Arclength along `path` at each step from `first_step` on.
    pub arclength: Vec<f64>,
}

/// Kinematic state of a ground-truth object at one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthState {
    pub id: u64,
    pub class: ObjectClass,
    pub state: StateVector,
    pub dims: Dimensions,
}

impl GroundTruthObject {
    pub fn active_at(&self, step: i64) -> bool {
        step >= self.first_step && step < self.first_step + self.arclength.len() as i64
    }

    pub fn state_at(&self, step: i64, dt: f64) -> Option<TruthState> {
        if !self.active_at(step) {
            return None;
        }
        let k = (step - self.first_step) as usize;
        let s = self.arclength[k];
        let (x, y, heading) = self.path.eval(s);
        // central difference where possible, one-sided at the ends
        let (s0, s1, span) = match (k.checked_sub(1), self.arclength.get(k + 1)) {
            (Some(p), Some(n)) => (self.arclength[p], *n, 2.0 * dt),
            (None, Some(n)) => (s, *n, dt),
            (Some(p), None) => (self.arclength[p], s, dt),
            (None, None) => (s, s, dt),
        };
        let speed = (s1 - s0) / span;
        let z = self.height / 2.0;
        Some(TruthState {
            id: self.id,
            class: self.class,
            state: StateVector::new(x, y, z, speed * heading.cos(), speed * heading.sin(), 0.0),
            dims: Dimensions {
                length: self.length,
                width: self.width,
                height: self.height,
                heading,
            },
        })
    }
}

/// Time-indexed ground truth. Step `k` is at time `k * sample_period`;
/// negative steps belong to the lead-in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub sample_period: f64,
    pub first_step: i64,
    pub last_step: i64,
    pub objects: Vec<GroundTruthObject>,
}

impl GroundTruth {
    pub fn snapshot(&self, step: i64) -> Vec<TruthState> {
        self.objects
            .iter()
            .filter_map(|o| o.state_at(step, self.sample_period))
            .collect()
    }
}

fn new_object(
    id: u64,
    class: ObjectClass,
    path: Path,
    first_step: i64,
    arclength: Vec<f64>,
) -> GroundTruthObject {
    let (length, width, height) = class.extent();
    GroundTruthObject {
        id,
        class,
        length,
        width,
        height,
        path,
        first_step,
        arclength,
    }
}

/// Highway: Poisson arrivals per lane at constant lane speed, no lane
/// changes. Traffic is prefilled so the road is in steady state from
/// `first_step` on.
pub fn generate_highway(
    road: &HighwaySpec,
    traffic: &HighwayTraffic,
    seed: u64,
    dt: f64,
    first_step: i64,
    last_step: i64,
) -> GroundTruth {
    let mut objects = Vec::new();
    let length = road.x_end - road.x_start;
    let t_begin = first_step as f64 * dt;
    let t_end = last_step as f64 * dt;
    for (lane, (&w, &v)) in traffic
        .lane_weights
        .iter()
        .zip(&traffic.lane_speeds)
        .enumerate()
    {
        let rate = traffic.arrival_rate * w;
        if rate <= 0.0 {
            continue;
        }
        let mut rng = stream_rng(seed, Stream::Traffic, lane as u64, 0);
        let exp = Exp::new(rate).expect("positive rate");
        let y = (lane as f64 + 0.5) * road.lane_width;
        let lifetime = length / v;
        // first arrival early enough that the lane is full at t_begin
        let mut t = t_begin - lifetime;
        loop {
            t += exp.sample(&mut rng).max(traffic.min_headway);
            if t > t_end {
                break;
            }
            let class = ObjectClass::sample(&traffic.class_mix, rng.random::<f64>());
            let k0 = ((t / dt).ceil() as i64).max(first_step);
            let k1 = (((t + lifetime) / dt).floor() as i64).min(last_step);
            if k1 < k0 {
                continue;
            }
            let arclength = (k0..=k1).map(|k| v * (k as f64 * dt - t)).collect();
            let path = Path::straight((road.x_start, y), 0.0, length);
            objects.push((t, lane, class, path, k0, arclength));
        }
    }
    objects.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    GroundTruth {
        sample_period: dt,
        first_step,
        last_step,
        objects: objects
            .into_iter()
            .enumerate()
            .map(|(i, (_, _, class, path, k0, s))| new_object(i as u64 + 1, class, path, k0, s))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// intersection

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Turn {
    Left,
    Straight,
    Right,
}

/// Rotation of the approach frame: approach `a` drives along `+x` after
/// rotating the local frame by `a * 90°`.
fn rotate(p: (f64, f64), approach: usize) -> (f64, f64) {
    let a = approach as f64 * FRAC_PI_2;
    let (s, c) = a.sin_cos();
    (c * p.0 - s * p.1, s * p.0 + c * p.1)
}

/// Vehicle path for an approach given in the local frame (driving `+x`,
/// lanes at negative lateral offsets).
fn vehicle_path(spec: &IntersectionSpec, approach: usize, lane: usize, turn: Turn) -> (Path, f64) {
    let l = spec.leg_length;
    let stop = spec.half_width() + 1.0;
    let offset = (lane as f64 + 0.5) * spec.lane_width;
    let base = approach as f64 * FRAC_PI_2;
    let mut segments = vec![Segment::Line {
        start: rotate((-l, -offset), approach),
        heading: normalize_angle(base),
        length: l - stop,
    }];
    match turn {
        Turn::Straight => segments.push(Segment::Line {
            start: rotate((-stop, -offset), approach),
            heading: normalize_angle(base),
            length: l + stop,
        }),
        Turn::Right => {
            let r = stop - offset;
            segments.push(Segment::Arc {
                center: rotate((-stop, -stop), approach),
                radius: r,
                start_angle: normalize_angle(base + FRAC_PI_2),
                sweep: -FRAC_PI_2,
            });
            segments.push(Segment::Line {
                start: rotate((-offset, -stop), approach),
                heading: normalize_angle(base - FRAC_PI_2),
                length: l - stop,
            });
        }
        Turn::Left => {
            let r = stop + offset;
            segments.push(Segment::Arc {
                center: rotate((-stop, stop), approach),
                radius: r,
                start_angle: normalize_angle(base - FRAC_PI_2),
                sweep: FRAC_PI_2,
            });
            segments.push(Segment::Line {
                start: rotate((offset, stop), approach),
                heading: normalize_angle(base + FRAC_PI_2),
                length: l - stop,
            });
        }
    }
    (Path { segments }, l - stop)
}

struct Agent {
    id: u64,
    class: ObjectClass,
    path: Path,
    approach: usize,
    lane: usize,
    stop_at: f64,
    turn_from: f64,
    turn_to: f64,
    first_step: i64,
    s: Vec<f64>,
    v: f64,
    done: bool,
}

/// Signal phase: index of the approach holding green at time `t`, or `None`
/// during clearance.
fn green_approach(t: f64, traffic: &IntersectionTraffic) -> Option<usize> {
    let phase = traffic.green_time + traffic.clearance_time;
    let k = (t / phase).floor();
    let within = t - k * phase;
    (within < traffic.green_time).then(|| (k as i64).rem_euclid(4) as usize)
}

const MAX_ACCEL: f64 = 2.0;
const COMFORT_DECEL: f64 = 3.0;
const MIN_GAP: f64 = 2.0;

/// Four-way junction with round-robin signals. Vehicles follow their leader
/// on the approach lane, stop at red and take arc connectors through the
/// junction; pedestrians and cyclists use the sidewalks.
pub fn generate_intersection(
    spec: &IntersectionSpec,
    traffic: &IntersectionTraffic,
    seed: u64,
    dt: f64,
    first_step: i64,
    last_step: i64,
) -> GroundTruth {
    let lanes = spec.lanes_per_direction as usize;
    let mut rng = stream_rng(seed, Stream::Traffic, 0, 0);
    let mut agents: Vec<Agent> = Vec::new();
    let mut finished: Vec<GroundTruthObject> = Vec::new();
    let mut next_id = 1u64;
    let lead_in = ((2.0 * spec.leg_length / traffic.approach_speed) / dt).ceil() as i64;
    let start = first_step - lead_in;
    let p_vehicle = 1.0 - (-traffic.vehicle_rate * dt).exp();
    let p_ped = 1.0 - (-traffic.pedestrian_rate * dt).exp();
    let p_cyc = 1.0 - (-traffic.cyclist_rate * dt).exp();
    let l = spec.leg_length;

    for step in start..=last_step {
        let t = step as f64 * dt;
        // vehicle arrivals per approach lane
        for approach in 0..4 {
            for lane in 0..lanes {
                if rng.random::<f64>() >= p_vehicle {
                    continue;
                }
                let draw: f64 = rng.random();
                let turn = {
                    let [pl, ps, _] = traffic.turn_probabilities;
                    // inner lane turns left or goes straight, outer lanes go
                    // straight or right
                    let raw = if draw < pl {
                        Turn::Left
                    } else if draw < pl + ps {
                        Turn::Straight
                    } else {
                        Turn::Right
                    };
                    match (raw, lane == 0, lane + 1 == lanes) {
                        (Turn::Left, false, _) => Turn::Straight,
                        (Turn::Right, _, false) => Turn::Straight,
                        (t, _, _) => t,
                    }
                };
                let class = ObjectClass::sample(&traffic.class_mix, rng.random::<f64>());
                let entry_free = agents
                    .iter()
                    .filter(|a| {
                        !a.done
                            && a.approach == approach
                            && a.lane == lane
                            && a.class != ObjectClass::Pedestrian
                            && a.class != ObjectClass::Cyclist
                    })
                    .all(|a| *a.s.last().unwrap() > 20.0);
                if !entry_free {
                    continue;
                }
                let (path, stop_at) = vehicle_path(spec, approach, lane, turn);
                let turn_from = stop_at;
                let turn_to = match turn {
                    Turn::Straight => stop_at,
                    _ => stop_at + path.segments[1].length(),
                };
                agents.push(Agent {
                    id: next_id,
                    class,
                    path,
                    approach,
                    lane,
                    stop_at,
                    turn_from,
                    turn_to,
                    first_step: step,
                    s: vec![0.0],
                    v: traffic.approach_speed,
                    done: false,
                });
                next_id += 1;
            }
        }
        // sidewalk users: along x at y = ±offset and along y at x = ±offset
        for (p, class, speed) in [
            (p_ped, ObjectClass::Pedestrian, traffic.pedestrian_speed),
            (p_cyc, ObjectClass::Cyclist, traffic.cyclist_speed),
        ] {
            for walk in 0..4 {
                if rng.random::<f64>() >= p {
                    continue;
                }
                let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let lateral = side * spec.sidewalk_offset;
                let local_start = (-l, lateral);
                let path = Path::straight(
                    rotate(local_start, walk),
                    normalize_angle(walk as f64 * FRAC_PI_2),
                    2.0 * l,
                );
                agents.push(Agent {
                    id: next_id,
                    class,
                    path,
                    approach: 4 + walk,
                    lane: 0,
                    stop_at: f64::INFINITY,
                    turn_from: f64::INFINITY,
                    turn_to: f64::INFINITY,
                    first_step: step,
                    s: vec![0.0],
                    v: speed,
                    done: false,
                });
                next_id += 1;
            }
        }

        // advance existing agents (those spawned this step stay at s = 0)
        let green = green_approach(t, traffic);
        let positions: Vec<(usize, usize, f64, f64, bool)> = agents
            .iter()
            .map(|a| {
                (
                    a.approach,
                    a.lane,
                    *a.s.last().unwrap(),
                    a.class.extent().0,
                    a.done,
                )
            })
            .collect();
        for (i, a) in agents.iter_mut().enumerate() {
            if a.done || a.first_step == step {
                continue;
            }
            let s = *a.s.last().unwrap();
            let total = a.path.length();
            let v_des = if a.approach >= 4 {
                a.v
            } else if s >= a.turn_from - 10.0 && s < a.turn_to && a.turn_to > a.turn_from {
                traffic.turn_speed
            } else {
                traffic.approach_speed
            };
            let mut v = if a.approach >= 4 {
                v_des
            } else {
                (a.v + MAX_ACCEL * dt).min(v_des.max(a.v - COMFORT_DECEL * dt))
            };
            if a.approach < 4 {
                // distance to the nearest obstacle ahead: red stop line or leader
                let mut gap = f64::INFINITY;
                if green != Some(a.approach) && s < a.stop_at - 0.5 {
                    // only stop if it is still possible to do so comfortably
                    let d_stop = a.stop_at - s;
                    if a.v * a.v / (2.0 * 2.0 * COMFORT_DECEL) <= d_stop {
                        gap = d_stop;
                    }
                }
                let own_length = a.class.extent().0;
                for (j, &(ap, ln, sj, lj, done)) in positions.iter().enumerate() {
                    if j == i || done || ap != a.approach || ln != a.lane || sj <= s {
                        continue;
                    }
                    if s > a.stop_at || sj > a.stop_at + 30.0 {
                        continue;
                    }
                    gap = gap.min(sj - s - (own_length + lj) / 2.0);
                }
                let allowed = (2.0 * COMFORT_DECEL * (gap - MIN_GAP).max(0.0)).sqrt();
                v = v.min(allowed).max(0.0);
            }
            a.v = v;
            let s_next = s + v * dt;
            a.s.push(s_next.min(total));
            if s_next >= total {
                a.done = true;
            }
        }
        // retire finished agents
        let mut k = 0;
        while k < agents.len() {
            if agents[k].done {
                let a = agents.swap_remove(k);
                finished.push(finish(a, first_step, last_step));
            } else {
                k += 1;
            }
        }
    }
    for a in agents {
        finished.push(finish(a, first_step, last_step));
    }
    finished.retain(|o| !o.arclength.is_empty());
    finished.sort_by_key(|o| o.id);
    GroundTruth {
        sample_period: dt,
        first_step,
        last_step,
        objects: finished,
    }
}

fn finish(a: Agent, first_step: i64, last_step: i64) -> GroundTruthObject {
    // truncate to the window [first_step, last_step]
    let skip = (first_step - a.first_step).max(0) as usize;
    let k0 = a.first_step.max(first_step);
    let s: Vec<f64> =
        a.s.into_iter()
            .skip(skip)
            .take((last_step - k0 + 1).max(0) as usize)
            .collect();
    new_object(a.id, a.class, a.path, k0, s)
}

/// Whether `(x, y)` lies on a carriageway or sidewalk of the junction.
pub fn intersection_surface(spec: &IntersectionSpec, x: f64, y: f64) -> bool {
    let hw = spec.half_width();
    let walk = spec.sidewalk_offset + 1.5;
    let l = spec.leg_length;
    let on_x_road = x.abs() <= l && y.abs() <= hw;
    let on_y_road = y.abs() <= l && x.abs() <= hw;
    let on_x_walk =
        x.abs() <= l && (y.abs() - spec.sidewalk_offset).abs() <= walk - spec.sidewalk_offset;
    let on_y_walk =
        y.abs() <= l && (x.abs() - spec.sidewalk_offset).abs() <= walk - spec.sidewalk_offset;
    on_x_road || on_y_road || on_x_walk || on_y_walk
}
