//! Central fusion: clustering of synchronous local tracks, merging into
//! system objects, frame-to-frame identity, and plausibilization.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use crate::assignment::assign;
use crate::error::{ModelError, PlausibilityError};
use crate::model::{
    normalize_angle, BeliefMass, DigitalMap, Dimensions, LocalObject, LocalObjectList, SensorId,
    SensorMeta, StateVector, SystemObject, TrackStatus,
};
use crate::plausibility::{
    apply_corrections, calibrate_sigmoid, classify_contribution, compute_bba, dim_vel_correction,
    ds_combine, history_correction, miss_mass, p_dm_factor, p_ex_factor, p_fov_factor,
    p_occ_factor, p_val_factor, pignistic, BbaFactors, Contribution, SigmoidCalib, ValueLimits,
};

/// χ² 99% quantile with 6 degrees of freedom.
pub const T2T_GATE_CHI2_6DOF_99: f64 = 16.812;
/// Euclidean gate (m) for frame-to-frame identity association.
pub const FRAME_GATE: f64 = 4.0;
/// Weight of the newest frame in dimension and existence smoothing.
pub const EMA_WEIGHT: f64 = 0.5;

/// Local objects considered to represent the same physical object.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackCluster {
    pub members: BTreeMap<SensorId, LocalObject>,
}

impl TrackCluster {
    pub fn sensors(&self) -> BTreeSet<SensorId> {
        self.members.keys().copied().collect()
    }
}

/// Track-to-track statistical distance: squared Mahalanobis distance on the
/// full state under summed covariances.
pub fn t2t_distance(a: &LocalObject, b: &LocalObject) -> f64 {
    let d: Vector6<f64> = a.state.as_vector() - b.state.as_vector();
    let s = a.covariance + b.covariance;
    match s.cholesky() {
        Some(ch) => d.dot(&ch.solve(&d)),
        None => f64::INFINITY,
    }
}

#[derive(Debug)]
struct UnionFind {
    parent: Vec<usize>,
    sensors: Vec<BTreeSet<SensorId>>,
}

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Joins the sets of `a` and `b` unless they share a sensor.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb || !self.sensors[ra].is_disjoint(&self.sensors[rb]) {
            return false;
        }
        let (keep, drop) = (ra.min(rb), ra.max(rb));
        let moved = std::mem::take(&mut self.sensors[drop]);
        self.sensors[keep].extend(moved);
        self.parent[drop] = keep;
        true
    }
}

/// Groups confirmed local objects into clusters. Every sensor pair is solved
/// as a gated optimal assignment; accepted pairs are chained in order of
/// increasing distance as long as no cluster receives two tracks of one
/// sensor.
pub fn cluster(objects: &LocalObjectList, gate: f64) -> Vec<TrackCluster> {
    let flat: Vec<&LocalObject> = objects.iter().filter(|o| o.status.confirmed).collect();
    let mut by_sensor: BTreeMap<SensorId, Vec<usize>> = BTreeMap::new();
    for (i, o) in flat.iter().enumerate() {
        by_sensor.entry(o.sensor_id).or_default().push(i);
    }
    let sensors: Vec<SensorId> = by_sensor.keys().copied().collect();
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for (si, sa) in sensors.iter().enumerate() {
        for sb in &sensors[si + 1..] {
            let (ia, ib) = (&by_sensor[sa], &by_sensor[sb]);
            let costs: Vec<Vec<f64>> = ia
                .iter()
                .map(|&a| ib.iter().map(|&b| t2t_distance(flat[a], flat[b])).collect())
                .collect();
            for (r, c) in assign(&costs, gate) {
                edges.push((costs[r][c], ia[r], ib[c]));
            }
        }
    }
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut uf = UnionFind {
        parent: (0..flat.len()).collect(),
        sensors: flat.iter().map(|o| BTreeSet::from([o.sensor_id])).collect(),
    };
    for &(_, a, b) in &edges {
        uf.union(a, b);
    }
    let mut groups: BTreeMap<usize, TrackCluster> = BTreeMap::new();
    for (i, o) in flat.iter().enumerate() {
        let root = uf.find(i);
        groups
            .entry(root)
            .or_insert_with(|| TrackCluster {
                members: BTreeMap::new(),
            })
            .members
            .insert(o.sensor_id, (*o).clone());
    }
    groups.into_values().collect()
}

/// Fused kinematics, extent and status of one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Merged {
    pub state: StateVector,
    pub covariance: Matrix6<f64>,
    pub dims: Dimensions,
    pub status: TrackStatus,
}

/// Information-weighted state fusion; extents by element-wise maximum and
/// circular mean heading.
pub fn merge(cluster: &TrackCluster) -> Merged {
    let members: Vec<&LocalObject> = cluster.members.values().collect();
    assert!(!members.is_empty(), "merge of an empty cluster");
    if members.len() == 1 {
        let m = members[0];
        return Merged {
            state: m.state,
            covariance: m.covariance,
            dims: m.dims,
            status: m.status,
        };
    }
    let mut info = Matrix6::zeros();
    let mut info_state = Vector6::zeros();
    let mut ok = true;
    for m in &members {
        match m.covariance.try_inverse() {
            Some(inv) => {
                info += inv;
                info_state += inv * m.state.as_vector();
            }
            None => ok = false,
        }
    }
    let fused_inv = if ok { info.try_inverse() } else { None };
    let (state, covariance) = match fused_inv {
        Some(p) => {
            let p = (p + p.transpose()) * 0.5;
            (p * info_state, p)
        }
        None => {
            let n = members.len() as f64;
            let mean = members
                .iter()
                .map(|m| m.state.as_vector())
                .sum::<Vector6<f64>>()
                / n;
            let cov = members.iter().map(|m| m.covariance).sum::<Matrix6<f64>>() / (n * n);
            (mean, cov)
        }
    };
    let (sin, cos) = members.iter().fold((0.0, 0.0), |(s, c), m| {
        (s + m.dims.heading.sin(), c + m.dims.heading.cos())
    });
    let fold_max =
        |f: fn(&Dimensions) -> f64| members.iter().map(|m| f(&m.dims)).fold(0.0, f64::max);
    let dims = Dimensions {
        length: fold_max(|d| d.length),
        width: fold_max(|d| d.width),
        height: fold_max(|d| d.height),
        heading: normalize_angle(sin.atan2(cos)),
    };
    let status = TrackStatus {
        score: members
            .iter()
            .map(|m| m.status.score)
            .fold(f64::NEG_INFINITY, f64::max),
        confirmed: members.iter().any(|m| m.status.confirmed),
        coasting: members.iter().all(|m| m.status.coasting),
    };
    Merged {
        state: StateVector::from_vector(&state),
        covariance,
        dims,
        status,
    }
}

/// Persistent state of the fusion centre across steps.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FusionState {
    pub previous: Vec<SystemObject>,
    pub next_id: u64,
    /// Post-correction existence mass of the last frame, by global id.
    pub history: BTreeMap<u64, f64>,
    pub last_timestamp: Option<f64>,
}

impl FusionState {
    pub fn new() -> Self {
        Self {
            next_id: 1,
            ..Self::default()
        }
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id.max(1);
        self.next_id = id + 1;
        id
    }
}

/// Assigns persistent ids to `current` by gated optimal assignment against
/// the previous frame predicted to the current time, and smooths dimensions
/// of re-identified objects. Returns the objects and, for each, the index of
/// its predecessor in `state.previous`.
pub fn associate_frames(
    mut current: Vec<SystemObject>,
    state: &mut FusionState,
    timestamp: f64,
) -> (Vec<SystemObject>, Vec<Option<usize>>) {
    let dt = state.last_timestamp.map_or(0.0, |t| timestamp - t);
    let predicted: Vec<nalgebra::Point3<f64>> = state
        .previous
        .iter()
        .map(|p| p.state.position() + p.state.velocity() * dt)
        .collect();
    let costs: Vec<Vec<f64>> = current
        .iter()
        .map(|c| {
            predicted
                .iter()
                .map(|p| (c.state.position() - p).norm())
                .collect()
        })
        .collect();
    let pairs = assign(&costs, FRAME_GATE);
    let mut predecessor = vec![None; current.len()];
    for (ci, pi) in pairs {
        predecessor[ci] = Some(pi);
    }
    for (obj, pred) in current.iter_mut().zip(&predecessor) {
        match pred {
            Some(pi) => {
                let prev = &state.previous[*pi];
                obj.global_id = prev.global_id;
                let blend = |new: f64, old: f64| EMA_WEIGHT * new + (1.0 - EMA_WEIGHT) * old;
                obj.dims.length = blend(obj.dims.length, prev.dims.length);
                obj.dims.width = blend(obj.dims.width, prev.dims.width);
                obj.dims.height = blend(obj.dims.height, prev.dims.height);
            }
            None => obj.global_id = state.fresh_id(),
        }
    }
    (current, predecessor)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    Regular,
    Unexpected,
    Miss,
    CoastingMiss,
}

/// One sensor's registered contribution at a location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerEvent {
    pub sensor: SensorId,
    pub kind: EventKind,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SensorCounts {
    pub regular: u64,
    pub unexpected: u64,
    /// Plain misses plus coasting misses.
    pub misses: u64,
    /// Reported (confirmed) tracks; regular + unexpected.
    pub observations: u64,
}

impl SensorCounts {
    pub fn add(&mut self, kind: EventKind) {
        match kind {
            EventKind::Regular => {
                self.regular += 1;
                self.observations += 1;
            }
            EventKind::Unexpected => {
                self.unexpected += 1;
                self.observations += 1;
            }
            EventKind::Miss => self.misses += 1,
            EventKind::CoastingMiss => {
                self.regular += 1;
                self.observations += 1;
                self.misses += 1;
            }
        }
    }
}

/// Per-step record of miss and unexpected registrations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ObservationLedger {
    pub events: Vec<LedgerEvent>,
    pub diagnostics: Vec<String>,
}

impl ObservationLedger {
    pub fn counts(&self) -> BTreeMap<SensorId, SensorCounts> {
        let mut out: BTreeMap<SensorId, SensorCounts> = BTreeMap::new();
        for e in &self.events {
            out.entry(e.sensor).or_default().add(e.kind);
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty() && self.diagnostics.is_empty()
    }
}

/// Static inputs of the fusion centre.
#[derive(Debug, Clone)]
pub struct FusionContext {
    pub sensors: BTreeMap<SensorId, SensorMeta>,
    pub calibration: BTreeMap<SensorId, SigmoidCalib>,
    pub map: DigitalMap,
    pub limits: ValueLimits,
    pub t2t_gate: f64,
}

impl FusionContext {
    /// `sensors` carries the poses and parameters the fusion centre believes
    /// in, which need not match the physical ones.
    pub fn new(
        sensors: &[SensorMeta],
        map: DigitalMap,
        limits: ValueLimits,
    ) -> Result<Self, PlausibilityError> {
        if !map.has_road() {
            return Err(ModelError::NoRoadCells.into());
        }
        limits.validate()?;
        let mut by_id = BTreeMap::new();
        let mut calibration = BTreeMap::new();
        for s in sensors {
            s.validate()?;
            calibration.insert(
                s.id,
                calibrate_sigmoid(s.initial_score(), s.confirmation_threshold)?,
            );
            by_id.insert(s.id, s.clone());
        }
        Ok(Self {
            sensors: by_id,
            calibration,
            map,
            limits,
            t2t_gate: T2T_GATE_CHI2_6DOF_99,
        })
    }
}

fn estimate_object(merged: &Merged, timestamp: f64) -> LocalObject {
    LocalObject {
        sensor_id: SensorId(u32::MAX),
        track_id: u64::MAX,
        timestamp,
        state: merged.state,
        covariance: merged.covariance,
        dims: merged.dims,
        status: merged.status,
    }
}

// combined (pre-correction) mass of one cluster plus its ledger events
fn cluster_mass(
    cl: &TrackCluster,
    estimate: &LocalObject,
    own: &BTreeMap<SensorId, Vec<LocalObject>>,
    ctx: &FusionContext,
    events: &mut Vec<LedgerEvent>,
) -> Result<BeliefMass, PlausibilityError> {
    let empty = Vec::new();
    let mut fused = BeliefMass::VACUOUS;
    for (id, sensor) in &ctx.sensors {
        let own_objects = own.get(id).unwrap_or(&empty);
        let member = cl.members.get(id);
        let class = classify_contribution(member, sensor, own_objects, estimate);
        let at = member.unwrap_or(estimate);
        let kind = match class {
            Contribution::Regular => Some(EventKind::Regular),
            Contribution::Unexpected => Some(EventKind::Unexpected),
            Contribution::Miss => Some(EventKind::Miss),
            Contribution::CoastingMiss => Some(EventKind::CoastingMiss),
            Contribution::Irrelevant => None,
        };
        if let Some(kind) = kind {
            events.push(LedgerEvent {
                sensor: *id,
                kind,
                x: at.state.x,
                y: at.state.y,
            });
        }
        let mass = match (class, member) {
            (Contribution::Regular | Contribution::CoastingMiss, Some(obj)) => {
                let factors = BbaFactors {
                    p_trust: sensor.trust,
                    p_fov: p_fov_factor(obj, sensor),
                    p_occ: p_occ_factor(obj, own_objects, sensor),
                    p_ex: p_ex_factor(obj, &ctx.calibration[id]),
                    p_dm: p_dm_factor(obj, &ctx.map, &ctx.limits)?,
                    p_val: p_val_factor(obj, &ctx.limits),
                };
                compute_bba(&factors)?
            }
            (Contribution::Miss, _) => miss_mass(sensor.trust),
            _ => BeliefMass::VACUOUS,
        };
        fused = ds_combine(&fused, &mass)?;
    }
    Ok(fused)
}

/// Runs one fusion step over synchronous local objects.
pub fn fuse_step(
    objects: &LocalObjectList,
    ctx: &FusionContext,
    state: &mut FusionState,
) -> (Vec<SystemObject>, ObservationLedger) {
    let timestamp = objects.timestamp;
    let mut ledger = ObservationLedger::default();
    let own: BTreeMap<SensorId, Vec<LocalObject>> = objects
        .per_sensor
        .iter()
        .map(|(id, objs)| {
            (
                *id,
                objs.iter()
                    .filter(|o| o.status.confirmed)
                    .cloned()
                    .collect(),
            )
        })
        .collect();
    let clusters = cluster(objects, ctx.t2t_gate);
    let mut fused = Vec::with_capacity(clusters.len());
    for cl in &clusters {
        let merged = merge(cl);
        let estimate = estimate_object(&merged, timestamp);
        let mut events = Vec::new();
        match cluster_mass(cl, &estimate, &own, ctx, &mut events) {
            Ok(mass) => {
                ledger.events.extend(events);
                let (p_exists, s_exists) = pignistic(&mass);
                fused.push(SystemObject {
                    global_id: 0,
                    timestamp,
                    state: merged.state,
                    covariance: merged.covariance,
                    dims: merged.dims,
                    status: merged.status,
                    p_exists,
                    s_exists,
                    mass,
                    contributors: cl.sensors(),
                });
            }
            Err(e) => {
                let members: Vec<String> = cl
                    .members
                    .values()
                    .map(|m| format!("{}:{}", m.sensor_id, m.track_id))
                    .collect();
                ledger
                    .diagnostics
                    .push(format!("cluster [{}] dropped: {e}", members.join(", ")));
            }
        }
    }
    let (mut fused, predecessor) = associate_frames(fused, state, timestamp);
    let mut history = BTreeMap::new();
    for (obj, pred) in fused.iter_mut().zip(&predecessor) {
        let mut deltas = Vec::with_capacity(2);
        if let Some(prev_exists) = state.history.get(&obj.global_id) {
            deltas.push(history_correction(
                &obj.mass,
                *prev_exists,
                obj.status.coasting,
            ));
        }
        deltas.push(dim_vel_correction(
            &obj.mass,
            &obj.dims,
            obj.state.speed(),
            &ctx.limits,
        ));
        obj.mass = apply_corrections(&obj.mass, &deltas);
        history.insert(obj.global_id, obj.mass.exists);
        let (p, s) = pignistic(&obj.mass);
        match pred {
            Some(pi) => {
                let prev = &state.previous[*pi];
                obj.p_exists = EMA_WEIGHT * p + (1.0 - EMA_WEIGHT) * prev.p_exists;
                obj.s_exists = EMA_WEIGHT * s + (1.0 - EMA_WEIGHT) * prev.s_exists;
            }
            None => {
                obj.p_exists = p;
                obj.s_exists = s;
            }
        }
    }
    fused.sort_by_key(|o| o.global_id);
    state.history = history;
    state.previous = fused.clone();
    state.last_timestamp = Some(timestamp);
    (fused, ledger)
}
