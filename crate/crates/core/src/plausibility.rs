//! Belief calculus over `{exists, not-exists, unknown}`: single-sensor
//! plausibility factors, Dempster's rule, contribution classes, model-based
//! corrections and the pignistic transform.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, PlausibilityError};
use crate::model::{
    fov_distance, in_fov, line_of_sight, BeliefMass, DigitalMap, Dimensions, LocalObject,
    SensorMeta, StateVector,
};

/// Per-observation plausibility factors, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BbaFactors {
    pub p_trust: f64,
    pub p_fov: f64,
    pub p_occ: f64,
    pub p_ex: f64,
    pub p_dm: f64,
    pub p_val: f64,
}

impl BbaFactors {
    pub fn validate(&self) -> Result<(), PlausibilityError> {
        let named = [
            ("p_trust", self.p_trust),
            ("p_fov", self.p_fov),
            ("p_occ", self.p_occ),
            ("p_ex", self.p_ex),
            ("p_dm", self.p_dm),
            ("p_val", self.p_val),
        ];
        for (name, value) in named {
            if !(0.0..=1.0).contains(&value) {
                return Err(PlausibilityError::FactorOutOfRange { name, value });
            }
        }
        Ok(())
    }
}

/// Coefficients of `p_ex = 1 / (1 + exp(-alpha * score + beta))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidCalib {
    pub alpha: f64,
    pub beta: f64,
}

impl SigmoidCalib {
    pub fn p_ex(&self, score: f64) -> f64 {
        1.0 / (1.0 + (-self.alpha * score + self.beta).exp())
    }
}

/// Existence at initiation and at the confirmation threshold.
pub const P_EX_INITIAL: f64 = 0.9;
pub const P_EX_CONFIRMED: f64 = 0.99;

/// Solves for the sigmoid passing through `(s0, 0.9)` and `(lambda, 0.99)`.
pub fn calibrate_sigmoid(s0: f64, lambda: f64) -> Result<SigmoidCalib, PlausibilityError> {
    if !(lambda > s0) || !s0.is_finite() || !lambda.is_finite() {
        return Err(PlausibilityError::Calibration {
            initial: s0,
            threshold: lambda,
        });
    }
    let logit = |p: f64| (p / (1.0 - p)).ln();
    let alpha = (logit(P_EX_CONFIRMED) - logit(P_EX_INITIAL)) / (lambda - s0);
    let beta = alpha * s0 - logit(P_EX_INITIAL);
    Ok(SigmoidCalib { alpha, beta })
}

/// Physical value limits and vulnerable-road-user thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueLimits {
    pub z_max: f64,
    pub width_max: f64,
    pub length_max: f64,
    pub height_max: f64,
    pub speed_max: f64,
    pub vru_length: f64,
    pub vru_speed: f64,
    pub lane_width: f64,
}

impl Default for ValueLimits {
    fn default() -> Self {
        Self {
            z_max: 3.0,
            width_max: 5.0,
            length_max: 25.0,
            height_max: 5.0,
            speed_max: 80.0,
            vru_length: 2.0,
            vru_speed: 20.0,
            lane_width: 3.5,
        }
    }
}

impl ValueLimits {
    pub fn validate(&self) -> Result<(), PlausibilityError> {
        let all = [
            ("z_max", self.z_max),
            ("width_max", self.width_max),
            ("length_max", self.length_max),
            ("height_max", self.height_max),
            ("speed_max", self.speed_max),
            ("vru_length", self.vru_length),
            ("vru_speed", self.vru_speed),
            ("lane_width", self.lane_width),
        ];
        for (name, value) in all {
            if !(value > 0.0 && value.is_finite()) {
                return Err(PlausibilityError::FactorOutOfRange { name, value });
            }
        }
        Ok(())
    }
}

/// 1 if any check point is inside the field of view, otherwise an
/// exponential decay in the normalized excess of the object centre.
pub fn p_fov_factor(obj: &LocalObject, sensor: &SensorMeta) -> f64 {
    if in_fov(&obj.check_points(), sensor) {
        return 1.0;
    }
    p_fov_outside(&obj.state, sensor)
}

fn p_fov_outside(state: &StateVector, sensor: &SensorMeta) -> f64 {
    let d = fov_distance(state, sensor);
    let fov = &sensor.fov;
    let mut sum = d.range / (fov.range / 2.0) + d.elevation / (fov.vertical / 2.0);
    if !fov.covers_full_azimuth() {
        sum += d.azimuth / (fov.horizontal / 2.0);
    }
    (-sum).exp()
}

/// 0 when the object is fully hidden behind `siblings` and not coasting.
pub fn p_occ_factor(obj: &LocalObject, siblings: &[LocalObject], sensor: &SensorMeta) -> f64 {
    if obj.status.coasting || line_of_sight(obj, siblings, sensor) {
        1.0
    } else {
        0.0
    }
}

pub fn p_ex_factor(obj: &LocalObject, calib: &SigmoidCalib) -> f64 {
    calib.p_ex(obj.status.score)
}

pub fn p_dm_factor(
    obj: &LocalObject,
    map: &DigitalMap,
    limits: &ValueLimits,
) -> Result<f64, ModelError> {
    Ok((-map.map_distance(&obj.state)? / limits.lane_width).exp())
}

pub fn p_val_factor(obj: &LocalObject, limits: &ValueLimits) -> f64 {
    let excess = |a: f64, max: f64| (a - max).max(0.0) / max;
    let sum = excess(obj.state.z.abs(), limits.z_max)
        + excess(obj.dims.width, limits.width_max)
        + excess(obj.dims.length, limits.length_max)
        + excess(obj.dims.height, limits.height_max)
        + excess(obj.state.speed(), limits.speed_max);
    (-sum).exp()
}

/// Basic belief assignment of one observation.
pub fn compute_bba(f: &BbaFactors) -> Result<BeliefMass, PlausibilityError> {
    f.validate()?;
    let observed = f.p_trust * f.p_fov * f.p_occ;
    if observed == 0.0 {
        return Ok(BeliefMass::VACUOUS);
    }
    let credible = f.p_ex * f.p_dm * f.p_val;
    let exists = observed * credible;
    let not_exists = observed * (1.0 - credible);
    Ok(BeliefMass::from_exists_not_exists(exists, not_exists)?)
}

/// Mass assigned to a sensor that should have seen the object but did not.
pub fn miss_mass(trust: f64) -> BeliefMass {
    BeliefMass {
        exists: 0.0,
        not_exists: trust,
        unknown: 1.0 - trust,
    }
}

/// Dempster's rule of combination. Cross terms are grouped so that swapping
/// the operands is bit-exact, and dividing by `1 - K` keeps the vacuous
/// mass an exact identity.
pub fn ds_combine(a: &BeliefMass, b: &BeliefMass) -> Result<BeliefMass, PlausibilityError> {
    let conflict = a.exists * b.not_exists + a.not_exists * b.exists;
    let norm = 1.0 - conflict;
    if norm <= 1e-15 {
        return Err(PlausibilityError::TotalConflict);
    }
    let exists = a.exists * b.exists + (a.exists * b.unknown + a.unknown * b.exists);
    let not_exists =
        a.not_exists * b.not_exists + (a.not_exists * b.unknown + a.unknown * b.not_exists);
    let unknown = a.unknown * b.unknown;
    Ok(BeliefMass {
        exists: exists / norm,
        not_exists: not_exists / norm,
        unknown: unknown / norm,
    })
}

/// Role of one sensor with respect to one track cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Contribution {
    Regular,
    /// Reported, but outside the sensor's clear field of view while updated.
    Unexpected,
    /// Not reported although in the sensor's clear field of view.
    Miss,
    /// Reported only through a coasting track while in the clear field of view;
    /// counted as a miss, mass unchanged.
    CoastingMiss,
    Irrelevant,
}

/// Whether a hypothetical object is visible to `sensor` past its own objects.
pub fn in_clear_fov(
    estimate: &LocalObject,
    own_objects: &[LocalObject],
    sensor: &SensorMeta,
) -> bool {
    in_fov(&estimate.check_points(), sensor) && line_of_sight(estimate, own_objects, sensor)
}

/// Classifies `sensor` for a cluster. `report` is the sensor's member of the
/// cluster, `own_objects` all of its confirmed objects (used as occluders) and
/// `estimate` the merged cluster for sensors without a member.
pub fn classify_contribution(
    report: Option<&LocalObject>,
    sensor: &SensorMeta,
    own_objects: &[LocalObject],
    estimate: &LocalObject,
) -> Contribution {
    match report {
        Some(obj) => {
            let visible = in_clear_fov(obj, own_objects, sensor);
            match (obj.status.coasting, visible) {
                (false, false) => Contribution::Unexpected,
                (true, true) => Contribution::CoastingMiss,
                _ => Contribution::Regular,
            }
        }
        None => {
            if in_clear_fov(estimate, own_objects, sensor) {
                Contribution::Miss
            } else {
                Contribution::Irrelevant
            }
        }
    }
}

/// Additive change to a belief mass; components sum to zero for the built-in
/// corrections.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MassDelta {
    pub exists: f64,
    pub not_exists: f64,
    pub unknown: f64,
}

impl MassDelta {
    pub const ZERO: MassDelta = MassDelta {
        exists: 0.0,
        not_exists: 0.0,
        unknown: 0.0,
    };
}

/// Rising existence belief on a coasting object is moved to ignorance.
pub fn history_correction(m_now: &BeliefMass, m_prev_exists: f64, coasting: bool) -> MassDelta {
    if !coasting {
        return MassDelta::ZERO;
    }
    let rise = (m_now.exists - m_prev_exists).max(0.0);
    MassDelta {
        exists: -rise,
        not_exists: 0.0,
        unknown: rise,
    }
}

/// Small and fast objects lose their existence belief to ignorance.
pub fn dim_vel_correction(
    m: &BeliefMass,
    dims: &Dimensions,
    speed: f64,
    limits: &ValueLimits,
) -> MassDelta {
    let small = dims.width < limits.vru_length && dims.length < limits.vru_length;
    if small && speed > limits.vru_speed {
        MassDelta {
            exists: -m.exists,
            not_exists: 0.0,
            unknown: m.exists,
        }
    } else {
        MassDelta::ZERO
    }
}

/// Sums all deltas into `m`, then shifts and renormalizes into a valid mass.
pub fn apply_corrections(m: &BeliefMass, deltas: &[MassDelta]) -> BeliefMass {
    if deltas.iter().all(|d| *d == MassDelta::ZERO) {
        return *m;
    }
    let mut v = m.as_array();
    for d in deltas {
        v[0] += d.exists;
        v[1] += d.not_exists;
        v[2] += d.unknown;
    }
    let shift = (-v.iter().cloned().fold(f64::INFINITY, f64::min)).max(0.0);
    for c in &mut v {
        *c += shift;
    }
    let total: f64 = v.iter().sum();
    if !(total > 0.0) {
        return BeliefMass::VACUOUS;
    }
    BeliefMass {
        exists: v[0] / total,
        not_exists: v[1] / total,
        unknown: v[2] / total,
    }
}

/// `(p_exists, s_exists)`: existence probability and its uncertainty.
pub fn pignistic(m: &BeliefMass) -> (f64, f64) {
    (m.exists + m.unknown / 2.0, m.unknown / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FieldOfView, SensorId, TrackStatus};
    use nalgebra::{Matrix6, Point3};
    use proptest::prelude::*;

    fn sensor() -> SensorMeta {
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
            detection_probability: 0.9,
            false_alarm_rate: 1e-6,
            confirmation_threshold: 20.0,
            deletion_threshold: 0.0,
            over_range: None,
            noise_std: 0.5,
        }
    }

    fn object(x: f64, y: f64, coasting: bool) -> LocalObject {
        LocalObject {
            sensor_id: SensorId(1),
            track_id: 1,
            timestamp: 0.0,
            state: StateVector::new(x, y, 0.0, 0.0, 0.0, 0.0),
            covariance: Matrix6::identity(),
            dims: Dimensions {
                length: 0.2,
                width: 0.2,
                height: 0.2,
                heading: 0.0,
            },
            status: TrackStatus {
                score: 20.0,
                confirmed: true,
                coasting,
            },
        }
    }

    fn mass(e: f64, n: f64) -> BeliefMass {
        BeliefMass::from_exists_not_exists(e, n).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn fov_factor_inside_and_beyond_range() {
        let s = sensor();
        assert_eq!(p_fov_factor(&object(30.0, 0.0, false), &s), 1.0);
        let p = p_fov_factor(&object(135.0, 0.0, false), &s);
        assert!(close(p, (-1.0f64).exp(), 1e-3), "p = {p}");
        assert!(p_fov_factor(&object(95.0, 0.0, true), &s) > 0.0);
    }

    #[test]
    fn fov_factor_skips_azimuth_for_full_circle() {
        let mut s = sensor();
        s.fov.horizontal = 2.0 * std::f64::consts::PI;
        s.fov.vertical = 170f64.to_radians();
        let p = p_fov_factor(&object(-135.0, 0.0, false), &s);
        assert!(close(p, (-1.0f64).exp(), 1e-3), "p = {p}");
    }

    #[test]
    fn occlusion_factor_cases() {
        let s = sensor();
        let mut blocker = object(20.0, 0.0, false);
        blocker.track_id = 2;
        blocker.dims = Dimensions {
            length: 2.0,
            width: 6.0,
            height: 6.0,
            heading: 0.0,
        };
        let hidden = object(40.0, 0.0, false);
        let hidden_coasting = object(40.0, 0.0, true);
        assert_eq!(p_occ_factor(&hidden, &[blocker.clone()], &s), 0.0);
        assert_eq!(p_occ_factor(&hidden_coasting, &[blocker], &s), 1.0);
        assert_eq!(p_occ_factor(&hidden, &[], &s), 1.0);
    }

    #[test]
    fn sigmoid_calibration_hits_anchor_points() {
        let s0 = (0.9f64 / 1e-6).ln();
        let lambda = 1.5 * s0;
        let c = calibrate_sigmoid(s0, lambda).unwrap();
        assert!(close(c.p_ex(s0), 0.9, 1e-9));
        assert!(close(c.p_ex(lambda), 0.99, 1e-9));
        assert!(close(
            c.alpha,
            (99f64.ln() - 9f64.ln()) / (lambda - s0),
            1e-12
        ));
        assert!(c.p_ex(s0 + 1.0) > c.p_ex(s0));
        assert!(calibrate_sigmoid(5.0, 5.0).is_err());
    }

    #[test]
    fn map_factor_off_road() {
        let map = DigitalMap::from_fn((0.0, 0.0), 0.05, 400, 400, |_, y| y < 5.0).unwrap();
        let limits = ValueLimits::default();
        assert_eq!(
            p_dm_factor(&object(10.0, 2.0, false), &map, &limits).unwrap(),
            1.0
        );
        let p = p_dm_factor(&object(10.0, 8.5, false), &map, &limits).unwrap();
        assert!(close(p, (-1.0f64).exp(), 0.02), "p = {p}");
        let p = p_dm_factor(&object(10.0, 12.0, false), &map, &limits).unwrap();
        assert!(close(p, (-2.0f64).exp(), 0.01), "p = {p}");
    }

    #[test]
    fn value_factor_penalties() {
        let limits = ValueLimits::default();
        let mut o = object(10.0, 0.0, false);
        assert_eq!(p_val_factor(&o, &limits), 1.0);
        o.state.vx = 120.0;
        assert!(close(p_val_factor(&o, &limits), (-0.5f64).exp(), 1e-12));
        o.state.vx = 160.0;
        o.dims.length = 50.0;
        assert!(close(p_val_factor(&o, &limits), (-2.0f64).exp(), 1e-12));
    }

    #[test]
    fn bba_examples() {
        let f = BbaFactors {
            p_trust: 0.9,
            p_fov: 1.0,
            p_occ: 1.0,
            p_ex: 0.99,
            p_dm: 1.0,
            p_val: 1.0,
        };
        let m = compute_bba(&f).unwrap();
        assert!(close(m.exists, 0.891, 1e-12));
        assert!(close(m.not_exists, 0.009, 1e-12));
        assert!(close(m.unknown, 0.100, 1e-12));

        let miss = compute_bba(&BbaFactors { p_ex: 0.0, ..f }).unwrap();
        assert_eq!(miss.exists, 0.0);
        assert!(close(miss.not_exists, 0.9, 1e-12));
        assert!(close(miss.unknown, 0.1, 1e-12));
        assert_eq!(miss_mass(0.9).exists, 0.0);

        assert!(compute_bba(&BbaFactors { p_fov: 0.0, ..f })
            .unwrap()
            .is_vacuous());
        assert!(compute_bba(&BbaFactors { p_occ: 0.0, ..f })
            .unwrap()
            .is_vacuous());
        assert!(compute_bba(&BbaFactors { p_dm: 1.5, ..f }).is_err());
    }

    /// Product-space oracle over focal sets encoded as bitmasks.
    fn oracle_combine(a: &BeliefMass, b: &BeliefMass) -> Option<[f64; 3]> {
        let sets = [0b01u8, 0b10, 0b11];
        let (ma, mb) = (a.as_array(), b.as_array());
        let mut out = [0.0; 3];
        let mut empty = 0.0;
        for (i, sa) in sets.iter().enumerate() {
            for (j, sb) in sets.iter().enumerate() {
                let w = ma[i] * mb[j];
                match sa & sb {
                    0 => empty += w,
                    s => out[sets.iter().position(|x| *x == s).unwrap()] += w,
                }
            }
        }
        if empty >= 1.0 - 1e-15 {
            return None;
        }
        Some(out.map(|x| x / (1.0 - empty)))
    }

    #[test]
    fn combine_examples() {
        let m = ds_combine(&mass(0.8, 0.1), &mass(0.6, 0.2)).unwrap();
        assert!(close(m.exists, 0.8974, 1e-4));
        assert!(close(m.not_exists, 0.0769, 1e-4));
        assert!(close(m.unknown, 0.0256, 1e-4));
        let a = mass(0.3, 0.5);
        assert_eq!(
            ds_combine(&a, &BeliefMass::VACUOUS).unwrap().as_array(),
            a.as_array()
        );
        assert_eq!(
            ds_combine(&mass(1.0, 0.0), &mass(0.0, 1.0)),
            Err(PlausibilityError::TotalConflict)
        );
    }

    fn arb_mass() -> impl Strategy<Value = BeliefMass> {
        (0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b)| {
            let e = a;
            let n = (1.0 - a) * b;
            mass(e, n)
        })
    }

    proptest! {
        #[test]
        fn combine_matches_oracle_and_commutes(a in arb_mass(), b in arb_mass()) {
            let ab = ds_combine(&a, &b);
            match oracle_combine(&a, &b) {
                None => prop_assert!(ab.is_err()),
                Some(o) => {
                    let ab = ab.unwrap();
                    prop_assert!(ab.is_valid());
                    for k in 0..3 {
                        prop_assert!((ab.as_array()[k] - o[k]).abs() < 1e-9);
                    }
                    let ba = ds_combine(&b, &a).unwrap();
                    for k in 0..3 {
                        prop_assert!((ab.as_array()[k] - ba.as_array()[k]).abs() < 1e-12);
                    }
                }
            }
        }

        #[test]
        fn combine_associative_without_conflict(
            e in proptest::collection::vec(0.0f64..1.0, 3),
        ) {
            // supports all on exists: no conflict anywhere
            let ms: Vec<BeliefMass> = e.iter().map(|&x| mass(x, 0.0)).collect();
            let left = ds_combine(&ds_combine(&ms[0], &ms[1]).unwrap(), &ms[2]).unwrap();
            let right = ds_combine(&ms[0], &ds_combine(&ms[1], &ms[2]).unwrap()).unwrap();
            for k in 0..3 {
                prop_assert!((left.as_array()[k] - right.as_array()[k]).abs() < 1e-12);
            }
        }

        #[test]
        fn corrections_keep_mass_valid(
            m in arb_mass(),
            prev in 0.0f64..1.0,
            coasting in any::<bool>(),
            w in 0.1f64..4.0,
            l in 0.1f64..4.0,
            v in 0.0f64..40.0,
            extra in proptest::collection::vec(-1.0f64..1.0, 3),
        ) {
            let limits = ValueLimits::default();
            let dims = Dimensions { length: l, width: w, height: 1.0, heading: 0.0 };
            let h = history_correction(&m, prev, coasting);
            let d = dim_vel_correction(&m, &dims, v, &limits);
            for delta in [h, d] {
                prop_assert!(delta.exists <= 0.0);
                prop_assert!((delta.exists + delta.not_exists + delta.unknown).abs() < 1e-15);
            }
            let out = apply_corrections(&m, &[h, d]);
            prop_assert!(out.is_valid());
            prop_assert!(out.exists <= m.exists + 1e-12);
            let arbitrary = MassDelta { exists: extra[0], not_exists: extra[1], unknown: extra[2] };
            prop_assert!(apply_corrections(&m, &[arbitrary]).is_valid());
        }

        #[test]
        fn pignistic_bounds(m in arb_mass()) {
            let (p, s) = pignistic(&m);
            prop_assert!((0.0..=1.0).contains(&(p + s)));
            prop_assert!((0.0..=1.0).contains(&(p - s)));
            prop_assert_eq!(s == 0.0, m.unknown == 0.0);
        }
    }

    #[test]
    fn correction_examples() {
        let m = mass(0.8, 0.1);
        let h = history_correction(&m, 0.7, true);
        assert!(close(h.exists, -0.1, 1e-12) && close(h.unknown, 0.1, 1e-12));
        assert_eq!(history_correction(&m, 0.7, false), MassDelta::ZERO);
        assert_eq!(history_correction(&m, 0.9, true), MassDelta::ZERO);

        let limits = ValueLimits::default();
        let vru = Dimensions {
            length: 1.8,
            width: 0.5,
            height: 1.7,
            heading: 0.0,
        };
        let d = dim_vel_correction(&m, &vru, 25.0, &limits);
        assert_eq!((d.exists, d.unknown), (-0.8, 0.8));
        let wide = Dimensions { width: 2.5, ..vru };
        assert_eq!(
            dim_vel_correction(&m, &wide, 25.0, &limits),
            MassDelta::ZERO
        );
        assert_eq!(dim_vel_correction(&m, &vru, 5.0, &limits), MassDelta::ZERO);

        assert_eq!(apply_corrections(&m, &[MassDelta::ZERO]), m);
        let out = apply_corrections(&m, &[h]);
        assert!(close(out.exists, 0.7, 1e-12));
        assert!(close(out.not_exists, 0.1, 1e-12));
        assert!(close(out.unknown, 0.2, 1e-12));
    }

    #[test]
    fn shift_then_normalize_oracle() {
        let m = mass(0.1, 0.3);
        let delta = MassDelta {
            exists: -0.15,
            not_exists: 0.0,
            unknown: 0.15,
        };
        // reference: (-0.05, 0.3, 0.75) shifted by 0.05 then normalized
        let raw = [-0.05 + 0.05, 0.3 + 0.05, 0.75 + 0.05];
        let total: f64 = raw.iter().sum();
        let out = apply_corrections(&m, &[delta]);
        for k in 0..3 {
            assert!(close(out.as_array()[k], raw[k] / total, 1e-12));
        }
    }

    #[test]
    fn pignistic_examples() {
        assert_eq!(pignistic(&BeliefMass::VACUOUS), (0.5, 0.5));
        assert_eq!(pignistic(&mass(1.0, 0.0)), (1.0, 0.0));
        let (p, s) = pignistic(&mass(0.8, 0.1));
        assert!(close(p, 0.85, 1e-12) && close(s, 0.05, 1e-12));
    }

    #[test]
    fn classification_cases() {
        let s = sensor();
        let estimate = object(30.0, 0.0, false);
        assert_eq!(
            classify_contribution(None, &s, &[], &estimate),
            Contribution::Miss
        );

        let mut blocker = object(15.0, 0.0, false);
        blocker.track_id = 7;
        blocker.dims = Dimensions {
            length: 2.0,
            width: 6.0,
            height: 6.0,
            heading: 0.0,
        };
        assert_eq!(
            classify_contribution(None, &s, &[blocker], &estimate),
            Contribution::Irrelevant
        );
        let far = object(270.0, 0.0, false);
        assert_eq!(
            classify_contribution(Some(&far), &s, std::slice::from_ref(&far), &far),
            Contribution::Unexpected
        );
        let coasting = object(30.0, 0.0, true);
        assert_eq!(
            classify_contribution(
                Some(&coasting),
                &s,
                std::slice::from_ref(&coasting),
                &coasting
            ),
            Contribution::CoastingMiss
        );
        assert_eq!(
            classify_contribution(
                Some(&estimate),
                &s,
                std::slice::from_ref(&estimate),
                &estimate
            ),
            Contribution::Regular
        );
    }
}
