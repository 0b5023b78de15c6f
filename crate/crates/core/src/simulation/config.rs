//! Declarative scenario description (TOML). Angles are given in degrees and
//! lengths in metres; everything is converted to radians on load.

use std::path::Path;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::{FieldOfView, OverRange, SensorId, SensorMeta};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighwaySpec {
    pub lanes: u32,
    pub lane_width: f64,
    /// Vehicles spawn here and leave at `x_end`.
    pub x_start: f64,
    pub x_end: f64,
    pub cell_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionSpec {
    pub lanes_per_direction: u32,
    pub lane_width: f64,
    /// Distance from the junction centre to the end of each leg.
    pub leg_length: f64,
    /// Lateral offset of the sidewalk centre line.
    pub sidewalk_offset: f64,
    pub cell_size: f64,
}

impl IntersectionSpec {
    pub fn half_width(&self) -> f64 {
        self.lanes_per_direction as f64 * self.lane_width
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RoadSpec {
    Highway(HighwaySpec),
    Intersection(IntersectionSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMix {
    pub car: f64,
    pub truck: f64,
    pub bus: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighwayTraffic {
    /// Vehicles per second over all lanes.
    pub arrival_rate: f64,
    pub lane_weights: Vec<f64>,
    /// Free-flow speed per lane (m/s); lane 1 is nearest to `y = 0`.
    pub lane_speeds: Vec<f64>,
    pub class_mix: ClassMix,
    /// Minimum time gap between consecutive arrivals in one lane (s).
    pub min_headway: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntersectionTraffic {
    /// Vehicles per second per approach lane.
    pub vehicle_rate: f64,
    /// Pedestrians per second per sidewalk direction.
    pub pedestrian_rate: f64,
    pub cyclist_rate: f64,
    /// Probabilities of left, straight and right movements.
    pub turn_probabilities: [f64; 3],
    pub class_mix: ClassMix,
    pub approach_speed: f64,
    pub turn_speed: f64,
    pub pedestrian_speed: f64,
    pub cyclist_speed: f64,
    /// Green time per approach in the round-robin signal cycle (s).
    pub green_time: f64,
    /// All-red clearance between phases (s).
    pub clearance_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrafficSpec {
    Highway(HighwayTraffic),
    Intersection(IntersectionTraffic),
}

/// Sensor as installed: nominal metadata plus detector parameters that the
/// fusion centre does not use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub meta: SensorMeta,
    /// Resolution cells over which false alarms are drawn at `false_alarm_rate`.
    pub resolution_cells: f64,
    pub max_coasting: u32,
}

/// Single injected fault.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FaultSpec {
    /// Physical yaw rotated counter-clockwise by `delta` (rad) while the
    /// fusion centre keeps the nominal pose.
    Misorientation { sensor_id: SensorId, delta: f64 },
    /// Tracker confirmation threshold replaced by `threshold`.
    TrackerThreshold { sensor_id: SensorId, threshold: f64 },
    /// No detections within `width / 2` of global azimuth `center` (rad).
    BlindSpot {
        sensor_id: SensorId,
        center: f64,
        width: f64,
    },
}

impl FaultSpec {
    pub fn sensor_id(&self) -> SensorId {
        match self {
            FaultSpec::Misorientation { sensor_id, .. }
            | FaultSpec::TrackerThreshold { sensor_id, .. }
            | FaultSpec::BlindSpot { sensor_id, .. } => *sensor_id,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FaultSpec::Misorientation { .. } => "misorientation",
            FaultSpec::TrackerThreshold { .. } => "tracker_threshold",
            FaultSpec::BlindSpot { .. } => "blind_spot",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BinSpec {
    /// Bins of `size` metres along x.
    Longitudinal { size: f64 },
    /// Square cells of `size` metres.
    Grid { size: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSpec {
    pub interval_steps: usize,
    pub bins: BinSpec,
    /// Sensors left out of the statistics (e.g. chain ends).
    pub exclude_sensors: Vec<SensorId>,
    pub min_intervals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub seed: u64,
    pub sample_period: f64,
    pub duration: f64,
    /// Simulated but unrecorded lead-in for tracker settling (s).
    pub warmup: f64,
    pub road: RoadSpec,
    pub traffic: TrafficSpec,
    pub sensors: Vec<SensorSpec>,
    pub fault: Option<FaultSpec>,
    pub analysis: AnalysisSpec,
    /// Source text the configuration was parsed from.
    pub source: String,
}

// ---------------------------------------------------------------------------
// raw file layout

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    name: Option<String>,
    seed: u64,
    sample_period: f64,
    duration: f64,
    warmup: Option<f64>,
    road: RawRoad,
    #[serde(default)]
    traffic: RawTraffic,
    sensor_defaults: Option<RawSensor>,
    #[serde(default)]
    sensors: Vec<RawSensor>,
    #[serde(default)]
    faults: Vec<RawFault>,
    analysis: Option<RawAnalysis>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRoad {
    kind: String,
    lanes: Option<u32>,
    lanes_per_direction: Option<u32>,
    lane_width: Option<f64>,
    x_start: Option<f64>,
    x_end: Option<f64>,
    leg_length: Option<f64>,
    sidewalk_offset: Option<f64>,
    cell_size: Option<f64>,
}

#[derive(Debug, Deserialize, Clone, Copy)]
#[serde(deny_unknown_fields)]
struct RawClassMix {
    car: f64,
    truck: f64,
    bus: f64,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTraffic {
    arrival_rate: Option<f64>,
    lane_weights: Option<Vec<f64>>,
    lane_speeds: Option<Vec<f64>>,
    class_mix: Option<RawClassMix>,
    min_headway: Option<f64>,
    vehicle_rate: Option<f64>,
    pedestrian_rate: Option<f64>,
    cyclist_rate: Option<f64>,
    turn_probabilities: Option<[f64; 3]>,
    approach_speed: Option<f64>,
    turn_speed: Option<f64>,
    pedestrian_speed: Option<f64>,
    cyclist_speed: Option<f64>,
    green_time: Option<f64>,
    clearance_time: Option<f64>,
}

#[derive(Debug, Deserialize, Clone, Default)]
#[serde(deny_unknown_fields)]
struct RawSensor {
    id: Option<u32>,
    position: Option<[f64; 3]>,
    yaw_deg: Option<f64>,
    pitch_deg: Option<f64>,
    range: Option<f64>,
    horizontal_deg: Option<f64>,
    vertical_deg: Option<f64>,
    detection_probability: Option<f64>,
    false_alarm_rate: Option<f64>,
    resolution_cells: Option<f64>,
    trust: Option<f64>,
    noise_std: Option<f64>,
    /// Confirmation threshold as a multiple of `ln(pd/pfa)`.
    confirmation_factor: Option<f64>,
    deletion_threshold: Option<f64>,
    max_coasting: Option<u32>,
    over_range: Option<f64>,
    over_range_pd_factor: Option<f64>,
}

impl RawSensor {
    fn or(self, d: &RawSensor) -> RawSensor {
        RawSensor {
            id: self.id.or(d.id),
            position: self.position.or(d.position),
            yaw_deg: self.yaw_deg.or(d.yaw_deg),
            pitch_deg: self.pitch_deg.or(d.pitch_deg),
            range: self.range.or(d.range),
            horizontal_deg: self.horizontal_deg.or(d.horizontal_deg),
            vertical_deg: self.vertical_deg.or(d.vertical_deg),
            detection_probability: self.detection_probability.or(d.detection_probability),
            false_alarm_rate: self.false_alarm_rate.or(d.false_alarm_rate),
            resolution_cells: self.resolution_cells.or(d.resolution_cells),
            trust: self.trust.or(d.trust),
            noise_std: self.noise_std.or(d.noise_std),
            confirmation_factor: self.confirmation_factor.or(d.confirmation_factor),
            deletion_threshold: self.deletion_threshold.or(d.deletion_threshold),
            max_coasting: self.max_coasting.or(d.max_coasting),
            over_range: self.over_range.or(d.over_range),
            over_range_pd_factor: self.over_range_pd_factor.or(d.over_range_pd_factor),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFault {
    kind: String,
    sensor: u32,
    delta_deg: Option<f64>,
    /// Faulty threshold as a fraction of the nominal one.
    threshold_factor: Option<f64>,
    center_deg: Option<f64>,
    width_deg: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    interval_steps: Option<usize>,
    bin_size: Option<f64>,
    exclude_sensors: Option<Vec<u32>>,
    min_intervals: Option<usize>,
}

// ---------------------------------------------------------------------------
// source-line lookup for semantic errors

/// Line (1-based) of `key` inside table `table` (`""` for the root), taking
/// the `index`-th occurrence of an array-of-tables header.
fn find_line(text: &str, table: &str, index: usize, key: &str) -> Option<usize> {
    let mut seen: usize = 0;
    let mut in_target = table.is_empty();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            let name = line
                .trim_matches(|c| c == '[' || c == ']')
                .trim()
                .to_string();
            let is_array = line.starts_with("[[");
            in_target = name == table && {
                if is_array {
                    seen += 1;
                    seen == index + 1
                } else {
                    true
                }
            };
            if key.is_empty() && in_target {
                return Some(n + 1);
            }
            continue;
        }
        if in_target {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(n + 1);
                }
            }
        }
    }
    None
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn err(&self, table: &str, index: usize, key: &str, msg: impl Into<String>) -> ConfigError {
        let line = find_line(self.text, table, index, key)
            .or_else(|| find_line(self.text, table, index, ""));
        ConfigError::at(line, msg)
    }

    fn positive(&self, v: f64, table: &str, index: usize, key: &str) -> Result<f64, ConfigError> {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(table, index, key, format!("`{key}` must be > 0 (got {v})")))
        }
    }

    fn non_negative(&self, v: f64, table: &str, key: &str) -> Result<f64, ConfigError> {
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(table, 0, key, format!("`{key}` must be >= 0 (got {v})")))
        }
    }
}

fn class_mix(ctx: &Ctx, raw: Option<RawClassMix>) -> Result<ClassMix, ConfigError> {
    let m = raw.unwrap_or(RawClassMix {
        car: 0.85,
        truck: 0.10,
        bus: 0.05,
    });
    let parts = [m.car, m.truck, m.bus];
    if parts.iter().any(|p| !(*p >= 0.0)) || !(parts.iter().sum::<f64>() > 0.0) {
        return Err(ctx.err(
            "traffic",
            0,
            "class_mix",
            "class mix weights must be >= 0 with a positive sum",
        ));
    }
    let total: f64 = parts.iter().sum();
    Ok(ClassMix {
        car: m.car / total,
        truck: m.truck / total,
        bus: m.bus / total,
    })
}

impl ScenarioConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of_offset(text, s.start));
            ConfigError::at(line, e.message().trim().to_string())
        })?;
        let ctx = Ctx { text };
        if raw.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(ctx.err(
                "",
                0,
                "schema_version",
                format!(
                    "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                    raw.schema_version
                ),
            ));
        }
        let sample_period = ctx.positive(raw.sample_period, "", 0, "sample_period")?;
        let duration = ctx.non_negative(raw.duration, "", "duration")?;
        let warmup = ctx.non_negative(raw.warmup.unwrap_or(5.0), "", "warmup")?;

        let road = Self::road(&ctx, &raw.road)?;
        let traffic = Self::traffic(&ctx, &road, &raw.traffic)?;
        let sensors = Self::sensors(&ctx, raw.sensor_defaults.unwrap_or_default(), raw.sensors)?;
        if sensors.is_empty() {
            return Err(ConfigError::new(
                "at least one [[sensors]] entry is required",
            ));
        }
        let fault = Self::fault(&ctx, &sensors, raw.faults)?;
        let analysis = Self::analysis(&ctx, &road, &sensors, raw.analysis)?;
        let interval = analysis.interval_steps as f64 * sample_period;
        if duration > 0.0 && duration + 1e-9 < interval {
            return Err(ctx.err(
                "",
                0,
                "duration",
                format!(
                    "duration {duration} s is shorter than one analysis interval ({interval} s)"
                ),
            ));
        }
        Ok(Self {
            name: raw.name.unwrap_or_else(|| "scenario".into()),
            seed: raw.seed,
            sample_period,
            duration,
            warmup,
            road,
            traffic,
            sensors,
            fault,
            analysis,
            source: text.to_string(),
        })
    }

    fn road(ctx: &Ctx, r: &RawRoad) -> Result<RoadSpec, ConfigError> {
        let t = "road";
        let cell_size = ctx.positive(r.cell_size.unwrap_or(0.5), t, 0, "cell_size")?;
        let lane_width = ctx.positive(r.lane_width.unwrap_or(3.5), t, 0, "lane_width")?;
        match r.kind.as_str() {
            "highway" => {
                let lanes = r.lanes.unwrap_or(4);
                if lanes == 0 {
                    return Err(ctx.err(t, 0, "lanes", "`lanes` must be >= 1"));
                }
                let x_start = r.x_start.unwrap_or(-200.0);
                let x_end = r.x_end.unwrap_or(450.0);
                if !(x_end > x_start) {
                    return Err(ctx.err(t, 0, "x_end", "`x_end` must exceed `x_start`"));
                }
                Ok(RoadSpec::Highway(HighwaySpec {
                    lanes,
                    lane_width,
                    x_start,
                    x_end,
                    cell_size,
                }))
            }
            "intersection" => {
                let lanes_per_direction = r.lanes_per_direction.unwrap_or(2);
                if lanes_per_direction == 0 {
                    return Err(ctx.err(
                        t,
                        0,
                        "lanes_per_direction",
                        "`lanes_per_direction` must be >= 1",
                    ));
                }
                let spec = IntersectionSpec {
                    lanes_per_direction,
                    lane_width,
                    leg_length: ctx.positive(r.leg_length.unwrap_or(100.0), t, 0, "leg_length")?,
                    sidewalk_offset: r.sidewalk_offset.unwrap_or(8.5),
                    cell_size,
                };
                if spec.sidewalk_offset <= spec.half_width() {
                    return Err(ctx.err(
                        t,
                        0,
                        "sidewalk_offset",
                        "`sidewalk_offset` must lie outside the carriageway",
                    ));
                }
                if spec.leg_length <= spec.sidewalk_offset + 2.0 {
                    return Err(ctx.err(
                        t,
                        0,
                        "leg_length",
                        "`leg_length` too short for the junction",
                    ));
                }
                Ok(RoadSpec::Intersection(spec))
            }
            other => Err(ctx.err(
                t,
                0,
                "kind",
                format!("unknown road kind `{other}` (expected `highway` or `intersection`)"),
            )),
        }
    }

    fn traffic(ctx: &Ctx, road: &RoadSpec, r: &RawTraffic) -> Result<TrafficSpec, ConfigError> {
        let t = "traffic";
        let mix = class_mix(ctx, r.class_mix)?;
        match road {
            RoadSpec::Highway(h) => {
                let n = h.lanes as usize;
                let arrival_rate =
                    ctx.non_negative(r.arrival_rate.unwrap_or(1.6), t, "arrival_rate")?;
                let mut lane_weights = r.lane_weights.clone().unwrap_or_else(|| match n {
                    4 => vec![0.35, 0.3, 0.2, 0.15],
                    _ => vec![1.0; n],
                });
                if lane_weights.len() != n || lane_weights.iter().any(|w| !(*w >= 0.0)) {
                    return Err(ctx.err(
                        t,
                        0,
                        "lane_weights",
                        format!("`lane_weights` needs {n} non-negative entries"),
                    ));
                }
                let total: f64 = lane_weights.iter().sum();
                if !(total > 0.0) {
                    return Err(ctx.err(
                        t,
                        0,
                        "lane_weights",
                        "`lane_weights` must not all be zero",
                    ));
                }
                lane_weights.iter_mut().for_each(|w| *w /= total);
                let lane_speeds = r.lane_speeds.clone().unwrap_or_else(|| match n {
                    4 => vec![24.0, 30.0, 35.0, 40.0],
                    _ => vec![30.0; n],
                });
                if lane_speeds.len() != n || lane_speeds.iter().any(|v| !(*v > 0.0)) {
                    return Err(ctx.err(
                        t,
                        0,
                        "lane_speeds",
                        format!("`lane_speeds` needs {n} positive entries"),
                    ));
                }
                Ok(TrafficSpec::Highway(HighwayTraffic {
                    arrival_rate,
                    lane_weights,
                    lane_speeds,
                    class_mix: mix,
                    min_headway: ctx.non_negative(
                        r.min_headway.unwrap_or(1.5),
                        t,
                        "min_headway",
                    )?,
                }))
            }
            RoadSpec::Intersection(_) => {
                let turn = r.turn_probabilities.unwrap_or([0.25, 0.5, 0.25]);
                if turn.iter().any(|p| !(*p >= 0.0)) || !(turn.iter().sum::<f64>() > 0.0) {
                    return Err(ctx.err(
                        t,
                        0,
                        "turn_probabilities",
                        "turn probabilities must be >= 0 with a positive sum",
                    ));
                }
                let s: f64 = turn.iter().sum();
                Ok(TrafficSpec::Intersection(IntersectionTraffic {
                    vehicle_rate: ctx.non_negative(
                        r.vehicle_rate.unwrap_or(0.05),
                        t,
                        "vehicle_rate",
                    )?,
                    pedestrian_rate: ctx.non_negative(
                        r.pedestrian_rate.unwrap_or(0.02),
                        t,
                        "pedestrian_rate",
                    )?,
                    cyclist_rate: ctx.non_negative(
                        r.cyclist_rate.unwrap_or(0.01),
                        t,
                        "cyclist_rate",
                    )?,
                    turn_probabilities: turn.map(|p| p / s),
                    class_mix: mix,
                    approach_speed: ctx.positive(
                        r.approach_speed.unwrap_or(12.0),
                        t,
                        0,
                        "approach_speed",
                    )?,
                    turn_speed: ctx.positive(r.turn_speed.unwrap_or(6.0), t, 0, "turn_speed")?,
                    pedestrian_speed: ctx.positive(
                        r.pedestrian_speed.unwrap_or(1.3),
                        t,
                        0,
                        "pedestrian_speed",
                    )?,
                    cyclist_speed: ctx.positive(
                        r.cyclist_speed.unwrap_or(5.0),
                        t,
                        0,
                        "cyclist_speed",
                    )?,
                    green_time: ctx.positive(r.green_time.unwrap_or(12.0), t, 0, "green_time")?,
                    clearance_time: ctx.non_negative(
                        r.clearance_time.unwrap_or(2.0),
                        t,
                        "clearance_time",
                    )?,
                }))
            }
        }
    }

    fn sensors(
        ctx: &Ctx,
        defaults: RawSensor,
        raw: Vec<RawSensor>,
    ) -> Result<Vec<SensorSpec>, ConfigError> {
        let t = "sensors";
        let mut out: Vec<SensorSpec> = Vec::with_capacity(raw.len());
        for (i, s) in raw.into_iter().enumerate() {
            let s = s.or(&defaults);
            let need = |v: Option<f64>, key: &str| {
                v.ok_or_else(|| ctx.err(t, i, "", format!("sensor #{}: missing `{key}`", i + 1)))
            };
            let id =
                SensorId(s.id.ok_or_else(|| {
                    ctx.err(t, i, "", format!("sensor #{}: missing `id`", i + 1))
                })?);
            if out.iter().any(|o| o.meta.id == id) {
                return Err(ctx.err(t, i, "id", format!("duplicate sensor id {id}")));
            }
            let position = s
                .position
                .ok_or_else(|| ctx.err(t, i, "", format!("sensor {id}: missing `position`")))?;
            let pd = need(
                s.detection_probability.or(Some(0.9)),
                "detection_probability",
            )?;
            let pfa = need(s.false_alarm_rate.or(Some(1e-6)), "false_alarm_rate")?;
            let range = need(s.range, "range")?;
            let factor = s.confirmation_factor.unwrap_or(1.5);
            let over_range = s.over_range.map(|r| OverRange {
                range_multiplier: r / range,
                detection_probability: pd * s.over_range_pd_factor.unwrap_or(1.0 / 3.0),
            });
            let meta = SensorMeta {
                id,
                position: Point3::new(position[0], position[1], position[2]),
                yaw: s.yaw_deg.unwrap_or(0.0).to_radians(),
                pitch: s.pitch_deg.unwrap_or(0.0).to_radians(),
                fov: FieldOfView {
                    range,
                    horizontal: need(s.horizontal_deg, "horizontal_deg")?.to_radians(),
                    vertical: need(s.vertical_deg, "vertical_deg")?.to_radians(),
                },
                trust: s.trust.unwrap_or(0.9),
                detection_probability: pd,
                false_alarm_rate: pfa,
                confirmation_threshold: factor * (pd / pfa).ln(),
                deletion_threshold: s.deletion_threshold.unwrap_or(0.0),
                over_range,
                noise_std: s.noise_std.unwrap_or(0.5),
            };
            meta.validate()
                .map_err(|e| ctx.err(t, i, "", e.to_string()))?;
            if !(meta.confirmation_threshold > meta.initial_score()) {
                return Err(ctx.err(
                    t,
                    i,
                    "confirmation_factor",
                    format!("sensor {id}: confirmation_factor must be > 1"),
                ));
            }
            let resolution_cells = s.resolution_cells.unwrap_or(4096.0);
            if !(resolution_cells >= 0.0) {
                return Err(ctx.err(t, i, "resolution_cells", "`resolution_cells` must be >= 0"));
            }
            let max_coasting = s.max_coasting.unwrap_or(5);
            if max_coasting == 0 {
                return Err(ctx.err(t, i, "max_coasting", "`max_coasting` must be >= 1"));
            }
            out.push(SensorSpec {
                meta,
                resolution_cells,
                max_coasting,
            });
        }
        Ok(out)
    }

    fn fault(
        ctx: &Ctx,
        sensors: &[SensorSpec],
        raw: Vec<RawFault>,
    ) -> Result<Option<FaultSpec>, ConfigError> {
        let t = "faults";
        if raw.len() > 1 {
            return Err(ctx.err(
                t,
                1,
                "",
                "only one fault per run is supported (single fault hypothesis)",
            ));
        }
        let Some(f) = raw.into_iter().next() else {
            return Ok(None);
        };
        let sensor_id = SensorId(f.sensor);
        let Some(sensor) = sensors.iter().find(|s| s.meta.id == sensor_id) else {
            return Err(ctx.err(
                t,
                0,
                "sensor",
                format!("fault refers to unknown sensor {sensor_id}"),
            ));
        };
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| ctx.err(t, 0, "", format!("{} fault needs `{key}`", f.kind)))
        };
        let spec = match f.kind.as_str() {
            "misorientation" => FaultSpec::Misorientation {
                sensor_id,
                delta: need(f.delta_deg, "delta_deg")?.to_radians(),
            },
            "tracker_threshold" => {
                let factor = need(f.threshold_factor, "threshold_factor")?;
                let threshold = factor * sensor.meta.confirmation_threshold;
                if !(factor > 0.0) || !(threshold > sensor.meta.deletion_threshold) {
                    return Err(ctx.err(
                        t,
                        0,
                        "threshold_factor",
                        "faulty threshold must stay above the deletion threshold",
                    ));
                }
                FaultSpec::TrackerThreshold {
                    sensor_id,
                    threshold,
                }
            }
            "blind_spot" => {
                let p = sensor.meta.position;
                // default: facing the origin (junction centre)
                let center = match f.center_deg {
                    Some(c) => c.to_radians(),
                    None => (-p.y).atan2(-p.x),
                };
                let width = need(f.width_deg, "width_deg")?.to_radians();
                if !(width > 0.0 && width < 2.0 * std::f64::consts::PI) {
                    return Err(ctx.err(t, 0, "width_deg", "`width_deg` must be in (0, 360)"));
                }
                FaultSpec::BlindSpot {
                    sensor_id,
                    center,
                    width,
                }
            }
            other => return Err(ctx.err(
                t,
                0,
                "kind",
                format!(
                    "unknown fault kind `{other}` (misorientation, tracker_threshold, blind_spot)"
                ),
            )),
        };
        Ok(Some(spec))
    }

    fn analysis(
        ctx: &Ctx,
        road: &RoadSpec,
        sensors: &[SensorSpec],
        raw: Option<RawAnalysis>,
    ) -> Result<AnalysisSpec, ConfigError> {
        let t = "analysis";
        let raw = raw.unwrap_or(RawAnalysis {
            interval_steps: None,
            bin_size: None,
            exclude_sensors: None,
            min_intervals: None,
        });
        let interval_steps = raw.interval_steps.unwrap_or(50);
        if interval_steps == 0 {
            return Err(ctx.err(t, 0, "interval_steps", "`interval_steps` must be >= 1"));
        }
        let bins = match road {
            RoadSpec::Highway(_) => BinSpec::Longitudinal {
                size: ctx.positive(raw.bin_size.unwrap_or(25.0), t, 0, "bin_size")?,
            },
            RoadSpec::Intersection(_) => BinSpec::Grid {
                size: ctx.positive(raw.bin_size.unwrap_or(10.0), t, 0, "bin_size")?,
            },
        };
        let exclude: Vec<SensorId> = raw
            .exclude_sensors
            .unwrap_or_default()
            .into_iter()
            .map(SensorId)
            .collect();
        for id in &exclude {
            if !sensors.iter().any(|s| s.meta.id == *id) {
                return Err(ctx.err(
                    t,
                    0,
                    "exclude_sensors",
                    format!("excluded sensor {id} does not exist"),
                ));
            }
        }
        Ok(AnalysisSpec {
            interval_steps,
            bins,
            exclude_sensors: exclude,
            min_intervals: raw.min_intervals.unwrap_or(10),
        })
    }

    /// Number of recorded steps.
    pub fn steps(&self) -> usize {
        (self.duration / self.sample_period + 1e-9).floor() as usize
    }

    pub fn warmup_steps(&self) -> usize {
        (self.warmup / self.sample_period + 1e-9).round() as usize
    }

    pub fn sensor_metas(&self) -> Vec<SensorMeta> {
        self.sensors.iter().map(|s| s.meta.clone()).collect()
    }

    /// Copy with a different seed; the source text is left untouched.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}
