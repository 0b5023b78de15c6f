//! Statistical fault diagnosis over quasi-independent time intervals: miss
//! and unexpected-observation ratios per sensor, binned existence
//! probability, confidence intervals, baselines and fingerprint matching.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::AnalysisError;
use crate::fusion::SensorCounts;
use crate::model::{SensorId, SensorMeta};
use crate::simulation::{BinSpec, StepRecord};

/// Two-sided 95% standard normal quantile.
pub const NORMAL_Q975: f64 = 1.959964;

/// Spatial bin index; `iy` is 0 for longitudinal bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BinId {
    pub ix: i64,
    pub iy: i64,
}

impl BinId {
    pub fn of(spec: &BinSpec, x: f64, y: f64) -> Self {
        match *spec {
            BinSpec::Longitudinal { size } => BinId {
                ix: (x / size).floor() as i64,
                iy: 0,
            },
            BinSpec::Grid { size } => BinId {
                ix: (x / size).floor() as i64,
                iy: (y / size).floor() as i64,
            },
        }
    }

    /// Bin centre; `y` is 0 for longitudinal bins.
    pub fn center(&self, spec: &BinSpec) -> (f64, f64) {
        match *spec {
            BinSpec::Longitudinal { size } => ((self.ix as f64 + 0.5) * size, 0.0),
            BinSpec::Grid { size } => {
                ((self.ix as f64 + 0.5) * size, (self.iy as f64 + 0.5) * size)
            }
        }
    }
}

impl fmt::Display for BinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.ix, self.iy)
    }
}

/// Miss ratio: misses over misses plus observations.
pub fn miss_ratio(c: &SensorCounts) -> Option<f64> {
    (c.observations > 0).then(|| c.misses as f64 / (c.misses + c.observations) as f64)
}

/// Unexpected-observation ratio: unexpected over observations.
pub fn unexpected_ratio(c: &SensorCounts) -> Option<f64> {
    (c.observations > 0).then(|| c.unexpected as f64 / c.observations as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorInterval {
    pub counts: SensorCounts,
    /// `None` when the sensor had no observations in the interval.
    pub mr: Option<f64>,
    pub uor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinInterval {
    pub bin: BinId,
    pub mean_p_exists: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalStats {
    pub index: usize,
    pub sensors: BTreeMap<SensorId, SensorInterval>,
    pub bins: Vec<BinInterval>,
}

impl IntervalStats {
    pub fn bin(&self, id: BinId) -> Option<&BinInterval> {
        self.bins.iter().find(|b| b.bin == id)
    }
}

/// Statistics of one interval. Every sensor in `sensors` gets an entry,
/// also when it registered nothing.
pub fn interval_metrics(
    index: usize,
    records: &[StepRecord],
    sensors: &[SensorId],
    bins: &BinSpec,
) -> IntervalStats {
    let mut counts: BTreeMap<SensorId, SensorCounts> = sensors
        .iter()
        .map(|id| (*id, SensorCounts::default()))
        .collect();
    let mut sums: BTreeMap<BinId, (f64, u64)> = BTreeMap::new();
    for rec in records {
        for e in &rec.ledger.events {
            counts.entry(e.sensor).or_default().add(e.kind);
        }
        for obj in &rec.system {
            let slot = sums
                .entry(BinId::of(bins, obj.state.x, obj.state.y))
                .or_default();
            slot.0 += obj.p_exists;
            slot.1 += 1;
        }
    }
    IntervalStats {
        index,
        sensors: counts
            .into_iter()
            .map(|(id, c)| {
                let s = SensorInterval {
                    counts: c,
                    mr: miss_ratio(&c),
                    uor: unexpected_ratio(&c),
                };
                (id, s)
            })
            .collect(),
        bins: sums
            .into_iter()
            .map(|(bin, (sum, n))| BinInterval {
                bin,
                mean_p_exists: sum / n as f64,
                samples: n,
            })
            .collect(),
    }
}

/// Splits a recording into consecutive intervals; an incomplete tail is
/// dropped.
pub fn split_intervals(
    records: &[StepRecord],
    interval_steps: usize,
    sensors: &[SensorId],
    bins: &BinSpec,
) -> Vec<IntervalStats> {
    records
        .chunks_exact(interval_steps.max(1))
        .enumerate()
        .map(|(i, chunk)| interval_metrics(i, chunk, sensors, bins))
        .collect()
}

/// Symmetric confidence interval around a mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub mean: f64,
    pub half_width: f64,
    /// Standard error of the mean.
    pub std_err: f64,
    pub n: usize,
}

impl ConfidenceInterval {
    pub fn low(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn high(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn above(&self, other: &ConfidenceInterval) -> bool {
        self.low() > other.high()
    }

    pub fn below(&self, other: &ConfidenceInterval) -> bool {
        self.high() < other.low()
    }

    pub fn overlaps(&self, other: &ConfidenceInterval) -> bool {
        !self.above(other) && !self.below(other)
    }
}

/// Student-t 95% interval of a series of interval means.
pub fn confidence_interval(values: &[f64]) -> Result<ConfidenceInterval, AnalysisError> {
    let n = values.len();
    if n < 2 {
        return Err(AnalysisError::InsufficientData { needed: 2, got: n });
    }
    // shift by the first value so a constant series yields exactly zero spread
    let v0 = values[0];
    let shift = values.iter().map(|v| v - v0).sum::<f64>() / n as f64;
    let mean = v0 + shift;
    let var = values.iter().map(|v| (v - v0 - shift).powi(2)).sum::<f64>() / (n - 1) as f64;
    let std_err = (var / n as f64).sqrt();
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("n >= 2 gives positive degrees of freedom")
        .inverse_cdf(0.975);
    Ok(ConfidenceInterval {
        mean,
        half_width: t * std_err,
        std_err,
        n,
    })
}

/// Inverse-variance weighted mean of per-sensor estimates with a normal 95%
/// interval.
pub fn sensor_baseline(cis: &[ConfidenceInterval]) -> Result<ConfidenceInterval, AnalysisError> {
    if cis.len() < 2 {
        return Err(AnalysisError::InsufficientData {
            needed: 2,
            got: cis.len(),
        });
    }
    let n = cis.iter().map(|c| c.n).sum();
    let exact: Vec<&ConfidenceInterval> = cis.iter().filter(|c| c.std_err == 0.0).collect();
    if !exact.is_empty() {
        // a zero-variance estimate carries infinite weight
        let mean = exact.iter().map(|c| c.mean).sum::<f64>() / exact.len() as f64;
        return Ok(ConfidenceInterval {
            mean,
            half_width: 0.0,
            std_err: 0.0,
            n,
        });
    }
    let (mut sw, mut swx) = (0.0, 0.0);
    for c in cis {
        let w = 1.0 / c.std_err.powi(2);
        sw += w;
        swx += w * c.mean;
    }
    let std_err = (1.0 / sw).sqrt();
    Ok(ConfidenceInterval {
        mean: swx / sw,
        half_width: NORMAL_Q975 * std_err,
        std_err,
        n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    MissRatio,
    UnexpectedRatio,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::MissRatio => "mr",
            Metric::UnexpectedRatio => "uor",
        }
    }

    fn of(self, s: &SensorInterval) -> Option<f64> {
        match self {
            Metric::MissRatio => s.mr,
            Metric::UnexpectedRatio => s.uor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flag {
    High,
    Low,
    None,
}

/// Interval means of one sensor metric, skipping intervals where it is
/// undefined.
pub fn sensor_series(stats: &[IntervalStats], sensor: SensorId, metric: Metric) -> Vec<f64> {
    stats
        .iter()
        .filter_map(|s| s.sensors.get(&sensor).and_then(|x| metric.of(x)))
        .collect()
}

pub fn bin_series(stats: &[IntervalStats], bin: BinId) -> Vec<f64> {
    stats
        .iter()
        .filter_map(|s| s.bin(bin).map(|b| b.mean_p_exists))
        .collect()
}

/// Per-sensor CIs of a metric.
pub fn sensor_cis(
    stats: &[IntervalStats],
    sensors: &[SensorId],
    metric: Metric,
) -> BTreeMap<SensorId, ConfidenceInterval> {
    sensors
        .iter()
        .filter_map(|id| {
            confidence_interval(&sensor_series(stats, *id, metric))
                .ok()
                .map(|ci| (*id, ci))
        })
        .collect()
}

/// Reference the faulty-candidate statistics are compared with.
#[derive(Debug, Clone, Copy)]
pub enum Baseline<'a> {
    /// WLS average over all analysed sensors of the same recording.
    CrossSensor,
    /// WLS average over the analysed sensors of a no-fault recording.
    Reference(&'a [IntervalStats]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricFlag {
    pub ci: ConfidenceInterval,
    pub baseline: ConfidenceInterval,
    pub flag: Flag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorDiagnosis {
    pub sensor: SensorId,
    pub mr: Option<MetricFlag>,
    pub uor: Option<MetricFlag>,
}

impl SensorDiagnosis {
    pub fn mr_flag(&self) -> Flag {
        self.mr.as_ref().map_or(Flag::None, |m| m.flag)
    }

    pub fn uor_flag(&self) -> Flag {
        self.uor.as_ref().map_or(Flag::None, |m| m.flag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinDiagnosis {
    pub bin: BinId,
    pub center: (f64, f64),
    pub ci: ConfidenceInterval,
    pub baseline: ConfidenceInterval,
    pub flag: Flag,
}

/// Fault class matched from the flag pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    NoFault,
    MisorientedPose { sensor: SensorId },
    TrackerParametrization { sensor: SensorId },
    PollutionOrBlindSpot { sensor: SensorId },
    Inconclusive,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::NoFault => "no fault",
            Verdict::MisorientedPose { .. } => "misoriented sensor pose",
            Verdict::TrackerParametrization { .. } => "tracker parametrization",
            Verdict::PollutionOrBlindSpot { .. } => "sensor pollution or blind spot",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn sensor(&self) -> Option<SensorId> {
        match *self {
            Verdict::MisorientedPose { sensor }
            | Verdict::TrackerParametrization { sensor }
            | Verdict::PollutionOrBlindSpot { sensor } => Some(sensor),
            _ => None,
        }
    }

    pub fn is_fault(&self) -> bool {
        *self != Verdict::NoFault
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosisReport {
    pub intervals: usize,
    pub baseline: String,
    pub sensors: Vec<SensorDiagnosis>,
    /// Only populated against a no-fault reference.
    pub bins: Vec<BinDiagnosis>,
    pub verdict: Verdict,
    pub verdict_label: String,
}

impl DiagnosisReport {
    pub fn sensor(&self, id: SensorId) -> Option<&SensorDiagnosis> {
        self.sensors.iter().find(|s| s.sensor == id)
    }

    pub fn flagged_bins(&self) -> impl Iterator<Item = &BinDiagnosis> {
        self.bins.iter().filter(|b| b.flag != Flag::None)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnoseOptions {
    pub sensors: Vec<SensorMeta>,
    pub exclude: Vec<SensorId>,
    pub min_intervals: usize,
    pub bins: BinSpec,
}

fn flag_of(ci: &ConfidenceInterval, baseline: &ConfidenceInterval) -> Flag {
    if ci.above(baseline) {
        Flag::High
    } else if ci.below(baseline) {
        Flag::Low
    } else {
        Flag::None
    }
}

/// Nearest sensors by installation distance (ties within 1%).
pub fn neighbors(sensors: &[SensorMeta], id: SensorId) -> Vec<SensorId> {
    let Some(me) = sensors.iter().find(|s| s.id == id) else {
        return Vec::new();
    };
    let dist: Vec<(SensorId, f64)> = sensors
        .iter()
        .filter(|s| s.id != id)
        .map(|s| (s.id, (s.position - me.position).norm()))
        .collect();
    let Some(min) = dist.iter().map(|d| d.1).reduce(f64::min) else {
        return Vec::new();
    };
    dist.into_iter()
        .filter(|d| d.1 <= min * 1.01)
        .map(|d| d.0)
        .collect()
}

/// Maps sensor flags to a fault class; each rule must match exactly.
pub fn classify(sensors: &[SensorDiagnosis], metas: &[SensorMeta]) -> Verdict {
    let mr_high: Vec<SensorId> = sensors
        .iter()
        .filter(|s| s.mr_flag() == Flag::High)
        .map(|s| s.sensor)
        .collect();
    let uor_flagged: Vec<&SensorDiagnosis> = sensors
        .iter()
        .filter(|s| s.uor_flag() != Flag::None)
        .collect();
    let uor_low: Vec<SensorId> = uor_flagged
        .iter()
        .filter(|s| s.uor_flag() == Flag::Low)
        .map(|s| s.sensor)
        .collect();
    if mr_high.is_empty()
        && uor_flagged.is_empty()
        && sensors.iter().all(|s| s.mr_flag() == Flag::None)
    {
        return Verdict::NoFault;
    }
    // misoriented pose: MR up and UOR down on one sensor; neighbours may
    // show MR up as well since they miss its displaced reports
    if uor_flagged.len() == 1 && uor_low.len() == 1 && mr_high.contains(&uor_low[0]) {
        return Verdict::MisorientedPose { sensor: uor_low[0] };
    }
    if !uor_flagged.is_empty() {
        return Verdict::Inconclusive;
    }
    if mr_high.len() == 1 {
        return Verdict::PollutionOrBlindSpot { sensor: mr_high[0] };
    }
    if mr_high.len() >= 2 {
        // tracker fault: every MR-high sensor neighbours one unflagged sensor
        let candidates: Vec<SensorId> = sensors
            .iter()
            .filter(|s| s.mr_flag() != Flag::High)
            .map(|s| s.sensor)
            .filter(|c| {
                let near = neighbors(metas, *c);
                mr_high.iter().all(|h| near.contains(h))
            })
            .collect();
        if candidates.len() == 1 {
            return Verdict::TrackerParametrization {
                sensor: candidates[0],
            };
        }
    }
    Verdict::Inconclusive
}

/// Flags sensors and bins whose CIs separate from the baseline and matches
/// the pattern to a fault class.
pub fn diagnose(
    stats: &[IntervalStats],
    baseline: Baseline<'_>,
    options: &DiagnoseOptions,
) -> Result<DiagnosisReport, AnalysisError> {
    if stats.len() < options.min_intervals {
        return Err(AnalysisError::InsufficientIntervals {
            needed: options.min_intervals,
            got: stats.len(),
        });
    }
    let analysed: Vec<SensorId> = options
        .sensors
        .iter()
        .map(|s| s.id)
        .filter(|id| !options.exclude.contains(id))
        .collect();
    let mut per_metric: BTreeMap<Metric, BTreeMap<SensorId, MetricFlag>> = BTreeMap::new();
    for metric in [Metric::MissRatio, Metric::UnexpectedRatio] {
        let cis = sensor_cis(stats, &analysed, metric);
        let mut flags = BTreeMap::new();
        // the baseline is the WLS average over sensors of either this
        // recording or the no-fault reference
        let pool = match baseline {
            Baseline::CrossSensor => cis.clone(),
            Baseline::Reference(reference) => sensor_cis(reference, &analysed, metric),
        };
        let all: Vec<ConfidenceInterval> = pool.values().copied().collect();
        if let Ok(base) = sensor_baseline(&all) {
            for (id, ci) in &cis {
                flags.insert(
                    *id,
                    MetricFlag {
                        ci: *ci,
                        baseline: base,
                        flag: flag_of(ci, &base),
                    },
                );
            }
        }
        per_metric.insert(metric, flags);
    }
    let sensors: Vec<SensorDiagnosis> = analysed
        .iter()
        .map(|id| SensorDiagnosis {
            sensor: *id,
            mr: per_metric[&Metric::MissRatio].get(id).cloned(),
            uor: per_metric[&Metric::UnexpectedRatio].get(id).cloned(),
        })
        .collect();
    let mut bins = Vec::new();
    if let Baseline::Reference(reference) = baseline {
        let mut ids: Vec<BinId> = stats
            .iter()
            .flat_map(|s| s.bins.iter().map(|b| b.bin))
            .collect();
        ids.sort();
        ids.dedup();
        for bin in ids {
            let (Ok(ci), Ok(base)) = (
                confidence_interval(&bin_series(stats, bin)),
                confidence_interval(&bin_series(reference, bin)),
            ) else {
                continue;
            };
            bins.push(BinDiagnosis {
                bin,
                center: bin.center(&options.bins),
                ci,
                baseline: base,
                flag: flag_of(&ci, &base),
            });
        }
    }
    let verdict = classify(&sensors, &options.sensors);
    Ok(DiagnosisReport {
        intervals: stats.len(),
        baseline: match baseline {
            Baseline::CrossSensor => "cross-sensor".into(),
            Baseline::Reference(_) => "reference".into(),
        },
        sensors,
        bins,
        verdict_label: verdict.label().into(),
        verdict,
    })
}
