//! Synthetic rides with exact ground truth.
//!
//! A ride is a list of segments, each holding a constant longitudinal
//! acceleration and yaw rate. Vehicle-frame signals are
//!
//! - accel = (a_long, v·ω, g + roughness)
//! - gyro  = (0, 0, ω)
//!
//! where v is the running integral of a_long, held constant over each
//! sample period. Device-frame readings are `mountingᵀ · vehicle` plus
//! Gaussian noise and a constant gyro bias.
//!
//! Noise comes from a ChaCha8 stream seeded with `Scenario::seed`, sampled
//! through `rand_distr::Normal`. Per sample the draw order is: roughness,
//! accel x/y/z, gyro x/y/z.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detect::{ComfortEvent, EventKind, Thresholds};
use crate::imu::{Frame, Gravity, ImuSample, Rotation, SampleSeries, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    /// Seconds.
    pub duration: f64,
    /// m/s², along vehicle x.
    pub longitudinal_accel: f64,
    /// rad/s, about vehicle z.
    pub yaw_rate: f64,
    /// Std of white vertical road noise, m/s².
    #[serde(default)]
    pub roughness_sigma: f64,
}

impl Segment {
    pub fn still(duration: f64) -> Self {
        Self { duration, longitudinal_accel: 0.0, yaw_rate: 0.0, roughness_sigma: 0.0 }
    }

    pub fn accelerate(duration: f64, accel: f64) -> Self {
        Self { longitudinal_accel: accel, ..Self::still(duration) }
    }

    pub fn turn(duration: f64, yaw_rate: f64) -> Self {
        Self { yaw_rate, ..Self::still(duration) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub segments: Vec<Segment>,
    /// Hz.
    pub sample_rate: f64,
    /// Device→vehicle rotation of the phone mount. The generator applies
    /// its transpose to vehicle-frame signals.
    pub mounting: Rotation,
    #[serde(default)]
    pub accel_noise_sigma: f64,
    #[serde(default)]
    pub gyro_noise_sigma: f64,
    #[serde(default)]
    pub gyro_bias: Vec3,
    #[serde(default)]
    pub seed: u64,
}

impl Scenario {
    /// Noise-free ride at 50 Hz with identity mounting.
    pub fn clean(segments: Vec<Segment>) -> Self {
        Self {
            segments,
            sample_rate: 50.0,
            mounting: Rotation::IDENTITY,
            accel_noise_sigma: 0.0,
            gyro_noise_sigma: 0.0,
            gyro_bias: Vec3::ZERO,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidScenario(m));
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return bad(format!("sample_rate must be positive, got {}", self.sample_rate));
        }
        if self.segments.is_empty() {
            return bad("no segments".into());
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration.is_finite() && s.duration > 0.0) {
                return bad(format!("segment {i}: duration must be positive"));
            }
            if !(s.roughness_sigma.is_finite() && s.roughness_sigma >= 0.0) {
                return bad(format!("segment {i}: roughness_sigma must be ≥ 0"));
            }
            if !(s.longitudinal_accel.is_finite() && s.yaw_rate.is_finite()) {
                return bad(format!("segment {i}: non-finite motion"));
            }
        }
        for (name, v) in [("accel_noise_sigma", self.accel_noise_sigma), ("gyro_noise_sigma", self.gyro_noise_sigma)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be ≥ 0"));
            }
        }
        if !self.gyro_bias.is_finite() {
            return bad("gyro_bias must be finite".into());
        }
        Rotation::from_matrix(self.mounting.matrix()).map_err(|e| SynthError::InvalidScenario(e.to_string()))?;
        Ok(())
    }

    /// Sample index range covered by each segment.
    pub fn segment_ranges(&self) -> Vec<Range<usize>> {
        let mut start = 0.0;
        self.segments
            .iter()
            .map(|s| {
                let a = (start * self.sample_rate).round() as usize;
                start += s.duration;
                a..(start * self.sample_rate).round() as usize
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub mounting: Rotation,
    /// Events the ideal vehicle-frame signal contains under default thresholds.
    pub true_events: Vec<ComfortEvent>,
    /// Vehicle-frame signals before sensor noise and bias.
    pub ideal: SampleSeries,
    /// Vehicle speed at each sample, m/s.
    pub speed: Vec<f64>,
    pub segment_ranges: Vec<Range<usize>>,
}

/// Generates the device-frame readings of a scenario and its ground truth.
pub fn generate_ride(sc: &Scenario, g: Gravity) -> Result<(SampleSeries, GroundTruth), SynthError> {
    sc.validate()?;
    let ranges = sc.segment_ranges();
    let n = ranges.last().map_or(0, |r| r.end);
    if n == 0 {
        return Err(SynthError::InvalidScenario("scenario shorter than one sample".into()));
    }
    let dt = 1.0 / sc.sample_rate;
    let to_device = sc.mounting.transpose();
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let mut draw = |sigma: f64| {
        let z: f64 = std_normal.sample(&mut rng);
        if sigma > 0.0 {
            sigma * z
        } else {
            0.0
        }
    };

    let mut ideal = Vec::with_capacity(n);
    let mut device = Vec::with_capacity(n);
    let mut speed = Vec::with_capacity(n);
    let mut v = 0.0;
    for (seg, range) in sc.segments.iter().zip(&ranges) {
        for i in range.clone() {
            if v < -1e-6 {
                return Err(SynthError::InvalidScenario(format!(
                    "vehicle speed turns negative ({v:.3} m/s) at t = {:.3} s",
                    i as f64 * dt
                )));
            }
            let t = i as f64 * dt;
            let rough = draw(seg.roughness_sigma);
            let accel_v = Vec3::new(seg.longitudinal_accel, v * seg.yaw_rate, g.value() + rough);
            let gyro_v = Vec3::new(0.0, 0.0, seg.yaw_rate);
            let na = Vec3::new(draw(sc.accel_noise_sigma), draw(sc.accel_noise_sigma), draw(sc.accel_noise_sigma));
            let ng = Vec3::new(draw(sc.gyro_noise_sigma), draw(sc.gyro_noise_sigma), draw(sc.gyro_noise_sigma));
            ideal.push(ImuSample::new(t, accel_v, gyro_v, Frame::Vehicle));
            device.push(ImuSample::new(
                t,
                to_device.rotate(accel_v) + na,
                to_device.rotate(gyro_v) + sc.gyro_bias + ng,
                Frame::Device,
            ));
            speed.push(v);
            v += seg.longitudinal_accel * dt;
        }
    }

    let ideal = SampleSeries::new(ideal, Frame::Vehicle).map_err(|e| SynthError::InvalidScenario(e.to_string()))?;
    let true_events = ideal_events(&ideal, g, &Thresholds::default());
    let device = SampleSeries::new(device, Frame::Device).map_err(|e| SynthError::InvalidScenario(e.to_string()))?;
    Ok((device, GroundTruth { mounting: sc.mounting, true_events, ideal, speed, segment_ranges: ranges }))
}

/// Event inventory of the ideal signal: per kind, maximal runs of samples
/// beyond threshold, short runs dropped, close runs joined.
fn ideal_events(ideal: &SampleSeries, g: Gravity, th: &Thresholds) -> Vec<ComfortEvent> {
    let s = ideal.samples();
    let channels: [(EventKind, fn(&Vec3) -> f64, f64); 4] = [
        (EventKind::FastAcceleration, |a| a.x, 1.0),
        (EventKind::HardBraking, |a| a.x, -1.0),
        (EventKind::AggressiveCornering, |a| a.y, 0.0),
        (EventKind::Pothole, |a| a.z, 0.0),
    ];
    let mut out = Vec::new();
    for (kind, pick, sign) in channels {
        let threshold = th.for_kind(kind);
        let value = |i: usize| {
            let a = s[i].accel;
            pick(&Vec3::new(a.x, a.y, a.z - g.value()))
        };
        // magnitude along the channel's trigger direction
        let strength = |v: f64| if sign == 0.0 { v.abs() } else { sign * v };
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for i in 0..s.len() {
            if strength(value(i)) > threshold {
                match runs.last_mut() {
                    Some(r) if r.1 + 1 == i => r.1 = i,
                    _ => runs.push((i, i)),
                }
            }
        }
        runs.retain(|&(a, b)| s[b].t - s[a].t >= th.min_duration);
        let mut joined: Vec<(usize, usize)> = Vec::new();
        for r in runs {
            match joined.last_mut() {
                Some(j) if s[r.0].t - s[j.1].t < th.merge_gap => j.1 = r.1,
                _ => joined.push(r),
            }
        }
        for (a, b) in joined {
            let peak_idx = (a..=b)
                .filter(|&i| strength(value(i)) > threshold)
                .max_by(|&i, &j| strength(value(i)).total_cmp(&strength(value(j))))
                .expect("non-empty run");
            out.push(ComfortEvent { kind, t_start: s[a].t, t_end: s[b].t, peak: value(peak_idx), threshold });
        }
    }
    out.sort_by(|a, b| a.t_start.total_cmp(&b.t_start).then(a.kind.cmp(&b.kind)));
    out
}
