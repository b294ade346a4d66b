//! First-order exponential low-pass filtering, gyro bias calibration and
//! gravity compensation.
//!
//! The smoother is `out(i) = out(i−1) + α·(in(i) − out(i−1))`. By default α
//! is `t / (t + dT)`, which approaches 1 at high sample rates and so tracks
//! the input closely. [`AlphaMode::Conventional`] switches to the usual RC
//! discretization `dT / (t + dT)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imu::{Frame, Gravity, ImuError, ImuSample, SampleSeries, Vec3};

/// Minimum stationary window for gyro bias calibration.
pub const MIN_CALIBRATION_SAMPLES: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty series")]
    EmptySeries,
    #[error("timestamps not strictly increasing at sample {0}")]
    NonMonotoneTimestamps(usize),
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("expected {expected} frame, got {actual}")]
    WrongFrame { expected: Frame, actual: Frame },
}

impl From<ImuError> for FilterError {
    fn from(e: ImuError) -> Self {
        match e {
            ImuError::WrongFrame { expected, actual } => FilterError::WrongFrame { expected, actual },
            ImuError::NonMonotoneTimestamps { index, .. } => FilterError::NonMonotoneTimestamps(index),
            ImuError::EmptySeries => FilterError::EmptySeries,
            other => FilterError::InvalidArgument(other.to_string()),
        }
    }
}

/// Orientation of the smoothing coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    /// `α = t / (t + dT)`
    #[default]
    Tracking,
    /// `α = dT / (t + dT)`
    Conventional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    /// Filter time constant in seconds.
    pub time_constant: f64,
    pub mode: AlphaMode,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self { time_constant: 0.5, mode: AlphaMode::Tracking }
    }
}

impl FilterParams {
    pub fn new(time_constant: f64, mode: AlphaMode) -> Result<Self, FilterError> {
        if !(time_constant.is_finite() && time_constant > 0.0) {
            return Err(FilterError::InvalidArgument(format!("time constant must be positive, got {time_constant}")));
        }
        Ok(Self { time_constant, mode })
    }

    pub fn alpha(&self, dt: f64) -> Result<f64, FilterError> {
        let a = alpha(self.time_constant, dt)?;
        Ok(match self.mode {
            AlphaMode::Tracking => a,
            // dT/(t+dT) = 1 − t/(t+dT), computed directly to keep precision
            AlphaMode::Conventional => dt / (self.time_constant + dt),
        })
    }
}

/// `t / (t + dT)`, strictly inside (0, 1) for positive inputs.
pub fn alpha(time_constant: f64, dt: f64) -> Result<f64, FilterError> {
    if !(time_constant.is_finite() && time_constant > 0.0) {
        return Err(FilterError::InvalidArgument(format!(
            "time constant must be positive and finite, got {time_constant}"
        )));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(FilterError::InvalidArgument(format!("dT must be positive and finite, got {dt}")));
    }
    Ok(time_constant / (time_constant + dt))
}

/// Per-channel filter memory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FilterState {
    prev_out: Vec3,
    initialized: bool,
}

impl FilterState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn seeded(prev_out: Vec3) -> Self {
        Self { prev_out, initialized: true }
    }

    pub fn prev_out(&self) -> Option<Vec3> {
        self.initialized.then_some(self.prev_out)
    }
}

/// One smoothing step. An uninitialized state is seeded with `input`.
pub fn lowpass_step(state: FilterState, input: Vec3, a: f64) -> Result<(Vec3, FilterState), FilterError> {
    if !(a > 0.0 && a < 1.0) {
        return Err(FilterError::InvalidArgument(format!("alpha must lie in (0, 1), got {a}")));
    }
    if !input.is_finite() {
        return Err(FilterError::InvalidArgument("non-finite input".into()));
    }
    let out = if state.initialized { state.prev_out + (input - state.prev_out) * a } else { input };
    Ok((out, FilterState::seeded(out)))
}

/// Smooths accel and gyro of every sample, with α recomputed from each step's dT.
pub fn lowpass_series(series: &SampleSeries, params: &FilterParams) -> Result<SampleSeries, FilterError> {
    let samples = series.samples();
    if samples.is_empty() {
        return Err(FilterError::EmptySeries);
    }
    let mut accel_state = FilterState::new();
    let mut gyro_state = FilterState::new();
    let mut out = Vec::with_capacity(samples.len());
    let mut prev_t = None;
    for (i, s) in samples.iter().enumerate() {
        let a = match prev_t {
            // seeding step: any valid α, the input passes through
            None => 0.5,
            Some(p) => {
                let dt = s.t - p;
                if !(dt > 0.0) {
                    return Err(FilterError::NonMonotoneTimestamps(i));
                }
                params.alpha(dt)?
            }
        };
        let (accel, st) = lowpass_step(accel_state, s.accel, a)?;
        accel_state = st;
        let (gyro, st) = lowpass_step(gyro_state, s.gyro, a)?;
        gyro_state = st;
        out.push(ImuSample { accel, gyro, ..*s });
        prev_t = Some(s.t);
    }
    Ok(SampleSeries::new(out, series.frame())?)
}

/// Constant angular-rate offset of the gyroscope.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GyroBias {
    pub bias: Vec3,
}

impl GyroBias {
    pub const ZERO: GyroBias = GyroBias { bias: Vec3::ZERO };

    pub fn correct(&self, gyro: Vec3) -> Vec3 {
        gyro - self.bias
    }

    /// Series with the bias subtracted from every gyro reading.
    pub fn remove_from(&self, series: &SampleSeries) -> SampleSeries {
        series.map_samples(|s| ImuSample { gyro: self.correct(s.gyro), ..*s })
    }
}

/// Per-axis mean of a vector stream, refined by a second pass over the
/// residuals so the corrected data averages to zero at rounding level.
pub(crate) fn mean_vec3(values: impl Iterator<Item = Vec3> + Clone) -> Option<Vec3> {
    let n = values.clone().count();
    if n == 0 {
        return None;
    }
    let inv = 1.0 / n as f64;
    let first: Vec3 = values.clone().sum::<Vec3>() * inv;
    let correction: Vec3 = values.map(|v| v - first).sum::<Vec3>() * inv;
    Some(first + correction)
}

/// Gyro bias as the per-axis mean over a window the caller knows to be still.
pub fn calibrate_gyro_bias(still: &SampleSeries) -> Result<GyroBias, FilterError> {
    if still.len() < MIN_CALIBRATION_SAMPLES {
        return Err(FilterError::InsufficientSamples { needed: MIN_CALIBRATION_SAMPLES, got: still.len() });
    }
    let bias = mean_vec3(still.samples().iter().map(|s| s.gyro)).expect("non-empty");
    Ok(GyroBias { bias })
}

/// Subtracts `g` from the z-axis of a vehicle-frame series.
pub fn remove_gravity(series: &SampleSeries, g: Gravity) -> Result<SampleSeries, FilterError> {
    if series.frame() != Frame::Vehicle {
        return Err(FilterError::WrongFrame { expected: Frame::Vehicle, actual: series.frame() });
    }
    Ok(series.map_samples(|s| ImuSample { accel: Vec3::new(s.accel.x, s.accel.y, s.accel.z - g.value()), ..*s }))
}
