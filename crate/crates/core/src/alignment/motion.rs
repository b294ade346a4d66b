//! Magnitudes and the motion-regime classifier that gates each alignment method.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::filter::GyroBias;
use crate::imu::{Frame, SampleSeries, Vec3};

use super::{AlignmentConfig, AlignmentError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionMode {
    Still,
    StraightConstantSpeed,
    Accelerating,
    Turning,
    Unknown,
}

impl MotionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MotionMode::Still => "still",
            MotionMode::StraightConstantSpeed => "straight_constant_speed",
            MotionMode::Accelerating => "accelerating",
            MotionMode::Turning => "turning",
            MotionMode::Unknown => "unknown",
        }
    }

    /// Gravity is the only force acting: the gravitational method applies.
    pub fn is_quasi_static(self) -> bool {
        matches!(self, MotionMode::Still | MotionMode::StraightConstantSpeed)
    }
}

impl fmt::Display for MotionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Total angular velocity `√(ωx² + ωy² + ωz²)`.
pub fn total_angular_velocity(w: Vec3) -> f64 {
    w.norm()
}

/// Total acceleration `√(ax² + ay² + az²)`.
pub fn total_acceleration(a: Vec3) -> f64 {
    a.norm()
}

/// Combined horizontal acceleration `√(ax² + ay²)`.
pub fn combined_horizontal_accel(ax: f64, ay: f64) -> f64 {
    ax.hypot(ay)
}

/// Window averages feeding the classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionStats {
    /// Mean of bias-corrected `ω_t` over the window.
    pub mean_rate: f64,
    /// Mean of `|a_t − g|` over the window.
    pub mean_accel_excess: f64,
}

impl MotionStats {
    pub fn of(window: &SampleSeries, bias: &GyroBias, g: f64) -> Self {
        let n = window.len().max(1) as f64;
        let (mut rate, mut excess) = (0.0, 0.0);
        for s in window.samples() {
            rate += total_angular_velocity(bias.correct(s.gyro));
            excess += (total_acceleration(s.accel) - g).abs();
        }
        Self { mean_rate: rate / n, mean_accel_excess: excess / n }
    }
}

pub(crate) fn check_window(window: &SampleSeries, cfg: &AlignmentConfig) -> Result<(), AlignmentError> {
    if window.frame() != Frame::Device {
        return Err(AlignmentError::WrongFrame(window.frame()));
    }
    if window.len() < cfg.min_window_samples {
        return Err(AlignmentError::InsufficientSamples { needed: cfg.min_window_samples, got: window.len() });
    }
    Ok(())
}

/// Classifies a device-frame window from its mean rotation rate and mean
/// deviation of the acceleration magnitude from gravity.
pub fn classify_motion(
    window: &SampleSeries,
    bias: &GyroBias,
    cfg: &AlignmentConfig,
) -> Result<MotionMode, AlignmentError> {
    check_window(window, cfg)?;
    Ok(classify_stats(&MotionStats::of(window, bias, cfg.gravity.value()), cfg))
}

pub(crate) fn classify_stats(st: &MotionStats, cfg: &AlignmentConfig) -> MotionMode {
    if st.mean_rate > cfg.turn_rate {
        MotionMode::Turning
    } else if st.mean_accel_excess < cfg.quasi_static_accel {
        if st.mean_rate < cfg.still_rate {
            MotionMode::Still
        } else {
            MotionMode::StraightConstantSpeed
        }
    } else if st.mean_rate <= cfg.accel_max_rate {
        MotionMode::Accelerating
    } else {
        MotionMode::Unknown
    }
}
