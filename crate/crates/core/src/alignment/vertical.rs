//! Vertical-axis estimators: angular-velocity method and gravitational method.

use crate::filter::{mean_vec3, GyroBias};
use crate::imu::{SampleSeries, Vec3};

use super::motion::{check_window, total_angular_velocity};
use super::{AlignmentConfig, AlignmentError};

/// Up direction in device coordinates from a turning window.
///
/// The mean bias-corrected angular velocity is normalized. Its sign follows
/// the turn direction, so it is flipped to agree with the window's mean
/// specific force, which points up.
pub fn vertical_axis_from_gyro(
    window: &SampleSeries,
    bias: &GyroBias,
    cfg: &AlignmentConfig,
) -> Result<Vec3, AlignmentError> {
    check_window(window, cfg)?;
    let samples = window.samples();
    let n = samples.len() as f64;
    let mean_rate = samples.iter().map(|s| total_angular_velocity(bias.correct(s.gyro))).sum::<f64>() / n;
    if mean_rate <= cfg.turn_rate {
        return Err(AlignmentError::NotTurning { mean_rate });
    }
    let w = mean_vec3(samples.iter().map(|s| bias.correct(s.gyro))).expect("non-empty");
    let norm = w.norm();
    if norm < 1e-6 {
        return Err(AlignmentError::Degenerate(format!("mean angular velocity {norm:e} rad/s has no direction")));
    }
    let axis = w.scale(1.0 / norm);
    let up_hint = mean_vec3(samples.iter().map(|s| s.accel)).expect("non-empty");
    Ok(if axis.dot(up_hint) < 0.0 { -axis } else { axis })
}

/// Up direction in device coordinates from a quasi-static window: the
/// normalized mean acceleration.
pub fn vertical_axis_from_gravity(window: &SampleSeries, cfg: &AlignmentConfig) -> Result<Vec3, AlignmentError> {
    check_window(window, cfg)?;
    let a = mean_vec3(window.samples().iter().map(|s| s.accel)).expect("non-empty");
    let magnitude = a.norm();
    let g = cfg.gravity.value();
    let (lo, hi) = cfg.gravity_gate;
    if !(magnitude >= lo * g && magnitude <= hi * g) {
        return Err(AlignmentError::NotQuasiStatic { magnitude });
    }
    Ok(a.scale(1.0 / magnitude))
}
