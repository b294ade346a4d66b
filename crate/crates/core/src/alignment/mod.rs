//! Estimation of the device→vehicle mounting rotation.
//!
//! Vertical alignment comes first: the up axis in device coordinates is the
//! direction of the mean angular velocity in turning windows, or of the mean
//! specific force in quasi-static windows. Per-window estimates are fused on
//! the unit sphere. Horizontal alignment then finds the heading about that
//! axis from the principal component of the horizontal accelerations.

mod motion;
mod pca;
mod vertical;

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::GyroBias;
use crate::imu::{compose_heading, rotation_aligning_to_z, Frame, Gravity, ImuError, Rotation, SampleSeries, Vec3};

pub use motion::{
    classify_motion, combined_horizontal_accel, total_acceleration, total_angular_velocity, MotionMode, MotionStats,
};
pub use pca::{covariance, covariance_matrix, heading_angle, principal_eigenvector, CovarianceMatrix};
pub use vertical::{vertical_axis_from_gravity, vertical_axis_from_gyro};

pub(crate) use motion::classify_stats;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlignmentError {
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("window is not turning (mean rate {mean_rate:.4} rad/s)")]
    NotTurning { mean_rate: f64 },
    #[error("window is not quasi-static (|mean accel| = {magnitude:.3} m/s²)")]
    NotQuasiStatic { magnitude: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("degenerate spectrum: top eigenvalue gap {gap:e} vs trace {trace:e}")]
    DegenerateSpectrum { gap: f64, trace: f64 },
    #[error("principal direction has no horizontal component")]
    DegenerateHorizontal,
    #[error("invalid covariance matrix: {0}")]
    InvalidMatrix(String),
    #[error("insufficient coverage: {0}")]
    InsufficientCoverage(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("expected device frame, got {0}")]
    WrongFrame(Frame),
    #[error("window at t = {t_start:.3} s: {source}")]
    InWindow {
        t_start: f64,
        #[source]
        source: Box<AlignmentError>,
    },
    #[error(transparent)]
    Imu(#[from] ImuError),
    #[error("invalid alignment config: {0}")]
    InvalidConfig(String),
}

/// Window geometry and motion-regime thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignmentConfig {
    /// Window length in seconds.
    pub window_s: f64,
    /// Hop between window starts in seconds.
    pub hop_s: f64,
    /// Mean ω_t above which a window is turning (rad/s).
    pub turn_rate: f64,
    /// Mean ω_t below which a quasi-static window is still (rad/s).
    pub still_rate: f64,
    /// Mean |a_t − g| below which a window is quasi-static (m/s²).
    pub quasi_static_accel: f64,
    /// Largest mean ω_t for an accelerating window (rad/s).
    pub accel_max_rate: f64,
    pub min_window_samples: usize,
    /// Accepted |mean accel| range for the gravitational method, in units of g.
    pub gravity_gate: (f64, f64),
    /// Minimum ride length in seconds.
    pub min_duration_s: f64,
    /// Minimum mean sample rate in Hz.
    pub min_rate_hz: f64,
    #[serde(skip)]
    pub gravity: Gravity,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            window_s: 2.0,
            hop_s: 1.0,
            turn_rate: 0.1,
            still_rate: 0.02,
            quasi_static_accel: 0.3,
            accel_max_rate: 0.05,
            min_window_samples: 20,
            gravity_gate: (0.7, 1.3),
            min_duration_s: 10.0,
            min_rate_hz: 20.0,
            gravity: Gravity::default(),
        }
    }
}

impl AlignmentConfig {
    pub fn validate(&self) -> Result<(), AlignmentError> {
        let positive = [
            ("window_s", self.window_s),
            ("hop_s", self.hop_s),
            ("turn_rate", self.turn_rate),
            ("still_rate", self.still_rate),
            ("quasi_static_accel", self.quasi_static_accel),
            ("accel_max_rate", self.accel_max_rate),
            ("min_rate_hz", self.min_rate_hz),
            ("gravity", self.gravity.value()),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(AlignmentError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.min_duration_s.is_finite() && self.min_duration_s >= 0.0) {
            return Err(AlignmentError::InvalidConfig("min_duration_s must be ≥ 0".into()));
        }
        if self.hop_s > self.window_s {
            return Err(AlignmentError::InvalidConfig("hop_s must not exceed window_s".into()));
        }
        if self.still_rate > self.turn_rate || self.accel_max_rate > self.turn_rate {
            return Err(AlignmentError::InvalidConfig(
                "still_rate and accel_max_rate must not exceed turn_rate".into(),
            ));
        }
        let (lo, hi) = self.gravity_gate;
        if !(lo > 0.0 && lo < 1.0 && hi > 1.0 && hi.is_finite()) {
            return Err(AlignmentError::InvalidConfig(format!("gravity_gate ({lo}, {hi}) must bracket 1")));
        }
        if self.min_window_samples < 2 {
            return Err(AlignmentError::InvalidConfig("min_window_samples must be ≥ 2".into()));
        }
        Ok(())
    }

    /// Largest tilt of a per-window vertical estimate from the fused axis
    /// that is still consistent with a quasi-static window.
    fn gate_angle(&self) -> f64 {
        (self.quasi_static_accel / self.gravity.value()).min(1.0).asin()
    }
}

/// Which maneuver type fixed the heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadingSource {
    Acceleration,
    Turning,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentEstimate {
    /// Unit vector: vehicle up expressed in device coordinates.
    pub vertical_axis: Vec3,
    /// Heading correction about the vertical, in (−π, π].
    pub heading_phi: f64,
    /// Device→vehicle rotation.
    pub rotation: Rotation,
    pub mode_used: MotionMode,
    pub sample_count: usize,
    /// Mean angular spread (rad) of the accepted per-window vertical estimates.
    pub residual: f64,
    pub vertical_windows: usize,
    pub heading_source: HeadingSource,
    pub heading_samples: usize,
}

/// Index ranges of full-length windows, `cfg.window_s` long every `cfg.hop_s`.
pub(crate) fn window_ranges(series: &SampleSeries, cfg: &AlignmentConfig) -> Vec<Range<usize>> {
    const EPS: f64 = 1e-9;
    let samples = series.samples();
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for k in 0.. {
        let start = first.t + k as f64 * cfg.hop_s;
        let end = start + cfg.window_s;
        if end > last.t + EPS {
            break;
        }
        let a = samples.partition_point(|s| s.t < start - EPS);
        let b = samples.partition_point(|s| s.t < end - EPS);
        out.push(a..b);
    }
    out
}

struct Candidate {
    window: usize,
    mode: MotionMode,
    axis: Vec3,
}

/// Candidate minimizing the summed angular distance to all others.
fn medoid(axes: &[Vec3]) -> Vec3 {
    // subsample long rides so the quadratic scan stays cheap
    let step = (axes.len() / 400).max(1);
    let pool: Vec<Vec3> = axes.iter().step_by(step).copied().collect();
    pool.iter()
        .map(|&a| (a, pool.iter().map(|&b| a.angle_to(b)).sum::<f64>()))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(a, _)| a)
        .expect("non-empty pool")
}

/// Robust spherical mean: start from the medoid (of turning windows when
/// present), keep candidates within `gate` of the running mean, re-average.
fn fuse_vertical(cands: &[Candidate], gate: f64) -> (Vec3, Vec<bool>) {
    let turning: Vec<Vec3> = cands.iter().filter(|c| c.mode == MotionMode::Turning).map(|c| c.axis).collect();
    let all: Vec<Vec3> = cands.iter().map(|c| c.axis).collect();
    let mut u = medoid(if turning.is_empty() { &all } else { &turning });
    let mut accepted = vec![false; cands.len()];
    for _ in 0..16 {
        let next: Vec<bool> = cands.iter().map(|c| c.axis.angle_to(u) <= gate).collect();
        let mean: Vec3 = cands.iter().zip(&next).filter(|(_, &ok)| ok).map(|(c, _)| c.axis).sum();
        let Some(mean) = mean.normalized() else { break };
        let stable = next == accepted;
        accepted = next;
        u = mean;
        if stable {
            break;
        }
    }
    (u, accepted)
}

/// Per-sample membership of the refined window classes.
#[derive(Default, Clone, Copy)]
struct Membership {
    level: bool,
    accel: bool,
    turn: bool,
    unknown: bool,
}

/// Estimates the device→vehicle rotation of a whole ride.
pub fn estimate_alignment(
    series: &SampleSeries,
    bias: &GyroBias,
    cfg: &AlignmentConfig,
) -> Result<AlignmentEstimate, AlignmentError> {
    cfg.validate()?;
    if series.frame() != Frame::Device {
        return Err(AlignmentError::WrongFrame(series.frame()));
    }
    let n = series.len();
    let duration = series.duration();
    if n < 2 || duration < cfg.min_duration_s {
        return Err(AlignmentError::InsufficientData(format!(
            "ride lasts {duration:.2} s, need at least {} s",
            cfg.min_duration_s
        )));
    }
    let rate = (n - 1) as f64 / duration;
    if rate < cfg.min_rate_hz {
        return Err(AlignmentError::InsufficientData(format!(
            "mean sample rate {rate:.2} Hz below {} Hz",
            cfg.min_rate_hz
        )));
    }

    let g = cfg.gravity.value();
    let ranges: Vec<Range<usize>> =
        window_ranges(series, cfg).into_iter().filter(|r| r.len() >= cfg.min_window_samples).collect();
    let mut modes = Vec::with_capacity(ranges.len());
    let mut stats = Vec::with_capacity(ranges.len());
    let mut cands = Vec::new();
    let mut first_degenerate: Option<AlignmentError> = None;

    for (w, r) in ranges.iter().enumerate() {
        let win = series.slice(r.clone());
        let st = MotionStats::of(&win, bias, g);
        let mut mode = classify_stats(&st, cfg);
        let estimate = match mode {
            MotionMode::Turning => Some(vertical_axis_from_gyro(&win, bias, cfg)),
            m if m.is_quasi_static() => Some(vertical_axis_from_gravity(&win, cfg)),
            _ => None,
        };
        match estimate {
            Some(Ok(axis)) => cands.push(Candidate { window: w, mode, axis }),
            Some(Err(AlignmentError::NotQuasiStatic { .. })) => {
                mode = if st.mean_rate <= cfg.accel_max_rate { MotionMode::Accelerating } else { MotionMode::Unknown };
            }
            Some(Err(e)) => {
                log::debug!("window at {:.2} s rejected: {e}", win.samples()[0].t);
                first_degenerate
                    .get_or_insert(AlignmentError::InWindow { t_start: win.samples()[0].t, source: Box::new(e) });
                mode = MotionMode::Unknown;
            }
            None => {}
        }
        modes.push(mode);
        stats.push(st);
    }

    if cands.is_empty() {
        return Err(first_degenerate.unwrap_or_else(|| {
            AlignmentError::InsufficientCoverage(
                "vertical alignment: no still, constant-speed or turning window".into(),
            )
        }));
    }

    let (up, accepted) = fuse_vertical(&cands, cfg.gate_angle());
    let mut vertical_windows = 0;
    let mut residual = 0.0;
    let mut tally = [0usize; 3];
    for (c, &ok) in cands.iter().zip(&accepted) {
        if ok {
            vertical_windows += 1;
            residual += c.axis.angle_to(up);
            tally[match c.mode {
                MotionMode::Turning => 0,
                MotionMode::Still => 1,
                _ => 2,
            }] += 1;
        } else {
            // tilted "quasi-static" window: a sustained horizontal push
            modes[c.window] = if c.mode.is_quasi_static() && stats[c.window].mean_rate <= cfg.accel_max_rate {
                MotionMode::Accelerating
            } else {
                MotionMode::Unknown
            };
        }
    }
    residual /= vertical_windows as f64;
    // most frequent source, earlier entry on ties
    let best = tally.iter().copied().max().unwrap_or(0);
    let mode_used = [MotionMode::Turning, MotionMode::Still, MotionMode::StraightConstantSpeed]
        .into_iter()
        .zip(tally)
        .find(|&(_, count)| count == best)
        .map(|(m, _)| m)
        .expect("three modes");

    let vertical = rotation_aligning_to_z(up)?;

    let mut member = vec![Membership::default(); n];
    for (r, mode) in ranges.iter().zip(&modes) {
        for m in &mut member[r.clone()] {
            match mode {
                MotionMode::Still | MotionMode::StraightConstantSpeed => m.level = true,
                MotionMode::Accelerating => m.accel = true,
                MotionMode::Turning => m.turn = true,
                MotionMode::Unknown => m.unknown = true,
            }
        }
    }
    // level windows that were rejected by the gate are no longer level
    for (c, &ok) in cands.iter().zip(&accepted) {
        if !ok && c.mode.is_quasi_static() {
            for m in &mut member[ranges[c.window].clone()] {
                m.level = false;
            }
        }
    }
    for m in &mut member {
        if m.level && (m.accel || m.turn || m.unknown) {
            m.level = false;
        }
    }

    let samples = series.samples();
    let aligned: Vec<Vec3> = samples.iter().map(|s| vertical.rotate(s.accel)).collect();
    let has_accel = modes.contains(&MotionMode::Accelerating);
    let has_turn = modes.contains(&MotionMode::Turning);

    let forward = if has_accel {
        let pick: Vec<usize> =
            (0..n).filter(|&i| (member[i].accel || member[i].level) && !member[i].turn && !member[i].unknown).collect();
        match principal_horizontal(&aligned, &pick) {
            Ok(m) => {
                let m = orient_by_speed(samples.iter().map(|s| s.t), &aligned, m);
                Some((m, HeadingSource::Acceleration, pick.len()))
            }
            Err(e) if !has_turn => return Err(e),
            Err(e) => {
                log::debug!("acceleration heading failed ({e}), falling back to turning windows");
                None
            }
        }
    } else {
        None
    };

    let (forward, heading_source, heading_samples) = match forward {
        Some(f) => f,
        None if has_turn => {
            let pick: Vec<usize> = (0..n)
                .filter(|&i| (member[i].turn || member[i].level) && !member[i].accel && !member[i].unknown)
                .collect();
            let lateral = principal_horizontal(&aligned, &pick)?;
            // centripetal acceleration points to the inside of the turn:
            // a_y = v·ω_z with v > 0
            let agreement: f64 = pick
                .iter()
                .filter(|&&i| member[i].turn)
                .map(|&i| aligned[i].dot(lateral) * vertical.rotate(bias.correct(samples[i].gyro)).z)
                .sum();
            let lateral = if agreement < 0.0 { -lateral } else { lateral };
            (Vec3::new(lateral.y, -lateral.x, 0.0), HeadingSource::Turning, pick.len())
        }
        None => {
            return Err(AlignmentError::InsufficientCoverage(
                "horizontal alignment: no accelerating or turning window".into(),
            ))
        }
    };

    let heading_phi = heading_angle(forward)?;
    let rotation = compose_heading(&vertical, heading_phi)?;
    Ok(AlignmentEstimate {
        vertical_axis: up,
        heading_phi,
        rotation,
        mode_used,
        sample_count: n,
        residual,
        vertical_windows,
        heading_source,
        heading_samples,
    })
}

/// Principal direction of the horizontal block of the covariance of the
/// selected vertically aligned accelerations.
fn principal_horizontal(aligned: &[Vec3], pick: &[usize]) -> Result<Vec3, AlignmentError> {
    if pick.len() < 2 {
        return Err(AlignmentError::InsufficientCoverage(
            "horizontal alignment: too few samples for covariance".into(),
        ));
    }
    let xs: Vec<f64> = pick.iter().map(|&i| aligned[i].x).collect();
    let ys: Vec<f64> = pick.iter().map(|&i| aligned[i].y).collect();
    let zs: Vec<f64> = pick.iter().map(|&i| aligned[i].z).collect();
    let cov = covariance_matrix(&xs, &ys, &zs)?;
    let (m, _) = principal_eigenvector(&cov.horizontal_block())?;
    Ok(m)
}

/// Chooses the sign of `m` so the speed obtained by integrating the
/// acceleration along it is on average positive (the vehicle drives forward).
fn orient_by_speed(times: impl Iterator<Item = f64>, aligned: &[Vec3], m: Vec3) -> Vec3 {
    let mut speed = 0.0;
    let mut area = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (t, a) in times.zip(aligned) {
        let p = a.x * m.x + a.y * m.y;
        if let Some((t0, p0)) = prev {
            let dt = t - t0;
            speed += 0.5 * (p0 + p) * dt;
            area += speed * dt;
        }
        prev = Some((t, p));
    }
    if area < 0.0 {
        -m
    } else {
        m
    }
}
