//! End-to-end ride processing: calibrate → filter → align → transform →
//! remove gravity → detect → score.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alignment::{
    classify_motion, estimate_alignment, AlignmentConfig, AlignmentError, AlignmentEstimate, MotionMode,
};
use crate::detect::{detect_events, score_ride, DetectError, RideReport, ScoreWeights, Thresholds};
use crate::filter::{
    calibrate_gyro_bias, lowpass_series, remove_gravity, AlphaMode, FilterError, FilterParams, GyroBias,
    MIN_CALIBRATION_SAMPLES,
};
use crate::imu::{apply_rotation_series, Gravity, ImuError, SampleSeries};

/// Minimum length of a still prefix used for gyro calibration, seconds.
pub const CALIBRATION_PREFIX_S: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Low-pass time constant, seconds.
    pub time_constant: f64,
    pub alpha_mode: AlphaMode,
    pub gravity: Gravity,
    pub thresholds: Thresholds,
    pub alignment: AlignmentConfig,
    pub weights: ScoreWeights,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            time_constant: 0.5,
            alpha_mode: AlphaMode::Tracking,
            gravity: Gravity::default(),
            thresholds: Thresholds::default(),
            alignment: AlignmentConfig::default(),
            weights: ScoreWeights::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        let cfg: Config = toml::from_str(text).map_err(|e| PipelineError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn filter_params(&self) -> Result<FilterParams, PipelineError> {
        FilterParams::new(self.time_constant, self.alpha_mode).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// Alignment settings with the configured gravity applied.
    pub fn alignment_config(&self) -> AlignmentConfig {
        AlignmentConfig { gravity: self.gravity, ..self.alignment }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let g = self.gravity.value();
        if !(g.is_finite() && g > 0.0) {
            return Err(PipelineError::Config(format!("gravity must be positive, got {g}")));
        }
        self.filter_params()?;
        let cfg_err = |e: &dyn std::fmt::Display| PipelineError::Config(e.to_string());
        self.thresholds.validate().map_err(|e| cfg_err(&e))?;
        self.weights.validate().map_err(|e| cfg_err(&e))?;
        self.alignment_config().validate().map_err(|e| cfg_err(&e))?;
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("calibration stage: {0}")]
    Calibrate(FilterError),
    #[error("filter stage: {0}")]
    Filter(FilterError),
    #[error("alignment stage: {0}")]
    Align(AlignmentError),
    #[error("transform stage: {0}")]
    Transform(ImuError),
    #[error("gravity stage: {0}")]
    Gravity(FilterError),
    #[error("detection stage: {0}")]
    Detect(DetectError),
    #[error("scoring stage: {0}")]
    Score(DetectError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub report: RideReport,
    pub alignment: AlignmentEstimate,
    pub bias: GyroBias,
    /// Vehicle-frame, bias-corrected, gravity-removed series.
    pub vehicle: SampleSeries,
}

/// Gyro bias from the still prefix of the ride, if there is one.
///
/// The prefix grows window by window while each window classifies as still
/// and must reach [`CALIBRATION_PREFIX_S`].
pub fn calibrate_from_prefix(series: &SampleSeries, cfg: &Config) -> Result<Option<GyroBias>, PipelineError> {
    let acfg = cfg.alignment_config();
    let s = series.samples();
    let Some(t0) = s.first().map(|x| x.t) else {
        return Ok(None);
    };
    let mut end = 0;
    loop {
        let start_t = t0 + end as f64 * acfg.hop_s;
        let lo = s.partition_point(|x| x.t < start_t);
        let hi = s.partition_point(|x| x.t < start_t + acfg.window_s);
        if hi - lo < acfg.min_window_samples || s.last().is_none_or(|x| x.t < start_t + acfg.window_s - 1e-9) {
            break;
        }
        match classify_motion(&series.slice(lo..hi), &GyroBias::ZERO, &acfg) {
            Ok(MotionMode::Still) => end += 1,
            _ => break,
        }
    }
    if end == 0 {
        return Ok(None);
    }
    let prefix_end_t = t0 + (end - 1) as f64 * acfg.hop_s + acfg.window_s;
    let hi = s.partition_point(|x| x.t < prefix_end_t);
    if s[hi - 1].t - t0 < CALIBRATION_PREFIX_S - 1.0 / acfg.min_rate_hz || hi < MIN_CALIBRATION_SAMPLES {
        return Ok(None);
    }
    calibrate_gyro_bias(&series.slice(0..hi)).map(Some).map_err(PipelineError::Calibrate)
}

pub fn run_pipeline(series: &SampleSeries, cfg: &Config) -> Result<PipelineOutput, PipelineError> {
    cfg.validate()?;
    let bias = match calibrate_from_prefix(series, cfg)? {
        Some(b) => b,
        None => {
            log::warn!("no still prefix of {CALIBRATION_PREFIX_S} s; gyro bias assumed zero");
            GyroBias::ZERO
        }
    };
    let filtered = lowpass_series(series, &cfg.filter_params()?).map_err(PipelineError::Filter)?;
    let alignment = estimate_alignment(&filtered, &bias, &cfg.alignment_config()).map_err(PipelineError::Align)?;
    let vehicle =
        apply_rotation_series(&alignment.rotation, &bias.remove_from(&filtered)).map_err(PipelineError::Transform)?;
    let vehicle = remove_gravity(&vehicle, cfg.gravity).map_err(PipelineError::Gravity)?;
    let events = detect_events(&vehicle, &cfg.thresholds).map_err(PipelineError::Detect)?;
    let report = score_ride(&events, series.duration(), &cfg.weights).map_err(PipelineError::Score)?;
    Ok(PipelineOutput { report, alignment, bias, vehicle })
}
