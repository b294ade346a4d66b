//! Smartphone IMU ride-comfort analysis.
//!
//! Raw device-frame accelerometer and gyroscope logs are smoothed, rotated
//! into the vehicle frame, compensated for gravity and scanned for
//! comfort-reducing events: fast acceleration, hard braking, aggressive
//! cornering and potholes. Each ride gets a 0–100 comfort score.
//!
//! [`synth`] generates rides with exact ground truth for testing.

pub mod alignment;
pub mod detect;
pub mod filter;
pub mod imu;
pub mod io;
pub mod pipeline;
pub mod synth;

pub use alignment::{estimate_alignment, AlignmentConfig, AlignmentError, AlignmentEstimate, MotionMode};
pub use detect::{detect_events, score_ride, ComfortEvent, EventKind, RideReport, ScoreWeights, Thresholds};
pub use filter::{calibrate_gyro_bias, lowpass_series, remove_gravity, AlphaMode, FilterParams, GyroBias};
pub use imu::{Frame, Gravity, ImuSample, Rotation, SampleSeries, Vec3, STANDARD_GRAVITY};
pub use pipeline::{run_pipeline, Config, PipelineError, PipelineOutput};
pub use synth::{generate_ride, GroundTruth, Scenario, Segment};
