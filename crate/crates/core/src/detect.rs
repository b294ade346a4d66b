//! Comfort event detection on vehicle-frame, gravity-compensated signals and
//! per-ride scoring.
//!
//! Each channel is scanned for runs of samples beyond its threshold. Runs
//! shorter than `min_duration` are dropped, then runs of the same kind closer
//! than `merge_gap` are merged.
//!
//! The pothole channel (|a_z| after gravity removal) is experimental: its
//! default threshold has no measured basis.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imu::{Frame, ImuSample, SampleSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectError {
    #[error("expected vehicle frame, got {0}")]
    WrongFrame(Frame),
    #[error("ride duration must be positive, got {0}")]
    InvalidDuration(f64),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("invalid score weights: {0}")]
    InvalidWeights(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    FastAcceleration,
    HardBraking,
    AggressiveCornering,
    Pothole,
}

impl EventKind {
    pub const ALL: [EventKind; 4] =
        [EventKind::FastAcceleration, EventKind::HardBraking, EventKind::AggressiveCornering, EventKind::Pothole];

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::FastAcceleration => "fast_acceleration",
            EventKind::HardBraking => "hard_braking",
            EventKind::AggressiveCornering => "aggressive_cornering",
            EventKind::Pothole => "pothole",
        }
    }

    /// Signed value of the triggering channel.
    fn channel(self, s: &ImuSample) -> f64 {
        match self {
            EventKind::FastAcceleration | EventKind::HardBraking => s.accel.x,
            EventKind::AggressiveCornering => s.accel.y,
            EventKind::Pothole => s.accel.z,
        }
    }

    fn exceeds(self, v: f64, threshold: f64) -> bool {
        match self {
            EventKind::FastAcceleration => v > threshold,
            EventKind::HardBraking => v < -threshold,
            EventKind::AggressiveCornering | EventKind::Pothole => v.abs() > threshold,
        }
    }

    /// Whether `a` is a more extreme peak than `b` for this channel.
    fn more_extreme(self, a: f64, b: f64) -> bool {
        match self {
            EventKind::FastAcceleration => a > b,
            EventKind::HardBraking => a < b,
            EventKind::AggressiveCornering | EventKind::Pothole => a.abs() > b.abs(),
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Detection thresholds in m/s² and hysteresis in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Forward acceleration, on +a_x.
    pub accel_x: f64,
    /// Braking, on −a_x.
    pub brake_x: f64,
    /// Cornering, on |a_y|.
    pub lateral_y: f64,
    /// Potholes, on |a_z| after gravity removal.
    pub pothole_z: f64,
    pub min_duration: f64,
    pub merge_gap: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { accel_x: 5.0, brake_x: 5.0, lateral_y: 0.75, pothole_z: 3.0, min_duration: 0.2, merge_gap: 0.5 }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), DetectError> {
        for (name, v) in [
            ("accel_x", self.accel_x),
            ("brake_x", self.brake_x),
            ("lateral_y", self.lateral_y),
            ("pothole_z", self.pothole_z),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(DetectError::InvalidThresholds(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("min_duration", self.min_duration), ("merge_gap", self.merge_gap)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(DetectError::InvalidThresholds(format!("{name} must be ≥ 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn for_kind(&self, kind: EventKind) -> f64 {
        match kind {
            EventKind::FastAcceleration => self.accel_x,
            EventKind::HardBraking => self.brake_x,
            EventKind::AggressiveCornering => self.lateral_y,
            EventKind::Pothole => self.pothole_z,
        }
    }
}

/// A threshold-crossing episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComfortEvent {
    pub kind: EventKind,
    pub t_start: f64,
    pub t_end: f64,
    /// Extremal signed value of the triggering channel, m/s².
    pub peak: f64,
    /// Threshold in force, m/s².
    pub threshold: f64,
}

impl ComfortEvent {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// Runs of consecutive samples beyond the threshold, before any filtering.
pub fn raw_episodes(samples: &[ImuSample], kind: EventKind, threshold: f64) -> Vec<ComfortEvent> {
    let mut out: Vec<ComfortEvent> = Vec::new();
    let mut open: Option<ComfortEvent> = None;
    for s in samples {
        let v = kind.channel(s);
        if kind.exceeds(v, threshold) {
            match open.as_mut() {
                Some(ev) => {
                    ev.t_end = s.t;
                    if kind.more_extreme(v, ev.peak) {
                        ev.peak = v;
                    }
                }
                None => {
                    open = Some(ComfortEvent { kind, t_start: s.t, t_end: s.t, peak: v, threshold });
                }
            }
        } else if let Some(ev) = open.take() {
            out.push(ev);
        }
    }
    out.extend(open);
    out
}

fn filter_and_merge(raw: Vec<ComfortEvent>, th: &Thresholds) -> Vec<ComfortEvent> {
    let mut out: Vec<ComfortEvent> = Vec::new();
    for ev in raw.into_iter().filter(|e| e.duration() >= th.min_duration) {
        match out.last_mut() {
            Some(prev) if ev.t_start - prev.t_end < th.merge_gap => {
                prev.t_end = ev.t_end;
                if ev.kind.more_extreme(ev.peak, prev.peak) {
                    prev.peak = ev.peak;
                }
            }
            _ => out.push(ev),
        }
    }
    out
}

/// Detects comfort events on a vehicle-frame, filtered, gravity-compensated series.
pub fn detect_events(series: &SampleSeries, th: &Thresholds) -> Result<Vec<ComfortEvent>, DetectError> {
    if series.frame() != Frame::Vehicle {
        return Err(DetectError::WrongFrame(series.frame()));
    }
    th.validate()?;
    let mut events: Vec<ComfortEvent> = EventKind::ALL
        .iter()
        .flat_map(|&kind| filter_and_merge(raw_episodes(series.samples(), kind, th.for_kind(kind)), th))
        .collect();
    events.sort_by(|a, b| a.t_start.total_cmp(&b.t_start).then(a.kind.cmp(&b.kind)));
    Ok(events)
}

/// Score penalty per event kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreWeights {
    pub fast_acceleration: f64,
    pub hard_braking: f64,
    pub aggressive_cornering: f64,
    pub pothole: f64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        Self { fast_acceleration: 5.0, hard_braking: 5.0, aggressive_cornering: 3.0, pothole: 2.0 }
    }
}

impl ScoreWeights {
    pub fn for_kind(&self, kind: EventKind) -> f64 {
        match kind {
            EventKind::FastAcceleration => self.fast_acceleration,
            EventKind::HardBraking => self.hard_braking,
            EventKind::AggressiveCornering => self.aggressive_cornering,
            EventKind::Pothole => self.pothole,
        }
    }

    pub fn validate(&self) -> Result<(), DetectError> {
        for k in EventKind::ALL {
            let w = self.for_kind(k);
            if !(w.is_finite() && w >= 0.0) {
                return Err(DetectError::InvalidWeights(format!("{k} weight must be ≥ 0, got {w}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventCounts {
    pub fast_acceleration: usize,
    pub hard_braking: usize,
    pub aggressive_cornering: usize,
    pub pothole: usize,
}

impl EventCounts {
    pub fn tally(events: &[ComfortEvent]) -> Self {
        let mut c = EventCounts::default();
        for e in events {
            *c.get_mut(e.kind) += 1;
        }
        c
    }

    pub fn get(&self, kind: EventKind) -> usize {
        match kind {
            EventKind::FastAcceleration => self.fast_acceleration,
            EventKind::HardBraking => self.hard_braking,
            EventKind::AggressiveCornering => self.aggressive_cornering,
            EventKind::Pothole => self.pothole,
        }
    }

    fn get_mut(&mut self, kind: EventKind) -> &mut usize {
        match kind {
            EventKind::FastAcceleration => &mut self.fast_acceleration,
            EventKind::HardBraking => &mut self.hard_braking,
            EventKind::AggressiveCornering => &mut self.aggressive_cornering,
            EventKind::Pothole => &mut self.pothole,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RideReport {
    pub duration: f64,
    pub counts: EventCounts,
    pub events: Vec<ComfortEvent>,
    /// 100 minus the summed event weights, clamped to [0, 100].
    pub score: f64,
}

pub fn score_ride(events: &[ComfortEvent], duration: f64, weights: &ScoreWeights) -> Result<RideReport, DetectError> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(DetectError::InvalidDuration(duration));
    }
    weights.validate()?;
    let penalty: f64 = events.iter().map(|e| weights.for_kind(e.kind)).sum();
    Ok(RideReport {
        duration,
        counts: EventCounts::tally(events),
        events: events.to_vec(),
        score: (100.0 - penalty).clamp(0.0, 100.0),
    })
}
