//! File formats: IMU CSV logs, JSON reports, JSON Lines events, plot CSV
//! and scenario documents.

use std::io::{Read, Write};

use serde::Serialize;
use thiserror::Error;

use crate::alignment::AlignmentEstimate;
use crate::detect::{ComfortEvent, EventCounts, RideReport};
use crate::imu::{Frame, ImuSample, SampleSeries, Vec3};
use crate::synth::Scenario;

pub const INPUT_HEADER: &str = "t_s,ax,ay,az,gx,gy,gz";
pub const PLOT_HEADER: &str = "t_s,ax,ay,az";

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("missing header: expected `{INPUT_HEADER}`, found `{found}`")]
    MissingHeader { found: String },
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("line {line}: timestamp {t} does not increase")]
    NonMonotoneTimestamp { line: u64, t: f64 },
    #[error("input has no data rows")]
    EmptyInput,
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}

/// Reads a device-frame series from CSV with header `t_s,ax,ay,az,gx,gy,gz`.
pub fn parse_input(reader: impl Read) -> Result<SampleSeries, ParseError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(ParseError::EmptyInput),
        Some(r) => r.map_err(|e| csv_error(e, 1))?,
    };
    let found = header.iter().collect::<Vec<_>>().join(",");
    if found != INPUT_HEADER {
        return Err(ParseError::MissingHeader { found });
    }
    let mut samples: Vec<ImuSample> = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(e, 0))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 7 {
            return Err(ParseError::MalformedRow { line, reason: format!("expected 7 fields, got {}", rec.len()) });
        }
        let mut v = [0.0; 7];
        for (k, field) in rec.iter().enumerate() {
            let x: f64 = field.trim().parse().map_err(|_| ParseError::MalformedRow {
                line,
                reason: format!("field {} (`{field}`) is not a number", k + 1),
            })?;
            if !x.is_finite() {
                return Err(ParseError::MalformedRow { line, reason: format!("field {} is not finite", k + 1) });
            }
            v[k] = x;
        }
        if samples.last().is_some_and(|p| v[0] <= p.t) {
            return Err(ParseError::NonMonotoneTimestamp { line, t: v[0] });
        }
        samples.push(ImuSample::new(v[0], Vec3::new(v[1], v[2], v[3]), Vec3::new(v[4], v[5], v[6]), Frame::Device));
    }
    if samples.is_empty() {
        return Err(ParseError::EmptyInput);
    }
    Ok(SampleSeries::new(samples, Frame::Device).expect("rows validated"))
}

fn csv_error(e: csv::Error, fallback_line: u64) -> ParseError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => ParseError::Io(io),
        other => ParseError::MalformedRow { line, reason: format!("{other:?}") },
    }
}

/// Writes a series in the input CSV format. Numbers use the shortest
/// representation that parses back to the same `f64`.
pub fn write_input_csv(series: &SampleSeries, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{INPUT_HEADER}")?;
    for s in series.samples() {
        writeln!(w, "{},{},{},{},{},{},{}", s.t, s.accel.x, s.accel.y, s.accel.z, s.gyro.x, s.gyro.y, s.gyro.z)?;
    }
    w.flush()
}

/// Writes `t_s,ax,ay,az` rows of a vehicle-frame series.
pub fn write_plot_csv(series: &SampleSeries, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "{PLOT_HEADER}")?;
    for s in series.samples() {
        writeln!(w, "{},{},{},{}", s.t, s.accel.x, s.accel.y, s.accel.z)?;
    }
    w.flush()
}

#[derive(Serialize)]
struct AlignmentSummary<'a> {
    vertical_axis: [f64; 3],
    heading_rad: f64,
    residual_rad: f64,
    mode_used: &'a str,
}

#[derive(Serialize)]
struct ReportDocument<'a> {
    duration_s: f64,
    score: f64,
    counts: &'a EventCounts,
    alignment: AlignmentSummary<'a>,
    events: &'a [ComfortEvent],
}

/// Pretty-printed report JSON with a trailing newline.
pub fn report_json(report: &RideReport, alignment: &AlignmentEstimate) -> String {
    let doc = ReportDocument {
        duration_s: report.duration,
        score: report.score,
        counts: &report.counts,
        alignment: AlignmentSummary {
            vertical_axis: alignment.vertical_axis.to_array(),
            heading_rad: alignment.heading_phi,
            residual_rad: alignment.residual,
            mode_used: alignment.mode_used.as_str(),
        },
        events: &report.events,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

/// One JSON object per line.
pub fn write_events_jsonl(events: &[ComfortEvent], mut w: impl Write) -> std::io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn parse_scenario(text: &str) -> Result<Scenario, serde_json::Error> {
    serde_json::from_str(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::{HeadingSource, MotionMode};
    use crate::detect::EventKind;
    use crate::imu::Rotation;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<SampleSeries, ParseError> {
        parse_input(text.as_bytes())
    }

    #[test]
    fn header_and_one_row() {
        let s = parse("t_s,ax,ay,az,gx,gy,gz\n0.0,0,0,9.8,0.1,0,0\n").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.samples()[0].accel.z, 9.8);
        assert_eq!(s.frame(), Frame::Device);
    }

    #[test]
    fn six_fields_is_malformed_at_its_line() {
        let err = parse("t_s,ax,ay,az,gx,gy,gz\n0,0,0,9.8,0,0,0\n0.1,0,0,9.8,0,0\n").unwrap_err();
        assert!(matches!(err, ParseError::MalformedRow { line: 3, .. }), "{err}");
    }

    #[test]
    fn equal_timestamps_reported_at_line_three() {
        let err = parse("t_s,ax,ay,az,gx,gy,gz\n0,0,0,9.8,0,0,0\n0,0,0,9.8,0,0,0\n").unwrap_err();
        assert!(matches!(err, ParseError::NonMonotoneTimestamp { line: 3, .. }), "{err}");
    }

    #[test]
    fn header_and_content_errors() {
        assert!(matches!(parse(""), Err(ParseError::EmptyInput)));
        assert!(matches!(parse("t_s,ax,ay,az,gx,gy,gz\n"), Err(ParseError::EmptyInput)));
        assert!(matches!(parse("0,0,0,9.8,0,0,0\n"), Err(ParseError::MissingHeader { .. })));
        assert!(matches!(parse("t,ax,ay,az,gx,gy,gz\n0,0,0,0,0,0,0\n"), Err(ParseError::MissingHeader { .. })));
        let err = parse("t_s,ax,ay,az,gx,gy,gz\n0,0,x,9.8,0,0,0\n").unwrap_err();
        assert!(matches!(err, ParseError::MalformedRow { line: 2, .. }));
        let err = parse("t_s,ax,ay,az,gx,gy,gz\n0,0,NaN,9.8,0,0,0\n").unwrap_err();
        assert!(matches!(err, ParseError::MalformedRow { line: 2, .. }));
    }

    fn estimate() -> AlignmentEstimate {
        AlignmentEstimate {
            vertical_axis: Vec3::Z,
            heading_phi: 0.0,
            rotation: Rotation::IDENTITY,
            mode_used: MotionMode::Still,
            sample_count: 10,
            residual: 0.0,
            vertical_windows: 1,
            heading_source: HeadingSource::Acceleration,
            heading_samples: 10,
        }
    }

    #[test]
    fn empty_report_schema() {
        let report = RideReport { duration: 12.0, counts: EventCounts::default(), events: vec![], score: 100.0 };
        let text = report_json(&report, &estimate());
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["events"], serde_json::json!([]));
        assert_eq!(v["score"], 100.0);
        assert_eq!(v["alignment"]["vertical_axis"], serde_json::json!([0.0, 0.0, 1.0]));
        assert_eq!(v["alignment"]["mode_used"], "still");
        let keys: Vec<_> = ["\"duration_s\"", "\"score\"", "\"counts\"", "\"alignment\"", "\"events\""]
            .iter()
            .map(|k| text.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]), "field order");
    }

    #[test]
    fn one_event_one_jsonl_line() {
        let e = ComfortEvent { kind: EventKind::HardBraking, t_start: 1.0, t_end: 1.5, peak: -6.0, threshold: 5.0 };
        let mut buf = Vec::new();
        write_events_jsonl(&[e], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert_eq!(text, "{\"kind\":\"hard_braking\",\"t_start\":1.0,\"t_end\":1.5,\"peak\":-6.0,\"threshold\":5.0}\n");
    }

    #[test]
    fn plot_csv_preserves_length() {
        let s = SampleSeries::new(
            (0..17).map(|i| ImuSample::new(i as f64, Vec3::X, Vec3::ZERO, Frame::Vehicle)).collect(),
            Frame::Vehicle,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_plot_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 18);
        assert_eq!(text.lines().next(), Some(PLOT_HEADER));
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e3..1e3f64, any::<f64>().prop_filter("finite", |x| x.is_finite())]
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_bit_identical(
            rows in prop::collection::vec((0.0..1.0f64, finite(), finite(), finite(), finite(), finite(), finite()), 1..40)
        ) {
            let mut t = 0.0;
            let samples: Vec<ImuSample> = rows
                .iter()
                .map(|r| {
                    t += 1e-3 + r.0;
                    ImuSample::new(t, Vec3::new(r.1, r.2, r.3), Vec3::new(r.4, r.5, r.6), Frame::Device)
                })
                .collect();
            let series = SampleSeries::new(samples, Frame::Device).unwrap();
            let mut buf = Vec::new();
            write_input_csv(&series, &mut buf).unwrap();
            let back = parse_input(buf.as_slice()).unwrap();
            let mut again = Vec::new();
            write_input_csv(&back, &mut again).unwrap();
            prop_assert_eq!(&buf, &again);
            for (a, b) in series.samples().iter().zip(back.samples()) {
                prop_assert_eq!(a.t.to_bits(), b.t.to_bits());
                prop_assert_eq!(a.accel.to_array().map(f64::to_bits), b.accel.to_array().map(f64::to_bits));
                prop_assert_eq!(a.gyro.to_array().map(f64::to_bits), b.gyro.to_array().map(f64::to_bits));
            }
        }
    }
}
