//! Command-line front end: reads an IMU log (or generates one from a
//! scenario), runs the comfort pipeline and writes the reports.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser};
use ridecomfort::io::{parse_input, parse_scenario, report_json, write_events_jsonl, write_input_csv, write_plot_csv};
use ridecomfort::{generate_ride, run_pipeline, Config, SampleSeries};

const EXIT_PARSE: u8 = 3;
const EXIT_PIPELINE: u8 = 4;
const EXIT_OUTPUT: u8 = 5;

/// Detect comfort events in a smartphone IMU log and score the ride.
#[derive(Debug, Parser)]
#[command(name = "ridecomfort", version, group(ArgGroup::new("source").required(true).args(["input", "synth"])))]
struct Args {
    /// CSV log with header `t_s,ax,ay,az,gx,gy,gz` (SI units, device frame).
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// JSON scenario to generate a synthetic ride from instead of reading a log.
    #[arg(long, value_name = "SCENARIO_PATH")]
    synth: Option<PathBuf>,
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Low-pass time constant in seconds.
    #[arg(long, value_name = "S")]
    time_constant: Option<f64>,
    /// Fast-acceleration threshold, m/s².
    #[arg(long, value_name = "M_S2")]
    accel_threshold: Option<f64>,
    /// Hard-braking threshold, m/s².
    #[arg(long, value_name = "M_S2")]
    brake_threshold: Option<f64>,
    /// Cornering threshold on |a_y|, m/s².
    #[arg(long, value_name = "M_S2")]
    lateral_threshold: Option<f64>,
    /// Pothole threshold on |a_z| after gravity removal, m/s².
    #[arg(long, value_name = "M_S2")]
    pothole_threshold: Option<f64>,
    /// Report JSON destination; stdout when absent.
    #[arg(long, value_name = "PATH")]
    report: Option<PathBuf>,
    /// Events as JSON Lines.
    #[arg(long, value_name = "PATH")]
    events: Option<PathBuf>,
    /// Vehicle-frame `t_s,ax,ay,az` CSV after gravity removal.
    #[arg(long, value_name = "PATH")]
    emit_plot_data: Option<PathBuf>,
    /// With --synth: also write the generated device-frame log as input CSV.
    #[arg(long, value_name = "PATH", requires = "synth", conflicts_with = "input")]
    emit_synth_csv: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Parse(String),
    Pipeline(String),
    Output(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => EXIT_PARSE,
            Failure::Pipeline(_) => EXIT_PIPELINE,
            Failure::Output(_) => EXIT_OUTPUT,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Pipeline(m) | Failure::Output(m) => m,
        }
    }
}

fn load_config(args: &Args) -> Result<Config, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
            Config::from_toml(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?
        }
        None => Config::default(),
    };
    if let Some(t) = args.time_constant {
        cfg.time_constant = t;
    }
    let th = &mut cfg.thresholds;
    for (flag, slot) in [
        (args.accel_threshold, &mut th.accel_x),
        (args.brake_threshold, &mut th.brake_x),
        (args.lateral_threshold, &mut th.lateral_y),
        (args.pothole_threshold, &mut th.pothole_z),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    cfg.validate().map_err(|e| Failure::Parse(e.to_string()))?;
    Ok(cfg)
}

fn load_series(args: &Args, cfg: &Config) -> Result<SampleSeries, Failure> {
    if let Some(path) = &args.input {
        let file = File::open(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
        return parse_input(BufReader::new(file)).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())));
    }
    let path = args.synth.as_ref().expect("clap requires a source");
    let text = fs::read_to_string(path).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    let scenario = parse_scenario(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    let (series, _) =
        generate_ride(&scenario, cfg.gravity).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))?;
    if let Some(out) = &args.emit_synth_csv {
        write_file(out, |w| write_input_csv(&series, w))?;
    }
    Ok(series)
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), Failure> {
    let file = File::create(path).map_err(|e| Failure::Output(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    f(&mut w).map_err(|e| Failure::Output(format!("{}: {e}", path.display())))
}

fn run(args: &Args) -> Result<(), Failure> {
    let cfg = load_config(args)?;
    let series = load_series(args, &cfg)?;
    log::info!("{} samples over {:.2} s", series.len(), series.duration());
    let out = run_pipeline(&series, &cfg).map_err(|e| Failure::Pipeline(e.to_string()))?;
    let report = report_json(&out.report, &out.alignment);
    match &args.report {
        Some(path) => write_file(path, |w| w.write_all(report.as_bytes()))?,
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(report.as_bytes()).map_err(|e| Failure::Output(format!("stdout: {e}")))?;
        }
    }
    if let Some(path) = &args.events {
        write_file(path, |w| write_events_jsonl(&out.report.events, w))?;
    }
    if let Some(path) = &args.emit_plot_data {
        write_file(path, |w| write_plot_csv(&out.vehicle, w))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::new().filter_level(log::LevelFilter::Warn).init();
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
