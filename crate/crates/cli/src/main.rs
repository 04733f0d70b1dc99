//! `cloudtrack` command-line driver: run the pipeline on a sequence, sweep a
//! parameter, or generate a synthetic sequence on disk.
//!
//! On failure a machine-readable JSON error is written to stderr and the
//! process exits nonzero.

use clap::{Args, Parser, Subcommand};
use cloudtrack::config::PipelineConfig;
use cloudtrack::error::Error as CoreError;
use cloudtrack::lifecycle::Mode;
use cloudtrack::pipeline::{self, SequenceData};
use cloudtrack::scene_io::SyntheticScenario;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "cloudtrack", version, about = "Simultaneous classification and tracking over 3D point-cloud streams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline over a sequence and write the evaluation artifacts.
    Run(RunArgs),
    /// Re-run the pipeline for each value of one parameter.
    Sweep(SweepArgs),
    /// Generate a synthetic sequence on disk from a scenario description.
    Gen(GenArgs),
}

#[derive(Args)]
struct CommonRunArgs {
    /// Pipeline configuration JSON; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input sequence: a directory of .bin clouds or a scenario .json.
    #[arg(long)]
    input: PathBuf,
    /// Override the configured mode: det_only, efficient, or accurate.
    #[arg(long)]
    mode: Option<String>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonRunArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    /// Parameter to sweep (e.g. range, alpha_indep, start_frames).
    #[arg(long)]
    param: String,
    /// Comma-separated values, e.g. 10,20,30.
    #[arg(long)]
    values: String,
}

#[derive(Args)]
struct GenArgs {
    /// Scenario description JSON.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for the generated sequence.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct ErrorBody {
    kind: String,
    message: String,
}

#[derive(Serialize)]
struct ErrorEnvelope {
    error: ErrorBody,
}

fn error_kind(err: &CoreError) -> &'static str {
    match err {
        CoreError::Format(_) => "format",
        CoreError::Data(_) => "data",
        CoreError::Parse { .. } => "parse",
        CoreError::IllegalTransition { .. } => "illegal_transition",
        CoreError::Numeric(_) => "numeric",
        CoreError::Config(_) => "config",
        CoreError::Undefined(_) => "undefined",
        CoreError::Io { .. } => "io",
        CoreError::Json(_) => "json",
    }
}

fn emit_error(kind: &str, message: String) {
    let env = ErrorEnvelope {
        error: ErrorBody {
            kind: kind.to_string(),
            message,
        },
    };
    eprintln!("{}", serde_json::to_string(&env).unwrap());
}

fn exit_code(err: &CoreError) -> i32 {
    match err {
        CoreError::Config(_) => 2,
        _ => 1,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            emit_error("usage", e.to_string());
            std::process::exit(2);
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Gen(args) => cmd_gen(&args),
    };
    if let Err(e) = result {
        emit_error(error_kind(&e), e.to_string());
        std::process::exit(exit_code(&e));
    }
}

fn load_config(common: &CommonRunArgs) -> Result<PipelineConfig, CoreError> {
    let mut config = match &common.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(mode) = &common.mode {
        config.mode = match mode.as_str() {
            "det_only" => Mode::DetOnly,
            "efficient" => Mode::Efficient,
            "accurate" => Mode::Accurate,
            other => {
                return Err(CoreError::Config(format!(
                    "unknown mode {other:?}; expected det_only, efficient, or accurate"
                )))
            }
        };
    }
    Ok(config)
}

fn load_input(path: &Path, config: &PipelineConfig) -> Result<SequenceData, CoreError> {
    if path.is_dir() {
        SequenceData::from_directory(path, config.frame_dt)
    } else if path.extension().map(|e| e == "json").unwrap_or(false) {
        SequenceData::from_scenario_file(path)
    } else {
        Err(CoreError::Config(format!(
            "input must be a directory or a scenario .json: {}",
            path.display()
        )))
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), CoreError> {
    let config = load_config(&args.common)?;
    let data = load_input(&args.common.input, &config)?;
    let output = pipeline::run(&config, &data)?;
    pipeline::write_outputs(&args.common.out, &output)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&output.report)?
    );
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CoreError> {
    let config = load_config(&args.common)?;
    let data = load_input(&args.common.input, &config)?;
    let values: Vec<f64> = args
        .values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CoreError::Config(format!("bad sweep value {v:?}")))
        })
        .collect::<Result<_, _>>()?;
    let rows = pipeline::sweep(&config, &args.param, &values, &data)?;
    pipeline::write_sweep(&args.common.out, &rows)?;
    println!("{}", serde_json::to_string_pretty(&rows)?);
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<(), CoreError> {
    let text = std::fs::read_to_string(&args.scenario)
        .map_err(|e| CoreError::io(args.scenario.display().to_string(), e))?;
    let scenario: SyntheticScenario = serde_json::from_str(&text)?;
    let data = SequenceData::from_scenario(&scenario)?;
    write_sequence(&args.out, &data)?;
    println!(
        "{}",
        serde_json::to_string(&serde_json::json!({
            "frames": data.frames.len(),
            "ground_truth_objects": data.ground_truth.len(),
            "out": args.out.display().to_string(),
        }))?
    );
    Ok(())
}

/// Write a sequence in the on-disk layout `run` accepts: numbered `.bin`
/// clouds, `poses.csv`, and `labels.txt` with identity calibration.
fn write_sequence(dir: &Path, data: &SequenceData) -> Result<(), CoreError> {
    std::fs::create_dir_all(dir).map_err(|e| CoreError::io(dir.display().to_string(), e))?;
    for frame in &data.frames {
        let mut buf = Vec::with_capacity(frame.points.len() * 16);
        for p in &frame.points {
            for v in [p[0] as f32, p[1] as f32, p[2] as f32, 0.0f32] {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let path = dir.join(format!("{:06}.bin", frame.index));
        std::fs::write(&path, buf).map_err(|e| CoreError::io(path.display().to_string(), e))?;
    }

    let mut poses = String::from("frame,x,y,heading\n");
    for frame in &data.frames {
        poses.push_str(&format!(
            "{},{},{},{}\n",
            frame.index, frame.ego_pose.x, frame.ego_pose.y, frame.ego_pose.heading
        ));
    }
    let poses_path = dir.join("poses.csv");
    std::fs::write(&poses_path, poses)
        .map_err(|e| CoreError::io(poses_path.display().to_string(), e))?;

    // labels use the camera-style convention with identity calibration:
    // ry = wrap(-yaw - pi/2), z at the box bottom
    let mut labels = String::new();
    for gt in &data.ground_truth {
        let class_name = match gt.class {
            cloudtrack::ClassId::Car => "Car",
            cloudtrack::ClassId::Pedestrian => "Pedestrian",
            cloudtrack::ClassId::Cyclist => "Cyclist",
            cloudtrack::ClassId::Background => "Van",
        };
        let b = &gt.bbox;
        let ry = cloudtrack::geometry::wrap_pi(-b.yaw - std::f64::consts::FRAC_PI_2);
        labels.push_str(&format!(
            "{} {} {} 0 0 0 0 0 0 0 {} {} {} {} {} {} {}\n",
            gt.frame_index,
            gt.track_id,
            class_name,
            b.h,
            b.w,
            b.l,
            b.x,
            b.y,
            b.z - b.h / 2.0,
            ry
        ));
    }
    let labels_path = dir.join("labels.txt");
    std::fs::write(&labels_path, labels)
        .map_err(|e| CoreError::io(labels_path.display().to_string(), e))?;
    Ok(())
}
