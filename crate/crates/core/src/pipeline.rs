//! End-to-end runs: load a sequence, drive the per-frame orchestrator,
//! evaluate, and write artifacts.

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evaluation::{
    self, Detection, EvalReport, PrCurve,
};
use crate::geometry::OrientedBox;
use crate::lifecycle::{
    process_frame, FrameContext, FsmEvent, StepConfig, World,
};
use crate::scene_io::{
    self, generate_synthetic, read_poses, Frame, GroundTruthObject, SyntheticScenario,
};
use crate::segmentation::{self, Proposal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

/// A fully loaded sequence: sensor-frame point clouds with ego poses, and
/// world-frame ground truth.
#[derive(Debug, Clone, Default)]
pub struct SequenceData {
    pub frames: Vec<Frame>,
    pub ground_truth: Vec<GroundTruthObject>,
}

impl SequenceData {
    /// Generate from a synthetic scenario description.
    pub fn from_scenario(scenario: &SyntheticScenario) -> Result<SequenceData> {
        let samples = generate_synthetic(scenario)?;
        let mut frames = Vec::with_capacity(samples.len());
        let mut ground_truth = Vec::new();
        for s in samples {
            ground_truth.extend(s.ground_truth);
            frames.push(s.frame);
        }
        Ok(SequenceData {
            frames,
            ground_truth,
        })
    }

    pub fn from_scenario_file(path: &Path) -> Result<SequenceData> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let scenario: SyntheticScenario = serde_json::from_str(&text)?;
        Self::from_scenario(&scenario)
    }

    /// Load a directory of numbered `.bin` point clouds, with optional
    /// `poses.csv`, `labels.txt`, and `calib.txt`.
    pub fn from_directory(dir: &Path, frame_dt: f64) -> Result<SequenceData> {
        let entries =
            std::fs::read_dir(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let mut bins: Vec<std::path::PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().map(|e| e == "bin").unwrap_or(false))
            .collect();
        bins.sort();
        if bins.is_empty() {
            return Err(Error::Data(format!(
                "no .bin point clouds in {}",
                dir.display()
            )));
        }
        let poses: BTreeMap<usize, crate::geometry::Pose2> = {
            let p = dir.join("poses.csv");
            if p.exists() {
                read_poses(&p)?.into_iter().collect()
            } else {
                BTreeMap::new()
            }
        };
        let mut frames = Vec::with_capacity(bins.len());
        for (k, bin) in bins.iter().enumerate() {
            let points = scene_io::read_point_cloud(bin)?;
            frames.push(Frame {
                index: k,
                timestamp: k as f64 * frame_dt,
                points,
                ego_pose: poses
                    .get(&k)
                    .copied()
                    .unwrap_or_else(crate::geometry::Pose2::identity),
            });
        }
        let mut ground_truth = Vec::new();
        let labels = dir.join("labels.txt");
        if labels.exists() {
            let calib_path = dir.join("calib.txt");
            let calib = if calib_path.exists() {
                scene_io::read_calib(&calib_path)?
            } else {
                scene_io::CalibVeloToCam::identity()
            };
            // labels are in the sensor frame of their own frame index; move
            // them into the world frame with that frame's ego pose
            for gt in scene_io::read_tracking_labels(&labels, &calib)? {
                let world_box = frames
                    .get(gt.frame_index)
                    .map(|f| scene_io::box_to_world(f, &gt.bbox))
                    .unwrap_or(gt.bbox);
                ground_truth.push(GroundTruthObject {
                    bbox: world_box,
                    ..gt
                });
            }
        }
        Ok(SequenceData {
            frames,
            ground_truth,
        })
    }
}

/// Everything a run produces before anything touches the filesystem.
#[derive(Debug)]
pub struct RunOutput {
    pub report: EvalReport,
    pub events: Vec<FsmEvent>,
    pub detections: Vec<Detection>,
    pub curves: Vec<PrCurve>,
    /// Ground truth retained for scoring (inside the region of interest).
    pub scored_ground_truth: Vec<GroundTruthObject>,
    /// Final track table, including deleted tracks.
    pub world: World,
}

fn in_roi(bbox: &OrientedBox, ego: &crate::geometry::Pose2, range: f64) -> bool {
    let dx = bbox.x - ego.x;
    let dy = bbox.y - ego.y;
    dx.hypot(dy) <= range
}

/// Proposals straight from ground truth: each in-range box becomes a
/// proposal whose point count is the number of sensor points inside it.
/// Boxes that captured no points are invisible and emit nothing.
fn ideal_proposals(frame: &Frame, gts: &[&GroundTruthObject]) -> Vec<Proposal> {
    let inv = frame.ego_pose.inverse();
    let mut out = Vec::new();
    for gt in gts {
        let sensor_box = gt.bbox.transformed(&inv);
        let count = frame
            .points
            .iter()
            .filter(|p| {
                sensor_box.contains_bev(p[0], p[1])
                    && p[2] >= sensor_box.z - sensor_box.h / 2.0 - 0.2
                    && p[2] <= sensor_box.z + sensor_box.h / 2.0 + 0.2
            })
            .count();
        if count == 0 {
            continue;
        }
        out.push(Proposal {
            bbox: sensor_box,
            centroid: [sensor_box.x, sensor_box.y, sensor_box.z],
            point_count: count,
            points: vec![],
        });
    }
    out
}

/// Run the full pipeline over one sequence.
pub fn run(config: &PipelineConfig, data: &SequenceData) -> Result<RunOutput> {
    config.validate()?;
    let classifier = config.classifier.build()?;

    let mut gt_by_frame: BTreeMap<usize, Vec<&GroundTruthObject>> = BTreeMap::new();
    for gt in &data.ground_truth {
        gt_by_frame.entry(gt.frame_index).or_default().push(gt);
    }

    let mut world = World::new();
    let mut events: Vec<FsmEvent> = Vec::new();
    let mut detections: Vec<Detection> = Vec::new();
    let mut assignments: Vec<(u64, i64)> = Vec::new();
    let mut scored_gt: Vec<GroundTruthObject> = Vec::new();
    let mut baseline_calls: u64 = 0;
    let mut proposal_total: usize = 0;

    let step_cfg = StepConfig {
        mode: config.mode,
        classifier: classifier.as_ref(),
        lifecycle: &config.lifecycle,
        association: &config.association,
        noise: &config.noise,
        fusion: &config.fusion,
        gt_min_iou: config.gt_min_iou,
    };

    for frame in &data.frames {
        let ego = frame.ego_pose;
        let frame_gt: Vec<&GroundTruthObject> = gt_by_frame
            .get(&frame.index)
            .map(|v| {
                v.iter()
                    .filter(|g| in_roi(&g.bbox, &ego, config.roi_range))
                    .copied()
                    .collect()
            })
            .unwrap_or_default();
        scored_gt.extend(frame_gt.iter().map(|g| (*g).clone()));
        let gt_owned: Vec<GroundTruthObject> = frame_gt.iter().map(|g| (*g).clone()).collect();

        let mut proposals = if config.ideal_detector {
            ideal_proposals(frame, &frame_gt)
        } else {
            segmentation::segment(frame, &config.segmentation)
        };
        proposals.retain(|p| p.centroid[0].hypot(p.centroid[1]) <= config.roi_range);
        baseline_calls += proposals.len() as u64;
        proposal_total += proposals.len();

        let ctx = FrameContext {
            frame_index: frame.index,
            dt: config.frame_dt,
            ego_pose: ego,
            ground_truth: &gt_owned,
            ideal_tracker: config.ideal_tracker,
        };
        let report = process_frame(&mut world, &proposals, &ctx, &step_cfg)?;
        events.extend(report.events);
        assignments.extend(report.gt_assignments);
        for det in report.detections {
            detections.push(Detection {
                frame_index: det.frame_index,
                bbox: det.bbox,
                class: det.belief.argmax(),
                score: det.belief.max(),
                track_id: det.track_id,
            });
        }
    }

    let frames = data.frames.len();
    let calls = classifier.stats().total();
    let efficiency = evaluation::efficiency_ratio(calls, baseline_calls).ok();
    let energy = if frames > 0 {
        let m = frames as f64;
        let full = m * config.energy.e_seg + baseline_calls as f64 * config.energy.e_class;
        let actual = m * config.energy.e_seg + calls as f64 * config.energy.e_class;
        Some(full / actual)
    } else {
        None
    };

    let (mean_ap, per_class_ap) = evaluation::mean_average_precision(&detections, &scored_gt);
    let curves: Vec<PrCurve> = evaluation::present_classes(&scored_gt)
        .into_iter()
        .map(|c| evaluation::pr_curve(&detections, &scored_gt, c))
        .collect();
    let lifespans: Vec<usize> = world.all_tracks().map(|t| t.lifespan_frames()).collect();

    let report = EvalReport {
        mode: serde_json::to_value(config.mode)?
            .as_str()
            .unwrap_or("unknown")
            .to_string(),
        frames,
        mean_ap,
        per_class_ap,
        classifier_calls: calls,
        baseline_classifier_calls: baseline_calls,
        efficiency_ratio: efficiency,
        energy_ratio: energy,
        tracks_born: lifespans.len(),
        mean_track_lifespan: evaluation::mean_lifespan(&lifespans),
        diagnostics: evaluation::tracker_diagnostics(&assignments),
        detections: detections.len(),
        proposals: proposal_total,
    };

    Ok(RunOutput {
        report,
        events,
        detections,
        curves,
        scored_ground_truth: scored_gt,
        world,
    })
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: String,
    pub value: f64,
    pub mean_ap: f64,
    pub efficiency_ratio: Option<f64>,
    pub classifier_calls: u64,
    pub tracks_born: usize,
    pub mean_track_lifespan: f64,
}

/// Re-run the pipeline once per value of a named parameter.
pub fn sweep(
    base: &PipelineConfig,
    param: &str,
    values: &[f64],
    data: &SequenceData,
) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let mut cfg = base.clone();
        cfg.set_param(param, value)?;
        let out = run(&cfg, data)?;
        rows.push(SweepPoint {
            param: param.to_string(),
            value,
            mean_ap: out.report.mean_ap,
            efficiency_ratio: out.report.efficiency_ratio,
            classifier_calls: out.report.classifier_calls,
            tracks_born: out.report.tracks_born,
            mean_track_lifespan: out.report.mean_track_lifespan,
        });
    }
    Ok(rows)
}

fn create_out_dir(out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))
}

/// Write `report.json`, `events.jsonl`, and one `prc_<class>.csv` per class.
pub fn write_outputs(out_dir: &Path, output: &RunOutput) -> Result<()> {
    create_out_dir(out_dir)?;
    let report_path = out_dir.join("report.json");
    let text = serde_json::to_string_pretty(&output.report)?;
    std::fs::write(&report_path, text)
        .map_err(|e| Error::io(report_path.display().to_string(), e))?;

    let events_path = out_dir.join("events.jsonl");
    let mut f = std::fs::File::create(&events_path)
        .map_err(|e| Error::io(events_path.display().to_string(), e))?;
    for ev in &output.events {
        let line = serde_json::to_string(ev)?;
        writeln!(f, "{line}").map_err(|e| Error::io(events_path.display().to_string(), e))?;
    }

    for curve in &output.curves {
        let name = curve
            .class
            .map(|c| c.name().to_string())
            .unwrap_or_else(|| "all".into());
        let path = out_dir.join(format!("prc_{name}.csv"));
        let mut f =
            std::fs::File::create(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
        writeln!(f, "score,recall,precision").map_err(|e| Error::io(path.display().to_string(), e))?;
        for p in &curve.points {
            writeln!(f, "{},{},{}", p.score, p.recall, p.precision)
                .map_err(|e| Error::io(path.display().to_string(), e))?;
        }
    }
    Ok(())
}

/// Write `sweep.csv`.
pub fn write_sweep(out_dir: &Path, rows: &[SweepPoint]) -> Result<()> {
    create_out_dir(out_dir)?;
    let path = out_dir.join("sweep.csv");
    let mut f = std::fs::File::create(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
    writeln!(f, "param,value,mean_ap,efficiency_ratio,classifier_calls,tracks_born,mean_track_lifespan")
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    for r in rows {
        writeln!(
            f,
            "{},{},{},{},{},{},{}",
            r.param,
            r.value,
            r.mean_ap,
            r.efficiency_ratio.map(|v| v.to_string()).unwrap_or_default(),
            r.classifier_calls,
            r.tracks_born,
            r.mean_track_lifespan
        )
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    Ok(())
}
