//! Evaluation: precision-recall curves, average precision, efficiency and
//! energy ratios, and tracker diagnostics.

use crate::classification::ClassId;
use crate::error::{Error, Result};
use crate::geometry::{bev_iou, OrientedBox};
use crate::scene_io::GroundTruthObject;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// A scored detection as fed to the evaluator, in the world frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame_index: usize,
    #[serde(rename = "box")]
    pub bbox: OrientedBox,
    pub class: ClassId,
    pub score: f64,
    pub track_id: Option<u64>,
}

/// Per-class BEV IoU threshold for a detection to match ground truth.
pub fn iou_threshold(class: ClassId) -> f64 {
    match class {
        ClassId::Car => 0.5,
        ClassId::Pedestrian | ClassId::Cyclist => 0.25,
        ClassId::Background => 0.5,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PrCurve {
    pub class: Option<ClassId>,
    pub points: Vec<PrPoint>,
    pub gt_count: usize,
}

/// Greedy matching in descending score order: each detection takes the
/// highest-IoU unmatched ground-truth object of its class in its frame,
/// subject to the class threshold. Ties are broken deterministically so the
/// curve is invariant to input permutation.
pub fn pr_curve(detections: &[Detection], ground_truth: &[GroundTruthObject], class: ClassId) -> PrCurve {
    let threshold = iou_threshold(class);
    let gts: Vec<&GroundTruthObject> =
        ground_truth.iter().filter(|g| g.class == class).collect();
    let gt_count = gts.len();

    let mut dets: Vec<&Detection> = detections.iter().filter(|d| d.class == class).collect();
    dets.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.frame_index.cmp(&b.frame_index))
            .then(a.bbox.x.partial_cmp(&b.bbox.x).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.bbox.y.partial_cmp(&b.bbox.y).unwrap_or(std::cmp::Ordering::Equal))
    });

    let mut gt_used = vec![false; gts.len()];
    let mut points = Vec::with_capacity(dets.len());
    let mut tp = 0usize;
    let mut fp = 0usize;
    for det in &dets {
        let mut best: Option<(usize, f64)> = None;
        for (gi, gt) in gts.iter().enumerate() {
            if gt_used[gi] || gt.frame_index != det.frame_index {
                continue;
            }
            let iou = bev_iou(&det.bbox, &gt.bbox);
            if iou < threshold {
                continue;
            }
            let better = match best {
                None => true,
                Some((bi, biou)) => {
                    iou > biou + 1e-12
                        || ((iou - biou).abs() <= 1e-12 && gts[gi].track_id < gts[bi].track_id)
                }
            };
            if better {
                best = Some((gi, iou));
            }
        }
        match best {
            Some((gi, _)) => {
                gt_used[gi] = true;
                tp += 1;
            }
            None => fp += 1,
        }
        let recall = if gt_count == 0 { 0.0 } else { tp as f64 / gt_count as f64 };
        let precision = tp as f64 / (tp + fp) as f64;
        points.push(PrPoint {
            recall,
            precision,
            score: det.score,
        });
    }
    PrCurve {
        class: Some(class),
        points,
        gt_count,
    }
}

/// Average precision by step integration under the monotone (right-to-left
/// maximum) precision envelope.
pub fn average_precision(curve: &PrCurve) -> f64 {
    if curve.points.is_empty() || curve.gt_count == 0 {
        return 0.0;
    }
    // envelope over the raw points
    let mut pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.recall, p.precision)).collect();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut env = pts.clone();
    for i in (0..env.len().saturating_sub(1)).rev() {
        env[i].1 = env[i].1.max(env[i + 1].1);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (r, p) in env {
        if r > prev_recall {
            ap += (r - prev_recall) * p;
            prev_recall = r;
        }
    }
    ap.clamp(0.0, 1.0)
}

/// Classes with any ground-truth support.
pub fn present_classes(ground_truth: &[GroundTruthObject]) -> Vec<ClassId> {
    let mut seen = BTreeSet::new();
    for g in ground_truth {
        if g.class != ClassId::Background {
            seen.insert(g.class.index());
        }
    }
    seen.into_iter().map(ClassId::from_index).collect()
}

/// Mean AP over the foreground classes present in the ground truth.
pub fn mean_average_precision(
    detections: &[Detection],
    ground_truth: &[GroundTruthObject],
) -> (f64, BTreeMap<String, f64>) {
    let classes = present_classes(ground_truth);
    let mut per_class = BTreeMap::new();
    if classes.is_empty() {
        return (0.0, per_class);
    }
    let mut sum = 0.0;
    for class in &classes {
        let ap = average_precision(&pr_curve(detections, ground_truth, *class));
        per_class.insert(class.name().to_string(), ap);
        sum += ap;
    }
    (sum / classes.len() as f64, per_class)
}

/// Classification-efficiency ratio: classifier calls made, over the calls a
/// classify-everything baseline would have made. Undefined for an empty
/// baseline.
pub fn efficiency_ratio(calls_made: u64, baseline_calls: u64) -> Result<f64> {
    if baseline_calls == 0 {
        return Err(Error::Undefined(
            "efficiency ratio undefined: baseline made no classifier calls".into(),
        ));
    }
    Ok(calls_made as f64 / baseline_calls as f64)
}

/// Energy-saving factor of classifying only at keyframes. `e_seg` and
/// `e_class` are per-invocation costs, `frames` the sequence length,
/// `regions` the per-frame region count (objects plus background regions),
/// and `keyframe_interval` how many frames share one classification pass.
pub fn energy_ratio(
    e_seg: f64,
    e_class: f64,
    frames: u64,
    regions: u64,
    keyframe_interval: u64,
) -> Result<f64> {
    if keyframe_interval == 0 || frames == 0 {
        return Err(Error::Undefined("energy ratio needs frames >= 1 and interval >= 1".into()));
    }
    if e_seg <= 0.0 || e_class < 0.0 {
        return Err(Error::Config("energy costs must be positive".into()));
    }
    let m = frames as f64;
    let full = m * e_seg + m * regions as f64 * e_class;
    let keyframed = m * e_seg + (m / keyframe_interval as f64) * regions as f64 * e_class;
    Ok(full / keyframed)
}

/// Mean lifespan (in frames) over a set of per-track lifespans.
pub fn mean_lifespan(lifespans: &[usize]) -> f64 {
    if lifespans.is_empty() {
        return 0.0;
    }
    lifespans.iter().sum::<usize>() as f64 / lifespans.len() as f64
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrackerDiagnostics {
    /// Ground-truth objects covered by at least one track.
    pub gt_covered: usize,
    /// Extra tracks per ground-truth object, summed (identity fragmentation).
    pub fragmentations: usize,
    /// Extra ground-truth identities per track, summed (identity switches).
    pub identity_switches: usize,
}

/// Diagnostics from the per-frame (track id, ground-truth id) assignment log.
pub fn tracker_diagnostics(assignments: &[(u64, i64)]) -> TrackerDiagnostics {
    let mut per_gt: BTreeMap<i64, BTreeSet<u64>> = BTreeMap::new();
    let mut per_track: BTreeMap<u64, BTreeSet<i64>> = BTreeMap::new();
    for &(tid, gid) in assignments {
        per_gt.entry(gid).or_default().insert(tid);
        per_track.entry(tid).or_default().insert(gid);
    }
    TrackerDiagnostics {
        gt_covered: per_gt.len(),
        fragmentations: per_gt.values().map(|s| s.len() - 1).sum(),
        identity_switches: per_track.values().map(|s| s.len() - 1).sum(),
    }
}

/// The serialized evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: String,
    pub frames: usize,
    pub mean_ap: f64,
    pub per_class_ap: BTreeMap<String, f64>,
    pub classifier_calls: u64,
    pub baseline_classifier_calls: u64,
    pub efficiency_ratio: Option<f64>,
    pub energy_ratio: Option<f64>,
    pub tracks_born: usize,
    pub mean_track_lifespan: f64,
    pub diagnostics: TrackerDiagnostics,
    pub detections: usize,
    pub proposals: usize,
}
