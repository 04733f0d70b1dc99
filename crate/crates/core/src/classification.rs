//! Proposal classification behind a trait: oracle, noisy-oracle, and
//! geometric implementations, with invocation metering. The metering is the
//! measurement instrument for the efficiency experiments, so every call is
//! counted exactly once.

use crate::error::{Error, Result};
use crate::geometry::bev_iou;
use crate::scene_io::GroundTruthObject;
use crate::segmentation::Proposal;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

pub const NUM_CLASSES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassId {
    Background,
    Car,
    Pedestrian,
    Cyclist,
}

impl ClassId {
    pub const ALL: [ClassId; NUM_CLASSES] = [
        ClassId::Background,
        ClassId::Car,
        ClassId::Pedestrian,
        ClassId::Cyclist,
    ];

    pub fn index(self) -> usize {
        match self {
            ClassId::Background => 0,
            ClassId::Car => 1,
            ClassId::Pedestrian => 2,
            ClassId::Cyclist => 3,
        }
    }

    pub fn from_index(i: usize) -> ClassId {
        Self::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassId::Background => "background",
            ClassId::Car => "car",
            ClassId::Pedestrian => "pedestrian",
            ClassId::Cyclist => "cyclist",
        }
    }
}

/// 4-way probability mask over {background, car, pedestrian, cyclist}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassBelief {
    pub probs: [f64; NUM_CLASSES],
}

impl ClassBelief {
    pub fn new(probs: [f64; NUM_CLASSES]) -> Self {
        ClassBelief { probs }
    }

    pub fn uniform() -> Self {
        ClassBelief {
            probs: [0.25; NUM_CLASSES],
        }
    }

    pub fn one_hot(class: ClassId) -> Self {
        let mut probs = [0.0; NUM_CLASSES];
        probs[class.index()] = 1.0;
        ClassBelief { probs }
    }

    /// Peak mass on `class`, remainder split evenly over the others.
    pub fn peaked(class: ClassId, peak: f64) -> Self {
        let rest = (1.0 - peak) / (NUM_CLASSES - 1) as f64;
        let mut probs = [rest; NUM_CLASSES];
        probs[class.index()] = peak;
        ClassBelief { probs }
    }

    pub fn prob(&self, class: ClassId) -> f64 {
        self.probs[class.index()]
    }

    pub fn argmax(&self) -> ClassId {
        let mut best = 0;
        for i in 1..NUM_CLASSES {
            if self.probs[i] > self.probs[best] {
                best = i;
            }
        }
        ClassId::from_index(best)
    }

    pub fn max(&self) -> f64 {
        self.probs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_valid(&self) -> bool {
        self.probs.iter().all(|p| (0.0..=1.0).contains(p))
            && (self.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9
    }

    /// Interpolate toward the uniform belief by weight `lambda` in [0, 1].
    pub fn blend_to_uniform(&self, lambda: f64) -> ClassBelief {
        let l = lambda.clamp(0.0, 1.0);
        let mut probs = [0.0; NUM_CLASSES];
        for i in 0..NUM_CLASSES {
            probs[i] = (1.0 - l) * self.probs[i] + l * 0.25;
        }
        ClassBelief { probs }
    }
}

/// Counts classifier invocations per sequence and per frame.
#[derive(Debug, Default)]
pub struct ClassifierStats {
    total: AtomicU64,
    per_frame: Mutex<std::collections::BTreeMap<usize, u64>>,
}

impl ClassifierStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, frame_index: usize) {
        self.total.fetch_add(1, Ordering::Relaxed);
        *self
            .per_frame
            .lock()
            .unwrap()
            .entry(frame_index)
            .or_insert(0) += 1;
    }

    pub fn total(&self) -> u64 {
        self.total.load(Ordering::Relaxed)
    }

    pub fn frame_count(&self, frame_index: usize) -> u64 {
        *self
            .per_frame
            .lock()
            .unwrap()
            .get(&frame_index)
            .unwrap_or(&0)
    }

    pub fn per_frame(&self) -> std::collections::BTreeMap<usize, u64> {
        self.per_frame.lock().unwrap().clone()
    }

    pub fn reset(&self) {
        self.total.store(0, Ordering::Relaxed);
        self.per_frame.lock().unwrap().clear();
    }
}

/// Context handed to the classifier alongside the proposal. Oracle variants
/// need the ground-truth class of the best-overlapping annotation; the
/// distance drives the far-range confidence decay.
#[derive(Debug, Clone, Copy)]
pub struct ClassifyContext {
    pub frame_index: usize,
    pub true_class: Option<ClassId>,
    /// Distance of the proposal centroid from the sensor, metres.
    pub distance: f64,
}

/// Belief emitted for proposals the oracle cannot match to any annotation:
/// segmentation also yields genuine background objects.
pub const UNMATCHED_BELIEF: ClassBelief = ClassBelief {
    probs: [0.7, 0.1, 0.1, 0.1],
};

pub trait Classifier: Send + Sync {
    fn classify(&self, proposal: &Proposal, ctx: &ClassifyContext) -> ClassBelief;
    fn stats(&self) -> &ClassifierStats;
}

/// Perfect detector: one-hot on the matched ground-truth class.
#[derive(Debug, Default)]
pub struct IdealOracle {
    stats: ClassifierStats,
}

impl IdealOracle {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Classifier for IdealOracle {
    fn classify(&self, _proposal: &Proposal, ctx: &ClassifyContext) -> ClassBelief {
        self.stats.record(ctx.frame_index);
        match ctx.true_class {
            Some(c) => ClassBelief::one_hot(c),
            None => UNMATCHED_BELIEF,
        }
    }

    fn stats(&self) -> &ClassifierStats {
        &self.stats
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisyOracleConfig {
    /// Row: true class; column: emitted argmax. Rows sum to 1.
    pub confusion: [[f64; NUM_CLASSES]; NUM_CLASSES],
    /// Mass placed on the emitted argmax; must exceed 1/4.
    pub peak_confidence: f64,
    /// Confidence reduction per metre beyond the reference range.
    pub distance_decay: f64,
    pub reference_range: f64,
    pub seed: u64,
}

impl NoisyOracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.peak_confidence <= 0.25 || self.peak_confidence > 1.0 {
            return Err(Error::Config("peak_confidence must be in (0.25, 1]".into()));
        }
        for (i, row) in self.confusion.iter().enumerate() {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::Config(format!("confusion row {i} out of range")));
            }
            if (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("confusion row {i} does not sum to 1")));
            }
        }
        Ok(())
    }

    pub fn identity(peak_confidence: f64, seed: u64) -> Self {
        let mut confusion = [[0.0; NUM_CLASSES]; NUM_CLASSES];
        for (i, row) in confusion.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        NoisyOracleConfig {
            confusion,
            peak_confidence,
            distance_decay: 0.0,
            reference_range: 10.0,
            seed,
        }
    }
}

/// Oracle with a confusion matrix and far-range confidence decay; simulates
/// a weak detector without any network.
#[derive(Debug)]
pub struct NoisyOracle {
    config: NoisyOracleConfig,
    stats: ClassifierStats,
}

impl NoisyOracle {
    pub fn new(config: NoisyOracleConfig) -> Result<Self> {
        config.validate()?;
        Ok(NoisyOracle {
            config,
            stats: ClassifierStats::new(),
        })
    }

    /// Per-call seed derived from the inputs, so classification is
    /// deterministic regardless of call order within a frame.
    fn call_seed(&self, proposal: &Proposal, ctx: &ClassifyContext) -> u64 {
        let mut h = self.config.seed ^ 0x6a09e667f3bcc908;
        let mut mix = |v: u64| {
            h ^= v;
            h = h.wrapping_mul(0x100000001b3);
            h ^= h >> 29;
        };
        mix(ctx.frame_index as u64);
        mix(proposal.point_count as u64);
        mix(((proposal.centroid[0] * 1e3).round() as i64) as u64);
        mix(((proposal.centroid[1] * 1e3).round() as i64) as u64);
        h
    }
}

impl Classifier for NoisyOracle {
    fn classify(&self, proposal: &Proposal, ctx: &ClassifyContext) -> ClassBelief {
        self.stats.record(ctx.frame_index);
        let Some(true_class) = ctx.true_class else {
            return UNMATCHED_BELIEF;
        };
        let mut rng = ChaCha20Rng::seed_from_u64(self.call_seed(proposal, ctx));
        let row = &self.config.confusion[true_class.index()];
        let draw: f64 = rng.gen();
        let mut acc = 0.0;
        let mut emitted = NUM_CLASSES - 1;
        for (i, &p) in row.iter().enumerate() {
            acc += p;
            if draw < acc {
                emitted = i;
                break;
            }
        }
        let belief = ClassBelief::peaked(ClassId::from_index(emitted), self.config.peak_confidence);
        let past = (ctx.distance - self.config.reference_range).max(0.0);
        let lambda = (self.config.distance_decay * past).min(1.0);
        belief.blend_to_uniform(lambda)
    }

    fn stats(&self) -> &ClassifierStats {
        &self.stats
    }
}

/// Weak-but-honest baseline: class from box dimensions alone.
/// pedestrian if l <= 1.2 and h >= 1.0; cyclist if 1.2 < l <= 2.5 and
/// h >= 1.0; car if 2.5 < l <= 7; else background. Confidence 0.6.
#[derive(Debug, Default)]
pub struct GeometricClassifier {
    stats: ClassifierStats,
}

impl GeometricClassifier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rule(l: f64, h: f64) -> ClassId {
        if l <= 1.2 && h >= 1.0 {
            ClassId::Pedestrian
        } else if l <= 2.5 && h >= 1.0 {
            ClassId::Cyclist
        } else if l > 2.5 && l <= 7.0 {
            ClassId::Car
        } else {
            ClassId::Background
        }
    }
}

impl Classifier for GeometricClassifier {
    fn classify(&self, proposal: &Proposal, ctx: &ClassifyContext) -> ClassBelief {
        self.stats.record(ctx.frame_index);
        ClassBelief::peaked(Self::rule(proposal.bbox.l, proposal.bbox.h), 0.6)
    }

    fn stats(&self) -> &ClassifierStats {
        &self.stats
    }
}

/// Label of the ground-truth box with maximal BEV IoU, if that IoU reaches
/// `min_iou`. Proposal and ground truth must share a frame of reference.
pub fn match_to_ground_truth(
    proposal: &Proposal,
    gt_list: &[GroundTruthObject],
    min_iou: f64,
) -> Option<ClassId> {
    best_gt_match(&proposal.bbox, gt_list, min_iou).map(|(_, c)| c)
}

/// Like `match_to_ground_truth`, but also reports the matched track id.
pub fn best_gt_match(
    bbox: &crate::geometry::OrientedBox,
    gt_list: &[GroundTruthObject],
    min_iou: f64,
) -> Option<(i64, ClassId)> {
    let mut best: Option<(f64, i64, ClassId)> = None;
    for gt in gt_list {
        let iou = bev_iou(bbox, &gt.bbox);
        if iou >= min_iou && best.map_or(true, |(b, _, _)| iou > b) {
            best = Some((iou, gt.track_id, gt.class));
        }
    }
    best.map(|(_, id, c)| (id, c))
}
