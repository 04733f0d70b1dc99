//! Keyframe selection by the point-count independence criterion and
//! recursive Bayesian fusion of classification likelihoods. Fusion runs in
//! log space with a per-component floor so a single zero likelihood cannot
//! annihilate a class.

use crate::classification::{ClassBelief, Classifier, ClassifyContext, NUM_CLASSES};
use crate::segmentation::Proposal;
use serde::{Deserialize, Serialize};

const LIKELIHOOD_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyframeRecord {
    pub frame_index: usize,
    pub point_count: usize,
    pub likelihood: ClassBelief,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionState {
    /// Posterior over the class after all keyframes so far.
    pub posterior: ClassBelief,
    pub keyframes: Vec<KeyframeRecord>,
    /// Observations seen, including skipped and dependent ones.
    pub frames_observed: usize,
    /// Set once a fuse produced an all-zero product before flooring.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    /// Point-count ratio threshold for treating a view as independent.
    pub alpha_indep: f64,
    /// Observations discarded at the start of a track's fusion stream.
    pub start_frames: usize,
    pub prior: [f64; NUM_CLASSES],
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            alpha_indep: 0.2,
            start_frames: 3,
            prior: [0.25; NUM_CLASSES],
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> crate::error::Result<()> {
        use crate::error::Error;
        if !(self.alpha_indep >= 0.0) || !self.alpha_indep.is_finite() {
            return Err(Error::Config("alpha_indep must be finite and >= 0".into()));
        }
        let prior = ClassBelief::new(self.prior);
        if !prior.is_valid() {
            return Err(Error::Config(
                "fusion prior must be a normalized distribution".into(),
            ));
        }
        Ok(())
    }
}

impl FusionState {
    pub fn new(prior: [f64; NUM_CLASSES]) -> Self {
        FusionState {
            posterior: ClassBelief::new(prior),
            keyframes: Vec::new(),
            frames_observed: 0,
            degenerate: false,
        }
    }
}

/// A view is independent of the previous keyframe when its point count
/// differs by at least `alpha_indep` as a fraction of the previous count.
/// The absolute value is used: shrinking views are as new as growing ones.
pub fn is_independent(prev_count: usize, cur_count: usize, alpha_indep: f64) -> bool {
    assert!(prev_count >= 1);
    let ratio = ((cur_count as f64) - (prev_count as f64)).abs() / prev_count as f64;
    ratio >= alpha_indep
}

/// Element-wise product of posterior and likelihood, renormalized. An
/// all-zero product leaves the posterior unchanged and reports degeneracy.
/// Computed in log space; equivalent to the direct product.
pub fn fuse(posterior: &ClassBelief, likelihood: &ClassBelief) -> (ClassBelief, bool) {
    let degenerate = (0..NUM_CLASSES).all(|i| posterior.probs[i] * likelihood.probs[i] == 0.0);
    if degenerate {
        return (*posterior, true);
    }
    let mut logs = [0.0f64; NUM_CLASSES];
    for i in 0..NUM_CLASSES {
        logs[i] = posterior.probs[i].max(LIKELIHOOD_FLOOR).ln()
            + likelihood.probs[i].max(LIKELIHOOD_FLOOR).ln();
    }
    let max_log = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs = [0.0f64; NUM_CLASSES];
    let mut sum = 0.0;
    for i in 0..NUM_CLASSES {
        probs[i] = (logs[i] - max_log).exp();
        sum += probs[i];
    }
    for p in probs.iter_mut() {
        *p /= sum;
    }
    (ClassBelief::new(probs), false)
}

/// Outcome of feeding one observation of an unclassified track into the
/// fusion model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserveOutcome {
    /// Whether the classifier was invoked (a new keyframe was accepted).
    pub keyframe_added: bool,
    /// True when max posterior has reached the promotion threshold.
    pub promoted: bool,
}

/// Feed one observation. The first `start_frames` observations are skipped
/// entirely. After that, the classifier runs only when the view is
/// independent of the most recent keyframe (or no keyframe exists yet).
pub fn observe(
    state: &mut FusionState,
    proposal: &Proposal,
    ctx: &ClassifyContext,
    classifier: &dyn Classifier,
    config: &FusionConfig,
    promotion_threshold: f64,
) -> ObserveOutcome {
    state.frames_observed += 1;
    if state.frames_observed <= config.start_frames {
        return ObserveOutcome {
            keyframe_added: false,
            promoted: false,
        };
    }
    let independent = match state.keyframes.last() {
        None => true,
        Some(kf) => is_independent(kf.point_count, proposal.point_count, config.alpha_indep),
    };
    if !independent {
        return ObserveOutcome {
            keyframe_added: false,
            promoted: state.posterior.max() >= promotion_threshold,
        };
    }
    let likelihood = classifier.classify(proposal, ctx);
    let (posterior, degenerate) = fuse(&state.posterior, &likelihood);
    state.posterior = posterior;
    state.degenerate |= degenerate;
    state.keyframes.push(KeyframeRecord {
        frame_index: ctx.frame_index,
        point_count: proposal.point_count.max(1),
        likelihood,
    });
    ObserveOutcome {
        keyframe_added: true,
        promoted: state.posterior.max() >= promotion_threshold,
    }
}
