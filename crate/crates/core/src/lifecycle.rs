//! Track lifecycle: the efficient-detection and accurate-detection finite
//! state machines, the track table, and the per-frame orchestration that
//! generates FSM inputs from association results.

use crate::association::{associate, AssociationConfig, TrackFeatures};
use crate::classification::{
    best_gt_match, ClassBelief, ClassId, Classifier, ClassifyContext,
};
use crate::error::{Error, Result};
use crate::fusion::{self, FusionConfig, FusionState};
use crate::geometry::{OrientedBox, Pose2};
use crate::scene_io::GroundTruthObject;
use crate::segmentation::Proposal;
use crate::tracking::{self, NoiseConfig, Observation, TrackState};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    DetOnly,
    Efficient,
    Accurate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LifecycleState {
    NewProposal,
    MatchedProposal,
    UnmatchedProposal,
    /// Efficient-mode tracked state.
    Tracked,
    /// Efficient-mode lost state.
    Lost,
    TrackedUnclassified,
    TrackedClassified,
    LostUnclassified,
    LostClassified,
    Deleted,
}

/// Inputs of the efficient-detection machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EfficientInput {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    A8,
    A9,
}

/// Inputs of the accurate-detection machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccurateInput {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    A8,
    A9,
    A10,
    A11,
    A12,
    A13,
    A14,
}

pub const EFFICIENT_STATES: [LifecycleState; 6] = [
    LifecycleState::NewProposal,
    LifecycleState::MatchedProposal,
    LifecycleState::UnmatchedProposal,
    LifecycleState::Tracked,
    LifecycleState::Lost,
    LifecycleState::Deleted,
];

pub const ACCURATE_STATES: [LifecycleState; 8] = [
    LifecycleState::NewProposal,
    LifecycleState::MatchedProposal,
    LifecycleState::UnmatchedProposal,
    LifecycleState::TrackedUnclassified,
    LifecycleState::TrackedClassified,
    LifecycleState::LostUnclassified,
    LifecycleState::LostClassified,
    LifecycleState::Deleted,
];

pub const EFFICIENT_INPUTS: [EfficientInput; 9] = [
    EfficientInput::A1,
    EfficientInput::A2,
    EfficientInput::A3,
    EfficientInput::A4,
    EfficientInput::A5,
    EfficientInput::A6,
    EfficientInput::A7,
    EfficientInput::A8,
    EfficientInput::A9,
];

pub const ACCURATE_INPUTS: [AccurateInput; 14] = [
    AccurateInput::A1,
    AccurateInput::A2,
    AccurateInput::A3,
    AccurateInput::A4,
    AccurateInput::A5,
    AccurateInput::A6,
    AccurateInput::A7,
    AccurateInput::A8,
    AccurateInput::A9,
    AccurateInput::A10,
    AccurateInput::A11,
    AccurateInput::A12,
    AccurateInput::A13,
    AccurateInput::A14,
];

/// Transition function of the efficient-detection machine. Illegal
/// (state, input) pairs are contract violations.
pub fn step_efficient(state: LifecycleState, input: EfficientInput) -> Result<LifecycleState> {
    use EfficientInput as I;
    use LifecycleState as S;
    let next = match (state, input) {
        (S::NewProposal, I::A1) => S::MatchedProposal,
        (S::NewProposal, I::A2) => S::UnmatchedProposal,
        (S::UnmatchedProposal, I::A3) => S::Tracked,
        (S::MatchedProposal, I::A4) => S::Tracked,
        (S::MatchedProposal, I::A5) => S::Tracked,
        (S::Tracked, I::A4) => S::Tracked,
        (S::Tracked, I::A5) => S::Tracked,
        (S::Tracked, I::A6) => S::Lost,
        (S::Lost, I::A7) => S::Tracked,
        (S::Lost, I::A8) => S::Lost,
        (S::Lost, I::A9) => S::Deleted,
        _ => {
            return Err(Error::IllegalTransition {
                state: format!("{state:?}"),
                input: format!("{input:?}"),
            })
        }
    };
    Ok(next)
}

/// Transition function of the accurate-detection machine.
pub fn step_accurate(state: LifecycleState, input: AccurateInput) -> Result<LifecycleState> {
    use AccurateInput as I;
    use LifecycleState as S;
    let next = match (state, input) {
        (S::NewProposal, I::A1) => S::MatchedProposal,
        (S::NewProposal, I::A2) => S::UnmatchedProposal,
        // classification outcome routes the unmatched proposal
        (S::UnmatchedProposal, I::A3) => S::TrackedUnclassified,
        (S::UnmatchedProposal, I::A4) => S::TrackedClassified,
        // matched proposals join the track they hit
        (S::MatchedProposal, I::A5) => S::TrackedUnclassified,
        (S::MatchedProposal, I::A6) => S::TrackedClassified,
        // location updates keep the state
        (S::TrackedClassified, I::A7) => S::TrackedClassified,
        (S::TrackedUnclassified, I::A9) => S::TrackedUnclassified,
        // fusion reaching high confidence promotes
        (S::TrackedUnclassified, I::A8) => S::TrackedClassified,
        // losses; the same input keeps counting while the track stays lost
        (S::TrackedClassified, I::A10) => S::LostClassified,
        (S::LostClassified, I::A10) => S::LostClassified,
        (S::TrackedUnclassified, I::A12) => S::LostUnclassified,
        (S::LostUnclassified, I::A12) => S::LostUnclassified,
        (S::LostClassified, I::A11) => S::TrackedClassified,
        (S::LostUnclassified, I::A13) => S::TrackedUnclassified,
        (S::LostClassified, I::A14) => S::Deleted,
        (S::LostUnclassified, I::A14) => S::Deleted,
        _ => {
            return Err(Error::IllegalTransition {
                state: format!("{state:?}"),
                input: format!("{input:?}"),
            })
        }
    };
    Ok(next)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LifecycleConfig {
    /// Consecutive missed frames before a lost track is deleted.
    pub max_lost_frames: u32,
    /// Confidence required to call a classification "distinct" and to
    /// promote a fused track.
    pub promotion_threshold: f64,
}

impl Default for LifecycleConfig {
    fn default() -> Self {
        LifecycleConfig {
            max_lost_frames: 3,
            promotion_threshold: 0.9,
        }
    }
}

impl LifecycleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_lost_frames < 1 {
            return Err(Error::Config("max_lost_frames must be >= 1".into()));
        }
        if self.promotion_threshold <= 0.25 || self.promotion_threshold > 1.0 {
            return Err(Error::Config("promotion_threshold must be in (0.25, 1]".into()));
        }
        Ok(())
    }
}

/// One tracked object: EKF state, lifecycle state, fused belief, and the
/// features carried for data association.
#[derive(Debug, Clone)]
pub struct Track {
    pub id: u64,
    pub lifecycle: LifecycleState,
    pub kf: TrackState,
    pub belief: ClassBelief,
    pub label: Option<ClassId>,
    /// World-frame box of the last associated proposal, recentred on the
    /// EKF prediction while the track is lost.
    pub last_box: OrientedBox,
    pub last_point_count: usize,
    pub consecutive_missed: u32,
    pub birth_frame: usize,
    pub last_seen_frame: usize,
    pub fusion: Option<FusionState>,
    /// Ground-truth identity, when the ideal tracker is in play.
    pub gt_id: Option<i64>,
}

impl Track {
    pub fn is_lost(&self) -> bool {
        matches!(
            self.lifecycle,
            LifecycleState::Lost | LifecycleState::LostClassified | LifecycleState::LostUnclassified
        )
    }

    pub fn is_tracked(&self) -> bool {
        matches!(
            self.lifecycle,
            LifecycleState::Tracked
                | LifecycleState::TrackedClassified
                | LifecycleState::TrackedUnclassified
        )
    }

    pub fn lifespan_frames(&self) -> usize {
        self.last_seen_frame - self.birth_frame + 1
    }
}

/// One FSM transition, as appended to the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsmEvent {
    pub frame: usize,
    pub track_id: u64,
    pub from: LifecycleState,
    pub input: String,
    pub to: LifecycleState,
}

/// Per-frame output of the orchestrator.
#[derive(Debug, Clone, Default)]
pub struct FrameReport {
    pub events: Vec<FsmEvent>,
    /// Classifier invocations attributable to this frame.
    pub classifier_calls: u64,
    /// (track id, ground-truth id) for every track updated this frame with
    /// a ground-truth-matched proposal.
    pub gt_assignments: Vec<(u64, i64)>,
    /// World-frame detections reported this frame for evaluation.
    pub detections: Vec<ReportedDetection>,
    pub proposal_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportedDetection {
    pub frame_index: usize,
    #[serde(rename = "box")]
    pub bbox: OrientedBox,
    pub belief: ClassBelief,
    pub track_id: Option<u64>,
}

/// The track table.
#[derive(Debug, Default)]
pub struct World {
    pub tracks: Vec<Track>,
    /// Deleted tracks, kept for lifespan statistics.
    pub dead: Vec<Track>,
    next_id: u64,
}

impl World {
    pub fn new() -> Self {
        Self::default()
    }

    fn allocate_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub fn all_tracks(&self) -> impl Iterator<Item = &Track> {
        self.tracks.iter().chain(self.dead.iter())
    }
}

/// Immutable per-frame context for the orchestrator. Ground truth must be in
/// the world frame, as must proposal boxes after the ego transform applied
/// here via `ego_pose`.
pub struct FrameContext<'a> {
    pub frame_index: usize,
    pub dt: f64,
    pub ego_pose: Pose2,
    pub ground_truth: &'a [GroundTruthObject],
    pub ideal_tracker: bool,
}

pub struct StepConfig<'a> {
    pub mode: Mode,
    pub classifier: &'a dyn Classifier,
    pub lifecycle: &'a LifecycleConfig,
    pub association: &'a AssociationConfig,
    pub noise: &'a NoiseConfig,
    pub fusion: &'a FusionConfig,
    /// Minimum BEV IoU for a proposal to inherit a ground-truth identity.
    pub gt_min_iou: f64,
}

/// Process one frame: predict, associate, fire FSM inputs, classify and fuse
/// as the mode demands, and report detections.
pub fn process_frame(
    world: &mut World,
    proposals: &[Proposal],
    ctx: &FrameContext,
    cfg: &StepConfig,
) -> Result<FrameReport> {
    let mut report = FrameReport {
        proposal_count: proposals.len(),
        ..FrameReport::default()
    };
    let calls_before = cfg.classifier.stats().total();

    // 1. Predict every live track; lost tracks coast on the motion model.
    for track in world.tracks.iter_mut() {
        track.kf = tracking::predict(&track.kf, ctx.dt, cfg.noise);
        track.last_box.x = track.kf.x;
        track.last_box.y = track.kf.y;
    }

    // 2. Proposals into the world frame, plus their ground-truth identity.
    let world_props: Vec<Proposal> = proposals
        .iter()
        .map(|p| {
            let mut q = p.clone();
            q.bbox = p.bbox.transformed(&ctx.ego_pose);
            q.centroid = ctx.ego_pose.apply_point(p.centroid);
            q
        })
        .collect();
    let gt_matches: Vec<Option<(i64, ClassId)>> = world_props
        .iter()
        .map(|p| best_gt_match(&p.bbox, ctx.ground_truth, cfg.gt_min_iou))
        .collect();
    // classification sees sensor-frame distance
    let distances: Vec<f64> = proposals
        .iter()
        .map(|p| p.centroid[0].hypot(p.centroid[1]))
        .collect();

    // 3. Associate.
    let (pairs, unmatched_props) = if ctx.ideal_tracker {
        associate_by_identity(world, &world_props, &gt_matches, cfg)
    } else {
        let features: Vec<TrackFeatures> = world
            .tracks
            .iter()
            .map(|t| TrackFeatures {
                bbox: t.last_box,
                point_count: t.last_point_count,
            })
            .collect();
        let res = associate(&world_props, &features, cfg.association);
        (
            res.matches.iter().map(|m| (m.proposal, m.track)).collect(),
            res.unmatched_proposals,
        )
    };

    let mut matched_track = vec![false; world.tracks.len()];

    // 4. Matched proposals update their tracks.
    for (pi, ti) in pairs {
        matched_track[ti] = true;
        let clf_ctx = ClassifyContext {
            frame_index: ctx.frame_index,
            true_class: gt_matches[pi].map(|(_, c)| c),
            distance: distances[pi],
        };
        update_matched_track(
            world,
            ti,
            &world_props[pi],
            gt_matches[pi],
            &clf_ctx,
            ctx,
            cfg,
            &mut report,
        )?;
    }

    // 5. Unmatched proposals are born as new tracks.
    for pi in unmatched_props {
        let clf_ctx = ClassifyContext {
            frame_index: ctx.frame_index,
            true_class: gt_matches[pi].map(|(_, c)| c),
            distance: distances[pi],
        };
        birth_track(world, &world_props[pi], gt_matches[pi], &clf_ctx, ctx, cfg, &mut report)?;
    }

    // 6. Unmatched tracks miss this frame; expired ones are deleted.
    // Tracks born in step 5 carry last_seen_frame == current frame and are
    // exempt regardless of index.
    let live = std::mem::take(&mut world.tracks);
    let mut survivors = Vec::with_capacity(live.len());
    for (ti, mut track) in live.into_iter().enumerate() {
        let seen = matched_track.get(ti) == Some(&true)
            || track.last_seen_frame == ctx.frame_index;
        if seen {
            survivors.push(track);
            continue;
        }
        if miss_track(&mut track, ctx, cfg, &mut report)? {
            world.dead.push(track);
        } else {
            survivors.push(track);
        }
    }
    world.tracks = survivors;

    // 7. Reported detections per mode.
    for track in &world.tracks {
        if !track.is_tracked() {
            continue;
        }
        report.detections.push(ReportedDetection {
            frame_index: ctx.frame_index,
            bbox: track.last_box,
            belief: track.belief,
            track_id: Some(track.id),
        });
    }

    report.classifier_calls = cfg.classifier.stats().total() - calls_before;
    Ok(report)
}

/// Ideal association by ground-truth identity: a proposal joins the track
/// holding the same ground-truth id. Proposals with no identity fall back to
/// cost-based association among the leftover tracks.
fn associate_by_identity(
    world: &World,
    world_props: &[Proposal],
    gt_matches: &[Option<(i64, ClassId)>],
    cfg: &StepConfig,
) -> (Vec<(usize, usize)>, Vec<usize>) {
    let mut pairs = Vec::new();
    let mut used_track = vec![false; world.tracks.len()];
    let mut leftover_props = Vec::new();
    for (pi, gm) in gt_matches.iter().enumerate() {
        let mut matched = None;
        if let Some((gid, _)) = gm {
            matched = world
                .tracks
                .iter()
                .enumerate()
                .position(|(ti, t)| !used_track[ti] && t.gt_id == Some(*gid));
        }
        match matched {
            Some(ti) => {
                used_track[ti] = true;
                pairs.push((pi, ti));
            }
            None => leftover_props.push(pi),
        }
    }
    // Cost-based fallback for identity-less proposals and tracks.
    let free_tracks: Vec<usize> = (0..world.tracks.len())
        .filter(|&ti| !used_track[ti] && world.tracks[ti].gt_id.is_none())
        .collect();
    let mut unmatched = Vec::new();
    if leftover_props.is_empty() {
        return (pairs, unmatched);
    }
    if free_tracks.is_empty() {
        return (pairs, leftover_props);
    }
    let sub_props: Vec<Proposal> = leftover_props
        .iter()
        .map(|&pi| world_props[pi].clone())
        .collect();
    let sub_tracks: Vec<TrackFeatures> = free_tracks
        .iter()
        .map(|&ti| TrackFeatures {
            bbox: world.tracks[ti].last_box,
            point_count: world.tracks[ti].last_point_count,
        })
        .collect();
    let res = associate(&sub_props, &sub_tracks, cfg.association);
    for m in res.matches {
        pairs.push((leftover_props[m.proposal], free_tracks[m.track]));
    }
    for up in res.unmatched_proposals {
        unmatched.push(leftover_props[up]);
    }
    (pairs, unmatched)
}

#[allow(clippy::too_many_arguments)]
fn update_matched_track(
    world: &mut World,
    ti: usize,
    prop: &Proposal,
    gt_match: Option<(i64, ClassId)>,
    clf_ctx: &ClassifyContext,
    ctx: &FrameContext,
    cfg: &StepConfig,
    report: &mut FrameReport,
) -> Result<()> {
    let track = &mut world.tracks[ti];
    let obs = Observation {
        x: prop.centroid[0],
        y: prop.centroid[1],
    };
    track.kf = tracking::update(&track.kf, &obs, cfg.noise)?;
    track.last_box = prop.bbox;
    track.last_point_count = prop.point_count;
    track.consecutive_missed = 0;
    track.last_seen_frame = ctx.frame_index;
    if let Some((gid, _)) = gt_match {
        if track.gt_id.is_none() {
            track.gt_id = Some(gid);
        }
        report.gt_assignments.push((track.id, gid));
    }

    let fire_eff = |track: &mut Track, input: EfficientInput, report: &mut FrameReport| -> Result<()> {
        let from = track.lifecycle;
        track.lifecycle = step_efficient(from, input)?;
        report.events.push(FsmEvent {
            frame: ctx.frame_index,
            track_id: track.id,
            from,
            input: format!("{input:?}").to_lowercase(),
            to: track.lifecycle,
        });
        Ok(())
    };

    match cfg.mode {
        Mode::DetOnly => {
            // conventional pipeline: the proposal was re-classified
            let belief = cfg.classifier.classify(prop, clf_ctx);
            track.belief = belief;
            track.label = Some(belief.argmax());
            if track.is_lost() {
                fire_eff(track, EfficientInput::A7, report)?;
            } else {
                fire_eff(track, EfficientInput::A4, report)?;
                fire_eff(track, EfficientInput::A5, report)?;
            }
        }
        Mode::Efficient => {
            // label propagated, no classification
            if track.is_lost() {
                fire_eff(track, EfficientInput::A7, report)?;
            } else {
                fire_eff(track, EfficientInput::A4, report)?;
                fire_eff(track, EfficientInput::A5, report)?;
            }
        }
        Mode::Accurate => {
            let from = track.lifecycle;
            let input = match from {
                LifecycleState::TrackedClassified => AccurateInput::A7,
                LifecycleState::LostClassified => AccurateInput::A11,
                LifecycleState::LostUnclassified => AccurateInput::A13,
                LifecycleState::TrackedUnclassified => AccurateInput::A9,
                other => {
                    return Err(Error::IllegalTransition {
                        state: format!("{other:?}"),
                        input: "matched proposal".into(),
                    })
                }
            };
            let fired = step_accurate(from, input)?;
            track.lifecycle = fired;
            report.events.push(FsmEvent {
                frame: ctx.frame_index,
                track_id: track.id,
                from,
                input: format!("{input:?}").to_lowercase(),
                to: fired,
            });
            // unclassified tracks keep fusing until promoted
            if track.lifecycle == LifecycleState::TrackedUnclassified {
                let fusion_state = track
                    .fusion
                    .get_or_insert_with(|| FusionState::new(cfg.fusion.prior));
                let outcome = fusion::observe(
                    fusion_state,
                    prop,
                    clf_ctx,
                    cfg.classifier,
                    cfg.fusion,
                    cfg.lifecycle.promotion_threshold,
                );
                track.belief = fusion_state.posterior;
                if outcome.promoted {
                    let from = track.lifecycle;
                    track.lifecycle = step_accurate(from, AccurateInput::A8)?;
                    track.label = Some(track.belief.argmax());
                    report.events.push(FsmEvent {
                        frame: ctx.frame_index,
                        track_id: track.id,
                        from,
                        input: "a8".into(),
                        to: track.lifecycle,
                    });
                } else {
                    track.label = Some(track.belief.argmax());
                }
            }
        }
    }
    Ok(())
}

fn birth_track(
    world: &mut World,
    prop: &Proposal,
    gt_match: Option<(i64, ClassId)>,
    clf_ctx: &ClassifyContext,
    ctx: &FrameContext,
    cfg: &StepConfig,
    report: &mut FrameReport,
) -> Result<()> {
    let id = world.allocate_id();
    let mut events = Vec::new();
    let mut push = |from: LifecycleState, input: &str, to: LifecycleState| {
        events.push(FsmEvent {
            frame: ctx.frame_index,
            track_id: id,
            from,
            input: input.into(),
            to,
        });
    };

    let s0 = LifecycleState::NewProposal;
    let belief;
    let lifecycle;
    let mut fusion_state = None;
    match cfg.mode {
        Mode::DetOnly | Mode::Efficient => {
            let s1 = step_efficient(s0, EfficientInput::A2)?;
            push(s0, "a2", s1);
            belief = cfg.classifier.classify(prop, clf_ctx);
            let s2 = step_efficient(s1, EfficientInput::A3)?;
            push(s1, "a3", s2);
            lifecycle = s2;
        }
        Mode::Accurate => {
            let s1 = step_accurate(s0, AccurateInput::A2)?;
            push(s0, "a2", s1);
            belief = cfg.classifier.classify(prop, clf_ctx);
            if belief.max() >= cfg.lifecycle.promotion_threshold {
                let s2 = step_accurate(s1, AccurateInput::A4)?;
                push(s1, "a4", s2);
                lifecycle = s2;
            } else {
                let s2 = step_accurate(s1, AccurateInput::A3)?;
                push(s1, "a3", s2);
                lifecycle = s2;
                let mut fs = FusionState::new(cfg.fusion.prior);
                fs.frames_observed = 1;
                if cfg.fusion.start_frames == 0 {
                    let (post, deg) = fusion::fuse(&fs.posterior, &belief);
                    fs.posterior = post;
                    fs.degenerate = deg;
                    fs.keyframes.push(crate::fusion::KeyframeRecord {
                        frame_index: ctx.frame_index,
                        point_count: prop.point_count.max(1),
                        likelihood: belief,
                    });
                }
                fusion_state = Some(fs);
            }
        }
    }

    let effective_belief = match (&cfg.mode, &fusion_state) {
        (Mode::Accurate, Some(fs)) => fs.posterior,
        _ => belief,
    };
    world.tracks.push(Track {
        id,
        lifecycle,
        kf: tracking::initialize(prop.centroid[0], prop.centroid[1], cfg.noise),
        belief: effective_belief,
        label: Some(effective_belief.argmax()),
        last_box: prop.bbox,
        last_point_count: prop.point_count,
        consecutive_missed: 0,
        birth_frame: ctx.frame_index,
        last_seen_frame: ctx.frame_index,
        fusion: fusion_state,
        gt_id: gt_match.map(|(gid, _)| gid),
    });
    if let Some((gid, _)) = gt_match {
        report.gt_assignments.push((id, gid));
    }
    report.events.extend(events);
    Ok(())
}

/// Handle a track that received no proposal this frame. Returns true when
/// the track reached Deleted.
fn miss_track(
    track: &mut Track,
    ctx: &FrameContext,
    cfg: &StepConfig,
    report: &mut FrameReport,
) -> Result<bool> {
    let mut fire = |track: &mut Track, input_name: String, to: LifecycleState| {
        report.events.push(FsmEvent {
            frame: ctx.frame_index,
            track_id: track.id,
            from: track.lifecycle,
            input: input_name,
            to,
        });
        track.lifecycle = to;
    };

    track.consecutive_missed += 1;
    match cfg.mode {
        Mode::DetOnly | Mode::Efficient => {
            let (input, label) = if track.is_lost() {
                (EfficientInput::A8, "a8")
            } else {
                (EfficientInput::A6, "a6")
            };
            let to = step_efficient(track.lifecycle, input)?;
            fire(track, label.into(), to);
            if track.consecutive_missed >= cfg.lifecycle.max_lost_frames {
                let to = step_efficient(track.lifecycle, EfficientInput::A9)?;
                fire(track, "a9".into(), to);
                return Ok(true);
            }
        }
        Mode::Accurate => {
            let input = match track.lifecycle {
                LifecycleState::TrackedClassified | LifecycleState::LostClassified => {
                    AccurateInput::A10
                }
                LifecycleState::TrackedUnclassified | LifecycleState::LostUnclassified => {
                    AccurateInput::A12
                }
                other => {
                    return Err(Error::IllegalTransition {
                        state: format!("{other:?}"),
                        input: "miss".into(),
                    })
                }
            };
            let to = step_accurate(track.lifecycle, input)?;
            fire(track, format!("{input:?}").to_lowercase(), to);
            if track.consecutive_missed >= cfg.lifecycle.max_lost_frames {
                let to = step_accurate(track.lifecycle, AccurateInput::A14)?;
                fire(track, "a14".into(), to);
                return Ok(true);
            }
        }
    }
    Ok(false)
}
