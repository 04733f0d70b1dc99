//! Proposal-to-track data association: the three-term assignment cost, the
//! Hungarian solver, and cost gating.

pub use crate::geometry::bev_iou;

use crate::error::{Error, Result};
use crate::geometry::OrientedBox;
use crate::segmentation::Proposal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssociationConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub t_da: f64,
}

impl Default for AssociationConfig {
    fn default() -> Self {
        AssociationConfig {
            alpha: 2.0,
            beta: 0.01,
            gamma: 0.1,
            t_da: 0.95,
        }
    }
}

impl AssociationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha < 0.0 || self.beta < 0.0 || self.gamma < 0.0 {
            return Err(Error::Config("association weights must be non-negative".into()));
        }
        Ok(())
    }
}

/// The three cost terms and their weighted combination. The point-count and
/// size terms are negative absolute differences, so a larger mismatch raises
/// the total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub iou: f64,
    pub point_term: f64,
    pub size_term: f64,
    pub total: f64,
}

/// Track-side features carried into the cost: the last associated box and
/// point count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackFeatures {
    pub bbox: OrientedBox,
    pub point_count: usize,
}

pub fn cost(proposal: &Proposal, track: &TrackFeatures, config: &AssociationConfig) -> CostBreakdown {
    let iou = bev_iou(&proposal.bbox, &track.bbox);
    let point_term = -((proposal.point_count as f64) - (track.point_count as f64)).abs();
    let size_term = -(proposal.bbox.volume() - track.bbox.volume()).abs();
    let total = config.alpha * (1.0 - iou) - config.beta * point_term - config.gamma * size_term;
    CostBreakdown {
        iou,
        point_term,
        size_term,
        total,
    }
}

/// Minimum-cost assignment of a rectangular matrix, covering
/// min(rows, cols) pairs. Jonker-Volgenant style shortest augmenting paths
/// with dual potentials.
pub fn hungarian(costs: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = costs.len();
    if n == 0 {
        return Vec::new();
    }
    let m = costs[0].len();
    if m == 0 {
        return Vec::new();
    }
    if n > m {
        // solve the transpose and flip the pairs
        let t: Vec<Vec<f64>> = (0..m).map(|j| (0..n).map(|i| costs[i][j]).collect()).collect();
        return hungarian(&t).into_iter().map(|(a, b)| (b, a)).collect();
    }

    // 1-based arrays, p[j] = row assigned to column j
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = costs[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for j in 1..=m {
        if p[j] != 0 {
            out.push((p[j] - 1, j - 1));
        }
    }
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPair {
    pub proposal: usize,
    pub track: usize,
    pub cost: CostBreakdown,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssociationResult {
    pub matches: Vec<MatchedPair>,
    pub unmatched_proposals: Vec<usize>,
    pub unmatched_tracks: Vec<usize>,
}

/// Hungarian assignment over the full cost matrix, then gating: pairs with
/// total cost above T_DA are demoted to unmatched.
pub fn associate(
    proposals: &[Proposal],
    tracks: &[TrackFeatures],
    config: &AssociationConfig,
) -> AssociationResult {
    let mut result = AssociationResult::default();
    if proposals.is_empty() || tracks.is_empty() {
        result.unmatched_proposals = (0..proposals.len()).collect();
        result.unmatched_tracks = (0..tracks.len()).collect();
        return result;
    }
    let breakdowns: Vec<Vec<CostBreakdown>> = proposals
        .iter()
        .map(|p| tracks.iter().map(|t| cost(p, t, config)).collect())
        .collect();
    let matrix: Vec<Vec<f64>> = breakdowns
        .iter()
        .map(|row| row.iter().map(|c| c.total).collect())
        .collect();
    let mut matched_p = vec![false; proposals.len()];
    let mut matched_t = vec![false; tracks.len()];
    for (pi, ti) in hungarian(&matrix) {
        let c = breakdowns[pi][ti];
        if c.total > config.t_da {
            continue;
        }
        matched_p[pi] = true;
        matched_t[ti] = true;
        result.matches.push(MatchedPair {
            proposal: pi,
            track: ti,
            cost: c,
        });
    }
    result.unmatched_proposals = (0..proposals.len()).filter(|&i| !matched_p[i]).collect();
    result.unmatched_tracks = (0..tracks.len()).filter(|&i| !matched_t[i]).collect();
    result
}
