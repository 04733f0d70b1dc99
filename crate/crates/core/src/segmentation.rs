//! Class-agnostic proposal generation: piecewise constant ground planes,
//! Euclidean clustering over a voxel hash, size filtering, and minimum
//! oriented bounding-box fitting.

use crate::error::{Error, Result};
use crate::geometry::{min_area_rect, OrientedBox};
use crate::scene_io::Frame;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Segmented cluster with an oriented box and its member points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    #[serde(rename = "box")]
    pub bbox: OrientedBox,
    pub centroid: [f64; 3],
    pub point_count: usize,
    #[serde(skip)]
    pub points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationConfig {
    pub ground_cell_size: f64,
    pub ground_margin: f64,
    pub cluster_distance: f64,
    pub min_points: usize,
    pub min_l: f64,
    pub max_l: f64,
    pub min_w: f64,
    pub max_w: f64,
    pub min_h: f64,
    pub max_h: f64,
    pub region_of_interest_range: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            ground_cell_size: 4.0,
            ground_margin: 0.3,
            cluster_distance: 0.5,
            min_points: 10,
            min_l: 0.2,
            max_l: 12.0,
            min_w: 0.2,
            max_w: 6.0,
            min_h: 0.3,
            max_h: 3.5,
            region_of_interest_range: 70.0,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        let positives = [
            self.ground_cell_size,
            self.ground_margin,
            self.cluster_distance,
            self.min_l,
            self.min_w,
            self.min_h,
            self.region_of_interest_range,
        ];
        if positives.iter().any(|&v| v <= 0.0) {
            return Err(Error::Config("segmentation parameters must be positive".into()));
        }
        if self.min_l >= self.max_l || self.min_w >= self.max_w || self.min_h >= self.max_h {
            return Err(Error::Config("dimension bounds must satisfy min < max".into()));
        }
        Ok(())
    }
}

/// Remove ground points. A constant ground height is estimated per BEV grid
/// cell as the 5th-percentile z of the cell; points at or below
/// height + margin are discarded.
pub fn remove_ground(frame: &Frame, config: &SegmentationConfig) -> Vec<[f64; 3]> {
    if frame.points.is_empty() {
        return Vec::new();
    }
    let cell = config.ground_cell_size;
    let key = |p: &[f64; 3]| {
        (
            (p[0] / cell).floor() as i64,
            (p[1] / cell).floor() as i64,
        )
    };
    let mut cells: HashMap<(i64, i64), Vec<f64>> = HashMap::new();
    for p in &frame.points {
        cells.entry(key(p)).or_default().push(p[2]);
    }
    let mut ground: HashMap<(i64, i64), f64> = HashMap::with_capacity(cells.len());
    for (k, mut zs) in cells {
        zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let idx = ((zs.len() as f64) * 0.05).floor() as usize;
        ground.insert(k, zs[idx.min(zs.len() - 1)]);
    }
    frame
        .points
        .iter()
        .filter(|p| p[2] > ground[&key(p)] + config.ground_margin)
        .cloned()
        .collect()
}

/// Single-linkage Euclidean clustering: two points share a segment iff
/// connected by a chain with consecutive gaps <= cluster_distance. Runs over
/// a voxel hash so only neighbouring cells are compared; the contract is the
/// brute-force single-linkage partition.
pub fn cluster(points: &[[f64; 3]], cluster_distance: f64) -> Vec<Vec<usize>> {
    assert!(cluster_distance > 0.0);
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let cell = cluster_distance;
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: &[f64; 3]| {
        (
            (p[0] / cell).floor() as i64,
            (p[1] / cell).floor() as i64,
            (p[2] / cell).floor() as i64,
        )
    };
    for (i, p) in points.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let d2 = cluster_distance * cluster_distance;
    for (i, p) in points.iter().enumerate() {
        let (kx, ky, kz) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(neigh) = grid.get(&(kx + dx, ky + dy, kz + dz)) else {
                        continue;
                    };
                    for &j in neigh {
                        if j <= i {
                            continue;
                        }
                        let q = &points[j];
                        let dist2 = (p[0] - q[0]).powi(2)
                            + (p[1] - q[1]).powi(2)
                            + (p[2] - q[2]).powi(2);
                        if dist2 <= d2 {
                            let ri = find(&mut parent, i);
                            let rj = find(&mut parent, j);
                            if ri != rj {
                                parent[ri] = rj;
                            }
                        }
                    }
                }
            }
        }
    }

    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut segments: Vec<Vec<usize>> = groups.into_values().collect();
    segments.sort_by_key(|s| s[0]);
    segments
}

/// Floor applied to degenerate (collinear) footprints so IoU stays defined.
pub const MIN_FOOTPRINT: f64 = 0.05;

/// Fit the minimum-area oriented box: rotating-calipers rectangle of the BEV
/// projection, z and h from the point height extremes.
pub fn fit_box(points: &[[f64; 3]]) -> OrientedBox {
    assert!(!points.is_empty());
    let bev: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    let (cx, cy, l, w, yaw) = min_area_rect(&bev);
    let zmin = points.iter().map(|p| p[2]).fold(f64::INFINITY, f64::min);
    let zmax = points.iter().map(|p| p[2]).fold(f64::NEG_INFINITY, f64::max);
    OrientedBox {
        x: cx,
        y: cy,
        z: (zmin + zmax) / 2.0,
        l: l.max(MIN_FOOTPRINT),
        w: w.max(MIN_FOOTPRINT),
        h: (zmax - zmin).max(MIN_FOOTPRINT),
        yaw,
    }
}

/// Full proposal generation: ground removal, clustering, size/ROI filtering,
/// and box fitting. Survivors are sorted by distance to the sensor.
pub fn segment(frame: &Frame, config: &SegmentationConfig) -> Vec<Proposal> {
    let non_ground = remove_ground(frame, config);
    let segments = cluster(&non_ground, config.cluster_distance);
    let mut proposals = Vec::new();
    for seg in segments {
        if seg.len() < config.min_points {
            continue;
        }
        let pts: Vec<[f64; 3]> = seg.iter().map(|&i| non_ground[i]).collect();
        let bbox = fit_box(&pts);
        if bbox.l < config.min_l
            || bbox.l > config.max_l
            || bbox.w < config.min_w
            || bbox.w > config.max_w
            || bbox.h < config.min_h
            || bbox.h > config.max_h
        {
            continue;
        }
        let n = pts.len() as f64;
        let centroid = [
            pts.iter().map(|p| p[0]).sum::<f64>() / n,
            pts.iter().map(|p| p[1]).sum::<f64>() / n,
            pts.iter().map(|p| p[2]).sum::<f64>() / n,
        ];
        if centroid[0].hypot(centroid[1]) > config.region_of_interest_range {
            continue;
        }
        proposals.push(Proposal {
            bbox,
            centroid,
            point_count: pts.len(),
            points: pts,
        });
    }
    proposals.sort_by(|a, b| {
        let da = a.centroid[0].hypot(a.centroid[1]);
        let db = b.centroid[0].hypot(b.centroid[1]);
        da.partial_cmp(&db).unwrap()
    });
    proposals
}
