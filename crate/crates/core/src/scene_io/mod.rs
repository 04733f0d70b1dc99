//! Sequence ingestion: KITTI-format readers (clouds, tracking labels,
//! calibration, ego poses) and a deterministic synthetic scenario generator.

mod kitti;
mod synthetic;

pub use kitti::{read_calib, read_tracking_labels, CalibVeloToCam};
pub use synthetic::{generate_synthetic, FrameSample, ObjectSpec, SyntheticScenario};

use crate::classification::ClassId;
use crate::error::{Error, Result};
use crate::geometry::{OrientedBox, Pose2};
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;

/// One 3D scan: point list plus timestamp and ego pose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub index: usize,
    pub timestamp: f64,
    pub points: Vec<[f64; 3]>,
    pub ego_pose: Pose2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthObject {
    pub frame_index: usize,
    pub track_id: i64,
    pub class: ClassId,
    #[serde(rename = "box")]
    pub bbox: OrientedBox,
}

/// Read a KITTI Velodyne binary container: 4 little-endian f32 per point
/// (x, y, z, reflectance). Reflectance is dropped, order preserved.
pub fn read_point_cloud(path: &Path) -> Result<Vec<[f64; 3]>> {
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    decode_point_cloud(&buf)
}

pub fn decode_point_cloud(buf: &[u8]) -> Result<Vec<[f64; 3]>> {
    if buf.len() % 16 != 0 {
        return Err(Error::Format(format!(
            "point cloud length {} is not a multiple of 16 bytes",
            buf.len()
        )));
    }
    let mut points = Vec::with_capacity(buf.len() / 16);
    for rec in buf.chunks_exact(16) {
        let x = f32::from_le_bytes(rec[0..4].try_into().unwrap()) as f64;
        let y = f32::from_le_bytes(rec[4..8].try_into().unwrap()) as f64;
        let z = f32::from_le_bytes(rec[8..12].try_into().unwrap()) as f64;
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite point at record {}",
                points.len()
            )));
        }
        points.push([x, y, z]);
    }
    Ok(points)
}

/// Transform a point from the frame's sensor frame to the world frame.
pub fn point_to_world(frame: &Frame, p: [f64; 3]) -> [f64; 3] {
    frame.ego_pose.apply_point(p)
}

/// Transform an oriented box from the frame's sensor frame to the world
/// frame. z, l, w, h are unchanged by the planar transform.
pub fn box_to_world(frame: &Frame, b: &OrientedBox) -> OrientedBox {
    b.transformed(&frame.ego_pose)
}

/// Read a sidecar ego-pose CSV: `frame,x,y,heading`, one row per frame.
/// A header row is permitted.
pub fn read_poses(path: &Path) -> Result<Vec<(usize, Pose2)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(|s| s.trim()).collect();
        if lineno == 0 && fields[0].parse::<usize>().is_err() {
            continue; // header
        }
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad number {s:?}"),
            })
        };
        let frame = fields[0].parse::<usize>().map_err(|_| Error::Parse {
            line: lineno + 1,
            msg: format!("bad frame index {:?}", fields[0]),
        })?;
        out.push((
            frame,
            Pose2 {
                x: parse(fields[1])?,
                y: parse(fields[2])?,
                heading: parse(fields[3])?,
            },
        ));
    }
    Ok(out)
}
