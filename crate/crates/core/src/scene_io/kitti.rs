//! KITTI tracking label and calibration parsing.
//!
//! Labels are annotated in the camera frame; boxes are converted to the
//! sensor (Velodyne) frame using the inverse of Tr_velo_to_cam. The KITTI
//! camera frame has x right, y down, z forward; the Velodyne frame has
//! x forward, y left, z up, which gives yaw_velo = -rotation_y - pi/2.

use crate::classification::ClassId;
use crate::error::{Error, Result};
use crate::geometry::{wrap_pi, OrientedBox};
use crate::scene_io::GroundTruthObject;
use std::path::Path;

/// Row-major 3x4 rigid transform taking Velodyne coordinates to camera
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibVeloToCam(pub [[f64; 4]; 3]);

impl CalibVeloToCam {
    pub fn identity() -> Self {
        CalibVeloToCam([
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
    }

    /// Apply the inverse transform: camera frame -> Velodyne frame.
    pub fn cam_to_velo(&self, p: [f64; 3]) -> [f64; 3] {
        let m = &self.0;
        let d = [p[0] - m[0][3], p[1] - m[1][3], p[2] - m[2][3]];
        // R is orthonormal, so the inverse rotation is the transpose.
        [
            m[0][0] * d[0] + m[1][0] * d[1] + m[2][0] * d[2],
            m[0][1] * d[0] + m[1][1] * d[1] + m[2][1] * d[2],
            m[0][2] * d[0] + m[1][2] * d[1] + m[2][2] * d[2],
        ]
    }
}

/// Parse a KITTI calibration file and extract the `Tr_velo_to_cam` entry.
pub fn read_calib(path: &Path) -> Result<CalibVeloToCam> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        let Some(key) = parts.next() else { continue };
        let key = key.trim_end_matches(':');
        if key == "Tr_velo_to_cam" || key == "Tr_velo_cam" {
            let vals: Vec<f64> = parts.filter_map(|s| s.parse().ok()).collect();
            if vals.len() != 12 {
                return Err(Error::Format(format!(
                    "Tr_velo_to_cam has {} values, expected 12",
                    vals.len()
                )));
            }
            let mut m = [[0.0; 4]; 3];
            for r in 0..3 {
                for c in 0..4 {
                    m[r][c] = vals[r * 4 + c];
                }
            }
            return Ok(CalibVeloToCam(m));
        }
    }
    Err(Error::Format("calib file has no Tr_velo_to_cam entry".into()))
}

fn map_class(kitti_type: &str) -> Option<ClassId> {
    match kitti_type {
        "Car" => Some(ClassId::Car),
        "Pedestrian" => Some(ClassId::Pedestrian),
        "Cyclist" => Some(ClassId::Cyclist),
        "DontCare" => None,
        _ => Some(ClassId::Background),
    }
}

/// Parse KITTI tracking labels and convert boxes into the sensor frame.
/// "DontCare" rows are dropped; types outside {Car, Pedestrian, Cyclist}
/// map to background.
pub fn read_tracking_labels(path: &Path, calib: &CalibVeloToCam) -> Result<Vec<GroundTruthObject>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    parse_tracking_labels(&text, calib)
}

pub fn parse_tracking_labels(text: &str, calib: &CalibVeloToCam) -> Result<Vec<GroundTruthObject>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        // frame track_id type truncated occluded alpha bbox(4) h w l x y z ry
        if f.len() < 17 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected 17 fields, got {}", f.len()),
            });
        }
        let num = |idx: usize| -> Result<f64> {
            f[idx].parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad number {:?} in field {idx}", f[idx]),
            })
        };
        let Some(class) = map_class(f[2]) else {
            continue;
        };
        let frame_index = num(0)? as usize;
        let track_id = num(1)? as i64;
        let h = num(10)?;
        let w = num(11)?;
        let l = num(12)?;
        let loc = [num(13)?, num(14)?, num(15)?];
        let ry = num(16)?;
        // KITTI location is the bottom-centre of the box in camera coords.
        let p = calib.cam_to_velo(loc);
        out.push(GroundTruthObject {
            frame_index,
            track_id,
            class,
            bbox: OrientedBox {
                x: p[0],
                y: p[1],
                z: p[2] + h / 2.0,
                l,
                w,
                h,
                yaw: wrap_pi(-ry - std::f64::consts::FRAC_PI_2),
            },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_labels() {
        let objs = parse_tracking_labels("", &CalibVeloToCam::identity()).unwrap();
        assert!(objs.is_empty());
    }

    #[test]
    fn one_car_row_identity_calib() {
        // Hand-converted row: location (2, 1.6, 10) camera frame, ry = 0.3.
        let row = "5 3 Car 0 0 0.0 100 100 200 200 1.5 1.7 4.2 2.0 1.6 10.0 0.3";
        let objs = parse_tracking_labels(row, &CalibVeloToCam::identity()).unwrap();
        assert_eq!(objs.len(), 1);
        let o = &objs[0];
        assert_eq!(o.frame_index, 5);
        assert_eq!(o.track_id, 3);
        assert_eq!(o.class, ClassId::Car);
        assert_relative_eq!(o.bbox.x, 2.0);
        assert_relative_eq!(o.bbox.y, 1.6);
        assert_relative_eq!(o.bbox.z, 10.0 + 0.75);
        assert_relative_eq!(o.bbox.l, 4.2);
        assert_relative_eq!(o.bbox.w, 1.7);
        assert_relative_eq!(o.bbox.h, 1.5);
        assert_relative_eq!(
            o.bbox.yaw,
            wrap_pi(-0.3 - std::f64::consts::FRAC_PI_2),
            epsilon = 1e-12
        );
    }

    #[test]
    fn van_maps_to_background_and_dontcare_dropped() {
        let text = "0 1 Van 0 0 0.0 0 0 0 0 2.0 2.0 5.0 0 0 5 0\n\
                    0 2 DontCare 0 0 0.0 0 0 0 0 1 1 1 0 0 5 0";
        let objs = parse_tracking_labels(text, &CalibVeloToCam::identity()).unwrap();
        assert_eq!(objs.len(), 1);
        assert_eq!(objs[0].class, ClassId::Background);
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "0 1 Car 0 0\n";
        let err = parse_tracking_labels(text, &CalibVeloToCam::identity()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn cam_to_velo_inverts_velo_to_cam() {
        // A real-ish Tr_velo_to_cam: rotation velo->cam axes plus offset.
        let calib = CalibVeloToCam([
            [0.0, -1.0, 0.0, 0.1],
            [0.0, 0.0, -1.0, -0.05],
            [1.0, 0.0, 0.0, 0.3],
        ]);
        let velo = [7.0, 2.0, -0.5];
        let m = calib.0;
        let cam = [
            m[0][0] * velo[0] + m[0][1] * velo[1] + m[0][2] * velo[2] + m[0][3],
            m[1][0] * velo[0] + m[1][1] * velo[1] + m[1][2] * velo[2] + m[1][3],
            m[2][0] * velo[0] + m[2][1] * velo[1] + m[2][2] * velo[2] + m[2][3],
        ];
        let back = calib.cam_to_velo(cam);
        for i in 0..3 {
            assert_relative_eq!(back[i], velo[i], epsilon = 1e-12);
        }
    }
}
