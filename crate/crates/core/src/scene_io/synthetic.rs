//! Synthetic scenario generation. Objects move at constant velocity and are
//! rendered as points sampled on box faces visible from the sensor, with
//! density decaying with distance, so the view of an object changes as the
//! relative geometry changes.

use crate::classification::ClassId;
use crate::error::{Error, Result};
use crate::geometry::{OrientedBox, Pose2};
use crate::scene_io::{Frame, GroundTruthObject};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSpec {
    pub class: ClassId,
    /// (l, w, h) metres.
    pub size: [f64; 3],
    pub spawn: usize,
    pub despawn: usize,
    /// World-frame constant velocity (vx, vy) m/s.
    pub velocity: [f64; 2],
    /// (x, y, heading) at spawn.
    pub initial_pose: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScenario {
    pub duration_frames: usize,
    /// Half-extent of the square ground patch around the sensor.
    #[serde(default = "default_ground_extent")]
    pub ground_extent: f64,
    /// Grid spacing of ground points, metres.
    #[serde(default = "default_ground_spacing")]
    pub ground_spacing: f64,
    pub sensor_range: f64,
    #[serde(default = "default_noise_std")]
    pub noise_std: f64,
    #[serde(default = "default_frame_dt")]
    pub frame_dt: f64,
    /// Points per square metre of visible surface at 10 m distance.
    #[serde(default = "default_surface_density")]
    pub surface_density: f64,
    pub seed: u64,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
}

fn default_ground_extent() -> f64 {
    40.0
}
fn default_ground_spacing() -> f64 {
    1.0
}
fn default_noise_std() -> f64 {
    0.02
}
fn default_frame_dt() -> f64 {
    0.1
}
fn default_surface_density() -> f64 {
    12.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSample {
    pub frame: Frame,
    pub ground_truth: Vec<GroundTruthObject>,
}

impl SyntheticScenario {
    pub fn validate(&self) -> Result<()> {
        if self.sensor_range <= 0.0 {
            return Err(Error::Config("sensor_range must be positive".into()));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if o.despawn <= o.spawn {
                return Err(Error::Config(format!(
                    "object {i}: despawn {} must exceed spawn {}",
                    o.despawn, o.spawn
                )));
            }
            if o.size.iter().any(|&s| s <= 0.0) {
                return Err(Error::Config(format!("object {i}: non-positive size")));
            }
        }
        Ok(())
    }

    pub fn object_box_at(&self, spec: &ObjectSpec, frame: usize) -> OrientedBox {
        let t = (frame - spec.spawn) as f64 * self.frame_dt;
        OrientedBox {
            x: spec.initial_pose[0] + spec.velocity[0] * t,
            y: spec.initial_pose[1] + spec.velocity[1] * t,
            z: spec.size[2] / 2.0,
            l: spec.size[0],
            w: spec.size[1],
            h: spec.size[2],
            yaw: spec.initial_pose[2],
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Deterministically generate the full sequence for a scenario.
pub fn generate_synthetic(scenario: &SyntheticScenario) -> Result<Vec<FrameSample>> {
    scenario.validate()?;
    let mut out = Vec::with_capacity(scenario.duration_frames);
    for k in 0..scenario.duration_frames {
        out.push(generate_frame(scenario, k));
    }
    Ok(out)
}

fn generate_frame(sc: &SyntheticScenario, k: usize) -> FrameSample {
    let mut rng = ChaCha20Rng::seed_from_u64(splitmix64(sc.seed ^ (k as u64).wrapping_mul(0x9e37)));
    let noise = Normal::new(0.0, sc.noise_std.max(1e-12)).unwrap();
    let mut points = Vec::new();

    // Ground grid, clipped to sensor range.
    let extent = sc.ground_extent.min(sc.sensor_range);
    let steps = (2.0 * extent / sc.ground_spacing).floor() as i64;
    for ix in 0..=steps {
        for iy in 0..=steps {
            let x = -extent + ix as f64 * sc.ground_spacing;
            let y = -extent + iy as f64 * sc.ground_spacing;
            if x.hypot(y) > sc.sensor_range {
                continue;
            }
            points.push([x, y, noise.sample(&mut rng)]);
        }
    }

    let mut ground_truth = Vec::new();
    for (oid, spec) in sc.objects.iter().enumerate() {
        if k < spec.spawn || k >= spec.despawn {
            continue;
        }
        let bbox = sc.object_box_at(spec, k);
        ground_truth.push(GroundTruthObject {
            frame_index: k,
            track_id: oid as i64,
            class: spec.class,
            bbox,
        });
        let dist = bbox.x.hypot(bbox.y);
        if dist > sc.sensor_range {
            continue; // out of range: no points emitted
        }
        sample_box_surface(&bbox, dist, sc.surface_density, &noise, &mut rng, &mut points);
    }

    FrameSample {
        frame: Frame {
            index: k,
            timestamp: k as f64 * sc.frame_dt,
            points,
            ego_pose: Pose2::identity(),
        },
        ground_truth,
    }
}

/// Sample points on the side faces of a box that face the sensor at the
/// origin. Point count per face scales with face area and falls off with
/// the square of distance. At least a few points are always emitted for
/// in-range objects.
fn sample_box_surface(
    bbox: &OrientedBox,
    dist: f64,
    density: f64,
    noise: &Normal<f64>,
    rng: &mut ChaCha20Rng,
    points: &mut Vec<[f64; 3]>,
) {
    let (s, c) = bbox.yaw.sin_cos();
    // Face definitions in the box frame: (centre offset, outward normal, span).
    let hl = bbox.l / 2.0;
    let hw = bbox.w / 2.0;
    let faces = [
        ([hl, 0.0], [1.0, 0.0], bbox.w),  // front
        ([-hl, 0.0], [-1.0, 0.0], bbox.w), // back
        ([0.0, hw], [0.0, 1.0], bbox.l),  // left
        ([0.0, -hw], [0.0, -1.0], bbox.l), // right
    ];
    let falloff = (10.0 / dist.max(1.0)).powi(2);
    let mut emitted = 0usize;
    for (offset, normal, span) in faces {
        let fc = [
            bbox.x + c * offset[0] - s * offset[1],
            bbox.y + s * offset[0] + c * offset[1],
        ];
        let n_world = [c * normal[0] - s * normal[1], s * normal[0] + c * normal[1]];
        let to_sensor = [-fc[0], -fc[1]];
        let visible = n_world[0] * to_sensor[0] + n_world[1] * to_sensor[1] > 0.0;
        if !visible {
            continue;
        }
        let area = span * bbox.h;
        let n = ((density * area * falloff).round() as usize).clamp(2, 4000);
        // Tangent along the face in world coordinates.
        let tangent = [-n_world[1], n_world[0]];
        for _ in 0..n {
            let u: f64 = rng.gen_range(-0.5..0.5) * span;
            let v: f64 = rng.gen_range(0.0..bbox.h);
            points.push([
                fc[0] + tangent[0] * u + noise.sample(rng),
                fc[1] + tangent[1] * u + noise.sample(rng),
                v + noise.sample(rng),
            ]);
            emitted += 1;
        }
    }
    if emitted == 0 {
        // Degenerate viewing geometry: emit a handful at the nearest corner.
        for _ in 0..3 {
            points.push([
                bbox.x + noise.sample(rng),
                bbox.y + noise.sample(rng),
                bbox.h / 2.0 + noise.sample(rng),
            ]);
        }
    }
}
