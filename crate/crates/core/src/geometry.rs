//! Planar geometry shared by segmentation, association, and evaluation:
//! oriented boxes, convex hulls, polygon clipping, and rigid transforms.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Planar rigid transform (sensor in world frame).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2 {
    pub fn identity() -> Self {
        Pose2 {
            x: 0.0,
            y: 0.0,
            heading: 0.0,
        }
    }

    pub fn apply_point(&self, p: [f64; 3]) -> [f64; 3] {
        let (s, c) = self.heading.sin_cos();
        [
            self.x + c * p[0] - s * p[1],
            self.y + s * p[0] + c * p[1],
            p[2],
        ]
    }

    pub fn apply_xy(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.heading.sin_cos();
        (self.x + c * x - s * y, self.y + s * x + c * y)
    }

    pub fn inverse(&self) -> Pose2 {
        let (s, c) = self.heading.sin_cos();
        Pose2 {
            x: -(c * self.x + s * self.y),
            y: -(-s * self.x + c * self.y),
            heading: -self.heading,
        }
    }
}

/// Oriented 3D box: centre (x,y,z), footprint l×w, height h, yaw about z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub l: f64,
    pub w: f64,
    pub h: f64,
    pub yaw: f64,
}

impl OrientedBox {
    /// Corners of the BEV footprint, counter-clockwise.
    pub fn bev_corners(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.yaw.sin_cos();
        let hl = self.l / 2.0;
        let hw = self.w / 2.0;
        let mut out = [[0.0; 2]; 4];
        for (i, (dx, dy)) in [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
            .iter()
            .enumerate()
        {
            out[i] = [self.x + c * dx - s * dy, self.y + s * dx + c * dy];
        }
        out
    }

    pub fn footprint_area(&self) -> f64 {
        self.l * self.w
    }

    pub fn volume(&self) -> f64 {
        self.l * self.w * self.h
    }

    /// Point-in-footprint test in the box's own frame.
    pub fn contains_bev(&self, x: f64, y: f64) -> bool {
        let (s, c) = self.yaw.sin_cos();
        let dx = x - self.x;
        let dy = y - self.y;
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        u.abs() <= self.l / 2.0 && v.abs() <= self.w / 2.0
    }

    pub fn transformed(&self, pose: &Pose2) -> OrientedBox {
        let (x, y) = pose.apply_xy(self.x, self.y);
        OrientedBox {
            x,
            y,
            yaw: wrap_pi(self.yaw + pose.heading),
            ..*self
        }
    }
}

/// Wrap an angle to (-pi, pi].
pub fn wrap_pi(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Wrap an angle to (-pi/2, pi/2] (minimum rectangles have 180 deg symmetry).
pub fn wrap_half_pi(a: f64) -> f64 {
    let mut a = wrap_pi(a);
    if a <= -PI / 2.0 {
        a += PI;
    } else if a > PI / 2.0 {
        a -= PI;
    }
    a
}

/// Andrew monotone chain. Returns hull vertices counter-clockwise,
/// without the closing point. Collinear inputs yield a 1- or 2-point "hull".
pub fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * n);
    for &p in pts.iter() {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev() {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Shoelace area of a simple polygon (positive for counter-clockwise).
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    acc / 2.0
}

/// Sutherland-Hodgman clip of `subject` against a convex clip polygon
/// given counter-clockwise.
pub fn clip_polygon(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut output = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let input = std::mem::take(&mut output);
        let inside =
            |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0;
        let intersect = |p: [f64; 2], q: [f64; 2]| -> [f64; 2] {
            let dx = q[0] - p[0];
            let dy = q[1] - p[1];
            let ex = b[0] - a[0];
            let ey = b[1] - a[1];
            let denom = ex * dy - ey * dx;
            let t = (ex * (a[1] - p[1]) - ey * (a[0] - p[0])) / denom;
            [p[0] + t * dx, p[1] + t * dy]
        };
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            if inside(cur) {
                if !inside(prev) {
                    output.push(intersect(prev, cur));
                }
                output.push(cur);
            } else if inside(prev) {
                output.push(intersect(prev, cur));
            }
        }
    }
    output
}

/// BEV intersection-over-union of two oriented boxes via polygon clipping.
pub fn bev_iou(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let area_a = a.footprint_area();
    let area_b = b.footprint_area();
    if area_a <= 0.0 || area_b <= 0.0 {
        return 0.0;
    }
    let pa = a.bev_corners();
    let pb = b.bev_corners();
    let inter = polygon_area(&clip_polygon(&pa, &pb)).abs();
    let union = area_a + area_b - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Minimum-area oriented rectangle of a point set's BEV projection.
/// Returns (cx, cy, l, w, yaw) with l >= w and yaw in (-pi/2, pi/2].
/// The optimum shares an edge direction with the convex hull, so sweeping
/// hull edges is exact.
pub fn min_area_rect(points: &[[f64; 2]]) -> (f64, f64, f64, f64, f64) {
    assert!(!points.is_empty());
    let hull = convex_hull(points);
    if hull.len() == 1 {
        return (hull[0][0], hull[0][1], 0.0, 0.0, 0.0);
    }
    let mut best: Option<(f64, f64, f64, f64, f64, f64)> = None; // (area, cx, cy, l, w, yaw)
    let edges: Vec<f64> = if hull.len() == 2 {
        vec![(hull[1][1] - hull[0][1]).atan2(hull[1][0] - hull[0][0])]
    } else {
        (0..hull.len())
            .map(|i| {
                let a = hull[i];
                let b = hull[(i + 1) % hull.len()];
                (b[1] - a[1]).atan2(b[0] - a[0])
            })
            .collect()
    };
    for angle in edges {
        let (s, c) = angle.sin_cos();
        let mut umin = f64::INFINITY;
        let mut umax = f64::NEG_INFINITY;
        let mut vmin = f64::INFINITY;
        let mut vmax = f64::NEG_INFINITY;
        for p in &hull {
            let u = c * p[0] + s * p[1];
            let v = -s * p[0] + c * p[1];
            umin = umin.min(u);
            umax = umax.max(u);
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
        let du = umax - umin;
        let dv = vmax - vmin;
        let area = du * dv;
        if best.map_or(true, |b| area < b.0) {
            let uc = (umin + umax) / 2.0;
            let vc = (vmin + vmax) / 2.0;
            let cx = c * uc - s * vc;
            let cy = s * uc + c * vc;
            let (l, w, yaw) = if du >= dv {
                (du, dv, angle)
            } else {
                (dv, du, angle + PI / 2.0)
            };
            best = Some((area, cx, cy, l, w, wrap_half_pi(yaw)));
        }
    }
    let (_, cx, cy, l, w, yaw) = best.unwrap();
    (cx, cy, l, w, yaw)
}
