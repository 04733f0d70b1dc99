//! Per-object extended Kalman filter: planar constant-velocity motion with
//! centroid-position observations. The covariance update uses the Joseph
//! form so the posterior stays symmetric PSD.

use crate::error::{Error, Result};
use crate::geometry::wrap_pi;
use nalgebra::{Matrix2, Matrix2x4, Matrix4, Matrix4x2, Vector2, Vector4};
use serde::{Deserialize, Serialize};

/// EKF state: world-frame position, motion heading, and speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub cov: Matrix4<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Process noise diagonal (x, y, theta, v).
    pub q: [f64; 4],
    /// Measurement noise diagonal (x, y).
    pub r: [f64; 2],
    /// Initial covariance diagonal.
    pub p0: [f64; 4],
    /// Nominal inter-frame interval, seconds.
    pub dt: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        let half_pi = std::f64::consts::FRAC_PI_2;
        NoiseConfig {
            q: [0.01, 0.01, 0.05, 0.1],
            r: [0.04, 0.04],
            p0: [0.25, 0.25, half_pi * half_pi, 4.0],
            dt: 0.1,
        }
    }
}

/// New track from a proposal centroid: heading and speed start at zero.
pub fn initialize(centroid_x: f64, centroid_y: f64, noise: &NoiseConfig) -> TrackState {
    TrackState {
        x: centroid_x,
        y: centroid_y,
        theta: 0.0,
        v: 0.0,
        cov: Matrix4::from_diagonal(&Vector4::from(noise.p0)),
    }
}

/// Constant-velocity propagation: x += dt cos(theta) v, y += dt sin(theta) v.
pub fn predict(state: &TrackState, dt: f64, noise: &NoiseConfig) -> TrackState {
    assert!(dt > 0.0, "predict requires dt > 0");
    let (s, c) = state.theta.sin_cos();
    let x = state.x + dt * c * state.v;
    let y = state.y + dt * s * state.v;

    let jac = motion_jacobian(state, dt);
    let q = Matrix4::from_diagonal(&Vector4::from(noise.q));
    let cov = jac * state.cov * jac.transpose() + q;
    TrackState {
        x,
        y,
        theta: wrap_pi(state.theta),
        v: state.v,
        cov: symmetrize(cov),
    }
}

/// Analytic Jacobian of the constant-velocity motion model.
pub fn motion_jacobian(state: &TrackState, dt: f64) -> Matrix4<f64> {
    let (s, c) = state.theta.sin_cos();
    Matrix4::new(
        1.0, 0.0, -dt * s * state.v, dt * c, //
        0.0, 1.0, dt * c * state.v, dt * s, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

/// EKF measurement update with H selecting (x, y).
pub fn update(state: &TrackState, obs: &Observation, noise: &NoiseConfig) -> Result<TrackState> {
    let h = Matrix2x4::new(
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0,
    );
    let r = Matrix2::from_diagonal(&Vector2::new(noise.r[0], noise.r[1]));
    let innovation = Vector2::new(obs.x - state.x, obs.y - state.y);
    if !innovation.iter().all(|v| v.is_finite()) {
        return Err(Error::Numeric("non-finite innovation".into()));
    }
    let s_mat = h * state.cov * h.transpose() + r;
    let s_inv = s_mat
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular innovation covariance".into()))?;
    let k: Matrix4x2<f64> = state.cov * h.transpose() * s_inv;
    let mean = Vector4::new(state.x, state.y, state.theta, state.v) + k * innovation;

    // Joseph form: (I - KH) P (I - KH)^T + K R K^T
    let ikh = Matrix4::identity() - k * h;
    let cov = ikh * state.cov * ikh.transpose() + k * r * k.transpose();
    Ok(TrackState {
        x: mean[0],
        y: mean[1],
        theta: wrap_pi(mean[2]),
        v: mean[3],
        cov: symmetrize(cov),
    })
}

fn symmetrize(m: Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) / 2.0
}

/// Smallest eigenvalue of the covariance; used by PSD checks.
pub fn min_eigenvalue(cov: &Matrix4<f64>) -> f64 {
    cov.symmetric_eigenvalues().min()
}
