//! Simultaneous classification and tracking over streams of 3D point clouds.
//!
//! A cheap class-agnostic segmenter runs on every frame, an expensive
//! classifier runs only for proposals the tracker cannot explain, and a
//! Bayesian fusion model accumulates classification confidence across
//! independent keyframes.

pub mod association;
pub mod classification;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod fusion;
pub mod geometry;
pub mod lifecycle;
pub mod pipeline;
pub mod scene_io;
pub mod segmentation;
pub mod tracking;

pub use classification::{ClassBelief, ClassId};
pub use error::Error;
pub use geometry::{OrientedBox, Pose2};
pub use scene_io::Frame;
pub use segmentation::Proposal;
