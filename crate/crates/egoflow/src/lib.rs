//! Deterministic building blocks for egocentric data collection at fleet scale.
//!
//! The crate covers the full path from a recording device to a curated clip:
//!
//! - [`geometry`]: rigid/similarity transforms, pinhole projection with radial
//!   distortion, Umeyama point-set alignment, intrinsics deviation reports.
//! - [`metrics`]: trajectory evaluation (ATE, ATE-S, RPE) and hand-pose
//!   evaluation (MPJPE, PA-MPJPE, PCK/AUC) with timestamp association.
//! - [`kinematics`]: camera-to-world hand transforms, joint velocities,
//!   3-sigma outlier detection, sliding-window smoothing.
//! - [`qc`]: the quality-control stage — velocity and reprojection filters,
//!   deterministic inspection sampling, hard-negative pool routing.
//! - [`pipeline`]: a declarative DAG engine with versioned operators,
//!   hot-swap without restart, and CPU/GPU resource-class scheduling.
//! - [`fleetsim`]: a discrete-event simulator of geo-distributed ingestion:
//!   routing, replication, partitions, and queue-driven autoscaling.
//! - [`device`]: the always-on collection app state machine
//!   (monitor / record / review / upload).
//! - [`synth`]: seeded ground-truth generators used as oracles everywhere.
//! - [`io`]: the on-disk formats (TUM trajectories, JSON Lines joint tracks).
//! - [`cli`]: the `egoflow` command-line entry point.
//!
//! Everything is deterministic: identical inputs and seeds produce
//! byte-identical reports. See the `examples/` directory for one runnable
//! example per capability.

pub mod cli;
pub mod clock;
pub mod device;
pub mod fleetsim;
pub mod geometry;
pub mod io;
pub mod kinematics;
pub mod metrics;
pub mod pipeline;
pub mod qc;
pub mod stablehash;
pub mod stats;
pub mod synth;

pub use geometry::{CameraIntrinsics, PixelPoint, PoseSE3, Sim3Transform, UnitQuaternion, Vec3};
// re-exports added as modules land
pub use metrics::{JointFrame, PoseReport, Trajectory, TrajectoryReport, JOINT_COUNT};

