//! On-disk formats shared by the CLI and the library.
//!
//! Trajectories use the TUM convention: one sample per line, ASCII,
//! space-separated `timestamp tx ty tz qx qy qz qw`, with `#`-prefixed
//! comment lines ignored. Joint sequences are JSON Lines with one
//! object per frame: `{"t": <seconds>, "joints": [[x,y,z] x21]}`.
//! Pixel observations follow the same shape with a `"px"` key.

use crate::geometry::{PixelPoint, PoseSE3, UnitQuaternion, Vec3};
use crate::metrics::{JointFrame, MetricsError, Trajectory, TrajectorySample, JOINT_COUNT};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{path}: {source}")]
    File {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Invalid(#[from] MetricsError),
}

fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path)
        .map_err(|e| IoError::File { path: path.display().to_string(), source: e })
}

fn write_string(path: &Path, contents: &str) -> Result<(), IoError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| IoError::File { path: path.display().to_string(), source: e })?;
    }
    std::fs::write(path, contents)
        .map_err(|e| IoError::File { path: path.display().to_string(), source: e })
}

/// Parses a TUM-format trajectory from a string. `source` is used in
/// error messages only.
pub fn parse_tum(contents: &str, source: &str) -> Result<Trajectory, IoError> {
    let mut samples = Vec::new();
    for (idx, raw) in contents.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(IoError::Parse {
                path: source.to_string(),
                line: idx + 1,
                message: format!("expected 8 fields (t tx ty tz qx qy qz qw), got {}", fields.len()),
            });
        }
        let mut vals = [0.0f64; 8];
        for (k, f) in fields.iter().enumerate() {
            vals[k] = f.parse().map_err(|_| IoError::Parse {
                path: source.to_string(),
                line: idx + 1,
                message: format!("field {} is not a number: {f:?}", k + 1),
            })?;
        }
        samples.push(TrajectorySample {
            t: vals[0],
            pose: PoseSE3::new(
                UnitQuaternion::new(vals[7], vals[4], vals[5], vals[6]),
                Vec3::new(vals[1], vals[2], vals[3]),
            ),
        });
    }
    Ok(Trajectory::new(samples)?)
}

pub fn read_tum(path: &Path) -> Result<Trajectory, IoError> {
    parse_tum(&read_to_string(path)?, &path.display().to_string())
}

/// Serializes a trajectory in TUM format with 9 significant digits.
pub fn format_tum(traj: &Trajectory) -> String {
    let mut out = String::from("# timestamp tx ty tz qx qy qz qw\n");
    for s in traj.samples() {
        let (t, p, q) = (s.t, s.pose.translation, s.pose.rotation);
        writeln!(
            out,
            "{t:.9} {:.9} {:.9} {:.9} {:.9} {:.9} {:.9} {:.9}",
            p.x, p.y, p.z, q.x, q.y, q.z, q.w
        )
        .expect("write to string");
    }
    out
}

pub fn write_tum(path: &Path, traj: &Trajectory) -> Result<(), IoError> {
    write_string(path, &format_tum(traj))
}

#[derive(Serialize, Deserialize)]
struct PixelRow {
    t: f64,
    px: Vec<PixelPoint>,
}

/// One frame of observed pixel keypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelFrame {
    pub t: f64,
    pub px: [PixelPoint; JOINT_COUNT],
}

fn parse_jsonl<T: serde::de::DeserializeOwned>(
    contents: &str,
    source: &str,
) -> Result<Vec<T>, IoError> {
    let mut rows = Vec::new();
    for (idx, raw) in contents.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(line).map_err(|e| IoError::Parse {
            path: source.to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?);
    }
    Ok(rows)
}

/// Reads joint frames from JSON Lines, enforcing exactly 21 joints.
pub fn parse_joint_frames(contents: &str, source: &str) -> Result<Vec<JointFrame>, IoError> {
    #[derive(Deserialize)]
    struct Row {
        t: f64,
        joints: Vec<Vec3>,
    }
    let rows: Vec<Row> = parse_jsonl(contents, source)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let joints: [Vec3; JOINT_COUNT] = r.joints.try_into().map_err(|v: Vec<Vec3>| {
                IoError::Parse {
                    path: source.to_string(),
                    line: i + 1,
                    message: format!("expected {JOINT_COUNT} joints, got {}", v.len()),
                }
            })?;
            Ok(JointFrame::new(r.t, joints))
        })
        .collect()
}

pub fn read_joint_frames(path: &Path) -> Result<Vec<JointFrame>, IoError> {
    parse_joint_frames(&read_to_string(path)?, &path.display().to_string())
}

pub fn format_joint_frames(frames: &[JointFrame]) -> String {
    let mut out = String::new();
    for f in frames {
        out.push_str(&serde_json::to_string(f).expect("serialize joint frame"));
        out.push('\n');
    }
    out
}

pub fn write_joint_frames(path: &Path, frames: &[JointFrame]) -> Result<(), IoError> {
    write_string(path, &format_joint_frames(frames))
}

pub fn parse_pixel_frames(contents: &str, source: &str) -> Result<Vec<PixelFrame>, IoError> {
    let rows: Vec<PixelRow> = parse_jsonl(contents, source)?;
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| {
            let px: [PixelPoint; JOINT_COUNT] =
                r.px.try_into().map_err(|v: Vec<PixelPoint>| IoError::Parse {
                    path: source.to_string(),
                    line: i + 1,
                    message: format!("expected {JOINT_COUNT} pixel points, got {}", v.len()),
                })?;
            Ok(PixelFrame { t: r.t, px })
        })
        .collect()
}

pub fn read_pixel_frames(path: &Path) -> Result<Vec<PixelFrame>, IoError> {
    parse_pixel_frames(&read_to_string(path)?, &path.display().to_string())
}

pub fn format_pixel_frames(frames: &[PixelFrame]) -> String {
    let mut out = String::new();
    for f in frames {
        let row = PixelRow { t: f.t, px: f.px.to_vec() };
        out.push_str(&serde_json::to_string(&row).expect("serialize pixel frame"));
        out.push('\n');
    }
    out
}

pub fn write_pixel_frames(path: &Path, frames: &[PixelFrame]) -> Result<(), IoError> {
    write_string(path, &format_pixel_frames(frames))
}

/// Reads any JSON value from a file with path-qualified errors.
pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| IoError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Writes a value as pretty JSON.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut s = serde_json::to_string_pretty(value).expect("serialize json");
    s.push('\n');
    write_string(path, &s)
}
