//! Trajectory and hand-pose evaluation.
//!
//! Trajectory metrics follow the usual conventions: ATE aligns the
//! estimate to ground truth with a similarity (7-DoF) or rigid (6-DoF)
//! transform before taking the position RMSE, and RPE compares relative
//! motion over a fixed index step with no global alignment. Hand-pose
//! metrics are MPJPE, Procrustes-aligned MPJPE, and the PCK curve with
//! its normalized area.
//!
//! All metrics are deterministic: identical inputs give bit-identical
//! outputs (per-frame reductions run in a fixed order).

use crate::geometry::{umeyama_align, GeometryError, PoseSE3, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hand keypoints per frame. Wrist plus four joints for each of five
/// fingers, in the standard 21-point layout.
pub const JOINT_COUNT: usize = 21;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("no overlapping samples within the association window")]
    NoOverlap,
    #[error("frame count mismatch: {pred} predicted vs {gt} ground truth")]
    LengthMismatch { pred: usize, gt: usize },
    #[error("not enough pairs: need {needed}, have {available}")]
    InsufficientPairs { needed: usize, available: usize },
    #[error("timestamps must be strictly increasing (sample {index})")]
    NonMonotonicTimestamps { index: usize },
    #[error(transparent)]
    Degenerate(#[from] GeometryError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// A timestamped camera pose (world from camera).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub pose: PoseSE3,
}

/// An ordered sequence of timestamped camera poses.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<TrajectorySample>,
}

impl Trajectory {
    /// Builds a trajectory, enforcing strictly increasing timestamps.
    pub fn new(samples: Vec<TrajectorySample>) -> Result<Self, MetricsError> {
        for (i, w) in samples.windows(2).enumerate() {
            if w[1].t <= w[0].t {
                return Err(MetricsError::NonMonotonicTimestamps { index: i + 1 });
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[TrajectorySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn timestamps(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.samples.iter().map(|s| s.pose.translation).collect()
    }

    /// Half the median sampling interval — the default association window.
    pub fn default_max_dt(&self) -> f64 {
        if self.samples.len() < 2 {
            return 0.02;
        }
        let mut gaps: Vec<f64> = self.samples.windows(2).map(|w| w[1].t - w[0].t).collect();
        gaps.sort_by(|a, b| a.total_cmp(b));
        gaps[gaps.len() / 2] / 2.0
    }
}

/// One frame of 21 hand keypoints in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointFrame {
    pub t: f64,
    pub joints: [Vec3; JOINT_COUNT],
}

impl JointFrame {
    pub fn new(t: f64, joints: [Vec3; JOINT_COUNT]) -> Self {
        Self { t, joints }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.joints.iter().all(|j| j.is_finite())
    }
}

/// Trajectory evaluation summary. Serialized field names are the file
/// format; do not rename.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub ate_rmse_m: f64,
    pub ate_s_rmse_m: f64,
    pub rpe_trans_rmse_m: f64,
    pub rpe_rot_rmse_deg: f64,
    pub n_pairs: usize,
}

/// Hand-pose evaluation summary (millimeters; AUC in `[0, 1]`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseReport {
    pub mpjpe_mm: f64,
    pub pa_mpjpe_mm: f64,
    pub auc: f64,
    pub n_frames: usize,
}

/// Greedy nearest-timestamp matching between two timestamp lists.
///
/// Candidate pairs within `max_dt` are taken best-first (smallest |dt|,
/// ties by index), each sample used at most once; the result is sorted
/// by the first list's index.
pub fn associate_timestamps(
    a: &[f64],
    b: &[f64],
    max_dt: f64,
) -> Result<Vec<(usize, usize)>, MetricsError> {
    if max_dt <= 0.0 {
        return Err(MetricsError::InvalidArgument(format!("max_dt must be > 0, got {max_dt}")));
    }
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    // Both lists are sorted, so only a moving window of b needs scanning.
    let mut start = 0usize;
    for (i, &ta) in a.iter().enumerate() {
        while start < b.len() && b[start] < ta - max_dt {
            start += 1;
        }
        let mut j = start;
        while j < b.len() && b[j] <= ta + max_dt {
            candidates.push(((ta - b[j]).abs(), i, j));
            j += 1;
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            pairs.push((i, j));
        }
    }
    if pairs.is_empty() {
        return Err(MetricsError::NoOverlap);
    }
    pairs.sort_by_key(|&(i, _)| i);
    Ok(pairs)
}

/// Associates estimate samples to ground-truth samples by timestamp.
pub fn associate(
    est: &Trajectory,
    gt: &Trajectory,
    max_dt: f64,
) -> Result<Vec<(usize, usize)>, MetricsError> {
    associate_timestamps(&est.timestamps(), &gt.timestamps(), max_dt)
}

/// Alignment family applied before the absolute error: similarity
/// (7-DoF, the plain ATE) or rigid (6-DoF, the scale-free ATE-S).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    Sim3,
    Se3,
}

/// Absolute trajectory error: RMSE of aligned estimate positions
/// against ground truth, in meters.
///
/// `max_dt = None` uses half the ground truth's median sampling interval.
pub fn ate(
    est: &Trajectory,
    gt: &Trajectory,
    alignment: Alignment,
    max_dt: Option<f64>,
) -> Result<f64, MetricsError> {
    let pairs = associate(est, gt, max_dt.unwrap_or_else(|| gt.default_max_dt()))?;
    if pairs.len() < 3 {
        return Err(MetricsError::InsufficientPairs { needed: 3, available: pairs.len() });
    }
    let src: Vec<Vec3> = pairs.iter().map(|&(i, _)| est.samples[i].pose.translation).collect();
    let dst: Vec<Vec3> = pairs.iter().map(|&(_, j)| gt.samples[j].pose.translation).collect();
    let t = umeyama_align(&src, &dst, alignment == Alignment::Sim3)?;
    let mse = src
        .iter()
        .zip(&dst)
        .map(|(s, d)| (t.apply(*s) - *d).norm_squared())
        .sum::<f64>()
        / pairs.len() as f64;
    Ok(mse.sqrt())
}

/// Relative pose error over `delta` associated-pair steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RpeResult {
    pub trans_rmse_m: f64,
    pub rot_rmse_deg: f64,
    pub n_rel_pairs: usize,
}

/// Relative pose error: for each associated index i, the discrepancy
/// between estimated and ground-truth motion from i to i+delta. No
/// global alignment is applied, so a constant left-composed transform
/// on either trajectory cancels out.
pub fn rpe(
    est: &Trajectory,
    gt: &Trajectory,
    delta: usize,
    max_dt: Option<f64>,
) -> Result<RpeResult, MetricsError> {
    if delta < 1 {
        return Err(MetricsError::InvalidArgument("rpe delta must be >= 1".into()));
    }
    let pairs = associate(est, gt, max_dt.unwrap_or_else(|| gt.default_max_dt()))?;
    if pairs.len() <= delta {
        return Err(MetricsError::InsufficientPairs { needed: delta + 1, available: pairs.len() });
    }
    let mut trans_sq = 0.0;
    let mut rot_sq = 0.0;
    let n = pairs.len() - delta;
    for k in 0..n {
        let (ei, gi) = pairs[k];
        let (ej, gj) = pairs[k + delta];
        let gt_rel = gt.samples[gi].pose.invert().compose(gt.samples[gj].pose);
        let est_rel = est.samples[ei].pose.invert().compose(est.samples[ej].pose);
        let err = gt_rel.invert().compose(est_rel);
        trans_sq += err.translation.norm_squared();
        let angle = err.rotation.angle();
        rot_sq += angle * angle;
    }
    Ok(RpeResult {
        trans_rmse_m: (trans_sq / n as f64).sqrt(),
        rot_rmse_deg: (rot_sq / n as f64).sqrt().to_degrees(),
        n_rel_pairs: n,
    })
}

fn check_lengths(pred: &[JointFrame], gt: &[JointFrame]) -> Result<(), MetricsError> {
    if pred.len() != gt.len() {
        return Err(MetricsError::LengthMismatch { pred: pred.len(), gt: gt.len() });
    }
    if pred.is_empty() {
        return Err(MetricsError::InsufficientPairs { needed: 1, available: 0 });
    }
    Ok(())
}

/// Mean per-joint position error in millimeters, index-aligned, with no
/// alignment applied.
pub fn mpjpe(pred: &[JointFrame], gt: &[JointFrame]) -> Result<f64, MetricsError> {
    check_lengths(pred, gt)?;
    let mut sum = 0.0;
    for (p, g) in pred.iter().zip(gt) {
        for (pj, gj) in p.joints.iter().zip(&g.joints) {
            sum += (*pj - *gj).norm();
        }
    }
    Ok(sum / (pred.len() * JOINT_COUNT) as f64 * 1000.0)
}

/// PA-MPJPE outcome; frames whose ground truth is degenerate for
/// alignment are skipped and counted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaMpjpe {
    pub mm: f64,
    pub skipped_frames: usize,
}

/// Procrustes-aligned MPJPE: each predicted frame is aligned to ground
/// truth with a per-frame similarity transform before measuring.
pub fn pa_mpjpe(pred: &[JointFrame], gt: &[JointFrame]) -> Result<PaMpjpe, MetricsError> {
    check_lengths(pred, gt)?;
    let mut sum = 0.0;
    let mut frames = 0usize;
    let mut skipped = 0usize;
    for (p, g) in pred.iter().zip(gt) {
        match umeyama_align(&p.joints, &g.joints, true) {
            Ok(t) => {
                let frame_mean = p
                    .joints
                    .iter()
                    .zip(&g.joints)
                    .map(|(pj, gj)| (t.apply(*pj) - *gj).norm())
                    .sum::<f64>()
                    / JOINT_COUNT as f64;
                sum += frame_mean;
                frames += 1;
            }
            Err(GeometryError::DegenerateInput(_)) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if frames == 0 {
        return Err(MetricsError::Degenerate(GeometryError::DegenerateInput(
            "every frame was degenerate for alignment".into(),
        )));
    }
    Ok(PaMpjpe { mm: sum / frames as f64 * 1000.0, skipped_frames: skipped })
}

/// A PCK curve: `(threshold_mm, fraction correct)` points and the
/// trapezoidal area normalized by the maximum threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PckCurve {
    pub curve: Vec<(f64, f64)>,
    pub auc: f64,
}

/// Percentage of correct keypoints across `n_steps` uniform thresholds
/// in `(0, max_threshold_mm]`.
///
/// The AUC integrates from zero: the curve is anchored at `(0, PCK(0))`
/// so a perfect prediction scores exactly 1.0.
pub fn pck_auc(
    pred: &[JointFrame],
    gt: &[JointFrame],
    max_threshold_mm: f64,
    n_steps: usize,
) -> Result<PckCurve, MetricsError> {
    check_lengths(pred, gt)?;
    if max_threshold_mm <= 0.0 {
        return Err(MetricsError::InvalidArgument("max_threshold_mm must be > 0".into()));
    }
    if n_steps < 2 {
        return Err(MetricsError::InvalidArgument("n_steps must be >= 2".into()));
    }
    let mut errors_mm = Vec::with_capacity(pred.len() * JOINT_COUNT);
    for (p, g) in pred.iter().zip(gt) {
        for (pj, gj) in p.joints.iter().zip(&g.joints) {
            errors_mm.push((*pj - *gj).norm() * 1000.0);
        }
    }
    let total = errors_mm.len() as f64;
    let frac_at = |t: f64| errors_mm.iter().filter(|&&e| e <= t).count() as f64 / total;

    let curve: Vec<(f64, f64)> = (1..=n_steps)
        .map(|k| {
            let t = max_threshold_mm * k as f64 / n_steps as f64;
            (t, frac_at(t))
        })
        .collect();

    let mut area = 0.0;
    let mut prev = (0.0, frac_at(0.0));
    for &(t, f) in &curve {
        area += (t - prev.0) * (f + prev.1) / 2.0;
        prev = (t, f);
    }
    Ok(PckCurve { curve, auc: area / max_threshold_mm })
}

/// Computes the full trajectory report (both ATE variants plus RPE).
pub fn trajectory_report(
    est: &Trajectory,
    gt: &Trajectory,
    rpe_delta: usize,
    max_dt: Option<f64>,
) -> Result<TrajectoryReport, MetricsError> {
    let max_dt = max_dt.unwrap_or_else(|| gt.default_max_dt());
    let pairs = associate(est, gt, max_dt)?;
    let r = rpe(est, gt, rpe_delta, Some(max_dt))?;
    Ok(TrajectoryReport {
        ate_rmse_m: ate(est, gt, Alignment::Sim3, Some(max_dt))?,
        ate_s_rmse_m: ate(est, gt, Alignment::Se3, Some(max_dt))?,
        rpe_trans_rmse_m: r.trans_rmse_m,
        rpe_rot_rmse_deg: r.rot_rmse_deg,
        n_pairs: pairs.len(),
    })
}

/// Computes the full hand-pose report with the given PCK parameters.
pub fn pose_report(
    pred: &[JointFrame],
    gt: &[JointFrame],
    auc_max_mm: f64,
    auc_steps: usize,
) -> Result<PoseReport, MetricsError> {
    Ok(PoseReport {
        mpjpe_mm: mpjpe(pred, gt)?,
        pa_mpjpe_mm: pa_mpjpe(pred, gt)?.mm,
        auc: pck_auc(pred, gt, auc_max_mm, auc_steps)?.auc,
        n_frames: pred.len(),
    })
}

/// Default PCK threshold ceiling in millimeters.
pub const DEFAULT_AUC_MAX_MM: f64 = 50.0;
/// Default PCK threshold count.
pub const DEFAULT_AUC_STEPS: usize = 100;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Sim3Transform, UnitQuaternion};
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn straight_trajectory(n: usize, dt: f64) -> Trajectory {
        Trajectory::new(
            (0..n)
                .map(|i| TrajectorySample {
                    t: i as f64 * dt,
                    pose: PoseSE3::new(
                        UnitQuaternion::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), 0.01 * i as f64),
                        Vec3::new(i as f64 * 0.1, (i as f64 * 0.05).sin(), 0.2),
                    ),
                })
                .collect(),
        )
        .unwrap()
    }

    fn transform_trajectory(traj: &Trajectory, t: Sim3Transform) -> Trajectory {
        // Left-composes a similarity transform onto every pose.
        Trajectory::new(
            traj.samples()
                .iter()
                .map(|s| TrajectorySample {
                    t: s.t,
                    pose: PoseSE3::new(
                        t.rotation.mul(s.pose.rotation),
                        t.apply(s.pose.translation),
                    ),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn trajectory_rejects_non_monotonic_timestamps() {
        let s = |t| TrajectorySample { t, pose: PoseSE3::IDENTITY };
        assert!(matches!(
            Trajectory::new(vec![s(0.0), s(1.0), s(1.0)]),
            Err(MetricsError::NonMonotonicTimestamps { index: 2 })
        ));
    }

    #[test]
    fn associate_identical_timestamps() {
        let a: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let pairs = associate_timestamps(&a, &a, 0.05).unwrap();
        assert_eq!(pairs.len(), 10);
        for (k, (i, j)) in pairs.iter().enumerate() {
            assert_eq!((k, k), (*i, *j));
        }
    }

    #[test]
    fn associate_rejects_disjoint_streams() {
        let a: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let b: Vec<f64> = a.iter().map(|t| t + 10.0).collect();
        assert_eq!(associate_timestamps(&a, &b, 0.05), Err(MetricsError::NoOverlap));
    }

    /// Greedy best-first matching on jittered timestamps must find the
    /// full matching that exhaustive assignment finds.
    #[test]
    fn associate_matches_exhaustive_assignment_under_jitter() {
        let mut rng = crate::stablehash::substream(21, "assoc-jitter");
        for _ in 0..20 {
            let n = 12;
            let dt = 0.1;
            let max_dt = 0.05;
            let a: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
            let b: Vec<f64> = a.iter().map(|t| t + (rng.gen::<f64>() - 0.5) * max_dt).collect();
            let pairs = associate_timestamps(&a, &b, max_dt).unwrap();
            assert_eq!(pairs.len(), n, "jitter within max_dt/2 must match fully");
            // With jitter < dt/2, the only full matching is the diagonal.
            for (i, j) in pairs {
                assert_eq!(i, j);
            }
        }
    }

    #[test]
    fn ate_zero_for_identical_trajectories() {
        let gt = straight_trajectory(50, 1.0 / 30.0);
        assert!(ate(&gt, &gt, Alignment::Sim3, None).unwrap() < 1e-15);
        assert!(ate(&gt, &gt, Alignment::Se3, None).unwrap() < 1e-15);
    }

    #[test]
    fn ate_sim3_absorbs_similarity_transform() {
        let gt = straight_trajectory(80, 1.0 / 30.0);
        let t = Sim3Transform::new(
            1.6,
            UnitQuaternion::from_axis_angle(Vec3::new(0.1, 0.9, -0.3), 0.8),
            Vec3::new(3.0, -1.0, 0.5),
        );
        let est = transform_trajectory(&gt, t);
        assert!(ate(&est, &gt, Alignment::Sim3, None).unwrap() < 1e-9);
        // Rigid alignment cannot absorb the scale.
        assert!(ate(&est, &gt, Alignment::Se3, None).unwrap() > 1e-3);
    }

    #[test]
    fn ate_se3_absorbs_rigid_transform_only() {
        let gt = straight_trajectory(80, 1.0 / 30.0);
        let t = Sim3Transform::new(
            1.0,
            UnitQuaternion::from_axis_angle(Vec3::new(0.0, 1.0, 0.2), 0.5),
            Vec3::new(-2.0, 0.3, 1.0),
        );
        let est = transform_trajectory(&gt, t);
        assert!(ate(&est, &gt, Alignment::Se3, None).unwrap() < 1e-9);
    }

    /// Isotropic 5 mm noise per axis gives an expected ATE of
    /// 5*sqrt(3) mm.
    #[test]
    fn ate_matches_noise_expectation() {
        let gt = straight_trajectory(1000, 1.0 / 30.0);
        let mut rng = crate::stablehash::substream(22, "ate-noise");
        let sigma = 0.005;
        let est = Trajectory::new(
            gt.samples()
                .iter()
                .map(|s| {
                    let n: f64 = StandardNormal.sample(&mut rng);
                    let n2: f64 = StandardNormal.sample(&mut rng);
                    let n3: f64 = StandardNormal.sample(&mut rng);
                    TrajectorySample {
                        t: s.t,
                        pose: PoseSE3::new(
                            s.pose.rotation,
                            s.pose.translation + Vec3::new(n, n2, n3).scale(sigma),
                        ),
                    }
                })
                .collect(),
        )
        .unwrap();
        let expected = sigma * 3f64.sqrt();
        let got = ate(&est, &gt, Alignment::Sim3, None).unwrap();
        assert!((got - expected).abs() < 0.15 * expected, "ate {got} vs expected {expected}");
    }

    /// ATE(SE3) scales linearly when the estimate is ground truth
    /// scaled about its centroid: RMSE = |s-1| * RMS about centroid.
    #[test]
    fn ate_se3_linear_in_scale_about_centroid() {
        let gt = straight_trajectory(60, 1.0 / 30.0);
        let positions = gt.positions();
        let n = positions.len() as f64;
        let centroid = positions.iter().fold(Vec3::ZERO, |a, p| a + *p).scale(1.0 / n);
        let spread =
            crate::stats::rms(&positions.iter().map(|p| (*p - centroid).norm()).collect::<Vec<_>>());
        for s in [0.8, 1.3, 2.0] {
            let est = Trajectory::new(
                gt.samples()
                    .iter()
                    .map(|smp| TrajectorySample {
                        t: smp.t,
                        pose: PoseSE3::new(
                            smp.pose.rotation,
                            centroid + (smp.pose.translation - centroid).scale(s),
                        ),
                    })
                    .collect(),
            )
            .unwrap();
            let got = ate(&est, &gt, Alignment::Se3, None).unwrap();
            let expected = (s - 1.0f64).abs() * spread;
            assert!((got - expected).abs() < 1e-9, "s={s}: {got} vs {expected}");
        }
    }

    #[test]
    fn rpe_zero_for_identical_and_left_offset() {
        let gt = straight_trajectory(60, 1.0 / 30.0);
        let r = rpe(&gt, &gt, 1, None).unwrap();
        assert!(r.trans_rmse_m < 1e-12);
        assert!(r.rot_rmse_deg < 1e-9);

        // A constant left-composed SE(3) offset leaves relative motion
        // untouched.
        let offset = Sim3Transform::new(
            1.0,
            UnitQuaternion::from_axis_angle(Vec3::new(0.4, 0.1, 1.0), 1.2),
            Vec3::new(5.0, -2.0, 7.0),
        );
        let est = transform_trajectory(&gt, offset);
        let r = rpe(&est, &gt, 1, None).unwrap();
        assert!(r.trans_rmse_m < 1e-9, "trans {}", r.trans_rmse_m);
        assert!(r.rot_rmse_deg < 1e-6, "rot {}", r.rot_rmse_deg);
    }

    #[test]
    fn rpe_measures_constructed_drift() {
        // Ground truth static; estimate drifts 1 mm per frame along x.
        let n = 50;
        let dt = 1.0 / 30.0;
        let gt = Trajectory::new(
            (0..n)
                .map(|i| TrajectorySample { t: i as f64 * dt, pose: PoseSE3::IDENTITY })
                .collect(),
        )
        .unwrap();
        let est = Trajectory::new(
            (0..n)
                .map(|i| TrajectorySample {
                    t: i as f64 * dt,
                    pose: PoseSE3::new(
                        UnitQuaternion::IDENTITY,
                        Vec3::new(i as f64 * 0.001, 0.0, 0.0),
                    ),
                })
                .collect(),
        )
        .unwrap();
        let r = rpe(&est, &gt, 1, None).unwrap();
        assert!((r.trans_rmse_m - 0.001).abs() < 1e-12);
        assert!(r.rot_rmse_deg < 1e-9);
        assert_eq!(r.n_rel_pairs, n - 1);
    }

    fn template_joints(center: Vec3) -> [Vec3; JOINT_COUNT] {
        std::array::from_fn(|j| {
            center
                + Vec3::new(
                    (j % 5) as f64 * 0.02,
                    (j / 5) as f64 * 0.025,
                    ((j * 7) % 3) as f64 * 0.015,
                )
        })
    }

    fn frames(n: usize) -> Vec<JointFrame> {
        (0..n)
            .map(|i| {
                let t = i as f64 / 30.0;
                JointFrame::new(t, template_joints(Vec3::new(0.1 * t, 0.05 * t, 0.4)))
            })
            .collect()
    }

    #[test]
    fn mpjpe_zero_and_uniform_offset() {
        let gt = frames(20);
        assert_eq!(mpjpe(&gt, &gt).unwrap(), 0.0);

        let pred: Vec<JointFrame> = gt
            .iter()
            .map(|f| JointFrame::new(f.t, f.joints.map(|j| j + Vec3::new(0.001, 0.0, 0.0))))
            .collect();
        assert!((mpjpe(&pred, &gt).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mpjpe_matches_scalar_loop_reference() {
        let gt = frames(15);
        let mut rng = crate::stablehash::substream(23, "mpjpe-ref");
        let pred: Vec<JointFrame> = gt
            .iter()
            .map(|f| {
                JointFrame::new(
                    f.t,
                    f.joints.map(|j| {
                        let d: f64 = StandardNormal.sample(&mut rng);
                        let d2: f64 = StandardNormal.sample(&mut rng);
                        let d3: f64 = StandardNormal.sample(&mut rng);
                        j + Vec3::new(d, d2, d3).scale(0.002)
                    }),
                )
            })
            .collect();

        // Naive reference loop.
        let mut total = 0.0;
        let mut count = 0;
        for (p, g) in pred.iter().zip(&gt) {
            for k in 0..JOINT_COUNT {
                let dx = p.joints[k].x - g.joints[k].x;
                let dy = p.joints[k].y - g.joints[k].y;
                let dz = p.joints[k].z - g.joints[k].z;
                total += (dx * dx + dy * dy + dz * dz).sqrt();
                count += 1;
            }
        }
        let reference = total / count as f64 * 1000.0;
        assert!((mpjpe(&pred, &gt).unwrap() - reference).abs() < 1e-9);
    }

    #[test]
    fn mpjpe_rejects_length_mismatch() {
        let gt = frames(5);
        let pred = frames(4);
        assert!(matches!(mpjpe(&pred, &gt), Err(MetricsError::LengthMismatch { pred: 4, gt: 5 })));
    }

    #[test]
    fn pa_mpjpe_absorbs_per_frame_sim3() {
        let gt = frames(12);
        let mut rng = crate::stablehash::substream(24, "pa-sim3");
        let pred: Vec<JointFrame> = gt
            .iter()
            .map(|f| {
                let t = Sim3Transform::new(
                    0.5 + rng.gen::<f64>() * 1.5,
                    UnitQuaternion::from_axis_angle(
                        Vec3::new(rng.gen(), rng.gen(), rng.gen()),
                        rng.gen::<f64>() * 2.0,
                    ),
                    Vec3::new(rng.gen(), rng.gen(), rng.gen()),
                );
                JointFrame::new(f.t, f.joints.map(|j| t.apply(j)))
            })
            .collect();
        let r = pa_mpjpe(&pred, &gt).unwrap();
        assert!(r.mm < 1e-9, "pa-mpjpe {}", r.mm);
        assert_eq!(r.skipped_frames, 0);
        assert!(pa_mpjpe(&gt, &gt).unwrap().mm < 1e-9);
    }

    #[test]
    fn pa_alignment_never_worse_than_identity() {
        // Per-frame RMS after alignment <= RMS before (identity is
        // feasible for the aligner).
        let gt = frames(30);
        let mut rng = crate::stablehash::substream(25, "pa-opt");
        let pred: Vec<JointFrame> = gt
            .iter()
            .map(|f| {
                JointFrame::new(
                    f.t,
                    f.joints.map(|j| {
                        let d: f64 = StandardNormal.sample(&mut rng);
                        let d2: f64 = StandardNormal.sample(&mut rng);
                        let d3: f64 = StandardNormal.sample(&mut rng);
                        j + Vec3::new(d, d2, d3).scale(0.004)
                    }),
                )
            })
            .collect();
        for (p, g) in pred.iter().zip(&gt) {
            let t = umeyama_align(&p.joints, &g.joints, true).unwrap();
            let rms_before = crate::stats::rms(
                &p.joints.iter().zip(&g.joints).map(|(a, b)| (*a - *b).norm()).collect::<Vec<_>>(),
            );
            let rms_after = crate::stats::rms(
                &p.joints
                    .iter()
                    .zip(&g.joints)
                    .map(|(a, b)| (t.apply(*a) - *b).norm())
                    .collect::<Vec<_>>(),
            );
            assert!(rms_after <= rms_before + 1e-12);
        }
    }

    #[test]
    fn pa_mpjpe_skips_degenerate_frames() {
        let mut gt = frames(5);
        // One coincident ground-truth frame: rank deficient, skipped.
        gt[2] = JointFrame::new(gt[2].t, [Vec3::new(0.1, 0.2, 0.3); JOINT_COUNT]);
        let pred = gt.clone();
        let r = pa_mpjpe(&pred, &gt).unwrap();
        assert_eq!(r.skipped_frames, 1);
        assert!(r.mm < 1e-9);
    }

    #[test]
    fn pck_auc_perfect_is_exactly_one() {
        let gt = frames(10);
        let r = pck_auc(&gt, &gt, 50.0, 100).unwrap();
        assert_eq!(r.auc, 1.0);
        assert_eq!(r.curve.len(), 100);
    }

    #[test]
    fn pck_auc_all_errors_beyond_max_is_zero() {
        let gt = frames(10);
        let pred: Vec<JointFrame> = gt
            .iter()
            .map(|f| JointFrame::new(f.t, f.joints.map(|j| j + Vec3::new(0.1, 0.0, 0.0))))
            .collect();
        // 100 mm error with a 50 mm ceiling.
        let r = pck_auc(&pred, &gt, 50.0, 100).unwrap();
        assert_eq!(r.auc, 0.0);
    }

    #[test]
    fn pck_auc_matches_brute_force_trapezoid() {
        let gt = frames(10);
        // Every error exactly max/2 = 25 mm.
        let pred: Vec<JointFrame> = gt
            .iter()
            .map(|f| JointFrame::new(f.t, f.joints.map(|j| j + Vec3::new(0.025, 0.0, 0.0))))
            .collect();
        let max_t = 50.0;
        let steps = 100;
        let r = pck_auc(&pred, &gt, max_t, steps).unwrap();

        // Independent brute-force sum over the same thresholds.
        let errors: Vec<f64> = pred
            .iter()
            .zip(&gt)
            .flat_map(|(p, g)| {
                p.joints.iter().zip(&g.joints).map(|(a, b)| (*a - *b).norm() * 1000.0)
            })
            .collect();
        let mut pts =
            vec![(0.0, errors.iter().filter(|&&e| e <= 0.0).count() as f64 / errors.len() as f64)];
        for k in 1..=steps {
            let t = max_t * k as f64 / steps as f64;
            let f = errors.iter().filter(|&&e| e <= t).count() as f64 / errors.len() as f64;
            pts.push((t, f));
        }
        let mut area = 0.0;
        for w in pts.windows(2) {
            area += (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0;
        }
        let brute = area / max_t;
        assert!((r.auc - brute).abs() < 1e-12);
    }

    #[test]
    fn pck_auc_monotone_under_error_scaling() {
        let gt = frames(10);
        let mut rng = crate::stablehash::substream(26, "pck-mono");
        let mut rng2 = rng.clone();
        let noisy = |factor: f64, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<JointFrame> {
            gt.iter()
                .map(|f| {
                    JointFrame::new(
                        f.t,
                        f.joints.map(|j| {
                            let d: f64 = StandardNormal.sample(rng);
                            let d2: f64 = StandardNormal.sample(rng);
                            let d3: f64 = StandardNormal.sample(rng);
                            j + Vec3::new(d, d2, d3).scale(0.01 * factor)
                        }),
                    )
                })
                .collect()
        };
        // Same noise draws, scaled up: errors multiply by 1.5.
        let base = noisy(1.0, &mut rng);
        let scaled = noisy(1.5, &mut rng2);
        let a1 = pck_auc(&base, &gt, 50.0, 64).unwrap().auc;
        let a2 = pck_auc(&scaled, &gt, 50.0, 64).unwrap().auc;
        assert!(a2 <= a1 + 1e-12);
    }

    #[test]
    fn reports_are_deterministic() {
        let gt = straight_trajectory(40, 1.0 / 30.0);
        let t = Sim3Transform::new(
            1.1,
            UnitQuaternion::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), 0.3),
            Vec3::new(1.0, 2.0, 3.0),
        );
        let est = transform_trajectory(&gt, t);
        let a = trajectory_report(&est, &gt, 1, None).unwrap();
        let b = trajectory_report(&est, &gt, 1, None).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.n_pairs, 40);
    }
}
