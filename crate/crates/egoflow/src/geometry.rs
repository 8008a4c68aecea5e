//! Transform algebra, the camera model, and point-set alignment.
//!
//! Rotations are stored as unit quaternions and matrices are derived on
//! demand. All operations are pure functions over immutable values.

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    /// Alignment input is unusable: too few points, mismatched lengths,
    /// or a rank-deficient (collinear/coincident) point set.
    #[error("degenerate alignment input: {0}")]
    DegenerateInput(String),
    /// Projection of a point with non-positive camera-frame depth.
    #[error("point behind camera (z = {z})")]
    BehindCamera { z: f64 },
    /// Relative deviation against a zero reference parameter.
    #[error("reference intrinsic parameter {0} is zero")]
    ZeroReference(&'static str),
}

/// A 3-vector in meters (or millimeters where an operation says so).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn scale(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub(crate) fn to_na(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub(crate) fn from_na(v: Vector3<f64>) -> Self {
        Vec3::new(v.x, v.y, v.z)
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

// Serialized as [x, y, z] to match the joint-track file format.
impl Serialize for Vec3 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(3))?;
        seq.serialize_element(&self.x)?;
        seq.serialize_element(&self.y)?;
        seq.serialize_element(&self.z)?;
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Vec3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [x, y, z] = <[f64; 3]>::deserialize(d)?;
        Ok(Vec3::new(x, y, z))
    }
}

/// Unit quaternion rotation; `q` and `-q` compare equal as rotations.
///
/// Every constructor normalizes, so the norm stays within 1e-9 of 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitQuaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    /// Builds from raw components, normalizing. Zero-norm input falls
    /// back to the identity rotation.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Self::IDENTITY;
        }
        Self { w: w / n, x: x / n, y: y / n, z: z / n }
    }

    pub fn from_axis_angle(axis: Vec3, angle_rad: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 {
            return Self::IDENTITY;
        }
        let half = angle_rad / 2.0;
        let s = half.sin() / n;
        Self::new(half.cos(), axis.x * s, axis.y * s, axis.z * s)
    }

    /// Intrinsic yaw(z)-pitch(y)-roll(x) composition.
    pub fn from_euler(roll: f64, pitch: f64, yaw: f64) -> Self {
        let qz = Self::from_axis_angle(Vec3::new(0.0, 0.0, 1.0), yaw);
        let qy = Self::from_axis_angle(Vec3::new(0.0, 1.0, 0.0), pitch);
        let qx = Self::from_axis_angle(Vec3::new(1.0, 0.0, 0.0), roll);
        qz.mul(qy).mul(qx)
    }

    pub fn norm(self) -> f64 {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn conjugate(self) -> Self {
        Self { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// Hamilton product, renormalized.
    pub fn mul(self, o: Self) -> Self {
        Self::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }

    /// Rotates a vector: v + 2w(u x v) + 2 u x (u x v) with u = (x,y,z).
    pub fn rotate(self, v: Vec3) -> Vec3 {
        let u = Vec3::new(self.x, self.y, self.z);
        let t = u.cross(v).scale(2.0);
        v + t.scale(self.w) + u.cross(t)
    }

    /// Rotation angle in radians, in `[0, pi]` (2*acos(|w|)).
    pub fn angle(self) -> f64 {
        let v = Vec3::new(self.x, self.y, self.z).norm();
        2.0 * v.atan2(self.w.abs())
    }

    /// Angle of the relative rotation between two orientations.
    pub fn angle_to(self, o: Self) -> f64 {
        self.conjugate().mul(o).angle()
    }

    /// Rotation-level equality: q and -q are the same rotation.
    pub fn approx_eq(self, o: Self, tol_rad: f64) -> bool {
        self.angle_to(o) <= tol_rad
    }

    pub fn to_matrix(self) -> Matrix3<f64> {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }

    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        let r = Rotation3::from_matrix_unchecked(*m);
        let q = nalgebra::UnitQuaternion::from_rotation_matrix(&r);
        Self::new(q.w, q.i, q.j, q.k)
    }
}

/// Rigid transform (SE(3)): rotation then translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSE3 {
    pub rotation: UnitQuaternion,
    pub translation: Vec3,
}

impl PoseSE3 {
    pub const IDENTITY: PoseSE3 =
        PoseSE3 { rotation: UnitQuaternion::IDENTITY, translation: Vec3::ZERO };

    pub fn new(rotation: UnitQuaternion, translation: Vec3) -> Self {
        Self { rotation, translation }
    }

    /// `apply(compose(a, b), p) == apply(a, apply(b, p))`.
    pub fn compose(self, b: PoseSE3) -> PoseSE3 {
        PoseSE3 {
            rotation: self.rotation.mul(b.rotation),
            translation: self.rotation.rotate(b.translation) + self.translation,
        }
    }

    pub fn invert(self) -> PoseSE3 {
        let r_inv = self.rotation.conjugate();
        PoseSE3 { rotation: r_inv, translation: -r_inv.rotate(self.translation) }
    }

    pub fn apply(self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }
}

/// Similarity transform (Sim(3)): `p -> scale * (R * p) + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sim3Transform {
    pub scale: f64,
    pub rotation: UnitQuaternion,
    pub translation: Vec3,
}

impl Sim3Transform {
    pub const IDENTITY: Sim3Transform =
        Sim3Transform { scale: 1.0, rotation: UnitQuaternion::IDENTITY, translation: Vec3::ZERO };

    /// Panics on non-positive scale; the type's invariant is scale > 0.
    pub fn new(scale: f64, rotation: UnitQuaternion, translation: Vec3) -> Self {
        assert!(scale > 0.0, "Sim3Transform scale must be > 0, got {scale}");
        Self { scale, rotation, translation }
    }

    pub fn from_pose(p: PoseSE3) -> Self {
        Self { scale: 1.0, rotation: p.rotation, translation: p.translation }
    }

    pub fn apply(self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p).scale(self.scale) + self.translation
    }

    pub fn invert(self) -> Self {
        let r_inv = self.rotation.conjugate();
        let s_inv = 1.0 / self.scale;
        Self {
            scale: s_inv,
            rotation: r_inv,
            translation: -r_inv.rotate(self.translation).scale(s_inv),
        }
    }
}

/// Free-function form of SE(3) composition.
pub fn compose_se3(a: PoseSE3, b: PoseSE3) -> PoseSE3 {
    a.compose(b)
}

/// Free-function form of Sim(3) application.
pub fn apply_sim3(t: Sim3Transform, p: Vec3) -> Vec3 {
    t.apply(p)
}

/// Rank deficiency is declared when the second singular value of the
/// centered covariance falls below this fraction of the largest.
const RANK_EPS: f64 = 1e-12;

/// Closed-form least-squares similarity (or rigid) alignment of two
/// corresponded point sets: centroids, covariance, SVD, and the
/// sign-corrected smallest singular value so the rotation has det +1.
///
/// Returns the transform minimizing `sum ||T(src_i) - dst_i||^2`; with
/// `estimate_scale = false` the scale is fixed at exactly 1.
pub fn umeyama_align(
    src: &[Vec3],
    dst: &[Vec3],
    estimate_scale: bool,
) -> Result<Sim3Transform, GeometryError> {
    if src.len() != dst.len() {
        return Err(GeometryError::DegenerateInput(format!(
            "point count mismatch: {} vs {}",
            src.len(),
            dst.len()
        )));
    }
    if src.len() < 3 {
        return Err(GeometryError::DegenerateInput(format!(
            "need at least 3 point pairs, got {}",
            src.len()
        )));
    }
    let n = src.len() as f64;
    let mu_src = src.iter().fold(Vector3::zeros(), |a, p| a + p.to_na()) / n;
    let mu_dst = dst.iter().fold(Vector3::zeros(), |a, p| a + p.to_na()) / n;

    let mut cov = Matrix3::zeros();
    let mut var_src = 0.0;
    for (s, d) in src.iter().zip(dst) {
        let xs = s.to_na() - mu_src;
        let xd = d.to_na() - mu_dst;
        cov += xd * xs.transpose();
        var_src += xs.norm_squared();
    }
    cov /= n;
    var_src /= n;

    let svd = cov.svd(true, true);
    let (u, v_t) = (svd.u.expect("svd u"), svd.v_t.expect("svd v_t"));
    // nalgebra returns singular values sorted descending; order them
    // defensively so the sign correction always hits the smallest.
    let mut sv: Vec<(usize, f64)> = svd.singular_values.iter().copied().enumerate().collect();
    sv.sort_by(|a, b| b.1.total_cmp(&a.1));
    if sv[1].1 < RANK_EPS * sv[0].1 {
        return Err(GeometryError::DegenerateInput(
            "source points are collinear or coincident".into(),
        ));
    }

    let mut d_sign = Matrix3::identity();
    if (u.determinant() * v_t.determinant()) < 0.0 {
        let smallest = sv[2].0;
        d_sign[(smallest, smallest)] = -1.0;
    }
    let r = u * d_sign * v_t;

    let scale = if estimate_scale {
        let trace_ds = svd.singular_values[sv[0].0] * d_sign[(sv[0].0, sv[0].0)]
            + svd.singular_values[sv[1].0] * d_sign[(sv[1].0, sv[1].0)]
            + svd.singular_values[sv[2].0] * d_sign[(sv[2].0, sv[2].0)];
        if var_src <= 0.0 {
            return Err(GeometryError::DegenerateInput("source points coincident".into()));
        }
        trace_ds / var_src
    } else {
        1.0
    };
    if !(scale > 0.0) {
        return Err(GeometryError::DegenerateInput(format!(
            "recovered non-positive scale {scale}"
        )));
    }

    let rotation = UnitQuaternion::from_matrix(&r);
    let t = mu_dst - scale * (r * mu_src);
    Ok(Sim3Transform { scale, rotation, translation: Vec3::from_na(t) })
}

/// Pinhole intrinsics with a 3-term radial distortion model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(format!("focal lengths must be positive: fx={}, fy={}", self.fx, self.fy));
        }
        if !(0.0..self.width as f64).contains(&self.cx)
            || !(0.0..self.height as f64).contains(&self.cy)
        {
            return Err(format!(
                "principal point ({}, {}) outside {}x{} image",
                self.cx, self.cy, self.width, self.height
            ));
        }
        Ok(())
    }
}

/// A pixel location; may fall outside the image bounds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

impl PixelPoint {
    pub fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn distance(self, o: PixelPoint) -> f64 {
        ((self.u - o.u) * (self.u - o.u) + (self.v - o.v) * (self.v - o.v)).sqrt()
    }
}

impl Serialize for PixelPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&self.u)?;
        seq.serialize_element(&self.v)?;
        seq.end()
    }
}

impl<'de> Deserialize<'de> for PixelPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = PixelPoint;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a [u, v] pixel pair")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<PixelPoint, A::Error> {
                let u = seq.next_element()?.ok_or_else(|| serde::de::Error::custom("missing u"))?;
                let v = seq.next_element()?.ok_or_else(|| serde::de::Error::custom("missing v"))?;
                Ok(PixelPoint::new(u, v))
            }
        }
        d.deserialize_seq(V)
    }
}

/// Projects a camera-frame point: normalize by depth, apply the radial
/// distortion factor `1 + k1 r^2 + k2 r^4 + k3 r^6`, then the focal map.
///
/// The result may fall outside the image bounds; the caller decides.
pub fn project(intr: &CameraIntrinsics, p_cam: Vec3) -> Result<PixelPoint, GeometryError> {
    if p_cam.z <= 0.0 {
        return Err(GeometryError::BehindCamera { z: p_cam.z });
    }
    let x = p_cam.x / p_cam.z;
    let y = p_cam.y / p_cam.z;
    let r2 = x * x + y * y;
    let d = 1.0 + r2 * (intr.k1 + r2 * (intr.k2 + r2 * intr.k3));
    Ok(PixelPoint::new(intr.fx * x * d + intr.cx, intr.fy * y * d + intr.cy))
}

/// Inverts the linear (distortion-free) part of the projection,
/// recovering normalized image coordinates.
pub fn normalized_from_pixel(intr: &CameraIntrinsics, px: PixelPoint) -> (f64, f64) {
    ((px.u - intr.cx) / intr.fx, (px.v - intr.cy) / intr.fy)
}

/// How far factory intrinsics sit from a reference calibration.
///
/// Relative deviations (in percent) cover fx, fy, cx, cy; distortion
/// coefficients are reported as absolute differences. The aggregate
/// mean/std are computed over the four relative values, with the std
/// taken as the population std (divide by N).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub fx_pct: f64,
    pub fy_pct: f64,
    pub cx_pct: f64,
    pub cy_pct: f64,
    pub mean_pct: f64,
    pub std_pct: f64,
    pub k1_abs: f64,
    pub k2_abs: f64,
    pub k3_abs: f64,
}

/// Per-parameter relative deviation of factory intrinsics from a
/// reference calibration: `100 * |factory - reference| / |reference|`.
pub fn intrinsics_deviation(
    factory: &CameraIntrinsics,
    reference: &CameraIntrinsics,
) -> Result<DeviationReport, GeometryError> {
    let rel = |f: f64, r: f64, name: &'static str| -> Result<f64, GeometryError> {
        if r == 0.0 {
            return Err(GeometryError::ZeroReference(name));
        }
        Ok(100.0 * (f - r).abs() / r.abs())
    };
    let fx = rel(factory.fx, reference.fx, "fx")?;
    let fy = rel(factory.fy, reference.fy, "fy")?;
    let cx = rel(factory.cx, reference.cx, "cx")?;
    let cy = rel(factory.cy, reference.cy, "cy")?;
    let four = [fx, fy, cx, cy];
    Ok(DeviationReport {
        fx_pct: fx,
        fy_pct: fy,
        cx_pct: cx,
        cy_pct: cy,
        mean_pct: crate::stats::mean(&four),
        std_pct: crate::stats::population_std(&four),
        k1_abs: (factory.k1 - reference.k1).abs(),
        k2_abs: (factory.k2 - reference.k2).abs(),
        k3_abs: (factory.k3 - reference.k3).abs(),
    })
}
