//! Small-dimension spatial algebra shared by the rest of the crate.
//!
//! Units are fixed library-wide: mm, N, N·mm, rad. Six-vectors are always
//! ordered translation first, rotation second (`[x, y, z, rx, ry, rz]`), and
//! wrenches likewise (`[Fx, Fy, Fz, Mx, My, Mz]`).

use nalgebra::{DMatrix, Matrix3, Matrix6, Rotation3, Vector6};
use serde::{Deserialize, Serialize};

pub type Vector3 = nalgebra::Vector3<f64>;
pub type Matrix66 = Matrix6<f64>;

/// Rotation magnitude above which the small-angle linearization is considered
/// out of its intended range.
pub const LINEARIZATION_LIMIT_RAD: f64 = 0.1;

/// Default relative singular-value cutoff for [`pseudoinverse`].
pub const DEFAULT_PINV_TOL: f64 = 1e-10;

/// Force and moment acting on a body. The moment is taken about a reference
/// point that every consuming API states explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "WrenchRecord", from = "WrenchRecord")]
pub struct Wrench {
    pub force: Vector3,
    pub moment: Vector3,
}

impl Wrench {
    pub fn new(force: Vector3, moment: Vector3) -> Self {
        Self { force, moment }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_force(force: Vector3) -> Self {
        Self { force, moment: Vector3::zeros() }
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            force: v.fixed_rows::<3>(0).into(),
            moment: v.fixed_rows::<3>(3).into(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        stack(&self.force, &self.moment)
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self::from_vector(&Vector6::from_row_slice(&a))
    }

    pub fn to_array(&self) -> [f64; 6] {
        let v = self.to_vector();
        [v[0], v[1], v[2], v[3], v[4], v[5]]
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().chain(self.moment.iter()).all(|x| x.is_finite())
    }

    /// Same wrench with the moment re-expressed about `new_point`, given that it
    /// is currently taken about `old_point`.
    pub fn shifted(&self, old_point: &Vector3, new_point: &Vector3) -> Self {
        Self {
            force: self.force,
            moment: self.moment + (old_point - new_point).cross(&self.force),
        }
    }
}

impl std::ops::Add for Wrench {
    type Output = Wrench;
    fn add(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force + rhs.force, self.moment + rhs.moment)
    }
}

impl std::ops::Sub for Wrench {
    type Output = Wrench;
    fn sub(self, rhs: Wrench) -> Wrench {
        Wrench::new(self.force - rhs.force, self.moment - rhs.moment)
    }
}

impl std::ops::Mul<f64> for Wrench {
    type Output = Wrench;
    fn mul(self, s: f64) -> Wrench {
        Wrench::new(self.force * s, self.moment * s)
    }
}

/// Small translation and rotation of a frame.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "ScrewRecord", from = "ScrewRecord")]
pub struct DeflectionScrew {
    pub translation: Vector3,
    pub rotation: Vector3,
}

impl DeflectionScrew {
    pub fn new(translation: Vector3, rotation: Vector3) -> Self {
        Self { translation, rotation }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            translation: v.fixed_rows::<3>(0).into(),
            rotation: v.fixed_rows::<3>(3).into(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        stack(&self.translation, &self.rotation)
    }

    /// Planar (xy) norm of the translation, the deflection measure used by the
    /// milling studies.
    pub fn planar_norm(&self) -> f64 {
        self.translation.xy().norm()
    }

    /// True when the rotation is small enough for the first-order model.
    pub fn within_linearization(&self) -> bool {
        self.rotation.norm() <= LINEARIZATION_LIMIT_RAD
    }
}

/// Rigid pose: position in mm and an orthogonal orientation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    pub position: Vector3,
    pub rotation: Rotation3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self { position: Vector3::zeros(), rotation: Rotation3::identity() }
    }

    pub fn new(position: Vector3, rotation: Rotation3<f64>) -> Self {
        Self { position, rotation }
    }

    pub fn from_translation(position: Vector3) -> Self {
        Self { position, rotation: Rotation3::identity() }
    }

    pub fn from_rotation(rotation: Rotation3<f64>) -> Self {
        Self { position: Vector3::zeros(), rotation }
    }

    /// Builds a pose from a raw 3×3 matrix, rejecting matrices that are not
    /// orthogonal to 1e-10.
    pub fn from_matrix(position: Vector3, m: Matrix3<f64>) -> Option<Self> {
        let err = (m.transpose() * m - Matrix3::identity()).abs().max();
        if err > 1e-10 || m.determinant() < 0.0 {
            return None;
        }
        Some(Self { position, rotation: Rotation3::from_matrix_unchecked(m) })
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        self.rotation.matrix()
    }

    /// `self ∘ other`: `other` expressed in the frame of `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            position: self.position + self.rotation * other.position,
            rotation: self.rotation * other.rotation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rinv = self.rotation.inverse();
        Pose { position: -(rinv * self.position), rotation: rinv }
    }

    pub fn transform_point(&self, p: &Vector3) -> Vector3 {
        self.position + self.rotation * p
    }

    /// Displacement of `self` relative to `reference`: translation difference
    /// and world-frame rotation vector of `R_self · R_refᵀ`.
    pub fn deviation_from(&self, reference: &Pose) -> DeflectionScrew {
        DeflectionScrew {
            translation: self.position - reference.position,
            rotation: rotation_log(&(self.rotation * reference.rotation.inverse())),
        }
    }

    /// Applies a world-frame screw: translate by `t`, rotate by `exp(φ)` about
    /// the frame origin.
    pub fn displaced(&self, d: &DeflectionScrew) -> Pose {
        Pose {
            position: self.position + d.translation,
            rotation: small_rotation(&d.rotation) * self.rotation,
        }
    }
}

#[derive(Clone, Serialize, Deserialize)]
struct WrenchRecord {
    force: [f64; 3],
    moment: [f64; 3],
}

impl From<Wrench> for WrenchRecord {
    fn from(w: Wrench) -> Self {
        Self { force: w.force.into(), moment: w.moment.into() }
    }
}

impl From<WrenchRecord> for Wrench {
    fn from(r: WrenchRecord) -> Self {
        Wrench::new(r.force.into(), r.moment.into())
    }
}

#[derive(Clone, Serialize, Deserialize)]
struct ScrewRecord {
    translation: [f64; 3],
    rotation: [f64; 3],
}

impl From<DeflectionScrew> for ScrewRecord {
    fn from(d: DeflectionScrew) -> Self {
        Self { translation: d.translation.into(), rotation: d.rotation.into() }
    }
}

impl From<ScrewRecord> for DeflectionScrew {
    fn from(r: ScrewRecord) -> Self {
        DeflectionScrew::new(r.translation.into(), r.rotation.into())
    }
}

#[derive(Serialize, Deserialize)]
struct PoseRecord {
    position: [f64; 3],
    #[serde(default = "identity_rows")]
    rotation: [[f64; 3]; 3],
}

fn identity_rows() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

impl Serialize for Pose {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let m = self.matrix();
        let rec = PoseRecord {
            position: [self.position.x, self.position.y, self.position.z],
            rotation: [
                [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
                [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
                [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
            ],
        };
        rec.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pose {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rec = PoseRecord::deserialize(d)?;
        let r = rec.rotation;
        let m = Matrix3::new(
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
        );
        Pose::from_matrix(Vector3::from(rec.position), m)
            .ok_or_else(|| serde::de::Error::custom("rotation is not orthogonal within 1e-10"))
    }
}

pub(crate) fn stack(a: &Vector3, b: &Vector3) -> Vector6<f64> {
    Vector6::new(a.x, a.y, a.z, b.x, b.y, b.z)
}

/// Cross-product matrix: `skew(v) * w == v × w`.
pub fn skew(v: &Vector3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Exact rotation about `φ/|φ|` by `|φ|` (exponential map).
pub fn small_rotation(phi: &Vector3) -> Rotation3<f64> {
    Rotation3::from_scaled_axis(*phi)
}

/// Inverse of [`small_rotation`]: rotation vector of `r`.
pub fn rotation_log(r: &Rotation3<f64>) -> Vector3 {
    let m = r.matrix();
    // sin θ · axis from the skew part, cos θ from the trace
    let v = Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]) * 0.5;
    let s = v.norm();
    let c = (m.trace() - 1.0) * 0.5;
    let angle = s.atan2(c);
    if angle > std::f64::consts::PI - 1e-6 {
        return r.scaled_axis();
    }
    if s < 1e-8 {
        // θ / sin θ ≈ 1 + θ²/6
        return v * (1.0 + s * s / 6.0);
    }
    v * (angle / s)
}

/// Moore–Penrose pseudoinverse via SVD. Singular values below
/// `tol · σ_max` are treated as zero.
pub fn pseudoinverse(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return DMatrix::zeros(cols, rows);
    }
    let cutoff = tol * smax;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut out = DMatrix::zeros(cols, rows);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff {
            out += (vt.row(k).transpose() / s) * u.column(k).transpose();
        }
    }
    out
}

/// Numerical rank using the same cutoff rule as [`pseudoinverse`].
pub fn numerical_rank(a: &DMatrix<f64>, tol: f64) -> usize {
    let sv = a.clone().singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// 2-norm condition number (∞ for singular input).
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.clone().singular_values();
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / smin
    }
}

/// Condition number after symmetric diagonal equilibration. Mixed-unit
/// systems (N/mm next to N·mm/rad) are meaningless without it.
pub fn scaled_condition_number(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows().min(a.ncols());
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let r = a.row(i).amax().max(a.column(i).amax());
            if r > 0.0 {
                1.0 / r.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let mut s = a.clone();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s[(i, j)] *= scale.get(i).copied().unwrap_or(1.0) * scale.get(j).copied().unwrap_or(1.0);
        }
    }
    condition_number(&s)
}

/// Average of `m` and `mᵀ`.
pub fn symmetrize(m: &Matrix66) -> Matrix66 {
    (m + m.transpose()) * 0.5
}

/// Relative asymmetry `‖m − mᵀ‖ / ‖m‖` (Frobenius).
pub fn asymmetry(m: &Matrix66) -> f64 {
    let n = m.norm();
    if n == 0.0 {
        0.0
    } else {
        (m - m.transpose()).norm() / n
    }
}

/// Adjoint-style congruence for moving a stiffness matrix through a rigid
/// rotation `r` of the whole model: `K' = T K Tᵀ`, `T = diag(R, R)`.
pub fn rotate_stiffness(k: &Matrix66, r: &Rotation3<f64>) -> Matrix66 {
    let mut t = Matrix66::zeros();
    t.fixed_view_mut::<3, 3>(0, 0).copy_from(r.matrix());
    t.fixed_view_mut::<3, 3>(3, 3).copy_from(r.matrix());
    t * k * t.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn rand_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vector3 {
        Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ) * scale
    }

    #[test]
    fn skew_known_values() {
        assert_eq!(skew(&Vector3::zeros()), Matrix3::zeros());
        let s = skew(&Vector3::new(1.0, 0.0, 0.0));
        assert_eq!(s, Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0));
    }

    #[test]
    fn skew_matches_cross_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let v = rand_vec(&mut rng, 10.0);
            let w = rand_vec(&mut rng, 10.0);
            let a = skew(&v) * w;
            // component-wise cross product written out, independent of nalgebra's cross()
            let b = Vector3::new(v.y * w.z - v.z * w.y, v.z * w.x - v.x * w.z, v.x * w.y - v.y * w.x);
            assert!((a - b).amax() < 1e-12);
            assert_eq!(skew(&v).transpose(), -skew(&v));
        }
    }

    #[test]
    fn small_rotation_known_values() {
        assert_eq!(small_rotation(&Vector3::zeros()), Rotation3::identity());
        let r = small_rotation(&Vector3::new(0.0, 0.0, FRAC_PI_2));
        let x = r * Vector3::x();
        assert!((x - Vector3::y()).norm() < 1e-15);
    }

    #[test]
    fn small_rotation_taylor_remainder() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let phi = rand_vec(&mut rng, 0.01 / 3f64.sqrt());
            let r = small_rotation(&phi);
            let lin = Matrix3::identity() + skew(&phi);
            let n = phi.norm();
            let spectral = (r.matrix() - lin).singular_values().max();
            assert!(spectral <= n * n / 2.0 + 1e-15, "{spectral} vs {}", n * n / 2.0);
            let orth = r.matrix().transpose() * r.matrix() - Matrix3::identity();
            assert!(orth.amax() < 1e-12);
        }
    }

    #[test]
    fn log_is_accurate_near_identity() {
        for a in [1e-3, 7e-7, 1e-10, 1e-14] {
            let phi = Vector3::new(0.3, -0.5, 0.8).normalize() * a;
            let err = (rotation_log(&small_rotation(&phi)) - phi).norm();
            assert!(err <= 1e-15 * a.max(1e-3), "{a}: {err}");
        }
    }

    #[test]
    fn log_inverts_exp() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let phi = rand_vec(&mut rng, 1.5);
            assert!((rotation_log(&small_rotation(&phi)) - phi).norm() < 1e-12);
        }
    }

    #[test]
    fn pseudoinverse_special_cases() {
        let i3 = DMatrix::<f64>::identity(3, 3);
        assert!((pseudoinverse(&i3, 1e-10) - &i3).amax() < 1e-15);
        let d = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]);
        let p = pseudoinverse(&d, 1e-12);
        assert!((p - DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0])).amax() < 1e-15);
    }

    #[test]
    fn pseudoinverse_penrose_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = DMatrix::from_fn(6, 9, |_, _| rng.random_range(-1.0..1.0));
            let p = pseudoinverse(&a, DEFAULT_PINV_TOL);
            assert!((&a * &p * &a - &a).amax() < 1e-10);
            assert!((&p * &a * &p - &p).amax() < 1e-10);
            let ap = &a * &p;
            assert!((&ap - ap.transpose()).amax() < 1e-10);
            let pa = &p * &a;
            assert!((&pa - pa.transpose()).amax() < 1e-10);
        }
    }

    #[test]
    fn pseudoinverse_of_square_is_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a = DMatrix::from_fn(6, 6, |i, j| rng.random_range(-1.0..1.0) + if i == j { 3.0 } else { 0.0 });
            assert!(condition_number(&a) < 1e8);
            let p = pseudoinverse(&a, DEFAULT_PINV_TOL);
            assert!((&p * &a - DMatrix::identity(6, 6)).amax() < 1e-9);
        }
    }

    #[test]
    fn pose_deviation_round_trip() {
        let p0 = Pose::new(Vector3::new(1.0, 2.0, 3.0), small_rotation(&Vector3::new(0.3, -0.2, 0.1)));
        let d = DeflectionScrew::new(Vector3::new(0.01, -0.02, 0.03), Vector3::new(1e-3, 2e-3, -1e-3));
        let p1 = p0.displaced(&d);
        let back = p1.deviation_from(&p0);
        let err = (back.to_vector() - d.to_vector()).amax();
        assert!(err < 1e-13, "{err}");
        let inv = p0.compose(&p0.inverse());
        assert!(inv.position.norm() < 1e-14);
    }

    #[test]
    fn wrench_shift_moves_moment() {
        let w = Wrench::from_force(Vector3::new(0.0, 10.0, 0.0));
        let shifted = w.shifted(&Vector3::new(2.0, 0.0, 0.0), &Vector3::zeros());
        assert!((shifted.moment - Vector3::new(0.0, 0.0, 20.0)).norm() < 1e-12);
    }
}
