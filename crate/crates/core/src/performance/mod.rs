//! Technology-oriented performance measures: velocity, accuracy and force
//! transmission factors under box actuator limits, box inscribing in a
//! workspace and input efforts along a trajectory.
//!
//! Transmission maps follow `ṗ = J·φ̇`, `δp = J·δφ` and `f = J⁻ᵀ·τ`. With box
//! limits on the inputs the reachable outputs form the polytope `J·B`; its
//! farthest vertex gives `k_max` and its largest inscribed ball `k_min`.

pub mod efforts;
pub mod inscribe;

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use efforts::{input_efforts, DynamicsInput, EffortReport, TrajectorySample};
pub use inscribe::{inscribe_box, inscribe_predicate, VoxelMask, WorkspaceBox};

/// Relative singular-value floor below which a square map counts as singular.
const SINGULAR_RCOND: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActuatorLimits {
    /// mm/s or rad/s per actuator.
    pub max_velocity: Vec<f64>,
    /// N or N·mm per actuator.
    pub max_effort: Vec<f64>,
    pub max_joint_error: Vec<f64>,
}

impl ActuatorLimits {
    pub fn uniform(n: usize, velocity: f64, effort: f64, joint_error: f64) -> Self {
        Self { max_velocity: vec![velocity; n], max_effort: vec![effort; n], max_joint_error: vec![joint_error; n] }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.max_velocity.len();
        if self.max_effort.len() != n || self.max_joint_error.len() != n {
            return Err(Error::DimensionMismatch("actuator limit vectors differ in length".into()));
        }
        let all = self.max_velocity.iter().chain(&self.max_effort).chain(&self.max_joint_error);
        if all.into_iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParams("actuator limits must be strictly positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    Velocity,
    Force,
    Accuracy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorMethod {
    SingularValue,
    BoxAllDirections,
    BoxDirectional,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmissionFactors {
    pub k_min: f64,
    pub k_max: f64,
    pub kind: FactorKind,
    pub method: FactorMethod,
    /// Per-direction factors, in request order (directional method only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directional: Option<Vec<f64>>,
}

impl TransmissionFactors {
    /// `k_max / k_min`, infinite when `k_min` vanishes.
    pub fn condition(&self) -> f64 {
        if self.k_min > 0.0 {
            self.k_max / self.k_min
        } else {
            f64::INFINITY
        }
    }
}

fn check_finite(j: &DMatrix<f64>) -> Result<()> {
    if j.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("map contains non-finite entries".into()))
    }
}

/// Smallest and largest singular values of `j`.
pub fn singular_value_factors(j: &DMatrix<f64>, kind: FactorKind) -> Result<TransmissionFactors> {
    check_finite(j)?;
    let sv = j.singular_values();
    let (k_min, k_max) = if sv.is_empty() { (0.0, 0.0) } else { (sv.min(), sv.max()) };
    Ok(TransmissionFactors { k_min, k_max, kind, method: FactorMethod::SingularValue, directional: None })
}

fn check_bounds(j: &DMatrix<f64>, bounds: &[f64]) -> Result<()> {
    if bounds.len() != j.ncols() {
        return Err(Error::DimensionMismatch(format!("{} bounds for a map with {} inputs", bounds.len(), j.ncols())));
    }
    if bounds.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
        return Err(Error::InvalidParams("input bounds must be finite and non-negative".into()));
    }
    Ok(())
}

fn inverse_square(j: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !j.is_square() {
        return Err(Error::DimensionMismatch(format!("box factors need a square map, got {}x{}", j.nrows(), j.ncols())));
    }
    let sv = j.singular_values();
    if sv.is_empty() || sv.min() <= SINGULAR_RCOND * sv.max() {
        return Err(Error::SingularJacobian);
    }
    j.clone().try_inverse().ok_or(Error::SingularJacobian)
}

/// `(k_min, k_max)` of the parallelepiped `J·∏[−bᵢ, bᵢ]`: inscribed-ball radius
/// (nearest facet) and farthest vertex.
pub fn box_extremes(j: &DMatrix<f64>, bounds: &[f64]) -> Result<(f64, f64)> {
    check_finite(j)?;
    check_bounds(j, bounds)?;
    let jinv = inverse_square(j)?;
    let n = j.ncols();
    if n > 20 {
        return Err(Error::InvalidInput("vertex enumeration limited to 20 inputs".into()));
    }
    let mut k_max: f64 = 0.0;
    for mask in 0u32..(1 << n) {
        let corner = DVector::from_fn(n, |i, _| if mask >> i & 1 == 1 { bounds[i] } else { -bounds[i] });
        k_max = k_max.max((j * corner).norm());
    }
    // facet i of the image is |row_i(J⁻¹)·v| = bᵢ
    let k_min = (0..n).map(|i| bounds[i] / jinv.row(i).norm()).fold(f64::INFINITY, f64::min);
    Ok((k_min, k_max))
}

/// Largest `s` with `s·d = J·x` for some `x` in the box (a linear program;
/// works for non-square maps too).
pub fn directional_factor(j: &DMatrix<f64>, bounds: &[f64], d: &DVector<f64>) -> Result<f64> {
    check_finite(j)?;
    check_bounds(j, bounds)?;
    if d.len() != j.nrows() {
        return Err(Error::DimensionMismatch(format!("direction has {} entries, map has {} outputs", d.len(), j.nrows())));
    }
    let norm = d.norm();
    if !(norm > 0.0) {
        return Err(Error::InvalidInput("direction must be non-zero".into()));
    }
    let u = d / norm;
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let x: Vec<_> = bounds.iter().map(|&b| lp.add_var(0.0, (-b, b))).collect();
    let s = lp.add_var(1.0, (0.0, f64::INFINITY));
    for r in 0..j.nrows() {
        let mut row: Vec<_> = x.iter().enumerate().filter(|(c, _)| j[(r, *c)] != 0.0).map(|(c, &v)| (v, j[(r, c)])).collect();
        row.push((s, -u[r]));
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, 0.0);
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::InvalidInput(format!("directional LP: {e}")))?
        .into_solution()
        .map_err(|_| Error::InvalidInput("directional LP interrupted".into()))?;
    Ok(sol.var_value(s).max(0.0))
}

fn box_factors(j: &DMatrix<f64>, bounds: &[f64], directions: Option<&[DVector<f64>]>, kind: FactorKind) -> Result<TransmissionFactors> {
    match directions {
        None => {
            let (k_min, k_max) = box_extremes(j, bounds)?;
            Ok(TransmissionFactors { k_min, k_max, kind, method: FactorMethod::BoxAllDirections, directional: None })
        }
        Some(dirs) => {
            if dirs.is_empty() {
                return Err(Error::InvalidInput("no directions requested".into()));
            }
            let v = dirs.iter().map(|d| directional_factor(j, bounds, d)).collect::<Result<Vec<_>>>()?;
            let k_min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let k_max = v.iter().copied().fold(0.0, f64::max);
            Ok(TransmissionFactors { k_min, k_max, kind, method: FactorMethod::BoxDirectional, directional: Some(v) })
        }
    }
}

/// Velocity factors of `ṗ = J·φ̇` with `|φ̇ᵢ| ≤ max_velocityᵢ`.
pub fn box_velocity_factors(j: &DMatrix<f64>, max_velocity: &[f64], directions: Option<&[DVector<f64>]>) -> Result<TransmissionFactors> {
    box_factors(j, max_velocity, directions, FactorKind::Velocity)
}

/// Output error bounds for joint errors `|δφᵢ| ≤ joint_errorsᵢ`.
pub fn accuracy_bounds(j: &DMatrix<f64>, joint_errors: &[f64], directions: Option<&[DVector<f64>]>) -> Result<TransmissionFactors> {
    box_factors(j, joint_errors, directions, FactorKind::Accuracy)
}

/// Force factors of `f = J⁻ᵀ·τ` with `|τᵢ| ≤ max_effortᵢ`.
pub fn force_bounds(j: &DMatrix<f64>, max_effort: &[f64], directions: Option<&[DVector<f64>]>) -> Result<TransmissionFactors> {
    check_finite(j)?;
    let jit = inverse_square(j)?.transpose();
    box_factors(&jit, max_effort, directions, FactorKind::Force)
}

/// `n` unit directions in the plane of output axes `a` and `b`, starting at
/// angle 0.
pub fn planar_directions(dim: usize, a: usize, b: usize, n: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            let mut d = DVector::zeros(dim);
            d[a] = t.cos();
            d[b] = t.sin();
            d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(v))
    }

    #[test]
    fn singular_values_of_a_diagonal_map() {
        let f = singular_value_factors(&diag(&[2.0, 1.0, 0.5]), FactorKind::Velocity).unwrap();
        assert_eq!((f.k_min, f.k_max), (0.5, 2.0));
        assert_eq!(f.condition(), 4.0);
    }

    #[test]
    fn unit_cube_box_factors() {
        let (kmin, kmax) = box_extremes(&DMatrix::identity(3, 3), &[1.0; 3]).unwrap();
        assert!((kmin - 1.0).abs() < 1e-12 && (kmax - 3f64.sqrt()).abs() < 1e-12);
        let (kmin, kmax) = box_extremes(&diag(&[2.0, 1.0, 1.0]), &[1.0; 3]).unwrap();
        assert!((kmin - 1.0).abs() < 1e-12 && (kmax - 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn facet_normal_gives_the_row_bound() {
        let j = DMatrix::identity(3, 3);
        let b = [0.7, 1.3, 2.0];
        for i in 0..3 {
            let d = DVector::from_fn(3, |k, _| if k == i { 1.0 } else { 0.0 });
            assert!((directional_factor(&j, &b, &d).unwrap() - b[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn singular_and_bad_inputs() {
        let j = diag(&[1.0, 1.0, 0.0]);
        assert!(matches!(box_extremes(&j, &[1.0; 3]), Err(Error::SingularJacobian)));
        assert!(matches!(force_bounds(&j, &[1.0; 3], None), Err(Error::SingularJacobian)));
        assert!(box_extremes(&DMatrix::identity(3, 3), &[1.0; 2]).is_err());
        assert!(box_extremes(&DMatrix::identity(3, 3), &[1.0, -1.0, 1.0]).is_err());
        assert!(ActuatorLimits::uniform(3, 1.0, 0.0, 1.0).validate().is_err());
    }

    #[test]
    fn redundant_map_directional_factor() {
        // two unit actuators pushing along x: speed 2 along x, 0 along y
        let j = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let x = directional_factor(&j, &[1.0, 1.0], &DVector::from_column_slice(&[1.0, 0.0])).unwrap();
        let y = directional_factor(&j, &[1.0, 1.0], &DVector::from_column_slice(&[0.0, 1.0])).unwrap();
        assert!((x - 2.0).abs() < 1e-9 && y.abs() < 1e-9);
    }
}
