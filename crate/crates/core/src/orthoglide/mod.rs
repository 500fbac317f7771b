//! Orthoglide: a 3-DOF translational parallel manipulator with three
//! orthogonal prismatic-actuated legs.
//!
//! Each leg is modeled in its own frame (local x = actuator axis):
//! locked actuator, actuator spring, 6-dof foot spring, two passive
//! rotations (z then y), the bar of length `L` with its 6-dof tip spring, two
//! passive rotations undoing the first pair (y then z), and the platform
//! offset `r`. The parallelogram is reduced to this single equivalent bar, so
//! each leg constrains the bar's axial force and torsion only.
//!
//! The model is rebuilt per workpoint: actuator values come from
//! [`inverse_kinematics`] and the passive angles from the rigid closure.

pub mod io;
pub mod studies;

use nalgebra::{Matrix3, Rotation3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::{Matrix66, Pose, Vector3};
use crate::vjm::{ChainElement, JointType, ManipulatorModel, SerialChainModel};

/// Bar compliance diagonals (mm/N ×3, rad/(N·mm) ×3) from the FEA
/// identification of the parallelogram bar.
pub const ORIGINAL_BAR: [f64; 6] = [4.55e-5, 2.33e-1, 5.08e-2, 2.88e-5, 1.50e-6, 7.19e-6];
pub const REVISED_BAR: [f64; 6] = [3.10e-5, 3.54e-1, 6.91e-2, 0.39e-5, 0.33e-6, 1.74e-6];

/// Bar length of the original design.
pub const ORIGINAL_L: f64 = 310.0;
/// Bar length of the enlarged design. Not published; for a cantilever the
/// ratios `k22/k66` and `k33/k55` both equal `L²/3`, which puts the revised
/// bar at 781–792 mm.
pub const REVISED_L: f64 = 785.0;

pub const WORKPOINTS: [[f64; 3]; 4] = [[0.0, 0.0, 0.0], [-200.0, -200.0, -200.0], [300.0, 300.0, 300.0], [-200.0, 300.0, 0.0]];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Table1Variant {
    Original,
    #[default]
    Revised,
}

impl Table1Variant {
    pub fn bar_diagonal(self) -> [f64; 6] {
        match self {
            Table1Variant::Original => ORIGINAL_BAR,
            Table1Variant::Revised => REVISED_BAR,
        }
    }

    pub fn bar_length(self) -> f64 {
        match self {
            Table1Variant::Original => ORIGINAL_L,
            Table1Variant::Revised => REVISED_L,
        }
    }
}

/// Named required-workspace cubes (mm).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorkspacePreset {
    /// 500 mm cube spanning −200…300 on every axis (the milling requirement).
    Milling500,
    /// 200 mm cube centered on the isotropic point.
    Cube200,
}

impl WorkspacePreset {
    pub fn bounds(self) -> ([f64; 3], [f64; 3]) {
        match self {
            WorkspacePreset::Milling500 => ([-200.0; 3], [300.0; 3]),
            WorkspacePreset::Cube200 => ([-100.0; 3], [100.0; 3]),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrthoglideParams {
    /// Parallelogram (bar) length, mm.
    pub l: f64,
    /// Parallelogram width, mm. Carried for completeness; the single-bar
    /// reduction does not use it.
    pub d: f64,
    /// Platform offset, mm.
    pub r: f64,
    /// Actuator stiffness, N/mm.
    pub actuator_stiffness: f64,
    pub foot_compliance: Matrix66,
    pub bar_compliance: Matrix66,
    pub variant: Table1Variant,
}

fn diag(v: [f64; 6]) -> Matrix66 {
    Matrix66::from_diagonal(&nalgebra::Vector6::from(v))
}

impl OrthoglideParams {
    pub fn for_variant(variant: Table1Variant) -> Self {
        let bar = diag(variant.bar_diagonal());
        Self {
            l: variant.bar_length(),
            d: 100.0,
            r: 31.0,
            actuator_stiffness: 1e6,
            foot_compliance: bar * 1e-2,
            bar_compliance: bar,
            variant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("L", self.l), ("d", self.d), ("r", self.r), ("actuator_stiffness", self.actuator_stiffness)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} = {v} must be positive")));
            }
        }
        for (name, c) in [("foot", &self.foot_compliance), ("bar", &self.bar_compliance)] {
            if nalgebra::Cholesky::new(*c).is_none() || (c - c.transpose()).amax() > 1e-12 * c.amax() {
                return Err(Error::InvalidParams(format!("{name} compliance must be symmetric positive definite")));
            }
        }
        Ok(())
    }

    /// Same geometry with every stiffness multiplied by `factor`.
    pub fn stiffened(&self, factor: f64) -> Self {
        Self {
            actuator_stiffness: self.actuator_stiffness * factor,
            foot_compliance: self.foot_compliance / factor,
            bar_compliance: self.bar_compliance / factor,
            ..self.clone()
        }
    }
}

impl Default for OrthoglideParams {
    fn default() -> Self {
        Self::for_variant(Table1Variant::Revised)
    }
}

/// Rotation taking leg `i`'s local frame to the world frame: local x maps
/// onto world axis `i`, and the legs are cyclic permutations of each other.
pub fn leg_rotation(i: usize) -> Rotation3<f64> {
    let e = [Vector3::x(), Vector3::y(), Vector3::z()];
    let m = Matrix3::from_columns(&[e[i % 3], e[(i + 1) % 3], e[(i + 2) % 3]]);
    Rotation3::from_matrix_unchecked(m)
}

/// Rigid configuration of one leg for platform position `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LegConfiguration {
    /// Actuator coordinate along the leg axis, mm.
    pub rho: f64,
    /// Passive angles `(q1, q2, q3, q4)`.
    pub q: [f64; 4],
    /// Unit bar direction, world frame.
    pub bar: Vector3,
}

fn leg_configuration(params: &OrthoglideParams, i: usize, p: &Vector3) -> Result<LegConfiguration> {
    let rot = leg_rotation(i);
    let pl = rot.inverse() * p;
    let lateral = pl.y * pl.y + pl.z * pl.z;
    let disc = params.l * params.l - lateral;
    if !(disc > 0.0) {
        return Err(Error::Unreachable { x: p.x, y: p.y, z: p.z });
    }
    // actuator behind the platform (negative side of the leg axis)
    let rho = pl.x - params.r - disc.sqrt();
    let n = (pl - Vector3::x() * (params.r + rho)) / params.l;
    let q1 = n.y.atan2(n.x);
    let q2 = -n.z.clamp(-1.0, 1.0).asin();
    Ok(LegConfiguration { rho, q: [q1, q2, -q2, -q1], bar: rot * n })
}

/// Actuator values placing the platform at `p`.
pub fn inverse_kinematics(params: &OrthoglideParams, p: &Vector3) -> Result<[f64; 3]> {
    let mut q = [0.0; 3];
    for (i, qi) in q.iter_mut().enumerate() {
        *qi = leg_configuration(params, i, p)?.rho;
    }
    Ok(q)
}

pub fn leg_configurations(params: &OrthoglideParams, p: &Vector3) -> Result<[LegConfiguration; 3]> {
    Ok([leg_configuration(params, 0, p)?, leg_configuration(params, 1, p)?, leg_configuration(params, 2, p)?])
}

/// Rigid platform position for actuator values `rho` (Newton on the closure
/// equations, started from the isotropic point).
pub fn forward_kinematics(params: &OrthoglideParams, rho: &[f64; 3]) -> Result<Vector3> {
    let mut p = Vector3::zeros();
    for _ in 0..50 {
        let cur = inverse_kinematics(params, &p)?;
        let err = Vector3::new(rho[0] - cur[0], rho[1] - cur[1], rho[2] - cur[2]);
        if err.amax() < 1e-12 {
            return Ok(p);
        }
        let j = kinematic_jacobian(params, &p)?;
        p += j * err;
    }
    Err(Error::NoConvergence { iterations: 50, residual: (inverse_kinematics(params, &p)?[0] - rho[0]).abs() })
}

/// Velocity Jacobian `ṗ = J·ρ̇`. Its inverse has rows `nᵢᵀ / (nᵢ·eᵢ)`.
pub fn kinematic_jacobian(params: &OrthoglideParams, p: &Vector3) -> Result<Matrix3<f64>> {
    let legs = leg_configurations(params, p)?;
    let mut jinv = Matrix3::zeros();
    for (i, leg) in legs.iter().enumerate() {
        let denom = leg.bar[i];
        if denom.abs() < 1e-12 {
            return Err(Error::SingularJacobian);
        }
        jinv.set_row(i, &(leg.bar.transpose() / denom));
    }
    jinv.try_inverse().ok_or(Error::SingularJacobian)
}

fn leg_chain(params: &OrthoglideParams, i: usize, leg: &LegConfiguration) -> Result<SerialChainModel> {
    let rot = leg_rotation(i);
    let k_foot = params.foot_compliance.try_inverse().ok_or_else(|| Error::InvalidParams("foot compliance is singular".into()))?;
    let k_bar = params.bar_compliance.try_inverse().ok_or_else(|| Error::InvalidParams("bar compliance is singular".into()))?;
    let sym = |k: Matrix66| (k + k.transpose()) * 0.5;
    let elements = vec![
        ChainElement::active(JointType::Prismatic, Vector3::x(), leg.rho),
        ChainElement::spring1(JointType::Prismatic, Vector3::x(), params.actuator_stiffness),
        ChainElement::spring6(sym(k_foot)),
        ChainElement::passive(JointType::Revolute, Vector3::z()),
        ChainElement::passive(JointType::Revolute, Vector3::y()),
        ChainElement::translation(params.l, 0.0, 0.0),
        ChainElement::spring6(sym(k_bar)),
        ChainElement::passive(JointType::Revolute, Vector3::y()),
        ChainElement::passive(JointType::Revolute, Vector3::z()),
    ];
    // platform frame shares the world orientation
    let tool = Pose::new(Vector3::new(params.r, 0.0, 0.0), rot.inverse());
    SerialChainModel::new(Pose::from_rotation(rot), elements, tool)?.with_nominal_q(leg.q.to_vec())
}

/// VJM model with the platform at `p` (world frame, mm).
pub fn build_orthoglide(params: &OrthoglideParams, p: &Vector3) -> Result<ManipulatorModel> {
    params.validate()?;
    let legs = leg_configurations(params, p)?;
    let chains = legs.iter().enumerate().map(|(i, leg)| leg_chain(params, i, leg)).collect::<Result<Vec<_>>>()?;
    ManipulatorModel::new("orthoglide", chains)
}
