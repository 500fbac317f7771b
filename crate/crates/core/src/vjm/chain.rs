//! Serial chains with passive joints and virtual springs: geometry,
//! Jacobians and the Hessians of the external work.
//!
//! Every variable of a chain is an elementary joint (rotation about or
//! translation along a unit axis in the frame reached so far). A 6-dof spring
//! expands into three translations along x, y, z followed by three rotations
//! about x, y, z, so its coordinate Jacobian is the identity at zero
//! deflection and its 6×6 stiffness is expressed in the spring frame.
//!
//! Jacobian columns are world-frame twists of the end frame: translation rows
//! are velocities of the end point, rotation rows angular velocities. Wrenches
//! are world-frame forces and moments about the end point, so `Jᵀ·F` is the
//! vector of generalized forces.

use nalgebra::{Cholesky, DMatrix, DVector, Rotation3, Unit};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial::{Matrix66, Pose, Vector3, Wrench};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointType {
    Revolute,
    Prismatic,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Spring {
    /// Single coordinate along/about `axis`, stiffness in N/mm or N·mm/rad.
    OneDof { axis: Vector3, joint_type: JointType, stiffness: f64 },
    /// Full 6×6 stiffness in the spring frame, translation first.
    SixDof { stiffness: Matrix66 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChainElement {
    FixedTransform(Pose),
    ActiveJoint { axis: Vector3, joint_type: JointType, locked_value: f64 },
    PassiveJoint { axis: Vector3, joint_type: JointType },
    VirtualSpring(Spring),
}

impl ChainElement {
    pub fn translation(x: f64, y: f64, z: f64) -> Self {
        ChainElement::FixedTransform(Pose::from_translation(Vector3::new(x, y, z)))
    }

    pub fn passive(joint_type: JointType, axis: Vector3) -> Self {
        ChainElement::PassiveJoint { axis, joint_type }
    }

    pub fn active(joint_type: JointType, axis: Vector3, locked_value: f64) -> Self {
        ChainElement::ActiveJoint { axis, joint_type, locked_value }
    }

    pub fn spring6(stiffness: Matrix66) -> Self {
        ChainElement::VirtualSpring(Spring::SixDof { stiffness })
    }

    pub fn spring1(joint_type: JointType, axis: Vector3, stiffness: f64) -> Self {
        ChainElement::VirtualSpring(Spring::OneDof { axis, joint_type, stiffness })
    }
}

/// Which coordinate vector a variable joint belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Passive(usize),
    Spring(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Drive {
    Locked(f64),
    Variable(Var),
}

#[derive(Clone, Debug, PartialEq)]
enum Primitive {
    Fixed(Pose),
    Joint { joint_type: JointType, axis: Vector3, drive: Drive },
}

fn joint_transform(joint_type: JointType, axis: &Vector3, value: f64) -> Pose {
    match joint_type {
        JointType::Revolute => Pose::from_rotation(Rotation3::from_axis_angle(&Unit::new_unchecked(*axis), value)),
        JointType::Prismatic => Pose::from_translation(axis * value),
    }
}

fn unit_axis(axis: &Vector3) -> Result<Vector3> {
    let n = axis.norm();
    if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParams(format!("joint axis {axis:?} is not unit-norm")));
    }
    Ok(axis / n)
}

/// One serial chain of the VJM description: `base ∘ elements ∘ tool`.
#[derive(Clone, Debug, PartialEq)]
pub struct SerialChainModel {
    pub base_pose: Pose,
    pub elements: Vec<ChainElement>,
    pub tool_transform: Pose,
    /// Passive-joint values of the nominal rigid assembly (solver start point).
    pub nominal_q: Vec<f64>,
    primitives: Vec<Primitive>,
    n_passive: usize,
    n_spring: usize,
    spring_stiffness: DMatrix<f64>,
    spring_is_prismatic: Vec<bool>,
    passive_is_prismatic: Vec<bool>,
}

impl SerialChainModel {
    pub fn new(base_pose: Pose, elements: Vec<ChainElement>, tool_transform: Pose) -> Result<Self> {
        let mut primitives = Vec::new();
        let mut n_passive = 0;
        let mut spring_blocks: Vec<DMatrix<f64>> = Vec::new();
        let mut spring_is_prismatic = Vec::new();
        let mut passive_is_prismatic = Vec::new();
        let mut n_spring = 0;

        for el in &elements {
            match el {
                ChainElement::FixedTransform(p) => primitives.push(Primitive::Fixed(*p)),
                ChainElement::ActiveJoint { axis, joint_type, locked_value } => {
                    if !locked_value.is_finite() {
                        return Err(Error::InvalidParams("active joint value is not finite".into()));
                    }
                    primitives.push(Primitive::Joint {
                        joint_type: *joint_type,
                        axis: unit_axis(axis)?,
                        drive: Drive::Locked(*locked_value),
                    });
                }
                ChainElement::PassiveJoint { axis, joint_type } => {
                    primitives.push(Primitive::Joint {
                        joint_type: *joint_type,
                        axis: unit_axis(axis)?,
                        drive: Drive::Variable(Var::Passive(n_passive)),
                    });
                    passive_is_prismatic.push(*joint_type == JointType::Prismatic);
                    n_passive += 1;
                }
                ChainElement::VirtualSpring(Spring::OneDof { axis, joint_type, stiffness }) => {
                    if !(*stiffness > 0.0 && stiffness.is_finite()) {
                        return Err(Error::InvalidParams(format!("1-dof spring stiffness {stiffness} must be positive")));
                    }
                    primitives.push(Primitive::Joint {
                        joint_type: *joint_type,
                        axis: unit_axis(axis)?,
                        drive: Drive::Variable(Var::Spring(n_spring)),
                    });
                    spring_blocks.push(DMatrix::from_element(1, 1, *stiffness));
                    spring_is_prismatic.push(*joint_type == JointType::Prismatic);
                    n_spring += 1;
                }
                ChainElement::VirtualSpring(Spring::SixDof { stiffness }) => {
                    let sym = (stiffness - stiffness.transpose()).amax();
                    if !stiffness.iter().all(|x| x.is_finite())
                        || sym > 1e-9 * stiffness.amax()
                        || Cholesky::new(*stiffness).is_none()
                    {
                        return Err(Error::InvalidParams("6-dof spring stiffness must be symmetric positive definite".into()));
                    }
                    let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
                    for (k, jt) in [JointType::Prismatic, JointType::Revolute].into_iter().enumerate() {
                        for (i, a) in axes.iter().enumerate() {
                            primitives.push(Primitive::Joint {
                                joint_type: jt,
                                axis: *a,
                                drive: Drive::Variable(Var::Spring(n_spring + 3 * k + i)),
                            });
                            spring_is_prismatic.push(jt == JointType::Prismatic);
                        }
                    }
                    spring_blocks.push(DMatrix::from_fn(6, 6, |i, j| stiffness[(i, j)]));
                    n_spring += 6;
                }
            }
        }
        if n_spring == 0 {
            return Err(Error::InvalidParams("a chain needs at least one virtual spring".into()));
        }
        let mut spring_stiffness = DMatrix::zeros(n_spring, n_spring);
        let mut at = 0;
        for b in &spring_blocks {
            let k = b.nrows();
            spring_stiffness.view_mut((at, at), (k, k)).copy_from(b);
            at += k;
        }
        Ok(Self {
            base_pose,
            elements,
            tool_transform,
            nominal_q: vec![0.0; n_passive],
            primitives,
            n_passive,
            n_spring,
            spring_stiffness,
            spring_is_prismatic,
            passive_is_prismatic,
        })
    }

    pub fn with_nominal_q(mut self, q: Vec<f64>) -> Result<Self> {
        if q.len() != self.n_passive {
            return Err(Error::DimensionMismatch(format!(
                "nominal q has {} entries, chain has {} passive joints",
                q.len(),
                self.n_passive
            )));
        }
        self.nominal_q = q;
        Ok(self)
    }

    /// Number of passive joints `n`.
    pub fn n_passive(&self) -> usize {
        self.n_passive
    }

    /// Number of virtual-spring coordinates `m`.
    pub fn n_spring(&self) -> usize {
        self.n_spring
    }

    /// Aggregated block-diagonal spring stiffness `K_θ` (m×m).
    pub fn spring_stiffness(&self) -> &DMatrix<f64> {
        &self.spring_stiffness
    }

    pub(crate) fn passive_is_prismatic(&self) -> &[bool] {
        &self.passive_is_prismatic
    }

    pub(crate) fn spring_is_prismatic(&self) -> &[bool] {
        &self.spring_is_prismatic
    }

    fn check_dims(&self, q: &DVector<f64>, theta: &DVector<f64>) -> Result<()> {
        if q.len() != self.n_passive || theta.len() != self.n_spring {
            return Err(Error::DimensionMismatch(format!(
                "chain expects q[{}], θ[{}]; got q[{}], θ[{}]",
                self.n_passive,
                self.n_spring,
                q.len(),
                theta.len()
            )));
        }
        Ok(())
    }

    /// Walks the chain and records the world axis and origin of every
    /// variable joint.
    pub fn frames(&self, q: &DVector<f64>, theta: &DVector<f64>) -> Result<ChainFrames> {
        self.check_dims(q, theta)?;
        let mut t = self.base_pose;
        let mut joints = Vec::with_capacity(self.n_passive + self.n_spring);
        for prim in &self.primitives {
            match prim {
                Primitive::Fixed(p) => t = t.compose(p),
                Primitive::Joint { joint_type, axis, drive } => {
                    let value = match drive {
                        Drive::Locked(v) => *v,
                        Drive::Variable(var) => {
                            joints.push(JointFrame {
                                var: *var,
                                joint_type: *joint_type,
                                axis: t.rotation * axis,
                                origin: t.position,
                            });
                            match var {
                                Var::Passive(i) => q[*i],
                                Var::Spring(i) => theta[*i],
                            }
                        }
                    };
                    t = t.compose(&joint_transform(*joint_type, axis, value));
                }
            }
        }
        Ok(ChainFrames { end: t.compose(&self.tool_transform), joints, n_passive: self.n_passive, n_spring: self.n_spring })
    }

    /// End-frame pose `g(q, θ)`.
    pub fn forward_geometry(&self, q: &DVector<f64>, theta: &DVector<f64>) -> Result<Pose> {
        Ok(self.frames(q, theta)?.end)
    }

    /// `(J_q, J_θ)`, 6×n and 6×m.
    pub fn jacobians(&self, q: &DVector<f64>, theta: &DVector<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        Ok(self.frames(q, theta)?.jacobians())
    }

    /// Hessian blocks of the work function at fixed wrench `F`.
    pub fn potential_hessians(&self, q: &DVector<f64>, theta: &DVector<f64>, f: &Wrench) -> Result<PotentialHessians> {
        Ok(self.frames(q, theta)?.hessians(f))
    }

    pub fn zero_theta(&self) -> DVector<f64> {
        DVector::zeros(self.n_spring)
    }

    pub fn nominal_q_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.nominal_q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointFrame {
    pub var: Var,
    pub joint_type: JointType,
    /// World-frame unit axis.
    pub axis: Vector3,
    /// World-frame point on the axis (frame origin before the joint moves).
    pub origin: Vector3,
}

impl JointFrame {
    fn twist(&self, end: &Vector3) -> [f64; 6] {
        match self.joint_type {
            JointType::Revolute => {
                let v = self.axis.cross(&(end - self.origin));
                [v.x, v.y, v.z, self.axis.x, self.axis.y, self.axis.z]
            }
            JointType::Prismatic => [self.axis.x, self.axis.y, self.axis.z, 0.0, 0.0, 0.0],
        }
    }
}

/// Geometry of a chain at one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainFrames {
    pub end: Pose,
    /// Variable joints in chain order.
    pub joints: Vec<JointFrame>,
    n_passive: usize,
    n_spring: usize,
}

/// Second derivatives of the work `Ψ` with respect to `(q, θ)`. Entry
/// `(a, b)` of each block is `∂(J_aᵀF)/∂x_b` at fixed `F`; for pure forces the
/// blocks are symmetric and `θq = qθᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialHessians {
    pub qq: DMatrix<f64>,
    pub q_theta: DMatrix<f64>,
    pub theta_q: DMatrix<f64>,
    pub theta_theta: DMatrix<f64>,
}

impl ChainFrames {
    pub fn jacobians(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let mut jq = DMatrix::zeros(6, self.n_passive);
        let mut jt = DMatrix::zeros(6, self.n_spring);
        let p = self.end.position;
        for jf in &self.joints {
            let col = jf.twist(&p);
            let (m, i) = match jf.var {
                Var::Passive(i) => (&mut jq, i),
                Var::Spring(i) => (&mut jt, i),
            };
            for r in 0..6 {
                m[(r, i)] = col[r];
            }
        }
        (jq, jt)
    }

    pub fn hessians(&self, f: &Wrench) -> PotentialHessians {
        let n = self.n_passive;
        let m = self.n_spring;
        let mut out = PotentialHessians {
            qq: DMatrix::zeros(n, n),
            q_theta: DMatrix::zeros(n, m),
            theta_q: DMatrix::zeros(m, n),
            theta_theta: DMatrix::zeros(m, m),
        };
        if f.force.norm() == 0.0 && f.moment.norm() == 0.0 {
            return out;
        }
        let pe = self.end.position;
        for (a, ja) in self.joints.iter().enumerate() {
            for (b, jb) in self.joints.iter().enumerate() {
                // motion of joint b moves everything distal to it
                let revolute_b = jb.joint_type == JointType::Revolute;
                let d_end = match jb.joint_type {
                    JointType::Revolute => jb.axis.cross(&(pe - jb.origin)),
                    JointType::Prismatic => jb.axis,
                };
                let (d_axis, d_origin) = if b < a {
                    match jb.joint_type {
                        JointType::Revolute => (jb.axis.cross(&ja.axis), jb.axis.cross(&(ja.origin - jb.origin))),
                        JointType::Prismatic => (Vector3::zeros(), jb.axis),
                    }
                } else {
                    (Vector3::zeros(), Vector3::zeros())
                };
                debug_assert!(revolute_b || d_axis == Vector3::zeros());
                let value = match ja.joint_type {
                    JointType::Revolute => {
                        f.force.dot(&(d_axis.cross(&(pe - ja.origin)) + ja.axis.cross(&(d_end - d_origin))))
                            + f.moment.dot(&d_axis)
                    }
                    JointType::Prismatic => f.force.dot(&d_axis),
                };
                match (ja.var, jb.var) {
                    (Var::Passive(i), Var::Passive(j)) => out.qq[(i, j)] = value,
                    (Var::Passive(i), Var::Spring(j)) => out.q_theta[(i, j)] = value,
                    (Var::Spring(i), Var::Passive(j)) => out.theta_q[(i, j)] = value,
                    (Var::Spring(i), Var::Spring(j)) => out.theta_theta[(i, j)] = value,
                }
            }
        }
        out
    }
}
