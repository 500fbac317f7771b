//! Small reference models with closed-form stiffness.

use super::chain::{ChainElement, JointType, SerialChainModel};
use super::solve::ManipulatorModel;
use crate::error::Result;
use crate::spatial::{Matrix66, Pose, Vector3};

/// Tip compliance of a straight prismatic beam of length `l` along x, clamped
/// at the far end, in the tip frame (translation first). Bending about y and z
/// couples tip translation and rotation with `±L²/2EI`.
pub fn euler_bernoulli_compliance(l: f64, e: f64, g: f64, area: f64, iy: f64, iz: f64, j: f64) -> Matrix66 {
    let mut c = Matrix66::zeros();
    c[(0, 0)] = l / (e * area);
    c[(1, 1)] = l.powi(3) / (3.0 * e * iz);
    c[(2, 2)] = l.powi(3) / (3.0 * e * iy);
    c[(3, 3)] = l / (g * j);
    c[(4, 4)] = l / (e * iy);
    c[(5, 5)] = l / (e * iz);
    // force along y bends about z (positive rotation), force along z bends about −y
    c[(1, 5)] = l * l / (2.0 * e * iz);
    c[(5, 1)] = c[(1, 5)];
    c[(2, 4)] = -l * l / (2.0 * e * iy);
    c[(4, 2)] = c[(2, 4)];
    c
}

/// Rigid link of length `l` along x followed by a 6-dof spring carrying the
/// beam's tip stiffness.
pub fn cantilever(l: f64, compliance: &Matrix66) -> Result<ManipulatorModel> {
    let k = compliance.try_inverse().expect("beam compliance is invertible");
    let k = (k + k.transpose()) * 0.5;
    let chain = SerialChainModel::new(
        Pose::identity(),
        vec![ChainElement::translation(l, 0.0, 0.0), ChainElement::spring6(k)],
        Pose::identity(),
    )?;
    ManipulatorModel::new("cantilever", vec![chain])
}

/// Inverted pendulum: a base spring stiff in every direction except rotation
/// about y (`k`, N·mm/rad), a vertical link of length `l` and a passive
/// revolute about y at the tip. Under an axial load `P` its lateral stiffness
/// is `k/L² − P/L`.
pub fn pendulum(k: f64, l: f64, stiff: f64) -> Result<ManipulatorModel> {
    let mut kb = Matrix66::identity() * stiff;
    kb[(4, 4)] = k;
    let chain = SerialChainModel::new(
        Pose::identity(),
        vec![
            ChainElement::spring6(kb),
            ChainElement::translation(0.0, 0.0, l),
            ChainElement::passive(JointType::Revolute, Vector3::y()),
        ],
        Pose::identity(),
    )?;
    ManipulatorModel::new("pendulum", vec![chain])
}

/// One 6-dof spring at the base and an offset tool point: the smallest chain
/// whose loaded stiffness differs from the unloaded one.
pub fn one_spring_chain() -> Result<ManipulatorModel> {
    let mut k = Matrix66::zeros();
    let diag = [2.0e3, 1.5e3, 3.0e3, 4.0e7, 2.5e7, 3.5e7];
    for (i, d) in diag.iter().enumerate() {
        k[(i, i)] = *d;
    }
    k[(0, 4)] = 1.0e4;
    k[(4, 0)] = 1.0e4;
    k[(1, 3)] = -2.0e4;
    k[(3, 1)] = -2.0e4;
    let chain = SerialChainModel::new(
        Pose::identity(),
        vec![ChainElement::spring6(k), ChainElement::translation(150.0, 40.0, -25.0)],
        Pose::identity(),
    )?;
    ManipulatorModel::new("one-spring", vec![chain])
}
