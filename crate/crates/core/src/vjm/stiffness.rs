//! Cartesian stiffness of chains and assemblies, unloaded and loaded.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::chain::SerialChainModel;
use super::solve::{solve_chain_equilibrium, ChainEquilibrium, ChainState, EquilibriumState, ManipulatorModel, SolverOptions};
use crate::error::{Error, Result};
use crate::spatial::{asymmetry, condition_number, scaled_condition_number, DeflectionScrew, Matrix66, Pose, Wrench};

/// Stiffness of one chain about its end point.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainStiffness {
    pub k_f: Matrix66,
    /// Passive-joint sensitivity `∂q/∂t` block of the inverted system (6×n).
    pub k_q: DMatrix<f64>,
    /// Scaled condition number of the bordered matrix that was inverted.
    pub condition: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionDiagnostics {
    pub chain_conditions: Vec<f64>,
    pub stiffness_condition: f64,
    pub asymmetry: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StiffnessResult {
    pub k_f: Matrix66,
    pub chains: Vec<ChainStiffness>,
    pub diagnostics: ConditionDiagnostics,
}

impl StiffnessResult {
    pub fn compliance(&self) -> Option<Matrix66> {
        self.k_f.try_inverse()
    }
}

/// Chain stiffness at an equilibrium. Without Hessians the result is the
/// classical unloaded stiffness at the same configuration.
pub fn chain_stiffness(
    chain: &SerialChainModel,
    eq: &ChainEquilibrium,
    include_hessians: bool,
    opts: &SolverOptions,
) -> Result<ChainStiffness> {
    let frames = chain.frames(&eq.q, &eq.theta)?;
    let (jq, jt) = frames.jacobians();
    let n = chain.n_passive();
    let h = if include_hessians {
        frames.hessians(&eq.wrench)
    } else {
        frames.hessians(&Wrench::zero())
    };
    let kt = chain.spring_stiffness() - &h.theta_theta;
    let k_theta = match kt.clone().lu().try_inverse() {
        Some(c) => c,
        None => return Err(Error::SingularConfiguration { condition: condition_number(&kt) }),
    };
    let a = &jt * &k_theta * jt.transpose();
    let b = &jq + &jt * &k_theta * &h.theta_q;
    let c = jq.transpose() + &h.q_theta * &k_theta * jt.transpose();
    let d = &h.qq + &h.q_theta * &k_theta * &h.theta_q;
    let mut bordered = DMatrix::zeros(6 + n, 6 + n);
    bordered.view_mut((0, 0), (6, 6)).copy_from(&a);
    bordered.view_mut((0, 6), (6, n)).copy_from(&b);
    bordered.view_mut((6, 0), (n, 6)).copy_from(&c);
    bordered.view_mut((6, 6), (n, n)).copy_from(&d);
    let condition = scaled_condition_number(&bordered);
    if !(condition <= opts.max_condition) {
        return Err(Error::SingularConfiguration { condition });
    }
    let inv = bordered
        .lu()
        .try_inverse()
        .ok_or(Error::SingularConfiguration { condition })?;
    let k_f = Matrix66::from_fn(|i, j| inv[(i, j)]);
    let k_q = inv.view((0, 6), (6, n)).into_owned();
    Ok(ChainStiffness { k_f, k_q, condition })
}

fn combine(chains: Vec<ChainStiffness>) -> StiffnessResult {
    let k_f = chains.iter().fold(Matrix66::zeros(), |acc, c| acc + c.k_f);
    let kd = DMatrix::from_fn(6, 6, |i, j| k_f[(i, j)]);
    let diagnostics = ConditionDiagnostics {
        chain_conditions: chains.iter().map(|c| c.condition).collect(),
        stiffness_condition: scaled_condition_number(&kd),
        asymmetry: asymmetry(&k_f),
    };
    StiffnessResult { k_f, chains, diagnostics }
}

/// Loaded-mode stiffness at an equilibrium returned by the assembly solver.
pub fn stiffness_loaded(model: &ManipulatorModel, state: &EquilibriumState, opts: &SolverOptions) -> Result<StiffnessResult> {
    if state.chains.len() != model.chains.len() {
        return Err(Error::DimensionMismatch("equilibrium state does not match the model".into()));
    }
    let chains = model
        .chains
        .iter()
        .zip(&state.chains)
        .map(|(c, eq)| chain_stiffness(c, eq, true, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(chains))
}

/// Unloaded stiffness with the platform at `pose` and all springs relaxed.
/// The passive joints are placed by the displacement-driven solve from
/// `guesses` (nominal configuration when `None`).
pub fn stiffness_unloaded(
    model: &ManipulatorModel,
    pose: &Pose,
    guesses: Option<&[ChainState]>,
    opts: &SolverOptions,
) -> Result<StiffnessResult> {
    let chains = model
        .chains
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let eq = solve_chain_equilibrium(c, pose, guesses.and_then(|g| g.get(i)), None, opts)?;
            // relaxed springs: the geometry is the rigid one
            let relaxed = ChainEquilibrium { theta: DVector::zeros(c.n_spring()), wrench: Wrench::zero(), ..eq };
            chain_stiffness(c, &relaxed, false, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(combine(chains))
}

/// Central differences of the displacement-driven map `t ↦ ΣF(t)` about an
/// equilibrium: the numerical counterpart of [`stiffness_loaded`]. Columns
/// use steps `h_t` (mm) for translations and `h_r` (rad) for rotations.
pub fn finite_difference_stiffness(
    model: &ManipulatorModel,
    state: &EquilibriumState,
    h_t: f64,
    h_r: f64,
    opts: &SolverOptions,
) -> Result<Matrix66> {
    let guesses: Vec<ChainState> = state.chains.iter().map(ChainEquilibrium::state).collect();
    let wrench_at = |d: &DeflectionScrew| -> Result<nalgebra::Vector6<f64>> {
        let pose = state.platform_pose.displaced(d);
        let mut total = Wrench::zero();
        for (i, c) in model.chains.iter().enumerate() {
            total = total + solve_chain_equilibrium(c, &pose, Some(&guesses[i]), Some(&state.chains[i].wrench), opts)?.wrench;
        }
        Ok(total.to_vector())
    };
    let mut k = Matrix66::zeros();
    for col in 0..6 {
        let h = if col < 3 { h_t } else { h_r };
        let mut e = nalgebra::Vector6::zeros();
        e[col] = h;
        let plus = wrench_at(&DeflectionScrew::from_vector(&e))?;
        let minus = wrench_at(&DeflectionScrew::from_vector(&(-e)))?;
        k.set_column(col, &((plus - minus) / (2.0 * h)));
    }
    Ok(k)
}
