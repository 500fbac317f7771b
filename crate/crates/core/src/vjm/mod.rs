//! Virtual-joint stiffness models of serial chains and parallel assemblies.
//!
//! A chain is a sequence of rigid transforms, locked actuators, passive joints
//! and virtual springs. [`solve_chain_equilibrium`] places a chain end at a
//! prescribed pose under load, [`solve_assembly`] balances an assembly against
//! a prescribed pose or external wrench, and [`stiffness_loaded`] /
//! [`stiffness_unloaded`] give the 6×6 Cartesian stiffness at the platform
//! frame origin.

pub mod chain;
pub mod io;
pub mod models;
pub mod solve;
pub mod stiffness;

pub use chain::{ChainElement, ChainFrames, JointFrame, JointType, PotentialHessians, SerialChainModel, Spring, Var};
pub use solve::{
    deflection_under_load, solve_assembly, solve_chain_equilibrium, AssemblyGuess, AssemblyTarget, ChainEquilibrium,
    ChainState, EquilibriumState, ManipulatorModel, SolverOptions,
};
pub use stiffness::{chain_stiffness, finite_difference_stiffness, stiffness_loaded, stiffness_unloaded, ChainStiffness, ConditionDiagnostics, StiffnessResult};
