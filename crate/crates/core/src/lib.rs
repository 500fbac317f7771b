//! Stiffness modeling and machining performance evaluation for parallel
//! manipulators.
//!
//! - [`spatial`]: small spatial algebra (screws, wrenches, poses, SVD helpers).
//! - [`field_fit`]: deflection screws from FEA-style displacement fields and
//!   compliance identification from several load cases.
//! - [`vjm`]: virtual-joint serial-chain models, loaded static equilibrium and
//!   Cartesian stiffness in the unloaded and loaded modes.
//! - [`performance`]: transmission factors under box actuator limits, box
//!   inscribing in a workspace, input efforts.
//! - [`orthoglide`]: a concrete 3-DOF translational manipulator and its
//!   direction/magnitude sweeps and error maps.
//!
//! Units are mm, N, N·mm and rad throughout.

pub mod error;
pub mod exec;
pub mod field_fit;
pub mod orthoglide;
pub mod performance;
pub mod spatial;
pub mod units;
pub mod vjm;

pub use error::{Error, Result};
pub use exec::Exec;
pub use spatial::{DeflectionScrew, Matrix66, Pose, Vector3, Wrench};
