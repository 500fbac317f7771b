//! Actuator efforts along a trajectory, `τ = M(q)q̈ + C(q, q̇)q̇ + G(q) + Jᵀf`.
//!
//! Viscous friction belongs in `C` and Coulomb friction in `G`; the model
//! terms are caller-supplied closures.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spatial::Wrench;

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub qdd: DVector<f64>,
}

type MatFn<'a> = Box<dyn Fn(&DVector<f64>) -> DMatrix<f64> + 'a>;

pub struct DynamicsInput<'a> {
    pub mass_matrix: MatFn<'a>,
    pub coriolis: Box<dyn Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + 'a>,
    pub gravity_friction: Box<dyn Fn(&DVector<f64>) -> DVector<f64> + 'a>,
    /// 6×n, twist = J·q̇.
    pub jacobian: MatFn<'a>,
    pub external: Wrench,
    pub samples: Vec<TrajectorySample>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffortReport {
    pub efforts: Vec<Vec<f64>>,
    /// max |τᵢ| over the trajectory.
    pub peak: Vec<f64>,
    pub rms: Vec<f64>,
}

fn dims(what: &str, got: (usize, usize), want: (usize, usize)) -> Result<()> {
    if got != want {
        return Err(Error::DimensionMismatch(format!("{what} is {}x{}, expected {}x{}", got.0, got.1, want.0, want.1)));
    }
    Ok(())
}

pub fn input_efforts(d: &DynamicsInput) -> Result<EffortReport> {
    let Some(first) = d.samples.first() else {
        return Err(Error::InvalidInput("trajectory has no samples".into()));
    };
    let n = first.q.len();
    let f = d.external.to_vector();
    let f = DVector::from_column_slice(f.as_slice());
    let mut efforts = Vec::with_capacity(d.samples.len());
    for (k, s) in d.samples.iter().enumerate() {
        if s.qd.len() != n || s.qdd.len() != n || s.q.len() != n {
            return Err(Error::DimensionMismatch(format!("sample {k} has inconsistent lengths")));
        }
        let m = (d.mass_matrix)(&s.q);
        dims("mass matrix", m.shape(), (n, n))?;
        if (&m - m.transpose()).amax() > 1e-9 * m.amax().max(1e-300) || m.clone().cholesky().is_none() {
            return Err(Error::InvalidInput(format!("mass matrix at sample {k} is not symmetric positive definite")));
        }
        let c = (d.coriolis)(&s.q, &s.qd);
        dims("coriolis matrix", c.shape(), (n, n))?;
        let g = (d.gravity_friction)(&s.q);
        dims("gravity/friction vector", (g.len(), 1), (n, 1))?;
        let j = (d.jacobian)(&s.q);
        dims("jacobian", j.shape(), (6, n))?;
        let tau = &m * &s.qdd + &c * &s.qd + g + j.transpose() * &f;
        efforts.push(tau.iter().copied().collect::<Vec<f64>>());
    }
    let count = efforts.len() as f64;
    let peak = (0..n).map(|i| efforts.iter().map(|t| t[i].abs()).fold(0.0, f64::max)).collect();
    let rms = (0..n).map(|i| (efforts.iter().map(|t| t[i] * t[i]).sum::<f64>() / count).sqrt()).collect();
    Ok(EffortReport { efforts, peak, rms })
}
