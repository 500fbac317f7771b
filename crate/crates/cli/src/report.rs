//! JSON reports. Every report deserializes back to the same values.

use pkm_stiffness::vjm::ConditionDiagnostics;
use pkm_stiffness::Matrix66;
use serde::{Deserialize, Serialize};

pub type Rows6 = [[f64; 6]; 6];
pub type Rows3 = [[f64; 3]; 3];

pub fn rows6(m: &Matrix66) -> Rows6 {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

pub fn rows3(m: &nalgebra::Matrix3<f64>) -> Rows3 {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub label: String,
    pub n_nodes: usize,
    pub n_used: usize,
    pub outliers: usize,
    /// Row indices (0-based, data rows only) of rejected nodes.
    pub outlier_rows: Vec<usize>,
    pub reference_point: [f64; 3],
    pub translation: [f64; 3],
    pub rotation: [f64; 3],
    pub deflection_std: [f64; 6],
    pub sigma_hat: f64,
    pub cov_translation: Rows3,
    pub cov_rotation: Rows3,
    pub applied_wrench: [f64; 6],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentifyReport {
    pub n_cases: usize,
    pub cases: Vec<String>,
    pub compliance: Rows6,
    pub symmetrized: Rows6,
    pub entry_std: Rows6,
    /// 1 where the entry is significantly non-zero.
    pub significance_mask: [[u8; 6]; 6],
    pub k_sig: f64,
    pub sigma_pooled: f64,
    pub symmetry_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StiffnessReport {
    pub model: String,
    pub mode: String,
    pub wrench: [f64; 6],
    pub platform_position: [f64; 3],
    /// Platform deflection screw under the wrench (loaded mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deflection: Option<[f64; 6]>,
    pub stiffness: Rows6,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compliance: Option<Rows6>,
    pub chain_conditions: Vec<f64>,
    pub stiffness_condition: f64,
    pub asymmetry: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_iterations: Option<usize>,
}

impl StiffnessReport {
    pub fn set_diagnostics(&mut self, d: &ConditionDiagnostics) {
        self.chain_conditions = d.chain_conditions.clone();
        self.stiffness_condition = d.stiffness_condition;
        self.asymmetry = d.asymmetry;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorsReport {
    pub kind: String,
    pub method: String,
    pub jacobian: Vec<Vec<f64>>,
    pub limits: Vec<f64>,
    pub k_min: f64,
    pub k_max: f64,
    pub condition: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directional: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_round_trip() {
        let r = FactorsReport {
            kind: "force".into(),
            method: "box_directional".into(),
            jacobian: vec![vec![0.1, 1.0 / 3.0], vec![-2.5e-17, 7.0]],
            limits: vec![1.0, 2.0],
            k_min: 0.1 + 0.2,
            k_max: std::f64::consts::PI,
            condition: 10.471975511965978,
            directions: None,
            directional: Some(vec![1e-300, 6.02e23]),
            seed: Some(3),
        };
        let text = serde_json::to_string_pretty(&r).unwrap();
        assert_eq!(serde_json::from_str::<FactorsReport>(&text).unwrap(), r);
    }
}
