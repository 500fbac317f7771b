//! JSON model files.
//!
//! ```json
//! {
//!   "name": "lever",
//!   "units": { "length": "mm", "force": "N" },
//!   "chains": [{
//!     "base": { "position": [0, 0, 0] },
//!     "nominal_q": [0.0],
//!     "elements": [
//!       { "kind": "virtual_spring", "dof": 1, "type": "revolute", "axis": [0, 0, 1], "stiffness": 1e6 },
//!       { "kind": "fixed_transform", "pose": { "position": [100, 0, 0] } },
//!       { "kind": "passive_joint", "type": "revolute", "axis": [0, 0, 1] }
//!     ]
//!   }]
//! }
//! ```
//!
//! A 6-dof spring takes either `stiffness` or `compliance` as a 6×6 array.

use serde::{Deserialize, Serialize};

use super::chain::{ChainElement, JointType, SerialChainModel, Spring};
use super::solve::ManipulatorModel;
use crate::error::{Error, Result};
use crate::spatial::{Matrix66, Pose, Vector3};
use crate::units::{check_declared, Units};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpringValue {
    Scalar(f64),
    Matrix([[f64; 6]; 6]),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementRecord {
    FixedTransform {
        pose: Pose,
    },
    ActiveJoint {
        #[serde(rename = "type")]
        joint_type: JointType,
        axis: [f64; 3],
        value: f64,
    },
    PassiveJoint {
        #[serde(rename = "type")]
        joint_type: JointType,
        axis: [f64; 3],
    },
    VirtualSpring {
        dof: u8,
        #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
        joint_type: Option<JointType>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<[f64; 3]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stiffness: Option<SpringValue>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        compliance: Option<SpringValue>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainRecord {
    #[serde(default)]
    pub base: Pose,
    #[serde(default)]
    pub tool: Pose,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal_q: Option<Vec<f64>>,
    pub elements: Vec<ElementRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    pub chains: Vec<ChainRecord>,
}

fn matrix(rows: &[[f64; 6]; 6]) -> Matrix66 {
    Matrix66::from_fn(|i, j| rows[i][j])
}

fn rows(m: &Matrix66) -> [[f64; 6]; 6] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn element(rec: &ElementRecord) -> Result<ChainElement> {
    Ok(match rec {
        ElementRecord::FixedTransform { pose } => ChainElement::FixedTransform(*pose),
        ElementRecord::ActiveJoint { joint_type, axis, value } => ChainElement::active(*joint_type, Vector3::from(*axis), *value),
        ElementRecord::PassiveJoint { joint_type, axis } => ChainElement::passive(*joint_type, Vector3::from(*axis)),
        ElementRecord::VirtualSpring { dof, joint_type, axis, stiffness, compliance } => {
            let value = match (stiffness, compliance) {
                (Some(s), None) => (s, false),
                (None, Some(c)) => (c, true),
                _ => return Err(Error::InvalidInput("virtual_spring needs exactly one of `stiffness` or `compliance`".into())),
            };
            match (dof, value) {
                (1, (SpringValue::Scalar(v), inverted)) => {
                    let (Some(jt), Some(ax)) = (joint_type, axis) else {
                        return Err(Error::InvalidInput("1-dof virtual_spring needs `type` and `axis`".into()));
                    };
                    let k = if inverted { 1.0 / v } else { *v };
                    ChainElement::spring1(*jt, Vector3::from(*ax), k)
                }
                (6, (SpringValue::Matrix(m), inverted)) => {
                    let m = matrix(m);
                    let k = if inverted {
                        m.try_inverse().ok_or_else(|| Error::InvalidParams("spring compliance is singular".into()))?
                    } else {
                        m
                    };
                    ChainElement::VirtualSpring(Spring::SixDof { stiffness: k })
                }
                _ => return Err(Error::InvalidInput(format!("virtual_spring with dof {dof} has the wrong value shape"))),
            }
        }
    })
}

impl ModelFile {
    pub fn parse(text: &str, require_units: bool) -> Result<Self> {
        let f: ModelFile = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("model file: {e}")))?;
        check_declared(f.units.as_ref(), require_units)?;
        Ok(f)
    }

    pub fn build(&self) -> Result<ManipulatorModel> {
        let chains = self
            .chains
            .iter()
            .map(|c| {
                let els = c.elements.iter().map(element).collect::<Result<Vec<_>>>()?;
                let chain = SerialChainModel::new(c.base, els, c.tool)?;
                match &c.nominal_q {
                    Some(q) => chain.with_nominal_q(q.clone()),
                    None => Ok(chain),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        ManipulatorModel::new(self.name.clone(), chains)
    }

    pub fn from_model(model: &ManipulatorModel) -> Self {
        let chains = model
            .chains
            .iter()
            .map(|c| ChainRecord {
                base: c.base_pose,
                tool: c.tool_transform,
                nominal_q: Some(c.nominal_q.clone()),
                elements: c
                    .elements
                    .iter()
                    .map(|e| match e {
                        ChainElement::FixedTransform(p) => ElementRecord::FixedTransform { pose: *p },
                        ChainElement::ActiveJoint { axis, joint_type, locked_value } => {
                            ElementRecord::ActiveJoint { joint_type: *joint_type, axis: (*axis).into(), value: *locked_value }
                        }
                        ChainElement::PassiveJoint { axis, joint_type } => {
                            ElementRecord::PassiveJoint { joint_type: *joint_type, axis: (*axis).into() }
                        }
                        ChainElement::VirtualSpring(Spring::OneDof { axis, joint_type, stiffness }) => ElementRecord::VirtualSpring {
                            dof: 1,
                            joint_type: Some(*joint_type),
                            axis: Some((*axis).into()),
                            stiffness: Some(SpringValue::Scalar(*stiffness)),
                            compliance: None,
                        },
                        ChainElement::VirtualSpring(Spring::SixDof { stiffness }) => ElementRecord::VirtualSpring {
                            dof: 6,
                            joint_type: None,
                            axis: None,
                            stiffness: Some(SpringValue::Matrix(rows(stiffness))),
                            compliance: None,
                        },
                    })
                    .collect(),
            })
            .collect();
        Self { name: model.name.clone(), units: Some(Units::default()), chains }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model records always serialize")
    }
}

pub fn read_model(path: &std::path::Path, require_units: bool) -> Result<ManipulatorModel> {
    ModelFile::parse(&std::fs::read_to_string(path)?, require_units)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    const LEVER: &str = r#"{
      "name": "lever",
      "units": { "length": "mm", "force": "N" },
      "chains": [{
        "base": { "position": [0, 0, 0] },
        "nominal_q": [0.0],
        "elements": [
          { "kind": "virtual_spring", "dof": 1, "type": "revolute", "axis": [0, 0, 1], "stiffness": 1e6 },
          { "kind": "fixed_transform", "pose": { "position": [100, 0, 0] } },
          { "kind": "passive_joint", "type": "revolute", "axis": [0, 0, 1] }
        ]
      }]
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let m = ModelFile::parse(LEVER, true).unwrap().build().unwrap();
        assert_eq!(m.chains.len(), 1);
        assert_eq!(m.chains[0].n_passive(), 1);
        assert_eq!(m.chains[0].n_spring(), 1);
        let again = ModelFile::parse(&ModelFile::from_model(&m).to_json(), true).unwrap().build().unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn compliance_form_inverts() {
        let mut c = [[0.0; 6]; 6];
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = 1e-3 * (i + 1) as f64;
        }
        let rec = ElementRecord::VirtualSpring { dof: 6, joint_type: None, axis: None, stiffness: None, compliance: Some(SpringValue::Matrix(c)) };
        match element(&rec).unwrap() {
            ChainElement::VirtualSpring(Spring::SixDof { stiffness }) => assert!((stiffness[(2, 2)] - 1.0 / 3e-3).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_records() {
        assert!(ModelFile::parse(r#"{"chains": []}"#, true).is_err());
        assert!(ModelFile::parse(r#"{"chains": []}"#, false).unwrap().build().is_err());
        let wrong_units = LEVER.replace("\"mm\"", "\"m\"");
        assert!(ModelFile::parse(&wrong_units, false).is_err());
        let both = r#"{"chains":[{"elements":[{"kind":"virtual_spring","dof":6}]}]}"#;
        assert!(ModelFile::parse(both, false).unwrap().build().is_err());
    }
}
