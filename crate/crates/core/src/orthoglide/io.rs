//! Parameter files and study CSV output.
//!
//! Parameters are JSON; every field is optional and falls back to the chosen
//! chosen bar variant:
//!
//! ```json
//! { "table1_variant": "revised", "L": 785, "d": 100, "r": 31,
//!   "actuator_stiffness": 1e6, "foot_compliance_factor": 0.01,
//!   "units": { "length": "mm", "force": "N" } }
//! ```

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::studies::{ErrorMap, SweepResult};
use super::{OrthoglideParams, Table1Variant};
use crate::error::{Error, Result};
use crate::spatial::Matrix66;
use crate::units::{check_declared, Units};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(default)]
    pub table1_variant: Table1Variant,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actuator_stiffness: Option<f64>,
    /// Foot compliance as a multiple of the bar compliance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub foot_compliance_factor: Option<f64>,
    /// Diagonal of the bar compliance, overriding the variant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bar_compliance: Option<[f64; 6]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub foot_compliance: Option<[f64; 6]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
}

impl ParamsFile {
    pub fn parse(text: &str, require_units: bool) -> Result<Self> {
        let f: ParamsFile = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("parameters file: {e}")))?;
        check_declared(f.units.as_ref(), require_units)?;
        Ok(f)
    }

    pub fn params(&self) -> Result<OrthoglideParams> {
        let mut p = OrthoglideParams::for_variant(self.table1_variant);
        if let Some(v) = self.l {
            p.l = v;
        }
        if let Some(v) = self.d {
            p.d = v;
        }
        if let Some(v) = self.r {
            p.r = v;
        }
        if let Some(v) = self.actuator_stiffness {
            p.actuator_stiffness = v;
        }
        if let Some(b) = self.bar_compliance {
            p.bar_compliance = Matrix66::from_diagonal(&b.into());
        }
        p.foot_compliance = match (self.foot_compliance, self.foot_compliance_factor) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidInput("give either foot_compliance or foot_compliance_factor".into()))
            }
            (Some(f), None) => Matrix66::from_diagonal(&f.into()),
            (None, Some(k)) => p.bar_compliance * k,
            (None, None) => p.bar_compliance * 1e-2,
        };
        p.validate()?;
        Ok(p)
    }
}

pub fn read_params(path: &std::path::Path, require_units: bool) -> Result<OrthoglideParams> {
    ParamsFile::parse(&std::fs::read_to_string(path)?, require_units)?.params()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.9e}")).unwrap_or_default()
}

fn quote(s: &Option<String>) -> String {
    s.as_ref().map(|e| format!("\"{}\"", e.replace('"', "'"))).unwrap_or_default()
}

/// Direction sweep: polar form (`angle_deg`, `delta_mm`) plus the planar
/// deflection components tracing the Cartesian ellipse.
pub fn write_direction_sweep<W: Write>(mut w: W, s: &SweepResult, force: f64) -> Result<()> {
    writeln!(w, "# units: mm")?;
    writeln!(w, "# point_mm={},{},{}", s.point[0], s.point[1], s.point[2])?;
    writeln!(w, "# force_N={force}")?;
    writeln!(w, "angle_deg,delta_mm,dx_mm,dy_mm,dz_mm,rx_rad,ry_rad,rz_rad,error")?;
    write_samples(&mut w, s)
}

pub fn write_magnitude_sweep<W: Write>(mut w: W, s: &SweepResult, angle_deg: f64) -> Result<()> {
    writeln!(w, "# units: mm")?;
    writeln!(w, "# point_mm={},{},{}", s.point[0], s.point[1], s.point[2])?;
    writeln!(w, "# angle_deg={angle_deg}")?;
    if let Some(dev) = s.linearity_deviation() {
        writeln!(w, "# linearity_deviation={dev:.6e}")?;
    }
    writeln!(w, "force_N,delta_mm,dx_mm,dy_mm,dz_mm,rx_rad,ry_rad,rz_rad,error")?;
    write_samples(&mut w, s)
}

fn write_samples<W: Write>(w: &mut W, s: &SweepResult) -> Result<()> {
    for k in &s.samples {
        let comps: Vec<String> = match &k.deflection {
            Some(d) => d.to_vector().iter().map(|x| format!("{x:.9e}")).collect(),
            None => vec![String::new(); 6],
        };
        writeln!(w, "{},{},{},{}", k.input, opt(k.delta), comps.join(","), quote(&k.error))?;
    }
    Ok(())
}

pub fn write_error_map<W: Write>(mut w: W, m: &ErrorMap) -> Result<()> {
    writeln!(w, "# units: mm")?;
    writeln!(w, "# plane_z_mm={}", m.grid.z)?;
    writeln!(w, "# force_N={}", m.grid.force)?;
    writeln!(w, "# directions={}", m.grid.n_directions)?;
    writeln!(w, "x_mm,y_mm,delta_worst_mm,delta_best_mm,worst_angle_deg,error")?;
    for c in &m.cells {
        writeln!(w, "{},{},{},{},{},{}", c.x, c.y, opt(c.worst), opt(c.best), c.worst_angle.map(|a| a.to_string()).unwrap_or_default(), quote(&c.error))?;
    }
    Ok(())
}
