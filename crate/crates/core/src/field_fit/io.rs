//! Displacement-field files.
//!
//! A field is a CSV file whose leading comment block declares `# units: mm`,
//! followed by the header `px,py,pz,dx,dy,dz` and one node per row. The
//! reference point and the applied wrench live in a JSON sidecar with the same
//! file stem:
//!
//! ```json
//! { "reference_point": [0, 0, 0], "wrench": [100, 0, 0, 0, 0, 0],
//!   "units": { "length": "mm", "force": "N" } }
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{DisplacementField, NodeDisplacement};
use crate::error::{Error, Result};
use crate::spatial::{Vector3, Wrench};
use crate::units::{check_declared, Units};

pub const FIELD_COLUMNS: [&str; 6] = ["px", "py", "pz", "dx", "dy", "dz"];
pub const UNITS_HEADER: &str = "# units: mm";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub reference_point: [f64; 3],
    pub wrench: [f64; 6],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl FieldMeta {
    pub fn wrench(&self) -> Wrench {
        Wrench::from_array(self.wrench)
    }

    pub fn reference_point(&self) -> Vector3 {
        Vector3::from(self.reference_point)
    }
}

fn declared_length_unit(text: &str) -> Option<String> {
    text.lines()
        .map(str::trim)
        .take_while(|l| l.starts_with('#') || l.is_empty())
        .filter_map(|l| l.trim_start_matches('#').trim().strip_prefix("units:"))
        .map(|u| u.trim().to_string())
        .next()
}

/// Parses the CSV body of a field. `reference_point` and `label` are attached
/// to the returned field.
pub fn parse_field_csv(text: &str, reference_point: Vector3, label: &str) -> Result<DisplacementField> {
    match declared_length_unit(text) {
        None => {
            return Err(Error::InvalidInput(format!(
                "field '{label}': missing header '{UNITS_HEADER}'"
            )))
        }
        Some(u) if u != "mm" => {
            return Err(Error::InvalidInput(format!("field '{label}': units '{u}' (expected mm)")))
        }
        Some(_) => {}
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::InvalidInput(format!("field '{label}': {e}")))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != FIELD_COLUMNS {
        return Err(Error::InvalidInput(format!(
            "field '{label}': expected columns {}, found {}",
            FIELD_COLUMNS.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut nodes = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidInput(format!("field '{label}' row {}: {e}", row + 1)))?;
        let v: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("field '{label}' row {}: {e}", row + 1)))?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(format!("field '{label}' row {}: non-finite value", row + 1)));
        }
        nodes.push(NodeDisplacement::new(Vector3::new(v[0], v[1], v[2]), Vector3::new(v[3], v[4], v[5])));
    }
    if nodes.is_empty() {
        return Err(Error::InvalidInput(format!("field '{label}': no nodes")));
    }
    Ok(DisplacementField::new(nodes, reference_point, label))
}

pub fn parse_meta(text: &str, require_units: bool) -> Result<FieldMeta> {
    let meta: FieldMeta =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("field metadata: {e}")))?;
    check_declared(meta.units.as_ref(), require_units)?;
    Ok(meta)
}

/// Reads a field CSV and its JSON sidecar.
pub fn read_field(csv_path: &Path, meta_path: &Path, require_units: bool) -> Result<(DisplacementField, FieldMeta)> {
    let meta = parse_meta(&fs::read_to_string(meta_path)?, require_units)?;
    let label = meta
        .label
        .clone()
        .unwrap_or_else(|| csv_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    let field = parse_field_csv(&fs::read_to_string(csv_path)?, meta.reference_point(), &label)?;
    Ok((field, meta))
}

/// Sidecar path for a field CSV: same stem, `.json` extension.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// All `*.csv` files of a directory (sorted by name) paired with their sidecars.
pub fn read_case_dir(dir: &Path, require_units: bool) -> Result<Vec<(DisplacementField, FieldMeta)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| read_field(p, &sidecar_path(p), require_units))
        .collect()
}

pub fn write_field_csv<W: Write>(mut w: W, field: &DisplacementField) -> Result<()> {
    writeln!(w, "{UNITS_HEADER}")?;
    writeln!(w, "# label: {}", field.label)?;
    writeln!(w, "{}", FIELD_COLUMNS.join(","))?;
    for n in &field.nodes {
        let p = n.position;
        let d = n.displacement;
        writeln!(w, "{},{},{},{},{},{}", p.x, p.y, p.z, d.x, d.y, d.z)?;
    }
    Ok(())
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`.
pub fn write_field(dir: &Path, stem: &str, field: &DisplacementField, wrench: &Wrench) -> Result<()> {
    let mut buf = Vec::new();
    write_field_csv(&mut buf, field)?;
    fs::write(dir.join(format!("{stem}.csv")), buf)?;
    let meta = FieldMeta {
        reference_point: field.reference_point.into(),
        wrench: wrench.to_array(),
        units: Some(Units::default()),
        label: Some(field.label.clone()),
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::InvalidInput(e.to_string()))?;
    fs::write(dir.join(format!("{stem}.json")), json + "\n")?;
    Ok(())
}
