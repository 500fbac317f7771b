use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unit declaration carried by every input file. Only mm / N / rad are
/// accepted; the record exists so that files from other tools fail loudly
/// instead of being silently misread.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Units {
    #[serde(default = "mm")]
    pub length: String,
    #[serde(default = "newton")]
    pub force: String,
    #[serde(default = "rad", skip_serializing_if = "is_rad")]
    pub angle: String,
}

fn mm() -> String {
    "mm".into()
}
fn newton() -> String {
    "N".into()
}
fn rad() -> String {
    "rad".into()
}
fn is_rad(s: &str) -> bool {
    s == "rad"
}

impl Default for Units {
    fn default() -> Self {
        Self { length: mm(), force: newton(), angle: rad() }
    }
}

impl Units {
    pub fn check(&self) -> Result<()> {
        if self.length != "mm" || self.force != "N" || self.angle != "rad" {
            return Err(Error::InvalidInput(format!(
                "unsupported units length={} force={} angle={} (expected mm, N, rad)",
                self.length, self.force, self.angle
            )));
        }
        Ok(())
    }
}

/// Validates an optional unit record. With `require`, a missing record is an
/// error as well.
pub fn check_declared(units: Option<&Units>, require: bool) -> Result<()> {
    match units {
        Some(u) => u.check(),
        None if require => Err(Error::InvalidInput("missing `units` record".into())),
        None => Ok(()),
    }
}
