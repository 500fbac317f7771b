//! Planar-force studies: direction sweeps, magnitude sweeps and error maps.
//!
//! Every sample applies a pure force `(F cos ψ, F sin ψ, 0)` at the tool point
//! and records the planar deflection norm `Δ = √(Δx² + Δy²)`. Samples are
//! independent and solved from the unloaded configuration, so results do not
//! depend on evaluation order.

use serde::Serialize;

use super::{build_orthoglide, OrthoglideParams};
use crate::error::Result;
use crate::exec::{map_range, Exec};
use crate::spatial::{DeflectionScrew, Vector3, Wrench};
use crate::vjm::{deflection_under_load, ManipulatorModel, SolverOptions};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSample {
    /// Angle in degrees or magnitude in N.
    pub input: f64,
    pub deflection: Option<DeflectionScrew>,
    pub delta: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub point: [f64; 3],
    pub samples: Vec<SweepSample>,
}

impl SweepResult {
    fn solved(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples.iter().filter_map(|s| s.delta.map(|d| (s.input, d)))
    }

    /// `(input, Δ)` of the largest deflection.
    pub fn max(&self) -> Option<(f64, f64)> {
        self.solved().max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn min(&self) -> Option<(f64, f64)> {
        self.solved().min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Relative spread `(max − min) / mean` of Δ.
    pub fn relative_variation(&self) -> Option<f64> {
        let v: Vec<f64> = self.solved().map(|s| s.1).collect();
        if v.is_empty() {
            return None;
        }
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        Some(if mean > 0.0 { (hi - lo) / mean } else { 0.0 })
    }

    /// Max relative departure from the least-squares line through the origin.
    pub fn linearity_deviation(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.solved().filter(|s| s.0 > 0.0).collect();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        if pts.is_empty() || sxx == 0.0 {
            return None;
        }
        let slope = pts.iter().map(|p| p.0 * p.1).sum::<f64>() / sxx;
        if slope == 0.0 {
            return Some(0.0);
        }
        Some(pts.iter().map(|p| (p.1 - slope * p.0).abs() / (slope * p.0)).fold(0.0, f64::max))
    }

    pub fn slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.solved().collect();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        (sxx > 0.0).then(|| pts.iter().map(|p| p.0 * p.1).sum::<f64>() / sxx)
    }
}

/// Angle in degrees between two directions modulo 180° (a compliance axis has
/// no sign), in `[0, 90]`.
pub fn axis_gap_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

fn planar_force(magnitude: f64, angle_deg: f64) -> Wrench {
    let a = angle_deg.to_radians();
    Wrench::from_force(Vector3::new(magnitude * a.cos(), magnitude * a.sin(), 0.0))
}

fn sample(model: &ManipulatorModel, input: f64, w: &Wrench, opts: &SolverOptions) -> SweepSample {
    if w.force.norm() == 0.0 && w.moment.norm() == 0.0 {
        let zero = DeflectionScrew::zero();
        return SweepSample { input, deflection: Some(zero), delta: Some(0.0), error: None };
    }
    match deflection_under_load(model, &model.nominal_pose(), w, None, opts) {
        Ok((d, _)) => SweepSample { input, delta: Some(d.planar_norm()), deflection: Some(d), error: None },
        Err(e) => SweepSample { input, deflection: None, delta: None, error: Some(e.to_string()) },
    }
}

/// `n_angles` equally spaced directions starting at −180°.
pub fn sweep_angles(n_angles: usize) -> Vec<f64> {
    (0..n_angles).map(|k| -180.0 + 360.0 * k as f64 / n_angles as f64).collect()
}

pub fn direction_sweep(
    params: &OrthoglideParams,
    point: &Vector3,
    magnitude: f64,
    n_angles: usize,
    opts: &SolverOptions,
    exec: Exec,
) -> Result<SweepResult> {
    let model = build_orthoglide(params, point)?;
    let angles = sweep_angles(n_angles);
    let samples = map_range(exec, angles.len(), |k| sample(&model, angles[k], &planar_force(magnitude, angles[k]), opts));
    Ok(SweepResult { point: (*point).into(), samples })
}

pub fn magnitude_sweep(
    params: &OrthoglideParams,
    point: &Vector3,
    angle_deg: f64,
    magnitudes: &[f64],
    opts: &SolverOptions,
    exec: Exec,
) -> Result<SweepResult> {
    let model = build_orthoglide(params, point)?;
    let mut mags = magnitudes.to_vec();
    mags.sort_by(f64::total_cmp);
    let samples = map_range(exec, mags.len(), |k| sample(&model, mags[k], &planar_force(mags[k], angle_deg), opts));
    Ok(SweepResult { point: (*point).into(), samples })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StudyGrid {
    pub z: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub step: f64,
    pub force: f64,
    pub n_directions: usize,
}

impl StudyGrid {
    /// Default map: x, y ∈ [−200, 300] every 50 mm, 36 directions.
    pub fn plane(z: f64, force: f64) -> Self {
        Self { z, x_range: (-200.0, 300.0), y_range: (-200.0, 300.0), step: 50.0, force, n_directions: 36 }
    }

    fn axis(range: (f64, f64), step: f64) -> Vec<f64> {
        let n = ((range.1 - range.0) / step + 1e-9).floor() as usize;
        (0..=n).map(|k| range.0 + step * k as f64).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.x_range, self.step)
    }

    pub fn ys(&self) -> Vec<f64> {
        Self::axis(self.y_range, self.step)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MapCell {
    pub x: f64,
    pub y: f64,
    pub worst: Option<f64>,
    pub best: Option<f64>,
    pub worst_angle: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorMap {
    pub grid: StudyGrid,
    pub cells: Vec<MapCell>,
}

impl ErrorMap {
    pub fn max_worst(&self) -> Option<f64> {
        self.cells.iter().filter_map(|c| c.worst).max_by(f64::total_cmp)
    }

    pub fn missing(&self) -> usize {
        self.cells.iter().filter(|c| c.worst.is_none()).count()
    }
}

fn map_cell(params: &OrthoglideParams, grid: &StudyGrid, x: f64, y: f64, opts: &SolverOptions) -> MapCell {
    let p = Vector3::new(x, y, grid.z);
    let sweep = direction_sweep(params, &p, grid.force, grid.n_directions, opts, Exec::Sequential);
    match sweep {
        Err(e) => MapCell { x, y, worst: None, best: None, worst_angle: None, error: Some(e.to_string()) },
        Ok(s) => {
            if let Some(err) = s.samples.iter().find_map(|k| k.error.clone()) {
                return MapCell { x, y, worst: None, best: None, worst_angle: None, error: Some(err) };
            }
            let (angle, worst) = s.max().expect("non-empty sweep");
            MapCell { x, y, worst: Some(worst), best: s.min().map(|m| m.1), worst_angle: Some(angle), error: None }
        }
    }
}

/// Worst- and best-direction deflection over a plane of workpoints.
pub fn error_map(params: &OrthoglideParams, grid: &StudyGrid, opts: &SolverOptions, exec: Exec) -> ErrorMap {
    let xs = grid.xs();
    let ys = grid.ys();
    let cells = map_range(exec, xs.len() * ys.len(), |k| {
        let (iy, ix) = (k / xs.len(), k % xs.len());
        map_cell(params, grid, xs[ix], ys[iy], opts)
    });
    ErrorMap { grid: grid.clone(), cells }
}
