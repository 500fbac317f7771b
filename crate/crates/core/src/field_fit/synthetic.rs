//! Synthetic displacement fields for fixtures, Monte-Carlo checks and
//! benchmarks. Fields are generated from the linearized rigid-motion model
//! with optional i.i.d. Gaussian noise on each displacement component.

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use super::{fit_rigid_transform, DisplacementField, LoadCase, NodeDisplacement};
use crate::error::Result;
use crate::spatial::{DeflectionScrew, Matrix66, Vector3, Wrench};

/// Uniform random point in a ball.
pub fn point_in_ball<R: Rng + ?Sized>(rng: &mut R, center: &Vector3, radius: f64) -> Vector3 {
    let dir = Vector3::new(
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
        StandardNormal.sample(rng),
    )
    .normalize();
    let r = radius * rng.random::<f64>().cbrt();
    center + dir * r
}

/// `n` nodes uniformly distributed in a ball about `center`, displaced by the
/// screw `deflection` (taken about `center`, which is also the reference point)
/// plus Gaussian noise of standard deviation `sigma` per component.
pub fn ball_field<R: Rng + ?Sized>(
    rng: &mut R,
    center: Vector3,
    radius: f64,
    n: usize,
    deflection: &DeflectionScrew,
    sigma: f64,
) -> DisplacementField {
    let nodes = (0..n)
        .map(|_| {
            let p = point_in_ball(rng, &center, radius);
            NodeDisplacement::new(p, deflection.translation + deflection.rotation.cross(&(p - center)))
        })
        .collect();
    let field = DisplacementField::new(nodes, center, "synthetic");
    if sigma > 0.0 {
        with_noise(rng, &field, sigma)
    } else {
        field
    }
}

/// Copy of `field` with Gaussian noise added to every displacement component.
pub fn with_noise<R: Rng + ?Sized>(rng: &mut R, field: &DisplacementField, sigma: f64) -> DisplacementField {
    let normal = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");
    let mut out = field.clone();
    for n in &mut out.nodes {
        n.displacement += Vector3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng));
    }
    out
}

/// Simulates one field per wrench for a known compliance and fits each one.
pub fn simulate_load_cases<R: Rng + ?Sized>(
    rng: &mut R,
    compliance: &Matrix66,
    wrenches: &[Wrench],
    radius: f64,
    n_nodes: usize,
    sigma: f64,
) -> Result<Vec<LoadCase>> {
    wrenches
        .iter()
        .map(|w| {
            let d = DeflectionScrew::from_vector(&(compliance * w.to_vector()));
            let field = ball_field(rng, Vector3::zeros(), radius, n_nodes, &d, sigma);
            LoadCase::new(*w, fit_rigid_transform(&field)?)
        })
        .collect()
}

/// The six canonical load cases: a force of `force` N along each axis, then a
/// moment of `moment` N·mm about each axis.
pub fn canonical_wrenches(force: f64, moment: f64) -> Vec<Wrench> {
    (0..6)
        .map(|i| {
            let mut a = [0.0; 6];
            a[i] = if i < 3 { force } else { moment };
            Wrench::from_array(a)
        })
        .collect()
}
