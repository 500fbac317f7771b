//! Regenerates the CLI test fixtures:
//!
//!     cargo run -p pkm-stiffness --example make_fixtures -- crates/cli/fixtures
//!
//! Everything is seeded, so reruns produce identical files.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector6;
use pkm_stiffness::field_fit::io::write_field;
use pkm_stiffness::field_fit::synthetic::{ball_field, canonical_wrenches};
use pkm_stiffness::performance::inscribe::VoxelMask;
use pkm_stiffness::{DeflectionScrew, Exec, Matrix66, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const NOISY_SEED: u64 = 20240611;
const NOISY_SIGMA: f64 = 1e-4;

fn cases(dir: &Path, c: &Matrix66, sigma: f64, seed: u64) {
    fs::create_dir_all(dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (k, w) in canonical_wrenches(100.0, 1e4).iter().enumerate() {
        let d = DeflectionScrew::from_vector(&(c * w.to_vector()));
        let f = ball_field(&mut rng, Vector3::zeros(), 20.0, 300, &d, sigma);
        write_field(dir, &format!("case{k}"), &f, w).unwrap();
    }
    let rows: Vec<Vec<f64>> = (0..6).map(|i| (0..6).map(|j| c[(i, j)]).collect()).collect();
    fs::write(dir.join("k_star.json"), serde_json::to_string(&rows).unwrap()).unwrap();
}

fn main() {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "crates/cli/fixtures".into()));
    fs::create_dir_all(&out).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = ball_field(&mut rng, Vector3::zeros(), 20.0, 200, &DeflectionScrew::new(Vector3::new(0.1, 0.0, 0.0), Vector3::zeros()), 0.0);
    write_field(&out, "translation", &f, &pkm_stiffness::Wrench::from_force(Vector3::new(100.0, 0.0, 0.0))).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(NOISY_SEED);
    let d = DeflectionScrew::new(Vector3::new(0.02, -0.01, 0.03), Vector3::new(1e-4, 2e-4, -1e-4));
    let f = ball_field(&mut rng, Vector3::new(0.0, 0.0, 50.0), 20.0, 500, &d, NOISY_SIGMA);
    write_field(&out, "noisy", &f, &pkm_stiffness::Wrench::from_force(Vector3::new(0.0, 100.0, 0.0))).unwrap();

    // SPD with couplings, noiseless
    let a = Matrix66::from_fn(|i, j| ((i * 7 + j * 3) % 5) as f64 * 0.1);
    let scale = Matrix66::from_diagonal(&Vector6::new(1e-2, 1e-2, 1e-2, 1e-4, 1e-4, 1e-4));
    let spd = scale * (a * a.transpose() + Matrix66::identity()) * scale;
    cases(&out.join("cases_spd"), &spd, 0.0, 2);
    let diag = Matrix66::from_diagonal(&Vector6::new(3.10e-5, 3.54e-1, 6.91e-2, 0.39e-5, 0.33e-6, 1.74e-6).map(|v| v * 1e-2));
    cases(&out.join("cases_diag"), &diag, 1e-5, 3);

    // unit-radius ball on a 40³ grid
    let s = 2.1 / 40.0;
    let lo = Vector3::repeat(-1.05 + s / 2.0);
    let hi = Vector3::repeat(1.05);
    let m = VoxelMask::from_predicate(&lo, &hi, s, |p| p.norm() <= 1.0, Exec::Sequential).unwrap();
    let mut buf = Vec::new();
    m.write(&mut buf).unwrap();
    fs::write(out.join("sphere.vox"), buf).unwrap();
    println!("sphere mask {:?} spacing {s}", m.dims);
}
