use pkm_stiffness::orthoglide::studies::*;
use pkm_stiffness::orthoglide::*;
use pkm_stiffness::spatial::Vector3;
use pkm_stiffness::vjm::{deflection_under_load, solve_assembly, stiffness_loaded, stiffness_unloaded, AssemblyGuess, AssemblyTarget, SolverOptions};
use pkm_stiffness::{Exec, Wrench};

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn wp(i: usize) -> Vector3 {
    Vector3::from(WORKPOINTS[i])
}

#[test]
fn isotropic_unloaded_stiffness() {
    let prm = OrthoglideParams::default();
    let m = build_orthoglide(&prm, &Vector3::zeros()).unwrap();
    let k = stiffness_unloaded(&m, &m.nominal_pose(), None, &opts()).unwrap().k_f;
    let kt = k.fixed_view::<3, 3>(0, 0).into_owned();
    let sv = kt.singular_values();
    let cond = sv.max() / sv.min();
    assert!(cond < 1.05, "{cond}");
    assert!(((k[(0, 0)] - k[(1, 1)]) / k[(0, 0)]).abs() < 1e-9);
    assert!(((k[(0, 0)] - k[(2, 2)]) / k[(0, 0)]).abs() < 1e-9);
}

#[test]
fn rigid_limit_barely_moves() {
    let prm = OrthoglideParams::default().stiffened(1e6);
    let m = build_orthoglide(&prm, &wp(1)).unwrap();
    let (d, _) = deflection_under_load(&m, &m.nominal_pose(), &Wrench::from_force(Vector3::new(300.0, 0.0, 0.0)), None, &opts()).unwrap();
    assert!(d.translation.norm() < 1e-3, "{:?}", d);
}

#[test]
fn small_load_follows_the_unloaded_compliance() {
    let prm = OrthoglideParams::default();
    let m = build_orthoglide(&prm, &wp(3)).unwrap();
    let c = stiffness_unloaded(&m, &m.nominal_pose(), None, &opts()).unwrap().compliance().unwrap();
    let w = Wrench::from_force(Vector3::new(0.06, -0.08, 0.0));
    let (d, _) = deflection_under_load(&m, &m.nominal_pose(), &w, None, &opts()).unwrap();
    let lin = c * w.to_vector();
    assert!((d.to_vector() - lin).amax() < 1e-3 * lin.amax(), "{:?} vs {lin:?}", d);
}

#[test]
fn loaded_stiffness_matches_finite_differences() {
    let prm = OrthoglideParams::default();
    let m = build_orthoglide(&prm, &wp(1)).unwrap();
    let (_, s) = deflection_under_load(&m, &m.nominal_pose(), &Wrench::from_force(Vector3::new(300.0, -200.0, 100.0)), None, &opts()).unwrap();
    let k = stiffness_loaded(&m, &s, &opts()).unwrap().k_f;
    let fd = pkm_stiffness::vjm::finite_difference_stiffness(&m, &s, 1e-3, 1e-5, &opts()).unwrap();
    let d = nalgebra::Vector6::new(1.0, 1.0, 1.0, 0.01, 0.01, 0.01);
    let mut worst: f64 = 0.0;
    let ks = pkm_stiffness::Matrix66::from_fn(|i, j| k[(i, j)] * d[i] * d[j]);
    let fs = pkm_stiffness::Matrix66::from_fn(|i, j| fd[(i, j)] * d[i] * d[j]);
    let floor = 1e-6 * ks.amax();
    for i in 0..36 {
        worst = worst.max((ks[i] - fs[i]).abs() / ks[i].abs().max(floor));
    }
    assert!(worst < 1e-3, "{worst}\n{k:.4e}\n{fd:.4e}");
}

#[test]
fn zero_load_paths_agree() {
    let prm = OrthoglideParams::default();
    let m = build_orthoglide(&prm, &wp(2)).unwrap();
    let s = solve_assembly(&m, &AssemblyTarget::Pose(m.nominal_pose()), &AssemblyGuess::nominal(&m), &opts()).unwrap();
    let kl = stiffness_loaded(&m, &s, &opts()).unwrap().k_f;
    let ku = stiffness_unloaded(&m, &m.nominal_pose(), None, &opts()).unwrap().k_f;
    assert!((kl - ku).amax() <= 1e-10 * ku.amax());
}

#[test]
fn isotropic_point_sweep_is_flat() {
    let s = direction_sweep(&OrthoglideParams::default(), &wp(0), 300.0, 72, &opts(), Exec::Parallel).unwrap();
    let v = s.relative_variation().unwrap();
    assert!(v < 1e-3, "{v}");
}

#[test]
fn extrema_are_orthogonal_away_from_the_isotropic_point() {
    let prm = OrthoglideParams::default();
    for i in 1..4 {
        let s = direction_sweep(&prm, &wp(i), 300.0, 72, &opts(), Exec::Parallel).unwrap();
        let (amax, _) = s.max().unwrap();
        let (amin, _) = s.min().unwrap();
        assert!((axis_gap_deg(amax, amin) - 90.0).abs() <= 5.0, "{:?}: {amax} {amin}", WORKPOINTS[i]);
        if i == 1 {
            assert!(axis_gap_deg(amax, 45.0) <= 15.0, "{amax}");
        }
    }
}

#[test]
fn magnitude_sweep_is_ordered_and_starts_at_zero() {
    let mags = [300.0, 0.0, 100.0, 200.0];
    let s = magnitude_sweep(&OrthoglideParams::default(), &wp(1), 45.0, &mags, &opts(), Exec::Sequential).unwrap();
    let inputs: Vec<f64> = s.samples.iter().map(|k| k.input).collect();
    assert_eq!(inputs, vec![0.0, 100.0, 200.0, 300.0]);
    assert_eq!(s.samples[0].delta, Some(0.0));
    assert!(s.linearity_deviation().unwrap() < 0.1);
}

#[test]
fn parallel_and_sequential_maps_agree() {
    let mut g = StudyGrid::plane(-200.0, 300.0);
    g.step = 250.0;
    g.n_directions = 8;
    let prm = OrthoglideParams::default();
    let a = error_map(&prm, &g, &opts(), Exec::Sequential);
    let b = error_map(&prm, &g, &opts(), Exec::Parallel);
    assert_eq!(a, b);
    assert_eq!(a.cells.len(), 9);
    assert_eq!(a.missing(), 0);
}

#[test]
fn unreachable_workpoint_is_reported() {
    let prm = OrthoglideParams::for_variant(Table1Variant::Original);
    assert!(direction_sweep(&prm, &wp(2), 300.0, 8, &opts(), Exec::Sequential).is_err());
}
