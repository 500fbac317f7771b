use nalgebra::{Rotation3, Vector6};
use pkm_stiffness::spatial::{rotate_stiffness, small_rotation, Matrix66, Pose, Vector3, Wrench};
use pkm_stiffness::vjm::models::{cantilever, euler_bernoulli_compliance, one_spring_chain, pendulum};
use pkm_stiffness::vjm::*;
use pkm_stiffness::Error;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

/// `D K D` with rotations expressed per 100 mm so all blocks are comparable.
fn length_scaled(k: &Matrix66) -> Matrix66 {
    let d = Vector6::new(1.0, 1.0, 1.0, 0.01, 0.01, 0.01);
    Matrix66::from_fn(|i, j| k[(i, j)] * d[i] * d[j])
}

fn max_entry_error(a: &Matrix66, b: &Matrix66) -> f64 {
    let (a, b) = (length_scaled(a), length_scaled(b));
    let floor = 1e-6 * a.amax();
    (0..36).map(|i| (a[i] - b[i]).abs() / a[i].abs().max(floor)).fold(0.0, f64::max)
}

fn pendulum_state(k: f64, l: f64, p: f64, stiff: f64) -> (ManipulatorModel, EquilibriumState) {
    let m = pendulum(k, l, stiff).unwrap();
    let target = Pose::from_translation(Vector3::new(0.0, 0.0, l - p / stiff));
    let s = solve_assembly(&m, &AssemblyTarget::Pose(target), &AssemblyGuess::nominal(&m), &opts()).unwrap();
    (m, s)
}

#[test]
fn pendulum_lateral_stiffness_closed_form() {
    let (k, l, p) = (1e6, 100.0, 5000.0);
    let (m, s) = pendulum_state(k, l, p, 1e10);
    assert!((s.external_wrench.force.z + p).abs() < 1e-6 * p, "{:?}", s.external_wrench);
    let kf = stiffness_loaded(&m, &s, &opts()).unwrap().k_f;
    let expected = k / (l * l) - p / l;
    assert!(((kf[(0, 0)] - expected) / expected).abs() < 1e-6, "{} vs {expected}", kf[(0, 0)]);
    // unloaded the axial load has no effect
    let ku = stiffness_unloaded(&m, &s.platform_pose, None, &opts()).unwrap().k_f;
    assert!(((ku[(0, 0)] - k / (l * l)) / (k / (l * l))).abs() < 1e-6);
}

#[test]
fn pendulum_matches_finite_differences() {
    let (m, s) = pendulum_state(1e6, 100.0, 5000.0, 1e10);
    let kf = stiffness_loaded(&m, &s, &opts()).unwrap().k_f;
    let fd = finite_difference_stiffness(&m, &s, 1e-3, 1e-5, &opts()).unwrap();
    assert!(max_entry_error(&kf, &fd) < 1e-3, "{kf:.4e}\n{fd:.4e}");
}

#[test]
fn one_spring_chain_loaded_matches_finite_differences() {
    let m = one_spring_chain().unwrap();
    let w = Wrench::new(Vector3::new(200.0, -150.0, 300.0), Vector3::new(2e4, -1e4, 5e3));
    let (_, s) = deflection_under_load(&m, &m.nominal_pose(), &w, None, &opts()).unwrap();
    assert!((s.external_wrench.to_vector() - w.to_vector()).amax() < 1e-6);
    let kf = stiffness_loaded(&m, &s, &opts()).unwrap().k_f;
    let fd = finite_difference_stiffness(&m, &s, 1e-3, 1e-5, &opts()).unwrap();
    assert!(max_entry_error(&kf, &fd) < 1e-3, "{kf:.4e}\n{fd:.4e}");
    let ku = stiffness_unloaded(&m, &m.nominal_pose(), None, &opts()).unwrap().k_f;
    assert!(max_entry_error(&ku, &kf) > 1e-3, "load must change the stiffness");
}

#[test]
fn pure_force_gives_symmetric_loaded_stiffness() {
    let m = one_spring_chain().unwrap();
    let w = Wrench::from_force(Vector3::new(300.0, 200.0, -400.0));
    let (_, s) = deflection_under_load(&m, &m.nominal_pose(), &w, None, &opts()).unwrap();
    let r = stiffness_loaded(&m, &s, &opts()).unwrap();
    assert!(r.diagnostics.asymmetry < 1e-9, "{}", r.diagnostics.asymmetry);
}

#[test]
fn cantilever_tip_deflection() {
    let (l, e, g) = (200.0, 2.1e5, 8.1e4);
    let (area, iy, iz, j) = (100.0, 833.3, 1200.0, 1500.0);
    let c = euler_bernoulli_compliance(l, e, g, area, iy, iz, j);
    let m = cantilever(l, &c).unwrap();
    let ku = stiffness_unloaded(&m, &m.nominal_pose(), None, &opts()).unwrap();
    let cu = ku.compliance().unwrap();
    assert!(((cu[(1, 1)] - l.powi(3) / (3.0 * e * iz)) / cu[(1, 1)]).abs() < 1e-10);
    assert!(((cu[(5, 1)] - l * l / (2.0 * e * iz)) / cu[(5, 1)]).abs() < 1e-10);

    let f = 0.01;
    let (d, _) = deflection_under_load(&m, &m.nominal_pose(), &Wrench::from_force(Vector3::new(0.0, f, 0.0)), None, &opts()).unwrap();
    let delta = f * l.powi(3) / (3.0 * e * iz);
    let phi = f * l * l / (2.0 * e * iz);
    assert!(((d.translation.y - delta) / delta).abs() < 1e-6, "{} vs {delta}", d.translation.y);
    assert!(((d.rotation.z - phi) / phi).abs() < 1e-6, "{} vs {phi}", d.rotation.z);
}

#[test]
fn unloaded_equals_loaded_at_zero_force() {
    let m = one_spring_chain().unwrap();
    let s = solve_assembly(&m, &AssemblyTarget::Pose(m.nominal_pose()), &AssemblyGuess::nominal(&m), &opts()).unwrap();
    let kl = stiffness_loaded(&m, &s, &opts()).unwrap().k_f;
    let ku = stiffness_unloaded(&m, &m.nominal_pose(), None, &opts()).unwrap().k_f;
    assert!((kl - ku).amax() <= 1e-10 * ku.amax());
}

#[test]
fn springs_in_series_add_compliance() {
    let mut k1 = Matrix66::identity() * 1e3;
    k1[(3, 3)] = 1e7;
    k1[(4, 4)] = 2e7;
    k1[(5, 5)] = 3e7;
    let k2 = k1 * 2.5;
    let chain = SerialChainModel::new(Pose::identity(), vec![ChainElement::spring6(k1), ChainElement::spring6(k2)], Pose::identity()).unwrap();
    let m = ManipulatorModel::new("series", vec![chain]).unwrap();
    let k = stiffness_unloaded(&m, &Pose::identity(), None, &opts()).unwrap().k_f;
    let expected = (k1.try_inverse().unwrap() + k2.try_inverse().unwrap()).try_inverse().unwrap();
    assert!((k - expected).amax() < 1e-9 * expected.amax());
}

#[test]
fn chains_in_parallel_add_stiffness() {
    let single = one_spring_chain().unwrap();
    let double = ManipulatorModel::new("double", vec![single.chains[0].clone(), single.chains[0].clone()]).unwrap();
    let k1 = stiffness_unloaded(&single, &single.nominal_pose(), None, &opts()).unwrap().k_f;
    let k2 = stiffness_unloaded(&double, &double.nominal_pose(), None, &opts()).unwrap().k_f;
    assert!((k2 - k1 * 2.0).amax() < 1e-9 * k1.amax());
}

#[test]
fn stiffness_rotates_with_the_base() {
    let m = one_spring_chain().unwrap();
    let r = small_rotation(&Vector3::new(0.4, -0.7, 1.1));
    let mut rotated = m.clone();
    for c in &mut rotated.chains {
        c.base_pose = Pose::from_rotation(r).compose(&c.base_pose);
    }
    let rotated = ManipulatorModel::new("rotated", rotated.chains).unwrap();
    let k = stiffness_unloaded(&m, &m.nominal_pose(), None, &opts()).unwrap().k_f;
    let kr = stiffness_unloaded(&rotated, &rotated.nominal_pose(), None, &opts()).unwrap().k_f;
    let expected = rotate_stiffness(&k, &r);
    assert!((kr - expected).amax() < 1e-9 * k.amax());
    let _: Rotation3<f64> = r;
}

#[test]
fn rigid_chain_is_singular() {
    // one revolute spring cannot resist five of six directions
    let chain = SerialChainModel::new(
        Pose::identity(),
        vec![ChainElement::spring1(JointType::Revolute, Vector3::z(), 1e6), ChainElement::translation(100.0, 0.0, 0.0)],
        Pose::identity(),
    )
    .unwrap();
    let m = ManipulatorModel::new("toy", vec![chain]).unwrap();
    let r = stiffness_unloaded(&m, &m.nominal_pose(), None, &opts());
    assert!(matches!(r, Err(Error::SingularConfiguration { .. })), "{r:?}");
}

#[test]
fn force_driven_solve_balances_the_load() {
    let (_, s) = pendulum_state(1e6, 100.0, 1000.0, 1e10);
    let m = pendulum(1e6, 100.0, 1e10).unwrap();
    let w = Wrench::from_force(Vector3::new(5.0, 0.0, -1000.0));
    let (d, s2) = deflection_under_load(&m, &m.nominal_pose(), &w, Some(&s.guess()), &opts()).unwrap();
    assert!((s2.external_wrench.to_vector() - w.to_vector()).amax() < 1e-6);
    // lateral response of the loaded pendulum: x ≈ 5 / (k/L² − P/L)
    let expect = 5.0 / (100.0 - 10.0);
    assert!((d.translation.x - expect).abs() < 1e-3 * expect, "{}", d.translation.x);
}

#[test]
fn unreachable_pose_fails_cleanly() {
    let chain = SerialChainModel::new(
        Pose::identity(),
        vec![ChainElement::spring1(JointType::Revolute, Vector3::z(), 1e6), ChainElement::translation(100.0, 0.0, 0.0)],
        Pose::identity(),
    )
    .unwrap();
    let m = ManipulatorModel::new("lever", vec![chain]).unwrap();
    let far = Pose::from_translation(Vector3::new(0.0, 0.0, 500.0));
    let r = solve_assembly(&m, &AssemblyTarget::Pose(far), &AssemblyGuess::nominal(&m), &opts());
    assert!(r.is_err());
}

