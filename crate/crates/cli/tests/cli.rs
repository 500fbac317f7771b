use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pkmstiff")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let text = stdout(&run(args));
    let v: Value = serde_json::from_str(&text).unwrap();
    // re-serializing the parsed report reproduces the file exactly
    assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", text);
    v
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

fn matrix(v: &Value) -> Vec<Vec<f64>> {
    v.as_array().unwrap().iter().map(floats).collect()
}

/// Data rows of a study CSV: comment lines and the header dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn fit_recovers_a_pure_translation() {
    let r = json(&["fit", &fixture("translation.csv")]);
    let t = floats(&r["translation"]);
    let phi = floats(&r["rotation"]);
    assert!((t[0] - 0.1).abs() < 1e-12 && t[1].abs() < 1e-12 && t[2].abs() < 1e-12, "{t:?}");
    assert!(phi.iter().all(|x| x.abs() < 1e-12), "{phi:?}");
    assert_eq!(r["outliers"], 0);
}

#[test]
fn fit_estimates_the_generation_noise() {
    let r = json(&["fit", &fixture("noisy.csv")]);
    let s = r["sigma_hat"].as_f64().unwrap();
    assert!((s / 1e-4 - 1.0).abs() < 0.1, "{s}");
}

#[test]
fn empty_field_names_the_missing_header() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "").unwrap();
    std::fs::copy(fixtures().join("translation.json"), dir.path().join("empty.json")).unwrap();
    let o = run(&["fit", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("# units: mm"));
}

#[test]
fn collinear_nodes_are_a_geometry_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("line.csv");
    let body: String = (0..10).map(|k| format!("{k},0,0,0.1,0,0\n")).collect();
    std::fs::write(&csv, format!("# units: mm\npx,py,pz,dx,dy,dz\n{body}")).unwrap();
    std::fs::copy(fixtures().join("translation.json"), dir.path().join("line.json")).unwrap();
    assert_eq!(code(&run(&["fit", "--no-filter", csv.to_str().unwrap()])), 3);
}

#[test]
fn identify_recovers_the_generating_compliance() {
    let r = json(&["identify", &fixture("cases_spd")]);
    let got = matrix(&r["compliance"]);
    let truth: Vec<Vec<f64>> = serde_json::from_str(&std::fs::read_to_string(fixtures().join("cases_spd/k_star.json")).unwrap()).unwrap();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..6 {
        for j in 0..6 {
            num += (got[i][j] - truth[i][j]).powi(2);
            den += truth[i][j].powi(2);
        }
    }
    assert!((num / den).sqrt() < 1e-8, "{}", (num / den).sqrt());
    assert_eq!(r["n_cases"], 6);
}

#[test]
fn identify_masks_off_diagonals_of_a_diagonal_truth() {
    let r = json(&["identify", &fixture("cases_diag")]);
    let mask = matrix(&r["significance_mask"]);
    for (i, row) in mask.iter().enumerate() {
        for (j, &m) in row.iter().enumerate() {
            assert_eq!(m, if i == j { 1.0 } else { 0.0 }, "entry ({i},{j})");
        }
    }
}

#[test]
fn five_cases_are_rank_deficient() {
    let dir = tempfile::tempdir().unwrap();
    for k in 0..5 {
        for ext in ["csv", "json"] {
            let name = format!("case{k}.{ext}");
            std::fs::copy(fixtures().join("cases_spd").join(&name), dir.path().join(&name)).unwrap();
        }
    }
    let o = run(&["identify", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn orthoglide_is_isotropic_at_the_origin() {
    let r = json(&["stiffness", "--point", "0,0,0", "--unloaded"]);
    let k = matrix(&r["stiffness"]);
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { k[0][0] } else { 0.0 };
            assert!((k[i][j] - want).abs() <= 1e-9 * k[0][0], "({i},{j}) {}", k[i][j]);
        }
    }
}

#[test]
fn loaded_and_unloaded_agree_without_load() {
    let a = matrix(&json(&["stiffness", "--point", "-200,300,0"])["stiffness"]);
    let b = matrix(&json(&["stiffness", "--point", "-200,300,0", "--unloaded"])["stiffness"]);
    let scale = b.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let worst = a.iter().flatten().zip(b.iter().flatten()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    assert!(worst <= 1e-10 * scale, "{worst}");
}

#[test]
fn model_file_under_load() {
    let r = json(&["--units-check", "stiffness", "--model", &fixture("beam.json"), "--wrench", "0,10,0,0,0,0"]);
    let d = floats(&r["deflection"]);
    // spring at the base: 10 N through c_yy plus the 1000 N·mm moment turning a 100 mm arm
    assert!((d[1] - 0.11).abs() < 1e-6, "{d:?}");
    assert!((d[5] - 1e-3).abs() < 1e-8, "{d:?}");
}

#[test]
fn singular_toy_model_exits_5() {
    let o = run(&["stiffness", "--model", &fixture("singular.json"), "--unloaded"]);
    assert_eq!(code(&o), 5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular"));
}

#[test]
fn bad_inputs_exit_2() {
    assert_eq!(code(&run(&["stiffness", "--bogus"])), 2);
    assert_eq!(code(&run(&["stiffness", "--point", "1,2"])), 2);
    assert_eq!(code(&run(&["stiffness", "--model", "/nonexistent/model.json"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    std::fs::write(&p, r#"{"table1_variant":"revised"}"#).unwrap();
    let p = p.to_str().unwrap();
    assert_eq!(code(&run(&["sweep-direction", "--params", p, "--angles", "4"])), 0);
    assert_eq!(code(&run(&["--units-check", "sweep-direction", "--params", p, "--angles", "4"])), 2);
    assert_eq!(code(&run(&["--tol", "-1", "stiffness"])), 2);
}

#[test]
fn isotropic_direction_sweep_is_flat() {
    let out = stdout(&run(&["sweep-direction", "--point", "0,0,0", "--force", "300", "--angles", "72"]));
    assert!(out.contains("# force_N=300") && out.contains("# table1_variant=revised"));
    let r = rows(&out);
    assert_eq!(r.len(), 72);
    let d: Vec<f64> = r.iter().map(|row| row[1].parse().unwrap()).collect();
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let spread = d.iter().fold(0.0f64, |m, x| m.max((x - mean).abs()));
    assert!(spread / mean < 0.01);
    assert!(r.iter().all(|row| row.last().unwrap().is_empty()));
}

#[test]
fn magnitude_sweep_rows() {
    let r = rows(&stdout(&run(&["sweep-magnitude", "--point", "-200,-200,-200", "--angle", "-135", "--max", "300", "--step", "100"])));
    let f: Vec<f64> = r.iter().map(|row| row[0].parse().unwrap()).collect();
    assert_eq!(f, vec![0.0, 100.0, 200.0, 300.0]);
    let d: Vec<f64> = r.iter().map(|row| row[1].parse().unwrap()).collect();
    assert_eq!(d[0], 0.0);
    assert!(d.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn unreachable_map_records_errors_and_exits_4() {
    let o = run(&["map", "--variant", "original", "--z", "300", "--step", "250", "--directions", "4"]);
    assert_eq!(code(&o), 4);
    let text = String::from_utf8(o.stdout).unwrap();
    let r = rows(&text);
    assert_eq!(r.len(), 9);
    assert!(r.iter().all(|row| row[2].is_empty() && !row.last().unwrap().is_empty()));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|k| {
            let p = dir.path().join(format!("map{k}.csv"));
            let o = run(&["--output", p.to_str().unwrap(), "map", "--z", "-200", "--step", "250", "--directions", "6"]);
            assert_eq!(code(&o), 0);
            assert!(o.stdout.is_empty());
            std::fs::read(p).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    let seq = run(&["--sequential", "map", "--z", "-200", "--step", "250", "--directions", "6"]);
    assert_eq!(seq.stdout, runs[0]);
}

#[test]
fn inscribed_cube_in_the_sphere_mask() {
    let r = rows(&stdout(&run(&["inscribe", "--mask", &fixture("sphere.vox")])));
    let mu: f64 = r[0][0].parse().unwrap();
    let step = 2.1 / 40.0;
    assert!((mu - 2.0 / 3f64.sqrt()).abs() <= step, "{mu}");
}

#[test]
fn orthoglide_workspace_box() {
    let r = rows(&stdout(&run(&["inscribe", "--resolution", "50"])));
    let v: Vec<f64> = r[0].iter().map(|s| s.parse().unwrap()).collect();
    assert!(v[0] > 0.0);
    // the box centre itself must satisfy the admissibility test
    let f = json(&["factors", "--point", &format!("{},{},{}", v[1], v[2], v[3]), "--method", "singular-value"]);
    assert!(f["k_min"].as_f64().unwrap() >= 0.5 && f["k_max"].as_f64().unwrap() <= 2.0);
}

#[test]
fn factors_of_simple_maps() {
    let r = json(&["factors", "--jacobian", "2,0,0;0,1,0;0,0,0.5", "--method", "singular-value"]);
    assert_eq!((r["k_min"].as_f64().unwrap(), r["k_max"].as_f64().unwrap()), (0.5, 2.0));
    let r = json(&["factors", "--jacobian", "1,0,0;0,1,0;0,0,1"]);
    assert!((r["k_min"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((r["k_max"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-12);
    let r = json(&["factors", "--jacobian", "1,0;0,1", "--kind", "force", "--limits", "2,3", "--method", "directional", "--directions", "4"]);
    let d = floats(&r["directional"]);
    assert!((d[0] - 2.0).abs() < 1e-9 && (d[1] - 3.0).abs() < 1e-9, "{d:?}");
    assert_eq!(code(&run(&["factors", "--jacobian", "1,2;2,4"])), 5);
    assert_eq!(code(&run(&["factors", "--jacobian", "1,2;3"])), 2);
}

#[test]
fn random_directions_follow_the_seed() {
    let args = |seed: &'static str| ["--seed", seed, "factors", "--point", "100,-50,0", "--method", "directional", "--random-directions", "5"];
    let a = json(&args("7"));
    let b = json(&args("7"));
    let c = json(&args("8"));
    assert_eq!(a, b);
    assert_ne!(a["directions"], c["directions"]);
    assert_eq!(a["seed"], 7);
}
