use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use pkm_stiffness::field_fit::io::{read_case_dir, read_field, sidecar_path};
use pkm_stiffness::field_fit::{fit_rigid_transform, fit_with_filtering, identify_compliance, LoadCase};
use pkm_stiffness::orthoglide::io::{write_direction_sweep, write_error_map, write_magnitude_sweep, ParamsFile};
use pkm_stiffness::orthoglide::studies::{direction_sweep, error_map, magnitude_sweep, StudyGrid, SweepResult};
use pkm_stiffness::orthoglide::{build_orthoglide, kinematic_jacobian, OrthoglideParams, Table1Variant};
use pkm_stiffness::performance::inscribe::{inscribe_box, VoxelMask};
use pkm_stiffness::performance::{
    accuracy_bounds, box_velocity_factors, force_bounds, planar_directions, singular_value_factors, FactorKind,
    TransmissionFactors,
};
use pkm_stiffness::vjm::io::read_model;
use pkm_stiffness::vjm::{deflection_under_load, stiffness_loaded, stiffness_unloaded, SolverOptions};
use pkm_stiffness::{Error, Exec, Vector3, Wrench};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{rows3, rows6, FactorsReport, FitReport, IdentifyReport, StiffnessReport};
use crate::{Cli, Command, Failure, Kind, Method, OrthoglideArgs, Output, Variant};

/// Sweeps fail as a whole when fewer than this share of samples solve.
const MIN_SUCCESS_SHARE: f64 = 0.9;

type CmdResult = Result<Output, Failure>;

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn ok(text: String) -> CmdResult {
    Ok(Output { text, code: 0 })
}

fn bad_input(msg: impl Into<String>) -> Failure {
    Failure { code: 2, message: msg.into() }
}

fn exec(cli: &Cli) -> Exec {
    if cli.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn solver(cli: &Cli) -> Result<SolverOptions, Failure> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(bad_input(format!("--tol {} must be positive", cli.tol)));
    }
    Ok(SolverOptions::default().with_tol(cli.tol))
}

pub fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Fit(a) => fit(cli, a),
        Command::Identify(a) => identify(cli, a),
        Command::Stiffness(a) => stiffness(cli, a),
        Command::SweepDirection(a) => sweep_direction(cli, a),
        Command::SweepMagnitude(a) => sweep_magnitude(cli, a),
        Command::Map(a) => map(cli, a),
        Command::Inscribe(a) => inscribe(cli, a),
        Command::Factors(a) => factors(cli, a),
    }
}

fn fit(cli: &Cli, a: &crate::FitArgs) -> CmdResult {
    let meta_path = a.meta.clone().unwrap_or_else(|| sidecar_path(&a.field));
    let (field, meta) = read_field(&a.field, &meta_path, cli.units_check)?;
    let fit = if a.no_filter { fit_rigid_transform(&field)? } else { fit_with_filtering(&field, a.k)?.0 };
    let outlier_rows: Vec<usize> = fit.outlier_mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
    let std = fit.deflection_std();
    let report = FitReport {
        label: field.label.clone(),
        n_nodes: field.len(),
        n_used: fit.n_used,
        outliers: outlier_rows.len(),
        outlier_rows,
        reference_point: meta.reference_point,
        translation: fit.deflection.translation.into(),
        rotation: fit.deflection.rotation.into(),
        deflection_std: std.into(),
        sigma_hat: fit.sigma_hat,
        cov_translation: rows3(&fit.cov_translation),
        cov_rotation: rows3(&fit.cov_rotation),
        applied_wrench: meta.wrench,
    };
    ok(json(&report))
}

fn identify(cli: &Cli, a: &crate::IdentifyArgs) -> CmdResult {
    let read = read_case_dir(&a.dir, cli.units_check)?;
    if read.is_empty() {
        return Err(bad_input(format!("no *.csv load cases in {}", a.dir.display())));
    }
    let mut cases = Vec::with_capacity(read.len());
    let mut labels = Vec::with_capacity(read.len());
    for (field, meta) in &read {
        let fit = match a.filter {
            Some(k) => fit_with_filtering(field, k)?.0,
            None => fit_rigid_transform(field)?,
        };
        cases.push(LoadCase::new(meta.wrench(), fit)?);
        labels.push(field.label.clone());
    }
    let est = identify_compliance(&cases, a.k_sig)?;
    let report = IdentifyReport {
        n_cases: est.n_cases,
        cases: labels,
        compliance: rows6(&est.compliance),
        symmetrized: rows6(&est.symmetrized()),
        entry_std: rows6(&est.entry_std),
        significance_mask: est.significance_mask.map(|r| r.map(u8::from)),
        k_sig: est.k_sig,
        sigma_pooled: est.sigma_pooled,
        symmetry_error: est.symmetry_error(),
    };
    ok(json(&report))
}

fn orthoglide_params(cli: &Cli, a: &OrthoglideArgs) -> Result<OrthoglideParams, Failure> {
    let mut file = match &a.params {
        Some(p) => ParamsFile::parse(&std::fs::read_to_string(p)?, cli.units_check)?,
        None => ParamsFile::default(),
    };
    if let Some(v) = a.variant {
        file.table1_variant = match v {
            Variant::Original => Table1Variant::Original,
            Variant::Revised => Table1Variant::Revised,
        };
    }
    Ok(file.params()?)
}

fn stiffness(cli: &Cli, a: &crate::StiffnessArgs) -> CmdResult {
    let opts = solver(cli)?;
    let model = match &a.model {
        Some(path) => read_model(path, cli.units_check)?,
        None => build_orthoglide(&orthoglide_params(cli, &a.orthoglide)?, &Vector3::from(a.point))?,
    };
    let wrench = Wrench::from_array(a.wrench);
    if !wrench.is_finite() {
        return Err(bad_input("wrench has non-finite components"));
    }
    let pose = model.nominal_pose();
    let mut report = StiffnessReport {
        model: model.name.clone(),
        mode: if a.unloaded { "unloaded" } else { "loaded" }.into(),
        wrench: a.wrench,
        platform_position: pose.position.into(),
        deflection: None,
        stiffness: [[0.0; 6]; 6],
        compliance: None,
        chain_conditions: Vec::new(),
        stiffness_condition: 0.0,
        asymmetry: 0.0,
        newton_iterations: None,
    };
    let result = if a.unloaded {
        if wrench.to_vector().norm() > 0.0 {
            log::warn!("--unloaded ignores the wrench");
        }
        stiffness_unloaded(&model, &pose, None, &opts)?
    } else {
        let (d, state) = deflection_under_load(&model, &pose, &wrench, None, &opts)?;
        report.deflection = Some(d.to_vector().into());
        report.platform_position = state.platform_pose.position.into();
        report.newton_iterations = Some(state.iterations);
        stiffness_loaded(&model, &state, &opts)?
    };
    report.stiffness = rows6(&result.k_f);
    report.compliance = result.compliance().map(|c| rows6(&c));
    report.set_diagnostics(&result.diagnostics);
    ok(json(&report))
}

/// Comment block recording everything a study depends on.
fn study_header(cli: &Cli, command: &str, p: &OrthoglideParams) -> String {
    let diag = |m: &pkm_stiffness::Matrix66| (0..6).map(|i| format!("{:e}", m[(i, i)])).collect::<Vec<_>>().join(",");
    let variant = match p.variant {
        Table1Variant::Original => "original",
        Table1Variant::Revised => "revised",
    };
    let mut s = String::new();
    writeln!(s, "# pkmstiff {command}").unwrap();
    writeln!(s, "# table1_variant={variant}").unwrap();
    writeln!(s, "# L_mm={} d_mm={} r_mm={}", p.l, p.d, p.r).unwrap();
    writeln!(s, "# actuator_stiffness_N_per_mm={:e}", p.actuator_stiffness).unwrap();
    writeln!(s, "# bar_compliance_diag={}", diag(&p.bar_compliance)).unwrap();
    writeln!(s, "# foot_compliance_diag={}", diag(&p.foot_compliance)).unwrap();
    writeln!(s, "# tol={:e}", cli.tol).unwrap();
    s
}

fn finish_sweep(mut text: String, s: &SweepResult, body: Vec<u8>) -> CmdResult {
    text.push_str(&String::from_utf8(body).expect("csv is utf-8"));
    let solved = s.samples.iter().filter(|k| k.delta.is_some()).count();
    let share = if s.samples.is_empty() { 0.0 } else { solved as f64 / s.samples.len() as f64 };
    if share < MIN_SUCCESS_SHARE {
        let first = s.samples.iter().find_map(|k| k.error.clone()).unwrap_or_default();
        eprintln!("error: only {solved} of {} samples converged ({first})", s.samples.len());
        return Ok(Output { text, code: 4 });
    }
    ok(text)
}

fn sweep_direction(cli: &Cli, a: &crate::SweepDirectionArgs) -> CmdResult {
    if a.angles == 0 {
        return Err(bad_input("--angles must be positive"));
    }
    let p = orthoglide_params(cli, &a.orthoglide)?;
    let s = direction_sweep(&p, &Vector3::from(a.point), a.force, a.angles, &solver(cli)?, exec(cli))?;
    let mut body = Vec::new();
    write_direction_sweep(&mut body, &s, a.force)?;
    finish_sweep(study_header(cli, "sweep-direction", &p), &s, body)
}

fn sweep_magnitude(cli: &Cli, a: &crate::SweepMagnitudeArgs) -> CmdResult {
    if !(a.step > 0.0 && a.max >= 0.0) {
        return Err(bad_input("--step must be positive and --max non-negative"));
    }
    let p = orthoglide_params(cli, &a.orthoglide)?;
    let n = (a.max / a.step + 1e-9).floor() as usize;
    let mags: Vec<f64> = (0..=n).map(|k| k as f64 * a.step).collect();
    let s = magnitude_sweep(&p, &Vector3::from(a.point), a.angle, &mags, &solver(cli)?, exec(cli))?;
    let mut body = Vec::new();
    write_magnitude_sweep(&mut body, &s, a.angle)?;
    finish_sweep(study_header(cli, "sweep-magnitude", &p), &s, body)
}

fn map(cli: &Cli, a: &crate::MapArgs) -> CmdResult {
    if !(a.step > 0.0) || a.directions == 0 {
        return Err(bad_input("--step and --directions must be positive"));
    }
    let p = orthoglide_params(cli, &a.orthoglide)?;
    let grid = StudyGrid { z: a.z, x_range: a.x_range, y_range: a.y_range, step: a.step, force: a.force, n_directions: a.directions };
    let m = error_map(&p, &grid, &solver(cli)?, exec(cli));
    let mut text = study_header(cli, "map", &p);
    let mut body = Vec::new();
    write_error_map(&mut body, &m)?;
    text.push_str(&String::from_utf8(body).expect("csv is utf-8"));
    let solved = m.cells.len() - m.missing();
    if (solved as f64) < MIN_SUCCESS_SHARE * m.cells.len() as f64 {
        eprintln!("error: only {solved} of {} cells evaluated", m.cells.len());
        return Ok(Output { text, code: 4 });
    }
    ok(text)
}

fn orthoglide_mask(cli: &Cli, a: &crate::InscribeArgs, p: &OrthoglideParams) -> Result<VoxelMask, Failure> {
    let (lo_f, hi_f) = a.factor_range;
    let pred = |x: &Vector3| match kinematic_jacobian(p, x) {
        Ok(j) => {
            let sv = j.singular_values();
            sv.min() >= lo_f && sv.max() <= hi_f
        }
        Err(_) => false,
    };
    Ok(VoxelMask::from_predicate(&Vector3::from(a.lo), &Vector3::from(a.hi), a.resolution, pred, exec(cli))?)
}

fn inscribe(cli: &Cli, a: &crate::InscribeArgs) -> CmdResult {
    let mut text = String::new();
    let mask = match &a.mask {
        Some(path) => {
            writeln!(text, "# pkmstiff inscribe\n# mask={}", file_name(path)).unwrap();
            VoxelMask::read_file(path)?
        }
        None => {
            let p = orthoglide_params(cli, &a.orthoglide)?;
            text.push_str(&study_header(cli, "inscribe", &p));
            writeln!(text, "# velocity_factor_range={},{}", a.factor_range.0, a.factor_range.1).unwrap();
            orthoglide_mask(cli, a, &p)?
        }
    };
    let b = inscribe_box(&mask, a.base, exec(cli))?;
    let c = b.center();
    let h = b.half_extents();
    writeln!(text, "# units: mm").unwrap();
    writeln!(text, "# grid={}x{}x{} origin={},{},{} spacing={}", mask.dims[0], mask.dims[1], mask.dims[2], mask.origin.x, mask.origin.y, mask.origin.z, mask.spacing).unwrap();
    writeln!(text, "# base={},{},{}", a.base[0], a.base[1], a.base[2]).unwrap();
    writeln!(text, "# inside_voxels={}", mask.count_inside()).unwrap();
    writeln!(text, "mu,center_x,center_y,center_z,half_x,half_y,half_z").unwrap();
    writeln!(text, "{},{},{},{},{},{},{}", b.scale, c.x, c.y, c.z, h.x, h.y, h.z).unwrap();
    ok(text)
}

/// snake_case name of a serde unit variant.
fn variant_name<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn parse_matrix(s: &str) -> Result<DMatrix<f64>, Failure> {
    let rows: Vec<Vec<f64>> = s
        .split(';')
        .map(|r| r.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()
        .map_err(|e| bad_input(format!("--jacobian: {e}")))?;
    let n = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(bad_input("--jacobian rows must be non-empty and of equal length"));
    }
    Ok(DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]))
}

fn random_directions(dim: usize, n: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        // rejection from the cube keeps the direction uniform
        let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
        let r = v.norm();
        if r > 1e-3 && r <= 1.0 {
            out.push(v / r);
        }
    }
    out
}

fn factors(cli: &Cli, a: &crate::FactorsArgs) -> CmdResult {
    let j = match (&a.jacobian, a.point) {
        (Some(s), _) => parse_matrix(s)?,
        (None, point) => {
            let p = orthoglide_params(cli, &a.orthoglide)?;
            let j = kinematic_jacobian(&p, &Vector3::from(point.unwrap_or([0.0; 3])))?;
            DMatrix::from_fn(3, 3, |r, c| j[(r, c)])
        }
    };
    let limits = a.limits.clone().unwrap_or_else(|| vec![1.0; j.ncols()]);
    let kind = match a.kind {
        Kind::Velocity => FactorKind::Velocity,
        Kind::Force => FactorKind::Force,
        Kind::Accuracy => FactorKind::Accuracy,
    };
    let mut seed = None;
    let dirs = match a.method {
        Method::Directional => {
            let dim = if a.kind == Kind::Force { j.ncols() } else { j.nrows() };
            Some(match a.random_directions {
                Some(n) => {
                    seed = Some(cli.seed);
                    random_directions(dim, n, cli.seed)
                }
                None if dim >= 2 => planar_directions(dim, 0, 1, a.directions),
                None => return Err(bad_input("planar directions need at least two outputs")),
            })
        }
        _ => None,
    };
    if dirs.as_ref().is_some_and(Vec::is_empty) {
        return Err(bad_input("no directions requested"));
    }
    let f: TransmissionFactors = match (a.method, kind) {
        (Method::SingularValue, FactorKind::Force) => {
            let jit = j.clone().try_inverse().ok_or(Error::SingularJacobian)?.transpose();
            singular_value_factors(&jit, kind)?
        }
        (Method::SingularValue, _) => singular_value_factors(&j, kind)?,
        (_, FactorKind::Velocity) => box_velocity_factors(&j, &limits, dirs.as_deref())?,
        (_, FactorKind::Accuracy) => accuracy_bounds(&j, &limits, dirs.as_deref())?,
        (_, FactorKind::Force) => force_bounds(&j, &limits, dirs.as_deref())?,
    };
    let report = FactorsReport {
        kind: variant_name(&kind),
        method: variant_name(&f.method),
        jacobian: j.row_iter().map(|r| r.iter().copied().collect()).collect(),
        limits,
        k_min: f.k_min,
        k_max: f.k_max,
        condition: f.condition(),
        directions: dirs.map(|d| d.iter().map(|v| v.iter().copied().collect()).collect()),
        directional: f.directional.clone(),
        seed,
    };
    ok(json(&report))
}
