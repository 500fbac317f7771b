//! Loaded static equilibrium of single chains and of parallel assemblies.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::chain::SerialChainModel;
use crate::error::{Error, Result};
use crate::spatial::{scaled_condition_number, DeflectionScrew, Pose, Wrench};

/// Newton settings. Residuals are divided by the scales before the norm is
/// taken: force rows by `force_scale` (N), moment rows by `moment_scale`
/// (N·mm), pose rows by `length_scale` (mm) and `angle_scale` (rad).
/// `max_condition` bounds the scaled condition number of the bordered
/// stiffness system; beyond it the configuration is reported singular.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    pub force_scale: f64,
    pub moment_scale: f64,
    pub length_scale: f64,
    pub angle_scale: f64,
    pub max_condition: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 100,
            max_halvings: 20,
            force_scale: 1.0,
            moment_scale: 100.0,
            length_scale: 1e-3,
            angle_scale: 1e-3,
            max_condition: 1e12,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Passive-joint and spring coordinates of one chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub q: DVector<f64>,
    pub theta: DVector<f64>,
}

impl ChainState {
    pub fn nominal(chain: &SerialChainModel) -> Self {
        Self { q: chain.nominal_q_vector(), theta: chain.zero_theta() }
    }
}

/// Solution of one chain at a prescribed end pose. `wrench` is the load the
/// chain carries (force and moment about the end point, world frame).
#[derive(Clone, Debug, PartialEq)]
pub struct ChainEquilibrium {
    pub q: DVector<f64>,
    pub theta: DVector<f64>,
    pub wrench: Wrench,
    pub residual: f64,
    pub iterations: usize,
    pub condition: f64,
}

impl ChainEquilibrium {
    pub fn state(&self) -> ChainState {
        ChainState { q: self.q.clone(), theta: self.theta.clone() }
    }
}

struct Layout {
    m: usize,
    n: usize,
    row_scale: DVector<f64>,
    /// Characteristic size of each unknown `(F, θ, q)`.
    col_scale: DVector<f64>,
}

impl Layout {
    fn new(chain: &SerialChainModel, o: &SolverOptions) -> Self {
        let m = chain.n_spring();
        let n = chain.n_passive();
        let mut row_scale = DVector::zeros(6 + m + n);
        for i in 0..3 {
            row_scale[i] = o.length_scale;
            row_scale[3 + i] = o.angle_scale;
        }
        let gen = |prismatic: bool| if prismatic { o.force_scale } else { o.moment_scale };
        for (i, &p) in chain.spring_is_prismatic().iter().enumerate() {
            row_scale[6 + i] = gen(p);
        }
        for (i, &p) in chain.passive_is_prismatic().iter().enumerate() {
            row_scale[6 + m + i] = gen(p);
        }
        let coord = |prismatic: bool| if prismatic { o.length_scale } else { o.angle_scale };
        let col_scale = DVector::from_iterator(
            6 + m + n,
            [o.force_scale; 3]
                .into_iter()
                .chain([o.moment_scale; 3])
                .chain(chain.spring_is_prismatic().iter().map(|&p| coord(p)))
                .chain(chain.passive_is_prismatic().iter().map(|&p| coord(p))),
        );
        Self { m, n, row_scale, col_scale }
    }

    fn norm(&self, r: &DVector<f64>) -> f64 {
        r.component_div(&self.row_scale).amax()
    }
}

/// Residual `[pose error; J_θᵀF − Kθ; J_qᵀF]` and, on request, its Jacobian
/// with respect to `(F, θ, q)`.
fn chain_residual(
    chain: &SerialChainModel,
    target: &Pose,
    f: &Wrench,
    theta: &DVector<f64>,
    q: &DVector<f64>,
    lay: &Layout,
    with_jacobian: bool,
) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
    let frames = chain.frames(q, theta)?;
    let (jq, jt) = frames.jacobians();
    let k = chain.spring_stiffness();
    let (m, n) = (lay.m, lay.n);
    let fv = DVector::from_column_slice(f.to_vector().as_slice());
    let mut r = DVector::zeros(6 + m + n);
    let dev = frames.end.deviation_from(target).to_vector();
    r.rows_mut(0, 6).copy_from(&dev);
    r.rows_mut(6, m).copy_from(&(jt.transpose() * &fv - k * theta));
    r.rows_mut(6 + m, n).copy_from(&(jq.transpose() * &fv));
    if !with_jacobian {
        return Ok((r, None));
    }
    let h = frames.hessians(f);
    let dim = 6 + m + n;
    let mut a = DMatrix::zeros(dim, dim);
    a.view_mut((0, 6), (6, m)).copy_from(&jt);
    a.view_mut((0, 6 + m), (6, n)).copy_from(&jq);
    a.view_mut((6, 0), (m, 6)).copy_from(&jt.transpose());
    a.view_mut((6, 6), (m, m)).copy_from(&(&h.theta_theta - k));
    a.view_mut((6, 6 + m), (m, n)).copy_from(&h.theta_q);
    a.view_mut((6 + m, 0), (n, 6)).copy_from(&jq.transpose());
    a.view_mut((6 + m, 6), (n, m)).copy_from(&h.q_theta);
    a.view_mut((6 + m, 6 + m), (n, n)).copy_from(&h.qq);
    Ok((r, Some(a)))
}

/// Displacement-driven solve: finds `(F, θ, q)` such that the chain end sits
/// at `target` in static equilibrium.
pub fn solve_chain_equilibrium(
    chain: &SerialChainModel,
    target: &Pose,
    guess: Option<&ChainState>,
    wrench_guess: Option<&Wrench>,
    opts: &SolverOptions,
) -> Result<ChainEquilibrium> {
    let lay = Layout::new(chain, opts);
    let start = guess.cloned().unwrap_or_else(|| ChainState::nominal(chain));
    if start.q.len() != lay.n || start.theta.len() != lay.m {
        return Err(Error::DimensionMismatch("chain guess does not match the chain".into()));
    }
    let (mut q, mut theta) = (start.q, start.theta);
    let mut f = wrench_guess.copied().unwrap_or_else(Wrench::zero);
    let (m, n) = (lay.m, lay.n);

    let (mut r, _) = chain_residual(chain, target, &f, &theta, &q, &lay, false)?;
    let mut norm = lay.norm(&r);
    let mut iterations = 0;
    while norm > opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::NoConvergence { iterations, residual: norm });
        }
        iterations += 1;
        let (_, a) = chain_residual(chain, target, &f, &theta, &q, &lay, true)?;
        let a = a.expect("jacobian requested");
        let step = match a.clone().lu().solve(&(-&r)) {
            Some(s) if s.iter().all(|x| x.is_finite()) => s,
            _ => return Err(Error::SingularConfiguration { condition: scaled_condition_number(&a) }),
        };
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let fv = f.to_vector() + step.fixed_rows::<6>(0) * alpha;
            let f_try = Wrench::from_vector(&fv);
            let t_try = &theta + step.rows(6, m) * alpha;
            let q_try = &q + step.rows(6 + m, n) * alpha;
            let (r_try, _) = chain_residual(chain, target, &f_try, &t_try, &q_try, &lay, false)?;
            let n_try = lay.norm(&r_try);
            if n_try.is_finite() && n_try < norm {
                f = f_try;
                theta = t_try;
                q = q_try;
                r = r_try;
                norm = n_try;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // round-off floor: nothing left to gain
            if norm <= 1e3 * opts.tol {
                break;
            }
            return Err(Error::NoConvergence { iterations, residual: norm });
        }
    }
    // polish: the pose tolerance can leave a visible force residual on very
    // stiff springs, so take full steps while they still help
    let mut a = chain_residual(chain, target, &f, &theta, &q, &lay, true)?.1.expect("jacobian requested");
    for _ in 0..3 {
        if norm == 0.0 {
            break;
        }
        let Some(step) = a.clone().lu().solve(&(-&r)) else { break };
        let f_try = Wrench::from_vector(&(f.to_vector() + step.fixed_rows::<6>(0)));
        let t_try = &theta + step.rows(6, m);
        let q_try = &q + step.rows(6 + m, n);
        let (r_try, a_try) = chain_residual(chain, target, &f_try, &t_try, &q_try, &lay, true)?;
        let n_try = lay.norm(&r_try);
        let gain = r.component_div(&lay.row_scale).norm() - r_try.component_div(&lay.row_scale).norm();
        if !(n_try <= norm && gain > 0.0) {
            break;
        }
        (f, theta, q, r, norm) = (f_try, t_try, q_try, r_try, n_try);
        a = a_try.expect("jacobian requested");
    }
    let condition = scaled_condition_number(&a);
    Ok(ChainEquilibrium { q, theta, wrench: f, residual: norm, iterations, condition })
}

/// Parallel manipulator: chains sharing one platform frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ManipulatorModel {
    pub name: String,
    pub chains: Vec<SerialChainModel>,
}

impl ManipulatorModel {
    pub fn new(name: impl Into<String>, chains: Vec<SerialChainModel>) -> Result<Self> {
        if chains.is_empty() {
            return Err(Error::InvalidParams("a manipulator needs at least one chain".into()));
        }
        let model = Self { name: name.into(), chains };
        let p0 = model.chains[0].forward_geometry(&model.chains[0].nominal_q_vector(), &model.chains[0].zero_theta())?;
        for (i, c) in model.chains.iter().enumerate().skip(1) {
            let p = c.forward_geometry(&c.nominal_q_vector(), &c.zero_theta())?;
            let d = p.deviation_from(&p0).to_vector();
            if d.fixed_rows::<3>(0).amax() > 1e-6 || d.fixed_rows::<3>(3).amax() > 1e-9 {
                return Err(Error::InvalidParams(format!(
                    "chain {i} does not close on the platform frame at its nominal configuration"
                )));
            }
        }
        Ok(model)
    }

    /// Platform pose of the rigid nominal assembly.
    pub fn nominal_pose(&self) -> Pose {
        let c = &self.chains[0];
        c.forward_geometry(&c.nominal_q_vector(), &c.zero_theta()).expect("validated at construction")
    }

    pub fn nominal_states(&self) -> Vec<ChainState> {
        self.chains.iter().map(ChainState::nominal).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AssemblyTarget {
    /// Platform pose prescribed; the external wrench follows.
    Pose(Pose),
    /// External wrench (about the platform frame origin) prescribed; the
    /// platform pose follows.
    Wrench(Wrench),
}

/// Start point of an assembly solve.
#[derive(Clone, Debug, PartialEq)]
pub struct AssemblyGuess {
    pub platform: Pose,
    pub chains: Vec<ChainState>,
}

impl AssemblyGuess {
    pub fn nominal(model: &ManipulatorModel) -> Self {
        Self { platform: model.nominal_pose(), chains: model.nominal_states() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumState {
    pub chains: Vec<ChainEquilibrium>,
    pub platform_pose: Pose,
    /// Sum of the chain wrenches: the external load balanced by the assembly.
    pub external_wrench: Wrench,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl EquilibriumState {
    pub fn guess(&self) -> AssemblyGuess {
        AssemblyGuess { platform: self.platform_pose, chains: self.chains.iter().map(ChainEquilibrium::state).collect() }
    }
}

fn solve_all_chains(
    model: &ManipulatorModel,
    pose: &Pose,
    prev: &[ChainState],
    prev_w: Option<&[ChainEquilibrium]>,
    opts: &SolverOptions,
) -> Result<Vec<ChainEquilibrium>> {
    model
        .chains
        .iter()
        .enumerate()
        .map(|(i, c)| solve_chain_equilibrium(c, pose, prev.get(i), prev_w.map(|w| &w[i].wrench), opts))
        .collect()
}

fn total_wrench(chains: &[ChainEquilibrium]) -> Wrench {
    chains.iter().fold(Wrench::zero(), |acc, c| acc + c.wrench)
}

fn wrench_norm(w: &Wrench, o: &SolverOptions) -> f64 {
    (w.force.amax() / o.force_scale).max(w.moment.amax() / o.moment_scale)
}

/// Equilibrium of the whole assembly for a prescribed platform pose or a
/// prescribed external wrench.
pub fn solve_assembly(
    model: &ManipulatorModel,
    target: &AssemblyTarget,
    guess: &AssemblyGuess,
    opts: &SolverOptions,
) -> Result<EquilibriumState> {
    if guess.chains.len() != model.chains.len() {
        return Err(Error::DimensionMismatch("guess has a different number of chains".into()));
    }
    match target {
        AssemblyTarget::Pose(pose) => {
            let chains = solve_all_chains(model, pose, &guess.chains, None, opts)?;
            let residual_norm = chains.iter().map(|c| c.residual).fold(0.0, f64::max);
            let iterations = chains.iter().map(|c| c.iterations).max().unwrap_or(0);
            Ok(EquilibriumState { external_wrench: total_wrench(&chains), chains, platform_pose: *pose, residual_norm, iterations })
        }
        AssemblyTarget::Wrench(w) => {
            if !w.is_finite() {
                return Err(Error::InvalidInput("external wrench is not finite".into()));
            }
            solve_force_driven(model, w, guess, opts)
        }
    }
}

/// Unknowns of the force-driven system: platform displacement, then
/// `(F, θ, q)` of each chain.
#[derive(Clone)]
struct AssemblyVars {
    platform: Pose,
    wrenches: Vec<Wrench>,
    states: Vec<ChainState>,
}

impl AssemblyVars {
    fn stepped(&self, step: &DVector<f64>, alpha: f64, layouts: &[Layout]) -> Self {
        let dt = DeflectionScrew::from_vector(&(step.fixed_rows::<6>(0) * alpha).into_owned());
        let mut at = 6;
        let mut wrenches = Vec::with_capacity(layouts.len());
        let mut states = Vec::with_capacity(layouts.len());
        for (i, lay) in layouts.iter().enumerate() {
            let fv = self.wrenches[i].to_vector() + step.fixed_rows::<6>(at) * alpha;
            wrenches.push(Wrench::from_vector(&fv));
            let theta = &self.states[i].theta + step.rows(at + 6, lay.m) * alpha;
            let q = &self.states[i].q + step.rows(at + 6 + lay.m, lay.n) * alpha;
            states.push(ChainState { q, theta });
            at += 6 + lay.m + lay.n;
        }
        Self { platform: self.platform.displaced(&dt), wrenches, states }
    }
}

/// Scaled residual of the force-driven system and, on request, its Jacobian.
fn assembly_system(
    model: &ManipulatorModel,
    w: &Wrench,
    vars: &AssemblyVars,
    layouts: &[Layout],
    opts: &SolverOptions,
    with_jacobian: bool,
) -> Result<(DVector<f64>, f64, Option<DMatrix<f64>>)> {
    let dim = 6 + layouts.iter().map(|l| 6 + l.m + l.n).sum::<usize>();
    let mut r = DVector::zeros(dim);
    let mut a = with_jacobian.then(|| DMatrix::zeros(dim, dim));
    let mut norm: f64 = 0.0;
    let mut row = 0;
    let mut col = 6;
    let mut balance = -w.to_vector();
    for (i, chain) in model.chains.iter().enumerate() {
        let lay = &layouts[i];
        let st = &vars.states[i];
        let (ri, ai) = chain_residual(chain, &vars.platform, &vars.wrenches[i], &st.theta, &st.q, lay, with_jacobian)?;
        norm = norm.max(lay.norm(&ri));
        let k = ri.len();
        r.rows_mut(row, k).copy_from(&ri);
        if let (Some(a), Some(ai)) = (a.as_mut(), ai) {
            a.view_mut((row, col), (k, k)).copy_from(&ai);
            for j in 0..6 {
                a[(row + j, j)] = -1.0;
                a[(dim - 6 + j, col + j)] = 1.0;
            }
        }
        balance += vars.wrenches[i].to_vector();
        row += k;
        col += k;
    }
    r.rows_mut(dim - 6, 6).copy_from(&balance);
    norm = norm.max(wrench_norm(&Wrench::from_vector(&balance), opts));
    Ok((r, norm, a))
}

/// Minimum-norm Newton step in scaled variables. Directions the system
/// cannot see (free platform motions of a mechanism) are left untouched.
fn scaled_min_norm_step(a: &DMatrix<f64>, r: &DVector<f64>, layouts: &[Layout], opts: &SolverOptions) -> Option<DVector<f64>> {
    let dim = a.nrows();
    let mut rows = DVector::zeros(dim);
    let mut cols = DVector::zeros(dim);
    let mut at = 0;
    for lay in layouts {
        let k = lay.row_scale.len();
        rows.rows_mut(at, k).copy_from(&lay.row_scale);
        cols.rows_mut(at + 6, k).copy_from(&lay.col_scale);
        at += k;
    }
    for i in 0..3 {
        rows[dim - 6 + i] = opts.force_scale;
        rows[dim - 3 + i] = opts.moment_scale;
        cols[i] = opts.length_scale;
        cols[3 + i] = opts.angle_scale;
    }
    let scaled = DMatrix::from_fn(dim, dim, |i, j| a[(i, j)] * cols[j] / rows[i]);
    let rhs = -r.component_div(&rows);
    // LU while the pivots say the system is comfortably regular
    let lu = scaled.clone().lu();
    let piv = lu.u().diagonal().map(f64::abs);
    if piv.min() > LU_PIVOT_RATIO * piv.max() {
        if let Some(y) = lu.solve(&rhs) {
            let step = y.component_mul(&cols);
            if step.iter().all(|x| x.is_finite()) {
                return Some(step);
            }
        }
    }
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax.is_finite() && smax > 0.0) {
        return None;
    }
    let y = svd.solve(&rhs, SINGULAR_CUTOFF * smax).ok()?;
    let step = y.component_mul(&cols);
    step.iter().all(|x| x.is_finite()).then_some(step)
}

const SINGULAR_CUTOFF: f64 = 1e-13;
const LU_PIVOT_RATIO: f64 = 1e-10;

fn solve_force_driven(model: &ManipulatorModel, w: &Wrench, guess: &AssemblyGuess, opts: &SolverOptions) -> Result<EquilibriumState> {
    let layouts: Vec<Layout> = model.chains.iter().map(|c| Layout::new(c, opts)).collect();
    for (c, g) in model.chains.iter().zip(&guess.chains) {
        if g.q.len() != c.n_passive() || g.theta.len() != c.n_spring() {
            return Err(Error::DimensionMismatch("chain guess does not match the chain".into()));
        }
    }
    // start from the displacement-driven solution at the guessed pose
    let start = solve_all_chains(model, &guess.platform, &guess.chains, None, opts)?;
    let mut vars = AssemblyVars {
        platform: guess.platform,
        wrenches: start.iter().map(|c| c.wrench).collect(),
        states: start.iter().map(ChainEquilibrium::state).collect(),
    };
    let (mut r, mut norm, _) = assembly_system(model, w, &vars, &layouts, opts, false)?;
    let mut iterations = 0;
    let mut polish = 0;
    loop {
        let converged = norm <= opts.tol;
        if converged && (polish == 3 || norm == 0.0) {
            break;
        }
        if !converged && iterations == opts.max_iter {
            return Err(Error::NoConvergence { iterations, residual: norm });
        }
        let (_, _, a) = assembly_system(model, w, &vars, &layouts, opts, true)?;
        let a = a.expect("jacobian requested");
        let step = match scaled_min_norm_step(&a, &r, &layouts, opts) {
            Some(s) => s,
            None if converged => break,
            None => return Err(Error::SingularConfiguration { condition: scaled_condition_number(&a) }),
        };
        if converged {
            // full steps only while they still help
            polish += 1;
            let v_try = vars.stepped(&step, 1.0, &layouts);
            let (r_try, n_try, _) = assembly_system(model, w, &v_try, &layouts, opts, false)?;
            if !(n_try <= norm && r_try.norm() < r.norm()) {
                break;
            }
            (vars, r, norm) = (v_try, r_try, n_try);
            continue;
        }
        iterations += 1;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let v_try = vars.stepped(&step, alpha, &layouts);
            let (r_try, n_try, _) = assembly_system(model, w, &v_try, &layouts, opts, false)?;
            if n_try.is_finite() && n_try < norm {
                (vars, r, norm) = (v_try, r_try, n_try);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            if norm <= 1e3 * opts.tol {
                break;
            }
            return Err(Error::NoConvergence { iterations, residual: norm });
        }
    }
    let chains = model
        .chains
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let lay = &layouts[i];
            let st = &vars.states[i];
            let (ri, ai) = chain_residual(c, &vars.platform, &vars.wrenches[i], &st.theta, &st.q, lay, true)?;
            Ok(ChainEquilibrium {
                q: st.q.clone(),
                theta: st.theta.clone(),
                wrench: vars.wrenches[i],
                residual: lay.norm(&ri),
                iterations,
                condition: scaled_condition_number(&ai.expect("jacobian requested")),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquilibriumState { external_wrench: total_wrench(&chains), chains, platform_pose: vars.platform, residual_norm: norm, iterations })
}

/// Platform deflection screw under `wrench`, relative to `nominal_pose`.
pub fn deflection_under_load(
    model: &ManipulatorModel,
    nominal_pose: &Pose,
    wrench: &Wrench,
    guess: Option<&AssemblyGuess>,
    opts: &SolverOptions,
) -> Result<(DeflectionScrew, EquilibriumState)> {
    let g = match guess {
        Some(g) => g.clone(),
        None => AssemblyGuess { platform: *nominal_pose, chains: model.nominal_states() },
    };
    let state = solve_assembly(model, &AssemblyTarget::Wrench(*wrench), &g, opts)?;
    Ok((state.platform_pose.deviation_from(nominal_pose), state))
}
