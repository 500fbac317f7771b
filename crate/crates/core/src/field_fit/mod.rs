//! Deflection-screw estimation from node displacement fields and compliance
//! identification from multiple load cases.
//!
//! A displacement field is a cloud of nodes around a reference point together
//! with their displacements under one applied wrench. The field is fitted by a
//! linearized rigid motion `Δp = t + φ × p` in closed form (translation from the
//! mean displacement, rotation from a 3×3 normal system about the centroid),
//! the residuals give an estimate of the noise level, and six or more load
//! cases combine into a 6×6 compliance matrix with per-entry significance.
//!
//! The rotation vector follows the right-hand convention used everywhere else
//! in the crate, `R(φ) ≈ I + skew(φ)`.

pub mod io;
pub mod synthetic;

use nalgebra::{DMatrix, Matrix3, Matrix6, SymmetricEigen, Vector6};

use crate::error::{Error, Result};
use crate::spatial::{
    pseudoinverse, skew, DeflectionScrew, Matrix66, Vector3, Wrench, DEFAULT_PINV_TOL,
    LINEARIZATION_LIMIT_RAD,
};

/// Geometry whose normal matrix is worse conditioned than this is rejected.
pub const MAX_GEOMETRY_CONDITION: f64 = 1e12;
/// Outlier filtering never leaves fewer nodes than this.
pub const MIN_FILTERED_NODES: usize = 10;
/// Cap on fit → filter → refit passes.
pub const MAX_FILTER_PASSES: usize = 10;
/// Default significance multiplier for compliance entries.
pub const DEFAULT_K_SIG: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeDisplacement {
    pub position: Vector3,
    pub displacement: Vector3,
}

impl NodeDisplacement {
    pub fn new(position: Vector3, displacement: Vector3) -> Self {
        Self { position, displacement }
    }
}

/// Nodes of one numerical experiment, positions in the same frame as
/// `reference_point`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementField {
    pub nodes: Vec<NodeDisplacement>,
    pub reference_point: Vector3,
    pub label: String,
    /// Index of each node in the field it was originally read from.
    pub original_index: Vec<usize>,
    /// Original indices of nodes dropped by outlier filtering.
    pub removed: Vec<usize>,
}

impl DisplacementField {
    pub fn new(nodes: Vec<NodeDisplacement>, reference_point: Vector3, label: impl Into<String>) -> Self {
        let original_index = (0..nodes.len()).collect();
        Self { nodes, reference_point, label: label.into(), original_index, removed: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn centroid(&self) -> Vector3 {
        let sum: Vector3 = self.nodes.iter().map(|n| n.position).sum();
        sum / self.nodes.len().max(1) as f64
    }

    /// Largest node distance from the centroid.
    pub fn bounding_radius(&self) -> f64 {
        let c = self.centroid();
        self.nodes.iter().map(|n| (n.position - c).norm()).fold(0.0, f64::max)
    }

    /// Same geometry with every position (and the reference point) shifted by `c`.
    pub fn translated(&self, c: &Vector3) -> Self {
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.position += c;
        }
        out.reference_point += c;
        out
    }

    fn validate(&self) -> Result<()> {
        for n in &self.nodes {
            if !n.position.iter().chain(n.displacement.iter()).all(|x| x.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite node in field '{}'", self.label)));
            }
        }
        if !self.reference_point.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("non-finite reference point".into()));
        }
        Ok(())
    }
}

/// Result of fitting a rigid motion to one displacement field.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidFit {
    /// Deflection screw expressed about the field's reference point.
    pub deflection: DeflectionScrew,
    pub residual_sum_squares: f64,
    pub n_used: usize,
    /// Per node of the field handed to the fit (or of the original field, for
    /// [`fit_with_filtering`]); `true` marks a rejected node.
    pub outlier_mask: Vec<bool>,
    /// Translation covariance about the centroid, mm².
    pub cov_translation: Matrix3<f64>,
    /// Rotation covariance, rad².
    pub cov_rotation: Matrix3<f64>,
    pub sigma_hat: f64,
    pub centroid: Vector3,
    pub reference_point: Vector3,
    /// `(Σ P̂ᵢᵀP̂ᵢ)⁻¹`, the geometric part of the rotation covariance.
    pub normal_inverse: Matrix3<f64>,
}

impl RigidFit {
    /// Full 6×6 covariance of [`RigidFit::deflection`] about the reference
    /// point, for a per-component noise level `sigma`.
    pub fn deflection_covariance_with(&self, sigma: f64) -> Matrix66 {
        let s2 = sigma * sigma;
        let cov_phi = self.normal_inverse * s2;
        let cov_tc = Matrix3::identity() * (s2 / self.n_used as f64);
        // t_ref = t_c − skew(r)·φ with r = reference − centroid
        let a = skew(&(self.reference_point - self.centroid));
        let mut out = Matrix6::zeros();
        out.fixed_view_mut::<3, 3>(0, 0).copy_from(&(cov_tc + a * cov_phi * a.transpose()));
        let cross = -a * cov_phi;
        out.fixed_view_mut::<3, 3>(0, 3).copy_from(&cross);
        out.fixed_view_mut::<3, 3>(3, 0).copy_from(&cross.transpose());
        out.fixed_view_mut::<3, 3>(3, 3).copy_from(&cov_phi);
        out
    }

    /// Covariance about the reference point using this fit's own σ̂.
    pub fn deflection_covariance(&self) -> Matrix66 {
        self.deflection_covariance_with(self.sigma_hat)
    }

    /// Per-component standard deviations of the deflection screw.
    pub fn deflection_std(&self) -> Vector6<f64> {
        self.deflection_covariance().diagonal().map(|v| v.max(0.0).sqrt())
    }

    /// Residual norm of every node of `field` against this fit.
    pub fn residual_norms(&self, field: &DisplacementField) -> Vec<f64> {
        field
            .nodes
            .iter()
            .map(|n| {
                let predicted = self.deflection.translation
                    + self.deflection.rotation.cross(&(n.position - self.reference_point));
                (n.displacement - predicted).norm()
            })
            .collect()
    }
}

/// One numerical experiment: the applied wrench (about the field's reference
/// point) and the fitted deflection.
#[derive(Clone, Debug, PartialEq)]
pub struct LoadCase {
    pub applied: Wrench,
    pub fit: RigidFit,
}

impl LoadCase {
    pub fn new(applied: Wrench, fit: RigidFit) -> Result<Self> {
        if applied.to_vector().norm() == 0.0 {
            return Err(Error::InvalidInput("load case wrench is zero".into()));
        }
        Ok(Self { applied, fit })
    }
}

/// Identified compliance with per-entry uncertainty and significance.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplianceEstimate {
    /// Raw estimator, not symmetrized.
    pub compliance: Matrix66,
    /// `true` where the entry is significantly different from zero.
    pub significance_mask: [[bool; 6]; 6],
    pub entry_std: Matrix66,
    pub sigma_pooled: f64,
    pub k_sig: f64,
    pub n_cases: usize,
}

impl ComplianceEstimate {
    pub fn symmetrized(&self) -> Matrix66 {
        crate::spatial::symmetrize(&self.compliance)
    }

    /// Relative asymmetry of the raw estimator, a diagnostic of noise and of
    /// non-conservative model error.
    pub fn symmetry_error(&self) -> f64 {
        crate::spatial::asymmetry(&self.compliance)
    }

    /// Compliance with insignificant entries set to zero.
    pub fn masked(&self) -> Matrix66 {
        Matrix66::from_fn(|i, j| if self.significance_mask[i][j] { self.compliance[(i, j)] } else { 0.0 })
    }
}

struct NormalSystem {
    centroid: Vector3,
    inverse: Matrix3<f64>,
}

fn normal_system(field: &DisplacementField) -> Result<NormalSystem> {
    let n = field.len();
    if n < 3 {
        return Err(Error::SingularGeometry { condition: f64::INFINITY });
    }
    let centroid = field.centroid();
    let mut a = Matrix3::zeros();
    for node in &field.nodes {
        let p = node.position - centroid;
        // P̂ᵀP̂ = |p̂|² I − p̂ p̂ᵀ
        a += Matrix3::identity() * p.norm_squared() - p * p.transpose();
    }
    let eig = SymmetricEigen::new(a).eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    let condition = if lo <= 0.0 { f64::INFINITY } else { hi / lo };
    if !(condition <= MAX_GEOMETRY_CONDITION) {
        return Err(Error::SingularGeometry { condition });
    }
    let inverse = a.try_inverse().ok_or(Error::SingularGeometry { condition })?;
    Ok(NormalSystem { centroid, inverse })
}

/// Least-squares rigid motion of a displacement field.
///
/// Translation and rotation decouple once the origin is moved to the node
/// centroid; the result is then re-expressed about the reference point.
pub fn fit_rigid_transform(field: &DisplacementField) -> Result<RigidFit> {
    field.validate()?;
    let ns = normal_system(field)?;
    let n = field.len();
    let c = ns.centroid;

    let t_c: Vector3 = field.nodes.iter().map(|x| x.displacement).sum::<Vector3>() / n as f64;
    let moment: Vector3 = field
        .nodes
        .iter()
        .map(|x| (x.position - c).cross(&x.displacement))
        .sum();
    let phi = ns.inverse * moment;

    let rss: f64 = field
        .nodes
        .iter()
        .map(|x| (x.displacement - t_c - phi.cross(&(x.position - c))).norm_squared())
        .sum();
    let sigma_hat = (rss / (3 * n - 6).max(1) as f64).sqrt();

    let deflection = DeflectionScrew::new(t_c + phi.cross(&(field.reference_point - c)), phi);

    if phi.norm() > LINEARIZATION_LIMIT_RAD {
        log::warn!(
            "field '{}': fitted rotation {:.3e} rad exceeds the small-angle limit",
            field.label,
            phi.norm()
        );
    }
    let radius = field.bounding_radius();
    if field.nodes.iter().any(|x| x.displacement.norm() > 0.1 * radius) {
        log::warn!("field '{}': node displacement exceeds 10% of the field radius", field.label);
    }

    Ok(RigidFit {
        deflection,
        residual_sum_squares: rss,
        n_used: n,
        outlier_mask: vec![false; n],
        cov_translation: Matrix3::identity() * (sigma_hat * sigma_hat / n as f64),
        cov_rotation: ns.inverse * (sigma_hat * sigma_hat),
        sigma_hat,
        centroid: c,
        reference_point: field.reference_point,
        normal_inverse: ns.inverse,
    })
}

/// Predicted covariances of the translation (about the centroid) and the
/// rotation for a given noise level.
pub fn fit_covariances(field: &DisplacementField, sigma: f64) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    let ns = normal_system(field)?;
    let s2 = sigma * sigma;
    Ok((Matrix3::identity() * (s2 / field.len() as f64), ns.inverse * s2))
}

fn residual_floor(field: &DisplacementField) -> f64 {
    // rounding-level residuals of an exactly rigid field must never count as outliers
    let scale = field.nodes.iter().map(|n| n.displacement.norm()).fold(0.0, f64::max);
    1e-9 * scale + f64::MIN_POSITIVE
}

fn keep_inliers(field: &DisplacementField, fit: &RigidFit, k: f64) -> (DisplacementField, usize) {
    let threshold = (k * fit.sigma_hat * 3f64.sqrt()).max(residual_floor(field));
    let norms = fit.residual_norms(field);
    let mut out = DisplacementField {
        nodes: Vec::with_capacity(field.len()),
        reference_point: field.reference_point,
        label: field.label.clone(),
        original_index: Vec::with_capacity(field.len()),
        removed: field.removed.clone(),
    };
    let mut dropped = 0;
    for ((node, &idx), r) in field.nodes.iter().zip(&field.original_index).zip(norms) {
        if r > threshold {
            out.removed.push(idx);
            dropped += 1;
        } else {
            out.nodes.push(*node);
            out.original_index.push(idx);
        }
    }
    (out, dropped)
}

/// Drops nodes whose residual norm exceeds `k·σ̂·√3`, refitting until no
/// further node is rejected (at most [`MAX_FILTER_PASSES`] passes).
pub fn filter_outliers(field: &DisplacementField, fit: &RigidFit, k: f64) -> Result<DisplacementField> {
    if !(k >= 2.0) {
        return Err(Error::InvalidParams(format!("outlier multiplier k = {k} must be ≥ 2")));
    }
    let mut current = field.clone();
    let mut current_fit = fit.clone();
    for _ in 0..MAX_FILTER_PASSES {
        let (next, dropped) = keep_inliers(&current, &current_fit, k);
        if dropped == 0 {
            break;
        }
        if next.len() < MIN_FILTERED_NODES {
            return Err(Error::TooFewNodes { remaining: next.len(), minimum: MIN_FILTERED_NODES });
        }
        current_fit = fit_rigid_transform(&next)?;
        current = next;
    }
    current.removed.sort_unstable();
    Ok(current)
}

/// Fit, filter and refit. The returned mask refers to the nodes of `field`.
pub fn fit_with_filtering(field: &DisplacementField, k: f64) -> Result<(RigidFit, DisplacementField)> {
    let first = fit_rigid_transform(field)?;
    let filtered = filter_outliers(field, &first, k)?;
    let mut fit = fit_rigid_transform(&filtered)?;
    let mut mask = vec![false; field.len()];
    for &idx in &filtered.removed {
        if let Some(pos) = field.original_index.iter().position(|&o| o == idx) {
            mask[pos] = true;
        }
    }
    fit.outlier_mask = mask;
    Ok((fit, filtered))
}

/// Pooled noise estimate over several experiments:
/// `σ̂² = Σ RSSⱼ / Σ (3nⱼ − 6)`.
pub fn estimate_sigma_pooled(cases: &[LoadCase]) -> f64 {
    let (rss, dof) = cases.iter().fold((0.0, 0usize), |(r, d), c| {
        (r + c.fit.residual_sum_squares, d + (3 * c.fit.n_used).saturating_sub(6))
    });
    if dof == 0 {
        0.0
    } else {
        (rss / dof as f64).sqrt()
    }
}

fn wrench_rank(w: &DMatrix<f64>) -> usize {
    // rows mix N and N·mm: equilibrate before judging rank
    let mut scaled = w.clone();
    for mut row in scaled.row_iter_mut() {
        let n = row.norm();
        if n > 0.0 {
            row /= n;
        }
    }
    crate::spatial::numerical_rank(&scaled, 1e-10)
}

/// Compliance matrix from `m ≥ 6` load cases: `C = D · W⁺`, where the columns
/// of `W` are the applied wrenches and the columns of `D` the fitted
/// deflections. With exactly six cases the pseudoinverse is a plain inverse.
///
/// Entry standard deviations come from first-order propagation of the
/// per-case deflection covariances, all scaled by the pooled σ̂.
pub fn identify_compliance(cases: &[LoadCase], k_sig: f64) -> Result<ComplianceEstimate> {
    let m = cases.len();
    let w = DMatrix::from_fn(6, m, |i, j| cases[j].applied.to_vector()[i]);
    let rank = wrench_rank(&w);
    if m < 6 || rank < 6 {
        return Err(Error::RankDeficientLoads { rank });
    }
    let d = DMatrix::from_fn(6, m, |i, j| cases[j].fit.deflection.to_vector()[i]);

    let w_pinv = if m == 6 {
        w.clone().lu().try_inverse().ok_or(Error::RankDeficientLoads { rank })?
    } else {
        pseudoinverse(&w, DEFAULT_PINV_TOL)
    };
    let c = &d * &w_pinv;
    let compliance = Matrix66::from_fn(|i, j| c[(i, j)]);

    let sigma_pooled = estimate_sigma_pooled(cases);
    let case_var: Vec<Vector6<f64>> = cases
        .iter()
        .map(|cs| cs.fit.deflection_covariance_with(sigma_pooled).diagonal())
        .collect();
    let entry_std = Matrix66::from_fn(|a, b| {
        (0..m)
            .map(|j| w_pinv[(j, b)].powi(2) * case_var[j][a])
            .sum::<f64>()
            .sqrt()
    });
    let mut significance_mask = [[false; 6]; 6];
    for (a, row) in significance_mask.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = compliance[(a, b)].abs() > k_sig * entry_std[(a, b)];
        }
    }
    Ok(ComplianceEstimate { compliance, significance_mask, entry_std, sigma_pooled, k_sig, n_cases: m })
}

#[cfg(test)]
mod tests {
    use super::synthetic::{ball_field, with_noise};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn screw(t: [f64; 3], p: [f64; 3]) -> DeflectionScrew {
        DeflectionScrew::new(Vector3::from(t), Vector3::from(p))
    }

    #[test]
    fn pure_translation_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = ball_field(&mut rng, Vector3::zeros(), 10.0, 50, &screw([0.1, 0.0, 0.0], [0.0; 3]), 0.0);
        let fit = fit_rigid_transform(&f).unwrap();
        assert!((fit.deflection.translation - Vector3::new(0.1, 0.0, 0.0)).norm() < 1e-15);
        assert!(fit.deflection.rotation.norm() < 1e-15);
        assert!(fit.residual_sum_squares < 1e-28);
    }

    #[test]
    fn noiseless_screw_is_recovered() {
        let truth = screw([0.02, -0.01, 0.005], [1e-4, 2e-4, -1e-4]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = ball_field(&mut rng, Vector3::new(5.0, -3.0, 40.0), 20.0, 300, &truth, 0.0);
        let fit = fit_rigid_transform(&f).unwrap();
        assert!((fit.deflection.to_vector() - truth.to_vector()).amax() < 1e-12);
        assert!(fit.residual_sum_squares < 1e-20);
    }

    #[test]
    fn collinear_nodes_are_rejected() {
        let nodes = (0..20)
            .map(|i| NodeDisplacement::new(Vector3::new(i as f64, 0.0, 0.0), Vector3::zeros()))
            .collect();
        let f = DisplacementField::new(nodes, Vector3::zeros(), "line");
        assert!(matches!(fit_rigid_transform(&f), Err(Error::SingularGeometry { .. })));
        let two = DisplacementField::new(f.nodes[..2].to_vec(), Vector3::zeros(), "two");
        assert!(matches!(fit_rigid_transform(&two), Err(Error::SingularGeometry { .. })));
    }

    #[test]
    fn covariances_zero_sigma_and_duplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = ball_field(&mut rng, Vector3::zeros(), 20.0, 100, &DeflectionScrew::zero(), 0.0);
        let (ct, cp) = fit_covariances(&f, 0.0).unwrap();
        assert_eq!(ct, Matrix3::zeros());
        assert_eq!(cp, Matrix3::zeros());

        let mut doubled = f.clone();
        doubled.nodes.extend(f.nodes.clone());
        let (ct1, _) = fit_covariances(&f, 1e-4).unwrap();
        let (ct2, _) = fit_covariances(&doubled, 1e-4).unwrap();
        assert_eq!(ct2 * 2.0, ct1);
    }

    #[test]
    fn clean_field_loses_no_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = ball_field(&mut rng, Vector3::zeros(), 20.0, 200, &screw([0.01, 0.0, 0.0], [1e-4, 0.0, 0.0]), 0.0);
        let fit = fit_rigid_transform(&f).unwrap();
        let filtered = filter_outliers(&f, &fit, 3.0).unwrap();
        assert_eq!(filtered.len(), 200);
        assert!(filtered.removed.is_empty());
    }

    #[test]
    fn single_gross_outlier_is_removed() {
        let sigma = 1e-4;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let clean = ball_field(&mut rng, Vector3::zeros(), 20.0, 300, &screw([0.01, 0.0, 0.0], [0.0, 1e-4, 0.0]), 0.0);
        let mut f = clean.clone();
        f.nodes[17].displacement += Vector3::new(100.0 * sigma, 0.0, 0.0);
        let (fit, filtered) = fit_with_filtering(&f, 3.0).unwrap();
        assert_eq!(filtered.removed, vec![17]);
        assert!(fit.outlier_mask[17]);
        assert_eq!(fit.outlier_mask.iter().filter(|&&m| m).count(), 1);
        assert_eq!(fit.n_used, 299);

        // the noisy version behaves the same
        let mut noisy = with_noise(&mut rng, &clean, sigma);
        noisy.nodes[42].displacement += Vector3::new(0.0, 0.0, 100.0 * sigma);
        let (_, filtered) = fit_with_filtering(&noisy, 3.0).unwrap();
        assert_eq!(filtered.removed, vec![42]);
    }

    #[test]
    fn gaussian_tail_keeps_almost_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = ball_field(&mut rng, Vector3::zeros(), 20.0, 1000, &screw([0.01, 0.0, 0.0], [0.0; 3]), 1e-4);
        let fit = fit_rigid_transform(&f).unwrap();
        let filtered = filter_outliers(&f, &fit, 4.0).unwrap();
        assert!(filtered.removed.len() < 10);
    }

    #[test]
    fn filtering_guards() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = ball_field(&mut rng, Vector3::zeros(), 20.0, 12, &DeflectionScrew::zero(), 0.0);
        let fit = fit_rigid_transform(&f).unwrap();
        assert!(matches!(filter_outliers(&f, &fit, 1.5), Err(Error::InvalidParams(_))));

        // ten nodes, one gross outlier near the centroid: dropping it leaves nine
        let mut bad = ball_field(&mut rng, Vector3::zeros(), 20.0, 10, &DeflectionScrew::zero(), 1e-3);
        let c = bad.centroid();
        let inner = (0..bad.len())
            .min_by(|&a, &b| (bad.nodes[a].position - c).norm().total_cmp(&(bad.nodes[b].position - c).norm()))
            .unwrap();
        bad.nodes[inner].displacement.z += 5.0;
        let fit = fit_rigid_transform(&bad).unwrap();
        let r = filter_outliers(&bad, &fit, 2.0);
        assert!(matches!(r, Err(Error::TooFewNodes { .. })), "{r:?}");
    }

    #[test]
    fn filtering_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut f = ball_field(&mut rng, Vector3::zeros(), 20.0, 400, &DeflectionScrew::zero(), 1e-4);
        f.nodes[3].displacement.x += 0.05;
        let (fit, filtered) = fit_with_filtering(&f, 3.0).unwrap();
        let again = filter_outliers(&filtered, &fit, 3.0).unwrap();
        assert_eq!(again.nodes, filtered.nodes);
    }

    #[test]
    fn pooled_sigma_single_noiseless_case_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = ball_field(&mut rng, Vector3::zeros(), 20.0, 50, &screw([0.01, 0.0, 0.0], [0.0; 3]), 0.0);
        let case = LoadCase::new(Wrench::from_force(Vector3::x()), fit_rigid_transform(&f).unwrap()).unwrap();
        assert!(estimate_sigma_pooled(&[case]) < 1e-15);
    }

    #[test]
    fn fewer_than_six_cases_is_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let cases: Vec<LoadCase> = (0..5)
            .map(|i| {
                let f = ball_field(&mut rng, Vector3::zeros(), 20.0, 30, &DeflectionScrew::zero(), 0.0);
                let mut w = [0.0; 6];
                w[i] = 1.0;
                LoadCase::new(Wrench::from_array(w), fit_rigid_transform(&f).unwrap()).unwrap()
            })
            .collect();
        assert!(matches!(identify_compliance(&cases, 3.0), Err(Error::RankDeficientLoads { rank: 5 })));
    }
}
