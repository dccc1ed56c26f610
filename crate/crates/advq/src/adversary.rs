//! Adversary-bound objects for a state-conversion pair (ρ, σ): coordinate
//! difference masks, witness factorizations of ρ - σ through the masks (upper
//! bounds on the bound), adversary-matrix certificates (lower bounds), and a
//! best-effort solver producing both sides with a duality-gap report.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::matrix::{
    check_hermitian, hadamard, hermitian_eigen, hermitize, operator_norm, outer, random_matrix,
    CMatrix, CVector, HERMITIAN_TOL,
};

/// Witness feasibility must hold to this residual.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Certificate mask-norm constraints carry this slack.
pub const CERTIFICATE_TOL: f64 = 1e-9;

/// 0/1 matrix marking the input pairs that differ in one coordinate.
#[derive(Debug, Clone)]
pub struct DifferenceMask {
    pub coordinate: usize,
    pub matrix: CMatrix,
}

/// One mask per coordinate; labels must have equal length.
pub fn delta_masks(labels: &[String], n: usize) -> Result<Vec<DifferenceMask>> {
    for l in labels {
        if l.chars().count() != n {
            return Err(Error::BadLabels(format!(
                "label {l:?} does not have length {n}"
            )));
        }
    }
    let chars: Vec<Vec<char>> = labels.iter().map(|l| l.chars().collect()).collect();
    let size = labels.len();
    Ok((0..n)
        .map(|j| {
            let matrix = CMatrix::from_fn(size, size, |r, c| {
                if chars[r][j] != chars[c][j] {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            DifferenceMask {
                coordinate: j,
                matrix,
            }
        })
        .collect())
}

/// Vectors u_{x,j}, v_{x,j} factoring ρ - σ through the difference masks,
/// together with the max-row-norm value they certify.
#[derive(Debug, Clone)]
pub struct AdversaryWitness {
    pub labels: Vec<String>,
    /// Workspace dimension of the factor vectors.
    pub m: usize,
    /// u[x][j], one vector of dimension m per label and coordinate.
    pub u: Vec<Vec<CVector>>,
    pub v: Vec<Vec<CVector>>,
    pub value: f64,
}

fn max_row_norm(side: &[Vec<CVector>]) -> f64 {
    side.iter()
        .map(|per_j| per_j.iter().map(|v| v.norm_squared()).sum::<f64>())
        .fold(0.0, f64::max)
}

impl AdversaryWitness {
    pub fn new(labels: Vec<String>, u: Vec<Vec<CVector>>, v: Vec<Vec<CVector>>) -> Self {
        let m = u
            .first()
            .and_then(|per_j| per_j.first())
            .map_or(0, |vec| vec.len());
        let value = max_row_norm(&u).max(max_row_norm(&v));
        Self {
            labels,
            m,
            u,
            v,
            value,
        }
    }

    pub fn n(&self) -> usize {
        self.u.first().map_or(0, |per_j| per_j.len())
    }

    /// The value of the min form this witness certifies, recomputed from the
    /// vectors.
    pub fn recompute_value(&self) -> f64 {
        max_row_norm(&self.u).max(max_row_norm(&self.v))
    }

    /// u ← t·u, v ← v/t. Preserves feasibility exactly for real t ≠ 0.
    pub fn scaled(&self, t: f64) -> Self {
        let scale = |side: &[Vec<CVector>], factor: f64| -> Vec<Vec<CVector>> {
            side.iter()
                .map(|per_j| per_j.iter().map(|vec| vec.scale(factor)).collect())
                .collect()
        };
        Self::new(
            self.labels.clone(),
            scale(&self.u, t),
            scale(&self.v, 1.0 / t),
        )
    }

    /// All-zero witness (feasible exactly when ρ = σ).
    pub fn zero(labels: Vec<String>, n: usize, m: usize) -> Self {
        let side = vec![vec![DVector::zeros(m); n]; labels.len()];
        Self::new(labels, side.clone(), side)
    }
}

/// Outcome of checking a witness against a conversion pair.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub feasible: bool,
    /// Max entrywise deviation of the factorization from ρ - σ.
    pub residual: f64,
    pub worst_pair: (String, String),
    /// Recomputed witness value (an upper bound when feasible).
    pub value: f64,
}

fn reconstruction_entry(w: &AdversaryWitness, masks: &[DifferenceMask], x: usize, y: usize) -> C64 {
    masks
        .iter()
        .enumerate()
        .map(|(j, mask)| mask.matrix[(x, y)] * w.u[x][j].dotc(&w.v[y][j]))
        .sum()
}

/// Check the feasibility equation (ρ-σ)_{x,y} = Σ_j (Δ_j)_{x,y} ⟨u_{x,j}|v_{y,j}⟩
/// and recompute the witness value.
pub fn verify_witness(
    rho: &GramMatrix,
    sigma: &GramMatrix,
    witness: &AdversaryWitness,
) -> Result<WitnessReport> {
    if !rho.same_labels(sigma) || rho.labels() != witness.labels.as_slice() {
        return Err(Error::BadLabels(
            "witness and Gram matrices indexed by different label sets".into(),
        ));
    }
    let n = witness.n();
    let masks = delta_masks(&witness.labels, n)?;
    let diff = rho.matrix() - sigma.matrix();
    let size = witness.labels.len();
    let mut residual = 0.0;
    let mut worst = (0, 0);
    for x in 0..size {
        for y in 0..size {
            let got = reconstruction_entry(witness, &masks, x, y);
            let dev = (got - diff[(x, y)]).norm();
            if dev > residual {
                residual = dev;
                worst = (x, y);
            }
        }
    }
    Ok(WitnessReport {
        feasible: residual <= FEASIBILITY_TOL,
        residual,
        worst_pair: (
            witness.labels[worst.0].clone(),
            witness.labels[worst.1].clone(),
        ),
        value: witness.recompute_value(),
    })
}

/// Hermitian adversary matrix and unit vector certifying a lower bound.
#[derive(Debug, Clone)]
pub struct AdversaryCertificate {
    pub labels: Vec<String>,
    pub gamma: CMatrix,
    /// Unit vector over the labels, used by progress-function analyses.
    pub vector: CVector,
    /// ‖Γ ∘ (ρ - σ)‖ as recorded at construction time.
    pub value: f64,
}

impl AdversaryCertificate {
    pub fn zero(labels: Vec<String>) -> Self {
        let size = labels.len();
        let mut vector = CVector::zeros(size);
        vector[0] = C64::new(1.0, 0.0);
        Self {
            labels,
            gamma: CMatrix::zeros(size, size),
            vector,
            value: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub valid: bool,
    /// ‖Γ ∘ (ρ - σ)‖, a lower bound on the adversary bound when valid.
    pub value: f64,
    /// Mask constraints with ‖Γ ∘ Δ_j‖ > 1, by coordinate.
    pub violations: Vec<(usize, f64)>,
}

/// Validate ‖Γ ∘ Δ_j‖ ≤ 1 for every coordinate and evaluate ‖Γ ∘ (ρ - σ)‖.
pub fn verify_certificate(
    rho: &GramMatrix,
    sigma: &GramMatrix,
    certificate: &AdversaryCertificate,
) -> Result<CertificateReport> {
    if !rho.same_labels(sigma) || rho.labels() != certificate.labels.as_slice() {
        return Err(Error::BadLabels(
            "certificate and Gram matrices indexed by different label sets".into(),
        ));
    }
    check_hermitian(&certificate.gamma, HERMITIAN_TOL)?;
    let n = certificate.labels[0].chars().count();
    let masks = delta_masks(&certificate.labels, n)?;
    let mut violations = Vec::new();
    for mask in &masks {
        let norm = operator_norm(&hadamard(&certificate.gamma, &mask.matrix)?);
        if norm > 1.0 + CERTIFICATE_TOL {
            violations.push((mask.coordinate, norm));
        }
    }
    let diff = rho.matrix() - sigma.matrix();
    let value = operator_norm(&hadamard(&certificate.gamma, &diff)?);
    Ok(CertificateReport {
        valid: violations.is_empty(),
        value,
        violations,
    })
}

/// Solver settings; the defaults handle every bundled instance.
#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Workspace dimensions tried for the witness side (grown 1, 2, 4, ...).
    pub max_workspace_dim: usize,
    /// Alternating rounds per workspace dimension.
    pub rounds: usize,
    /// Random restarts per workspace dimension / ascent run.
    pub restarts: usize,
    /// Relative improvement below which a side stops early.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_workspace_dim: 4,
            rounds: 300,
            restarts: 6,
            tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub witness: AdversaryWitness,
    pub certificate: AdversaryCertificate,
    /// (upper - lower) / upper, zero for a trivial instance.
    pub gap: f64,
    /// Feasibility residual of the returned witness.
    pub residual: f64,
    pub converged: bool,
}

struct WitnessProblem<'a> {
    diff: &'a CMatrix,
    masks: &'a [DifferenceMask],
    size: usize,
    n: usize,
    m: usize,
}

impl WitnessProblem<'_> {
    /// Min-norm least-squares update of v[y] for every y, holding u fixed.
    /// Rows are indexed by x, unknowns by (j, k) stacked j-major.
    fn update_v(&self, u: &[Vec<CVector>], v: &mut [Vec<CVector>]) {
        for y in 0..self.size {
            let mut rows = CMatrix::zeros(self.size - 1, self.n * self.m);
            let mut rhs = CVector::zeros(self.size - 1);
            let mut r = 0;
            for x in 0..self.size {
                if x == y {
                    continue;
                }
                for (j, mask) in self.masks.iter().enumerate() {
                    let w = mask.matrix[(x, y)];
                    if w.norm() > 0.0 {
                        for k in 0..self.m {
                            rows[(r, j * self.m + k)] = w * u[x][j][k].conj();
                        }
                    }
                }
                rhs[r] = self.diff[(x, y)];
                r += 1;
            }
            if let Ok(sol) = rows.svd(true, true).solve(&rhs, 1e-12) {
                for j in 0..self.n {
                    for k in 0..self.m {
                        v[y][j][k] = sol[j * self.m + k];
                    }
                }
            }
        }
    }

    /// Mirror update of u[x], holding v fixed (the conjugated system).
    fn update_u(&self, u: &mut [Vec<CVector>], v: &[Vec<CVector>]) {
        for x in 0..self.size {
            let mut rows = CMatrix::zeros(self.size - 1, self.n * self.m);
            let mut rhs = CVector::zeros(self.size - 1);
            let mut r = 0;
            for y in 0..self.size {
                if y == x {
                    continue;
                }
                for (j, mask) in self.masks.iter().enumerate() {
                    let w = mask.matrix[(x, y)];
                    if w.norm() > 0.0 {
                        for k in 0..self.m {
                            rows[(r, j * self.m + k)] = w * v[y][j][k].conj();
                        }
                    }
                }
                rhs[r] = self.diff[(x, y)].conj();
                r += 1;
            }
            if let Ok(sol) = rows.svd(true, true).solve(&rhs, 1e-12) {
                for j in 0..self.n {
                    for k in 0..self.m {
                        u[x][j][k] = sol[j * self.m + k];
                    }
                }
            }
        }
    }

    fn balanced_value(u: &[Vec<CVector>], v: &[Vec<CVector>]) -> f64 {
        (max_row_norm(u) * max_row_norm(v)).sqrt()
    }

    /// Min-norm least-squares response of the whole v side to a fixed u.
    fn ls_v(&self, u: &[Vec<CVector>]) -> Vec<Vec<CVector>> {
        let mut v = vec![vec![DVector::zeros(self.m); self.n]; self.size];
        self.update_v(u, &mut v);
        v
    }

    fn reconstruction_residual(&self, u: &[Vec<CVector>], v: &[Vec<CVector>]) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.size {
            for y in 0..self.size {
                let mut acc = C64::new(0.0, 0.0);
                for (j, mask) in self.masks.iter().enumerate() {
                    let w = mask.matrix[(x, y)];
                    if w.norm() > 0.0 {
                        acc += w * u[x][j].dotc(&v[y][j]);
                    }
                }
                worst = worst.max((acc - self.diff[(x, y)]).norm());
            }
        }
        worst
    }

    /// Smoothed balanced value: p-norms stand in for the row maxima so the
    /// objective is differentiable near ties.
    fn smooth_value(&self, u: &[Vec<CVector>], v: &[Vec<CVector>], p: f64) -> f64 {
        let pnorm = |side: &[Vec<CVector>]| -> f64 {
            let rows: Vec<f64> = side
                .iter()
                .map(|per_j| per_j.iter().map(|vec| vec.norm_squared()).sum::<f64>())
                .collect();
            let top = rows.iter().copied().fold(0.0, f64::max);
            if top == 0.0 {
                return 0.0;
            }
            let sum: f64 = rows.iter().map(|r| (r / top).powf(p)).sum();
            top * sum.powf(1.0 / p)
        };
        (pnorm(u) * pnorm(v)).sqrt() + 1e3 * self.reconstruction_residual(u, v)
    }

    /// Descend the u side under the exact least-squares v response, with
    /// central-difference gradients and a backtracking line search; the max
    /// is progressively sharpened through the p-norm schedule.
    fn descend_u(&self, u: &mut Vec<Vec<CVector>>, rounds: usize, tol: f64) {
        let flatten_len = self.size * self.n * self.m;
        let objective = |u: &[Vec<CVector>], p: f64| -> f64 {
            let v = self.ls_v(u);
            self.smooth_value(u, &v, p)
        };
        for &p in &[8.0, 64.0, 512.0] {
            let mut value = objective(u, p);
            let mut step = 0.25;
            for _ in 0..rounds {
                // numerical gradient over the real coordinates of u
                let mut grad = vec![C64::new(0.0, 0.0); flatten_len];
                let h = 1e-6;
                let mut idx = 0;
                for x in 0..self.size {
                    for j in 0..self.n {
                        for k in 0..self.m {
                            let base = u[x][j][k];
                            let mut probe = |delta: C64| -> f64 {
                                u[x][j][k] = base + delta;
                                let val = objective(u, p);
                                u[x][j][k] = base;
                                val
                            };
                            let re =
                                (probe(C64::new(h, 0.0)) - probe(C64::new(-h, 0.0))) / (2.0 * h);
                            let im =
                                (probe(C64::new(0.0, h)) - probe(C64::new(0.0, -h))) / (2.0 * h);
                            grad[idx] = C64::new(re, im);
                            idx += 1;
                        }
                    }
                }
                let gnorm: f64 = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
                if gnorm <= tol * value.max(1.0) {
                    break;
                }
                let mut eta = step;
                let mut improved = false;
                for _ in 0..30 {
                    let mut trial = u.clone();
                    let mut idx = 0;
                    for x in 0..self.size {
                        for j in 0..self.n {
                            for k in 0..self.m {
                                trial[x][j][k] -= grad[idx] * C64::new(eta, 0.0);
                                idx += 1;
                            }
                        }
                    }
                    let trial_value = objective(&trial, p);
                    if trial_value < value - 1e-14 {
                        let gain = value - trial_value;
                        *u = trial;
                        value = trial_value;
                        step = (eta * 2.0).min(0.5);
                        improved = gain > tol * value.max(1.0);
                        break;
                    }
                    eta *= 0.5;
                }
                if !improved {
                    break;
                }
            }
        }
    }
}

fn random_side(size: usize, n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<CVector>> {
    (0..size)
        .map(|_| {
            (0..n)
                .map(|_| crate::matrix::random_unit_vector(m, rng))
                .collect()
        })
        .collect()
}

/// Best-effort two-sided solve: alternating min-norm least squares on the
/// witness (min) side with the workspace dimension grown geometrically, and
/// projected subgradient ascent on the adversary-matrix (max) side. The
/// returned witness is feasibility-repaired by a final least-squares
/// correction of the v side; an instance it cannot repair is reported
/// infeasible rather than returned silently.
pub fn solve_adversary(
    rho: &GramMatrix,
    sigma: &GramMatrix,
    config: &SolveConfig,
) -> Result<SolveReport> {
    if !rho.same_labels(sigma) {
        return Err(Error::BadLabels(
            "Gram matrices indexed by different label sets".into(),
        ));
    }
    let labels = rho.labels().to_vec();
    let size = labels.len();
    let n = labels[0].chars().count();
    if size > 32 || n > 6 {
        return Err(Error::TooLarge(format!(
            "{size} inputs of length {n}; the solver handles at most 32 inputs of length 6"
        )));
    }
    let masks = delta_masks(&labels, n)?;
    let diff = rho.matrix() - sigma.matrix();

    // trivial instance: identical Gram matrices
    if diff.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-14 {
        return Ok(SolveReport {
            witness: AdversaryWitness::zero(labels.clone(), n, 1),
            certificate: AdversaryCertificate::zero(labels),
            gap: 0.0,
            residual: 0.0,
            converged: true,
        });
    }

    // ---- witness (upper) side ----
    let mut best: Option<(f64, Vec<Vec<CVector>>, Vec<Vec<CVector>>)> = None;
    let mut m = 1;
    while m <= config.max_workspace_dim {
        let problem = WitnessProblem {
            diff: &diff,
            masks: &masks,
            size,
            n,
            m,
        };
        for restart in 0..config.restarts {
            let mut rng =
                ChaCha8Rng::seed_from_u64(config.seed ^ ((m as u64) << 32) ^ restart as u64);
            let mut u = random_side(size, n, m, &mut rng);
            let mut v = random_side(size, n, m, &mut rng);
            let mut last = f64::INFINITY;
            for _ in 0..config.rounds {
                problem.update_v(&u, &mut v);
                problem.update_u(&mut u, &v);
                let value = WitnessProblem::balanced_value(&u, &v);
                if (last - value).abs() <= config.tol * value.max(1.0) {
                    break;
                }
                last = value;
            }
            problem.descend_u(&mut u, config.rounds, config.tol);
            let v = problem.ls_v(&u);
            let value = WitnessProblem::balanced_value(&u, &v);
            if value.is_finite() && best.as_ref().map_or(true, |(b, _, _)| value < *b) {
                best = Some((value, u, v));
            }
        }
        m *= 2;
    }
    let (_, u, v) = best.expect("at least one restart ran");

    // balance the two sides, then repair feasibility on the v side
    let su = max_row_norm(&u);
    let sv = max_row_norm(&v);
    let t = (sv / su).powf(0.25);
    let mut witness = AdversaryWitness::new(labels.clone(), u, v).scaled(t);
    repair_v_side(&diff, &masks, &mut witness);
    witness.value = witness.recompute_value();
    let report = verify_witness(rho, sigma, &witness)?;

    // ---- certificate (lower) side ----
    let certificate = ascend_certificate(&labels, &diff, &masks, config);

    let upper = witness.value;
    let lower = certificate.value;
    let gap = if upper > 0.0 {
        (upper - lower).max(0.0) / upper
    } else {
        0.0
    };
    Ok(SolveReport {
        witness,
        certificate,
        gap,
        residual: report.residual,
        converged: report.feasible,
    })
}

/// Least-squares correction of the v side, keeping u fixed: project the
/// current v onto the affine feasible set (deterministic, preserves the
/// u-side norm bound).
fn repair_v_side(diff: &CMatrix, masks: &[DifferenceMask], witness: &mut AdversaryWitness) {
    let size = witness.labels.len();
    let n = witness.n();
    let m = witness.m;
    for y in 0..size {
        let mut rows = CMatrix::zeros(size - 1, n * m);
        let mut gap = CVector::zeros(size - 1);
        let mut r = 0;
        for x in 0..size {
            if x == y {
                continue;
            }
            let mut acc = C64::new(0.0, 0.0);
            for (j, mask) in masks.iter().enumerate() {
                let w = mask.matrix[(x, y)];
                if w.norm() > 0.0 {
                    acc += w * witness.u[x][j].dotc(&witness.v[y][j]);
                    for k in 0..m {
                        rows[(r, j * m + k)] = w * witness.u[x][j][k].conj();
                    }
                }
            }
            gap[r] = diff[(x, y)] - acc;
            r += 1;
        }
        if let Ok(delta) = rows.svd(true, true).solve(&gap, 1e-12) {
            for j in 0..n {
                for k in 0..m {
                    witness.v[y][j][k] += delta[j * m + k];
                }
            }
        }
    }
}

/// Projected subgradient ascent on ‖Γ ∘ (ρ-σ)‖ subject to ‖Γ ∘ Δ_j‖ ≤ 1,
/// with the constraint enforced by rescaling (the constraints are positively
/// homogeneous in Γ).
fn ascend_certificate(
    labels: &[String],
    diff: &CMatrix,
    masks: &[DifferenceMask],
    config: &SolveConfig,
) -> AdversaryCertificate {
    let size = labels.len();
    let project = |gamma: &CMatrix| -> CMatrix {
        let worst = masks
            .iter()
            .map(|m| operator_norm(&hadamard(gamma, &m.matrix).expect("shapes agree")))
            .fold(0.0, f64::max);
        if worst > 1.0 {
            gamma.unscale(worst)
        } else {
            gamma.clone()
        }
    };
    let objective = |gamma: &CMatrix| -> (f64, f64, CVector) {
        let masked = hadamard(gamma, diff).expect("shapes agree");
        let (vals, vecs) = hermitian_eigen(&masked);
        let mut best_k = 0;
        for k in 0..vals.len() {
            if vals[k].abs() > vals[best_k].abs() {
                best_k = k;
            }
        }
        (
            vals[best_k].abs(),
            vals[best_k].signum(),
            vecs.column(best_k).clone_owned(),
        )
    };

    let mut candidates: Vec<CMatrix> = vec![project(&hermitize(diff))];
    for restart in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xC0FFEE ^ restart as u64);
        candidates.push(project(&hermitize(&random_matrix(size, size, &mut rng))));
    }

    let mut best_gamma = candidates[0].clone();
    let mut best_value = objective(&best_gamma).0;
    for start in candidates {
        let mut gamma = start;
        let (mut value, _, _) = objective(&gamma);
        let mut step = 0.5;
        for _ in 0..200 {
            let (_, sign, top) = objective(&gamma);
            let ascent = hermitize(
                &hadamard(&outer(&top, &top), &diff.map(|z| z.conj())).expect("shapes agree"),
            )
            .scale(sign);
            let mut eta = step;
            let mut improved = false;
            for _ in 0..30 {
                let trial = project(&(&gamma + ascent.scale(eta)));
                let (trial_value, _, _) = objective(&trial);
                if trial_value > value + 1e-14 {
                    gamma = trial;
                    let gain = trial_value - value;
                    value = trial_value;
                    step = (eta * 2.0).min(1.0);
                    improved = gain > config.tol * value.max(1.0);
                    break;
                }
                eta *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if value > best_value {
            best_value = value;
            best_gamma = gamma;
        }
    }
    let (value, _, vector) = objective(&best_gamma);
    AdversaryCertificate {
        labels: labels.to_vec(),
        gamma: best_gamma,
        vector,
        value,
    }
}

/// The exact hand witness and certificate for the single-bit conversion
/// (ρ all-ones, σ identity over labels {"0", "1"}); both sides meet at 1.
pub fn single_bit_witness() -> (AdversaryWitness, AdversaryCertificate) {
    let labels = vec!["0".to_string(), "1".to_string()];
    let one = || DVector::from_element(1, C64::new(1.0, 0.0));
    let side = vec![vec![one()], vec![one()]];
    let witness = AdversaryWitness::new(labels.clone(), side.clone(), side);
    let gamma = crate::matrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let inv = 1.0 / 2f64.sqrt();
    let vector = CVector::from_vec(vec![C64::new(inv, 0.0), C64::new(inv, 0.0)]);
    let certificate = AdversaryCertificate {
        labels,
        gamma,
        vector,
        value: 1.0,
    };
    (witness, certificate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{string_labels, GramMatrix};
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeMap;

    fn single_bit() -> (GramMatrix, GramMatrix) {
        let labels = string_labels(&["0", "1"]);
        (
            GramMatrix::all_ones(labels.clone()).unwrap(),
            GramMatrix::identity(labels).unwrap(),
        )
    }

    fn or2() -> (GramMatrix, GramMatrix) {
        let table: BTreeMap<String, String> = [("00", "0"), ("01", "1"), ("10", "1")]
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        GramMatrix::from_truth_table(&table).unwrap()
    }

    /// Exact hand witness for the OR₂ conversion with value √2.
    fn or2_witness() -> AdversaryWitness {
        let a = 2f64.powf(-0.25);
        let vec1 = |x: f64| DVector::from_element(1, C64::new(x, 0.0));
        let labels = string_labels(&["00", "01", "10"]);
        let u = vec![
            vec![vec1(a), vec1(a)],
            vec![vec1(0.0), vec1(1.0 / a)],
            vec![vec1(1.0 / a), vec1(0.0)],
        ];
        AdversaryWitness::new(labels, u.clone(), u)
    }

    #[test]
    fn masks_for_single_bit() {
        let masks = delta_masks(&string_labels(&["0", "1"]), 1).unwrap();
        assert_eq!(masks.len(), 1);
        let want = crate::matrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((&masks[0].matrix - want).norm() < 1e-15);
    }

    #[test]
    fn masks_for_or2_domain() {
        // ordering (00, 01, 10)
        let masks = delta_masks(&string_labels(&["00", "01", "10"]), 2).unwrap();
        let d1 = crate::matrix::from_real_rows(3, 3, &[0., 0., 1., 0., 0., 1., 1., 1., 0.]);
        let d2 = crate::matrix::from_real_rows(3, 3, &[0., 1., 0., 1., 0., 1., 0., 1., 0.]);
        assert!((&masks[0].matrix - d1).norm() < 1e-15);
        assert!((&masks[1].matrix - d2).norm() < 1e-15);
        for mask in &masks {
            for i in 0..3 {
                assert_eq!(mask.matrix[(i, i)], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn masks_reject_ragged_labels() {
        assert!(delta_masks(&string_labels(&["0", "10"]), 1).is_err());
    }

    #[test]
    fn single_bit_hand_witness_is_feasible_with_value_one() {
        let (rho, sigma) = single_bit();
        let (witness, _) = single_bit_witness();
        let report = verify_witness(&rho, &sigma, &witness).unwrap();
        assert!(report.feasible, "residual {}", report.residual);
        assert_abs_diff_eq!(report.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn witness_scaling_trades_sides() {
        let (rho, sigma) = single_bit();
        let (witness, _) = single_bit_witness();
        let scaled = witness.scaled(2.0);
        let report = verify_witness(&rho, &sigma, &scaled).unwrap();
        assert!(report.feasible);
        // u side carries 4, v side 1/4; the max-form value is 4
        assert_abs_diff_eq!(report.value, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_witness_feasible_for_equal_grams() {
        let labels = string_labels(&["0", "1"]);
        let rho = GramMatrix::all_ones(labels.clone()).unwrap();
        let witness = AdversaryWitness::zero(labels, 1, 1);
        let report = verify_witness(&rho, &rho, &witness).unwrap();
        assert!(report.feasible);
        assert_eq!(report.value, 0.0);
    }

    #[test]
    fn single_bit_certificate_is_tight() {
        let (rho, sigma) = single_bit();
        let (_, certificate) = single_bit_witness();
        let report = verify_certificate(&rho, &sigma, &certificate).unwrap();
        assert!(report.valid);
        assert_abs_diff_eq!(report.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_certificate_is_valid_and_vacuous() {
        let (rho, sigma) = single_bit();
        let certificate = AdversaryCertificate::zero(rho.labels().to_vec());
        let report = verify_certificate(&rho, &sigma, &certificate).unwrap();
        assert!(report.valid);
        assert_eq!(report.value, 0.0);
    }

    #[test]
    fn doubled_certificate_breaches_mask_constraint() {
        let (rho, sigma) = single_bit();
        let (_, mut certificate) = single_bit_witness();
        certificate.gamma = certificate.gamma.scale(2.0);
        let report = verify_certificate(&rho, &sigma, &certificate).unwrap();
        assert!(!report.valid);
        assert_eq!(report.violations.len(), 1);
        assert_abs_diff_eq!(report.violations[0].1, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn or2_hand_witness_attains_sqrt_two() {
        let (rho, sigma) = or2();
        let witness = or2_witness();
        let report = verify_witness(&rho, &sigma, &witness).unwrap();
        assert!(report.feasible, "residual {}", report.residual);
        assert_abs_diff_eq!(report.value, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn solver_closes_single_bit_to_five_percent() {
        let (rho, sigma) = single_bit();
        let report = solve_adversary(&rho, &sigma, &SolveConfig::default()).unwrap();
        assert!(report.converged);
        assert!(report.residual <= FEASIBILITY_TOL);
        assert!(report.gap <= 0.05, "gap {}", report.gap);
        assert_abs_diff_eq!(report.certificate.value, 1.0, epsilon = 1e-6);
        assert!(report.witness.value >= report.certificate.value - 1e-8);
    }

    #[test]
    fn solver_or2_value_within_ten_percent() {
        let (rho, sigma) = or2();
        let report = solve_adversary(&rho, &sigma, &SolveConfig::default()).unwrap();
        assert!(report.converged);
        let target = 2f64.sqrt();
        assert!(
            (report.witness.value - target).abs() <= 0.1 * target,
            "witness value {}",
            report.witness.value
        );
        // weak duality
        assert!(report.certificate.value <= report.witness.value + 1e-8);
    }

    #[test]
    fn solver_short_circuits_equal_grams() {
        let labels = string_labels(&["0", "1"]);
        let rho = GramMatrix::all_ones(labels).unwrap();
        let report = solve_adversary(&rho, &rho, &SolveConfig::default()).unwrap();
        assert_eq!(report.witness.value, 0.0);
        assert_eq!(report.certificate.value, 0.0);
        assert_eq!(report.gap, 0.0);
    }

    #[test]
    fn solver_rejects_oversized_instances() {
        let labels: Vec<String> = (0..33).map(|i| format!("{i:07b}")).collect();
        let rho = GramMatrix::all_ones(labels.clone()).unwrap();
        let sigma = GramMatrix::identity(labels).unwrap();
        assert!(matches!(
            solve_adversary(&rho, &sigma, &SolveConfig::default()),
            Err(Error::TooLarge(_))
        ));
    }
}
