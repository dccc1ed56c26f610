//! Gram matrices of labelled state families: validation, factorization back
//! into explicit vectors, two-sided γ₂-norm bounds, and the Hadamard-masked
//! fidelity / trace-distance extrema.

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matrix::{
    self, all_ones, hadamard, hermitian_eigen, identity, outer, random_unit_vector, CMatrix,
    CVector,
};
use crate::opt::{maximize, SphereSearch};

/// Tolerance for |G_xx - 1| and for the PSD eigenvalue floor.
pub const GRAM_TOL: f64 = 1e-10;
/// A state realization must reproduce its Gram matrix this closely.
pub const REALIZATION_TOL: f64 = 1e-9;
/// A γ₂ factorization must reproduce its target matrix this closely.
pub const FACTORIZATION_TOL: f64 = 1e-9;

fn check_labels(labels: &[String]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::BadLabels("no labels".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for l in labels {
        if l.is_empty() {
            return Err(Error::BadLabels("empty label".into()));
        }
        if !seen.insert(l) {
            return Err(Error::BadLabels(format!("duplicate label {l:?}")));
        }
    }
    Ok(())
}

/// Positive-semidefinite unit-diagonal matrix indexed by input strings.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    labels: Vec<String>,
    matrix: CMatrix,
}

impl GramMatrix {
    /// Validates finiteness, Hermiticity, PSD-ness (eigenvalues ≥ -1e-10) and
    /// unit diagonal (within 1e-10).
    pub fn new(labels: Vec<String>, matrix: CMatrix) -> Result<Self> {
        check_labels(&labels)?;
        if matrix.nrows() != labels.len() || matrix.ncols() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels vs {}x{} matrix",
                labels.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        matrix::check_finite(&matrix)?;
        matrix::check_hermitian(&matrix, matrix::HERMITIAN_TOL)?;
        for i in 0..labels.len() {
            let d = matrix[(i, i)];
            if (d - C64::new(1.0, 0.0)).norm() > GRAM_TOL {
                return Err(Error::NotUnitDiagonal {
                    index: i,
                    value: d.re,
                });
            }
        }
        let (vals, _) = hermitian_eigen(&matrix);
        let min_eigenvalue = vals.min();
        if min_eigenvalue < -GRAM_TOL {
            return Err(Error::NotPsd { min_eigenvalue });
        }
        Ok(Self { labels, matrix })
    }

    /// The all-ones Gram matrix (every state identical).
    pub fn all_ones(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, all_ones(n))
    }

    /// The identity Gram matrix (pairwise orthogonal states).
    pub fn identity(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, identity(n))
    }

    /// Expand a truth table into the conversion pair for computing the
    /// function: the all-ones matrix and F with F_{x,y} = [f(x) = f(y)].
    pub fn from_truth_table(table: &BTreeMap<String, String>) -> Result<(Self, Self)> {
        let labels: Vec<String> = table.keys().cloned().collect();
        check_labels(&labels)?;
        let len = labels[0].len();
        if labels.iter().any(|l| l.len() != len) {
            return Err(Error::BadLabels("inputs of unequal length".into()));
        }
        let n = labels.len();
        let f = CMatrix::from_fn(n, n, |r, c| {
            if table[&labels[r]] == table[&labels[c]] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Ok((
            Self::all_ones(labels.clone())?,
            Self::new(labels, f)?,
        ))
    }

    /// Seeded random Gram matrix realized by unit vectors in dimension `dim`.
    pub fn random(labels: Vec<String>, dim: usize, rng: &mut impl rand::Rng) -> Result<Self> {
        let vectors: Vec<CVector> = (0..labels.len())
            .map(|_| random_unit_vector(dim.max(1), rng))
            .collect();
        let n = labels.len();
        let mut g = CMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                g[(r, c)] = vectors[r].dotc(&vectors[c]);
            }
            g[(r, r)] = C64::new(1.0, 0.0);
        }
        Self::new(labels, matrix::hermitize(&g))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Same label set, in the same order.
    pub fn same_labels(&self, other: &Self) -> bool {
        self.labels == other.labels
    }

    /// Eigendecomposition-based realization: one vector per label, common
    /// dimension equal to the numerical rank (eigenvalue cutoff 1e-10).
    pub fn factorize(&self) -> Result<StateRealization> {
        let vectors = factorize_psd(&self.matrix, GRAM_TOL)?;
        Ok(StateRealization {
            labels: self.labels.clone(),
            vectors,
        })
    }
}

/// Factor a PSD matrix G into vectors with ⟨v_r|v_c⟩ = G_{rc}; the common
/// dimension is the number of eigenvalues above `cutoff`.
pub(crate) fn factorize_psd(g: &CMatrix, cutoff: f64) -> Result<Vec<CVector>> {
    let (vals, vecs) = hermitian_eigen(g);
    if vals.min() < -cutoff {
        return Err(Error::NotPsd {
            min_eigenvalue: vals.min(),
        });
    }
    let kept: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > cutoff).collect();
    let n = g.nrows();
    let d = kept.len().max(1);
    let mut out = vec![DVector::zeros(d); n];
    for (slot, &k) in kept.iter().enumerate() {
        let scale = vals[k].sqrt();
        for x in 0..n {
            out[x][slot] = vecs[(x, k)].conj() * C64::new(scale, 0.0);
        }
    }
    Ok(out)
}

/// Explicit unit vectors realizing a Gram matrix.
#[derive(Debug, Clone)]
pub struct StateRealization {
    pub labels: Vec<String>,
    pub vectors: Vec<CVector>,
}

impl StateRealization {
    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, |v| v.len())
    }

    /// Max entrywise deviation between pairwise inner products and `gram`.
    pub fn residual(&self, gram: &GramMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.vectors.len() {
            for c in 0..self.vectors.len() {
                let got = self.vectors[r].dotc(&self.vectors[c]);
                worst = worst.max((got - gram.matrix()[(r, c)]).norm());
            }
        }
        worst
    }
}

/// Settings for the multi-start sphere optimizers.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 400,
            tol: 1e-8,
            seed: 0,
        }
    }
}

/// Upper bound on γ₂(A) from a factorization A_{xy} = ⟨u_x|v_y⟩: the largest
/// row-vector norm squared. The factorization is checked to reproduce A
/// within 1e-9; the worst entry is reported otherwise.
pub fn gamma2_upper(a: &CMatrix, us: &[CVector], vs: &[CVector]) -> Result<f64> {
    if us.len() != a.nrows() || vs.len() != a.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "factorization has {} row / {} column vectors for a {}x{} matrix",
            us.len(),
            vs.len(),
            a.nrows(),
            a.ncols()
        )));
    }
    let mut worst = 0.0;
    let mut worst_pair = (0, 0);
    for (x, u) in us.iter().enumerate() {
        for (y, v) in vs.iter().enumerate() {
            let residual = (u.dotc(v) - a[(x, y)]).norm();
            if residual > worst {
                worst = residual;
                worst_pair = (x, y);
            }
        }
    }
    if worst > FACTORIZATION_TOL {
        return Err(Error::InfeasibleFactorization {
            residual: worst,
            x: worst_pair.0.to_string(),
            y: worst_pair.1.to_string(),
            tol: FACTORIZATION_TOL,
        });
    }
    let bound = us
        .iter()
        .chain(vs.iter())
        .map(|v| v.norm_squared())
        .fold(0.0, f64::max);
    Ok(bound)
}

/// Certified lower bound on γ₂: the best sampled / locally optimized value of
/// ‖A ∘ uv*‖_tr over unit u, v.
#[derive(Debug, Clone)]
pub struct Gamma2Lower {
    pub value: f64,
    pub left: CVector,
    pub right: CVector,
}

pub fn gamma2_lower(a: &CMatrix, config: &OptimizerConfig) -> Gamma2Lower {
    let (rows, cols) = a.shape();
    let value = |p: &[CVector]| -> f64 {
        let m = hadamard(a, &outer(&p[0], &p[1])).expect("shapes agree");
        matrix::trace_norm(&m)
    };
    let gradient = |p: &[CVector]| -> Vec<CVector> {
        let (u, v) = (&p[0], &p[1]);
        let m = hadamard(a, &outer(u, v)).expect("shapes agree");
        let svd = m.svd(true, true);
        let w = svd.u.as_ref().unwrap() * svd.v_t.as_ref().unwrap();
        let gu = w.zip_map(a, |wc, ac| wc * ac.conj()) * v;
        let gv = w.zip_map(a, |wc, ac| wc.conj() * ac).transpose() * u;
        vec![gu, gv]
    };
    // uniform start plus random restarts
    let uniform_u = CVector::from_element(rows, C64::new(1.0 / (rows as f64).sqrt(), 0.0));
    let uniform_v = CVector::from_element(cols, C64::new(1.0 / (cols as f64).sqrt(), 0.0));
    let search = SphereSearch {
        blocks: vec![rows, cols],
        value: &value,
        gradient: Some(&gradient),
        restarts: config.restarts,
        max_iters: config.max_iters,
        tol: config.tol,
        seed: config.seed,
        inits: vec![vec![uniform_u, uniform_v]],
    };
    let (value, mut point) = maximize(&search);
    let right = point.pop().unwrap();
    let left = point.pop().unwrap();
    Gamma2Lower { value, left, right }
}

/// Result of a Hadamard-mask optimization: the certified one-sided value and
/// the achieving unit vector.
#[derive(Debug, Clone)]
pub struct MaskedOptimum {
    pub value: f64,
    pub mask: CVector,
}

fn masked_density(g: &GramMatrix, u: &CVector) -> CMatrix {
    hadamard(g.matrix(), &outer(u, u)).expect("shapes agree")
}

fn check_pair(rho: &GramMatrix, sigma: &GramMatrix) -> Result<()> {
    if !rho.same_labels(sigma) {
        return Err(Error::BadLabels(
            "Gram matrices indexed by different label sets".into(),
        ));
    }
    Ok(())
}

/// Minimum over unit u of the fidelity of the two masked densities; the
/// returned value is achieved by `mask`, hence a certified upper bound on the
/// Hadamard product fidelity. Multi-start projected gradient descent.
pub fn hadamard_fidelity(
    rho: &GramMatrix,
    sigma: &GramMatrix,
    config: &OptimizerConfig,
) -> Result<MaskedOptimum> {
    check_pair(rho, sigma)?;
    let n = rho.len();
    let value = |p: &[CVector]| -> f64 {
        let u = &p[0];
        let nu = u.norm();
        let unit = u.unscale(nu);
        // minimization: ascend on the negated fidelity
        -matrix::fidelity(&masked_density(rho, &unit), &masked_density(sigma, &unit))
            .expect("same shape")
    };
    let uniform = CVector::from_element(n, C64::new(1.0 / (n as f64).sqrt(), 0.0));
    let search = SphereSearch {
        blocks: vec![n],
        value: &value,
        gradient: None,
        restarts: config.restarts,
        max_iters: config.max_iters,
        tol: config.tol,
        seed: config.seed,
        inits: vec![vec![uniform]],
    };
    let (best, mut point) = maximize(&search);
    Ok(MaskedOptimum {
        value: -best,
        mask: point.pop().unwrap(),
    })
}

/// Maximum over unit u of the trace distance of the two masked densities; a
/// certified lower bound on the Hadamard product distance. Multi-start
/// projected gradient ascent with an analytic subgradient.
pub fn hadamard_distance(
    rho: &GramMatrix,
    sigma: &GramMatrix,
    config: &OptimizerConfig,
) -> Result<MaskedOptimum> {
    check_pair(rho, sigma)?;
    let n = rho.len();
    let diff = rho.matrix() - sigma.matrix();
    let value = |p: &[CVector]| -> f64 {
        let u = &p[0];
        let unit = u.unscale(u.norm());
        let m = hadamard(&diff, &outer(&unit, &unit)).expect("shapes agree");
        let (vals, _) = hermitian_eigen(&m);
        0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()
    };
    let gradient = |p: &[CVector]| -> Vec<CVector> {
        let u = &p[0];
        let m = hadamard(&diff, &outer(u, u)).expect("shapes agree");
        let (vals, vecs) = hermitian_eigen(&m);
        let mut sign = CMatrix::zeros(n, n);
        for k in 0..n {
            if vals[k] != 0.0 {
                let col = vecs.column(k).clone_owned();
                sign += outer(&col, &col).scale(vals[k].signum());
            }
        }
        vec![sign.zip_map(&diff, |s, d| s * d.conj()) * u]
    };
    let uniform = CVector::from_element(n, C64::new(1.0 / (n as f64).sqrt(), 0.0));
    let search = SphereSearch {
        blocks: vec![n],
        value: &value,
        gradient: Some(&gradient),
        restarts: config.restarts,
        max_iters: config.max_iters,
        tol: config.tol,
        seed: config.seed,
        inits: vec![vec![uniform]],
    };
    let (best, mut point) = maximize(&search);
    Ok(MaskedOptimum {
        value: best,
        mask: point.pop().unwrap(),
    })
}

/// Fidelity and trace distance of the masked densities at one fixed u,
/// e.g. for sandwich checks between the two.
pub fn masked_metrics(rho: &GramMatrix, sigma: &GramMatrix, u: &CVector) -> Result<(f64, f64)> {
    check_pair(rho, sigma)?;
    let unit = u.unscale(u.norm());
    let a = masked_density(rho, &unit);
    let b = masked_density(sigma, &unit);
    Ok((matrix::fidelity(&a, &b)?, matrix::trace_distance(&a, &b)?))
}

pub fn string_labels<S: AsRef<str>>(labels: &[S]) -> Vec<String> {
    labels.iter().map(|s| s.as_ref().to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn labels2() -> Vec<String> {
        string_labels(&["0", "1"])
    }

    #[test]
    fn validation_rejects_non_unit_diagonal() {
        let m = matrix::from_real_rows(2, 2, &[1.0, 0.0, 0.0, 0.9]);
        assert!(matches!(
            GramMatrix::new(labels2(), m),
            Err(Error::NotUnitDiagonal { .. })
        ));
    }

    #[test]
    fn validation_rejects_indefinite() {
        let m = matrix::from_real_rows(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            GramMatrix::new(labels2(), m),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn factorize_all_ones_is_rank_one() {
        let g = GramMatrix::all_ones(labels2()).unwrap();
        let r = g.factorize().unwrap();
        assert_eq!(r.dim(), 1);
        assert!(r.residual(&g) < REALIZATION_TOL);
        assert!((r.vectors[0].dotc(&r.vectors[1]) - C64::new(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn factorize_identity_is_orthonormal() {
        let g = GramMatrix::identity(labels2()).unwrap();
        let r = g.factorize().unwrap();
        assert_eq!(r.dim(), 2);
        assert!(r.vectors[0].dotc(&r.vectors[1]).norm() < 1e-12);
    }

    #[test]
    fn factorize_or2_target_gram() {
        let table: BTreeMap<String, String> = [("00", "0"), ("01", "1"), ("10", "1")]
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let (_, f) = GramMatrix::from_truth_table(&table).unwrap();
        let r = f.factorize().unwrap();
        assert_eq!(r.dim(), 2);
        let i01 = f.index_of("01").unwrap();
        let i10 = f.index_of("10").unwrap();
        let overlap = r.vectors[i01].dotc(&r.vectors[i10]);
        assert!((overlap - C64::new(1.0, 0.0)).norm() < 1e-9);
        assert!(r.residual(&f) < REALIZATION_TOL);
    }

    #[test]
    fn random_grams_factorize_within_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for size in 2..=6 {
            let labels: Vec<String> = (0..size).map(|i| format!("{i}")).collect();
            let g = GramMatrix::random(labels, 3, &mut rng).unwrap();
            let r = g.factorize().unwrap();
            assert!(r.residual(&g) < REALIZATION_TOL, "size {size}");
        }
    }

    #[test]
    fn gamma2_upper_orthonormal_factorization() {
        let a = identity(3);
        let es: Vec<CVector> = (0..3)
            .map(|k| {
                let mut v = CVector::zeros(3);
                v[k] = C64::new(1.0, 0.0);
                v
            })
            .collect();
        let got = gamma2_upper(&a, &es, &es).unwrap();
        assert_abs_diff_eq!(got, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn gamma2_upper_rejects_infeasible_factorization() {
        let a = identity(2);
        let ones: Vec<CVector> = (0..2)
            .map(|_| CVector::from_element(1, C64::new(1.0, 0.0)))
            .collect();
        assert!(matches!(
            gamma2_upper(&a, &ones, &ones),
            Err(Error::InfeasibleFactorization { .. })
        ));
    }

    #[test]
    fn gamma2_lower_of_swap_reaches_one() {
        let a = matrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let got = gamma2_lower(&a, &OptimizerConfig::default());
        assert!(got.value >= 1.0 - 1e-7, "got {}", got.value);
        // ... and never exceeds the matching upper bound
        let u = vec![
            CVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
            CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]),
        ];
        let v = vec![u[1].clone(), u[0].clone()];
        let upper = gamma2_upper(&a, &u, &v).unwrap();
        assert!(got.value <= upper + 1e-8);
    }

    #[test]
    fn hadamard_fidelity_identical_grams_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = GramMatrix::random(labels2(), 2, &mut rng).unwrap();
        let cfg = OptimizerConfig {
            restarts: 8,
            ..OptimizerConfig::default()
        };
        let got = hadamard_fidelity(&g, &g, &cfg).unwrap();
        assert_abs_diff_eq!(got.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn hadamard_fidelity_ones_vs_identity() {
        let rho = GramMatrix::all_ones(labels2()).unwrap();
        let sigma = GramMatrix::identity(labels2()).unwrap();
        let got = hadamard_fidelity(&rho, &sigma, &OptimizerConfig::default()).unwrap();
        assert_abs_diff_eq!(got.value, 1.0 / 2f64.sqrt(), epsilon = 1e-6);
        // achieved by the balanced mask
        assert_abs_diff_eq!(got.mask[0].norm(), 1.0 / 2f64.sqrt(), epsilon = 1e-4);
    }

    #[test]
    fn hadamard_distance_ones_vs_identity() {
        let rho = GramMatrix::all_ones(labels2()).unwrap();
        let sigma = GramMatrix::identity(labels2()).unwrap();
        let got = hadamard_distance(&rho, &sigma, &OptimizerConfig::default()).unwrap();
        assert_abs_diff_eq!(got.value, 0.5, epsilon = 1e-7);
    }

    #[test]
    fn hadamard_distance_identical_grams_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = GramMatrix::random(labels2(), 2, &mut rng).unwrap();
        let cfg = OptimizerConfig {
            restarts: 4,
            ..OptimizerConfig::default()
        };
        let got = hadamard_distance(&g, &g, &cfg).unwrap();
        assert_abs_diff_eq!(got.value, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn fidelity_range_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = OptimizerConfig {
            restarts: 4,
            max_iters: 100,
            ..OptimizerConfig::default()
        };
        for _ in 0..3 {
            let rho = GramMatrix::random(labels2(), 2, &mut rng).unwrap();
            let sigma = GramMatrix::random(labels2(), 2, &mut rng).unwrap();
            let f = hadamard_fidelity(&rho, &sigma, &cfg).unwrap();
            assert!((-1e-9..=1.0 + 1e-9).contains(&f.value), "got {}", f.value);
        }
    }

    #[test]
    fn per_mask_fuchs_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let rho = GramMatrix::random(labels2(), 2, &mut rng).unwrap();
            let sigma = GramMatrix::random(labels2(), 2, &mut rng).unwrap();
            let u = random_unit_vector(2, &mut rng);
            let (f, d) = masked_metrics(&rho, &sigma, &u).unwrap();
            assert!(1.0 - d <= f + 1e-9);
            assert!(f <= (1.0 - d * d).max(0.0).sqrt() + 1e-9);
        }
    }
}
