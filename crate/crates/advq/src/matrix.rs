//! Dense complex linear algebra: matrix norms, Hadamard calculus, Hermitian
//! spectral functions, and density-matrix fidelity / trace distance.
//!
//! Everything works on `nalgebra` dynamic matrices over `Complex64`. Problem
//! sizes stay well below ~200 dimensions, so dense double precision is used
//! throughout.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Hermiticity is asserted at this tolerance (max entrywise |A - A†|).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues above this (negative) floor count as nonnegative.
pub const PSD_TOL: f64 = -1e-10;
/// Relative singular-value cutoff for numerical rank decisions.
pub const RANK_CUTOFF: f64 = 1e-10;

fn check_same_shape(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Every entry must be finite.
pub fn check_finite(a: &CMatrix) -> Result<()> {
    for col in 0..a.ncols() {
        for row in 0..a.nrows() {
            let z = a[(row, col)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row, col });
            }
        }
    }
    Ok(())
}

/// Max entrywise |A - A†|.
pub fn hermiticity_residual(a: &CMatrix) -> f64 {
    let adj = a.adjoint();
    (a - adj)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn check_hermitian(a: &CMatrix, tol: f64) -> Result<()> {
    let residual = hermiticity_residual(a);
    if residual > tol {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

/// (A + A†)/2.
pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// tr(A†B).
pub fn inner_product(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    check_same_shape(a, b)?;
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    Ok(acc)
}

/// Entrywise product (A ∘ B).
pub fn hadamard(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_same_shape(a, b)?;
    Ok(a.zip_map(b, |x, y| x * y))
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().max()
}

/// Sum of singular values.
pub fn trace_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().iter().sum()
}

/// |u⟩⟨v|.
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    let mut m = CMatrix::zeros(u.len(), v.len());
    for r in 0..u.len() {
        for c in 0..v.len() {
            m[(r, c)] = u[r] * v[c].conj();
        }
    }
    m
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized first;
/// callers that care should `check_hermitian` beforehand.
pub fn hermitian_eigen(a: &CMatrix) -> (DVector<f64>, CMatrix) {
    let se = hermitize(a).symmetric_eigen();
    (se.eigenvalues, se.eigenvectors)
}

/// Apply a scalar function to the spectrum of a Hermitian matrix:
/// f(A) = V f(diag) V†.
pub fn spectral_map(a: &CMatrix, f: impl Fn(f64) -> C64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(a);
    let n = a.nrows();
    let mut scaled = vecs.clone();
    for c in 0..n {
        let fv = f(vals[c]);
        for r in 0..n {
            scaled[(r, c)] *= fv;
        }
    }
    scaled * vecs.adjoint()
}

/// exp(-i t H) for Hermitian H, exactly unitary up to eigensolver roundoff.
pub fn exp_minus_i(h: &CMatrix, t: f64) -> CMatrix {
    spectral_map(h, |lambda| C64::new(0.0, -lambda * t).exp())
}

/// PSD square root; eigenvalues below zero are clamped.
pub fn psd_sqrt(a: &CMatrix) -> CMatrix {
    spectral_map(a, |lambda| C64::new(lambda.max(0.0).sqrt(), 0.0))
}

/// Trace distance ½‖ρ - σ‖_tr of two Hermitian matrices, computed as half the
/// sum of absolute eigenvalues of the difference (exact for Hermitian input).
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    check_same_shape(rho, sigma)?;
    let (vals, _) = hermitian_eigen(&(rho - sigma));
    Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
}

/// Fidelity tr√(√ρ σ √ρ) = ‖√ρ √σ‖_tr of two density matrices.
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    check_same_shape(rho, sigma)?;
    let product = psd_sqrt(rho) * psd_sqrt(sigma);
    Ok(trace_norm(&product))
}

/// Orthogonal projector onto the column span of `columns`, via SVD with a
/// relative rank cutoff. Returns the projector and the numerical rank.
pub fn span_projector(columns: &[CVector], cutoff: f64) -> (CMatrix, usize) {
    assert!(!columns.is_empty(), "span of no columns");
    let dim = columns[0].len();
    let mut stacked = CMatrix::zeros(dim, columns.len());
    for (c, col) in columns.iter().enumerate() {
        stacked.set_column(c, col);
    }
    let svd = stacked.svd(true, false);
    let u = svd.u.as_ref().expect("svd requested u");
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|s| **s > cutoff * smax && **s > 0.0)
        .count();
    let mut proj = CMatrix::zeros(dim, dim);
    for k in 0..rank {
        let col = u.column(k).clone_owned();
        proj += outer(&col, &col);
    }
    (proj, rank)
}

/// Standard-normal complex vector, normalized to the unit sphere.
pub fn random_unit_vector(dim: usize, rng: &mut impl Rng) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let n = v.norm();
        if n > 1e-8 {
            return v.unscale(n);
        }
    }
}

/// Random complex matrix with standard-normal entries.
pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Convenience constructor from real row-major data.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols);
    CMatrix::from_row_slice(
        rows,
        cols,
        &data.iter().map(|x| C64::new(*x, 0.0)).collect::<Vec<_>>(),
    )
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn all_ones(n: usize) -> CMatrix {
    CMatrix::from_element(n, n, C64::new(1.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn swap2() -> CMatrix {
        from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    #[test]
    fn inner_product_of_identities() {
        let i2 = identity(2);
        let got = inner_product(&i2, &i2).unwrap();
        assert_abs_diff_eq!(got.re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn inner_product_frobenius_self() {
        let x = swap2();
        let got = inner_product(&x, &x).unwrap();
        assert_abs_diff_eq!(got.re, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn inner_product_masked_rank_one_vs_ones() {
        // gamma ∘ vv* against the all-ones matrix, v = (1,1)/√2
        let gamma = swap2();
        let v = CVector::from_vec(vec![
            C64::new(1.0 / 2f64.sqrt(), 0.0),
            C64::new(1.0 / 2f64.sqrt(), 0.0),
        ]);
        let masked = hadamard(&gamma, &outer(&v, &v)).unwrap();
        let got = inner_product(&masked, &all_ones(2)).unwrap();
        assert_abs_diff_eq!(got.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn inner_product_rejects_shape_mismatch() {
        assert!(inner_product(&identity(2), &identity(3)).is_err());
    }

    #[test]
    fn hadamard_ones_is_identity_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_matrix(3, 3, &mut rng);
        let got = hadamard(&a, &all_ones(3)).unwrap();
        assert!((&got - &a).norm() < 1e-15);
    }

    #[test]
    fn hadamard_disjoint_supports_vanish() {
        let got = hadamard(&identity(2), &swap2()).unwrap();
        assert!(got.norm() < 1e-15);
    }

    #[test]
    fn hadamard_zero_one_idempotence() {
        let hollow = &all_ones(2) - identity(2);
        let got = hadamard(&hollow, &hollow).unwrap();
        assert!((&got - &hollow).norm() < 1e-15);
    }

    #[test]
    fn norms_of_identity() {
        let i3 = identity(3);
        assert_abs_diff_eq!(operator_norm(&i3), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(trace_norm(&i3), 3.0, epsilon = 1e-13);
    }

    #[test]
    fn norms_of_swap() {
        let x = swap2();
        assert_abs_diff_eq!(operator_norm(&x), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(trace_norm(&x), 2.0, epsilon = 1e-13);
    }

    #[test]
    fn norms_of_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = random_unit_vector(4, &mut rng);
        let v = random_unit_vector(4, &mut rng);
        let m = outer(&u, &v);
        assert_abs_diff_eq!(operator_norm(&m), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace_norm(&m), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn exp_of_projector_is_reflection() {
        // exp(-iπP) = 1 - 2P for a projector P
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unit_vector(3, &mut rng);
        let p = outer(&u, &u);
        let got = exp_minus_i(&p, std::f64::consts::PI);
        let want = identity(3) - p.scale(2.0);
        assert!((got - want).norm() < 1e-13);
    }

    #[test]
    fn spectral_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = hermitize(&random_matrix(4, 4, &mut rng));
        let sq = psd_sqrt(&(&a * &a));
        // √(A²) = |A|, so its trace equals the trace norm of A
        assert_abs_diff_eq!(sq.trace().re, trace_norm(&a), epsilon = 1e-10);
        let u = exp_minus_i(&a, 0.7);
        assert!((u.adjoint() * &u - identity(4)).norm() < 1e-13);
    }

    #[test]
    fn trace_distance_and_fidelity_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_unit_vector(3, &mut rng);
        let rho = outer(&u, &u);
        assert_abs_diff_eq!(trace_distance(&rho, &rho).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-10);
        let v = random_unit_vector(3, &mut rng);
        let sigma = outer(&v, &v);
        let d = trace_distance(&rho, &sigma).unwrap();
        let f = fidelity(&rho, &sigma).unwrap();
        // pure-state Fuchs-van de Graaf is an equality: F = √(1-D²)
        assert_abs_diff_eq!(f, (1.0 - d * d).max(0.0).sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn span_projector_rank_and_idempotence() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_unit_vector(5, &mut rng);
        let b = random_unit_vector(5, &mut rng);
        let dup = a.clone();
        let (p, rank) = span_projector(&[a.clone(), b.clone(), dup], RANK_CUTOFF);
        assert_eq!(rank, 2);
        assert!((&p * &p - &p).norm() < 1e-12);
        assert!(hermiticity_residual(&p) < 1e-12);
        assert!((&p * &a - &a).norm() < 1e-12);
        assert!((&p * &b - &b).norm() < 1e-12);
    }
}
