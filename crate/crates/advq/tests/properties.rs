//! Property tests for the algebraic invariants: Hadamard-calculus identities,
//! norm inequalities, Gram factorization round trips, and the witness
//! scaling law.

use advq::adversary::AdversaryWitness;
use advq::gram::{gamma2_lower, gamma2_upper, masked_metrics, GramMatrix, OptimizerConfig};
use advq::matrix::{self, CMatrix, CVector};
use nalgebra::DVector;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn complex_entry() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im))
}

fn complex_matrix(size: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec(complex_entry(), size * size)
        .prop_map(move |data| CMatrix::from_vec(size, size, data))
}

fn matrix_triple() -> impl Strategy<Value = (CMatrix, CMatrix, CMatrix)> {
    (2usize..=5).prop_flat_map(|size| {
        (complex_matrix(size), complex_matrix(size), complex_matrix(size))
    })
}

/// SVD-based factorization A_{xy} = ⟨u_x|v_y⟩ (feasible for any A).
fn svd_factorization(a: &CMatrix) -> (Vec<CVector>, Vec<CVector>) {
    let size = a.nrows();
    let svd = a.clone().svd(true, true);
    let (u, vt) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let us = (0..size)
        .map(|x| CVector::from_fn(size, |k, _| u[(x, k)].conj() * svd.singular_values[k].sqrt()))
        .collect();
    let vs = (0..size)
        .map(|y| CVector::from_fn(size, |k, _| vt[(k, y)] * svd.singular_values[k].sqrt()))
        .collect();
    (us, vs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hadamard_adjoint_identity((a, b, c) in matrix_triple()) {
        let lhs = matrix::inner_product(&matrix::hadamard(&a, &c).unwrap(), &b).unwrap();
        let rhs = matrix::inner_product(&a, &matrix::hadamard(&b, &c.map(|z| z.conj())).unwrap())
            .unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn inner_product_bounded_by_norm_pair((a, b, _) in matrix_triple()) {
        let ip = matrix::inner_product(&a, &b).unwrap();
        prop_assert!(ip.norm() <= matrix::trace_norm(&a) * matrix::operator_norm(&b) + 1e-9);
    }

    #[test]
    fn masked_norm_bounded_by_factorization(size in 2usize..=5, seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = matrix::random_matrix(size, size, &mut rng);
        let b = matrix::random_matrix(size, size, &mut rng);
        let (us, vs) = svd_factorization(&a);
        let upper = gamma2_upper(&a, &us, &vs).unwrap();
        let masked = matrix::operator_norm(&matrix::hadamard(&a, &b).unwrap());
        prop_assert!(masked <= upper * matrix::operator_norm(&b) + 1e-9);
    }

    #[test]
    fn fuchs_sandwich_per_mask(size in 2usize..=5, seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<String> = (0..size).map(|i| format!("{i}")).collect();
        let rho = GramMatrix::random(labels.clone(), 3, &mut rng).unwrap();
        let sigma = GramMatrix::random(labels, 3, &mut rng).unwrap();
        let u = matrix::random_unit_vector(size, &mut rng);
        let (f, d) = masked_metrics(&rho, &sigma, &u).unwrap();
        prop_assert!(1.0 - d <= f + 1e-9);
        prop_assert!(f <= (1.0 - d * d).max(0.0).sqrt() + 1e-9);
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&f));
        prop_assert!((-1e-9..=1.0 + 1e-9).contains(&d));
    }

    #[test]
    fn gram_factorization_round_trip(size in 2usize..=6,
                                     dim in 1usize..=4,
                                     seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<String> = (0..size).map(|i| format!("{i}")).collect();
        let gram = GramMatrix::random(labels, dim, &mut rng).unwrap();
        let realization = gram.factorize().unwrap();
        prop_assert!(realization.residual(&gram) <= 1e-9);
        prop_assert!(realization.dim() <= dim.min(size));
    }

    #[test]
    fn witness_scaling_law(t in 0.3f64..3.0, seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = vec!["0".to_string(), "1".to_string()];
        let side = |rng: &mut ChaCha8Rng| -> Vec<Vec<CVector>> {
            (0..2)
                .map(|_| vec![DVector::from_fn(2, |_, _| C64::new(
                    rand::Rng::gen_range(rng, -1.0..1.0),
                    rand::Rng::gen_range(rng, -1.0..1.0),
                ))])
                .collect()
        };
        let witness = AdversaryWitness::new(labels, side(&mut rng), side(&mut rng));
        let row_max = |vectors: &[Vec<CVector>]| -> f64 {
            vectors
                .iter()
                .map(|per_j| per_j.iter().map(|v| v.norm_squared()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let su = row_max(&witness.u);
        let sv = row_max(&witness.v);
        let scaled = witness.scaled(t);
        let want = (t * t * su).max(sv / (t * t));
        prop_assert!((scaled.value - want).abs() <= 1e-12 * want.max(1.0));
    }
}

proptest! {
    // the sampled lower bound involves a multi-start optimizer, so fewer cases
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn gamma2_lower_never_exceeds_an_upper_bound(size in 2usize..=4, seed in 0u64..1_000_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = matrix::random_matrix(size, size, &mut rng);
        let (us, vs) = svd_factorization(&a);
        let upper = gamma2_upper(&a, &us, &vs).unwrap();
        let config = OptimizerConfig { restarts: 4, max_iters: 120, tol: 1e-8, seed };
        let lower = gamma2_lower(&a, &config);
        prop_assert!(lower.value <= upper + 1e-8, "lower {} upper {}", lower.value, upper);
    }
}
