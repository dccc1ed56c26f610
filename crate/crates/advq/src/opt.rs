//! Multi-start projected gradient ascent over products of complex unit
//! spheres. Restarts are seeded deterministically and reduced by best value
//! with ties broken by lowest restart index, so parallel execution is
//! reproducible.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::matrix::{random_unit_vector, CVector};

pub(crate) struct SphereSearch<'a> {
    pub blocks: Vec<usize>,
    pub value: &'a (dyn Fn(&[CVector]) -> f64 + Sync),
    /// Euclidean ascent direction per block; numerical central differences
    /// are used when absent.
    pub gradient: Option<&'a (dyn Fn(&[CVector]) -> Vec<CVector> + Sync)>,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Extra deterministic starting points tried before the random ones.
    pub inits: Vec<Vec<CVector>>,
}

fn normalize_blocks(blocks: &mut [CVector]) {
    for b in blocks.iter_mut() {
        let n = b.norm();
        if n > 0.0 {
            *b /= C64::new(n, 0.0);
        }
    }
}

fn numerical_gradient(f: &(dyn Fn(&[CVector]) -> f64 + Sync), point: &[CVector]) -> Vec<CVector> {
    let h = 1e-6;
    let mut grad: Vec<CVector> = point.iter().map(|b| DVector::zeros(b.len())).collect();
    let mut probe: Vec<CVector> = point.to_vec();
    for (bi, block) in point.iter().enumerate() {
        for k in 0..block.len() {
            let mut diff = |delta: C64| -> f64 {
                probe[bi][k] = block[k] + delta;
                let v = f(&probe);
                probe[bi][k] = block[k];
                v
            };
            let re = (diff(C64::new(h, 0.0)) - diff(C64::new(-h, 0.0))) / (2.0 * h);
            let im = (diff(C64::new(0.0, h)) - diff(C64::new(0.0, -h))) / (2.0 * h);
            grad[bi][k] = C64::new(re, im);
        }
    }
    grad
}

fn tangent_project(point: &[CVector], grad: &[CVector]) -> Vec<CVector> {
    point
        .iter()
        .zip(grad.iter())
        .map(|(u, g)| {
            let radial = u.dotc(g).re;
            g - u.scale(radial)
        })
        .collect()
}

fn ascend(search: &SphereSearch, mut point: Vec<CVector>) -> (f64, Vec<CVector>) {
    normalize_blocks(&mut point);
    let f = search.value;
    let mut best = f(&point);
    let mut step = 0.5;
    let mut stalls = 0;
    for _ in 0..search.max_iters {
        let grad = match search.gradient {
            Some(g) => g(&point),
            None => numerical_gradient(f, &point),
        };
        let dir = tangent_project(&point, &grad);
        let dir_norm: f64 = dir.iter().map(|d| d.norm_squared()).sum::<f64>().sqrt();
        if dir_norm <= search.tol * best.abs().max(1.0) {
            break;
        }
        // backtracking line search on the sphere
        let mut eta = step;
        let mut accepted = false;
        for _ in 0..40 {
            let mut trial: Vec<CVector> = point
                .iter()
                .zip(dir.iter())
                .map(|(u, d)| u + d.scale(eta))
                .collect();
            normalize_blocks(&mut trial);
            let v = f(&trial);
            if v > best + 1e-4 * eta * dir_norm * dir_norm {
                point = trial;
                if (v - best).abs() <= search.tol * best.abs().max(1.0) {
                    stalls += 1;
                } else {
                    stalls = 0;
                }
                best = v;
                step = (eta * 2.0).min(1.0);
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted || stalls >= 3 {
            break;
        }
    }
    (best, point)
}

/// Run the multi-start search; returns the best value and the achieving
/// point, one unit vector per block.
pub(crate) fn maximize(search: &SphereSearch) -> (f64, Vec<CVector>) {
    let total = search.restarts.max(search.inits.len()).max(1);
    let mut outcomes: Vec<(usize, f64, Vec<CVector>)> = (0..total)
        .into_par_iter()
        .map(|k| {
            let start = if k < search.inits.len() {
                search.inits[k].clone()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(search.seed.wrapping_add(k as u64));
                search
                    .blocks
                    .iter()
                    .map(|&d| random_unit_vector(d, &mut rng))
                    .collect()
            };
            let (v, p) = ascend(search, start);
            (k, v, p)
        })
        .collect();
    outcomes.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    let (_, value, point) = outcomes.into_iter().next().expect("at least one restart");
    (value, point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{hermitize, random_matrix, CMatrix};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn finds_top_eigenvalue_of_hermitian_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a: CMatrix = hermitize(&random_matrix(5, 5, &mut rng));
        let quad = |p: &[CVector]| -> f64 {
            let u = &p[0];
            let n = u.norm_squared();
            (u.dotc(&(&a * u)).re) / n
        };
        let grad = |p: &[CVector]| -> Vec<CVector> {
            let u = &p[0];
            vec![(&a * u).scale(2.0)]
        };
        let search = SphereSearch {
            blocks: vec![5],
            value: &quad,
            gradient: Some(&grad),
            restarts: 8,
            max_iters: 500,
            tol: 1e-12,
            seed: 1,
            inits: vec![],
        };
        let (got, _) = maximize(&search);
        let top = a.symmetric_eigen().eigenvalues.max();
        assert_abs_diff_eq!(got, top, epsilon = 1e-8);
    }

    #[test]
    fn numerical_gradient_matches_analytic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a: CMatrix = hermitize(&random_matrix(4, 4, &mut rng));
        let quad = |p: &[CVector]| -> f64 { p[0].dotc(&(&a * &p[0])).re };
        let u = crate::matrix::random_unit_vector(4, &mut rng);
        let num = numerical_gradient(&quad, &[u.clone()]);
        let ana = (&a * &u).scale(2.0);
        assert!((&num[0] - &ana).norm() < 1e-6);
    }
}
