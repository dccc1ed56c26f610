//! Masked fidelity and trace distance of Gram matrices, the Fuchs-van de
//! Graaf sandwich at sampled masks, and two-sided γ₂ bounds.

use advq::gram::{
    gamma2_lower, gamma2_upper, hadamard_distance, hadamard_fidelity, masked_metrics,
    string_labels, GramMatrix, OptimizerConfig,
};
use advq::matrix::{self, CVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let labels = string_labels(&["0", "1"]);
    let rho = GramMatrix::all_ones(labels.clone()).unwrap();
    let sigma = GramMatrix::identity(labels).unwrap();
    let config = OptimizerConfig::default();

    // the all-ones vs identity pair has closed-form extrema
    let fidelity = hadamard_fidelity(&rho, &sigma, &config).unwrap();
    let distance = hadamard_distance(&rho, &sigma, &config).unwrap();
    println!("masked fidelity  min_u F = {:.9} (analytic 1/sqrt(2) = {:.9})",
        fidelity.value, 1.0 / 2f64.sqrt());
    println!("masked distance  max_u D = {:.9} (analytic 1/2)", distance.value);
    println!("achieving mask |u_0| = {:.6}", fidelity.mask[0].norm());

    // the sandwich 1 - D <= F <= sqrt(1 - D^2) holds at every mask
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    println!("\nper-mask sandwich on random masks:");
    for _ in 0..4 {
        let u = matrix::random_unit_vector(2, &mut rng);
        let (f, d) = masked_metrics(&rho, &sigma, &u).unwrap();
        println!(
            "  1-D = {:.6} <= F = {:.6} <= sqrt(1-D^2) = {:.6}",
            1.0 - d,
            f,
            (1.0 - d * d).sqrt()
        );
    }

    // two-sided gamma_2 bounds for the antidiagonal
    let swap = matrix::from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let e = |k: usize| {
        let mut v = CVector::zeros(2);
        v[k] = C64::new(1.0, 0.0);
        v
    };
    let upper = gamma2_upper(&swap, &[e(0), e(1)], &[e(1), e(0)]).unwrap();
    let lower = gamma2_lower(&swap, &config);
    println!("\ngamma_2 of the antidiagonal: {:.6} <= gamma_2 <= {:.6}", lower.value, upper);

    // factorizing a Gram matrix recovers explicit states
    let labels = string_labels(&["00", "01", "10"]);
    let f = GramMatrix::new(
        labels,
        matrix::from_real_rows(3, 3, &[1., 0., 0., 0., 1., 1., 0., 1., 1.]),
    )
    .unwrap();
    let realization = f.factorize().unwrap();
    println!(
        "\ntarget Gram matrix factorizes into dimension {} with residual {:.3e}",
        realization.dim(),
        realization.residual(&f)
    );
}
