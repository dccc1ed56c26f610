//! Sweep the evolution time over multiples of the canonical τ = 15W/ε² and
//! watch the adiabatic error cross below ε: at factor ≥ 1 the gap-free bound
//! guarantees eps_ap ≤ ε, below it there is no guarantee.

use advq::convert::{ConversionInstance, RunConfig};
use advq::io::{load_problem, load_witness};
use advq::propagate::PropagationConfig;
use std::path::PathBuf;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn main() {
    let problem = load_problem(&fixture("singlebit.json")).unwrap();
    let witness =
        load_witness(&fixture("singlebit_witness.json"), &problem.labels, problem.n).unwrap();
    let epsilon = 0.5;
    let instance = ConversionInstance::new(
        &problem.rho,
        &problem.sigma,
        &witness,
        epsilon,
        problem.alphabet,
    )
    .unwrap();
    println!(
        "epsilon = {epsilon}, canonical tau = {:.2}",
        instance.time_scale()
    );
    println!("\nfactor     tau    x   eps_ap    overlap   guarantee");
    for factor in [0.125, 0.25, 0.5, 1.0, 2.0] {
        let config = RunConfig {
            tau_factor: factor,
            propagation: PropagationConfig {
                steps: 2048,
                ..PropagationConfig::default()
            },
            ..RunConfig::default()
        };
        for outcome in instance.run_all(&config).unwrap() {
            let eps_ap = outcome.trace.adiabatic_error().unwrap();
            println!(
                "{factor:>6}  {:>7.2}  {:>2}  {eps_ap:.6}  {:.6}   {}",
                outcome.tau,
                outcome.label,
                outcome.overlap,
                if factor >= 1.0 {
                    if eps_ap <= epsilon { "eps_ap <= eps (as promised)" } else { "VIOLATED" }
                } else {
                    "none"
                }
            );
        }
    }
}
