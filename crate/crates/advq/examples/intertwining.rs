//! The idealized transport evolution generated by [Ṗ, P] carries the range
//! of P(0) onto the range of P(s); the residual ‖U_A(s)P(0) - P(s)U_A(s)‖
//! measures only integration error, shrinking at second order in the step.

use advq::convert::ConversionInstance;
use advq::io::{load_problem, load_witness};
use advq::propagate::{intertwining_residual, PropagationConfig};
use std::path::PathBuf;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn main() {
    let problem = load_problem(&fixture("singlebit.json")).unwrap();
    let witness =
        load_witness(&fixture("singlebit_witness.json"), &problem.labels, problem.n).unwrap();
    let instance = ConversionInstance::new(
        &problem.rho,
        &problem.sigma,
        &witness,
        0.3,
        problem.alphabet,
    )
    .unwrap();
    let x = 0;
    let p = |s: f64| instance.projector(x, s);

    println!("steps   intertwining residual   ratio");
    let mut previous: Option<f64> = None;
    for steps in [512usize, 1024, 2048, 4096] {
        let config = PropagationConfig {
            steps,
            grid_points: 101,
            ..PropagationConfig::default()
        };
        let path = instance.ideal_transport(x, &config).unwrap();
        let residual = intertwining_residual(&path, &p);
        match previous {
            Some(prev) => println!("{steps:>5}   {residual:.6e}           x{:.2}", prev / residual),
            None => println!("{steps:>5}   {residual:.6e}"),
        }
        previous = Some(residual);
    }

    // the transported dressed state follows the instantaneous one exactly
    let config = PropagationConfig {
        steps: 4096,
        grid_points: 11,
        ..PropagationConfig::default()
    };
    let path = instance.ideal_transport(x, &config).unwrap();
    let start = instance.dressed_states(x, 0.0).plus_unit;
    println!("\n   s    ||U_A(s) psi+(0) - psi+(s)||");
    for (k, &s) in path.s_grid.iter().enumerate() {
        let moved = &path.unitaries[k] * &start;
        let dev = (moved - instance.dressed_states(x, s).plus_unit).norm();
        println!("  {s:.1}   {dev:.3e}");
    }
}
