//! End-to-end adiabatic state conversion on the bundled single-bit problem:
//! prepare |0,ρ_x⟩, evolve under H_x(t/τ, ε) = Λ - Π_x for τ = 15W/ε², and
//! read off the real overlap with the target |1,σ_x⟩.

use advq::convert::{effective_error, ConversionInstance, RunConfig};
use advq::io::{load_problem, load_witness};
use std::path::PathBuf;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn main() {
    let problem = load_problem(&fixture("singlebit.json")).unwrap();
    let witness = load_witness(&fixture("singlebit_witness.json"), &problem.labels, problem.n)
        .unwrap();
    let epsilon = 0.3;
    let instance = ConversionInstance::new(
        &problem.rho,
        &problem.sigma,
        &witness,
        epsilon,
        problem.alphabet,
    )
    .unwrap();
    println!(
        "witness value W = {}, eps = {epsilon} (effective error {}), tau = {:.4}",
        instance.witness_value(),
        effective_error(epsilon),
        instance.time_scale()
    );
    println!(
        "layout: total dimension {} = output {} + query {} x workspace {}",
        instance.layout().total_dim(),
        instance.layout().output_dim(),
        instance.layout().query_dim(),
        instance.layout().workspace_dim,
    );

    let outcomes = instance.run_all(&RunConfig::default()).unwrap();
    println!("\nlabel  overlap      floor        eps_ap    steps");
    for outcome in &outcomes {
        println!(
            "{:>5}  {:.8}  {:.8}  {:.6}  {}",
            outcome.label,
            outcome.overlap,
            outcome.overlap_floor,
            outcome.trace.adiabatic_error().unwrap(),
            outcome.trace.steps_used,
        );
    }

    // a few points of the followed trajectory
    let trace = &outcomes[0].trace;
    println!("\n    s     Re<path+|state>   eps_ap(s)");
    for k in (0..trace.s_grid.len()).step_by(trace.s_grid.len() / 10) {
        println!(
            "  {:.2}      {:+.6}       {:.6}",
            trace.s_grid[k],
            trace.overlaps.as_ref().unwrap()[k].re,
            trace.eps_ap.as_ref().unwrap()[k],
        );
    }
}
