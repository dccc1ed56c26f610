//! The seven construction identities and inequalities of the dressed states,
//! evaluated on a grid: norm bounds, path distance, kernel residuals, phase
//! freeness of the transport, the derivative identity, and the minus-norm
//! cap.

use advq::convert::{uniform_grid, verify_identities};
use advq::io::{load_problem, load_witness};
use std::path::PathBuf;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn main() {
    for (problem_file, witness_file) in [
        ("singlebit.json", "singlebit_witness.json"),
        ("or2.json", "or2_witness.json"),
    ] {
        let problem = load_problem(&fixture(problem_file)).unwrap();
        let witness =
            load_witness(&fixture(witness_file), &problem.labels, problem.n).unwrap();
        let report = verify_identities(
            &problem.rho,
            &problem.sigma,
            &witness,
            problem.alphabet,
            &[0.1, 0.2, 0.3],
            &uniform_grid(101),
        )
        .unwrap();
        println!("{problem_file}: {} sample rows", report.rows.len());
        println!("  worst identity residual   {:.3e}", report.worst_residual());
        println!("  worst inequality margin   {:.3e}", report.worst_margin());
        println!(
            "  driver projector rank     {}..={}",
            report.driver_rank_min, report.driver_rank_max
        );
        println!("  pass: {}\n", report.pass);

        // one concrete row, spelled out
        let row = &report.rows[report.rows.len() / 2];
        println!(
            "  sample row (x={}, eps={}, s={:.2}):",
            row.label, row.epsilon, row.s
        );
        println!("    plus-norm margin      {:+.3e}", row.norm_bound_margin);
        println!("    path distance         {:.6} (cap {})", row.path_distance, row.epsilon);
        println!("    span residual         {:.3e}", row.span_residual);
        println!("    eigenvector residual  {:.3e}", row.eigvec_residual);
        println!("    transport phase       {:.3e}", row.phase_residual);
        println!("    derivative residual   {:.3e}", row.derivative_residual);
        println!("    minus-norm margin     {:+.3e}\n", row.minus_norm_margin);
    }
}
