//! Batch front end: ingest problems and witnesses, run verifications,
//! sweeps and end-to-end conversions, and emit machine-readable results.
//!
//! Every emitted number comes from a library operation; the commands only
//! orchestrate and format. Exit codes: 0 all checks passed, 1 a numeric
//! assertion failed, 2 schema violation, 3 infeasible witness, 4 integrator
//! non-convergence.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::adversary::{
    solve_adversary, verify_certificate, verify_witness, AdversaryCertificate, AdversaryWitness,
    SolveConfig,
};
use crate::convert::{
    effective_error, uniform_grid, verify_identities, ConversionInstance, RunConfig,
};
use crate::error::{Error, Result};
use crate::io::{
    load_certificate, load_problem, load_witness, save_certificate, save_witness, write_atomic,
    write_csv, Problem, RunManifest,
};
use crate::progress::{check_lower_bound, ProgressInstance};
use crate::propagate::PropagationConfig;
use crate::query::{check_oracle_equivalence, parse_input, OracleSpec};

#[derive(Parser, Debug)]
#[command(
    name = "advq",
    version,
    about = "Adversary bounds and adiabatic state conversion, batch style"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a witness file against a problem (exit 0 iff feasible)
    VerifyWitness {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Best-effort two-sided adversary solve with a duality-gap report
    SolveAdversary {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// End-to-end conversion runs; one overlap row per input and epsilon
    Run {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Target error (repeatable); default 0.3
        #[arg(long = "epsilon")]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        tau_factor: f64,
        /// Override the time scale entirely
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 4096)]
        steps: usize,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Evaluate the dressed-state identity suite on an s-grid
    VerifyProposition {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
        /// Target error (repeatable); default 0.1 0.2 0.3
        #[arg(long = "epsilon")]
        epsilons: Vec<f64>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Adiabatic-error sweep over multiples of the canonical time scale
    SweepTau {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long = "epsilon")]
        epsilons: Vec<f64>,
        /// Time-scale multipliers (repeatable); default 0.25 0.5 1 2
        #[arg(long = "tau-factor")]
        tau_factors: Vec<f64>,
        #[arg(long, default_value_t = 4096)]
        steps: usize,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Progress-function trace and the certified query-time lower bound
    LowerBound {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        witness: Option<PathBuf>,
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long = "epsilon")]
        epsilons: Vec<f64>,
        /// Time samples for the progress grid
        #[arg(long, default_value_t = 4097)]
        samples: usize,
        #[arg(long, default_value_t = 4096)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Residuals of the unitary oracle against the Hamiltonian exponential
    OracleCheck {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::InfeasibleFactorization { .. } => 3,
        Error::IntegratorNonConvergence { .. } | Error::UnitarityDrift(_) => 4,
        Error::Schema(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::BadLabels(_)
        | Error::ShapeMismatch(_)
        | Error::NonFinite { .. }
        | Error::NotHermitian { .. }
        | Error::NotPsd { .. }
        | Error::NotUnitDiagonal { .. }
        | Error::SymbolOutOfRange { .. }
        | Error::InvalidEpsilon(_)
        | Error::TooLarge(_) => 2,
        _ => 1,
    }
}

/// Run a parsed command line; returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::VerifyWitness { problem, witness } => cmd_verify_witness(&problem, &witness),
        Command::SolveAdversary {
            problem,
            seed,
            out_dir,
        } => cmd_solve_adversary(&problem, seed, out_dir.as_deref()),
        Command::Run {
            problem,
            witness,
            epsilons,
            tau_factor,
            tau,
            steps,
            grid,
            seed,
            out_dir,
        } => {
            let manifest = RunManifest {
                problem,
                witness,
                epsilons: defaulted(epsilons, &[0.3]),
                tau_factor,
                tau_override: tau,
                steps,
                grid,
                seed,
                out_dir,
            };
            cmd_run(&manifest)
        }
        Command::VerifyProposition {
            problem,
            witness,
            epsilons,
            grid,
            seed,
            out_dir,
        } => cmd_verify_proposition(
            &problem,
            witness.as_deref(),
            &defaulted(epsilons, &[0.1, 0.2, 0.3]),
            grid,
            seed,
            out_dir.as_deref(),
        ),
        Command::SweepTau {
            problem,
            witness,
            epsilons,
            tau_factors,
            steps,
            grid,
            seed,
            out_dir,
        } => cmd_sweep_tau(
            &problem,
            witness.as_deref(),
            &defaulted(epsilons, &[0.3]),
            &defaulted(tau_factors, &[0.25, 0.5, 1.0, 2.0]),
            steps,
            grid,
            seed,
            out_dir.as_deref(),
        ),
        Command::LowerBound {
            problem,
            witness,
            certificate,
            epsilons,
            samples,
            steps,
            seed,
            out_dir,
        } => cmd_lower_bound(
            &problem,
            witness.as_deref(),
            certificate.as_deref(),
            &defaulted(epsilons, &[0.3]),
            samples,
            steps,
            seed,
            out_dir.as_deref(),
        ),
        Command::OracleCheck { problem, out_dir } => {
            cmd_oracle_check(&problem, out_dir.as_deref())
        }
    }
}

fn defaulted(values: Vec<f64>, fallback: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        fallback.to_vec()
    } else {
        values
    }
}

/// Load a witness file, or fall back to the heuristic solver.
fn obtain_witness(
    problem: &Problem,
    witness_path: Option<&Path>,
    seed: u64,
) -> Result<AdversaryWitness> {
    match witness_path {
        Some(path) => load_witness(path, &problem.labels, problem.n),
        None => {
            let report = solve_adversary(
                &problem.rho,
                &problem.sigma,
                &SolveConfig {
                    seed,
                    ..SolveConfig::default()
                },
            )?;
            if !report.converged {
                return Err(Error::InfeasibleFactorization {
                    residual: report.residual,
                    x: "solver".into(),
                    y: "witness".into(),
                    tol: crate::adversary::FEASIBILITY_TOL,
                });
            }
            println!(
                "solved witness: value {:.6}, duality gap {:.2}%",
                report.witness.value,
                100.0 * report.gap
            );
            Ok(report.witness)
        }
    }
}

fn cmd_verify_witness(problem_path: &Path, witness_path: &Path) -> Result<bool> {
    let problem = load_problem(problem_path)?;
    let witness = load_witness(witness_path, &problem.labels, problem.n)?;
    let report = verify_witness(&problem.rho, &problem.sigma, &witness)?;
    println!(
        "feasible: {} (residual {:.3e} at pair ({}, {}))",
        report.feasible, report.residual, report.worst_pair.0, report.worst_pair.1
    );
    println!("witness value: {:.9}", report.value);
    if !report.feasible {
        return Err(Error::InfeasibleFactorization {
            residual: report.residual,
            x: report.worst_pair.0,
            y: report.worst_pair.1,
            tol: crate::adversary::FEASIBILITY_TOL,
        });
    }
    Ok(true)
}

#[derive(Serialize)]
struct SolveSummary {
    witness_value: f64,
    certificate_value: f64,
    gap: f64,
    residual: f64,
    converged: bool,
}

fn cmd_solve_adversary(problem_path: &Path, seed: u64, out_dir: Option<&Path>) -> Result<bool> {
    let problem = load_problem(problem_path)?;
    let config = SolveConfig {
        seed,
        ..SolveConfig::default()
    };
    let report = solve_adversary(&problem.rho, &problem.sigma, &config)?;
    let cert_report = verify_certificate(&problem.rho, &problem.sigma, &report.certificate)?;
    println!(
        "witness value (upper): {:.9}  residual {:.3e}",
        report.witness.value, report.residual
    );
    println!(
        "certificate value (lower): {:.9}  valid: {}",
        report.certificate.value, cert_report.valid
    );
    println!("duality gap: {:.4}%", 100.0 * report.gap);
    if let Some(dir) = out_dir {
        save_witness(&dir.join("witness.json"), &report.witness)?;
        save_certificate(&dir.join("certificate.json"), &report.certificate)?;
        let summary = SolveSummary {
            witness_value: report.witness.value,
            certificate_value: report.certificate.value,
            gap: report.gap,
            residual: report.residual,
            converged: report.converged,
        };
        write_atomic(
            &dir.join("solve_report.json"),
            serde_json::to_string_pretty(&summary)?.as_bytes(),
        )?;
    }
    Ok(report.converged && cert_report.valid)
}

fn trace_csv_rows(trace: &crate::propagate::EvolutionTrace) -> Vec<Vec<String>> {
    let empty = String::new();
    (0..trace.s_grid.len())
        .map(|k| {
            let overlap = trace.overlaps.as_ref().map(|o| o[k]);
            vec![
                format!("{:.8}", trace.s_grid[k]),
                format!("{:.8}", trace.s_grid[k] * trace.tau),
                overlap.map_or(empty.clone(), |z| format!("{:.12}", z.re)),
                overlap.map_or(empty.clone(), |z| format!("{:.12}", z.im)),
                trace
                    .eps_ap
                    .as_ref()
                    .map_or(empty.clone(), |e| format!("{:.12}", e[k])),
                format!("{:.3e}", trace.norm_drift[k]),
            ]
        })
        .collect()
}

#[derive(Serialize)]
struct RunRow {
    label: String,
    epsilon: f64,
    effective_error: f64,
    tau: f64,
    overlap: f64,
    overlap_floor: f64,
    eps_ap: Option<f64>,
    skipped: bool,
    passed: bool,
}

fn cmd_run(manifest: &RunManifest) -> Result<bool> {
    manifest.validate()?;
    let problem = load_problem(&manifest.problem)?;
    let witness = obtain_witness(&problem, manifest.witness.as_deref(), manifest.seed)?;
    let mut all_pass = true;
    let mut rows = Vec::new();
    for &epsilon in &manifest.epsilons {
        let instance = ConversionInstance::new(
            &problem.rho,
            &problem.sigma,
            &witness,
            epsilon,
            problem.alphabet,
        )?;
        let config = RunConfig {
            tau_factor: manifest.tau_factor,
            tau_override: manifest.tau_override,
            propagation: PropagationConfig {
                steps: manifest.steps,
                grid_points: manifest.grid,
                ..PropagationConfig::default()
            },
            track_ideal: true,
        };
        let outcomes = instance.run_all(&config)?;
        println!(
            "epsilon {epsilon} (effective error {:.4}): tau = {:.4}",
            effective_error(epsilon),
            outcomes[0].tau
        );
        for outcome in &outcomes {
            let passed = outcome.skipped.is_some() || outcome.overlap >= outcome.overlap_floor;
            all_pass &= passed;
            let eps_ap = outcome.trace.adiabatic_error();
            match &outcome.skipped {
                Some(skip) => println!(
                    "  x = {}: skipped (witness value {:.4} < eps/2; fidelity floor {:.4} > threshold {:.4})",
                    outcome.label, skip.witness_value, skip.fidelity_floor, skip.output_threshold
                ),
                None => println!(
                    "  x = {}: overlap {:.6} (floor {:.6}) eps_ap {:.6} [{}]",
                    outcome.label,
                    outcome.overlap,
                    outcome.overlap_floor,
                    eps_ap.unwrap_or(f64::NAN),
                    if passed { "ok" } else { "FAIL" }
                ),
            }
            if let Some(dir) = &manifest.out_dir {
                let name = format!("trace_{}_{}.csv", outcome.label, epsilon);
                write_csv(
                    &dir.join(name),
                    "s,t,overlap_re,overlap_im,eps_ap,norm_drift",
                    &trace_csv_rows(&outcome.trace),
                )?;
            }
            rows.push(RunRow {
                label: outcome.label.clone(),
                epsilon,
                effective_error: effective_error(epsilon),
                tau: outcome.tau,
                overlap: outcome.overlap,
                overlap_floor: outcome.overlap_floor,
                eps_ap,
                skipped: outcome.skipped.is_some(),
                passed,
            });
        }
    }
    if let Some(dir) = &manifest.out_dir {
        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.label.clone(),
                    format!("{}", r.epsilon),
                    format!("{:.6}", r.tau),
                    format!("{:.12}", r.overlap),
                    format!("{:.12}", r.overlap_floor),
                    r.eps_ap.map_or(String::new(), |e| format!("{:.12}", e)),
                    format!("{}", r.skipped),
                    format!("{}", r.passed),
                ]
            })
            .collect();
        write_csv(
            &dir.join("overlaps.csv"),
            "label,epsilon,tau,overlap,overlap_floor,eps_ap,skipped,passed",
            &csv_rows,
        )?;
        write_atomic(
            &dir.join("run.json"),
            serde_json::to_string_pretty(&rows)?.as_bytes(),
        )?;
    }
    Ok(all_pass)
}

fn cmd_verify_proposition(
    problem_path: &Path,
    witness_path: Option<&Path>,
    epsilons: &[f64],
    grid: usize,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<bool> {
    let problem = load_problem(problem_path)?;
    let witness = obtain_witness(&problem, witness_path, seed)?;
    let report = verify_identities(
        &problem.rho,
        &problem.sigma,
        &witness,
        problem.alphabet,
        epsilons,
        &uniform_grid(grid),
    )?;
    println!(
        "{} sample rows; worst identity residual {:.3e}; worst inequality margin {:.3e}",
        report.rows.len(),
        report.worst_residual(),
        report.worst_margin()
    );
    println!(
        "driver projector rank range: {}..={}",
        report.driver_rank_min, report.driver_rank_max
    );
    println!("pass: {}", report.pass);
    if let Some(dir) = out_dir {
        write_atomic(
            &dir.join("proposition_report.json"),
            serde_json::to_string_pretty(&report)?.as_bytes(),
        )?;
    }
    Ok(report.pass)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep_tau(
    problem_path: &Path,
    witness_path: Option<&Path>,
    epsilons: &[f64],
    tau_factors: &[f64],
    steps: usize,
    grid: usize,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<bool> {
    let problem = load_problem(problem_path)?;
    let witness = obtain_witness(&problem, witness_path, seed)?;
    let mut all_pass = true;
    let mut csv_rows = Vec::new();
    println!("tau_factor,label,epsilon,tau,eps_ap,overlap");
    for &epsilon in epsilons {
        let instance = ConversionInstance::new(
            &problem.rho,
            &problem.sigma,
            &witness,
            epsilon,
            problem.alphabet,
        )?;
        for &factor in tau_factors {
            let config = RunConfig {
                tau_factor: factor,
                tau_override: None,
                propagation: PropagationConfig {
                    steps,
                    grid_points: grid,
                    ..PropagationConfig::default()
                },
                track_ideal: true,
            };
            for outcome in instance.run_all(&config)? {
                let eps_ap = outcome.trace.adiabatic_error().unwrap_or(f64::NAN);
                // at or above the canonical time scale the adiabatic error
                // must stay below epsilon
                let passed = outcome.skipped.is_some() || factor < 1.0 || eps_ap <= epsilon;
                all_pass &= passed;
                println!(
                    "{factor},{},{epsilon},{:.4},{:.6},{:.6}",
                    outcome.label, outcome.tau, eps_ap, outcome.overlap
                );
                csv_rows.push(vec![
                    format!("{factor}"),
                    outcome.label.clone(),
                    format!("{epsilon}"),
                    format!("{:.8}", outcome.tau),
                    format!("{:.12}", eps_ap),
                    format!("{:.12}", outcome.overlap),
                ]);
            }
        }
    }
    if let Some(dir) = out_dir {
        write_csv(
            &dir.join("sweep.csv"),
            "tau_factor,label,epsilon,tau,eps_ap,overlap",
            &csv_rows,
        )?;
    }
    Ok(all_pass)
}

#[allow(clippy::too_many_arguments)]
fn cmd_lower_bound(
    problem_path: &Path,
    witness_path: Option<&Path>,
    certificate_path: Option<&Path>,
    epsilons: &[f64],
    samples: usize,
    steps: usize,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<bool> {
    let problem = load_problem(problem_path)?;
    let witness = obtain_witness(&problem, witness_path, seed)?;
    let certificate: AdversaryCertificate = match certificate_path {
        Some(path) => load_certificate(path, &problem.labels)?,
        None => {
            let report = solve_adversary(
                &problem.rho,
                &problem.sigma,
                &SolveConfig {
                    seed,
                    ..SolveConfig::default()
                },
            )?;
            report.certificate
        }
    };
    let cert_report = verify_certificate(&problem.rho, &problem.sigma, &certificate)?;
    if !cert_report.valid {
        let (j, norm) = cert_report.violations[0];
        return Err(Error::CertificateViolation { j, norm });
    }
    let epsilon = epsilons[0];
    let instance = ConversionInstance::new(
        &problem.rho,
        &problem.sigma,
        &witness,
        epsilon,
        problem.alphabet,
    )?;
    let ensemble = ProgressInstance::from_conversion(&instance, &certificate)?;
    // W-sampling accuracy, not eigenstate tracking, sets the tolerance here
    let config = PropagationConfig {
        steps,
        convergence_tol: 1e-5,
        ..PropagationConfig::default()
    };
    let trace = ensemble.simulate(samples, &config)?;
    let report = check_lower_bound(&problem.rho, &problem.sigma, &certificate, trace.horizon())?;
    let derivative_ok = trace.max_abs_derivative() <= trace.bound + 1e-6;
    let endpoint_ok = trace.endpoint_change() <= trace.bound * trace.horizon() + 1e-6;
    println!(
        "progress: W(0) = {:.6}, W(T) = {:.6}, max |dW/dt| = {:.6} (bound {:.6})",
        trace.w.first().unwrap(),
        trace.w.last().unwrap(),
        trace.max_abs_derivative(),
        trace.bound
    );
    println!(
        "lower bound: lhs {:.6} ≤ rhs {:.6}; implied T ≥ {:.6} (simulated T = {:.4})",
        report.lhs, report.rhs, report.implied_t, trace.horizon()
    );
    if let Some(dir) = out_dir {
        let rows: Vec<Vec<String>> = (0..trace.t_grid.len())
            .map(|k| {
                vec![
                    format!("{:.8}", trace.t_grid[k]),
                    format!("{:.12}", trace.w[k]),
                    format!("{:.12}", trace.dw_dt[k]),
                    format!("{:.12}", trace.bound),
                ]
            })
            .collect();
        write_csv(&dir.join("progress.csv"), "t,w,dwdt,bound", &rows)?;
        write_atomic(
            &dir.join("bound_report.json"),
            serde_json::to_string_pretty(&report)?.as_bytes(),
        )?;
    }
    Ok(derivative_ok && endpoint_ok && report.consistent)
}

fn cmd_oracle_check(problem_path: &Path, out_dir: Option<&Path>) -> Result<bool> {
    let problem = load_problem(problem_path)?;
    let spec = OracleSpec::standard(problem.n, problem.alphabet);
    let mut rows = Vec::new();
    let mut all_pass = true;
    println!("label,residual");
    for label in &problem.labels {
        let x = parse_input(label, problem.alphabet)?;
        let residual = check_oracle_equivalence(&x, &spec);
        all_pass &= residual <= 1e-10;
        println!("{label},{residual:.3e}");
        rows.push(vec![label.clone(), format!("{residual:.3e}")]);
    }
    if let Some(dir) = out_dir {
        write_csv(&dir.join("oracle_check.csv"), "label,residual", &rows)?;
    }
    Ok(all_pass)
}
