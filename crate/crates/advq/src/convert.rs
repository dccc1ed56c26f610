//! Adiabatic state conversion driven by an adversary witness.
//!
//! Given a conversion pair (ρ, σ), a feasible witness with value W and a
//! target error ε, the instance assembles the direct-sum space
//! H_O ⊕ H_Q ⊗ H_W, the rotating path from |0,ρ_x⟩ to |1,σ_x⟩, the dressed
//! (witness-augmented) states around that path, the driver projector onto the
//! span of the dressed minus states, the oracle projector, and the resulting
//! Hamiltonian H_x(s,ε) = Λ(s,ε) - Π_x with time scale τ = 15 W/ε². The
//! followed eigenstate has eigenvalue zero throughout, so correctness rests
//! on a gap-free adiabatic bound: an explicit rank-one operator solves the
//! commutator equation ṖP = [H, X], and the size of X and ẊP bounds the
//! adiabatic error.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::{verify_witness, AdversaryWitness};
use crate::error::{Error, Result};
use crate::gram::{factorize_psd, GramMatrix};
use crate::matrix::{operator_norm, outer, span_projector, CMatrix, CVector, RANK_CUTOFF};
use crate::propagate::{propagate_columns, EvolutionTrace, PropagationConfig, UnitaryPath};
use crate::query::{parse_input, plus_minus_states};

/// Residual tolerance for the exact state identities.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Slack granted to the closed-form inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-10;

/// The gap-free sufficiency constant π√5 + π²/√2 ≈ 14.004: whenever
/// τ ≥ this · W/ε², the adiabatic error stays below ε.
pub fn gap_free_constant() -> f64 {
    PI * 5f64.sqrt() + PI * PI / 2f64.sqrt()
}

/// The user-facing conversion error 9ε² implied by a target ε.
pub fn effective_error(epsilon: f64) -> f64 {
    9.0 * epsilon * epsilon
}

/// τ = 15 W / ε².
pub fn time_scale(witness_value: f64, epsilon: f64) -> Result<f64> {
    if epsilon <= 0.0 || epsilon > 1.0 {
        return Err(Error::InvalidEpsilon(epsilon));
    }
    Ok(15.0 * witness_value / (epsilon * epsilon))
}

/// Index layout of H = H_O ⊕ H_Q ⊗ H_W. The output register is an ancilla
/// bit tensored with the shared realization space of ρ and σ; the query
/// register has one (alphabet+1)-dimensional block per coordinate.
#[derive(Debug, Clone)]
pub struct HilbertLayout {
    pub realization_dim: usize,
    pub n: usize,
    pub alphabet: usize,
    pub workspace_dim: usize,
}

impl HilbertLayout {
    pub fn output_dim(&self) -> usize {
        2 * self.realization_dim
    }

    pub fn query_dim(&self) -> usize {
        self.n * (self.alphabet + 1)
    }

    pub fn total_dim(&self) -> usize {
        self.output_dim() + self.query_dim() * self.workspace_dim
    }

    /// |bit⟩ ⊗ |k⟩ in the output block.
    pub fn output_index(&self, bit: usize, k: usize) -> usize {
        debug_assert!(bit < 2 && k < self.realization_dim);
        bit * self.realization_dim + k
    }

    /// |j⟩ ⊗ |slot⟩ ⊗ |w⟩ in the query ⊗ workspace block; slot 0 is the
    /// blank symbol, slot y+1 the alphabet symbol y.
    pub fn query_index(&self, j: usize, slot: usize, w: usize) -> usize {
        debug_assert!(j < self.n && slot <= self.alphabet && w < self.workspace_dim);
        self.output_dim() + (j * (self.alphabet + 1) + slot) * self.workspace_dim + w
    }
}

/// The dressed states around the path at one (x, s): the unnormalized
/// plus/minus pair, the normalized plus state, and its (s-independent) norm.
#[derive(Debug, Clone)]
pub struct DressedStates {
    pub plus: CVector,
    pub minus: CVector,
    pub plus_unit: CVector,
    pub plus_norm: f64,
}

/// Rank-one solution of the commutator equation ṖP = [H, X] together with
/// the projected derivative ẊP; their norms bound the adiabatic error.
#[derive(Debug, Clone)]
pub struct CommutatorSolution {
    pub x_op: CMatrix,
    pub xdot_p: CMatrix,
    /// ‖[H, X] - ṖP‖, verified ≤ 1e-8 at construction.
    pub residual: f64,
}

/// Max over a grid of the combined commutator-solution norms, against the
/// closed-form bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundScan {
    pub max_x_norm: f64,
    pub max_xdot_p_norm: f64,
    /// max_s (2‖X(s)‖ + ‖Ẋ(s)P(s)‖)
    pub max_combined: f64,
    /// (π√5 + π²/√2) · W/ε
    pub analytic_bound: f64,
    /// max_combined / ε — any τ at least this large keeps ε_AP ≤ ε.
    pub sufficient_tau: f64,
}

/// Reason a run was allowed to return its input unchanged: the witness value
/// is below ε/2, so the masked distance of ρ and σ is below ε/2 and the
/// initial Gram matrix already satisfies the coherent output condition.
#[derive(Debug, Clone, Serialize)]
pub struct SkipJustification {
    pub witness_value: f64,
    pub epsilon: f64,
    /// Fidelity floor 1 - ε/2 implied by the distance bound.
    pub fidelity_floor: f64,
    /// The coherent output threshold √(1-ε) it dominates.
    pub output_threshold: f64,
}

/// End-to-end outcome of one conversion run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub label: String,
    pub epsilon: f64,
    pub tau: f64,
    /// Re⟨1,σ_x|ψ_final⟩.
    pub overlap: f64,
    /// √(1-9ε²) (clamped at 0), the contracted floor for converted runs.
    pub overlap_floor: f64,
    pub final_state: CVector,
    pub trace: EvolutionTrace,
    pub skipped: Option<SkipJustification>,
}

/// Settings for a conversion run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Multiplies the canonical τ = 15 W/ε².
    pub tau_factor: f64,
    /// Bypass the formula entirely.
    pub tau_override: Option<f64>,
    pub propagation: PropagationConfig,
    /// Track the instantaneous reference state and ε_AP(s) alongside.
    pub track_ideal: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tau_factor: 1.0,
            tau_override: None,
            propagation: PropagationConfig::default(),
            track_ideal: true,
        }
    }
}

/// One conversion problem with its witness, realized in a concrete layout.
#[derive(Debug, Clone)]
pub struct ConversionInstance {
    labels: Vec<String>,
    inputs: Vec<Vec<usize>>,
    rho: GramMatrix,
    sigma: GramMatrix,
    witness: AdversaryWitness,
    epsilon: f64,
    layout: HilbertLayout,
    /// Initial vectors |0,ρ_x⟩.
    initial: Vec<CVector>,
    /// Target vectors |1,σ_x⟩.
    target: Vec<CVector>,
    /// Witness-dressing query components, already scaled: (ε/√W) Σ_j |j,x_j⁺⟩|u_{x,j}⟩.
    plus_query: Vec<CVector>,
    /// (√W/ε) Σ_j |j,x_j⁻⟩|v_{x,j}⟩ (scaled by ξ(s) at use).
    minus_query: Vec<CVector>,
    /// Cached oracle projectors Π_x.
    oracle_projectors: Vec<CMatrix>,
    plus_norms: Vec<f64>,
}

impl ConversionInstance {
    /// Build an instance after verifying the witness is feasible for (ρ, σ).
    pub fn new(
        rho: &GramMatrix,
        sigma: &GramMatrix,
        witness: &AdversaryWitness,
        epsilon: f64,
        alphabet: usize,
    ) -> Result<Self> {
        let report = verify_witness(rho, sigma, witness)?;
        if !report.feasible {
            return Err(Error::InfeasibleFactorization {
                residual: report.residual,
                x: report.worst_pair.0,
                y: report.worst_pair.1,
                tol: crate::adversary::FEASIBILITY_TOL,
            });
        }
        Self::new_unvalidated(rho, sigma, witness, epsilon, alphabet)
    }

    /// Build without the feasibility check, for analyses that deliberately
    /// use infeasible witnesses.
    pub fn new_unvalidated(
        rho: &GramMatrix,
        sigma: &GramMatrix,
        witness: &AdversaryWitness,
        epsilon: f64,
        alphabet: usize,
    ) -> Result<Self> {
        if epsilon <= 0.0 || epsilon > 1.0 {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        if !rho.same_labels(sigma) || rho.labels() != witness.labels.as_slice() {
            return Err(Error::BadLabels(
                "witness and Gram matrices indexed by different label sets".into(),
            ));
        }
        let labels = rho.labels().to_vec();
        let inputs: Vec<Vec<usize>> = labels
            .iter()
            .map(|l| parse_input(l, alphabet))
            .collect::<Result<_>>()?;
        let n = inputs[0].len();
        let size = labels.len();

        // Joint realization: ρ- and σ-vectors share one space, embedded
        // block-diagonally (their mutual overlaps are not determined by the
        // problem and the ancilla bit keeps the two families orthogonal).
        let mut joint = CMatrix::zeros(2 * size, 2 * size);
        for r in 0..size {
            for c in 0..size {
                joint[(r, c)] = rho.matrix()[(r, c)];
                joint[(size + r, size + c)] = sigma.matrix()[(r, c)];
            }
        }
        let joint_vectors = factorize_psd(&joint, crate::gram::GRAM_TOL)?;
        let d = joint_vectors[0].len();
        let layout = HilbertLayout {
            realization_dim: d,
            n,
            alphabet,
            workspace_dim: witness.m.max(1),
        };
        let total = layout.total_dim();

        let embed_output = |bit: usize, vec: &CVector| -> CVector {
            let mut out = CVector::zeros(total);
            for k in 0..d {
                out[layout.output_index(bit, k)] = vec[k];
            }
            out
        };
        let initial: Vec<CVector> = (0..size)
            .map(|x| embed_output(0, &joint_vectors[x]))
            .collect();
        let target: Vec<CVector> = (0..size)
            .map(|x| embed_output(1, &joint_vectors[size + x]))
            .collect();

        let w = witness.value;
        let plus_scale = if w > 0.0 { epsilon / w.sqrt() } else { 0.0 };
        let minus_scale = if w > 0.0 { w.sqrt() / epsilon } else { 0.0 };
        let dress = |side: &[Vec<CVector>], x: usize, minus: bool, scale: f64| -> Result<CVector> {
            let mut out = CVector::zeros(total);
            for (j, &symbol) in inputs[x].iter().enumerate() {
                let (p, m) = plus_minus_states(alphabet, symbol)?;
                let register = if minus { m } else { p };
                for slot in 0..=alphabet {
                    let amp = register[slot];
                    if amp.norm() > 0.0 {
                        for wk in 0..witness.m {
                            out[layout.query_index(j, slot, wk)] +=
                                amp * side[x][j][wk] * C64::new(scale, 0.0);
                        }
                    }
                }
            }
            Ok(out)
        };
        let plus_query: Vec<CVector> = (0..size)
            .map(|x| dress(&witness.u, x, false, plus_scale))
            .collect::<Result<_>>()?;
        let minus_query: Vec<CVector> = (0..size)
            .map(|x| dress(&witness.v, x, true, minus_scale))
            .collect::<Result<_>>()?;

        let oracle_projectors: Vec<CMatrix> = (0..size)
            .map(|x| {
                let mut proj = CMatrix::zeros(total, total);
                for (j, &symbol) in inputs[x].iter().enumerate() {
                    let (_, minus) = plus_minus_states(alphabet, symbol)?;
                    for a in 0..=alphabet {
                        for b in 0..=alphabet {
                            let amp = minus[a] * minus[b].conj();
                            if amp.norm() > 0.0 {
                                for wk in 0..layout.workspace_dim {
                                    proj[(
                                        layout.query_index(j, a, wk),
                                        layout.query_index(j, b, wk),
                                    )] += amp;
                                }
                            }
                        }
                    }
                }
                Ok(proj)
            })
            .collect::<Result<_>>()?;

        let plus_norms: Vec<f64> = (0..size)
            .map(|x| (1.0 + plus_query[x].norm_squared()).sqrt())
            .collect();

        Ok(Self {
            labels,
            inputs,
            rho: rho.clone(),
            sigma: sigma.clone(),
            witness: witness.clone(),
            epsilon,
            layout,
            initial,
            target,
            plus_query,
            minus_query,
            oracle_projectors,
            plus_norms,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Parsed symbol values of one input label.
    pub fn input_symbols(&self, x: usize) -> &[usize] {
        &self.inputs[x]
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn witness(&self) -> &AdversaryWitness {
        &self.witness
    }

    pub fn witness_value(&self) -> f64 {
        self.witness.value
    }

    pub fn gram_pair(&self) -> (&GramMatrix, &GramMatrix) {
        (&self.rho, &self.sigma)
    }

    pub fn rotation_angle(&self, s: f64) -> f64 {
        0.5 * PI * s
    }

    /// The mixing weight ξ(s) = sin(πs) in front of the minus dressing.
    pub fn mixing_weight(&self, s: f64) -> f64 {
        (PI * s).sin()
    }

    /// |0,ρ_x⟩.
    pub fn initial_state(&self, x: usize) -> CVector {
        self.initial[x].clone()
    }

    /// |1,σ_x⟩.
    pub fn target_state(&self, x: usize) -> CVector {
        self.target[x].clone()
    }

    /// The rotating orthonormal pair from |0,ρ_x⟩ to |1,σ_x⟩.
    pub fn path_states(&self, x: usize, s: f64) -> (CVector, CVector) {
        let theta = self.rotation_angle(s);
        let (c, sn) = (theta.cos(), theta.sin());
        let plus = self.initial[x].scale(c) + self.target[x].scale(sn);
        let minus = self.target[x].scale(c) - self.initial[x].scale(sn);
        (plus, minus)
    }

    /// The dressed states at (x, s): the plus state is the path state plus a
    /// fixed query component, the minus state mixes in ξ(s) of its own.
    pub fn dressed_states(&self, x: usize, s: f64) -> DressedStates {
        let (k_plus, k_minus) = self.path_states(x, s);
        let plus = &k_plus + &self.plus_query[x];
        let minus = &k_minus + self.minus_query[x].scale(self.mixing_weight(s));
        let plus_norm = self.plus_norms[x];
        let plus_unit = plus.unscale(plus_norm);
        DressedStates {
            plus,
            minus,
            plus_unit,
            plus_norm,
        }
    }

    /// Norm of the dressed plus state; independent of s.
    pub fn dressed_plus_norm(&self, x: usize) -> f64 {
        self.plus_norms[x]
    }

    /// Driver projector Λ(s,ε) onto the span of the dressed minus states.
    pub fn driver_projector(&self, s: f64) -> CMatrix {
        self.driver_projector_with_rank(s).0
    }

    /// Rank may legitimately drop when dressed minus columns coincide.
    pub fn driver_projector_with_rank(&self, s: f64) -> (CMatrix, usize) {
        let columns: Vec<CVector> = (0..self.labels.len())
            .map(|x| self.dressed_states(x, s).minus)
            .collect();
        span_projector(&columns, RANK_CUTOFF)
    }

    /// Oracle projector Π_x on the query⊗workspace block; ‖Π_x‖ = 1.
    pub fn oracle_projector(&self, x: usize) -> CMatrix {
        self.oracle_projectors[x].clone()
    }

    /// H_x(s,ε) = Λ(s,ε) - Π_x.
    pub fn hamiltonian(&self, x: usize, s: f64) -> CMatrix {
        self.driver_projector(s) - &self.oracle_projectors[x]
    }

    /// τ = 15 W/ε² for this instance.
    pub fn time_scale(&self) -> f64 {
        15.0 * self.witness.value / (self.epsilon * self.epsilon)
    }

    /// Rank-one spectral projector P(s) onto the dressed plus state.
    pub fn projector(&self, x: usize, s: f64) -> CMatrix {
        let d = self.dressed_states(x, s);
        outer(&d.plus_unit, &d.plus_unit)
    }

    /// Analytic Ṗ(s) = (π/2N)(|k⁻⟩⟨ψ⁺| + |ψ⁺⟩⟨k⁻|).
    pub fn projector_derivative(&self, x: usize, s: f64) -> CMatrix {
        let d = self.dressed_states(x, s);
        let (_, k_minus) = self.path_states(x, s);
        let coeff = 0.5 * PI / d.plus_norm;
        (outer(&k_minus, &d.plus_unit) + outer(&d.plus_unit, &k_minus)).scale(coeff)
    }

    /// ∂_s of the dressed minus state.
    fn dressed_minus_derivative(&self, x: usize, s: f64) -> CVector {
        let (k_plus, _) = self.path_states(x, s);
        let xi_dot = PI * (PI * s).cos();
        self.minus_query[x].scale(xi_dot) - k_plus.scale(0.5 * PI)
    }

    /// The commutator solution X = (π/2N)|Ψ⁻⟩⟨ψ⁺| and ẊP, with the defining
    /// equation ṖP = [H, X] verified to 1e-8.
    pub fn commutator_solution(&self, x: usize, s: f64) -> Result<CommutatorSolution> {
        let d = self.dressed_states(x, s);
        let coeff = 0.5 * PI / d.plus_norm;
        let x_op = outer(&d.minus, &d.plus_unit).scale(coeff);
        let xdot_p = outer(&self.dressed_minus_derivative(x, s), &d.plus_unit).scale(coeff);
        let h = self.hamiltonian(x, s);
        let p = outer(&d.plus_unit, &d.plus_unit);
        let p_dot = self.projector_derivative(x, s);
        let commutator = &h * &x_op - &x_op * &h;
        let residual = operator_norm(&(commutator - &p_dot * &p));
        if residual > IDENTITY_TOL {
            return Err(Error::CommutatorResidual(residual));
        }
        Ok(CommutatorSolution {
            x_op,
            xdot_p,
            residual,
        })
    }

    /// Scan 2‖X‖+‖ẊP‖ over a grid and compare with the closed-form bound
    /// (π√5 + π²/√2)·W/ε; sufficient_tau = max/ε never exceeds 15W/ε².
    pub fn adiabatic_bound_scan(&self, x: usize, s_grid: &[f64]) -> Result<BoundScan> {
        let mut max_x_norm: f64 = 0.0;
        let mut max_xdot: f64 = 0.0;
        let mut max_combined: f64 = 0.0;
        for &s in s_grid {
            let sol = self.commutator_solution(x, s)?;
            let nx = operator_norm(&sol.x_op);
            let nd = operator_norm(&sol.xdot_p);
            max_x_norm = max_x_norm.max(nx);
            max_xdot = max_xdot.max(nd);
            max_combined = max_combined.max(2.0 * nx + nd);
        }
        Ok(BoundScan {
            max_x_norm,
            max_xdot_p_norm: max_xdot,
            max_combined,
            analytic_bound: gap_free_constant() * self.witness.value / self.epsilon,
            sufficient_tau: max_combined / self.epsilon,
        })
    }

    /// Integrate the idealized transport evolution for the dressed plus
    /// projector of input x (zero eigenvalue, so no scalar phase).
    pub fn ideal_transport(&self, x: usize, config: &PropagationConfig) -> Result<UnitaryPath> {
        let p = |s: f64| self.projector(x, s);
        let p_dot = |s: f64| self.projector_derivative(x, s);
        crate::propagate::ideal_propagate(&p, &p_dot, self.time_scale(), None, config)
    }

    /// Run the conversion for one input. When the witness value is below
    /// ε/2 the prepared state is returned unchanged with the fidelity
    /// justification; otherwise the state is propagated under H_x(t/τ, ε)
    /// from t = 0 to τ and the real target overlap is reported.
    pub fn run(&self, x: usize, config: &RunConfig) -> Result<RunOutcome> {
        let epsilon = self.epsilon;
        let w = self.witness.value;
        let overlap_floor = (1.0 - 9.0 * epsilon * epsilon).max(0.0).sqrt();
        if w < 0.5 * epsilon {
            let state = self.initial_state(x);
            let overlap = self.target[x].dotc(&state).re;
            let trace = EvolutionTrace {
                tau: 0.0,
                s_grid: vec![0.0],
                states: vec![state.clone()],
                ideal_states: None,
                eps_ap: None,
                overlaps: None,
                progress: None,
                norm_drift: vec![(state.norm() - 1.0).abs()],
                steps_used: 0,
                richardson_gap: 0.0,
            };
            return Ok(RunOutcome {
                label: self.labels[x].clone(),
                epsilon,
                tau: 0.0,
                overlap,
                overlap_floor,
                final_state: state,
                trace,
                skipped: Some(SkipJustification {
                    witness_value: w,
                    epsilon,
                    fidelity_floor: 1.0 - 0.5 * epsilon,
                    output_threshold: (1.0 - epsilon).sqrt(),
                }),
            });
        }

        let tau = config
            .tau_override
            .unwrap_or_else(|| config.tau_factor * self.time_scale());
        let h = |s: f64| self.hamiltonian(x, s);
        let mut inits = vec![self.initial_state(x)];
        if config.track_ideal {
            inits.push(self.dressed_states(x, 0.0).plus_unit);
        }
        let columns = propagate_columns(&h, tau, &inits, &config.propagation)?;

        let states: Vec<CVector> = columns.columns.iter().map(|row| row[0].clone()).collect();
        let norm_drift: Vec<f64> = states.iter().map(|v| (v.norm() - 1.0).abs()).collect();
        let overlaps: Vec<C64> = columns
            .s_grid
            .iter()
            .zip(states.iter())
            .map(|(&s, state)| self.path_states(x, s).0.dotc(state))
            .collect();
        let (ideal_states, eps_ap) = if config.track_ideal {
            let ideal: Vec<CVector> = columns
                .s_grid
                .iter()
                .map(|&s| self.dressed_states(x, s).plus_unit)
                .collect();
            let eps: Vec<f64> = columns
                .columns
                .iter()
                .zip(ideal.iter())
                .map(|(row, psi)| (&row[1] - psi).norm())
                .collect();
            (Some(ideal), Some(eps))
        } else {
            (None, None)
        };
        let final_state = states.last().expect("non-empty grid").clone();
        let overlap = self.target[x].dotc(&final_state).re;
        Ok(RunOutcome {
            label: self.labels[x].clone(),
            epsilon,
            tau,
            overlap,
            overlap_floor,
            final_state,
            trace: EvolutionTrace {
                tau,
                s_grid: columns.s_grid,
                states,
                ideal_states,
                eps_ap,
                overlaps: Some(overlaps),
                progress: None,
                norm_drift,
                steps_used: columns.steps_used,
                richardson_gap: columns.richardson_gap,
            },
            skipped: None,
        })
    }

    /// Run every input, in parallel.
    pub fn run_all(&self, config: &RunConfig) -> Result<Vec<RunOutcome>> {
        (0..self.labels.len())
            .into_par_iter()
            .map(|x| self.run(x, config))
            .collect()
    }
}

/// One row of the state-identity suite at a sample point (x, s, ε).
#[derive(Debug, Clone, Serialize)]
pub struct IdentityChecks {
    pub label: String,
    pub epsilon: f64,
    pub s: f64,
    /// 1 + ε²/2 - N ≥ 0.
    pub norm_bound_margin: f64,
    /// 1 + ε² - N² ≥ 0 (the squared variant used in the derivation).
    pub norm_square_margin: f64,
    /// ‖k⁺ - ψ⁺‖, at most ε.
    pub path_distance: f64,
    /// ‖Λ ψ⁺‖.
    pub span_residual: f64,
    /// ‖H ψ⁺‖ (zero-eigenvalue residual).
    pub eigvec_residual: f64,
    /// |⟨ψ⁺|∂_s ψ⁺⟩| via the analytic derivative.
    pub phase_residual: f64,
    /// Same, with a centered finite difference (step 1e-5).
    pub phase_residual_fd: f64,
    /// ‖∂_s Ψ⁺ - (π/2) H Ψ⁻‖.
    pub derivative_residual: f64,
    /// 1 + W²/ε² - ‖Ψ⁻‖² ≥ 0.
    pub minus_norm_margin: f64,
}

impl IdentityChecks {
    pub fn passes(&self, epsilon: f64) -> bool {
        self.norm_bound_margin >= -INEQUALITY_SLACK
            && self.norm_square_margin >= -INEQUALITY_SLACK
            && self.path_distance <= epsilon + INEQUALITY_SLACK
            && self.span_residual <= IDENTITY_TOL
            && self.eigvec_residual <= IDENTITY_TOL
            && self.phase_residual <= IDENTITY_TOL
            && self.phase_residual_fd <= IDENTITY_TOL
            && self.derivative_residual <= IDENTITY_TOL
            && self.minus_norm_margin >= -INEQUALITY_SLACK
    }
}

/// Grid evaluation of the seven construction identities/inequalities.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub rows: Vec<IdentityChecks>,
    pub driver_rank_min: usize,
    pub driver_rank_max: usize,
    pub pass: bool,
}

impl IdentityReport {
    pub fn worst_residual(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| {
                [
                    r.span_residual,
                    r.eigvec_residual,
                    r.phase_residual,
                    r.derivative_residual,
                ]
            })
            .fold(0.0, f64::max)
    }

    pub fn worst_margin(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| {
                [
                    r.norm_bound_margin,
                    r.norm_square_margin,
                    r.minus_norm_margin,
                ]
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Evenly spaced grid on [0, 1] including both endpoints.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    let p = points.max(2);
    (0..p).map(|k| k as f64 / (p - 1) as f64).collect()
}

/// Evaluate the identity suite for every ε in `epsilons` on `s_grid`.
pub fn verify_identities(
    rho: &GramMatrix,
    sigma: &GramMatrix,
    witness: &AdversaryWitness,
    alphabet: usize,
    epsilons: &[f64],
    s_grid: &[f64],
) -> Result<IdentityReport> {
    let mut rows = Vec::new();
    let mut rank_min = usize::MAX;
    let mut rank_max = 0;
    let mut pass = true;
    for &epsilon in epsilons {
        let instance = ConversionInstance::new(rho, sigma, witness, epsilon, alphabet)?;
        let w = instance.witness_value();
        let minus_cap = 1.0 + w * w / (epsilon * epsilon);
        for &s in s_grid {
            let (lambda, rank) = instance.driver_projector_with_rank(s);
            rank_min = rank_min.min(rank);
            rank_max = rank_max.max(rank);
            for x in 0..instance.labels().len() {
                let d = instance.dressed_states(x, s);
                let (k_plus, k_minus) = instance.path_states(x, s);
                let h = &lambda - instance.oracle_projector(x);

                let fd = {
                    let step = 1e-5;
                    let unit = |s: f64| instance.dressed_states(x, s).plus_unit;
                    if s - step < 0.0 {
                        // second-order forward stencil at the left edge
                        (unit(s).scale(-3.0) + unit(s + step).scale(4.0) - unit(s + 2.0 * step))
                            .unscale(2.0 * step)
                    } else if s + step > 1.0 {
                        (unit(s).scale(3.0) - unit(s - step).scale(4.0) + unit(s - 2.0 * step))
                            .unscale(2.0 * step)
                    } else {
                        (unit(s + step) - unit(s - step)).unscale(2.0 * step)
                    }
                };
                let analytic = k_minus.scale(0.5 * PI / d.plus_norm);
                let derivative_target = (&h * &d.minus).scale(0.5 * PI);

                let row = IdentityChecks {
                    label: instance.labels()[x].clone(),
                    epsilon,
                    s,
                    norm_bound_margin: 1.0 + 0.5 * epsilon * epsilon - d.plus_norm,
                    norm_square_margin: 1.0 + epsilon * epsilon - d.plus_norm * d.plus_norm,
                    path_distance: (&k_plus - &d.plus_unit).norm(),
                    span_residual: (&lambda * &d.plus_unit).norm(),
                    eigvec_residual: (&h * &d.plus_unit).norm(),
                    phase_residual: d.plus_unit.dotc(&analytic).norm(),
                    phase_residual_fd: d.plus_unit.dotc(&fd).norm(),
                    derivative_residual: (k_minus.scale(0.5 * PI) - derivative_target).norm(),
                    minus_norm_margin: minus_cap - d.minus.norm_squared(),
                };
                pass &= row.passes(epsilon);
                rows.push(row);
            }
        }
    }
    Ok(IdentityReport {
        rows,
        driver_rank_min: rank_min,
        driver_rank_max: rank_max,
        pass,
    })
}
