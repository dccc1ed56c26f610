//! Time-dependent Schrödinger integration with midpoint-exponential steps.
//!
//! Each step applies exp(-i τ Δs H(s_mid)) through a Hermitian
//! eigendecomposition, so it is exactly unitary; accuracy is then a pure
//! time-discretization question handled by Richardson step doubling. The same
//! stepping drives the idealized transport evolution generated by [Ṗ, P].

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matrix::{exp_minus_i, hermitize, identity, CMatrix, CVector};

#[derive(Debug, Clone)]
pub struct PropagationConfig {
    /// Base number of midpoint steps over s ∈ [0, 1].
    pub steps: usize,
    /// Richardson target: max state difference between consecutive doublings.
    pub convergence_tol: f64,
    /// Doublings attempted before giving up (0 disables the check).
    pub max_doublings: usize,
    /// Number of recorded grid points (including both endpoints).
    pub grid_points: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            steps: 4096,
            convergence_tol: 1e-6,
            max_doublings: 6,
            grid_points: 101,
        }
    }
}

impl PropagationConfig {
    pub fn with_steps(steps: usize) -> Self {
        Self {
            steps,
            ..Self::default()
        }
    }
}

/// Time-gridded record of one propagated trajectory.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub tau: f64,
    /// Increasing values in [0, 1], aligned with integrator step boundaries.
    pub s_grid: Vec<f64>,
    /// Physical state at each grid point.
    pub states: Vec<CVector>,
    /// Instantaneous reference states, when the caller tracks them.
    pub ideal_states: Option<Vec<CVector>>,
    /// Adiabatic error ‖U_τ(s)ψ⁺(0) - ψ⁺(s)‖ per grid point.
    pub eps_ap: Option<Vec<f64>>,
    /// Tracked overlap ⟨reference(s)|state(s)⟩ per grid point.
    pub overlaps: Option<Vec<C64>>,
    /// Optional progress-function samples attached by downstream analyses.
    pub progress: Option<Vec<f64>>,
    /// |‖state‖ - 1| per grid point.
    pub norm_drift: Vec<f64>,
    pub steps_used: usize,
    /// Max state difference against the previous doubling (NaN when the
    /// Richardson check is disabled).
    pub richardson_gap: f64,
}

impl EvolutionTrace {
    /// ε_AP at the final grid point, when ideal states were tracked.
    pub fn adiabatic_error(&self) -> Option<f64> {
        self.eps_ap.as_ref().and_then(|e| e.last().copied())
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm_drift.iter().copied().fold(0.0, f64::max)
    }
}

/// Several trajectories propagated in lockstep under one Hamiltonian.
#[derive(Debug, Clone)]
pub struct ColumnsResult {
    pub s_grid: Vec<f64>,
    /// columns[g][c] = state of initial vector c at grid point g.
    pub columns: Vec<Vec<CVector>>,
    pub steps_used: usize,
    pub richardson_gap: f64,
}

fn grid_indices(steps: usize, grid_points: usize) -> Vec<usize> {
    let g = grid_points.max(2).min(steps + 1);
    (0..g)
        .map(|k| ((k as f64) * (steps as f64) / ((g - 1) as f64)).round() as usize)
        .collect()
}

fn run_columns(
    h: &(dyn Fn(f64) -> CMatrix + Sync),
    tau: f64,
    inits: &[CVector],
    steps: usize,
    record_at: &[usize],
) -> Vec<Vec<CVector>> {
    let ds = 1.0 / steps as f64;
    let mut current: Vec<CVector> = inits.to_vec();
    let mut recorded = Vec::with_capacity(record_at.len());
    let mut next_record = 0;
    if record_at.first() == Some(&0) {
        recorded.push(current.clone());
        next_record = 1;
    }
    for k in 0..steps {
        let mid = (k as f64 + 0.5) * ds;
        let step = exp_minus_i(&h(mid), tau * ds);
        for col in current.iter_mut() {
            *col = &step * &*col;
        }
        if next_record < record_at.len() && record_at[next_record] == k + 1 {
            recorded.push(current.clone());
            next_record += 1;
        }
    }
    recorded
}

fn columns_gap(a: &[Vec<CVector>], b: &[Vec<CVector>]) -> f64 {
    a.iter()
        .zip(b.iter())
        .flat_map(|(ra, rb)| ra.iter().zip(rb.iter()).map(|(x, y)| (x - y).norm()))
        .fold(0.0, f64::max)
}

/// Propagate the initial vectors under i ∂_s ψ = τ H(s) ψ, recording a grid
/// of intermediate states. The result is recomputed at doubled step counts
/// until consecutive refinements agree to `convergence_tol`.
pub fn propagate_columns(
    h: &(dyn Fn(f64) -> CMatrix + Sync),
    tau: f64,
    inits: &[CVector],
    config: &PropagationConfig,
) -> Result<ColumnsResult> {
    assert!(config.steps >= 2, "need at least two steps");
    let base_idx = grid_indices(config.steps, config.grid_points);
    let s_grid: Vec<f64> = base_idx
        .iter()
        .map(|&i| i as f64 / config.steps as f64)
        .collect();

    let mut steps = config.steps;
    let mut idx = base_idx;
    let mut prev = run_columns(h, tau, inits, steps, &idx);
    if config.max_doublings == 0 {
        return Ok(ColumnsResult {
            s_grid,
            columns: prev,
            steps_used: steps,
            richardson_gap: f64::NAN,
        });
    }
    let mut gap = f64::INFINITY;
    for _ in 0..config.max_doublings {
        steps *= 2;
        idx.iter_mut().for_each(|i| *i *= 2);
        let fine = run_columns(h, tau, inits, steps, &idx);
        gap = columns_gap(&prev, &fine);
        if gap < config.convergence_tol {
            return Ok(ColumnsResult {
                s_grid,
                columns: fine,
                steps_used: steps,
                richardson_gap: gap,
            });
        }
        prev = fine;
    }
    let coarse_trace = trace_from_single(tau, &s_grid, &prev, steps / 2, gap);
    let fine_trace = trace_from_single(tau, &s_grid, &prev, steps, gap);
    Err(Error::IntegratorNonConvergence {
        gap,
        tol: config.convergence_tol,
        doublings: config.max_doublings,
        coarse: Box::new(coarse_trace),
        fine: Box::new(fine_trace),
    })
}

fn trace_from_single(
    tau: f64,
    s_grid: &[f64],
    columns: &[Vec<CVector>],
    steps: usize,
    gap: f64,
) -> EvolutionTrace {
    let states: Vec<CVector> = columns.iter().map(|row| row[0].clone()).collect();
    let norm_drift = states.iter().map(|s| (s.norm() - 1.0).abs()).collect();
    EvolutionTrace {
        tau,
        s_grid: s_grid.to_vec(),
        states,
        ideal_states: None,
        eps_ap: None,
        overlaps: None,
        progress: None,
        norm_drift,
        steps_used: steps,
        richardson_gap: gap,
    }
}

/// Propagate a single normalized state; see [`propagate_columns`].
pub fn propagate(
    h: &(dyn Fn(f64) -> CMatrix + Sync),
    tau: f64,
    psi0: &CVector,
    config: &PropagationConfig,
) -> Result<EvolutionTrace> {
    let result = propagate_columns(h, tau, std::slice::from_ref(psi0), config)?;
    Ok(trace_from_single(
        tau,
        &result.s_grid,
        &result.columns,
        result.steps_used,
        result.richardson_gap,
    ))
}

/// Idealized transport evolution on the grid.
#[derive(Debug, Clone)]
pub struct UnitaryPath {
    pub s_grid: Vec<f64>,
    pub unitaries: Vec<CMatrix>,
    pub steps_used: usize,
    pub max_unitarity_drift: f64,
}

/// Integrate ∂_s U = [Ṗ(s), P(s)] U by midpoint exponentials of the
/// anti-Hermitian generator. A nonzero eigenvalue trace contributes only the
/// scalar phase exp(-i τ ∫λ), accumulated by the trapezoid rule.
///
/// This evolution transports the range of P(0) onto the range of P(s); the
/// intertwining residual ‖U(s)P(0) - P(s)U(s)‖ measures integration error.
pub fn ideal_propagate(
    p: &(dyn Fn(f64) -> CMatrix + Sync),
    p_dot: &(dyn Fn(f64) -> CMatrix + Sync),
    tau: f64,
    lambda: Option<&(dyn Fn(f64) -> f64 + Sync)>,
    config: &PropagationConfig,
) -> Result<UnitaryPath> {
    let steps = config.steps;
    assert!(steps >= 2, "need at least two steps");
    let dim = p(0.0).nrows();
    let record_at = grid_indices(steps, config.grid_points);
    let s_grid: Vec<f64> = record_at.iter().map(|&i| i as f64 / steps as f64).collect();
    let ds = 1.0 / steps as f64;

    let mut u = identity(dim);
    let mut unitaries = Vec::with_capacity(record_at.len());
    let mut phase_integral = 0.0;
    let mut lambda_prev = lambda.map(|f| f(0.0));
    let mut next_record = 0;
    let mut drift: f64 = 0.0;
    let eye = identity(dim);

    let record =
        |u: &CMatrix, phase_integral: f64, unitaries: &mut Vec<CMatrix>, drift: &mut f64| {
            *drift = drift.max((u.adjoint() * u - &eye).norm());
            let phase = C64::new(0.0, -tau * phase_integral).exp();
            unitaries.push(u.scale(1.0) * phase);
        };

    if record_at.first() == Some(&0) {
        record(&u, phase_integral, &mut unitaries, &mut drift);
        next_record = 1;
    }
    for k in 0..steps {
        let mid = (k as f64 + 0.5) * ds;
        let generator = &p_dot(mid) * &p(mid) - &p(mid) * &p_dot(mid);
        // exp(Δs K) with K anti-Hermitian, via the Hermitian matrix iK
        let ik = hermitize(&generator.map(|z| z * C64::new(0.0, 1.0)));
        let step = exp_minus_i(&ik, ds);
        u = &step * &u;
        if let (Some(f), Some(prev)) = (lambda, lambda_prev) {
            let here = f((k + 1) as f64 * ds);
            phase_integral += 0.5 * (prev + here) * ds;
            lambda_prev = Some(here);
        }
        if next_record < record_at.len() && record_at[next_record] == k + 1 {
            record(&u, phase_integral, &mut unitaries, &mut drift);
            next_record += 1;
        }
    }
    if drift > 1e-8 {
        return Err(Error::UnitarityDrift(drift));
    }
    Ok(UnitaryPath {
        s_grid,
        unitaries,
        steps_used: steps,
        max_unitarity_drift: drift,
    })
}

/// Max intertwining residual ‖U(s)P(0) - P(s)U(s)‖ over the recorded grid.
pub fn intertwining_residual(path: &UnitaryPath, p: &(dyn Fn(f64) -> CMatrix + Sync)) -> f64 {
    let p0 = p(0.0);
    path.s_grid
        .iter()
        .zip(path.unitaries.iter())
        .map(|(&s, u)| {
            let lhs = u * &p0;
            let rhs = p(s) * u;
            crate::matrix::operator_norm(&(lhs - rhs))
        })
        .fold(0.0, f64::max)
}
