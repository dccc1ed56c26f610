//! Progress-function analysis of simulated continuous-time query runs.
//!
//! An ensemble over inputs x, weighted by the certificate vector v, carries
//! the observable Γ ∘ vv*. Its expectation W(t) moves at a rate bounded by
//! 2·max_j ‖Γ ∘ Δ_j‖ because the per-input Hamiltonians differ only in the
//! oracle term; integrating the bound certifies a lower bound on the running
//! time of any conversion. The ensemble state is never materialized: W and
//! its derivative are assembled from per-input trajectories and pairwise
//! overlaps.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::{delta_masks, AdversaryCertificate};
use crate::convert::ConversionInstance;
use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::matrix::{hadamard, operator_norm, outer, CMatrix, CVector};
use crate::propagate::{propagate_columns, PropagationConfig};
use crate::query::OracleSpec;

/// W(t) = Σ_{x,y} v_x v̄_y Γ_{yx} ⟨φ_y|φ_x⟩, the certificate observable on
/// the ensemble of per-input states.
pub fn progress_value(certificate: &AdversaryCertificate, states: &[CVector]) -> f64 {
    let size = states.len();
    let v = &certificate.vector;
    let mut acc = C64::new(0.0, 0.0);
    for y in 0..size {
        for x in 0..size {
            let weight = v[x] * v[y].conj() * certificate.gamma[(y, x)];
            if weight.norm() > 0.0 {
                acc += weight * states[y].dotc(&states[x]);
            }
        }
    }
    debug_assert!(acc.im.abs() < 1e-10, "hermitian observable");
    acc.re
}

/// A simulated ensemble: one trajectory per input, all evolving under a
/// shared driver plus the per-input oracle term α(t)·H_Q(x).
#[derive(Clone)]
pub struct ProgressInstance {
    pub labels: Vec<String>,
    pub certificate: AdversaryCertificate,
    driver: Arc<dyn Fn(f64) -> CMatrix + Send + Sync>,
    alpha: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// symbol_ops[j][y]: the embedded operator |j⟩⟨j| ⊗ h(y) (⊗ 1 on any
    /// workspace factor).
    symbol_ops: Vec<Vec<CMatrix>>,
    inputs: Vec<Vec<usize>>,
    /// Cached full oracle terms Σ_j symbol_ops[j][x_j].
    oracle_terms: Vec<CMatrix>,
    initial_states: Vec<CVector>,
    pub horizon: f64,
    /// 2·max_j ‖Γ ∘ Δ_j‖.
    pub bound: f64,
}

fn derivative_bound(certificate: &AdversaryCertificate, labels: &[String]) -> Result<f64> {
    let n = labels[0].chars().count();
    let masks = delta_masks(labels, n)?;
    let mut worst: f64 = 0.0;
    for mask in &masks {
        worst = worst.max(operator_norm(&hadamard(&certificate.gamma, &mask.matrix)?));
    }
    Ok(2.0 * worst)
}

impl ProgressInstance {
    /// Ensemble for an adiabatic conversion run: driver Λ(t/τ, ε), coupling
    /// α = -1, and the oracle family h(y) = |y⁻⟩⟨y⁻| tensored with the
    /// workspace, which reassembles exactly the conversion's Π_x.
    pub fn from_conversion(
        instance: &ConversionInstance,
        certificate: &AdversaryCertificate,
    ) -> Result<Self> {
        if certificate.labels.as_slice() != instance.labels() {
            return Err(Error::BadLabels(
                "certificate and instance indexed by different label sets".into(),
            ));
        }
        let labels = instance.labels().to_vec();
        let layout = instance.layout().clone();
        let alphabet = layout.alphabet;
        let inputs: Vec<Vec<usize>> = labels
            .iter()
            .map(|l| crate::query::parse_input(l, alphabet))
            .collect::<Result<_>>()?;
        let total = layout.total_dim();

        let mut symbol_ops = Vec::with_capacity(layout.n);
        for j in 0..layout.n {
            let mut per_symbol = Vec::with_capacity(alphabet);
            for y in 0..alphabet {
                let (_, minus) = crate::query::plus_minus_states(alphabet, y)?;
                let mut op = CMatrix::zeros(total, total);
                for a in 0..=alphabet {
                    for b in 0..=alphabet {
                        let amp = minus[a] * minus[b].conj();
                        if amp.norm() > 0.0 {
                            for w in 0..layout.workspace_dim {
                                op[(layout.query_index(j, a, w), layout.query_index(j, b, w))] +=
                                    amp;
                            }
                        }
                    }
                }
                per_symbol.push(op);
            }
            symbol_ops.push(per_symbol);
        }

        let oracle_terms: Vec<CMatrix> = inputs
            .iter()
            .map(|input| {
                let mut acc = CMatrix::zeros(total, total);
                for (j, &symbol) in input.iter().enumerate() {
                    acc += &symbol_ops[j][symbol];
                }
                acc
            })
            .collect();
        // the tensored family reassembles the conversion's oracle projector
        for (x, term) in oracle_terms.iter().enumerate() {
            let residual = operator_norm(&(term - instance.oracle_projector(x)));
            if residual > 1e-12 {
                return Err(Error::CrossCheck(format!(
                    "oracle family mismatch for input {}: {residual:.3e}",
                    labels[x]
                )));
            }
        }

        let tau = instance.time_scale();
        let initial_states: Vec<CVector> = (0..labels.len())
            .map(|x| instance.initial_state(x))
            .collect();
        let bound = derivative_bound(certificate, &labels)?;
        let shared = Arc::new(instance.clone());
        Ok(Self {
            labels,
            certificate: certificate.clone(),
            driver: Arc::new(move |t: f64| shared.driver_projector(t / tau)),
            alpha: Arc::new(|_t: f64| -1.0),
            symbol_ops,
            inputs,
            oracle_terms,
            initial_states,
            horizon: tau,
            bound,
        })
    }

    /// Ensemble for a plain query-model algorithm on the bare query register.
    pub fn from_query_model(
        labels: Vec<String>,
        certificate: &AdversaryCertificate,
        spec: &OracleSpec,
        driver: Arc<dyn Fn(f64) -> CMatrix + Send + Sync>,
        alpha: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        initial_states: Vec<CVector>,
        horizon: f64,
    ) -> Result<Self> {
        let inputs: Vec<Vec<usize>> = labels
            .iter()
            .map(|l| crate::query::parse_input(l, spec.alphabet))
            .collect::<Result<_>>()?;
        let dim = spec.query_dim();
        let block = spec.alphabet + 1;
        let mut symbol_ops = Vec::with_capacity(spec.n);
        for j in 0..spec.n {
            let mut per_symbol = Vec::with_capacity(spec.alphabet);
            for y in 0..spec.alphabet {
                let mut op = CMatrix::zeros(dim, dim);
                for a in 0..block {
                    for b in 0..block {
                        op[(j * block + a, j * block + b)] = spec.h[y][(a, b)];
                    }
                }
                per_symbol.push(op);
            }
            symbol_ops.push(per_symbol);
        }
        let oracle_terms: Vec<CMatrix> = inputs
            .iter()
            .map(|input| {
                let mut acc = CMatrix::zeros(dim, dim);
                for (j, &symbol) in input.iter().enumerate() {
                    acc += &symbol_ops[j][symbol];
                }
                acc
            })
            .collect();
        let bound = derivative_bound(certificate, &labels)?;
        Ok(Self {
            labels,
            certificate: certificate.clone(),
            driver,
            alpha,
            symbol_ops,
            inputs,
            oracle_terms,
            initial_states,
            horizon,
            bound,
        })
    }

    pub fn hamiltonian(&self, x: usize, t: f64) -> CMatrix {
        (self.driver)(t) + self.oracle_terms[x].scale((self.alpha)(t))
    }

    /// -i Σ_{x,y} v_x v̄_y Γ_{yx} ⟨φ_y|H_x(t) - H_y(t)|φ_x⟩; the driver
    /// cancels, leaving only oracle differences.
    pub fn derivative(&self, states: &[CVector], t: f64) -> f64 {
        let v = &self.certificate.vector;
        let alpha = (self.alpha)(t);
        let mut acc = C64::new(0.0, 0.0);
        for y in 0..states.len() {
            for x in 0..states.len() {
                let weight = v[x] * v[y].conj() * self.certificate.gamma[(y, x)];
                if weight.norm() > 0.0 {
                    let action = (&self.oracle_terms[x] - &self.oracle_terms[y]).scale(alpha)
                        * &states[x];
                    acc += weight * states[y].dotc(&action);
                }
            }
        }
        (acc * C64::new(0.0, -1.0)).re
    }

    /// The per-coordinate disagreement matrices at one time sample:
    /// [Φ^j]_{yx} = ⟨φ_y| |j⟩⟨j| ⊗ (h(x_j) - h(y_j)) |φ_x⟩.
    pub fn disagreement_matrices(&self, states: &[CVector]) -> Vec<CMatrix> {
        let size = states.len();
        (0..self.symbol_ops.len())
            .map(|j| {
                CMatrix::from_fn(size, size, |y, x| {
                    let op_x = &self.symbol_ops[j][self.inputs[x][j]];
                    let op_y = &self.symbol_ops[j][self.inputs[y][j]];
                    states[y].dotc(&((op_x - op_y) * &states[x]))
                })
            })
            .collect()
    }

    /// Explicit factorization of Σ_j Φ^j through vectors of squared norm at
    /// most 2: u_x = -H_Q(x)|φ_x⟩ ⊕ |φ_x⟩ and v_x = |φ_x⟩ ⊕ H_Q(x)|φ_x⟩.
    pub fn sum_factorization(&self, states: &[CVector]) -> SumFactorization {
        let dim = states[0].len();
        let stack = |top: &CVector, bottom: &CVector| -> CVector {
            let mut out = CVector::zeros(2 * dim);
            for k in 0..dim {
                out[k] = top[k];
                out[dim + k] = bottom[k];
            }
            out
        };
        let us: Vec<CVector> = states
            .iter()
            .enumerate()
            .map(|(x, phi)| stack(&-(&self.oracle_terms[x] * phi), phi))
            .collect();
        let vs: Vec<CVector> = states
            .iter()
            .enumerate()
            .map(|(x, phi)| stack(phi, &(&self.oracle_terms[x] * phi)))
            .collect();
        let phis = self.disagreement_matrices(states);
        let size = states.len();
        let mut sum = CMatrix::zeros(size, size);
        for phi in &phis {
            sum += phi;
        }
        let mut residual: f64 = 0.0;
        for y in 0..size {
            for x in 0..size {
                residual = residual.max((us[y].dotc(&vs[x]) - sum[(y, x)]).norm());
            }
        }
        let upper = us
            .iter()
            .chain(vs.iter())
            .map(|v| v.norm_squared())
            .fold(0.0, f64::max);
        SumFactorization {
            us,
            vs,
            residual,
            upper,
        }
    }

    /// Propagate every trajectory and sample the progress function. The
    /// analytic derivative is cross-checked against a centered finite
    /// difference of W at the grid spacing.
    pub fn simulate(&self, samples: usize, config: &PropagationConfig) -> Result<ProgressTrace> {
        let tau = self.horizon;
        let grid_config = PropagationConfig {
            grid_points: samples,
            ..config.clone()
        };
        let trajectories: Vec<(Vec<f64>, Vec<CVector>)> = (0..self.labels.len())
            .into_par_iter()
            .map(|x| {
                let h = |s: f64| self.hamiltonian(x, s * tau);
                let result = propagate_columns(
                    &h,
                    tau,
                    std::slice::from_ref(&self.initial_states[x]),
                    &grid_config,
                )?;
                Ok((
                    result.s_grid,
                    result.columns.into_iter().map(|mut row| row.pop().unwrap()).collect(),
                ))
            })
            .collect::<Result<_>>()?;
        let t_grid: Vec<f64> = trajectories[0].0.iter().map(|s| s * tau).collect();
        let points = t_grid.len();
        let states: Vec<Vec<CVector>> = (0..points)
            .map(|k| trajectories.iter().map(|(_, tr)| tr[k].clone()).collect())
            .collect();

        let w: Vec<f64> = states
            .iter()
            .map(|at_t| progress_value(&self.certificate, at_t))
            .collect();
        let dw_dt: Vec<f64> = states
            .iter()
            .zip(t_grid.iter())
            .map(|(at_t, &t)| self.derivative(at_t, t))
            .collect();

        let mut dw_dt_fd = dw_dt.clone();
        let mut fd_gap: f64 = 0.0;
        for k in 1..points.saturating_sub(1) {
            let dt = t_grid[k + 1] - t_grid[k - 1];
            let fd = (w[k + 1] - w[k - 1]) / dt;
            dw_dt_fd[k] = fd;
            fd_gap = fd_gap.max((fd - dw_dt[k]).abs());
        }
        let fd_tol = 1e-5 * self.bound + 1e-15;
        if fd_gap > fd_tol {
            return Err(Error::CrossCheck(format!(
                "progress derivative: finite difference deviates by {fd_gap:.3e} > {fd_tol:.3e}"
            )));
        }
        Ok(ProgressTrace {
            t_grid,
            w,
            dw_dt,
            dw_dt_fd,
            fd_gap,
            bound: self.bound,
            states,
        })
    }
}

/// Factorization certificate for Σ_j γ₂(Φ^j) ≤ 2 at one time sample.
#[derive(Debug, Clone)]
pub struct SumFactorization {
    pub us: Vec<CVector>,
    pub vs: Vec<CVector>,
    /// Max entrywise deviation of ⟨u_y|v_x⟩ from Σ_j [Φ^j]_{yx}.
    pub residual: f64,
    /// Largest squared vector norm; at most 2 by construction.
    pub upper: f64,
}

/// Time-gridded progress record.
#[derive(Debug, Clone)]
pub struct ProgressTrace {
    pub t_grid: Vec<f64>,
    pub w: Vec<f64>,
    pub dw_dt: Vec<f64>,
    pub dw_dt_fd: Vec<f64>,
    pub fd_gap: f64,
    pub bound: f64,
    /// states[k][x]: trajectory of input x at grid time k.
    pub states: Vec<Vec<CVector>>,
}

impl ProgressTrace {
    pub fn horizon(&self) -> f64 {
        self.t_grid.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs_derivative(&self) -> f64 {
        self.dw_dt.iter().map(|d| d.abs()).fold(0.0, f64::max)
    }

    /// |W(T) - W(0)|.
    pub fn endpoint_change(&self) -> f64 {
        match (self.w.first(), self.w.last()) {
            (Some(a), Some(b)) => (b - a).abs(),
            _ => 0.0,
        }
    }
}

/// The certified query-time lower bound from a certificate.
#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundReport {
    /// |⟨Γ ∘ (σ - ρ), vv*⟩|.
    pub lhs: f64,
    /// 2 T max_j ‖Γ ∘ Δ_j‖.
    pub rhs: f64,
    /// lhs / (2 max_j ‖Γ ∘ Δ_j‖): no faster conversion exists.
    pub implied_t: f64,
    pub mask_norm: f64,
    pub horizon: f64,
    /// lhs ≤ rhs + 1e-6; a violation would indicate an integrator or
    /// construction bug.
    pub consistent: bool,
}

pub fn check_lower_bound(
    rho: &GramMatrix,
    sigma: &GramMatrix,
    certificate: &AdversaryCertificate,
    horizon: f64,
) -> Result<LowerBoundReport> {
    if !rho.same_labels(sigma) || rho.labels() != certificate.labels.as_slice() {
        return Err(Error::BadLabels(
            "certificate and Gram matrices indexed by different label sets".into(),
        ));
    }
    let n = certificate.labels[0].chars().count();
    let masks = delta_masks(&certificate.labels, n)?;
    let mut mask_norm: f64 = 0.0;
    for mask in &masks {
        mask_norm = mask_norm.max(operator_norm(&hadamard(&certificate.gamma, &mask.matrix)?));
    }
    let signed_diff = sigma.matrix() - rho.matrix();
    let masked = hadamard(&certificate.gamma, &signed_diff)?;
    let pairing = crate::matrix::inner_product(
        &masked,
        &outer(&certificate.vector, &certificate.vector),
    )?;
    let lhs = pairing.re.abs();
    let rhs = 2.0 * horizon * mask_norm;
    let implied_t = if mask_norm > 0.0 {
        lhs / (2.0 * mask_norm)
    } else {
        0.0
    };
    Ok(LowerBoundReport {
        lhs,
        rhs,
        implied_t,
        mask_norm,
        horizon,
        consistent: lhs <= rhs + 1e-6,
    })
}
