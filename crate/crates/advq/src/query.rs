//! The two oracle models and their equivalence: the discrete unitary oracle
//! that swaps a blank output symbol with the queried input symbol, and the
//! block-diagonal oracle Hamiltonian whose π-time evolution reproduces it.
//!
//! Basis order inside the output register is fixed as (blank, then the
//! alphabet in natural order); all matrices are laid out in this order.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::matrix::{
    check_hermitian, exp_minus_i, identity, operator_norm, CMatrix, CVector, HERMITIAN_TOL,
};

/// Parse an input string into symbol values (digits 0-9, then a-z), checking
/// them against the alphabet size.
pub fn parse_input(label: &str, alphabet: usize) -> Result<Vec<usize>> {
    label
        .chars()
        .map(|c| {
            let v = c
                .to_digit(36)
                .map(|d| d as usize)
                .filter(|&d| d < alphabet)
                .ok_or(Error::SymbolOutOfRange {
                    symbol: c,
                    alphabet,
                })?;
            Ok(v)
        })
        .collect()
}

/// (|blank⟩ ± |y⟩)/√2, an orthonormal pair in the output register.
pub fn plus_minus_states(alphabet: usize, y: usize) -> Result<(CVector, CVector)> {
    if y >= alphabet {
        return Err(Error::SymbolOutOfRange {
            symbol: char::from_digit(y.min(35) as u32, 36).unwrap_or('?'),
            alphabet,
        });
    }
    let dim = alphabet + 1;
    let amp = C64::new(1.0 / 2f64.sqrt(), 0.0);
    let mut plus = CVector::zeros(dim);
    let mut minus = CVector::zeros(dim);
    plus[0] = amp;
    plus[y + 1] = amp;
    minus[0] = amp;
    minus[y + 1] = -amp;
    Ok((plus, minus))
}

/// A family of single-symbol Hamiltonians h(y) defining the oracle
/// H_Q(x) = Σ_j |j⟩⟨j| ⊗ h(x_j).
#[derive(Debug, Clone)]
pub struct OracleSpec {
    pub n: usize,
    pub alphabet: usize,
    /// h[y], one Hermitian (alphabet+1)-square matrix per symbol, ‖h(y)‖ ≤ 1.
    pub h: Vec<CMatrix>,
    /// True for the canonical family h(y) = |y⁻⟩⟨y⁻|.
    standard: bool,
}

impl OracleSpec {
    /// The canonical family h(y) = |y⁻⟩⟨y⁻|, whose π-time evolution equals
    /// the discrete oracle exactly.
    pub fn standard(n: usize, alphabet: usize) -> Self {
        let h = (0..alphabet)
            .map(|y| {
                let (_, minus) = plus_minus_states(alphabet, y).expect("symbol in range");
                crate::matrix::outer(&minus, &minus)
            })
            .collect();
        Self {
            n,
            alphabet,
            h,
            standard: true,
        }
    }

    /// A custom family; each h(y) must be Hermitian with ‖h(y)‖ ≤ 1.
    pub fn with_family(n: usize, alphabet: usize, h: Vec<CMatrix>) -> Result<Self> {
        if h.len() != alphabet {
            return Err(Error::ShapeMismatch(format!(
                "{} matrices for alphabet size {alphabet}",
                h.len()
            )));
        }
        for hy in &h {
            if hy.nrows() != alphabet + 1 || hy.ncols() != alphabet + 1 {
                return Err(Error::ShapeMismatch(format!(
                    "h must be {0}x{0}",
                    alphabet + 1
                )));
            }
            check_hermitian(hy, HERMITIAN_TOL)?;
            let norm = operator_norm(hy);
            if norm > 1.0 + 1e-12 {
                return Err(Error::CertificateViolation { j: 0, norm });
            }
        }
        Ok(Self {
            n,
            alphabet,
            h,
            standard: false,
        })
    }

    pub fn is_standard(&self) -> bool {
        self.standard
    }

    /// n·(|Σ|+1), the dimension of the query register.
    pub fn query_dim(&self) -> usize {
        self.n * (self.alphabet + 1)
    }
}

/// The unitary oracle: within each block j it swaps |blank⟩ ↔ |x_j⟩ and
/// fixes every other symbol.
pub fn discrete_oracle(x: &[usize], alphabet: usize) -> CMatrix {
    let n = x.len();
    let block = alphabet + 1;
    let mut o = identity(n * block);
    for (j, &xj) in x.iter().enumerate() {
        let blank = j * block;
        let hit = j * block + xj + 1;
        o[(blank, blank)] = C64::new(0.0, 0.0);
        o[(hit, hit)] = C64::new(0.0, 0.0);
        o[(blank, hit)] = C64::new(1.0, 0.0);
        o[(hit, blank)] = C64::new(1.0, 0.0);
    }
    o
}

/// The oracle Hamiltonian Σ_j |j⟩⟨j| ⊗ h(x_j), block diagonal with norm ≤ 1.
pub fn hamiltonian_oracle(x: &[usize], spec: &OracleSpec) -> CMatrix {
    let block = spec.alphabet + 1;
    let mut hq = CMatrix::zeros(spec.query_dim(), spec.query_dim());
    for (j, &xj) in x.iter().enumerate() {
        let base = j * block;
        for r in 0..block {
            for c in 0..block {
                hq[(base + r, base + c)] = spec.h[xj][(r, c)];
            }
        }
    }
    hq
}

/// exp(-iπ H_Q(x)). For the standard family each block is a projector P and
/// the exponential equals 1 - 2P exactly; otherwise the Hermitian
/// eigendecomposition is used.
pub fn oracle_exponential(x: &[usize], spec: &OracleSpec) -> CMatrix {
    let hq = hamiltonian_oracle(x, spec);
    if spec.is_standard() {
        identity(spec.query_dim()) - hq.scale(2.0)
    } else {
        exp_minus_i(&hq, std::f64::consts::PI)
    }
}

/// ‖O_x - exp(-iπ H_Q(x))‖; at most ~1e-15 for the standard family, and a
/// genuine model mismatch for any other family.
pub fn check_oracle_equivalence(x: &[usize], spec: &OracleSpec) -> f64 {
    let o = discrete_oracle(x, spec.alphabet);
    let e = oracle_exponential(x, spec);
    operator_norm(&(o - e))
}

/// Input-independent driver together with the oracle coupling |α(t)| ≤ 1 and
/// the horizon, defining H_x(t) = H_D(t) + α(t) H_Q(x).
#[derive(Clone)]
pub struct DriverSchedule {
    pub driver: Arc<dyn Fn(f64) -> CMatrix + Send + Sync>,
    pub alpha: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub horizon: f64,
}

impl DriverSchedule {
    pub fn new(
        driver: Arc<dyn Fn(f64) -> CMatrix + Send + Sync>,
        alpha: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        horizon: f64,
    ) -> Self {
        Self {
            driver,
            alpha,
            horizon,
        }
    }

    /// H_D(t) + α(t)·oracle.
    pub fn hamiltonian_at(&self, t: f64, oracle: &CMatrix) -> CMatrix {
        (self.driver)(t) + oracle.scale((self.alpha)(t))
    }

    /// Sample |α(t)| ≤ 1 and Hermiticity of the assembled Hamiltonian on an
    /// evaluation grid; returns the worst |α| seen.
    pub fn validate_on_grid(&self, oracle: &CMatrix, samples: usize) -> Result<f64> {
        let mut worst_alpha: f64 = 0.0;
        for k in 0..samples {
            let t = self.horizon * (k as f64) / ((samples - 1).max(1) as f64);
            let a = (self.alpha)(t);
            worst_alpha = worst_alpha.max(a.abs());
            if a.abs() > 1.0 + 1e-12 {
                return Err(Error::CertificateViolation { j: k, norm: a });
            }
            let h = self.hamiltonian_at(t, oracle);
            check_hermitian(&h, 1e-10)?;
        }
        Ok(worst_alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{hermitian_eigen, hermiticity_residual, hermitize, random_matrix};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plus_state_components() {
        // alphabet {0, 1}, basis order (blank, 0, 1)
        let (plus, minus) = plus_minus_states(2, 0).unwrap();
        let amp = 1.0 / 2f64.sqrt();
        assert_abs_diff_eq!(plus[0].re, amp, epsilon = 1e-15);
        assert_abs_diff_eq!(plus[1].re, amp, epsilon = 1e-15);
        assert_abs_diff_eq!(plus[2].norm(), 0.0, epsilon = 1e-15);
        assert!(plus.dotc(&minus).norm() < 1e-15);
        assert_abs_diff_eq!(plus.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn minus_plus_overlap_counts_disagreement() {
        for a in 0..2 {
            for b in 0..2 {
                let (_, minus) = plus_minus_states(2, a).unwrap();
                let (plus, _) = plus_minus_states(2, b).unwrap();
                let want = if a == b { 0.0 } else { 0.5 };
                assert_abs_diff_eq!(minus.dotc(&plus).re, want, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn plus_minus_rejects_out_of_range_symbol() {
        assert!(plus_minus_states(2, 2).is_err());
    }

    #[test]
    fn discrete_oracle_swaps_blank_with_symbol() {
        // n = 1, alphabet {0, 1}, x = "1": blank ↔ 1, symbol 0 fixed
        let x = parse_input("1", 2).unwrap();
        let o = discrete_oracle(&x, 2);
        let mut blank = CVector::zeros(3);
        blank[0] = C64::new(1.0, 0.0);
        let mut sym0 = CVector::zeros(3);
        sym0[1] = C64::new(1.0, 0.0);
        let mut sym1 = CVector::zeros(3);
        sym1[2] = C64::new(1.0, 0.0);
        assert!((&o * &blank - &sym1).norm() < 1e-15);
        assert!((&o * &sym1 - &blank).norm() < 1e-15);
        assert!((&o * &sym0 - &sym0).norm() < 1e-15);
    }

    #[test]
    fn discrete_oracle_is_an_involution_and_unitary() {
        let x = parse_input("01", 2).unwrap();
        let o = discrete_oracle(&x, 2);
        assert!((&o * &o - identity(6)).norm() < 1e-12);
        assert!((o.adjoint() * &o - identity(6)).norm() < 1e-12);
    }

    #[test]
    fn standard_oracle_hamiltonian_is_a_projector_family() {
        let spec = OracleSpec::standard(1, 2);
        let x = parse_input("0", 2).unwrap();
        let hq = hamiltonian_oracle(&x, &spec);
        let (vals, _) = hermitian_eigen(&hq);
        for v in vals.iter() {
            assert!(v.abs() < 1e-12 || (v - 1.0).abs() < 1e-12, "eigenvalue {v}");
        }
        // rank 1 in the single block
        let rank: f64 = vals.iter().sum();
        assert_abs_diff_eq!(rank, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn random_family_keeps_norm_below_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h: Vec<CMatrix> = (0..2)
            .map(|_| {
                let raw = hermitize(&random_matrix(3, 3, &mut rng));
                raw.unscale(operator_norm(&raw).max(1.0))
            })
            .collect();
        let spec = OracleSpec::with_family(3, 2, h).unwrap();
        let x = parse_input("010", 2).unwrap();
        let hq = hamiltonian_oracle(&x, &spec);
        assert!(operator_norm(&hq) <= 1.0 + 1e-10);
        assert!(hermiticity_residual(&hq) < 1e-12);
    }

    #[test]
    fn oracle_equivalence_holds_for_standard_family() {
        for (n, input) in [(1usize, "1"), (2, "01")] {
            let spec = OracleSpec::standard(n, 2);
            let x = parse_input(input, 2).unwrap();
            assert!(check_oracle_equivalence(&x, &spec) <= 1e-10, "x = {input}");
        }
    }

    #[test]
    fn spectral_exponential_agrees_with_reflection_identity() {
        let spec = OracleSpec::standard(2, 2);
        let x = parse_input("10", 2).unwrap();
        let via_identity = oracle_exponential(&x, &spec);
        let via_spectrum = exp_minus_i(&hamiltonian_oracle(&x, &spec), std::f64::consts::PI);
        assert!(operator_norm(&(via_identity - via_spectrum)) < 1e-10);
    }

    #[test]
    fn zero_family_reports_expected_mismatch() {
        let h = vec![CMatrix::zeros(3, 3); 2];
        let spec = OracleSpec::with_family(1, 2, h).unwrap();
        let x = parse_input("1", 2).unwrap();
        let residual = check_oracle_equivalence(&x, &spec);
        // exp(0) is the identity, so the residual is ‖O_x - 1‖ = 2
        assert!(residual > 1.0);
    }

    #[test]
    fn driver_schedule_assembles_hermitian_hamiltonians() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = hermitize(&random_matrix(6, 6, &mut rng));
        let schedule = DriverSchedule::new(
            Arc::new(move |t: f64| a.scale(t.cos())),
            Arc::new(|t: f64| (0.3 * t).sin()),
            2.0,
        );
        let spec = OracleSpec::standard(2, 2);
        let x = parse_input("01", 2).unwrap();
        let oracle = hamiltonian_oracle(&x, &spec);
        let worst = schedule.validate_on_grid(&oracle, 17).unwrap();
        assert!(worst <= 1.0);
        // ‖H_x(t) - H_D(t)‖ ≤ |α(t)| at every sample
        for k in 0..17 {
            let t = 2.0 * (k as f64) / 16.0;
            let h = schedule.hamiltonian_at(t, &oracle);
            let drift = operator_norm(&(h - (schedule.driver)(t)));
            assert!(drift <= (schedule.alpha)(t).abs() + 1e-12);
        }
    }
}
