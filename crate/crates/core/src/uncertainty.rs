//! Robertson-Schrödinger and time-energy uncertainty diagnostics.

use crate::linalg::{self, Mat, C64, I};
use crate::state::PureState;
use crate::{Error, Result};

/// Below this magnitude `⟨[A, B]⟩` counts as zero and `τ_A` is not reported.
pub const COMMUTATOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyReport {
    pub delta_a: f64,
    pub delta_b: f64,
    /// `|½⟨{A,B}⟩ − ⟨A⟩⟨B⟩|² + |⟨[A,B]⟩/2i|²`.
    pub rs_bound: f64,
    /// `ΔA / |⟨Ȧ⟩|` with `⟨Ȧ⟩ = i⟨[B, A]⟩`, treating `B` as the Hamiltonian.
    pub tau_a: Option<f64>,
}

impl UncertaintyReport {
    /// `(ΔA)²(ΔB)² − rs_bound`, non-negative up to round-off.
    pub fn slack(&self) -> f64 {
        self.delta_a.powi(2) * self.delta_b.powi(2) - self.rs_bound
    }

    /// `τ_A · ΔB` when `τ_A` is defined; at least ½.
    pub fn time_energy_product(&self) -> Option<f64> {
        self.tau_a.map(|t| t * self.delta_b)
    }
}

fn expect(psi: &PureState, op: &Mat) -> C64 {
    psi.amplitudes().dotc(&(op * psi.amplitudes()))
}

pub fn uncertainty_bounds(state: &PureState, a: &Mat, b: &Mat) -> Result<UncertaintyReport> {
    let d = state.dim();
    for m in [a, b] {
        if m.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "observable is {}x{}, state dimension {d}",
                m.nrows(),
                m.ncols()
            )));
        }
        linalg::ensure_hermitian(m, 1e-10)?;
    }
    let ea = expect(state, a).re;
    let eb = expect(state, b).re;
    let var_a = (expect(state, &(a * a)).re - ea * ea).max(0.0);
    let var_b = (expect(state, &(b * b)).re - eb * eb).max(0.0);
    let anti = expect(state, &(a * b + b * a));
    let comm = expect(state, &(a * b - b * a));
    let covariance = anti * 0.5 - C64::new(ea * eb, 0.0);
    let rs_bound = covariance.norm_sqr() + (comm / (I * 2.0)).norm_sqr();
    let delta_a = var_a.sqrt();
    let rate = comm.norm();
    let tau_a = (rate > COMMUTATOR_FLOOR).then(|| delta_a / rate);
    Ok(UncertaintyReport {
        delta_a,
        delta_b: var_b.sqrt(),
        rs_bound,
        tau_a,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_y, pauli_z, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn x_y_on_zero_saturates() {
        let r = uncertainty_bounds(&PureState::zero_qubits(1), &pauli_x(), &pauli_y()).unwrap();
        assert!((r.delta_a - 1.0).abs() < 1e-12);
        assert!((r.delta_b - 1.0).abs() < 1e-12);
        assert!((r.rs_bound - 1.0).abs() < 1e-12);
        assert!(r.slack().abs() < 1e-12);
        // ⟨[X,Y]⟩ = 2i⟨Z⟩ = 2i, so τ = 1/2 and τ·ΔY = 1/2.
        assert!((r.time_energy_product().unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn a_with_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let psi = PureState::random(vec![2, 2], &mut rng);
        let a = random_hermitian(4, &mut rng);
        let r = uncertainty_bounds(&psi, &a, &a).unwrap();
        assert!(r.tau_a.is_none());
        assert!((r.rs_bound - r.delta_a.powi(4)).abs() < 1e-10);
        assert!(r.slack().abs() < 1e-10);
    }

    #[test]
    fn commuting_observables_have_no_tau() {
        let r = uncertainty_bounds(&PureState::plus_qubits(1), &pauli_z(), &pauli_z()).unwrap();
        assert!(r.tau_a.is_none());
    }

    #[test]
    fn non_hermitian_rejected() {
        let bad = pauli_x() * I;
        let bad = &bad + pauli_z() * I;
        assert!(matches!(
            uncertainty_bounds(&PureState::zero_qubits(1), &bad, &pauli_z()),
            Err(Error::NotHermitian(_))
        ));
    }
}
