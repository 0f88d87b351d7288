//! Seeded inputs shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uqcm_core::linalg::{self, Mat};
use uqcm_core::{Circuit, Gate, PureState};

/// `depth` gates drawn from {H, T, CZ} on `n` wires.
pub fn random_htcz(seed: u64, n: usize, depth: usize) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    for _ in 0..depth {
        let g = match rng.random_range(0..3) {
            2 if n > 1 => {
                let a = rng.random_range(0..n);
                Gate::cz(a, (a + 1 + rng.random_range(0..n - 1)) % n).expect("distinct wires")
            }
            1 => Gate::t(rng.random_range(0..n)),
            _ => Gate::h(rng.random_range(0..n)),
        };
        c.push(g).expect("wire in range");
    }
    c
}

pub fn random_qubit_state(seed: u64, n: usize) -> PureState {
    PureState::random(vec![2; n], &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Random `d×d` matrix scaled to spectral norm `norm`.
pub fn random_contraction(seed: u64, d: usize, norm: f64) -> Mat {
    let a = linalg::random_gaussian_matrix(d, d, &mut ChaCha8Rng::seed_from_u64(seed));
    let s = linalg::spectral_norm(&a);
    a * linalg::c(norm / s, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_are_seeded() {
        assert_eq!(random_htcz(3, 4, 20), random_htcz(3, 4, 20));
        assert_eq!(random_htcz(3, 4, 20).len(), 20);
        assert!((linalg::spectral_norm(&random_contraction(1, 4, 0.8)) - 0.8).abs() < 1e-12);
        assert_eq!(random_qubit_state(2, 3), random_qubit_state(2, 3));
    }
}
