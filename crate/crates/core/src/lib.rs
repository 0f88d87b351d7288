//! Dense simulation substrate for several universal quantum computing models.
//!
//! Every model in this crate (gate circuits, matrix-product states and
//! sequential machines, local-Hamiltonian automata, measurement patterns,
//! clock Hamiltonians, stabilizer codes and singular-value transformations)
//! lowers to the same dense representation: a [`PureState`] over a register of
//! qudits, [`UnitaryOp`]s, and [`KrausChannel`]s. The dense forms are the
//! ground truth every conversion is checked against.
//!
//! Conventions used throughout:
//!
//! * Wire 0 is the most significant digit of a basis index, i.e. `|q0 q1 …⟩`.
//! * Gate lists are in application order: the first gate acts first.
//! * Time evolution is `e^{-itH}` unless a function says otherwise.
//! * States and unitaries are compared modulo a global phase.

pub mod algorithms;
pub mod aqc;
pub mod channel;
pub mod circuit;
pub mod codes;
mod error;
pub mod linalg;
pub mod mbqc;
pub mod qca;
pub mod state;
pub mod tensor;
pub mod uncertainty;

pub use channel::{ChoiState, Comb, KrausChannel};
pub use circuit::{Circuit, Gate, GateKind};
pub use error::{Error, Result};
pub use linalg::{Mat, Vector, C64};
pub use state::{PureState, UnitaryOp};

/// Largest register (in qubits) a dense routine will build by default.
pub const DEFAULT_DESK_CAP: usize = 12;

/// Environment variable that overrides [`DEFAULT_DESK_CAP`].
pub const DESK_CAP_ENV: &str = "UQCM_DESK_CAP";

/// Current qubit cap for dense routines.
pub fn desk_cap() -> usize {
    std::env::var(DESK_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_DESK_CAP)
}

/// Fails with [`Error::CapExceeded`] when `qubits` is over the desk cap.
pub fn check_cap(qubits: usize) -> Result<()> {
    let cap = desk_cap();
    if qubits > cap {
        return Err(Error::CapExceeded { qubits, cap });
    }
    Ok(())
}

/// Same as [`check_cap`] for a Hilbert-space dimension.
pub fn check_dim_cap(dim: usize) -> Result<()> {
    let cap = desk_cap();
    if dim > (1usize << cap.min(40)) {
        let qubits = (dim as f64).log2().ceil() as usize;
        return Err(Error::CapExceeded { qubits, cap });
    }
    Ok(())
}
