//! Pure states and unitary operators on qudit registers.

use rand::Rng;

use crate::linalg::{self, c, Mat, Vector, C64, ONE};
use crate::{Error, Result};

/// Normalisation tolerance for [`PureState`].
pub const NORM_TOL: f64 = 1e-12;
/// Unitarity tolerance for [`UnitaryOp`].
pub const UNITARY_TOL: f64 = 1e-10;

/// Normalised amplitude vector over a register with local dimensions `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vector,
    dims: Vec<usize>,
}

impl PureState {
    /// Wraps an already-normalised vector.
    pub fn new(amplitudes: Vector, dims: Vec<usize>) -> Result<Self> {
        let state = Self::unchecked(amplitudes, dims)?;
        let norm = state.amplitudes.norm();
        // Accumulated round-off over long gate sequences scales with the
        // register size; the bound below stays far tighter than any physics
        // tolerance used elsewhere.
        if (norm - 1.0).abs() > NORM_TOL * (1.0 + state.amplitudes.len() as f64).sqrt() {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Normalises `amplitudes` first; fails on a zero vector.
    pub fn normalized(amplitudes: Vector, dims: Vec<usize>) -> Result<Self> {
        let mut state = Self::unchecked(amplitudes, dims)?;
        let norm = state.amplitudes.norm();
        if norm < 1e-300 {
            return Err(Error::ZeroNorm);
        }
        state.amplitudes /= c(norm, 0.0);
        Ok(state)
    }

    fn unchecked(amplitudes: Vector, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.contains(&0) || amplitudes.len() != total {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for local dimensions {dims:?}",
                amplitudes.len()
            )));
        }
        Ok(Self { amplitudes, dims })
    }

    /// `n`-qubit register in the computational basis state `index`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(Error::OutOfRange(format!(
                "basis index {index} for dimension {total}"
            )));
        }
        Self::new(linalg::basis_vector(total, index), dims)
    }

    pub fn zero_qubits(n: usize) -> Self {
        Self::basis(vec![2; n], 0).expect("in range")
    }

    /// `|+⟩^{⊗n}`.
    pub fn plus_qubits(n: usize) -> Self {
        let total = 1usize << n;
        let amp = c(1.0 / (total as f64).sqrt(), 0.0);
        Self {
            amplitudes: Vector::from_element(total, amp),
            dims: vec![2; n],
        }
    }

    pub fn random<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> Self {
        let total: usize = dims.iter().product();
        Self {
            amplitudes: linalg::random_vector(total, rng),
            dims,
        }
    }

    pub fn amplitudes(&self) -> &Vector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vector {
        self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn wires(&self) -> usize {
        self.dims.len()
    }

    pub fn density(&self) -> Mat {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|²`, which ignores global phase.
    pub fn fidelity(&self, other: &PureState) -> f64 {
        if self.dim() != other.dim() {
            return 0.0;
        }
        linalg::fidelity(&self.amplitudes, &other.amplitudes)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes),
            dims,
        }
    }

    /// Places `u` on `targets` and returns the new state.
    pub fn apply(&self, u: &UnitaryOp, targets: &[usize]) -> Result<PureState> {
        let expected: Vec<usize> = targets
            .iter()
            .map(|&t| self.dims.get(t).copied().unwrap_or(0))
            .collect();
        for &t in targets {
            if t >= self.dims.len() {
                return Err(Error::WireOutOfRange {
                    wire: t,
                    wires: self.dims.len(),
                });
            }
        }
        if expected != u.dims {
            return Err(Error::DimensionMismatch(format!(
                "operator dims {:?} do not match target dims {expected:?}",
                u.dims
            )));
        }
        self.apply_matrix(u.matrix(), targets)
    }

    /// Same as [`apply`](Self::apply) for a raw matrix (not necessarily unitary).
    pub fn apply_matrix(&self, m: &Mat, targets: &[usize]) -> Result<PureState> {
        let mut amps: Vec<C64> = self.amplitudes.iter().copied().collect();
        linalg::apply_local(&mut amps, &self.dims, m, targets)?;
        Ok(Self {
            amplitudes: Vector::from_vec(amps),
            dims: self.dims.clone(),
        })
    }

    /// Reduced density matrix on `keep`.
    pub fn reduced(&self, keep: &[usize]) -> Result<Mat> {
        linalg::reduced_density(&self.amplitudes, &self.dims, keep)
    }

    /// Schmidt coefficients (non-increasing) across the bipartition `left | rest`.
    pub fn schmidt_values(&self, left: &[usize]) -> Result<Vec<f64>> {
        let m = linalg::bipartition_matrix(&self.amplitudes, &self.dims, left)?;
        Ok(linalg::singular_values(&m))
    }

    /// Von Neumann entropy in bits of the reduced state on `left`.
    pub fn entanglement_entropy(&self, left: &[usize]) -> Result<f64> {
        Ok(entropy_bits(&self.schmidt_values(left)?))
    }

    /// Multiplies by a global phase so the largest amplitude is real positive.
    pub fn phase_fixed(&self) -> PureState {
        let pivot = self
            .amplitudes
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(ONE);
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            ONE
        };
        Self {
            amplitudes: &self.amplitudes * phase,
            dims: self.dims.clone(),
        }
    }
}

/// Shannon entropy (bits) of the squared Schmidt coefficients.
pub fn entropy_bits(schmidt: &[f64]) -> f64 {
    schmidt
        .iter()
        .map(|s| s * s)
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.log2())
        .sum()
}

/// Square unitary matrix acting on a register with local dimensions `dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    matrix: Mat,
    dims: Vec<usize>,
}

impl UnitaryOp {
    pub fn new(matrix: Mat, dims: Vec<usize>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if matrix.nrows() != total || matrix.ncols() != total {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for local dimensions {dims:?}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dev = linalg::unitarity_deviation(&matrix);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self { matrix, dims })
    }

    /// Unitary on `n` qubits.
    pub fn qubits(matrix: Mat) -> Result<Self> {
        let d = matrix.nrows();
        if !d.is_power_of_two() {
            return Err(Error::DimensionMismatch(format!(
                "dimension {d} is not a power of two"
            )));
        }
        Self::new(matrix, vec![2; d.trailing_zeros() as usize])
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let total = dims.iter().product();
        Self {
            matrix: linalg::identity(total),
            dims,
        }
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> UnitaryOp {
        Self {
            matrix: self.matrix.adjoint(),
            dims: self.dims.clone(),
        }
    }

    /// `self · other` (apply `other` first).
    pub fn compose(&self, other: &UnitaryOp) -> Result<UnitaryOp> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {:?} with {:?}",
                self.dims, other.dims
            )));
        }
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
            dims: self.dims.clone(),
        })
    }

    pub fn tensor(&self, other: &UnitaryOp) -> UnitaryOp {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self {
            matrix: linalg::kron(&self.matrix, &other.matrix),
            dims,
        }
    }

    /// Operator distance after global-phase alignment.
    pub fn distance(&self, other: &UnitaryOp) -> f64 {
        linalg::phase_aligned_distance(&self.matrix, &other.matrix)
    }

    pub fn apply_to(&self, state: &PureState) -> Result<PureState> {
        if state.dims() != self.dims.as_slice() {
            return Err(Error::DimensionMismatch(format!(
                "unitary dims {:?} vs state dims {:?}",
                self.dims,
                state.dims()
            )));
        }
        PureState::new(&self.matrix * state.amplitudes(), self.dims.clone())
    }
}

/// `(𝟙⊗…⊗u⊗…⊗𝟙)|state⟩` with `u` on `targets`.
pub fn apply_unitary(state: &PureState, u: &UnitaryOp, targets: &[usize]) -> Result<PureState> {
    state.apply(u, targets)
}
