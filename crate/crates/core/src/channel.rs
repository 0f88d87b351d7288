//! Quantum channels in Kraus form, their Choi states, unitary dilations and
//! multi-slot combs.
//!
//! Choi states are stored on `output ⊗ input` and normalised to unit trace:
//! `ω = (𝔈 ⊗ 𝟙)|ω⟩⟨ω|` with `|ω⟩ = Σᵢ|i⟩|i⟩/√d`.

use crate::linalg::{self, c, Mat, Vector, ZERO};
use crate::state::{PureState, UnitaryOp};
use crate::{Error, Result};

/// Trace-preservation and positivity tolerance.
pub const CHANNEL_TOL: f64 = 1e-10;

/// Completely-positive trace-preserving map `ρ ↦ Σᵢ Kᵢ ρ Kᵢ†`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    ops: Vec<Mat>,
}

impl KrausChannel {
    pub fn new(ops: Vec<Mat>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::DimensionMismatch("empty Kraus set".into()))?;
        let shape = first.shape();
        if ops.iter().any(|k| k.shape() != shape) {
            return Err(Error::DimensionMismatch(
                "Kraus operators have different shapes".into(),
            ));
        }
        let sum = ops
            .iter()
            .fold(Mat::zeros(shape.1, shape.1), |acc, k| acc + k.adjoint() * k);
        let dev = linalg::max_abs(&(sum - linalg::identity(shape.1)));
        if dev > CHANNEL_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self { ops })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            ops: vec![linalg::identity(dim)],
        }
    }

    pub fn unitary(u: &Mat) -> Result<Self> {
        Self::new(vec![u.clone()])
    }

    /// Qubit depolarizing channel `ρ ↦ (1−p)ρ + p·𝟙/2`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange(format!("depolarizing probability {p}")));
        }
        let a = (1.0 - 0.75 * p).sqrt();
        let b = (p / 4.0).sqrt();
        Self::new(vec![
            linalg::identity(2) * c(a, 0.0),
            linalg::pauli_x() * c(b, 0.0),
            linalg::pauli_y() * c(b, 0.0),
            linalg::pauli_z() * c(b, 0.0),
        ])
    }

    pub fn ops(&self) -> &[Mat] {
        &self.ops
    }

    pub fn input_dim(&self) -> usize {
        self.ops[0].ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.ops[0].nrows()
    }

    /// `Σᵢ Kᵢ ρ Kᵢ†`.
    pub fn apply(&self, rho: &Mat) -> Result<Mat> {
        let d = self.input_dim();
        if rho.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "channel input dimension {d}, density matrix {}x{}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(self.ops.iter().fold(
            Mat::zeros(self.output_dim(), self.output_dim()),
            |acc, k| acc + k * rho * k.adjoint(),
        ))
    }

    /// Heisenberg-picture dual `X ↦ Σᵢ Kᵢ† X Kᵢ`.
    pub fn apply_dual(&self, x: &Mat) -> Result<Mat> {
        let d = self.output_dim();
        if x.shape() != (d, d) {
            return Err(Error::DimensionMismatch(format!(
                "channel output dimension {d}, operator {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(self
            .ops
            .iter()
            .fold(Mat::zeros(self.input_dim(), self.input_dim()), |acc, k| {
                acc + k.adjoint() * x * k
            }))
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &KrausChannel) -> Result<KrausChannel> {
        if first.output_dim() != self.input_dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot feed output dimension {} into input dimension {}",
                first.output_dim(),
                self.input_dim()
            )));
        }
        let ops = self
            .ops
            .iter()
            .flat_map(|a| first.ops.iter().map(move |b| a * b))
            .collect();
        Ok(Self { ops })
    }

    /// Parallel composition `self ⊗ other`.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let ops = self
            .ops
            .iter()
            .flat_map(|a| other.ops.iter().map(move |b| linalg::kron(a, b)))
            .collect();
        Self { ops }
    }

    pub fn to_choi(&self) -> ChoiState {
        channel_to_choi(self)
    }

    /// Isometry `V = Σᵢ |i⟩_anc ⊗ Kᵢ`, laid out as (Kraus index, output).
    pub fn stinespring_isometry(&self) -> Mat {
        let (dout, din) = (self.output_dim(), self.input_dim());
        let r = self.ops.len();
        Mat::from_fn(r * dout, din, |row, col| {
            self.ops[row / dout][(row % dout, col)]
        })
    }
}

/// Density matrix on `output ⊗ input` representing a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiState {
    matrix: Mat,
    input_dim: usize,
    output_dim: usize,
}

impl ChoiState {
    /// Validates positivity and the `tr_out ω = 𝟙/d_in` marginal.
    pub fn new(matrix: Mat, input_dim: usize, output_dim: usize) -> Result<Self> {
        let n = input_dim * output_dim;
        if matrix.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix {}x{} for input {input_dim} and output {output_dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        linalg::ensure_hermitian(&matrix, CHANNEL_TOL)?;
        let min_eig = linalg::eigh(&matrix).0.first().copied().unwrap_or(0.0);
        if min_eig < -CHANNEL_TOL {
            return Err(Error::NotPsd(min_eig));
        }
        let marginal = linalg::partial_trace(&matrix, &[output_dim, input_dim], &[1])?;
        let target = linalg::identity(input_dim) / c(input_dim as f64, 0.0);
        let dev = linalg::max_abs(&(marginal - target));
        if dev > CHANNEL_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self {
            matrix,
            input_dim,
            output_dim,
        })
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        choi_to_channel(self.matrix(), self.input_dim, self.output_dim)
    }
}

/// `ω = (𝔈 ⊗ 𝟙)|ω⟩⟨ω|`.
pub fn channel_to_choi(ch: &KrausChannel) -> ChoiState {
    let (din, dout) = (ch.input_dim(), ch.output_dim());
    let n = din * dout;
    let mut omega = Mat::zeros(n, n);
    for k in ch.ops() {
        // (K ⊗ 𝟙)|ω⟩ has amplitude K[o, i]/√d at |o, i⟩.
        let v = Vector::from_fn(n, |idx, _| k[(idx / din, idx % din)]);
        omega += &v * v.adjoint();
    }
    ChoiState {
        matrix: omega / c(din as f64, 0.0),
        input_dim: din,
        output_dim: dout,
    }
}

/// Kraus operators from the eigen-decomposition of a Choi matrix.
pub fn choi_to_channel(omega: &Mat, input_dim: usize, output_dim: usize) -> Result<KrausChannel> {
    let n = input_dim * output_dim;
    if omega.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "Choi matrix {}x{} for input {input_dim} and output {output_dim}",
            omega.nrows(),
            omega.ncols()
        )));
    }
    linalg::ensure_hermitian(omega, CHANNEL_TOL)?;
    let (values, vectors) = linalg::eigh(omega);
    if let Some(&min) = values.first() {
        if min < -CHANNEL_TOL {
            return Err(Error::NotPsd(min));
        }
    }
    let ops: Vec<Mat> = values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 1e-14)
        .map(|(j, &l)| {
            let scale = (input_dim as f64 * l).sqrt();
            Mat::from_fn(output_dim, input_dim, |o, i| {
                vectors[(o * input_dim + i, j)] * scale
            })
        })
        .collect();
    if ops.is_empty() {
        return Err(Error::NotTracePreserving(1.0));
    }
    KrausChannel::new(ops)
}

/// Unitary dilation `U` on `data ⊗ ancilla` with `U(|ψ⟩|0⟩) = Σᵢ Kᵢ|ψ⟩|i⟩`.
#[derive(Debug, Clone)]
pub struct Dilation {
    pub unitary: UnitaryOp,
    pub ancilla_init: PureState,
}

impl Dilation {
    /// Applies the dilation to `ρ ⊗ |0⟩⟨0|` and traces out the ancilla.
    pub fn apply(&self, rho: &Mat) -> Result<Mat> {
        let anc = self.ancilla_init.density();
        let joint = linalg::kron(rho, &anc);
        let u = self.unitary.matrix();
        let out = u * joint * u.adjoint();
        let dims = self.unitary.dims().to_vec();
        linalg::partial_trace(&out, &dims, &[0])
    }
}

/// Orthonormal completion of the isometry `Σᵢ |i⟩Kᵢ` into a unitary.
///
/// Only square Kraus operators are supported (`d_in = d_out`). The ancilla
/// dimension equals the number of Kraus operators.
pub fn dilate_channel(ch: &KrausChannel) -> Result<Dilation> {
    let d = ch.input_dim();
    if ch.output_dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "dilation needs square Kraus operators, got {}x{d}",
            ch.output_dim()
        )));
    }
    let r = ch.ops().len();
    let n = d * r;
    // Columns j·r (input |j⟩|0⟩) hold the isometry; the rest are completed.
    let iso = Mat::from_fn(n, d, |row, j| ch.ops()[row % r][(row / r, j)]);
    let completed = linalg::complete_unitary(&iso)?;
    let mut u = Mat::zeros(n, n);
    let mut extra = d;
    for col in 0..n {
        let src = if col % r == 0 {
            col / r
        } else {
            let s = extra;
            extra += 1;
            s
        };
        u.set_column(col, &completed.column(src));
    }
    Ok(Dilation {
        unitary: UnitaryOp::new(u, vec![d, r])?,
        ancilla_init: PureState::basis(vec![r], 0)?,
    })
}

/// Multi-slot comb: fixed teeth on `data ⊗ adversary` interleaved with
/// channel slots on the data wire. The adversary starts in `|0⟩` and is
/// traced out at the end.
#[derive(Debug, Clone)]
pub struct Comb {
    teeth: Vec<UnitaryOp>,
    data_dim: usize,
    adversary_dim: usize,
}

impl Comb {
    pub fn new(teeth: Vec<UnitaryOp>, data_dim: usize, adversary_dim: usize) -> Result<Self> {
        if teeth.is_empty() {
            return Err(Error::InvalidComb("a comb needs at least one tooth".into()));
        }
        let expected = vec![data_dim, adversary_dim];
        for (k, t) in teeth.iter().enumerate() {
            if t.dim() != data_dim * adversary_dim {
                return Err(Error::InvalidComb(format!(
                    "tooth {k} has dimension {}, expected {}",
                    t.dim(),
                    data_dim * adversary_dim
                )));
            }
        }
        let teeth = teeth
            .into_iter()
            .map(|t| UnitaryOp::new(t.into_matrix(), expected.clone()))
            .collect::<Result<_>>()?;
        Ok(Self {
            teeth,
            data_dim,
            adversary_dim,
        })
    }

    pub fn slots(&self) -> usize {
        self.teeth.len() - 1
    }

    pub fn teeth(&self) -> &[UnitaryOp] {
        &self.teeth
    }

    pub fn adversary_dim(&self) -> usize {
        self.adversary_dim
    }

    pub fn data_dim(&self) -> usize {
        self.data_dim
    }
}

/// Channel on the data wire obtained by plugging `inputs` into the slots of
/// `comb` and tracing the adversary.
pub fn comb_compose(comb: &Comb, inputs: &[KrausChannel]) -> Result<KrausChannel> {
    if inputs.len() != comb.slots() {
        return Err(Error::InvalidComb(format!(
            "{} inputs for {} slots",
            inputs.len(),
            comb.slots()
        )));
    }
    let (d, a) = (comb.data_dim, comb.adversary_dim);
    for (k, ch) in inputs.iter().enumerate() {
        if ch.input_dim() != d || ch.output_dim() != d {
            return Err(Error::DimensionMismatch(format!(
                "slot {k} channel is {}->{}, data wire has dimension {d}",
                ch.input_dim(),
                ch.output_dim()
            )));
        }
    }
    // Joint Kraus operators map data (d) -> data ⊗ adversary (d·a).
    let attach = linalg::kron(&linalg::identity(d), &linalg::ket(a, 0));
    let mut joint: Vec<Mat> = vec![comb.teeth[0].matrix() * attach];
    for (slot, ch) in inputs.iter().enumerate() {
        let lifted: Vec<Mat> = ch
            .ops()
            .iter()
            .map(|k| linalg::kron(k, &linalg::identity(a)))
            .collect();
        let tooth = comb.teeth[slot + 1].matrix();
        joint = lifted
            .iter()
            .flat_map(|l| joint.iter().map(move |j| tooth * l * j))
            .collect();
    }
    let mut ops = Vec::with_capacity(joint.len() * a);
    for j in &joint {
        for m in 0..a {
            let bra = linalg::kron(&linalg::identity(d), &linalg::ket(a, m).adjoint());
            ops.push(&bra * j);
        }
    }
    KrausChannel::new(ops)
}

/// Trace distance between Choi states, `½‖ω_a − ω_b‖₁`.
///
/// Stands in for the diamond norm: `D_choi ≤ D_◇ ≤ d·D_choi`.
pub fn channel_distance(a: &KrausChannel, b: &KrausChannel) -> Result<f64> {
    if a.input_dim() != b.input_dim() || a.output_dim() != b.output_dim() {
        return Err(Error::DimensionMismatch(format!(
            "channels {}->{} and {}->{}",
            a.input_dim(),
            a.output_dim(),
            b.input_dim(),
            b.output_dim()
        )));
    }
    let diff = a.to_choi().matrix - b.to_choi().matrix;
    Ok(0.5 * linalg::trace_norm_hermitian(&diff))
}

/// All `d²` matrix units `|i⟩⟨j|`, used to compare channel actions.
pub fn matrix_units(d: usize) -> Vec<Mat> {
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut m = Mat::from_element(d, d, ZERO);
            m[(i, j)] = linalg::ONE;
            out.push(m);
        }
    }
    out
}
