//! QSP sequences, block encodings, QSVT with a per-singular-value oracle,
//! LCU combination, Chebyshev Hamiltonian simulation, select processors and
//! the classical gate-program encoding.
//!
//! A block encoding here always places the encoded operator in the top-left
//! `d×d` block, so `Π = Π̃` selects the first `d` coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::linalg::{self, Mat, Vector, C64, ONE};
use crate::state::{PureState, UnitaryOp};
use crate::{check_dim_cap, Error, Result};

const NORM_SLACK: f64 = 1e-10;

/// `Z(φ) = e^{iφZ}`.
pub fn z_phase(phi: f64) -> Mat {
    Mat::from_diagonal(&Vector::from_vec(vec![linalg::cis(phi), linalg::cis(-phi)]))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseSequence {
    pub phases: Vec<f64>,
}

impl PhaseSequence {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::OutOfRange("phases must be finite".into()));
        }
        Ok(Self { phases })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Parity of the polynomial produced by the sequence.
    pub fn parity(&self) -> usize {
        self.phases.len() % 2
    }
}

/// `(Z(φ_1)G)(Z(φ_2)G)⋯`, the leftmost factor carrying the first phase.
pub fn qsp_unitary(g: &Mat, phases: &PhaseSequence) -> Result<UnitaryOp> {
    if g.shape() != (2, 2) {
        return Err(Error::DimensionMismatch(
            "signal operator must be 2x2".into(),
        ));
    }
    let dev = linalg::unitarity_deviation(g);
    if dev > 1e-10 {
        return Err(Error::NotUnitary(dev));
    }
    let m = phases
        .phases
        .iter()
        .fold(linalg::identity(2), |acc, &p| acc * z_phase(p) * g);
    UnitaryOp::new(m, vec![2])
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockEncoding {
    u: Mat,
    encoded_dim: usize,
}

impl BlockEncoding {
    /// Wraps a unitary whose top-left `encoded_dim` block is the operator.
    pub fn from_unitary(u: Mat, encoded_dim: usize) -> Result<Self> {
        let dev = linalg::unitarity_deviation(&u);
        if dev > 1e-10 {
            return Err(Error::NotUnitary(dev));
        }
        if encoded_dim == 0 || encoded_dim > u.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "block of size {encoded_dim} in a {}-dimensional unitary",
                u.nrows()
            )));
        }
        Ok(Self { u, encoded_dim })
    }

    pub fn unitary(&self) -> &Mat {
        &self.u
    }

    pub fn encoded_dim(&self) -> usize {
        self.encoded_dim
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// `Π` as a full-space projector.
    pub fn projector(&self) -> Mat {
        let mut p = Mat::zeros(self.dim(), self.dim());
        for k in 0..self.encoded_dim {
            p[(k, k)] = ONE;
        }
        p
    }

    /// `Π̃ U Π` as a `d×d` matrix.
    pub fn block(&self) -> Mat {
        self.u
            .view((0, 0), (self.encoded_dim, self.encoded_dim))
            .into_owned()
    }
}

/// `√M` for a PSD `M`; eigenvalues below rounding level are set to zero.
fn defect_sqrt(m: &Mat) -> Mat {
    let h = (m + m.adjoint()) * linalg::c(0.5, 0.0);
    linalg::hermitian_fn(&h, |x| {
        linalg::c(if x < 1e-12 { 0.0 } else { x.sqrt() }, 0.0)
    })
}

/// `[[A, √(1−AA†)], [√(1−A†A), −A†]]`.
pub fn block_encode(a: &Mat) -> Result<BlockEncoding> {
    if !a.is_square() || a.nrows() == 0 {
        return Err(Error::DimensionMismatch(
            "block_encode expects a square matrix".into(),
        ));
    }
    check_dim_cap(2 * a.nrows())?;
    let norm = linalg::spectral_norm(a);
    if norm > 1.0 + NORM_SLACK {
        return Err(Error::NormTooLarge(norm));
    }
    let d = a.nrows();
    let id = linalg::identity(d);
    let top = defect_sqrt(&(&id - a * a.adjoint()));
    let bottom = defect_sqrt(&(&id - a.adjoint() * a));
    let mut u = Mat::zeros(2 * d, 2 * d);
    u.view_mut((0, 0), (d, d)).copy_from(a);
    u.view_mut((0, d), (d, d)).copy_from(&top);
    u.view_mut((d, 0), (d, d)).copy_from(&bottom);
    u.view_mut((d, d), (d, d)).copy_from(&(-a.adjoint()));
    BlockEncoding::from_unitary(u, d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvDecomposition {
    pub w: Mat,
    pub sigma: Vec<f64>,
    pub v: Mat,
}

impl SvDecomposition {
    pub fn new(a: &Mat) -> Self {
        let (w, sigma, v) = linalg::svd(a);
        Self { w, sigma, v }
    }

    /// `Σ_i f(σ_i)|w_i⟩⟨v_i|`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Mat {
        let diag = Vector::from_iterator(self.sigma.len(), self.sigma.iter().map(|&s| f(s)));
        &self.w * Mat::from_diagonal(&diag) * self.v.adjoint()
    }

    /// `Σ_i f(σ_i)|v_i⟩⟨v_i|`.
    pub fn map_right(&self, f: impl Fn(f64) -> C64) -> Mat {
        let diag = Vector::from_iterator(self.sigma.len(), self.sigma.iter().map(|&s| f(s)));
        &self.v * Mat::from_diagonal(&diag) * self.v.adjoint()
    }
}

fn phase_on_block(dim: usize, d: usize, phi: f64) -> Mat {
    let e = linalg::cis(phi);
    Mat::from_diagonal(&Vector::from_iterator(
        dim,
        (0..dim).map(|k| if k < d { e } else { ONE }),
    ))
}

/// Full alternating sequence. Odd length:
/// `e^{iφ₁Π̃} U e^{iφ₂Π} U† e^{iφ₃Π̃} U ⋯`; even length:
/// `e^{iφ₁Π} U† e^{iφ₂Π̃} U ⋯`.
pub fn qsvt_unitary(be: &BlockEncoding, phases: &PhaseSequence) -> Mat {
    let (dim, d) = (be.dim(), be.encoded_dim);
    let u = &be.u;
    let ud = u.adjoint();
    let len = phases.len();
    let mut m = linalg::identity(dim);
    for (k, &phi) in phases.phases.iter().enumerate() {
        // The factor nearest the input is always U.
        let from_right = len - 1 - k;
        let op = if from_right.is_multiple_of(2) { u } else { &ud };
        m = m * phase_on_block(dim, d, phi) * op;
    }
    m
}

/// Encoded block of [`qsvt_unitary`]; equals `Σ p(σ_i)|w_i⟩⟨v_i|` for odd
/// sequences and `Σ p(σ_i)|v_i⟩⟨v_i|` for even ones.
pub fn qsvt_apply(be: &BlockEncoding, phases: &PhaseSequence) -> Mat {
    let d = be.encoded_dim;
    qsvt_unitary(be, phases).view((0, 0), (d, d)).into_owned()
}

/// Top-left entry of the 2×2 reduction of the sequence for singular value `σ`.
pub fn qsvt_oracle(sigma: f64, phases: &PhaseSequence) -> C64 {
    let s = (1.0 - sigma * sigma).max(0.0).sqrt();
    let r = linalg::mat_from_rows(&[
        &[linalg::c(sigma, 0.0), linalg::c(s, 0.0)],
        &[linalg::c(s, 0.0), linalg::c(-sigma, 0.0)],
    ]);
    let m = phases.phases.iter().fold(linalg::identity(2), |acc, &p| {
        acc * phase_on_block(2, 1, p) * &r
    });
    m[(0, 0)]
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcuEntry {
    pub beta: C64,
    pub encoding: BlockEncoding,
    pub phases: PhaseSequence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcuResult {
    /// Block is `Σ β_i f_i(A_i) / Σ|β_i|`.
    pub encoding: BlockEncoding,
    pub subnormalization: f64,
}

/// Prepare–select–unprepare with the index register as the leading wire.
/// Phases of `β_i` ride on the select branches.
pub fn lcu_combine(entries: &[LcuEntry]) -> Result<LcuResult> {
    let first = entries
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no LCU entries".into()))?;
    let (dim, d) = (first.encoding.dim(), first.encoding.encoded_dim);
    if entries
        .iter()
        .any(|e| e.encoding.dim() != dim || e.encoding.encoded_dim != d)
    {
        return Err(Error::DimensionMismatch(
            "LCU entries must share encoding dimensions".into(),
        ));
    }
    let total: f64 = entries.iter().map(|e| e.beta.norm()).sum();
    if total <= 0.0 {
        return Err(Error::OutOfRange("coefficients sum to zero".into()));
    }
    let m = entries.len();
    check_dim_cap(m * dim)?;
    let amps = Mat::from_iterator(
        m,
        1,
        entries
            .iter()
            .map(|e| linalg::c((e.beta.norm() / total).sqrt(), 0.0)),
    );
    let prep = linalg::complete_unitary(&amps)?;
    let mut select = Mat::zeros(m * dim, m * dim);
    for (i, e) in entries.iter().enumerate() {
        let phase = if e.beta.norm() > 0.0 {
            e.beta / e.beta.norm()
        } else {
            ONE
        };
        let branch = qsvt_unitary(&e.encoding, &e.phases) * phase;
        select
            .view_mut((i * dim, i * dim), (dim, dim))
            .copy_from(&branch);
    }
    let p = linalg::kron(&prep, &linalg::identity(dim));
    let w = p.adjoint() * select * p;
    Ok(LcuResult {
        encoding: BlockEncoding::from_unitary(w, d)?,
        subnormalization: total,
    })
}

/// `J_k(x)` by its power series.
pub fn bessel_j(k: usize, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = (0..k).fold(1.0, |acc, j| acc * half / (j + 1) as f64);
    let mut sum = term;
    for m in 1..200 {
        term *= -half * half / (m as f64 * (m + k) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamSimResult {
    /// Approximation of `e^{iHt}`.
    pub matrix: Mat,
    /// `Σ_{k>degree} 2|J_k(‖H‖t)|`.
    pub truncation_bound: f64,
    pub subnormalization: f64,
    pub warning: Option<String>,
}

/// `e^{iHt} ≈ J_0(τ) + 2 Σ_{k≤degree} i^k J_k(τ) T_k(H/‖H‖)`, `τ = ‖H‖t`,
/// each `T_k` realized by QSVT with phases `π` and combined through LCU.
pub fn hamiltonian_sim_lcu(h: &Mat, t: f64, degree: usize) -> Result<HamSimResult> {
    if degree == 0 {
        return Err(Error::OutOfRange("degree must be at least 1".into()));
    }
    linalg::ensure_hermitian(h, 1e-10)?;
    let d = h.nrows();
    let alpha = linalg::spectral_norm(h);
    let tau = alpha * t;
    let warning = (tau.abs() > 1.0 + 1e-9)
        .then(|| format!("‖H‖·|t| = {:.3} exceeds 1; raise the degree", tau.abs()));
    if alpha == 0.0 || t == 0.0 {
        return Ok(HamSimResult {
            matrix: linalg::identity(d),
            truncation_bound: 0.0,
            subnormalization: 1.0,
            warning,
        });
    }
    let be = block_encode(&(h / linalg::c(alpha, 0.0)))?;
    let mut entries = Vec::with_capacity(degree + 1);
    let mut i_pow = ONE;
    for k in 0..=degree {
        let coeff = if k == 0 {
            bessel_j(0, tau)
        } else {
            2.0 * bessel_j(k, tau)
        };
        // phases π^k give (−1)^k T_k.
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let beta = i_pow * coeff * sign;
        i_pow *= linalg::I;
        if beta.norm() == 0.0 {
            continue;
        }
        entries.push(LcuEntry {
            beta,
            encoding: be.clone(),
            phases: PhaseSequence::new(vec![std::f64::consts::PI; k])?,
        });
    }
    let lcu = lcu_combine(&entries)?;
    let truncation_bound = (degree + 1..degree + 60)
        .map(|k| 2.0 * bessel_j(k, tau).abs())
        .sum();
    Ok(HamSimResult {
        matrix: lcu.encoding.block() * linalg::c(lcu.subnormalization, 0.0),
        truncation_bound,
        subnormalization: lcu.subnormalization,
        warning,
    })
}

/// Coordinate descent with restarts over at most 8 phases so that the oracle matches
/// `target` at the sample points. No optimality guarantee.
pub fn fit_phases(
    target: impl Fn(f64) -> C64,
    samples: &[f64],
    len: usize,
    sweeps: usize,
) -> Result<(PhaseSequence, f64)> {
    if len == 0 || len > 8 {
        return Err(Error::OutOfRange("between 1 and 8 phases".into()));
    }
    let goal: Vec<C64> = samples.iter().map(|&s| target(s)).collect();
    let cost = |ph: &[f64]| {
        let seq = PhaseSequence {
            phases: ph.to_vec(),
        };
        samples
            .iter()
            .zip(&goal)
            .map(|(&s, g)| (qsvt_oracle(s, &seq) - g).norm_sqr())
            .sum::<f64>()
    };
    let pi = std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut overall: Option<(Vec<f64>, f64)> = None;
    for restart in 0..8 {
        let mut ph: Vec<f64> = if restart == 0 {
            vec![0.0; len]
        } else {
            (0..len).map(|_| rng.random_range(-pi..pi)).collect()
        };
        let mut best = cost(&ph);
        for _ in 0..sweeps {
            for k in 0..len {
                let mut centre = ph[k];
                let mut width = pi;
                for _ in 0..6 {
                    for j in 0..=32 {
                        let mut trial = ph.clone();
                        trial[k] = centre - width + 2.0 * width * j as f64 / 32.0;
                        let c = cost(&trial);
                        if c < best {
                            best = c;
                            ph = trial;
                        }
                    }
                    centre = ph[k];
                    width /= 8.0;
                }
            }
        }
        if overall.as_ref().is_none_or(|o| best < o.1) {
            overall = Some((ph, best));
        }
    }
    let (ph, best) = overall.expect("at least one restart");
    Ok((PhaseSequence { phases: ph }, best))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectProcessor {
    /// `Σ U_i ⊗ |i⟩⟨i|` on data ⊗ program.
    pub g: UnitaryOp,
    pub program_states: Vec<PureState>,
}

pub fn build_select_processor(programs: &[UnitaryOp]) -> Result<SelectProcessor> {
    let m = programs.len();
    if m > 16 {
        return Err(Error::TooManyPrograms(m));
    }
    let first = programs
        .first()
        .ok_or_else(|| Error::DimensionMismatch("at least one program is required".into()))?;
    if programs.iter().any(|p| p.dims() != first.dims()) {
        return Err(Error::DimensionMismatch(
            "programs act on different registers".into(),
        ));
    }
    let d = first.dim();
    check_dim_cap(d * m)?;
    let mut g = Mat::zeros(d * m, d * m);
    for (i, p) in programs.iter().enumerate() {
        let sel = linalg::ket(m, i) * linalg::ket(m, i).adjoint();
        g += linalg::kron(p.matrix(), &sel);
    }
    let mut dims = first.dims().to_vec();
    dims.push(m);
    let program_states = (0..m)
        .map(|i| PureState::basis(vec![m], i))
        .collect::<Result<_>>()?;
    Ok(SelectProcessor {
        g: UnitaryOp::new(g, dims)?,
        program_states,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoProgrammingReport {
    pub implements_u: bool,
    pub implements_v: bool,
    pub program_overlap: C64,
    /// False only when both are implemented, `u ≁ v` and the programs overlap.
    pub consistent: bool,
}

/// Output program if `G(|j⟩⊗|P⟩) = X|j⟩⊗|P′⟩` for every data basis state
/// with a single `|P′⟩`.
fn implements(g: &Mat, p: &PureState, x: &Mat) -> Option<Vector> {
    let d = x.nrows();
    let m = p.dim();
    if g.nrows() != d * m {
        return None;
    }
    let mut common: Option<Vector> = None;
    for j in 0..d {
        let input = linalg::kron_vec(&linalg::basis_vector(d, j), p.amplitudes());
        let out = g * input;
        let rows = Mat::from_fn(d, m, |a, b| out[a * m + b]);
        let xj = x.column(j).into_owned();
        let pp = (xj.adjoint() * &rows).transpose();
        let rebuilt = &xj * pp.transpose();
        if linalg::max_abs(&(rebuilt - &rows)) > 1e-9 {
            return None;
        }
        match &common {
            None => common = Some(pp),
            Some(c) if (c - &pp).norm() > 1e-9 => return None,
            _ => {}
        }
    }
    common
}

pub fn no_programming_check(
    g: &UnitaryOp,
    pu: &PureState,
    pv: &PureState,
    u: &UnitaryOp,
    v: &UnitaryOp,
) -> Result<NoProgrammingReport> {
    if pu.dim() != pv.dim() || u.dim() != v.dim() || g.dim() != u.dim() * pu.dim() {
        return Err(Error::DimensionMismatch(
            "G must act on data ⊗ program".into(),
        ));
    }
    let implements_u = implements(g.matrix(), pu, u.matrix()).is_some();
    let implements_v = implements(g.matrix(), pv, v.matrix()).is_some();
    let program_overlap = pu.inner(pv);
    let distinct = linalg::phase_aligned_distance(u.matrix(), v.matrix()) > 1e-6;
    let consistent = !(implements_u && implements_v && distinct && program_overlap.norm() > 1e-9);
    Ok(NoProgrammingReport {
        implements_u,
        implements_v,
        program_overlap,
        consistent,
    })
}

pub const RECORD_BITS: usize = 26;

/// Gate records packed LSB-first: 2-bit kind (`00` H, `01` T, `10` CZ),
/// 8-bit step, two 8-bit wire slots (`0xFF` when unused).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalProgram {
    pub qubits: usize,
    pub records: usize,
    pub bytes: Vec<u8>,
}

fn put_bits(bytes: &mut [u8], at: usize, width: usize, value: u32) {
    for b in 0..width {
        if (value >> b) & 1 == 1 {
            bytes[(at + b) / 8] |= 1 << ((at + b) % 8);
        }
    }
}

fn get_bits(bytes: &[u8], at: usize, width: usize) -> u32 {
    (0..width).fold(0, |acc, b| {
        acc | ((((bytes[(at + b) / 8] >> ((at + b) % 8)) & 1) as u32) << b)
    })
}

pub fn program_encode(c: &Circuit) -> Result<ClassicalProgram> {
    if c.wires() > 255 || c.len() > 256 {
        return Err(Error::OutOfRange("at most 255 wires and 256 steps".into()));
    }
    let mut bytes = vec![0u8; (c.len() * RECORD_BITS).div_ceil(8)];
    for (step, g) in c.gates().iter().enumerate() {
        let kind = match g.kind() {
            GateKind::H => 0,
            GateKind::T => 1,
            GateKind::CZ => 2,
            other => return Err(Error::UnsupportedGate(other.name().to_string())),
        };
        let t = g.targets();
        let at = step * RECORD_BITS;
        put_bits(&mut bytes, at, 2, kind);
        put_bits(&mut bytes, at + 2, 8, step as u32);
        put_bits(&mut bytes, at + 10, 8, t[0] as u32);
        put_bits(&mut bytes, at + 18, 8, t.get(1).map_or(0xFF, |&w| w as u32));
    }
    Ok(ClassicalProgram {
        qubits: c.wires(),
        records: c.len(),
        bytes,
    })
}

pub fn program_decode(p: &ClassicalProgram) -> Result<Circuit> {
    if p.bytes.len() != (p.records * RECORD_BITS).div_ceil(8) {
        return Err(Error::MalformedProgram(format!(
            "{} bytes for {} records",
            p.bytes.len(),
            p.records
        )));
    }
    let mut c = Circuit::new(p.qubits);
    for r in 0..p.records {
        let at = r * RECORD_BITS;
        let step = get_bits(&p.bytes, at + 2, 8) as usize;
        if step != r {
            return Err(Error::MalformedProgram(format!(
                "record {r} claims step {step}"
            )));
        }
        let w0 = get_bits(&p.bytes, at + 10, 8) as usize;
        let w1 = get_bits(&p.bytes, at + 18, 8) as usize;
        let (kind, targets) = match get_bits(&p.bytes, at, 2) {
            0 => (GateKind::H, vec![w0]),
            1 => (GateKind::T, vec![w0]),
            2 => (GateKind::CZ, vec![w0, w1]),
            k => {
                return Err(Error::MalformedProgram(format!(
                    "record {r} has kind {k:02b}"
                )))
            }
        };
        if targets.len() == 1 && w1 != 0xFF {
            return Err(Error::MalformedProgram(format!(
                "record {r} fills an unused wire slot"
            )));
        }
        let gate = Gate::new(kind, targets)
            .map_err(|e| Error::MalformedProgram(format!("record {r}: {e}")))?;
        c.push(gate)
            .map_err(|e| Error::MalformedProgram(format!("record {r}: {e}")))?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        hadamard, max_abs, pauli_x, pauli_z, random_gaussian_matrix, random_hermitian,
        random_unitary, ZERO,
    };

    fn scaled_random(rng: &mut ChaCha8Rng, d: usize, norm: f64) -> Mat {
        let a = random_gaussian_matrix(d, d, rng);
        let n = linalg::spectral_norm(&a);
        a * linalg::c(norm / n, 0.0)
    }

    fn random_phases(rng: &mut ChaCha8Rng, len: usize) -> PhaseSequence {
        PhaseSequence::new((0..len).map(|_| rng.random_range(-3.2..3.2)).collect()).unwrap()
    }

    #[test]
    fn qsp_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let g = random_unitary(2, &mut rng);
        let empty = qsp_unitary(&g, &PhaseSequence::default()).unwrap();
        assert!(max_abs(&(empty.matrix() - linalg::identity(2))) < 1e-15);
        let one = qsp_unitary(
            &linalg::identity(2),
            &PhaseSequence::new(vec![0.4]).unwrap(),
        )
        .unwrap();
        assert!(max_abs(&(one.matrix() - z_phase(0.4))) < 1e-15);
        let ph = random_phases(&mut rng, 5);
        let got = qsp_unitary(&g, &ph).unwrap();
        // Explicit product written out.
        let mut m = linalg::identity(2);
        for k in 0..5 {
            let e = ph.phases[k];
            let z = linalg::mat_from_rows(&[&[linalg::cis(e), ZERO], &[ZERO, linalg::cis(-e)]]);
            m = m * z * &g;
        }
        assert!(max_abs(&(got.matrix() - m)) < 1e-12);
    }

    #[test]
    fn block_encode_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        let u = random_unitary(3, &mut rng);
        let be = block_encode(&u).unwrap();
        assert!(max_abs(&be.unitary().view((0, 3), (3, 3)).into_owned()) < 1e-7);
        assert!(max_abs(&be.unitary().view((3, 0), (3, 3)).into_owned()) < 1e-7);
        let half = linalg::identity(2) * linalg::c(0.5, 0.0);
        let be = block_encode(&half).unwrap();
        assert!(linalg::unitarity_deviation(be.unitary()) < 1e-10);
        assert!(max_abs(&(be.block() - &half)) < 1e-12);
        let off = be.unitary().view((0, 2), (2, 2)).into_owned();
        assert!(max_abs(&(off - linalg::identity(2) * linalg::c(0.75f64.sqrt(), 0.0))) < 1e-12);
        let big = linalg::identity(2) * linalg::c(1.5, 0.0);
        assert!(
            matches!(block_encode(&big), Err(Error::NormTooLarge(n)) if (n - 1.5).abs() < 1e-12)
        );
        let a = scaled_random(&mut rng, 4, 0.9);
        assert!(max_abs(&(block_encode(&a).unwrap().block() - a)) < 1e-10);
    }

    #[test]
    fn qsvt_single_u_is_a() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let a = scaled_random(&mut rng, 3, 0.8);
        let be = block_encode(&a).unwrap();
        let b = qsvt_apply(&be, &PhaseSequence::new(vec![0.0]).unwrap());
        assert!(max_abs(&(b - a)) < 1e-12);
    }

    #[test]
    fn qsvt_diagonal_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(84);
        let (s1, s2) = (0.3, 0.85);
        let a = Mat::from_diagonal(&Vector::from_vec(vec![
            linalg::c(s1, 0.0),
            linalg::c(s2, 0.0),
        ]));
        let be = block_encode(&a).unwrap();
        let ph = random_phases(&mut rng, 4);
        let b = qsvt_apply(&be, &ph);
        assert!(b[(0, 1)].norm() < 1e-12 && b[(1, 0)].norm() < 1e-12);
        assert!((b[(0, 0)] - qsvt_oracle(s1, &ph)).norm() < 1e-8);
        assert!((b[(1, 1)] - qsvt_oracle(s2, &ph)).norm() < 1e-8);
    }

    #[test]
    fn qsvt_random_matches_svd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(85);
        for len in 1..=8 {
            let a = scaled_random(&mut rng, 3, 0.95);
            let be = block_encode(&a).unwrap();
            let ph = random_phases(&mut rng, len);
            let b = qsvt_apply(&be, &ph);
            let sv = SvDecomposition::new(&a);
            let expected = if len % 2 == 1 {
                sv.map(|s| qsvt_oracle(s, &ph))
            } else {
                sv.map_right(|s| qsvt_oracle(s, &ph))
            };
            assert!(max_abs(&(b - expected)) < 1e-8, "length {len}");
        }
    }

    #[test]
    fn oracle_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(86);
        for len in 1..=7 {
            let ph = random_phases(&mut rng, len);
            for s in [0.1, 0.5, 0.9] {
                let sign = if len % 2 == 0 { 1.0 } else { -1.0 };
                assert!((qsvt_oracle(-s, &ph) - qsvt_oracle(s, &ph) * sign).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pi_phases_give_chebyshev() {
        for k in 0..6 {
            let ph = PhaseSequence::new(vec![std::f64::consts::PI; k]).unwrap();
            for x in [0.0, 0.3, 0.77, 1.0] {
                let t = (k as f64 * f64::acos(x)).cos();
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert!((qsvt_oracle(x, &ph) - linalg::c(sign * t, 0.0)).norm() < 1e-12);
            }
        }
    }

    fn entry(beta: C64, a: &Mat, ph: &PhaseSequence) -> LcuEntry {
        LcuEntry {
            beta,
            encoding: block_encode(a).unwrap(),
            phases: ph.clone(),
        }
    }

    #[test]
    fn lcu_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(87);
        let a = scaled_random(&mut rng, 2, 0.7);
        let ph = random_phases(&mut rng, 3);
        let be = block_encode(&a).unwrap();
        let direct = qsvt_apply(&be, &ph);
        let single = lcu_combine(&[entry(ONE, &a, &ph)]).unwrap();
        assert!((single.subnormalization - 1.0).abs() < 1e-15);
        assert!(max_abs(&(single.encoding.block() - &direct)) < 1e-8);
        let half = linalg::c(0.5, 0.0);
        let pair = lcu_combine(&[entry(half, &a, &ph), entry(half, &a, &ph)]).unwrap();
        assert!(max_abs(&(pair.encoding.block() - &direct)) < 1e-8);
        // Noncommuting seeds.
        let a1 = pauli_x() * linalg::c(0.6, 0.0);
        let a2 = (pauli_z() + hadamard()) * linalg::c(0.3, 0.0);
        let (p1, p2) = (random_phases(&mut rng, 3), random_phases(&mut rng, 2));
        let (b1, b2) = (linalg::c(0.7, -0.2), linalg::c(-0.4, 0.9));
        let r = lcu_combine(&[entry(b1, &a1, &p1), entry(b2, &a2, &p2)]).unwrap();
        let oracle = (qsvt_apply(&block_encode(&a1).unwrap(), &p1) * b1
            + qsvt_apply(&block_encode(&a2).unwrap(), &p2) * b2)
            / linalg::c(b1.norm() + b2.norm(), 0.0);
        assert!(max_abs(&(r.encoding.block() - oracle)) < 1e-8);
    }

    #[test]
    fn lcu_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let es: Vec<LcuEntry> = (0..4)
            .map(|k| {
                let a = scaled_random(&mut rng, 2, 0.9);
                let ph = random_phases(&mut rng, k + 1);
                entry(
                    linalg::c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                    &a,
                    &ph,
                )
            })
            .collect();
        let full = lcu_combine(&es).unwrap();
        let left = lcu_combine(&es[..2]).unwrap();
        let right = lcu_combine(&es[2..]).unwrap();
        let lhs = full.encoding.block() * linalg::c(full.subnormalization, 0.0);
        let rhs = left.encoding.block() * linalg::c(left.subnormalization, 0.0)
            + right.encoding.block() * linalg::c(right.subnormalization, 0.0);
        assert!(max_abs(&(lhs - rhs)) < 1e-8);
    }

    #[test]
    fn bessel_values() {
        // Reference values of J_0(1), J_1(1), J_2(2.5).
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j(2, 2.5) - 0.446_059_058_439_617_2).abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_simulation() {
        let id = hamiltonian_sim_lcu(&pauli_x(), 0.0, 3).unwrap();
        assert!(max_abs(&(id.matrix - linalg::identity(2))) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(89);
        let v = random_unitary(2, &mut rng);
        let h = &v * pauli_z() * v.adjoint();
        let exact = linalg::expm_hermitian(&h, -1.0);
        let r = hamiltonian_sim_lcu(&h, 1.0, 10).unwrap();
        let dist = linalg::spectral_norm(&(&r.matrix - &exact));
        assert!(dist <= 1e-6 && dist <= r.truncation_bound + 1e-10);
        assert!(r.warning.is_none());
        let h4 = random_hermitian(3, &mut rng);
        let mut prev = f64::INFINITY;
        for d in [1, 3, 5, 7, 9] {
            let r = hamiltonian_sim_lcu(&h4, 0.6 / linalg::spectral_norm(&h4), d).unwrap();
            let e = linalg::spectral_norm(
                &(r.matrix - linalg::expm_hermitian(&h4, -0.6 / linalg::spectral_norm(&h4))),
            );
            assert!(e < prev);
            prev = e;
        }
        assert!(hamiltonian_sim_lcu(&h, 3.0, 20).unwrap().warning.is_some());
    }

    #[test]
    fn phase_fitter_recovers_a_reachable_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(90);
        let truth = random_phases(&mut rng, 3);
        let samples: Vec<f64> = (0..9).map(|k| 0.1 * (k + 1) as f64).collect();
        let (_, res) = fit_phases(|s| qsvt_oracle(s, &truth), &samples, 3, 40).unwrap();
        assert!(res < 1e-4);
        assert!(fit_phases(|_| ONE, &samples, 9, 1).is_err());
    }

    #[test]
    fn select_processor_examples() {
        let x = UnitaryOp::qubits(pauli_x()).unwrap();
        let id = UnitaryOp::identity(vec![2]);
        let sp = build_select_processor(&[id.clone(), x.clone()]).unwrap();
        let input = PureState::zero_qubits(1).tensor(&sp.program_states[1]);
        let out = sp.g.apply_to(&input).unwrap();
        let expected = PureState::basis(vec![2], 1)
            .unwrap()
            .tensor(&sp.program_states[1]);
        assert!(out.fidelity(&expected) > 1.0 - 1e-15);
        let single = build_select_processor(&[x.clone()]).unwrap();
        assert!(max_abs(&(single.g.matrix() - pauli_x())) < 1e-15);
        let many: Vec<UnitaryOp> = (0..17).map(|_| id.clone()).collect();
        assert!(matches!(
            build_select_processor(&many),
            Err(Error::TooManyPrograms(17))
        ));
    }

    #[test]
    fn select_processor_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let progs: Vec<UnitaryOp> = (0..4)
            .map(|_| UnitaryOp::new(random_unitary(4, &mut rng), vec![2, 2]).unwrap())
            .collect();
        let sp = build_select_processor(&progs).unwrap();
        for _ in 0..20 {
            let phi = PureState::random(vec![2, 2], &mut rng);
            for (i, p) in progs.iter().enumerate() {
                let out = sp.g.apply_to(&phi.tensor(&sp.program_states[i])).unwrap();
                let expected = p.apply_to(&phi).unwrap().tensor(&sp.program_states[i]);
                assert!(out.fidelity(&expected) > 1.0 - 1e-12);
            }
        }
    }

    #[test]
    fn no_programming_examples() {
        let x = UnitaryOp::qubits(pauli_x()).unwrap();
        let id = UnitaryOp::identity(vec![2]);
        let sp = build_select_processor(&[id.clone(), x.clone()]).unwrap();
        let (p0, p1) = (&sp.program_states[0], &sp.program_states[1]);
        let r = no_programming_check(&sp.g, p0, p1, &id, &x).unwrap();
        assert!(r.implements_u && r.implements_v && r.consistent);
        assert_eq!(r.program_overlap, ZERO);
        let same = no_programming_check(&sp.g, p0, p0, &id, &id).unwrap();
        assert!(same.implements_u && same.implements_v);
        assert!((same.program_overlap - ONE).norm() < 1e-15);
        let plus = PureState::plus_qubits(1);
        let bad = no_programming_check(&sp.g, p0, &plus, &id, &x).unwrap();
        assert!(!(bad.implements_u && bad.implements_v));
        assert!(bad.consistent);
    }

    #[test]
    fn program_layout_is_bit_exact() {
        let c = Circuit::from_gates(1, vec![Gate::h(0)]).unwrap();
        let p = program_encode(&c).unwrap();
        assert_eq!(p.bytes, vec![0x00, 0x00, 0xFC, 0x03]);
        let c2 = Circuit::from_gates(3, vec![Gate::t(2), Gate::cz(0, 1).unwrap()]).unwrap();
        let p2 = program_encode(&c2).unwrap();
        // Second record starts at bit 26: kind 10, step 1, wires 0 and 1.
        let bits = |at: usize, w: usize| get_bits(&p2.bytes, at, w);
        assert_eq!(
            (bits(0, 2), bits(2, 8), bits(10, 8), bits(18, 8)),
            (1, 0, 2, 0xFF)
        );
        assert_eq!(
            (bits(26, 2), bits(28, 8), bits(36, 8), bits(44, 8)),
            (2, 1, 0, 1)
        );
        assert_eq!(p2.bytes.len(), 7);
    }

    #[test]
    fn program_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(92);
        for _ in 0..20 {
            let n = rng.random_range(1..5);
            let mut c = Circuit::new(n);
            for _ in 0..rng.random_range(0..12) {
                let g = match rng.random_range(0..3) {
                    0 => Gate::h(rng.random_range(0..n)),
                    1 => Gate::t(rng.random_range(0..n)),
                    _ if n > 1 => {
                        let a = rng.random_range(0..n);
                        Gate::cz(a, (a + 1) % n).unwrap()
                    }
                    _ => Gate::h(0),
                };
                c.push(g).unwrap();
            }
            assert_eq!(program_decode(&program_encode(&c).unwrap()).unwrap(), c);
        }
        let x = Circuit::from_gates(1, vec![Gate::x(0)]).unwrap();
        assert!(matches!(program_encode(&x), Err(Error::UnsupportedGate(_))));
        let mut p = program_encode(&Circuit::from_gates(1, vec![Gate::h(0)]).unwrap()).unwrap();
        p.bytes[0] |= 0x03;
        assert!(matches!(
            program_decode(&p),
            Err(Error::MalformedProgram(_))
        ));
    }
}
