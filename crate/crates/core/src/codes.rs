//! Stabilizer codes, Knill-Laflamme checks, recovery synthesis, logical and
//! transversal gate checks, gauge fixing and concatenation.

use std::fmt;
use std::str::FromStr;

use crate::channel::{self, KrausChannel};
use crate::linalg::{self, Mat, Vector, I};
use crate::{check_cap, Error, Result};

/// Pauli operator `i^phase · σ(x_0,z_0) ⊗ … ⊗ σ(x_{n-1},z_{n-1})` with
/// `σ(1,1) = Y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: Vec<bool>,
    z: Vec<bool>,
    phase: u8,
}

impl PauliString {
    pub fn new(x: Vec<bool>, z: Vec<bool>, phase: u8) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::InvalidPauli(format!(
                "x has {} bits, z has {}",
                x.len(),
                z.len()
            )));
        }
        Ok(Self {
            x,
            z,
            phase: phase % 4,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            x: vec![false; n],
            z: vec![false; n],
            phase: 0,
        }
    }

    /// Single-qubit `kind` (one of `IXYZ`) on wire `k`.
    pub fn single(n: usize, k: usize, kind: char) -> Result<Self> {
        let mut p = Self::identity(n);
        if k >= n {
            return Err(Error::WireOutOfRange { wire: k, wires: n });
        }
        let (x, z) = letter_bits(kind).ok_or_else(|| Error::InvalidPauli(kind.to_string()))?;
        p.x[k] = x;
        p.z[k] = z;
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x_bits(&self) -> &[bool] {
        &self.x
    }

    pub fn z_bits(&self) -> &[bool] {
        &self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .filter(|(a, b)| **a || **b)
            .count()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.weight() == 0
    }

    /// Hermitian iff the phase is real.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        let s = (0..self.len())
            .filter(|&k| (self.x[k] && other.z[k]) != (self.z[k] && other.x[k]))
            .count();
        s % 2 == 0
    }

    /// Product `self · other`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        if self.len() != other.len() {
            return Err(Error::InvalidPauli("length mismatch".into()));
        }
        let mut phase = self.phase as i32 + other.phase as i32;
        let mut x = Vec::with_capacity(self.len());
        let mut z = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            let (x1, z1, x2, z2) = (
                self.x[k] as i32,
                self.z[k] as i32,
                other.x[k] as i32,
                other.z[k] as i32,
            );
            phase += match (x1, z1) {
                (0, 0) => 0,
                (1, 1) => z2 - x2,
                (1, 0) => z2 * (2 * x2 - 1),
                _ => x2 * (1 - 2 * z2),
            };
            x.push(self.x[k] != other.x[k]);
            z.push(self.z[k] != other.z[k]);
        }
        Ok(PauliString {
            x,
            z,
            phase: phase.rem_euclid(4) as u8,
        })
    }

    fn symplectic(&self) -> Vec<bool> {
        self.x.iter().chain(&self.z).copied().collect()
    }

    pub fn to_matrix(&self) -> Mat {
        let locals: Vec<Mat> = (0..self.len())
            .map(|k| match (self.x[k], self.z[k]) {
                (false, false) => linalg::identity(2),
                (true, false) => linalg::pauli_x(),
                (true, true) => linalg::pauli_y(),
                (false, true) => linalg::pauli_z(),
            })
            .collect();
        linalg::kron_all(&locals) * I.powu(self.phase as u32)
    }

    /// Applies the Pauli to the columns of `m` (rows indexed by basis states,
    /// wire 0 most significant) without building the full matrix.
    pub fn apply_to_columns(&self, m: &Mat) -> Mat {
        let n = self.len();
        let mask = |bits: &[bool]| bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        let (xm, zm) = (mask(&self.x), mask(&self.z));
        let ys = self
            .x
            .iter()
            .zip(&self.z)
            .filter(|(a, b)| **a && **b)
            .count() as u32;
        let base = I.powu((self.phase as u32 + ys) % 4);
        let mut out = Mat::zeros(m.nrows(), m.ncols());
        debug_assert_eq!(m.nrows(), 1 << n);
        for b in 0..m.nrows() {
            let sign = if (zm & b).count_ones() % 2 == 1 {
                -base
            } else {
                base
            };
            for j in 0..m.ncols() {
                out[(b ^ xm, j)] = m[(b, j)] * sign;
            }
        }
        out
    }
}

fn letter_bits(c: char) -> Option<(bool, bool)> {
    Some(match c {
        'I' => (false, false),
        'X' => (true, false),
        'Y' => (true, true),
        'Z' => (false, true),
        _ => return None,
    })
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let (phase, body) = if let Some(r) = t.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = t.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = t.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = t.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = t.strip_prefix('-') {
            (2, r)
        } else {
            (0, t)
        };
        let mut x = Vec::new();
        let mut z = Vec::new();
        for c in body.chars() {
            let (a, b) = letter_bits(c).ok_or_else(|| Error::InvalidPauli(s.to_string()))?;
            x.push(a);
            z.push(b);
        }
        if x.is_empty() {
            return Err(Error::InvalidPauli(s.to_string()));
        }
        Ok(PauliString { x, z, phase })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = ["+", "+i", "-", "-i"][self.phase as usize];
        let body: String = (0..self.len())
            .map(|k| match (self.x[k], self.z[k]) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            })
            .collect();
        write!(f, "{sign}{body}")
    }
}

/// Rank of a set of bit rows over GF(2).
pub fn gf2_rank(rows: &[Vec<bool>]) -> usize {
    let mut m: Vec<Vec<bool>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        if let Some(p) = (rank..m.len()).find(|&r| m[r][c]) {
            m.swap(rank, p);
            let pivot = m[rank].clone();
            for (r, row) in m.iter_mut().enumerate() {
                if r != rank && row[c] {
                    for (a, b) in row.iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Membership of `p` (modulo phase) in the group generated by `gens`.
pub fn in_span(gens: &[PauliString], p: &PauliString) -> bool {
    let mut rows: Vec<Vec<bool>> = gens.iter().map(|g| g.symplectic()).collect();
    let r = gf2_rank(&rows);
    rows.push(p.symplectic());
    gf2_rank(&rows) == r
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilizerCode {
    n: usize,
    generators: Vec<PauliString>,
    logical_x: Option<PauliString>,
    logical_z: Option<PauliString>,
    pub label: Option<String>,
}

impl StabilizerCode {
    pub fn new(
        n: usize,
        generators: Vec<PauliString>,
        logical_x: Option<PauliString>,
        logical_z: Option<PauliString>,
    ) -> Result<Self> {
        for g in generators.iter().chain(&logical_x).chain(&logical_z) {
            if g.len() != n {
                return Err(Error::InvalidPauli(format!(
                    "{g} has length {}, code has {n} qubits",
                    g.len()
                )));
            }
        }
        for (i, g) in generators.iter().enumerate() {
            if g.is_identity_up_to_phase() && g.phase == 2 {
                return Err(Error::MinusIdentity);
            }
            if !g.is_hermitian() {
                return Err(Error::InvalidPauli(format!(
                    "generator {g} is not Hermitian"
                )));
            }
            for (j, h) in generators.iter().enumerate().take(i) {
                if !g.commutes(h) {
                    return Err(Error::Anticommuting(j, i));
                }
            }
            let rows: Vec<Vec<bool>> = generators[..=i].iter().map(|g| g.symplectic()).collect();
            if gf2_rank(&rows) != i + 1 {
                return Err(Error::DependentGenerator(i));
            }
        }
        for l in logical_x.iter().chain(&logical_z) {
            if !l.is_hermitian()
                || generators.iter().any(|g| !g.commutes(l))
                || in_span(&generators, l)
            {
                return Err(Error::InvalidPauli(format!(
                    "{l} is not a nontrivial logical operator"
                )));
            }
        }
        if let (Some(x), Some(z)) = (&logical_x, &logical_z) {
            if x.commutes(z) {
                return Err(Error::InvalidPauli(
                    "logical X and Z must anticommute".into(),
                ));
            }
        }
        Ok(Self {
            n,
            generators,
            logical_x,
            logical_z,
            label: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.n - self.generators.len()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn logical_x(&self) -> Option<&PauliString> {
        self.logical_x.as_ref()
    }

    pub fn logical_z(&self) -> Option<&PauliString> {
        self.logical_z.as_ref()
    }

    /// Encoder `V = [|0̄⟩, |1̄⟩]` with `Z̄|0̄⟩ = |0̄⟩` and `|1̄⟩ = X̄|0̄⟩`
    /// (one logical qubit only).
    pub fn encoder(&self) -> Result<Mat> {
        let (Some(lx), Some(lz)) = (&self.logical_x, &self.logical_z) else {
            return Err(Error::MissingLogicals);
        };
        if self.k() != 1 {
            return Err(Error::MissingLogicals);
        }
        check_cap(self.n)?;
        let dim = 1usize << self.n;
        // Project every basis vector and keep the first that survives.
        let mut proj = linalg::identity(dim);
        let mut gens = self.generators.clone();
        gens.push(lz.clone());
        for g in &gens {
            let gp = g.apply_to_columns(&proj);
            proj = (proj + gp) * linalg::c(0.5, 0.0);
        }
        let zero = orthonormal_first_column(&proj)?;
        let one = lx.apply_to_columns(&zero);
        let mut v = Mat::zeros(dim, 2);
        v.set_column(0, &zero.column(0));
        v.set_column(1, &one.column(0));
        Ok(v)
    }
}

fn orthonormal_first_column(m: &Mat) -> Result<Mat> {
    let (j, n) = (0..m.ncols())
        .map(|j| (j, m.column(j).norm()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or(Error::ZeroNorm)?;
    if n < 1e-12 {
        return Err(Error::ZeroNorm);
    }
    Ok(Mat::from_iterator(
        m.nrows(),
        1,
        m.column(j).iter().map(|z| z / n),
    ))
}

/// `n`-qubit bit-flip repetition code, stabilizers `Z_k Z_{k+1}`,
/// `X̄ = X^{⊗n}`, `Z̄ = Z_0`.
pub fn repetition_code(n: usize) -> StabilizerCode {
    let gens = (0..n - 1)
        .map(|k| {
            let mut p = PauliString::identity(n);
            p.z[k] = true;
            p.z[k + 1] = true;
            p
        })
        .collect();
    let lx = PauliString::new(vec![true; n], vec![false; n], 0).unwrap();
    let lz = PauliString::single(n, 0, 'Z').unwrap();
    let mut code = StabilizerCode::new(n, gens, Some(lx), Some(lz)).expect("valid repetition code");
    code.label = Some(format!("[[{n},1,1]]"));
    code
}

/// The `[[5,1,3]]` code.
pub fn five_qubit_code() -> StabilizerCode {
    let gens = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let mut code = StabilizerCode::new(
        5,
        gens,
        Some("XXXXX".parse().unwrap()),
        Some("ZZZZZ".parse().unwrap()),
    )
    .expect("valid five-qubit code");
    code.label = Some("[[5,1,3]]".into());
    code
}

/// Hermitian idempotent with an orthonormal basis (`isometry`) of its range.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeProjector {
    matrix: Mat,
    rank: usize,
    isometry: Mat,
}

impl CodeProjector {
    pub fn new(matrix: Mat) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch("projector must be square".into()));
        }
        linalg::ensure_hermitian(&matrix, 1e-10)?;
        let dev = linalg::max_abs(&(&matrix * &matrix - &matrix));
        if dev > 1e-10 {
            return Err(Error::DimensionMismatch(format!(
                "not idempotent (deviation {dev:.2e})"
            )));
        }
        let isometry = linalg::orthonormal_columns(&matrix, 1e-6);
        let rank = isometry.ncols();
        Ok(Self {
            matrix,
            rank,
            isometry,
        })
    }

    /// `P = V V†` for an isometry `V`; keeps `V` as the logical basis.
    pub fn from_isometry(v: Mat) -> Result<Self> {
        let dev = linalg::isometry_deviation(&v);
        if dev > 1e-10 {
            return Err(Error::NotIsometry(dev));
        }
        Ok(Self {
            matrix: &v * v.adjoint(),
            rank: v.ncols(),
            isometry: v,
        })
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn isometry(&self) -> &Mat {
        &self.isometry
    }
}

/// `Π_i (1 + S_i)/2`; the logical basis is the encoder when logicals are set.
pub fn projector_from_stabilizers(code: &StabilizerCode) -> Result<CodeProjector> {
    check_cap(code.n)?;
    if code.logical_x.is_some() && code.logical_z.is_some() && code.k() == 1 {
        return CodeProjector::from_isometry(code.encoder()?);
    }
    let dim = 1usize << code.n;
    let mut p = linalg::identity(dim);
    for g in &code.generators {
        let gp = g.apply_to_columns(&p);
        p = (p + gp) * linalg::c(0.5, 0.0);
    }
    CodeProjector::new(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KlReport {
    /// `[a_ij]`, present when every pair passed.
    pub a: Option<Mat>,
    pub correctable: bool,
    /// First failing `(i, j)` in row-major order.
    pub witness: Option<(usize, usize)>,
}

/// Knill-Laflamme test `P E_i† E_j P = a_ij P`, evaluated as
/// `V† E_i† E_j V = a_ij 1` on the code isometry.
pub fn kl_check(p: &CodeProjector, errors: &[Mat]) -> Result<KlReport> {
    let v = p.isometry();
    let ev: Vec<Mat> = errors
        .iter()
        .map(|e| {
            if e.shape() != (p.dim(), p.dim()) {
                return Err(Error::DimensionMismatch(format!(
                    "error is {}x{}, code space dimension {}",
                    e.nrows(),
                    e.ncols(),
                    p.dim()
                )));
            }
            Ok(e * v)
        })
        .collect::<Result<_>>()?;
    let r = p.rank().max(1);
    let m = errors.len();
    let mut a = Mat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let block = ev[i].adjoint() * &ev[j];
            let aij = block.trace() / linalg::c(r as f64, 0.0);
            let dev = linalg::max_abs(&(block - linalg::identity(p.rank()) * aij));
            if dev > 1e-9 {
                return Ok(KlReport {
                    a: None,
                    correctable: false,
                    witness: Some((i, j)),
                });
            }
            a[(i, j)] = aij;
        }
    }
    Ok(KlReport {
        a: Some(a),
        correctable: true,
        witness: None,
    })
}

/// Recovery `R_s = P F_s† / √d_s` from the diagonalized KL matrix, plus a
/// completion `√(1 − Σ R_s†R_s)` when needed.
pub fn recovery_from_errors(p: &CodeProjector, errors: &[Mat]) -> Result<KrausChannel> {
    let report = kl_check(p, errors)?;
    let a = match report.a {
        Some(a) => a,
        None => {
            let (i, j) = report.witness.unwrap_or((0, 0));
            return Err(Error::KlViolation(i, j));
        }
    };
    let (d, u) = linalg::eigh(&a);
    let dim = p.dim();
    let mut ops = Vec::new();
    for (s, &ds) in d.iter().enumerate() {
        if ds <= 1e-12 {
            continue;
        }
        let mut f = Mat::zeros(dim, dim);
        for (i, e) in errors.iter().enumerate() {
            f += e * u[(i, s)];
        }
        ops.push(p.matrix() * f.adjoint() / linalg::c(ds.sqrt(), 0.0));
    }
    let sum = ops
        .iter()
        .fold(Mat::zeros(dim, dim), |acc, r| acc + r.adjoint() * r);
    let rest = linalg::identity(dim) - sum;
    if linalg::max_abs(&rest) > 1e-12 {
        ops.push(linalg::psd_sqrt(&rest));
    }
    KrausChannel::new(ops)
}

/// The logical channel `Dec ∘ R ∘ N ∘ Enc`, where `Enc` is the code
/// isometry and `Dec(X) = V†XV + tr((1 − P)X)|0⟩⟨0|`.
pub fn effective_logical_channel(
    recovery: &KrausChannel,
    noise: &KrausChannel,
    p: &CodeProjector,
) -> Result<KrausChannel> {
    let dim = p.dim();
    if noise.input_dim() != dim
        || noise.output_dim() != dim
        || recovery.input_dim() != dim
        || recovery.output_dim() != dim
    {
        return Err(Error::DimensionMismatch(
            "noise and recovery must act on the physical space".into(),
        ));
    }
    let v = p.isometry();
    let r = p.rank();
    let mut omega = Mat::zeros(r * r, r * r);
    for rk in recovery.ops() {
        for nk in noise.ops() {
            let w = rk * (nk * v);
            let inside = v.adjoint() * &w;
            let leak = w.adjoint() * &w - inside.adjoint() * &inside;
            for i in 0..r {
                for j in 0..r {
                    for o in 0..r {
                        for o2 in 0..r {
                            let mut val = inside[(o, i)] * inside[(o2, j)].conj();
                            if o == 0 && o2 == 0 {
                                val += leak[(j, i)];
                            }
                            omega[(o * r + i, o2 * r + j)] += val;
                        }
                    }
                }
            }
        }
    }
    omega /= linalg::c(r as f64, 0.0);
    channel::choi_to_channel(&omega, r, r)
}

/// `D(Dec ∘ R ∘ N ∘ Enc, 1_L)` with the Choi trace distance.
pub fn qec_accuracy(
    recovery: &KrausChannel,
    noise: &KrausChannel,
    p: &CodeProjector,
) -> Result<f64> {
    let eff = effective_logical_channel(recovery, noise, p)?;
    channel::channel_distance(&eff, &KrausChannel::identity(p.rank()))
}

/// `‖[U, P]‖ ≤ 1e-9`.
pub fn is_logical_unitary(u: &Mat, p: &CodeProjector) -> Result<bool> {
    if u.shape() != p.matrix.shape() {
        return Err(Error::DimensionMismatch(
            "operator and projector dimensions differ".into(),
        ));
    }
    let comm = u * p.matrix() - p.matrix() * u;
    Ok(comm.norm() <= 1e-9)
}

/// `Φ†(P) = P` and `Φ(P)` supported on the code space.
pub fn is_logical_channel(ch: &KrausChannel, p: &CodeProjector) -> Result<bool> {
    let pm = p.matrix();
    let dual = ch.apply_dual(pm)?;
    let image = ch.apply(pm)?;
    let outside = (linalg::identity(p.dim()) - pm) * image;
    Ok((dual - pm).norm() <= 1e-9 && outside.norm() <= 1e-9)
}

/// Factors `u = ⊗_j U_j` across `blocks` (each a list of qubit wires; the
/// blocks must partition the register). `None` when some block is entangled
/// with the rest.
pub fn is_transversal(u: &Mat, blocks: &[Vec<usize>]) -> Result<Option<Vec<Mat>>> {
    let n = u.nrows().trailing_zeros() as usize;
    if u.nrows() != 1 << n || !u.is_square() {
        return Err(Error::DimensionMismatch(
            "operator must act on qubits".into(),
        ));
    }
    let mut perm: Vec<usize> = blocks.iter().flatten().copied().collect();
    let mut sorted = perm.clone();
    sorted.sort();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::DimensionMismatch(format!(
            "blocks {blocks:?} do not partition {n} wires"
        )));
    }
    let ordered = linalg::permute_operator(u, &vec![2; n], &perm)?;
    perm.clear();
    let mut rest = ordered;
    let mut factors = Vec::with_capacity(blocks.len());
    for block in &blocks[..blocks.len().saturating_sub(1)] {
        let da = 1usize << block.len();
        let dr = rest.nrows() / da;
        let reshaped = Mat::from_fn(da * da, dr * dr, |ai, ri| {
            let (oa, ia) = (ai / da, ai % da);
            let (or, ir) = (ri / dr, ri % dr);
            rest[(oa * dr + or, ia * dr + ir)]
        });
        let (uu, s, vv) = linalg::svd(&reshaped);
        let tail: f64 = s.iter().skip(1).map(|x| x * x).sum::<f64>().sqrt();
        if tail > 1e-9 {
            return Ok(None);
        }
        let scale = (da as f64).sqrt();
        let a = Mat::from_fn(da, da, |o, i| uu[(o * da + i, 0)] * scale);
        let b = Mat::from_fn(dr, dr, |o, i| vv[(o * dr + i, 0)].conj() * (s[0] / scale));
        factors.push(a);
        rest = b;
    }
    factors.push(rest);
    Ok(Some(factors))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyEntry {
    /// Gate indices in application order; the per-block gate is their product.
    pub word: Vec<usize>,
    pub logical: Mat,
}

/// Words of at most `max_word` listed single-qubit gates, applied as `G^{⊗n}`;
/// keeps those preserving the code space, deduplicated by logical action up
/// to phase. The empty word (identity) comes first.
pub fn transversal_logical_survey(
    code: &StabilizerCode,
    single_block_gates: &[Mat],
    max_word: usize,
) -> Result<Vec<SurveyEntry>> {
    let p = projector_from_stabilizers(code)?;
    let v = p.isometry();
    let n = code.n;
    let mut out: Vec<SurveyEntry> = Vec::new();
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    for len in 0..=max_word {
        if len > 0 {
            words = words
                .iter()
                .filter(|w| w.len() == len - 1)
                .flat_map(|w| {
                    (0..single_block_gates.len()).map(move |g| {
                        let mut x = w.clone();
                        x.push(g);
                        x
                    })
                })
                .collect();
        }
        for w in &words {
            let g = w
                .iter()
                .fold(linalg::identity(2), |acc, &k| &single_block_gates[k] * acc);
            if g.shape() != (2, 2) {
                return Err(Error::DimensionMismatch(
                    "single-block gates must be 2x2".into(),
                ));
            }
            let u = linalg::kron_all(&vec![g; n]);
            let uv = &u * v;
            let logical = v.adjoint() * &uv;
            if (uv - v * &logical).norm() > 1e-9 {
                continue;
            }
            if out
                .iter()
                .any(|e| linalg::phase_aligned_distance(&e.logical, &logical) < 1e-9)
            {
                continue;
            }
            out.push(SurveyEntry {
                word: w.clone(),
                logical,
            });
        }
    }
    Ok(out)
}

/// Subsystem code: gauge group `G` with stabilizer `S ⊆ G` central in `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeCode {
    n: usize,
    gauge: Vec<PauliString>,
    stabilizers: Vec<PauliString>,
}

impl GaugeCode {
    pub fn new(n: usize, gauge: Vec<PauliString>, stabilizers: Vec<PauliString>) -> Result<Self> {
        for p in gauge.iter().chain(&stabilizers) {
            if p.len() != n {
                return Err(Error::InvalidPauli(format!("{p} has wrong length")));
            }
        }
        for (i, s) in stabilizers.iter().enumerate() {
            if !in_span(&gauge, s) {
                return Err(Error::InvalidPauli(format!(
                    "stabilizer {s} is not in the gauge group"
                )));
            }
            if let Some(j) = gauge.iter().position(|g| !g.commutes(s)) {
                return Err(Error::Anticommuting(i, j));
            }
        }
        Ok(Self {
            n,
            gauge,
            stabilizers,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gauge(&self) -> &[PauliString] {
        &self.gauge
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stabilizers
    }
}

/// `S₁ ⊆ S₂ ⊆ G₂ ⊆ G₁`, tested modulo phases.
pub fn gauge_fix_admissible(c1: &GaugeCode, c2: &GaugeCode) -> Result<bool> {
    if c1.n != c2.n {
        return Err(Error::DimensionMismatch("codes differ in size".into()));
    }
    let within = |sub: &[PauliString], sup: &[PauliString]| sub.iter().all(|p| in_span(sup, p));
    Ok(within(&c1.stabilizers, &c2.stabilizers)
        && within(&c2.stabilizers, &c2.gauge)
        && within(&c2.gauge, &c1.gauge))
}

/// `V₂^{⊗m} · V₁`.
pub fn concatenate(outer: &Mat, inner: &Mat, m: usize) -> Result<Mat> {
    let expected = inner.ncols().checked_pow(m as u32).unwrap_or(usize::MAX);
    if outer.nrows() != expected {
        return Err(Error::DimensionMismatch(format!(
            "outer has {} rows, inner^{m} has {expected} columns",
            outer.nrows()
        )));
    }
    let dim = inner.nrows().checked_pow(m as u32).unwrap_or(usize::MAX);
    crate::check_dim_cap(dim)?;
    let big = linalg::kron_all(&vec![inner.clone(); m]);
    let v = big * outer;
    let dev = linalg::isometry_deviation(&v);
    if dev > 1e-10 {
        return Err(Error::NotIsometry(dev));
    }
    Ok(v)
}

/// All Pauli strings on `n` qubits with weight at most `t` whose non-identity
/// letters come from `letters` (e.g. `"X"` or `"XYZ"`), identity first.
pub fn pauli_errors(n: usize, t: usize, letters: &str) -> Vec<PauliString> {
    let kinds: Vec<char> = letters.chars().filter(|c| "XYZ".contains(*c)).collect();
    let mut out = vec![PauliString::identity(n)];
    let mut frontier = vec![(PauliString::identity(n), 0usize)];
    for _ in 0..t {
        let mut next = Vec::new();
        for (p, start) in &frontier {
            for k in *start..n {
                for &c in &kinds {
                    let (x, z) = letter_bits(c).unwrap();
                    let mut q = p.clone();
                    q.x[k] = x;
                    q.z[k] = z;
                    out.push(q.clone());
                    next.push((q, k + 1));
                }
            }
        }
        frontier = next;
    }
    out
}

/// Smallest weight (≤ `max_weight`) of a Pauli that commutes with every
/// stabilizer but is not itself a stabilizer.
pub fn code_distance(code: &StabilizerCode, max_weight: usize) -> Option<usize> {
    let all = pauli_errors(code.n, max_weight, "XYZ");
    all.iter()
        .filter(|p| p.weight() > 0)
        .filter(|p| code.generators.iter().all(|g| g.commutes(p)) && !in_span(&code.generators, p))
        .map(|p| p.weight())
        .min()
}

/// Whether the code space is exactly the joint +1 eigenspace of some Pauli
/// group; returns independent generators when it is. Enumerates all `4^n`
/// Paulis, so `n ≤ 8`.
pub fn stabilizer_generators_of(p: &CodeProjector) -> Result<Option<Vec<PauliString>>> {
    let n = p.dim().trailing_zeros() as usize;
    if p.dim() != 1 << n {
        return Err(Error::DimensionMismatch(
            "projector must act on qubits".into(),
        ));
    }
    if n > 8 {
        return Err(Error::CapExceeded { qubits: n, cap: 8 });
    }
    let v = p.isometry();
    let mut gens: Vec<PauliString> = Vec::new();
    for code in 1..(1usize << (2 * n)) {
        let x: Vec<bool> = (0..n).map(|k| (code >> (2 * n - 1 - k)) & 1 == 1).collect();
        let z: Vec<bool> = (0..n).map(|k| (code >> (n - 1 - k)) & 1 == 1).collect();
        for phase in [0u8, 2] {
            let q = PauliString {
                x: x.clone(),
                z: z.clone(),
                phase,
            };
            if (q.apply_to_columns(v) - v).norm() < 1e-9 && !in_span(&gens, &q) {
                gens.push(q);
            }
        }
    }
    let dim = p.dim();
    let mut proj = linalg::identity(dim);
    for g in &gens {
        let gp = g.apply_to_columns(&proj);
        proj = (proj + gp) * linalg::c(0.5, 0.0);
    }
    Ok((linalg::max_abs(&(proj - p.matrix())) < 1e-9).then_some(gens))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncodingClass {
    /// The encoding is a unitary on `logical_wires` tensored with a fixed
    /// state on the other wires.
    Edge {
        logical_wires: Vec<usize>,
    },
    Bulk,
}

/// Edge iff, for some choice of `log₂ k` wires, `V` factors as a unitary on
/// those wires times an ancilla preparation on the rest.
pub fn classify_encoding(v: &Mat) -> Result<EncodingClass> {
    let n = v.nrows().trailing_zeros() as usize;
    let k = v.ncols().trailing_zeros() as usize;
    if v.nrows() != 1 << n || v.ncols() != 1 << k || k > n {
        return Err(Error::DimensionMismatch(
            "encoding must map qubits to qubits".into(),
        ));
    }
    let dev = linalg::isometry_deviation(v);
    if dev > 1e-10 {
        return Err(Error::NotIsometry(dev));
    }
    let dims = vec![2; n];
    let dl = 1usize << k;
    let dr = 1usize << (n - k);
    for subset in combinations(n, k) {
        let mut t = Mat::zeros(dl * dl, dr);
        for j in 0..dl {
            let col: Vector = v.column(j).into_owned();
            let m = linalg::bipartition_matrix(&col, &dims, &subset)?;
            for l in 0..dl {
                for r in 0..dr {
                    t[(l * dl + j, r)] = m[(l, r)];
                }
            }
        }
        let (uu, s, _) = linalg::svd(&t);
        if s.iter().skip(1).any(|&x| x > 1e-9) {
            continue;
        }
        let u = Mat::from_fn(dl, dl, |l, j| uu[(l * dl + j, 0)] * s[0]);
        if linalg::unitarity_deviation(&u) < 1e-9 {
            return Ok(EncodingClass::Edge {
                logical_wires: subset,
            });
        }
    }
    Ok(EncodingClass::Bulk)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Independent bit flips with probability `p` on each of `n` qubits.
pub fn iid_bit_flip(n: usize, p: f64) -> Result<KrausChannel> {
    let one = KrausChannel::new(vec![
        linalg::identity(2) * linalg::c((1.0 - p).sqrt(), 0.0),
        linalg::pauli_x() * linalg::c(p.sqrt(), 0.0),
    ])?;
    Ok((1..n).fold(one.clone(), |acc, _| acc.tensor(&one)))
}
