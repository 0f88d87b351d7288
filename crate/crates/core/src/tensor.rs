//! Matrix-product states and operators, sequential (adversary) preparation,
//! QTM runs and the higher-order factorization of bond spaces.
//!
//! Site `k` carries matrices `A_k^i` of shape `χ_{k+1} × χ_k` and a state has
//! amplitudes `⟨i_0 … i_{N-1}|ψ⟩ = tr(B · A_{N-1}^{i_{N-1}} ⋯ A_0^{i_0})` with a
//! boundary matrix `B` of shape `χ_0 × χ_N`. Open boundaries use `χ_0 = χ_N = 1`
//! and `B = [[1]]`.

use crate::linalg::{self, Mat, Vector, ONE, ZERO};
use crate::state::{PureState, UnitaryOp};
use crate::{check_dim_cap, Error, Result};

/// Relative cut-off below which singular values are treated as exact zeros.
const SV_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct Mps {
    sites: Vec<Vec<Mat>>,
    boundary: Mat,
}

impl Mps {
    pub fn new(sites: Vec<Vec<Mat>>, boundary: Mat) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::DimensionMismatch(
                "MPS needs at least one site".into(),
            ));
        }
        for (k, site) in sites.iter().enumerate() {
            let first = site.first().ok_or_else(|| {
                Error::DimensionMismatch(format!("site {k} has no physical symbols"))
            })?;
            if site.iter().any(|a| a.shape() != first.shape()) {
                return Err(Error::DimensionMismatch(format!(
                    "site {k} tensors differ in shape"
                )));
            }
            if k > 0 && first.ncols() != sites[k - 1][0].nrows() {
                return Err(Error::DimensionMismatch(format!(
                    "bond {k}: site {} gives {}, site {k} expects {}",
                    k - 1,
                    sites[k - 1][0].nrows(),
                    first.ncols()
                )));
            }
        }
        let b0 = sites[0][0].ncols();
        let bn = sites[sites.len() - 1][0].nrows();
        if boundary.shape() != (b0, bn) {
            return Err(Error::DimensionMismatch(format!(
                "boundary must be {b0}x{bn}, got {}x{}",
                boundary.nrows(),
                boundary.ncols()
            )));
        }
        Ok(Self { sites, boundary })
    }

    /// Open-boundary product state from one local vector per site.
    pub fn product(locals: &[Vector]) -> Result<Self> {
        let sites = locals
            .iter()
            .map(|v| v.iter().map(|&a| Mat::from_element(1, 1, a)).collect())
            .collect();
        Self::new(sites, Mat::identity(1, 1))
    }

    /// Open-boundary computational basis state `|digits⟩`.
    pub fn basis(dims: &[usize], digits: &[usize]) -> Result<Self> {
        if dims.len() != digits.len() || dims.iter().zip(digits).any(|(d, i)| i >= d) {
            return Err(Error::DimensionMismatch(format!(
                "digits {digits:?} do not fit dims {dims:?}"
            )));
        }
        let locals: Vec<Vector> = dims
            .iter()
            .zip(digits)
            .map(|(&d, &i)| linalg::basis_vector(d, i))
            .collect();
        Self::product(&locals)
    }

    pub fn sites(&self) -> &[Vec<Mat>] {
        &self.sites
    }

    pub fn site(&self, k: usize) -> &[Mat] {
        &self.sites[k]
    }

    pub fn boundary(&self) -> &Mat {
        &self.boundary
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.sites.iter().map(|s| s.len()).collect()
    }

    /// `[χ_0, χ_1, …, χ_N]`; cut `c` (between sites `c-1` and `c`) has `χ_c`.
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut b = vec![self.sites[0][0].ncols()];
        b.extend(self.sites.iter().map(|s| s[0].nrows()));
        b
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Unnormalized amplitudes `tr(B A_{N-1} ⋯ A_0)`.
    pub fn amplitudes(&self) -> Result<Vector> {
        let dims = self.phys_dims();
        check_dim_cap(dims.iter().product())?;
        let mut partial = vec![Mat::identity(
            self.sites[0][0].ncols(),
            self.sites[0][0].ncols(),
        )];
        for site in &self.sites {
            partial = partial
                .iter()
                .flat_map(|p| site.iter().map(move |a| a * p))
                .collect();
        }
        Ok(Vector::from_iterator(
            partial.len(),
            partial.iter().map(|p| (&self.boundary * p).trace()),
        ))
    }

    /// Absorbs a rank-one boundary into the end tensors so that `χ_0 = χ_N = 1`.
    pub fn into_open(self) -> Result<Mps> {
        if self.boundary.shape() == (1, 1) {
            return Ok(self);
        }
        let (u, s, v) = linalg::svd(&self.boundary);
        let s0 = s.first().copied().unwrap_or(0.0);
        if s.iter().skip(1).any(|&x| x > 1e-12 * s0.max(1e-300)) {
            return Err(Error::DimensionMismatch("boundary is not rank one".into()));
        }
        // tr(s·u v† P) = s · v† P u
        let left = Mat::from_iterator(u.nrows(), 1, u.column(0).iter().map(|z| z * s0));
        let right = Mat::from_iterator(1, v.nrows(), v.column(0).iter().map(|z| z.conj()));
        let n = self.sites.len();
        let mut sites = self.sites;
        for a in sites[0].iter_mut() {
            *a = &*a * &left;
        }
        for a in sites[n - 1].iter_mut() {
            *a = &right * &*a;
        }
        Mps::new(sites, Mat::identity(1, 1))
    }

    /// Two-sweep SVD recompression of an open-boundary MPS. Returns the
    /// compressed MPS and the discarded squared singular weight (relative to
    /// the squared norm).
    pub fn compress(&self, chi_max: usize) -> Result<(Mps, f64)> {
        if chi_max == 0 {
            return Err(Error::OutOfRange("chi_max must be at least 1".into()));
        }
        let mut sites = self.clone().into_open()?.sites;
        let n = sites.len();
        // Left-canonical sweep.
        for k in 0..n.saturating_sub(1) {
            let d = sites[k].len();
            let (bl, br) = (sites[k][0].ncols(), sites[k][0].nrows());
            let m = Mat::from_fn(bl * d, br, |row, b| sites[k][row % d][(b, row / d)]);
            let (u, s, v) = linalg::svd(&m);
            let keep = kept(&s, usize::MAX).0;
            sites[k] = (0..d)
                .map(|i| Mat::from_fn(keep, bl, |b, a| u[(a * d + i, b)]))
                .collect();
            let r = Mat::from_fn(keep, br, |b, c| v[(c, b)].conj() * s[b]);
            let rt = r.transpose();
            for a in sites[k + 1].iter_mut() {
                *a = &*a * &rt;
            }
        }
        let norm2: f64 = sites[n - 1].iter().map(|a| a.norm_squared()).sum();
        let mut discarded = 0.0;
        // Right-to-left truncation.
        for k in (1..n).rev() {
            let d = sites[k].len();
            let (bl, br) = (sites[k][0].ncols(), sites[k][0].nrows());
            let m = Mat::from_fn(bl, d * br, |a, col| sites[k][col / br][(col % br, a)]);
            let (u, s, v) = linalg::svd(&m);
            let (keep, lost) = kept(&s, chi_max);
            discarded += lost;
            sites[k] = (0..d)
                .map(|i| Mat::from_fn(br, keep, |b, a| v[(i * br + b, a)].conj()))
                .collect();
            let us = Mat::from_fn(bl, keep, |a, b| u[(a, b)] * s[b]).transpose();
            for a in sites[k - 1].iter_mut() {
                *a = &us * &*a;
            }
        }
        let rel = if norm2 > 0.0 { discarded / norm2 } else { 0.0 };
        Ok((Mps::new(sites, Mat::identity(1, 1))?, rel))
    }
}

/// Number of singular values kept under `chi_max`, and the squared weight
/// dropped by the `chi_max` cut (values below the floor are not counted).
fn kept(s: &[f64], chi_max: usize) -> (usize, f64) {
    let smax = s.first().copied().unwrap_or(0.0);
    let nonzero = s
        .iter()
        .take_while(|&&x| x > SV_FLOOR * smax)
        .count()
        .max(1)
        .min(s.len().max(1));
    if nonzero > chi_max {
        (chi_max, s[chi_max..nonzero].iter().map(|x| x * x).sum())
    } else {
        (nonzero, 0.0)
    }
}

/// Left-to-right SVD factorization of a register vector. Returns site
/// tensors (open boundary, `B = [[1]]`) and the squared weight dropped by
/// `chi_max`. The vector need not be normalized; the last site keeps the norm.
pub(crate) fn sequential_svd(v: &Vector, dims: &[usize], chi_max: usize) -> (Vec<Vec<Mat>>, f64) {
    let n = dims.len();
    let mut sites = Vec::with_capacity(n);
    let mut discarded = 0.0;
    let mut bond = 1;
    let mut rest = Mat::from_iterator(1, v.len(), v.iter().copied());
    for (k, &d) in dims.iter().enumerate() {
        let cols = rest.ncols() / d;
        let m = Mat::from_fn(bond * d, cols, |row, r| {
            rest[(row / d, (row % d) * cols + r)]
        });
        if k == n - 1 {
            sites.push(
                (0..d)
                    .map(|i| Mat::from_fn(1, bond, |_, a| m[(a * d + i, 0)]))
                    .collect(),
            );
            break;
        }
        let (u, s, vv) = linalg::svd(&m);
        let (keep, lost) = if s.is_empty() {
            (1, 0.0)
        } else {
            kept(&s, chi_max)
        };
        discarded += lost;
        let u = if u.ncols() == 0 {
            Mat::zeros(bond * d, 1)
        } else {
            u
        };
        sites.push(
            (0..d)
                .map(|i| {
                    Mat::from_fn(keep, bond, |b, a| {
                        if b < u.ncols() {
                            u[(a * d + i, b)]
                        } else {
                            ZERO
                        }
                    })
                })
                .collect(),
        );
        rest = Mat::from_fn(keep, cols, |b, r| {
            if b < s.len() {
                vv[(r, b)].conj() * s[b]
            } else {
                ZERO
            }
        });
        bond = keep;
    }
    (sites, discarded)
}

/// Contracted, normalized state.
pub fn mps_contract(m: &Mps) -> Result<PureState> {
    PureState::normalized(m.amplitudes()?, m.phys_dims())
}

/// Sequential SVD of `s`. `chi_max = usize::MAX` means unconstrained. Fails
/// with [`Error::Truncation`] if the weight dropped by `chi_max` exceeds `tol`.
pub fn state_to_mps(s: &PureState, chi_max: usize, tol: f64) -> Result<Mps> {
    if chi_max == 0 {
        return Err(Error::OutOfRange("chi_max must be at least 1".into()));
    }
    let (sites, discarded) = sequential_svd(s.amplitudes(), s.dims(), chi_max);
    let mps = Mps::new(sites, Mat::identity(1, 1))?;
    if discarded > tol {
        let fidelity = match mps_contract(&mps) {
            Ok(t) => t.fidelity(s),
            Err(_) => 0.0,
        };
        return Err(Error::Truncation { fidelity });
    }
    Ok(mps)
}

/// MPS prepared by a sequential circuit: data site `k` starts in `|0⟩` and
/// interacts once with the adversary through `unitaries[k]` (acting on
/// data ⊗ adversary). The adversary starts in
/// `adversary_init` and is finally projected on `adversary_final`, giving
/// `A^i = (⟨i| ⊗ 1) U (|0⟩ ⊗ 1)` and `B = |init⟩⟨final|`.
pub fn mps_from_sequential_circuit(
    unitaries: &[UnitaryOp],
    phys_dim: usize,
    adversary_init: &PureState,
    adversary_final: &PureState,
) -> Result<Mps> {
    let da = adversary_init.dim();
    if adversary_final.dim() != da {
        return Err(Error::DimensionMismatch(
            "adversary states differ in dimension".into(),
        ));
    }
    if unitaries.is_empty() {
        return Err(Error::DimensionMismatch("no unitaries given".into()));
    }
    let sites = unitaries
        .iter()
        .map(|u| {
            if u.dim() != phys_dim * da {
                return Err(Error::DimensionMismatch(format!(
                    "unitary has dimension {}, expected {phys_dim}x{da}",
                    u.dim()
                )));
            }
            let m = u.matrix();
            Ok((0..phys_dim)
                .map(|i| Mat::from_fn(da, da, |b, a| m[(i * da + b, a)]))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let boundary = adversary_init.amplitudes() * adversary_final.amplitudes().adjoint();
    Mps::new(sites, boundary)
}

#[derive(Debug, Clone)]
pub struct QtmStep {
    pub unitary: UnitaryOp,
    /// Data wires acted on; the adversary is appended as the last target.
    pub data_targets: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct QtmResult {
    /// Leading eigenvector of the reduced data state.
    pub final_data: PureState,
    pub decoupled: bool,
    /// `1 − tr ρ_data²`.
    pub residual: f64,
    /// Final state on data ⊗ adversary.
    pub joint: PureState,
}

impl QtmResult {
    /// Data state conditioned on the adversary being found in `adversary`.
    pub fn conditional_data(&self, adversary: &PureState) -> Result<PureState> {
        let dims = self.joint.dims();
        let n = dims.len() - 1;
        if adversary.dim() != dims[n] {
            return Err(Error::DimensionMismatch("adversary state dimension".into()));
        }
        let m =
            linalg::bipartition_matrix(self.joint.amplitudes(), dims, &(0..n).collect::<Vec<_>>())?;
        PureState::normalized(m * adversary.amplitudes().conjugate(), dims[..n].to_vec())
    }
}

/// Runs `U_qtm` on `data ⊗ adversary`.
pub fn qtm_run(program: &[QtmStep], data: &PureState, adversary: &PureState) -> Result<QtmResult> {
    let joint0 = data.tensor(adversary);
    let n = data.wires();
    check_dim_cap(joint0.dim())?;
    let mut joint = joint0;
    for step in program {
        if let Some(&t) = step.data_targets.iter().find(|&&t| t >= n) {
            return Err(Error::WireOutOfRange { wire: t, wires: n });
        }
        let mut targets = step.data_targets.clone();
        targets.push(n);
        joint = joint.apply(&step.unitary, &targets)?;
    }
    let m = linalg::bipartition_matrix(
        joint.amplitudes(),
        joint.dims(),
        &(0..n).collect::<Vec<_>>(),
    )?;
    let (u, s, _) = linalg::svd(&m);
    let purity: f64 = s.iter().map(|x| x.powi(4)).sum();
    let residual = (1.0 - purity).max(0.0);
    let final_data = PureState::normalized(u.column(0).into_owned(), data.dims().to_vec())?;
    Ok(QtmResult {
        final_data,
        decoupled: residual <= 1e-9,
        residual,
        joint,
    })
}

/// Von Neumann entropy (bits) across the cut between sites `cut-1` and `cut`.
pub fn bond_entanglement(m: &Mps, cut: usize) -> Result<f64> {
    if cut == 0 || cut >= m.len() {
        return Err(Error::InvalidCut {
            cut,
            sites: m.len(),
        });
    }
    let psi = mps_contract(m)?;
    psi.entanglement_entropy(&(0..cut).collect::<Vec<_>>())
}

/// Matrix-product operator: `⟨o|U|i⟩ = tr(C · W_{N-1}^{o,i} ⋯ W_0^{o,i})`.
/// `sites[k][o·d + i]` holds `W_k^{o,i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mpu {
    sites: Vec<Vec<Mat>>,
    phys_dims: Vec<usize>,
    boundary: Mat,
}

impl Mpu {
    pub fn new(sites: Vec<Vec<Mat>>, phys_dims: Vec<usize>, boundary: Mat) -> Result<Self> {
        if sites.len() != phys_dims.len() || sites.is_empty() {
            return Err(Error::DimensionMismatch(
                "site count and phys_dims differ".into(),
            ));
        }
        for (k, (site, &d)) in sites.iter().zip(&phys_dims).enumerate() {
            if site.len() != d * d || site.iter().any(|w| w.shape() != site[0].shape()) {
                return Err(Error::DimensionMismatch(format!("MPU site {k} malformed")));
            }
            if k > 0 && site[0].ncols() != sites[k - 1][0].nrows() {
                return Err(Error::DimensionMismatch(format!("MPU bond {k} mismatch")));
            }
        }
        if boundary.shape() != (sites[0][0].ncols(), sites[sites.len() - 1][0].nrows()) {
            return Err(Error::DimensionMismatch("MPU boundary shape".into()));
        }
        Ok(Self {
            sites,
            phys_dims,
            boundary,
        })
    }

    pub fn identity(dims: &[usize]) -> Self {
        let sites = dims
            .iter()
            .map(|&d| {
                (0..d * d)
                    .map(|oi| Mat::from_element(1, 1, if oi / d == oi % d { ONE } else { ZERO }))
                    .collect()
            })
            .collect();
        Self {
            sites,
            phys_dims: dims.to_vec(),
            boundary: Mat::identity(1, 1),
        }
    }

    /// Cyclic shift: output wire `k` carries input wire `k − 1` (mod `N`).
    pub fn translation(n: usize, d: usize) -> Self {
        let site: Vec<Mat> = (0..d * d)
            .map(|oi| {
                let (o, i) = (oi / d, oi % d);
                Mat::from_fn(d, d, |b, a| if a == o && b == i { ONE } else { ZERO })
            })
            .collect();
        Self {
            sites: vec![site; n],
            phys_dims: vec![d; n],
            boundary: Mat::identity(d, d),
        }
    }

    /// MPU of a local operator on `targets` (any order, not necessarily
    /// adjacent), identity elsewhere.
    pub fn from_gate(op: &Mat, targets: &[usize], dims: &[usize]) -> Result<Self> {
        let lo = *targets
            .iter()
            .min()
            .ok_or_else(|| Error::DimensionMismatch("no targets".into()))?;
        let hi = *targets.iter().max().unwrap();
        if hi >= dims.len() {
            return Err(Error::WireOutOfRange {
                wire: hi,
                wires: dims.len(),
            });
        }
        let span = &dims[lo..=hi];
        let local: Vec<usize> = targets.iter().map(|t| t - lo).collect();
        let block = linalg::embed(op, span, &local)?;
        Self::from_blocks(dims, &[(block, lo)])
    }

    /// Product of operators on disjoint contiguous ranges; each entry is
    /// `(matrix, first_site)` with the matrix acting on consecutive sites.
    pub fn from_blocks(dims: &[usize], blocks: &[(Mat, usize)]) -> Result<Self> {
        let mut sites: Vec<Option<Vec<Mat>>> = vec![None; dims.len()];
        for (m, start) in blocks {
            let mut len = 0;
            let mut dim = 1;
            while dim < m.nrows() && start + len < dims.len() {
                dim *= dims[start + len];
                len += 1;
            }
            if dim != m.nrows() || !m.is_square() || len == 0 {
                return Err(Error::DimensionMismatch(format!(
                    "block of size {} does not fit sites from {start}",
                    m.nrows()
                )));
            }
            let span = &dims[*start..start + len];
            let mpo = operator_to_mpo(m, span);
            for (k, w) in mpo.into_iter().enumerate() {
                if sites[start + k].is_some() {
                    return Err(Error::DimensionMismatch(format!(
                        "blocks overlap at site {}",
                        start + k
                    )));
                }
                sites[start + k] = Some(w);
            }
        }
        let id = Mpu::identity(dims);
        let sites = sites
            .into_iter()
            .zip(id.sites)
            .map(|(s, i)| s.unwrap_or(i))
            .collect();
        Self::new(sites, dims.to_vec(), Mat::identity(1, 1))
    }

    pub fn sites(&self) -> &[Vec<Mat>] {
        &self.sites
    }

    pub fn phys_dims(&self) -> &[usize] {
        &self.phys_dims
    }

    pub fn boundary(&self) -> &Mat {
        &self.boundary
    }

    pub fn max_bond(&self) -> usize {
        self.sites
            .iter()
            .map(|s| s[0].nrows().max(s[0].ncols()))
            .chain(std::iter::once(self.boundary.nrows()))
            .max()
            .unwrap_or(1)
    }

    pub fn to_matrix(&self) -> Result<Mat> {
        let dim: usize = self.phys_dims.iter().product();
        check_dim_cap(dim * dim)?;
        // Enumerate (o, i) digit pairs site by site.
        let b0 = self.sites[0][0].ncols();
        let mut partial = vec![(0usize, 0usize, Mat::identity(b0, b0))];
        for (site, &d) in self.sites.iter().zip(&self.phys_dims) {
            let mut next = Vec::with_capacity(partial.len() * d * d);
            for (o, i, p) in &partial {
                for oo in 0..d {
                    for ii in 0..d {
                        next.push((o * d + oo, i * d + ii, &site[oo * d + ii] * p));
                    }
                }
            }
            partial = next;
        }
        let mut m = Mat::zeros(dim, dim);
        for (o, i, p) in partial {
            m[(o, i)] = (&self.boundary * p).trace();
        }
        Ok(m)
    }

    /// `self · first`.
    pub fn compose(&self, first: &Mpu) -> Result<Mpu> {
        if self.phys_dims != first.phys_dims {
            return Err(Error::DimensionMismatch("MPU phys dims differ".into()));
        }
        let sites = self
            .sites
            .iter()
            .zip(&first.sites)
            .zip(&self.phys_dims)
            .map(|((s, f), &d)| {
                (0..d * d)
                    .map(|oi| {
                        let (o, i) = (oi / d, oi % d);
                        (0..d)
                            .map(|m| linalg::kron(&s[o * d + m], &f[m * d + i]))
                            .reduce(|a, b| a + b)
                            .unwrap()
                    })
                    .collect()
            })
            .collect();
        Mpu::new(
            sites,
            self.phys_dims.clone(),
            linalg::kron(&self.boundary, &first.boundary),
        )
    }
}

/// Splits a square operator on consecutive sites into MPO tensors with
/// `W^{o,i}` indexed `o·d + i`.
fn operator_to_mpo(m: &Mat, dims: &[usize]) -> Vec<Vec<Mat>> {
    let n = dims.len();
    let st = linalg::strides(dims);
    let dim = m.nrows();
    let pair_dims: Vec<usize> = dims.iter().map(|d| d * d).collect();
    let pst = linalg::strides(&pair_dims);
    let mut v = Vector::zeros(dim * dim);
    for o in 0..dim {
        for i in 0..dim {
            let mut idx = 0;
            for k in 0..n {
                let ok = (o / st[k]) % dims[k];
                let ik = (i / st[k]) % dims[k];
                idx += (ok * dims[k] + ik) * pst[k];
            }
            v[idx] = m[(o, i)];
        }
    }
    sequential_svd(&v, &pair_dims, usize::MAX).0
}

/// `(U ⊗ B)`-style application: `A'^o = Σ_i W^{o,i} ⊗ A^i`, `B' = C ⊗ B`.
pub fn apply_mpu(m: &Mps, op: &Mpu) -> Result<Mps> {
    if m.phys_dims() != op.phys_dims {
        return Err(Error::DimensionMismatch(format!(
            "MPS dims {:?} vs MPU dims {:?}",
            m.phys_dims(),
            op.phys_dims
        )));
    }
    let sites = m
        .sites
        .iter()
        .zip(&op.sites)
        .zip(&op.phys_dims)
        .map(|((a, w), &d)| {
            (0..d)
                .map(|o| {
                    (0..d)
                        .map(|i| linalg::kron(&w[o * d + i], &a[i]))
                        .reduce(|x, y| x + y)
                        .unwrap()
                })
                .collect()
        })
        .collect();
    Mps::new(sites, linalg::kron(&op.boundary, &m.boundary))
}

/// Second-layer factorization of an MPS whose bonds all equal `d1^{N1}`.
///
/// For site `k` and physical symbol `i`,
/// `A_k^i = Σ tr(C · B_1^{μ1ν1} ⋯ B_{N1}^{μ_{N1}ν_{N1}}) |μ⃗⟩⟨ν⃗|`
/// with `tensors[k][i][l][μ·d1 + ν] = B_{l+1}^{μν}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Homps {
    pub n1: usize,
    pub d1: usize,
    pub tensors: Vec<Vec<Vec<Vec<Mat>>>>,
    pub inner_boundaries: Vec<Vec<Mat>>,
    pub chi1: usize,
    pub boundary: Mat,
}

pub fn homps_decompose(m: &Mps, d1: usize) -> Result<Homps> {
    let bonds = m.bond_dims();
    let chi = bonds[0];
    if bonds.iter().any(|&b| b != chi) || d1 < 2 {
        return Err(Error::NotAPower { chi, base: d1 });
    }
    let mut n1 = 0;
    let mut p = 1;
    while p < chi {
        p *= d1;
        n1 += 1;
    }
    if p != chi || n1 == 0 {
        return Err(Error::NotAPower { chi, base: d1 });
    }
    let dims = vec![d1; n1];
    let mut chi1 = 1;
    let mut tensors = Vec::with_capacity(m.len());
    let mut inner_boundaries = Vec::with_capacity(m.len());
    for site in &m.sites {
        let mut per_symbol = Vec::with_capacity(site.len());
        let mut bs = Vec::with_capacity(site.len());
        for a in site {
            let mpo = operator_to_mpo(a, &dims);
            let levels: Vec<Vec<Mat>> = mpo
                .into_iter()
                .map(|w| w.into_iter().map(|x| x.transpose()).collect())
                .collect();
            for l in &levels[1..] {
                chi1 = chi1.max(l[0].nrows());
            }
            per_symbol.push(levels);
            bs.push(Mat::identity(1, 1));
        }
        tensors.push(per_symbol);
        inner_boundaries.push(bs);
    }
    Ok(Homps {
        n1,
        d1,
        tensors,
        inner_boundaries,
        chi1,
        boundary: m.boundary.clone(),
    })
}

pub fn homps_reconstruct(h: &Homps) -> Result<Mps> {
    let chi = h.d1.pow(h.n1 as u32);
    let d1 = h.d1;
    let sites = h
        .tensors
        .iter()
        .zip(&h.inner_boundaries)
        .map(|(site, bs)| {
            site.iter()
                .zip(bs)
                .map(|(levels, c)| {
                    // Enumerate (μ⃗, ν⃗) level by level, multiplying left to right.
                    let mut partial = vec![(0usize, 0usize, c.clone())];
                    for l in levels {
                        let mut next = Vec::with_capacity(partial.len() * d1 * d1);
                        for (mu, nu, p) in &partial {
                            for a in 0..d1 {
                                for b in 0..d1 {
                                    next.push((mu * d1 + a, nu * d1 + b, p * &l[a * d1 + b]));
                                }
                            }
                        }
                        partial = next;
                    }
                    let mut out = Mat::zeros(chi, chi);
                    for (mu, nu, p) in partial {
                        out[(mu, nu)] = p.trace();
                    }
                    out
                })
                .collect()
        })
        .collect();
    Mps::new(sites, h.boundary.clone())
}
