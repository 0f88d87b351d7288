//! Dense complex linear algebra shared by every model.
//!
//! Thin helpers over `nalgebra` dynamic matrices: tensor products, local
//! operator placement on a qudit register, Hermitian functional calculus,
//! singular values, partial traces and random instances for tests.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type Vector = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

pub fn identity(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Builds a matrix from rows of real-imaginary pairs.
pub fn mat_from_rows(rows: &[&[C64]]) -> Mat {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    Mat::from_fn(r, cols, |i, j| rows[i][j])
}

pub fn basis_vector(dim: usize, k: usize) -> Vector {
    let mut v = Vector::zeros(dim);
    v[k] = ONE;
    v
}

/// Column matrix `|k⟩`.
pub fn ket(dim: usize, k: usize) -> Mat {
    let mut m = Mat::zeros(dim, 1);
    m[(k, 0)] = ONE;
    m
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a Mat>) -> Mat {
    factors
        .into_iter()
        .fold(identity(1), |acc, f| acc.kronecker(f))
}

pub fn kron_vec(a: &Vector, b: &Vector) -> Vector {
    a.kronecker(b)
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn unitarity_deviation(m: &Mat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let a = max_abs(&(m.adjoint() * m - identity(n)));
    let b = max_abs(&(m * m.adjoint() - identity(n)));
    a.max(b)
}

pub fn hermiticity_deviation(m: &Mat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs(&(m - m.adjoint()))
}

pub fn isometry_deviation(m: &Mat) -> f64 {
    max_abs(&(m.adjoint() * m - identity(m.ncols())))
}

pub fn ensure_hermitian(m: &Mat, tol: f64) -> Result<()> {
    let dev = hermiticity_deviation(m);
    if dev > tol {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

/// Eigen-decomposition of a Hermitian matrix with ascending eigenvalues.
///
/// Columns of the returned matrix are the matching eigenvectors.
pub fn eigh(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Mat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// `f(H)` for Hermitian `H` through its spectral decomposition.
pub fn hermitian_fn(m: &Mat, f: impl Fn(f64) -> C64) -> Mat {
    let (values, vectors) = eigh(m);
    let diag = Mat::from_diagonal(&Vector::from_iterator(
        values.len(),
        values.iter().map(|&x| f(x)),
    ));
    &vectors * diag * vectors.adjoint()
}

/// `e^{-itH}`.
pub fn expm_hermitian(h: &Mat, t: f64) -> Mat {
    hermitian_fn(h, |x| cis(-x * t))
}

/// Principal square root of a positive semidefinite matrix; tiny negative
/// eigenvalues from round-off are clamped to zero.
pub fn psd_sqrt(m: &Mat) -> Mat {
    hermitian_fn(m, |x| c(x.max(0.0).sqrt(), 0.0))
}

/// Thin SVD with singular values sorted in non-increasing order.
///
/// Returns `(u, sigma, v)` with `m = u · diag(sigma) · v†`, where `u` and `v`
/// have orthonormal columns. One-sided Jacobi: nalgebra's bidiagonal SVD
/// returns wrong factors for a few percent of rank-deficient complex inputs.
pub fn svd(m: &Mat) -> (Mat, Vec<f64>, Mat) {
    let (r, cdim) = m.shape();
    if r.min(cdim) == 0 {
        return (Mat::zeros(r, 0), Vec::new(), Mat::zeros(cdim, 0));
    }
    if r < cdim {
        let (u, s, v) = svd(&m.adjoint());
        return (v, s, u);
    }
    let mut a = m.clone();
    let mut v = identity(cdim);
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..cdim {
            for q in p + 1..cdim {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..mat.nrows() {
                        let x = mat[(i, p)];
                        let y = mat[(i, q)] * phase;
                        mat[(i, p)] = x * cs - y * sn;
                        mat[(i, q)] = x * sn + y * cs;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..cdim).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cdim).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let live = sigma.iter().take_while(|&&x| x > 1e-300).count();
    let partial = Mat::from_fn(r, live, |i, j| a[(i, order[j])] / sigma[j]);
    let u = if live == cdim {
        partial
    } else {
        complete_unitary(&partial)
            .expect("Jacobi columns are orthonormal")
            .columns(0, cdim)
            .into_owned()
    };
    let v_sorted = Mat::from_fn(cdim, cdim, |i, j| v[(i, order[j])]);
    (u, sigma, v_sorted)
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    svd(m).1
}

/// Operator 2-norm.
pub fn spectral_norm(m: &Mat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let gram = if m.nrows() < m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
    eigh(&gram).0.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Schatten 1-norm of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &Mat) -> f64 {
    eigh(m).0.iter().map(|x| x.abs()).sum()
}

/// `min_φ ‖a − e^{iφ} b‖₂` with the phase chosen from `arg tr(b† a)`.
///
/// The trace phase is the exact minimiser for 2×2 unitaries (it bisects the
/// two eigenphases of `b† a`) and an upper bound in general.
pub fn phase_aligned_distance(a: &Mat, b: &Mat) -> f64 {
    let overlap = (b.adjoint() * a).trace();
    let at = |phase: C64| spectral_norm(&(a - b * phase));
    if overlap.norm() > 1e-6 * (a.nrows().max(1) as f64) {
        return at(overlap / overlap.norm());
    }
    // Degenerate overlap: coarse scan, then golden-section refinement.
    let f = |t: f64| at(cis(t));
    let steps = 64;
    let h = std::f64::consts::TAU / steps as f64;
    let best =
        (0..steps)
            .map(|k| (k as f64 * h, f(k as f64 * h)))
            .fold(
                (0.0, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            );
    let (mut lo, mut hi) = (best.0 - h, best.0 + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi)).min(best.1)
}

/// `|⟨a|b⟩|²` for normalised vectors.
pub fn fidelity(a: &Vector, b: &Vector) -> f64 {
    a.dotc(b).norm_sqr()
}

pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

fn check_targets(dims: &[usize], targets: &[usize]) -> Result<()> {
    for (k, &t) in targets.iter().enumerate() {
        if t >= dims.len() {
            return Err(Error::WireOutOfRange {
                wire: t,
                wires: dims.len(),
            });
        }
        if targets[..k].contains(&t) {
            return Err(Error::DuplicateTarget(t));
        }
    }
    Ok(())
}

/// Applies `op` to the wires `targets` of the register vector `amps` in place.
///
/// `targets[0]` is the most significant digit of `op`'s own index.
pub fn apply_local(amps: &mut [C64], dims: &[usize], op: &Mat, targets: &[usize]) -> Result<()> {
    check_targets(dims, targets)?;
    let sub: usize = targets.iter().map(|&t| dims[t]).product();
    if op.nrows() != sub || op.ncols() != sub {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{} but targets span dimension {sub}",
            op.nrows(),
            op.ncols()
        )));
    }
    let total: usize = dims.iter().product();
    if amps.len() != total {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} does not match register dimension {total}",
            amps.len()
        )));
    }
    let st = strides(dims);
    let tdims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let offsets: Vec<usize> = (0..sub)
        .map(|mut j| {
            let mut off = 0;
            for k in (0..targets.len()).rev() {
                off += (j % tdims[k]) * st[targets[k]];
                j /= tdims[k];
            }
            off
        })
        .collect();
    let mut gathered = vec![ZERO; sub];
    for base in 0..total {
        if targets.iter().any(|&t| !(base / st[t]).is_multiple_of(dims[t])) {
            continue;
        }
        for (g, &off) in gathered.iter_mut().zip(&offsets) {
            *g = amps[base + off];
        }
        for (row, &off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (col, g) in gathered.iter().enumerate() {
                acc += op[(row, col)] * g;
            }
            amps[base + off] = acc;
        }
    }
    Ok(())
}

/// Full-register matrix of `op` acting on `targets` (identity elsewhere).
pub fn embed(op: &Mat, dims: &[usize], targets: &[usize]) -> Result<Mat> {
    let total: usize = dims.iter().product();
    let mut out = identity(total);
    for j in 0..total {
        let mut col: Vec<C64> = out.column(j).iter().copied().collect();
        apply_local(&mut col, dims, op, targets)?;
        out.column_mut(j).copy_from_slice(&col);
    }
    Ok(out)
}

/// Left-multiplies every column of `m` by `op` placed on `targets`.
pub fn apply_local_to_columns(
    m: &mut Mat,
    dims: &[usize],
    op: &Mat,
    targets: &[usize],
) -> Result<()> {
    for j in 0..m.ncols() {
        let mut col: Vec<C64> = m.column(j).iter().copied().collect();
        apply_local(&mut col, dims, op, targets)?;
        m.column_mut(j).copy_from_slice(&col);
    }
    Ok(())
}

/// Reduced density matrix on the wires `keep` (in the order given).
pub fn partial_trace(rho: &Mat, dims: &[usize], keep: &[usize]) -> Result<Mat> {
    check_targets(dims, keep)?;
    let total: usize = dims.iter().product();
    if rho.nrows() != total || rho.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "density matrix is {}x{}, register dimension {total}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|w| !keep.contains(w)).collect();
    let st = strides(dims);
    let kdims: Vec<usize> = keep.iter().map(|&w| dims[w]).collect();
    let tdims: Vec<usize> = traced.iter().map(|&w| dims[w]).collect();
    let kd: usize = kdims.iter().product();
    let td: usize = tdims.iter().product();
    let offset = |wires: &[usize], wdims: &[usize], mut j: usize| {
        let mut off = 0;
        for k in (0..wires.len()).rev() {
            off += (j % wdims[k]) * st[wires[k]];
            j /= wdims[k];
        }
        off
    };
    let koff: Vec<usize> = (0..kd).map(|j| offset(keep, &kdims, j)).collect();
    let toff: Vec<usize> = (0..td).map(|j| offset(&traced, &tdims, j)).collect();
    let mut out = Mat::zeros(kd, kd);
    for a in 0..kd {
        for b in 0..kd {
            let mut acc = ZERO;
            for &t in &toff {
                acc += rho[(koff[a] + t, koff[b] + t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Reduced density matrix of a pure register state on `keep`.
pub fn reduced_density(amps: &Vector, dims: &[usize], keep: &[usize]) -> Result<Mat> {
    check_targets(dims, keep)?;
    let m = bipartition_matrix(amps, dims, keep)?;
    Ok(&m * m.adjoint())
}

/// Reshapes a register vector into a matrix with rows indexed by the wires
/// in `rows` and columns by the remaining wires (in register order).
pub fn bipartition_matrix(amps: &Vector, dims: &[usize], rows: &[usize]) -> Result<Mat> {
    check_targets(dims, rows)?;
    let total: usize = dims.iter().product();
    if amps.len() != total {
        return Err(Error::DimensionMismatch(format!(
            "vector length {} does not match register dimension {total}",
            amps.len()
        )));
    }
    let cols: Vec<usize> = (0..dims.len()).filter(|w| !rows.contains(w)).collect();
    let st = strides(dims);
    let rdims: Vec<usize> = rows.iter().map(|&w| dims[w]).collect();
    let cdims: Vec<usize> = cols.iter().map(|&w| dims[w]).collect();
    let rd: usize = rdims.iter().product();
    let cd: usize = cdims.iter().product();
    let offset = |wires: &[usize], wdims: &[usize], mut j: usize| {
        let mut off = 0;
        for k in (0..wires.len()).rev() {
            off += (j % wdims[k]) * st[wires[k]];
            j /= wdims[k];
        }
        off
    };
    let roff: Vec<usize> = (0..rd).map(|j| offset(rows, &rdims, j)).collect();
    let coff: Vec<usize> = (0..cd).map(|j| offset(&cols, &cdims, j)).collect();
    Ok(Mat::from_fn(rd, cd, |a, b| amps[roff[a] + coff[b]]))
}

/// Permutes the wires of a register vector: wire `perm[k]` of the input
/// becomes wire `k` of the output.
pub fn permute_vector(amps: &Vector, dims: &[usize], perm: &[usize]) -> Result<Vector> {
    let m = bipartition_matrix(amps, dims, perm)?;
    Ok(Vector::from_iterator(
        m.nrows(),
        m.column(0).iter().copied(),
    ))
}

/// Conjugates an operator by a wire permutation: wire `perm[k]` of the input
/// register becomes wire `k` of the output register.
pub fn permute_operator(op: &Mat, dims: &[usize], perm: &[usize]) -> Result<Mat> {
    if perm.len() != dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "permutation of length {} for {} wires",
            perm.len(),
            dims.len()
        )));
    }
    check_targets(dims, perm)?;
    let total: usize = dims.iter().product();
    if op.nrows() != total || op.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, register dimension {total}",
            op.nrows(),
            op.ncols()
        )));
    }
    let st = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let nst = strides(&new_dims);
    let index_map: Vec<usize> = (0..total)
        .map(|j| {
            perm.iter()
                .enumerate()
                .map(|(k, &w)| ((j / st[w]) % dims[w]) * nst[k])
                .sum()
        })
        .collect();
    let mut out = Mat::zeros(total, total);
    for a in 0..total {
        for b in 0..total {
            out[(index_map[a], index_map[b])] = op[(a, b)];
        }
    }
    Ok(out)
}

/// Orthonormal basis for the column span of `m`, by modified Gram-Schmidt
/// with re-orthogonalisation. Columns with residual norm below `tol` are
/// dropped.
pub fn orthonormal_columns(m: &Mat, tol: f64) -> Mat {
    let mut basis: Vec<Vector> = Vec::new();
    for j in 0..m.ncols() {
        let mut v: Vector = m.column(j).into_owned();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let n = v.norm();
        if n > tol {
            basis.push(v / c(n, 0.0));
        }
    }
    let rows = m.nrows();
    Mat::from_fn(rows, basis.len(), |i, j| basis[j][i])
}

/// Extends orthonormal columns `v` (D×k) to a D×D unitary whose first `k`
/// columns are `v`.
pub fn complete_unitary(v: &Mat) -> Result<Mat> {
    let dev = isometry_deviation(v);
    if dev > 1e-9 {
        return Err(Error::NotIsometry(dev));
    }
    let d = v.nrows();
    let mut cols: Vec<Vector> = (0..v.ncols()).map(|j| v.column(j).into_owned()).collect();
    for e in 0..d {
        if cols.len() == d {
            break;
        }
        let mut w = basis_vector(d, e);
        for _ in 0..2 {
            for b in &cols {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        let n = w.norm();
        if n > 1e-8 {
            cols.push(w / c(n, 0.0));
        }
    }
    Ok(Mat::from_fn(d, d, |i, j| cols[j][i]))
}

/// Normalised complex Gaussian vector (Haar-random pure state).
pub fn random_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vector {
    let v = Vector::from_fn(dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = v.norm();
    v / c(n, 0.0)
}

pub fn random_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    Mat::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary from the phase-corrected QR decomposition of a
/// complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Mat {
    let g = random_gaussian_matrix(dim, dim, rng);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            out[(i, j)] *= phase;
        }
    }
    out
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Mat {
    let g = random_gaussian_matrix(dim, dim, rng);
    (&g + g.adjoint()).scale(0.5)
}

pub fn pauli_x() -> Mat {
    mat_from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
}

pub fn pauli_y() -> Mat {
    mat_from_rows(&[&[ZERO, -I], &[I, ZERO]])
}

pub fn pauli_z() -> Mat {
    mat_from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]])
}

pub fn hadamard() -> Mat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    mat_from_rows(&[&[c(h, 0.0), c(h, 0.0)], &[c(h, 0.0), c(-h, 0.0)]])
}

/// `diag(1, e^{iθ})`.
pub fn phase(theta: f64) -> Mat {
    mat_from_rows(&[&[ONE, ZERO], &[ZERO, cis(theta)]])
}

pub fn cz() -> Mat {
    Mat::from_diagonal(&Vector::from_vec(vec![ONE, ONE, ONE, -ONE]))
}

pub fn cnot() -> Mat {
    let mut m = Mat::zeros(4, 4);
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

/// `e^{iθ P}` for a Pauli-like involution `P`.
pub fn exp_i_involution(p: &Mat, theta: f64) -> Mat {
    identity(p.nrows()).scale(theta.cos()) + p * c(0.0, theta.sin())
}
