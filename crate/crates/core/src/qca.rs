//! Local Hamiltonians, Trotterized layer dynamics, MPU layers, continuous-time
//! quantum walks and locally scheduled (controlled) evolutions.

use crate::circuit::{Circuit, Gate, GateKind};
use crate::linalg::{self, Mat, Vector};
use crate::state::{PureState, UnitaryOp};
use crate::tensor::Mpu;
use crate::{check_dim_cap, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub matrix: Mat,
    pub support: Vec<usize>,
}

/// `H = Σ_j h_j` with each `h_j` acting on a few wires.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalHamiltonian {
    dims: Vec<usize>,
    terms: Vec<Term>,
}

impl LocalHamiltonian {
    pub fn new(dims: Vec<usize>, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.support.is_empty() {
                return Err(Error::DimensionMismatch("term with empty support".into()));
            }
            for (k, &w) in t.support.iter().enumerate() {
                if w >= dims.len() {
                    return Err(Error::WireOutOfRange {
                        wire: w,
                        wires: dims.len(),
                    });
                }
                if t.support[..k].contains(&w) {
                    return Err(Error::DuplicateTarget(w));
                }
            }
            let d: usize = t.support.iter().map(|&w| dims[w]).product();
            if t.matrix.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!(
                    "term on {:?} must be {d}x{d}",
                    t.support
                )));
            }
            linalg::ensure_hermitian(&t.matrix, 1e-10)?;
        }
        Ok(Self { dims, terms })
    }

    pub fn qubits(n: usize, terms: Vec<Term>) -> Result<Self> {
        Self::new(vec![2; n], terms)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn to_matrix(&self) -> Result<Mat> {
        let dim: usize = self.dims.iter().product();
        check_dim_cap(dim)?;
        let mut h = Mat::zeros(dim, dim);
        for t in &self.terms {
            h += linalg::embed(&t.matrix, &self.dims, &t.support)?;
        }
        Ok(h)
    }
}

/// `−J Σ Z_k Z_{k+1} − g Σ X_k` on an open chain.
pub fn transverse_field_ising(n: usize, j: f64, g: f64) -> LocalHamiltonian {
    let zz = linalg::kron(&linalg::pauli_z(), &linalg::pauli_z()).scale(-j);
    let x = linalg::pauli_x().scale(-g);
    let mut terms = Vec::new();
    for k in 0..n.saturating_sub(1) {
        terms.push(Term {
            matrix: zz.clone(),
            support: vec![k, k + 1],
        });
    }
    for k in 0..n {
        terms.push(Term {
            matrix: x.clone(),
            support: vec![k],
        });
    }
    LocalHamiltonian::qubits(n, terms).expect("Ising terms are valid")
}

/// Dense `e^{−itH}`.
pub fn exact_unitary(h: &LocalHamiltonian, t: f64) -> Result<Mat> {
    Ok(linalg::expm_hermitian(&h.to_matrix()?, t))
}

/// `e^{−itH}|s⟩` by dense diagonalization.
pub fn exact_evolve(h: &LocalHamiltonian, t: f64, s: &PureState) -> Result<PureState> {
    if s.dims() != h.dims() {
        return Err(Error::DimensionMismatch(
            "state and Hamiltonian registers differ".into(),
        ));
    }
    let u = exact_unitary(h, t)?;
    PureState::normalized(u * s.amplitudes(), s.dims().to_vec())
}

/// Greedy colouring of the support-overlap graph; terms in a colour class
/// have disjoint supports.
pub fn greedy_layers(supports: &[&[usize]]) -> Vec<Vec<usize>> {
    let mut layers: Vec<Vec<usize>> = Vec::new();
    let mut used: Vec<Vec<usize>> = Vec::new();
    for (j, s) in supports.iter().enumerate() {
        match used.iter().position(|u| s.iter().all(|w| !u.contains(w))) {
            Some(l) => {
                layers[l].push(j);
                used[l].extend_from_slice(s);
            }
            None => {
                layers.push(vec![j]);
                used.push(s.to_vec());
            }
        }
    }
    layers
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrotterPlan {
    pub t: f64,
    pub r: usize,
    pub order: u8,
    /// Term indices per layer.
    pub layers: Vec<Vec<usize>>,
}

impl TrotterPlan {
    pub fn new(h: &LocalHamiltonian, t: f64, r: usize, order: u8) -> Result<Self> {
        if r == 0 {
            return Err(Error::OutOfRange("r must be at least 1".into()));
        }
        if order != 1 && order != 2 {
            return Err(Error::OutOfRange(format!("order {order} not in {{1, 2}}")));
        }
        let supports: Vec<&[usize]> = h.terms.iter().map(|t| t.support.as_slice()).collect();
        Ok(Self {
            t,
            r,
            order,
            layers: greedy_layers(&supports),
        })
    }

    pub fn dt(&self) -> f64 {
        self.t / self.r as f64
    }

    /// Dense unitary of one first-order layer at step `dt`.
    pub fn layer_unitary(&self, h: &LocalHamiltonian, layer_index: usize) -> Result<Mat> {
        let dim: usize = h.dims.iter().product();
        check_dim_cap(dim)?;
        let mut u = linalg::identity(dim);
        for &j in self.layer(layer_index)? {
            let term = &h.terms[j];
            let e = linalg::expm_hermitian(&term.matrix, self.dt());
            linalg::apply_local_to_columns(&mut u, &h.dims, &e, &term.support)?;
        }
        Ok(u)
    }

    fn layer(&self, layer_index: usize) -> Result<&[usize]> {
        self.layers
            .get(layer_index)
            .map(|l| l.as_slice())
            .ok_or_else(|| {
                Error::OutOfRange(format!("layer {layer_index} of {}", self.layers.len()))
            })
    }
}

/// Product formula circuit on qubit wires, `r` repetitions of the layers.
pub fn trotterize(h: &LocalHamiltonian, t: f64, r: usize, order: u8) -> Result<Circuit> {
    if h.dims.iter().any(|&d| d != 2) {
        return Err(Error::DimensionMismatch(
            "trotterize builds qubit circuits".into(),
        ));
    }
    let plan = TrotterPlan::new(h, t, r, order)?;
    let dt = plan.dt();
    let gate = |j: usize, tau: f64| {
        let term = &h.terms[j];
        Gate::new(
            GateKind::Custom(linalg::expm_hermitian(&term.matrix, tau)),
            term.support.clone(),
        )
    };
    let mut circ = Circuit::new(h.dims.len());
    for _ in 0..r {
        if order == 1 {
            for layer in &plan.layers {
                for &j in layer {
                    circ.push(gate(j, dt)?)?;
                }
            }
        } else {
            for layer in &plan.layers {
                for &j in layer {
                    circ.push(gate(j, dt / 2.0)?)?;
                }
            }
            for layer in plan.layers.iter().rev() {
                for &j in layer.iter().rev() {
                    circ.push(gate(j, dt / 2.0)?)?;
                }
            }
        }
    }
    Ok(circ)
}

/// One first-order layer at step `t / r` as an MPU. Every term must sit on
/// one site or two neighbouring sites.
pub fn layer_to_mpu(h: &LocalHamiltonian, plan: &TrotterPlan, layer_index: usize) -> Result<Mpu> {
    let mut blocks = Vec::new();
    for &j in plan.layer(layer_index)? {
        let term = &h.terms[j];
        let lo = *term.support.iter().min().unwrap();
        let hi = *term.support.iter().max().unwrap();
        if hi - lo + 1 != term.support.len() || term.support.len() > 2 {
            return Err(Error::NotNearestNeighbour(term.support.clone()));
        }
        let local: Vec<usize> = term.support.iter().map(|w| w - lo).collect();
        let e = linalg::expm_hermitian(&term.matrix, plan.dt());
        blocks.push((linalg::embed(&e, &h.dims[lo..=hi], &local)?, lo));
    }
    Mpu::from_blocks(&h.dims, &blocks)
}

/// `e^{−itA} e_start` for a real symmetric adjacency matrix.
pub fn quantum_walk_evolve(adjacency: &Mat, start: usize, t: f64) -> Result<Vector> {
    let n = adjacency.nrows();
    if !adjacency.is_square() {
        return Err(Error::DimensionMismatch("adjacency must be square".into()));
    }
    if start >= n {
        return Err(Error::OutOfRange(format!("start vertex {start} of {n}")));
    }
    for i in 0..n {
        for j in 0..n {
            let a = adjacency[(i, j)];
            if a.im.abs() > 1e-12 || (a - adjacency[(j, i)]).norm() > 1e-12 {
                return Err(Error::AsymmetricAdjacency);
            }
        }
    }
    Ok(linalg::expm_hermitian(adjacency, t) * linalg::basis_vector(n, start))
}

/// Monotone control schedule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Constant(f64),
    Linear,
    /// `3s² − 2s³`.
    Smoothstep,
    /// Piecewise-linear through equally spaced samples (at least two).
    Table(Vec<f64>),
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            Schedule::Constant(c) if !(0.0..=1.0).contains(c) => {
                Err(Error::BadSchedule(format!("constant {c} outside [0, 1]")))
            }
            Schedule::Table(v) => {
                if v.len() < 2 {
                    return Err(Error::BadSchedule("table needs two samples".into()));
                }
                if v.iter().any(|x| !(0.0..=1.0).contains(x)) {
                    return Err(Error::BadSchedule("table value outside [0, 1]".into()));
                }
                if v.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::BadSchedule("table is not monotone".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn at(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        match self {
            Schedule::Constant(c) => *c,
            Schedule::Linear => s,
            Schedule::Smoothstep => s * s * (3.0 - 2.0 * s),
            Schedule::Table(v) => {
                let x = s * (v.len() - 1) as f64;
                let k = (x.floor() as usize).min(v.len() - 2);
                let f = x - k as f64;
                v[k] * (1.0 - f) + v[k + 1] * f
            }
        }
    }
}

/// Term interpolating `h0 → h1` under its own schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduledTerm {
    pub support: Vec<usize>,
    pub h0: Mat,
    pub h1: Mat,
    pub schedule: Schedule,
}

/// Ordered product over `steps` of first-order layers of
/// `H(s) = Σ_j (1 − σ_j(s)) h0_j + σ_j(s) h1_j`, sampled at step midpoints.
pub fn controlled_evolve(
    dims: &[usize],
    terms: &[ScheduledTerm],
    total_time: f64,
    steps: usize,
) -> Result<UnitaryOp> {
    if steps == 0 {
        return Err(Error::OutOfRange("steps must be at least 1".into()));
    }
    for t in terms {
        t.schedule.validate()?;
        if t.h0.shape() != t.h1.shape() {
            return Err(Error::DimensionMismatch("h0 and h1 differ in shape".into()));
        }
        // Checks support and Hermiticity.
        LocalHamiltonian::new(
            dims.to_vec(),
            vec![
                Term {
                    matrix: t.h0.clone(),
                    support: t.support.clone(),
                },
                Term {
                    matrix: t.h1.clone(),
                    support: t.support.clone(),
                },
            ],
        )?;
    }
    let dim: usize = dims.iter().product();
    check_dim_cap(dim)?;
    let supports: Vec<&[usize]> = terms.iter().map(|t| t.support.as_slice()).collect();
    let layers = greedy_layers(&supports);
    let dt = total_time / steps as f64;
    let mut u = linalg::identity(dim);
    for step in 0..steps {
        let s = (step as f64 + 0.5) / steps as f64;
        for layer in &layers {
            for &j in layer {
                let t = &terms[j];
                let sigma = t.schedule.at(s);
                let h = t.h0.scale(1.0 - sigma) + t.h1.scale(sigma);
                let e = linalg::expm_hermitian(&h, dt);
                linalg::apply_local_to_columns(&mut u, dims, &e, &t.support)?;
            }
        }
    }
    UnitaryOp::new(u, dims.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::circuit_unitary;
    use crate::linalg::{c, max_abs, pauli_x, pauli_z, phase_aligned_distance, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn trotter_error(h: &LocalHamiltonian, t: f64, r: usize, order: u8) -> f64 {
        let u = circuit_unitary(&trotterize(h, t, r, order).unwrap()).unwrap();
        linalg::spectral_norm(&(u.matrix() - exact_unitary(h, t).unwrap()))
    }

    #[test]
    fn exact_evolve_basics() {
        let h = LocalHamiltonian::qubits(
            1,
            vec![Term {
                matrix: pauli_z(),
                support: vec![0],
            }],
        )
        .unwrap();
        let plus = PureState::plus_qubits(1);
        assert!(exact_evolve(&h, 0.0, &plus).unwrap().fidelity(&plus) > 1.0 - 1e-15);
        let out = exact_evolve(&h, std::f64::consts::FRAC_PI_2, &plus).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // e^{-iπZ/2}|+⟩ = (−i|0⟩ + i|1⟩)/√2
        assert!((out.amplitudes()[0] - c(0.0, -r)).norm() < 1e-12);
        assert!((out.amplitudes()[1] - c(0.0, r)).norm() < 1e-12);
    }

    #[test]
    fn opposite_hamiltonians_invert() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let m = random_hermitian(4, &mut rng);
        let h = LocalHamiltonian::qubits(
            2,
            vec![Term {
                matrix: m.clone(),
                support: vec![0, 1],
            }],
        )
        .unwrap();
        let neg = LocalHamiltonian::qubits(
            2,
            vec![Term {
                matrix: -m,
                support: vec![0, 1],
            }],
        )
        .unwrap();
        let psi = PureState::random(vec![2, 2], &mut rng);
        let back = exact_evolve(&neg, 0.7, &exact_evolve(&h, 0.7, &psi).unwrap()).unwrap();
        assert!(back.fidelity(&psi) > 1.0 - 1e-12);
    }

    #[test]
    fn non_hermitian_term_rejected() {
        let bad = pauli_x() * linalg::I;
        assert!(matches!(
            LocalHamiltonian::qubits(
                1,
                vec![Term {
                    matrix: bad,
                    support: vec![0]
                }]
            ),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn commuting_terms_are_exact() {
        let h = LocalHamiltonian::qubits(
            2,
            vec![
                Term {
                    matrix: pauli_z(),
                    support: vec![0],
                },
                Term {
                    matrix: pauli_z(),
                    support: vec![1],
                },
            ],
        )
        .unwrap();
        for r in [1, 3] {
            assert!(trotter_error(&h, 1.3, r, 1) < 1e-10);
        }
    }

    #[test]
    fn first_order_scaling() {
        let h = transverse_field_ising(3, 1.0, 1.0);
        let ratio = trotter_error(&h, 1.0, 200, 1) / trotter_error(&h, 1.0, 100, 1);
        assert!((0.4..=0.6).contains(&ratio), "{ratio}");
    }

    #[test]
    fn second_order_scaling() {
        let h = transverse_field_ising(3, 1.0, 1.0);
        let ratio = trotter_error(&h, 1.0, 20, 2) / trotter_error(&h, 1.0, 10, 2);
        assert!((0.2..=0.3).contains(&ratio), "{ratio}");
    }

    #[test]
    fn layers_commute_and_cover() {
        let h = transverse_field_ising(5, 0.7, 1.1);
        let plan = TrotterPlan::new(&h, 1.0, 1, 1).unwrap();
        let mut seen: Vec<usize> = plan.layers.iter().flatten().copied().collect();
        seen.sort();
        assert_eq!(seen, (0..h.terms().len()).collect::<Vec<_>>());
        for layer in &plan.layers {
            for &a in layer {
                for &b in layer {
                    let ea = linalg::embed(&h.terms()[a].matrix, h.dims(), &h.terms()[a].support)
                        .unwrap();
                    let eb = linalg::embed(&h.terms()[b].matrix, h.dims(), &h.terms()[b].support)
                        .unwrap();
                    assert!(max_abs(&(&ea * &eb - &eb * &ea)) <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn layer_mpus_match_dense() {
        let h = transverse_field_ising(4, 1.0, 0.5);
        let plan = TrotterPlan::new(&h, 0.8, 2, 1).unwrap();
        for k in 0..plan.layers.len() {
            let mpu = layer_to_mpu(&h, &plan, k).unwrap();
            assert!(mpu.max_bond() <= 4);
            let dense = plan.layer_unitary(&h, k).unwrap();
            assert!(max_abs(&(mpu.to_matrix().unwrap() - dense)) < 1e-9);
        }
        let xs = LocalHamiltonian::qubits(
            3,
            (0..3)
                .map(|k| Term {
                    matrix: pauli_x(),
                    support: vec![k],
                })
                .collect(),
        )
        .unwrap();
        let plan = TrotterPlan::new(&xs, 0.3, 1, 1).unwrap();
        assert_eq!(layer_to_mpu(&xs, &plan, 0).unwrap().max_bond(), 1);
        let zero = TrotterPlan::new(&h, 0.0, 1, 1).unwrap();
        let id = layer_to_mpu(&h, &zero, 0).unwrap().to_matrix().unwrap();
        assert!(max_abs(&(id - linalg::identity(16))) < 1e-12);
    }

    #[test]
    fn long_range_term_rejected_for_mpu() {
        let zz = linalg::kron(&pauli_z(), &pauli_z());
        let h = LocalHamiltonian::qubits(
            3,
            vec![Term {
                matrix: zz,
                support: vec![0, 2],
            }],
        )
        .unwrap();
        let plan = TrotterPlan::new(&h, 1.0, 1, 1).unwrap();
        assert!(matches!(
            layer_to_mpu(&h, &plan, 0),
            Err(Error::NotNearestNeighbour(_))
        ));
    }

    fn cycle(n: usize) -> Mat {
        Mat::from_fn(n, n, |i, j| {
            if (i + 1) % n == j || (j + 1) % n == i {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        })
    }

    #[test]
    fn walk_examples() {
        let a = cycle(5);
        let psi = quantum_walk_evolve(&a, 2, 0.0).unwrap();
        assert!((psi[2] - c(1.0, 0.0)).norm() < 1e-15);
        let path = linalg::pauli_x();
        for t in [0.3, 1.0, 2.5] {
            let psi = quantum_walk_evolve(&path, 0, t).unwrap();
            assert!((psi[1] - c(0.0, -f64::sin(t))).norm() < 1e-12);
        }
        let p0: Vec<f64> = quantum_walk_evolve(&a, 0, 1.7)
            .unwrap()
            .iter()
            .map(|z| z.norm_sqr())
            .collect();
        let p2: Vec<f64> = quantum_walk_evolve(&a, 2, 1.7)
            .unwrap()
            .iter()
            .map(|z| z.norm_sqr())
            .collect();
        for v in 0..5 {
            assert!((p0[v] - p2[(v + 2) % 5]).abs() < 1e-12);
        }
        for k in 1..=100 {
            let psi = quantum_walk_evolve(&a, 1, k as f64 * 0.1).unwrap();
            assert!((psi.norm_squared() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn walk_rejects_asymmetric() {
        let mut a = cycle(3);
        a[(0, 1)] = c(0.0, 0.0);
        assert!(matches!(
            quantum_walk_evolve(&a, 0, 1.0),
            Err(Error::AsymmetricAdjacency)
        ));
    }

    fn ising_scheduled(schedule: Schedule) -> Vec<ScheduledTerm> {
        let h = transverse_field_ising(3, 1.0, 0.8);
        h.terms()
            .iter()
            .map(|t| ScheduledTerm {
                support: t.support.clone(),
                h0: Mat::zeros(t.matrix.nrows(), t.matrix.ncols()),
                h1: t.matrix.clone(),
                schedule: schedule.clone(),
            })
            .collect()
    }

    #[test]
    fn constant_schedule_reduces_to_trotter() {
        let h = transverse_field_ising(3, 1.0, 0.8);
        let u =
            controlled_evolve(h.dims(), &ising_scheduled(Schedule::Constant(1.0)), 1.2, 7).unwrap();
        let v = circuit_unitary(&trotterize(&h, 1.2, 7, 1).unwrap()).unwrap();
        assert!(max_abs(&(u.matrix() - v.matrix())) < 1e-10);
    }

    #[test]
    fn step_doubling_converges() {
        let terms = ising_scheduled(Schedule::Smoothstep);
        let dims = [2, 2, 2];
        let mut prev = controlled_evolve(&dims, &terms, 2.0, 4).unwrap();
        let mut last = f64::INFINITY;
        for steps in [8, 16, 32, 64] {
            let next = controlled_evolve(&dims, &terms, 2.0, steps).unwrap();
            let d = phase_aligned_distance(next.matrix(), prev.matrix());
            assert!(d < last);
            last = d;
            prev = next;
        }
    }

    #[test]
    fn zero_time_and_bad_schedules() {
        let terms = ising_scheduled(Schedule::Linear);
        let u = controlled_evolve(&[2, 2, 2], &terms, 0.0, 3).unwrap();
        assert!(max_abs(&(u.matrix() - linalg::identity(8))) < 1e-12);
        let bad = ising_scheduled(Schedule::Table(vec![0.0, 0.8, 0.5, 1.0]));
        assert!(matches!(
            controlled_evolve(&[2, 2, 2], &bad, 1.0, 3),
            Err(Error::BadSchedule(_))
        ));
    }
}
