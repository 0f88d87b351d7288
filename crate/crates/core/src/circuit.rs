//! Gate-list circuits: dense simulation and exhaustive `{H, T}` compilation.
//!
//! Gates are stored in application order, so a list `[U₁, U₂, …, Uₙ]`
//! implements `Uₙ⋯U₂U₁`.

use std::fmt;

use crate::linalg::{self, Mat};
use crate::state::{PureState, UnitaryOp, UNITARY_TOL};
use crate::{check_cap, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    H,
    T,
    S,
    X,
    Z,
    CZ,
    CNOT,
    I,
    Custom(Mat),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::CZ | GateKind::CNOT => 2,
            GateKind::Custom(m) => m.nrows().trailing_zeros() as usize,
            _ => 1,
        }
    }

    pub fn matrix(&self) -> Mat {
        match self {
            GateKind::H => linalg::hadamard(),
            GateKind::T => linalg::phase(std::f64::consts::FRAC_PI_4),
            GateKind::S => linalg::phase(std::f64::consts::FRAC_PI_2),
            GateKind::X => linalg::pauli_x(),
            GateKind::Z => linalg::pauli_z(),
            GateKind::CZ => linalg::cz(),
            GateKind::CNOT => linalg::cnot(),
            GateKind::I => linalg::identity(2),
            GateKind::Custom(m) => m.clone(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::T => "T",
            GateKind::S => "S",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::CZ => "CZ",
            GateKind::CNOT => "CNOT",
            GateKind::I => "I",
            GateKind::Custom(_) => "U",
        }
    }

    pub fn from_name(name: &str) -> Option<GateKind> {
        Some(match name {
            "H" => GateKind::H,
            "T" => GateKind::T,
            "S" => GateKind::S,
            "X" => GateKind::X,
            "Z" => GateKind::Z,
            "CZ" => GateKind::CZ,
            "CNOT" => GateKind::CNOT,
            "I" => GateKind::I,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>) -> Result<Self> {
        if let GateKind::Custom(m) = &kind {
            let d = m.nrows();
            if !d.is_power_of_two() || d < 2 || !m.is_square() {
                return Err(Error::DimensionMismatch(format!(
                    "custom gate must be a 2^k x 2^k matrix, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let dev = linalg::unitarity_deviation(m);
            if dev > UNITARY_TOL {
                return Err(Error::NotUnitary(dev));
            }
        }
        if kind.arity() != targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} acts on {} wires, {} targets given",
                kind.name(),
                kind.arity(),
                targets.len()
            )));
        }
        for (k, &t) in targets.iter().enumerate() {
            if targets[..k].contains(&t) {
                return Err(Error::DuplicateTarget(t));
            }
        }
        Ok(Self { kind, targets })
    }

    pub fn h(q: usize) -> Self {
        Self {
            kind: GateKind::H,
            targets: vec![q],
        }
    }

    pub fn t(q: usize) -> Self {
        Self {
            kind: GateKind::T,
            targets: vec![q],
        }
    }

    pub fn x(q: usize) -> Self {
        Self {
            kind: GateKind::X,
            targets: vec![q],
        }
    }

    pub fn cz(a: usize, b: usize) -> Result<Self> {
        Self::new(GateKind::CZ, vec![a, b])
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> Mat {
        self.kind.matrix()
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wires: Vec<String> = self.targets.iter().map(|t| t.to_string()).collect();
        write!(f, "{}@{}", self.kind.name(), wires.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    wires: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(wires: usize) -> Self {
        Self {
            wires,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(wires: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(wires);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if let Some(&t) = gate.targets.iter().find(|&&t| t >= self.wires) {
            return Err(Error::WireOutOfRange {
                wire: t,
                wires: self.wires,
            });
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn wires(&self) -> usize {
        self.wires
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// `other` runs after `self`.
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        if self.wires != other.wires {
            return Err(Error::DimensionMismatch(format!(
                "cannot concatenate {}-wire and {}-wire circuits",
                self.wires, other.wires
            )));
        }
        let mut gates = self.gates.clone();
        gates.extend(other.gates.iter().cloned());
        Ok(Circuit {
            wires: self.wires,
            gates,
        })
    }

    /// Unitary of the `k`-th gate embedded into the full register.
    pub fn gate_unitary(&self, k: usize) -> Result<Mat> {
        let g = &self.gates[k];
        linalg::embed(&g.matrix(), &vec![2; self.wires], &g.targets)
    }
}

/// `Uₙ⋯U₁|initial⟩`.
pub fn simulate(c: &Circuit, initial: &PureState) -> Result<PureState> {
    let dims = vec![2; c.wires];
    if initial.dims() != dims.as_slice() {
        return Err(Error::DimensionMismatch(format!(
            "circuit has {} qubit wires, state dims {:?}",
            c.wires,
            initial.dims()
        )));
    }
    let mut amps: Vec<_> = initial.amplitudes().iter().copied().collect();
    for g in &c.gates {
        linalg::apply_local(&mut amps, &dims, &g.matrix(), &g.targets)?;
    }
    PureState::normalized(amps.into(), dims)
}

/// Ordered product of the embedded gate matrices.
pub fn circuit_unitary(c: &Circuit) -> Result<UnitaryOp> {
    check_cap(c.wires)?;
    let dims = vec![2; c.wires];
    let mut u = linalg::identity(1 << c.wires);
    for g in &c.gates {
        linalg::apply_local_to_columns(&mut u, &dims, &g.matrix(), &g.targets)?;
    }
    UnitaryOp::new(u, dims)
}

/// Shortest word over `{H, T}` whose product is within `eps` of `target`
/// (phase-aligned operator distance).
///
/// Words are searched by increasing length, lexicographically with `H < T`
/// inside a length, so the first hit is a shortest one. Returns a one-wire
/// circuit.
pub fn compile_su2_bruteforce(target: &Mat, max_depth: usize, eps: f64) -> Result<Circuit> {
    if target.shape() != (2, 2) {
        return Err(Error::DimensionMismatch("target must be 2x2".into()));
    }
    if max_depth > 20 {
        return Err(Error::OutOfRange(format!(
            "max_depth {max_depth} exceeds 20"
        )));
    }
    let letters = [linalg::hadamard(), GateKind::T.matrix()];
    // Exact hits are accepted up to round-off.
    let threshold = eps + 1e-9;
    let mut word = Vec::with_capacity(max_depth);
    for depth in 0..=max_depth {
        if search(
            target,
            &letters,
            depth,
            &linalg::identity(2),
            &mut word,
            threshold,
        ) {
            let gates = word
                .iter()
                .map(|&l| if l == 0 { Gate::h(0) } else { Gate::t(0) })
                .collect();
            return Circuit::from_gates(1, gates);
        }
    }
    Err(Error::NotFound { max_depth, eps })
}

fn search(
    target: &Mat,
    letters: &[Mat; 2],
    remaining: usize,
    product: &Mat,
    word: &mut Vec<usize>,
    threshold: f64,
) -> bool {
    if remaining == 0 {
        return linalg::phase_aligned_distance(product, target) <= threshold;
    }
    for (l, m) in letters.iter().enumerate() {
        word.push(l);
        if search(
            target,
            letters,
            remaining - 1,
            &(m * product),
            word,
            threshold,
        ) {
            return true;
        }
        word.pop();
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, cis, max_abs, random_unitary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_circuit<R: Rng>(n: usize, depth: usize, rng: &mut R) -> Circuit {
        let mut circ = Circuit::new(n);
        for _ in 0..depth {
            let g = match rng.random_range(0..4) {
                0 => Gate::h(rng.random_range(0..n)),
                1 => Gate::t(rng.random_range(0..n)),
                2 if n > 1 => {
                    let a = rng.random_range(0..n);
                    let b = (a + rng.random_range(1..n)) % n;
                    Gate::cz(a, b).unwrap()
                }
                _ => Gate::new(
                    GateKind::Custom(random_unitary(2, rng)),
                    vec![rng.random_range(0..n)],
                )
                .unwrap(),
            };
            circ.push(g).unwrap();
        }
        circ
    }

    #[test]
    fn h_then_t() {
        let c1 = Circuit::from_gates(1, vec![Gate::h(0)]).unwrap();
        let plus = simulate(&c1, &PureState::zero_qubits(1)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((plus.amplitudes()[1] - c(r, 0.0)).norm() < 1e-15);
        let c2 = Circuit::from_gates(1, vec![Gate::t(0)]).unwrap();
        let out = simulate(&c2, &plus).unwrap();
        assert!((out.amplitudes()[1] - cis(std::f64::consts::FRAC_PI_4) * r).norm() < 1e-15);
    }

    #[test]
    fn h_cz_h_matches_explicit_product() {
        let circ =
            Circuit::from_gates(2, vec![Gate::h(0), Gate::cz(0, 1).unwrap(), Gate::h(1)]).unwrap();
        let i2 = linalg::identity(2);
        let h = linalg::hadamard();
        let oracle = linalg::kron(&i2, &h) * linalg::cz() * linalg::kron(&h, &i2);
        let expected = &oracle * linalg::basis_vector(4, 0);
        let out = simulate(&circ, &PureState::zero_qubits(2)).unwrap();
        assert!((out.amplitudes() - expected).norm() < 1e-14);
    }

    #[test]
    fn unitary_identities() {
        assert!(
            max_abs(&(circuit_unitary(&Circuit::new(2)).unwrap().matrix() - linalg::identity(4)))
                < 1e-15
        );
        let xx = Circuit::from_gates(1, vec![Gate::x(0), Gate::x(0)]).unwrap();
        assert!(max_abs(&(circuit_unitary(&xx).unwrap().matrix() - linalg::identity(2))) < 1e-15);
        let t8 = Circuit::from_gates(1, vec![Gate::t(0); 8]).unwrap();
        let u = circuit_unitary(&t8).unwrap();
        assert!(u.distance(&UnitaryOp::identity(vec![2])) < 1e-12);
    }

    #[test]
    fn simulate_equals_unitary_on_random_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let n = rng.random_range(1..=4);
            let depth = rng.random_range(0..=20);
            let circ = random_circuit(n, depth, &mut rng);
            let psi = PureState::random(vec![2; n], &mut rng);
            let a = simulate(&circ, &psi).unwrap();
            let b = circuit_unitary(&circ).unwrap().apply_to(&psi).unwrap();
            assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-10);
        }
    }

    #[test]
    fn concatenation_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..20 {
            let a = random_circuit(3, 8, &mut rng);
            let b = random_circuit(3, 8, &mut rng);
            let ab = circuit_unitary(&a.then(&b).unwrap()).unwrap();
            let prod = circuit_unitary(&b)
                .unwrap()
                .compose(&circuit_unitary(&a).unwrap())
                .unwrap();
            assert!(max_abs(&(ab.matrix() - prod.matrix())) < 1e-10);
        }
    }

    #[test]
    fn gate_validation() {
        assert!(matches!(
            Gate::new(GateKind::CZ, vec![0]),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            Gate::new(GateKind::CZ, vec![1, 1]),
            Err(Error::DuplicateTarget(1))
        ));
        let mut circ = Circuit::new(2);
        assert!(matches!(
            circ.push(Gate::h(2)),
            Err(Error::WireOutOfRange { .. })
        ));
        let bad = linalg::hadamard() * c(2.0, 0.0);
        assert!(matches!(
            Gate::new(GateKind::Custom(bad), vec![0]),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            circuit_unitary(&Circuit::new(40)),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn compile_trivial_words() {
        let h = compile_su2_bruteforce(&linalg::hadamard(), 1, 0.0).unwrap();
        assert_eq!(h.gates(), &[Gate::h(0)]);
        let s = compile_su2_bruteforce(&GateKind::S.matrix(), 2, 0.0).unwrap();
        assert_eq!(s.gates(), &[Gate::t(0), Gate::t(0)]);
        assert!(compile_su2_bruteforce(&linalg::identity(2), 3, 0.0)
            .unwrap()
            .is_empty());
    }

    /// Independent oracle: list every word up to `depth` and take the best.
    fn best_word_distance(target: &Mat, depth: usize) -> (f64, usize) {
        let letters = [linalg::hadamard(), GateKind::T.matrix()];
        let mut best = (f64::INFINITY, usize::MAX);
        for len in 0..=depth {
            for bits in 0..(1usize << len) {
                let mut p = linalg::identity(2);
                for k in 0..len {
                    p = &letters[(bits >> k) & 1] * p;
                }
                let d = linalg::phase_aligned_distance(&p, target);
                if d < best.0 - 1e-12 {
                    best = (d, len);
                }
            }
        }
        best
    }

    #[test]
    fn compile_random_target_agrees_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mut found = 0;
        for _ in 0..5 {
            let target = random_unitary(2, &mut rng);
            let (best, _) = best_word_distance(&target, 12);
            match compile_su2_bruteforce(&target, 12, 0.3) {
                Ok(circ) => {
                    found += 1;
                    assert!(circ.len() <= 12);
                    let u = circuit_unitary(&circ).unwrap();
                    assert!(linalg::phase_aligned_distance(u.matrix(), &target) <= 0.3 + 1e-9);
                }
                Err(Error::NotFound { .. }) => assert!(best > 0.3),
                Err(e) => panic!("{e}"),
            }
            if best <= 0.3 {
                assert!(compile_su2_bruteforce(&target, 12, 0.3).is_ok());
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn compile_reports_not_found() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let target = random_unitary(2, &mut rng);
        assert!(matches!(
            compile_su2_bruteforce(&target, 2, 1e-6),
            Err(Error::NotFound { .. })
        ));
    }
}
