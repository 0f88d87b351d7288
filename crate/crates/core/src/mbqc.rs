//! Cluster states, measurement patterns with feed-forward, single-qubit gate
//! compilation on a linear cluster, and the two-qubit back-and-forth scheme.
//!
//! XY-plane measurements use the basis `(|0⟩ ± e^{iα}|1⟩)/√2`; outcome `0`
//! is the `+` branch. Measuring the first qubit of `CZ(|ψ⟩|+⟩)` leaves
//! `X^s · H · D(α)|ψ⟩` on the second, with `D(α) = diag(1, e^{−iα})`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codes::PauliString;
use crate::linalg::{self, Mat, Vector};
use crate::state::PureState;
use crate::{check_cap, Error, Result};

const BRANCH_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for (k, &(a, b)) in edges.iter().enumerate() {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            if a >= vertices || b >= vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) outside {vertices} vertices"
                )));
            }
            let dup = edges[..k]
                .iter()
                .any(|&(c, d)| (c, d) == (a, b) || (c, d) == (b, a));
            if dup {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) repeated")));
            }
        }
        Ok(Self { vertices, edges })
    }

    pub fn path(n: usize) -> Self {
        Self {
            vertices: n,
            edges: (1..n).map(|k| (k - 1, k)).collect(),
        }
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// `Π CZ_e |+⟩^{⊗n}`.
pub fn cluster_state(g: &Graph) -> Result<PureState> {
    check_cap(g.vertices)?;
    prepare_resource(g, &[], &PureState::basis(vec![], 0)?)
}

/// Like [`cluster_state`], but the `inputs` vertices start in `input`
/// (a state on `inputs.len()` qubits) instead of `|+⟩`.
pub fn prepare_resource(g: &Graph, inputs: &[usize], input: &PureState) -> Result<PureState> {
    check_cap(g.vertices)?;
    if input.wires() != inputs.len() || input.dims().iter().any(|&d| d != 2) {
        return Err(Error::DimensionMismatch(
            "input state must hold one qubit per input vertex".into(),
        ));
    }
    let rest = g.vertices - inputs.len();
    let joint = input.tensor(&PureState::plus_qubits(rest));
    // Joint wire k holds vertex order[k].
    let mut order: Vec<usize> = inputs.to_vec();
    order.extend((0..g.vertices).filter(|v| !inputs.contains(v)));
    let mut perm = vec![0; g.vertices];
    for (k, &v) in order.iter().enumerate() {
        perm[v] = k;
    }
    let amps = linalg::permute_vector(joint.amplitudes(), &vec![2; g.vertices], &perm)?;
    let mut amps: Vec<_> = amps.iter().copied().collect();
    let dims = vec![2; g.vertices];
    for &(a, b) in &g.edges {
        linalg::apply_local(&mut amps, &dims, &linalg::cz(), &[a, b])?;
    }
    PureState::new(amps.into(), dims)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Basis {
    /// `(|0⟩ ± e^{iα}|1⟩)/√2`.
    Xy(f64),
    /// Computational basis; used to delete a site from the resource.
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub site: usize,
    pub basis: Basis,
    /// The angle is negated when the XOR of these outcomes is 1.
    pub sign_deps: Vec<usize>,
    /// `π` is added to the angle when the XOR of these outcomes is 1.
    pub pi_deps: Vec<usize>,
}

/// Byproduct `X^{⊕x_deps} Z^{⊕z_deps}` left on one output.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Correction {
    pub x_deps: Vec<usize>,
    pub z_deps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPattern {
    pub graph: Graph,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub steps: Vec<Step>,
    /// One entry per output, in output order.
    pub corrections: Vec<Correction>,
}

impl MeasurementPattern {
    pub fn validate(&self) -> Result<()> {
        let n = self.graph.vertices;
        let mut measured = vec![false; n];
        for (k, st) in self.steps.iter().enumerate() {
            if st.site >= n {
                return Err(Error::InvalidPattern(format!(
                    "step {k} measures site {} of {n}",
                    st.site
                )));
            }
            if measured[st.site] {
                return Err(Error::InvalidPattern(format!(
                    "site {} measured twice",
                    st.site
                )));
            }
            measured[st.site] = true;
            if st.sign_deps.iter().chain(&st.pi_deps).any(|&d| d >= k) {
                return Err(Error::InvalidPattern(format!(
                    "step {k} depends on a later step"
                )));
            }
        }
        for &o in &self.outputs {
            if o >= n || measured[o] {
                return Err(Error::InvalidPattern(format!(
                    "output {o} is measured or out of range"
                )));
            }
        }
        if (0..n).any(|s| !measured[s] && !self.outputs.contains(&s)) {
            return Err(Error::InvalidPattern(
                "every site must be measured or an output".into(),
            ));
        }
        if self.inputs.iter().any(|&i| i >= n) {
            return Err(Error::InvalidPattern("input out of range".into()));
        }
        if self.corrections.len() != self.outputs.len() {
            return Err(Error::InvalidPattern(
                "one correction per output is required".into(),
            ));
        }
        let nsteps = self.steps.len();
        if self
            .corrections
            .iter()
            .flat_map(|c| c.x_deps.iter().chain(&c.z_deps))
            .any(|&d| d >= nsteps)
        {
            return Err(Error::InvalidPattern(
                "correction depends on an unknown step".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Branch {
    /// Outcome bit per step; a zero-probability choice is an error.
    Fixed(Vec<u8>),
    Seeded(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternRun {
    pub outcomes: Vec<u8>,
    pub byproduct: PauliString,
    /// Uncorrected state on the outputs, in output order.
    pub final_state: PureState,
}

impl PatternRun {
    /// Removes the byproduct from the output state.
    pub fn corrected(&self) -> Result<PureState> {
        let mut s = self.final_state.clone();
        for k in 0..self.byproduct.len() {
            if self.byproduct.x_bits()[k] {
                s = s.apply_matrix(&linalg::pauli_x(), &[k])?;
            }
            if self.byproduct.z_bits()[k] {
                s = s.apply_matrix(&linalg::pauli_z(), &[k])?;
            }
        }
        Ok(s)
    }
}

fn parity(outcomes: &[u8], deps: &[usize]) -> u8 {
    deps.iter().fold(0, |acc, &d| acc ^ outcomes[d])
}

fn ket(basis: Basis, sign: bool, pi: bool, s: u8) -> Vector {
    match basis {
        Basis::Z => linalg::basis_vector(2, s as usize),
        Basis::Xy(a) => {
            let mut alpha = if sign { -a } else { a };
            if pi {
                alpha += std::f64::consts::PI;
            }
            let r = std::f64::consts::FRAC_1_SQRT_2;
            let phase = linalg::cis(alpha) * if s == 0 { 1.0 } else { -1.0 };
            Vector::from_vec(vec![linalg::c(r, 0.0), phase * r])
        }
    }
}

/// Measures the steps in order with feed-forward and returns outcomes,
/// byproduct and the uncorrected output state.
pub fn run_pattern(
    resource: &PureState,
    p: &MeasurementPattern,
    branch: &Branch,
) -> Result<PatternRun> {
    p.validate()?;
    if resource.wires() != p.graph.vertices || resource.dims().iter().any(|&d| d != 2) {
        return Err(Error::DimensionMismatch(
            "resource does not match the pattern graph".into(),
        ));
    }
    let mut rng = match branch {
        Branch::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(*seed)),
        Branch::Fixed(v) => {
            if v.len() < p.steps.len() {
                return Err(Error::InvalidPattern(format!(
                    "{} outcomes given for {} steps",
                    v.len(),
                    p.steps.len()
                )));
            }
            None
        }
    };
    let mut amps = resource.amplitudes().clone();
    let mut alive: Vec<usize> = (0..p.graph.vertices).collect();
    let mut outcomes = Vec::with_capacity(p.steps.len());
    for (k, st) in p.steps.iter().enumerate() {
        let w = alive.iter().position(|&s| s == st.site).expect("validated");
        let dims = vec![2; alive.len()];
        let m = linalg::bipartition_matrix(&amps, &dims, &[w])?;
        let sign = parity(&outcomes, &st.sign_deps) == 1;
        let pi = parity(&outcomes, &st.pi_deps) == 1;
        let branches: Vec<Vector> = (0..2u8)
            .map(|s| {
                let b = ket(st.basis, sign, pi, s);
                (b.adjoint() * &m).transpose()
            })
            .collect();
        let probs: Vec<f64> = branches.iter().map(|v| v.norm_squared()).collect();
        let s = match (&mut rng, branch) {
            (Some(r), _) => {
                let u: f64 = r.random();
                if u * (probs[0] + probs[1]) < probs[0] {
                    0
                } else {
                    1
                }
            }
            (None, Branch::Fixed(v)) => v[k] & 1,
            _ => unreachable!(),
        };
        let norm = probs[s as usize].sqrt();
        if norm * norm < BRANCH_FLOOR {
            return Err(Error::ImpossibleBranch { step: k });
        }
        amps = &branches[s as usize] / linalg::c(norm, 0.0);
        alive.remove(w);
        outcomes.push(s);
    }
    let perm: Vec<usize> = p
        .outputs
        .iter()
        .map(|o| alive.iter().position(|s| s == o).expect("validated"))
        .collect();
    let out = linalg::permute_vector(&amps, &vec![2; alive.len()], &perm)?;
    let x = p
        .corrections
        .iter()
        .map(|c| parity(&outcomes, &c.x_deps) == 1)
        .collect();
    let z = p
        .corrections
        .iter()
        .map(|c| parity(&outcomes, &c.z_deps) == 1)
        .collect();
    Ok(PatternRun {
        outcomes,
        byproduct: PauliString::new(x, z, 0)?,
        final_state: PureState::normalized(out, vec![2; p.outputs.len()])?,
    })
}

/// Angles `(a, b, c)` with `u ≅ Rz(c) · Rx(b) · Rz(a)`.
pub fn zxz_angles(u: &Mat) -> Result<(f64, f64, f64)> {
    if u.shape() != (2, 2) {
        return Err(Error::DimensionMismatch("expected a 2x2 unitary".into()));
    }
    let dev = linalg::unitarity_deviation(u);
    if dev > 1e-10 {
        return Err(Error::NotUnitary(dev));
    }
    let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let b = 2.0 * u10.norm().atan2(u00.norm());
    let half = std::f64::consts::FRAC_PI_2;
    let (a, c) = if u10.norm() < 1e-12 {
        (u11.arg() - u00.arg(), 0.0)
    } else if u00.norm() < 1e-12 {
        (0.0, u10.arg() - u01.arg())
    } else {
        let c = u10.arg() - u00.arg() + half;
        (u11.arg() - u00.arg() - c, c)
    };
    Ok((a, b, c))
}

#[cfg(test)]
fn rz(t: f64) -> Mat {
    Mat::from_diagonal(&Vector::from_vec(vec![
        linalg::cis(-t / 2.0),
        linalg::cis(t / 2.0),
    ]))
}

#[cfg(test)]
fn rx(t: f64) -> Mat {
    let (cs, sn) = ((t / 2.0).cos(), (t / 2.0).sin());
    linalg::mat_from_rows(&[
        &[linalg::c(cs, 0.0), linalg::c(0.0, -sn)],
        &[linalg::c(0.0, -sn), linalg::c(cs, 0.0)],
    ])
}

/// Measurement angles for `J(θ4)J(θ3)J(θ2)J(θ1) ≅ u`, `J(θ) = H·D(θ)`.
pub fn gate_angles(u: &Mat) -> Result<[f64; 4]> {
    let (a, b, c) = zxz_angles(u)?;
    // H·D(θ)·H ≅ Rx(−θ) and D(θ) ≅ Rz(−θ).
    Ok([-a, -b, -c, 0.0])
}

/// Symbolic byproduct tracking for a wire of `J` steps: returns per-step
/// sign dependencies and the final `(x_deps, z_deps)`.
fn wire_dependencies(len: usize) -> (Vec<Vec<usize>>, Vec<usize>, Vec<usize>) {
    let mut x: Vec<usize> = Vec::new();
    let mut z: Vec<usize> = Vec::new();
    let mut signs = Vec::with_capacity(len);
    for k in 0..len {
        signs.push(x.clone());
        // (x, z) → (z ⊕ {k}, x)
        let mut nx = z.clone();
        if let Some(p) = nx.iter().position(|&d| d == k) {
            nx.remove(p);
        } else {
            nx.push(k);
        }
        z = std::mem::replace(&mut x, nx);
    }
    x.sort();
    z.sort();
    (signs, x, z)
}

/// Pattern on a 5-site path: site 0 is the input, site 4 the output.
pub fn compile_1q_gate(u: &Mat) -> Result<MeasurementPattern> {
    let angles = gate_angles(u)?;
    let (signs, x, z) = wire_dependencies(4);
    let steps = (0..4)
        .map(|k| Step {
            site: k,
            basis: Basis::Xy(angles[k]),
            sign_deps: signs[k].clone(),
            pi_deps: Vec::new(),
        })
        .collect();
    Ok(MeasurementPattern {
        graph: Graph::path(5),
        inputs: vec![0],
        outputs: vec![4],
        steps,
        corrections: vec![Correction {
            x_deps: x,
            z_deps: z,
        }],
    })
}

/// Runs a single-input, single-output pattern on wire `wire` of `state`
/// (fresh `|+⟩` ancillas appended for the other sites) and puts the
/// corrected output back on `wire`.
pub fn apply_pattern_on_wire(
    state: &PureState,
    wire: usize,
    p: &MeasurementPattern,
    branch: &Branch,
) -> Result<(PureState, PatternRun)> {
    if p.inputs.len() != 1 || p.outputs.len() != 1 {
        return Err(Error::InvalidPattern(
            "expected one input and one output".into(),
        ));
    }
    let n = state.wires();
    if wire >= n {
        return Err(Error::WireOutOfRange { wire, wires: n });
    }
    let extra = p.graph.vertices - 1;
    check_cap(n + extra)?;
    // Pattern site s sits on register wire map[s].
    let mut map = Vec::with_capacity(p.graph.vertices);
    let mut next = n;
    for s in 0..p.graph.vertices {
        if s == p.inputs[0] {
            map.push(wire);
        } else {
            map.push(next);
            next += 1;
        }
    }
    let mut amps: Vec<_> = state
        .tensor(&PureState::plus_qubits(extra))
        .into_amplitudes()
        .iter()
        .copied()
        .collect();
    let dims = vec![2; n + extra];
    for &(a, b) in p.graph.edges() {
        linalg::apply_local(&mut amps, &dims, &linalg::cz(), &[map[a], map[b]])?;
    }
    let joint = PureState::new(amps.into(), dims)?;
    // Relabel so the pattern sees its own sites as wires 0..k, with the
    // spectator wires after them as extra outputs.
    let spectators: Vec<usize> = (0..n).filter(|&w| w != wire).collect();
    let mut order = map.clone();
    order.extend(&spectators);
    let relabelled = linalg::permute_vector(joint.amplitudes(), &vec![2; n + extra], &order)?;
    let mut big = p.clone();
    let k = p.graph.vertices;
    big.graph = Graph::new(k + spectators.len(), p.graph.edges.clone())?;
    big.outputs = p.outputs.clone();
    big.outputs.extend(k..k + spectators.len());
    big.corrections
        .extend(std::iter::repeat_n(Correction::default(), spectators.len()));
    let run = run_pattern(
        &PureState::new(relabelled, vec![2; n + extra])?,
        &big,
        branch,
    )?;
    let corrected = run.corrected()?;
    // corrected wires: [output, spectators...] → original order.
    let mut perm = vec![0; n];
    perm[wire] = 0;
    for (j, &w) in spectators.iter().enumerate() {
        perm[w] = j + 1;
    }
    let back = linalg::permute_vector(corrected.amplitudes(), &vec![2; n], &perm)?;
    Ok((PureState::new(back, vec![2; n])?, run))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoWayStep {
    /// Register after the step; the measured qubit is back in `|+⟩`.
    pub state: PureState,
    pub outcome: u8,
    /// `X^outcome` on the qubit now holding the data.
    pub byproduct: PauliString,
    /// Qubit that now holds the data.
    pub active: usize,
}

/// CZ, measure `active` at `angle`, reset it to `|+⟩`. The data moves to the
/// other qubit carrying `X^s · H · D(angle)`.
pub fn two_way_step(
    register: &PureState,
    active: usize,
    angle: f64,
    branch: &Branch,
) -> Result<TwoWayStep> {
    if register.dims() != [2, 2] || active > 1 {
        return Err(Error::DimensionMismatch(
            "two-way register is two qubits, active in {0, 1}".into(),
        ));
    }
    let other = 1 - active;
    let pattern = MeasurementPattern {
        graph: Graph::path(2),
        inputs: vec![active],
        outputs: vec![other],
        steps: vec![Step {
            site: active,
            basis: Basis::Xy(angle),
            sign_deps: vec![],
            pi_deps: vec![],
        }],
        corrections: vec![Correction {
            x_deps: vec![0],
            z_deps: vec![],
        }],
    };
    let entangled = register.apply_matrix(&linalg::cz(), &[0, 1])?;
    let run = run_pattern(&entangled, &pattern, branch)?;
    let plus = PureState::plus_qubits(1);
    let state = if active == 0 {
        plus.tensor(&run.final_state)
    } else {
        run.final_state.tensor(&plus)
    };
    Ok(TwoWayStep {
        state,
        outcome: run.outcomes[0],
        byproduct: run.byproduct,
        active: other,
    })
}

/// Applies `u` to `psi` with four two-way steps and adaptive angles; returns
/// the corrected data state and the outcomes.
pub fn two_way_gate(
    psi: &PureState,
    u: &Mat,
    outcomes: Option<&[u8]>,
    seed: u64,
) -> Result<(PureState, Vec<u8>)> {
    if psi.dims() != [2] {
        return Err(Error::DimensionMismatch(
            "expected a one-qubit state".into(),
        ));
    }
    let angles = gate_angles(u)?;
    let (signs, xd, zd) = wire_dependencies(4);
    let mut reg = psi.tensor(&PureState::plus_qubits(1));
    let mut active = 0;
    let mut got: Vec<u8> = Vec::new();
    for k in 0..4 {
        let flip = parity(&got, &signs[k]) == 1;
        let angle = if flip { -angles[k] } else { angles[k] };
        let branch = match outcomes {
            Some(o) => Branch::Fixed(vec![o[k]]),
            None => Branch::Seeded(seed.wrapping_add(k as u64)),
        };
        let step = two_way_step(&reg, active, angle, &branch)?;
        got.push(step.outcome);
        reg = step.state;
        active = step.active;
    }
    let m = linalg::bipartition_matrix(reg.amplitudes(), reg.dims(), &[active])?;
    let mut data =
        PureState::normalized(m.column(0).into_owned() + m.column(1).into_owned(), vec![2])?;
    if parity(&got, &xd) == 1 {
        data = data.apply_matrix(&linalg::pauli_x(), &[0])?;
    }
    if parity(&got, &zd) == 1 {
        data = data.apply_matrix(&linalg::pauli_z(), &[0])?;
    }
    Ok((data, got))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hadamard, max_abs, phase, phase_aligned_distance, random_unitary, ONE};

    fn branches(m: usize) -> impl Iterator<Item = Vec<u8>> {
        (0..1u32 << m).map(move |b| (0..m).map(|k| ((b >> k) & 1) as u8).collect())
    }

    #[test]
    fn cluster_examples() {
        let one = cluster_state(&Graph::new(1, vec![]).unwrap()).unwrap();
        assert!(one.fidelity(&PureState::plus_qubits(1)) > 1.0 - 1e-15);
        let edge = cluster_state(&Graph::path(2)).unwrap();
        let oracle = PureState::plus_qubits(2)
            .apply_matrix(&linalg::cz(), &[0, 1])
            .unwrap();
        assert!(edge.fidelity(&oracle) > 1.0 - 1e-15);
        let three = cluster_state(&Graph::path(3)).unwrap();
        assert!((three.entanglement_entropy(&[0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((three.entanglement_entropy(&[0, 1]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn edge_order_is_irrelevant() {
        let a = Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let b = Graph::new(4, vec![(0, 3), (2, 3), (1, 0), (2, 1)]).unwrap();
        let d = cluster_state(&a).unwrap().amplitudes() - cluster_state(&b).unwrap().amplitudes();
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn graph_validation() {
        assert!(Graph::new(2, vec![(0, 0)]).is_err());
        assert!(Graph::new(2, vec![(0, 2)]).is_err());
        assert!(Graph::new(2, vec![(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn disconnected_plus_is_deterministic() {
        let g = Graph::new(2, vec![]).unwrap();
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(61);
        let psi = PureState::random(vec![2], &mut rng);
        let resource = prepare_resource(&g, &[0], &psi).unwrap();
        let p = MeasurementPattern {
            graph: g,
            inputs: vec![0],
            outputs: vec![0],
            steps: vec![Step {
                site: 1,
                basis: Basis::Xy(0.0),
                sign_deps: vec![],
                pi_deps: vec![],
            }],
            corrections: vec![Correction::default()],
        };
        for seed in 0..10 {
            let run = run_pattern(&resource, &p, &Branch::Seeded(seed)).unwrap();
            assert_eq!(run.outcomes, vec![0]);
            assert!(run.final_state.fidelity(&psi) > 1.0 - 1e-12);
        }
        assert!(matches!(
            run_pattern(&resource, &p, &Branch::Fixed(vec![1])),
            Err(Error::ImpossibleBranch { step: 0 })
        ));
    }

    #[test]
    fn single_teleport_matches_dense_measurement() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(62);
        let psi = PureState::random(vec![2], &mut rng);
        let alpha = 0.83;
        let resource = prepare_resource(&Graph::path(2), &[0], &psi).unwrap();
        let p = MeasurementPattern {
            graph: Graph::path(2),
            inputs: vec![0],
            outputs: vec![1],
            steps: vec![Step {
                site: 0,
                basis: Basis::Xy(alpha),
                sign_deps: vec![],
                pi_deps: vec![],
            }],
            corrections: vec![Correction {
                x_deps: vec![0],
                z_deps: vec![],
            }],
        };
        let run = run_pattern(&resource, &p, &Branch::Fixed(vec![0])).unwrap();
        // Dense oracle: project wire 0 on (|0⟩ + e^{iα}|1⟩)/√2.
        let b = Vector::from_vec(vec![linalg::c(1.0, 0.0), linalg::cis(alpha)])
            / linalg::c(2f64.sqrt(), 0.0);
        let m = linalg::bipartition_matrix(resource.amplitudes(), &[2, 2], &[0]).unwrap();
        let oracle = PureState::normalized((b.adjoint() * m).transpose(), vec![2]).unwrap();
        assert!(run.final_state.fidelity(&oracle) > 1.0 - 1e-12);
        let d = Mat::from_diagonal(&Vector::from_vec(vec![ONE, linalg::cis(-alpha)]));
        let expected = psi.apply_matrix(&(hadamard() * d), &[0]).unwrap();
        assert!(run.final_state.fidelity(&expected) > 1.0 - 1e-12);
        let other = run_pattern(&resource, &p, &Branch::Fixed(vec![1])).unwrap();
        assert!(other.corrected().unwrap().fidelity(&expected) > 1.0 - 1e-12);
    }

    #[test]
    fn euler_angles_reconstruct() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(63);
        let mut cases = vec![
            linalg::identity(2),
            hadamard(),
            phase(std::f64::consts::FRAC_PI_4),
            linalg::pauli_x(),
            linalg::pauli_y(),
        ];
        cases.extend((0..20).map(|_| random_unitary(2, &mut rng)));
        for u in cases {
            let (a, b, c) = zxz_angles(&u).unwrap();
            assert!(phase_aligned_distance(&(rz(c) * rx(b) * rz(a)), &u) < 1e-10);
        }
    }

    fn check_all_branches(u: &Mat, psi: &PureState) {
        let p = compile_1q_gate(u).unwrap();
        let resource = prepare_resource(&p.graph, &p.inputs, psi).unwrap();
        let expected = psi.apply_matrix(u, &[0]).unwrap();
        let mut first: Option<PureState> = None;
        for outcomes in branches(4) {
            let run = run_pattern(&resource, &p, &Branch::Fixed(outcomes)).unwrap();
            let out = run.corrected().unwrap();
            assert!(out.fidelity(&expected) >= 1.0 - 1e-9);
            if let Some(f) = &first {
                assert!(out.fidelity(f) >= 1.0 - 1e-9);
            } else {
                first = Some(out);
            }
        }
    }

    #[test]
    fn compiled_gates_are_deterministic() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(64);
        let psi = PureState::random(vec![2], &mut rng);
        check_all_branches(&linalg::identity(2), &psi);
        check_all_branches(&hadamard(), &psi);
        check_all_branches(&phase(std::f64::consts::FRAC_PI_4), &psi);
        for _ in 0..5 {
            check_all_branches(&random_unitary(2, &mut rng), &psi);
        }
    }

    #[test]
    fn pattern_on_a_wire_of_a_register() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(65);
        let psi = PureState::random(vec![2, 2, 2], &mut rng);
        let u = random_unitary(2, &mut rng);
        let p = compile_1q_gate(&u).unwrap();
        for seed in 0..4 {
            let (out, _) = apply_pattern_on_wire(&psi, 1, &p, &Branch::Seeded(seed)).unwrap();
            let expected = psi.apply_matrix(&u, &[1]).unwrap();
            assert!(out.fidelity(&expected) >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn z_deletion_cuts_the_path() {
        // Deleting the middle of a 3-site path leaves |+⟩|+⟩ up to Z^s on both ends.
        let g = Graph::path(3);
        let resource = cluster_state(&g).unwrap();
        let p = MeasurementPattern {
            graph: g,
            inputs: vec![],
            outputs: vec![0, 2],
            steps: vec![Step {
                site: 1,
                basis: Basis::Z,
                sign_deps: vec![],
                pi_deps: vec![],
            }],
            corrections: vec![
                Correction {
                    x_deps: vec![],
                    z_deps: vec![0],
                },
                Correction {
                    x_deps: vec![],
                    z_deps: vec![0],
                },
            ],
        };
        for s in 0..2u8 {
            let run = run_pattern(&resource, &p, &Branch::Fixed(vec![s])).unwrap();
            assert!(
                run.corrected()
                    .unwrap()
                    .fidelity(&PureState::plus_qubits(2))
                    > 1.0 - 1e-12
            );
        }
    }

    #[test]
    fn pattern_validation() {
        let mut p = compile_1q_gate(&hadamard()).unwrap();
        p.steps[1].sign_deps = vec![3];
        assert!(matches!(p.validate(), Err(Error::InvalidPattern(_))));
        let mut p = compile_1q_gate(&hadamard()).unwrap();
        p.steps[1].site = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn two_way_examples() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(66);
        let psi = PureState::random(vec![2], &mut rng);
        let reg = psi.tensor(&PureState::plus_qubits(1));
        let step = two_way_step(&reg, 0, 0.0, &Branch::Fixed(vec![0])).unwrap();
        assert_eq!(step.active, 1);
        let data = step.state.reduced(&[1]).unwrap();
        let h_psi = psi.apply_matrix(&hadamard(), &[0]).unwrap();
        assert!(max_abs(&(data - h_psi.density())) < 1e-12);
        // H then H is the identity after correction.
        for outcomes in branches(2) {
            let mut reg = reg.clone();
            let mut active = 0;
            let mut x = 0u8;
            let mut z = 0u8;
            for &s in &outcomes {
                let st = two_way_step(&reg, active, 0.0, &Branch::Fixed(vec![s])).unwrap();
                (x, z) = (z ^ s, x);
                reg = st.state;
                active = st.active;
            }
            let mut out = PureState::normalized(
                linalg::bipartition_matrix(reg.amplitudes(), &[2, 2], &[active])
                    .unwrap()
                    .column(0)
                    .into_owned()
                    * linalg::c(2f64.sqrt(), 0.0),
                vec![2],
            )
            .unwrap();
            if x == 1 {
                out = out.apply_matrix(&linalg::pauli_x(), &[0]).unwrap();
            }
            if z == 1 {
                out = out.apply_matrix(&linalg::pauli_z(), &[0]).unwrap();
            }
            assert!(out.fidelity(&psi) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn two_way_t_gate_all_branches() {
        let mut rng = <ChaCha8Rng as SeedableRng>::seed_from_u64(67);
        let psi = PureState::random(vec![2], &mut rng);
        let t = phase(std::f64::consts::FRAC_PI_4);
        let expected = psi.apply_matrix(&t, &[0]).unwrap();
        for outcomes in branches(4) {
            let (out, got) = two_way_gate(&psi, &t, Some(&outcomes), 0).unwrap();
            assert_eq!(got, outcomes);
            assert!(out.fidelity(&expected) >= 1.0 - 1e-9);
        }
    }
}
