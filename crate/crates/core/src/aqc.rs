//! Circuit-to-Hamiltonian (FKCH) map with a unary clock, history states,
//! interpolated adiabatic paths, gap tracking and energetic re-encoding.
//!
//! Register layout: the circuit's data wires first, then clock qubits
//! `c_1 … c_N`; clock value `t` is `1^t 0^{N−t}`.

use crate::circuit::{simulate, Circuit};
use crate::linalg::{self, Mat, Vector, ONE};
use crate::qca::{LocalHamiltonian, Schedule, Term};
use crate::state::PureState;
use crate::{check_cap, Error, Result};

const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyWeights {
    pub clock: f64,
    pub edge: f64,
}

impl Default for PenaltyWeights {
    fn default() -> Self {
        Self {
            clock: 1.0,
            edge: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClockHamiltonian {
    circuit: Circuit,
    input: PureState,
    weights: PenaltyWeights,
    terms: LocalHamiltonian,
}

impl ClockHamiltonian {
    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn input(&self) -> &PureState {
        &self.input
    }

    pub fn weights(&self) -> &PenaltyWeights {
        &self.weights
    }

    pub fn terms(&self) -> &LocalHamiltonian {
        &self.terms
    }

    pub fn clock_qubits(&self) -> usize {
        self.circuit.len()
    }

    pub fn matrix(&self) -> Result<Mat> {
        self.terms.to_matrix()
    }
}

/// Operator `|a⟩⟨b|` on a few qubits given as bit strings.
fn outer_bits(a: &[u8], b: &[u8]) -> Mat {
    let idx = |bits: &[u8]| bits.iter().fold(0usize, |acc, &x| 2 * acc + x as usize);
    let d = 1 << a.len();
    let mut m = Mat::zeros(d, d);
    m[(idx(a), idx(b))] = ONE;
    m
}

fn check_input(c: &Circuit, input: &PureState) -> Result<()> {
    if input.dims() != vec![2; c.wires()].as_slice() {
        return Err(Error::DimensionMismatch(format!(
            "input must be a {}-qubit state",
            c.wires()
        )));
    }
    Ok(())
}

/// `H = Σ_t H_prop,t + w_clock Σ_k |01⟩⟨01|_{c_k c_{k+1}} + w_edge (1 − |l⟩⟨l|) ⊗ |0⟩⟨0|_{c_1}`
/// with `H_prop,t = |t⟩⟨t| + |t−1⟩⟨t−1| − U_t ⊗ |t⟩⟨t−1| − h.c.`.
/// History states of `input` span the zero-energy ground space.
pub fn fkch_hamiltonian(
    c: &Circuit,
    input: &PureState,
    weights: PenaltyWeights,
) -> Result<ClockHamiltonian> {
    check_input(c, input)?;
    if !(weights.clock > 0.0 && weights.edge > 0.0) {
        return Err(Error::OutOfRange("penalty weights must be positive".into()));
    }
    let n = c.wires();
    let big_n = c.len();
    check_cap(n + big_n)?;
    let clock = |t: usize| n + t - 1;
    let mut terms = Vec::new();
    for (k, gate) in c.gates().iter().enumerate() {
        let t = k + 1;
        let mut wires = Vec::new();
        let mut before = Vec::new();
        let mut after = Vec::new();
        if t >= 2 {
            wires.push(clock(t - 1));
            before.push(1);
            after.push(1);
        }
        wires.push(clock(t));
        before.push(0);
        after.push(1);
        if t < big_n {
            wires.push(clock(t + 1));
            before.push(0);
            after.push(0);
        }
        let u = gate.matrix();
        let hop = outer_bits(&after, &before);
        let diag = outer_bits(&after, &after) + outer_bits(&before, &before);
        let forward = linalg::kron(&u, &hop);
        let matrix =
            linalg::kron(&linalg::identity(u.nrows()), &diag) - &forward - forward.adjoint();
        let mut support = gate.targets().to_vec();
        support.extend(wires);
        terms.push(Term { matrix, support });
    }
    for k in 1..big_n {
        terms.push(Term {
            matrix: outer_bits(&[0, 1], &[0, 1]) * linalg::c(weights.clock, 0.0),
            support: vec![clock(k), clock(k + 1)],
        });
    }
    if big_n > 0 {
        let wrong = linalg::identity(input.dim()) - input.density();
        let mut support: Vec<usize> = (0..n).collect();
        support.push(clock(1));
        terms.push(Term {
            matrix: linalg::kron(&wrong, &outer_bits(&[0], &[0])) * linalg::c(weights.edge, 0.0),
            support,
        });
    }
    Ok(ClockHamiltonian {
        circuit: c.clone(),
        input: input.clone(),
        weights,
        terms: LocalHamiltonian::qubits(n + big_n, terms)?,
    })
}

fn unary_index(t: usize, big_n: usize) -> usize {
    (0..t).map(|k| 1usize << (big_n - 1 - k)).sum()
}

/// `(N+1)^{−1/2} Σ_t V_t|l⟩|t⟩` with `V_t = U_t⋯U_1`.
pub fn history_state(c: &Circuit, input: &PureState) -> Result<PureState> {
    check_input(c, input)?;
    let n = c.wires();
    let big_n = c.len();
    check_cap(n + big_n)?;
    let cd = 1usize << big_n;
    let mut amps = Vector::zeros(input.dim() * cd);
    let norm = linalg::c(1.0 / ((big_n + 1) as f64).sqrt(), 0.0);
    let mut v = input.clone();
    for t in 0..=big_n {
        if t > 0 {
            let step = Circuit::from_gates(n, vec![c.gates()[t - 1].clone()])?;
            v = simulate(&step, &v)?;
        }
        let ci = unary_index(t, big_n);
        for (d, a) in v.amplitudes().iter().enumerate() {
            amps[d * cd + ci] += a * norm;
        }
    }
    PureState::new(amps, vec![2; n + big_n])
}

/// Data state conditioned on clock value `t` (renormalized).
pub fn clock_slice(history: &PureState, data_wires: usize, t: usize) -> Result<PureState> {
    let big_n = history
        .wires()
        .checked_sub(data_wires)
        .ok_or_else(|| Error::DimensionMismatch("fewer wires than data wires".into()))?;
    if t > big_n {
        return Err(Error::OutOfRange(format!("clock value {t} above {big_n}")));
    }
    let cd = 1usize << big_n;
    let ci = unary_index(t, big_n);
    let dd = history.dim() / cd;
    let v = Vector::from_iterator(dd, (0..dd).map(|d| history.amplitudes()[d * cd + ci]));
    PureState::normalized(v, vec![2; data_wires])
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticPath {
    h0: LocalHamiltonian,
    hf: LocalHamiltonian,
    schedule: Schedule,
}

impl AdiabaticPath {
    pub fn new(h0: LocalHamiltonian, hf: LocalHamiltonian, schedule: Schedule) -> Result<Self> {
        if h0.dims() != hf.dims() {
            return Err(Error::DimensionMismatch(
                "endpoint Hamiltonians act on different registers".into(),
            ));
        }
        schedule.validate()?;
        if schedule.at(0.0).abs() > 1e-12 || (schedule.at(1.0) - 1.0).abs() > 1e-12 {
            return Err(Error::BadSchedule("schedule must run from 0 to 1".into()));
        }
        Ok(Self { h0, hf, schedule })
    }

    pub fn linear(h0: LocalHamiltonian, hf: LocalHamiltonian) -> Result<Self> {
        Self::new(h0, hf, Schedule::Linear)
    }

    pub fn h0(&self) -> &LocalHamiltonian {
        &self.h0
    }

    pub fn hf(&self) -> &LocalHamiltonian {
        &self.hf
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }
}

fn scaled(terms: &[Term], f: f64) -> impl Iterator<Item = Term> + '_ {
    terms.iter().map(move |t| Term {
        matrix: &t.matrix * linalg::c(f, 0.0),
        support: t.support.clone(),
    })
}

/// `(1−σ)H₀ + σH_f` with `σ = schedule(s)`.
pub fn interpolate(path: &AdiabaticPath, s: f64) -> Result<LocalHamiltonian> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfRange(format!("s = {s} outside [0, 1]")));
    }
    let sigma = path.schedule.at(s);
    let mut terms = Vec::new();
    if sigma < 1.0 {
        terms.extend(scaled(path.h0.terms(), 1.0 - sigma));
    }
    if sigma > 0.0 {
        terms.extend(scaled(path.hf.terms(), sigma));
    }
    LocalHamiltonian::new(path.h0.dims().to_vec(), terms)
}

/// Projector onto the lowest eigenspace of `h`.
pub fn ground_projector(h: &Mat) -> Mat {
    let (vals, vecs) = linalg::eigh(h);
    let mut p = Mat::zeros(h.nrows(), h.ncols());
    for (k, &v) in vals.iter().enumerate() {
        if v - vals[0] <= DEGENERACY_TOL {
            let col = vecs.column(k);
            p += col * col.adjoint();
        }
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticRun {
    pub final_state: PureState,
    /// `⟨ψ|P_gs|ψ⟩` for the ground projector of `H_f`.
    pub ground_overlap: f64,
}

/// Piecewise-constant evolution under `H(s(t/T))`, sampled at step midpoints.
pub fn adiabatic_evolve(
    path: &AdiabaticPath,
    total_time: f64,
    steps: usize,
    start: &PureState,
) -> Result<AdiabaticRun> {
    if steps == 0 {
        return Err(Error::OutOfRange("steps must be at least 1".into()));
    }
    if !(total_time >= 0.0) {
        return Err(Error::OutOfRange("total time must be non-negative".into()));
    }
    if start.dims() != path.h0.dims() {
        return Err(Error::DimensionMismatch(
            "start state does not match the path".into(),
        ));
    }
    let dt = total_time / steps as f64;
    let mut v = start.amplitudes().clone();
    if dt > 0.0 {
        for k in 0..steps {
            let s = (k as f64 + 0.5) / steps as f64;
            let h = interpolate(path, s)?.to_matrix()?;
            v = linalg::expm_hermitian(&h, dt) * v;
        }
    }
    let final_state = PureState::normalized(v, start.dims().to_vec())?;
    let p = ground_projector(&path.hf.to_matrix()?);
    let a = final_state.amplitudes();
    let ground_overlap = (a.adjoint() * &p * a)[(0, 0)].re;
    Ok(AdiabaticRun {
        final_state,
        ground_overlap,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    /// `(s, E_1 − E_0)` with eigenvalues counted with multiplicity.
    pub gaps: Vec<(f64, f64)>,
    pub delta_min: f64,
    pub h_max: f64,
    /// `h_max / delta_min²`; infinite when a sample is degenerate.
    pub tf_estimate: f64,
}

pub fn gap_profile(path: &AdiabaticPath, samples: usize) -> Result<GapProfile> {
    if samples < 2 {
        return Err(Error::OutOfRange("at least two samples are needed".into()));
    }
    let ds = 1.0 / (samples - 1) as f64;
    let mut gaps = Vec::with_capacity(samples);
    let mut prev: Option<Mat> = None;
    let mut h_max: f64 = 0.0;
    for j in 0..samples {
        let s = (j as f64 * ds).min(1.0);
        let h = interpolate(path, s)?.to_matrix()?;
        let (vals, _) = linalg::eigh(&h);
        let gap = if vals.len() < 2 {
            f64::INFINITY
        } else {
            vals[1] - vals[0]
        };
        let gap = if gap <= DEGENERACY_TOL { 0.0 } else { gap };
        gaps.push((s, gap));
        if let Some(p) = &prev {
            h_max = h_max.max(linalg::spectral_norm(&(&h - p)) / ds);
        }
        prev = Some(h);
    }
    let delta_min = gaps.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let tf_estimate = if delta_min == 0.0 {
        f64::INFINITY
    } else {
        h_max / (delta_min * delta_min)
    };
    Ok(GapProfile {
        gaps,
        delta_min,
        h_max,
        tf_estimate,
    })
}

fn sorted_by_energy(words: &[(PureState, f64)]) -> Result<Vec<&(PureState, f64)>> {
    let mut v: Vec<_> = words.iter().collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1));
    for w in v.windows(2) {
        if (w[1].1 - w[0].1).abs() <= DEGENERACY_TOL {
            return Err(Error::EnergyTie(w[0].1, w[1].1));
        }
    }
    for (i, a) in v.iter().enumerate() {
        for b in &v[..i] {
            if a.0.inner(&b.0).norm() > 1e-10 {
                return Err(Error::NotIsometry(a.0.inner(&b.0).norm()));
            }
        }
    }
    Ok(v)
}

/// `V_* = Σ_i |λ_i⟩⟨λ'_i|` pairing the i-th lowest new codeword with the
/// i-th lowest old one.
pub fn energetic_reencode(old: &[(PureState, f64)], new: &[(PureState, f64)]) -> Result<Mat> {
    if old.len() != new.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} old codewords against {} new ones",
            old.len(),
            new.len()
        )));
    }
    let a = sorted_by_energy(old)?;
    let b = sorted_by_energy(new)?;
    let d = a.first().map(|w| w.0.dim()).unwrap_or(0);
    let mut v = Mat::zeros(d, d);
    for (x, y) in a.iter().zip(&b) {
        if x.0.dim() != d || y.0.dim() != d {
            return Err(Error::DimensionMismatch(
                "codewords live in different spaces".into(),
            ));
        }
        v += x.0.amplitudes() * y.0.amplitudes().adjoint();
    }
    Ok(v)
}
