//! Output state of a circuit computed in several models, compared pairwise.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use uqcm_core::aqc::{clock_slice, history_state};
use uqcm_core::circuit::simulate;
use uqcm_core::mbqc::{apply_pattern_on_wire, compile_1q_gate, Branch};
use uqcm_core::tensor::{apply_mpu, mps_contract, Mps, Mpu};
use uqcm_core::{Circuit, PureState, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Circuit,
    Mps,
    Mbqc,
    Fkch,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Circuit => "circuit",
            Model::Mps => "mps",
            Model::Mbqc => "mbqc",
            Model::Fkch => "fkch",
        }
    }

    pub const ALL: [Model; 4] = [Model::Circuit, Model::Mps, Model::Mbqc, Model::Fkch];
}

/// Output of `c` on `|0…0⟩` computed in `model`. `seed` drives the MBQC
/// measurement branches.
pub fn model_state(c: &Circuit, model: Model, seed: u64) -> Result<PureState> {
    let n = c.wires();
    let zero = PureState::zero_qubits(n);
    match model {
        Model::Circuit => simulate(c, &zero),
        Model::Mps => {
            let dims = vec![2; n];
            let mut m = Mps::basis(&dims, &vec![0; n])?;
            for g in c.gates() {
                let op = Mpu::from_gate(&g.matrix(), g.targets(), &dims)?;
                m = apply_mpu(&m, &op)?.compress(usize::MAX)?.0;
            }
            mps_contract(&m)
        }
        Model::Mbqc => {
            let mut s = zero;
            for (k, g) in c.gates().iter().enumerate() {
                if g.targets().len() == 1 {
                    let p = compile_1q_gate(&g.matrix())?;
                    let branch = Branch::Seeded(seed.wrapping_add(k as u64));
                    s = apply_pattern_on_wire(&s, g.targets()[0], &p, &branch)?.0;
                } else {
                    s = s.apply_matrix(&g.matrix(), g.targets())?;
                }
            }
            Ok(s)
        }
        Model::Fkch => {
            let h = history_state(c, &zero)?;
            clock_slice(&h, n, c.len())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairFidelity {
    pub a: Model,
    pub b: Model,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivReport {
    pub models: Vec<Model>,
    pub fidelities: Vec<PairFidelity>,
    pub min_fidelity: Option<f64>,
    /// Models that could not run, with the reason.
    pub errors: BTreeMap<&'static str, String>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtimes_ms: Option<BTreeMap<&'static str, f64>>,
}

/// Runs the requested models concurrently. Passes when every model ran and
/// every pairwise fidelity is at least `1 − tol`.
pub fn cross_model_equivalence(c: &Circuit, models: &[Model], tol: f64, seed: u64, timings: bool) -> EquivReport {
    let mut models = models.to_vec();
    models.sort();
    models.dedup();
    let outcomes: Vec<(Model, Result<PureState>, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = models
            .iter()
            .map(|&m| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let r = model_state(c, m, seed);
                    (m, r, start.elapsed().as_secs_f64() * 1e3)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("model thread panicked")).collect()
    });
    let mut errors = BTreeMap::new();
    let mut states = Vec::new();
    let mut runtimes = BTreeMap::new();
    for (m, r, ms) in outcomes {
        runtimes.insert(m.name(), ms);
        match r {
            Ok(s) => states.push((m, s)),
            Err(e) => {
                errors.insert(m.name(), e.to_string());
            }
        }
    }
    let mut fidelities = Vec::new();
    for (i, (a, sa)) in states.iter().enumerate() {
        for (b, sb) in &states[i + 1..] {
            fidelities.push(PairFidelity { a: *a, b: *b, fidelity: sa.fidelity(sb) });
        }
    }
    let min_fidelity = fidelities.iter().map(|p| p.fidelity).reduce(f64::min);
    let pass = errors.is_empty() && fidelities.iter().all(|p| p.fidelity >= 1.0 - tol);
    EquivReport {
        models,
        fidelities,
        min_fidelity,
        errors,
        tolerance: tol,
        pass,
        runtimes_ms: timings.then_some(runtimes),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use uqcm_core::Gate;

    #[test]
    fn empty_circuit_is_trivially_equivalent() {
        let r = cross_model_equivalence(&Circuit::new(2), &Model::ALL, 1e-9, 0, false);
        assert!(r.pass);
        assert!(r.fidelities.iter().all(|p| (p.fidelity - 1.0).abs() < 1e-12));
        assert_eq!(r.fidelities.len(), 6);
    }

    #[test]
    fn h_then_t() {
        let c = Circuit::from_gates(1, vec![Gate::h(0), Gate::t(0)]).unwrap();
        let r = cross_model_equivalence(&c, &[Model::Circuit, Model::Mps, Model::Mbqc], 1e-9, 3, false);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn cap_errors_are_per_model() {
        // 6 wires + 7 clock qubits exceed the default cap of 12 for fkch only.
        let mut c = Circuit::new(6);
        for k in 0..7 {
            c.push(Gate::h(k % 6)).unwrap();
        }
        let r = cross_model_equivalence(&c, &[Model::Circuit, Model::Fkch, Model::Mps], 1e-9, 0, false);
        assert!(!r.pass);
        assert!(r.errors.contains_key("fkch"));
        assert_eq!(r.fidelities.len(), 1);
        assert!(r.fidelities[0].fidelity > 1.0 - 1e-9);
    }
}
