//! `uqcm` command line: argument parsing, subcommands and report rendering.
//!
//! Exit codes: 0 on success, 1 when a check or equivalence fails, 2 on
//! usage errors and malformed input.

pub mod docs;
pub mod equiv;
mod pretty;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use uqcm_core::algorithms::{block_encode, program_encode, qsvt_apply, qsvt_oracle, PhaseSequence, SvDecomposition};
use uqcm_core::aqc::{adiabatic_evolve, fkch_hamiltonian, gap_profile, AdiabaticPath, PenaltyWeights};
use uqcm_core::circuit::{circuit_unitary, simulate};
use uqcm_core::codes::{
    effective_logical_channel, iid_bit_flip, kl_check, pauli_errors, projector_from_stabilizers, recovery_from_errors,
    repetition_code, PauliString,
};
use uqcm_core::linalg::{self, Mat, Vector, C64};
use uqcm_core::mbqc::{compile_1q_gate, prepare_resource, run_pattern, Branch};
use uqcm_core::qca::{LocalHamiltonian, Term};
use uqcm_core::tensor::{apply_mpu, Mps, Mpu};
use uqcm_core::{Gate, PureState};

use docs::{CircuitDocument, CodeDocument, DocError, PatternDocument};
use equiv::{cross_model_equivalence, Model};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "uqcm", version, about = "Quantum computing model conversions and checks")]
pub struct Cli {
    /// Human-readable table instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,
    /// Seed for every stochastic path.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Include wall-clock runtimes (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timings: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConvertTarget {
    Mps,
    Program,
    Fkch,
    Unitary,
    Circuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    All,
    Mbqc,
    RepCode,
    Adiabatic,
    Qsvt,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Output state of a circuit on |0…0⟩, or of a measurement pattern.
    Simulate {
        #[arg(long, conflicts_with = "pattern", required_unless_present = "pattern")]
        circuit: Option<PathBuf>,
        #[arg(long)]
        pattern: Option<PathBuf>,
    },
    /// Re-express a circuit in another representation.
    Convert {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, value_enum)]
        to: ConvertTarget,
    },
    /// Knill-Laflamme check of a stabilizer code against an error set.
    CheckCode {
        #[arg(long)]
        code: PathBuf,
        /// single-x | single-y | single-z | single-pauli | comma-separated Pauli strings
        #[arg(long, default_value = "single-x")]
        errors: String,
    },
    /// Singular-value transform of a block-encoded matrix against the 2x2 oracle.
    Qsvt {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        phases: Vec<f64>,
        /// Diagonal test matrix.
        #[arg(long, value_delimiter = ',', conflicts_with = "matrix", required_unless_present = "matrix")]
        singular_values: Vec<f64>,
        /// JSON rows of [re, im] entries.
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Cross-model equivalence of a circuit.
    Equiv {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "circuit,mps,mbqc,fkch")]
        models: Vec<Model>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Small canned runs.
    Demo {
        #[arg(value_enum, default_value = "all")]
        name: DemoName,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Usage(String),
}

impl From<DocError> for Failure {
    fn from(e: DocError) -> Self {
        Failure::Usage(e.0)
    }
}

impl From<uqcm_core::Error> for Failure {
    fn from(e: uqcm_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Step = Result<(Value, bool), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn cplx(z: C64) -> Value {
    json!([z.re, z.im])
}

fn vector_json(v: &Vector) -> Value {
    Value::Array(v.iter().map(|&z| cplx(z)).collect())
}

fn matrix_json(m: &Mat) -> Value {
    Value::Array((0..m.nrows()).map(|r| Value::Array((0..m.ncols()).map(|c| cplx(m[(r, c)])).collect())).collect())
}

fn state_json(s: &PureState) -> Value {
    let a = s.amplitudes();
    json!({
        "qubits": s.wires(),
        "amplitudes": vector_json(a),
        "probabilities": a.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>(),
    })
}

fn parse_matrix(text: &str) -> Result<Mat, Failure> {
    let rows: Vec<Vec<[f64; 2]>> =
        serde_json::from_str(text).map_err(|e| Failure::Usage(format!("matrix document: {e}")))?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Failure::Usage("matrix: expected a non-empty square array of [re, im] entries".into()));
    }
    Ok(Mat::from_fn(n, n, |r, c| linalg::c(rows[r][c][0], rows[r][c][1])))
}

fn cmd_simulate(circuit: Option<PathBuf>, pattern: Option<PathBuf>, seed: u64) -> Step {
    if let Some(path) = circuit {
        let c = CircuitDocument::parse(&read(&path)?)?.to_circuit()?;
        let out = simulate(&c, &PureState::zero_qubits(c.wires()))?;
        return Ok((state_json(&out), true));
    }
    let path = pattern.expect("clap requires one of the inputs");
    let p = PatternDocument::parse(&read(&path)?)?.to_pattern()?;
    let input = PureState::plus_qubits(p.inputs.len());
    let resource = prepare_resource(&p.graph, &p.inputs, &input)?;
    let run = run_pattern(&resource, &p, &Branch::Seeded(seed))?;
    let mut out = state_json(&run.corrected()?);
    out["outcomes"] = json!(run.outcomes);
    out["byproduct"] = json!(run.byproduct.to_string());
    Ok((out, true))
}

fn cmd_convert(path: &Path, to: ConvertTarget) -> Step {
    let doc = CircuitDocument::parse(&read(path)?)?;
    let c = doc.to_circuit()?;
    let n = c.wires();
    let v = match to {
        ConvertTarget::Circuit => serde_json::to_value(&doc).expect("plain data"),
        ConvertTarget::Unitary => json!({ "qubits": n, "matrix": matrix_json(circuit_unitary(&c)?.matrix()) }),
        ConvertTarget::Program => {
            let p = program_encode(&c)?;
            let hex: String = p.bytes.iter().map(|b| format!("{b:02x}")).collect();
            json!({ "qubits": p.qubits, "records": p.records, "bytes": hex })
        }
        ConvertTarget::Mps => {
            let dims = vec![2; n];
            let mut m = Mps::basis(&dims, &vec![0; n])?;
            let mut discarded = 0.0;
            for g in c.gates() {
                let (next, d) = apply_mpu(&m, &Mpu::from_gate(&g.matrix(), g.targets(), &dims)?)?.compress(usize::MAX)?;
                m = next;
                discarded += d;
            }
            json!({ "sites": m.len(), "bond_dims": m.bond_dims(), "max_bond": m.max_bond(), "discarded_weight": discarded })
        }
        ConvertTarget::Fkch => {
            let h = fkch_hamiltonian(&c, &PureState::zero_qubits(n), PenaltyWeights::default())?;
            let supports: Vec<_> = h.terms().terms().iter().map(|t| t.support.clone()).collect();
            json!({
                "data_qubits": n,
                "clock_qubits": h.clock_qubits(),
                "terms": supports.len(),
                "supports": supports,
            })
        }
    };
    Ok((v, true))
}

fn error_set(spec: &str, n: usize) -> Result<Vec<PauliString>, Failure> {
    let letters = match spec {
        "single-x" => Some("X"),
        "single-y" => Some("Y"),
        "single-z" => Some("Z"),
        "single-pauli" => Some("XYZ"),
        _ => None,
    };
    if let Some(l) = letters {
        return Ok(pauli_errors(n, 1, l));
    }
    spec.split(',')
        .enumerate()
        .map(|(k, s)| {
            let p: PauliString = s.parse().map_err(|e| Failure::Usage(format!("errors[{k}]: {e}")))?;
            if p.len() != n {
                return Err(Failure::Usage(format!("errors[{k}]: {s:?} has length {}, code has {n} qubits", p.len())));
            }
            Ok(p)
        })
        .collect()
}

fn cmd_check_code(path: &Path, errors: &str) -> Step {
    let code = CodeDocument::parse(&read(path)?)?.to_code()?;
    let errs = error_set(errors, code.n())?;
    let p = projector_from_stabilizers(&code)?;
    let mats: Vec<Mat> = errs.iter().map(|e| e.to_matrix()).collect();
    let r = kl_check(&p, &mats)?;
    let v = json!({
        "n": code.n(),
        "k": code.k(),
        "errors": errs.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        "correctable": r.correctable,
        "witness": r.witness.map(|(i, j)| json!([i, j])),
        "a": r.a.as_ref().map(matrix_json),
    });
    Ok((v, r.correctable))
}

fn cmd_qsvt(phases: Vec<f64>, singular_values: Vec<f64>, matrix: Option<PathBuf>, tol: f64) -> Step {
    let phases = PhaseSequence::new(phases)?;
    let a = match matrix {
        Some(path) => parse_matrix(&read(&path)?)?,
        None => Mat::from_diagonal(&Vector::from_iterator(
            singular_values.len(),
            singular_values.iter().map(|&s| linalg::c(s, 0.0)),
        )),
    };
    let be = block_encode(&a)?;
    let b = qsvt_apply(&be, &phases);
    let sv = SvDecomposition::new(&a);
    let oracle = |s: f64| qsvt_oracle(s, &phases);
    let expected = if phases.parity() == 1 { sv.map(oracle) } else { sv.map_right(oracle) };
    let dev = linalg::max_abs(&(&b - expected));
    let pass = dev <= tol;
    let v = json!({
        "phases": phases.phases,
        "parity": phases.parity(),
        "singular_values": sv.sigma,
        "oracle": sv.sigma.iter().map(|&s| cplx(oracle(s))).collect::<Vec<_>>(),
        "block": matrix_json(&b),
        "max_deviation": dev,
        "tolerance": tol,
        "pass": pass,
    });
    Ok((v, pass))
}

fn cmd_equiv(path: &Path, models: &[Model], tol: f64, seed: u64, timings: bool) -> Step {
    let c = CircuitDocument::parse(&read(path)?)?.to_circuit()?;
    let r = cross_model_equivalence(&c, models, tol, seed, timings);
    Ok((serde_json::to_value(&r).expect("report serializes"), r.pass))
}

fn demo_mbqc(seed: u64) -> Result<(Value, bool), Failure> {
    let t = Gate::t(0).matrix();
    let p = compile_1q_gate(&t)?;
    let psi = PureState::plus_qubits(1);
    let expected = psi.apply_matrix(&t, &[0])?;
    let resource = prepare_resource(&p.graph, &p.inputs, &psi)?;
    let mut worst: f64 = 1.0;
    for b in 0..16u8 {
        let outcomes: Vec<u8> = (0..4).map(|k| (b >> k) & 1).collect();
        let run = run_pattern(&resource, &p, &Branch::Fixed(outcomes))?;
        worst = worst.min(run.corrected()?.fidelity(&expected));
    }
    let sampled = run_pattern(&resource, &p, &Branch::Seeded(seed))?;
    let ok = worst >= 1.0 - 1e-9;
    Ok((json!({ "gate": "T", "branches": 16, "min_fidelity": worst, "sampled_outcomes": sampled.outcomes, "pass": ok }), ok))
}

fn demo_rep_code() -> Result<(Value, bool), Failure> {
    let code = repetition_code(3);
    let p = projector_from_stabilizers(&code)?;
    let errs: Vec<Mat> = pauli_errors(3, 1, "X").iter().map(|e| e.to_matrix()).collect();
    let r = recovery_from_errors(&p, &errs)?;
    let noise = iid_bit_flip(3, 0.1)?;
    let eff = effective_logical_channel(&r, &noise, &p)?;
    let flip = eff.apply(&PureState::zero_qubits(1).density())?[(1, 1)].re;
    let ok = (flip - 0.028).abs() <= 1e-6;
    Ok((json!({ "code": "repetition-3", "p": 0.1, "logical_flip_rate": flip, "expected": 0.028, "pass": ok }), ok))
}

fn single(m: Mat) -> Result<LocalHamiltonian, Failure> {
    Ok(LocalHamiltonian::qubits(1, vec![Term { matrix: m, support: vec![0] }])?)
}

fn demo_adiabatic() -> Result<(Value, bool), Failure> {
    let path = AdiabaticPath::linear(single(-linalg::pauli_x())?, single(-linalg::pauli_z())?)?;
    let gaps = gap_profile(&path, 1025)?;
    let plus = PureState::plus_qubits(1);
    let slow = adiabatic_evolve(&path, 50.0, 500, &plus)?.ground_overlap;
    let sudden = adiabatic_evolve(&path, 0.0, 500, &plus)?.ground_overlap;
    let ok = (gaps.delta_min - 2f64.sqrt()).abs() <= 1e-6 && slow >= 0.99 && (sudden - 0.5).abs() <= 1e-3;
    Ok((
        json!({
            "delta_min": gaps.delta_min,
            "h_max": gaps.h_max,
            "tf_estimate": gaps.tf_estimate,
            "overlap_t50": slow,
            "overlap_t0": sudden,
            "pass": ok,
        }),
        ok,
    ))
}

fn demo_qsvt() -> Result<(Value, bool), Failure> {
    // Phases π give Chebyshev polynomials up to sign.
    let phases = PhaseSequence::new(vec![std::f64::consts::PI; 3])?;
    let sigmas = [0.2, 0.5, 0.9];
    let vals: Vec<f64> = sigmas.iter().map(|&s| -qsvt_oracle(s, &phases).re).collect();
    let cheb: Vec<f64> = sigmas.iter().map(|&s| 4.0 * s * s * s - 3.0 * s).collect();
    let ok = vals.iter().zip(&cheb).all(|(a, b)| (a - b).abs() < 1e-12);
    Ok((json!({ "degree": 3, "sigma": sigmas, "t3": vals, "expected": cheb, "pass": ok }), ok))
}

fn cmd_demo(name: DemoName, seed: u64) -> Step {
    let mut out = serde_json::Map::new();
    let mut pass = true;
    let mut add = |key: &str, r: Result<(Value, bool), Failure>| -> Result<(), Failure> {
        let (v, ok) = r?;
        pass &= ok;
        out.insert(key.to_string(), v);
        Ok(())
    };
    let all = name == DemoName::All;
    if all || name == DemoName::Mbqc {
        add("mbqc", demo_mbqc(seed))?;
    }
    if all || name == DemoName::RepCode {
        add("rep_code", demo_rep_code())?;
    }
    if all || name == DemoName::Adiabatic {
        add("adiabatic", demo_adiabatic())?;
    }
    if all || name == DemoName::Qsvt {
        add("qsvt", demo_qsvt())?;
    }
    Ok((Value::Object(out), pass))
}

/// Parses `args` (including the program name) and runs one invocation.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let seed = cli.seed;
    let result = match cli.command {
        Command::Simulate { circuit, pattern } => cmd_simulate(circuit, pattern, seed),
        Command::Convert { circuit, to } => cmd_convert(&circuit, to),
        Command::CheckCode { code, errors } => cmd_check_code(&code, &errors),
        Command::Qsvt { phases, singular_values, matrix, tol } => cmd_qsvt(phases, singular_values, matrix, tol),
        Command::Equiv { circuit, models, tol } => cmd_equiv(&circuit, &models, tol, seed, cli.timings),
        Command::Demo { name } => cmd_demo(name, seed),
    };
    match result {
        Ok((v, pass)) => {
            let mut stdout = if cli.pretty {
                pretty::render(&v)
            } else {
                serde_json::to_string(&v).expect("report serializes")
            };
            stdout.push('\n');
            Outcome { code: if pass { EXIT_OK } else { EXIT_FAIL }, stdout, stderr: String::new() }
        }
        Err(Failure::Usage(msg)) => Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {msg}\n") },
    }
}
