//! JSON documents: circuits, stabilizer codes and measurement patterns.
//! Validation errors name the offending field.

use serde::{Deserialize, Serialize};
use uqcm_core::codes::{PauliString, StabilizerCode};
use uqcm_core::mbqc::{Basis, Correction, Graph, MeasurementPattern, Step};
use uqcm_core::{Circuit, Gate, GateKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocError(pub String);

impl std::fmt::Display for DocError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for DocError {}

fn err<T>(msg: impl Into<String>) -> Result<T, DocError> {
    Err(DocError(msg.into()))
}

pub const CIRCUIT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateEntry {
    pub kind: String,
    pub targets: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDocument {
    pub version: u32,
    pub qubits: usize,
    pub gates: Vec<GateEntry>,
}

impl CircuitDocument {
    pub fn parse(text: &str) -> Result<Self, DocError> {
        serde_json::from_str(text).map_err(|e| DocError(format!("circuit document: {e}")))
    }

    pub fn emit(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn to_circuit(&self) -> Result<Circuit, DocError> {
        if self.version != CIRCUIT_VERSION {
            return err(format!("version: expected {CIRCUIT_VERSION}, found {}", self.version));
        }
        let mut c = Circuit::new(self.qubits);
        for (k, g) in self.gates.iter().enumerate() {
            let kind = match GateKind::from_name(&g.kind) {
                Some(GateKind::Custom(_)) | None => {
                    return err(format!("gates[{k}].kind: unsupported gate {:?}", g.kind))
                }
                Some(kind) => kind,
            };
            let mut targets = Vec::with_capacity(g.targets.len());
            for (j, &t) in g.targets.iter().enumerate() {
                if t < 0 {
                    return err(format!("gates[{k}].targets[{j}]: negative wire {t}"));
                }
                if t as usize >= self.qubits {
                    return err(format!("gates[{k}].targets[{j}]: wire {t} outside {} qubits", self.qubits));
                }
                targets.push(t as usize);
            }
            let gate = Gate::new(kind, targets).map_err(|e| DocError(format!("gates[{k}]: {e}")))?;
            c.push(gate).map_err(|e| DocError(format!("gates[{k}]: {e}")))?;
        }
        Ok(c)
    }

    pub fn from_circuit(c: &Circuit) -> Result<Self, DocError> {
        let gates = c
            .gates()
            .iter()
            .enumerate()
            .map(|(k, g)| match g.kind() {
                GateKind::Custom(_) => err(format!("gates[{k}]: custom gates have no document form")),
                kind => Ok(GateEntry {
                    kind: kind.name().to_string(),
                    targets: g.targets().iter().map(|&t| t as i64).collect(),
                }),
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { version: CIRCUIT_VERSION, qubits: c.wires(), gates })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeDocument {
    pub n: usize,
    pub stabilizers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logical_x: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logical_z: Option<String>,
}

impl CodeDocument {
    pub fn parse(text: &str) -> Result<Self, DocError> {
        serde_json::from_str(text).map_err(|e| DocError(format!("code document: {e}")))
    }

    pub fn to_code(&self) -> Result<StabilizerCode, DocError> {
        let pauli = |field: String, s: &str| -> Result<PauliString, DocError> {
            let p: PauliString = s.parse().map_err(|e| DocError(format!("{field}: {e}")))?;
            if p.len() != self.n {
                return err(format!("{field}: {s:?} has length {}, expected {}", p.len(), self.n));
            }
            Ok(p)
        };
        let gens = self
            .stabilizers
            .iter()
            .enumerate()
            .map(|(k, s)| pauli(format!("stabilizers[{k}]"), s))
            .collect::<Result<Vec<_>, _>>()?;
        let lx = self.logical_x.as_deref().map(|s| pauli("logical_x".into(), s)).transpose()?;
        let lz = self.logical_z.as_deref().map(|s| pauli("logical_z".into(), s)).transpose()?;
        StabilizerCode::new(self.n, gens, lx, lz).map_err(|e| DocError(format!("stabilizers: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepEntry {
    pub site: usize,
    pub plane: String,
    #[serde(default)]
    pub angle: f64,
    /// Sign dependencies.
    #[serde(default)]
    pub deps: Vec<usize>,
    #[serde(default)]
    pub pi_deps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrectionEntry {
    #[serde(default)]
    pub x: Vec<usize>,
    #[serde(default)]
    pub z: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternDocument {
    pub sites: usize,
    /// A path over the sites when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default)]
    pub inputs: Vec<usize>,
    pub steps: Vec<StepEntry>,
    pub outputs: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrections: Option<Vec<CorrectionEntry>>,
}

impl PatternDocument {
    pub fn parse(text: &str) -> Result<Self, DocError> {
        serde_json::from_str(text).map_err(|e| DocError(format!("pattern document: {e}")))
    }

    pub fn to_pattern(&self) -> Result<MeasurementPattern, DocError> {
        let graph = match &self.edges {
            None => Graph::path(self.sites),
            Some(e) => Graph::new(self.sites, e.iter().map(|&[a, b]| (a, b)).collect())
                .map_err(|e| DocError(format!("edges: {e}")))?,
        };
        let steps = self
            .steps
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let basis = match s.plane.as_str() {
                    "XY" => Basis::Xy(s.angle),
                    "Z" => Basis::Z,
                    other => return err(format!("steps[{k}].plane: expected \"XY\" or \"Z\", found {other:?}")),
                };
                Ok(Step { site: s.site, basis, sign_deps: s.deps.clone(), pi_deps: s.pi_deps.clone() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let corrections = match &self.corrections {
            None => vec![Correction::default(); self.outputs.len()],
            Some(cs) => cs.iter().map(|c| Correction { x_deps: c.x.clone(), z_deps: c.z.clone() }).collect(),
        };
        let p = MeasurementPattern {
            graph,
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            steps,
            corrections,
        };
        p.validate().map_err(|e| DocError(format!("steps: {e}")))?;
        Ok(p)
    }
}
