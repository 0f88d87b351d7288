use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("wire {wire} out of range for a register of {wires}")]
    WireOutOfRange { wire: usize, wires: usize },
    #[error("duplicate target wire {0}")]
    DuplicateTarget(usize),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("Kraus set is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),
    #[error("matrix is not an isometry (deviation {0:.3e})")]
    NotIsometry(f64),
    #[error("register of {qubits} qubits exceeds the desk cap of {cap}")]
    CapExceeded { qubits: usize, cap: usize },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("no gate sequence within depth {max_depth} reaches distance {eps}")]
    NotFound { max_depth: usize, eps: f64 },
    #[error("truncation exceeds tolerance (achieved fidelity {fidelity})")]
    Truncation { fidelity: f64 },
    #[error("invalid bond cut {cut} for {sites} sites")]
    InvalidCut { cut: usize, sites: usize },
    #[error("bond dimension {chi} is not a power of {base}")]
    NotAPower { chi: usize, base: usize },
    #[error("term support is not one-dimensional nearest neighbour: {0:?}")]
    NotNearestNeighbour(Vec<usize>),
    #[error("adjacency matrix is not symmetric")]
    AsymmetricAdjacency,
    #[error("schedule is not monotone or leaves [0, 1]: {0}")]
    BadSchedule(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("invalid Pauli string {0:?}")]
    InvalidPauli(String),
    #[error("generators {0} and {1} anticommute")]
    Anticommuting(usize, usize),
    #[error("generator {0} is dependent on the others")]
    DependentGenerator(usize),
    #[error("stabilizer group contains -I")]
    MinusIdentity,
    #[error("Knill-Laflamme condition fails at error pair ({0}, {1})")]
    KlViolation(usize, usize),
    #[error("code has no logical operators to fix an encoding basis")]
    MissingLogicals,
    #[error("matrix norm {0} exceeds 1; rescale before block encoding")]
    NormTooLarge(f64),
    #[error("unsupported gate {0}")]
    UnsupportedGate(String),
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("too many programs: {0} (at most 16)")]
    TooManyPrograms(usize),
    #[error("forced outcome at step {step} has zero probability")]
    ImpossibleBranch { step: usize },
    #[error("invalid measurement pattern: {0}")]
    InvalidPattern(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("energies {0} and {1} are tied; ordering is undefined")]
    EnergyTie(f64, f64),
    #[error("invalid comb: {0}")]
    InvalidComb(String),
}
