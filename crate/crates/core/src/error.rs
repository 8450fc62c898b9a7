use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("invalid address state: {0}")]
    InvalidAddress(String),
    #[error("invalid classical data: {0}")]
    InvalidData(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown connectivity case {case} for {op}")]
    UnknownConnectivity { op: String, case: String },
    #[error("no reference circuit registered for {0}")]
    MissingReferenceCircuit(String),
    #[error("connectivity violation: CZ on ({0}, {1}) is not an edge of the declared case")]
    ConnectivityViolation(String, String),
    #[error("gate matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("wrong dimension: expected {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },
    #[error("component cap of {cap} exceeded")]
    ComponentCap { cap: usize },
    #[error("qubit cap of {cap} exceeded")]
    QubitCap { cap: usize },
    #[error("operand out of range: qubit {qubit} >= {count}")]
    OperandOutOfRange { qubit: usize, count: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix is singular: {0}")]
    Singular(String),
    #[error("density matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("subset of {got} qubits exceeds limit {limit}")]
    SubsetTooLarge { got: usize, limit: usize },
    #[error("qubit {0} is not in |0>")]
    NotGround(String),
    #[error("all samples rejected by post-selection")]
    AllRejected,
    #[error("target fidelity {target} not bracketed at {layers} layers")]
    NotBracketed { target: f64, layers: usize },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
