//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by codebook construction, simulation, decoding, cost
/// algebra, and the optimizer loop.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported platonic codebook size {p}; supported sizes: 2, 3, 4, 6, 8, 12, 20")]
    UnsupportedPlatonicSize { p: usize },

    #[error("codebook needs at least 2 states, got {p}")]
    CodebookTooSmall { p: usize },

    #[error("Bloch vector must be unit length, got norm {norm}")]
    NonUnitBloch { norm: f64 },

    #[error("Bloch vector must lie in the unit ball, got norm {norm}")]
    BlochOutsideBall { norm: f64 },

    #[error("invalid density matrix: {reason}")]
    InvalidDensity { reason: String },

    #[error("parameter vector has length {got}, circuit expects {expected}")]
    ParameterLength { expected: usize, got: usize },

    #[error("qubit index {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("initial layer has {got} gates, circuit has {expected} qubits")]
    InitialLayerLength { expected: usize, got: usize },

    #[error("shots per axis must be at least 1")]
    NoShots,

    #[error("expected {expected} marginals, got {got}")]
    MarginalCount { expected: usize, got: usize },

    #[error("marginal has {got} entries, codebook has {expected} states")]
    MarginalLength { expected: usize, got: usize },

    #[error("degenerate marginal: {reason}")]
    DegenerateMarginal { reason: String },

    #[error("all codebook fidelities vanish; cannot normalize a marginal")]
    DegenerateFidelities,

    #[error("label {label} out of range for {p} values")]
    LabelOutOfRange { label: usize, p: usize },

    #[error("configuration has {got} labels, cost has {expected} variables")]
    ConfigurationLength { expected: usize, got: usize },

    #[error("value map must be strictly increasing")]
    ValuesNotIncreasing,

    #[error("value map has {got} values, codebook has {expected} states")]
    ValueMapLength { expected: usize, got: usize },

    #[error("variable q{var} out of range for {n_vars} variables")]
    VariableOutOfRange { var: usize, n_vars: usize },

    #[error("value {value} does not fit in {m} bits")]
    ValueOutOfBits { value: u64, m: u32 },

    #[error("resource estimate needs positive inputs and p >= 2")]
    InvalidResourceQuery,

    #[error("polynomial parse error at line {line}: {msg}")]
    PolynomialParse { line: usize, msg: String },

    #[error("codebook JSON is invalid: {reason}")]
    CodebookJson { reason: String },

    #[error("problem is inconsistent: {reason}")]
    ProblemShape { reason: String },

    #[error("optimizer config invalid: {reason}")]
    OptimizerConfig { reason: String },

    #[error("objective became non-finite at epoch {epoch}")]
    NonFiniteObjective { epoch: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
