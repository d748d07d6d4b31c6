//! Variational optimization of discrete problems with non-orthogonal
//! single-qubit encodings.
//!
//! Each classical variable with p possible values is carried by one qubit:
//! the p values map to p well-spread pure states on the Bloch sphere (a
//! codebook). A layered variational circuit prepares an entangled state; each
//! qubit's reduced density matrix is read out into a probability distribution
//! over its p labels by fidelity against the codebook states; the expectation
//! of a polynomial cost under the product of these marginals is minimized
//! with Adam. Decoding the per-qubit argmax label yields a candidate
//! solution, whose exact cost is tracked alongside the smooth objective.
//!
//! Modules:
//! - [`codebook`]: Bloch-sphere codebooks (Platonic solids and Riesz-energy
//!   optimized sets), label-to-value maps, state/fidelity conversions.
//! - [`simulator`]: dense statevector simulation of the circuit family,
//!   reduced density matrices, and shot-based Bloch estimation.
//! - [`decoder`]: fidelity-weighted marginals and argmax decoding.
//! - [`cost`]: polynomial costs, exact expectations under product marginals,
//!   encoding-size arithmetic, and the bundled degree-8 benchmark.
//! - [`optimizer`]: the Adam loop with finite-difference, parameter-shift,
//!   and adjoint gradients, emitting per-epoch trace records.
//!
//! All numerics are generic over the scalar type via [`real::Real`]
//! (implemented for `f32` and `f64`); the type aliases at the crate root fix
//! the default double-precision instantiation.

pub mod codebook;
pub mod cost;
pub mod decoder;
pub mod error;
pub mod optimizer;
pub mod real;
pub mod simulator;

pub use error::{Error, Result};
pub use real::Real;

/// Double-precision Bloch vector.
pub type BlochVector = codebook::BlochVector<f64>;
/// Double-precision codebook.
pub type Codebook = codebook::Codebook<f64>;
/// Double-precision value map.
pub type ValueMap = codebook::ValueMap<f64>;
/// Double-precision statevector.
pub type Statevector = simulator::Statevector<f64>;
/// Double-precision circuit description.
pub type CircuitSpec = simulator::CircuitSpec<f64>;
/// Double-precision reduced density matrix.
pub type ReducedDensityMatrix = simulator::ReducedDensityMatrix<f64>;
/// Double-precision marginal distribution.
pub type MarginalDistribution = decoder::MarginalDistribution<f64>;
/// Double-precision configuration.
pub type Configuration = decoder::Configuration<f64>;
/// Double-precision monomial.
pub type Monomial = cost::Monomial<f64>;
/// Double-precision polynomial cost.
pub type PolynomialCost = cost::PolynomialCost<f64>;
/// Double-precision problem bundle.
pub type Problem = optimizer::Problem<f64>;
/// Double-precision optimizer configuration.
pub type OptimizerConfig = optimizer::OptimizerConfig<f64>;
/// Double-precision trace record.
pub type TraceRecord = optimizer::TraceRecord<f64>;
/// Double-precision run outcome.
pub type OptimizeResult = optimizer::OptimizeResult<f64>;
