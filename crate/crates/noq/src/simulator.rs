//! Dense statevector simulation of the layered variational circuit, plus
//! single-qubit reduced density matrices and shot-based Bloch estimation.
//!
//! Basis indexing is little-endian: qubit k is bit k of the basis index, so
//! amplitude `amps[i]` belongs to |q_{n-1} ... q_1 q_0> with q_k = (i >> k) & 1.
//!
//! The circuit family is fixed: an initial layer of per-qubit gates (identity
//! or a fixed Ry), then `n_layers` repetitions of a per-qubit rotation block
//! Rz(alpha) Ry(beta) Rz(gamma) followed by a CNOT chain with control i and
//! target i+1 for i ascending. Rotation angles live in a flat parameter
//! vector of length `n_layers * n_qubits * 3`, ordered layer-major, then
//! qubit, then (alpha, beta, gamma).

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::codebook::BlochVector;
use crate::error::{Error, Result};
use crate::real::Real;

/// Flat vector of rotation angles for a [`CircuitSpec`]; its length must be
/// `n_layers * n_qubits * 3` (see [`CircuitSpec::param_count`]).
pub type ParameterVector<T> = Vec<T>;

/// Dense complex amplitude vector for an n-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector<T> {
    n_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> Statevector<T> {
    /// |0...0> on n qubits.
    pub fn zero_state(n_qubits: usize) -> Self {
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n_qubits];
        amps[0] = Complex::new(T::one(), T::zero());
        Self { n_qubits, amps }
    }

    /// All-zero amplitude workspace (not a physical state); used internally
    /// for accumulating operator applications.
    pub(crate) fn zeros(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            amps: vec![Complex::new(T::zero(), T::zero()); 1 << n_qubits],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amps
    }

    pub fn norm(&self) -> T {
        self.amps
            .iter()
            .map(|a| a.norm_sqr())
            .fold(T::zero(), |acc, x| acc + x)
            .sqrt()
    }

    /// Applies a 2x2 matrix to one qubit.
    pub fn apply_single(&mut self, m: &[[Complex<T>; 2]; 2], qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let lo = 1 << qubit;
        for chunk in self.amps.chunks_exact_mut(lo << 1) {
            let (zeros, ones) = chunk.split_at_mut(lo);
            for (a, b) in zeros.iter_mut().zip(ones.iter_mut()) {
                let u = *a;
                let v = *b;
                *a = m[0][0] * u + m[0][1] * v;
                *b = m[1][0] * u + m[1][1] * v;
            }
        }
        Ok(())
    }

    /// CNOT with the given control and target qubits.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::QubitOutOfRange {
                qubit: target,
                n_qubits: self.n_qubits,
            });
        }
        let cm = 1usize << control;
        let tm = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amps.swap(i, i | tm);
            }
        }
        Ok(())
    }

    /// <self|other>.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x)
    }

    /// Amplitudes as [re, im] pairs for debug dumps.
    pub fn to_debug_json(&self) -> String {
        let pairs: Vec<[f64; 2]> = self
            .amps
            .iter()
            .map(|a| [a.re.as_f64(), a.im.as_f64()])
            .collect();
        serde_json::to_string(&pairs).expect("amplitudes serialize")
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }
}

/// Fixed single-qubit gate applied before the parameterized layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialGate<T> {
    Identity,
    Ry(T),
}

/// Shape of the variational circuit. The entangler is always the chain
/// (0,1), (1,2), ..., (n-2, n-1); see [`CircuitSpec::entangler_pairs`].
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSpec<T> {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub initial_layer: Vec<InitialGate<T>>,
}

impl<T: Real> CircuitSpec<T> {
    /// The standard ansatz: Ry(pi/2) on every qubit, then the given number of
    /// rotation-plus-CNOT layers.
    pub fn standard(n_qubits: usize, n_layers: usize) -> Self {
        Self {
            n_qubits,
            n_layers,
            initial_layer: vec![InitialGate::Ry(T::FRAC_PI_2()); n_qubits],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_layers < 1 {
            return Err(Error::OptimizerConfig {
                reason: "circuit needs at least one layer".into(),
            });
        }
        if self.initial_layer.len() != self.n_qubits {
            return Err(Error::InitialLayerLength {
                expected: self.n_qubits,
                got: self.initial_layer.len(),
            });
        }
        Ok(())
    }

    /// Length of the flat parameter vector.
    pub fn param_count(&self) -> usize {
        self.n_layers * self.n_qubits * 3
    }

    /// Index of angle j (0 = alpha, 1 = beta, 2 = gamma) of the block acting
    /// on `qubit` in `layer`.
    pub fn param_index(&self, layer: usize, qubit: usize, j: usize) -> usize {
        (layer * self.n_qubits + qubit) * 3 + j
    }

    /// Entangler chain: control i, target i+1, i ascending.
    pub fn entangler_pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        (0..self.n_qubits.saturating_sub(1)).map(|i| (i, i + 1))
    }
}

/// Rz(t) = diag(e^{-it/2}, e^{it/2}).
pub fn rz_matrix<T: Real>(t: T) -> [[Complex<T>; 2]; 2] {
    let half = t / (T::one() + T::one());
    let zero = Complex::new(T::zero(), T::zero());
    [
        [Complex::from_polar(T::one(), -half), zero],
        [zero, Complex::from_polar(T::one(), half)],
    ]
}

/// Ry(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]].
pub fn ry_matrix<T: Real>(t: T) -> [[Complex<T>; 2]; 2] {
    let half = t / (T::one() + T::one());
    let (s, c) = (half.sin(), half.cos());
    let re = |v: T| Complex::new(v, T::zero());
    [[re(c), re(-s)], [re(s), re(c)]]
}

/// Fused rotation block Rz(alpha) Ry(beta) Rz(gamma) as one matrix.
pub fn rotation_block<T: Real>(alpha: T, beta: T, gamma: T) -> [[Complex<T>; 2]; 2] {
    let two = T::one() + T::one();
    let (s, c) = ((beta / two).sin(), (beta / two).cos());
    let plus = Complex::from_polar(T::one(), -(alpha + gamma) / two);
    let minus = Complex::from_polar(T::one(), -(alpha - gamma) / two);
    [
        [plus * c, minus * -s],
        [minus.conj() * s, plus.conj() * c],
    ]
}

/// One gate of the circuit in application order, with rotation gates tagged
/// by their index into the flat parameter vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate<T> {
    InitRy { qubit: usize, angle: T },
    Rz { qubit: usize, param: usize },
    Ry { qubit: usize, param: usize },
    Cnot { control: usize, target: usize },
}

/// The circuit as elementary gates in application order. Within a rotation
/// block the gamma Rz is applied first, then the beta Ry, then the alpha Rz,
/// matching the matrix product Rz(alpha) Ry(beta) Rz(gamma).
pub fn gate_sequence<T: Real>(spec: &CircuitSpec<T>) -> Vec<Gate<T>> {
    let mut gates = Vec::new();
    for (qubit, g) in spec.initial_layer.iter().enumerate() {
        if let InitialGate::Ry(angle) = *g {
            gates.push(Gate::InitRy { qubit, angle });
        }
    }
    for layer in 0..spec.n_layers {
        for qubit in 0..spec.n_qubits {
            gates.push(Gate::Rz {
                qubit,
                param: spec.param_index(layer, qubit, 2),
            });
            gates.push(Gate::Ry {
                qubit,
                param: spec.param_index(layer, qubit, 1),
            });
            gates.push(Gate::Rz {
                qubit,
                param: spec.param_index(layer, qubit, 0),
            });
        }
        for (c, t) in spec.entangler_pairs() {
            gates.push(Gate::Cnot { control: c, target: t });
        }
    }
    gates
}

pub(crate) fn apply_gate<T: Real>(
    state: &mut Statevector<T>,
    gate: &Gate<T>,
    params: &[T],
    inverse: bool,
) -> Result<()> {
    let flip = if inverse { -T::one() } else { T::one() };
    match *gate {
        Gate::InitRy { qubit, angle } => state.apply_single(&ry_matrix(angle * flip), qubit),
        Gate::Rz { qubit, param } => state.apply_single(&rz_matrix(params[param] * flip), qubit),
        Gate::Ry { qubit, param } => state.apply_single(&ry_matrix(params[param] * flip), qubit),
        Gate::Cnot { control, target } => state.apply_cnot(control, target),
    }
}

/// Runs the circuit on |0...0>.
pub fn apply_circuit<T: Real>(spec: &CircuitSpec<T>, params: &[T]) -> Result<Statevector<T>> {
    spec.validate()?;
    if params.len() != spec.param_count() {
        return Err(Error::ParameterLength {
            expected: spec.param_count(),
            got: params.len(),
        });
    }
    let mut state = Statevector::zero_state(spec.n_qubits);
    for (qubit, g) in spec.initial_layer.iter().enumerate() {
        if let InitialGate::Ry(angle) = *g {
            state.apply_single(&ry_matrix(angle), qubit)?;
        }
    }
    for layer in 0..spec.n_layers {
        for qubit in 0..spec.n_qubits {
            let a = params[spec.param_index(layer, qubit, 0)];
            let b = params[spec.param_index(layer, qubit, 1)];
            let g = params[spec.param_index(layer, qubit, 2)];
            state.apply_single(&rotation_block(a, b, g), qubit)?;
        }
        for (c, t) in spec.entangler_pairs() {
            state.apply_cnot(c, t)?;
        }
    }
    Ok(state)
}

/// 2x2 single-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDensityMatrix<T> {
    m: [[Complex<T>; 2]; 2],
}

impl<T: Real> ReducedDensityMatrix<T> {
    /// Wraps and validates a matrix: Hermitian, unit trace, and nonnegative
    /// eigenvalues, all within the medium tolerance tier.
    pub fn new(m: [[Complex<T>; 2]; 2]) -> Result<Self> {
        let rho = Self { m };
        rho.validate()?;
        Ok(rho)
    }

    pub fn matrix(&self) -> &[[Complex<T>; 2]; 2] {
        &self.m
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::TOL_MEDIUM;
        let herm = (self.m[0][1] - self.m[1][0].conj()).norm()
            .max(self.m[0][0].im.abs())
            .max(self.m[1][1].im.abs());
        if herm > tol {
            return Err(Error::InvalidDensity {
                reason: format!("not Hermitian (defect {})", herm.as_f64()),
            });
        }
        let trace = self.m[0][0].re + self.m[1][1].re;
        if (trace - T::one()).abs() > tol {
            return Err(Error::InvalidDensity {
                reason: format!("trace {} is not 1", trace.as_f64()),
            });
        }
        if self.min_eigenvalue() < -tol {
            return Err(Error::InvalidDensity {
                reason: format!("negative eigenvalue {}", self.min_eigenvalue().as_f64()),
            });
        }
        Ok(())
    }

    fn min_eigenvalue(&self) -> T {
        let two = T::one() + T::one();
        let four = two + two;
        let tr = self.m[0][0].re + self.m[1][1].re;
        let det = self.m[0][0].re * self.m[1][1].re - self.m[0][1].norm_sqr();
        let disc = (tr * tr - four * det).max(T::zero()).sqrt();
        (tr - disc) / two
    }

    /// tr(rho^2); 1 for pure states, 1/2 for the maximally mixed state.
    pub fn purity(&self) -> T {
        let two = T::one() + T::one();
        self.m[0][0].re * self.m[0][0].re
            + self.m[1][1].re * self.m[1][1].re
            + two * self.m[0][1].norm_sqr()
    }

    /// (tr(rho X), tr(rho Y), tr(rho Z)).
    pub fn bloch(&self) -> BlochVector<T> {
        let two = T::one() + T::one();
        BlochVector::new(
            two * self.m[0][1].re,
            -(two * self.m[0][1].im),
            self.m[0][0].re - self.m[1][1].re,
        )
    }
}

/// Partial trace of a pure state over all qubits except `qubit`.
pub fn reduced_density<T: Real>(state: &Statevector<T>, qubit: usize) -> Result<ReducedDensityMatrix<T>> {
    if qubit >= state.n_qubits() {
        return Err(Error::QubitOutOfRange {
            qubit,
            n_qubits: state.n_qubits(),
        });
    }
    let lo = 1 << qubit;
    let zero = T::zero();
    let mut r00 = zero;
    let mut r11 = zero;
    let mut r01 = Complex::new(zero, zero);
    for chunk in state.amplitudes().chunks_exact(lo << 1) {
        let (zeros, ones) = chunk.split_at(lo);
        for (a, b) in zeros.iter().zip(ones.iter()) {
            r00 += a.norm_sqr();
            r11 += b.norm_sqr();
            r01 += *a * b.conj();
        }
    }
    ReducedDensityMatrix::new([
        [Complex::new(r00, zero), r01],
        [r01.conj(), Complex::new(r11, zero)],
    ])
}

/// Bloch vector of a reduced density matrix.
pub fn bloch_of<T: Real>(rho: &ReducedDensityMatrix<T>) -> BlochVector<T> {
    rho.bloch()
}

/// Estimates a qubit's Bloch vector from per-axis +-1 sampling with the exact
/// outcome probabilities of its reduced state; `shots_per_axis` draws per
/// axis, clamped to the unit ball, deterministic for a fixed seed.
pub fn sample_bloch<T: Real>(
    state: &Statevector<T>,
    qubit: usize,
    shots_per_axis: u64,
    seed: u64,
) -> Result<BlochVector<T>> {
    if shots_per_axis == 0 {
        return Err(Error::NoShots);
    }
    let exact = reduced_density(state, qubit)?.bloch();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut estimate = [T::zero(); 3];
    for (slot, component) in estimate.iter_mut().zip([exact.x, exact.y, exact.z]) {
        let p_plus = (component.as_f64() + 1.0) / 2.0;
        let mut sum: i64 = 0;
        for _ in 0..shots_per_axis {
            if rng.gen::<f64>() < p_plus {
                sum += 1;
            } else {
                sum -= 1;
            }
        }
        *slot = T::from_f64_lossy(sum as f64 / shots_per_axis as f64);
    }
    let mut v = BlochVector::new(estimate[0], estimate[1], estimate[2]);
    let norm = v.norm();
    if norm > T::one() {
        v = v.scaled(norm.recip());
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_circuit_keeps_ground_state() {
        let spec = CircuitSpec::<f64> {
            n_qubits: 1,
            n_layers: 1,
            initial_layer: vec![InitialGate::Identity],
        };
        let state = apply_circuit(&spec, &[0.0, 0.0, 0.0]).unwrap();
        assert!((state.amplitudes()[0].re - 1.0).abs() < 1e-15);
        assert!(state.amplitudes()[1].norm() < 1e-15);
    }

    #[test]
    fn parameter_length_is_checked() {
        let spec = CircuitSpec::<f64>::standard(2, 1);
        let err = apply_circuit(&spec, &[0.0; 5]).unwrap_err();
        assert_eq!(
            err,
            crate::error::Error::ParameterLength { expected: 6, got: 5 }
        );
    }

    #[test]
    fn product_state_marginals_are_pure() {
        // |0> tensor |1>: qubit 0 in |1>, qubit 1 in |0> (little-endian).
        let mut state = Statevector::<f64>::zero_state(2);
        let x = [[Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
                 [Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)]];
        state.apply_single(&x, 0).unwrap();
        let rho0 = reduced_density(&state, 0).unwrap();
        assert!((rho0.matrix()[1][1].re - 1.0).abs() < 1e-15);
        let rho1 = reduced_density(&state, 1).unwrap();
        assert!((rho1.matrix()[0][0].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn plus_state_marginal_is_all_half() {
        let spec = CircuitSpec::<f64> {
            n_qubits: 2,
            n_layers: 1,
            initial_layer: vec![InitialGate::Ry(std::f64::consts::FRAC_PI_2), InitialGate::Identity],
        };
        let state = apply_circuit(&spec, &[0.0; 6]).unwrap();
        // CNOT(0 -> 1) turns |0>|+> into a Bell state; before measuring that,
        // check the |+> marginal on a fresh single-qubit circuit instead.
        let single = CircuitSpec::<f64> {
            n_qubits: 1,
            n_layers: 1,
            initial_layer: vec![InitialGate::Ry(std::f64::consts::FRAC_PI_2)],
        };
        let plus = apply_circuit(&single, &[0.0; 3]).unwrap();
        let rho = reduced_density(&plus, 0).unwrap();
        for row in rho.matrix() {
            for entry in row {
                assert!((entry.re - 0.5).abs() < 1e-12 && entry.im.abs() < 1e-12);
            }
        }
        // And the two-qubit state is Bell: marginals maximally mixed.
        let rho0 = reduced_density(&state, 0).unwrap();
        assert!((rho0.purity() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sample_bloch_is_deterministic_and_near_exact_on_eigenstates() {
        let state = Statevector::<f64>::zero_state(3);
        let a = sample_bloch(&state, 1, 1000, 42).unwrap();
        let b = sample_bloch(&state, 1, 1000, 42).unwrap();
        assert_eq!(a, b);
        // The raw z-draws are deterministic (+1 each); only the ball
        // projection against x/y sampling noise can pull z below 1.
        assert!(a.z > 1.0 - 5.0 / 1000f64.sqrt(), "z = {}", a.z);
        assert!(a.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn cnot_rejects_equal_control_and_target() {
        let mut state = Statevector::<f64>::zero_state(2);
        assert!(state.apply_cnot(1, 1).is_err());
    }
}
