//! The variational loop: circuit forward pass, readout into marginals,
//! expectation objective, gradient estimation, and Adam updates with
//! per-epoch trace records.
//!
//! Three gradient estimators are available. Central finite differences are
//! the default baseline. The parameter-shift mode uses the exact +-pi/2
//! shift rule on each codebook fidelity and chains through the factorized
//! expectation. The adjoint mode freezes the fidelity-space gradient into an
//! effective observable and runs one reverse sweep over the circuit, costing
//! a small constant number of forward-pass equivalents independently of the
//! parameter count; it requires exact tomography (no shots).
//!
//! All randomness (parameter initialization, shot noise) derives from the
//! config seed through counter-based streams; runs are bit-reproducible.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::codebook::{Codebook, ValueMap};
use crate::cost::PolynomialCost;
use crate::decoder::{
    codebook_fidelities, decode, marginal_from_bloch, marginal_from_rho, Configuration,
    MarginalDistribution,
};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::simulator::{
    apply_circuit, apply_gate, gate_sequence, reduced_density, sample_bloch, CircuitSpec, Gate,
    Statevector,
};

/// Everything the loop needs: the circuit family, the per-qubit codebook,
/// the label-to-value map, and the polynomial cost.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub circuit: CircuitSpec<T>,
    pub codebook: Codebook<T>,
    pub values: ValueMap<T>,
    pub cost: PolynomialCost<T>,
}

impl<T: Real> Problem<T> {
    pub fn new(
        circuit: CircuitSpec<T>,
        codebook: Codebook<T>,
        values: ValueMap<T>,
        cost: PolynomialCost<T>,
    ) -> Result<Self> {
        let problem = Self {
            circuit,
            codebook,
            values,
            cost,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        self.circuit.validate()?;
        if self.codebook.p() != self.values.len() {
            return Err(Error::ValueMapLength {
                expected: self.codebook.p(),
                got: self.values.len(),
            });
        }
        if self.cost.n_vars() != self.circuit.n_qubits {
            return Err(Error::ProblemShape {
                reason: format!(
                    "cost has {} variables but the circuit has {} qubits",
                    self.cost.n_vars(),
                    self.circuit.n_qubits
                ),
            });
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits
    }
}

/// How gradients are estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    /// Central differences on the objective, step `fd_step`.
    FiniteDifference,
    /// Exact +-pi/2 shift rule per fidelity, chained through the expectation.
    ParameterShift,
    /// Reverse-mode sweep against the frozen fidelity-space gradient.
    Adjoint,
}

impl fmt::Display for GradientMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            GradientMode::FiniteDifference => "finite-difference",
            GradientMode::ParameterShift => "parameter-shift",
            GradientMode::Adjoint => "adjoint",
        };
        f.write_str(name)
    }
}

impl FromStr for GradientMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "finite-difference" => Ok(GradientMode::FiniteDifference),
            "parameter-shift" => Ok(GradientMode::ParameterShift),
            "adjoint" => Ok(GradientMode::Adjoint),
            other => Err(Error::OptimizerConfig {
                reason: format!(
                    "unknown gradient mode '{other}'; expected finite-difference, \
                     parameter-shift, or adjoint"
                ),
            }),
        }
    }
}

/// Adam hyperparameters, stopping rule, gradient mode, and seeding.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig<T> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    pub max_epochs: usize,
    /// Stop once the soft cost drops strictly below this.
    pub target_cost: T,
    pub gradient_mode: GradientMode,
    pub fd_step: T,
    pub seed: u64,
    /// Tomography shots per axis per qubit; `None` means exact tomography.
    pub shots: Option<u64>,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            learning_rate: T::from_f64_lossy(0.008),
            beta1: T::from_f64_lossy(0.9),
            beta2: T::from_f64_lossy(0.999),
            epsilon: T::from_f64_lossy(1e-8),
            max_epochs: 1000,
            target_cost: T::from_f64_lossy(1e-3),
            gradient_mode: GradientMode::FiniteDifference,
            fd_step: T::from_f64_lossy(1e-3),
            seed: 1,
            shots: None,
        }
    }
}

impl<T: Real> OptimizerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::OptimizerConfig { reason });
        if !(self.learning_rate > T::zero()) || !self.learning_rate.is_finite() {
            return bad(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate.as_f64()
            ));
        }
        for (name, beta) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(beta > T::zero() && beta < T::one()) {
                return bad(format!("{name} must lie in (0, 1), got {}", beta.as_f64()));
            }
        }
        if !(self.epsilon > T::zero()) {
            return bad("epsilon must be positive".into());
        }
        if !(self.fd_step > T::zero()) {
            return bad(format!(
                "fd_step must be positive, got {}",
                self.fd_step.as_f64()
            ));
        }
        if !self.target_cost.is_finite() {
            return bad("target_cost must be finite".into());
        }
        if self.shots == Some(0) {
            return bad("shots must be at least 1 when set".into());
        }
        if self.gradient_mode == GradientMode::Adjoint && self.shots.is_some() {
            return bad("adjoint gradients need exact tomography; unset shots".into());
        }
        Ok(())
    }
}

/// One epoch of the trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T> {
    /// 1-based epoch index; the record reflects the state after this many
    /// Adam updates.
    pub epoch: usize,
    /// E[H] under the product marginals.
    pub soft_cost: T,
    /// H at the decoded configuration.
    pub hard_cost: T,
    pub configuration: Configuration<T>,
    /// tr(rho^2) per qubit, in [1/2, 1].
    pub purities: Vec<T>,
    /// Euclidean norm of the gradient used for this epoch's update.
    pub grad_norm: T,
    /// Wall-clock milliseconds since the start of the run.
    pub elapsed_ms: f64,
}

/// Outcome of a single-seed run.
#[derive(Debug, Clone)]
pub struct OptimizeResult<T> {
    /// Best hard-decoded configuration over the initial state and all epochs.
    pub best_configuration: Configuration<T>,
    pub best_hard_cost: T,
    /// Lowest soft cost seen.
    pub best_soft_cost: T,
    pub epochs_run: usize,
    /// Whether the soft cost dropped below the target at some epoch.
    pub target_reached: bool,
    pub trace: Vec<TraceRecord<T>>,
    /// Set when the run stopped on a non-finite objective or gradient.
    pub aborted: Option<Error>,
}

struct Readout<T> {
    soft: T,
    marginals: Vec<MarginalDistribution<T>>,
    purities: Vec<T>,
}

/// Per-qubit shot-noise stream: a fixed mixing of seed, epoch, and qubit so
/// that every (epoch, qubit) pair samples an independent, reproducible
/// substream.
fn sample_seed(seed: u64, epoch: usize, qubit: usize) -> u64 {
    seed ^ (epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (qubit as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

fn readout<T: Real>(
    problem: &Problem<T>,
    params: &[T],
    shots: Option<u64>,
    seed: u64,
    epoch: usize,
) -> Result<Readout<T>> {
    let state = apply_circuit(&problem.circuit, params)?;
    let n = problem.n_qubits();
    let mut marginals = Vec::with_capacity(n);
    let mut purities = Vec::with_capacity(n);
    let half = T::from_f64_lossy(0.5);
    for qubit in 0..n {
        match shots {
            None => {
                let rho = reduced_density(&state, qubit)?;
                marginals.push(marginal_from_rho(&rho, &problem.codebook)?);
                purities.push(rho.purity());
            }
            Some(s) => {
                let r = sample_bloch(&state, qubit, s, sample_seed(seed, epoch, qubit))?;
                marginals.push(marginal_from_bloch(&r, &problem.codebook)?);
                purities.push(half * (T::one() + r.norm_sq()));
            }
        }
    }
    let soft = problem.cost.expectation(&marginals, &problem.values)?;
    Ok(Readout {
        soft,
        marginals,
        purities,
    })
}

/// E[H] at the given parameters under exact tomography.
pub fn objective<T: Real>(params: &[T], problem: &Problem<T>) -> Result<T> {
    Ok(readout(problem, params, None, 0, 0)?.soft)
}

/// E[H] with shot-sampled tomography; deterministic in (seed, shots).
pub fn objective_sampled<T: Real>(
    params: &[T],
    problem: &Problem<T>,
    shots: u64,
    seed: u64,
) -> Result<T> {
    Ok(readout(problem, params, Some(shots), seed, 0)?.soft)
}

/// Derivative of the objective with respect to every raw fidelity F[qubit][q],
/// accounting for the marginal normalization, evaluated at `state`.
fn fidelity_space_grad<T: Real>(
    problem: &Problem<T>,
    state: &Statevector<T>,
) -> Result<Vec<Vec<T>>> {
    let n = problem.n_qubits();
    let p = problem.codebook.p();
    let mut marginals = Vec::with_capacity(n);
    let mut sums = Vec::with_capacity(n);
    for qubit in 0..n {
        let rho = reduced_density(state, qubit)?;
        let fids = codebook_fidelities(&rho, &problem.codebook)?;
        let sum: T = fids.iter().copied().sum();
        if sum <= T::zero() {
            return Err(Error::DegenerateFidelities);
        }
        marginals.push(MarginalDistribution::new(
            fids.iter().map(|&f| f / sum).collect(),
        )?);
        sums.push(sum);
    }
    let (_, d) = problem
        .cost
        .expectation_with_grad(&marginals, &problem.values)?;
    let mut g = vec![vec![T::zero(); p]; n];
    for qubit in 0..n {
        let mut dot = T::zero();
        for q in 0..p {
            dot += d[qubit][q] * marginals[qubit].prob(q);
        }
        for q in 0..p {
            g[qubit][q] = (d[qubit][q] - dot) / sums[qubit];
        }
    }
    Ok(g)
}

fn fd_gradient<T: Real>(params: &[T], problem: &Problem<T>, fd_step: T) -> Result<Vec<T>> {
    if !(fd_step > T::zero()) {
        return Err(Error::OptimizerConfig {
            reason: "fd_step must be positive".into(),
        });
    }
    let two = T::one() + T::one();
    let mut buf = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let base = params[i];
        buf[i] = base + fd_step;
        let plus = objective(&buf, problem)?;
        buf[i] = base - fd_step;
        let minus = objective(&buf, problem)?;
        buf[i] = base;
        grad.push((plus - minus) / (two * fd_step));
    }
    Ok(grad)
}

fn all_fidelities<T: Real>(problem: &Problem<T>, state: &Statevector<T>) -> Result<Vec<Vec<T>>> {
    (0..problem.n_qubits())
        .map(|qubit| codebook_fidelities(&reduced_density(state, qubit)?, &problem.codebook))
        .collect()
}

fn ps_gradient<T: Real>(params: &[T], problem: &Problem<T>) -> Result<Vec<T>> {
    let state = apply_circuit(&problem.circuit, params)?;
    let g = fidelity_space_grad(problem, &state)?;
    let shift = T::FRAC_PI_2();
    let half = T::from_f64_lossy(0.5);
    let mut buf = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let base = params[i];
        buf[i] = base + shift;
        let f_plus = all_fidelities(problem, &apply_circuit(&problem.circuit, &buf)?)?;
        buf[i] = base - shift;
        let f_minus = all_fidelities(problem, &apply_circuit(&problem.circuit, &buf)?)?;
        buf[i] = base;
        let mut total = T::zero();
        for (gq, (fp, fm)) in g.iter().zip(f_plus.iter().zip(&f_minus)) {
            for (gqq, (a, b)) in gq.iter().zip(fp.iter().zip(fm)) {
                total += *gqq * (*a - *b) * half;
            }
        }
        grad.push(total);
    }
    Ok(grad)
}

/// target += m (x) src on one qubit.
fn accumulate_single<T: Real>(
    target: &mut Statevector<T>,
    src: &Statevector<T>,
    m: &[[Complex<T>; 2]; 2],
    qubit: usize,
) {
    let lo = 1 << qubit;
    let t = target.amplitudes_mut();
    let s = src.amplitudes();
    let mut base = 0;
    while base < s.len() {
        for i in base..base + lo {
            let u = s[i];
            let v = s[i + lo];
            t[i] += m[0][0] * u + m[0][1] * v;
            t[i + lo] += m[1][0] * u + m[1][1] * v;
        }
        base += lo << 1;
    }
}

/// 2 Re <lam| (-i Z/2) |psi> on one qubit.
fn pairing_z<T: Real>(lam: &Statevector<T>, psi: &Statevector<T>, qubit: usize) -> T {
    let lo = 1 << qubit;
    let l = lam.amplitudes();
    let p = psi.amplitudes();
    let mut acc = T::zero();
    let mut base = 0;
    while base < p.len() {
        for i in base..base + lo {
            let z0 = l[i].conj() * p[i];
            let z1 = l[i + lo].conj() * p[i + lo];
            acc += z0.im - z1.im;
        }
        base += lo << 1;
    }
    acc
}

/// 2 Re <lam| (-i Y/2) |psi> on one qubit.
fn pairing_y<T: Real>(lam: &Statevector<T>, psi: &Statevector<T>, qubit: usize) -> T {
    let lo = 1 << qubit;
    let l = lam.amplitudes();
    let p = psi.amplitudes();
    let mut acc = T::zero();
    let mut base = 0;
    while base < p.len() {
        for i in base..base + lo {
            let z = l[i + lo].conj() * p[i] - l[i].conj() * p[i + lo];
            acc += z.re;
        }
        base += lo << 1;
    }
    acc
}

fn adjoint_gradient<T: Real>(params: &[T], problem: &Problem<T>) -> Result<Vec<T>> {
    let mut psi = apply_circuit(&problem.circuit, params)?;
    let g = fidelity_space_grad(problem, &psi)?;
    let half = T::from_f64_lossy(0.5);

    // The objective's differential is sum_{a,q} g[a][q] dF[a][q] with
    // F[a][q] = <psi| Proj[a][q] |psi|>, so the frozen effective observable is
    // O = sum_a A_a with the single-qubit block
    // A_a = sum_q g[a][q] (I + n_q . sigma)/2.
    let mut lam = Statevector::zeros(problem.n_qubits());
    for (qubit, gq) in g.iter().enumerate() {
        let mut trace_part = T::zero();
        let (mut cx, mut cy, mut cz) = (T::zero(), T::zero(), T::zero());
        for (q, &coeff) in gq.iter().enumerate() {
            let n = &problem.codebook.vectors()[q];
            trace_part += coeff * half;
            cx += coeff * n.x * half;
            cy += coeff * n.y * half;
            cz += coeff * n.z * half;
        }
        let a = [
            [
                Complex::new(trace_part + cz, T::zero()),
                Complex::new(cx, -cy),
            ],
            [Complex::new(cx, cy), Complex::new(trace_part - cz, T::zero())],
        ];
        accumulate_single(&mut lam, &psi, &a, qubit);
    }

    // Reverse sweep: at each rotation gate, 2 Re <lam| dU/dtheta U^-1 |psi>
    // with psi currently sitting just after that gate; then undo the gate on
    // both vectors.
    let mut grad = vec![T::zero(); params.len()];
    let gates = gate_sequence(&problem.circuit);
    for gate in gates.iter().rev() {
        match *gate {
            Gate::Rz { qubit, param } => grad[param] = pairing_z(&lam, &psi, qubit),
            Gate::Ry { qubit, param } => grad[param] = pairing_y(&lam, &psi, qubit),
            Gate::InitRy { .. } | Gate::Cnot { .. } => {}
        }
        apply_gate(&mut psi, gate, params, true)?;
        apply_gate(&mut lam, gate, params, true)?;
    }
    Ok(grad)
}

/// Gradient of the exact-tomography objective in the requested mode.
pub fn gradient<T: Real>(
    params: &[T],
    problem: &Problem<T>,
    mode: GradientMode,
    fd_step: T,
) -> Result<Vec<T>> {
    match mode {
        GradientMode::FiniteDifference => fd_gradient(params, problem, fd_step),
        GradientMode::ParameterShift => ps_gradient(params, problem),
        GradientMode::Adjoint => adjoint_gradient(params, problem),
    }
}

fn decode_readout<T: Real>(
    problem: &Problem<T>,
    readout: &Readout<T>,
) -> Result<(Configuration<T>, T)> {
    let config = decode(&readout.marginals, &problem.values)?;
    let hard = problem.cost.evaluate(&config, &problem.values)?;
    Ok((config, hard))
}

/// Runs Adam from seeded random initial parameters. Stops when the soft cost
/// drops below `target_cost` or after `max_epochs` epochs. The best decoded
/// configuration is tracked across the initial state and every epoch. A
/// non-finite objective or gradient aborts the run with the partial trace
/// and a diagnostic in `aborted`.
pub fn optimize<T: Real>(
    problem: &Problem<T>,
    config: &OptimizerConfig<T>,
) -> Result<OptimizeResult<T>> {
    problem.validate()?;
    config.validate()?;

    let n_params = problem.circuit.param_count();
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut params: Vec<T> = (0..n_params)
        .map(|_| T::from_f64_lossy(rng.gen::<f64>() * 0.2 - 0.1))
        .collect();

    let start = Instant::now();
    let initial = readout(problem, &params, config.shots, config.seed, 0)?;
    let (mut best_config, mut best_hard) = decode_readout(problem, &initial)?;
    let mut best_soft = initial.soft;
    let mut result = OptimizeResult {
        best_configuration: best_config.clone(),
        best_hard_cost: best_hard,
        best_soft_cost: best_soft,
        epochs_run: 0,
        target_reached: false,
        trace: Vec::new(),
        aborted: None,
    };
    if !initial.soft.is_finite() {
        result.aborted = Some(Error::NonFiniteObjective { epoch: 0 });
        return Ok(result);
    }

    let one = T::one();
    let mut m = vec![T::zero(); n_params];
    let mut v = vec![T::zero(); n_params];
    for epoch in 1..=config.max_epochs {
        let grad = gradient(&params, problem, config.gradient_mode, config.fd_step)?;
        if grad.iter().any(|g| !g.is_finite()) {
            result.aborted = Some(Error::NonFiniteObjective { epoch });
            break;
        }
        let t = epoch as i32;
        let bc1 = one - config.beta1.powi(t);
        let bc2 = one - config.beta2.powi(t);
        let mut grad_norm_sq = T::zero();
        for i in 0..n_params {
            let gi = grad[i];
            grad_norm_sq += gi * gi;
            m[i] = config.beta1 * m[i] + (one - config.beta1) * gi;
            v[i] = config.beta2 * v[i] + (one - config.beta2) * gi * gi;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            params[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
        }

        let epoch_readout = readout(problem, &params, config.shots, config.seed, epoch)?;
        if !epoch_readout.soft.is_finite() {
            result.aborted = Some(Error::NonFiniteObjective { epoch });
            result.epochs_run = epoch;
            break;
        }
        let (decoded, hard) = decode_readout(problem, &epoch_readout)?;
        if hard < best_hard {
            best_hard = hard;
            best_config = decoded.clone();
        }
        if epoch_readout.soft < best_soft {
            best_soft = epoch_readout.soft;
        }
        result.trace.push(TraceRecord {
            epoch,
            soft_cost: epoch_readout.soft,
            hard_cost: hard,
            configuration: decoded,
            purities: epoch_readout.purities,
            grad_norm: grad_norm_sq.sqrt(),
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        result.epochs_run = epoch;
        if epoch_readout.soft < config.target_cost {
            result.target_reached = true;
            break;
        }
    }

    result.best_configuration = best_config;
    result.best_hard_cost = best_hard;
    result.best_soft_cost = best_soft;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::platonic_codebook;
    use crate::cost::Monomial;

    fn tiny_problem(n_qubits: usize, cost: PolynomialCost<f64>) -> Problem<f64> {
        Problem::new(
            CircuitSpec::standard(n_qubits, 1),
            platonic_codebook(4).unwrap(),
            ValueMap::integer_range(-1, 2).unwrap(),
            cost,
        )
        .unwrap()
    }

    #[test]
    fn constant_cost_has_zero_gradient() {
        let cost = PolynomialCost::new(2, vec![Monomial::constant(3.5)]).unwrap();
        let problem = tiny_problem(2, cost);
        let params = vec![0.3; problem.circuit.param_count()];
        for mode in [
            GradientMode::FiniteDifference,
            GradientMode::ParameterShift,
            GradientMode::Adjoint,
        ] {
            let g = gradient(&params, &problem, mode, 1e-3).unwrap();
            assert!(g.iter().all(|x| x.abs() < 1e-9), "{mode}: {g:?}");
        }
        assert_eq!(objective(&params, &problem).unwrap(), 3.5);
    }

    #[test]
    fn max_epochs_zero_returns_initial_decode() {
        let cost = PolynomialCost::new(1, vec![Monomial::new(1.0, [(0, 2)])]).unwrap();
        let problem = tiny_problem(1, cost);
        let config = OptimizerConfig {
            max_epochs: 0,
            ..OptimizerConfig::default()
        };
        let result = optimize(&problem, &config).unwrap();
        assert!(result.trace.is_empty());
        assert!(!result.target_reached);
        assert_eq!(result.best_configuration.len(), 1);
    }

    #[test]
    fn adjoint_with_shots_is_rejected() {
        let config = OptimizerConfig::<f64> {
            gradient_mode: GradientMode::Adjoint,
            shots: Some(100),
            ..OptimizerConfig::default()
        };
        assert!(config.validate().is_err());
    }

    #[test]
    fn gradient_mode_round_trips_through_strings() {
        for mode in [
            GradientMode::FiniteDifference,
            GradientMode::ParameterShift,
            GradientMode::Adjoint,
        ] {
            assert_eq!(mode.to_string().parse::<GradientMode>().unwrap(), mode);
        }
        assert!("newton".parse::<GradientMode>().is_err());
    }
}
