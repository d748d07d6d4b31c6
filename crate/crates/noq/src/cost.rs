//! Polynomial cost functions over discrete variables, their exact
//! expectations under product marginals, encoding-size arithmetic, and the
//! bundled degree-8 benchmark instance.
//!
//! A cost is a multivariate polynomial in variables q0..q{N-1}; each variable
//! ranges over the real values of a [`ValueMap`]. Under independent per-qubit
//! marginals the expectation factorizes term by term into per-variable power
//! moments:
//!
//!   E[ c * prod_a q_a^{k_a} ] = c * prod_a E[ v(q_a)^{k_a} ]
//!
//! which this module evaluates exactly (no sampling) given the marginals.
//! A Monte Carlo path is provided for black-box cost functions.
//!
//! Text format: one monomial per line, `coeff q3 q7^2 ...`; exponent 1 may be
//! omitted; blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::codebook::ValueMap;
use crate::decoder::{Configuration, MarginalDistribution};
use crate::error::{Error, Result};
use crate::real::Real;

/// One term of a polynomial: coefficient times a product of variable powers.
/// Exponents are kept sorted by variable index with no zero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial<T> {
    coefficient: T,
    exponents: Vec<(usize, u32)>,
}

impl<T: Real> Monomial<T> {
    /// Builds a term from (variable, exponent) factors; repeated variables
    /// multiply (their exponents add), zero exponents are dropped.
    pub fn new(coefficient: T, factors: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut map: BTreeMap<usize, u32> = BTreeMap::new();
        for (var, exp) in factors {
            if exp > 0 {
                *map.entry(var).or_insert(0) += exp;
            }
        }
        Self {
            coefficient,
            exponents: map.into_iter().collect(),
        }
    }

    pub fn constant(coefficient: T) -> Self {
        Self {
            coefficient,
            exponents: Vec::new(),
        }
    }

    pub fn coefficient(&self) -> T {
        self.coefficient
    }

    /// Sorted (variable, exponent) pairs, all exponents positive.
    pub fn exponents(&self) -> &[(usize, u32)] {
        &self.exponents
    }

    pub fn total_degree(&self) -> u32 {
        self.exponents.iter().map(|&(_, e)| e).sum()
    }

    fn max_var(&self) -> Option<usize> {
        self.exponents.last().map(|&(v, _)| v)
    }

    /// Value of this single term at the given point.
    pub fn value_at(&self, values: &[T]) -> T {
        let mut acc = self.coefficient;
        for &(var, exp) in &self.exponents {
            acc *= values[var].powi(exp as i32);
        }
        acc
    }
}

/// A multivariate polynomial in canonical form: terms sorted by exponent
/// signature, duplicate signatures merged, zero coefficients dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialCost<T> {
    n_vars: usize,
    monomials: Vec<Monomial<T>>,
    max_exps: Vec<u32>,
}

impl<T: Real> PolynomialCost<T> {
    pub fn new(n_vars: usize, monomials: Vec<Monomial<T>>) -> Result<Self> {
        for m in &monomials {
            if let Some(var) = m.max_var() {
                if var >= n_vars {
                    return Err(Error::VariableOutOfRange { var, n_vars });
                }
            }
        }
        let mut merged: BTreeMap<Vec<(usize, u32)>, T> = BTreeMap::new();
        for m in monomials {
            *merged.entry(m.exponents).or_insert_with(T::zero) += m.coefficient;
        }
        let monomials: Vec<Monomial<T>> = merged
            .into_iter()
            .filter(|&(_, c)| c != T::zero())
            .map(|(exponents, coefficient)| Monomial {
                coefficient,
                exponents,
            })
            .collect();
        let mut max_exps = vec![0u32; n_vars];
        for m in &monomials {
            for &(var, exp) in &m.exponents {
                max_exps[var] = max_exps[var].max(exp);
            }
        }
        Ok(Self {
            n_vars,
            monomials,
            max_exps,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn monomials(&self) -> &[Monomial<T>] {
        &self.monomials
    }

    pub fn total_degree(&self) -> u32 {
        self.monomials
            .iter()
            .map(Monomial::total_degree)
            .max()
            .unwrap_or(0)
    }

    /// Highest power of each variable across all terms.
    pub fn max_exponents(&self) -> &[u32] {
        &self.max_exps
    }

    /// Reinterprets the polynomial over a wider variable set.
    pub fn widen(mut self, n_vars: usize) -> Result<Self> {
        if n_vars < self.n_vars {
            let var = self
                .monomials
                .iter()
                .filter_map(Monomial::max_var)
                .max()
                .unwrap_or(0);
            return Err(Error::VariableOutOfRange { var, n_vars });
        }
        self.max_exps.resize(n_vars, 0);
        self.n_vars = n_vars;
        Ok(self)
    }

    /// Exact evaluation at real values, one per variable.
    pub fn evaluate_at(&self, values: &[T]) -> Result<T> {
        if values.len() != self.n_vars {
            return Err(Error::ConfigurationLength {
                expected: self.n_vars,
                got: values.len(),
            });
        }
        Ok(self
            .monomials
            .iter()
            .map(|m| m.value_at(values))
            .fold(T::zero(), |acc, x| acc + x))
    }

    /// Evaluation at a decoded configuration, resolving labels through the
    /// value map when the configuration does not already carry values.
    pub fn evaluate(&self, config: &Configuration<T>, vm: &ValueMap<T>) -> Result<T> {
        if config.len() != self.n_vars {
            return Err(Error::ConfigurationLength {
                expected: self.n_vars,
                got: config.len(),
            });
        }
        match config.values() {
            Some(values) => self.evaluate_at(values),
            None => {
                let resolved = config.clone().resolve(vm)?;
                self.evaluate_at(resolved.values().expect("resolved"))
            }
        }
    }

    /// Symbolic square: every pairwise product of terms, merged canonically.
    pub fn square(&self) -> Self {
        let mut merged: BTreeMap<Vec<(usize, u32)>, T> = BTreeMap::new();
        for a in &self.monomials {
            for b in &self.monomials {
                let exps = merge_exponents(&a.exponents, &b.exponents);
                *merged.entry(exps).or_insert_with(T::zero) += a.coefficient * b.coefficient;
            }
        }
        let monomials: Vec<Monomial<T>> = merged
            .into_iter()
            .filter(|&(_, c)| c != T::zero())
            .map(|(exponents, coefficient)| Monomial {
                coefficient,
                exponents,
            })
            .collect();
        let mut max_exps = vec![0u32; self.n_vars];
        for m in &monomials {
            for &(var, exp) in &m.exponents {
                max_exps[var] = max_exps[var].max(exp);
            }
        }
        Self {
            n_vars: self.n_vars,
            monomials,
            max_exps,
        }
    }

    /// Exact expectation under independent per-variable marginals, via the
    /// moment factorization. Moments are computed once per call, per variable,
    /// up to the highest power that variable reaches.
    pub fn expectation(
        &self,
        marginals: &[MarginalDistribution<T>],
        vm: &ValueMap<T>,
    ) -> Result<T> {
        let moments = self.moment_table(marginals, vm)?;
        let mut total = T::zero();
        for m in &self.monomials {
            let mut term = m.coefficient;
            for &(var, exp) in &m.exponents {
                term *= moments[var][exp as usize];
            }
            total += term;
        }
        Ok(total)
    }

    /// Expectation together with its derivative with respect to every
    /// marginal probability entry, treating absent variables as constants.
    /// The returned gradient has shape n_vars x p.
    pub fn expectation_with_grad(
        &self,
        marginals: &[MarginalDistribution<T>],
        vm: &ValueMap<T>,
    ) -> Result<(T, Vec<Vec<T>>)> {
        let moments = self.moment_table(marginals, vm)?;
        let p = vm.len();
        let max_k = self.max_exps.iter().copied().max().unwrap_or(0) as usize;
        let vpow = value_powers(vm, max_k);
        let mut total = T::zero();
        let mut grad = vec![vec![T::zero(); p]; self.n_vars];
        for m in &self.monomials {
            let mut term = m.coefficient;
            for &(var, exp) in &m.exponents {
                term *= moments[var][exp as usize];
            }
            total += term;
            for (i, &(var, exp)) in m.exponents.iter().enumerate() {
                let mut partial = m.coefficient;
                for (j, &(other, oexp)) in m.exponents.iter().enumerate() {
                    if i != j {
                        partial *= moments[other][oexp as usize];
                    }
                }
                let row = &mut grad[var];
                for q in 0..p {
                    row[q] += partial * vpow[q][exp as usize];
                }
            }
        }
        Ok((total, grad))
    }

    fn moment_table(
        &self,
        marginals: &[MarginalDistribution<T>],
        vm: &ValueMap<T>,
    ) -> Result<Vec<Vec<T>>> {
        if marginals.len() != self.n_vars {
            return Err(Error::MarginalCount {
                expected: self.n_vars,
                got: marginals.len(),
            });
        }
        marginals
            .iter()
            .zip(&self.max_exps)
            .map(|(m, &k)| moments_of(m, vm, k))
            .collect()
    }
}

fn merge_exponents(a: &[(usize, u32)], b: &[(usize, u32)]) -> Vec<(usize, u32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn value_powers<T: Real>(vm: &ValueMap<T>, max_k: usize) -> Vec<Vec<T>> {
    vm.values()
        .iter()
        .map(|&v| {
            let mut pow = Vec::with_capacity(max_k + 1);
            pow.push(T::one());
            for k in 1..=max_k {
                let prev = pow[k - 1];
                pow.push(prev * v);
            }
            pow
        })
        .collect()
}

/// Power moments [E[v^0], E[v^1], ..., E[v^max_k]] of a marginal; E[v^0] is
/// exactly 1.
pub fn moments_of<T: Real>(
    marginal: &MarginalDistribution<T>,
    vm: &ValueMap<T>,
    max_k: u32,
) -> Result<Vec<T>> {
    if marginal.p() != vm.len() {
        return Err(Error::MarginalLength {
            expected: vm.len(),
            got: marginal.p(),
        });
    }
    let mut moments = Vec::with_capacity(max_k as usize + 1);
    moments.push(T::one());
    if max_k == 0 {
        return Ok(moments);
    }
    let mut powers: Vec<T> = vm.values().to_vec();
    for k in 1..=max_k {
        let mut e = T::zero();
        for (q, &pw) in powers.iter().enumerate() {
            e += marginal.prob(q) * pw;
        }
        moments.push(e);
        if k < max_k {
            for (pw, &v) in powers.iter_mut().zip(vm.values()) {
                *pw *= v;
            }
        }
    }
    Ok(moments)
}

/// Monte Carlo expectation of a black-box cost under independent marginals:
/// each sample draws one label per variable from its marginal, resolves the
/// values, and averages the cost. Deterministic for a fixed seed.
pub fn expectation_sampled<T: Real, F>(
    mut cost_fn: F,
    marginals: &[MarginalDistribution<T>],
    vm: &ValueMap<T>,
    n_samples: u64,
    seed: u64,
) -> Result<T>
where
    F: FnMut(&Configuration<T>) -> T,
{
    if n_samples == 0 {
        return Err(Error::OptimizerConfig {
            reason: "n_samples must be at least 1".into(),
        });
    }
    for m in marginals {
        if m.p() != vm.len() {
            return Err(Error::MarginalLength {
                expected: vm.len(),
                got: m.p(),
            });
        }
    }
    let n = marginals.len();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut config = Configuration::from_labels(vec![0; n], vm.len().max(1))?.resolve(vm)?;
    let mut sum = T::zero();
    for _ in 0..n_samples {
        for (alpha, marginal) in marginals.iter().enumerate() {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut label = marginal.p() - 1;
            for q in 0..marginal.p() {
                acc += marginal.prob(q).as_f64();
                if u < acc {
                    label = q;
                    break;
                }
            }
            config.set(alpha, label, vm.value(label)?);
        }
        sum += cost_fn(&config);
    }
    Ok(sum / T::from_f64_lossy(n_samples as f64))
}

/// The 12-term cubic-interaction sum whose square is the bundled benchmark:
///
///   S = q0^3 - q1^3 q0 - q2 q3 + q4^3 - q5 q6 - q7^2 + q8^3
///       + q8 q10 / 5 + q11 q1 + q12^2 + q13^3 + q14 q0 q3
///
/// over 15 variables (q9 does not appear).
pub fn benchmark_inner_sum<T: Real>() -> PolynomialCost<T> {
    let c = |v: f64| T::from_f64_lossy(v);
    let terms = vec![
        Monomial::new(c(1.0), [(0, 3)]),
        Monomial::new(c(-1.0), [(1, 3), (0, 1)]),
        Monomial::new(c(-1.0), [(2, 1), (3, 1)]),
        Monomial::new(c(1.0), [(4, 3)]),
        Monomial::new(c(-1.0), [(5, 1), (6, 1)]),
        Monomial::new(c(-1.0), [(7, 2)]),
        Monomial::new(c(1.0), [(8, 3)]),
        Monomial::new(c(0.2), [(8, 1), (10, 1)]),
        Monomial::new(c(1.0), [(11, 1), (1, 1)]),
        Monomial::new(c(1.0), [(12, 2)]),
        Monomial::new(c(1.0), [(13, 3)]),
        Monomial::new(c(1.0), [(14, 1), (0, 1), (3, 1)]),
    ];
    PolynomialCost::new(15, terms).expect("benchmark terms are well formed")
}

/// The bundled benchmark: the squared 12-term sum (degree 8, 15 variables)
/// with each variable ranging over the integers -9..=10.
pub fn benchmark_poly8<T: Real>() -> (PolynomialCost<T>, ValueMap<T>) {
    let poly = benchmark_inner_sum::<T>().square();
    let vm = ValueMap::integer_range(-9, 10).expect("increasing range");
    (poly, vm)
}

/// Qubit-count comparison between binary encoding and a p-state
/// non-orthogonal encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EncodingReport {
    /// States per qubit.
    pub p: usize,
    /// Bits per p-valued variable under binary encoding.
    pub m: u32,
    /// Total classical bits the problem needs.
    pub total_bits: u64,
    /// Qubits under one-bit-per-qubit binary encoding.
    pub qubits_standard: u64,
    /// Qubits under the p-state encoding.
    pub qubits_nonorthogonal: u64,
}

fn ceil_log2(p: usize) -> u32 {
    usize::BITS - (p - 1).leading_zeros()
}

/// How many classical bit variables Q qubits can carry at p states per
/// qubit: floor(Q * log2 p).
pub fn bit_capacity(qubits: u64, p: usize) -> Result<u64> {
    if p < 2 {
        return Err(Error::InvalidResourceQuery);
    }
    if p.is_power_of_two() {
        return qubits
            .checked_mul(p.trailing_zeros() as u64)
            .ok_or(Error::InvalidResourceQuery);
    }
    let bits = qubits as f64 * (p as f64).log2();
    if !bits.is_finite() {
        return Err(Error::InvalidResourceQuery);
    }
    Ok(bits.floor() as u64)
}

/// Smallest qubit count whose capacity reaches the given number of bits.
pub fn min_qubits_for_bits(bits: u64, p: usize) -> Result<u64> {
    if bits == 0 || p < 2 {
        return Err(Error::InvalidResourceQuery);
    }
    let mut q = (bits as f64 / (p as f64).log2()).ceil() as u64;
    while bit_capacity(q, p)? < bits {
        q += 1;
    }
    while q > 0 && bit_capacity(q - 1, p)? >= bits {
        q -= 1;
    }
    Ok(q)
}

/// Report for a problem stated directly in bit variables: binary encoding
/// uses one qubit per bit; the p-state encoding packs floor(log2 p) bits'
/// worth per qubit.
pub fn resource_estimate(n_bit_vars: u64, p: usize) -> Result<EncodingReport> {
    if n_bit_vars == 0 || p < 2 {
        return Err(Error::InvalidResourceQuery);
    }
    Ok(EncodingReport {
        p,
        m: ceil_log2(p),
        total_bits: n_bit_vars,
        qubits_standard: n_bit_vars,
        qubits_nonorthogonal: min_qubits_for_bits(n_bit_vars, p)?,
    })
}

/// Report for a problem with `n_vars` variables of `n_values` values each:
/// binary encoding needs ceil(n_vars * log2 n_values) qubits in total, the
/// non-orthogonal encoding one qubit per variable (p = n_values).
pub fn resource_estimate_values(n_vars: u64, n_values: usize) -> Result<EncodingReport> {
    if n_vars == 0 || n_values < 2 {
        return Err(Error::InvalidResourceQuery);
    }
    let total_bits = if n_values.is_power_of_two() {
        n_vars
            .checked_mul(n_values.trailing_zeros() as u64)
            .ok_or(Error::InvalidResourceQuery)?
    } else {
        let bits = n_vars as f64 * (n_values as f64).log2();
        if !bits.is_finite() {
            return Err(Error::InvalidResourceQuery);
        }
        bits.ceil() as u64
    };
    Ok(EncodingReport {
        p: n_values,
        m: ceil_log2(n_values),
        total_bits,
        qubits_standard: total_bits,
        qubits_nonorthogonal: n_vars,
    })
}

/// Little-endian bit decomposition: bit i is the coefficient of 2^i.
pub fn binary_encode(value: u64, m: u32) -> Result<Vec<bool>> {
    if m > 64 || (m < 64 && value >> m != 0) {
        return Err(Error::ValueOutOfBits { value, m });
    }
    Ok((0..m).map(|i| (value >> i) & 1 == 1).collect())
}

/// Inverse of [`binary_encode`].
pub fn binary_decode(bits: &[bool]) -> Result<u64> {
    if bits.len() > 64 {
        return Err(Error::ValueOutOfBits {
            value: 0,
            m: bits.len() as u32,
        });
    }
    Ok(bits
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i)))
}

impl<T: Real> fmt::Display for PolynomialCost<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in &self.monomials {
            write!(f, "{}", m.coefficient.as_f64())?;
            for &(var, exp) in &m.exponents {
                if exp == 1 {
                    write!(f, " q{var}")?;
                } else {
                    write!(f, " q{var}^{exp}")?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl<T: Real> PolynomialCost<T> {
    /// Parses the line-oriented text format. The variable count is inferred
    /// as one past the highest index present; use [`PolynomialCost::widen`]
    /// to target a larger variable set.
    pub fn parse(text: &str) -> Result<Self> {
        let mut monomials = Vec::new();
        let mut n_vars = 0usize;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let coeff_tok = tokens.next().expect("nonempty line has a token");
            let coeff: f64 = coeff_tok.parse().map_err(|_| Error::PolynomialParse {
                line,
                msg: format!("invalid coefficient '{coeff_tok}'"),
            })?;
            if !coeff.is_finite() {
                return Err(Error::PolynomialParse {
                    line,
                    msg: format!("coefficient '{coeff_tok}' is not finite"),
                });
            }
            let mut factors = Vec::new();
            for tok in tokens {
                let (var, exp) =
                    parse_var_token(tok).map_err(|msg| Error::PolynomialParse { line, msg })?;
                n_vars = n_vars.max(var + 1);
                factors.push((var, exp));
            }
            monomials.push(Monomial::new(T::from_f64_lossy(coeff), factors));
        }
        PolynomialCost::new(n_vars, monomials)
    }
}

fn parse_var_token(tok: &str) -> std::result::Result<(usize, u32), String> {
    let rest = tok
        .strip_prefix('q')
        .ok_or_else(|| format!("expected a variable like q3 or q3^2, got '{tok}'"))?;
    let (idx_str, exp_str) = match rest.split_once('^') {
        Some((a, b)) => (a, Some(b)),
        None => (rest, None),
    };
    let var: usize = idx_str
        .parse()
        .map_err(|_| format!("invalid variable index in '{tok}'"))?;
    let exp: u32 = match exp_str {
        Some(e) => e
            .parse()
            .map_err(|_| format!("invalid exponent in '{tok}'"))?,
        None => 1,
    };
    if exp == 0 {
        return Err(format!("exponent must be positive in '{tok}'"));
    }
    Ok((var, exp))
}
