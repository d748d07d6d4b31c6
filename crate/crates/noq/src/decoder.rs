//! Readout: turn single-qubit reduced states into marginal distributions
//! over codebook labels and decode a classical configuration.
//!
//! The probability assigned to label q is the fidelity between the qubit's
//! reduced state and the codebook state |psi_q>, normalized over all labels:
//!
//!   P(q) = <psi_q| rho |psi_q> / sum_q' <psi_q'| rho |psi_q'>
//!
//! For a balanced codebook (vector sum zero) the normalizer is exactly p/2
//! regardless of rho, since each fidelity is (1 + n_q . r) / 2 and the dot
//! products cancel in the sum. With p = 2 antipodal vectors this reduces to
//! ordinary computational-basis readout.

use crate::codebook::{state_fidelity, BlochVector, Codebook, ValueMap};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::simulator::ReducedDensityMatrix;

/// Probabilities over the p codebook labels for one qubit, in label order.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDistribution<T> {
    probs: Vec<T>,
}

impl<T: Real> MarginalDistribution<T> {
    /// Validates non-negativity and normalization (sum 1 within the medium
    /// tolerance tier).
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::MarginalLength {
                expected: 2,
                got: probs.len(),
            });
        }
        if probs.iter().any(|p| *p < T::zero()) {
            return Err(Error::DegenerateMarginal {
                reason: "negative probability".into(),
            });
        }
        let sum: T = probs.iter().copied().sum();
        if (sum - T::one()).abs() > T::TOL_MEDIUM {
            return Err(Error::DegenerateMarginal {
                reason: format!("probabilities sum to {}", sum.as_f64()),
            });
        }
        Ok(Self { probs })
    }

    pub fn p(&self) -> usize {
        self.probs.len()
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probs
    }

    pub fn prob(&self, label: usize) -> T {
        self.probs[label]
    }

    /// Most probable label; ties break toward the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate().skip(1) {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// A classical assignment: one label per variable, optionally resolved to
/// real values through a [`ValueMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration<T> {
    labels: Vec<usize>,
    values: Option<Vec<T>>,
}

impl<T: Real> Configuration<T> {
    pub fn from_labels(labels: Vec<usize>, p: usize) -> Result<Self> {
        for &label in &labels {
            if label >= p {
                return Err(Error::LabelOutOfRange { label, p });
            }
        }
        Ok(Self {
            labels,
            values: None,
        })
    }

    /// Attaches the real value of each label.
    pub fn resolve(mut self, vm: &ValueMap<T>) -> Result<Self> {
        let mut values = Vec::with_capacity(self.labels.len());
        for &label in &self.labels {
            values.push(vm.value(label)?);
        }
        self.values = Some(values);
        Ok(self)
    }

    pub(crate) fn set(&mut self, idx: usize, label: usize, value: T) {
        self.labels[idx] = label;
        if let Some(values) = &mut self.values {
            values[idx] = value;
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn values(&self) -> Option<&[T]> {
        self.values.as_deref()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Raw fidelities <psi_q| rho |psi_q> for every codebook state, unnormalized.
pub fn codebook_fidelities<T: Real>(
    rho: &ReducedDensityMatrix<T>,
    cb: &Codebook<T>,
) -> Result<Vec<T>> {
    let mut fids = Vec::with_capacity(cb.p());
    for n in cb.vectors() {
        fids.push(state_fidelity(n, rho)?);
    }
    Ok(fids)
}

fn normalize_fidelities<T: Real>(fids: Vec<T>, cb: &Codebook<T>) -> Result<MarginalDistribution<T>> {
    let sum: T = fids.iter().copied().sum();
    if cb.is_balanced() {
        let half_p = T::from_f64_lossy(cb.p() as f64 / 2.0);
        assert!(
            (sum - half_p).abs() <= T::TOL_LOOSE,
            "balanced codebook normalizer {} deviates from p/2 = {}",
            sum.as_f64(),
            half_p.as_f64()
        );
    }
    if sum <= T::zero() {
        return Err(Error::DegenerateFidelities);
    }
    MarginalDistribution::new(fids.into_iter().map(|f| f / sum).collect())
}

/// Marginal over labels from a reduced density matrix, via the matrix-element
/// fidelities <psi_q| rho |psi_q>.
pub fn marginal_from_rho<T: Real>(
    rho: &ReducedDensityMatrix<T>,
    cb: &Codebook<T>,
) -> Result<MarginalDistribution<T>> {
    rho.validate()?;
    normalize_fidelities(codebook_fidelities(rho, cb)?, cb)
}

/// Marginal over labels from a Bloch vector, via fidelities (1 + n_q . r)/2.
/// Matches [`marginal_from_rho`] when `r` is the Bloch vector of rho.
pub fn marginal_from_bloch<T: Real>(
    r: &BlochVector<T>,
    cb: &Codebook<T>,
) -> Result<MarginalDistribution<T>> {
    let norm = r.norm();
    if norm > T::one() + T::TOL_LOOSE {
        return Err(Error::BlochOutsideBall {
            norm: norm.as_f64(),
        });
    }
    let half = T::from_f64_lossy(0.5);
    let fids = cb
        .vectors()
        .iter()
        .map(|n| ((T::one() + n.dot(r)) * half).max(T::zero()))
        .collect();
    normalize_fidelities(fids, cb)
}

/// Per-qubit argmax decode; ties break toward the lowest label. Values are
/// resolved through the value map.
pub fn decode<T: Real>(
    marginals: &[MarginalDistribution<T>],
    vm: &ValueMap<T>,
) -> Result<Configuration<T>> {
    for m in marginals {
        if m.p() != vm.len() {
            return Err(Error::MarginalLength {
                expected: vm.len(),
                got: m.p(),
            });
        }
    }
    let labels = marginals.iter().map(|m| m.argmax()).collect();
    Configuration::from_labels(labels, vm.len())?.resolve(vm)
}
