//! Credit-based weighted temporal-fair opportunistic scheduler.
//!
//! Each slot the cell serves `j* = argmax_j (R_j + gamma * b_j)` and then
//! updates every credit `b_j += a_j - [j == j*]`. With `sum(a) = 1` the
//! credits always sum to zero and user `j`'s airtime share converges to
//! `a_j`; `gamma` trades opportunism (`gamma = 0`) against strict
//! round-robin behaviour (`gamma -> inf`).

use crate::error::{Error, Result};
use crate::geometry::NspId;
use crate::scalar::Scalar;

/// How weights are assigned to the users of one cell.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightRegime<T> {
    NoSharing,
    EqualSharing,
    /// Per-provider airtime weights, indexed by [`NspId::index`].
    WeightedSharing(NspWeights<T>),
}

impl<T: Scalar> WeightRegime<T> {
    pub fn weighted_duopoly(psi1: T) -> Result<Self> {
        Ok(WeightRegime::WeightedSharing(NspWeights::duopoly(psi1)?))
    }

    pub fn regime(&self) -> crate::SharingRegime {
        match self {
            WeightRegime::NoSharing => crate::SharingRegime::NoSharing,
            WeightRegime::EqualSharing => crate::SharingRegime::EqualSharing,
            WeightRegime::WeightedSharing(_) => crate::SharingRegime::WeightedSharing,
        }
    }

    /// psi_1 for weighted sharing.
    pub fn psi1(&self) -> Option<T> {
        match self {
            WeightRegime::WeightedSharing(w) => Some(w.get(NspId::FIRST)),
            _ => None,
        }
    }
}

/// Provider weights psi_i: non-negative, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct NspWeights<T>(Vec<T>);

impl<T: Scalar> NspWeights<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| *w < T::zero()) {
            return Err(Error::invalid("psi", "weights must be non-negative"));
        }
        let total = weights.iter().fold(T::zero(), |a, w| a + *w);
        if (total - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::invalid("psi", "weights must sum to 1"));
        }
        Ok(NspWeights(weights))
    }

    /// (psi_1, 1 - psi_1).
    pub fn duopoly(psi1: T) -> Result<Self> {
        if !(psi1 >= T::zero() && psi1 <= T::one()) {
            return Err(Error::invalid("psi1", "must lie in [0, 1]"));
        }
        Ok(NspWeights(vec![psi1, T::one() - psi1]))
    }

    pub fn get(&self, nsp: NspId) -> T {
        self.0.get(nsp.index()).copied().unwrap_or_else(T::zero)
    }
}

/// Per-user weights `a_j` for one cell.
///
/// No sharing and equal sharing give `1/N`. Weighted sharing gives
/// `psi_i / N_i` with `N_i` the provider's subscriber count in this cell;
/// when some provider has no subscribers here the weights are rescaled to
/// sum to one so the cell never idles. A cell whose present providers all
/// carry zero weight falls back to uniform.
pub fn compute_weights<T: Scalar>(cell_users: &[NspId], regime: &WeightRegime<T>) -> Vec<T> {
    let n = cell_users.len();
    if n == 0 {
        return Vec::new();
    }
    let uniform = || vec![T::one() / T::from_usize(n).unwrap(); n];
    match regime {
        WeightRegime::NoSharing | WeightRegime::EqualSharing => uniform(),
        WeightRegime::WeightedSharing(psi) => {
            let count = |nsp: NspId| cell_users.iter().filter(|u| **u == nsp).count();
            let raw: Vec<T> = cell_users
                .iter()
                .map(|&nsp| psi.get(nsp) / T::from_usize(count(nsp)).unwrap())
                .collect();
            let total = raw.iter().fold(T::zero(), |a, w| a + *w);
            if total <= T::zero() {
                return uniform();
            }
            raw.into_iter().map(|w| w / total).collect()
        }
    }
}

/// Credits, weights and credit coefficient of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulerState<T> {
    pub credits: Vec<T>,
    pub weights: Vec<T>,
    pub gamma: T,
}

impl<T: Scalar> SchedulerState<T> {
    /// Fresh state with all credits at zero.
    pub fn new(weights: Vec<T>, gamma: T) -> Result<Self> {
        if !(gamma >= T::zero()) {
            return Err(Error::invalid("gamma", "must be non-negative"));
        }
        Ok(SchedulerState {
            credits: vec![T::zero(); weights.len()],
            weights,
            gamma,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Picks the user to serve this slot and applies the credit update.
    /// Ties go to the lowest index.
    pub fn select(&mut self, rates: &[T]) -> Result<usize> {
        if self.weights.is_empty() {
            return Err(Error::EmptyCell);
        }
        if rates.len() != self.weights.len() {
            return Err(Error::LengthMismatch {
                rates: rates.len(),
                users: self.weights.len(),
            });
        }
        let mut best = 0;
        let mut best_metric = rates[0] + self.gamma * self.credits[0];
        for (j, (&r, &b)) in rates.iter().zip(&self.credits).enumerate().skip(1) {
            let metric = r + self.gamma * b;
            if metric > best_metric {
                best = j;
                best_metric = metric;
            }
        }
        for (b, &a) in self.credits.iter_mut().zip(&self.weights) {
            *b = *b + a;
        }
        self.credits[best] = self.credits[best] - T::one();
        Ok(best)
    }

    pub fn credit_sum(&self) -> T {
        self.credits.iter().fold(T::zero(), |a, b| a + *b)
    }
}

/// Fraction of slots each of `users` users was selected in `history`.
pub fn temporal_shares(history: &[usize], users: usize) -> Vec<f64> {
    let mut counts = vec![0usize; users];
    for &j in history {
        counts[j] += 1;
    }
    let total = history.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / total).collect()
}
