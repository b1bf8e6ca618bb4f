//! Per-cell particle counts plus the ghost ledger for out-of-domain births.

use serde::{Deserialize, Serialize};

/// Cell totals N_i together with a ledger for aggregates born beyond the
/// truncated domain. Ghost quantities live beside N, never inside it, so
/// the discrete L1 norm stays the I-component sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub n: Vec<f64>,
    pub ghost_count: f64,
    pub ghost_mass: f64,
}

impl StateVector {
    pub fn zeros(cells: usize) -> Self {
        Self { n: vec![0.0; cells], ghost_count: 0.0, ghost_mass: 0.0 }
    }

    pub fn from_counts(n: Vec<f64>) -> Self {
        Self { n, ghost_count: 0.0, ghost_mass: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    pub fn min_count(&self) -> f64 {
        self.n.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_count(&self) -> f64 {
        self.n.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// self += scale * other, ghost ledger included.
    pub fn axpy(&mut self, scale: f64, other: &StateVector) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.n.iter_mut().zip(&other.n) {
            *a += scale * b;
        }
        self.ghost_count += scale * other.ghost_count;
        self.ghost_mass += scale * other.ghost_mass;
    }
}
