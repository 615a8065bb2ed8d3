use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Iteration budget, stopping rule and seed shared by every solver.
///
/// A solve stops after `max_iters` iterations, or once
/// `|E_t − E_{t−1}| / max(E_{t−1}, epsilon) < rel_tol`, or when the fit is exact
/// to working precision (`E_t ≤ epsilon · ‖data‖_F`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub seed: u64,
    /// Guard for denominators and the floor for rescued factor columns.
    pub epsilon: f64,
    /// Number of independent restarts for the best-of wrappers.
    pub restarts: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iters: 500, rel_tol: 1e-8, seed: 0, epsilon: 1e-12, restarts: 1 }
    }
}

impl SolverOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidOptions("max_iters must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidOptions(format!("rel_tol must be positive, got {}", self.rel_tol)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidOptions(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidOptions("restarts must be at least 1".into()));
        }
        Ok(())
    }

    /// Stopping test after an iteration with error `current`; `prev` is the
    /// previous iteration's error, if any.
    pub(crate) fn converged(&self, prev: Option<f64>, current: f64, data_norm: f64) -> bool {
        if current <= self.epsilon * data_norm {
            return true;
        }
        match prev {
            Some(prev) => (current - prev).abs() / prev.max(self.epsilon) < self.rel_tol,
            None => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let o = SolverOptions::default();
        assert_eq!((o.max_iters, o.rel_tol, o.epsilon), (500, 1e-8, 1e-12));
        o.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        assert!(SolverOptions::default().with_max_iters(0).validate().is_err());
        assert!(SolverOptions::default().with_rel_tol(0.0).validate().is_err());
        assert!(SolverOptions::default().with_rel_tol(f64::NAN).validate().is_err());
        assert!(SolverOptions { epsilon: -1.0, ..Default::default() }.validate().is_err());
        assert!(SolverOptions::default().with_restarts(0).validate().is_err());
    }

    #[test]
    fn stopping_rule() {
        let o = SolverOptions::default();
        assert!(o.converged(Some(1.0), 1.0 - 1e-9, 10.0));
        assert!(!o.converged(Some(1.0), 0.9, 10.0));
        assert!(o.converged(Some(0.5), 0.0, 10.0));
        assert!(o.converged(None, 0.0, 0.0));
        assert!(!o.converged(None, 0.5, 10.0));
        assert!(o.converged(None, 1e-14, 100.0));
    }
}
