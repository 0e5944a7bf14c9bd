use super::step_size::{default_inner_steps, inner_step};
use crate::error::{Error, Result};
use crate::Vector;

/// Shape and step sizes of one simulated federated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Number of clients M.
    pub clients: usize,
    /// Local steps per round K.
    pub local_steps: usize,
    /// Communication rounds R.
    pub rounds: usize,
    /// Inner proximal steps H; `None` uses `⌈log₄(KR)⌉ + 2`.
    pub inner_steps: Option<usize>,
    pub eta: f64,
    /// Inner step γ; `None` derives `1/(η(L + 1/η)²)`.
    pub gamma: Option<f64>,
    /// Smoothing radius δ (SLIPPAX).
    pub delta: f64,
    /// Gap ball radius D.
    pub radius: f64,
    pub master_seed: u64,
    /// Rounds between trajectory records; `None` means `max(1, R/20)`.
    pub log_every: Option<usize>,
    /// Common starting point for every client (zero when absent).
    pub init: Option<Vector>,
}

impl RunConfig {
    pub fn new(clients: usize, local_steps: usize, rounds: usize, eta: f64) -> Self {
        Self {
            clients,
            local_steps,
            rounds,
            inner_steps: None,
            eta,
            gamma: None,
            delta: 0.0,
            radius: 1.0,
            master_seed: 0,
            log_every: None,
            init: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_init(mut self, init: Vector) -> Self {
        self.init = Some(init);
        self
    }

    pub fn with_inner(mut self, steps: usize, gamma: Option<f64>) -> Self {
        self.inner_steps = Some(steps);
        self.gamma = gamma;
        self
    }

    pub fn with_log_every(mut self, every: usize) -> Self {
        self.log_every = Some(every);
        self
    }

    /// Total iterations `T = K·R`.
    pub fn total_steps(&self) -> usize {
        self.local_steps * self.rounds
    }

    pub fn inner_steps_or_default(&self) -> usize {
        self.inner_steps
            .unwrap_or_else(|| default_inner_steps(self.local_steps, self.rounds))
    }

    pub fn gamma_for(&self, lipschitz: f64) -> f64 {
        self.gamma.unwrap_or_else(|| inner_step(self.eta, lipschitz))
    }

    pub fn log_every_or_default(&self) -> usize {
        self.log_every.unwrap_or((self.rounds / 20).max(1))
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.clients == 0 {
            return Err(Error::param("M", "need at least one client"));
        }
        if self.local_steps == 0 {
            return Err(Error::param("K", "need at least one local step"));
        }
        if self.rounds == 0 {
            return Err(Error::param("R", "need at least one round"));
        }
        if self.inner_steps == Some(0) {
            return Err(Error::param("H", "need at least one inner step"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::param("eta", "must be positive and finite"));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::param("gamma", "must be positive and finite"));
            }
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::param("delta", "must be finite and nonnegative"));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::param("D", "must be positive and finite"));
        }
        if self.log_every == Some(0) {
            return Err(Error::param("log_every", "must be at least 1"));
        }
        if let Some(init) = &self.init {
            Error::check_dim(dim, init.len())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = RunConfig::new(2, 4, 100, 0.1);
        assert_eq!(cfg.total_steps(), 400);
        assert_eq!(cfg.log_every_or_default(), 5);
        assert_eq!(cfg.inner_steps_or_default(), 7);
        let g = cfg.gamma_for(2.0);
        assert!((g - 1.0 / (0.1 * 12.0f64.powi(2))).abs() < 1e-15);
        assert!(cfg.validate(3).is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let base = RunConfig::new(1, 1, 1, 0.1);
        assert!(RunConfig {
            clients: 0,
            ..base.clone()
        }
        .validate(1)
        .is_err());
        assert!(RunConfig {
            eta: 0.0,
            ..base.clone()
        }
        .validate(1)
        .is_err());
        assert!(RunConfig {
            delta: -1.0,
            ..base.clone()
        }
        .validate(1)
        .is_err());
        assert!(RunConfig {
            radius: 0.0,
            ..base.clone()
        }
        .validate(1)
        .is_err());
        assert!(RunConfig {
            inner_steps: Some(0),
            ..base.clone()
        }
        .validate(1)
        .is_err());
        assert!(base.clone().with_init(Vector::zeros(2)).validate(1).is_err());
    }
}
