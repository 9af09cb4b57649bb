use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    /// α
    pub learning_rate: f64,
    /// κ, decay of the learning signal and eligibility traces.
    pub trace_decay: f64,
    /// Δs, network steps per global round.
    pub steps_per_round: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            trace_decay: 0.2,
            steps_per_round: 5,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.trace_decay) {
            return Err(Error::config("trace_decay must lie in [0, 1)"));
        }
        if self.steps_per_round == 0 {
            return Err(Error::config("steps_per_round must be at least 1"));
        }
        Ok(())
    }

    /// Number of global rounds covering a stream of `num_steps` steps.
    pub fn rounds_for(&self, num_steps: usize) -> Result<usize> {
        if !num_steps.is_multiple_of(self.steps_per_round) {
            return Err(Error::config(format!(
                "stream length {num_steps} is not a multiple of steps_per_round {}",
                self.steps_per_round
            )));
        }
        Ok(num_steps / self.steps_per_round)
    }
}
