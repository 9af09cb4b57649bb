use super::basis::BasisSet;
use crate::{Error, Result};

/// Filtered spike traces for one simulated network.
///
/// After [`TraceState::update`] with the spikes of step `s`,
/// `synaptic(k, l) = Σ_{j=1..W} a_l(j) o_k(s − j + 1)` and
/// `feedback(n) = Σ_{j=1..W} b(j) o_n(s − j + 1)`. The synaptic trace of a
/// source neuron does not depend on the target, so it is stored once per source.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceState {
    num_neurons: usize,
    num_basis: usize,
    window_len: usize,
    /// `num_neurons x window_len` ring of past spikes.
    history: Vec<u8>,
    /// Slot of the most recent step.
    head: usize,
    synaptic: Vec<f64>,
    feedback: Vec<f64>,
}

impl TraceState {
    pub fn new(num_neurons: usize, basis: &BasisSet) -> Self {
        let window_len = basis.window_len();
        Self {
            num_neurons,
            num_basis: basis.num_basis(),
            window_len,
            history: vec![0; num_neurons * window_len],
            head: window_len - 1,
            synaptic: vec![0.0; num_neurons * basis.num_basis()],
            feedback: vec![0.0; num_neurons],
        }
    }

    pub fn num_neurons(&self) -> usize {
        self.num_neurons
    }

    pub fn synaptic(&self, k: usize, l: usize) -> f64 {
        self.synaptic[k * self.num_basis + l]
    }

    /// All `num_basis` synaptic traces of source neuron `k`.
    pub fn synaptic_all(&self, k: usize) -> &[f64] {
        &self.synaptic[k * self.num_basis..(k + 1) * self.num_basis]
    }

    pub fn feedback(&self, n: usize) -> f64 {
        self.feedback[n]
    }

    /// Spike of neuron `n` at `lag` steps before the next one (`lag = 1` is
    /// the most recent step).
    pub fn past_spike(&self, n: usize, lag: usize) -> u8 {
        let slot = (self.head + self.window_len + 1 - lag) % self.window_len;
        self.history[n * self.window_len + slot]
    }

    /// Advances by one step with the given spikes and recomputes every trace
    /// from the ring buffer.
    pub fn update(&mut self, basis: &BasisSet, spikes: &[u8]) -> Result<()> {
        Error::check_dim("spike vector", self.num_neurons, spikes.len())?;
        Error::check_dim("basis window", self.window_len, basis.window_len())?;
        Error::check_dim("basis count", self.num_basis, basis.num_basis())?;
        let w = self.window_len;
        self.head = (self.head + 1) % w;
        for (n, &o) in spikes.iter().enumerate() {
            self.history[n * w + self.head] = o;
        }
        for n in 0..self.num_neurons {
            let syn = &mut self.synaptic[n * self.num_basis..(n + 1) * self.num_basis];
            syn.fill(0.0);
            let mut fb = 0.0;
            for lag in 1..=w {
                let slot = (self.head + w + 1 - lag) % w;
                if self.history[n * w + slot] != 0 {
                    for (l, t) in syn.iter_mut().enumerate() {
                        *t += basis.value(l, lag);
                    }
                    fb += basis.feedback(lag);
                }
            }
            self.feedback[n] = fb;
        }
        Ok(())
    }
}
