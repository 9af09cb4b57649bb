use std::sync::Arc;

use super::basis::BasisSet;
use super::params::{ModelParams, ParamLayout};
use super::topology::{NetworkTopology, NeuronRole};
use super::trace::TraceState;
use crate::{Error, Result};

/// Topology, kernels and parameter layout shared by every device.
#[derive(Debug, Clone)]
pub struct Network {
    topology: NetworkTopology,
    basis: BasisSet,
    layout: Arc<ParamLayout>,
}

impl Network {
    pub fn new(topology: NetworkTopology, basis: BasisSet) -> Self {
        let layout = Arc::new(ParamLayout::new(&topology, basis.num_basis()));
        Self {
            topology,
            basis,
            layout,
        }
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn layout(&self) -> &Arc<ParamLayout> {
        &self.layout
    }

    pub fn num_neurons(&self) -> usize {
        self.topology.num_neurons()
    }

    pub fn role(&self, n: usize) -> NeuronRole {
        self.topology.role(n)
    }

    pub fn zero_params(&self) -> ModelParams {
        ModelParams::zeros(self.layout.clone())
    }

    pub fn fresh_traces(&self) -> TraceState {
        TraceState::new(self.num_neurons(), &self.basis)
    }

    pub fn check_params(&self, params: &ModelParams) -> Result<()> {
        if **params.layout() != *self.layout {
            return Err(Error::config("parameters do not match the network layout"));
        }
        Ok(())
    }

    /// `u_n(s) = Σ_k Σ_l w_{n,k}^l →o_k^l(s−1) + w_n ←o_n(s−1) + γ_n`, with
    /// `traces` holding history up to step `s − 1`.
    pub fn membrane_potential(&self, n: usize, params: &ModelParams, traces: &TraceState) -> f64 {
        let block = params.block(n);
        let k_a = self.basis.num_basis();
        let mut u = block[0] + block[1] * traces.feedback(n);
        for (j, &k) in self.topology.presynaptic(n).iter().enumerate() {
            let w = &block[2 + j * k_a..2 + (j + 1) * k_a];
            u += w
                .iter()
                .zip(traces.synaptic_all(k))
                .map(|(w, x)| w * x)
                .sum::<f64>();
        }
        u
    }

    /// Writes `∇_θn log p(o | u)` into `grad` (the block of neuron `n`):
    /// with `ε = o − σ(u)`, the bias entry is `ε`, the feedback entry is
    /// `ε ←o_n(s−1)` and each synaptic entry is `ε →o_k^l(s−1)`.
    pub fn accumulate_gradient(
        &self,
        n: usize,
        o: u8,
        u: f64,
        traces: &TraceState,
        grad: &mut [f64],
    ) {
        let eps = o as f64 - super::neuron::spike_probability(u);
        if eps == 0.0 {
            return;
        }
        let k_a = self.basis.num_basis();
        grad[0] += eps;
        grad[1] += eps * traces.feedback(n);
        for (j, &k) in self.topology.presynaptic(n).iter().enumerate() {
            let g = &mut grad[2 + j * k_a..2 + (j + 1) * k_a];
            for (g, x) in g.iter_mut().zip(traces.synaptic_all(k)) {
                *g += eps * x;
            }
        }
    }

    /// The gradient block of `log p(o | u)` for neuron `n` as a fresh vector.
    pub fn gradient_log_prob(&self, n: usize, o: u8, u: f64, traces: &TraceState) -> Vec<f64> {
        let mut g = vec![0.0; self.layout.block(n).len()];
        self.accumulate_gradient(n, o, u, traces, &mut g);
        g
    }
}
