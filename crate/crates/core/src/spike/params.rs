use std::ops::Range;
use std::sync::Arc;

use super::topology::NetworkTopology;
use crate::{Error, Result};

/// Offsets of each neuron's parameter block inside the flat vector.
///
/// Blocks are laid out neuron by neuron; inside a block come the bias, the
/// feedback weight, then `num_basis` weights per presynaptic neuron in the
/// topology's order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamLayout {
    num_basis: usize,
    offsets: Vec<usize>,
    fan_in: Vec<usize>,
}

impl ParamLayout {
    pub fn new(topology: &NetworkTopology, num_basis: usize) -> Self {
        let n = topology.num_neurons();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut fan_in = Vec::with_capacity(n);
        let mut at = 0;
        for neuron in 0..n {
            offsets.push(at);
            let k = topology.presynaptic(neuron).len();
            fan_in.push(k);
            at += 2 + num_basis * k;
        }
        offsets.push(at);
        Self {
            num_basis,
            offsets,
            fan_in,
        }
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn num_neurons(&self) -> usize {
        self.fan_in.len()
    }

    pub fn num_basis(&self) -> usize {
        self.num_basis
    }

    pub fn block(&self, n: usize) -> Range<usize> {
        self.offsets[n]..self.offsets[n + 1]
    }

    pub fn bias_index(&self, n: usize) -> usize {
        self.offsets[n]
    }

    pub fn feedback_index(&self, n: usize) -> usize {
        self.offsets[n] + 1
    }

    /// Range of the basis weights on the `j`-th incoming synapse of `n`.
    pub fn synapse(&self, n: usize, j: usize) -> Range<usize> {
        let start = self.offsets[n] + 2 + j * self.num_basis;
        start..start + self.num_basis
    }

    pub fn fan_in(&self, n: usize) -> usize {
        self.fan_in[n]
    }

    /// `(neuron, j, range)` for every synapse, in flat order.
    pub fn synapses(&self) -> impl Iterator<Item = (usize, usize, Range<usize>)> + '_ {
        (0..self.num_neurons())
            .flat_map(move |n| (0..self.fan_in[n]).map(move |j| (n, j, self.synapse(n, j))))
    }

    pub fn num_synapses(&self) -> usize {
        self.fan_in.iter().sum()
    }
}

/// Structured view of one neuron's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronParams {
    pub bias: f64,
    pub feedback: f64,
    /// One entry per presynaptic neuron, each with `num_basis` weights.
    pub synapses: Vec<Vec<f64>>,
}

/// Flat parameter vector θ together with its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    layout: Arc<ParamLayout>,
    values: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(layout: Arc<ParamLayout>) -> Self {
        let values = vec![0.0; layout.dim()];
        Self { layout, values }
    }

    pub fn from_flat(layout: Arc<ParamLayout>, values: Vec<f64>) -> Result<Self> {
        Error::check_dim("parameter vector", layout.dim(), values.len())?;
        Ok(Self { layout, values })
    }

    pub fn layout(&self) -> &Arc<ParamLayout> {
        &self.layout
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn bias(&self, n: usize) -> f64 {
        self.values[self.layout.bias_index(n)]
    }

    pub fn feedback_weight(&self, n: usize) -> f64 {
        self.values[self.layout.feedback_index(n)]
    }

    pub fn synapse(&self, n: usize, j: usize) -> &[f64] {
        &self.values[self.layout.synapse(n, j)]
    }

    pub fn block(&self, n: usize) -> &[f64] {
        &self.values[self.layout.block(n)]
    }

    pub fn to_neurons(&self) -> Vec<NeuronParams> {
        (0..self.layout.num_neurons())
            .map(|n| NeuronParams {
                bias: self.bias(n),
                feedback: self.feedback_weight(n),
                synapses: (0..self.layout.fan_in(n))
                    .map(|j| self.synapse(n, j).to_vec())
                    .collect(),
            })
            .collect()
    }

    pub fn from_neurons(layout: Arc<ParamLayout>, neurons: &[NeuronParams]) -> Result<Self> {
        Error::check_dim(
            "neuron parameter blocks",
            layout.num_neurons(),
            neurons.len(),
        )?;
        let mut values = Vec::with_capacity(layout.dim());
        for (n, p) in neurons.iter().enumerate() {
            Error::check_dim("synapses", layout.fan_in(n), p.synapses.len())?;
            values.push(p.bias);
            values.push(p.feedback);
            for w in &p.synapses {
                Error::check_dim("basis weights", layout.num_basis(), w.len())?;
                values.extend_from_slice(w);
            }
        }
        Ok(Self { layout, values })
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn layout() -> Arc<ParamLayout> {
        let t = NetworkTopology::fully_connected(3, 1, 2).unwrap();
        Arc::new(ParamLayout::new(&t, 4))
    }

    #[test]
    fn dimension_formula() {
        let l = layout();
        // 3 inputs with 2 each, 3 non-inputs with 2 + 4 * 5 each
        assert_eq!(l.dim(), 3 * 2 + 3 * (2 + 4 * 5));
        assert_eq!(l.num_synapses(), 15);
        assert_eq!(l.synapse(3, 0), 8..12);
        assert_eq!(l.synapses().count(), 15);
    }

    #[test]
    fn from_flat_checks_dim() {
        assert!(ModelParams::from_flat(layout(), vec![0.0; 3]).is_err());
    }

    proptest! {
        #[test]
        fn flatten_round_trip(values in proptest::collection::vec(-1e3f64..1e3, 72)) {
            let l = layout();
            let p = ModelParams::from_flat(l.clone(), values.clone()).unwrap();
            let back = ModelParams::from_neurons(l, &p.to_neurons()).unwrap();
            prop_assert_eq!(back.as_slice(), values.as_slice());
        }
    }
}
