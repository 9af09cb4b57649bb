use std::ops::Range;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeuronRole {
    Input,
    Hidden,
    Output,
}

impl NeuronRole {
    /// Input and output neurons are clamped to data during training.
    pub fn is_visible(self) -> bool {
        !matches!(self, NeuronRole::Hidden)
    }
}

/// Directed synapse graph over neurons `0..N_V`, numbered inputs first, then
/// hidden, then outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkTopology {
    num_input: usize,
    num_hidden: usize,
    num_output: usize,
    presynaptic: Vec<Vec<usize>>,
}

impl NetworkTopology {
    /// Builds a topology from explicit presynaptic lists, one per neuron.
    ///
    /// Input neurons must have no incoming synapses; self-synapses and repeated
    /// sources are rejected (self-memory goes through the feedback trace).
    pub fn new(
        num_input: usize,
        num_hidden: usize,
        num_output: usize,
        presynaptic: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let n = num_input + num_hidden + num_output;
        if n == 0 {
            return Err(Error::config("network must have at least one neuron"));
        }
        Error::check_dim("presynaptic sets", n, presynaptic.len())?;
        for (target, sources) in presynaptic.iter().enumerate() {
            if target < num_input && !sources.is_empty() {
                return Err(Error::config(format!(
                    "input neuron {target} cannot receive synapses"
                )));
            }
            for (i, &k) in sources.iter().enumerate() {
                if k >= n {
                    return Err(Error::config(format!(
                        "synapse {k} -> {target} references a missing neuron"
                    )));
                }
                if k == target {
                    return Err(Error::config(format!("self-synapse on neuron {target}")));
                }
                if sources[..i].contains(&k) {
                    return Err(Error::config(format!("duplicate synapse {k} -> {target}")));
                }
            }
        }
        Ok(Self {
            num_input,
            num_hidden,
            num_output,
            presynaptic,
        })
    }

    /// Every input projects to every non-input neuron, and hidden and output
    /// neurons are all-to-all connected among themselves.
    pub fn fully_connected(num_input: usize, num_hidden: usize, num_output: usize) -> Result<Self> {
        let n = num_input + num_hidden + num_output;
        let presynaptic = (0..n)
            .map(|target| {
                if target < num_input {
                    Vec::new()
                } else {
                    (0..n).filter(|&k| k != target).collect()
                }
            })
            .collect();
        Self::new(num_input, num_hidden, num_output, presynaptic)
    }

    pub fn num_input(&self) -> usize {
        self.num_input
    }

    pub fn num_hidden(&self) -> usize {
        self.num_hidden
    }

    pub fn num_output(&self) -> usize {
        self.num_output
    }

    pub fn num_neurons(&self) -> usize {
        self.num_input + self.num_hidden + self.num_output
    }

    pub fn inputs(&self) -> Range<usize> {
        0..self.num_input
    }

    pub fn hidden(&self) -> Range<usize> {
        self.num_input..self.num_input + self.num_hidden
    }

    pub fn outputs(&self) -> Range<usize> {
        self.num_input + self.num_hidden..self.num_neurons()
    }

    pub fn role(&self, n: usize) -> NeuronRole {
        if n < self.num_input {
            NeuronRole::Input
        } else if n < self.num_input + self.num_hidden {
            NeuronRole::Hidden
        } else {
            NeuronRole::Output
        }
    }

    pub fn presynaptic(&self, n: usize) -> &[usize] {
        &self.presynaptic[n]
    }

    pub fn num_synapses(&self) -> usize {
        self.presynaptic.iter().map(Vec::len).sum()
    }
}
