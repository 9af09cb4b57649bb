//! Discrete-time probabilistic GLM spiking neurons.
//!
//! Time is indexed by steps `s = 1, 2, ...`; there is no history before the
//! first step, so every trace starts at zero.

mod basis;
mod network;
mod neuron;
mod params;
mod record;
mod topology;
mod trace;

pub use basis::{make_raised_cosine_basis, raised_cosine, BasisSet};
pub use network::Network;
pub use neuron::{log_sigmoid, log_spike_probability, sample_spike, spike_probability};
pub use params::{ModelParams, NeuronParams, ParamLayout};
pub use record::SpikeRecord;
pub use topology::{NetworkTopology, NeuronRole};
pub use trace::TraceState;
