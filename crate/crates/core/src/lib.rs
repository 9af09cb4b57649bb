//! Federated training of probabilistic spiking neural networks.
//!
//! Each simulated device runs a discrete-time network of GLM spiking neurons
//! and learns online with eligibility traces gated by a per-device learning
//! signal. Every `tau` global rounds the devices exchange parameters (all of
//! them, or a top-k subset of the synaptic basis weights) through an in-process
//! base station that merges them by dataset-size weighted averaging.
//!
//! Modules, bottom-up:
//!
//! * [`spike`]: topology, basis kernels, parameters, traces and the neuron model.
//! * [`learning`]: the local learner and evaluation.
//! * [`federation`]: averaging, sparse exchange and the training schedule.
//! * [`data`]: spike encoders, synthetic non-IID data and the raster file format.
//! * [`experiment`]: run configuration, experiment runner, sweeps and CSV metrics.

pub mod data;
pub mod error;
pub mod experiment;
pub mod federation;
pub mod learning;
pub mod seed;
pub mod spike;

pub use error::{Error, Result};
