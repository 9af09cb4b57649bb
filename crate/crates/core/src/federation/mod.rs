//! Simulated base station: weighted averaging, sparse exchange and the
//! periodic synchronization schedule.

mod average;
mod sparse;
mod train;

pub use average::fed_average;
pub use sparse::{select_topk, sparse_merge, SparseUpdate, SynapseEntries};
pub use train::{
    run_federated_training, CommStats, DeviceData, ExchangePolicy, FederationConfig, RoundReport,
    TrainingOutcome,
};
