//! Online three-factor learning on a single device.
//!
//! Each global round covers `Δs` network steps. During a round the learner
//! clamps input and output neurons to data, samples hidden neurons, and sums
//! per-parameter log-probability gradients. At the end of the round the
//! learning signal and eligibility traces are low-pass filtered with decay
//! `κ`, and parameters move along the eligibility traces (gated by the
//! learning signal for hidden neurons).

mod eval;
mod hyper;
mod learner;

pub use eval::{classify, decode_counts, evaluate_log_loss, output_spike_counts};
pub use hyper::Hyperparams;
pub use learner::{
    apply_local_update, local_update_delta, step_window, train_standalone, update_eligibility,
    update_learning_signal, DeviceLearner, LearnerState, RoundOutcome,
};
