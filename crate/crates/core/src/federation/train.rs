use log::debug;
use rayon::prelude::*;

use super::average::fed_average;
use super::sparse::{sparse_merge, SparseUpdate};
use crate::learning::{DeviceLearner, Hyperparams};
use crate::seed;
use crate::spike::{ModelParams, Network, SpikeRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExchangePolicy {
    /// Upload every parameter at each sync.
    Dense,
    /// Upload `round(rate · τ)` basis weights per synapse at each sync.
    TopK { rate: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FederationConfig {
    pub num_devices: usize,
    /// `|D_i|`, the averaging weight of each device.
    pub dataset_sizes: Vec<u64>,
    /// τ. `None` disables synchronization (separate training).
    pub sync_period: Option<usize>,
    pub total_rounds: usize,
    pub policy: ExchangePolicy,
}

impl FederationConfig {
    /// Basis weights kept per synapse under the top-k policy.
    pub fn kept_per_synapse(&self) -> Option<usize> {
        match (self.policy, self.sync_period) {
            (ExchangePolicy::TopK { rate }, Some(tau)) => {
                Some((rate * tau as f64).round() as usize)
            }
            _ => None,
        }
    }

    pub fn validate(&self, num_basis: usize) -> Result<()> {
        if self.num_devices == 0 {
            return Err(Error::config("at least one device is required"));
        }
        Error::check_dim("dataset sizes", self.num_devices, self.dataset_sizes.len())?;
        if self.dataset_sizes.contains(&0) {
            return Err(Error::config("every device needs a non-empty dataset"));
        }
        if self.sync_period == Some(0) {
            return Err(Error::config("tau must be at least 1"));
        }
        if self.total_rounds == 0 {
            return Err(Error::config("total_rounds must be at least 1"));
        }
        if let ExchangePolicy::TopK { rate } = self.policy {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::config("sparse rate must be positive"));
            }
            if let Some(k) = self.kept_per_synapse() {
                if k < 1 || k > num_basis {
                    return Err(Error::config(format!(
                        "rate * tau rounds to {k} weights per synapse; need 1..={num_basis}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_sync_round(&self, t: usize) -> bool {
        self.sync_period.is_some_and(|tau| t.is_multiple_of(tau))
    }
}

/// Training streams of one device, `T · Δs` steps long.
#[derive(Debug, Clone)]
pub struct DeviceData {
    pub input: SpikeRecord,
    pub target: SpikeRecord,
}

/// Cumulative communication counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommStats {
    pub syncs: u64,
    /// Parameter values uploaded by each device.
    pub uploaded: Vec<u64>,
    /// Basis indices uploaded by each device (sparse policy only).
    pub index_entries: Vec<u64>,
    /// Values broadcast by the base station, summed over receiving devices.
    pub broadcast: u64,
}

impl CommStats {
    fn new(num_devices: usize) -> Self {
        Self {
            uploaded: vec![0; num_devices],
            index_entries: vec![0; num_devices],
            ..Default::default()
        }
    }

    pub fn total_uploaded(&self) -> u64 {
        self.uploaded.iter().sum()
    }

    pub fn total_index_entries(&self) -> u64 {
        self.index_entries.iter().sum()
    }

    /// Uploaded plus broadcast values.
    pub fn total_entries(&self) -> u64 {
        self.total_uploaded() + self.broadcast
    }
}

/// State visible to observers after every global round.
#[derive(Debug)]
pub struct RoundReport<'a> {
    pub round: usize,
    pub synced: bool,
    pub learners: &'a [DeviceLearner],
    pub comm: &'a CommStats,
}

impl RoundReport<'_> {
    pub fn learning_signals(&self) -> Vec<f64> {
        self.learners
            .iter()
            .map(|l| l.state.learning_signal())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    /// `θ(T)` when the last round was a sync round.
    pub global: Option<ModelParams>,
    /// Final per-device parameters `θ̃_i(T)`.
    pub device_params: Vec<ModelParams>,
    /// Dense weighted average of `device_params`.
    pub average: ModelParams,
    pub comm: CommStats,
    /// Learning signal of every device after every round.
    pub learning_signals: Vec<Vec<f64>>,
}

impl TrainingOutcome {
    /// `θ(T)` if available, otherwise the dense average of the devices.
    pub fn final_params(&self) -> &ModelParams {
        self.global.as_ref().unwrap_or(&self.average)
    }
}

/// Runs `T` global rounds of federated training.
///
/// Every device starts from `initial` and samples with its own stream seeded
/// from `seed ^ device_id`. In round `t` each device runs one window of its
/// streams and applies its local update; when `t` is a multiple of τ, the
/// base station merges the uploads and every device continues from the
/// merged parameters. `observer` sees the state after every round.
pub fn run_federated_training<F>(
    network: &Network,
    hyper: &Hyperparams,
    config: &FederationConfig,
    initial: &ModelParams,
    devices: &[DeviceData],
    seed: u64,
    mut observer: F,
) -> Result<TrainingOutcome>
where
    F: FnMut(&RoundReport<'_>) -> Result<()>,
{
    hyper.validate()?;
    config.validate(network.basis().num_basis())?;
    network.check_params(initial)?;
    Error::check_dim("devices", config.num_devices, devices.len())?;
    let steps = config.total_rounds * hyper.steps_per_round;
    for d in devices {
        Error::check_dim(
            "input neurons",
            network.topology().num_input(),
            d.input.num_neurons(),
        )?;
        Error::check_dim(
            "output neurons",
            network.topology().num_output(),
            d.target.num_neurons(),
        )?;
        if d.input.num_steps() != steps || d.target.num_steps() != steps {
            return Err(Error::config(format!(
                "device stream has {} steps but T * steps_per_round = {steps}",
                d.input.num_steps()
            )));
        }
    }

    let mut learners = (0..config.num_devices)
        .map(|i| DeviceLearner::new(network, initial.clone(), seed::device_rng(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let kept = config.kept_per_synapse();
    let dim = network.layout().dim();
    let mut applied = vec![
        vec![0.0; dim];
        if kept.is_some() {
            config.num_devices
        } else {
            0
        }
    ];
    let mut comm = CommStats::new(config.num_devices);
    let mut learning_signals = Vec::with_capacity(config.total_rounds);
    let mut global = None;

    for t in 1..=config.total_rounds {
        let deltas = learners
            .par_iter_mut()
            .zip(devices)
            .map(|(learner, data)| {
                learner
                    .run_round(network, hyper, &data.input, &data.target)
                    .map(|o| o.delta)
            })
            .collect::<Result<Vec<_>>>()?;
        for (acc, delta) in applied.iter_mut().zip(&deltas) {
            for (a, d) in acc.iter_mut().zip(delta) {
                *a += d;
            }
        }

        let synced = config.is_sync_round(t);
        if synced {
            let merged = match kept {
                None => {
                    let view: Vec<(&[f64], u64)> = learners
                        .iter()
                        .zip(&config.dataset_sizes)
                        .map(|(l, &w)| (l.params.as_slice(), w))
                        .collect();
                    for u in comm.uploaded.iter_mut() {
                        *u += dim as u64;
                    }
                    ModelParams::from_flat(network.layout().clone(), fed_average(&view)?)?
                }
                Some(k) => {
                    let uploads = learners
                        .iter()
                        .zip(&applied)
                        .map(|(l, acc)| SparseUpdate::select(&l.params, acc, k))
                        .collect::<Result<Vec<_>>>()?;
                    for (i, u) in uploads.iter().enumerate() {
                        comm.uploaded[i] += u.value_entries() as u64;
                        comm.index_entries[i] += u.index_entries() as u64;
                    }
                    for acc in applied.iter_mut() {
                        acc.fill(0.0);
                    }
                    sparse_merge(network.layout(), &uploads, &config.dataset_sizes)?
                }
            };
            comm.syncs += 1;
            comm.broadcast += (config.num_devices * dim) as u64;
            for l in learners.iter_mut() {
                l.params.clone_from(&merged);
            }
            debug!("round {t}: synchronized {} devices", config.num_devices);
            if t == config.total_rounds {
                global = Some(merged);
            }
        }

        learning_signals.push(learners.iter().map(|l| l.state.learning_signal()).collect());
        observer(&RoundReport {
            round: t,
            synced,
            learners: &learners,
            comm: &comm,
        })?;
    }

    let view: Vec<(&[f64], u64)> = learners
        .iter()
        .zip(&config.dataset_sizes)
        .map(|(l, &w)| (l.params.as_slice(), w))
        .collect();
    let average = ModelParams::from_flat(network.layout().clone(), fed_average(&view)?)?;
    Ok(TrainingOutcome {
        global,
        device_params: learners.into_iter().map(|l| l.params).collect(),
        average,
        comm,
        learning_signals,
    })
}
