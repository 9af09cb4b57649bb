use rand_chacha::ChaCha8Rng;

use super::hyper::Hyperparams;
use crate::seed;
use crate::spike::{
    log_spike_probability, sample_spike, ModelParams, Network, NeuronRole, SpikeRecord, TraceState,
};
use crate::{Error, Result};

/// Per-device learner state: traces, eligibility, learning signal and the
/// device's own sampling stream.
#[derive(Debug, Clone)]
pub struct LearnerState {
    traces: TraceState,
    /// Same layout as the parameter vector.
    eligibility: Vec<f64>,
    window_grad: Vec<f64>,
    learning_signal: f64,
    rng: ChaCha8Rng,
    steps_done: usize,
    rounds_done: usize,
    potentials: Vec<f64>,
    spikes: Vec<u8>,
}

impl LearnerState {
    /// Fresh state with `ℓ(0) = 0`, `e(0) = 0` and empty spike history.
    pub fn new(network: &Network, rng: ChaCha8Rng) -> Self {
        let dim = network.layout().dim();
        let n = network.num_neurons();
        Self {
            traces: network.fresh_traces(),
            eligibility: vec![0.0; dim],
            window_grad: vec![0.0; dim],
            learning_signal: 0.0,
            rng,
            steps_done: 0,
            rounds_done: 0,
            potentials: vec![0.0; n],
            spikes: vec![0; n],
        }
    }

    pub fn traces(&self) -> &TraceState {
        &self.traces
    }

    pub fn eligibility(&self) -> &[f64] {
        &self.eligibility
    }

    /// Gradient sum accumulated by the last [`step_window`] call.
    pub fn window_gradient(&self) -> &[f64] {
        &self.window_grad
    }

    pub fn learning_signal(&self) -> f64 {
        self.learning_signal
    }

    pub fn steps_done(&self) -> usize {
        self.steps_done
    }

    pub fn rounds_done(&self) -> usize {
        self.rounds_done
    }

    /// Spikes emitted at the most recent step.
    pub fn last_spikes(&self) -> &[u8] {
        &self.spikes
    }
}

/// Runs the `Δs` steps of one window starting at stream column `start`.
///
/// At every step the potentials are computed from the traces of the previous
/// step, hidden neurons are sampled, visible neurons are clamped to `input`
/// and `target`, gradient terms for every neuron are added to the window
/// gradient, and the traces advance. Returns the summed log-probability of
/// the visible (input and output) spikes over the window.
pub fn step_window(
    network: &Network,
    params: &ModelParams,
    state: &mut LearnerState,
    input: &SpikeRecord,
    target: &SpikeRecord,
    start: usize,
    hyper: &Hyperparams,
) -> Result<f64> {
    let topo = network.topology();
    Error::check_dim("input neurons", topo.num_input(), input.num_neurons())?;
    Error::check_dim("output neurons", topo.num_output(), target.num_neurons())?;
    Error::check_dim("input/target steps", input.num_steps(), target.num_steps())?;
    let end = start + hyper.steps_per_round;
    if end > input.num_steps() {
        return Err(Error::Dimension {
            what: "window",
            expected: hyper.steps_per_round,
            actual: input.num_steps().saturating_sub(start),
        });
    }
    let layout = network.layout().clone();
    state.window_grad.fill(0.0);
    let mut log_prob = 0.0;
    let out0 = topo.outputs().start;

    for col in start..end {
        for n in 0..network.num_neurons() {
            state.potentials[n] = network.membrane_potential(n, params, &state.traces);
        }
        for n in 0..network.num_neurons() {
            let u = state.potentials[n];
            let o = match network.role(n) {
                NeuronRole::Input => input.get(n, col),
                NeuronRole::Output => target.get(n - out0, col),
                NeuronRole::Hidden => sample_spike(u, &mut state.rng),
            };
            state.spikes[n] = o;
            if network.role(n).is_visible() {
                log_prob += log_spike_probability(o, u);
            }
            let block = layout.block(n);
            network.accumulate_gradient(n, o, u, &state.traces, &mut state.window_grad[block]);
        }
        state.traces.update(network.basis(), &state.spikes)?;
        state.steps_done += 1;
    }
    Ok(log_prob)
}

/// `ℓ(t) = κ ℓ(t−1) + (1 − κ) · window_log_prob`.
pub fn update_learning_signal(prev: f64, window_log_prob: f64, decay: f64) -> f64 {
    decay * prev + (1.0 - decay) * window_log_prob
}

/// `e(t) = κ e(t−1) + (1 − κ) · window_gradient`, elementwise in place.
pub fn update_eligibility(
    eligibility: &mut [f64],
    window_gradient: &[f64],
    decay: f64,
) -> Result<()> {
    Error::check_dim("eligibility", eligibility.len(), window_gradient.len())?;
    for (e, g) in eligibility.iter_mut().zip(window_gradient) {
        *e = decay * *e + (1.0 - decay) * g;
    }
    Ok(())
}

/// The step applied to θ: `α e_n` for visible neurons and `α ℓ e_n` for
/// hidden neurons. The step ascends the log-probability.
pub fn local_update_delta(
    network: &Network,
    eligibility: &[f64],
    learning_signal: f64,
    learning_rate: f64,
) -> Result<Vec<f64>> {
    let layout = network.layout();
    Error::check_dim("eligibility", layout.dim(), eligibility.len())?;
    let mut delta = vec![0.0; layout.dim()];
    for n in 0..network.num_neurons() {
        let gate = match network.role(n) {
            NeuronRole::Hidden => learning_signal,
            _ => 1.0,
        };
        let scale = learning_rate * gate;
        let block = layout.block(n);
        for (d, e) in delta[block.clone()].iter_mut().zip(&eligibility[block]) {
            *d = scale * e;
        }
    }
    Ok(delta)
}

/// `θ(t) = θ̃(t−1) + delta` with the delta from [`local_update_delta`].
pub fn apply_local_update(
    network: &Network,
    params: &mut ModelParams,
    eligibility: &[f64],
    learning_signal: f64,
    learning_rate: f64,
) -> Result<Vec<f64>> {
    let delta = local_update_delta(network, eligibility, learning_signal, learning_rate)?;
    for (p, d) in params.as_mut_slice().iter_mut().zip(&delta) {
        *p += d;
    }
    Ok(delta)
}

#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub window_log_prob: f64,
    pub learning_signal: f64,
    /// Update applied to the parameters this round.
    pub delta: Vec<f64>,
}

/// Parameters plus learner state of one device.
#[derive(Debug, Clone)]
pub struct DeviceLearner {
    pub params: ModelParams,
    pub state: LearnerState,
}

impl DeviceLearner {
    pub fn new(network: &Network, params: ModelParams, rng: ChaCha8Rng) -> Result<Self> {
        network.check_params(&params)?;
        Ok(Self {
            params,
            state: LearnerState::new(network, rng),
        })
    }

    /// One global round on window `t = rounds_done + 1` of the streams.
    pub fn run_round(
        &mut self,
        network: &Network,
        hyper: &Hyperparams,
        input: &SpikeRecord,
        target: &SpikeRecord,
    ) -> Result<RoundOutcome> {
        let start = self.state.rounds_done * hyper.steps_per_round;
        let window_log_prob = step_window(
            network,
            &self.params,
            &mut self.state,
            input,
            target,
            start,
            hyper,
        )?;
        let state = &mut self.state;
        state.learning_signal =
            update_learning_signal(state.learning_signal, window_log_prob, hyper.trace_decay);
        update_eligibility(
            &mut state.eligibility,
            &state.window_grad,
            hyper.trace_decay,
        )?;
        let delta = apply_local_update(
            network,
            &mut self.params,
            &state.eligibility,
            state.learning_signal,
            hyper.learning_rate,
        )?;
        state.rounds_done += 1;
        Ok(RoundOutcome {
            window_log_prob,
            learning_signal: state.learning_signal,
            delta,
        })
    }
}

/// Trains one device on its own streams with no federation, calling
/// `observer(t, θ(t))` after every round. Uses the same sampling stream as
/// device 0 of a federated run with the same seed.
pub fn train_standalone<F>(
    network: &Network,
    hyper: &Hyperparams,
    initial: ModelParams,
    input: &SpikeRecord,
    target: &SpikeRecord,
    seed: u64,
    mut observer: F,
) -> Result<ModelParams>
where
    F: FnMut(usize, &ModelParams),
{
    hyper.validate()?;
    let rounds = hyper.rounds_for(input.num_steps())?;
    let mut learner = DeviceLearner::new(network, initial, seed::device_rng(seed, 0))?;
    for t in 1..=rounds {
        learner.run_round(network, hyper, input, target)?;
        observer(t, &learner.params);
    }
    Ok(learner.params)
}
