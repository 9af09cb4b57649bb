use rand::Rng;

use crate::spike::{
    log_spike_probability, sample_spike, ModelParams, Network, NeuronRole, SpikeRecord,
};
use crate::{Error, Result};

fn check_example(
    network: &Network,
    input: &SpikeRecord,
    target: Option<&SpikeRecord>,
) -> Result<()> {
    let topo = network.topology();
    Error::check_dim("input neurons", topo.num_input(), input.num_neurons())?;
    if let Some(target) = target {
        Error::check_dim("output neurons", topo.num_output(), target.num_neurons())?;
        Error::check_dim("target steps", input.num_steps(), target.num_steps())?;
    }
    Ok(())
}

/// One pass over an example from empty history with inputs and outputs
/// clamped and hidden neurons sampled; returns `−Σ_s Σ_{n∈Y} log p(y_n(s) | u_n(s))`.
fn clamped_output_loss<R: Rng + ?Sized>(
    network: &Network,
    params: &ModelParams,
    input: &SpikeRecord,
    target: &SpikeRecord,
    rng: &mut R,
) -> Result<f64> {
    let n_total = network.num_neurons();
    let out0 = network.topology().outputs().start;
    let mut traces = network.fresh_traces();
    let mut spikes = vec![0u8; n_total];
    let mut potentials = vec![0.0; n_total];
    let mut loss = 0.0;
    for col in 0..input.num_steps() {
        for n in network.topology().num_input()..n_total {
            potentials[n] = network.membrane_potential(n, params, &traces);
        }
        for n in 0..n_total {
            spikes[n] = match network.role(n) {
                NeuronRole::Input => input.get(n, col),
                NeuronRole::Hidden => sample_spike(potentials[n], rng),
                NeuronRole::Output => {
                    let y = target.get(n - out0, col);
                    loss -= log_spike_probability(y, potentials[n]);
                    y
                }
            };
        }
        traces.update(network.basis(), &spikes)?;
    }
    Ok(loss)
}

/// Test log-loss of one example.
///
/// Without hidden neurons this is the exact negative output log-probability
/// given clamped inputs and outputs, and `rng` is not used. With hidden
/// neurons it is the average over `num_samples` runs with hidden spikes
/// sampled from the model; the average upper-bounds the exact log-loss in
/// expectation.
pub fn evaluate_log_loss<R: Rng + ?Sized>(
    network: &Network,
    params: &ModelParams,
    input: &SpikeRecord,
    target: &SpikeRecord,
    num_samples: usize,
    rng: &mut R,
) -> Result<f64> {
    if num_samples == 0 {
        return Err(Error::config("num_samples must be at least 1"));
    }
    network.check_params(params)?;
    check_example(network, input, Some(target))?;
    if network.topology().num_hidden() == 0 {
        return clamped_output_loss(network, params, input, target, rng);
    }
    let mut total = 0.0;
    for _ in 0..num_samples {
        total += clamped_output_loss(network, params, input, target, rng)?;
    }
    Ok(total / num_samples as f64)
}

/// Spike counts of the output neurons with inputs clamped and every other
/// neuron free-running.
pub fn output_spike_counts<R: Rng + ?Sized>(
    network: &Network,
    params: &ModelParams,
    input: &SpikeRecord,
    rng: &mut R,
) -> Result<Vec<usize>> {
    network.check_params(params)?;
    check_example(network, input, None)?;
    let topo = network.topology();
    let n_total = network.num_neurons();
    let mut traces = network.fresh_traces();
    let mut spikes = vec![0u8; n_total];
    let mut potentials = vec![0.0; n_total];
    let mut counts = vec![0usize; topo.num_output()];
    for col in 0..input.num_steps() {
        for n in topo.num_input()..n_total {
            potentials[n] = network.membrane_potential(n, params, &traces);
        }
        for n in 0..n_total {
            spikes[n] = match network.role(n) {
                NeuronRole::Input => input.get(n, col),
                _ => sample_spike(potentials[n], rng),
            };
        }
        for (c, n) in counts.iter_mut().zip(topo.outputs()) {
            *c += spikes[n] as usize;
        }
        traces.update(network.basis(), &spikes)?;
    }
    Ok(counts)
}

/// Argmax of the counts, ties to the lowest index.
pub fn decode_counts(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

/// Predicted class by output spike-count decoding.
pub fn classify<R: Rng + ?Sized>(
    network: &Network,
    params: &ModelParams,
    input: &SpikeRecord,
    rng: &mut R,
) -> Result<usize> {
    Ok(decode_counts(&output_spike_counts(
        network, params, input, rng,
    )?))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::spike::{make_raised_cosine_basis, NetworkTopology};

    #[test]
    fn decode_rule() {
        assert_eq!(decode_counts(&[10, 3]), 0);
        assert_eq!(decode_counts(&[5, 5]), 0);
        assert_eq!(decode_counts(&[1, 5, 5]), 1);
        assert_eq!(decode_counts(&[0]), 0);
    }

    #[test]
    fn zero_params_loss_is_log_two_per_output_bit() {
        let t = NetworkTopology::fully_connected(2, 0, 2).unwrap();
        let net = Network::new(t, make_raised_cosine_basis(2, 4).unwrap());
        let p = net.zero_params();
        let input = SpikeRecord::from_rows(&[[1, 0, 1], [0, 0, 1]]).unwrap();
        let target = SpikeRecord::from_rows(&[[1, 1, 1], [0, 0, 0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = evaluate_log_loss(&net, &p, &input, &target, 1, &mut rng).unwrap();
        let b = evaluate_log_loss(&net, &p, &input, &target, 17, &mut rng).unwrap();
        assert!((a - 2.0 * 3.0 * std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(a, b);
        assert!(evaluate_log_loss(&net, &p, &input, &target, 0, &mut rng).is_err());
    }

    #[test]
    fn strongly_biased_output_wins() {
        let t = NetworkTopology::fully_connected(1, 0, 2).unwrap();
        let net = Network::new(t, make_raised_cosine_basis(2, 4).unwrap());
        let mut p = net.zero_params();
        let (b1, b2) = (net.layout().bias_index(1), net.layout().bias_index(2));
        p.as_mut_slice()[b1] = -20.0;
        p.as_mut_slice()[b2] = 20.0;
        let input = SpikeRecord::zeros(1, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            output_spike_counts(&net, &p, &input, &mut rng).unwrap(),
            vec![0, 10]
        );
        assert_eq!(classify(&net, &p, &input, &mut rng).unwrap(), 1);
    }
}
