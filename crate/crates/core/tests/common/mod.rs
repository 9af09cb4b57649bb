#![allow(dead_code)]

use flsnn::spike::{
    make_raised_cosine_basis, spike_probability, ModelParams, Network, NetworkTopology, SpikeRecord,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn network(nx: usize, nh: usize, ny: usize, num_basis: usize, window: usize) -> Network {
    let topology = NetworkTopology::fully_connected(nx, nh, ny).unwrap();
    Network::new(
        topology,
        make_raised_cosine_basis(num_basis, window).unwrap(),
    )
}

pub fn random_params(network: &Network, scale: f64, seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = network.zero_params();
    for v in p.as_mut_slice() {
        *v = rng.gen_range(-scale..=scale);
    }
    p
}

pub fn random_record(num_neurons: usize, steps: usize, p: f64, seed: u64) -> SpikeRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = (0..num_neurons * steps)
        .map(|_| rng.gen_bool(p) as u8)
        .collect();
    SpikeRecord::from_bits(num_neurons, steps, bits).unwrap()
}

/// Potential of neuron `n` at step `s` (0-based) computed straight from the
/// raw spike history `spikes[k][s']`, without any trace state.
pub fn direct_potential(
    network: &Network,
    params: &ModelParams,
    spikes: &[Vec<u8>],
    n: usize,
    s: usize,
) -> f64 {
    let basis = network.basis();
    let w = basis.window_len();
    let past = |k: usize, lag: usize| -> f64 {
        if lag > s {
            0.0
        } else {
            spikes[k][s - lag] as f64
        }
    };
    let mut u = params.bias(n);
    for lag in 1..=w {
        u += params.feedback_weight(n) * basis.feedback(lag) * past(n, lag);
    }
    for (j, &k) in network.topology().presynaptic(n).iter().enumerate() {
        let weights = params.synapse(n, j);
        for (l, wl) in weights.iter().enumerate() {
            for lag in 1..=w {
                u += wl * basis.value(l, lag) * past(k, lag);
            }
        }
    }
    u
}

/// Total log-probability of every neuron's spikes under a fully clamped
/// network, by direct convolution and a naive `ln`.
pub fn direct_log_prob(
    network: &Network,
    params: &ModelParams,
    spikes: &[Vec<u8>],
    neurons: std::ops::Range<usize>,
) -> f64 {
    let steps = spikes[0].len();
    let mut total = 0.0;
    for s in 0..steps {
        for n in neurons.clone() {
            let p = spike_probability(direct_potential(network, params, spikes, n, s));
            total += if spikes[n][s] == 1 {
                p.ln()
            } else {
                (1.0 - p).ln()
            };
        }
    }
    total
}

/// Rows of a clamped network: inputs first, then outputs (no hidden neurons).
pub fn stack_rows(input: &SpikeRecord, target: &SpikeRecord) -> Vec<Vec<u8>> {
    (0..input.num_neurons())
        .map(|n| input.row(n).to_vec())
        .chain((0..target.num_neurons()).map(|n| target.row(n).to_vec()))
        .collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Exact output log-loss with hidden neurons marginalized by enumerating
/// every hidden spike pattern: `−ln Σ_h Π_s p(h(s)) p(y(s))`, inputs clamped.
pub fn enumerated_log_loss(
    network: &Network,
    params: &ModelParams,
    input: &SpikeRecord,
    target: &SpikeRecord,
) -> f64 {
    let topo = network.topology();
    let (nx, nh) = (topo.num_input(), topo.num_hidden());
    let steps = input.num_steps();
    let bits = nh * steps;
    assert!(bits <= 20, "enumeration too large");
    let mut total = 0.0;
    for pattern in 0u64..(1 << bits) {
        let mut spikes = vec![vec![0u8; steps]; network.num_neurons()];
        for n in 0..nx {
            spikes[n].copy_from_slice(input.row(n));
        }
        for (i, n) in topo.hidden().enumerate() {
            for s in 0..steps {
                spikes[n][s] = ((pattern >> (i * steps + s)) & 1) as u8;
            }
        }
        for (i, n) in topo.outputs().enumerate() {
            spikes[n].copy_from_slice(target.row(i));
        }
        let joint = direct_log_prob(network, params, &spikes, nx..network.num_neurons());
        total += joint.exp();
    }
    -total.ln()
}
