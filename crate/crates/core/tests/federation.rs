mod common;

use flsnn::federation::{
    fed_average, run_federated_training, sparse_merge, DeviceData, ExchangePolicy,
    FederationConfig, SparseUpdate, TrainingOutcome,
};
use flsnn::learning::{train_standalone, Hyperparams};
use flsnn::spike::{ModelParams, Network};

use common::*;

fn hyper(ds: usize) -> Hyperparams {
    Hyperparams {
        learning_rate: 0.05,
        trace_decay: 0.2,
        steps_per_round: ds,
    }
}

fn device(net: &Network, steps: usize, seed: u64) -> DeviceData {
    let topo = net.topology();
    DeviceData {
        input: random_record(topo.num_input(), steps, 0.4, seed),
        target: random_record(topo.num_output(), steps, 0.4, seed + 1000),
    }
}

fn config(n: usize, tau: Option<usize>, rounds: usize, policy: ExchangePolicy) -> FederationConfig {
    FederationConfig {
        num_devices: n,
        dataset_sizes: (1..=n as u64).collect(),
        sync_period: tau,
        total_rounds: rounds,
        policy,
    }
}

/// Per-round parameters of every device.
fn trajectory(
    net: &Network,
    h: &Hyperparams,
    cfg: &FederationConfig,
    init: &ModelParams,
    devices: &[DeviceData],
) -> (Vec<Vec<ModelParams>>, TrainingOutcome) {
    let mut traj = Vec::new();
    let out = run_federated_training(net, h, cfg, init, devices, 17, |r| {
        traj.push(r.learners.iter().map(|l| l.params.clone()).collect());
        Ok(())
    })
    .unwrap();
    (traj, out)
}

#[test]
fn one_device_matches_standalone_training_bitwise() {
    let net = network(3, 2, 2, 3, 4);
    let h = hyper(4);
    let init = random_params(&net, 0.2, 1);
    let data = device(&net, 30 * 4, 5);
    let mut standalone = Vec::new();
    train_standalone(
        &net,
        &h,
        init.clone(),
        &data.input,
        &data.target,
        17,
        |_, p| standalone.push(p.clone()),
    )
    .unwrap();
    for tau in [1, 7] {
        let (traj, _) = trajectory(
            &net,
            &h,
            &config(1, Some(tau), 30, ExchangePolicy::Dense),
            &init,
            std::slice::from_ref(&data),
        );
        for (fed, alone) in traj.iter().zip(&standalone) {
            assert_eq!(fed[0].as_slice(), alone.as_slice());
        }
    }
}

#[test]
fn identical_devices_with_per_round_sync_stay_identical() {
    // Without hidden neurons the device streams do not matter, so
    // identical data gives identical updates on every device.
    let net = network(3, 0, 2, 3, 4);
    let h = hyper(5);
    let init = random_params(&net, 0.2, 2);
    let data = device(&net, 20 * 5, 9);
    let (single, _) = trajectory(
        &net,
        &h,
        &config(1, Some(1), 20, ExchangePolicy::Dense),
        &init,
        std::slice::from_ref(&data),
    );
    let devices = vec![data.clone(), data.clone(), data];
    let (traj, _) = trajectory(
        &net,
        &h,
        &config(3, Some(1), 20, ExchangePolicy::Dense),
        &init,
        &devices,
    );
    for (round, alone) in traj.iter().zip(&single) {
        for p in round {
            assert_eq!(p.as_slice(), alone[0].as_slice());
        }
    }
}

#[test]
fn two_step_rounds_sync_every_second_round() {
    let net = network(2, 1, 1, 2, 3);
    let h = hyper(2);
    let cfg = config(2, Some(2), 6, ExchangePolicy::Dense);
    let devices = vec![device(&net, 12, 1), device(&net, 12, 2)];
    let mut events = Vec::new();
    run_federated_training(&net, &h, &cfg, &net.zero_params(), &devices, 3, |r| {
        let steps = r.learners[0].state.steps_done();
        events.push((r.round, steps, r.synced));
        Ok(())
    })
    .unwrap();
    let synced: Vec<(usize, usize)> = events.iter().filter(|e| e.2).map(|e| (e.0, e.1)).collect();
    assert_eq!(synced, vec![(2, 4), (4, 8), (6, 12)]);
}

#[test]
fn devices_are_isolated_between_syncs() {
    let net = network(3, 2, 2, 2, 4);
    let h = hyper(5);
    let tau = 4;
    let cfg = config(2, Some(tau), 12, ExchangePolicy::Dense);
    let init = random_params(&net, 0.2, 3);
    let a = vec![device(&net, 60, 1), device(&net, 60, 2)];
    let mut b = a.clone();
    // perturb device 2 from round 5 on (columns 20..)
    for s in 20..60 {
        let bit = b[1].target.get(0, s);
        b[1].target.set(0, s, bit == 0);
    }
    let (ta, _) = trajectory(&net, &h, &cfg, &init, &a);
    let (tb, _) = trajectory(&net, &h, &cfg, &init, &b);
    for t in 0..12 {
        let round = t + 1;
        let same0 = ta[t][0] == tb[t][0];
        if round < 8 {
            assert!(same0, "device 1 changed before the sync at round {round}");
        } else {
            assert!(!same0, "sync at round 8 should carry the perturbation");
        }
        assert_eq!(ta[t][1] == tb[t][1], round < 5);
    }
}

#[test]
fn dense_and_sparse_communication_counts() {
    let net = network(3, 1, 2, 4, 4);
    let h = hyper(2);
    let layout = net.layout();
    let devices = vec![device(&net, 16, 1), device(&net, 16, 2)];
    let init = random_params(&net, 0.1, 1);

    let (_, dense) = trajectory(
        &net,
        &h,
        &config(2, Some(2), 8, ExchangePolicy::Dense),
        &init,
        &devices,
    );
    assert_eq!(dense.comm.syncs, 4);
    assert_eq!(dense.comm.uploaded, vec![4 * layout.dim() as u64; 2]);
    assert_eq!(dense.comm.broadcast, 4 * 2 * layout.dim() as u64);
    assert_eq!(dense.comm.total_index_entries(), 0);

    // r = 1/2 and tau = 4 keep 2 of 4 weights per synapse
    let (_, sparse) = trajectory(
        &net,
        &h,
        &config(2, Some(4), 8, ExchangePolicy::TopK { rate: 0.5 }),
        &init,
        &devices,
    );
    let per_sync = (2 * layout.num_neurons() + 2 * layout.num_synapses()) as u64;
    assert_eq!(sparse.comm.syncs, 2);
    assert_eq!(sparse.comm.uploaded, vec![2 * per_sync; 2]);
    assert_eq!(
        sparse.comm.index_entries,
        vec![2 * 2 * layout.num_synapses() as u64; 2]
    );
    assert_eq!(sparse.comm.broadcast, 2 * 2 * layout.dim() as u64);
    assert!(sparse.global.is_some());
}

#[test]
fn unsynchronized_final_round_reports_the_average() {
    let net = network(2, 0, 1, 2, 3);
    let h = hyper(2);
    let devices = vec![device(&net, 10, 1), device(&net, 10, 2)];
    let (_, out) = trajectory(
        &net,
        &h,
        &config(2, Some(3), 5, ExchangePolicy::Dense),
        &net.zero_params(),
        &devices,
    );
    assert!(out.global.is_none());
    let view: Vec<(&[f64], u64)> = out
        .device_params
        .iter()
        .zip([1, 2])
        .map(|(p, w)| (p.as_slice(), w))
        .collect();
    assert_eq!(
        out.average.as_slice(),
        fed_average(&view).unwrap().as_slice()
    );
    assert_eq!(out.final_params(), &out.average);
}

#[test]
fn full_index_merge_equals_average() {
    let net = network(3, 2, 2, 3, 4);
    let thetas: Vec<ModelParams> = (0..3).map(|i| random_params(&net, 2.0, i)).collect();
    let sizes = [3u64, 1, 7];
    let uploads: Vec<SparseUpdate> = thetas.iter().map(SparseUpdate::dense).collect();
    let merged = sparse_merge(net.layout(), &uploads, &sizes).unwrap();
    let view: Vec<(&[f64], u64)> = thetas
        .iter()
        .zip(sizes)
        .map(|(p, w)| (p.as_slice(), w))
        .collect();
    let avg = fed_average(&view).unwrap();
    for (m, a) in merged.as_slice().iter().zip(&avg) {
        assert!((m - a).abs() <= 1e-12);
    }
}
