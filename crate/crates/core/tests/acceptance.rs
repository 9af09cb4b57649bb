//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use flsnn::experiment::{
    read_summary, run_experiment, sweep, DataSource, RunConfig, SweepKey, SweepRow, SyntheticConfig,
};
use flsnn::federation::{
    fed_average, run_federated_training, sparse_merge, DeviceData, ExchangePolicy,
    FederationConfig, SparseUpdate,
};
use flsnn::learning::{
    evaluate_log_loss, step_window, train_standalone, Hyperparams, LearnerState,
};
use flsnn::spike::{BasisSet, ModelParams, TraceState};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(limit: Duration, started: Instant, mut o: Outcome) -> Outcome {
    let elapsed = started.elapsed();
    if elapsed > limit {
        o.pass = false;
    }
    o.detail = format!(
        "{}; {:.2}s (limit {}s)",
        o.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    o
}

fn gradient_check() -> Outcome {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let h = 1e-5;
    for seed in 0..10 {
        let net = network(3, 0, 2, 3, 5);
        let params = random_params(&net, 0.8, seed);
        let input = random_record(3, 20, 0.4, 100 + seed);
        let target = random_record(2, 20, 0.4, 200 + seed);
        let hyper = Hyperparams {
            learning_rate: 0.05,
            trace_decay: 0.2,
            steps_per_round: 20,
        };
        let mut state = LearnerState::new(&net, ChaCha8Rng::seed_from_u64(seed));
        step_window(&net, &params, &mut state, &input, &target, 0, &hyper).unwrap();
        let rows = stack_rows(&input, &target);
        for i in 0..params.dim() {
            let mut plus = params.clone();
            plus.as_mut_slice()[i] += h;
            let mut minus = params.clone();
            minus.as_mut_slice()[i] -= h;
            let fd = (direct_log_prob(&net, &plus, &rows, 0..5)
                - direct_log_prob(&net, &minus, &rows, 0..5))
                / (2.0 * h);
            let a = state.window_gradient()[i];
            worst = worst.max((a - fd).abs() / a.abs().max(fd.abs()).max(1e-4));
        }
    }
    within(
        Duration::from_secs(5),
        started,
        check(worst <= 1e-4, format!("max relative error {worst:.2e}")),
    )
}

fn trace_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for train in 0..100u64 {
        let (k_a, w, steps) = (
            rng.gen_range(1..6),
            rng.gen_range(1..16),
            rng.gen_range(1..80),
        );
        let basis = if train % 2 == 0 && w >= k_a {
            flsnn::spike::make_raised_cosine_basis(k_a, w).unwrap()
        } else {
            let values = (0..k_a * w).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let fb = (0..w).map(|_| rng.gen_range(-1.0..1.0)).collect();
            BasisSet::from_values(k_a, w, values, fb).unwrap()
        };
        let record = random_record(1, steps, rng.gen_range(0.05..0.95), train);
        let mut traces = TraceState::new(1, &basis);
        for s in 0..steps {
            traces.update(&basis, &[record.get(0, s)]).unwrap();
            let past = |j: usize| {
                if j > s + 1 {
                    0.0
                } else {
                    record.get(0, s + 1 - j) as f64
                }
            };
            let fb: f64 = (1..=w).map(|j| basis.feedback(j) * past(j)).sum();
            worst = worst.max((traces.feedback(0) - fb).abs());
            for l in 0..basis.num_basis() {
                let direct: f64 = (1..=w).map(|j| basis.value(l, j) * past(j)).sum();
                worst = worst.max((traces.synaptic(0, l) - direct).abs());
            }
        }
    }
    within(
        Duration::from_secs(1),
        started,
        check(worst <= 1e-12, format!("max abs diff {worst:.2e}")),
    )
}

fn fedavg_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ok = true;
    for _ in 0..200 {
        let n = rng.gen_range(1..6);
        let vecs: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..10).map(|_| rng.gen_range(-1e3..1e3)).collect())
            .collect();
        let sizes: Vec<u64> = (0..n).map(|_| rng.gen_range(1..50)).collect();
        let view: Vec<(&[f64], u64)> = vecs
            .iter()
            .map(|v| v.as_slice())
            .zip(sizes.iter().copied())
            .collect();
        let avg = fed_average(&view).unwrap();
        let again = fed_average(&[(&avg[..], 2), (&avg[..], 5)]).unwrap();
        let mut shuffled = view.clone();
        shuffled.shuffle(&mut rng);
        ok &= again == avg && fed_average(&shuffled).unwrap() == avg;
    }
    let example = fed_average(&[(&[0.0][..], 1), (&[4.0][..], 3)]).unwrap();
    ok &= example == vec![3.0];

    let net = network(4, 3, 2, 4, 6);
    let thetas: Vec<ModelParams> = (0..3).map(|i| random_params(&net, 5.0, i)).collect();
    let sizes = [2u64, 9, 4];
    let uploads: Vec<SparseUpdate> = thetas.iter().map(SparseUpdate::dense).collect();
    let merged = sparse_merge(net.layout(), &uploads, &sizes).unwrap();
    let view: Vec<(&[f64], u64)> = thetas.iter().map(|p| p.as_slice()).zip(sizes).collect();
    let diff = merged
        .as_slice()
        .iter()
        .zip(fed_average(&view).unwrap())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ok &= diff <= 1e-12;
    check(
        ok,
        format!(
            "(1,3)-weighted 0/4 -> {}; full-index merge diff {diff:.1e}",
            example[0]
        ),
    )
}

fn single_device() -> Outcome {
    let started = Instant::now();
    let net = network(4, 3, 2, 4, 6);
    let hyper = Hyperparams::default();
    let rounds = 100;
    let init = random_params(&net, 0.1, 2);
    let data = DeviceData {
        input: random_record(4, rounds * 5, 0.3, 1),
        target: random_record(2, rounds * 5, 0.3, 2),
    };
    let mut alone = Vec::new();
    train_standalone(
        &net,
        &hyper,
        init.clone(),
        &data.input,
        &data.target,
        11,
        |_, p| alone.push(p.clone()),
    )
    .unwrap();
    let mut identical = true;
    for tau in [1, 7] {
        let cfg = FederationConfig {
            num_devices: 1,
            dataset_sizes: vec![1],
            sync_period: Some(tau),
            total_rounds: rounds,
            policy: ExchangePolicy::Dense,
        };
        run_federated_training(
            &net,
            &hyper,
            &cfg,
            &init,
            std::slice::from_ref(&data),
            11,
            |r| {
                identical &= r.learners[0].params.as_slice() == alone[r.round - 1].as_slice();
                Ok(())
            },
        )
        .unwrap();
    }
    within(
        Duration::from_secs(10),
        started,
        check(identical, format!("{rounds} rounds, tau 1 and 7")),
    )
}

fn task(seed: u64, num_hidden: usize, out: &Path) -> RunConfig {
    let mut c = RunConfig::with_defaults(seed, DataSource::Synthetic(SyntheticConfig::default()));
    c.num_input = 20;
    c.num_hidden = num_hidden;
    c.num_output = 2;
    c.num_devices = 2;
    c.example_steps = 20;
    c.examples_per_device = 200;
    c.hyper = Hyperparams {
        learning_rate: 0.05,
        trace_decay: 0.2,
        steps_per_round: 5,
    };
    c.output = out.to_path_buf();
    c.derive_schedule();
    c.eval_every = c.rounds;
    c
}

fn values(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn noniid_benefit() -> Outcome {
    let started = Instant::now();
    let taus = ["5", "50", "400"];
    let (mut ratio5, mut acc5, mut base_acc) = (Vec::new(), Vec::new(), Vec::new());
    let mut losses = vec![Vec::new(); taus.len()];
    for seed in 1..=3 {
        let dir = tempfile::tempdir().unwrap();
        let mut c = task(seed, 0, dir.path());
        c.baseline = true;
        let rows: Vec<SweepRow> = sweep(&c, SweepKey::Tau, &values(&taus)).unwrap();
        ratio5.push(rows[0].summary.mean_loss_ratio.unwrap());
        acc5.push(rows[0].summary.mean_accuracy);
        for (l, r) in losses.iter_mut().zip(&rows) {
            l.push(r.summary.mean_log_loss);
        }
        let base = read_summary(dir.path().join("baseline/summary.csv")).unwrap();
        base_acc.push(
            base.iter()
                .find(|r| r.device == "mean")
                .unwrap()
                .final_test_accuracy,
        );
    }
    let (ratio, acc, base) = (median(ratio5), median(acc5), median(base_acc));
    let loss: Vec<f64> = losses.into_iter().map(median).collect();
    let nondecreasing = loss.windows(2).all(|w| w[1] >= w[0]);
    let pass = ratio < 0.9 && nondecreasing && (base - 0.5).abs() <= 0.1 && acc >= 0.9;
    within(
        Duration::from_secs(120),
        started,
        check(
            pass,
            format!(
                "tau=5 loss ratio {ratio:.3}, loss over tau 5/50/400 {:.3}/{:.3}/{:.3}, separate accuracy {base:.3}, tau=5 accuracy {acc:.3}",
                loss[0], loss[1], loss[2]
            ),
        ),
    )
}

fn sparse_trend() -> Outcome {
    let started = Instant::now();
    let taus = ["4", "16", "64"];
    let mut acc = vec![Vec::new(); taus.len()];
    for seed in 1..=3 {
        let dir = tempfile::tempdir().unwrap();
        let mut c = task(seed, 8, dir.path());
        // tau = 64 at r = 1/4 keeps 16 weights per synapse
        c.num_basis = 16;
        c.basis_window = 16;
        c.rate = Some(0.25);
        for (a, r) in acc
            .iter_mut()
            .zip(sweep(&c, SweepKey::Tau, &values(&taus)).unwrap())
        {
            a.push(r.summary.mean_accuracy);
        }
    }
    let med: Vec<f64> = acc.into_iter().map(median).collect();
    within(
        Duration::from_secs(300),
        started,
        check(
            med[0] >= med[2],
            format!(
                "median accuracy over tau 4/16/64 {:.3}/{:.3}/{:.3}",
                med[0], med[1], med[2]
            ),
        ),
    )
}

fn hidden_likelihood() -> Outcome {
    let started = Instant::now();
    let net = network(2, 2, 2, 2, 3);
    let params = random_params(&net, 1.5, 4);
    let input = random_record(2, 3, 0.5, 5);
    let target = random_record(2, 3, 0.5, 6);
    let exact = enumerated_log_loss(&net, &params, &input, &target);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let big = evaluate_log_loss(&net, &params, &input, &target, 100_000, &mut rng).unwrap();
    let small = evaluate_log_loss(&net, &params, &input, &target, 10_000, &mut rng).unwrap();
    let rel = (small - big).abs() / big.abs();
    within(
        Duration::from_secs(30),
        started,
        check(
            exact <= big && rel <= 0.01,
            format!(
                "exact {exact:.4} <= MC {big:.4}; 1e4 vs 1e5 samples differ by {:.3}%",
                100.0 * rel
            ),
        ),
    )
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    std::fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Outcome {
    let mut trees = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let mut c = task(21, 3, &dir.path().join("run"));
        c.examples_per_device = 40;
        c.derive_schedule();
        c.eval_every = 40;
        c.eval_samples = 4;
        c.baseline = true;
        run_experiment(&c).unwrap();
        c.output = dir.path().join("sweep");
        sweep(&c, SweepKey::Tau, &values(&["1", "5", "20", "none"])).unwrap();
        c.output = dir.path().join("rate");
        sweep(&c, SweepKey::Rate, &values(&["dense", "1/5", "2/5"])).unwrap();
        trees.push(tree(dir.path()));
    }
    check(
        trees[0] == trees[1] && !trees[0].is_empty(),
        format!(
            "{} CSV files byte-identical across two runs",
            trees[0].len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("gradient correctness", gradient_check),
        ("trace oracle", trace_oracle),
        ("fedavg algebra", fedavg_algebra),
        ("single-device equivalence", single_device),
        ("non-iid cooperation benefit", noniid_benefit),
        ("sparse-exchange trend", sparse_trend),
        ("hidden-likelihood oracle", hidden_likelihood),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
