use std::fs;
use std::path::Path;

use log::info;
use rand::Rng;
use rayon::prelude::*;

use super::config::{DataSource, RunConfig};
use super::metrics::{write_csv, MetricsRow, SummaryRow, METRICS_HEADER, SUMMARY_HEADER};
use crate::data::{
    block_templates, load_raster_file, make_synthetic_noniid, sample_stream, save_raster_file,
    Covariates, EncodedExample, Example, RasterDataset, SyntheticSpec,
};
use crate::federation::{
    run_federated_training, CommStats, DeviceData, ExchangePolicy, FederationConfig,
    TrainingOutcome,
};
use crate::learning::{classify, evaluate_log_loss};
use crate::seed::{self, Stream};
use crate::spike::{make_raised_cosine_basis, ModelParams, Network, NetworkTopology};
use crate::{Error, Result};

/// Everything a run needs before training starts.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub network: Network,
    pub train: Vec<Vec<Example>>,
    pub test: Vec<EncodedExample>,
    pub devices: Vec<DeviceData>,
    pub initial: ModelParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    /// Mean test log-loss per example.
    pub log_loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: Vec<MetricsRow>,
    pub outcome: TrainingOutcome,
    /// Final evaluation of each device model.
    pub device_evals: Vec<Evaluation>,
    /// Final evaluation of the averaged model.
    pub average_eval: Evaluation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub rows: Vec<SummaryRow>,
    pub mean_accuracy: f64,
    pub mean_log_loss: f64,
    pub mean_loss_ratio: Option<f64>,
    pub comm: CommStats,
}

fn synthetic_spec(config: &RunConfig, s: &super::config::SyntheticConfig) -> SyntheticSpec {
    SyntheticSpec {
        num_classes: config.num_output,
        num_input: config.num_input,
        steps: config.example_steps,
        templates: block_templates(config.num_output, config.num_input, s.high_rate, s.low_rate),
        p_max: config.p_max,
        noise: s.noise,
        train_counts: vec![s.train_per_device; config.num_devices],
        test_per_class: s.test_per_class,
        seed: config.seed,
    }
}

fn raster_examples(ds: RasterDataset, config: &RunConfig, what: &Path) -> Result<Vec<Example>> {
    if ds.num_neurons != config.num_input || ds.num_steps != config.example_steps {
        return Err(Error::config(format!(
            "{}: rasters are {}x{}, expected num_input x example_steps = {}x{}",
            what.display(),
            ds.num_neurons,
            ds.num_steps,
            config.num_input,
            config.example_steps
        )));
    }
    if ds.num_classes > config.num_output {
        return Err(Error::config(format!(
            "{}: {} classes exceed num_output {}",
            what.display(),
            ds.num_classes,
            config.num_output
        )));
    }
    Ok(ds
        .examples
        .into_iter()
        .map(|(label, r)| Example {
            covariates: Covariates::Raster(r),
            label: label as usize,
        })
        .collect())
}

/// Builds the network, loads or generates data, samples each device's
/// training stream and draws θ(0).
pub fn prepare(config: &RunConfig) -> Result<Prepared> {
    config.validate()?;
    let topology =
        NetworkTopology::fully_connected(config.num_input, config.num_hidden, config.num_output)?;
    let network = Network::new(
        topology,
        make_raised_cosine_basis(config.num_basis, config.basis_window)?,
    );

    let (train, test) = match &config.data {
        DataSource::Synthetic(s) => {
            let data = make_synthetic_noniid(&synthetic_spec(config, s), config.num_output)?;
            (data.train, data.test)
        }
        DataSource::Raster {
            train_files,
            test_file,
        } => {
            let train = train_files
                .iter()
                .map(|p| raster_examples(load_raster_file(p)?, config, p))
                .collect::<Result<Vec<_>>>()?;
            if let Some(i) = train.iter().position(Vec::is_empty) {
                return Err(Error::config(format!(
                    "device {i} has an empty training set"
                )));
            }
            let test = raster_examples(load_raster_file(test_file)?, config, test_file)?;
            (train, test)
        }
    };
    if test.is_empty() {
        return Err(Error::config("test set is empty"));
    }

    let mut eval_rng = seed::rng(config.seed, Stream::Eval);
    let test = test
        .iter()
        .map(|e| {
            e.encode(
                config.num_output,
                config.example_steps,
                config.target,
                config.p_max,
                &mut eval_rng,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let devices = train
        .iter()
        .enumerate()
        .map(|(i, pool)| {
            let mut rng = seed::rng(seed::mix(config.seed, &[i as u64]), Stream::Selection);
            let (input, target) = sample_stream(
                pool,
                config.examples_per_device,
                config.num_output,
                config.example_steps,
                config.gap,
                config.target,
                config.p_max,
                &mut rng,
            )?;
            Ok(DeviceData { input, target })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut init_rng = seed::rng(config.seed, Stream::Init);
    let mut initial = network.zero_params();
    let scale = config.init_scale;
    for v in initial.as_mut_slice() {
        *v = if scale > 0.0 {
            init_rng.gen_range(-scale..=scale)
        } else {
            0.0
        };
    }

    Ok(Prepared {
        config: config.clone(),
        network,
        train,
        test,
        devices,
        initial,
    })
}

/// Mean test log-loss and spike-count accuracy of one model. Example `j`
/// uses a stream seeded from `(eval_seed, j)`.
pub fn evaluate_model(
    network: &Network,
    params: &ModelParams,
    test: &[EncodedExample],
    num_samples: usize,
    eval_seed: u64,
) -> Result<Evaluation> {
    let per_example = test
        .par_iter()
        .enumerate()
        .map(|(j, ex)| {
            let mut rng = seed::rng(seed::mix(eval_seed, &[j as u64]), Stream::Eval);
            let loss = evaluate_log_loss(
                network,
                params,
                &ex.input,
                &ex.target,
                num_samples,
                &mut rng,
            )?;
            let label = crate::learning::decode_counts(
                &(0..ex.target.num_neurons())
                    .map(|n| ex.target.spike_count(n))
                    .collect::<Vec<_>>(),
            );
            let correct = classify(network, params, &ex.input, &mut rng)? == label;
            Ok((loss, correct))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = per_example.len() as f64;
    Ok(Evaluation {
        log_loss: per_example.iter().map(|p| p.0).sum::<f64>() / n,
        accuracy: per_example.iter().filter(|p| p.1).count() as f64 / n,
    })
}

/// Trains with the given sync period and sparse rate, evaluating every
/// `eval_every` rounds and at the last round.
pub fn train_run(prepared: &Prepared, tau: Option<usize>, rate: Option<f64>) -> Result<RunOutput> {
    let config = &prepared.config;
    let dataset_sizes = prepared.train.iter().map(|t| t.len() as u64).collect();
    let fed = FederationConfig {
        sync_period: tau,
        policy: rate.map_or(ExchangePolicy::Dense, |rate| ExchangePolicy::TopK { rate }),
        ..config.federation(dataset_sizes)
    };
    let network = &prepared.network;
    let mut metrics = Vec::new();
    let mut last = None;

    let outcome = run_federated_training(
        network,
        &config.hyper,
        &fed,
        &prepared.initial,
        &prepared.devices,
        config.seed,
        |report| {
            if report.round % config.eval_every != 0 && report.round != config.rounds {
                return Ok(());
            }
            let signals = report.learning_signals();
            let mut evals = Vec::with_capacity(report.learners.len());
            for (i, learner) in report.learners.iter().enumerate() {
                let eval_seed = seed::mix(config.seed, &[report.round as u64, i as u64 + 1]);
                let e = evaluate_model(
                    network,
                    &learner.params,
                    &prepared.test,
                    config.eval_samples,
                    eval_seed,
                )?;
                metrics.push(MetricsRow {
                    round: report.round,
                    device: i as i64,
                    learning_signal: signals[i],
                    test_log_loss: e.log_loss,
                    test_accuracy: e.accuracy,
                    uploaded_entries: report.comm.uploaded[i],
                });
                evals.push(e);
            }
            let view: Vec<(&[f64], u64)> = report
                .learners
                .iter()
                .zip(&fed.dataset_sizes)
                .map(|(l, &w)| (l.params.as_slice(), w))
                .collect();
            let average = ModelParams::from_flat(
                network.layout().clone(),
                crate::federation::fed_average(&view)?,
            )?;
            let eval_seed = seed::mix(config.seed, &[report.round as u64, 0]);
            let avg = evaluate_model(
                network,
                &average,
                &prepared.test,
                config.eval_samples,
                eval_seed,
            )?;
            metrics.push(MetricsRow {
                round: report.round,
                device: -1,
                learning_signal: signals.iter().sum::<f64>() / signals.len() as f64,
                test_log_loss: avg.log_loss,
                test_accuracy: avg.accuracy,
                uploaded_entries: report.comm.total_uploaded(),
            });
            info!(
                "round {}: mean loss {:.4}, averaged-model accuracy {:.3}",
                report.round,
                evals.iter().map(|e| e.log_loss).sum::<f64>() / evals.len() as f64,
                avg.accuracy
            );
            last = Some((evals, avg));
            Ok(())
        },
    )?;
    let (device_evals, average_eval) = last.expect("the last round is always evaluated");
    Ok(RunOutput {
        metrics,
        outcome,
        device_evals,
        average_eval,
    })
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

pub(crate) fn summarize(run: &RunOutput, baseline: Option<&RunOutput>) -> RunSummary {
    let comm = run.outcome.comm.clone();
    let mut rows: Vec<SummaryRow> = run
        .device_evals
        .iter()
        .enumerate()
        .map(|(i, e)| SummaryRow {
            device: i.to_string(),
            final_test_accuracy: e.accuracy,
            final_test_log_loss: e.log_loss,
            loss_ratio: baseline.map(|b| e.log_loss / b.device_evals[i].log_loss),
            uploaded_entries: comm.uploaded[i],
            index_entries: comm.index_entries[i],
            broadcast_entries: comm.broadcast / comm.uploaded.len() as u64,
        })
        .collect();
    let mean_accuracy = mean(run.device_evals.iter().map(|e| e.accuracy));
    let mean_log_loss = mean(run.device_evals.iter().map(|e| e.log_loss));
    let mean_loss_ratio =
        baseline.map(|b| mean_log_loss / mean(b.device_evals.iter().map(|e| e.log_loss)));
    rows.push(SummaryRow {
        device: "-1".into(),
        final_test_accuracy: run.average_eval.accuracy,
        final_test_log_loss: run.average_eval.log_loss,
        loss_ratio: baseline.map(|b| run.average_eval.log_loss / b.average_eval.log_loss),
        uploaded_entries: comm.total_uploaded(),
        index_entries: comm.total_index_entries(),
        broadcast_entries: comm.broadcast,
    });
    rows.push(SummaryRow {
        device: "mean".into(),
        final_test_accuracy: mean_accuracy,
        final_test_log_loss: mean_log_loss,
        loss_ratio: mean_loss_ratio,
        uploaded_entries: comm.total_uploaded(),
        index_entries: comm.total_index_entries(),
        broadcast_entries: comm.broadcast,
    });
    RunSummary {
        rows,
        mean_accuracy,
        mean_log_loss,
        mean_loss_ratio,
        comm,
    }
}

pub(crate) fn write_outputs(dir: &Path, run: &RunOutput, summary: &RunSummary) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(
        &dir.join("metrics.csv"),
        &METRICS_HEADER,
        run.metrics.iter().map(MetricsRow::record),
    )?;
    write_csv(
        &dir.join("summary.csv"),
        &SUMMARY_HEADER,
        summary.rows.iter().map(SummaryRow::record),
    )?;
    Ok(())
}

/// Trains with the configured schedule and writes `metrics.csv` and
/// `summary.csv` to the output directory. In baseline mode the same setup is
/// also trained without synchronization (written under `baseline/`) and the
/// summary reports loss ratios against it.
pub fn run_experiment(config: &RunConfig) -> Result<RunSummary> {
    let prepared = prepare(config)?;
    let baseline = if config.baseline {
        let b = train_run(&prepared, None, None)?;
        write_outputs(&config.output.join("baseline"), &b, &summarize(&b, None))?;
        Some(b)
    } else {
        None
    };
    let run = train_run(&prepared, config.tau, config.rate)?;
    let summary = summarize(&run, baseline.as_ref());
    write_outputs(&config.output, &run, &summary)?;
    Ok(summary)
}

/// Separate training only: every device trains on its own data with no sync.
pub fn run_baseline(config: &RunConfig) -> Result<RunSummary> {
    let prepared = prepare(config)?;
    let run = train_run(&prepared, None, None)?;
    let summary = summarize(&run, None);
    write_outputs(&config.output, &run, &summary)?;
    Ok(summary)
}

/// Writes the synthetic dataset as SRAS files: `train_device_<i>.sras` and
/// `test.sras`.
pub fn generate_data(config: &RunConfig) -> Result<Vec<std::path::PathBuf>> {
    config.validate()?;
    let DataSource::Synthetic(s) = &config.data else {
        return Err(Error::config("gen-data needs data = synthetic"));
    };
    let data = make_synthetic_noniid(&synthetic_spec(config, s), config.num_output)?;
    fs::create_dir_all(&config.output)?;
    let to_dataset = |examples: &[Example]| -> Result<RasterDataset> {
        let mut ds = RasterDataset::new(config.num_input, config.example_steps, config.num_output);
        for e in examples {
            let Covariates::Raster(r) = &e.covariates else {
                unreachable!("synthetic examples are pre-encoded")
            };
            let label = u16::try_from(e.label).map_err(|_| Error::config("label exceeds u16"))?;
            ds.examples.push((label, r.clone()));
        }
        Ok(ds)
    };
    let mut paths = Vec::new();
    for (i, train) in data.train.iter().enumerate() {
        let p = config.output.join(format!("train_device_{i}.sras"));
        save_raster_file(&to_dataset(train)?, &p)?;
        paths.push(p);
    }
    let p = config.output.join("test.sras");
    save_raster_file(&to_dataset(&data.test)?, &p)?;
    paths.push(p);
    Ok(paths)
}
