use rand::Rng;

use super::encode::{rate_encode, Covariates, Example};
use crate::seed::{self, Stream};
use crate::spike::SpikeRecord;
use crate::{Error, Result};

/// Synthetic rate-pattern task with a strict one-class-per-device split.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub num_classes: usize,
    pub num_input: usize,
    /// S′, steps per example.
    pub steps: usize,
    /// One rate vector per class in `[0, 1]^{num_input}`.
    pub templates: Vec<Vec<f64>>,
    pub p_max: f64,
    /// Probability of flipping each encoded bit.
    pub noise: f64,
    /// Training examples held by each device; device `i` only gets class `i`.
    pub train_counts: Vec<usize>,
    /// Test examples per class in the shared test set.
    pub test_per_class: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    /// Training sets, one per device.
    pub train: Vec<Vec<Example>>,
    /// Shared test set covering every class, class-major.
    pub test: Vec<Example>,
}

/// Templates where class `c` fires at `high` on the `c`-th contiguous block of
/// inputs and at `low` elsewhere. Leftover inputs (when `num_input` is not a
/// multiple of `num_classes`) stay at `low`.
pub fn block_templates(num_classes: usize, num_input: usize, high: f64, low: f64) -> Vec<Vec<f64>> {
    let block = num_input / num_classes.max(1);
    (0..num_classes)
        .map(|c| {
            (0..num_input)
                .map(|n| {
                    if block > 0 && n / block == c {
                        high
                    } else {
                        low
                    }
                })
                .collect()
        })
        .collect()
}

/// Class whose input block holds the most spikes, ties to the lowest class.
pub fn majority_block_class(input: &SpikeRecord, num_classes: usize) -> usize {
    let block = input.num_neurons() / num_classes;
    let counts: Vec<usize> = (0..num_classes)
        .map(|c| {
            (c * block..(c + 1) * block)
                .map(|n| input.spike_count(n))
                .sum()
        })
        .collect();
    crate::learning::decode_counts(&counts)
}

fn noisy_example<R: Rng + ?Sized>(
    spec: &SyntheticSpec,
    class: usize,
    rng: &mut R,
) -> Result<Example> {
    let mut raster = rate_encode(&spec.templates[class], spec.steps, spec.p_max, rng)?;
    if spec.noise > 0.0 {
        for n in 0..raster.num_neurons() {
            for col in 0..raster.num_steps() {
                let draw: f64 = rng.gen();
                if draw < spec.noise {
                    let flipped = raster.get(n, col) == 0;
                    raster.set(n, col, flipped);
                }
            }
        }
    }
    Ok(Example {
        covariates: Covariates::Raster(raster),
        label: class,
    })
}

/// Generates per-device training sets (device `i` sees only class `i`) and a
/// shared test set with `test_per_class` examples of every class.
pub fn make_synthetic_noniid(spec: &SyntheticSpec, num_output: usize) -> Result<SyntheticData> {
    if spec.num_classes == 0 || spec.num_classes > num_output {
        return Err(Error::config(format!(
            "{} classes need between 1 and {num_output} output neurons",
            spec.num_classes
        )));
    }
    if spec.train_counts.is_empty() || spec.train_counts.len() > spec.num_classes {
        return Err(Error::config(format!(
            "{} devices cannot each hold a distinct class out of {}",
            spec.train_counts.len(),
            spec.num_classes
        )));
    }
    if let Some(i) = spec.train_counts.iter().position(|&c| c == 0) {
        return Err(Error::config(format!(
            "device {i} has an empty training set"
        )));
    }
    Error::check_dim("templates", spec.num_classes, spec.templates.len())?;
    for t in &spec.templates {
        Error::check_dim("template inputs", spec.num_input, t.len())?;
    }
    if !(0.0..=1.0).contains(&spec.noise) {
        return Err(Error::config("noise must lie in [0, 1]"));
    }
    if spec.steps == 0 {
        return Err(Error::config("examples need at least one step"));
    }

    let mut rng = seed::rng(spec.seed, Stream::Data);
    let train = spec
        .train_counts
        .iter()
        .enumerate()
        .map(|(class, &count)| {
            (0..count)
                .map(|_| noisy_example(spec, class, &mut rng))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut test = Vec::with_capacity(spec.num_classes * spec.test_per_class);
    for class in 0..spec.num_classes {
        for _ in 0..spec.test_per_class {
            test.push(noisy_example(spec, class, &mut rng)?);
        }
    }
    Ok(SyntheticData { train, test })
}
