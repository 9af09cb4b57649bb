use rand::seq::SliceRandom;
use rand::Rng;

use crate::spike::SpikeRecord;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Covariates {
    /// Firing-rate vector in `[0, 1]^{N_X}`, rate-encoded on use.
    Rates(Vec<f64>),
    /// Already encoded `N_X x S'` raster.
    Raster(SpikeRecord),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub covariates: Covariates,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedExample {
    pub input: SpikeRecord,
    pub target: SpikeRecord,
}

/// How a class label becomes an output spike train.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetScheme {
    /// The labeled neuron spikes at every step.
    ConstantOne,
    /// The labeled neuron spikes when `s mod period == 0`.
    Periodic(usize),
}

/// Each bit is an independent Bernoulli draw with probability `x_n · p_max`.
pub fn rate_encode<R: Rng + ?Sized>(
    rates: &[f64],
    num_steps: usize,
    p_max: f64,
    rng: &mut R,
) -> Result<SpikeRecord> {
    if !(0.0..=1.0).contains(&p_max) {
        return Err(Error::config(format!("p_max {p_max} outside [0, 1]")));
    }
    if let Some(x) = rates.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::config(format!("covariate {x} outside [0, 1]")));
    }
    let mut out = SpikeRecord::zeros(rates.len(), num_steps);
    for (n, &x) in rates.iter().enumerate() {
        let p = x * p_max;
        for col in 0..num_steps {
            let draw: f64 = rng.gen();
            out.set(n, col, draw < p);
        }
    }
    Ok(out)
}

pub fn encode_target(
    label: usize,
    num_classes: usize,
    num_steps: usize,
    scheme: TargetScheme,
) -> Result<SpikeRecord> {
    if label >= num_classes {
        return Err(Error::config(format!(
            "class {label} out of range for {num_classes} outputs"
        )));
    }
    let mut out = SpikeRecord::zeros(num_classes, num_steps);
    for col in 0..num_steps {
        let s = col + 1;
        let spike = match scheme {
            TargetScheme::ConstantOne => true,
            TargetScheme::Periodic(period) => period > 0 && s % period == 0,
        };
        out.set(label, col, spike);
    }
    Ok(out)
}

impl Example {
    pub fn encode<R: Rng + ?Sized>(
        &self,
        num_classes: usize,
        num_steps: usize,
        scheme: TargetScheme,
        p_max: f64,
        rng: &mut R,
    ) -> Result<EncodedExample> {
        let input = match &self.covariates {
            Covariates::Rates(x) => rate_encode(x, num_steps, p_max, rng)?,
            Covariates::Raster(r) => {
                Error::check_dim("example steps", num_steps, r.num_steps())?;
                r.clone()
            }
        };
        let target = encode_target(self.label, num_classes, num_steps, scheme)?;
        Ok(EncodedExample { input, target })
    }
}

/// Concatenates examples in order, each followed by `gap` silent steps.
pub fn concatenate_stream(
    examples: &[EncodedExample],
    gap: usize,
) -> Result<(SpikeRecord, SpikeRecord)> {
    let Some(first) = examples.first() else {
        return Err(Error::config("cannot build a stream from zero examples"));
    };
    let (nx, ny, steps) = (
        first.input.num_neurons(),
        first.target.num_neurons(),
        first.input.num_steps(),
    );
    for e in examples {
        Error::check_dim("example input neurons", nx, e.input.num_neurons())?;
        Error::check_dim("example output neurons", ny, e.target.num_neurons())?;
        Error::check_dim("example input steps", steps, e.input.num_steps())?;
        Error::check_dim("example target steps", steps, e.target.num_steps())?;
    }
    let silent_in = SpikeRecord::zeros(nx, gap);
    let silent_out = SpikeRecord::zeros(ny, gap);
    let mut inputs = Vec::with_capacity(2 * examples.len());
    let mut targets = Vec::with_capacity(2 * examples.len());
    for e in examples {
        inputs.extend([&e.input, &silent_in]);
        targets.extend([&e.target, &silent_out]);
    }
    Ok((
        SpikeRecord::concat_steps(nx, &inputs)?,
        SpikeRecord::concat_steps(ny, &targets)?,
    ))
}

/// Draws `count` examples uniformly with replacement, encodes them and
/// concatenates them into training streams.
#[allow(clippy::too_many_arguments)]
pub fn sample_stream<R: Rng + ?Sized>(
    pool: &[Example],
    count: usize,
    num_classes: usize,
    num_steps: usize,
    gap: usize,
    scheme: TargetScheme,
    p_max: f64,
    rng: &mut R,
) -> Result<(SpikeRecord, SpikeRecord)> {
    if pool.is_empty() {
        return Err(Error::config("cannot sample from an empty dataset"));
    }
    let encoded = (0..count)
        .map(|_| {
            let ex = pool.choose(rng).expect("non-empty pool");
            ex.encode(num_classes, num_steps, scheme, p_max, rng)
        })
        .collect::<Result<Vec<_>>>()?;
    concatenate_stream(&encoded, gap)
}
