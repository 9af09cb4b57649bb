//! Flat `key = value` run configuration.
//!
//! Lines starting with `#` (and anything after a `#`) are comments. Every key
//! except `seed` and `data` has a default:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `num_input` | 20 | input neurons |
//! | `num_hidden` | 0 | hidden neurons |
//! | `num_output` | 2 | output neurons, one per class |
//! | `num_basis` | 8 | synaptic basis functions |
//! | `basis_window` | 10 | kernel length in steps |
//! | `learning_rate` | 0.05 | α |
//! | `trace_decay` | 0.2 | κ |
//! | `steps_per_round` | 5 | Δs |
//! | `num_devices` | 2 | devices |
//! | `tau` | 5 | sync period; `none` disables sync |
//! | `rounds` | S / Δs | global rounds T; must satisfy `S = T Δs` |
//! | `rate` | `dense` | `dense` or top-k rate r (weights per synapse per round) |
//! | `examples_per_device` | 400 | D |
//! | `example_steps` | 80 | S′ |
//! | `gap` | 0 | silent steps after each example |
//! | `target` | `constant` | `constant` or `periodic:P` |
//! | `p_max` | 1.0 | rate-encoding ceiling |
//! | `init_scale` | 0.05 | θ(0) drawn uniformly from `[−init_scale, init_scale]` |
//! | `eval_samples` | 20 | Monte Carlo samples for the hidden-neuron loss |
//! | `eval_every` | max(1, T/50) | rounds between evaluations |
//! | `baseline` | false | also train without sync and report loss ratios |
//! | `output` | `out` | output directory |
//! | `data` | required | `synthetic` or `raster` |
//! | `train_per_device` | 100 | synthetic: local training examples |
//! | `test_per_class` | 50 | synthetic: test examples per class |
//! | `noise` | 0.02 | synthetic: bit-flip probability |
//! | `high_rate` | 0.5 | synthetic: template rate inside the class block |
//! | `low_rate` | 0.0 | synthetic: template rate elsewhere |
//! | `train_files` | | raster: comma-separated SRAS files, one per device |
//! | `test_file` | | raster: SRAS test file |

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::data::TargetScheme;
use crate::federation::{ExchangePolicy, FederationConfig};
use crate::learning::Hyperparams;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub train_per_device: usize,
    pub test_per_class: usize,
    pub noise: f64,
    pub high_rate: f64,
    pub low_rate: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            train_per_device: 100,
            test_per_class: 50,
            noise: 0.02,
            high_rate: 0.5,
            low_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Synthetic(SyntheticConfig),
    Raster {
        train_files: Vec<PathBuf>,
        test_file: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub num_input: usize,
    pub num_hidden: usize,
    pub num_output: usize,
    pub num_basis: usize,
    pub basis_window: usize,
    pub hyper: Hyperparams,
    pub num_devices: usize,
    pub tau: Option<usize>,
    pub rounds: usize,
    pub rate: Option<f64>,
    pub examples_per_device: usize,
    pub example_steps: usize,
    pub gap: usize,
    pub target: TargetScheme,
    pub p_max: f64,
    pub init_scale: f64,
    pub eval_samples: usize,
    pub eval_every: usize,
    pub baseline: bool,
    pub output: PathBuf,
    pub data: DataSource,
    pub seed: u64,
}

impl RunConfig {
    /// Defaults with the given seed and data source; `rounds` and
    /// `eval_every` are derived.
    pub fn with_defaults(seed: u64, data: DataSource) -> Self {
        let mut c = Self {
            num_input: 20,
            num_hidden: 0,
            num_output: 2,
            num_basis: 8,
            basis_window: 10,
            hyper: Hyperparams::default(),
            num_devices: 2,
            tau: Some(5),
            rounds: 0,
            rate: None,
            examples_per_device: 400,
            example_steps: 80,
            gap: 0,
            target: TargetScheme::ConstantOne,
            p_max: 1.0,
            init_scale: 0.05,
            eval_samples: 20,
            eval_every: 0,
            baseline: false,
            output: PathBuf::from("out"),
            data,
            seed,
        };
        c.derive_schedule();
        c
    }

    /// Steps in each device's training stream, `D (S′ + G)`.
    pub fn stream_steps(&self) -> usize {
        self.examples_per_device * (self.example_steps + self.gap)
    }

    /// Recomputes `rounds = S / Δs` and `eval_every = max(1, T / 50)`.
    pub fn derive_schedule(&mut self) {
        self.rounds = self.stream_steps() / self.hyper.steps_per_round.max(1);
        self.eval_every = (self.rounds / 50).max(1);
    }

    pub fn policy(&self) -> ExchangePolicy {
        match self.rate {
            None => ExchangePolicy::Dense,
            Some(rate) => ExchangePolicy::TopK { rate },
        }
    }

    pub fn federation(&self, dataset_sizes: Vec<u64>) -> FederationConfig {
        FederationConfig {
            num_devices: self.num_devices,
            dataset_sizes,
            sync_period: self.tau,
            total_rounds: self.rounds,
            policy: self.policy(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("num_input", self.num_input),
            ("num_output", self.num_output),
            ("num_basis", self.num_basis),
            ("basis_window", self.basis_window),
            ("num_devices", self.num_devices),
            ("rounds", self.rounds),
            ("examples_per_device", self.examples_per_device),
            ("example_steps", self.example_steps),
            ("eval_samples", self.eval_samples),
            ("eval_every", self.eval_every),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(Error::config(format!("{key} must be positive")));
            }
        }
        self.hyper.validate()?;
        if self.basis_window < self.num_basis {
            return Err(Error::config("basis_window must be at least num_basis"));
        }
        if self.tau == Some(0) {
            return Err(Error::config("tau must be at least 1"));
        }
        let s = self.stream_steps();
        if s != self.rounds * self.hyper.steps_per_round {
            return Err(Error::config(format!(
                "S = D (S' + G) = {s} but T * steps_per_round = {}",
                self.rounds * self.hyper.steps_per_round
            )));
        }
        if !(0.0..=1.0).contains(&self.p_max) {
            return Err(Error::config("p_max must lie in [0, 1]"));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return Err(Error::config("init_scale must be non-negative"));
        }
        if let TargetScheme::Periodic(0) = self.target {
            return Err(Error::config("periodic target needs a positive period"));
        }
        if let Some(rate) = self.rate {
            if self.tau.is_none() {
                return Err(Error::config("a sparse rate needs a finite tau"));
            }
            let sparse = ExchangePolicy::TopK { rate };
            FederationConfig {
                num_devices: self.num_devices,
                dataset_sizes: vec![1; self.num_devices],
                sync_period: self.tau,
                total_rounds: self.rounds,
                policy: sparse,
            }
            .validate(self.num_basis)?;
        }
        match &self.data {
            DataSource::Synthetic(s) => {
                if self.num_devices > self.num_output {
                    return Err(Error::config(
                        "synthetic data gives each device its own class; num_devices must not exceed num_output",
                    ));
                }
                if s.train_per_device == 0 || s.test_per_class == 0 {
                    return Err(Error::config("synthetic example counts must be positive"));
                }
                for (key, v) in [
                    ("noise", s.noise),
                    ("high_rate", s.high_rate),
                    ("low_rate", s.low_rate),
                ] {
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::config(format!("{key} must lie in [0, 1]")));
                    }
                }
            }
            DataSource::Raster { train_files, .. } => {
                Error::check_dim("train_files", self.num_devices, train_files.len())?;
            }
        }
        Ok(())
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("cannot parse value {value:?} for key {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::config(format!(
            "cannot parse value {value:?} for key {key}"
        ))),
    }
}

/// Parses `tau` values: a positive count, or `none`/`inf` for no sync.
pub(crate) fn parse_tau(value: &str) -> Result<Option<usize>> {
    match value {
        "none" | "inf" | "never" => Ok(None),
        v => Ok(Some(parse_value("tau", v)?)),
    }
}

pub(crate) fn parse_rate(value: &str) -> Result<Option<f64>> {
    if value == "dense" {
        return Ok(None);
    }
    let rate = if let Some((num, den)) = value.split_once('/') {
        parse_value::<f64>("rate", num.trim())? / parse_value::<f64>("rate", den.trim())?
    } else {
        parse_value("rate", value)?
    };
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::config(format!("rate must be positive, got {value}")));
    }
    Ok(Some(rate))
}

fn parse_target(value: &str) -> Result<TargetScheme> {
    match value {
        "constant" => Ok(TargetScheme::ConstantOne),
        v => match v.strip_prefix("periodic:") {
            Some(p) => Ok(TargetScheme::Periodic(parse_value("target", p)?)),
            None => Err(Error::config(format!("unknown target scheme {v:?}"))),
        },
    }
}

const KEYS: &[&str] = &[
    "num_input",
    "num_hidden",
    "num_output",
    "num_basis",
    "basis_window",
    "learning_rate",
    "trace_decay",
    "steps_per_round",
    "num_devices",
    "tau",
    "rounds",
    "rate",
    "examples_per_device",
    "example_steps",
    "gap",
    "target",
    "p_max",
    "init_scale",
    "eval_samples",
    "eval_every",
    "baseline",
    "output",
    "data",
    "train_per_device",
    "test_per_class",
    "noise",
    "high_rate",
    "low_rate",
    "train_files",
    "test_file",
    "seed",
];

/// Parses and validates a configuration file's contents.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut pairs = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::config(format!(
                "line {}: expected key = value",
                lineno + 1
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::config(format!("unknown key {key:?}")));
        }
        if pairs.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::config(format!("duplicate key {key:?}")));
        }
    }
    from_pairs(&pairs)
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.as_ref().display())))?;
        parse_config(&text)
    }
}

fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<RunConfig> {
    let get = |k: &str| pairs.get(k).map(String::as_str);
    let seed = get("seed").ok_or_else(|| Error::config("missing required key \"seed\""))?;
    let seed = parse_value("seed", seed)?;

    let data = match get("data") {
        None => return Err(Error::config("missing required key \"data\"")),
        Some("synthetic") => {
            let mut s = SyntheticConfig::default();
            if let Some(v) = get("train_per_device") {
                s.train_per_device = parse_value("train_per_device", v)?;
            }
            if let Some(v) = get("test_per_class") {
                s.test_per_class = parse_value("test_per_class", v)?;
            }
            if let Some(v) = get("noise") {
                s.noise = parse_value("noise", v)?;
            }
            if let Some(v) = get("high_rate") {
                s.high_rate = parse_value("high_rate", v)?;
            }
            if let Some(v) = get("low_rate") {
                s.low_rate = parse_value("low_rate", v)?;
            }
            DataSource::Synthetic(s)
        }
        Some("raster") => {
            let train = get("train_files")
                .ok_or_else(|| Error::config("raster data needs \"train_files\""))?;
            let test =
                get("test_file").ok_or_else(|| Error::config("raster data needs \"test_file\""))?;
            DataSource::Raster {
                train_files: train.split(',').map(|p| PathBuf::from(p.trim())).collect(),
                test_file: PathBuf::from(test),
            }
        }
        Some(other) => return Err(Error::config(format!("unknown data source {other:?}"))),
    };
    for key in [
        "train_per_device",
        "test_per_class",
        "noise",
        "high_rate",
        "low_rate",
    ] {
        if get(key).is_some() && !matches!(data, DataSource::Synthetic(_)) {
            return Err(Error::config(format!(
                "key {key:?} only applies to synthetic data"
            )));
        }
    }
    for key in ["train_files", "test_file"] {
        if get(key).is_some() && !matches!(data, DataSource::Raster { .. }) {
            return Err(Error::config(format!(
                "key {key:?} only applies to raster data"
            )));
        }
    }

    let mut c = RunConfig::with_defaults(seed, data);
    macro_rules! set {
        ($key:literal, $field:expr) => {
            if let Some(v) = get($key) {
                $field = parse_value($key, v)?;
            }
        };
    }
    set!("num_input", c.num_input);
    set!("num_hidden", c.num_hidden);
    set!("num_output", c.num_output);
    set!("num_basis", c.num_basis);
    set!("basis_window", c.basis_window);
    set!("learning_rate", c.hyper.learning_rate);
    set!("trace_decay", c.hyper.trace_decay);
    set!("steps_per_round", c.hyper.steps_per_round);
    set!("num_devices", c.num_devices);
    set!("examples_per_device", c.examples_per_device);
    set!("example_steps", c.example_steps);
    set!("gap", c.gap);
    set!("p_max", c.p_max);
    set!("init_scale", c.init_scale);
    set!("eval_samples", c.eval_samples);
    if let Some(v) = get("tau") {
        c.tau = parse_tau(v)?;
    }
    if let Some(v) = get("rate") {
        c.rate = parse_rate(v)?;
    }
    if let Some(v) = get("target") {
        c.target = parse_target(v)?;
    }
    if let Some(v) = get("baseline") {
        c.baseline = parse_bool("baseline", v)?;
    }
    if let Some(v) = get("output") {
        c.output = PathBuf::from(v);
    }
    c.derive_schedule();
    set!("rounds", c.rounds);
    set!("eval_every", c.eval_every);
    c.validate()?;
    Ok(c)
}
