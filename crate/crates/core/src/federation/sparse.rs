use super::average::weighted_mean;
use crate::spike::{ModelParams, ParamLayout};
use crate::{Error, Result};

/// Indices of the `k` largest magnitudes, ties to the lower index, sorted
/// ascending.
pub fn select_topk(magnitudes: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..magnitudes.len()).collect();
    order.sort_by(|&a, &b| magnitudes[b].total_cmp(&magnitudes[a]).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

/// Basis weights a device sends for one synapse.
#[derive(Debug, Clone, PartialEq)]
pub struct SynapseEntries {
    /// Distinct basis indices, ascending.
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

/// What a device uploads under the sparse policy: every bias and feedback
/// weight, plus a subset of basis weights on each synapse.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseUpdate {
    /// `(bias, feedback)` for every neuron, neuron order.
    pub neuron_terms: Vec<[f64; 2]>,
    /// One entry per synapse in layout order.
    pub synapses: Vec<SynapseEntries>,
}

impl SparseUpdate {
    /// Sends, per synapse, the `k` basis weights whose accumulated applied
    /// update since the last sync (`applied`, same layout as θ) is largest in
    /// magnitude.
    pub fn select(params: &ModelParams, applied: &[f64], k: usize) -> Result<Self> {
        let layout = params.layout();
        Error::check_dim("applied update", layout.dim(), applied.len())?;
        if k == 0 || k > layout.num_basis() {
            return Err(Error::config(format!(
                "kept weights per synapse must lie in 1..={}, got {k}",
                layout.num_basis()
            )));
        }
        let theta = params.as_slice();
        let mut mags = vec![0.0; layout.num_basis()];
        let synapses = layout
            .synapses()
            .map(|(_, _, range)| {
                for (m, a) in mags.iter_mut().zip(&applied[range.clone()]) {
                    *m = a.abs();
                }
                let indices = select_topk(&mags, k);
                let values = indices.iter().map(|&i| theta[range.start + i]).collect();
                SynapseEntries { indices, values }
            })
            .collect();
        Ok(Self {
            neuron_terms: neuron_terms(params),
            synapses,
        })
    }

    /// Every entry of θ.
    pub fn dense(params: &ModelParams) -> Self {
        let layout = params.layout();
        let theta = params.as_slice();
        let synapses = layout
            .synapses()
            .map(|(_, _, range)| SynapseEntries {
                indices: (0..range.len()).collect(),
                values: theta[range].to_vec(),
            })
            .collect();
        Self {
            neuron_terms: neuron_terms(params),
            synapses,
        }
    }

    /// Number of parameter values carried.
    pub fn value_entries(&self) -> usize {
        2 * self.neuron_terms.len() + self.index_entries()
    }

    /// Number of basis indices carried alongside the values.
    pub fn index_entries(&self) -> usize {
        self.synapses.iter().map(|s| s.indices.len()).sum()
    }

    fn check(&self, layout: &ParamLayout) -> Result<()> {
        Error::check_dim(
            "neuron terms",
            layout.num_neurons(),
            self.neuron_terms.len(),
        )?;
        Error::check_dim(
            "synapse entries",
            layout.num_synapses(),
            self.synapses.len(),
        )?;
        for s in &self.synapses {
            Error::check_dim("synapse values", s.indices.len(), s.values.len())?;
            if s.indices.windows(2).any(|w| w[0] >= w[1])
                || s.indices.last().is_some_and(|&i| i >= layout.num_basis())
            {
                return Err(Error::config(
                    "synapse indices must be distinct, sorted and in range",
                ));
            }
        }
        Ok(())
    }
}

fn neuron_terms(params: &ModelParams) -> Vec<[f64; 2]> {
    (0..params.layout().num_neurons())
        .map(|n| [params.bias(n), params.feedback_weight(n)])
        .collect()
}

/// Base-station merge of sparse uploads.
///
/// Each basis weight sent by several devices becomes their dataset-size
/// weighted average, a weight sent by one device takes that device's value,
/// and a weight nobody sent is set to zero. Bias and feedback weights are
/// averaged densely.
pub fn sparse_merge(
    layout: &std::sync::Arc<ParamLayout>,
    updates: &[SparseUpdate],
    dataset_sizes: &[u64],
) -> Result<ModelParams> {
    if updates.is_empty() {
        return Err(Error::config("sparse_merge needs at least one update"));
    }
    Error::check_dim("dataset sizes", updates.len(), dataset_sizes.len())?;
    for u in updates {
        u.check(layout)?;
    }
    let total: u64 = dataset_sizes.iter().sum();
    if total == 0 {
        return Err(Error::config("total dataset size is zero"));
    }
    let mut out = ModelParams::zeros(layout.clone());
    let theta = out.as_mut_slice();
    let mut terms = Vec::with_capacity(updates.len());

    for n in 0..layout.num_neurons() {
        for (slot, index) in [layout.bias_index(n), layout.feedback_index(n)]
            .into_iter()
            .enumerate()
        {
            terms.clear();
            terms.extend(
                updates
                    .iter()
                    .zip(dataset_sizes)
                    .map(|(u, &w)| (u.neuron_terms[n][slot], w as f64)),
            );
            theta[index] = weighted_mean(&mut terms, total as f64);
        }
    }

    let mut cursors = vec![0usize; updates.len()];
    for (s, (_, _, range)) in layout.synapses().enumerate() {
        for l in 0..layout.num_basis() {
            terms.clear();
            let mut sender_weight = 0u64;
            for ((u, &w), cur) in updates.iter().zip(dataset_sizes).zip(cursors.iter_mut()) {
                let entries = &u.synapses[s];
                if entries.indices.get(*cur) == Some(&l) {
                    terms.push((entries.values[*cur], w as f64));
                    sender_weight += w;
                    *cur += 1;
                }
            }
            theta[range.start + l] = match terms.len() {
                0 => 0.0,
                1 => terms[0].0,
                _ if sender_weight == 0 => 0.0,
                _ => weighted_mean(&mut terms, sender_weight as f64),
            };
        }
        cursors.fill(0);
    }
    Ok(out)
}
