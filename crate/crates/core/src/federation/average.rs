use crate::{Error, Result};

/// Weighted mean of `(value, weight)` pairs with `Σ weight > 0`.
///
/// Equal values return that value untouched, and the weighted terms are summed
/// in sorted order, so the result does not depend on the order of the pairs.
pub(crate) fn weighted_mean(terms: &mut [(f64, f64)], total_weight: f64) -> f64 {
    let first = terms[0].0;
    if terms.iter().all(|&(v, _)| v == first) {
        return first;
    }
    for t in terms.iter_mut() {
        t.0 *= t.1 / total_weight;
    }
    terms.sort_by(|a, b| a.0.total_cmp(&b.0));
    terms.iter().fold(0.0, |acc, &(v, _)| acc + v)
}

/// `θ = Σ_i |D_i| θ_i / Σ_i |D_i|`, elementwise.
pub fn fed_average(updates: &[(&[f64], u64)]) -> Result<Vec<f64>> {
    let Some(&(first, _)) = updates.first() else {
        return Err(Error::config("fed_average needs at least one update"));
    };
    let dim = first.len();
    for (theta, _) in updates {
        Error::check_dim("device parameters", dim, theta.len())?;
    }
    let total: u64 = updates.iter().map(|&(_, w)| w).sum();
    if total == 0 {
        return Err(Error::config("total dataset size is zero"));
    }
    let total = total as f64;
    let mut terms = Vec::with_capacity(updates.len());
    Ok((0..dim)
        .map(|j| {
            terms.clear();
            terms.extend(updates.iter().map(|&(theta, w)| (theta[j], w as f64)));
            weighted_mean(&mut terms, total)
        })
        .collect())
}
