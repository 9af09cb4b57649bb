use std::f64::consts::PI;

use crate::{Error, Result};

/// Fixed synaptic basis kernels `a_l(j)` and the feedback kernel `b(j)`,
/// sampled at lags `j = 1..=window_len`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    num_basis: usize,
    window_len: usize,
    centers: Vec<f64>,
    width: f64,
    /// `num_basis x window_len`, row-major; column `j - 1` holds lag `j`.
    basis_values: Vec<f64>,
    feedback_values: Vec<f64>,
}

/// Raised-cosine bump `½(1 + cos(π (s − center) / width))` on `|s − center| ≤ width`.
pub fn raised_cosine(s: f64, center: f64, width: f64) -> f64 {
    let d = s - center;
    if d.abs() > width {
        0.0
    } else {
        0.5 * (1.0 + (PI * d / width).cos())
    }
}

/// Builds `num_basis` raised cosines covering lags `1..=window_len`.
///
/// Centers are spread linearly over `[1, window_len]` and snapped to the
/// nearest lag, so every kernel peaks at exactly 1.0 on a sample. The bump
/// half-support is twice the center spacing. A single basis is one bump
/// spanning the whole window. The feedback kernel is
/// `exp(−(j − 1) / τ_b)` with `τ_b = window_len / 2`.
pub fn make_raised_cosine_basis(num_basis: usize, window_len: usize) -> Result<BasisSet> {
    if num_basis == 0 {
        return Err(Error::config("num_basis must be at least 1"));
    }
    if window_len < num_basis {
        return Err(Error::config(format!(
            "window_len ({window_len}) must be at least num_basis ({num_basis})"
        )));
    }
    let (centers, width) = if num_basis == 1 {
        let c = window_len.div_ceil(2) as f64;
        (vec![c], window_len as f64 - c + 1.0)
    } else {
        let spacing = (window_len - 1) as f64 / (num_basis - 1) as f64;
        let centers = (0..num_basis)
            .map(|l| (1.0 + l as f64 * spacing).round())
            .collect();
        (centers, 2.0 * spacing)
    };

    let mut basis_values = Vec::with_capacity(num_basis * window_len);
    for &c in &centers {
        basis_values.extend((1..=window_len).map(|j| raised_cosine(j as f64, c, width)));
    }
    let tau_b = window_len as f64 / 2.0;
    let feedback_values = (1..=window_len)
        .map(|j| (-((j - 1) as f64) / tau_b).exp())
        .collect();

    Ok(BasisSet {
        num_basis,
        window_len,
        centers,
        width,
        basis_values,
        feedback_values,
    })
}

impl BasisSet {
    /// A basis from arbitrary kernel samples. Samples must be finite.
    pub fn from_values(
        num_basis: usize,
        window_len: usize,
        basis_values: Vec<f64>,
        feedback_values: Vec<f64>,
    ) -> Result<Self> {
        if num_basis == 0 || window_len == 0 {
            return Err(Error::config(
                "basis needs num_basis >= 1 and window_len >= 1",
            ));
        }
        Error::check_dim("basis values", num_basis * window_len, basis_values.len())?;
        Error::check_dim("feedback values", window_len, feedback_values.len())?;
        if basis_values
            .iter()
            .chain(&feedback_values)
            .any(|v| !v.is_finite())
        {
            return Err(Error::config("kernel samples must be finite"));
        }
        Ok(Self {
            num_basis,
            window_len,
            centers: Vec::new(),
            width: f64::NAN,
            basis_values,
            feedback_values,
        })
    }

    pub fn num_basis(&self) -> usize {
        self.num_basis
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    /// Kernel centers; empty for bases built with [`BasisSet::from_values`].
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// `a_l(lag)` for `lag` in `1..=window_len`.
    pub fn value(&self, l: usize, lag: usize) -> f64 {
        self.basis_values[l * self.window_len + lag - 1]
    }

    /// Samples of basis `l` at lags `1..=window_len`.
    pub fn kernel(&self, l: usize) -> &[f64] {
        &self.basis_values[l * self.window_len..(l + 1) * self.window_len]
    }

    /// `b(lag)` for `lag` in `1..=window_len`.
    pub fn feedback(&self, lag: usize) -> f64 {
        self.feedback_values[lag - 1]
    }

    pub fn feedback_kernel(&self) -> &[f64] {
        &self.feedback_values
    }
}
