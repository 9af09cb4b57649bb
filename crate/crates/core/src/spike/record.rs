use crate::{Error, Result};

/// Binary spike raster, neuron-major.
///
/// Column `j` holds step `s = j + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpikeRecord {
    num_neurons: usize,
    num_steps: usize,
    bits: Vec<u8>,
}

impl SpikeRecord {
    pub fn zeros(num_neurons: usize, num_steps: usize) -> Self {
        Self {
            num_neurons,
            num_steps,
            bits: vec![0; num_neurons * num_steps],
        }
    }

    /// Wraps neuron-major bits, rejecting anything other than 0 or 1.
    pub fn from_bits(num_neurons: usize, num_steps: usize, bits: Vec<u8>) -> Result<Self> {
        Error::check_dim("spike raster", num_neurons * num_steps, bits.len())?;
        if let Some(v) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::format(format!("non-binary spike value {v}")));
        }
        Ok(Self {
            num_neurons,
            num_steps,
            bits,
        })
    }

    /// Builds a raster from one row per neuron.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let num_steps = rows.first().map_or(0, |r| r.as_ref().len());
        let mut bits = Vec::with_capacity(rows.len() * num_steps);
        for row in rows {
            Error::check_dim("raster row", num_steps, row.as_ref().len())?;
            bits.extend_from_slice(row.as_ref());
        }
        Self::from_bits(rows.len(), num_steps, bits)
    }

    pub fn num_neurons(&self) -> usize {
        self.num_neurons
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn get(&self, neuron: usize, col: usize) -> u8 {
        self.bits[neuron * self.num_steps + col]
    }

    pub fn set(&mut self, neuron: usize, col: usize, spike: bool) {
        self.bits[neuron * self.num_steps + col] = spike as u8;
    }

    pub fn row(&self, neuron: usize) -> &[u8] {
        &self.bits[neuron * self.num_steps..(neuron + 1) * self.num_steps]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn spike_count(&self, neuron: usize) -> usize {
        self.row(neuron).iter().map(|&b| b as usize).sum()
    }

    /// Copies columns `start..start + len` into a new raster.
    pub fn slice_steps(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.num_steps {
            return Err(Error::Dimension {
                what: "raster step range",
                expected: self.num_steps,
                actual: start + len,
            });
        }
        let mut bits = Vec::with_capacity(self.num_neurons * len);
        for n in 0..self.num_neurons {
            bits.extend_from_slice(&self.row(n)[start..start + len]);
        }
        Ok(Self {
            num_neurons: self.num_neurons,
            num_steps: len,
            bits,
        })
    }

    /// Concatenates rasters along time. All parts must have `num_neurons` rows.
    pub fn concat_steps(num_neurons: usize, parts: &[&SpikeRecord]) -> Result<Self> {
        let num_steps = parts.iter().map(|p| p.num_steps).sum();
        for p in parts {
            Error::check_dim("raster neurons", num_neurons, p.num_neurons)?;
        }
        let mut bits = Vec::with_capacity(num_neurons * num_steps);
        for n in 0..num_neurons {
            for p in parts {
                bits.extend_from_slice(p.row(n));
            }
        }
        Ok(Self {
            num_neurons,
            num_steps,
            bits,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_binary() {
        assert!(matches!(
            SpikeRecord::from_bits(1, 2, vec![0, 2]),
            Err(Error::Format(_))
        ));
        assert!(SpikeRecord::from_bits(1, 2, vec![0]).is_err());
    }

    #[test]
    fn slice_and_concat() {
        let r = SpikeRecord::from_rows(&[[1, 0, 1, 1], [0, 1, 0, 0]]).unwrap();
        let a = r.slice_steps(0, 1).unwrap();
        let b = r.slice_steps(1, 3).unwrap();
        assert_eq!(b.row(0), &[0, 1, 1]);
        assert_eq!(SpikeRecord::concat_steps(2, &[&a, &b]).unwrap(), r);
        assert!(r.slice_steps(2, 3).is_err());
        assert_eq!(r.spike_count(0), 3);
    }
}
