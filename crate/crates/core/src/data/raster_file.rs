//! `SRAS` spike raster files.
//!
//! Layout (little-endian): magic `SRAS`, `u16` version, `u32` num_neurons,
//! `u32` num_steps, `u32` num_examples, `u32` num_classes, then per example a
//! `u16` label followed by `ceil(num_neurons * num_steps / 8)` bytes of packed
//! bits, neuron-major and step-minor, most significant bit first. Unused
//! trailing bits of each example must be zero.

use std::fs;
use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::spike::SpikeRecord;
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"SRAS";
pub const VERSION: u16 = 1;

/// Labeled input rasters sharing one shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterDataset {
    pub num_neurons: usize,
    pub num_steps: usize,
    pub num_classes: usize,
    pub examples: Vec<(u16, SpikeRecord)>,
}

impl RasterDataset {
    pub fn new(num_neurons: usize, num_steps: usize, num_classes: usize) -> Self {
        Self {
            num_neurons,
            num_steps,
            num_classes,
            examples: Vec::new(),
        }
    }

    fn payload_len(&self) -> usize {
        (self.num_neurons * self.num_steps).div_ceil(8)
    }

    fn validate(&self) -> Result<()> {
        for field in [
            self.num_neurons,
            self.num_steps,
            self.num_classes,
            self.examples.len(),
        ] {
            if u32::try_from(field).is_err() {
                return Err(Error::format("header field exceeds u32"));
            }
        }
        for (label, r) in &self.examples {
            if *label as usize >= self.num_classes {
                return Err(Error::format(format!("label {label} >= num_classes")));
            }
            Error::check_dim("raster neurons", self.num_neurons, r.num_neurons())?;
            Error::check_dim("raster steps", self.num_steps, r.num_steps())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let payload = self.payload_len();
        let mut out = Vec::with_capacity(22 + self.examples.len() * (2 + payload));
        out.extend_from_slice(MAGIC);
        out.write_u16::<LittleEndian>(VERSION)?;
        for field in [
            self.num_neurons,
            self.num_steps,
            self.examples.len(),
            self.num_classes,
        ] {
            out.write_u32::<LittleEndian>(field as u32)?;
        }
        for (label, raster) in &self.examples {
            out.write_u16::<LittleEndian>(*label)?;
            let mut packed = vec![0u8; payload];
            for (i, &bit) in raster.bits().iter().enumerate() {
                if bit != 0 {
                    packed[i / 8] |= 0x80 >> (i % 8);
                }
            }
            out.extend_from_slice(&packed);
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor::new(bytes);
        let truncated = |_| Error::format("truncated file");
        let mut magic = [0u8; 4];
        cur.read_exact(&mut magic).map_err(truncated)?;
        if &magic != MAGIC {
            return Err(Error::format("bad magic, not an SRAS file"));
        }
        let version = cur.read_u16::<LittleEndian>().map_err(truncated)?;
        if version != VERSION {
            return Err(Error::format(format!("unsupported version {version}")));
        }
        let mut header = [0usize; 4];
        for h in header.iter_mut() {
            *h = cur.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        }
        let [num_neurons, num_steps, num_examples, num_classes] = header;
        let mut ds = Self::new(num_neurons, num_steps, num_classes);
        let payload = ds.payload_len();
        let bits_used = num_neurons * num_steps;
        let remaining = bytes.len() as u64 - cur.position();
        if (remaining as u128) < num_examples as u128 * (2 + payload) as u128 {
            return Err(Error::format(format!(
                "truncated file: header declares {num_examples} examples of {} bytes, {remaining} bytes remain",
                2 + payload
            )));
        }
        ds.examples.reserve(num_examples);
        let mut packed = vec![0u8; payload];
        for _ in 0..num_examples {
            let label = cur.read_u16::<LittleEndian>().map_err(truncated)?;
            if label as usize >= num_classes {
                return Err(Error::format(format!(
                    "label {label} >= num_classes {num_classes}"
                )));
            }
            cur.read_exact(&mut packed).map_err(truncated)?;
            let bits: Vec<u8> = (0..bits_used)
                .map(|i| (packed[i / 8] >> (7 - i % 8)) & 1)
                .collect();
            if bits_used % 8 != 0 && packed[payload - 1] & (0xff >> (bits_used % 8)) != 0 {
                return Err(Error::format("non-zero padding bits"));
            }
            ds.examples
                .push((label, SpikeRecord::from_bits(num_neurons, num_steps, bits)?));
        }
        if cur.position() as usize != bytes.len() {
            return Err(Error::format("trailing bytes after last example"));
        }
        Ok(ds)
    }
}

pub fn save_raster_file(dataset: &RasterDataset, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, dataset.to_bytes()?)?;
    Ok(())
}

pub fn load_raster_file(path: impl AsRef<Path>) -> Result<RasterDataset> {
    RasterDataset::from_bytes(&fs::read(path)?)
}
