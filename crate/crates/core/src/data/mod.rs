//! Spike-domain datasets.

mod encode;
mod raster_file;
mod synthetic;

pub use encode::{
    concatenate_stream, encode_target, rate_encode, sample_stream, Covariates, EncodedExample,
    Example, TargetScheme,
};
pub use raster_file::{load_raster_file, save_raster_file, RasterDataset, MAGIC, VERSION};
pub use synthetic::{
    block_templates, majority_block_class, make_synthetic_noniid, SyntheticData, SyntheticSpec,
};
